#![no_main]

use libfuzzer_sys::fuzz_target;
use vulture::vuln_db::cpe::parse_cpe_name;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_cpe_name(text);
    }
});
