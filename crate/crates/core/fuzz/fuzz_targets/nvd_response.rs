#![no_main]

use libfuzzer_sys::fuzz_target;
use vulture::clients::parse_nvd_response;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        let _ = parse_nvd_response(text);
    }
});
