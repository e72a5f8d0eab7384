#![no_main]

use libfuzzer_sys::fuzz_target;
use vulture::diff::parse_unified;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(files) = parse_unified(text) {
            for f in &files {
                let _ = f.path();
                for _ in f.changed_lines() {}
            }
        }
    }
});
