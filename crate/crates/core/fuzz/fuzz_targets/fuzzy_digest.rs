#![no_main]

use libfuzzer_sys::fuzz_target;
use vulture::code_model::{distance, FuzzyDigest};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let mut parts = text.splitn(2, '\n');
    let a = parts.next().and_then(|s| s.parse::<FuzzyDigest>().ok());
    let b = parts.next().and_then(|s| s.trim().parse::<FuzzyDigest>().ok());
    if let (Some(a), Some(b)) = (a, b) {
        assert_eq!(distance(&a, &b), distance(&b, &a));
    }
});
