#![no_main]

use libfuzzer_sys::fuzz_target;
use vulture::vuln_db::{load_str, to_jsonl};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(seg) = load_str(text) {
        let again = load_str(&to_jsonl(&seg)).expect("serialized segment reloads");
        assert_eq!(to_jsonl(&again), to_jsonl(&seg));
    }
});
