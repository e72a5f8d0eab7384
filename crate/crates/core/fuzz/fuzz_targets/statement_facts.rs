#![no_main]

use libfuzzer_sys::fuzz_target;
use vulture::code_model::{block_structure, statement_facts};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    for line in text.lines() {
        let _ = statement_facts(line);
    }
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(block_structure(&lines).len(), lines.len());
});
