#![no_main]

use libfuzzer_sys::fuzz_target;
use vulture::code_model::{annotate_lines, extract_snippets, normalize_text};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let extraction = extract_snippets(text, "fuzz.c");
    for s in &extraction.snippets {
        assert_eq!(normalize_text(&s.normalized_body), s.normalized_body);
        let lines = s.normalized_lines();
        assert_eq!(annotate_lines(&lines).len(), lines.len());
        let _ = s.digest();
    }
});
