//! Digest stability under vendor edits. Rename distances are frozen from
//! py-tlsh run over the same normalized bodies.

use vulture::code_model::distance;
use vulture::reuse_id::{snippets_of, TargetSnippet};
use vulture_testkit::robustness::*;

fn function(src: &str) -> TargetSnippet {
    snippets_of(src, "f.c").into_iter().find(|t| t.is_function()).unwrap()
}

fn renamed_distances(rename: fn(&str) -> Option<(String, String)>) -> Vec<u32> {
    base_functions()
        .iter()
        .map(|(_, src)| {
            let (_, renamed) = rename(src).unwrap();
            distance(&function(src).hash, &function(&renamed).hash).unwrap()
        })
        .collect()
}

#[test]
fn twenty_distinct_functions() {
    let fns = base_functions();
    assert_eq!(fns.len(), 20);
    let mut digests: Vec<_> = fns.iter().map(|(_, s)| function(s).hash.to_string()).collect();
    digests.sort();
    digests.dedup();
    assert_eq!(digests.len(), 20);
}

#[test]
fn cosmetic_edits_leave_the_digest_unchanged() {
    for (name, src) in base_functions() {
        let edited = cosmetic(&src);
        assert_ne!(edited, src);
        let (a, b) = (function(&src), function(&edited));
        assert_eq!(a.normalized_body, b.normalized_body, "{name}");
        assert_eq!(distance(&a.hash, &b.hash).unwrap(), 0, "{name}");
    }
}

#[test]
fn function_rename_distances() {
    let expected = [6, 2, 18, 55, 69, 146, 49, 6, 57, 9, 5, 5, 10, 7, 4, 7, 4, 29, 10, 68];
    assert_eq!(renamed_distances(rename_function), expected);
}

#[test]
fn parameter_rename_distances() {
    let expected = [131, 129, 98, 137, 108, 134, 155, 153, 110, 75, 32, 34, 146, 96, 76, 76, 224, 174, 157, 153];
    assert_eq!(renamed_distances(rename_first_parameter), expected);
}

#[test]
fn renamed_identifier_is_gone() {
    for (name, src) in base_functions() {
        let (old, renamed) = rename_first_parameter(&src).unwrap();
        let body = function(&renamed).normalized_body;
        assert!(!body.split(|c: char| !c.is_ascii_alphanumeric() && c != '_').any(|w| w == old), "{name}");
    }
}
