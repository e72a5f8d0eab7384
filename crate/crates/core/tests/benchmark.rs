//! The labelled patch-presence benchmark. Target-to-vulnerable and
//! target-to-patched distances are frozen from py-tlsh; they decide which
//! triples reach chunk matching at all.

use vulture::code_model::distance;
use vulture::flaw_detect::Verdict;
use vulture::reuse_id::{snippets_of, TargetSnippet};
use vulture_testkit::benchmark::*;

const TH: u32 = 30;

const ORACLE: [(u32, u32); 56] = [
    (0, 56), (56, 0), (32, 24), (82, 154), (24, 56), (111, 53), (73, 94),
    (0, 17), (17, 0), (10, 42), (43, 36), (51, 36), (61, 36), (59, 30),
    (0, 49), (49, 0), (34, 87), (98, 161), (66, 98), (31, 77), (48, 80),
    (0, 3), (3, 0), (48, 50), (19, 19), (15, 15), (27, 27), (20, 18),
    (0, 43), (43, 0), (52, 65), (15, 51), (44, 20), (84, 26), (58, 18),
    (0, 4), (4, 0), (23, 24), (19, 20), (24, 25), (14, 11), (20, 19),
    (0, 46), (46, 0), (50, 13), (23, 62), (53, 12), (65, 13), (26, 61),
    (0, 40), (40, 0), (37, 35), (130, 88), (43, 16), (39, 32), (95, 52),
];

fn function(src: &str) -> TargetSnippet {
    snippets_of(src, "f.c").into_iter().find(|t| t.is_function()).unwrap()
}

#[test]
fn corpus_shape() {
    let all = all_triples();
    assert_eq!(all.len(), 64);
    for kind in [Kind::ExactVulnerable, Kind::CustomUnpatched, Kind::CustomPatchedReformat, Kind::CustomPatchedShift, Kind::DeclVulnerable] {
        assert!(all.iter().any(|t| t.kind == kind));
    }
    for t in &all {
        assert_ne!(t.vulnerable, t.patched, "{}", t.name);
    }
}

#[test]
fn distances_match_reference() {
    for (t, want) in function_triples().iter().zip(ORACLE) {
        let target = function(&t.target).hash;
        let got = (distance(&target, &function(&t.vulnerable).hash).unwrap(), distance(&target, &function(&t.patched).hash).unwrap());
        assert_eq!(got, want, "{}", t.name);
    }
}

#[test]
fn exact_reuse_is_never_wrong() {
    for t in all_triples().iter().filter(|t| t.kind.is_exact()) {
        let p = predict(t, TH);
        assert_eq!(p.predicted, p.label, "{}", t.name);
    }
}

#[test]
fn declaration_cases_follow_labels() {
    for t in decl_triples() {
        let p = predict(&t, TH);
        assert_eq!(p.predicted, p.label, "{}", t.name);
    }
}

#[test]
fn only_far_copies_escape() {
    for (t, (dv, dp)) in function_triples().iter().zip(ORACLE) {
        let p = predict(t, TH);
        assert!(!p.predicted || p.label, "false alarm on {}", t.name);
        if dv.min(dp) >= TH {
            assert_eq!(p.verdicts, [Verdict::Unanalyzed], "{}", t.name);
        } else {
            assert_eq!(p.predicted, p.label, "{}", t.name);
        }
    }
}

#[test]
fn score() {
    let ps: Vec<_> = all_triples().iter().map(|t| predict(t, TH)).collect();
    let s = Score::of(&ps);
    assert_eq!(s, Score { tp: 20, fp: 0, fn_: 8, tn: 36 });
    assert!((s.f1() - 40.0 / 48.0).abs() < 1e-12);
}
