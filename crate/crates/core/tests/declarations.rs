//! Twenty global-declaration patches with hand-assigned outcomes.

use vulture::flaw_detect::{classify_reuse, version_diff_files, Group, Verdict};
use vulture::reuse_id::snippets_of;

use Group::*;
use Verdict::*;

struct Case {
    name: &'static str,
    vulnerable: &'static str,
    patched: &'static str,
    target: &'static str,
    expect: &'static [(&'static str, Group, Verdict)],
}

const CASES: [Case; 20] = [
    Case { name: "define/vulnerable", vulnerable: "#define MAX_HDR 8192\n", patched: "#define MAX_HDR 1024\n", target: "#define MAX_HDR 8192\n", expect: &[("MAX_HDR", G2, Vulnerable)] },
    Case { name: "define/patched", vulnerable: "#define MAX_HDR 8192\n", patched: "#define MAX_HDR 1024\n", target: "#define MAX_HDR 1024\n", expect: &[("MAX_HDR", G1, Secure)] },
    Case { name: "array/vulnerable", vulnerable: "static char name_buf[16];\n", patched: "static char name_buf[64];\n", target: "static char name_buf[16];\n", expect: &[("name_buf", G2, Vulnerable)] },
    Case { name: "array/patched", vulnerable: "static char name_buf[16];\n", patched: "static char name_buf[64];\n", target: "static char name_buf[64];\n", expect: &[("name_buf", G1, Secure)] },
    Case { name: "flag/vulnerable", vulnerable: "static int allow_legacy = 1;\n", patched: "static int allow_legacy = 0;\n", target: "int verbose = 0;\nstatic int allow_legacy = 1;\n", expect: &[("allow_legacy", G2, Vulnerable)] },
    Case { name: "flag/patched", vulnerable: "static int allow_legacy = 1;\n", patched: "static int allow_legacy = 0;\n", target: "static int allow_legacy = 0;\nint verbose = 0;\n", expect: &[("allow_legacy", G1, Secure)] },
    Case { name: "enum/vulnerable", vulnerable: "enum { MAX_DEPTH = 100000 };\n", patched: "enum { MAX_DEPTH = 256 };\n", target: "enum { MAX_DEPTH = 100000 };\n", expect: &[("MAX_DEPTH", G2, Vulnerable)] },
    Case { name: "enum/patched", vulnerable: "enum { MAX_DEPTH = 100000 };\n", patched: "enum { MAX_DEPTH = 256 };\n", target: "enum { MAX_DEPTH = 256 };\n", expect: &[("MAX_DEPTH", G1, Secure)] },
    Case {
        name: "struct/vulnerable",
        vulnerable: "struct frame {\n    unsigned char *data;\n    int len;\n};\n",
        patched: "struct frame {\n    unsigned char *data;\n    size_t len;\n    size_t cap;\n};\n",
        target: "struct frame {\n    unsigned char *data;\n    int len;\n};\n",
        expect: &[("frame", G2, Vulnerable)],
    },
    Case {
        name: "struct/patched",
        vulnerable: "struct frame {\n    unsigned char *data;\n    int len;\n};\n",
        patched: "struct frame {\n    unsigned char *data;\n    size_t len;\n    size_t cap;\n};\n",
        target: "struct frame {\n  unsigned char *data;\n  size_t len;\n  size_t cap;\n};\n",
        expect: &[("frame", G1, Secure)],
    },
    Case { name: "table/vulnerable", vulnerable: "static const int limits[] = { 16, 32, 65536 };\n", patched: "static const int limits[] = { 16, 32, 4096 };\n", target: "static const int limits[] = { 16, 32, 65536 };\n", expect: &[("limits", G2, Vulnerable)] },
    Case { name: "table/patched", vulnerable: "static const int limits[] = { 16, 32, 65536 };\n", patched: "static const int limits[] = { 16, 32, 4096 };\n", target: "static const int limits[] = { 16, 32, 4096 }; /* tuned */\n", expect: &[("limits", G1, Secure)] },
    Case { name: "typedef/vulnerable", vulnerable: "typedef int length_t;\n", patched: "typedef unsigned int length_t;\n", target: "typedef int length_t;\n", expect: &[("length_t", G2, Vulnerable)] },
    Case { name: "typedef/patched", vulnerable: "typedef int length_t;\n", patched: "typedef unsigned int length_t;\n", target: "typedef unsigned int length_t;\n", expect: &[("length_t", G1, Secure)] },
    Case { name: "unrelated", vulnerable: "#define MAX_HDR 8192\n", patched: "#define MAX_HDR 1024\n", target: "#define MAX_BODY 8192\nstatic int counter;\n", expect: &[] },
    Case {
        name: "pair/both-vulnerable",
        vulnerable: "#define RX_RING 4096\n#define TX_RING 4096\n",
        patched: "#define RX_RING 512\n#define TX_RING 512\n",
        target: "#define RX_RING 4096\n#define TX_RING 4096\n",
        expect: &[("RX_RING", G2, Vulnerable), ("TX_RING", G2, Vulnerable)],
    },
    Case {
        name: "pair/half-patched",
        vulnerable: "#define RX_RING 4096\n#define TX_RING 4096\n",
        patched: "#define RX_RING 512\n#define TX_RING 512\n",
        target: "#define RX_RING 512\n#define TX_RING 4096\n",
        expect: &[("RX_RING", G1, Secure), ("TX_RING", G2, Vulnerable)],
    },
    Case {
        name: "added-guard/missing",
        vulnerable: "#define NAME_MAX_LEN 255\n",
        patched: "#define NAME_MAX_LEN 128\n#define NAME_GUARD 1\n",
        target: "#define NAME_MAX_LEN 255\n",
        expect: &[("NAME_MAX_LEN", G2, Vulnerable)],
    },
    Case {
        name: "removed-backdoor/present",
        vulnerable: "static int debug_unlock = 1;\nstatic int retries = 3;\n",
        patched: "static int retries = 3;\n",
        target: "static int debug_unlock = 1;\nstatic int retries = 3;\n",
        expect: &[("debug_unlock", G2, Vulnerable)],
    },
    Case {
        name: "removed-backdoor/gone",
        vulnerable: "static int debug_unlock = 1;\nstatic int retries = 3;\n",
        patched: "static int retries = 3;\n",
        target: "static int retries = 3;\n",
        expect: &[],
    },
];

#[test]
fn declaration_patches_match_labels() {
    for case in &CASES {
        let scope = version_diff_files("include/config.h", Some(case.vulnerable), Some(case.patched));
        assert!(!scope.items.is_empty(), "{}", case.name);
        let targets = snippets_of(case.target, "vendor/config.h");
        let all: Vec<usize> = (0..targets.len()).collect();
        let mut got: Vec<(&str, Group, Verdict)> = classify_reuse(&targets, &all, &scope, 30)
            .into_iter()
            .map(|c| (targets[c.snippet].name.as_str(), c.group, c.verdict))
            .collect();
        got.sort_by(|a, b| a.0.cmp(b.0));
        assert_eq!(got, case.expect, "{}", case.name);
    }
}
