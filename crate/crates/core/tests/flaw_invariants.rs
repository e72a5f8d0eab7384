use proptest::prelude::*;
use vulture::flaw_detect::*;
use vulture::reuse_id::snippets_of;

const BODY: [&str; 10] = [
    "n = read_len(f);",
    "buf = alloc(n);",
    "for (i = 0; i < n; i++) {",
    "buf[i] = get(f);",
    "}",
    "sum = 0;",
    "while (k < n)",
    "sum += buf[k++];",
    "emit(out, sum);",
    "release(buf);",
];

const FIXES: [&str; 6] = [
    "if (n > MAX_LEN)",
    "return ERR_LEN;",
    "if (buf == NULL)",
    "check_eof(f);",
    "k = 0;",
    "n = clamp(n);",
];

/// A function from body lines; `insert` puts fix lines before body line
/// positions.
fn function(insert: &[(usize, usize)], extra: &[(usize, String)]) -> String {
    let mut out = String::from("int process(FILE *f, int *out)\n{\n");
    for (pos, line) in BODY.iter().enumerate() {
        for (at, fix) in insert {
            if *at == pos {
                out.push_str(FIXES[*fix]);
                out.push('\n');
            }
        }
        for (at, e) in extra {
            if *at == pos {
                out.push_str(e);
                out.push('\n');
            }
        }
        out.push_str(line);
        out.push('\n');
    }
    out.push_str("return sum;\n}\n");
    out
}

fn normalized(src: &str) -> String {
    snippets_of(src, "f.c").remove(0).normalized_body
}

fn arb_patch() -> impl Strategy<Value = Vec<(usize, usize)>> {
    prop::collection::vec((0usize..BODY.len(), 0usize..FIXES.len()), 1..4)
}

fn arb_unrelated() -> impl Strategy<Value = Vec<(usize, String)>> {
    prop::collection::vec((0usize..BODY.len(), 0u32..100).prop_map(|(p, k)| (p, format!("trace_counter_{k} = trace_counter_{k} + 1;"))), 0..3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn copies_of_either_side_are_decided(patch in arb_patch()) {
        let v = normalized(&function(&[], &[]));
        let p = normalized(&function(&patch, &[]));
        prop_assert_eq!(match_chunks(&DiffSet::new(&v, &p, &v)).verdict, Verdict::Vulnerable);
        prop_assert_ne!(match_chunks(&DiffSet::new(&v, &p, &p)).verdict, Verdict::Vulnerable);
    }

    #[test]
    fn unrelated_insertions_do_not_change_the_verdict(patch in arb_patch(), noise in arb_unrelated()) {
        let v = normalized(&function(&[], &[]));
        let p = normalized(&function(&patch, &[]));
        let patched_target = normalized(&function(&patch, &noise));
        let vulnerable_target = normalized(&function(&[], &noise));
        prop_assert_eq!(match_chunks(&DiffSet::new(&v, &p, &patched_target)).verdict, Verdict::Patched);
        prop_assert_eq!(match_chunks(&DiffSet::new(&v, &p, &vulnerable_target)).verdict, Verdict::Vulnerable);
    }

    #[test]
    fn verdicts_are_pure(patch in arb_patch(), noise in arb_unrelated()) {
        let v = normalized(&function(&[], &[]));
        let p = normalized(&function(&patch, &[]));
        let t = normalized(&function(&patch[..1], &noise));
        let ds = DiffSet::new(&v, &p, &t);
        prop_assert_eq!(match_chunks(&ds), match_chunks(&DiffSet::new(&v, &p, &t)));
    }

    #[test]
    fn classification_ignores_snippet_order(patch in arb_patch(), flip in any::<bool>()) {
        let vsrc = function(&[], &[]);
        let psrc = function(&patch, &[]);
        let scope = version_diff_files("lib/p.c", Some(&vsrc), Some(&psrc));
        let other = "static int helper(int x)\n{\n    return x * 2;\n}\n";
        let body = if flip { format!("{other}{vsrc}") } else { format!("{vsrc}{other}") };
        let targets = snippets_of(&body, "v/p.c");
        let mut forward: Vec<usize> = (0..targets.len()).collect();
        let a: Vec<_> = classify_reuse(&targets, &forward, &scope, 30).into_iter().map(|c| (targets[c.snippet].name.clone(), c.group, c.verdict)).collect();
        forward.reverse();
        let mut b: Vec<_> = classify_reuse(&targets, &forward, &scope, 30).into_iter().map(|c| (targets[c.snippet].name.clone(), c.group, c.verdict)).collect();
        b.reverse();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a, vec![("process".to_string(), Group::G3, Verdict::Vulnerable)]);
    }

    #[test]
    fn group_and_verdict_agree(patch in arb_patch(), noise in arb_unrelated(), pick in 0usize..3) {
        let vsrc = function(&[], &[]);
        let psrc = function(&patch, &[]);
        let scope = version_diff_files("lib/p.c", Some(&vsrc), Some(&psrc));
        let target = match pick {
            0 => vsrc.clone(),
            1 => psrc.clone(),
            _ => function(&patch, &noise),
        };
        let targets = snippets_of(&target, "v/p.c");
        let all: Vec<usize> = (0..targets.len()).collect();
        for c in classify_reuse(&targets, &all, &scope, 30) {
            if c.verdict == Verdict::Secure {
                prop_assert_eq!(c.group, Group::G1);
            }
            if c.group == Group::G3 {
                prop_assert_eq!(c.verdict, Verdict::Vulnerable);
            }
        }
    }
}
