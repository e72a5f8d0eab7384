//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::Instant;

use common::{s, Harness};
use vulture::clients::{FixtureRepo, GitRepoHandle};
use vulture::code_model::distance;
use vulture::component_db::{build_segment, eliminate_with_stats, ComponentSegment, FunctionFingerprint};
use vulture::flaw_detect::*;
use vulture::reuse_id::{detect_candidates, resolve_reuses, snippets_of, TargetSnippet};
use vulture::vuln_db::match_cves_to_tpl;
use vulture_testkit::cpe::{instance, Num, Shape, PRODUCT};
use vulture_testkit::wireshark::{self, R3Fix};
use vulture_testkit::{benchmark, dependency, elimination, robustness, write_json};

/// Criteria that do not hold with the reference digest at TH_hash = 30.
const KNOWN_FAILURES: [usize; 2] = [4, 7];

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn appendix_replay() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let fx = wireshark::write_fixture(dir.path()).unwrap();
    let db = dir.path().join("db");
    let h = Harness::new(&[]);
    let start = Instant::now();
    let built = h.run(&["--db", s(&db), "db", "build", "--repos", s(&fx.repos)]);
    if built.code != 0 {
        return Err(built.stderr);
    }
    let out = h.run(&["--db", s(&db), "--offline", "--json", "db", "map-patches", "--repos", s(&fx.repos), "--advisories", s(&fx.advisories), "--trace"]);
    let secs = start.elapsed().as_secs_f64();
    if out.code != 0 {
        return Err(out.stderr);
    }
    let traces: serde_json::Value = serde_json::from_str(&out.stdout).map_err(|e| e.to_string())?;
    let t = &traces[0];
    let sizes: Vec<u64> = t["slice_sizes"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    let detail = format!(
        "{} commits, {} slices (last {}), {} candidate slice(s), {} candidate commit(s), confirmed {}, {secs:.2}s",
        t["commits_in_window"],
        sizes.len(),
        sizes.last().copied().unwrap_or(0),
        t["candidate_slices"].as_array().unwrap().len(),
        t["candidate_commits"].as_array().unwrap().len(),
        t["confirmed"]
    );
    check(
        t["commits_in_window"] == 348
            && sizes.len() == 18
            && sizes.last() == Some(&8)
            && t["candidate_slices"].as_array().unwrap().len() == 1
            && t["candidate_commits"].as_array().unwrap().len() == 1
            && t["confirmed"] == wireshark::PATCH_COMMIT
            && secs < 5.0,
        detail,
    )
}

fn pairwise_survivors(seg: &ComponentSegment) -> BTreeSet<(String, String, String)> {
    let all: Vec<&FunctionFingerprint> = seg.fingerprints().collect();
    let mut beaten = vec![false; all.len()];
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            if all[i].h != all[j].h {
                continue;
            }
            let ki = (all[i].birth, &all[i].origin_tpl, &all[i].origin_path);
            let kj = (all[j].birth, &all[j].origin_tpl, &all[j].origin_path);
            if ki < kj {
                beaten[j] = true;
            } else if kj < ki {
                beaten[i] = true;
            }
        }
    }
    all.iter().zip(&beaten).filter(|(_, b)| !**b).map(|(f, _)| key(f)).collect()
}

fn key(f: &FunctionFingerprint) -> (String, String, String) {
    (f.h.hex().to_string(), f.origin_tpl.clone(), f.origin_path.clone())
}

fn elimination_oracle() -> Outcome {
    let seg = elimination::corpus();
    let n = seg.fingerprint_count();
    let expected = pairwise_survivors(&seg);
    let start = Instant::now();
    let (out, stats) = eliminate_with_stats(seg);
    let secs = start.elapsed().as_secs_f64();
    let got: BTreeSet<_> = out.fingerprints().map(key).collect();
    check(
        got == expected && stats.comparisons <= 2 * n && secs < 2.0,
        format!("n={n}, {} removed, {} comparisons vs {} pairwise, {secs:.3}s", stats.removed, stats.comparisons, n * (n - 1) / 2),
    )
}

const FIG4_VULN: &str = include_str!("../../core/tests/fixtures/fig4/vulnerable.c");
const FIG4_PATCHED: &str = include_str!("../../core/tests/fixtures/fig4/patched.c");
const FIG4_CUSTOM: &str = include_str!("../../core/tests/fixtures/fig4/custom_patched.c");
const FIG4_CUSTOM_UNPATCHED: &str = include_str!("../../core/tests/fixtures/fig4/custom_unpatched.c");

fn chunk_walkthrough() -> Outcome {
    let body = |src: &str| snippets_of(src, "rdtarga.c").remove(0).normalized_body;
    let (v, p) = (body(FIG4_VULN), body(FIG4_PATCHED));
    let chunks = DiffSet::new(&v, &p, &p).chunks_vp;
    let merged_on_cmaplen = chunks.first().is_some_and(|c| c.variables.contains("cmaplen"));
    let control = chunks.get(1).is_some_and(|c| c.control_block_id.is_some());
    let custom = match_chunks(&DiffSet::new(&v, &p, &body(FIG4_CUSTOM)));
    let removed = match_chunks(&DiffSet::new(&v, &p, &body(FIG4_CUSTOM_UNPATCHED)));
    check(
        chunks.len() == 2
            && merged_on_cmaplen
            && control
            && custom.verdict == Verdict::Patched
            && custom.method == MatchMethod::OperationMatch
            && removed.verdict == Verdict::Vulnerable,
        format!("{} chunks, custom {:?} via {:?}, patch removed {:?}", chunks.len(), custom.verdict, custom.method, removed.verdict),
    )
}

fn vulnerability_benchmark() -> Outcome {
    let start = Instant::now();
    let triples = benchmark::all_triples();
    let predictions: Vec<_> = triples.iter().map(|t| benchmark::predict(t, 30)).collect();
    let secs = start.elapsed().as_secs_f64();
    let score = benchmark::Score::of(&predictions);
    let exact_errors = predictions.iter().filter(|p| p.kind.is_exact() && p.predicted != p.label).count();
    check(
        triples.len() >= 40 && score.f1() >= 0.90 && exact_errors == 0 && secs < 30.0,
        format!(
            "{} triples, F1 {:.3} (tp {} fp {} fn {} tn {}), {exact_errors} exact-reuse errors, {secs:.2}s",
            triples.len(),
            score.f1(),
            score.tp,
            score.fp,
            score.fn_,
            score.tn
        ),
    )
}

fn contains(shape: &Shape, v: &Num) -> bool {
    match shape {
        Shape::Exact(x) => x == v,
        Shape::Range { start, end } => {
            start.as_ref().is_none_or(|(s, inc)| v > s || (*inc && v == s)) && end.as_ref().is_none_or(|(e, inc)| v < e || (*inc && v == e))
        }
        Shape::Ignored => false,
    }
}

fn cpe_oracle() -> Outcome {
    let (mut agree, mut enumerations, mut intervals) = (0, 0, 0);
    for seed in 0..200 {
        let inst = instance(seed);
        let expected: Vec<&String> = inst.versions.iter().zip(&inst.tags).filter(|(v, _)| inst.shapes.iter().any(|s| contains(s, v))).map(|(_, t)| t).collect();
        let (records, _) = match_cves_to_tpl(std::slice::from_ref(&inst.advisory), PRODUCT, &inst.tags);
        let got: Vec<&String> = records.iter().flat_map(|r| &r.vulnerable_versions).collect();
        agree += usize::from(got == expected);
        enumerations += inst.shapes.iter().filter(|s| matches!(s, Shape::Exact(_))).count();
        intervals += inst.shapes.iter().filter(|s| matches!(s, Shape::Range { .. })).count();
    }
    check(
        agree == 200 && enumerations > 0 && intervals > 0,
        format!("{agree}/200 instances agree ({enumerations} enumerations, {intervals} intervals)"),
    )
}

fn dependency_parent() -> Outcome {
    let repos: Vec<(String, FixtureRepo)> = dependency::chain().into_iter().map(|m| (m.name.clone(), FixtureRepo::new(m).unwrap())).collect();
    let refs: Vec<(String, &dyn GitRepoHandle)> = repos.iter().map(|(n, r)| (n.clone(), r as &dyn GitRepoHandle)).collect();
    let seg = build_segment(&refs).0;
    let target: Vec<TargetSnippet> = dependency::chain_own("alpha").iter().flat_map(|(p, c)| snippets_of(c, &format!("vendor/alpha/{p}"))).collect();
    let report = resolve_reuses("product", &detect_candidates(&target, &seg, 30, 0.10, 0));
    let names: Vec<&str> = report.confirmed.iter().map(|c| c.tpl_name.as_str()).collect();
    check(names == ["alpha"], format!("confirmed {names:?}"))
}

fn digest_robustness() -> Outcome {
    let function = |src: &str| snippets_of(src, "f.c").into_iter().find(|t| t.is_function()).unwrap();
    let fns = robustness::base_functions();
    let cosmetic: Vec<u32> = fns.iter().map(|(_, src)| distance(&function(src).hash, &function(&robustness::cosmetic(src)).hash).unwrap()).collect();
    let mut renames = Vec::new();
    for (_, src) in &fns {
        for rename in [robustness::rename_function, robustness::rename_first_parameter] {
            let (_, renamed) = rename(src).unwrap();
            renames.push(distance(&function(src).hash, &function(&renamed).hash).unwrap());
        }
    }
    let over = renames.iter().filter(|&&d| d > 30).count();
    check(
        fns.len() == 20 && cosmetic.iter().all(|&d| d == 0) && over == 0,
        format!(
            "cosmetic max distance {}, {over}/{} single renames above 30 (max {})",
            cosmetic.iter().max().unwrap(),
            renames.len(),
            renames.iter().max().unwrap()
        ),
    )
}

fn scan_json(h: &Harness, db: &Path, target: &Path, jobs: &str) -> Result<String, String> {
    let out = h.run(&["--db", s(db), "--jobs", jobs, "--json", "scan", "--target", s(target), "--seed", "7"]);
    if out.code == 1 {
        return Err(out.stderr);
    }
    Ok(out.stdout)
}

/// A database over the Wireshark history and the zlib family, and a
/// product vendoring both.
fn scan_fixture(dir: &Path, h: &Harness) -> Result<(std::path::PathBuf, std::path::PathBuf), String> {
    let fx = wireshark::write_fixture(&dir.join("ws")).unwrap();
    let zlib_list = dependency::write_zlib_family(&dir.join("zlib")).unwrap();
    let mut repos: Vec<serde_json::Value> = serde_json::from_str(&std::fs::read_to_string(&fx.repos).unwrap()).unwrap();
    repos[0]["location"] = serde_json::json!("ws/wireshark.json");
    for mut r in serde_json::from_str::<Vec<serde_json::Value>>(&std::fs::read_to_string(zlib_list).unwrap()).unwrap() {
        r["location"] = serde_json::json!(format!("zlib/{}", r["location"].as_str().unwrap()));
        repos.push(r);
    }
    let list = dir.join("repos.json");
    write_json(&list, &repos).unwrap();
    let db = dir.join("db");
    for args in [
        vec!["--db", s(&db), "--offline", "db", "build", "--repos", s(&list)],
        vec!["--db", s(&db), "--offline", "db", "map-patches", "--repos", s(&list), "--advisories", s(&fx.advisories)],
    ] {
        let out = h.run(&args);
        if out.code != 0 {
            return Err(out.stderr);
        }
    }
    let target = dir.join("product");
    wireshark::write_target(&target, R3Fix::None).unwrap();
    dependency::write_tizenrt(&target, "external/zlib").unwrap();
    Ok((db, target))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let h = Harness::new(&[]);
    let (db, target) = scan_fixture(dir.path(), &h)?;
    let one = scan_json(&h, &db, &target, "1")?;
    let eight = scan_json(&h, &db, &target, "8")?;
    let report: serde_json::Value = serde_json::from_str(&one).map_err(|e| e.to_string())?;
    let reused = report["reuse"]["confirmed"].as_array().map_or(0, Vec::len);
    let findings = report["vulnerabilities"]["findings"].as_array().map_or(0, Vec::len);
    check(
        one == eight && reused >= 2 && findings >= 1,
        format!("{} bytes, identical: {}, {reused} reused libraries, {findings} findings", one.len(), one == eight),
    )
}

fn offline() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let h = Harness::new(&[("ORACLE_ENDPOINT", "http://127.0.0.1:9/v1/chat"), ("ORACLE_MODEL", "m"), ("NVD_API_KEY", "k")]);
    let (db, target) = scan_fixture(dir.path(), &h)?;
    let scan = h.run(&["--db", s(&db), "--offline", "scan", "--target", s(&target)]);
    let no_source = h.run(&["--db", s(&db), "--offline", "db", "map-patches", "--repos", s(&dir.path().join("repos.json"))]);
    check(
        scan.code == 2 && no_source.code == 1 && h.net.attempts() == 0,
        format!("offline build, map-patches and scan (exit {}) with an oracle configured, {} network operations", scan.code, h.net.attempts()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("patch mapping replay", appendix_replay),
        ("hash-index elimination", elimination_oracle),
        ("chunk walkthrough", chunk_walkthrough),
        ("vulnerability benchmark", vulnerability_benchmark),
        ("CPE resolution", cpe_oracle),
        ("dependency parent", dependency_parent),
        ("digest robustness", digest_robustness),
        ("scan determinism", determinism),
        ("offline guarantee", offline),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        match result {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail}"),
            Err(detail) => {
                println!("FAIL criterion {n} ({name}): {detail}");
                failed.push(n);
            }
        }
    }
    println!("{} of 9 criteria pass; known failures {KNOWN_FAILURES:?}", 9 - failed.len());
    if failed != KNOWN_FAILURES {
        eprintln!("unexpected outcome: failing {failed:?}");
        std::process::exit(1);
    }
}
