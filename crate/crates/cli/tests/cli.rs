mod common;

use common::{s, Harness};
use vulture_testkit::wireshark::{self, R3Fix};
use vulture_testkit::write_json;

#[test]
fn build_with_empty_repo_list() {
    let dir = tempfile::tempdir().unwrap();
    let repos = dir.path().join("repos.json");
    std::fs::write(&repos, "[]").unwrap();
    let db = dir.path().join("db");
    let out = Harness::new(&[]).run(&["--db", s(&db), "db", "build", "--repos", s(&repos)]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert_eq!(out.stdout, "0 tpls, 0 versions, 0 fingerprints, 0 eliminated\n");
    assert!(db.join("component.jsonl").exists());
}

#[test]
fn rebuild_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let fx = wireshark::write_fixture(&dir.path().join("fx")).unwrap();
    let h = Harness::new(&[]);
    let mut bytes = Vec::new();
    for name in ["a", "b"] {
        let db = dir.path().join(name);
        let out = h.run(&["--db", s(&db), "--jobs", if name == "a" { "1" } else { "4" }, "db", "build", "--repos", s(&fx.repos)]);
        assert_eq!(out.code, 0, "{}", out.stderr);
        bytes.push(std::fs::read(db.join("component.jsonl")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn advisory_without_elements_is_left_unmapped() {
    let dir = tempfile::tempdir().unwrap();
    let fx = wireshark::write_fixture(&dir.path().join("fx")).unwrap();
    let advisories = dir.path().join("vague");
    let mut adv = wireshark::advisory();
    adv.id = "CVE-2013-9999".into();
    adv.description = "Unspecified vulnerability in Wireshark 1.8.x allows remote attackers to cause a denial of service.".into();
    write_json(&advisories.join("vague.json"), &adv).unwrap();
    let db = dir.path().join("db");
    let h = Harness::new(&[]);
    assert_eq!(h.run(&["--db", s(&db), "db", "build", "--repos", s(&fx.repos)]).code, 0);
    let out = h.run(&["--db", s(&db), "--offline", "db", "map-patches", "--repos", s(&fx.repos), "--advisories", s(&advisories), "--trace"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("CVE-2013-9999: unmapped"), "{}", out.stdout);
    assert!(out.stderr.contains("1 advisories matched, 0 mapped to patch commits"), "{}", out.stderr);
}

#[test]
fn offline_without_advisory_source_fails() {
    let dir = tempfile::tempdir().unwrap();
    let fx = wireshark::write_fixture(&dir.path().join("fx")).unwrap();
    let db = dir.path().join("db");
    let h = Harness::new(&[]);
    assert_eq!(h.run(&["--db", s(&db), "db", "build", "--repos", s(&fx.repos)]).code, 0);
    let out = h.run(&["--db", s(&db), "--offline", "db", "map-patches", "--repos", s(&fx.repos)]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("offline mode has no advisory source"), "{}", out.stderr);
    assert_eq!(h.net.attempts(), 0);
}

#[test]
fn map_patches_needs_a_component_segment() {
    let dir = tempfile::tempdir().unwrap();
    let fx = wireshark::write_fixture(&dir.path().join("fx")).unwrap();
    let out = Harness::new(&[]).run(&["--db", s(&dir.path().join("none")), "db", "map-patches", "--repos", s(&fx.repos), "--advisories", s(&fx.advisories)]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("run `vulture db build` first"), "{}", out.stderr);
}

#[test]
fn scanning_an_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let repos = dir.path().join("repos.json");
    std::fs::write(&repos, "[]").unwrap();
    let db = dir.path().join("db");
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let h = Harness::new(&[]);
    assert_eq!(h.run(&["--db", s(&db), "db", "build", "--repos", s(&repos)]).code, 0);
    let out = h.run(&["--db", s(&db), "scan", "--target", s(&empty)]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("no findings"), "{}", out.stdout);
    assert!(out.stderr.contains("no vulnerability segment"));
}

#[test]
fn missing_target_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = Harness::new(&[]).run(&["--db", s(dir.path()), "scan", "--target", s(&dir.path().join("nope"))]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("cannot read target"), "{}", out.stderr);
}

#[test]
fn invalid_threshold_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = Harness::new(&[]).run(&["--db", s(dir.path()), "scan", "--target", s(dir.path()), "--th-sim", "0"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.starts_with("error:"), "{}", out.stderr);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = Harness::new(&[]).run(&["scan", "--bogus"]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("--bogus"));
}

#[test]
fn config_file_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("vulture.toml");
    std::fs::write(&cfg, "th_hash = 0\n").unwrap();
    let h = Harness::new(&[("VULTURE_CONFIG", s(&cfg))]);
    let out = h.run(&["--db", s(dir.path()), "scan", "--target", s(dir.path())]);
    assert_eq!(out.code, 1);
    assert!(out.stderr.contains("th_hash"), "{}", out.stderr);
    let fixed = h.run(&["--db", s(dir.path()), "scan", "--target", s(dir.path()), "--th-hash", "30"]);
    assert!(!fixed.stderr.contains("th_hash"), "{}", fixed.stderr);
}

#[test]
fn end_to_end_verdicts_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let fx = wireshark::write_fixture(&dir.path().join("fx")).unwrap();
    let db = dir.path().join("db");
    let h = Harness::new(&[]);
    assert_eq!(h.run(&["--db", s(&db), "db", "build", "--repos", s(&fx.repos)]).code, 0);
    let mapped = h.run(&["--db", s(&db), "--offline", "db", "map-patches", "--repos", s(&fx.repos), "--advisories", s(&fx.advisories)]);
    assert_eq!(mapped.code, 0, "{}", mapped.stderr);

    for (fix, code, verdict) in [(R3Fix::None, 2, "Vulnerable"), (R3Fix::Upstream, 0, "Secure"), (R3Fix::Custom, 0, "Patched")] {
        let target = dir.path().join(format!("{fix:?}"));
        wireshark::write_target(&target, fix).unwrap();
        let out = h.run(&["--db", s(&db), "--json", "scan", "--target", s(&target)]);
        assert_eq!(out.code, code, "{fix:?}: {}", out.stderr);
        let report: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        let findings = report["vulnerabilities"]["findings"].as_array().unwrap();
        assert_eq!(findings.len(), 1, "{fix:?}");
        assert_eq!(findings[0]["verdict"], verdict);
        assert_eq!(findings[0]["cve_id"], wireshark::CVE_ID);
        assert_eq!(findings[0]["patch_url"], format!("{}/commit/{}", wireshark::REPO_URL, wireshark::PATCH_COMMIT));
    }
    assert_eq!(h.net.attempts(), 0);
}
