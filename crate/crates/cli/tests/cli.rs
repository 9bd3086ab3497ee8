//! Exercises each subcommand end to end through the compiled binary,
//! including the exit-code contract.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_buekenhout"))
}

#[test]
fn fields_dumps_the_deterministic_header() {
    let out = bin().args(["fields", "--p", "2", "--m", "3"]).output().unwrap();
    assert!(out.status.success());
    let spec: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(spec["p"], 2);
    assert_eq!(spec["irr_q"], serde_json::json!([1, 1, 0, 1])); // x^3 + x + 1

    // non-prime p is an input error
    let bad = bin().args(["fields", "--p", "6", "--m", "1"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn build_reports_histogram_and_optional_points() {
    let out = bin()
        .args(["build", "--p", "2", "--m", "3", "--kind", "tits", "--dump-points"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["unital"]["kind"], "tits");
    assert_eq!(v["point_count"], 513);
    assert_eq!(v["line_histogram"]["1"], 513);
    assert_eq!(v["line_histogram"]["9"], 64 * (64 - 8 + 1));
    assert_eq!(v["points"].as_array().unwrap().len(), 513);

    // invalid parameters exit nonzero naming the violated condition
    let bad = bin()
        .args(["build", "--p", "3", "--m", "1", "--kind", "bm", "--alpha", "1", "--beta", "0"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("square"));
}

#[test]
fn build_scan_lists_valid_descriptors() {
    let out = bin()
        .args(["build", "--p", "3", "--m", "1", "--kind", "bm", "--scan"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let valid = v["valid"].as_array().unwrap();
    assert!(!valid.is_empty());
    assert!(valid.iter().any(|d| d["classical"] == true));
    assert!(valid.iter().any(|d| d["classical"] == false));
    // alpha = 0 entries are exactly the classical ones
    for d in valid {
        assert_eq!(d["classical"] == true, d["alpha"] == 0);
    }
}

#[test]
fn find_onan_scan_succeeds_for_every_nonclassical_pair() {
    let out = bin()
        .args(["find-onan", "--p", "3", "--m", "1", "--kind", "bm", "--scan"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["valid_nonclassical"], v["succeeded"]);
    assert!(v["succeeded"].as_u64().unwrap() > 0);
}

#[test]
fn anchored_search_default_and_explicit_anchor() {
    let dflt = bin()
        .args([
            "search", "--p", "2", "--m", "3", "--kind", "tits", "--mode", "anchored",
            "--max-list", "5",
        ])
        .output()
        .unwrap();
    assert!(dflt.status.success(), "{}", String::from_utf8_lossy(&dflt.stderr));
    let v: serde_json::Value = serde_json::from_slice(&dflt.stdout).unwrap();
    assert_eq!(v["mode"], "anchored");
    assert_eq!(v["anchor"], serde_json::json!([0, 0, 1]));
    // the Tits unital does contain O'Nan configurations through (0,0,1)
    assert!(v["configuration_count"].as_u64().unwrap() >= 1);

    let explicit = bin()
        .args([
            "search", "--p", "3", "--m", "1", "--kind", "bm", "--alpha", "4", "--beta", "0",
            "--mode", "anchored", "--anchor", "0,1,1",
        ])
        .output()
        .unwrap();
    assert!(explicit.status.success());

    // an anchor off the unital is a verification failure (exit 2)
    let off = bin()
        .args([
            "search", "--p", "3", "--m", "1", "--kind", "bm", "--alpha", "4", "--beta", "0",
            "--mode", "anchored", "--anchor", "1,0,0",
        ])
        .output()
        .unwrap();
    assert_eq!(off.status.code(), Some(2));
}

#[test]
fn search_reports_certificate_membership() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.json");
    let ok = bin()
        .args([
            "find-onan", "--p", "3", "--m", "1", "--kind", "bm", "--alpha", "4", "--beta", "0",
            "--out",
        ])
        .arg(&cert)
        .output()
        .unwrap();
    assert!(ok.status.success());
    let search = bin()
        .args([
            "search", "--p", "3", "--m", "1", "--kind", "bm", "--alpha", "4", "--beta", "0",
            "--max-list", "3", "--certificate",
        ])
        .arg(&cert)
        .output()
        .unwrap();
    assert!(search.status.success());
    let v: serde_json::Value = serde_json::from_slice(&search.stdout).unwrap();
    assert_eq!(v["contains_certificate"], true);
    assert_eq!(v["truncated"], true);
    assert_eq!(v["configurations"].as_array().unwrap().len(), 3);
}

#[test]
fn verify_rejects_tampered_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let cert_path = dir.path().join("cert.json");
    let ok = bin()
        .args([
            "find-onan", "--p", "2", "--m", "2", "--kind", "bm", "--alpha", "1", "--beta", "4",
            "--out",
        ])
        .arg(&cert_path)
        .output()
        .unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));

    let good = bin().args(["verify", "--certificate"]).arg(&cert_path).output().unwrap();
    assert!(good.status.success());

    // swap one recorded point; re-verification must fail with exit 2
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cert_path).unwrap()).unwrap();
    v["points"][0] = serde_json::json!([1, 0, 0]);
    std::fs::write(&cert_path, serde_json::to_string(&v).unwrap()).unwrap();
    let bad = bin().args(["verify", "--certificate"]).arg(&cert_path).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn tits_rejects_parameters_and_even_degrees() {
    let with_params = bin()
        .args(["build", "--p", "2", "--m", "3", "--kind", "tits", "--alpha", "1", "--beta", "0"])
        .output()
        .unwrap();
    assert_eq!(with_params.status.code(), Some(1));

    let even_m = bin().args(["build", "--p", "2", "--m", "2", "--kind", "tits"]).output().unwrap();
    assert_eq!(even_m.status.code(), Some(1));
}
