use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use exptype::commands::{run, Command as Cmd, Overrides};
use exptype::manifest::parse_manifest;
use serde_json::Value;
use sha2::{Digest, Sha256};

fn shipped(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../manifests").join(name)
}

fn exptype(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exptype")).args(args).output().expect("binary runs")
}

fn with_manifest(dir: &Path, text: &str, args: &[&str]) -> Output {
    let path = dir.join("m.toml");
    std::fs::write(&path, text).unwrap();
    let mut all = args.to_vec();
    all.extend(["--manifest", path.to_str().unwrap()]);
    exptype(&all)
}

fn report(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON report")
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let euler = "[connection]\ncoeffs = [[[\"-1\"]]]\n[run]\nprimes = [3]\n";
    assert_eq!(with_manifest(dir.path(), euler, &["certify"]).status.code(), Some(0));
    let irregular = shipped("irregular.toml");
    assert_eq!(exptype(&["certify", "--manifest", irregular.to_str().unwrap()]).status.code(), Some(1));
    // eigenvalues +-sqrt 2 are not rational
    let sqrt2 = "[connection]\ncoeffs = [[[\"0\", \"1\"], [\"2\", \"0\"]]]\n";
    let o = with_manifest(dir.path(), sqrt2, &["certify"]);
    assert_eq!(o.status.code(), Some(2));
    let v = report(&o);
    assert_eq!(v["certify"]["lambdas"]["error"]["suggested_field"], "Q[a]/(a^2 - 2)");
    assert_eq!(v["certify"]["primes"][0]["error"]["suggested_field"], "F_{3^2}");
    let lenient = format!("{sqrt2}[run]\nallow_inconclusive = true\n");
    assert_eq!(with_manifest(dir.path(), &lenient, &["certify"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(exptype(&["certify", "--manifest", "/nonexistent/m.toml"]).status.code(), Some(3));
    assert_eq!(exptype(&["certify"]).status.code(), Some(3));
    assert_eq!(exptype(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(with_manifest(dir.path(), "[connection\n", &["certify"]).status.code(), Some(3));
    assert_eq!(with_manifest(dir.path(), "name = \"empty\"\n", &["certify"]).status.code(), Some(3));
    let cp1 = "[ring]\nbuiltin = \"cp1\"\n";
    assert_eq!(with_manifest(dir.path(), cp1, &["steenrod-verify"]).status.code(), Some(3));
    assert_eq!(with_manifest(dir.path(), cp1, &["mf"]).status.code(), Some(3));
    assert_eq!(with_manifest(dir.path(), cp1, &["certify", "--primes", "2"]).status.code(), Some(3));
    assert_eq!(with_manifest(dir.path(), cp1, &["certify", "--primes", "9"]).status.code(), Some(3));
    assert_eq!(exptype(&["--help"]).status.code(), Some(0));
}

#[test]
fn unknown_keys_warn_or_fail_in_strict_mode() {
    let dir = tempfile::tempdir().unwrap();
    let text = "colour = \"blue\"\n[ring]\nbuiltin = \"cp1\"\n[run]\nprimes = [3]\n";
    let o = with_manifest(dir.path(), text, &["certify"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
    assert_eq!(report(&o)["manifest"]["unknown_keys"], serde_json::json!(["colour"]));
    assert_eq!(with_manifest(dir.path(), text, &["certify", "--strict"]).status.code(), Some(3));
}

#[test]
fn report_embeds_manifest_hash_and_parameters() {
    let path = shipped("euler.toml");
    let text = std::fs::read(&path).unwrap();
    let o = exptype(&["certify", "--manifest", path.to_str().unwrap(), "--primes", "5,7", "--seed", "9"]);
    let v = report(&o);
    assert_eq!(v["manifest"]["sha256"], hex::encode(Sha256::digest(&text)));
    assert_eq!(v["parameters"]["primes"], serde_json::json!([5, 7]));
    assert_eq!(v["parameters"]["seed"], 9);
    assert_eq!(v["exit_code"], 0);
    let ps: Vec<u64> = v["certify"]["primes"].as_array().unwrap().iter().map(|e| e["p"].as_u64().unwrap()).collect();
    assert_eq!(ps, [5, 7]);
}

#[test]
fn json_flag_writes_the_report_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let m = shipped("cp1.toml");
    let o = exptype(&["certify", "--manifest", m.to_str().unwrap(), "--json", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["status"], "pass");
}

#[test]
fn split_reports_blocks() {
    let v = report(&exptype(&["split", "--manifest", shipped("single-eig.toml").to_str().unwrap()]));
    let blocks = v["split"]["char0"]["blocks"].as_array().unwrap();
    assert_eq!(blocks.len(), 1);
    assert_eq!(blocks[0]["lambda"], "2");
    assert_eq!(blocks[0]["rank"], 2);
    let v = report(&exptype(&["split", "--manifest", shipped("cp1.toml").to_str().unwrap()]));
    let mut lambdas: Vec<&str> = v["split"]["char0"]["blocks"].as_array().unwrap().iter().map(|b| b["lambda"].as_str().unwrap()).collect();
    lambdas.sort();
    assert_eq!(lambdas, ["-2", "2"]);
}

#[test]
fn explicit_ring_agrees_with_builtin() {
    let a = std::fs::read_to_string(shipped("cp1.toml")).unwrap();
    let b = std::fs::read_to_string(shipped("cp1-explicit.toml")).unwrap();
    let o = Overrides { primes: Some(vec![5, 7]), ..Default::default() };
    let ra = run(Cmd::Certify, &parse_manifest(&a).unwrap(), &o).unwrap();
    let rb = run(Cmd::Certify, &parse_manifest(&b).unwrap(), &o).unwrap();
    assert_eq!(ra.report["certify"]["lambdas"], rb.report["certify"]["lambdas"]);
    assert_eq!(ra.report["certify"]["primes"], rb.report["certify"]["primes"]);
}

#[test]
fn scalars_in_a_number_field() {
    let text = "[field]\nminpoly = [1, 1, 1]\nhints = [\"-a\", \"1 + a\"]\n[connection]\ncoeffs = [[[\"a\", \"0\"], [\"0\", \"-1 - a\"]]]\n[run]\nprimes = [7]\n";
    let out = run(Cmd::Split, &parse_manifest(text).unwrap(), &Overrides::default()).unwrap();
    assert_eq!(out.exit_code, 0);
    let mut lambdas: Vec<String> = out.report["split"]["char0"]["blocks"].as_array().unwrap().iter().map(|b| b["lambda"].as_str().unwrap().to_string()).collect();
    lambdas.sort();
    assert_eq!(lambdas, ["-a", "a + 1"]);
    // without hints the roots in Q(a) are not searched for
    let bare = text.replace("hints = [\"-a\", \"1 + a\"]\n", "");
    assert_eq!(run(Cmd::Split, &parse_manifest(&bare).unwrap(), &Overrides::default()).unwrap().exit_code, 2);
    assert!(parse_manifest("[field]\nminpoly = [1, 1, 1]\nhints = [\"b\"]\n[connection]\ncoeffs = [[[\"1\"]]]\n")
        .and_then(|l| run(Cmd::Certify, &l, &Overrides::default()))
        .is_err());
}
