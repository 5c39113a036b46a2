use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use pets::commands::{self, CertifyInput};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn pets(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pets"))
        .args(args)
        .env_remove("PETS_SEED")
        .output()
        .expect("run pets");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn path(name: &str) -> String {
    data(name).display().to_string()
}

#[test]
fn check_exit_codes() {
    let th = path("double.theory");
    let (code, out, _) = pets(&["check", "--theory", &th, "--derivation", &path("double-zero.deriv")]);
    assert_eq!(code, 0);
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(json["length"], 50);
    assert_eq!(json["end_equation"]["rhs"], "(s0 (s0 eps))");

    let (code, _, err) = pets(&["check", "--theory", &th, "--derivation", &path("bad-syntax.deriv")]);
    assert_eq!(code, 1);
    assert!(err.contains("1:1"), "{err}");

    let (code, _, err) = pets(&[
        "check",
        "--theory",
        &path("overlap.theory"),
        "--derivation",
        &path("double-zero.deriv"),
    ]);
    assert_eq!(code, 2);
    assert!(err.contains("d.any") && err.contains("d.eps"), "{err}");

    let (code, out, _) = pets(&["check", "--theory", &th, "--derivation", &path("broken-trans.deriv")]);
    assert_eq!(code, 3);
    assert!(out.contains("middle terms differ"), "{out}");

    let (code, _, _) = pets(&["check", "--theory", &th, "--derivation", &path("missing.deriv")]);
    assert_eq!(code, 1);
}

#[test]
fn model_check_failure_exits_four() {
    let th = path("double.theory");
    let der = path("double-zero.deriv");
    let (code, out, _) = pets(&[
        "model-check",
        "--theory",
        &th,
        "--derivation",
        &der,
        "--frame",
        &path("double.frame"),
        "--kappa",
        "4",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("\"assignments\": 31"), "{out}");
    let (code, out, _) = pets(&[
        "model-check",
        "--theory",
        &th,
        "--derivation",
        &der,
        "--frame",
        &path("not-a-model.frame"),
        "--kappa",
        "2",
    ]);
    assert_eq!(code, 4, "{out}");
}

#[test]
fn vnf_length_bound_is_enforced() {
    let args = [
        "vnf",
        "--theory",
        &path("double.theory"),
        "--derivation",
        &path("double-zero.deriv"),
    ];
    let (code, out, _) = pets(&args);
    assert_eq!(code, 0);
    assert_eq!(
        out.trim(),
        "(trans (subst eps v0 (axiom d.zero ((x v0)))) (compat (s0 (s0 z)) z (axiom d.eps ())))"
    );
    let mut strict = args.to_vec();
    strict.extend(["--constant", "0"]);
    assert_eq!(pets(&strict).0, 4);
}

#[test]
fn certify_binary_matches_library() {
    let th_path = path("double.theory");
    let der_path = path("double-zero.deriv");
    let (code, out, err) = pets(&["certify", "--trace", "--theory", &th_path, "--derivation", &der_path]);
    assert_eq!(code, 0, "{err}");
    let lib = commands::cmd_certify(&CertifyInput {
        theory: &fs::read_to_string(&th_path).unwrap(),
        derivation: &fs::read_to_string(&der_path).unwrap(),
        trace: true,
        ..CertifyInput::default()
    });
    assert_eq!(
        (lib.status, lib.stdout.as_str(), lib.stderr.as_str()),
        (code, out.as_str(), err.as_str())
    );

    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(json["verdict"], "certified");
    assert_eq!(
        json["sigma2"],
        serde_json::json!(["d:(eps:) -> eps:", "d:(eps:0) -> eps:00"])
    );
    assert_eq!(json["values"]["b"], "eps:00");
    assert!(err.starts_with("forward:\n"));
}

#[test]
fn certify_many_files_in_parallel() {
    let th = path("double.theory");
    let good = path("double-zero.deriv");
    let bad = path("broken-trans.deriv");
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let report_arg = report.display().to_string();
    let (code, out, _) = pets(&[
        "certify",
        "--jobs",
        "2",
        "--theory",
        &th,
        "--derivation",
        &good,
        &bad,
        &good,
        "--output",
        &report_arg,
    ]);
    assert_eq!(code, 3);
    assert!(out.is_empty());
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    let items = json.as_array().unwrap();
    assert_eq!(items.len(), 3);
    assert_eq!(items[0]["status"], 0);
    assert_eq!(items[1]["status"], 3);
    assert_eq!(items[0]["certificate"], items[2]["certificate"]);
}

#[test]
fn certify_with_frame_and_assignment() {
    let dir = tempfile::tempdir().unwrap();
    let der = dir.path().join("sym.deriv");
    fs::write(&der, "(axiom d.zero ((x y)))").unwrap();
    let rho = dir.path().join("rho");
    fs::write(&rho, "y = eps:1\n").unwrap();
    let (code, out, err) = pets(&[
        "certify",
        "--theory",
        &path("double.theory"),
        "--derivation",
        &der.display().to_string(),
        "--frame",
        &path("double.frame"),
        "--assignment",
        &rho.display().to_string(),
    ]);
    assert_eq!(code, 0, "{err}");
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(json["assignment"], serde_json::json!(["y = eps:1"]));
    assert_eq!(json["assignment_restored"], true);
}

#[test]
fn oracle_and_eval() {
    let th = path("double.theory");
    assert_eq!(
        pets(&["oracle", "--theory", &th, "--term", "(d (s1 (s0 eps)))"]).1,
        "eps:0011\n"
    );
    assert_eq!(pets(&["oracle", "--theory", &th, "--term", "(d x)"]).0, 1);
    let (code, out, _) = pets(&[
        "eval",
        "--theory",
        &th,
        "--term",
        "(d (s0 eps))",
        "--frame",
        &path("double.frame"),
    ]);
    assert_eq!((code, out.as_str()), (0, "eps:00\n"));
    assert_eq!(pets(&["eval", "--theory", &th, "--term", "(d (s1 eps))"]).1, "star:\n");
}

fn corpus_snapshot(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                fs::read_to_string(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn fuzz_is_deterministic_per_seed() {
    let dirs = [
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
    ];
    let mut summaries = Vec::new();
    for (dir, seed) in dirs.iter().zip(["5", "5", "6"]) {
        let out = dir.path().display().to_string();
        let (code, stdout, err) = pets(&[
            "fuzz",
            "--seed",
            seed,
            "--count",
            "60",
            "--theories",
            "4",
            "--out",
            &out,
        ]);
        assert_eq!(code, 0, "{err}");
        let mut json: serde_json::Value = serde_json::from_str(&stdout).unwrap();
        json.as_object_mut().unwrap().remove("elapsed_ms");
        summaries.push(json);
    }
    assert_eq!(summaries[0], summaries[1]);
    assert_eq!(summaries[0]["certified"], 60);
    let [a, b, c] = dirs.map(|d| corpus_snapshot(d.path()));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.iter().filter(|(n, _)| n.starts_with("theory-")).count(), 4);
}

#[test]
fn fuzz_seed_from_environment() {
    let run = |seed: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_pets"))
            .args(["fuzz", "--count", "20", "--theories", "2"])
            .env("PETS_SEED", seed)
            .output()
            .unwrap();
        let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        json["seed"].clone()
    };
    assert_eq!(run("42"), 42);
}

#[test]
fn fuzz_over_a_given_theory() {
    let (code, out, err) = pets(&[
        "fuzz",
        "--seed",
        "3",
        "--count",
        "50",
        "--theory",
        &path("double.theory"),
    ]);
    assert_eq!(code, 0, "{err}");
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(json["theories"], 1);
    assert_eq!(json["certified"], 50);
}
