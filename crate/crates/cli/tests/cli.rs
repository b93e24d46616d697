use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_padic-orbits"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn orbit_lines() {
    let cases = [
        (["--p", "3", "--c", "-2", "--level", "1"], "0 → 1 → 2 → 2  (2,1)\n"),
        (["--p", "7", "--c", "2", "--level", "1"], "0 → 2 → 6 → 3 → 4 → 4  (4,1)\n"),
        (["--p", "2", "--c", "-2", "--level", "4"], "0 → 14 → 2 → 2  (2,1)\n"),
    ];
    for (args, want) in cases {
        let mut full = vec!["orbit"];
        full.extend(args);
        let out = run(&full);
        assert_eq!(out.status.code(), Some(0));
        assert_eq!(stdout(&out), want);
    }
}

#[test]
fn digit_strings_and_integers_agree() {
    let a = stdout(&run(&["orbit", "--p", "3", "--c", "digits:1.22", "--level", "3"]));
    let b = stdout(&run(&["orbit", "--p", "3", "--c", "-2", "--level", "3"]));
    assert_eq!(a, b);
    let v = json(&["orbit", "--p", "3", "--c", "digits:1.22", "--level", "3", "--format", "json"]);
    assert_eq!(v["schema"], "padic-orbits/1");
    assert_eq!(v["m"], 2);
    assert_eq!(v["n"], 1);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["orbit", "--p", "4", "--c", "1", "--level", "1"]).status.code(), Some(2));
    assert_eq!(run(&["orbit", "--p", "3", "--c", "x", "--level", "1"]).status.code(), Some(2));
    assert_eq!(
        run(&["orbit", "--p", "3", "--c", "1", "--level", "5", "--prec", "4"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["orbit", "--p", "3"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "bogus"]).status.code(), Some(2));
    assert_eq!(run(&["pcf", "--p", "2"]).status.code(), Some(2));
    assert_eq!(run(&["tree", "--p", "3", "--c", "1", "--depth", "2", "--format", "text"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "counts", "--p", "3,5,7"]).status.code(), Some(0));
}

#[test]
fn classify_and_profile() {
    let v = json(&["classify", "--p", "3", "--c", "-2"]);
    assert_eq!(v["verdict"], "preperiodic_finite");
    assert_eq!(v["resolved_at"], 1);
    let v = json(&["profile", "--p", "2", "--c", "-2", "--kmax", "4"]);
    let levels: Vec<(u64, u64)> = v["levels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|l| (l["m"].as_u64().unwrap(), l["n"].as_u64().unwrap()))
        .collect();
    assert_eq!(levels, vec![(0, 1), (1, 1), (2, 1), (2, 1)]);
}

#[test]
fn pcf_listing() {
    let v = json(&["pcf", "--p", "5"]);
    assert_eq!(v["count"], 7);
    let params = v["parameters"].as_array().unwrap();
    assert_eq!(params.len(), 7);
    for x in params {
        for key in ["c", "p", "orbit_type", "kind", "resolved_at", "certified"] {
            assert!(x.get(key).is_some(), "missing {key}");
        }
        assert_eq!(x["certified"], true);
    }
}

#[test]
fn verify_suites() {
    let counts = run(&["verify", "counts", "--p", "3,5,7", "--format", "text"]);
    let text = stdout(&counts);
    for want in ["p=3 count 4", "p=5 count 7", "p=7 count 10"] {
        assert!(text.contains(want), "{text}");
    }
    let tail = run(&["verify", "tail", "--p", "5", "--samples", "200", "--kmax", "8"]);
    assert_eq!(tail.status.code(), Some(0));
    let ok = run(&["verify", "c2", "--k", "3..5", "--i", "1..6", "--samples", "3"]);
    assert_eq!(ok.status.code(), Some(0));
    // k = 2 keeps the orbit types but fails the in-disk estimate.
    let k2 = run(&["verify", "c2", "--k", "2..2", "--i", "1..6", "--samples", "3"]);
    assert_eq!(k2.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&k2.stdout).unwrap();
    for case in v["cases"].as_array().unwrap() {
        assert_eq!(case["passed"], false);
        assert_eq!(case["detail"]["pre_levels_ok"], true);
        assert!(case["detail"]["verdicts"].as_array().unwrap().iter().all(|x| x["pass"] == true));
    }
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["atlas", "--p", "3", "--depth", "3"],
        vec!["verify", "tail", "--p", "3,5", "--samples", "20", "--seed", "4"],
        vec!["verify", "lemma54", "--samples", "10", "--seed", "4"],
        vec!["pcf", "--p", "7"],
    ] {
        assert_eq!(run(&args).stdout, run(&args).stdout, "{args:?}");
    }
}

#[test]
fn out_flag_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tree.dot");
    let out = run(&["tree", "--p", "3", "--c", "64", "--depth", "4", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let dot = std::fs::read_to_string(&path).unwrap();
    assert!(dot.starts_with("digraph orbit_tree {"));
    assert!(dot.contains("orbit_type=\"(2,3)\""));
}

#[test]
fn figures_match_core_golden_files() {
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/tests/golden");
    for p in ["3", "5", "7"] {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&["figures", "--p", p, "--out", dir.path().to_str().unwrap()]);
        assert!(out.status.success());
        let want = golden.join(format!("p{p}"));
        let mut names: Vec<String> = std::fs::read_dir(&want)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        let mut got: Vec<String> = std::fs::read_dir(dir.path())
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        got.sort();
        assert_eq!(got, names);
        for n in &names {
            let a = std::fs::read(dir.path().join(n)).unwrap();
            let b = std::fs::read(want.join(n)).unwrap();
            assert_eq!(a, b, "p={p} {n}");
        }
    }
}

#[test]
fn figures_outside_tabulated_primes_warn() {
    let out = run(&["figures", "--p", "11"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("provisional"));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["provisional"], true);
}

#[test]
fn atlas_formats() {
    let v = json(&["atlas", "--p", "5", "--depth", "1"]);
    let types: Vec<Value> = v["nodes"].as_array().unwrap().iter().map(|n| n["orbit_type"].clone()).collect();
    assert_eq!(types, serde_json::json!([[0, 1], [0, 3], [2, 2], [2, 1], [0, 2]]).as_array().unwrap().clone());
    let dot = stdout(&run(&["atlas", "--p", "2", "--depth", "3", "--format", "dot"]));
    assert!(dot.starts_with("digraph atlas {"));
    // Truncations of 0, -1, -2: {0, 1}, {0, 2, 3}, {0, 6, 7}.
    assert_eq!(dot.matches("fillcolor=gray").count(), 2 + 3 + 3);
}
