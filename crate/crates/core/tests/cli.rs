use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use blowtorch::ensemble::ring;
use blowtorch::report::sha256_hex;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_blowtorch"));
    c.env_remove("BLOWTORCH_MAX_TREE_STATES")
        .env_remove("BLOWTORCH_MAX_PATH_STATES")
        .env_remove("BLOWTORCH_MAX_TREES");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad report ({e}): {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const AMBIGUOUS: &[f64] = &[1.0, 0.5, 1.0];
const ORDERED: &[f64] = &[-1.0, 0.4, 0.2];

#[test]
fn stationary_report_is_self_describing() {
    let dir = tempfile::tempdir().unwrap();
    let text = ring(AMBIGUOUS, &[1.0, 2.0, 0.5], 1.0).to_json();
    let f = write(dir.path(), "ring.json", &text);
    let out = run(&["stationary", s(&f), "--beta", "2", "--method", "solve"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["command"], "stationary");
    assert_eq!(r["inputs"]["sha256"], sha256_hex(text.as_bytes()));
    assert_eq!(r["inputs"]["beta"], 2.0);
    assert_eq!(r["results"]["method"], "linear-solve");
    let total: f64 = r["results"]["probs"].as_object().unwrap().values().map(|v| v.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn large_ring_exceeds_tree_cap_but_auto_falls_back() {
    let dir = tempfile::tempdir().unwrap();
    let q: Vec<f64> = (0..15).map(|i| (i as f64 * 0.37).sin()).collect();
    let f = write(dir.path(), "big.json", &ring(&q, &[1.0; 15], 1.0).to_json());
    let out = run(&["stationary", s(&f), "--method", "trees"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
    let out = run(&["stationary", s(&f)]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["results"]["method"], "matrix-tree");
}

#[test]
fn caps_come_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ring.json", &ring(AMBIGUOUS, &[1.0; 3], 1.0).to_json());
    let out = bin()
        .args(["stationary", s(&f), "--method", "trees"])
        .env("BLOWTORCH_MAX_TREE_STATES", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validation_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"states":["a","b"],"edges":[{"a":"a","b":"a","q":1,"psi":1},{"a":"a","b":"b","q":1,"psi":-2}]}"#,
    );
    let out = run(&["validate", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    let tags: Vec<String> = report(&out)["results"]["violations"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["invariant"].as_str().unwrap().to_owned())
        .collect();
    assert!(tags.contains(&"no-self-loop".to_owned()));
    assert!(tags.contains(&"activation-positivity".to_owned()));

    assert_eq!(run(&["stationary", s(&bad)]).status.code(), Some(1));
    let garbage = write(dir.path(), "garbage.json", "{not json");
    assert_eq!(run(&["order", s(&garbage)]).status.code(), Some(1));
    let extra = write(dir.path(), "extra.json", r#"{"states":["a","b"],"edges":[],"colour":1}"#);
    assert_eq!(run(&["validate", s(&extra)]).status.code(), Some(1));
    let ok = write(dir.path(), "ring.json", &ring(AMBIGUOUS, &[1.0; 3], 1.0).to_json());
    assert_eq!(run(&["bounds", s(&ok), "1", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["stationary", s(&dir.path().join("missing.json"))]).status.code(), Some(4));
}

#[test]
fn blowtorch_writes_deterministic_certified_networks() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "amb.json", &ring(AMBIGUOUS, &[1.0; 3], 1.0).to_json());
    let out_dir = dir.path().join("out");
    let first = run(&["blowtorch", s(&f), "1", "2", "--out-dir", s(&out_dir)]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let up = out_dir.join("amb.blowtorch.1-over-2.json");
    let down = out_dir.join("amb.blowtorch.2-over-1.json");
    let (up1, down1) = (std::fs::read(&up).unwrap(), std::fs::read(&down).unwrap());
    let second = run(&["blowtorch", s(&f), "1", "2", "--out-dir", s(&out_dir)]);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(up1, std::fs::read(&up).unwrap());
    assert_eq!(down1, std::fs::read(&down).unwrap());

    let probs = |p: &Path| {
        let r = report(&run(&["stationary", s(p), "--method", "trees"]));
        let pr = r["results"]["probs"].clone();
        (pr["1"].as_f64().unwrap(), pr["2"].as_f64().unwrap())
    };
    let (a, b) = probs(&up);
    assert!(a > b);
    let (a, b) = probs(&down);
    assert!(a < b);
}

#[test]
fn blowtorch_refuses_heat_ordered_pairs_unless_one_sided() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ord.json", &ring(ORDERED, &[1.0; 3], 1.0).to_json());
    let out = run(&["blowtorch", s(&f), "1", "2", "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["blowtorch", s(&f), "1", "2", "--direction", "x-over-y", "--one-sided", "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["blowtorch", s(&f), "1", "2", "--direction", "y-over-x", "--one-sided", "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["blowtorch", s(&f), "1", "2", "--beta", "0", "--out-dir", s(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_is_reproducible_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "ring.json", &ring(AMBIGUOUS, &[1.0; 3], 1.0).to_json());
    let t1 = dir.path().join("t1.txt");
    let t2 = dir.path().join("t2.txt");
    let a = run(&["simulate", s(&f), "--seed", "11", "--horizon", "50", "--trajectory-out", s(&t1)]);
    let b = run(&["simulate", s(&f), "--seed", "11", "--horizon", "50", "--trajectory-out", s(&t2)]);
    let c = run(&["simulate", s(&f), "--seed", "12", "--horizon", "50"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let (x, y) = (std::fs::read_to_string(&t1).unwrap(), std::fs::read_to_string(&t2).unwrap());
    assert_eq!(x, y);
    assert!(x.starts_with("# seed=11"));
    let jumps = report(&a)["results"]["jumps"].as_u64().unwrap() as usize;
    assert_eq!(x.lines().count(), jumps + 1);
    assert_eq!(run(&["simulate", s(&f), "--horizon", "10", "--initial", "9"]).status.code(), Some(1));
}

#[test]
fn lowtemp_reads_phi_and_energy_files() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "db.json", &ring(&[1.0, -0.5, -0.5], &[1.0; 3], 1.0).to_json());
    let phi = write(
        dir.path(),
        "phi.json",
        r#"[{"from":"1","to":"2","value":0.5},{"from":"2","to":"1","value":-0.5},
            {"from":"2","to":"3","value":-0.25},{"from":"3","to":"2","value":0.25},
            {"from":"3","to":"1","value":-0.25},{"from":"1","to":"3","value":0.25}]"#,
    );
    let energy = write(dir.path(), "e.json", r#"{"1":1.0,"2":0.0,"3":0.5}"#);
    let out = run(&["lowtemp", s(&f), "--phi", s(&phi), "--energy", s(&energy)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["results"]["phi_source"], "file");
    assert_eq!(r["results"]["profile"]["dominant"], serde_json::json!(["2"]));

    let bad = write(dir.path(), "badphi.json", r#"[{"from":"1","to":"2","value":3.0}]"#);
    assert_eq!(run(&["lowtemp", s(&f), "--phi", s(&bad)]).status.code(), Some(1));
}
