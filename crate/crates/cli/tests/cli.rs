use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn weblab(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_weblab"));
    cmd.args(args).env_remove("WEBLAB_THREADS");
    if let Some(n) = threads {
        cmd.env("WEBLAB_THREADS", n);
    }
    cmd.output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let ok = weblab(&["jets", "--datum", s(&data("flat.json")), "--out", s(&out), "--nmax", "3"], None);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));

    let usage = weblab(&["check", "--no-such-flag"], None);
    assert_eq!(usage.status.code(), Some(1));
    let usage = weblab(&["frobnicate"], None);
    assert_eq!(usage.status.code(), Some(1));

    let bad = weblab(&["check", "--datum", s(&data("bad.json")), "--out", s(&out)], None);
    assert_eq!(bad.status.code(), Some(2));
    let missing = weblab(&["check", "--datum", s(&data("missing.json")), "--out", s(&out)], None);
    assert_eq!(missing.status.code(), Some(2));
    let wrong_kind = weblab(&["derive", "--datum", s(&data("flat.json")), "--out", s(&out)], None);
    assert_eq!(wrong_kind.status.code(), Some(2));

    let escape = weblab(
        &["flows", "chain", "--datum", s(&data("curved.json")), "--z", "1,1,0", "--tvec", "0.1", "--eps", "0.01", "--out", s(&out)],
        None,
    );
    assert_eq!(escape.status.code(), Some(3));

    let threads = weblab(&["jets", "--datum", s(&data("flat.json")), "--out", s(&out)], Some("zero"));
    assert_eq!(threads.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    assert_eq!(weblab(&["--help"], None).status.code(), Some(0));
    assert_eq!(weblab(&["flows", "chain", "--help"], None).status.code(), Some(0));
}

fn run_measure(dir: &Path, threads: &str) -> (Vec<u8>, Vec<u8>) {
    let out = dir.join(format!("m{threads}.csv"));
    let fit = dir.join(format!("m{threads}.json"));
    let o = weblab(
        &[
            "measure", "--datum", s(&data("curved.json")), "--f", s(&data("f_osc.json")),
            "--eps-min", "-8", "--eps-max", "-3", "--res", "128", "--out", s(&out), "--fit", s(&fit),
        ],
        Some(threads),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    (std::fs::read(out).unwrap(), std::fs::read(fit).unwrap())
}

#[test]
fn measure_is_reproducible_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let one = run_measure(dir.path(), "1");
    let again = run_measure(dir.path(), "1");
    let four = run_measure(dir.path(), "4");
    assert_eq!(one, again);
    assert_eq!(one, four);
    let csv = String::from_utf8(one.0).unwrap();
    assert!(csv.starts_with("# manifest {"));
    assert!(csv.contains("\"sha256\""));
    assert_eq!(csv.lines().nth(1).unwrap(), "eps,measure,stderr,method,cells_or_samples,excluded_mass");
    let fit: serde_json::Value = serde_json::from_slice(&one.1).unwrap();
    assert_eq!(fit["label"], "instance exponent");
    assert!(fit["tau_hat"].as_f64().unwrap() > 0.0);
    assert_eq!(fit["manifest"]["subcommand"], "measure");
}

#[test]
fn check_report_embeds_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = weblab(
            &["check", "--datum", s(&data("curved.json")), "--grid", "12", "--nmax", "4", "--samples", "20", "--out", s(&out)],
            Some(threads),
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(out).unwrap()
    };
    let a = run("a.json", "1");
    assert_eq!(a, run("b.json", "3"));
    let v: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(v["manifest"]["inputs"].as_array().unwrap().len(), 1);
    assert_eq!(v["manifest"]["config"]["seed"], 0);
    assert_eq!(v["nondegeneracy"]["verdict"], "holds");
    assert_eq!(v["aux_weak"].as_array().unwrap().len(), 3);
    assert!(v["det_b"]["max_abs"].as_f64().unwrap() > 0.0);
    assert!(v["elimination"].get("c10").is_some() || v["elimination"].get("error").is_some());
}

#[test]
fn derive_writes_tree_and_dot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let dot = dir.path().join("t.dot");
    let o = weblab(
        &["derive", "--datum", s(&data("linear.json")), "--depth", "2", "--no-dedup", "--out", s(&out), "--dot", s(&dot)],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(out).unwrap()).unwrap();
    assert_eq!(v["tree"]["per_level"], serde_json::json!([1, 3, 12]));
    assert!(std::fs::read_to_string(dot).unwrap().starts_with("digraph"));
}

#[test]
fn flows_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = weblab(
        &["flows", "chain", "--datum", s(&data("curved.json")), "--z", "1,1,0.5", "--tvec", "0.1,0.1,0.1", "--eps", "0.01", "--out", s(&out)],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert!(rows[0].starts_with("# manifest"));
    assert_eq!(rows[1], "stage,x1,x2,t");
    assert_eq!(rows.len(), 6);
    assert!(String::from_utf8_lossy(&o.stdout).contains("b_1 = "));
}
