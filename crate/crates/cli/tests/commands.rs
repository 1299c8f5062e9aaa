use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use egamma_cli::{RunManifest, OUT_DIR_ENV};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_egamma"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("egamma-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(stdout(o).trim()).unwrap()
}

fn write_kernel(dir: &PathBuf, name: &str, args: &[&str]) -> String {
    let mut full = vec!["kernel"];
    full.extend_from_slice(args);
    let o = run(&full);
    assert!(o.status.success());
    let path = dir.join(name);
    fs::write(&path, &o.stdout).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn audit_certifies_randomized_response() {
    let dir = scratch("audit-rr");
    let rr = write_kernel(&dir, "rr.json", &["rr", "--eps", "1"]);
    let o = run(&["audit", "--kernel", &rr, "--epsilon", "1", "--delta", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["certified"], true);
    assert!(v["delta_tight"].as_f64().unwrap() <= 1e-12);
    assert_eq!(v["violations"], 0);
}

#[test]
fn audit_rejects_identity() {
    let dir = scratch("audit-id");
    let id = write_kernel(&dir, "id.csv", &["identity", "--size", "2", "--format", "csv"]);
    let o = run(&["audit", "--kernel", &id, "--epsilon", "5", "--delta", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let v = json(&o);
    assert_eq!(v["delta_tight"], 1.0);
    assert_eq!(v["point_mass_violation"], serde_json::json!([0, 1]));
}

#[test]
fn audit_profile_csv() {
    let dir = scratch("audit-profile");
    let rr = write_kernel(&dir, "rr.json", &["rr", "--eps", "1"]);
    let o = run(&["audit", "--kernel", &rr, "--profile", "0:2:21"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("epsilon,delta"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 21);
    assert!(rows.windows(2).all(|w| w[1].1 <= w[0].1));
    assert_eq!(rows[10].0, 1.0);
    assert!(rows[10].1 <= 1e-12);
    assert!(rows[9].1 > 1e-6);
    assert!(!text.contains('\r'));
}

#[test]
fn audit_profile_file_is_reproducible_and_has_manifest() {
    let dir = scratch("audit-manifest");
    let k = dir.join("k.csv");
    fs::write(&k, "0.6,0.3,0.1\n0.2,0.5,0.3\n").unwrap();
    let out = dir.join("profile.csv");
    let args = [
        "audit",
        "--kernel",
        k.to_str().unwrap(),
        "--profile",
        "0:3:31",
        "--epsilon",
        "0.5",
        "--delta",
        "0.1",
        "--seed",
        "7",
        "--out",
        out.to_str().unwrap(),
    ];
    let first = run(&args);
    let a = fs::read(&out).unwrap();
    let second = run(&args);
    let b = fs::read(&out).unwrap();
    assert_eq!(a, b);
    assert_eq!(first.stdout, second.stdout);
    let manifest: RunManifest =
        serde_json::from_str(&fs::read_to_string(RunManifest::path_for(&out)).unwrap()).unwrap();
    assert_eq!(manifest.command, "audit");
    assert_eq!(manifest.seed, 7);
    assert_eq!(manifest.outputs, vec![out.display().to_string()]);
}

#[test]
fn malformed_kernel_is_an_input_error() {
    let dir = scratch("bad-kernel");
    let k = dir.join("bad.csv");
    fs::write(&k, "0.5,0.5\n0.7,0.7\n").unwrap();
    let o = run(&["audit", "--kernel", k.to_str().unwrap(), "--epsilon", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("row 1"), "{err}");
    let o = run(&["audit", "--kernel", dir.join("missing.json").to_str().unwrap(), "--epsilon", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["audit"]).status.code(), Some(1));
    assert_eq!(run(&["bound", "lecam", "--tau", "1"]).status.code(), Some(1));
    let o = run(&["bound", "lecam", "--tau", "-1", "--kl", "0.1", "--n", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("tau"));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn bound_examples() {
    let v = json(&run(&["bound", "ht", "--kl", "1", "--eps", "0.6931", "--delta", "0"]));
    assert!((v["value"].as_f64().unwrap() + 0.5).abs() < 1e-4);
    let v = json(&run(&["bound", "micap", "--entropy", "0.6931", "--eps", "0", "--delta", "1"]));
    assert_eq!(v["value"].as_f64().unwrap(), 0.6931);
    let v = json(&run(&["bound", "lecam", "--tau", "1", "--kl", "0.1", "--n", "10", "--eps", "1", "--delta", "0"]));
    assert!((v["value"].as_f64().unwrap() - 0.2189).abs() < 1e-4);
    let v = json(&run(&["bound", "moment", "--k", "2", "--n", "1", "--eps", "0", "--delta", "1"]));
    assert!((v["value"].as_f64().unwrap() - 0.0625).abs() < 1e-15);
    assert!(v["flags"].as_array().unwrap().contains(&serde_json::json!("explicit_constant_variant")));
    let v = json(&run(&["bound", "fano", "--v-count", "8", "--avg-kl", "0", "--n", "3", "--eps", "1"]));
    assert!((v["value"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
    let v = json(&run(&["bound", "highdim", "--d", "64", "--r", "1", "--n", "256", "--delta", "1"]));
    assert_eq!(v["witness"]["k"], 64.0);
}

#[test]
fn bayes_bounds_default_to_bernoulli_uniform_information() {
    let v = json(&run(&["bound", "bayes-gammaopt", "--n", "1"]));
    assert!((v["value"].as_f64().unwrap() - 0.0741).abs() < 1e-3);
    assert!(v["witness"]["gamma"].as_f64().unwrap() > 0.0);
    let v = json(&run(&["bound", "bayes-mi", "--n", "1", "--delta", "1"]));
    assert!((v["value"].as_f64().unwrap() - 0.0457).abs() < 1e-3);
    let v = json(&run(&["bound", "bayes-egamma", "--n", "20", "--eps", "0.5", "--delta", "1e-4"]));
    assert!(v["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn bound_sweep_emits_csv() {
    let o = run(&["bound", "ht", "--kl", "2", "--sweep", "0:1:11"]);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "epsilon,value");
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[1], "0,0");
    let o = run(&["bound", "bayes-gammaopt", "--sweep", "0:1:3"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn remark_table_and_json() {
    let o = run(&["remark"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("holds"));
    let v = json(&run(&["remark", "--json"]));
    assert_eq!(v["ordering_holds"], true);
    assert_eq!(v["reported_egamma"], 0.08);
    assert!(v["egamma_bound"]["witness"]["gamma"].as_f64().unwrap() > 0.0);
}

#[test]
fn figure1_uses_output_directory_variable() {
    let dir = scratch("figure1-env");
    let o = bin()
        .args(["figure1", "--eps-grid", "0.1:2:5", "--panels", "2000"])
        .env(OUT_DIR_ENV, &dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(dir.join("figure1.csv")).unwrap();
    assert!(csv.starts_with("epsilon,bound_cor3,bound_thm3\n"));
    assert_eq!(csv.lines().count(), 6);
    assert!(dir.join("figure1.csv.manifest.json").exists());
}

#[test]
fn oracle_commands() {
    let dir = scratch("oracle");
    let k = write_kernel(&dir, "k.json", &["krr", "--eps", "1", "--k", "3"]);
    let v = json(&run(&["oracle", "profile", "--kernel", &k, "--epsilon", "0.5"]));
    assert_eq!(v["agree"], true);
    let v = json(&run(&["oracle", "eta", "--kernel", &k, "--f", "egamma", "--gamma", "1.5", "--trials", "200"]));
    let est = v["estimate"]["value"].as_f64().unwrap();
    assert!((est - v["two_point"].as_f64().unwrap()).abs() < 1e-10);
    let o = run(&["oracle", "eta", "--kernel", &k, "--f", "egamma"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn kernel_power_and_formats() {
    let o = run(&["kernel", "bsc", "--omega", "0.25", "--power", "2", "--format", "csv"]);
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().next().unwrap().starts_with("0.5625,0.1875,0.1875,0.0625"));
    assert_eq!(run(&["kernel", "rr"]).status.code(), Some(1));
}
