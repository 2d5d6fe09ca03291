use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hubbard-ness")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn build_two_sites_has_four_terms() {
    let out = run(&["build", "--n", "2", "--eps", "1", "--u", "4", "--mode", "exact"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["num_terms"], 4);
}

#[test]
fn symbolic_build_reports_polynomials() {
    let out = run(&["build", "--n", "2"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["mode"], "symbolic");
}

#[test]
fn float_fixed_point_passes_at_five_sites() {
    let out = run(&["verify", "fixed-point", "--n", "5", "--eps", "0.5", "--u", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["passed"], true);
}

#[test]
fn exact_fixed_point_has_no_residual() {
    let out = run(&["verify", "fixed-point", "--n", "3", "--eps", "1/3", "--u", "-2"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["residual_terms"], 0);
}

#[test]
fn local_conditions_certificate_is_clean() {
    let out = run(&["verify", "local-conditions", "--k-max", "4"]);
    assert!(out.status.success());
    let cert = json(&out);
    assert_eq!(cert["violations"], Value::Array(vec![]));
    assert!(cert["nontrivial_zero"].as_u64().unwrap() > 0);
}

#[test]
fn identical_invocations_give_identical_output() {
    let args = ["verify", "local-conditions", "--k-max", "3"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let args = ["verify", "properties", "--n", "3", "--seed", "7"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn sequential_and_parallel_agree() {
    let args = ["verify", "local-conditions", "--k-max", "3"];
    let mut sequential = args.to_vec();
    sequential.push("--sequential");
    assert_eq!(run(&args).stdout, run(&sequential).stdout);
}

#[test]
fn properties_report_only_the_z_commutator() {
    let out = run(&["verify", "properties", "--n", "3"]);
    assert_eq!(out.status.code(), Some(1));
    let failed: Vec<Value> = json(&out)["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].clone())
        .collect();
    assert_eq!(failed, vec![Value::from("z_commutator")]);
}

#[test]
fn observe_writes_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("profiles");
    let out = run(&["observe", "--n", "3", "--eps", "1", "--u", "4", "--out", target.to_str().unwrap()]);
    assert!(out.status.success());
    let sites = std::fs::read_to_string(target.join("sites.csv")).unwrap();
    let bonds = std::fs::read_to_string(target.join("currents.csv")).unwrap();
    assert!(sites.starts_with("site,sz,tz,n_up,n_down\n"));
    assert_eq!(sites.lines().count(), 4);
    let currents: Vec<&str> = bonds.lines().skip(1).map(|l| l.split_once(',').unwrap().1).collect();
    assert_eq!(currents, vec!["20/57,20/57"; 2]);
}

#[test]
fn coloring_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("coloring.json");
    std::fs::write(
        &path,
        r#"{"U1":"white","U2":"black","U3":"white","U4":"black","L1":"white","L2":"black","L3":"white","L4":"black"}"#,
    )
    .unwrap();
    let out = run(&["verify", "fixed-point", "--n", "3", "--eps", "1", "--u", "4", "--coloring", path.to_str().unwrap()]);
    assert!(out.status.success());
    std::fs::write(&path, r#"{"U1":"white"}"#).unwrap();
    let out = run(&["build", "--n", "2", "--coloring", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(run(&["build", "--n", "2", "--eps", "2/0"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["build", "--n", "0"]).status.code(), Some(2));
}

#[test]
fn version_includes_table_hash() {
    let out = run(&["--version"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("hubbard-ness 0.1.0 amplitude-table "));
    assert_eq!(text.trim().rsplit(' ').next().unwrap().len(), 64);
}
