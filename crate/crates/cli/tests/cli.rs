use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const POLAR: [&str; 4] = ["--psi", "stable:d=1,alpha=1.5", "--phi", "stable:d=0.5,beta=0.5"];
const RECURRENT: [&str; 4] = ["--psi", "stable:d=1,alpha=1.5", "--phi", "stable:d=0.25,beta=0.5"];

fn cbi(args: &[&str], report_dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cbi"));
    cmd.args(args).env_remove("CBI_REPORT_DIR");
    if let Some(d) = report_dir {
        cmd.env("CBI_REPORT_DIR", d);
    }
    cmd.output().expect("spawn cbi")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn simulate_args<'a>(out: &'a str, reps: &'a str) -> Vec<&'a str> {
    let mut a = vec!["simulate"];
    a.extend(RECURRENT);
    a.extend(["--T", "50", "--eps", "1e-3", "--reps", reps, "--seed", "11", "--out", out]);
    a
}

#[test]
fn polar_classification_is_reported_with_fixed_keys() {
    let mut args = vec!["classify"];
    args.extend(POLAR);
    let o = cbi(&args, None);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["zero_class"], "Polar");
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        ["conservative", "dim_lower", "dim_upper", "evidence", "grey", "heavy", "intervals", "method", "stationary", "zero_class"]
    );
}

#[test]
fn classify_csv_has_one_row_per_field() {
    let mut args = vec!["classify"];
    args.extend(RECURRENT);
    args.extend(["--format", "csv"]);
    let o = cbi(&args, None);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("field,value\n"));
    assert!(text.contains("zero_class,Recurrent\n"));
    assert!(text.contains("dim_upper,0.5\n"));
    assert_eq!(text.lines().count(), 11);
}

#[test]
fn near_boundary_is_inconclusive_with_exit_2() {
    let o = cbi(&["classify", "--psi", "stable:d=1,alpha=1.5", "--phi", "stable:d=0.4999,beta=0.5"], None);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["zero_class"], "Inconclusive");
    assert!(!v["evidence"]["notes"].as_array().unwrap().is_empty());
}

#[test]
fn zero_replicates_fail() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim.csv");
    let o = cbi(&simulate_args(out.to_str().unwrap(), "0"), None);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    assert!(!out.exists());
}

#[test]
fn domain_and_parse_errors_exit_1() {
    for args in [
        vec!["classify", "--psi", "stable:d=1,alpha=3", "--phi", "stable:d=1,beta=0.5"],
        vec!["classify", "--psi", "nonsense", "--phi", "stable:d=1,beta=0.5"],
        vec!["laplace", "--psi", "stable:d=1,alpha=2", "--phi", "stable:d=1,beta=0.5", "--q", "x"],
        vec!["ou", "--alpha", "1.5", "--T", "10", "--eps", "2", "--reps", "1", "--seed", "1"],
        vec!["gzero", "--psi", "stable:d=1,alpha=1.5", "--phi", "stable:d=0.25,beta=0.5", "--t", "1"],
        vec!["frobnicate"],
    ] {
        let o = cbi(&args, None);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
    assert_eq!(cbi(&["--help"], None).status.code(), Some(0));
}

#[test]
fn floats_carry_twelve_significant_digits() {
    let o = cbi(&["vflow", "--psi", "stable:d=1,alpha=2", "--t", "3", "--t", "0.5", "--lambda", "1"], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "t,v_t,v_t_lambda\n3,0.333333333333,0.25\n0.5,2,0.666666666667\n");
}

#[test]
fn laplace_and_gzero_tables() {
    let pair = ["--psi", "stable:d=1,alpha=2", "--phi", "stable:d=1,beta=0.5"];
    let mut args = vec!["laplace"];
    args.extend(pair);
    args.extend(["--q", "1", "--q", "4"]);
    let o = cbi(&args, None);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "q,L");
    assert_eq!(rows.len(), 3);

    let mut args = vec!["gzero"];
    args.extend(pair);
    args.extend(["--t", "1"]);
    let o = cbi(&args, None);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let cells: Vec<f64> = text.lines().nth(1).unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    // Density 2 e^{-2 sqrt t} and tail (1 + 2 sqrt t) e^{-2 sqrt t}.
    assert!((cells[1] - 2.0 * (-2f64).exp()).abs() < 1e-9);
    assert!((cells[2] - 3.0 * (-2f64).exp()).abs() < 1e-9);
}

#[test]
fn simulate_is_reproducible_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let mut read = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let mut args = simulate_args(out.to_str().unwrap(), "3");
        args.push("--dump-intervals");
        assert_eq!(cbi(&args, None).status.code(), Some(0));
        let stem = name.trim_end_matches(".csv");
        read.push([
            std::fs::read(&out).unwrap(),
            std::fs::read(dir.path().join(format!("{stem}.summary.json"))).unwrap(),
            std::fs::read(dir.path().join(format!("{stem}.intervals.csv"))).unwrap(),
        ]);
    }
    assert_eq!(read[0], read[1]);
    let table = String::from_utf8(read[0][0].clone()).unwrap();
    assert_eq!(table.lines().next(), Some("seed,replicate,lebesgue,g_last,dim_fit"));
    assert_eq!(table.lines().count(), 4);
    let summary: Value = serde_json::from_slice(&read[0][1]).unwrap();
    assert_eq!(summary["reps"], 3);
}

#[test]
fn simulate_needs_a_file_destination() {
    let mut args = simulate_args("x", "1");
    args.truncate(args.len() - 2);
    assert_eq!(cbi(&args, None).status.code(), Some(1));
}

#[test]
fn report_dir_is_the_default_destination() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["classify"];
    args.extend(POLAR);
    let o = cbi(&args, Some(dir.path()));
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(dir.path().join("classify.json")).unwrap()).unwrap();
    assert_eq!(v["zero_class"], "Polar");

    let o = cbi(&["ou", "--alpha", "1", "--T", "10", "--eps", "0.01", "--reps", "1", "--seed", "3"], Some(dir.path()));
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&std::fs::read(dir.path().join("ou.json")).unwrap()).unwrap();
    assert_eq!(v["class"], "TrivialPoint");
    assert_eq!(v["dim_theory"], 0.0);
    assert!(v["dim_fit"].is_null());
}

#[test]
fn ou_report_fields() {
    let o = cbi(&["ou", "--alpha", "1.5", "--T", "50", "--eps", "1e-3", "--reps", "2", "--seed", "5"], None);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["class"], "CutoutSet");
    assert_eq!(v["dim_theory"].as_f64(), Some(0.666666666667));
    assert!(v["dim_fit"].as_f64().unwrap() > 0.3);
    assert!(v["ks_pushforward"].as_f64().unwrap() < 0.03);
    let again = cbi(&["ou", "--alpha", "1.5", "--T", "50", "--eps", "1e-3", "--reps", "2", "--seed", "5"], None);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn config_file_matches_flags() {
    let dir = tempfile::tempdir().unwrap();
    let from_flags = dir.path().join("flags.csv");
    assert_eq!(cbi(&simulate_args(from_flags.to_str().unwrap(), "2"), None).status.code(), Some(0));

    let from_config = dir.path().join("config.csv");
    let toml = format!(
        "command = \"simulate\"\npsi = \"{}\"\nphi = \"{}\"\nT = 50.0\neps = 1e-3\nreps = 2\nseed = 11\nout = {:?}\n",
        RECURRENT[1],
        RECURRENT[3],
        from_config.to_str().unwrap()
    );
    let cfg = dir.path().join("exp.toml");
    std::fs::write(&cfg, toml).unwrap();
    assert_eq!(cbi(&["run", "--config", cfg.to_str().unwrap()], None).status.code(), Some(0));
    assert_eq!(std::fs::read(&from_flags).unwrap(), std::fs::read(&from_config).unwrap());
}

#[test]
fn config_validation() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        // seed is mandatory for stochastic commands
        "command = \"ou\"\nalpha = 1.5\nT = 10.0\neps = 0.01\nreps = 1\n",
        // eps must not exceed T/10
        "command = \"ou\"\nalpha = 1.5\nT = 10.0\neps = 1.5\nreps = 1\nseed = 1\n",
        "command = \"classify\"\npsi = \"stable:d=1,alpha=2\"\nphi = \"stable:d=1,beta=0.5\"\ncolour = \"red\"\n",
        "command = \"teleport\"\n",
    ];
    for (i, text) in cases.iter().enumerate() {
        let cfg = dir.path().join(format!("c{i}.toml"));
        std::fs::write(&cfg, text).unwrap();
        let o = cbi(&["run", "--config", cfg.to_str().unwrap()], None);
        assert_eq!(o.status.code(), Some(1), "{text}");
    }
    let o = cbi(&["run", "--config", dir.path().join("missing.toml").to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(1));
}
