use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn zde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zde")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

const CONSTRUCT: &[&str] = &[
    "construct", "--h0", "0.5", "--beta0", "0.2", "--eta0", "0.4", "--alphabet", "4", "--dim", "1", "--mode", "P",
    "--measure", "uniform", "--m-cap", "9", "--seed", "7",
];

fn construct_into(path: &Path) -> Output {
    let mut args = CONSTRUCT.to_vec();
    let p = path.to_str().unwrap();
    args.extend(["--out", p]);
    zde(&args)
}

#[test]
fn construct_hits_the_interval() {
    let dir = tempfile::tempdir().unwrap();
    let blocks = dir.path().join("delta.blocks");
    let out = construct_into(&blocks);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["schema"], 1);
    let h = report["h_exact"].as_f64().unwrap();
    assert!(h > 0.5 && h < 0.7, "{h}");
    assert_eq!(report["config"]["seed"], 7);
    let g = report["blocks"].as_u64().unwrap() as f64;
    assert!((g.ln() / 10.0 - h).abs() < 1e-12);
    assert!(dir.path().join("delta.blocks.meta").exists());
}

#[test]
fn construct_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.blocks"), dir.path().join("b.blocks"));
    assert_eq!(code(&construct_into(&a)), 0);
    assert_eq!(code(&construct_into(&b)), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let meta = |p: &Path| fs::read(format!("{}.meta", p.display())).unwrap();
    assert_eq!(meta(&a), meta(&b));
}

#[test]
fn infeasible_target_exits_2() {
    let out = zde(&["construct", "--h0", "1.5", "--alphabet", "4", "--measure", "uniform", "--m-cap", "9", "--out", "/dev/null"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn exhausted_sampling_exits_3() {
    // Strongly biased μ0 with a tiny η leaves too few qualifying blocks.
    let dir = tempfile::tempdir().unwrap();
    let out = zde(&[
        "construct", "--h0", "0.3", "--beta0", "0.2", "--eta0", "0.02", "--measure", "bernoulli:0.7,0.3", "--m-cap", "3",
        "--depth", "3", "--out", dir.path().join("x.blocks").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn construct_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let blocks = dir.path().join("delta.blocks");
    assert_eq!(code(&construct_into(&blocks)), 0);
    let p = blocks.to_str().unwrap();

    let out = zde(&["verify", "--suite", "sandwich", "--blocks", p, "--n-max", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["suite"], "sandwich");
    assert_eq!(r["lower_estimates"].as_array().unwrap().len(), 3);
    assert_eq!(r["pass"], true);

    let out = zde(&["verify", "--suite", "proximity", "--blocks", p, "--samples", "10", "--seed", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r["proximity"]["max_D"].as_f64().unwrap() < r["proximity"]["threshold"].as_f64().unwrap());
}

#[test]
fn lemmas_suite_passes() {
    let out = zde(&["verify", "--suite", "lemmas"]);
    assert_eq!(code(&out), 0);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(r["lemmas"].as_array().unwrap().iter().all(|row| row["pass"] == true));
}

#[test]
fn corrupted_block_file_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let blocks = dir.path().join("bad.blocks");
    fs::write(&blocks, "1 P 2 2 2\n0 1 0\n0 1\n").unwrap();
    let out = zde(&["verify", "--suite", "sandwich", "--blocks", blocks.to_str().unwrap(), "--h0", "0.1", "--beta0", "0.2"]);
    assert_eq!(code(&out), 1);
    assert!(!out.stderr.is_empty());
}

#[test]
fn katok_rows_for_the_fair_coin() {
    let out = zde(&["entropy", "--measure", "bernoulli:0.5,0.5", "--window", "3", "--delta", "0.1", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,V_n,epsilon,delta,count,estimate,method"));
    let last: Vec<&str> = lines.last().unwrap().split(',').collect();
    assert_eq!(last[4], "15");
    assert!((last[5].parse::<f64>().unwrap() - 0.677).abs() < 5e-4);
}

#[test]
fn full_shift_entropy_is_ln2_and_log2_shows_bits() {
    let dir = tempfile::tempdir().unwrap();
    let blocks = dir.path().join("full2.blocks");
    fs::write(&blocks, "1 P 1 2 4\n0 0\n0 1\n1 0\n1 1\n").unwrap();
    let p = blocks.to_str().unwrap();
    let out = zde(&["entropy", "--blocks", p, "--window", "4", "--format", "csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let estimates: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(5).unwrap().parse().unwrap()).collect();
    assert_eq!(estimates.len(), 4);
    assert!(estimates.iter().all(|e| (e - 2f64.ln()).abs() < 1e-12), "{estimates:?}");
    let out = zde(&["entropy", "--blocks", p, "--window", "2", "--format", "csv", "--log2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let bits = text.lines().skip(1).map(|l| l.split(',').nth(5).unwrap().parse::<f64>().unwrap());
    assert!(bits.into_iter().all(|b| (b - 1.0).abs() < 1e-12), "{text}");
}

#[test]
fn sample_dumps_a_valid_row() {
    let dir = tempfile::tempdir().unwrap();
    let blocks = dir.path().join("delta.blocks");
    assert_eq!(code(&construct_into(&blocks)), 0);
    let out = zde(&["sample", "--blocks", blocks.to_str().unwrap(), "--box", "20", "--seed", "1"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 1);
    let symbols: Vec<u8> = rows[0].split(' ').map(|s| s.parse().unwrap()).collect();
    assert_eq!(symbols.len(), 21);
    assert!(symbols.iter().all(|&s| s < 4));
}

#[test]
fn config_file_fills_missing_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# desk run\nh0 = 0.5\nbeta0 = 0.2\neta0 = 0.4\nalphabet = 4\nmeasure = uniform\nm_cap = 9\nseed = 7\n").unwrap();
    let (a, b) = (dir.path().join("a.blocks"), dir.path().join("b.blocks"));
    let out = zde(&["construct", "--config", cfg.to_str().unwrap(), "--out", a.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(code(&construct_into(&b)), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());

    fs::write(&cfg, "h0 = 0.5\nbogus = 1\n").unwrap();
    let out = zde(&["construct", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn strict_mode_prints_params() {
    let out = zde(&["construct", "--strict", "--h0", "0.5", "--beta0", "0.2", "--eta0", "0.4", "--alphabet", "4", "--measure", "uniform"]);
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["params"]["k"], 21);
    assert_eq!(r["params"]["m"], 647);
    assert_eq!(code(&out), 0);
}

#[test]
fn disjoint_suite_passes_and_rejects_close_measures() {
    let out = zde(&[
        "verify", "--suite", "disjoint", "--mu1", "bernoulli:0.9,0.1", "--mu2", "bernoulli:0.1,0.9", "--eta0", "0.2",
        "--alphabet", "2", "--samples", "4", "--max-shifts", "64",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = zde(&["verify", "--suite", "disjoint", "--mu1", "bernoulli:0.9,0.1", "--mu2", "bernoulli:0.9,0.1", "--eta0", "0.2"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn help_exits_zero_and_bad_flags_exit_one() {
    assert_eq!(code(&zde(&["--help"])), 0);
    assert_eq!(code(&zde(&["construct", "--nope"])), 1);
}
