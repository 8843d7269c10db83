//! The `zde` command line.
//!
//! Exit codes: 0 success, 1 usage/parse/io, 2 infeasible parameters,
//! 3 sampling budget exhausted, 4 undecided D intervals, 5 a check failed.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::construction::{
    choose_params, disjointness_experiment, proximity_check, sample_block_set, sample_point, verify_sandwich,
    window_pattern_count, BlockMeta, BlockSubshift, DisjointSpec, ModeFlag, ParamInput, ProximitySpec, SampleSpec,
    SAMPLING_BUDGET,
};
use crate::counting::ln_big;
use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, LatticeMode};
use crate::measures::{bernoulli, bernoulli_entropy, read_measure, CylinderMeasure, Membership};
use crate::separation::{katok_entropy, rows_to_csv, ReportRow};
use crate::symbolic::{pow2_neg, read_blockset, write_blockset, Alphabet};
use crate::verify::lemmas_suite;

pub const SCHEMA: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug, Serialize)]
#[command(name = "zde", version, about = "Block subshifts with prescribed entropy on Z^d and N^d")]
pub struct Cli {
    /// File of `key = value` lines, used for flags not given on the command line.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output path (block file for `construct`, report otherwise).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Show entropies in bits; computation stays in nats.
    #[arg(long, global = true)]
    pub log2: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum Command {
    /// Choose parameters, sample a block set and write it with its sidecar.
    Construct(ConstructArgs),
    /// Run a verification suite.
    Verify(VerifyArgs),
    /// Entropy estimates for a measure or a block set.
    Entropy(EntropyArgs),
    /// Dump the pattern of a seeded point of Δ on a box.
    Sample(SampleArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct LatticeArgs {
    #[arg(long)]
    pub alphabet: Option<u32>,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    #[arg(long, default_value = "P")]
    pub mode: String,
}

#[derive(Args, Debug, Serialize)]
pub struct ConstructArgs {
    #[arg(long)]
    pub h0: f64,
    #[arg(long, default_value_t = 0.2)]
    pub beta0: f64,
    #[arg(long, default_value_t = 0.4)]
    pub eta0: f64,
    #[command(flatten)]
    pub lattice: LatticeArgs,
    /// uniform | bernoulli:p1,p2,... | file:path
    #[arg(long, default_value = "uniform")]
    pub measure: String,
    #[arg(long)]
    pub m_cap: Option<u64>,
    /// Depth of the empirical block test.
    #[arg(long, default_value_t = 1)]
    pub depth: u64,
    #[arg(long, default_value_t = 2)]
    pub n_max: u64,
    /// Only choose and print STRICT parameters.
    #[arg(long)]
    pub strict: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Sandwich,
    Proximity,
    Lemmas,
    Disjoint,
}

#[derive(Args, Debug, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long)]
    pub blocks: Option<PathBuf>,
    #[arg(long)]
    pub h0: Option<f64>,
    #[arg(long)]
    pub beta0: Option<f64>,
    #[arg(long)]
    pub eta0: Option<f64>,
    #[arg(long, default_value_t = 3)]
    pub n_max: u64,
    #[arg(long)]
    pub measure: Option<String>,
    #[arg(long)]
    pub depth: Option<u64>,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 4096)]
    pub max_shifts: usize,
    #[arg(long, default_value_t = 3)]
    pub scales: u32,
    #[arg(long)]
    pub mu1: Option<String>,
    #[arg(long)]
    pub mu2: Option<String>,
    #[arg(long, default_value_t = 9)]
    pub m: u64,
    #[arg(long, default_value_t = 8)]
    pub blocks_per_side: usize,
    #[command(flatten)]
    pub lattice: LatticeArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct EntropyArgs {
    #[arg(long)]
    pub measure: Option<String>,
    #[arg(long)]
    pub blocks: Option<PathBuf>,
    /// Largest n.
    #[arg(long, default_value_t = 3)]
    pub window: u64,
    /// r, for ε = 2^-(r+1).
    #[arg(long, default_value_t = 0)]
    pub epsilon_band: u64,
    #[arg(long, default_value_t = 0.1)]
    pub delta: f64,
    #[command(flatten)]
    pub lattice: LatticeArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub blocks: PathBuf,
    /// Radius of the dumped box.
    #[arg(long = "box")]
    pub radius: u64,
}

/// Failure with its exit code.
#[derive(Debug)]
pub struct Exit {
    pub code: i32,
    pub message: String,
}

fn exit_for(e: Error) -> Exit {
    let code = match e {
        Error::Infeasible(_) => 2,
        Error::SamplingExhausted { .. } => 3,
        _ => 1,
    };
    Exit { code, message: e.to_string() }
}

impl From<Error> for Exit {
    fn from(e: Error) -> Self {
        exit_for(e)
    }
}

fn usage(msg: impl Into<String>) -> Exit {
    Exit { code: 1, message: msg.into() }
}

/// Appends `--key value` for each config-file key whose flag is absent.
pub fn merge_config(args: Vec<String>) -> std::result::Result<Vec<String>, Exit> {
    let mut path: Option<String> = None;
    for (i, a) in args.iter().enumerate() {
        if a == "--config" {
            path = args.get(i + 1).cloned();
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        }
    }
    let Some(path) = path else { return Ok(args) };
    let text = fs::read_to_string(&path).map_err(|e| usage(format!("cannot read config {path}: {e}")))?;
    let present: BTreeSet<String> = args
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let mut out = args;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| usage(format!("{path}:{}: expected `key = value`", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if present.contains(&key) {
            continue;
        }
        match v.trim() {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            v => {
                out.push(format!("--{key}"));
                out.push(v.to_string());
            }
        }
    }
    Ok(out)
}

/// Parse and run; returns the process exit code.
pub fn run(args: Vec<String>) -> i32 {
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("zde: {}", e.message);
            return e.code;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = std::env::var("ZDE_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let result = match &cli.command {
        Command::Construct(a) => construct(&cli, a),
        Command::Verify(a) => verify(&cli, a),
        Command::Entropy(a) => entropy(&cli, a),
        Command::Sample(a) => sample(&cli, a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("zde: error: {}", e.message);
            e.code
        }
    }
}

fn resolved_config(cli: &Cli) -> Value {
    serde_json::to_value(cli).unwrap_or(Value::Null)
}

fn units(cli: &Cli, nats: f64) -> f64 {
    if cli.log2 {
        nats / std::f64::consts::LN_2
    } else {
        nats
    }
}

fn emit(cli: &Cli, text: &str) -> std::result::Result<(), Exit> {
    match &cli.out {
        Some(p) => fs::write(p, text).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn kv_csv(rows: &[(&str, String)]) -> String {
    let mut s = String::from("key,value\n");
    for (k, v) in rows {
        s.push_str(&format!("{k},{v}\n"));
    }
    s
}

/// A parsed measure with its entropy per site and its descriptor.
pub struct MeasureSpec {
    pub measure: CylinderMeasure,
    pub entropy: f64,
    pub alphabet: Alphabet,
}

pub fn parse_measure(spec: &str, b: Option<u32>, dim: usize, mode: LatticeMode, depth: u64) -> Result<MeasureSpec> {
    let spec = spec.trim();
    if spec == "uniform" {
        let b = b.ok_or_else(|| Error::InvalidArgument("uniform measure needs --alphabet".into()))?;
        let alphabet = Alphabet::new(b)?;
        let p = vec![1.0 / b as f64; b as usize];
        return Ok(MeasureSpec { measure: bernoulli(&p, depth, dim, mode)?, entropy: (b as f64).ln(), alphabet });
    }
    if let Some(list) = spec.strip_prefix("bernoulli:") {
        let p: Vec<f64> = list
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| Error::InvalidArgument(format!("bad probability {t:?}"))))
            .collect::<Result<_>>()?;
        if let Some(b) = b {
            if b as usize != p.len() {
                return Err(Error::InvalidArgument(format!("bernoulli vector has {} entries, alphabet is {b}", p.len())));
            }
        }
        let alphabet = Alphabet::new(p.len() as u32)?;
        return Ok(MeasureSpec { entropy: bernoulli_entropy(&p), measure: bernoulli(&p, depth, dim, mode)?, alphabet });
    }
    if let Some(path) = spec.strip_prefix("file:") {
        let b = b.ok_or_else(|| Error::InvalidArgument("file measures need --alphabet".into()))?;
        let alphabet = Alphabet::new(b)?;
        let measure = read_measure(&fs::read_to_string(path)?, alphabet, dim, mode)?;
        return Ok(MeasureSpec { entropy: measure.entropy_estimate(), measure, alphabet });
    }
    Err(Error::InvalidArgument(format!("unknown measure {spec:?} (uniform, bernoulli:p1,..., file:path)")))
}

fn sidecar_path(blocks: &Path) -> PathBuf {
    let mut s = blocks.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub fn load_subshift(path: &Path) -> Result<BlockSubshift> {
    let file = read_blockset(&fs::read_to_string(path)?)?;
    let side = sidecar_path(path);
    let meta = match fs::read_to_string(&side) {
        Ok(text) => Some(BlockMeta::from_sidecar(&text, file.alphabet, &file.bx)?),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => None,
        Err(e) => return Err(e.into()),
    };
    BlockSubshift::from_file(file, meta)
}

fn construct(cli: &Cli, a: &ConstructArgs) -> std::result::Result<i32, Exit> {
    let mode = LatticeMode::parse(&a.lattice.mode)?;
    let ms = parse_measure(&a.measure, a.lattice.alphabet, a.lattice.dim, mode, a.depth)?;
    let input = ParamInput {
        h0: a.h0,
        beta0: a.beta0,
        eta0: a.eta0,
        mu0_entropy: ms.entropy,
        b: ms.alphabet.size(),
        dim: a.lattice.dim,
        mode,
        flag: if a.strict { ModeFlag::Strict } else { ModeFlag::Desk },
        m_cap: a.m_cap,
    };
    if !a.strict && a.m_cap.is_none() {
        return Err(usage("construct needs --m-cap (or --strict)"));
    }
    let params = choose_params(&input)?;
    if a.strict {
        let report = json!({ "schema": SCHEMA, "command": "construct", "config": resolved_config(cli), "params": params });
        let text = match cli.format {
            Format::Json => to_json(&report),
            Format::Csv => {
                let rows: Vec<(&str, String)> = params.checks.iter().map(|c| (c.name, c.holds.to_string())).collect();
                kv_csv(&rows)
            }
        };
        emit(cli, &text)?;
        return Ok(if params.all_checks_hold() { 0 } else { 5 });
    }
    let out = cli.out.clone().ok_or_else(|| usage("construct needs --out for the block file"))?;
    let (lo, hi) = params.size_window.clone().expect("DESK mode always has a window");
    let bx = LatticeBox::new(a.lattice.dim, mode, params.m)?;
    let spec = SampleSpec { eta: params.eta, depth: a.depth, size_lo: lo.clone(), size_hi: hi.clone(), seed: cli.seed, budget: SAMPLING_BUDGET };
    let blocks = sample_block_set(&ms.measure, &bx, &spec)?;
    let meta = BlockMeta {
        measure: a.measure.clone(),
        h0: a.h0,
        beta0: a.beta0,
        eta0: a.eta0,
        eta: params.eta,
        beta: params.beta,
        h1: params.h1,
        k: params.k,
        delta: params.delta,
        epsilon: params.epsilon,
        ln_r_epsilon: params.ln_r_epsilon,
        depth: a.depth,
        seed: cli.seed,
    };
    let sub = crate::construction::build_delta(blocks, Some(meta.clone()))?;
    fs::write(&out, write_blockset(&sub.to_file())).map_err(|e| usage(format!("cannot write {}: {e}", out.display())))?;
    let side = sidecar_path(&out);
    fs::write(&side, meta.to_sidecar(sub.alphabet, &sub.bx)).map_err(|e| usage(format!("cannot write {}: {e}", side.display())))?;

    let sandwich = verify_sandwich(&sub, a.h0, a.beta0, a.n_max)?;
    let h = units(cli, sandwich.h_exact);
    let (t_lo, t_hi) = (units(cli, a.h0), units(cli, a.h0 + a.beta0));
    match cli.format {
        Format::Json => {
            let report = json!({
                "schema": SCHEMA,
                "command": "construct",
                "config": resolved_config(cli),
                "params": params,
                "blocks": sub.len(),
                "size_window": [lo.to_string(), hi.to_string()],
                "h_exact": h,
                "target": [t_lo, t_hi],
                "units": if cli.log2 { "bits" } else { "nats" },
                "sandwich": sandwich,
                "pass": sandwich.pass,
            });
            print!("{}", to_json(&report));
        }
        Format::Csv => print!(
            "{}",
            kv_csv(&[
                ("blocks", sub.len().to_string()),
                ("h_exact", h.to_string()),
                ("target_lo", t_lo.to_string()),
                ("target_hi", t_hi.to_string()),
                ("pass", sandwich.pass.to_string()),
            ])
        ),
    }
    eprintln!("h_exact = {h:.6} in ({t_lo}, {t_hi}): {}", if sandwich.pass { "pass" } else { "FAIL" });
    Ok(if sandwich.pass { 0 } else { 5 })
}

fn need_blocks(a: &VerifyArgs) -> std::result::Result<BlockSubshift, Exit> {
    let path = a.blocks.as_ref().ok_or_else(|| usage("this suite needs --blocks"))?;
    Ok(load_subshift(path)?)
}

fn verify(cli: &Cli, a: &VerifyArgs) -> std::result::Result<i32, Exit> {
    let mut report = json!({
        "schema": SCHEMA,
        "suite": a.suite,
        "config": resolved_config(cli),
        "h_exact": null,
        "lower_estimates": [],
        "upper_bound_chain": [],
        "proximity": null,
        "units": if cli.log2 { "bits" } else { "nats" },
    });
    let mut csv_rows: Vec<(String, String)> = Vec::new();
    let code;
    match a.suite {
        Suite::Sandwich => {
            let sub = need_blocks(a)?;
            let meta = sub.meta.clone();
            let h0 = a.h0.or(meta.as_ref().map(|m| m.h0)).ok_or_else(|| usage("--h0 is required without a sidecar"))?;
            let beta0 = a.beta0.or(meta.as_ref().map(|m| m.beta0)).ok_or_else(|| usage("--beta0 is required without a sidecar"))?;
            let r = verify_sandwich(&sub, h0, beta0, a.n_max)?;
            report["h_exact"] = json!(units(cli, r.h_exact));
            let conv = |v: &[(u64, f64)]| v.iter().map(|&(n, x)| (n, units(cli, x))).collect::<Vec<_>>();
            report["lower_estimates"] = json!(conv(&r.lower_estimates));
            report["upper_bound_chain"] = json!(conv(&r.upper_bound_chain));
            report["pattern_counts"] = json!(r.pattern_counts);
            report["notes"] = json!(r.notes);
            report["pass"] = json!(r.pass);
            for (n, x) in &r.lower_estimates {
                csv_rows.push((format!("lower_{n}"), units(cli, *x).to_string()));
            }
            for (n, x) in &r.upper_bound_chain {
                csv_rows.push((format!("upper_{n}"), units(cli, *x).to_string()));
            }
            for row in &r.pattern_counts {
                if let Some(c) = &row.count {
                    csv_rows.push((format!("count_{}", row.n), c.to_string()));
                }
            }
            csv_rows.push(("h_exact".into(), units(cli, r.h_exact).to_string()));
            code = if r.pass { 0 } else { 5 };
        }
        Suite::Proximity => {
            let sub = need_blocks(a)?;
            let meta = sub.meta.clone();
            let spec_str = a.measure.clone().or(meta.as_ref().map(|m| m.measure.clone())).ok_or_else(|| usage("--measure is required without a sidecar"))?;
            let eta0 = a.eta0.or(meta.as_ref().map(|m| m.eta0)).ok_or_else(|| usage("--eta0 is required without a sidecar"))?;
            let depth = a.depth.or(meta.as_ref().map(|m| m.depth)).unwrap_or(1);
            let ms = parse_measure(&spec_str, Some(sub.alphabet.size()), sub.dim(), sub.mode(), depth)?;
            let spec = ProximitySpec { samples: a.samples, seed: cli.seed, depth, max_shifts: a.max_shifts, scales: a.scales };
            let r = proximity_check(&sub, &ms.measure, eta0, &spec)?;
            report["h_exact"] = json!(units(cli, sub.exact_entropy()));
            report["proximity"] = json!({ "samples": r.samples, "max_D": r.max_d, "max_upper": r.max_upper, "threshold": r.threshold });
            report["details"] = json!(r);
            report["pass"] = json!(r.pass);
            csv_rows.push(("samples".into(), r.samples.to_string()));
            csv_rows.push(("max_D".into(), r.max_d.to_string()));
            csv_rows.push(("threshold".into(), r.threshold.to_string()));
            let undecided_only = !r.failures.is_empty() && r.failures.iter().all(|f| f.membership == Membership::Undecided);
            code = if r.pass {
                0
            } else if undecided_only {
                4
            } else {
                5
            };
        }
        Suite::Lemmas => {
            let r = lemmas_suite(cli.seed)?;
            for row in &r.rows {
                csv_rows.push((row.name.clone(), row.pass.to_string()));
            }
            report["lemmas"] = json!(r.rows);
            report["pass"] = json!(r.pass);
            code = if r.pass { 0 } else { 5 };
        }
        Suite::Disjoint => {
            let mode = LatticeMode::parse(&a.lattice.mode)?;
            let depth = a.depth.unwrap_or(1);
            let b = a.lattice.alphabet;
            let mu1 = parse_measure(a.mu1.as_deref().ok_or_else(|| usage("--mu1 is required"))?, b, a.lattice.dim, mode, depth)?;
            let mu2 = parse_measure(a.mu2.as_deref().ok_or_else(|| usage("--mu2 is required"))?, b, a.lattice.dim, mode, depth)?;
            let eta0 = a.eta0.ok_or_else(|| usage("--eta0 is required"))?;
            let spec = DisjointSpec {
                m: a.m,
                depth,
                blocks_per_side: a.blocks_per_side,
                samples: a.samples,
                seed: cli.seed,
                max_shifts: a.max_shifts,
            };
            let r = disjointness_experiment(&mu1.measure, &mu2.measure, eta0, &spec)?;
            report["details"] = json!(r);
            report["pass"] = json!(r.pass);
            csv_rows.push(("D_value".into(), r.distance.value.to_string()));
            for (i, s) in r.sides.iter().enumerate() {
                csv_rows.push((format!("side{}_cross_outside", i + 1), format!("{}/{}", s.cross_outside, s.samples)));
            }
            let undecided = r.sides.iter().any(|s| s.cross_undecided > 0);
            let definite_fail = r.sides.iter().any(|s| s.cross_outside + s.cross_undecided < s.samples);
            code = if r.pass {
                0
            } else if undecided && !definite_fail {
                4
            } else {
                5
            };
        }
    }
    let text = match cli.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let rows: Vec<(&str, String)> = csv_rows.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
            kv_csv(&rows)
        }
    };
    emit(cli, &text)?;
    if code == 4 {
        eprintln!("zde: some D intervals straddle the threshold; try a deeper --depth");
    }
    Ok(code)
}

fn entropy(cli: &Cli, a: &EntropyArgs) -> std::result::Result<i32, Exit> {
    let eps = pow2_neg(a.epsilon_band + 1);
    let mut rows = Vec::new();
    match (&a.measure, &a.blocks) {
        (Some(spec), None) => {
            let mode = LatticeMode::parse(&a.lattice.mode)?;
            let ms = parse_measure(spec, a.lattice.alphabet, a.lattice.dim, mode, 0)?;
            for n in 1..=a.window {
                let k = katok_entropy(&ms.measure, n, eps, a.delta)?;
                let v = LatticeBox::new(a.lattice.dim, mode, n)?.volume();
                rows.push(ReportRow {
                    n,
                    v_n: v.to_string(),
                    epsilon: eps,
                    delta: Some(a.delta),
                    count: k.r.to_string(),
                    estimate: units(cli, k.estimate),
                    method: "katok".into(),
                });
            }
        }
        (None, Some(path)) => {
            let sub = load_subshift(path)?;
            for n in 1..=a.window {
                let count = window_pattern_count(&sub, n + a.epsilon_band)?;
                let v = LatticeBox::new(sub.dim(), sub.mode(), n)?.volume();
                let est = ln_big(&count) / crate::lattice::ratio(&v, &num_bigint::BigUint::from(1u32));
                rows.push(ReportRow {
                    n,
                    v_n: v.to_string(),
                    epsilon: eps,
                    delta: None,
                    count: count.to_string(),
                    estimate: units(cli, est),
                    method: "exact-count".into(),
                });
            }
        }
        _ => return Err(usage("entropy needs exactly one of --measure and --blocks")),
    }
    let text = match cli.format {
        Format::Csv => rows_to_csv(&rows)?,
        Format::Json => to_json(&json!({ "schema": SCHEMA, "config": resolved_config(cli), "rows": rows })),
    };
    emit(cli, &text)?;
    Ok(0)
}

fn sample(cli: &Cli, a: &SampleArgs) -> std::result::Result<i32, Exit> {
    let sub = load_subshift(&a.blocks)?;
    let (_, _, z) = sample_point(&sub, cli.seed, 0)?;
    let bx = LatticeBox::new(sub.dim(), sub.mode(), a.radius)?;
    let symbols = z.window(&bx, &vec![0; sub.dim()])?;
    let w = bx.width() as usize;
    let mut text = String::new();
    for row in symbols.chunks(w) {
        let line: Vec<String> = row.iter().map(|s| s.to_string()).collect();
        text.push_str(&line.join(" "));
        text.push('\n');
    }
    emit(cli, &text)?;
    Ok(0)
}
