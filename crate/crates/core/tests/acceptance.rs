//! Acceptance run: one PASS/FAIL line per criterion, each under a time limit.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_integer::binomial;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use zde::construction::{
    build_delta, choose_params, delta_pattern_count, delta_pattern_count_brute, disjointness_experiment,
    proximity_check, sample_block_set, separated_pair_check, verify_sandwich, BlockSubshift, DisjointSpec, ModeFlag,
    ParamInput, ProximitySpec, SampleSpec, SAMPLING_BUDGET,
};
use zde::counting::{ln_big, q_count_volume};
use zde::lattice::{compose, LatticeBox, LatticeMode};
use zde::measures::{bernoulli, empirical_measure_at, metric_d};
use zde::separation::katok_entropy;
use zde::verify::{convexity_battery, decomposition_battery, shift_closure_battery};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn closed_form_volume(d: u32, mode: LatticeMode, n: u64) -> u128 {
    let w = match mode {
        LatticeMode::Positive => n + 1,
        LatticeMode::Full => 2 * n + 1,
    };
    (w as u128).pow(d)
}

fn c1_lattice() -> Outcome {
    let mut cases = 0;
    for mode in [LatticeMode::Positive, LatticeMode::Full] {
        for d in 1..=3u32 {
            for m in 0..=10 {
                for n in 0..=10 {
                    let k = compose(m, n, mode);
                    let lib = LatticeBox::new(d as usize, mode, k).map_err(e)?.volume();
                    let oracle = closed_form_volume(d, mode, m) * closed_form_volume(d, mode, n);
                    ensure(closed_form_volume(d, mode, k) == oracle, format!("{mode:?} d={d} m={m} n={n}"))?;
                    ensure(lib == BigUint::from(oracle), format!("library volume {mode:?} d={d} m={m} n={n}"))?;
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} cases"))
}

fn c2_decomposition() -> Outcome {
    let rows = decomposition_battery().map_err(e)?;
    for r in &rows {
        ensure(r.pass, format!("{}: {} of {} failed", r.name, r.failures, r.cases))?;
    }
    Ok(rows.iter().map(|r| format!("{} cases", r.cases)).collect::<Vec<_>>().join(", "))
}

fn c3_counting() -> Outcome {
    let mut cases = 0;
    for v in 1..=64u64 {
        for j in 1..=9u64 {
            // δ = j/20; members occupy at least ceil((20 - j) v / 20) cells.
            let delta = j as f64 / 20.0;
            let k0 = ((20 - j) * v).div_ceil(20);
            let oracle: BigUint = (k0..=v).map(|k| binomial(BigUint::from(v), BigUint::from(k))).sum();
            let q = q_count_volume(v, delta).map_err(e)?;
            ensure(q.exact.as_ref() == Some(&oracle), format!("Q exact v={v} δ={delta}"))?;
            let h = -delta * delta.ln() - (1.0 - delta) * (1.0 - delta).ln();
            ensure(ln_big(&oracle) / v as f64 <= h, format!("entropy bound v={v} δ={delta}"))?;
            ensure((ln_big(&oracle) - q.log_domain).abs() <= 1e-9, format!("log-domain v={v} δ={delta}"))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} cases"))
}

fn c4_metric() -> Outcome {
    let r = convexity_battery(200, 4).map_err(e)?;
    ensure(r.pass, format!("{} convexity violations beyond tails", r.failures))?;
    let zero = bernoulli(&[1.0, 0.0], 1, 1, LatticeMode::Positive).map_err(e)?;
    let one = bernoulli(&[0.0, 1.0], 1, 1, LatticeMode::Positive).map_err(e)?;
    let d = metric_d(&zero, &one, 1).map_err(e)?;
    ensure(d.value == 0.890625, format!("D(δ0, δ1) = {}", d.value))?;
    Ok(format!("200 mixtures, worst margin {:.2e}; D = {}", r.worst, d.value))
}

fn c5_katok() -> Outcome {
    let mu = bernoulli(&[0.5, 0.5], 0, 1, LatticeMode::Positive).map_err(e)?;
    let k = katok_entropy(&mu, 3, 0.5, 0.1).map_err(e)?;
    ensure(k.r == BigUint::from(15u32), format!("r = {}", k.r))?;
    let err = (k.estimate - 15f64.ln() / 4.0).abs();
    ensure(err <= 1e-12, format!("estimate off by {err}"))?;
    let k16 = katok_entropy(&mu, 15, 0.5, 0.1).map_err(e)?;
    let gap = (k16.estimate - 2f64.ln()).abs();
    ensure(gap <= 0.05, format!("V_n = 16 estimate {} is {gap} from ln 2", k16.estimate))?;
    Ok(format!("r = 15; V_n = 16 estimate {:.4}", k16.estimate))
}

/// The DESK construction shared by criteria 6 to 8.
fn desk_construction() -> Result<BlockSubshift, String> {
    let input = ParamInput {
        h0: 0.5,
        beta0: 0.2,
        eta0: 0.4,
        mu0_entropy: 4f64.ln(),
        b: 4,
        dim: 1,
        mode: LatticeMode::Positive,
        flag: ModeFlag::Desk,
        m_cap: Some(9),
    };
    let params = choose_params(&input).map_err(e)?;
    let (lo, hi) = params.size_window.clone().ok_or("no size window")?;
    let mu0 = bernoulli(&[0.25; 4], 1, 1, LatticeMode::Positive).map_err(e)?;
    let bx = LatticeBox::new(1, LatticeMode::Positive, params.m).map_err(e)?;
    let spec = SampleSpec { eta: params.eta, depth: 1, size_lo: lo, size_hi: hi, seed: 7, budget: SAMPLING_BUDGET };
    let blocks = sample_block_set(&mu0, &bx, &spec).map_err(e)?;
    build_delta(blocks, None).map_err(e)
}

fn c6_sandwich(sub: &BlockSubshift) -> Outcome {
    ensure(sub.v_m() == 10, format!("V_M = {}", sub.v_m()))?;
    let g = sub.len() as f64;
    ensure(g > 5f64.exp() && g < 7f64.exp(), format!("|Γ| = {g}"))?;
    let h = g.ln() / 10.0;
    ensure(h > 0.5 && h < 0.7, format!("h_exact = {h}"))?;
    let report = verify_sandwich(sub, 0.5, 0.2, 3).map_err(e)?;
    ensure(report.pass, "sandwich report failed")?;
    ensure((report.h_exact - h).abs() < 1e-15, "h_exact disagrees")?;
    let target = h - 10f64.ln() / 10.0;
    for n in 1..=3u64 {
        let count = delta_pattern_count(sub, n).map_err(e)?;
        let volume = 10 * n + 1;
        let lower = ln_big(&count) / volume as f64;
        ensure(lower >= target, format!("n={n}: lower estimate {lower} < {target}"))?;
        let cap = BigUint::from(10u32) * BigUint::from(sub.len()).pow((n + 2) as u32);
        ensure(count <= cap, format!("n={n}: count {count} exceeds V_M|Γ|^V_(n+1)"))?;
    }
    // The counting DP against brute force on a small sub-family.
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let picks: Vec<_> = sample(&mut rng, sub.len(), 12).into_iter().map(|i| sub.blocks[i].clone()).collect();
    let small = build_delta(picks, None).map_err(e)?;
    let (dp, brute) = (delta_pattern_count(&small, 1).map_err(e)?, delta_pattern_count_brute(&small, 1).map_err(e)?);
    ensure(dp == brute, format!("DP {dp} vs brute {brute}"))?;
    Ok(format!("|Γ| = {}, h_exact = {h:.6}", sub.len()))
}

fn c7_proximity(sub: &BlockSubshift) -> Outcome {
    let mu0 = bernoulli(&[0.25; 4], 1, 1, LatticeMode::Positive).map_err(e)?;
    let spec = ProximitySpec { samples: 100, seed: 3, depth: 1, max_shifts: 4096, scales: 3 };
    let r = proximity_check(sub, &mu0, 0.4, &spec).map_err(e)?;
    ensure(r.k == 21 && (r.eta - 0.1).abs() < 1e-15, format!("K = {}, η = {}", r.k, r.eta))?;
    ensure(r.n == 189, format!("KM = {}", r.n))?;
    ensure(r.samples == 100 && r.shifts_per_sample == 379, format!("{} × {}", r.samples, r.shifts_per_sample))?;
    ensure(r.max_upper < 0.3 && r.failures.is_empty(), format!("max upper {}", r.max_upper))?;
    ensure(r.pass, "proximity report failed")?;
    // Recompute one orbit average by hand.
    let (_, _, z) = zde::construction::sample_point(sub, 3, 0).map_err(e)?;
    let n_box = LatticeBox::new(1, LatticeMode::Positive, 189).map_err(e)?;
    for shift in [0i64, 200, 378] {
        let emp = empirical_measure_at(&z, &n_box, &[shift], 1).map_err(e)?;
        let d = metric_d(&emp, &mu0, 1).map_err(e)?;
        ensure(d.upper() <= r.max_upper + 1e-12, format!("shift {shift}: {} above reported max", d.upper()))?;
    }
    Ok(format!("max D upper {:.4} < 0.3", r.max_upper))
}

fn c8_separation(sub: &BlockSubshift) -> Outcome {
    let r = separated_pair_check(sub, 2, 50, 8).map_err(e)?;
    ensure(r.pairs == 50 && r.failures == 0, format!("{} of {} pairs not separated", r.failures, r.pairs))?;
    Ok("50 pairs separated".into())
}

fn c9_shift() -> Outcome {
    let r = shift_closure_battery(100, 9).map_err(e)?;
    ensure(r.pass && r.cases == 100, format!("{} of {} triples failed", r.failures, r.cases))?;
    Ok("100 triples".into())
}

fn c10_disjoint() -> Outcome {
    let mu1 = bernoulli(&[0.9, 0.1], 1, 1, LatticeMode::Positive).map_err(e)?;
    let mu2 = bernoulli(&[0.1, 0.9], 1, 1, LatticeMode::Positive).map_err(e)?;
    let spec = DisjointSpec { m: 9, depth: 1, blocks_per_side: 8, samples: 100, seed: 10, max_shifts: 4096 };
    let r = disjointness_experiment(&mu1, &mu2, 0.2, &spec).map_err(e)?;
    for (i, s) in r.sides.iter().enumerate() {
        ensure(s.cross_outside == s.samples, format!("side {}: {} of {} outside", i + 1, s.cross_outside, s.samples))?;
    }
    ensure(r.pass, "disjointness report failed")?;
    Ok(format!("D = {}, {} cross pairs per side", r.distance.value, r.sides[0].samples))
}

fn c11_strict() -> Outcome {
    let input = ParamInput {
        h0: 0.5,
        beta0: 0.2,
        eta0: 0.4,
        mu0_entropy: 4f64.ln(),
        b: 4,
        dim: 1,
        mode: LatticeMode::Positive,
        flag: ModeFlag::Strict,
        m_cap: None,
    };
    let p = choose_params(&input).map_err(e)?;
    ensure((p.beta - 0.01).abs() < 1e-15, format!("β = {}", p.beta))?;
    ensure((p.h1 - 0.6).abs() < 1e-15, format!("h1 = {}", p.h1))?;
    ensure((p.eta - 0.1).abs() < 1e-15, format!("η = {}", p.eta))?;
    // Kη > 2 with η = 1/10 means K > 20.
    ensure(p.k == 21, format!("K = {}", p.k))?;
    let (beta, h1) = (0.01f64, 0.6f64);
    let v = (2u64..)
        .find(|&v| {
            let v = v as f64;
            v.ln() / v < beta && v * (h1 + beta) > (v * h1).exp().ln_1p()
        })
        .unwrap();
    ensure(p.m == v - 1, format!("M = {}, oracle {}", p.m, v - 1))?;
    ensure(p.size_window.is_none(), "STRICT window was materialized")?;
    let (lo, hi) = p.size_window_log;
    ensure((lo - v as f64 * h1).abs() < 1e-9 && (hi - v as f64 * (h1 + beta)).abs() < 1e-9, format!("ln window ({lo}, {hi})"))?;
    Ok(format!("M = {}, ln|Γ| window [{lo:.2}, {hi:.2})", p.m))
}

fn main() {
    let mut all = true;
    let mut run = |name: &str, limit: u64, f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let out = f();
        let took = t.elapsed();
        let over = took > Duration::from_secs(limit);
        let (ok, detail) = match out {
            Ok(s) if !over => (true, s),
            Ok(s) => (false, format!("{s}; over the {limit} s limit")),
            Err(s) => (false, s),
        };
        all &= ok;
        println!("{} {name} ({:.2} s): {detail}", if ok { "PASS" } else { "FAIL" }, took.as_secs_f64());
    };
    run("1 lattice algebra", 1, &c1_lattice);
    run("2 decomposition bounds", 5, &c2_decomposition);
    run("3 counting", 10, &c3_counting);
    run("4 measure metric", 5, &c4_metric);
    run("5 katok estimator", 5, &c5_katok);

    let t = Instant::now();
    let built = desk_construction();
    let build_time = t.elapsed().as_secs();
    match &built {
        Ok(sub) => {
            // Block sampling counts against criterion 6.
            run("6 end-to-end sandwich", 60u64.saturating_sub(build_time), &|| c6_sandwich(sub));
            run("7 proximity", 120, &|| c7_proximity(sub));
            run("8 separation", 10, &|| c8_separation(sub));
        }
        Err(err) => {
            for name in ["6 end-to-end sandwich", "7 proximity", "8 separation"] {
                let msg = err.clone();
                run(name, 60, &move || Err(format!("construction failed: {msg}")));
            }
        }
    }
    run("9 shift compatibility and closure", 10, &c9_shift);
    run("10 disjointness", 60, &c10_disjoint);
    run("11 STRICT parameter chain", 1, &c11_strict);
    if !all {
        std::process::exit(1);
    }
}
