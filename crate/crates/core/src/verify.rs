//! Check batteries shared by `zde verify --suite lemmas` and the acceptance run.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::construction::{build_delta, grid_pattern_count_enumerated, BlockSubshift};
use crate::counting::{ln_big, q_count_volume};
use crate::error::Result;
use crate::lattice::{compose, decompose, decompose_generic, LatticeBox, LatticeMode};
use crate::measures::{bernoulli, metric_d, mixture};
use crate::construction::DeltaPoint;
use crate::symbolic::{AssignRule, Alphabet, BlockAssignment, Pattern};

#[derive(Clone, Debug, Serialize)]
pub struct BatteryRow {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Largest slack used (an error, or a violation margin), for auditing.
    pub worst: f64,
    pub pass: bool,
}

fn row(name: &str, cases: usize, failures: usize, worst: f64) -> BatteryRow {
    BatteryRow { name: name.into(), cases, failures, worst, pass: failures == 0 }
}

const MODES: [LatticeMode; 2] = [LatticeMode::Positive, LatticeMode::Full];

/// V of the composed box equals the product, for m, n ≤ 10 and d ≤ 3.
pub fn lattice_battery() -> Result<BatteryRow> {
    let (mut cases, mut failures) = (0, 0);
    for mode in MODES {
        for d in 1..=3 {
            for m in 0..=10 {
                for n in 0..=10 {
                    let lhs = LatticeBox::new(d, mode, compose(m, n, mode))?.volume();
                    let rhs = LatticeBox::new(d, mode, m)?.volume() * LatticeBox::new(d, mode, n)?.volume();
                    cases += 1;
                    failures += (lhs != rhs) as usize;
                }
            }
        }
    }
    Ok(row("lattice composition", cases, failures, 0.0))
}

/// Remainder bounds of both decompositions, decided in integers.
pub fn decomposition_battery() -> Result<Vec<BatteryRow>> {
    let (mut cases, mut failures, mut worst) = (0, 0, 0.0f64);
    for mode in MODES {
        for d in 1..=3 {
            for k in 1..=8 {
                for m in 1..=5 {
                    let dec = decompose(k, m, d, mode)?;
                    cases += 1;
                    failures += !dec.satisfies_subcube_bound(k) as usize;
                    worst = worst.max(dec.remainder_fraction() * k as f64 / (2 * d) as f64);
                }
            }
        }
    }
    let subcube = row("decomposition: remainder < 2d/K", cases, failures, worst);
    let (mut cases, mut failures, mut worst) = (0, 0, 0.0f64);
    for mode in MODES {
        for d in 1..=2 {
            for big_n in 1..=30 {
                for n in big_n..=30 {
                    let dec = decompose_generic(big_n, n, d, mode)?;
                    cases += 1;
                    failures += !dec.satisfies_width_bound() as usize;
                    let allowed = (d as u64 * dec.sub.width()) as f64 / dec.target.width() as f64;
                    worst = worst.max(dec.remainder_fraction() / allowed);
                }
            }
        }
    }
    Ok(vec![subcube, row("decomposition: remainder <= d D_N/D_n", cases, failures, worst)])
}

pub const Q_DELTAS: [f64; 9] = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45];

/// ln Q(n,δ)/V ≤ H(δ) for V ≤ 64, and exact against log-domain within 1e-9.
pub fn q_battery() -> Result<Vec<BatteryRow>> {
    let (mut cases, mut bound_fail, mut agree_fail, mut worst_err, mut worst_gap) = (0, 0, 0, 0.0f64, f64::NEG_INFINITY);
    for v in 1..=64u64 {
        for &delta in &Q_DELTAS {
            let q = q_count_volume(v, delta)?;
            let exact = q.exact.as_ref().expect("small volumes are exact");
            let ln_exact = ln_big(exact);
            cases += 1;
            bound_fail += !(ln_exact / v as f64 <= q.bound) as usize;
            worst_gap = worst_gap.max(ln_exact / v as f64 - q.bound);
            let err = (ln_exact - q.log_domain).abs();
            worst_err = worst_err.max(err);
            agree_fail += !(err <= 1e-9) as usize;
        }
    }
    Ok(vec![
        row("Q(n,delta) entropy bound", cases, bound_fail, worst_gap),
        row("Q(n,delta) exact vs log-domain", cases, agree_fail, worst_err),
    ])
}

fn random_simplex(rng: &mut ChaCha8Rng, b: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..b).map(|_| rng.random::<f64>() + 1e-3).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// D(tμ + (1-t)ν, ρ) ≤ t D(μ,ρ) + (1-t) D(ν,ρ) on random Bernoulli mixtures.
///
/// Each side is known only up to its tail; a violation counts only beyond the
/// combined tail bounds.
pub fn convexity_battery(samples: usize, seed: u64) -> Result<BatteryRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut failures, mut worst) = (0, f64::NEG_INFINITY);
    for _ in 0..samples {
        let b = rng.random_range(2..=3usize);
        let depth = rng.random_range(0..=2u64);
        let mode = MODES[rng.random_range(0..2)];
        let mu = bernoulli(&random_simplex(&mut rng, b), depth, 1, mode)?;
        let nu = bernoulli(&random_simplex(&mut rng, b), depth, 1, mode)?;
        let rho = bernoulli(&random_simplex(&mut rng, b), depth, 1, mode)?;
        let t: f64 = rng.random();
        let mix = mixture(&[t, 1.0 - t], &[mu.clone(), nu.clone()])?;
        let lhs = metric_d(&mix, &rho, depth)?;
        let a = metric_d(&mu, &rho, depth)?;
        let c = metric_d(&nu, &rho, depth)?;
        let rhs = t * a.value + (1.0 - t) * c.value;
        let margin = lhs.value - rhs;
        let slack = lhs.tail_bound + t * a.tail_bound + (1.0 - t) * c.tail_bound + 1e-12;
        worst = worst.max(margin);
        failures += (margin > slack) as usize;
    }
    Ok(row("convexity of D", samples, failures, worst))
}

/// Grid-aligned pattern counts of Y equal |Γ|^{V_n}: one pattern per block cylinder.
pub fn grid_count_battery(seed: u64) -> Result<BatteryRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut cases, mut failures) = (0, 0);
    for mode in MODES {
        for g in [1usize, 2, 3, 5, 16] {
            let bx = LatticeBox::new(1, mode, 1)?;
            let alphabet = Alphabet::new(2)?;
            let width = bx.cell_count()?;
            let mut words: Vec<Vec<u8>> = Vec::new();
            while words.len() < g {
                let w: Vec<u8> = (0..width).map(|_| rng.random_range(0..2u8)).collect();
                if !words.contains(&w) && words.len() < 1 << width {
                    words.push(w);
                }
                if words.len() == 1 << width {
                    break;
                }
            }
            let blocks = words.into_iter().map(|w| Pattern::new(bx, alphabet, w)).collect::<Result<Vec<_>>>()?;
            let g = blocks.len();
            let sub = build_delta(blocks, None)?;
            for n in 0..=3u64 {
                let v_n = LatticeBox::new(1, mode, n)?.volume_u64().unwrap_or(u64::MAX);
                if v_n > 4 || (g as u128).pow(v_n as u32) > 1 << 16 {
                    continue;
                }
                cases += 1;
                failures += (grid_pattern_count_enumerated(&sub, n)? != BigUint::from(g).pow(v_n as u32)) as usize;
            }
        }
    }
    Ok(row("grid-aligned pattern count", cases, failures, 0.0))
}

fn random_subshift(rng: &mut ChaCha8Rng, dim: usize, mode: LatticeMode) -> Result<BlockSubshift> {
    let m = rng.random_range(0..=2u64);
    let bx = LatticeBox::new(dim, mode, m)?;
    let alphabet = Alphabet::new(rng.random_range(2..=3u32))?;
    let cells = bx.cell_count()?;
    let want = rng.random_range(1..=5usize);
    let mut words: Vec<Vec<u8>> = Vec::new();
    for _ in 0..64 {
        if words.len() == want {
            break;
        }
        let w: Vec<u8> = (0..cells).map(|_| rng.random_range(0..alphabet.size() as u8)).collect();
        if !words.contains(&w) {
            words.push(w);
        }
    }
    let blocks = words.into_iter().map(|w| Pattern::new(bx, alphabet, w)).collect::<Result<Vec<_>>>()?;
    build_delta(blocks, None)
}

fn random_rule(rng: &mut ChaCha8Rng, dim: usize, count: usize) -> AssignRule {
    match rng.random_range(0..3) {
        0 => AssignRule::Constant(rng.random_range(0..count)),
        1 => {
            let periods: Vec<u64> = (0..dim).map(|_| rng.random_range(1..=3u64)).collect();
            let size = periods.iter().product::<u64>() as usize;
            AssignRule::Periodic { periods, table: (0..size).map(|_| rng.random_range(0..count)).collect() }
        }
        _ => AssignRule::Seeded { seed: rng.random(), count },
    }
}

/// Grid shift compatibility and the offset-wrapping step, as exact window
/// equalities on random (rule, offset, basis vector) triples with d ≤ 2.
pub fn shift_closure_battery(triples: usize, seed: u64) -> Result<BatteryRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for _ in 0..triples {
        let dim = rng.random_range(1..=2usize);
        let mode = MODES[rng.random_range(0..2)];
        let sub = random_subshift(&mut rng, dim, mode)?;
        let mut assignment = BlockAssignment::new(random_rule(&mut rng, dim, sub.len()), dim);
        assignment.shift = (0..dim).map(|_| rng.random_range(-3..=3i64)).collect();
        let offset: Vec<i64> = (0..dim).map(|_| rng.random_range(sub.bx.lo()..=sub.bx.hi())).collect();
        let j = rng.random_range(0..dim);
        let window = LatticeBox::new(dim, mode, 3 * sub.period())?;
        let p = DeltaPoint { assignment: assignment.clone(), offset };
        let ok = sub.shift_compatible(&assignment, j, &window)? && sub.closure_holds(&p, j, &window)?;
        failures += !ok as usize;
    }
    Ok(row("shift compatibility and offset closure", triples, failures, 0.0))
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmasReport {
    pub rows: Vec<BatteryRow>,
    pub pass: bool,
}

pub fn lemmas_suite(seed: u64) -> Result<LemmasReport> {
    let mut rows = vec![lattice_battery()?];
    rows.extend(decomposition_battery()?);
    rows.extend(q_battery()?);
    rows.push(convexity_battery(200, seed)?);
    rows.push(grid_count_battery(seed)?);
    rows.push(shift_closure_battery(100, seed)?);
    let pass = rows.iter().all(|r| r.pass);
    Ok(LemmasReport { rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let r = lemmas_suite(11).unwrap();
        for row in &r.rows {
            assert!(row.pass, "{row:?}");
            assert!(row.cases > 0, "{row:?}");
        }
    }
}
