//! Entropy of Δ: the closed form, exact pattern counts, and the bound chain.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::counting::{ln_big, q_count_volume};
use crate::error::{invalid, Error, Result};
use crate::lattice::{compose, LatticeBox};
use crate::separation::separated;
use crate::symbolic::{AssignRule, BlockAssignment, BlockTiling, MAX_DIM};

use super::blocks::BlockSubshift;

/// Largest brute-force enumeration (patterns × offsets) attempted.
pub const BRUTE_CAP: u128 = 1_000_000;
/// Largest DP layer kept for one-dimensional counts.
pub const DP_STATE_CAP: usize = 4_000_000;

const NONE: u32 = u32::MAX;

/// Per-phase tries of block suffixes; phase 0 is the full-block trie.
struct PhaseTries {
    children: Vec<Vec<(u8, u32)>>,
    end: Vec<bool>,
    roots: Vec<u32>,
}

impl PhaseTries {
    fn new(blocks: &[Pattern1]) -> Self {
        let d = blocks[0].len();
        let mut t = PhaseTries { children: Vec::new(), end: Vec::new(), roots: Vec::with_capacity(d) };
        for phi in 0..d {
            let root = t.node();
            t.roots.push(root);
            for b in blocks {
                let mut at = root;
                for &s in &b[phi..] {
                    at = match t.children[at as usize].iter().find(|(c, _)| *c == s) {
                        Some(&(_, n)) => n,
                        None => {
                            let n = t.node();
                            t.children[at as usize].push((s, n));
                            n
                        }
                    };
                }
                t.end[at as usize] = true;
            }
        }
        t
    }

    fn node(&mut self) -> u32 {
        self.children.push(Vec::new());
        self.end.push(false);
        (self.children.len() - 1) as u32
    }

    fn next(&self, at: u32, s: u8) -> u32 {
        if at == NONE {
            return NONE;
        }
        let from = if self.end[at as usize] { self.roots[0] } else { at };
        self.children[from as usize].iter().find(|(c, _)| *c == s).map_or(NONE, |&(_, n)| n)
    }
}

type Pattern1 = Vec<u8>;

/// Distinct length-`len` words in concatenations of blocks, read from any phase.
fn count_words_1d(blocks: &[Pattern1], b: u32, len: u64) -> Result<BigUint> {
    let tries = PhaseTries::new(blocks);
    let mut layer: HashMap<Vec<u32>, BigUint> = HashMap::new();
    layer.insert(tries.roots.clone(), BigUint::one());
    for _ in 0..len {
        let mut next: HashMap<Vec<u32>, BigUint> = HashMap::with_capacity(layer.len() * 2);
        for (state, count) in &layer {
            for s in 0..b as u8 {
                let to: Vec<u32> = state.iter().map(|&n| tries.next(n, s)).collect();
                if to.iter().all(|&n| n == NONE) {
                    continue;
                }
                *next.entry(to).or_insert_with(BigUint::zero) += count;
            }
        }
        if next.len() > DP_STATE_CAP {
            return Err(Error::TooLarge(format!("pattern-count automaton exceeded {DP_STATE_CAP} states")));
        }
        layer = next;
    }
    Ok(layer.into_values().sum())
}

/// The window Λ_{nD_M}.
pub fn delta_window(sub: &BlockSubshift, n: u64) -> Result<LatticeBox> {
    LatticeBox::new(sub.dim(), sub.mode(), n * sub.period())
}

/// Number of distinct Λ_{nD_M}-patterns occurring in Δ.
pub fn delta_pattern_count(sub: &BlockSubshift, n: u64) -> Result<BigUint> {
    window_pattern_count(sub, n * sub.period())
}

/// Number of distinct Λ_radius-patterns occurring in Δ.
pub fn window_pattern_count(sub: &BlockSubshift, radius: u64) -> Result<BigUint> {
    let win = LatticeBox::new(sub.dim(), sub.mode(), radius)?;
    if sub.dim() == 1 {
        let blocks: Vec<Pattern1> = sub.blocks.iter().map(|p| p.symbols.clone()).collect();
        count_words_1d(&blocks, sub.alphabet.size(), win.width())
    } else {
        brute_count(sub, &win)
    }
}

/// Same count by listing every offset and every block assignment on the touched cells.
pub fn delta_pattern_count_brute(sub: &BlockSubshift, n: u64) -> Result<BigUint> {
    brute_count(sub, &delta_window(sub, n)?)
}

fn brute_count(sub: &BlockSubshift, win: &LatticeBox) -> Result<BigUint> {
    let dim = sub.dim();
    let bx = sub.bx;
    let g = sub.len() as u128;
    let win_cells: Vec<Vec<i64>> = win.cells().collect();
    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut budget = BRUTE_CAP;
    for k in bx.cells() {
        // Block cells touched by k + Λ_{nD_M}.
        let mut lo_cell = [0i64; MAX_DIM];
        let mut hi_cell = [0i64; MAX_DIM];
        let mut pos = [0i64; MAX_DIM];
        let lo: Vec<i64> = k.iter().map(|&c| c + win.lo()).collect();
        let hi: Vec<i64> = k.iter().map(|&c| c + win.hi()).collect();
        BlockTiling::locate(&bx, &lo, &mut lo_cell[..dim], &mut pos[..dim]);
        BlockTiling::locate(&bx, &hi, &mut hi_cell[..dim], &mut pos[..dim]);
        let spans: Vec<u64> = (0..dim).map(|j| (hi_cell[j] - lo_cell[j] + 1) as u64).collect();
        let cells: u32 = spans.iter().product::<u64>() as u32;
        let combos = g.checked_pow(cells).filter(|&c| c <= budget).ok_or_else(|| {
            Error::TooLarge(format!("{} blocks on {cells} cells is beyond brute-force counting", sub.len()))
        })?;
        budget -= combos;
        // Each window cell as (slot among the touched cells, index inside the block).
        let w = bx.width();
        let plan: Vec<(usize, usize)> = win_cells
            .iter()
            .map(|c| {
                let p: Vec<i64> = c.iter().zip(&k).map(|(a, b)| a + b).collect();
                let mut cell = [0i64; MAX_DIM];
                let mut pos = [0i64; MAX_DIM];
                BlockTiling::locate(&bx, &p, &mut cell[..dim], &mut pos[..dim]);
                let slot = (0..dim).fold(0usize, |acc, j| acc * spans[j] as usize + (cell[j] - lo_cell[j]) as usize);
                let idx = (0..dim).fold(0usize, |acc, j| acc * w as usize + (pos[j] - bx.lo()) as usize);
                (slot, idx)
            })
            .collect();
        let mut assign = vec![0usize; cells as usize];
        loop {
            let word: Vec<u8> = plan.iter().map(|&(slot, idx)| sub.blocks[assign[slot]].symbols[idx]).collect();
            seen.insert(word);
            let mut t = 0;
            while t < assign.len() {
                assign[t] += 1;
                if assign[t] < sub.len() {
                    break;
                }
                assign[t] = 0;
                t += 1;
            }
            if t == assign.len() {
                break;
            }
        }
    }
    Ok(BigUint::from(seen.len()))
}

/// Distinct grid-aligned patterns of Y on Λ_{compose(n, M)}, by enumeration.
pub fn grid_pattern_count_enumerated(sub: &BlockSubshift, n: u64) -> Result<BigUint> {
    let grid = LatticeBox::new(sub.dim(), sub.mode(), n)?;
    let cells: Vec<Vec<i64>> = grid.cells().collect();
    let g = sub.len();
    if (g as u128).checked_pow(cells.len() as u32).map_or(true, |c| c > BRUTE_CAP) {
        return Err(Error::TooLarge("grid enumeration".into()));
    }
    let win = LatticeBox::new(sub.dim(), sub.mode(), compose(n, sub.m(), sub.mode()))?;
    let origin = vec![0i64; sub.dim()];
    let mut assign = vec![0usize; cells.len()];
    let mut seen = HashSet::new();
    loop {
        let table: HashMap<Vec<i64>, usize> = cells.iter().cloned().zip(assign.iter().copied()).collect();
        let rule = AssignRule::Patched { base: Arc::new(AssignRule::Constant(0)), cells: table };
        let y = sub.tiling(&BlockAssignment::new(rule, sub.dim()))?;
        seen.insert(y.window(&win, &origin)?);
        let mut t = 0;
        while t < assign.len() {
            assign[t] += 1;
            if assign[t] < g {
                break;
            }
            assign[t] = 0;
            t += 1;
        }
        if t == assign.len() {
            break;
        }
    }
    Ok(BigUint::from(seen.len()))
}

fn volume(sub: &BlockSubshift, r: u64) -> Result<u64> {
    LatticeBox::new(sub.dim(), sub.mode(), r)?
        .volume_u64()
        .ok_or_else(|| Error::TooLarge(format!("volume of Λ_{r}")))
}

/// ln of the per-grid-cell factor in the upper bound: V_M(h1+β) + ln V_M + ln Q(M,δ) + δV_M ln r(ε).
///
/// Without construction metadata δ = 0 and the actual |Γ_M| replaces e^{V_M(h1+β)}.
pub fn upper_factor_log(sub: &BlockSubshift) -> Result<f64> {
    let v = sub.v_m() as f64;
    match &sub.meta {
        Some(m) if m.delta > 0.0 => {
            let q = q_count_volume(sub.v_m(), m.delta)?;
            Ok(v * (m.h1 + m.beta) + v.ln() + q.log_value + m.delta * v * m.ln_r_epsilon)
        }
        _ => Ok((sub.len() as f64).ln() + v.ln()),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PatternCountRow {
    pub n: u64,
    pub window_volume: u64,
    #[serde(serialize_with = "crate::report::ser_opt_big")]
    pub count: Option<BigUint>,
    /// ln count / V_{nD_M}.
    pub estimate: Option<f64>,
    /// ln(V_M |Γ|^{V_{n+1}}).
    pub bound_log: f64,
    pub holds: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    pub h_exact: f64,
    pub h0: f64,
    pub beta0: f64,
    pub n_max: u64,
    pub blocks: usize,
    pub v_m: u64,
    /// (n, ln s / V_{nD_M + M}) for grid-aligned separated sets.
    pub lower_estimates: Vec<(u64, f64)>,
    pub lower_target: f64,
    /// (n, normalized upper bound on the pattern count).
    pub upper_bound_chain: Vec<(u64, f64)>,
    pub pattern_counts: Vec<PatternCountRow>,
    pub notes: Vec<String>,
    pub pass: bool,
}

pub fn verify_sandwich(sub: &BlockSubshift, h0: f64, beta0: f64, n_max: u64) -> Result<SandwichReport> {
    if n_max < 2 {
        return invalid("n_max must be at least 2 to resolve the sandwich");
    }
    let h_exact = sub.exact_entropy();
    let v_m = sub.v_m();
    let ln_v = (v_m as f64).ln();
    let ln_g = (sub.len() as f64).ln();
    let lower_target = h_exact - ln_v / v_m as f64;
    let factor = upper_factor_log(sub)?;
    let mut notes = Vec::new();
    let mut lower_estimates = Vec::new();
    let mut upper_bound_chain = Vec::new();
    let mut pattern_counts = Vec::new();
    let mut ok = true;

    for n in 1..=n_max {
        let v_n = volume(sub, n)?;
        let v_n1 = volume(sub, n + 1)?;
        let v_sep = volume(sub, compose(n, sub.m(), sub.mode()))?;
        // Distinct blocks make every grid assignment its own pattern: s = |Γ|^{V_n}.
        let ln_s = v_n as f64 * ln_g;
        let lower = ln_s / v_sep as f64;
        ok &= lower >= lower_target - 1e-12;
        lower_estimates.push((n, lower));

        let v_win = volume(sub, n * sub.period())?;
        upper_bound_chain.push((n, (ln_v + v_n1 as f64 * factor) / v_win as f64));

        let bound_log = ln_v + v_n1 as f64 * ln_g;
        let row = match delta_pattern_count(sub, n) {
            Ok(c) => {
                let lc = ln_big(&c);
                let bound = BigUint::from(v_m) * BigUint::from(sub.len()).pow(v_n1 as u32);
                let holds = c <= bound;
                ok &= holds;
                PatternCountRow { n, window_volume: v_win, estimate: Some(lc / v_win as f64), count: Some(c), bound_log, holds: Some(holds) }
            }
            Err(Error::TooLarge(msg)) => {
                notes.push(format!("n = {n}: exact count skipped ({msg})"));
                PatternCountRow { n, window_volume: v_win, count: None, estimate: None, bound_log, holds: None }
            }
            Err(e) => return Err(e),
        };
        pattern_counts.push(row);
    }
    let in_band = h0 < h_exact && h_exact < h0 + beta0;
    if !in_band {
        notes.push(format!("h_exact = {h_exact} is outside ({h0}, {})", h0 + beta0));
    }
    Ok(SandwichReport {
        h_exact,
        h0,
        beta0,
        n_max,
        blocks: sub.len(),
        v_m,
        lower_estimates,
        lower_target,
        upper_bound_chain,
        pattern_counts,
        notes,
        pass: ok && in_band,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparatedPairsReport {
    pub n: u64,
    pub epsilon: f64,
    pub pairs: usize,
    pub failures: usize,
}

/// Pairs of Y-points whose block assignments differ in one grid cell of Λ_n.
pub fn separated_pair_check(sub: &BlockSubshift, n: u64, pairs: usize, seed: u64) -> Result<SeparatedPairsReport> {
    if sub.len() < 2 {
        return invalid("need at least two blocks for distinct cylinders");
    }
    let eps = 0.5;
    let grid = LatticeBox::new(sub.dim(), sub.mode(), n)?;
    let win = LatticeBox::new(sub.dim(), sub.mode(), compose(n, sub.m(), sub.mode()))?;
    let window: Vec<Vec<i64>> = win.cells().collect();
    let origin = vec![0i64; sub.dim()];
    let g = sub.len();
    let mut failures = 0;
    for i in 0..pairs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let a = BlockAssignment::seeded(rng.next_u64(), g, sub.dim());
        let c = grid.cell(rng.random_range(0..grid.cell_count()?));
        let other = (a.index(&c) + 1 + rng.random_range(0..g - 1)) % g;
        let rule = AssignRule::Patched { base: a.rule.clone(), cells: HashMap::from([(c, other)]) };
        let x = sub.delta_point(&a, &origin)?;
        let y = sub.delta_point(&BlockAssignment::new(rule, sub.dim()), &origin)?;
        if !separated(&x, &y, &window, eps)? {
            failures += 1;
        }
    }
    Ok(SeparatedPairsReport { n, epsilon: eps, pairs, failures })
}
