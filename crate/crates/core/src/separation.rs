//! Separated and spanning sets, entropy from counts, and Katok's estimator.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::counting::ln_big;
use crate::error::{invalid, Error, Result};
use crate::lattice::{LatticeBox, LatticeMode};
use crate::measures::{CylinderMeasure, Masses};
use crate::symbolic::{band_depth, orbit_distance, Alphabet, Configuration};

/// EXACT search refuses more points than this.
pub const EXACT_POINT_CAP: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Exact,
    Greedy,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Exact => "EXACT",
            Method::Greedy => "GREEDY",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub n: u64,
    pub epsilon: f64,
    #[serde(serialize_with = "crate::report::ser_big")]
    pub count: BigUint,
    pub method: Method,
}

type Bits = Vec<u64>;

fn bit_set(b: &mut Bits, i: usize) {
    b[i / 64] |= 1 << (i % 64);
}

fn bit_test(b: &Bits, i: usize) -> bool {
    b[i / 64] >> (i % 64) & 1 == 1
}

fn bits_iter(b: &Bits) -> impl Iterator<Item = usize> + '_ {
    b.iter().enumerate().flat_map(|(w, &word)| {
        let mut x = word;
        std::iter::from_fn(move || {
            if x == 0 {
                return None;
            }
            let t = x.trailing_zeros() as usize;
            x &= x - 1;
            Some(w * 64 + t)
        })
    })
}

fn common_shape(points: &[Configuration]) -> Result<(usize, LatticeMode)> {
    let first = &points[0];
    if points.iter().any(|p| p.dim() != first.dim() || p.mode() != first.mode()) {
        return invalid("points live on different lattices");
    }
    Ok((first.dim(), first.mode()))
}

/// (n,ε)-separation of two points, decided exactly at the ε band depth.
pub fn separated(x: &Configuration, y: &Configuration, window: &[Vec<i64>], eps: f64) -> Result<bool> {
    match band_depth(eps)? {
        None => Ok(false),
        Some(r) => Ok(orbit_distance(x, y, window, r).exceeds(eps) == Some(true)),
    }
}

/// Adjacency bitsets of the "separated" graph.
fn separation_graph(points: &[Configuration], window: &[Vec<i64>], eps: f64) -> Result<Vec<Bits>> {
    let n = points.len();
    let words = n.div_ceil(64);
    let r = band_depth(eps)?.expect("caller handles ε ≥ 1");
    let rows: Vec<Bits> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0u64; words];
            for j in 0..n {
                if j != i && orbit_distance(&points[i], &points[j], window, r).exceeds(eps) == Some(true) {
                    bit_set(&mut row, j);
                }
            }
            row
        })
        .collect();
    Ok(rows)
}

fn greedy_clique(adj: &[Bits]) -> usize {
    let mut chosen: Vec<usize> = Vec::new();
    for v in 0..adj.len() {
        if chosen.iter().all(|&u| bit_test(&adj[v], u)) {
            chosen.push(v);
        }
    }
    chosen.len()
}

/// Greedy colouring of P; colours are nondecreasing along the returned order.
fn colour_sort(adj: &[Bits], p: &Bits) -> (Vec<usize>, Vec<usize>) {
    let mut uncoloured = p.clone();
    let mut order = Vec::new();
    let mut colours = Vec::new();
    let mut colour = 0;
    while uncoloured.iter().any(|&w| w != 0) {
        colour += 1;
        let mut q = uncoloured.clone();
        loop {
            let Some(v) = bits_iter(&q).next() else { break };
            uncoloured[v / 64] &= !(1 << (v % 64));
            q[v / 64] &= !(1 << (v % 64));
            for (qw, aw) in q.iter_mut().zip(&adj[v]) {
                *qw &= !aw;
            }
            order.push(v);
            colours.push(colour);
        }
    }
    (order, colours)
}

fn expand(adj: &[Bits], current: &mut Vec<usize>, mut p: Bits, best: &mut usize) {
    let (order, colours) = colour_sort(adj, &p);
    for idx in (0..order.len()).rev() {
        if current.len() + colours[idx] <= *best {
            return;
        }
        let v = order[idx];
        current.push(v);
        let next: Bits = p.iter().zip(&adj[v]).map(|(a, b)| a & b).collect();
        if next.iter().all(|&w| w == 0) {
            *best = (*best).max(current.len());
        } else {
            expand(adj, current, next, best);
        }
        current.pop();
        p[v / 64] &= !(1 << (v % 64));
    }
}

fn max_clique(adj: &[Bits]) -> usize {
    let n = adj.len();
    let mut p = vec![0u64; n.div_ceil(64)];
    for i in 0..n {
        bit_set(&mut p, i);
    }
    let mut best = greedy_clique(adj);
    expand(adj, &mut Vec::new(), p, &mut best);
    best
}

/// Largest (n,ε)-separated subset of the given points.
pub fn max_separated(points: &[Configuration], n: u64, eps: f64, method: Method) -> Result<SeparationReport> {
    let report = |count: usize| SeparationReport { n, epsilon: eps, count: BigUint::from(count), method };
    if points.is_empty() {
        return Ok(report(0));
    }
    let (dim, mode) = common_shape(points)?;
    if band_depth(eps)?.is_none() {
        return Ok(report(1));
    }
    if method == Method::Exact && points.len() > EXACT_POINT_CAP {
        return Err(Error::TooLarge(format!("{} points exceed the exact cap {EXACT_POINT_CAP}", points.len())));
    }
    let window: Vec<Vec<i64>> = LatticeBox::new(dim, mode, n)?.cells().collect();
    let adj = separation_graph(points, &window, eps)?;
    Ok(report(match method {
        Method::Exact => max_clique(&adj),
        Method::Greedy => greedy_clique(&adj),
    }))
}

/// More than δ V_n translates j ∈ Λ_n with d(T^j x, T^j y) > ε.
pub fn delta_separated(x: &Configuration, y: &Configuration, n: u64, delta: f64, eps: f64) -> Result<bool> {
    let bx = LatticeBox::new(x.dim(), x.mode(), n)?;
    let v = bx.cell_count()? as f64;
    let mut hits = 0u64;
    for j in bx.cells() {
        if separated(x, y, std::slice::from_ref(&j), eps)? {
            hits += 1;
        }
    }
    Ok(hits as f64 > delta * v)
}

pub enum SpanTarget<'a> {
    FullShift { alphabet: Alphabet, dim: usize, mode: LatticeMode },
    Points(&'a [Configuration]),
}

#[derive(Clone, Debug, Serialize)]
pub struct SpanningReport {
    pub n: u64,
    pub epsilon: f64,
    #[serde(serialize_with = "crate::report::ser_big")]
    pub count: BigUint,
    /// False when only the greedy cover was available.
    pub exact: bool,
    pub method: Method,
}

/// Points beyond this are covered greedily only.
pub const EXACT_COVER_CAP: usize = 20;

/// Minimal cardinality of an (n,ε)-spanning set, with closed balls.
pub fn min_spanning(target: SpanTarget<'_>, n: u64, eps: f64) -> Result<SpanningReport> {
    let depth = band_depth(eps)?;
    let done = |count: BigUint, exact: bool, method| SpanningReport { n, epsilon: eps, count, exact, method };
    match target {
        SpanTarget::FullShift { alphabet, dim, mode } => {
            let r = match depth {
                None => return Ok(done(BigUint::one(), true, Method::Exact)),
                Some(r) => r,
            };
            // Balls are cylinders of the inflated window Λ_{n+r}.
            let v = LatticeBox::new(dim, mode, n + r)?
                .volume_u64()
                .and_then(|v| u32::try_from(v).ok())
                .ok_or_else(|| Error::TooLarge("inflated window volume".into()))?;
            Ok(done(BigUint::from(alphabet.size()).pow(v), true, Method::Exact))
        }
        SpanTarget::Points(points) => {
            if points.is_empty() {
                return Ok(done(BigUint::zero(), true, Method::Exact));
            }
            if depth.is_none() {
                return Ok(done(BigUint::one(), true, Method::Exact));
            }
            let (dim, mode) = common_shape(points)?;
            let window: Vec<Vec<i64>> = LatticeBox::new(dim, mode, n)?.cells().collect();
            let sep = separation_graph(points, &window, eps)?;
            let k = points.len();
            // covers[i] = points in the closed ball around i.
            let covers: Vec<Bits> = sep
                .iter()
                .map(|row| {
                    let mut c = vec![0u64; k.div_ceil(64)];
                    for j in 0..k {
                        if !bit_test(row, j) {
                            bit_set(&mut c, j);
                        }
                    }
                    c
                })
                .collect();
            if k <= EXACT_COVER_CAP {
                let masks: Vec<u32> = covers.iter().map(|c| c[0] as u32).collect();
                let full: u32 = if k == 32 { u32::MAX } else { (1u32 << k) - 1 };
                let best = (1u32..=full)
                    .filter(|s| {
                        let mut acc = 0u32;
                        for (i, m) in masks.iter().enumerate() {
                            if s >> i & 1 == 1 {
                                acc |= m;
                            }
                        }
                        acc == full
                    })
                    .map(|s| s.count_ones())
                    .min()
                    .unwrap_or(k as u32);
                return Ok(done(BigUint::from(best), true, Method::Exact));
            }
            let mut uncovered: Bits = vec![0u64; k.div_ceil(64)];
            for i in 0..k {
                bit_set(&mut uncovered, i);
            }
            let mut used = 0u64;
            while uncovered.iter().any(|&w| w != 0) {
                let gain = |c: &Bits| c.iter().zip(&uncovered).map(|(a, b)| (a & b).count_ones()).sum::<u32>();
                let (best, _) = covers
                    .iter()
                    .enumerate()
                    .max_by(|(i, a), (j, b)| gain(a).cmp(&gain(b)).then(j.cmp(i)))
                    .unwrap();
                for (u, c) in uncovered.iter_mut().zip(&covers[best]) {
                    *u &= !c;
                }
                used += 1;
            }
            Ok(done(BigUint::from(used), false, Method::Greedy))
        }
    }
}

/// r(ε) = r(1, ε) for the full shift.
pub fn r_epsilon(alphabet: Alphabet, dim: usize, mode: LatticeMode, eps: f64) -> Result<BigUint> {
    Ok(min_spanning(SpanTarget::FullShift { alphabet, dim, mode }, 1, eps)?.count)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Trend {
    Increasing,
    Decreasing,
    Constant,
    Mixed,
}

#[derive(Clone, Debug, Serialize)]
pub struct EntropyEstimate {
    /// ln s / V_n at the largest window; a finite-scale value, not a limit.
    pub estimate: f64,
    pub per_window: Vec<(u64, f64)>,
    pub trend: Trend,
}

fn trend_of(values: &[f64]) -> Trend {
    let tol = 1e-12;
    let steps: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    if steps.iter().all(|d| d.abs() <= tol) {
        Trend::Constant
    } else if steps.iter().all(|&d| d >= -tol) {
        Trend::Increasing
    } else if steps.iter().all(|&d| d <= tol) {
        Trend::Decreasing
    } else {
        Trend::Mixed
    }
}

/// Samples are (n, V_n, count).
pub fn entropy_from_counts(samples: &[(u64, BigUint, BigUint)]) -> Result<EntropyEstimate> {
    if samples.len() < 2 {
        return invalid("need counts at two or more window sizes");
    }
    let mut s: Vec<&(u64, BigUint, BigUint)> = samples.iter().collect();
    s.sort_by_key(|t| t.0);
    let mut per_window = Vec::with_capacity(s.len());
    for (n, v, c) in s {
        if c.is_zero() || v.is_zero() {
            return invalid("counts and volumes must be positive");
        }
        per_window.push((*n, ln_big(c) / v.to_f64().unwrap_or(f64::INFINITY)));
    }
    let values: Vec<f64> = per_window.iter().map(|p| p.1).collect();
    Ok(EntropyEstimate { estimate: *values.last().unwrap(), trend: trend_of(&values), per_window })
}

#[derive(Clone, Debug, Serialize)]
pub struct KatokReport {
    pub n: u64,
    pub epsilon: f64,
    pub delta: f64,
    /// Cylinder depth n + r matching the (n,ε)-balls.
    pub depth: u64,
    #[serde(serialize_with = "crate::report::ser_big")]
    pub r: BigUint,
    pub estimate: f64,
}

/// Fewest (n,ε)-balls of total mass > 1-δ, and ln of that count over V_n.
pub fn katok_entropy(mu: &CylinderMeasure, n: u64, eps: f64, delta: f64) -> Result<KatokReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("δ must lie in (0,1), got {delta}"));
    }
    let vn = LatticeBox::new(mu.dim, mu.mode, n)?.volume_u64().ok_or_else(|| Error::TooLarge("V_n".into()))? as f64;
    let r = match band_depth(eps)? {
        None => {
            return Ok(KatokReport { n, epsilon: eps, delta, depth: 0, r: BigUint::one(), estimate: 0.0 });
        }
        Some(r) => r,
    };
    let depth = n + r;
    let m = mu.at_depth(depth)?;
    let needed = match &m.masses {
        Masses::Counts { total, counts } => {
            // Integer running sum against (1-δ)·total.
            let target = (1.0 - delta) * *total as f64;
            let mut c: Vec<(&Vec<u8>, u64)> = counts.iter().filter(|(_, &x)| x > 0).map(|(w, &x)| (w, x)).collect();
            c.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
            let mut acc = 0u64;
            let mut k = c.len();
            for (i, (_, x)) in c.iter().enumerate() {
                acc += x;
                if acc as f64 > target {
                    k = i + 1;
                    break;
                }
            }
            k
        }
        Masses::Float(_) => {
            let mut c = m.support();
            c.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
            let mut acc = 0.0;
            let mut k = c.len();
            for (i, (_, x)) in c.iter().enumerate() {
                acc += x;
                if acc > 1.0 - delta {
                    k = i + 1;
                    break;
                }
            }
            k
        }
    };
    Ok(KatokReport {
        n,
        epsilon: eps,
        delta,
        depth,
        r: BigUint::from(needed),
        estimate: (needed as f64).ln() / vn,
    })
}

/// One line of an entropy table.
#[derive(Clone, Debug, Serialize)]
pub struct ReportRow {
    pub n: u64,
    #[serde(rename = "V_n")]
    pub v_n: String,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub count: String,
    pub estimate: f64,
    pub method: String,
}

pub fn rows_to_csv(rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
