//! Shift-invariant measures stored as cylinder frequencies on Λ_r.

mod family;
pub mod io;

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::lattice::{LatticeBox, LatticeMode};
use crate::symbolic::{Alphabet, Configuration, MAX_DIM};

pub use family::{measure_in_ball, metric_d, var_bound, Membership, MeasureDistance, SeparatingFamily};
pub use io::{read_measure, write_measure};

/// Counts are kept exact while the denominator stays below this.
pub const EXACT_DENOMINATOR_CAP: u64 = 1 << 31;

/// Refuse to enumerate more cylinders than this.
pub const MAX_CYLINDERS: u64 = 1 << 22;

#[derive(Clone, Debug, PartialEq)]
pub enum Masses {
    Counts { total: u64, counts: BTreeMap<Vec<u8>, u64> },
    Float(BTreeMap<Vec<u8>, f64>),
}

#[derive(Clone, Debug, PartialEq)]
struct BernoulliSpec {
    p: Vec<f64>,
    exact: Option<(Vec<u64>, u64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CylinderMeasure {
    pub depth: u64,
    pub dim: usize,
    pub mode: LatticeMode,
    pub alphabet: Alphabet,
    pub masses: Masses,
    bernoulli: Option<Arc<BernoulliSpec>>,
}

fn pow_checked(b: u64, e: u64) -> Option<u64> {
    let mut acc = 1u64;
    for _ in 0..e {
        acc = acc.checked_mul(b)?;
    }
    Some(acc)
}

/// For each cell of Λ_k placed at `anchor`, its row-major index inside Λ_r.
fn projection(outer: &LatticeBox, inner: &LatticeBox, anchor: &[i64]) -> Vec<usize> {
    inner
        .cells()
        .map(|c| {
            let shifted: Vec<i64> = c.iter().zip(anchor).map(|(a, b)| a + b).collect();
            outer.index_of(&shifted).expect("anchor keeps the sub-box inside")
        })
        .collect()
}

impl CylinderMeasure {
    pub fn cylinder_box(&self) -> LatticeBox {
        LatticeBox { dim: self.dim, mode: self.mode, radius: self.depth }
    }

    pub fn from_counts(
        alphabet: Alphabet,
        dim: usize,
        mode: LatticeMode,
        depth: u64,
        total: u64,
        counts: BTreeMap<Vec<u8>, u64>,
    ) -> Result<Self> {
        let mu = CylinderMeasure { depth, dim, mode, alphabet, masses: Masses::Counts { total, counts }, bernoulli: None };
        mu.validate()?;
        Ok(mu)
    }

    pub fn from_masses(
        alphabet: Alphabet,
        dim: usize,
        mode: LatticeMode,
        depth: u64,
        masses: BTreeMap<Vec<u8>, f64>,
    ) -> Result<Self> {
        let mu = CylinderMeasure { depth, dim, mode, alphabet, masses: Masses::Float(masses), bernoulli: None };
        mu.validate()?;
        Ok(mu)
    }

    fn validate(&self) -> Result<()> {
        let v = self.cylinder_box().cell_count()?;
        let bad_word = |w: &Vec<u8>| w.len() != v || w.iter().any(|&s| !self.alphabet.contains(s));
        match &self.masses {
            Masses::Counts { total, counts } => {
                if counts.keys().any(bad_word) {
                    return invalid("cylinder word has wrong length or symbol");
                }
                if *total == 0 || counts.values().sum::<u64>() != *total {
                    return invalid("counts do not sum to the total");
                }
            }
            Masses::Float(m) => {
                if m.keys().any(bad_word) {
                    return invalid("cylinder word has wrong length or symbol");
                }
                if m.values().any(|&x| !(x >= 0.0) || !x.is_finite()) {
                    return invalid("negative or non-finite cylinder mass");
                }
                let s: f64 = m.values().sum();
                if (s - 1.0).abs() > 1e-9 {
                    return invalid(format!("cylinder masses sum to {s}, not 1"));
                }
            }
        }
        Ok(())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.masses, Masses::Counts { .. })
    }

    pub fn mass(&self, word: &[u8]) -> f64 {
        match &self.masses {
            Masses::Counts { total, counts } => counts.get(word).map_or(0.0, |&c| c as f64 / *total as f64),
            Masses::Float(m) => m.get(word).copied().unwrap_or(0.0),
        }
    }

    /// Words of positive mass in canonical order.
    pub fn support(&self) -> Vec<(&[u8], f64)> {
        match &self.masses {
            Masses::Counts { total, counts } => counts
                .iter()
                .filter(|(_, &c)| c > 0)
                .map(|(w, &c)| (w.as_slice(), c as f64 / *total as f64))
                .collect(),
            Masses::Float(m) => m.iter().filter(|(_, &x)| x > 0.0).map(|(w, &x)| (w.as_slice(), x)).collect(),
        }
    }

    pub fn bernoulli_vector(&self) -> Option<&[f64]> {
        self.bernoulli.as_ref().map(|b| b.p.as_slice())
    }

    /// Marginal on the sub-box anchor + Λ_k.
    pub fn marginal(&self, k: u64, anchor: &[i64]) -> Result<CylinderMeasure> {
        if k > self.depth {
            return Err(Error::InsufficientDepth { needed: k, available: self.depth });
        }
        let outer = self.cylinder_box();
        let inner = outer.with_radius(k);
        let fits = inner.cells().all(|c| {
            let s: Vec<i64> = c.iter().zip(anchor).map(|(a, b)| a + b).collect();
            outer.contains(&s)
        });
        if anchor.len() != self.dim || !fits {
            return invalid("anchor does not keep the sub-box inside the cylinder box");
        }
        let map = projection(&outer, &inner, anchor);
        let masses = match &self.masses {
            Masses::Counts { total, counts } => {
                let mut out: BTreeMap<Vec<u8>, u64> = BTreeMap::new();
                for (w, &c) in counts {
                    *out.entry(map.iter().map(|&i| w[i]).collect()).or_default() += c;
                }
                Masses::Counts { total: *total, counts: out }
            }
            Masses::Float(m) => {
                let mut out: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
                for (w, &x) in m {
                    *out.entry(map.iter().map(|&i| w[i]).collect()).or_default() += x;
                }
                Masses::Float(out)
            }
        };
        Ok(CylinderMeasure {
            depth: k,
            dim: self.dim,
            mode: self.mode,
            alphabet: self.alphabet,
            masses,
            bernoulli: self.bernoulli.clone(),
        })
    }

    /// The same measure seen through Λ_k-cylinders.
    pub fn at_depth(&self, k: u64) -> Result<CylinderMeasure> {
        if k == self.depth {
            return Ok(self.clone());
        }
        if k < self.depth {
            return self.marginal(k, &vec![0; self.dim]);
        }
        match &self.bernoulli {
            Some(spec) => match &spec.exact {
                Some((nums, den)) => bernoulli_exact(nums, *den, k, self.dim, self.mode),
                None => bernoulli(&spec.p, k, self.dim, self.mode),
            },
            None => Err(Error::InsufficientDepth { needed: k, available: self.depth }),
        }
    }

    /// Anchors a with a + Λ_{r-1} ⊂ Λ_r.
    fn anchors(&self) -> Vec<Vec<i64>> {
        let vals: &[i64] = match self.mode {
            LatticeMode::Positive => &[0, 1],
            LatticeMode::Full => &[-1, 0, 1],
        };
        let mut out = vec![vec![]];
        for _ in 0..self.dim {
            out = out
                .into_iter()
                .flat_map(|a| {
                    vals.iter().map(move |&v| {
                        let mut b = a.clone();
                        b.push(v);
                        b
                    })
                })
                .collect();
        }
        out
    }

    /// Depth-(r-1) marginals agree at every anchor (exactly for counts, within tol otherwise).
    pub fn is_marginal_consistent(&self, tol: f64) -> bool {
        if self.depth == 0 {
            return true;
        }
        let k = self.depth - 1;
        let reference = match self.marginal(k, &vec![0; self.dim]) {
            Ok(m) => m,
            Err(_) => return false,
        };
        self.anchors().iter().all(|a| match self.marginal(k, a) {
            Ok(m) => match (&m.masses, &reference.masses) {
                (Masses::Counts { counts: x, .. }, Masses::Counts { counts: y, .. }) => {
                    let nz = |c: &BTreeMap<Vec<u8>, u64>| -> BTreeMap<Vec<u8>, u64> {
                        c.iter().filter(|(_, &v)| v > 0).map(|(w, &v)| (w.clone(), v)).collect()
                    };
                    nz(x) == nz(y)
                }
                _ => {
                    let keys: std::collections::BTreeSet<&[u8]> =
                        m.support().into_iter().chain(reference.support()).map(|(w, _)| w).collect();
                    keys.iter().all(|w| (m.mass(w) - reference.mass(w)).abs() <= tol)
                }
            },
            Err(_) => false,
        })
    }

    /// -Σ μ(C) ln μ(C) / V_r over Λ_r-cylinders; an upper estimate of the entropy rate.
    pub fn block_entropy(&self) -> f64 {
        let v = self.cylinder_box().volume_u64().unwrap_or(u64::MAX) as f64;
        -self.support().iter().map(|(_, m)| m * m.ln()).sum::<f64>() / v
    }

    /// Exact rate for Bernoulli measures, the block estimate otherwise.
    pub fn entropy_estimate(&self) -> f64 {
        match self.bernoulli_vector() {
            Some(p) => bernoulli_entropy(p),
            None => self.block_entropy(),
        }
    }
}

fn check_probabilities(p: &[f64]) -> Result<Alphabet> {
    if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return invalid("probabilities must be nonnegative");
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return invalid(format!("probabilities sum to {s}, not 1"));
    }
    Alphabet::new(p.len() as u32)
}

/// All words on the box with positive weight, with their product weights.
fn product_words<T: Copy>(v: u64, weights: &[T], one: T, mul: impl Fn(T, T) -> T, positive: impl Fn(T) -> bool) -> Result<Vec<(Vec<u8>, T)>> {
    let live = weights.iter().filter(|&&w| positive(w)).count() as u64;
    match pow_checked(live, v) {
        Some(n) if n <= MAX_CYLINDERS => {}
        _ => return Err(Error::TooLarge(format!("{live}^{v} cylinders"))),
    }
    let mut words: Vec<(Vec<u8>, T)> = vec![(Vec::with_capacity(v as usize), one)];
    for _ in 0..v {
        let mut next = Vec::with_capacity(words.len() * live as usize);
        for (w, m) in &words {
            for (s, &ps) in weights.iter().enumerate() {
                if positive(ps) {
                    let mut w2 = w.clone();
                    w2.push(s as u8);
                    next.push((w2, mul(*m, ps)));
                }
            }
        }
        words = next;
    }
    Ok(words)
}

/// Product measure with marginal p, as Λ_depth-cylinder masses.
pub fn bernoulli(p: &[f64], depth: u64, dim: usize, mode: LatticeMode) -> Result<CylinderMeasure> {
    let alphabet = check_probabilities(p)?;
    let bx = LatticeBox::new(dim, mode, depth)?;
    let v = bx.volume_u64().ok_or_else(|| Error::TooLarge("cylinder box".into()))?;
    let words = product_words(v, p, 1.0f64, |a, b| a * b, |x| x > 0.0)?;
    Ok(CylinderMeasure {
        depth,
        dim,
        mode,
        alphabet,
        masses: Masses::Float(words.into_iter().collect()),
        bernoulli: Some(Arc::new(BernoulliSpec { p: p.to_vec(), exact: None })),
    })
}

/// Product measure with rational marginal nums/den, kept exact when den^V fits.
pub fn bernoulli_exact(nums: &[u64], den: u64, depth: u64, dim: usize, mode: LatticeMode) -> Result<CylinderMeasure> {
    if den == 0 || nums.iter().sum::<u64>() != den {
        return invalid("numerators must sum to the denominator");
    }
    let p: Vec<f64> = nums.iter().map(|&n| n as f64 / den as f64).collect();
    let alphabet = Alphabet::new(nums.len() as u32)?;
    let bx = LatticeBox::new(dim, mode, depth)?;
    let v = bx.volume_u64().ok_or_else(|| Error::TooLarge("cylinder box".into()))?;
    let total = match pow_checked(den, v) {
        Some(t) if t <= EXACT_DENOMINATOR_CAP => t,
        _ => {
            let mut mu = bernoulli(&p, depth, dim, mode)?;
            mu.bernoulli = Some(Arc::new(BernoulliSpec { p, exact: Some((nums.to_vec(), den)) }));
            return Ok(mu);
        }
    };
    let words = product_words(v, nums, 1u64, |a, b| a * b, |x| x > 0)?;
    Ok(CylinderMeasure {
        depth,
        dim,
        mode,
        alphabet,
        masses: Masses::Counts { total, counts: words.into_iter().collect() },
        bernoulli: Some(Arc::new(BernoulliSpec { p, exact: Some((nums.to_vec(), den)) })),
    })
}

/// -Σ p ln p, per site.
pub fn bernoulli_entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// Σ a_k μ_k, at the smallest common depth.
pub fn mixture(weights: &[f64], measures: &[CylinderMeasure]) -> Result<CylinderMeasure> {
    if weights.len() != measures.len() || measures.is_empty() {
        return invalid("need one weight per measure");
    }
    check_probabilities_loose(weights)?;
    let first = &measures[0];
    if measures.iter().any(|m| m.dim != first.dim || m.mode != first.mode || m.alphabet != first.alphabet) {
        return invalid("mixture components live on different shifts");
    }
    let depth = measures.iter().map(|m| m.depth).min().unwrap();
    let mut out: BTreeMap<Vec<u8>, f64> = BTreeMap::new();
    for (a, m) in weights.iter().zip(measures) {
        let m = m.at_depth(depth)?;
        for (w, x) in m.support() {
            *out.entry(w.to_vec()).or_default() += a * x;
        }
    }
    CylinderMeasure::from_masses(first.alphabet, first.dim, first.mode, depth, out)
}

fn check_probabilities_loose(w: &[f64]) -> Result<()> {
    if w.iter().any(|&x| !(x >= 0.0)) || (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return invalid("weights must be nonnegative and sum to 1");
    }
    Ok(())
}

/// E_Λ(x): frequencies of Λ_depth-patterns of T^i x over i ∈ origin + Λ.
pub fn empirical_measure_at(x: &Configuration, bx: &LatticeBox, origin: &[i64], depth: u64) -> Result<CylinderMeasure> {
    if bx.dim != x.dim() || origin.len() != x.dim() {
        return invalid("dimension mismatch");
    }
    let probe = LatticeBox::new(bx.dim, bx.mode, depth)?;
    let probe_cells: Vec<Vec<i64>> = probe.cells().collect();
    let n = bx.cell_count()?;
    let dim = bx.dim;
    let word_at = |c: &[i64]| -> Vec<u8> {
        let mut buf = [0i64; MAX_DIM];
        probe_cells
            .iter()
            .map(|pc| {
                for k in 0..dim {
                    buf[k] = origin[k] + c[k] + pc[k];
                }
                x.eval(&buf[..dim])
            })
            .collect()
    };
    let mut counts: HashMap<Vec<u8>, u64> = HashMap::new();
    if n < 1 << 14 {
        for c in bx.cells() {
            *counts.entry(word_at(&c)).or_default() += 1;
        }
    } else {
        counts = (0..n)
            .into_par_iter()
            .fold(HashMap::new, |mut acc: HashMap<Vec<u8>, u64>, i| {
                *acc.entry(word_at(&bx.cell(i))).or_default() += 1;
                acc
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, v) in b {
                    *a.entry(k).or_default() += v;
                }
                a
            });
    }
    let counts: BTreeMap<Vec<u8>, u64> = counts.into_iter().collect();
    let masses = if (n as u64) <= EXACT_DENOMINATOR_CAP {
        Masses::Counts { total: n as u64, counts }
    } else {
        Masses::Float(counts.into_iter().map(|(w, c)| (w, c as f64 / n as f64)).collect())
    };
    Ok(CylinderMeasure { depth, dim, mode: bx.mode, alphabet: x.alphabet(), masses, bernoulli: None })
}

pub fn empirical_measure(x: &Configuration, bx: &LatticeBox, depth: u64) -> Result<CylinderMeasure> {
    empirical_measure_at(x, bx, &vec![0; bx.dim], depth)
}
