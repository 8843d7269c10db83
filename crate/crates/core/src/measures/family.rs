//! The metric D built from cylinder indicators.
//!
//! f_1, f_2, ... run over Λ_0-cylinders, then Λ_1-cylinders, and so on, each
//! depth in lexicographic (base-b) order; f_i carries weight 2^-i.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::lattice::{LatticeBox, LatticeMode};
use crate::symbolic::{band_depth, pow2_neg, Alphabet};

use super::{CylinderMeasure, Masses};

/// Indices beyond this have weight 0 in doubles anyway.
const INDEX_CAP: u128 = 1 << 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SeparatingFamily {
    pub alphabet: Alphabet,
    pub dim: usize,
    pub mode: LatticeMode,
}

impl SeparatingFamily {
    pub fn new(alphabet: Alphabet, dim: usize, mode: LatticeMode) -> Self {
        SeparatingFamily { alphabet, dim, mode }
    }

    /// b^{V_t}, saturating at the cap.
    fn cylinders_at(&self, t: u64) -> u128 {
        let v = LatticeBox { dim: self.dim, mode: self.mode, radius: t }.volume_u64().unwrap_or(u64::MAX);
        let b = self.alphabet.size() as u128;
        let mut acc: u128 = 1;
        for _ in 0..v {
            acc = acc.saturating_mul(b);
            if acc >= INDEX_CAP {
                return INDEX_CAP;
            }
        }
        acc
    }

    /// N(s) = Σ_{t ≤ s} b^{V_t}, saturating.
    pub fn count_upto(&self, s: u64) -> u128 {
        let mut acc: u128 = 0;
        for t in 0..=s {
            acc = acc.saturating_add(self.cylinders_at(t));
            if acc >= INDEX_CAP {
                return INDEX_CAP;
            }
        }
        acc
    }

    fn count_below(&self, r: u64) -> u128 {
        if r == 0 {
            0
        } else {
            self.count_upto(r - 1)
        }
    }

    /// 1-based position of the indicator of `word` among depth-r cylinders.
    pub fn index(&self, r: u64, word: &[u8]) -> u128 {
        let b = self.alphabet.size() as u128;
        let mut rank: u128 = 0;
        for &s in word {
            rank = rank.saturating_mul(b).saturating_add(s as u128);
            if rank >= INDEX_CAP {
                rank = INDEX_CAP;
                break;
            }
        }
        self.count_below(r).saturating_add(rank).saturating_add(1)
    }

    pub fn weight(&self, r: u64, word: &[u8]) -> f64 {
        pow2_neg(self.index(r, word).min(u64::MAX as u128) as u64)
    }

    /// Mass of all indicators past depth `depth`.
    pub fn tail(&self, depth: u64) -> f64 {
        pow2_neg(self.count_upto(depth).min(1074) as u64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MeasureDistance {
    /// Truncated sum through the requested depth.
    pub value: f64,
    /// The true D lies in [value, value + tail_bound].
    pub tail_bound: f64,
}

impl MeasureDistance {
    pub fn upper(&self) -> f64 {
        self.value + self.tail_bound
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Membership {
    Inside,
    Outside,
    Undecided,
}

fn same_shift(mu: &CylinderMeasure, nu: &CylinderMeasure) -> Result<()> {
    if mu.dim != nu.dim || mu.mode != nu.mode || mu.alphabet != nu.alphabet {
        return invalid("measures live on different shifts");
    }
    Ok(())
}

/// |μ(C) - ν(C)| for every cylinder charged by either measure, in canonical order.
fn differences(mu: &CylinderMeasure, nu: &CylinderMeasure) -> Vec<(Vec<u8>, f64)> {
    use std::collections::BTreeSet;
    if let (Masses::Counts { total: a, counts: x }, Masses::Counts { total: c, counts: y }) = (&mu.masses, &nu.masses) {
        // One rounding: |x/a - y/c| = |x c - y a| / (a c).
        let keys: BTreeSet<&Vec<u8>> = x.keys().chain(y.keys()).collect();
        let den = (*a as u128 * *c as u128) as f64;
        return keys
            .into_iter()
            .map(|w| {
                let p = x.get(w).copied().unwrap_or(0) as u128 * *c as u128;
                let q = y.get(w).copied().unwrap_or(0) as u128 * *a as u128;
                (w.clone(), p.abs_diff(q) as f64 / den)
            })
            .collect();
    }
    let keys: BTreeSet<&[u8]> = mu.support().into_iter().chain(nu.support()).map(|(w, _)| w).collect();
    keys.into_iter().map(|w| (w.to_vec(), (mu.mass(w) - nu.mass(w)).abs())).collect()
}

/// D(μ,ν) through Λ_depth-cylinders, with a rigorous tail.
pub fn metric_d(mu: &CylinderMeasure, nu: &CylinderMeasure, depth: u64) -> Result<MeasureDistance> {
    same_shift(mu, nu)?;
    let fam = SeparatingFamily::new(mu.alphabet, mu.dim, mu.mode);
    let mut value = 0.0;
    for r in 0..=depth {
        let (a, b) = (mu.at_depth(r)?, nu.at_depth(r)?);
        for (w, diff) in differences(&a, &b) {
            if diff > 0.0 {
                value += fam.weight(r, &w) * diff;
            }
        }
    }
    Ok(MeasureDistance { value, tail_bound: fam.tail(depth) })
}

/// Upper bound for max D(δ_x, δ_y) over d(x,y) ≤ ε; 1 (= D*) when ε ≥ 1.
pub fn var_bound(eps: f64, fam: &SeparatingFamily) -> Result<f64> {
    match band_depth(eps)? {
        None => Ok(1.0),
        // d ≤ ε forces agreement on Λ_r, killing every indicator through depth r.
        Some(r) => Ok(fam.tail(r)),
    }
}

/// Closed ball B(center, η) = {ν : D(center, ν) ≤ η}, decided on the interval.
pub fn measure_in_ball(mu: &CylinderMeasure, center: &CylinderMeasure, eta: f64, depth: u64) -> Result<Membership> {
    let d = metric_d(mu, center, depth)?;
    Ok(if d.upper() <= eta {
        Membership::Inside
    } else if d.value > eta {
        Membership::Outside
    } else {
        Membership::Undecided
    })
}
