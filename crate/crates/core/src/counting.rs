//! Q(n,δ): subsets of Λ_n covering at least a (1-δ) fraction, and the
//! binary-entropy bound on its growth.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};
use crate::lattice::{LatticeBox, LatticeMode};

/// Exact sums are formed up to this volume; beyond it only the log route runs.
pub const EXACT_VOLUME_CAP: u64 = 4096;

#[derive(Clone, Debug, Serialize)]
pub struct CountBound {
    pub volume: u64,
    /// Smallest admissible subset size.
    pub threshold: u64,
    #[serde(serialize_with = "crate::report::ser_opt_big")]
    pub exact: Option<BigUint>,
    /// ln Q, from the exact value when present.
    pub log_value: f64,
    /// ln Q via log-gamma and log-sum-exp, always computed.
    pub log_domain: f64,
    /// -δ ln δ - (1-δ) ln(1-δ).
    pub bound: f64,
}

impl CountBound {
    pub fn holds(&self) -> bool {
        self.log_value / self.volume as f64 <= self.bound + 1e-12
    }
}

pub fn binary_entropy(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid(format!("binary entropy needs 0 < δ < 1, got {delta}"));
    }
    Ok(-delta * delta.ln() - (1.0 - delta) * (-delta).ln_1p())
}

/// ⌈(1-δ)V⌉, snapping products that sit within 1e-9 (relative) of an integer.
pub fn threshold(volume: u64, delta: f64) -> u64 {
    let x = (1.0 - delta) * volume as f64;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r as u64
    } else {
        x.ceil() as u64
    }
}

/// Natural log of a big integer, via its leading bits.
pub fn ln_big(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let (n, k) = (n as f64, k as f64);
    ln_gamma(n + 1.0) - ln_gamma(k + 1.0) - ln_gamma(n - k + 1.0)
}

/// ln Σ_{k=lo}^{n} C(n,k) by log-sum-exp.
pub fn ln_binomial_tail(n: u64, lo: u64) -> f64 {
    if lo > n {
        return f64::NEG_INFINITY;
    }
    let terms: Vec<f64> = (lo..=n).map(|k| ln_binomial(n, k)).collect();
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// Σ_{k=lo}^{n} C(n,k) exactly.
pub fn binomial_tail(n: u64, lo: u64) -> BigUint {
    let mut total = BigUint::zero();
    if lo > n {
        return total;
    }
    // Walk down from C(n,n) = 1 with C(n,k-1) = C(n,k)·k/(n-k+1).
    let mut c = BigUint::one();
    let mut k = n;
    loop {
        total += &c;
        if k == lo {
            break;
        }
        c = c * BigUint::from(k) / BigUint::from(n - k + 1);
        k -= 1;
    }
    total
}

pub fn q_count_volume(volume: u64, delta: f64) -> Result<CountBound> {
    if !(delta > 0.0 && delta < 0.5) {
        return invalid(format!("q_count needs 0 < δ < 1/2, got {delta}"));
    }
    let k0 = threshold(volume, delta);
    let exact = (volume <= EXACT_VOLUME_CAP).then(|| binomial_tail(volume, k0));
    let log_domain = ln_binomial_tail(volume, k0);
    let log_value = exact.as_ref().map(ln_big).unwrap_or(log_domain);
    Ok(CountBound {
        volume,
        threshold: k0,
        exact,
        log_value,
        log_domain,
        bound: binary_entropy(delta)?,
    })
}

pub fn q_count(n: u64, delta: f64, dim: usize, mode: LatticeMode) -> Result<CountBound> {
    let bx = LatticeBox::new(dim, mode, n)?;
    let v = bx
        .volume_u64()
        .ok_or_else(|| crate::Error::TooLarge(format!("V = {}", bx.volume())))?;
    q_count_volume(v, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_integer::binomial;
    use LatticeMode::*;

    #[test]
    fn q_examples() {
        let q = q_count(1, 0.49, 1, Positive).unwrap();
        assert_eq!((q.threshold, q.exact.clone().unwrap()), (2, BigUint::from(1u32)));
        let q = q_count(2, 1.0 / 3.0, 1, Positive).unwrap();
        assert_eq!((q.threshold, q.exact.clone().unwrap()), (2, BigUint::from(4u32)));
        assert!((q.log_value / 3.0 - 4f64.ln() / 3.0).abs() < 1e-15);
        assert!((q.bound - 0.636_514_168_294_813).abs() < 1e-12);
        assert!(q.holds());
        let q = q_count(5, 1e-9, 1, Positive).unwrap();
        assert_eq!(q.exact.unwrap(), BigUint::from(1u32));
    }

    #[test]
    fn binary_entropy_values() {
        assert!((binary_entropy(0.5).unwrap() - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(binary_entropy(1e-6).unwrap() < 1.5e-5);
        for &d in &[0.01, 0.2, 0.37] {
            assert!((binary_entropy(d).unwrap() - binary_entropy(1.0 - d).unwrap()).abs() < 1e-14);
        }
        assert!(binary_entropy(0.0).is_err());
        assert!(binary_entropy(1.0).is_err());
    }

    #[test]
    fn tail_matches_num_integer() {
        for n in 0..70u64 {
            for lo in 0..=n {
                let want: BigUint = (lo..=n).map(|k| binomial(BigUint::from(n), BigUint::from(k))).sum();
                assert_eq!(binomial_tail(n, lo), want, "n={n} lo={lo}");
            }
        }
    }

    #[test]
    fn log_route_agrees() {
        for v in [1u64, 7, 30, 64, 500, 4000] {
            for k in [0, v / 3, v / 2, v] {
                let exact = ln_big(&binomial_tail(v, k));
                assert!((exact - ln_binomial_tail(v, k)).abs() < 1e-9 * exact.abs().max(1.0));
            }
        }
    }

    #[test]
    fn threshold_snaps_exact_products() {
        // 0.9 * 10 is 9.000000000000002 in doubles.
        assert_eq!(threshold(10, 0.1), 9);
        assert_eq!(threshold(3, 1.0 / 3.0), 2);
        assert_eq!(threshold(4, 0.3), 3);
    }
}
