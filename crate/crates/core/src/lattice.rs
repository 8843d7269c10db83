//! Boxes Λ_n in Z^d and Z_+^d.
//!
//! Cells are always listed in row-major order with the minimal corner first,
//! so the first coordinate is the most significant one.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Coordinates are copied into fixed stack buffers on hot paths.
pub const MAX_DIM: usize = 8;

/// Largest box that may be materialized cell by cell.
pub const MAX_CELLS: u64 = 1 << 28;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LatticeMode {
    /// Z^d, boxes [-n, n]^d.
    Full,
    /// Z_+^d, boxes [0, n]^d.
    Positive,
}

impl LatticeMode {
    pub fn width(self, n: u64) -> u64 {
        match self {
            LatticeMode::Full => 2 * n + 1,
            LatticeMode::Positive => n + 1,
        }
    }

    pub fn lo(self, n: u64) -> i64 {
        match self {
            LatticeMode::Full => -(n as i64),
            LatticeMode::Positive => 0,
        }
    }

    pub fn letter(self) -> char {
        match self {
            LatticeMode::Full => 'F',
            LatticeMode::Positive => 'P',
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "F" | "f" | "full" | "FULL" => Ok(LatticeMode::Full),
            "P" | "p" | "positive" | "POSITIVE" => Ok(LatticeMode::Positive),
            other => invalid(format!("unknown lattice mode {other:?} (expected F or P)")),
        }
    }
}

impl fmt::Display for LatticeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// The box Λ_n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeBox {
    pub dim: usize,
    pub mode: LatticeMode,
    pub radius: u64,
}

impl LatticeBox {
    pub fn new(dim: usize, mode: LatticeMode, radius: u64) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return invalid(format!("dimension must be in 1..={MAX_DIM}, got {dim}"));
        }
        if radius > (i64::MAX as u64) / 4 {
            return invalid("radius too large");
        }
        Ok(LatticeBox { dim, mode, radius })
    }

    pub fn width(&self) -> u64 {
        self.mode.width(self.radius)
    }

    pub fn volume(&self) -> BigUint {
        BigUint::from(self.width()).pow(self.dim as u32)
    }

    pub fn volume_u64(&self) -> Option<u64> {
        self.width().checked_pow(self.dim as u32)
    }

    /// Volume as a cell count, refusing boxes too big to walk.
    pub fn cell_count(&self) -> Result<usize> {
        match self.volume_u64() {
            Some(v) if v <= MAX_CELLS => Ok(v as usize),
            _ => Err(Error::TooLarge(format!(
                "box of radius {} in dimension {} has {} cells",
                self.radius,
                self.dim,
                self.volume()
            ))),
        }
    }

    pub fn lo(&self) -> i64 {
        self.mode.lo(self.radius)
    }

    pub fn hi(&self) -> i64 {
        self.radius as i64
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        let (lo, hi) = (self.lo(), self.hi());
        v.len() == self.dim && v.iter().all(|&c| c >= lo && c <= hi)
    }

    /// Row-major position of a cell.
    pub fn index_of(&self, v: &[i64]) -> Option<usize> {
        if !self.contains(v) {
            return None;
        }
        let w = self.width() as usize;
        let lo = self.lo();
        Some(v.iter().fold(0usize, |acc, &c| acc * w + (c - lo) as usize))
    }

    pub fn cell(&self, mut idx: usize) -> Vec<i64> {
        let w = self.width() as usize;
        let mut out = vec![0i64; self.dim];
        for slot in out.iter_mut().rev() {
            *slot = self.lo() + (idx % w) as i64;
            idx /= w;
        }
        out
    }

    pub fn cells(&self) -> Cells {
        Cells {
            lo: self.lo(),
            hi: self.hi(),
            cur: Some(vec![self.lo(); self.dim]),
        }
    }

    /// Same shape, different radius.
    pub fn with_radius(&self, radius: u64) -> LatticeBox {
        LatticeBox { radius, ..*self }
    }
}

impl fmt::Display for LatticeBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Λ_{} (d={}, {})", self.radius, self.dim, self.mode)
    }
}

/// Odometer over the cells of a box.
pub struct Cells {
    lo: i64,
    hi: i64,
    cur: Option<Vec<i64>>,
}

impl Iterator for Cells {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        let out = self.cur.clone()?;
        let mut next = out.clone();
        let mut k = next.len();
        loop {
            if k == 0 {
                self.cur = None;
                break;
            }
            k -= 1;
            if next[k] < self.hi {
                next[k] += 1;
                self.cur = Some(next);
                break;
            }
            next[k] = self.lo;
        }
        Some(out)
    }
}

pub fn make_box(dim: usize, mode: LatticeMode, radius: u64) -> Result<LatticeBox> {
    LatticeBox::new(dim, mode, radius)
}

/// The radius m*n with D_{m*n} = D_m D_n.
pub fn compose(m: u64, n: u64, mode: LatticeMode) -> u64 {
    match mode {
        LatticeMode::Positive => m * n + m + n,
        LatticeMode::Full => 2 * m * n + m + n,
    }
}

/// Tiling of a target box by disjoint translates of a smaller box, plus a remainder.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub q: u64,
    pub target: LatticeBox,
    pub sub: LatticeBox,
    /// Translation vectors; translate t covers t + Λ_sub.
    pub subcube_origins: Vec<Vec<i64>>,
    pub covered_volume: BigUint,
    pub remainder_volume: BigUint,
}

impl Decomposition {
    pub fn remainder_fraction(&self) -> f64 {
        ratio(&self.remainder_volume, &self.target.volume())
    }

    /// remainder/V < 2d/K, decided in integers.
    pub fn satisfies_subcube_bound(&self, k: u64) -> bool {
        &self.remainder_volume * BigUint::from(k)
            < BigUint::from(2 * self.target.dim as u64) * self.target.volume()
    }

    /// remainder/V ≤ d D_N / D_n, decided in integers.
    pub fn satisfies_width_bound(&self) -> bool {
        &self.remainder_volume * BigUint::from(self.target.width())
            <= BigUint::from(self.target.dim as u64 * self.sub.width()) * self.target.volume()
    }

    /// Index of the subcube holding `cell`, if any.
    pub fn subcube_of(&self, cell: &[i64]) -> Option<usize> {
        if !self.target.contains(cell) {
            return None;
        }
        let side = self.sub.width() as i64;
        let per_axis = self.q as i64 + 1;
        let first = self.subcube_origins.first()?;
        let mut idx = 0i64;
        for (axis, &c) in cell.iter().enumerate() {
            let rel = c - (first[axis] + self.sub.lo());
            if rel < 0 {
                return None;
            }
            let j = rel / side;
            if j >= per_axis {
                return None;
            }
            idx = idx * per_axis + j;
        }
        Some(idx as usize)
    }
}

pub(crate) fn ratio(a: &BigUint, b: &BigUint) -> f64 {
    let shift = a.bits().max(b.bits()).saturating_sub(1000);
    let fa = (a >> shift).to_f64().unwrap_or(f64::INFINITY);
    let fb = (b >> shift).to_f64().unwrap_or(f64::INFINITY);
    fa / fb
}

/// Subcube decomposition of Λ_{KM} into translates of Λ_M.
pub fn decompose(k: u64, m: u64, dim: usize, mode: LatticeMode) -> Result<Decomposition> {
    if k == 0 || m == 0 {
        return invalid("K and M must be positive");
    }
    decompose_generic(m, k * m, dim, mode)
}

/// Decomposition of Λ_n into translates of Λ_N, anchored at the minimal corner.
pub fn decompose_generic(big_n: u64, n: u64, dim: usize, mode: LatticeMode) -> Result<Decomposition> {
    if big_n == 0 {
        return invalid("N must be positive");
    }
    if n < big_n {
        return invalid(format!("need n >= N, got n={n}, N={big_n}"));
    }
    let target = LatticeBox::new(dim, mode, n)?;
    let sub = LatticeBox::new(dim, mode, big_n)?;
    let (dn, dsub) = (target.width(), sub.width());
    let q = dn / dsub - 1;
    let per_axis = q + 1;

    let count = per_axis
        .checked_pow(dim as u32)
        .filter(|&c| c <= MAX_CELLS)
        .ok_or_else(|| Error::TooLarge(format!("{per_axis}^{dim} subcubes")))?;
    // Translate t places Λ_N at t + Λ_N; its minimal corner is t + lo(N).
    let base = target.lo() - sub.lo();
    let mut origins = Vec::with_capacity(count as usize);
    let mut j = vec![0u64; dim];
    for _ in 0..count {
        origins.push(j.iter().map(|&ji| base + (ji * dsub) as i64).collect());
        for slot in j.iter_mut().rev() {
            *slot += 1;
            if *slot < per_axis {
                break;
            }
            *slot = 0;
        }
    }

    let covered = BigUint::from(count) * sub.volume();
    let total = target.volume();
    let remainder = if covered <= total { &total - &covered } else { BigUint::zero() };
    Ok(Decomposition {
        q,
        target,
        sub,
        subcube_origins: origins,
        covered_volume: covered,
        remainder_volume: remainder,
    })
}
