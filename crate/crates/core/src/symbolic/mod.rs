//! Alphabets, patterns, configurations and the 2^-ρ point metric.

pub(crate) mod config;
pub mod io;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lattice::{LatticeBox, LatticeMode};

pub use config::{AssignRule, BlockAssignment, BlockTiling, Configuration, Rule};
pub use io::{read_blockset, write_blockset, BlockFile};

pub use crate::lattice::MAX_DIM;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alphabet {
    size: u32,
}

impl Alphabet {
    pub fn new(size: u32) -> Result<Self> {
        if !(2..=256).contains(&size) {
            return invalid(format!("alphabet size must be in 2..=256, got {size}"));
        }
        Ok(Alphabet { size })
    }

    pub fn size(&self) -> u32 {
        self.size
    }

    pub fn contains(&self, s: u8) -> bool {
        (s as u32) < self.size
    }
}

/// A finite array of symbols on a box, in row-major order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Pattern {
    pub bx: LatticeBox,
    pub alphabet: Alphabet,
    pub symbols: Vec<u8>,
}

impl Pattern {
    pub fn new(bx: LatticeBox, alphabet: Alphabet, symbols: Vec<u8>) -> Result<Self> {
        let v = bx.cell_count()?;
        if symbols.len() != v {
            return invalid(format!("pattern has {} symbols, box has {v} cells", symbols.len()));
        }
        if let Some(&s) = symbols.iter().find(|&&s| !alphabet.contains(s)) {
            return Err(Error::SymbolOutOfRange { line: 0, symbol: s as u64, b: alphabet.size() });
        }
        Ok(Pattern { bx, alphabet, symbols })
    }

    pub fn get(&self, cell: &[i64]) -> Option<u8> {
        self.bx.index_of(cell).map(|i| self.symbols[i])
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&word_string(&self.symbols, self.alphabet))
    }
}

/// Digits when they fit, comma-separated otherwise.
pub fn word_string(symbols: &[u8], alphabet: Alphabet) -> String {
    if alphabet.size() <= 10 {
        symbols.iter().map(|s| char::from(b'0' + s)).collect()
    } else {
        symbols.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// A distance known to lie in [lower, upper].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distance {
    pub lower: f64,
    pub upper: f64,
}

impl Distance {
    pub fn exact(v: f64) -> Self {
        Distance { lower: v, upper: v }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    /// Some(true) if certainly > eps, Some(false) if certainly ≤ eps.
    pub fn exceeds(&self, eps: f64) -> Option<bool> {
        if self.lower > eps {
            Some(true)
        } else if self.upper <= eps {
            Some(false)
        } else {
            None
        }
    }

    fn max(self, other: Distance) -> Distance {
        Distance { lower: self.lower.max(other.lower), upper: self.upper.max(other.upper) }
    }
}

/// The depth r with 2^-(r+1) ≤ ε < 2^-r, or None when ε ≥ 1.
///
/// Under the 2^-ρ metric, d(x,y) > ε exactly when x and y differ on Λ_r.
pub fn band_depth(eps: f64) -> Result<Option<u64>> {
    if !(eps > 0.0) {
        return invalid(format!("epsilon must be positive, got {eps}"));
    }
    if eps >= 1.0 {
        return Ok(None);
    }
    let mut r = 0u64;
    while pow2_neg(r + 1) > eps {
        r += 1;
    }
    Ok(Some(r))
}

/// 2^-k, down through the subnormals; 0 past 2^-1074.
pub fn pow2_neg(k: u64) -> f64 {
    if k <= 1022 {
        f64::from_bits((1023 - k) << 52)
    } else if k <= 1074 {
        f64::from_bits(1u64 << (1074 - k))
    } else {
        0.0
    }
}

/// Radius of the smallest Λ_r holding the cell.
fn cell_radius(mode: LatticeMode, c: &[i64]) -> u64 {
    match mode {
        LatticeMode::Positive => c.iter().copied().max().unwrap_or(0) as u64,
        LatticeMode::Full => c.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0),
    }
}

fn first_difference(x: &Configuration, y: &Configuration, at: &[i64], depth: u64) -> Option<u64> {
    let probe = LatticeBox { dim: x.dim(), mode: x.mode(), radius: depth };
    let mut best: Option<u64> = None;
    let mut buf = [0i64; MAX_DIM];
    for c in probe.cells() {
        let rad = cell_radius(x.mode(), &c);
        if best.is_some_and(|b| rad >= b) {
            continue;
        }
        for k in 0..c.len() {
            buf[k] = at[k] + c[k];
        }
        let p = &buf[..c.len()];
        if x.eval(p) != y.eval(p) {
            best = Some(rad);
            if rad == 0 {
                break;
            }
        }
    }
    best
}

/// d(x,y) resolved up to Λ_max_depth.
pub fn point_distance(x: &Configuration, y: &Configuration, max_depth: u64) -> Distance {
    let origin = vec![0i64; x.dim()];
    match first_difference(x, y, &origin, max_depth) {
        Some(rho) => Distance::exact(pow2_neg(rho)),
        None => Distance { lower: 0.0, upper: pow2_neg(max_depth + 1) },
    }
}

/// max over i in the window of d(T^i x, T^i y); an empty window gives 0.
pub fn orbit_distance<'a, I>(x: &Configuration, y: &Configuration, window: I, max_depth: u64) -> Distance
where
    I: IntoIterator<Item = &'a Vec<i64>>,
{
    let mut acc = Distance::exact(0.0);
    let mut any = false;
    for i in window {
        let d = match first_difference(x, y, i, max_depth) {
            Some(rho) => Distance::exact(pow2_neg(rho)),
            None => Distance { lower: 0.0, upper: pow2_neg(max_depth + 1) },
        };
        acc = if any { acc.max(d) } else { d };
        any = true;
        if acc.lower >= 1.0 {
            break;
        }
    }
    acc
}

pub fn orbit_distance_box(x: &Configuration, y: &Configuration, window: &LatticeBox, max_depth: u64) -> Distance {
    let cells: Vec<Vec<i64>> = window.cells().collect();
    orbit_distance(x, y, &cells, max_depth)
}

/// The pattern of `config` on origin + box.
pub fn pattern_at(config: &Configuration, bx: &LatticeBox, origin: &[i64]) -> Result<Pattern> {
    if bx.dim != config.dim() || origin.len() != config.dim() {
        return invalid("box, origin and configuration dimensions differ");
    }
    if config.mode() == LatticeMode::Positive && origin.iter().any(|&c| c + bx.lo() < 0) {
        return invalid("origin leaves Z_+^d");
    }
    let symbols = config.window(bx, origin)?;
    Ok(Pattern { bx: *bx, alphabet: config.alphabet(), symbols })
}
