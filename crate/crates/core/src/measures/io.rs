//! Measure dumps: a `<depth>` line, then `pattern frequency` lines.
//!
//! Patterns are comma-separated symbols. A bare digit string is also accepted
//! when every symbol is a single digit. Frequencies are decimals or `a/b`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::lattice::{LatticeBox, LatticeMode};
use crate::symbolic::Alphabet;

use super::{CylinderMeasure, Masses};

pub fn write_measure(mu: &CylinderMeasure) -> String {
    let mut out = format!("{}\n", mu.depth);
    let word = |w: &[u8]| w.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",");
    match &mu.masses {
        Masses::Counts { total, counts } => {
            for (w, c) in counts.iter().filter(|(_, &c)| c > 0) {
                let _ = writeln!(out, "{} {c}/{total}", word(w));
            }
        }
        Masses::Float(m) => {
            for (w, x) in m.iter().filter(|(_, &x)| x > 0.0) {
                let _ = writeln!(out, "{} {x}", word(w));
            }
        }
    }
    out
}

enum Freq {
    Ratio(u64, u64),
    Real(f64),
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

pub fn read_measure(text: &str, alphabet: Alphabet, dim: usize, mode: LatticeMode) -> Result<CylinderMeasure> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
    let (hl, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty measure file".into() })?;
    let depth: u64 = header
        .trim()
        .parse()
        .map_err(|_| Error::Parse { line: hl + 1, msg: format!("bad depth {:?}", header.trim()) })?;
    let v = LatticeBox::new(dim, mode, depth)?.cell_count()?;

    let mut entries: Vec<(Vec<u8>, Freq)> = Vec::new();
    for (i, line) in lines {
        let ln = i + 1;
        let mut parts = line.split_whitespace();
        let (w, f) = match (parts.next(), parts.next(), parts.next()) {
            (Some(w), Some(f), None) => (w, f),
            _ => return perr(ln, "expected `pattern frequency`"),
        };
        let toks: Vec<&str> = if w.contains(',') || alphabet.size() > 10 {
            w.split(',').collect()
        } else {
            w.char_indices().map(|(k, c)| &w[k..k + c.len_utf8()]).collect()
        };
        let mut word = Vec::with_capacity(toks.len());
        for t in toks {
            let s: u64 = t.parse().map_err(|_| Error::Parse { line: ln, msg: format!("bad symbol {t:?}") })?;
            if s >= alphabet.size() as u64 {
                return Err(Error::SymbolOutOfRange { line: ln, symbol: s, b: alphabet.size() });
            }
            word.push(s as u8);
        }
        if word.len() != v {
            return perr(ln, format!("pattern has {} symbols, Λ_{depth} has {v}", word.len()));
        }
        let freq = match f.split_once('/') {
            Some((a, b)) => match (a.parse::<u64>(), b.parse::<u64>()) {
                (Ok(a), Ok(b)) if b > 0 => Freq::Ratio(a, b),
                _ => return perr(ln, format!("bad frequency {f:?}")),
            },
            None => Freq::Real(f.parse().map_err(|_| Error::Parse { line: ln, msg: format!("bad frequency {f:?}") })?),
        };
        entries.push((word, freq));
    }

    let common_den = entries.iter().try_fold(None, |acc: Option<u64>, (_, f)| match (f, acc) {
        (Freq::Ratio(_, b), None) => Some(Some(*b)),
        (Freq::Ratio(_, b), Some(d)) if *b == d => Some(Some(d)),
        _ => None,
    });
    if let Some(Some(total)) = common_den {
        let mut counts = BTreeMap::new();
        for (w, f) in entries {
            if let Freq::Ratio(a, _) = f {
                *counts.entry(w).or_insert(0) += a;
            }
        }
        return CylinderMeasure::from_counts(alphabet, dim, mode, depth, total, counts);
    }
    let mut masses = BTreeMap::new();
    for (w, f) in entries {
        let x = match f {
            Freq::Ratio(a, b) => a as f64 / b as f64,
            Freq::Real(x) => x,
        };
        *masses.entry(w).or_insert(0.0) += x;
    }
    CylinderMeasure::from_masses(alphabet, dim, mode, depth, masses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{bernoulli, bernoulli_exact};
    use LatticeMode::*;

    #[test]
    fn exact_round_trip() {
        let mu = bernoulli_exact(&[1, 2, 1], 4, 1, 1, Positive).unwrap();
        let text = write_measure(&mu);
        assert!(text.starts_with("1\n0,0 1/16\n"));
        let back = read_measure(&text, mu.alphabet, 1, Positive).unwrap();
        assert_eq!(back.masses, mu.masses);
    }

    #[test]
    fn float_round_trip() {
        let mu = bernoulli(&[0.3, 0.7], 2, 1, Full).unwrap();
        let back = read_measure(&write_measure(&mu), mu.alphabet, 1, Full).unwrap();
        assert_eq!(back.masses, mu.masses);
    }

    #[test]
    fn digit_strings_and_errors() {
        let b2 = Alphabet::new(2).unwrap();
        let mu = read_measure("1\n01 0.5\n10 0.5\n", b2, 1, Positive).unwrap();
        assert_eq!(mu.mass(&[0, 1]), 0.5);
        assert!(read_measure("1\n01 0.5\n", b2, 1, Positive).is_err());
        assert!(read_measure("1\n012 1\n", b2, 1, Positive).is_err());
        assert!(read_measure("0\n2 1\n", b2, 1, Positive).is_err());
    }
}
