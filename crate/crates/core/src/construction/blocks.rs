//! Block sets Γ_M, the tilings they generate, and the invariant set Δ.

use std::collections::HashSet;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::lattice::{LatticeBox, LatticeMode};
use crate::measures::{empirical_measure, metric_d, CylinderMeasure, MeasureDistance};
use crate::symbolic::{Alphabet, BlockAssignment, BlockFile, Configuration, Pattern};

/// Draws attempted before sampling gives up.
pub const SAMPLING_BUDGET: u64 = 1_000_000;
const BATCH: u64 = 4096;

/// What the sidecar records about how a block set was built.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BlockMeta {
    pub measure: String,
    pub h0: f64,
    pub beta0: f64,
    pub eta0: f64,
    pub eta: f64,
    pub beta: f64,
    pub h1: f64,
    pub k: u64,
    pub delta: f64,
    pub epsilon: f64,
    pub ln_r_epsilon: f64,
    pub depth: u64,
    pub seed: u64,
}

impl BlockMeta {
    /// `key=value` lines; the lattice keys come from the block box.
    pub fn to_sidecar(&self, alphabet: Alphabet, bx: &LatticeBox) -> String {
        let m = self;
        let lines = [
            ("h0", m.h0.to_string()),
            ("beta0", m.beta0.to_string()),
            ("eta0", m.eta0.to_string()),
            ("b", alphabet.size().to_string()),
            ("d", bx.dim.to_string()),
            ("mode", bx.mode.to_string()),
            ("M", bx.radius.to_string()),
            ("K", m.k.to_string()),
            ("eta", m.eta.to_string()),
            ("beta", m.beta.to_string()),
            ("h1", m.h1.to_string()),
            ("seed", m.seed.to_string()),
            ("measure", m.measure.clone()),
            ("depth", m.depth.to_string()),
            ("delta", m.delta.to_string()),
            ("epsilon", m.epsilon.to_string()),
            ("ln_r_epsilon", m.ln_r_epsilon.to_string()),
        ];
        lines.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Inverse of `to_sidecar`; the lattice keys must agree with the block file.
    pub fn from_sidecar(text: &str, alphabet: Alphabet, bx: &LatticeBox) -> Result<Self> {
        let mut meta = BlockMeta::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let perr = |msg: String| Error::Parse { line: i + 1, msg };
            let (k, v) = line.split_once('=').ok_or_else(|| perr(format!("expected key=value, got {line:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            let f = || v.parse::<f64>().map_err(|_| perr(format!("bad number for {k}: {v:?}")));
            let u = || v.parse::<u64>().map_err(|_| perr(format!("bad integer for {k}: {v:?}")));
            match k {
                "h0" => meta.h0 = f()?,
                "beta0" => meta.beta0 = f()?,
                "eta0" => meta.eta0 = f()?,
                "eta" => meta.eta = f()?,
                "beta" => meta.beta = f()?,
                "h1" => meta.h1 = f()?,
                "delta" => meta.delta = f()?,
                "epsilon" => meta.epsilon = f()?,
                "ln_r_epsilon" => meta.ln_r_epsilon = f()?,
                "K" => meta.k = u()?,
                "seed" => meta.seed = u()?,
                "depth" => meta.depth = u()?,
                "measure" => meta.measure = v.to_string(),
                "b" if u()? != alphabet.size() as u64 => return Err(perr("alphabet differs from the block file".into())),
                "d" if u()? != bx.dim as u64 => return Err(perr("dimension differs from the block file".into())),
                "M" if u()? != bx.radius => return Err(perr("M differs from the block file".into())),
                "mode" if LatticeMode::parse(v)? != bx.mode => return Err(perr("mode differs from the block file".into())),
                "b" | "d" | "M" | "mode" => {}
                _ => return Err(perr(format!("unknown key {k:?}"))),
            }
        }
        Ok(meta)
    }
}

#[derive(Clone, Debug)]
pub struct BlockSubshift {
    pub alphabet: Alphabet,
    /// Λ_M.
    pub bx: LatticeBox,
    pub blocks: Arc<Vec<Pattern>>,
    pub meta: Option<BlockMeta>,
}

/// A point of Δ: the tiling by `assignment`, seen from offset k ∈ Λ_M.
#[derive(Clone, Debug)]
pub struct DeltaPoint {
    pub assignment: BlockAssignment,
    pub offset: Vec<i64>,
}

pub fn build_delta(blocks: Vec<Pattern>, meta: Option<BlockMeta>) -> Result<BlockSubshift> {
    let Some(first) = blocks.first() else {
        return invalid("block set is empty");
    };
    let (bx, alphabet) = (first.bx, first.alphabet);
    if blocks.iter().any(|b| b.bx != bx || b.alphabet != alphabet) {
        return invalid("blocks must share box and alphabet");
    }
    let mut seen = HashSet::with_capacity(blocks.len());
    if !blocks.iter().all(|b| seen.insert(&b.symbols)) {
        return invalid("blocks must be distinct");
    }
    Ok(BlockSubshift { alphabet, bx, blocks: Arc::new(blocks), meta })
}

impl BlockSubshift {
    pub fn from_file(file: BlockFile, meta: Option<BlockMeta>) -> Result<Self> {
        build_delta(file.blocks, meta)
    }

    pub fn to_file(&self) -> BlockFile {
        BlockFile { alphabet: self.alphabet, bx: self.bx, blocks: self.blocks.as_ref().clone() }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.bx.dim
    }

    pub fn mode(&self) -> LatticeMode {
        self.bx.mode
    }

    pub fn m(&self) -> u64 {
        self.bx.radius
    }

    /// D_M, the grid period.
    pub fn period(&self) -> u64 {
        self.bx.width()
    }

    pub fn v_m(&self) -> u64 {
        self.bx.volume_u64().expect("block box was enumerated")
    }

    /// ln|Γ_M| / V_M.
    pub fn exact_entropy(&self) -> f64 {
        (self.len() as f64).ln() / self.v_m() as f64
    }

    pub fn tiling(&self, assignment: &BlockAssignment) -> Result<Configuration> {
        Configuration::tiling(self.blocks.clone(), assignment.clone())
    }

    /// The point T^k y of Δ, y the grid tiling given by the assignment.
    pub fn delta_point(&self, assignment: &BlockAssignment, offset: &[i64]) -> Result<Configuration> {
        if offset.len() != self.dim() || !self.bx.contains(offset) {
            return invalid(format!("offset {offset:?} is outside {}", self.bx));
        }
        Ok(self.tiling(assignment)?.translate(offset))
    }

    pub fn realize(&self, p: &DeltaPoint) -> Result<Configuration> {
        self.delta_point(&p.assignment, &p.offset)
    }

    /// The (rule, offset) realization of T^{e_j} applied to a Δ-point.
    pub fn step(&self, p: &DeltaPoint, j: usize) -> DeltaPoint {
        let mut offset = p.offset.clone();
        if offset[j] < self.bx.hi() {
            offset[j] += 1;
            return DeltaPoint { assignment: p.assignment.clone(), offset };
        }
        // k_j + 1 = D_M + lo: wrap to the next grid cell.
        offset[j] = self.bx.lo();
        let mut e = vec![0i64; self.dim()];
        e[j] = 1;
        DeltaPoint { assignment: p.assignment.shifted(&e), offset }
    }

    /// T^{D_M e_j} y against the tiling by the shifted assignment, on the window.
    pub fn shift_compatible(&self, assignment: &BlockAssignment, j: usize, window: &LatticeBox) -> Result<bool> {
        let mut v = vec![0i64; self.dim()];
        v[j] = self.period() as i64;
        let lhs = self.tiling(assignment)?.translate(&v);
        let mut e = vec![0i64; self.dim()];
        e[j] = 1;
        let rhs = self.tiling(&assignment.shifted(&e))?;
        let origin = vec![0i64; self.dim()];
        Ok(lhs.window(window, &origin)? == rhs.window(window, &origin)?)
    }

    /// T^{e_j} of the point against the realization `step` claims, on the window.
    pub fn closure_holds(&self, p: &DeltaPoint, j: usize, window: &LatticeBox) -> Result<bool> {
        let mut e = vec![0i64; self.dim()];
        e[j] = 1;
        let lhs = self.realize(p)?.translate(&e);
        let rhs = self.realize(&self.step(p, j))?;
        let origin = vec![0i64; self.dim()];
        Ok(lhs.window(window, &origin)? == rhs.window(window, &origin)?)
    }
}

/// Block test: empirical measure of the block's periodic extension over Λ_M.
pub fn block_distance(block: &Pattern, mu0: &CylinderMeasure, depth: u64) -> Result<MeasureDistance> {
    let x = Configuration::periodic_extension(block)?;
    let nu = empirical_measure(&x, &block.bx, depth)?;
    metric_d(&nu, mu0, depth)
}

#[derive(Clone, Debug)]
pub struct SampleSpec {
    pub eta: f64,
    /// Cylinder depth of the empirical test.
    pub depth: u64,
    pub size_lo: BigUint,
    /// Exclusive.
    pub size_hi: BigUint,
    pub seed: u64,
    pub budget: u64,
}

/// Rejection sampling of distinct Λ_M-patterns whose empirical measure is η-close to μ₀.
///
/// Cells are drawn iid from the one-site marginal of μ₀, draw i from the
/// ChaCha8 stream i of the seed. The first `size_lo` distinct accepted
/// blocks in draw order are returned, sorted.
pub fn sample_block_set(mu0: &CylinderMeasure, bx: &LatticeBox, spec: &SampleSpec) -> Result<Vec<Pattern>> {
    if bx.dim != mu0.dim || bx.mode != mu0.mode {
        return invalid("block box and measure live on different lattices");
    }
    let v = bx.cell_count()?;
    let b = mu0.alphabet.size();
    let all = BigUint::from(b).pow(v as u32);
    if spec.size_lo > all {
        return invalid(format!("cannot pick {} distinct blocks from {all} patterns", spec.size_lo));
    }
    if spec.size_lo >= spec.size_hi {
        return invalid("empty size window");
    }
    let needed = spec.size_lo.to_usize().filter(|&n| n as u64 <= spec.budget).ok_or_else(|| Error::SamplingExhausted {
        draws: 0,
        found: 0,
        needed: spec.size_lo.to_string(),
    })?;
    if needed == 0 {
        return Ok(Vec::new());
    }
    let one_site = mu0.at_depth(0)?;
    let weights: Vec<f64> = (0..b).map(|s| one_site.mass(&[s as u8])).collect();
    let picker = WeightedIndex::new(&weights).map_err(|e| Error::InvalidArgument(format!("one-site marginal: {e}")))?;
    let reference = mu0.at_depth(spec.depth)?;
    let accept_all = spec.eta >= 1.0;

    let draw = |i: u64| -> Result<Option<Vec<u8>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(i);
        let symbols: Vec<u8> = if accept_all {
            (0..v).map(|_| rng.random_range(0..b) as u8).collect()
        } else {
            (0..v).map(|_| picker.sample(&mut rng) as u8).collect()
        };
        if accept_all {
            return Ok(Some(symbols));
        }
        let block = Pattern { bx: *bx, alphabet: mu0.alphabet, symbols };
        let d = block_distance(&block, &reference, spec.depth)?;
        Ok((d.upper() <= spec.eta).then_some(block.symbols))
    };

    let mut seen: HashSet<Vec<u8>> = HashSet::with_capacity(needed);
    let mut found: Vec<Vec<u8>> = Vec::with_capacity(needed);
    let mut start = 0u64;
    while start < spec.budget && found.len() < needed {
        let end = (start + BATCH).min(spec.budget);
        let batch: Vec<Option<Vec<u8>>> = (start..end).into_par_iter().map(draw).collect::<Result<_>>()?;
        for w in batch.into_iter().flatten() {
            if found.len() == needed {
                break;
            }
            if seen.insert(w.clone()) {
                found.push(w);
            }
        }
        start = end;
    }
    if found.len() < needed {
        return Err(Error::SamplingExhausted { draws: start, found: found.len(), needed: spec.size_lo.to_string() });
    }
    found.sort();
    Ok(found.into_iter().map(|symbols| Pattern { bx: *bx, alphabet: mu0.alphabet, symbols }).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::bernoulli;
    use crate::symbolic::{pattern_at, AssignRule};
    use LatticeMode::*;

    fn b2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn word(bx: LatticeBox, s: &str) -> Pattern {
        Pattern::new(bx, b2(), s.bytes().map(|c| c - b'0').collect()).unwrap()
    }

    fn spec(eta: f64, depth: u64, lo: u32, hi: u32) -> SampleSpec {
        SampleSpec { eta, depth, size_lo: lo.into(), size_hi: hi.into(), seed: 3, budget: SAMPLING_BUDGET }
    }

    #[test]
    fn balanced_words_qualify() {
        let mu = bernoulli(&[0.5, 0.5], 0, 1, Positive).unwrap();
        let bx = LatticeBox::new(1, Positive, 3).unwrap();
        let got = sample_block_set(&mu, &bx, &spec(0.3, 0, 4, 7)).unwrap();
        assert_eq!(got.len(), 4);
        for p in &got {
            assert!(block_distance(p, &mu, 0).unwrap().upper() <= 0.3);
        }
        // Exactly the 6 balanced words pass; a seventh cannot be found.
        let err = sample_block_set(&mu, &bx, &SampleSpec { budget: 20_000, ..spec(0.3, 0, 7, 8) }).unwrap_err();
        assert!(matches!(err, Error::SamplingExhausted { found: 6, .. }));
    }

    #[test]
    fn pigeonhole_and_wide_ball() {
        let mu = bernoulli(&[0.5, 0.5], 0, 1, Positive).unwrap();
        let bx = LatticeBox::new(1, Positive, 1).unwrap();
        assert!(sample_block_set(&mu, &bx, &spec(1.0, 0, 5, 6)).is_err());
        let all = sample_block_set(&mu, &bx, &spec(1.0, 0, 4, 5)).unwrap();
        let words: Vec<String> = all.iter().map(|p| p.to_string()).collect();
        assert_eq!(words, ["00", "01", "10", "11"]);
    }

    #[test]
    fn sampling_is_deterministic() {
        let mu = bernoulli(&[0.25; 4], 1, 1, Positive).unwrap();
        let bx = LatticeBox::new(1, Positive, 9).unwrap();
        let a = sample_block_set(&mu, &bx, &spec(0.1, 1, 50, 60)).unwrap();
        let b = sample_block_set(&mu, &bx, &spec(0.1, 1, 50, 60)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn alternating_rule_offset_one() {
        let bx = LatticeBox::new(1, Positive, 1).unwrap();
        let sub = build_delta(vec![word(bx, "01"), word(bx, "10")], None).unwrap();
        let alt = BlockAssignment::new(AssignRule::Periodic { periods: vec![2], table: vec![0, 1] }, 1);
        let z = sub.delta_point(&alt, &[1]).unwrap();
        // y = 01 10 01 10 ..., shifted by one.
        let l3 = LatticeBox::new(1, Positive, 3).unwrap();
        assert_eq!(pattern_at(&z, &l3, &[0]).unwrap().to_string(), "1100");
        assert!(sub.delta_point(&alt, &[2]).is_err());
    }

    #[test]
    fn single_block_is_periodic() {
        let bx = LatticeBox::new(1, Full, 1).unwrap();
        let sub = build_delta(vec![word(bx, "011")], None).unwrap();
        assert_eq!(sub.exact_entropy(), 0.0);
        let a = BlockAssignment::seeded(1, 1, 1);
        let z = sub.delta_point(&a, &[-1]).unwrap();
        let w = LatticeBox::new(1, Full, 4).unwrap();
        assert_eq!(pattern_at(&z, &w, &[0]).unwrap().to_string(), "101101101");
    }

    #[test]
    fn duplicates_and_empty_rejected() {
        let bx = LatticeBox::new(1, Positive, 1).unwrap();
        assert!(build_delta(vec![], None).is_err());
        assert!(build_delta(vec![word(bx, "01"), word(bx, "01")], None).is_err());
    }

    #[test]
    fn shift_and_closure_2d() {
        for mode in [Positive, Full] {
            let bx = LatticeBox::new(2, mode, 1).unwrap();
            let alphabet = Alphabet::new(3).unwrap();
            let mut seen = HashSet::new();
            let uniq: Vec<Pattern> = (1..8u64)
                .map(|k| {
                    let syms = (0..bx.cell_count().unwrap() as u64).map(|i| (crate::symbolic::config::mix64(k * 31 + i) % 3) as u8).collect();
                    Pattern::new(bx, alphabet, syms).unwrap()
                })
                .filter(|p| seen.insert(p.symbols.clone()))
                .collect();
            let sub = build_delta(uniq, None).unwrap();
            let win = LatticeBox::new(2, mode, 6).unwrap();
            let a = BlockAssignment::seeded(9, sub.len(), 2);
            for j in 0..2 {
                assert!(sub.shift_compatible(&a, j, &win).unwrap());
                for k in bx.cells() {
                    let p = DeltaPoint { assignment: a.clone(), offset: k };
                    assert!(sub.closure_holds(&p, j, &win).unwrap());
                }
            }
        }
    }
}
