use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{invalid, Result};
use crate::lattice::{LatticeBox, LatticeMode, MAX_DIM};

use super::{Alphabet, Pattern};

/// Generator of a configuration, total on Z^d.
#[derive(Clone, Debug)]
pub enum Rule {
    Constant(u8),
    /// Tile indexed row-major by the coordinates reduced mod each period.
    Periodic { periods: Vec<u64>, tile: Vec<u8> },
    Patched { base: Arc<Rule>, cells: HashMap<Vec<i64>, u8> },
    Tiling(BlockTiling),
}

impl Rule {
    pub fn eval(&self, p: &[i64]) -> u8 {
        match self {
            Rule::Constant(s) => *s,
            Rule::Periodic { periods, tile } => {
                let mut idx = 0usize;
                for (&c, &per) in p.iter().zip(periods) {
                    idx = idx * per as usize + c.rem_euclid(per as i64) as usize;
                }
                tile[idx]
            }
            Rule::Patched { base, cells } => match cells.get(p) {
                Some(&s) => s,
                None => base.eval(p),
            },
            Rule::Tiling(t) => t.eval(p),
        }
    }
}

/// Block-index function on the grid of block cells.
#[derive(Clone, Debug)]
pub enum AssignRule {
    Constant(usize),
    Periodic { periods: Vec<u64>, table: Vec<usize> },
    /// Counter-keyed hash of (seed, cell): evaluation order never matters.
    Seeded { seed: u64, count: usize },
    Patched { base: Arc<AssignRule>, cells: HashMap<Vec<i64>, usize> },
}

impl AssignRule {
    pub fn index(&self, i: &[i64]) -> usize {
        match self {
            AssignRule::Constant(k) => *k,
            AssignRule::Periodic { periods, table } => {
                let mut idx = 0usize;
                for (&c, &per) in i.iter().zip(periods) {
                    idx = idx * per as usize + c.rem_euclid(per as i64) as usize;
                }
                table[idx]
            }
            AssignRule::Seeded { seed, count } => {
                let h = cell_hash(*seed, i);
                ((h as u128 * *count as u128) >> 64) as usize
            }
            AssignRule::Patched { base, cells } => match cells.get(i) {
                Some(&k) => k,
                None => base.index(i),
            },
        }
    }

    fn max_index(&self) -> usize {
        match self {
            AssignRule::Constant(k) => *k,
            AssignRule::Periodic { table, .. } => table.iter().copied().max().unwrap_or(0),
            AssignRule::Seeded { count, .. } => count.saturating_sub(1),
            AssignRule::Patched { base, cells } => {
                cells.values().copied().max().unwrap_or(0).max(base.max_index())
            }
        }
    }
}

pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn cell_hash(seed: u64, cell: &[i64]) -> u64 {
    let mut h = mix64(seed ^ 0x9e37_79b9_7f4a_7c15);
    for &c in cell {
        h = mix64(h.wrapping_add(c as u64).wrapping_add(0x9e37_79b9_7f4a_7c15));
    }
    h
}

/// An assignment rule read through a translation of the block grid.
#[derive(Clone, Debug)]
pub struct BlockAssignment {
    pub rule: Arc<AssignRule>,
    pub shift: Vec<i64>,
}

impl BlockAssignment {
    pub fn new(rule: AssignRule, dim: usize) -> Self {
        BlockAssignment { rule: Arc::new(rule), shift: vec![0; dim] }
    }

    pub fn seeded(seed: u64, count: usize, dim: usize) -> Self {
        Self::new(AssignRule::Seeded { seed, count }, dim)
    }

    pub fn index(&self, i: &[i64]) -> usize {
        let mut buf = [0i64; MAX_DIM];
        for (k, (&a, &b)) in i.iter().zip(&self.shift).enumerate() {
            buf[k] = a + b;
        }
        self.rule.index(&buf[..i.len()])
    }

    /// The assignment i ↦ index(i + v).
    pub fn shifted(&self, v: &[i64]) -> Self {
        BlockAssignment {
            rule: self.rule.clone(),
            shift: self.shift.iter().zip(v).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Grid-aligned tiling: block cell i covers i·D_M + Λ_M.
#[derive(Clone, Debug)]
pub struct BlockTiling {
    pub blocks: Arc<Vec<Pattern>>,
    pub assignment: BlockAssignment,
}

impl BlockTiling {
    pub fn sub_box(&self) -> LatticeBox {
        self.blocks[0].bx
    }

    /// Block cell and in-block position of a lattice point.
    pub fn locate(sub: &LatticeBox, p: &[i64], cell: &mut [i64], pos: &mut [i64]) {
        let d = sub.width() as i64;
        let m = sub.radius as i64;
        for k in 0..p.len() {
            match sub.mode {
                LatticeMode::Positive => {
                    cell[k] = p[k].div_euclid(d);
                    pos[k] = p[k].rem_euclid(d);
                }
                LatticeMode::Full => {
                    cell[k] = (p[k] + m).div_euclid(d);
                    pos[k] = p[k] - cell[k] * d;
                }
            }
        }
    }

    pub fn eval(&self, p: &[i64]) -> u8 {
        let sub = self.sub_box();
        let dim = p.len();
        let mut cell = [0i64; MAX_DIM];
        let mut pos = [0i64; MAX_DIM];
        Self::locate(&sub, p, &mut cell[..dim], &mut pos[..dim]);
        let block = &self.blocks[self.assignment.index(&cell[..dim])];
        let w = sub.width() as usize;
        let lo = sub.lo();
        let idx = pos[..dim].iter().fold(0usize, |acc, &t| acc * w + (t - lo) as usize);
        block.symbols[idx]
    }
}

/// A point of the full shift given lazily: x(j) = rule(offset + j).
#[derive(Clone, Debug)]
pub struct Configuration {
    rule: Arc<Rule>,
    offset: Vec<i64>,
    alphabet: Alphabet,
    mode: LatticeMode,
}

impl Configuration {
    pub fn from_rule(rule: Rule, alphabet: Alphabet, dim: usize, mode: LatticeMode) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return invalid(format!("dimension must be in 1..={MAX_DIM}"));
        }
        Ok(Configuration { rule: Arc::new(rule), offset: vec![0; dim], alphabet, mode })
    }

    pub fn constant(alphabet: Alphabet, dim: usize, mode: LatticeMode, s: u8) -> Result<Self> {
        if !alphabet.contains(s) {
            return invalid(format!("symbol {s} not in alphabet"));
        }
        Self::from_rule(Rule::Constant(s), alphabet, dim, mode)
    }

    pub fn periodic(alphabet: Alphabet, mode: LatticeMode, periods: Vec<u64>, tile: Vec<u8>) -> Result<Self> {
        let vol: u64 = periods.iter().product();
        if periods.contains(&0) || vol as usize != tile.len() {
            return invalid("tile size does not match periods");
        }
        if tile.iter().any(|&s| !alphabet.contains(s)) {
            return invalid("tile symbol outside alphabet");
        }
        let dim = periods.len();
        Self::from_rule(Rule::Periodic { periods, tile }, alphabet, dim, mode)
    }

    /// The periodic point whose restriction to the pattern's box is the pattern.
    pub fn periodic_extension(p: &Pattern) -> Result<Self> {
        let w = p.bx.width();
        let dim = p.bx.dim;
        let mut tile = vec![0u8; p.symbols.len()];
        for (idx, c) in p.bx.cells().enumerate() {
            let t = c.iter().fold(0usize, |acc, &x| acc * w as usize + x.rem_euclid(w as i64) as usize);
            tile[t] = p.symbols[idx];
        }
        Self::periodic(p.alphabet, p.bx.mode, vec![w; dim], tile)
    }

    /// Overrides given in this configuration's own coordinates.
    pub fn patched(base: &Configuration, overrides: HashMap<Vec<i64>, u8>) -> Result<Self> {
        let mut cells = HashMap::with_capacity(overrides.len());
        for (c, s) in overrides {
            if c.len() != base.dim() || !base.alphabet.contains(s) {
                return invalid("bad override cell or symbol");
            }
            let abs: Vec<i64> = c.iter().zip(&base.offset).map(|(a, b)| a + b).collect();
            cells.insert(abs, s);
        }
        Ok(Configuration {
            rule: Arc::new(Rule::Patched { base: base.rule.clone(), cells }),
            offset: base.offset.clone(),
            alphabet: base.alphabet,
            mode: base.mode,
        })
    }

    pub fn tiling(blocks: Arc<Vec<Pattern>>, assignment: BlockAssignment) -> Result<Self> {
        let first = match blocks.first() {
            Some(b) => b.clone(),
            None => return invalid("tiling needs at least one block"),
        };
        if blocks.iter().any(|b| b.bx != first.bx || b.alphabet != first.alphabet) {
            return invalid("blocks must share box and alphabet");
        }
        if assignment.shift.len() != first.bx.dim {
            return invalid("assignment dimension mismatch");
        }
        if assignment.rule.max_index() >= blocks.len() {
            return invalid("assignment refers to a missing block");
        }
        let t = BlockTiling { blocks, assignment };
        Self::from_rule(Rule::Tiling(t), first.alphabet, first.bx.dim, first.bx.mode)
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn mode(&self) -> LatticeMode {
        self.mode
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn rule(&self) -> &Arc<Rule> {
        &self.rule
    }

    pub fn offset(&self) -> &[i64] {
        &self.offset
    }

    #[inline]
    pub fn eval(&self, j: &[i64]) -> u8 {
        let mut buf = [0i64; MAX_DIM];
        for (k, (&a, &b)) in j.iter().zip(&self.offset).enumerate() {
            buf[k] = a + b;
        }
        self.rule.eval(&buf[..j.len()])
    }

    /// T^v x, with v restricted to Z_+^d in positive mode.
    pub fn shift(&self, v: &[i64]) -> Result<Self> {
        if v.len() != self.dim() {
            return invalid("shift vector has wrong dimension");
        }
        if self.mode == LatticeMode::Positive && v.iter().any(|&c| c < 0) {
            return invalid("shift must lie in Z_+^d");
        }
        Ok(self.translate(v))
    }

    pub(crate) fn translate(&self, v: &[i64]) -> Self {
        Configuration {
            rule: self.rule.clone(),
            offset: self.offset.iter().zip(v).map(|(a, b)| a + b).collect(),
            alphabet: self.alphabet,
            mode: self.mode,
        }
    }

    /// Symbols on origin + box, row-major.
    pub fn window(&self, bx: &LatticeBox, origin: &[i64]) -> Result<Vec<u8>> {
        let n = bx.cell_count()?;
        let mut out = Vec::with_capacity(n);
        let mut buf = [0i64; MAX_DIM];
        for c in bx.cells() {
            for k in 0..c.len() {
                buf[k] = origin[k] + c[k];
            }
            out.push(self.eval(&buf[..c.len()]));
        }
        Ok(out)
    }
}
