//! Tracing families of target patterns by a single configuration.
//!
//! On the full shift this is concatenation. For a subshift of finite type a
//! bounded backtracking search looks for a pattern on the bounding window; a
//! failure is a statement about that window only.

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

use crate::counting::threshold;
use crate::error::{invalid, Error, Result};
use crate::lattice::{LatticeBox, LatticeMode};
use crate::symbolic::{band_depth, Configuration, Pattern, Rule};

/// Largest search window, in cells.
pub const TRACE_CELL_CAP: usize = 40;
const NODE_BUDGET: u64 = 2_000_000;
const OFFSET_TUPLE_CAP: u64 = 100_000;

#[derive(Clone, Debug)]
pub enum TraceSystem {
    FullShift,
    /// Forbidden patterns, each on some Λ_k of the same lattice.
    Sft { forbidden: Vec<Pattern> },
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceFit {
    pub index: Vec<i64>,
    pub offset: Vec<i64>,
    /// |Λ^i|: cells of Λ_n where the trace is ε-close to the target.
    pub good: usize,
    pub required: u64,
}

#[derive(Clone, Debug)]
pub struct Trace {
    pub config: Configuration,
    pub fits: Vec<TraceFit>,
    /// For subshifts of finite type: the window (lo, hi corners) the search certified.
    pub region: Option<(Vec<i64>, Vec<i64>)>,
}

fn validate(targets: &[(Vec<i64>, Pattern)], n: u64) -> Result<LatticeBox> {
    let Some((_, first)) = targets.first() else {
        return invalid("no targets");
    };
    let bx = first.bx;
    if bx.radius != n {
        return invalid(format!("targets must live on Λ_{n}"));
    }
    let mut seen = std::collections::HashSet::new();
    for (i, p) in targets {
        if p.bx != bx || p.alphabet != first.alphabet || i.len() != bx.dim {
            return invalid("targets must share box, alphabet and dimension");
        }
        if bx.mode == LatticeMode::Positive && i.iter().any(|&c| c < 0) {
            return invalid("grid indices must lie in Z_+^d");
        }
        if !seen.insert(i.clone()) {
            return invalid(format!("grid index {i:?} appears twice"));
        }
    }
    Ok(bx)
}

/// Λ^i for every target: cells k ∈ Λ_n whose ε-neighbourhood, cut to Λ_n, agrees.
pub fn trace_fits(
    y: &Configuration,
    targets: &[(Vec<i64>, Pattern)],
    offsets: &[Vec<i64>],
    delta: f64,
    eps: f64,
) -> Result<Vec<TraceFit>> {
    let bx = validate(targets, targets.first().map_or(0, |t| t.1.bx.radius))?;
    let d = bx.width() as i64;
    let r = band_depth(eps)?;
    let v = bx.cell_count()?;
    let required = if delta > 0.0 { threshold(v as u64, delta.min(1.0)) } else { v as u64 };
    let probe: Vec<Vec<i64>> = match r {
        Some(r) => LatticeBox::new(bx.dim, bx.mode, r)?.cells().collect(),
        None => Vec::new(),
    };
    let mut out = Vec::with_capacity(targets.len());
    for ((i, x), xi) in targets.iter().zip(offsets) {
        let base: Vec<i64> = i.iter().zip(xi).map(|(a, b)| a * d + b).collect();
        let mut good = 0;
        for k in bx.cells() {
            let ok = r.is_none()
                || probe.iter().all(|c| {
                    let q: Vec<i64> = k.iter().zip(c).map(|(a, b)| a + b).collect();
                    match x.get(&q) {
                        Some(s) => {
                            let p: Vec<i64> = base.iter().zip(&q).map(|(a, b)| a + b).collect();
                            y.eval(&p) == s
                        }
                        None => true,
                    }
                });
            good += ok as usize;
        }
        out.push(TraceFit { index: i.clone(), offset: xi.clone(), good, required });
    }
    Ok(out)
}

pub fn trace_targets(
    targets: &[(Vec<i64>, Pattern)],
    n: u64,
    system: &TraceSystem,
    delta: f64,
    eps: f64,
) -> Result<Trace> {
    let bx = validate(targets, n)?;
    if !(0.0..1.0).contains(&delta) || !(eps > 0.0) {
        return invalid("need 0 ≤ δ < 1 and ε > 0");
    }
    let alphabet = targets[0].1.alphabet;
    let d = bx.width() as i64;
    match system {
        TraceSystem::FullShift => {
            let mut cells = HashMap::new();
            for (i, x) in targets {
                for (c, &s) in bx.cells().zip(&x.symbols) {
                    cells.insert(i.iter().zip(&c).map(|(a, b)| a * d + b).collect::<Vec<i64>>(), s);
                }
            }
            let rule = Rule::Patched { base: Arc::new(Rule::Constant(0)), cells };
            let config = Configuration::from_rule(rule, alphabet, bx.dim, bx.mode)?;
            let offsets = vec![vec![0; bx.dim]; targets.len()];
            let fits = trace_fits(&config, targets, &offsets, delta, eps)?;
            Ok(Trace { config, fits, region: None })
        }
        TraceSystem::Sft { forbidden } => sft_search(targets, bx, forbidden, delta, eps),
    }
}

struct Region {
    lo: Vec<i64>,
    widths: Vec<i64>,
}

impl Region {
    fn len(&self) -> usize {
        self.widths.iter().product::<i64>() as usize
    }

    fn index(&self, p: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for k in 0..p.len() {
            let t = p[k] - self.lo[k];
            if t < 0 || t >= self.widths[k] {
                return None;
            }
            idx = idx * self.widths[k] as usize + t as usize;
        }
        Some(idx)
    }

    fn cell(&self, mut idx: usize) -> Vec<i64> {
        let mut out = vec![0i64; self.lo.len()];
        for k in (0..out.len()).rev() {
            let w = self.widths[k] as usize;
            out[k] = self.lo[k] + (idx % w) as i64;
            idx /= w;
        }
        out
    }
}

struct Search<'a> {
    b: u8,
    /// Forbidden placements keyed by their last region cell.
    checks: Vec<Vec<(usize, Vec<usize>)>>,
    forbidden: &'a [Pattern],
    /// (target, target cell index) for every region cell.
    covers: Vec<Vec<(usize, usize)>>,
    targets: &'a [(Vec<i64>, Pattern)],
    budget: usize,
    nodes: u64,
}

impl Search<'_> {
    fn run(&mut self, at: usize, assign: &mut Vec<u8>, mismatches: &mut Vec<usize>) -> bool {
        if at == assign.len() {
            return true;
        }
        if self.nodes >= NODE_BUDGET {
            return false;
        }
        self.nodes += 1;
        let preferred = self.covers[at].first().map(|&(t, c)| self.targets[t].1.symbols[c]);
        let order = preferred.into_iter().chain((0..self.b).filter(move |&s| Some(s) != preferred));
        for s in order {
            assign[at] = s;
            let mut ok = true;
            let mut bumped = Vec::new();
            for &(t, c) in &self.covers[at] {
                if self.targets[t].1.symbols[c] != s {
                    mismatches[t] += 1;
                    bumped.push(t);
                    ok &= mismatches[t] <= self.budget;
                }
            }
            ok = ok
                && self.checks[at]
                    .iter()
                    .all(|(f, cells)| cells.iter().zip(&self.forbidden[*f].symbols).any(|(&c, &fs)| assign[c] != fs));
            if ok && self.run(at + 1, assign, mismatches) {
                return true;
            }
            for t in bumped {
                mismatches[t] -= 1;
            }
        }
        false
    }
}

fn sft_search(targets: &[(Vec<i64>, Pattern)], bx: LatticeBox, forbidden: &[Pattern], delta: f64, eps: f64) -> Result<Trace> {
    let dim = bx.dim;
    let alphabet = targets[0].1.alphabet;
    if forbidden.iter().any(|f| f.bx.dim != dim || f.bx.mode != bx.mode || f.alphabet != alphabet) {
        return invalid("forbidden patterns must live on the targets' lattice");
    }
    let d = bx.width() as i64;
    // Every offset choice stays inside iD_n + Λ_n + Λ_n.
    let (reach_lo, reach_hi) = (2 * bx.lo(), 2 * bx.hi());
    let mut lo = vec![i64::MAX; dim];
    let mut hi = vec![i64::MIN; dim];
    for (i, _) in targets {
        for k in 0..dim {
            lo[k] = lo[k].min(i[k] * d + reach_lo);
            hi[k] = hi[k].max(i[k] * d + reach_hi);
        }
    }
    let region = Region { widths: lo.iter().zip(&hi).map(|(a, b)| b - a + 1).collect(), lo };
    if region.len() > TRACE_CELL_CAP {
        return Err(Error::TooLarge(format!(
            "tracing window has {} cells; the search is refused above {TRACE_CELL_CAP}",
            region.len()
        )));
    }

    let mut checks: Vec<Vec<(usize, Vec<usize>)>> = vec![Vec::new(); region.len()];
    for (fi, f) in forbidden.iter().enumerate() {
        let fcells: Vec<Vec<i64>> = f.bx.cells().collect();
        for t0 in 0..region.len() {
            let t = region.cell(t0);
            let idxs: Option<Vec<usize>> =
                fcells.iter().map(|c| region.index(&c.iter().zip(&t).map(|(a, b)| a + b).collect::<Vec<_>>())).collect();
            if let Some(idxs) = idxs {
                let last = *idxs.iter().max().expect("nonempty box");
                checks[last].push((fi, idxs));
            }
        }
    }

    let v = bx.cell_count()?;
    let budget = match band_depth(eps)? {
        None => v,
        Some(_) => (delta * v as f64 + 1e-9).floor() as usize,
    };
    let offsets_box: Vec<Vec<i64>> = bx.cells().collect();
    let tuples = (offsets_box.len() as u64).checked_pow(targets.len() as u32).filter(|&t| t <= OFFSET_TUPLE_CAP);
    let Some(tuples) = tuples else {
        return Err(Error::TooLarge("too many offset tuples to enumerate".into()));
    };
    let filler = (0..alphabet.size() as u8)
        .find(|&s| forbidden.iter().all(|f| f.symbols.iter().any(|&x| x != s)))
        .unwrap_or(0);

    let mut nodes = 0u64;
    for tuple in 0..tuples {
        let mut rest = tuple;
        let offsets: Vec<Vec<i64>> = (0..targets.len())
            .map(|_| {
                let o = offsets_box[(rest % offsets_box.len() as u64) as usize].clone();
                rest /= offsets_box.len() as u64;
                o
            })
            .collect();
        let mut covers = vec![Vec::new(); region.len()];
        for (t, ((i, _), xi)) in targets.iter().zip(&offsets).enumerate() {
            for (ci, c) in bx.cells().enumerate() {
                let p: Vec<i64> = (0..dim).map(|k| i[k] * d + xi[k] + c[k]).collect();
                covers[region.index(&p).expect("region holds every offset")].push((t, ci));
            }
        }
        let mut search = Search {
            b: alphabet.size() as u8,
            checks: checks.clone(),
            forbidden,
            covers,
            targets,
            budget,
            nodes,
        };
        let mut assign = vec![0u8; region.len()];
        let mut mismatches = vec![0usize; targets.len()];
        let found = search.run(0, &mut assign, &mut mismatches);
        nodes = search.nodes;
        if found {
            let cells: HashMap<Vec<i64>, u8> = (0..region.len()).map(|k| (region.cell(k), assign[k])).collect();
            let rule = Rule::Patched { base: Arc::new(Rule::Constant(filler)), cells };
            let config = Configuration::from_rule(rule, alphabet, dim, bx.mode)?;
            let fits = trace_fits(&config, targets, &offsets, delta, eps)?;
            if fits.iter().all(|f| f.good as u64 >= f.required) {
                let hi = (0..dim).map(|k| region.lo[k] + region.widths[k] - 1).collect();
                return Ok(Trace { config, fits, region: Some((region.lo.clone(), hi)) });
            }
        }
        if nodes >= NODE_BUDGET {
            break;
        }
    }
    Err(Error::NoTrace(format!(
        "no trace at n = {}, δ = {delta}, ε = {eps} on this {}-cell window{}",
        bx.radius,
        region.len(),
        if nodes >= NODE_BUDGET { " (search budget exhausted)" } else { "" }
    )))
}
