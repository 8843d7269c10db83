//! Empirical measures along Δ-orbits: Z_{N,η} spot checks, proximity, disjointness.

use num_bigint::BigUint;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::lattice::{decompose_generic, LatticeBox};
use crate::measures::{empirical_measure_at, metric_d, CylinderMeasure, MeasureDistance, Membership};
use crate::symbolic::{BlockAssignment, Configuration};

use super::blocks::{build_delta, sample_block_set, BlockSubshift, SampleSpec, SAMPLING_BUDGET};
use super::params::smallest_k;

/// Shifts tested per point unless the caller says otherwise.
pub const DEFAULT_MAX_SHIFTS: usize = 4096;
/// Long-orbit windows larger than this are skipped.
const LONG_ORBIT_CELL_CAP: usize = 1 << 22;

#[derive(Clone, Debug, Serialize)]
pub struct ZReport {
    pub membership: Membership,
    pub tested: usize,
    /// The intersection over all of L is only sampled on the test window.
    pub spot_check: bool,
    pub max_value: f64,
    pub max_upper: f64,
    pub worst_shift: Vec<i64>,
    pub eta: f64,
}

/// Decide z ∈ T^{-k} X_{N,B_η(μ0)} for every k of the test window.
pub fn membership_z(
    z: &Configuration,
    n_box: &LatticeBox,
    eta: f64,
    mu0: &CylinderMeasure,
    test_window: &[Vec<i64>],
    depth: u64,
) -> Result<ZReport> {
    if test_window.is_empty() {
        return invalid("empty test window");
    }
    let reference = mu0.at_depth(depth)?;
    let dists: Vec<MeasureDistance> = test_window
        .par_iter()
        .map(|k| metric_d(&empirical_measure_at(z, n_box, k, depth)?, &reference, depth))
        .collect::<Result<_>>()?;
    let mut worst = 0;
    for (i, d) in dists.iter().enumerate() {
        if d.upper() > dists[worst].upper() {
            worst = i;
        }
    }
    let max_value = dists.iter().map(|d| d.value).fold(0.0, f64::max);
    let max_upper = dists[worst].upper();
    let membership = if max_upper <= eta {
        Membership::Inside
    } else if max_value > eta {
        Membership::Outside
    } else {
        Membership::Undecided
    };
    Ok(ZReport {
        membership,
        tested: dists.len(),
        spot_check: true,
        max_value,
        max_upper,
        worst_shift: test_window[worst].clone(),
        eta,
    })
}

/// All of Λ_r, or a seeded sample of `cap` of its cells.
pub fn shift_window(bx: &LatticeBox, cap: usize, seed: u64) -> Result<Vec<Vec<i64>>> {
    let n = bx.volume_u64().unwrap_or(u64::MAX);
    if n <= cap as u64 {
        return Ok(bx.cells().collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<i64>> = Vec::with_capacity(cap);
    while out.len() < cap {
        let c: Vec<i64> = (0..bx.dim).map(|_| rng.random_range(bx.lo()..=bx.hi())).collect();
        out.push(c);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ProximitySpec {
    pub samples: usize,
    pub seed: u64,
    pub depth: u64,
    pub max_shifts: usize,
    /// Long-orbit scales N·2^j, j = 1..=scales, for the first point.
    pub scales: u32,
}

impl Default for ProximitySpec {
    fn default() -> Self {
        ProximitySpec { samples: 100, seed: 0, depth: 1, max_shifts: DEFAULT_MAX_SHIFTS, scales: 3 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProximityFailure {
    pub sample: usize,
    pub membership: Membership,
    pub assignment_seed: u64,
    pub offset: Vec<i64>,
    pub worst_shift: Vec<i64>,
    pub value: f64,
    pub tail: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LongOrbitRow {
    pub n: u64,
    pub value: f64,
    pub tail: f64,
    pub max_subcube: f64,
    pub remainder_fraction: f64,
    /// covered fraction · max_subcube + remainder fraction.
    pub bound: f64,
    pub width_bound: bool,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProximityReport {
    pub samples: usize,
    pub shifts_per_sample: usize,
    pub spot_check: bool,
    pub eta: f64,
    pub k: u64,
    /// N = KM, radius of the averaging box.
    pub n: u64,
    pub threshold: f64,
    pub max_d: f64,
    pub max_upper: f64,
    pub failures: Vec<ProximityFailure>,
    pub long_orbit: Vec<LongOrbitRow>,
    pub notes: Vec<String>,
    pub pass: bool,
}

/// A seeded Δ-point: (assignment seed, offset).
pub fn sample_point(sub: &BlockSubshift, seed: u64, i: usize) -> Result<(u64, Vec<i64>, Configuration)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    let a_seed = rng.next_u64();
    let offset = sub.bx.cell(rng.random_range(0..sub.bx.cell_count()?));
    let z = sub.delta_point(&BlockAssignment::seeded(a_seed, sub.len(), sub.dim()), &offset)?;
    Ok((a_seed, offset, z))
}

fn long_orbit(z: &Configuration, sub: &BlockSubshift, reference: &CylinderMeasure, big_n: u64, n: u64, depth: u64) -> Result<Option<LongOrbitRow>> {
    let dec = decompose_generic(big_n, n, sub.dim(), sub.mode())?;
    if dec.target.cell_count().map_or(true, |c| c > LONG_ORBIT_CELL_CAP) {
        return Ok(None);
    }
    let origin = vec![0i64; sub.dim()];
    let whole = metric_d(&empirical_measure_at(z, &dec.target, &origin, depth)?, reference, depth)?;
    let subs: Vec<f64> = dec
        .subcube_origins
        .par_iter()
        .map(|o| Ok(metric_d(&empirical_measure_at(z, &dec.sub, o, depth)?, reference, depth)?.value))
        .collect::<Result<_>>()?;
    let max_subcube = subs.iter().copied().fold(0.0, f64::max);
    let rem = dec.remainder_fraction();
    // Convexity of D over the subcube/remainder split, with D ≤ 1 on the remainder.
    let bound = (1.0 - rem) * max_subcube + rem;
    let width_bound = dec.satisfies_width_bound();
    Ok(Some(LongOrbitRow {
        n,
        value: whole.value,
        tail: whole.tail_bound,
        max_subcube,
        remainder_fraction: rem,
        bound,
        width_bound,
        holds: width_bound && whole.value <= bound + 1e-12,
    }))
}

pub fn proximity_check(sub: &BlockSubshift, mu0: &CylinderMeasure, eta0: f64, spec: &ProximitySpec) -> Result<ProximityReport> {
    if !(eta0 > 0.0) {
        return invalid("η0 must be positive");
    }
    let eta = sub.meta.as_ref().map_or(eta0 / 4.0, |m| m.eta);
    let threshold = 3.0 * eta;
    let k = smallest_k(eta, sub.dim());
    let big_n = k * sub.m().max(1);
    let n_box = LatticeBox::new(sub.dim(), sub.mode(), big_n)?;
    let window = shift_window(&LatticeBox::new(sub.dim(), sub.mode(), 2 * big_n)?, spec.max_shifts, spec.seed)?;
    let reference = mu0.at_depth(spec.depth)?;
    let mut notes = vec![format!("Z membership is spot-checked on {} shifts from Λ_{}", window.len(), 2 * big_n)];

    let mut failures = Vec::new();
    let (mut max_d, mut max_upper) = (0.0f64, 0.0f64);
    let mut long = Vec::new();
    for i in 0..spec.samples {
        let (a_seed, offset, z) = sample_point(sub, spec.seed, i)?;
        let r = membership_z(&z, &n_box, threshold, &reference, &window, spec.depth)?;
        max_d = max_d.max(r.max_value);
        max_upper = max_upper.max(r.max_upper);
        if r.membership != Membership::Inside {
            failures.push(ProximityFailure {
                sample: i,
                membership: r.membership,
                assignment_seed: a_seed,
                offset,
                worst_shift: r.worst_shift,
                value: r.max_value,
                tail: r.max_upper - r.max_value,
            });
        }
        if i == 0 {
            for j in 1..=spec.scales {
                match long_orbit(&z, sub, &reference, big_n, big_n << j, spec.depth)? {
                    Some(row) => long.push(row),
                    None => notes.push(format!("long-orbit scale {} skipped: window too large", big_n << j)),
                }
            }
        }
    }
    let pass = failures.is_empty() && long.iter().all(|r| r.holds);
    Ok(ProximityReport {
        samples: spec.samples,
        shifts_per_sample: window.len(),
        spot_check: true,
        eta,
        k,
        n: big_n,
        threshold,
        max_d,
        max_upper,
        failures,
        long_orbit: long,
        notes,
        pass,
    })
}

#[derive(Clone, Debug)]
pub struct DisjointSpec {
    pub m: u64,
    pub depth: u64,
    pub blocks_per_side: usize,
    pub samples: usize,
    pub seed: u64,
    pub max_shifts: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct DisjointSide {
    pub blocks: usize,
    pub samples: usize,
    /// Points certified outside Z for the other measure.
    pub cross_outside: usize,
    /// Points whose D interval straddles the threshold.
    pub cross_undecided: usize,
    /// Points certified inside Z for their own measure.
    pub self_inside: usize,
    pub min_cross_value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DisjointReport {
    pub distance: MeasureDistance,
    pub eta0: f64,
    pub eta: f64,
    pub k: u64,
    pub m: u64,
    pub threshold: f64,
    pub sides: [DisjointSide; 2],
    pub spot_check: bool,
    pub pass: bool,
}

pub fn disjointness_experiment(mu1: &CylinderMeasure, mu2: &CylinderMeasure, eta0: f64, spec: &DisjointSpec) -> Result<DisjointReport> {
    if !(eta0 > 0.0) {
        return invalid("η0 must be positive");
    }
    let distance = metric_d(mu1, mu2, spec.depth)?;
    if !(distance.value > 3.0 * eta0) {
        return invalid(format!(
            "measures too close: D ∈ [{}, {}] does not exceed 3η0 = {}",
            distance.value,
            distance.upper(),
            3.0 * eta0
        ));
    }
    let eta = eta0 / 4.0;
    let threshold = 3.0 * eta;
    let k = smallest_k(eta, mu1.dim);
    let bx = LatticeBox::new(mu1.dim, mu1.mode, spec.m)?;
    let n_box = LatticeBox::new(mu1.dim, mu1.mode, k * spec.m)?;
    let window = shift_window(&LatticeBox::new(mu1.dim, mu1.mode, 2 * k * spec.m)?, spec.max_shifts, spec.seed)?;
    let measures = [mu1.at_depth(spec.depth)?, mu2.at_depth(spec.depth)?];
    let mut subs = Vec::with_capacity(2);
    for (side, mu) in measures.iter().enumerate() {
        let blocks = sample_block_set(
            mu,
            &bx,
            &SampleSpec {
                eta,
                depth: spec.depth,
                size_lo: BigUint::from(spec.blocks_per_side),
                size_hi: BigUint::from(spec.blocks_per_side + 1),
                seed: spec.seed.wrapping_add(side as u64),
                budget: SAMPLING_BUDGET,
            },
        )?;
        subs.push(build_delta(blocks, None)?);
    }
    let mut sides = Vec::with_capacity(2);
    for side in 0..2 {
        let (own, other) = (&measures[side], &measures[1 - side]);
        let mut row = DisjointSide {
            blocks: subs[side].len(),
            samples: spec.samples,
            cross_outside: 0,
            cross_undecided: 0,
            self_inside: 0,
            min_cross_value: f64::INFINITY,
        };
        for i in 0..spec.samples {
            let (_, _, z) = sample_point(&subs[side], spec.seed ^ (side as u64 + 1), i)?;
            let cross = membership_z(&z, &n_box, threshold, other, &window, spec.depth)?;
            row.cross_outside += (cross.membership == Membership::Outside) as usize;
            row.cross_undecided += (cross.membership == Membership::Undecided) as usize;
            row.min_cross_value = row.min_cross_value.min(cross.max_value);
            let own_z = membership_z(&z, &n_box, threshold, own, &window, spec.depth)?;
            row.self_inside += (own_z.membership == Membership::Inside) as usize;
        }
        sides.push(row);
    }
    let pass = sides.iter().all(|s| s.cross_outside == s.samples);
    let sides: [DisjointSide; 2] = sides.try_into().expect("two sides");
    Ok(DisjointReport { distance, eta0, eta, k, m: spec.m, threshold, sides, spot_check: true, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeMode::*;
    use crate::measures::bernoulli;
    use crate::symbolic::{Alphabet, Pattern};

    #[test]
    fn constant_point_and_dirac() {
        let a = Alphabet::new(2).unwrap();
        let zero = Configuration::constant(a, 1, Positive, 0).unwrap();
        let one = Configuration::constant(a, 1, Positive, 1).unwrap();
        let dirac = bernoulli(&[1.0, 0.0], 1, 1, Positive).unwrap();
        let n_box = LatticeBox::new(1, Positive, 10).unwrap();
        let win: Vec<Vec<i64>> = LatticeBox::new(1, Positive, 20).unwrap().cells().collect();
        let r = membership_z(&zero, &n_box, 0.1, &dirac, &win, 1).unwrap();
        assert_eq!((r.membership, r.max_value), (Membership::Inside, 0.0));
        let r = membership_z(&one, &n_box, 0.1, &dirac, &win, 1).unwrap();
        assert_eq!(r.membership, Membership::Outside);
        assert_eq!(r.max_value, 0.890625);
    }

    #[test]
    fn all_zero_block_has_zero_distance() {
        let a = Alphabet::new(2).unwrap();
        let bx = LatticeBox::new(1, Positive, 3).unwrap();
        let sub = build_delta(vec![Pattern::new(bx, a, vec![0; 4]).unwrap()], None).unwrap();
        let dirac = bernoulli(&[1.0, 0.0], 1, 1, Positive).unwrap();
        let spec = ProximitySpec { samples: 5, scales: 2, ..Default::default() };
        let r = proximity_check(&sub, &dirac, 0.4, &spec).unwrap();
        assert!(r.pass);
        assert_eq!(r.max_d, 0.0);
        assert_eq!(r.long_orbit.len(), 2);
    }

    #[test]
    fn disjointness_guard() {
        let mu = bernoulli(&[0.9, 0.1], 1, 1, Positive).unwrap();
        let spec = DisjointSpec { m: 9, depth: 1, blocks_per_side: 8, samples: 2, seed: 1, max_shifts: 64 };
        assert!(disjointness_experiment(&mu, &mu, 0.1, &spec).is_err());
        let nu = bernoulli(&[0.1, 0.9], 1, 1, Positive).unwrap();
        assert!(disjointness_experiment(&mu, &nu, 0.3, &spec).is_err());
        let r = disjointness_experiment(&mu, &nu, 0.2, &spec).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
