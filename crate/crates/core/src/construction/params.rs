//! Parameter selection for the block construction.

use num_bigint::BigUint;
use num_traits::{FromPrimitive, One};
use serde::Serialize;

use crate::counting::{binary_entropy, q_count_volume};
use crate::error::{invalid, Error, Result};
use crate::lattice::{LatticeBox, LatticeMode};
use crate::measures::{var_bound, SeparatingFamily};
use crate::symbolic::{band_depth, Alphabet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ModeFlag {
    /// Every inequality checked symbolically; Γ_M is never materialized.
    Strict,
    /// User-capped M; failing inequalities become waivers.
    Desk,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamInput {
    pub h0: f64,
    pub beta0: f64,
    pub eta0: f64,
    pub mu0_entropy: f64,
    pub b: u32,
    pub dim: usize,
    pub mode: LatticeMode,
    pub flag: ModeFlag,
    /// Required in DESK mode.
    pub m_cap: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParamCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

fn check(name: &'static str, lhs: f64, rhs: f64) -> ParamCheck {
    ParamCheck { name, lhs, rhs, holds: lhs < rhs }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstructionParams {
    pub input: ParamInput,
    pub eta: f64,
    pub beta: f64,
    pub h1: f64,
    pub k: u64,
    pub epsilon: f64,
    pub delta: f64,
    pub m: u64,
    #[serde(serialize_with = "crate::report::ser_big")]
    pub v_m: BigUint,
    /// Cylinder depth of the ε band.
    pub epsilon_depth: u64,
    pub ln_r_epsilon: f64,
    pub var_epsilon: f64,
    /// D* (normalization bound of D).
    pub d_star: f64,
    pub eps0: f64,
    pub gamma0: f64,
    pub delta0: f64,
    pub n_eps_delta: u64,
    pub n_star: u64,
    /// [V_M h1, V_M(h1+β)): logs of the block-count window.
    pub size_window_log: (f64, f64),
    /// Integer window [lo, hi) for |Γ_M|, when it can be written down.
    #[serde(serialize_with = "ser_window")]
    pub size_window: Option<(BigUint, BigUint)>,
    /// Limit of the normalized upper bound as n grows.
    pub limit_upper: f64,
    pub checks: Vec<ParamCheck>,
    pub waivers: Vec<String>,
    pub warnings: Vec<String>,
}

fn ser_window<S: serde::Serializer>(w: &Option<(BigUint, BigUint)>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match w {
        Some((a, b)) => serde::Serialize::serialize(&[a.to_string(), b.to_string()], s),
        None => s.serialize_none(),
    }
}

impl ConstructionParams {
    pub fn all_checks_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

pub const D_STAR: f64 = 1.0;
pub const EPS0: f64 = 1.0;
pub const GAMMA0: f64 = 0.5;
pub const DELTA0: f64 = 1.0;

/// Largest M the STRICT search will try.
const STRICT_M_LIMIT: u64 = 10_000_000;

/// Smallest K with Kη > 2d D*.
pub fn smallest_k(eta: f64, dim: usize) -> u64 {
    let mut k = 1u64;
    while !(k as f64 * eta > 2.0 * dim as f64 * D_STAR) {
        k += 1;
    }
    k
}

fn volume(dim: usize, mode: LatticeMode, m: u64) -> Option<u64> {
    LatticeBox { dim, mode, radius: m }.volume_u64()
}

fn eq46(v: f64, beta: f64, h1: f64) -> (ParamCheck, ParamCheck) {
    (
        check("ln V_M / V_M < beta", v.ln() / v, beta),
        // e^{V(h1+β)} > e^{V h1} + 1, divided through by e^{V h1}.
        check("ln(1 + e^{-V_M h1}) < V_M beta", (-v * h1).exp().ln_1p(), v * beta),
    )
}

fn big_of(x: f64) -> Result<BigUint> {
    BigUint::from_f64(x).ok_or_else(|| Error::TooLarge(format!("{x} is not a representable count")))
}

/// Smallest integer ≥ e^x.
fn ceil_exp(x: f64) -> Result<BigUint> {
    big_of(x.exp().ceil())
}

/// Smallest integer > e^x.
fn above_exp(x: f64) -> Result<BigUint> {
    big_of(x.exp().floor() + 1.0)
}

pub fn choose_params(input: &ParamInput) -> Result<ConstructionParams> {
    let &ParamInput { h0, beta0, eta0, mu0_entropy, b, dim, mode, flag, m_cap } = input;
    let alphabet = Alphabet::new(b)?;
    LatticeBox::new(dim, mode, 0)?;
    if !(beta0 > 0.0 && eta0 > 0.0) {
        return invalid("β0 and η0 must be positive");
    }
    if !(h0 > 0.0) {
        return Err(Error::Infeasible(format!("h0 = {h0} must be positive")));
    }
    if mu0_entropy > (b as f64).ln() + 1e-12 {
        return invalid(format!("reference entropy {mu0_entropy} exceeds ln b"));
    }
    if h0 >= mu0_entropy {
        return Err(Error::Infeasible(format!("h0 = {h0} is not below the reference entropy {mu0_entropy}")));
    }

    let eta = eta0 / 4.0;
    let beta = beta0.min(mu0_entropy - h0).min(h0) / 20.0;
    let h1 = h0 + 10.0 * beta;
    let k = smallest_k(eta, dim);
    let fam = SeparatingFamily::new(alphabet, dim, mode);

    let mut s = 1u64;
    let epsilon = loop {
        let e = crate::symbolic::pow2_neg(s);
        if e == 0.0 {
            return Err(Error::Infeasible("no dyadic ε satisfies Var(ε) < η/4".into()));
        }
        if var_bound(e, &fam)? < eta / 4.0 && 3.0 * e < EPS0.min(GAMMA0) {
            break e;
        }
        s += 1;
    };
    let var_epsilon = var_bound(epsilon, &fam)?;
    let r = band_depth(epsilon)?.expect("ε < 1");
    let v_r = volume(dim, mode, 1 + r).ok_or_else(|| Error::TooLarge("r(ε) window".into()))?;
    let ln_r_epsilon = v_r as f64 * (b as f64).ln();

    let delta_cap = (DELTA0 / 2.0).min(1.0 / (2.0 * k as f64)).min(beta / ln_r_epsilon);
    let mut delta = delta_cap / 2.0;
    while binary_entropy(delta)? >= beta {
        delta /= 2.0;
    }

    let m = match flag {
        ModeFlag::Strict => {
            let mut m = 1u64;
            loop {
                let v = volume(dim, mode, m).ok_or_else(|| Error::Infeasible("V_M overflowed".into()))? as f64;
                let (a, c) = eq46(v, beta, h1);
                if a.holds && c.holds {
                    break m;
                }
                m += 1;
                if m > STRICT_M_LIMIT {
                    return Err(Error::Infeasible("no M up to 10^7 satisfies the block-size inequalities".into()));
                }
            }
        }
        ModeFlag::Desk => match m_cap {
            Some(m) if m >= 1 => m,
            _ => return invalid("DESK mode needs an M cap of at least 1"),
        },
    };
    let v_m_int = volume(dim, mode, m).ok_or_else(|| Error::TooLarge("V_M".into()))?;
    let v = v_m_int as f64;
    let q = q_count_volume(v_m_int, delta)?;
    let limit_upper = (v * (h1 + beta) + v.ln() + q.log_value + delta * v * ln_r_epsilon) / v;

    let (c46a, c46b) = eq46(v, beta, h1);
    let checks = vec![
        check("2d D* < K eta", 2.0 * dim as f64 * D_STAR, k as f64 * eta),
        check("Var(eps) < eta/4", var_epsilon, eta / 4.0),
        check("3 eps < min(eps0, gamma0)", 3.0 * epsilon, EPS0.min(GAMMA0)),
        check("delta < min(delta0/2, 1/(2K), beta/ln r(eps))", delta, delta_cap),
        check("H(delta) < beta", binary_entropy(delta)?, beta),
        check("Var(eps) + 2 delta D* < eta", var_epsilon + 2.0 * delta * D_STAR, eta),
        check("2d D*/K < eta", 2.0 * dim as f64 * D_STAR / k as f64, eta),
        c46a,
        c46b,
        check("limit of the normalized upper bound < h0 + beta0", limit_upper, h0 + beta0),
    ];

    let mut waivers = Vec::new();
    let mut warnings = Vec::new();
    let size_window_log = (v * h1, v * (h1 + beta));
    let size_window = match flag {
        ModeFlag::Strict => {
            warnings.push(format!(
                "|Γ_M| would need about 10^{:.1} blocks; Γ_M is not materialized",
                size_window_log.0 / std::f64::consts::LN_10
            ));
            None
        }
        ModeFlag::Desk => {
            waivers.extend(checks.iter().filter(|c| !c.holds).map(|c| c.name.to_string()));
            if v * (h0 + beta0).max(h1 + beta) > 700.0 {
                return Err(Error::TooLarge(format!("block counts near e^{:.0} cannot be enumerated", v * (h0 + beta0))));
            }
            let all = BigUint::from(b).pow(v_m_int as u32) + BigUint::one();
            let sandwich = (above_exp(v * h0)?, ceil_exp(v * (h0 + beta0))?.min(all.clone()));
            let eq47 = (ceil_exp(v * h1)?, ceil_exp(v * (h1 + beta))?.min(all));
            let lo = eq47.0.clone().max(sandwich.0.clone());
            let hi = eq47.1.clone().min(sandwich.1.clone());
            if lo < hi {
                Some((lo, hi))
            } else if sandwich.0 < sandwich.1 {
                warnings.push("block-count window empty at this M; using the entropy sandwich alone".into());
                Some(sandwich)
            } else {
                return Err(Error::Infeasible(format!(
                    "no block count strictly between e^(V_M h0) and e^(V_M (h0+β0)) at V_M = {v_m_int}"
                )));
            }
        }
    };

    Ok(ConstructionParams {
        input: input.clone(),
        eta,
        beta,
        h1,
        k,
        epsilon,
        delta,
        m,
        v_m: BigUint::from(v_m_int),
        epsilon_depth: r,
        ln_r_epsilon,
        var_epsilon,
        d_star: D_STAR,
        eps0: EPS0,
        gamma0: GAMMA0,
        delta0: DELTA0,
        n_eps_delta: 1,
        n_star: 1,
        size_window_log,
        size_window,
        limit_upper,
        checks,
        waivers,
        warnings,
    })
}
