//! Dobrushin interdependence estimates and the uniqueness certificate for the
//! countable Potts family.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::enumerate::Budget;
use crate::error::{Error, Result};
use crate::group::{Site, SiteSet};
use crate::interval::Interval;
use crate::potential::{
    BoundaryCondition, ConditionReport, CountablePotts, FiniteAlphabet, Letter, Potential,
};
use crate::specification::{kernel_table, KernelTable};

fn as_potts(p: &dyn Potential) -> Result<&CountablePotts> {
    p.as_potts().ok_or_else(|| {
        Error::Capability(format!(
            "analytic Dobrushin bounds exist only for the countable Potts family, not for {}",
            p.describe()
        ))
    })
}

/// `2 (C(h g^{-1}) + C(g h^{-1}))`, the bound on `ρ_gh` before scaling by `β`;
/// zero when `g = h`.
pub fn rho_bound_example(p: &dyn Potential, g: &Site, h: &Site) -> Result<Interval> {
    let potts = as_potts(p)?;
    let group = p.group();
    group.check_element(g)?;
    group.check_element(h)?;
    if g == h {
        return Ok(Interval::ZERO);
    }
    Ok((potts.c(&group.mul_inv(h, g)) + potts.c(&group.mul_inv(g, h))) * 2.0)
}

/// `4 β Σ_{h != 1_G} C(h)`, an upper bound on `c(γ^{βφ})`.
pub fn dobrushin_constant_bound(p: &dyn Potential, beta: f64) -> Result<Interval> {
    let potts = as_potts(p)?;
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::Usage("beta must be finite and non-negative".into()));
    }
    Ok(potts.coupling_total() * (4.0 * beta))
}

/// `Σ_h β ρ_gh` bound at row `g`: explicit over the ball of radius `r`
/// around `g`, plus `4 β Σ_{|k| > r} C(k)` for the rest.
pub fn row_sum_bound(p: &dyn Potential, beta: f64, g: &Site, r: usize) -> Result<Interval> {
    let potts = as_potts(p)?;
    let group = p.group();
    let ball = group.translate_right(&group.ball(r)?, g);
    let mut acc = Interval::ZERO;
    for h in &ball {
        acc = acc + rho_bound_example(p, g, h)?;
    }
    let rest = potts.coupling_tails().tail(r + 1) * 4.0;
    Ok((acc + Interval::new(0.0, rest.hi())) * beta)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Uniqueness {
    Unique,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertificateMethod {
    AnalyticExampleBound,
    NumericRho,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DobrushinCertificate {
    pub beta: f64,
    pub c_bound: Interval,
    /// `β* = 1 / (4 Σ C)`; absent when the coupling vanishes.
    pub threshold: Option<Interval>,
    pub verdict: Uniqueness,
    pub method: CertificateMethod,
    pub conditions: ConditionReport,
}

/// Horizon for the sampled growth check of the self coefficient.
const CONDITION_HORIZON: usize = 10_000;

/// Certifies uniqueness at inverse temperature `beta` when
/// `4 β Σ C < 1`; refuses when the summability conditions on the
/// coefficients cannot be verified.
pub fn uniqueness_certificate(p: &dyn Potential, beta: f64) -> Result<DobrushinCertificate> {
    let potts = as_potts(p)?;
    let conditions = potts.check_example_conditions(CONDITION_HORIZON, 1.0);
    if !conditions.both_verified() {
        return Err(Error::Capability(format!(
            "certificate refused: coefficient conditions not verified (condition 1: {:?}, condition 2 for all M: {:?})",
            conditions.condition1, conditions.condition2_all
        )));
    }
    let c_bound = dobrushin_constant_bound(p, beta)?;
    let four_c = potts.coupling_total() * 4.0;
    let threshold = if four_c.lo() > 0.0 {
        Some(Interval::ONE.checked_div(&four_c).expect("positive"))
    } else {
        None
    };
    Ok(DobrushinCertificate {
        beta,
        c_bound,
        threshold,
        verdict: if c_bound.hi() < 1.0 {
            Uniqueness::Unique
        } else {
            Uniqueness::Inconclusive
        },
        method: CertificateMethod::AnalyticExampleBound,
        conditions,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoEstimate {
    pub g: Site,
    pub h: Site,
    /// Largest total-variation distance certified below over the sampled
    /// boundary pairs.
    pub lower: f64,
    /// `β ρ` bound from the analytic example bound, when available.
    pub upper: Option<Interval>,
    pub pairs: usize,
}

/// Certified lower bound on the total variation between the true kernels
/// behind two truncated tables: `Σ_a max(0, p(a).lo - q(a).hi)`, in whichever
/// direction is larger.
pub fn tv_lower_bound(p: &KernelTable, q: &KernelTable) -> f64 {
    let one_way = |a: &KernelTable, b: &KernelTable| -> f64 {
        a.entries
            .iter()
            .zip(&b.entries)
            .map(|(x, y)| {
                (Interval::point(x.value.lo()) - Interval::point(y.value.hi()))
                    .lo()
                    .max(0.0)
            })
            .sum()
    };
    one_way(p, q).max(one_way(q, p))
}

/// Samples boundary pairs differing only at `h` and records the largest
/// certified TV distance between the single-site kernels at `g`.
pub fn rho_numeric(
    p: &dyn Potential,
    g: &Site,
    h: &Site,
    alphabet: &FiniteAlphabet,
    trials: usize,
    seed: u64,
) -> Result<RhoEstimate> {
    let group = p.group();
    group.check_element(g)?;
    group.check_element(h)?;
    let a = p.effective_alphabet(alphabet)?;
    let letters = a.letters();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = SiteSet::singleton(g.clone());
    let near: Vec<Site> = group
        .translate_right(&group.ball(2)?, g)
        .iter()
        .filter(|s| *s != g && *s != h)
        .cloned()
        .collect();
    let pick = |rng: &mut ChaCha8Rng| -> Letter { letters[rng.gen_range(0..letters.len())] };
    let mut lower = 0.0f64;
    for t in 0..trials {
        // The first trials use constant backgrounds, the rest random overrides.
        let background = if t < letters.len() {
            letters[t]
        } else {
            pick(&mut rng)
        };
        let mut x = BoundaryCondition::constant(background);
        if t >= letters.len() {
            for s in &near {
                if rng.gen_bool(0.5) {
                    x.set(s.clone(), pick(&mut rng));
                }
            }
        }
        let at_h = pick(&mut rng);
        let mut other = pick(&mut rng);
        if other == at_h && letters.len() > 1 {
            other = letters[(a.index_of(at_h).expect("in A") + 1) % letters.len()];
        }
        let mut x1 = x.clone();
        x1.set(h.clone(), at_h);
        let mut x2 = x;
        x2.set(h.clone(), other);
        let t1 = kernel_table(p, &k, &x1, &a, Budget::default())?;
        let t2 = kernel_table(p, &k, &x2, &a, Budget::default())?;
        lower = lower.max(tv_lower_bound(&t1, &t2));
    }
    let upper = match p.as_potts() {
        Some(_) => Some(rho_bound_example(p, g, h)? * p.beta()),
        None => None,
    };
    Ok(RhoEstimate {
        g: g.clone(),
        h: h.clone(),
        lower,
        upper,
        pairs: trials,
    })
}
