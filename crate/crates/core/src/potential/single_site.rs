//! Potentials `φ(x) = β f(x(1_G))` depending on one coordinate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupContext, Site};
use crate::interval::Interval;

use super::{
    Alphabet, BoundaryCondition, FiniteAlphabet, Letter, Pattern, Potential, SelfCoefficient,
    TailChecks, VariationProfile,
};

/// Exactly one of `values` (finite alphabet, `f(a) = values[a]`) and
/// `self_coefficient` (countable alphabet, `f(n) = -c(n)`) must be given.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleSiteParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, rename = "self", skip_serializing_if = "Option::is_none")]
    pub self_coefficient: Option<SelfCoefficient>,
}

#[derive(Clone, Debug)]
enum Form {
    Table(Vec<f64>),
    Countable(SelfCoefficient),
}

#[derive(Clone, Debug)]
pub struct SingleSitePotential {
    group: GroupContext,
    beta: f64,
    form: Form,
    profile: VariationProfile,
}

impl SingleSitePotential {
    pub fn new(group: GroupContext, beta: f64, params: SingleSiteParams) -> Result<Self> {
        let form = match (params.values, params.self_coefficient) {
            (Some(v), None) => {
                if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::config(
                        "params.values",
                        "must be a nonempty list of finite numbers",
                    ));
                }
                Form::Table(v)
            }
            (None, Some(c)) => {
                c.validate().map_err(|e| match e {
                    Error::Config { message, .. } => Error::config("params.self", message),
                    e => e,
                })?;
                if !(beta > 0.0) {
                    return Err(Error::config("beta", "a countable alphabet needs beta > 0"));
                }
                Form::Countable(c)
            }
            _ => {
                return Err(Error::config(
                    "params",
                    "give exactly one of `values` and `self`",
                ))
            }
        };
        Ok(SingleSitePotential {
            group,
            beta,
            form,
            profile: VariationProfile::zero(),
        })
    }

    /// Finite-alphabet potential with `f(a) = values[a]`.
    pub fn finite(group: GroupContext, beta: f64, values: Vec<f64>) -> Result<Self> {
        Self::new(
            group,
            beta,
            SingleSiteParams {
                values: Some(values),
                self_coefficient: None,
            },
        )
    }

    /// Countable-alphabet potential with `f(n) = -c(n)`.
    pub fn countable(group: GroupContext, beta: f64, c: SelfCoefficient) -> Result<Self> {
        Self::new(
            group,
            beta,
            SingleSiteParams {
                values: None,
                self_coefficient: Some(c),
            },
        )
    }

    /// `β f(a)`.
    pub fn value(&self, a: Letter) -> Interval {
        match &self.form {
            Form::Table(v) => Interval::point(v[a as usize]) * self.beta,
            Form::Countable(c) => -(c.value(a) * self.beta),
        }
    }

    /// Checks the closed-form single-site tail against explicit partial sums.
    pub fn verify_tails(&self, checks: &TailChecks) -> Result<()> {
        if let Form::Countable(c) = &self.form {
            verify_self_tail(c, self.beta, checks)?;
        }
        Ok(())
    }
}

/// Number of explicit terms compared against a closed-form tail.
const TAIL_CHECK_TERMS: u64 = 4096;

pub(super) fn verify_self_tail(c: &SelfCoefficient, beta: f64, checks: &TailChecks) -> Result<()> {
    for &n0 in &checks.sample_letters {
        let t = c.tail(beta, n0 as u64)?;
        let n0 = n0 as u64;
        let explicit: Interval = (n0..n0 + TAIL_CHECK_TERMS)
            .map(|n| c.weight(beta, n.min(u32::MAX as u64) as Letter))
            .sum();
        if explicit.lo() > t.hi() {
            return Err(Error::config(
                "tails.sample_letters",
                format!(
                    "declared tail from {n0} is {} but the first {TAIL_CHECK_TERMS} terms already sum to {}",
                    t.hi(),
                    explicit.lo()
                ),
            ));
        }
    }
    Ok(())
}

impl Potential for SingleSitePotential {
    fn group(&self) -> &GroupContext {
        &self.group
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn alphabet(&self) -> Alphabet {
        match &self.form {
            Form::Table(v) => Alphabet::Finite(v.len() as u32),
            Form::Countable(_) => Alphabet::Countable,
        }
    }

    fn describe(&self) -> String {
        match &self.form {
            Form::Table(v) => format!(
                "single-site potential on {} letters, beta={}",
                v.len(),
                self.beta
            ),
            Form::Countable(c) => {
                format!("single-site potential -c(n), c={c:?}, beta={}", self.beta)
            }
        }
    }

    fn eval_at(&self, g: &Site, x: &BoundaryCondition) -> Interval {
        self.value(x.letter(g))
    }

    fn profile(&self) -> Option<&VariationProfile> {
        Some(&self.profile)
    }

    fn sup_cylinder(&self, w: &Pattern) -> Result<Interval> {
        self.validate_pattern(w)?;
        Ok(w.letters().iter().map(|&a| self.value(a)).sum())
    }

    fn inf_cylinder(&self, w: &Pattern) -> Result<Interval> {
        self.sup_cylinder(w)
    }

    fn sup_cylinder_within(&self, w: &Pattern, _alphabet: &FiniteAlphabet) -> Result<Interval> {
        self.sup_cylinder(w)
    }

    fn single_site_sup(&self, a: Letter) -> Interval {
        self.value(a)
    }

    fn single_site_tail(&self, alphabet: &FiniteAlphabet) -> Result<Interval> {
        match &self.form {
            Form::Table(v) => Ok((0..v.len() as Letter)
                .filter(|a| !alphabet.contains(*a))
                .map(|a| self.value(a).exp())
                .sum()),
            Form::Countable(c) => {
                let gaps: Interval = alphabet.gaps().map(|a| self.value(a).exp()).sum();
                Ok(gaps + c.tail(self.beta, alphabet.max() as u64 + 1)?)
            }
        }
    }

    fn mean_energy(&self, letters: &[Letter], q: &[Interval]) -> Result<Interval> {
        check_letters(self, letters, q.len())?;
        Ok(letters
            .iter()
            .zip(q)
            .map(|(&a, &qa)| self.value(a) * qa)
            .sum())
    }

    fn mean_energy_gradient(&self, letters: &[Letter], q: &[f64]) -> Result<Vec<f64>> {
        check_letters(self, letters, q.len())?;
        Ok(letters.iter().map(|&a| self.value(a).mid()).collect())
    }

    fn sup_norm_on(&self, alphabet: &FiniteAlphabet) -> Result<f64> {
        let a = self.effective_alphabet(alphabet)?;
        Ok(a.letters()
            .iter()
            .map(|&l| self.value(l).abs_max())
            .fold(0.0, f64::max))
    }
}

pub(super) fn check_letters<P: Potential + ?Sized>(
    p: &P,
    letters: &[Letter],
    n: usize,
) -> Result<()> {
    if letters.len() != n || letters.is_empty() {
        return Err(Error::Usage("weights and letters differ in length".into()));
    }
    let al = p.alphabet();
    if let Some(a) = letters.iter().find(|a| !al.contains(**a)) {
        return Err(Error::Usage(format!(
            "letter {a} outside the alphabet of {}",
            p.describe()
        )));
    }
    Ok(())
}
