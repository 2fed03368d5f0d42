//! The long-range countable-state Potts family
//! `φ(x) = -β Σ_{g ∈ G} c(g, x(1_G)) 1{x(1_G) = x(g)}`
//! with `c(1_G, n)` a closed-form self coefficient and `c(g, n) = C(g)` for
//! `g != 1_G`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupContext, Site, SiteSet};
use crate::interval::Interval;

use super::single_site::{check_letters, verify_self_tail};
use super::{
    Alphabet, BoundaryCondition, Coupling, CouplingTails, FiniteAlphabet, Letter, Pattern,
    Potential, SelfCoefficient, TailChecks, VariationProfile, Verdict, DEFAULT_HORIZON,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PottsParams {
    #[serde(rename = "self")]
    pub self_coefficient: SelfCoefficient,
    pub coupling: Coupling,
}

/// Outcome of checking the two summability conditions on the coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    /// `Σ_{m>=1} |E_{m+1} \ E_m| Σ_{g ∉ E_m} C(g)`.
    pub condition1_bound: Interval,
    pub condition1: Verdict,
    /// Growth exponent `M` that was tested.
    pub growth_m: f64,
    /// `M log n <= c(1_G, n)` for all large `n`, at the tested `M`.
    pub condition2: Verdict,
    /// The same for every `M > 0`.
    pub condition2_all: Verdict,
    /// Largest sampled `n` with `M log n > c(1_G, n)`, if any.
    pub last_sampled_failure: Option<u64>,
    pub horizon: usize,
}

impl ConditionReport {
    pub fn both_verified(&self) -> bool {
        self.condition1 == Verdict::Verified && self.condition2_all == Verdict::Verified
    }
}

#[derive(Clone, Debug)]
pub struct CountablePotts {
    group: GroupContext,
    beta: f64,
    self_coefficient: SelfCoefficient,
    coupling: Coupling,
    tails: CouplingTails,
    profile: VariationProfile,
}

/// Exterior sites farther than this from a pattern are bounded through the
/// coupling tail rather than enumerated, once that tail is negligible.
const NEGLIGIBLE_TAIL: f64 = 1e-15;
/// Largest exterior neighbourhood enumerated for cylinder bounds.
const MAX_NEIGHBOURHOOD: usize = 200_000;

impl CountablePotts {
    pub fn new(group: GroupContext, beta: f64, params: PottsParams) -> Result<Self> {
        params.self_coefficient.validate().map_err(|e| match e {
            Error::Config { message, .. } => Error::config("params.self", message),
            e => e,
        })?;
        params.coupling.validate(&group).map_err(|e| match e {
            Error::Config { path, message } => Error::config(format!("params.{path}"), message),
            e => e,
        })?;
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::config(
                "beta",
                "the countable Potts family needs beta > 0",
            ));
        }
        let tails = params.coupling.tails(&group, DEFAULT_HORIZON)?;
        let h = match tails.range() {
            Some(r) => r,
            None => DEFAULT_HORIZON,
        };
        let b = Interval::point(beta);
        let mut deltas = Vec::with_capacity(h + 1);
        let mut shell = Vec::with_capacity(h + 1);
        for m in 1..=h.max(1) {
            deltas.push((b * tails.tail(m)).hi());
            shell.push((b * tails.shell_weighted(m)).hi());
        }
        if tails.range().is_some() {
            deltas.push(0.0);
            shell.push(0.0);
        }
        let profile = VariationProfile::from_tables(deltas, shell);
        Ok(CountablePotts {
            group,
            beta,
            self_coefficient: params.self_coefficient,
            coupling: params.coupling,
            tails,
            profile,
        })
    }

    /// `c(1_G, n) = n` and `C(g) = scale·λ^{|g|}`.
    pub fn geometric(group: GroupContext, beta: f64, scale: f64, lambda: f64) -> Result<Self> {
        Self::new(
            group,
            beta,
            PottsParams {
                self_coefficient: SelfCoefficient::Linear {
                    slope: 1.0,
                    offset: 0.0,
                },
                coupling: Coupling::Geometric { scale, lambda },
            },
        )
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(
            self.group.clone(),
            beta,
            PottsParams {
                self_coefficient: self.self_coefficient.clone(),
                coupling: self.coupling.clone(),
            },
        )
    }

    pub fn self_coefficient(&self) -> &SelfCoefficient {
        &self.self_coefficient
    }

    pub fn coupling(&self) -> &Coupling {
        &self.coupling
    }

    pub fn coupling_tails(&self) -> &CouplingTails {
        &self.tails
    }

    /// `C(g)` without the inverse temperature; zero at the identity.
    pub fn c(&self, g: &Site) -> Interval {
        self.coupling.value(&self.group, g)
    }

    /// `Σ_{g != 1_G} C(g)` without the inverse temperature.
    pub fn coupling_total(&self) -> Interval {
        self.tails.total()
    }

    /// `J(k, o) = C(o k^{-1}) + C(k o^{-1})`, the weight of the unordered pair.
    fn pair_weight(&self, k: &Site, o: &Site) -> Interval {
        self.c(&self.group.mul_inv(o, k)) + self.c(&self.group.mul_inv(k, o))
    }

    /// Checks declared tails against explicit sums: coupling tails on the ball
    /// of radius `verify_radius`, self tails at the sample letters.
    pub fn verify_tails(&self, checks: &TailChecks) -> Result<()> {
        verify_self_tail(&self.self_coefficient, self.beta, checks)?;
        let ball = self.group.ball(checks.verify_radius)?;
        for k in 1..=checks.verify_radius {
            let explicit: Interval = ball
                .iter()
                .filter(|s| self.group.word_length(s) >= k)
                .map(|s| self.c(s))
                .sum();
            if explicit.lo() > self.tails.tail(k).hi() {
                return Err(Error::config(
                    "tails.verify_radius",
                    format!(
                        "coupling tail from word length {k} is {} but the ball sum is {}",
                        self.tails.tail(k).hi(),
                        explicit.lo()
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Checks the summability condition on `C` and the growth condition
    /// `M log n <= c(1_G, n)`, sampling `n` up to `horizon`.
    pub fn check_example_conditions(&self, horizon: usize, growth_m: f64) -> ConditionReport {
        let bound = self.tails.shell_weighted(1);
        let condition1 = if bound.hi().is_finite() {
            Verdict::Verified
        } else {
            Verdict::Inconclusive
        };
        let mut last_failure = None;
        for n in 2..=horizon.max(2) as u64 {
            let lhs = Interval::point(n as f64).ln().expect("positive") * growth_m;
            let rhs = self
                .self_coefficient
                .value(n.min(u32::MAX as u64) as Letter);
            if lhs.lo() > rhs.hi() {
                last_failure = Some(n);
            }
        }
        ConditionReport {
            condition1_bound: bound,
            condition1,
            growth_m,
            condition2: self.self_coefficient.dominates_log(growth_m),
            condition2_all: self.self_coefficient.dominates_every_log(),
            last_sampled_failure: last_failure,
            horizon,
        }
    }

    /// Radius `R` such that exterior sites outside `S^R F` contribute at most
    /// `|F| Σ_{|g| > R} C(g)`, which is then carried as an interval.
    fn neighbourhood(&self, f: &SiteSet) -> Result<(SiteSet, Interval)> {
        let n = f.len() as f64;
        let mut r = self.tails.range().unwrap_or(1);
        loop {
            let far = self.tails.tail(r + 1) * n;
            let big = self.group.ball_size(r + 1)?.saturating_mul(f.len()) > MAX_NEIGHBOURHOOD;
            if far.hi() <= NEGLIGIBLE_TAIL || self.tails.range().is_some() || big {
                let near = self
                    .group
                    .product_set(&self.group.ball(r)?, f)?
                    .difference(f);
                return Ok((near, Interval::new(0.0, far.hi())));
            }
            r += 1;
        }
    }

    /// `Σ_{g ∈ F} c(1_G, w_g) + Σ_{g != g' ∈ F} C(g' g^{-1}) 1{w_g = w_{g'}}`.
    fn interior_energy(&self, w: &Pattern) -> Interval {
        let mut acc = Interval::ZERO;
        let sites = w.support().as_slice();
        let letters = w.letters();
        for (i, g) in sites.iter().enumerate() {
            acc = acc + self.self_coefficient.value(letters[i]);
            for j in i + 1..sites.len() {
                if letters[i] == letters[j] {
                    acc = acc + self.pair_weight(g, &sites[j]);
                }
            }
        }
        acc
    }

    /// Per exterior site, the agreement weight `Σ_{g: w_g = a} C(o g^{-1})`
    /// for each letter `a` used by the pattern.
    fn exterior_weights(&self, w: &Pattern, near: &SiteSet) -> Vec<BTreeMap<Letter, Interval>> {
        near.iter()
            .map(|o| {
                let mut by_letter: BTreeMap<Letter, Interval> = BTreeMap::new();
                for (g, a) in w.iter() {
                    let c = self.c(&self.group.mul_inv(o, g));
                    let e = by_letter.entry(a).or_insert(Interval::ZERO);
                    *e = *e + c;
                }
                by_letter
            })
            .collect()
    }
}

impl Potential for CountablePotts {
    fn group(&self) -> &GroupContext {
        &self.group
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn alphabet(&self) -> Alphabet {
        Alphabet::Countable
    }

    fn describe(&self) -> String {
        format!(
            "countable Potts potential, self={:?}, coupling={:?}, beta={}",
            self.self_coefficient, self.coupling, self.beta
        )
    }

    fn eval_at(&self, g: &Site, x: &BoundaryCondition) -> Interval {
        let a = x.letter(g);
        let others = x.overrides().iter().filter(|(s, _)| s != g);
        let agree = if a == x.background() {
            let off: Interval = others.map(|(s, _)| self.c(&self.group.mul_inv(s, g))).sum();
            self.tails.total() - off
        } else {
            others
                .filter(|(_, b)| *b == a)
                .map(|(s, _)| self.c(&self.group.mul_inv(s, g)))
                .sum()
        };
        // The subtraction above can dip below zero by rounding only.
        let agree = Interval::new(agree.lo().max(0.0), agree.hi().max(0.0));
        -((self.self_coefficient.value(a) + agree) * self.beta)
    }

    fn profile(&self) -> Option<&VariationProfile> {
        Some(&self.profile)
    }

    /// Attained by an exterior whose letters all differ from those of `w`.
    fn sup_cylinder(&self, w: &Pattern) -> Result<Interval> {
        self.validate_pattern(w)?;
        Ok(-(self.interior_energy(w) * self.beta))
    }

    fn inf_cylinder(&self, w: &Pattern) -> Result<Interval> {
        self.validate_pattern(w)?;
        let (near, far) = self.neighbourhood(w.support())?;
        let mut acc = self.interior_energy(w);
        for by_letter in self.exterior_weights(w, &near) {
            let best = by_letter.values().fold(Interval::ZERO, |m, v| m.max(v));
            acc = acc + best;
        }
        Ok(-((acc + far) * self.beta))
    }

    fn sup_cylinder_within(&self, w: &Pattern, alphabet: &FiniteAlphabet) -> Result<Interval> {
        self.validate_pattern(w)?;
        let used: Vec<Letter> = w.letters().to_vec();
        if alphabet.letters().iter().any(|a| !used.contains(a)) {
            return self.sup_cylinder(w);
        }
        let (near, far) = self.neighbourhood(w.support())?;
        let mut acc = self.interior_energy(w);
        for by_letter in self.exterior_weights(w, &near) {
            let least = alphabet
                .letters()
                .iter()
                .map(|a| by_letter.get(a).copied().unwrap_or(Interval::ZERO))
                .reduce(|m, v| m.min(&v))
                .expect("nonempty alphabet");
            acc = acc + least;
        }
        let far = Interval::new(0.0, (far * (1.0 / alphabet.len() as f64)).hi());
        Ok(-((acc + far) * self.beta))
    }

    fn single_site_sup(&self, a: Letter) -> Interval {
        -(self.self_coefficient.value(a) * self.beta)
    }

    fn single_site_tail(&self, alphabet: &FiniteAlphabet) -> Result<Interval> {
        let gaps: Interval = alphabet.gaps().map(|a| self.single_site_sup(a).exp()).sum();
        Ok(gaps
            + self
                .self_coefficient
                .tail(self.beta, alphabet.max() as u64 + 1)?)
    }

    fn energy_change_exact(
        &self,
        k: &SiteSet,
        to: &[Letter],
        x: &BoundaryCondition,
    ) -> Option<Interval> {
        if k.len() != to.len() {
            return None;
        }
        let b = x.background();
        let from: Vec<Letter> = k.iter().map(|s| x.letter(s)).collect();
        let total2 = self.tails.total() * 2.0;
        let mut acc = Interval::ZERO;
        let sites = k.as_slice();
        for (i, s) in sites.iter().enumerate() {
            for j in i + 1..sites.len() {
                let now = (to[i] == to[j]) as i32 - (from[i] == from[j]) as i32;
                if now != 0 {
                    acc = acc + self.pair_weight(s, &sites[j]) * now as f64;
                }
            }
        }
        for (i, s) in sites.iter().enumerate() {
            if to[i] == from[i] {
                continue;
            }
            acc = acc + self.self_coefficient.value(to[i]) - self.self_coefficient.value(from[i]);
            let mut seen = Interval::ZERO;
            for (o, c) in x.overrides() {
                if k.contains(o) {
                    continue;
                }
                let j = self.pair_weight(s, o);
                seen = seen + j;
                let now = (to[i] == *c) as i32 - (from[i] == *c) as i32;
                if now != 0 {
                    acc = acc + j * now as f64;
                }
            }
            let now = (to[i] == b) as i32 - (from[i] == b) as i32;
            if now != 0 {
                for o in sites {
                    if o != s {
                        seen = seen + self.pair_weight(s, o);
                    }
                }
                let rest = total2 - seen;
                let rest = Interval::new(rest.lo().max(0.0), rest.hi().max(0.0));
                acc = acc + rest * now as f64;
            }
        }
        Some(-(acc * self.beta))
    }

    fn mean_energy(&self, letters: &[Letter], q: &[Interval]) -> Result<Interval> {
        check_letters(self, letters, q.len())?;
        let mut acc = Interval::ZERO;
        for (&a, &qa) in letters.iter().zip(q) {
            acc = acc + qa * self.self_coefficient.value(a) + qa * qa * self.tails.total();
        }
        Ok(-(acc * self.beta))
    }

    fn mean_energy_gradient(&self, letters: &[Letter], q: &[f64]) -> Result<Vec<f64>> {
        check_letters(self, letters, q.len())?;
        let total = self.tails.total().mid();
        Ok(letters
            .iter()
            .zip(q)
            .map(|(&a, &qa)| -self.beta * (self.self_coefficient.value(a).mid() + 2.0 * total * qa))
            .collect())
    }

    fn sup_norm_on(&self, alphabet: &FiniteAlphabet) -> Result<f64> {
        Ok(alphabet
            .letters()
            .iter()
            .map(|&a| ((self.self_coefficient.value(a) + self.tails.total()) * self.beta).hi())
            .fold(0.0, f64::max))
    }

    fn as_potts(&self) -> Option<&CountablePotts> {
        Some(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Norm;
    use crate::potential::{eval_phi, phi_f, v_f};

    fn line_potts(beta: f64) -> CountablePotts {
        let g = GroupContext::lattice(1, Norm::Linf).unwrap();
        CountablePotts::geometric(g, beta, 1.0, 0.5).unwrap()
    }

    #[test]
    fn constant_configuration_energy() {
        let p = line_potts(1.0);
        let v = eval_phi(&p, &BoundaryCondition::constant(1));
        assert!(v.contains(-3.0), "{v:?}");
        assert!(v.width() < 1e-12);
    }

    #[test]
    fn isolated_letter_sees_only_itself() {
        let p = line_potts(1.0);
        let x = BoundaryCondition::new(0, [(Site::new(&[0]), 5)]);
        assert_eq!(eval_phi(&p, &x), Interval::point(-5.0));
    }

    #[test]
    fn single_site_cylinder_supremum() {
        let p = line_potts(1.0);
        let w = Pattern::new(SiteSet::singleton(Site::new(&[0])), vec![3]).unwrap();
        assert_eq!(p.sup_cylinder(&w).unwrap(), Interval::point(-3.0));
        // Every neighbour agreeing gives the infimum -(3 + 2).
        assert!(p.inf_cylinder(&w).unwrap().contains(-5.0));
    }

    #[test]
    fn variation_profile_on_the_line() {
        let p = line_potts(1.0);
        let prof = p.profile().unwrap();
        for m in 1..20 {
            assert!(prof.delta(m) >= 4.0 * 0.5f64.powi(m as i32));
            assert!(prof.delta(m + 1) <= prof.delta(m));
        }
        // V(φ) = Σ_m 2·4·2^{-m} = 8
        assert!((prof.total() - 8.0).abs() < 1e-9 && prof.total() >= 8.0);
        let f = SiteSet::singleton(Site::new(&[0]));
        assert!((v_f(&p, &f).unwrap().hi() - 8.0).abs() < 1e-9);
    }

    #[test]
    fn exact_energy_change_matches_a_large_window() {
        let p = line_potts(0.7);
        let g = p.group().clone();
        let x = BoundaryCondition::new(
            2,
            [
                (Site::new(&[-1]), 0),
                (Site::new(&[1]), 1),
                (Site::new(&[3]), 0),
            ],
        );
        let k = SiteSet::from(vec![Site::new(&[0]), Site::new(&[1])]);
        for to in [[0, 0], [2, 1], [1, 2], [0, 2], [4, 4]] {
            let exact = p.energy_change_exact(&k, &to, &x).unwrap();
            let y = x.with_pattern(&Pattern::new(k.clone(), to.to_vec()).unwrap());
            let window = g.folner_set(70).unwrap();
            let approx = phi_f(&p, &window, &y) - phi_f(&p, &window, &x);
            assert!(
                (exact.mid() - approx.mid()).abs() < 1e-12,
                "{to:?}: {exact:?} vs {approx:?}"
            );
        }
    }

    #[test]
    fn restricted_supremum_is_bracketed() {
        let p = line_potts(1.0);
        let f = SiteSet::from(vec![Site::new(&[0]), Site::new(&[1])]);
        let w = Pattern::new(f, vec![0, 1]).unwrap();
        let a = FiniteAlphabet::up_to(1);
        let within = p.sup_cylinder_within(&w, &a).unwrap();
        let full = p.sup_cylinder(&w).unwrap();
        let inf = p.inf_cylinder(&w).unwrap();
        assert!(within.hi() <= full.hi() && within.lo() >= inf.lo());
        // A third letter lets the exterior avoid both.
        let wide = FiniteAlphabet::up_to(2);
        assert_eq!(p.sup_cylinder_within(&w, &wide).unwrap(), full);
    }

    #[test]
    fn example_conditions() {
        let p = line_potts(1.0);
        let r = p.check_example_conditions(1000, 5.0);
        assert!(r.condition1_bound.contains(8.0));
        assert!(r.both_verified());
        let g = GroupContext::lattice(1, Norm::Linf).unwrap();
        let log = CountablePotts::new(
            g.clone(),
            3.0,
            PottsParams {
                self_coefficient: SelfCoefficient::Log { scale: 1.0 },
                coupling: Coupling::Geometric {
                    scale: 1.0,
                    lambda: 0.5,
                },
            },
        )
        .unwrap();
        let r = log.check_example_conditions(1000, 2.0);
        assert_eq!(r.condition2, Verdict::Refuted);
        assert!(r.last_sampled_failure.is_some());
        let free = CountablePotts::new(
            g,
            1.0,
            PottsParams {
                self_coefficient: SelfCoefficient::Linear {
                    slope: 1.0,
                    offset: 0.0,
                },
                coupling: Coupling::Table { entries: vec![] },
            },
        )
        .unwrap();
        let r = free.check_example_conditions(100, 1.0);
        assert_eq!(r.condition1_bound, Interval::ZERO);
        assert_eq!(r.condition1, Verdict::Verified);
    }
}
