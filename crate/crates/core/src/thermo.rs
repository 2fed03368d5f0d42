//! Partition functions, pressure brackets and Shearer-type checks.

use serde::{Deserialize, Serialize};

use crate::enumerate::{sum_patterns, Budget};
use crate::error::{Error, Result};
use crate::group::{lattice_box, GroupContext, GroupKind, SiteSet};
use crate::interval::Interval;
use crate::potential::{Alphabet, FiniteAlphabet, Letter, Pattern, Potential};

/// A Bernoulli product measure: i.i.d. letters with the given weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductMeasure {
    letters: Vec<Letter>,
    weights: Vec<f64>,
}

/// Tolerance on the total mass of a probability vector.
const MASS_TOLERANCE: f64 = 1e-9;

impl ProductMeasure {
    pub fn new(letters: Vec<Letter>, weights: Vec<f64>) -> Result<Self> {
        if letters.is_empty() || letters.len() != weights.len() {
            return Err(Error::Usage(
                "product measure needs one weight per letter".into(),
            ));
        }
        if letters.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Usage(
                "product measure letters must be strictly increasing".into(),
            ));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::Usage(
                "product measure weights must be finite and non-negative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::Usage(format!(
                "product measure weights sum to {total}"
            )));
        }
        Ok(ProductMeasure { letters, weights })
    }

    pub fn uniform(alphabet: &FiniteAlphabet) -> Self {
        let n = alphabet.len();
        ProductMeasure {
            letters: alphabet.letters().to_vec(),
            weights: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(a: Letter) -> Self {
        ProductMeasure {
            letters: vec![a],
            weights: vec![1.0],
        }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, a: Letter) -> f64 {
        self.letters
            .binary_search(&a)
            .map(|i| self.weights[i])
            .unwrap_or(0.0)
    }

    /// Intervals containing the exactly normalized weights `q_a / Σ q`.
    pub fn certified_weights(&self) -> Vec<Interval> {
        let total: Interval = self.weights.iter().map(|&w| Interval::point(w)).sum();
        self.weights
            .iter()
            .map(|&w| {
                let q = Interval::point(w)
                    .checked_div(&total)
                    .expect("positive mass");
                Interval::new(q.lo().max(0.0), q.hi().min(1.0))
            })
            .collect()
    }
}

/// How letters outside the enumeration alphabet are treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationMode {
    /// Compute `Z_F(A, φ)` and bracket `p(A, φ)`.
    Finite,
    /// Compute `Z_F(φ)` over all of `N^F` with a certified remainder and
    /// bracket `p(φ)`.
    Countable,
}

fn pattern_on(f: &SiteSet, w: &[Letter]) -> Pattern {
    Pattern::new(f.clone(), w.to_vec()).expect("sizes match")
}

/// Interval containing `Z_F(A, φ) = Σ_{w ∈ A^F} exp(sup φ_F([w] ∩ A^G))`.
pub fn partition_function(
    p: &dyn Potential,
    alphabet: &FiniteAlphabet,
    f: &SiteSet,
    budget: Budget,
) -> Result<Interval> {
    let a = p.effective_alphabet(alphabet)?;
    sum_patterns(a.letters(), f.len(), budget, |w| {
        Ok(p.sup_cylinder_within(&pattern_on(f, w), &a)?.exp())
    })
}

/// `(s + t)^n - s^n` expanded binomially, for `s, t >= 0`.
fn binomial_excess(s: Interval, t: Interval, n: usize) -> Interval {
    let mut acc = Interval::ZERO;
    let mut binom = Interval::ONE;
    for j in 1..=n {
        binom = (binom * Interval::point((n - j + 1) as f64))
            .checked_div(&Interval::point(j as f64))
            .expect("positive");
        acc = acc + binom * s.powi((n - j) as u32) * t.powi(j as u32);
    }
    acc
}

/// Interval containing `Z_F(φ) = Σ_{w ∈ N^F} exp(sup φ_F([w]))`.
///
/// Patterns in `A^F` are enumerated; the rest is bounded by
/// `(Z_A + t)^{|F|} - Z_A^{|F|}` where `Z_A = Σ_{a ∈ A} exp(sup φ([a]))` and `t`
/// is the single-site tail outside `A`.
pub fn partition_function_countable(
    p: &dyn Potential,
    f: &SiteSet,
    alphabet: &FiniteAlphabet,
    budget: Budget,
) -> Result<Interval> {
    let a = p.effective_alphabet(alphabet)?;
    let head = sum_patterns(a.letters(), f.len(), budget, |w| {
        Ok(p.sup_cylinder(&pattern_on(f, w))?.exp())
    })?;
    let t = p.single_site_tail(&a)?;
    if t.hi() == 0.0 {
        return Ok(head);
    }
    let s: Interval = a
        .letters()
        .iter()
        .map(|&l| p.single_site_sup(l).exp())
        .sum();
    let rest = binomial_excess(s, Interval::new(0.0, t.hi()), f.len());
    Ok(Interval::new(
        head.lo(),
        (head + Interval::new(0.0, rest.hi())).hi(),
    ))
}

fn partition_in_mode(
    p: &dyn Potential,
    f: &SiteSet,
    alphabet: &FiniteAlphabet,
    mode: TruncationMode,
    budget: Budget,
) -> Result<Interval> {
    match mode {
        TruncationMode::Finite => partition_function(p, alphabet, f, budget),
        TruncationMode::Countable => partition_function_countable(p, f, alphabet, budget),
    }
}

/// `ln(z) / n` as an interval.
fn log_per_site(z: Interval, n: usize) -> Result<Interval> {
    let l = z
        .ln()
        .ok_or_else(|| Error::Numeric(format!("partition function {z:?} is not positive")))?;
    l.checked_div(&Interval::point(n as f64))
        .ok_or_else(|| Error::Usage("empty candidate set".into()))
}

/// One candidate of the infimum rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub size: usize,
    pub z: Interval,
    /// `(1/|E|) log Z_E`.
    pub bound: Interval,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UpperBound {
    pub set: SiteSet,
    pub z: Interval,
    /// Certified upper bound on the pressure: `bound.hi()`.
    pub bound: Interval,
    pub trials: Vec<Trial>,
}

/// Upper bound on `p(φ)` (countable mode) or `p(A, φ)` (finite mode) from
/// `p = inf_E (1/|E|) log Z_E`.
pub fn pressure_upper(
    p: &dyn Potential,
    candidates: &[SiteSet],
    alphabet: &FiniteAlphabet,
    mode: TruncationMode,
    budget: Budget,
) -> Result<UpperBound> {
    if candidates.is_empty() {
        return Err(Error::Usage("no candidate sets".into()));
    }
    let mut best: Option<UpperBound> = None;
    let mut trials = Vec::with_capacity(candidates.len());
    for e in candidates {
        if e.is_empty() {
            return Err(Error::Usage("candidate sets must be nonempty".into()));
        }
        let z = partition_in_mode(p, e, alphabet, mode, budget)?;
        let bound = log_per_site(z, e.len())?;
        trials.push(Trial {
            size: e.len(),
            z,
            bound,
        });
        if best.as_ref().is_none_or(|b| bound.hi() < b.bound.hi()) {
            best = Some(UpperBound {
                set: e.clone(),
                z,
                bound,
                trials: Vec::new(),
            });
        }
    }
    let mut best = best.expect("nonempty");
    best.trials = trials;
    Ok(best)
}

/// Shannon entropy `-Σ q_a log q_a`.
pub fn entropy(q: &ProductMeasure) -> Interval {
    q.certified_weights().iter().map(|w| w.neg_xlogx()).sum()
}

/// Interval containing `∫ φ dν_q`.
pub fn mean_energy(p: &dyn Potential, q: &ProductMeasure) -> Result<Interval> {
    p.mean_energy(q.letters(), &q.certified_weights())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBound {
    pub measure: ProductMeasure,
    /// Contains `h(ν_q) + ∫ φ dν_q`; its lower end is a certified lower bound
    /// on the pressure.
    pub value: Interval,
    pub iterations: usize,
}

/// Relative improvement below which the ascent stops.
const ASCENT_TOLERANCE: f64 = 1e-10;

fn objective(p: &dyn Potential, letters: &[Letter], q: &[f64]) -> Result<f64> {
    let qi: Vec<Interval> = q.iter().map(|&v| Interval::point(v)).collect();
    let h: f64 = q
        .iter()
        .map(|&v| if v > 0.0 { -v * v.ln() } else { 0.0 })
        .sum();
    Ok(h + p.mean_energy(letters, &qi)?.mid())
}

fn softmax(v: &[f64]) -> Vec<f64> {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = v.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

fn ascend(
    p: &dyn Potential,
    letters: &[Letter],
    mut q: Vec<f64>,
    max_iter: usize,
) -> Result<(Vec<f64>, f64, usize)> {
    let mut f = objective(p, letters, &q)?;
    let mut it = 0;
    while it < max_iter {
        it += 1;
        let target = softmax(&p.mean_energy_gradient(letters, &q)?);
        let mut eta = 1.0;
        let mut accepted = None;
        while eta > 1e-8 {
            let cand: Vec<f64> = q
                .iter()
                .zip(&target)
                .map(|(a, b)| (1.0 - eta) * a + eta * b)
                .collect();
            let fc = objective(p, letters, &cand)?;
            if fc >= f {
                accepted = Some((cand, fc));
                break;
            }
            eta *= 0.5;
        }
        let Some((cand, fc)) = accepted else { break };
        let gain = fc - f;
        q = cand;
        f = fc;
        if gain <= ASCENT_TOLERANCE * f.abs().max(1.0) {
            break;
        }
    }
    Ok((q, f, it))
}

/// Maximizes `h(ν_q) + ∫ φ dν_q` over Bernoulli measures on the letters of
/// `q0` by damped mean-field iteration `q ← (1-η) q + η softmax(∇E(q))`, and
/// returns a certified lower bound on the pressure.
///
/// The search also starts from the uniform vector; the better end point wins.
pub fn pressure_lower(
    p: &dyn Potential,
    q0: &ProductMeasure,
    max_iter: usize,
) -> Result<LowerBound> {
    let letters = q0.letters().to_vec();
    let uniform = vec![1.0 / letters.len() as f64; letters.len()];
    let (qa, fa, ia) = ascend(p, &letters, q0.weights().to_vec(), max_iter)?;
    let (qb, fb, ib) = ascend(p, &letters, uniform, max_iter)?;
    let (q, iterations) = if fa.is_finite() && fa >= fb {
        (qa, ia)
    } else {
        (qb, ia + ib)
    };
    let total: f64 = q.iter().sum();
    let q: Vec<f64> = q.iter().map(|v| v / total).collect();
    let measure = ProductMeasure {
        letters,
        weights: q,
    };
    let value = entropy(&measure) + mean_energy(p, &measure)?;
    Ok(LowerBound {
        measure,
        value,
        iterations,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderRung {
    pub alphabet_max: Letter,
    pub alphabet_size: usize,
    /// Best upper bound on `p(A_n, φ)` over the candidates within budget.
    pub upper: Interval,
    pub set_size: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureBracket {
    pub mode: TruncationMode,
    pub lower: Interval,
    pub upper: Interval,
    pub witness_set: SiteSet,
    pub witness_q: ProductMeasure,
    pub trials: Vec<Trial>,
    pub ladder: Vec<LadderRung>,
    /// Whether the ladder upper bounds are non-decreasing within their widths.
    pub ladder_monotone: bool,
}

impl PressureBracket {
    pub fn width(&self) -> f64 {
        Interval::point(self.upper.hi())
            .hull(&Interval::point(self.lower.lo()))
            .width()
    }

    /// Whether `v` lies between the certified ends.
    pub fn contains(&self, v: f64) -> bool {
        self.lower.lo() <= v && v <= self.upper.hi()
    }
}

#[derive(Clone, Debug)]
pub struct BracketConfig {
    pub alphabet: FiniteAlphabet,
    pub mode: TruncationMode,
    pub candidates: Vec<SiteSet>,
    /// Alphabets `A_1 ⊆ A_2 ⊆ ...` for the finite-alphabet ladder.
    pub ladder: Vec<FiniteAlphabet>,
    pub max_iter: usize,
    pub budget: Budget,
}

impl BracketConfig {
    /// Mode matching the declared alphabet of `p`, Følner candidates within
    /// budget up to `max_radius`, and no ladder.
    pub fn standard(
        p: &dyn Potential,
        alphabet: FiniteAlphabet,
        max_radius: usize,
        budget: Budget,
    ) -> Result<Self> {
        let mode = match p.alphabet() {
            Alphabet::Countable => TruncationMode::Countable,
            Alphabet::Finite(_) => TruncationMode::Finite,
        };
        let eff = p.effective_alphabet(&alphabet)?;
        let candidates = folner_candidates(p.group(), eff.len(), max_radius, budget)?;
        Ok(BracketConfig {
            alphabet,
            mode,
            candidates,
            ladder: Vec::new(),
            max_iter: 10_000,
            budget,
        })
    }
}

/// Følner sets `F_0, F_1, ...` up to `max_radius` whose pattern count fits the
/// budget; at least the first one.
pub fn folner_candidates(
    group: &GroupContext,
    alphabet_len: usize,
    max_radius: usize,
    budget: Budget,
) -> Result<Vec<SiteSet>> {
    let mut out = Vec::new();
    for n in 0..=max_radius {
        let f = group.folner_set(n)?;
        if budget.check(alphabet_len, f.len()).is_err() {
            break;
        }
        out.push(f);
    }
    if out.is_empty() {
        budget.check(alphabet_len, 1)?;
        out.push(SiteSet::singleton(group.identity().clone()));
    }
    Ok(out)
}

/// Boxes `[0, L-1] × {0}^{d-1}` for `L = 1..=max_len` on a lattice.
pub fn segment_candidates(group: &GroupContext, max_len: usize) -> Result<Vec<SiteSet>> {
    let GroupKind::Lattice { d, .. } = group.kind() else {
        return Err(Error::Usage("segments need a lattice group".into()));
    };
    Ok((1..=max_len as i64)
        .map(|l| {
            let mut hi = vec![0i64; *d];
            hi[0] = l - 1;
            lattice_box(&vec![0; *d], &hi)
        })
        .collect())
}

/// Brackets the pressure between the variational lower bound over Bernoulli
/// measures and the infimum rule over the candidate sets.
pub fn pressure_bracket(p: &dyn Potential, cfg: &BracketConfig) -> Result<PressureBracket> {
    let alphabet = p.effective_alphabet(&cfg.alphabet)?;
    let upper = pressure_upper(p, &cfg.candidates, &alphabet, cfg.mode, cfg.budget)?;
    let lower = pressure_lower(p, &ProductMeasure::uniform(&alphabet), cfg.max_iter)?;
    if lower.value.lo() > upper.bound.hi() {
        return Err(Error::Numeric(format!(
            "inconsistent bracket: lower {} exceeds upper {}",
            lower.value.lo(),
            upper.bound.hi()
        )));
    }
    let mut ladder = Vec::new();
    for a in &cfg.ladder {
        let a = p.effective_alphabet(a)?;
        let fits: Vec<SiteSet> = cfg
            .candidates
            .iter()
            .filter(|e| cfg.budget.check(a.len(), e.len()).is_ok())
            .cloned()
            .collect();
        if fits.is_empty() {
            cfg.budget.check(a.len(), 1)?;
            continue;
        }
        let u = pressure_upper(p, &fits, &a, TruncationMode::Finite, cfg.budget)?;
        ladder.push(LadderRung {
            alphabet_max: a.max(),
            alphabet_size: a.len(),
            upper: u.bound,
            set_size: u.set.len(),
        });
    }
    let ladder_monotone = ladder
        .windows(2)
        .all(|w| w[1].upper.hi() >= w[0].upper.lo());
    Ok(PressureBracket {
        mode: cfg.mode,
        lower: lower.value,
        upper: upper.bound,
        witness_set: upper.set,
        witness_q: lower.measure,
        trials: upper.trials,
        ladder,
        ladder_monotone,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearerReport {
    /// `log Z_F(A, φ + c)`.
    pub lhs: Interval,
    /// `Σ_K (1/k) log Z_K(A, φ + c)`.
    pub rhs: Interval,
    /// The shift `c >= sup |φ|` on `A^G`.
    pub shift: f64,
    /// The inequality is not certainly violated.
    pub holds: bool,
    /// The inequality is certainly satisfied.
    pub certified_strict: bool,
}

/// Checks `Z_F ≤ ∏_K Z_K^{1/k}` for a `k`-cover of `F` by subsets, after
/// shifting `φ` by its sup norm on `A^G` to make it non-negative.
pub fn shearer_check(
    p: &dyn Potential,
    f: &SiteSet,
    cover: &[SiteSet],
    k: usize,
    alphabet: &FiniteAlphabet,
    budget: Budget,
) -> Result<ShearerReport> {
    if k == 0 || f.is_empty() {
        return Err(Error::Usage(
            "shearer check needs k >= 1 and a nonempty F".into(),
        ));
    }
    if let Some(bad) = cover.iter().find(|c| !c.is_subset(f) || c.is_empty()) {
        return Err(Error::Usage(format!(
            "cover member {bad:?} is empty or not inside F"
        )));
    }
    for g in f {
        let hits = cover.iter().filter(|c| c.contains(g)).count();
        if hits < k {
            return Err(Error::Usage(format!(
                "site {g} is covered {hits} < {k} times"
            )));
        }
    }
    let a = p.effective_alphabet(alphabet)?;
    let c = p.sup_norm_on(&a)?;
    let shifted_log = |s: &SiteSet| -> Result<Interval> {
        let z = partition_function(p, &a, s, budget)?;
        let l = z
            .ln()
            .ok_or_else(|| Error::Numeric(format!("partition function {z:?} is not positive")))?;
        Ok(l + Interval::point(c) * s.len() as f64)
    };
    let lhs = shifted_log(f)?;
    let mut rhs = Interval::ZERO;
    for s in cover {
        rhs = rhs + shifted_log(s)?;
    }
    let rhs = rhs.checked_div(&Interval::point(k as f64)).expect("k >= 1");
    Ok(ShearerReport {
        lhs,
        rhs,
        shift: c,
        holds: lhs.lo() <= rhs.hi(),
        certified_strict: lhs.hi() <= rhs.lo(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{Norm, Site};
    use crate::potential::{PairParams, PairPotential, SelfCoefficient, SingleSitePotential};

    fn line() -> GroupContext {
        GroupContext::lattice(1, Norm::Linf).unwrap()
    }

    fn zero(q: usize) -> SingleSitePotential {
        SingleSitePotential::finite(line(), 1.0, vec![0.0; q]).unwrap()
    }

    #[test]
    fn zero_potential_counts_patterns() {
        let p = zero(2);
        let f = line().folner_set(2).unwrap();
        let z = partition_function(&p, &FiniteAlphabet::first(2), &f, Budget::default()).unwrap();
        assert_eq!(z, Interval::point(32.0));
    }

    #[test]
    fn single_site_partition_factorizes() {
        let p = SingleSitePotential::finite(line(), 1.0, vec![0.0, -1.0]).unwrap();
        let f = SiteSet::from(vec![Site::new(&[0]), Site::new(&[1])]);
        let z = partition_function(&p, &FiniteAlphabet::first(2), &f, Budget::default()).unwrap();
        let want = (1.0 + (-1.0f64).exp()).powi(2);
        assert!(z.contains(want) && z.width() < 1e-14);
        assert!((want - 1.8711).abs() < 1e-4);
    }

    #[test]
    fn countable_single_site_partition() {
        let p = SingleSitePotential::countable(
            line(),
            1.0,
            SelfCoefficient::Linear {
                slope: 1.0,
                offset: 0.0,
            },
        )
        .unwrap();
        let want = 1.0 / (1.0 - (-1.0f64).exp());
        let mut prev: Option<Interval> = None;
        for n in [2, 5, 10, 40] {
            let z = partition_function_countable(
                &p,
                &SiteSet::singleton(Site::new(&[0])),
                &FiniteAlphabet::up_to(n),
                Budget::default(),
            )
            .unwrap();
            assert!(z.contains(want), "{n}: {z:?}");
            if let Some(prev) = prev {
                assert!(z.width() <= prev.width() + 1e-15);
            }
            prev = Some(z);
        }
        // Two sites: Z_F = Z_1^2 for a single-site potential.
        let f = SiteSet::from(vec![Site::new(&[0]), Site::new(&[1])]);
        let z = partition_function_countable(&p, &f, &FiniteAlphabet::up_to(3), Budget::default())
            .unwrap();
        assert!(z.contains(want * want), "{z:?}");
    }

    #[test]
    fn finite_alphabet_has_no_remainder() {
        let p = SingleSitePotential::finite(line(), 1.0, vec![0.3, -1.0, 0.1]).unwrap();
        let f = SiteSet::from(vec![Site::new(&[0]), Site::new(&[2])]);
        let a = FiniteAlphabet::first(3);
        assert_eq!(
            partition_function_countable(&p, &f, &a, Budget::default()).unwrap(),
            partition_function(&p, &a, &f, Budget::default()).unwrap()
        );
    }

    #[test]
    fn entropy_values() {
        let u = ProductMeasure::uniform(&FiniteAlphabet::first(2));
        assert!(entropy(&u).contains(std::f64::consts::LN_2));
        assert_eq!(entropy(&ProductMeasure::point_mass(3)), Interval::ZERO);
        let q = ProductMeasure::new(vec![0, 1], vec![0.25, 0.75]).unwrap();
        let want = -0.25 * 0.25f64.ln() - 0.75 * 0.75f64.ln();
        assert!(entropy(&q).contains(want));
        assert!((want - 0.56234).abs() < 1e-5);
    }

    #[test]
    fn product_entropy_is_additive() {
        let q = ProductMeasure::new(vec![0, 1, 2], vec![0.2, 0.5, 0.3]).unwrap();
        let h = entropy(&q).mid();
        for n in 1..=4u32 {
            let mut hf = 0.0;
            for i in 0..3usize.pow(n) {
                let mut i = i;
                let mut pr = 1.0;
                for _ in 0..n {
                    pr *= q.weights()[i % 3];
                    i /= 3;
                }
                hf -= pr * pr.ln();
            }
            assert!((hf - n as f64 * h).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_potential_bracket_collapses() {
        let p = zero(2);
        let cfg =
            BracketConfig::standard(&p, FiniteAlphabet::first(2), 3, Budget::default()).unwrap();
        let b = pressure_bracket(&p, &cfg).unwrap();
        assert!(b.contains(std::f64::consts::LN_2));
        assert!(b.width() < 1e-9);
    }

    #[test]
    fn single_site_bracket_meets_softmax() {
        let p = SingleSitePotential::finite(line(), 1.0, vec![0.0, -1.0, 0.5]).unwrap();
        let cfg =
            BracketConfig::standard(&p, FiniteAlphabet::first(3), 3, Budget::default()).unwrap();
        let b = pressure_bracket(&p, &cfg).unwrap();
        let want = (1.0 + (-1.0f64).exp() + 0.5f64.exp()).ln();
        assert!(b.contains(want));
        assert!(b.width() < 1e-6, "{}", b.width());
    }

    #[test]
    fn upper_bounds_on_segments_decrease() {
        let g = line();
        let p = PairPotential::ising_chain(g.clone(), 1.0, 0.8, 0.2).unwrap();
        let segs = segment_candidates(&g, 10).unwrap();
        let mut prev = f64::INFINITY;
        for s in &segs {
            let u = pressure_upper(
                &p,
                std::slice::from_ref(s),
                &FiniteAlphabet::first(2),
                TruncationMode::Finite,
                Budget::default(),
            )
            .unwrap();
            assert!(u.bound.hi() <= prev + 1e-12);
            prev = u.bound.hi();
        }
    }

    #[test]
    fn shearer_trivial_cover_and_disjoint_union() {
        let g = GroupContext::lattice(2, Norm::Linf).unwrap();
        let params = PairParams {
            q: 2,
            field: vec![0.1, -0.4],
            couplings: vec![crate::potential::PairCoupling {
                offset: vec![1, 0],
                matrix: vec![vec![0.5, -0.2], vec![0.3, 0.9]],
            }],
        };
        let p = PairPotential::new(g, 1.0, params).unwrap();
        let f = lattice_box(&[0, 0], &[1, 2]);
        let a = FiniteAlphabet::first(2);
        let r = shearer_check(&p, &f, std::slice::from_ref(&f), 1, &a, Budget::default()).unwrap();
        assert!(r.holds && (r.lhs.mid() - r.rhs.mid()).abs() < 1e-12);
        let left = lattice_box(&[0, 0], &[0, 2]);
        let right = lattice_box(&[1, 0], &[1, 2]);
        let r = shearer_check(&p, &f, &[left, right], 1, &a, Budget::default()).unwrap();
        assert!(r.holds);
        let err = shearer_check(
            &p,
            &f,
            &[lattice_box(&[0, 0], &[0, 0])],
            1,
            &a,
            Budget::default(),
        );
        assert!(matches!(err, Err(Error::Usage(_))));
    }

    #[test]
    fn translation_invariance_of_partition_functions() {
        let g = GroupContext::lattice(2, Norm::Linf).unwrap();
        let p = PairPotential::new(
            g.clone(),
            0.7,
            PairParams {
                q: 3,
                field: vec![0.0, 0.2, -0.1],
                couplings: vec![crate::potential::PairCoupling {
                    offset: vec![0, 1],
                    matrix: vec![
                        vec![1.0, 0.0, -0.5],
                        vec![0.0, 0.3, 0.2],
                        vec![-0.5, 0.2, 0.8],
                    ],
                }],
            },
        )
        .unwrap();
        let f = lattice_box(&[0, 0], &[1, 1]);
        let a = FiniteAlphabet::first(3);
        let z = partition_function(&p, &a, &f, Budget::default()).unwrap();
        let t = Site::new(&[5, -3]);
        let zt = partition_function(&p, &a, &g.translate_right(&f, &t), Budget::default()).unwrap();
        assert_eq!(z.lo().to_bits(), zt.lo().to_bits());
        assert_eq!(z.hi().to_bits(), zt.hi().to_bits());
    }
}
