//! Coordinate swaps, energy differences and the Gibbsian kernels `γ_K`.
//!
//! The kernel of a finite set `K` at a boundary `x` is
//! `γ_K([w], x) = exp(φ_*^{τ_{w,v}}(v x_{K^c})) / Σ_{w'} exp(φ_*^{τ_{w',v}}(v x_{K^c}))`
//! for a fixed reference pattern `v`, with the sum over `w' ∉ A^K` bounded by
//! an envelope built from `Δ_K(φ)`, `V_K(φ)` and single-site tails.

use serde::{Deserialize, Serialize};

use crate::enumerate::{map_patterns, Budget};
use crate::error::{Error, Result};
use crate::group::{Site, SiteSet};
use crate::interval::Interval;
use crate::potential::{
    delta_f_bound, phi_f, v_f, BoundaryCondition, FiniteAlphabet, Letter, Pattern, Potential,
};
use crate::thermo::partition_function_countable;

/// The coordinate-wise permutation `τ_{w,v}` exchanging the cylinders `[w]`
/// and `[v]` on `K` and fixing every other configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Swap {
    w: Pattern,
    v: Pattern,
}

impl Swap {
    pub fn new(w: Pattern, v: Pattern) -> Result<Self> {
        if w.support() != v.support() {
            return Err(Error::Usage(
                "swap patterns must share their support".into(),
            ));
        }
        Ok(Swap { w, v })
    }

    pub fn support(&self) -> &SiteSet {
        self.w.support()
    }

    pub fn w(&self) -> &Pattern {
        &self.w
    }

    pub fn v(&self) -> &Pattern {
        &self.v
    }

    pub fn is_identity(&self) -> bool {
        self.w == self.v
    }

    /// Letters that `τ` writes on `K` when applied to `x`, or `None` when `τ`
    /// fixes `x`.
    fn image_on_support(&self, x: &BoundaryCondition) -> Option<&Pattern> {
        let here = x.restrict(self.support());
        if here == self.w {
            Some(&self.v)
        } else if here == self.v {
            Some(&self.w)
        } else {
            None
        }
    }
}

/// `τ_{w,v}(x)`.
pub fn apply_swap(s: &Swap, x: &BoundaryCondition) -> BoundaryCondition {
    match s.image_on_support(x) {
        Some(p) => x.with_pattern(p),
        None => x.clone(),
    }
}

/// Interval containing `φ_F^τ(x) = φ_F(τ^{-1} x) - φ_F(x)`.
pub fn energy_diff_window(
    p: &dyn Potential,
    s: &Swap,
    f: &SiteSet,
    x: &BoundaryCondition,
) -> Interval {
    match s.image_on_support(x) {
        None => Interval::ZERO,
        Some(_) if s.is_identity() => Interval::ZERO,
        Some(_) => {
            let y = apply_swap(s, x);
            f.iter().map(|g| p.eval_at(g, &y) - p.eval_at(g, x)).sum()
        }
    }
}

/// How the limit `φ_*^τ` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitRoute {
    /// Closed form supplied by the potential family.
    Exact,
    /// Finite sum over the window `I^{-1}K` of a finite-range potential.
    Influence,
    /// Finite sum over `E_m^{-1}K` widened by the variation remainder.
    Window(usize),
}

/// Horizon up to which the window remainder is summed shell by shell.
const REMAINDER_HORIZON: usize = 24;
/// Target remainder for the automatic window route.
const WINDOW_TOLERANCE: f64 = 1e-12;
/// Largest automatic window.
const MAX_WINDOW_SITES: usize = 100_000;

fn window_set(p: &dyn Potential, k: &SiteSet, m: usize) -> Result<SiteSet> {
    let group = p.group();
    let e = group.exhaustion().set(m)?;
    group.product_set(&group.inverse_set(&e), k)
}

/// Bound on `Σ_{g ∉ E_m^{-1}K} |φ(g·y) - φ(g·x)|` for `x, y` differing only
/// on `K`: exact shell sizes up to a fixed horizon, then `|K|·tail`.
fn window_remainder(p: &dyn Potential, k: &SiteSet, m: usize) -> Result<f64> {
    let profile = p
        .profile()
        .ok_or_else(|| Error::Capability(format!("{} has no variation data", p.describe())))?;
    let horizon = m.max(REMAINDER_HORIZON);
    let mut acc = Interval::point(profile.tail(horizon)) * k.len() as f64;
    let mut cur = window_set(p, k, m)?;
    for j in m..horizon {
        if profile.delta(j) == 0.0 {
            break;
        }
        let next = window_set(p, k, j + 1)?;
        acc = acc + Interval::point(profile.delta(j)) * (next.len() - cur.len()) as f64;
        cur = next;
    }
    Ok(acc.hi())
}

/// Interval containing `lim_F φ_F(u x_{K^c}) - φ_F(x)` where `u` is the
/// pattern with letters `to` on `K`.
pub fn energy_change_via(
    p: &dyn Potential,
    k: &SiteSet,
    to: &[Letter],
    x: &BoundaryCondition,
    route: LimitRoute,
) -> Result<Interval> {
    if k.len() != to.len() {
        return Err(Error::Usage("letters and support differ in length".into()));
    }
    if k.iter().zip(to).all(|(s, a)| x.letter(s) == *a) {
        return Ok(Interval::ZERO);
    }
    let y = x.with_pattern(&Pattern::new(k.clone(), to.to_vec())?);
    let diff =
        |w: &SiteSet| -> Interval { w.iter().map(|g| p.eval_at(g, &y) - p.eval_at(g, x)).sum() };
    match route {
        LimitRoute::Exact => p.energy_change_exact(k, to, x).ok_or_else(|| {
            Error::Capability(format!(
                "{} has no closed-form energy difference",
                p.describe()
            ))
        }),
        LimitRoute::Influence => {
            let i = p.influence().ok_or_else(|| {
                Error::Capability(format!("{} has no finite influence set", p.describe()))
            })?;
            let group = p.group();
            Ok(diff(&group.product_set(&group.inverse_set(&i), k)?))
        }
        LimitRoute::Window(m) => {
            let w = window_set(p, k, m.max(1))?;
            let r = window_remainder(p, k, m.max(1))?;
            Ok(diff(&w).widen(r))
        }
    }
}

/// The best available route: a closed form, then a finite influence window,
/// then the smallest word-ball window whose remainder is negligible.
pub fn default_route(p: &dyn Potential, k: &SiteSet) -> Result<LimitRoute> {
    let probe: Vec<Letter> = vec![0; k.len()];
    if p.energy_change_exact(k, &probe, &BoundaryCondition::constant(1))
        .is_some()
    {
        return Ok(LimitRoute::Exact);
    }
    if p.influence().is_some() {
        return Ok(LimitRoute::Influence);
    }
    let mut m = 1;
    loop {
        let r = window_remainder(p, k, m)?;
        if r <= WINDOW_TOLERANCE || window_set(p, k, m + 1)?.len() > MAX_WINDOW_SITES {
            return Ok(LimitRoute::Window(m));
        }
        m += 1;
    }
}

/// Interval containing `φ_*^τ(x) = lim_F φ_F^τ(x)`.
pub fn energy_diff_limit(p: &dyn Potential, s: &Swap, x: &BoundaryCondition) -> Result<Interval> {
    match s.image_on_support(x) {
        None => Ok(Interval::ZERO),
        Some(_) if s.is_identity() => Ok(Interval::ZERO),
        Some(to) => {
            let route = default_route(p, s.support())?;
            energy_change_via(p, s.support(), to.letters(), x, route)
        }
    }
}

/// [`energy_diff_limit`] along an explicit route.
pub fn energy_diff_limit_via(
    p: &dyn Potential,
    s: &Swap,
    x: &BoundaryCondition,
    route: LimitRoute,
) -> Result<Interval> {
    match s.image_on_support(x) {
        None => Ok(Interval::ZERO),
        Some(_) if s.is_identity() => Ok(Interval::ZERO),
        Some(to) => energy_change_via(p, s.support(), to.letters(), x, route),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelEntry {
    pub letters: Vec<Letter>,
    pub value: Interval,
}

/// `γ_K([w], x)` for every `w ∈ A^K` plus the mass outside `A^K`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelTable {
    pub k: SiteSet,
    pub boundary: BoundaryCondition,
    pub alphabet: FiniteAlphabet,
    pub reference: Vec<Letter>,
    /// Canonical pattern order.
    pub entries: Vec<KernelEntry>,
    pub tail_mass: Interval,
}

impl KernelTable {
    fn index_of(&self, letters: &[Letter]) -> Option<usize> {
        let mut idx = 0usize;
        for a in letters {
            idx = idx * self.alphabet.len() + self.alphabet.index_of(*a)?;
        }
        Some(idx)
    }

    pub fn entry(&self, letters: &[Letter]) -> Option<Interval> {
        if letters.len() != self.k.len() {
            return None;
        }
        self.index_of(letters).map(|i| self.entries[i].value)
    }

    /// `Σ entries + tail_mass`, which contains one.
    pub fn total(&self) -> Interval {
        let s: Interval = self.entries.iter().map(|e| e.value).sum();
        s + self.tail_mass
    }

    pub fn max_width(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.value.width())
            .fold(0.0, f64::max)
    }
}

/// `exp(Δ_K + V_K) · exp(-sup φ_K[v]) · Σ_{w ∉ A^K} exp(sup φ_K[w])`, with the
/// last sum bounded through single-site suprema.
fn kernel_tail(p: &dyn Potential, k: &SiteSet, v: &Pattern, a: &FiniteAlphabet) -> Result<f64> {
    let t = p.single_site_tail(a)?;
    if t.hi() == 0.0 {
        return Ok(0.0);
    }
    let s: Interval = a
        .letters()
        .iter()
        .map(|&l| p.single_site_sup(l).exp())
        .sum();
    let n = k.len();
    let mut excess = Interval::ZERO;
    let mut binom = Interval::ONE;
    let tt = Interval::new(0.0, t.hi());
    for j in 1..=n {
        binom = (binom * Interval::point((n - j + 1) as f64))
            .checked_div(&Interval::point(j as f64))
            .expect("positive");
        excess = excess + binom * s.powi((n - j) as u32) * tt.powi(j as u32);
    }
    let envelope = (delta_f_bound(p, k)? + v_f(p, k)?).exp();
    let sup_v = p.sup_cylinder(v)?;
    Ok((envelope * (-sup_v).exp() * excess).hi())
}

/// The kernel table with the reference pattern constant at `min A`.
pub fn kernel_table(
    p: &dyn Potential,
    k: &SiteSet,
    x: &BoundaryCondition,
    alphabet: &FiniteAlphabet,
    budget: Budget,
) -> Result<KernelTable> {
    let a = p.effective_alphabet(alphabet)?;
    let reference = vec![a.min(); k.len()];
    kernel_table_with_reference(p, k, x, &a, &reference, budget)
}

/// The kernel table computed against an explicit reference pattern in `A^K`.
pub fn kernel_table_with_reference(
    p: &dyn Potential,
    k: &SiteSet,
    x: &BoundaryCondition,
    alphabet: &FiniteAlphabet,
    reference: &[Letter],
    budget: Budget,
) -> Result<KernelTable> {
    if k.is_empty() {
        return Err(Error::Usage("kernel needs a nonempty K".into()));
    }
    p.validate_boundary(x)?;
    let a = p.effective_alphabet(alphabet)?;
    if reference.len() != k.len() || reference.iter().any(|l| !a.contains(*l)) {
        return Err(Error::Usage("reference pattern must lie in A^K".into()));
    }
    let v = Pattern::new(k.clone(), reference.to_vec())?;
    let xv = x.with_pattern(&v);
    let route = default_route(p, k)?;
    let numerators = map_patterns(a.letters(), k.len(), budget, |w| {
        Ok(energy_change_via(p, k, w, &xv, route)?.exp())
    })?;
    let head: Interval = numerators.iter().copied().sum();
    let tail = kernel_tail(p, k, &v, &a)?;
    let denom = head + Interval::new(0.0, tail);
    if !(denom.lo() > 0.0) {
        return Err(Error::Numeric(
            "kernel denominator is not bounded away from zero".into(),
        ));
    }
    let letters = map_patterns(a.letters(), k.len(), budget, |w| Ok(w.to_vec()))?;
    let entries = letters
        .into_iter()
        .zip(&numerators)
        .map(|(l, n)| {
            let q = n.checked_div(&denom).expect("positive denominator");
            KernelEntry {
                letters: l,
                value: Interval::new(q.lo().max(0.0), q.hi().min(1.0)),
            }
        })
        .collect();
    let tail_mass = if tail == 0.0 {
        Interval::ZERO
    } else {
        let m = Interval::point(tail)
            .checked_div(&(Interval::point(head.lo()) + Interval::point(tail)))
            .expect("positive");
        Interval::new(0.0, m.hi().min(1.0))
    };
    Ok(KernelTable {
        k: k.clone(),
        boundary: x.clone(),
        alphabet: a,
        reference: reference.to_vec(),
        entries,
        tail_mass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    /// `max_w |mid γ_K([w]) - mid (γ_K γ_F)([w])|`.
    pub max_deviation: f64,
    /// Half the summed widths of the two sides at the worst event.
    pub slack: f64,
    /// `max_w (|mid L - mid R| - (width L + width R)/2)`; `<= 0` means the two
    /// certified intervals meet for every event.
    pub excess: f64,
    pub events: usize,
}

/// Compares `γ_K([w], x)` with `(γ_K γ_F)([w], x)` on every `w ∈ A^K`.
///
/// The right side is `γ_F([w_F], w x_{K^c}) · γ_K([w_{K \ F}], x)`, where the
/// marginal sums the table over `A^F` and adds the tail mass as slack.
pub fn consistency_check(
    p: &dyn Potential,
    k: &SiteSet,
    f: &SiteSet,
    x: &BoundaryCondition,
    alphabet: &FiniteAlphabet,
    budget: Budget,
) -> Result<ConsistencyReport> {
    if !f.is_subset(k) || f.is_empty() {
        return Err(Error::Usage(
            "consistency check needs a nonempty F inside K".into(),
        ));
    }
    let a = p.effective_alphabet(alphabet)?;
    let table_k = kernel_table(p, k, x, &a, budget)?;
    let f_pos: Vec<usize> = f.iter().map(|s| k.index_of(s).expect("subset")).collect();
    let rest: Vec<usize> = (0..k.len()).filter(|i| !f_pos.contains(i)).collect();
    let mut report = ConsistencyReport {
        max_deviation: 0.0,
        slack: 0.0,
        excess: f64::NEG_INFINITY,
        events: 0,
    };
    // Marginal of the letters on K \ F, keyed by those letters.
    let mut marginal: std::collections::BTreeMap<Vec<Letter>, Interval> = Default::default();
    for e in &table_k.entries {
        let key: Vec<Letter> = rest.iter().map(|&i| e.letters[i]).collect();
        let m = marginal.entry(key).or_insert(Interval::ZERO);
        *m = *m + e.value;
    }
    for m in marginal.values_mut() {
        *m = (*m + table_k.tail_mass).min(&Interval::ONE);
    }
    // γ_F tables depend on w only through w_{K \ F}; cache them.
    let mut f_tables: std::collections::BTreeMap<Vec<Letter>, KernelTable> = Default::default();
    for e in &table_k.entries {
        let key: Vec<Letter> = rest.iter().map(|&i| e.letters[i]).collect();
        if !f_tables.contains_key(&key) {
            let w = Pattern::new(k.clone(), e.letters.clone())?;
            let t = kernel_table(p, f, &x.with_pattern(&w), &a, budget)?;
            f_tables.insert(key.clone(), t);
        }
        let wf: Vec<Letter> = f_pos.iter().map(|&i| e.letters[i]).collect();
        let gf = f_tables[&key].entry(&wf).expect("letter in A");
        let rhs = gf * marginal[&key];
        let lhs = e.value;
        let dev = (lhs.mid() - rhs.mid()).abs();
        let slack = (lhs.width() + rhs.width()) / 2.0;
        report.events += 1;
        if dev > report.max_deviation {
            report.max_deviation = dev;
        }
        if dev - slack > report.excess {
            report.excess = dev - slack;
            report.slack = slack;
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub original: Interval,
    pub translated: Interval,
    /// `|mid - mid|`.
    pub deviation: f64,
    /// Sum of the two widths.
    pub allowance: f64,
    pub holds: bool,
}

/// Compares `γ_{Kg^{-1}}(g·[w], g·x)` with `γ_K([w], x)`.
pub fn invariance_check(
    p: &dyn Potential,
    w: &Pattern,
    x: &BoundaryCondition,
    g: &Site,
    alphabet: &FiniteAlphabet,
    budget: Budget,
) -> Result<InvarianceReport> {
    let group = p.group();
    group.check_element(g)?;
    let original = kernel_table(p, w.support(), x, alphabet, budget)?
        .entry(w.letters())
        .ok_or_else(|| Error::Usage("pattern letters outside A".into()))?;
    let gw = w.shifted(group, g);
    let gx = x.shifted(group, g);
    let translated = kernel_table(p, gw.support(), &gx, alphabet, budget)?
        .entry(gw.letters())
        .expect("same letters");
    let deviation = (original.mid() - translated.mid()).abs();
    let allowance = original.width() + translated.width();
    Ok(InvarianceReport {
        original,
        translated,
        deviation,
        allowance,
        holds: deviation <= allowance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BowenGibbsReport {
    /// `2 V_F + 3 Δ_F`.
    pub bound: f64,
    pub checked: usize,
    /// Patterns whose log ratio is certainly outside `[-bound, bound]`.
    pub violations: Vec<Vec<Letter>>,
    /// Patterns whose log-ratio interval straddles a bound.
    pub undecided: usize,
    /// Largest `|mid log ratio|`.
    pub max_abs_log_ratio: f64,
}

/// Checks `exp(-2V_F - 3Δ_F) ≤ γ_F([w], x) / exp(φ_F(w y_{F^c}) - log Z_F(φ)) ≤ exp(2V_F + 3Δ_F)`
/// for every `w ∈ A^F`.
pub fn bowen_gibbs_check(
    p: &dyn Potential,
    f: &SiteSet,
    x: &BoundaryCondition,
    y: &BoundaryCondition,
    alphabet: &FiniteAlphabet,
    budget: Budget,
) -> Result<BowenGibbsReport> {
    let a = p.effective_alphabet(alphabet)?;
    let bound = (v_f(p, f)? * 2.0 + delta_f_bound(p, f)? * 3.0).hi();
    let table = kernel_table(p, f, x, &a, budget)?;
    let log_z = partition_function_countable(p, f, &a, budget)?
        .ln()
        .ok_or_else(|| Error::Numeric("partition function is not positive".into()))?;
    let mut report = BowenGibbsReport {
        bound,
        checked: 0,
        violations: Vec::new(),
        undecided: 0,
        max_abs_log_ratio: 0.0,
    };
    for e in &table.entries {
        let w = Pattern::new(f.clone(), e.letters.clone())?;
        let energy = phi_f(p, f, &y.with_pattern(&w));
        report.checked += 1;
        if !(e.value.lo() > 0.0) {
            // Only the upper end of log γ is known.
            let hi = e.value.ln().map(|v| v.hi());
            let upper = hi.map(|h| (Interval::point(h) - energy + log_z).hi());
            match upper {
                Some(u) if u < -bound => report.violations.push(e.letters.clone()),
                _ => report.undecided += 1,
            }
            continue;
        }
        let ratio = e.value.ln().expect("positive") - energy + log_z;
        report.max_abs_log_ratio = report.max_abs_log_ratio.max(ratio.mid().abs());
        if ratio.lo() > bound || ratio.hi() < -bound {
            report.violations.push(e.letters.clone());
        } else if ratio.hi() > bound || ratio.lo() < -bound {
            report.undecided += 1;
        }
    }
    Ok(report)
}
