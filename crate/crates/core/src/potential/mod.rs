//! Interval-valued potentials on `N^G` with certified variation and tail data.
//!
//! Three families are built in: single-site potentials, finite-range pair
//! potentials on a finite alphabet, and the countable-state Potts family
//! `φ(x) = -β Σ_g c(g, x(1)) 1{x(1) = x(g)}`.

mod coefficients;
mod pair;
mod potts;
mod single_site;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupContext, Site, SiteSet};
use crate::interval::Interval;

pub use coefficients::{
    poly_geometric_tail, Coupling, CouplingEntry, CouplingTails, SelfCoefficient, Verdict,
};
pub use pair::{PairCoupling, PairParams, PairPotential};
pub use potts::{ConditionReport, CountablePotts, PottsParams};
pub use single_site::{SingleSiteParams, SingleSitePotential};

/// A letter of the countable alphabet `N`.
pub type Letter = u32;

/// Number of exhaustion levels for which variation bounds are tabulated.
pub const DEFAULT_HORIZON: usize = 64;

/// A nonempty finite set of letters in increasing order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Letter>", into = "Vec<Letter>")]
pub struct FiniteAlphabet(Vec<Letter>);

impl TryFrom<Vec<Letter>> for FiniteAlphabet {
    type Error = Error;
    fn try_from(v: Vec<Letter>) -> Result<Self> {
        FiniteAlphabet::new(v)
    }
}

impl From<FiniteAlphabet> for Vec<Letter> {
    fn from(a: FiniteAlphabet) -> Self {
        a.0
    }
}

impl FiniteAlphabet {
    pub fn new(mut letters: Vec<Letter>) -> Result<Self> {
        letters.sort_unstable();
        letters.dedup();
        if letters.is_empty() {
            return Err(Error::Usage("alphabet must be nonempty".into()));
        }
        Ok(FiniteAlphabet(letters))
    }

    /// `{0, 1, ..., max}`.
    pub fn up_to(max: Letter) -> Self {
        FiniteAlphabet((0..=max).collect())
    }

    /// `{0, 1, ..., q-1}`.
    pub fn first(q: u32) -> Self {
        assert!(q > 0, "alphabet must be nonempty");
        FiniteAlphabet((0..q).collect())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min(&self) -> Letter {
        self.0[0]
    }

    pub fn max(&self) -> Letter {
        *self.0.last().expect("nonempty")
    }

    pub fn contains(&self, a: Letter) -> bool {
        self.0.binary_search(&a).is_ok()
    }

    pub fn index_of(&self, a: Letter) -> Option<usize> {
        self.0.binary_search(&a).ok()
    }

    /// Letters of `{0..max}` missing from this alphabet.
    pub fn gaps(&self) -> impl Iterator<Item = Letter> + '_ {
        (0..self.max()).filter(move |a| !self.contains(*a))
    }

    pub fn intersect_prefix(&self, q: u32) -> Option<FiniteAlphabet> {
        let v: Vec<Letter> = self.0.iter().copied().filter(|&a| a < q).collect();
        FiniteAlphabet::new(v).ok()
    }

    /// Adds the next `extra` letters above the current maximum.
    pub fn extended(&self, extra: u32) -> FiniteAlphabet {
        let mut v = self.0.clone();
        v.extend(self.max() + 1..=self.max() + extra);
        FiniteAlphabet(v)
    }
}

/// Declared alphabet of a potential.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Alphabet {
    /// Letters `0..q`.
    Finite(u32),
    Countable,
}

impl Alphabet {
    pub fn contains(&self, a: Letter) -> bool {
        match self {
            Alphabet::Finite(q) => a < *q,
            Alphabet::Countable => true,
        }
    }
}

/// A finite configuration `w ∈ N^F`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pattern {
    support: SiteSet,
    letters: Vec<Letter>,
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.support.iter().zip(self.letters.iter()))
            .finish()
    }
}

impl Pattern {
    /// `letters[i]` is the letter at the `i`-th site of `support` in canonical
    /// order.
    pub fn new(support: SiteSet, letters: Vec<Letter>) -> Result<Self> {
        if support.len() != letters.len() {
            return Err(Error::Usage(format!(
                "pattern has {} letters for {} sites",
                letters.len(),
                support.len()
            )));
        }
        Ok(Pattern { support, letters })
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Site, Letter)>) -> Result<Self> {
        let mut v: Vec<(Site, Letter)> = pairs.into_iter().collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        if v.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Usage("pattern assigns a site twice".into()));
        }
        let (sites, letters): (Vec<Site>, Vec<Letter>) = v.into_iter().unzip();
        Ok(Pattern {
            support: SiteSet::from(sites),
            letters,
        })
    }

    pub fn constant(support: SiteSet, a: Letter) -> Self {
        let letters = vec![a; support.len()];
        Pattern { support, letters }
    }

    pub fn support(&self) -> &SiteSet {
        &self.support
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn get(&self, s: &Site) -> Option<Letter> {
        self.support.index_of(s).map(|i| self.letters[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Site, Letter)> {
        self.support.iter().zip(self.letters.iter().copied())
    }

    /// The pattern `g·w` on `Fg^{-1}`: the letter at `f g^{-1}` is `w(f)`.
    pub fn shifted(&self, group: &GroupContext, g: &Site) -> Pattern {
        Pattern::from_pairs(self.iter().map(|(s, a)| (group.mul_inv(s, g), a)))
            .expect("translation is injective")
    }

    /// Label used in tabular output, for example `0-2-1`.
    pub fn label(&self) -> String {
        let v: Vec<String> = self.letters.iter().map(|a| a.to_string()).collect();
        v.join("-")
    }
}

/// Writes the `index`-th element of `A^n` in canonical order into `out`; the
/// first site is the most significant digit.
pub fn decode_pattern(mut index: u64, alphabet: &[Letter], out: &mut [Letter]) {
    let base = alphabet.len() as u64;
    for slot in out.iter_mut().rev() {
        *slot = alphabet[(index % base) as usize];
        index /= base;
    }
}

/// `|A|^n`, saturating.
pub fn pattern_count(alphabet_len: usize, n: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..n {
        acc = acc.saturating_mul(alphabet_len as u128);
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OverrideEntry {
    site: Site,
    letter: Letter,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundaryRepr {
    background: Letter,
    #[serde(default)]
    overrides: Vec<OverrideEntry>,
}

/// A configuration `x ∈ N^G` equal to `background` off a finite set.
///
/// Overrides equal to the background are dropped, so the stored support is the
/// set where `x` differs from the background.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "BoundaryRepr", into = "BoundaryRepr")]
pub struct BoundaryCondition {
    background: Letter,
    overrides: Vec<(Site, Letter)>,
}

impl TryFrom<BoundaryRepr> for BoundaryCondition {
    type Error = Error;
    fn try_from(r: BoundaryRepr) -> Result<Self> {
        let mut sites: Vec<&Site> = r.overrides.iter().map(|o| &o.site).collect();
        sites.sort();
        if sites.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Usage("boundary assigns a site twice".into()));
        }
        Ok(BoundaryCondition::new(
            r.background,
            r.overrides.into_iter().map(|o| (o.site, o.letter)),
        ))
    }
}

impl From<BoundaryCondition> for BoundaryRepr {
    fn from(b: BoundaryCondition) -> Self {
        BoundaryRepr {
            background: b.background,
            overrides: b
                .overrides
                .into_iter()
                .map(|(site, letter)| OverrideEntry { site, letter })
                .collect(),
        }
    }
}

impl fmt::Debug for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bg={} ", self.background)?;
        f.debug_map()
            .entries(self.overrides.iter().map(|(s, a)| (s, a)))
            .finish()
    }
}

impl BoundaryCondition {
    pub fn new(background: Letter, overrides: impl IntoIterator<Item = (Site, Letter)>) -> Self {
        let mut v: Vec<(Site, Letter)> = overrides.into_iter().collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        // Later entries win, mirroring map insertion.
        let mut out: Vec<(Site, Letter)> = Vec::with_capacity(v.len());
        for (s, a) in v {
            match out.last_mut() {
                Some(last) if last.0 == s => last.1 = a,
                _ => out.push((s, a)),
            }
        }
        out.retain(|(_, a)| *a != background);
        BoundaryCondition {
            background,
            overrides: out,
        }
    }

    pub fn constant(background: Letter) -> Self {
        BoundaryCondition {
            background,
            overrides: Vec::new(),
        }
    }

    pub fn background(&self) -> Letter {
        self.background
    }

    /// Sites where the configuration differs from the background.
    pub fn overrides(&self) -> &[(Site, Letter)] {
        &self.overrides
    }

    pub fn letter(&self, s: &Site) -> Letter {
        match self.overrides.binary_search_by(|(t, _)| t.cmp(s)) {
            Ok(i) => self.overrides[i].1,
            Err(_) => self.background,
        }
    }

    /// `w x_{F^c}`, where `F` is the support of `w`.
    pub fn with_pattern(&self, w: &Pattern) -> BoundaryCondition {
        let mut out = self.clone();
        for (s, a) in w.iter() {
            out.set(s.clone(), a);
        }
        out
    }

    pub fn set(&mut self, s: Site, a: Letter) {
        match self.overrides.binary_search_by(|(t, _)| t.cmp(&s)) {
            Ok(i) => {
                if a == self.background {
                    self.overrides.remove(i);
                } else {
                    self.overrides[i].1 = a;
                }
            }
            Err(i) => {
                if a != self.background {
                    self.overrides.insert(i, (s, a));
                }
            }
        }
    }

    pub fn restrict(&self, f: &SiteSet) -> Pattern {
        Pattern {
            support: f.clone(),
            letters: f.iter().map(|s| self.letter(s)).collect(),
        }
    }

    /// The shifted configuration `g·x`, `(g·x)(h) = x(hg)`.
    pub fn shifted(&self, group: &GroupContext, g: &Site) -> BoundaryCondition {
        BoundaryCondition::new(
            self.background,
            self.overrides
                .iter()
                .map(|(s, a)| (group.mul_inv(s, g), *a)),
        )
    }

    /// Largest letter in use.
    pub fn max_letter(&self) -> Letter {
        self.overrides
            .iter()
            .map(|(_, a)| *a)
            .fold(self.background, Letter::max)
    }

    pub fn letters_in(&self, alphabet: Alphabet) -> bool {
        alphabet.contains(self.background)
            && self.overrides.iter().all(|(_, a)| alphabet.contains(*a))
    }
}

/// Upper bounds on the variations `δ_{E_m}(φ)` along the word-ball exhaustion
/// and on the shell-weighted tails `Σ_{k>=m} |E_{k+1} \ E_k| δ_{E_k}(φ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationProfile {
    /// `deltas[m-1]` bounds `δ_{E_m}`.
    deltas: Vec<f64>,
    /// `tails[m-1]` bounds the tail starting at `m`.
    tails: Vec<f64>,
}

impl VariationProfile {
    pub fn zero() -> Self {
        VariationProfile {
            deltas: vec![0.0],
            tails: vec![0.0],
        }
    }

    /// Builds a profile from bounds on `δ_{E_m}` for `m = 1..=H` and a bound
    /// on the shell-weighted tail beyond `H`.
    pub fn from_deltas(group: &GroupContext, mut deltas: Vec<f64>, beyond: f64) -> Result<Self> {
        if deltas.is_empty() {
            return Ok(VariationProfile {
                deltas: vec![0.0],
                tails: vec![beyond],
            });
        }
        // δ_{E_m} is non-increasing in m, so a running minimum is still a bound.
        for m in 1..deltas.len() {
            deltas[m] = deltas[m].min(deltas[m - 1]);
        }
        let h = deltas.len();
        let mut tails = vec![0.0; h];
        let mut acc = Interval::point(beyond);
        for m in (1..=h).rev() {
            acc = acc + Interval::point(deltas[m - 1]) * group.sphere_size(m)? as f64;
            tails[m - 1] = acc.hi();
        }
        if beyond == 0.0 {
            deltas.push(0.0);
            tails.push(0.0);
        }
        Ok(VariationProfile { deltas, tails })
    }

    /// Builds a profile from explicit tables; `tails[m-1]` must bound the
    /// shell-weighted tail from `m`.
    pub fn from_tables(deltas: Vec<f64>, tails: Vec<f64>) -> Self {
        assert!(!deltas.is_empty() && deltas.len() == tails.len());
        VariationProfile { deltas, tails }
    }

    /// Upper bound on `δ_{E_m}(φ)`, `m >= 1`.
    pub fn delta(&self, m: usize) -> f64 {
        let m = m.max(1);
        self.deltas
            .get(m - 1)
            .copied()
            .unwrap_or(*self.deltas.last().expect("nonempty"))
    }

    /// Upper bound on `δ(φ) = δ_{E_1}(φ)`.
    pub fn oscillation(&self) -> f64 {
        self.delta(1)
    }

    /// Upper bound on `Σ_{k>=m} |E_{k+1}^{-1} \ E_k^{-1}| δ_{E_k}(φ)`.
    pub fn tail(&self, m: usize) -> f64 {
        let m = m.max(1);
        self.tails
            .get(m - 1)
            .copied()
            .unwrap_or(*self.tails.last().expect("nonempty"))
    }

    /// Upper bound on `V(φ)`.
    pub fn total(&self) -> f64 {
        self.tail(1)
    }

    pub fn horizon(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_zero(&self) -> bool {
        self.total() == 0.0
    }
}

/// A potential `φ: N^G -> R` evaluated with certified intervals.
pub trait Potential: Send + Sync + fmt::Debug {
    fn group(&self) -> &GroupContext;

    /// Inverse temperature already folded into every evaluation.
    fn beta(&self) -> f64;

    fn alphabet(&self) -> Alphabet;

    fn describe(&self) -> String;

    /// Interval containing `φ(g·x)`.
    fn eval_at(&self, g: &Site, x: &BoundaryCondition) -> Interval;

    /// Variation data; `None` when the potential cannot certify summable
    /// variation.
    fn profile(&self) -> Option<&VariationProfile>;

    /// `sup φ_F([w])` over the full cylinder, `F` the support of `w`.
    fn sup_cylinder(&self, w: &Pattern) -> Result<Interval> {
        generic_cylinder_bound(self, w, true)
    }

    /// `inf φ_F([w])` over the full cylinder.
    fn inf_cylinder(&self, w: &Pattern) -> Result<Interval> {
        generic_cylinder_bound(self, w, false)
    }

    /// `sup φ_F([w] ∩ A^G)`.
    fn sup_cylinder_within(&self, w: &Pattern, alphabet: &FiniteAlphabet) -> Result<Interval>;

    /// `sup φ([a])`; by shift invariance this is also `sup φ(g·x)` over
    /// `x(g) = a`.
    fn single_site_sup(&self, a: Letter) -> Interval;

    /// Interval containing `Σ_{a ∉ A} exp(sup φ([a]))`.
    fn single_site_tail(&self, alphabet: &FiniteAlphabet) -> Result<Interval>;

    /// Closed form for `lim_F φ_F(u x_{K^c}) - φ_F(x)`, the change of energy
    /// when the letters of `x` on `K` are replaced by `to`, when the family has
    /// one.
    fn energy_change_exact(
        &self,
        _k: &SiteSet,
        _to: &[Letter],
        _x: &BoundaryCondition,
    ) -> Option<Interval> {
        None
    }

    /// Finite set `I ∋ 1_G` such that `φ(x)` depends only on `x_I`.
    fn influence(&self) -> Option<SiteSet> {
        None
    }

    /// Interval containing `∫ φ dν_q` for the Bernoulli measure with weights
    /// `q` on `letters`.
    fn mean_energy(&self, letters: &[Letter], q: &[Interval]) -> Result<Interval>;

    /// Gradient of the mean energy with respect to `q`, in floating point.
    fn mean_energy_gradient(&self, letters: &[Letter], q: &[f64]) -> Result<Vec<f64>>;

    /// Upper bound on `sup |φ|` over `A^G`.
    fn sup_norm_on(&self, alphabet: &FiniteAlphabet) -> Result<f64>;

    fn as_potts(&self) -> Option<&CountablePotts> {
        None
    }

    fn validate_boundary(&self, x: &BoundaryCondition) -> Result<()> {
        if x.letters_in(self.alphabet()) {
            Ok(())
        } else {
            Err(Error::Usage(format!(
                "boundary uses letters outside the alphabet of {}",
                self.describe()
            )))
        }
    }

    fn validate_pattern(&self, w: &Pattern) -> Result<()> {
        let al = self.alphabet();
        if let Some(a) = w.letters().iter().find(|a| !al.contains(**a)) {
            return Err(Error::Usage(format!(
                "letter {a} outside the alphabet of {}",
                self.describe()
            )));
        }
        for s in w.support() {
            self.group().check_element(s)?;
        }
        Ok(())
    }

    /// The letters of `alphabet` the potential is defined on.
    fn effective_alphabet(&self, alphabet: &FiniteAlphabet) -> Result<FiniteAlphabet> {
        match self.alphabet() {
            Alphabet::Countable => Ok(alphabet.clone()),
            Alphabet::Finite(q) => alphabet.intersect_prefix(q).ok_or_else(|| {
                Error::Usage(format!(
                    "alphabet {:?} misses every letter below {q}",
                    alphabet.letters()
                ))
            }),
        }
    }
}

fn generic_cylinder_bound<P: Potential + ?Sized>(
    p: &P,
    w: &Pattern,
    upper: bool,
) -> Result<Interval> {
    let x = BoundaryCondition::constant(w.letters().first().copied().unwrap_or(0)).with_pattern(w);
    let value = phi_f(p, w.support(), &x);
    let spread = delta_f_bound(p, w.support())?.hi();
    Ok(if upper {
        Interval::new(value.lo(), value.hi() + spread).widen(0.0)
    } else {
        Interval::new(value.lo() - spread, value.hi()).widen(0.0)
    })
}

/// Interval containing `φ_F(x) = Σ_{g∈F} φ(g·x)`.
pub fn phi_f<P: Potential + ?Sized>(p: &P, f: &SiteSet, x: &BoundaryCondition) -> Interval {
    f.iter().map(|g| p.eval_at(g, x)).sum()
}

/// Interval containing `φ(x)`.
pub fn eval_phi<P: Potential + ?Sized>(p: &P, x: &BoundaryCondition) -> Interval {
    p.eval_at(p.group().identity(), x)
}

/// Explicit terms of `V_F` summed before the remainder bound takes over.
const MAX_VARIATION_TERMS: usize = 48;
/// Size at which the sets `E_m^{-1} F` stop being enumerated.
const MAX_VARIATION_SET: usize = 250_000;

/// Upper bound `[0, b]` on `V_F(φ) = Σ_{m>=1} |E_{m+1}^{-1}F \ E_m^{-1}F| δ_{E_m}(φ)`.
pub fn v_f<P: Potential + ?Sized>(p: &P, f: &SiteSet) -> Result<Interval> {
    if f.is_empty() {
        return Err(Error::Usage("V_F needs a nonempty F".into()));
    }
    let profile = p
        .profile()
        .ok_or_else(|| Error::Capability(format!("{} has no variation data", p.describe())))?;
    if profile.is_zero() {
        return Ok(Interval::ZERO);
    }
    let group = p.group();
    let n = f.len() as f64;
    let mut acc = Interval::ZERO;
    // cur = E_m^{-1} F, starting from E_1^{-1} F = F.
    let mut cur = f.clone();
    let mut m = 1;
    loop {
        let remainder = Interval::point(profile.tail(m)) * n;
        let negligible = remainder.hi() <= 1e-13 * acc.hi().max(f64::MIN_POSITIVE);
        if profile.delta(m) == 0.0
            || negligible
            || m > MAX_VARIATION_TERMS
            || cur.len() > MAX_VARIATION_SET
        {
            acc = acc + remainder;
            break;
        }
        let e_next_inv = group.inverse_set(&group.ball(m)?);
        let next = group.product_set(&e_next_inv, f)?;
        let shell = (next.len() - cur.len()) as f64;
        acc = acc + Interval::point(profile.delta(m)) * shell;
        cur = next;
        m += 1;
    }
    Ok(Interval::new(0.0, acc.hi()))
}

/// Upper bound `[0, b]` on `Δ_F(φ) = δ_F(φ_F)`.
///
/// The bound is the smaller of the interior estimate
/// `min_m |Int_{E_m}F|·δ_{E_m} + |F \ Int_{E_m}F|·δ(φ)` and the boundary
/// estimate `V(φ)|S|^2|SF \ F|`.
pub fn delta_f_bound<P: Potential + ?Sized>(p: &P, f: &SiteSet) -> Result<Interval> {
    if f.is_empty() {
        return Err(Error::Usage("Δ_F needs a nonempty F".into()));
    }
    let profile = p
        .profile()
        .ok_or_else(|| Error::Capability(format!("{} has no variation data", p.describe())))?;
    if profile.is_zero() {
        return Ok(Interval::ZERO);
    }
    let group = p.group();
    let n = f.len();
    let osc = Interval::point(profile.oscillation());
    let mut best = (osc * n as f64).hi();
    let mut m = 2;
    loop {
        let e_m = group.exhaustion().set(m)?;
        if e_m.len() > n {
            break;
        }
        let int = group.k_interior(&e_m, f)?.len();
        if int == 0 {
            break;
        }
        let b = Interval::point(profile.delta(m)) * int as f64 + osc * (n - int) as f64;
        best = best.min(b.hi());
        m += 1;
    }
    let s = group.generators().len() as f64;
    let boundary = group.outer_boundary(f)?.len() as f64;
    let b = Interval::point(profile.total()) * (s * s * boundary);
    best = best.min(b.hi());
    Ok(Interval::new(0.0, best))
}

/// Serialized potential description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub beta: f64,
    pub params: serde_json::Value,
    #[serde(default)]
    pub tails: Option<TailChecks>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    SingleSite,
    PairFiniteRange,
    CountablePotts,
}

/// Sample points at which declared closed-form tails are checked against
/// explicit partial sums when a potential is built.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailChecks {
    /// Radius of the ball on which coupling tails are compared with explicit
    /// sums.
    #[serde(default = "default_verify_radius")]
    pub verify_radius: usize,
    /// Letters `N` at which single-site tails `Σ_{n>=N}` are compared with
    /// explicit partial sums.
    #[serde(default = "default_sample_letters")]
    pub sample_letters: Vec<Letter>,
}

fn default_verify_radius() -> usize {
    6
}

fn default_sample_letters() -> Vec<Letter> {
    vec![0, 1, 10, 100]
}

impl Default for TailChecks {
    fn default() -> Self {
        TailChecks {
            verify_radius: default_verify_radius(),
            sample_letters: default_sample_letters(),
        }
    }
}

fn parse_params<T: serde::de::DeserializeOwned>(value: &serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let path = if path == "." {
            "params".to_string()
        } else {
            format!("params.{path}")
        };
        Error::config(path, e.into_inner().to_string())
    })
}

impl PotentialSpec {
    pub fn build(&self, group: &GroupContext) -> Result<Arc<dyn Potential>> {
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::config("beta", "must be finite and non-negative"));
        }
        let checks = self.tails.clone().unwrap_or_default();
        Ok(match self.kind {
            PotentialKind::SingleSite => {
                let params: SingleSiteParams = parse_params(&self.params)?;
                let p = SingleSitePotential::new(group.clone(), self.beta, params)?;
                p.verify_tails(&checks)?;
                Arc::new(p)
            }
            PotentialKind::PairFiniteRange => {
                let params: PairParams = parse_params(&self.params)?;
                Arc::new(PairPotential::new(group.clone(), self.beta, params)?)
            }
            PotentialKind::CountablePotts => {
                let params: PottsParams = parse_params(&self.params)?;
                let p = CountablePotts::new(group.clone(), self.beta, params)?;
                p.verify_tails(&checks)?;
                Arc::new(p)
            }
        })
    }
}
