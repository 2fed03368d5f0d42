//! Finitely generated groups: element arithmetic, word-metric balls and
//! finite-set algebra.
//!
//! Two kinds of groups are supported. Integer lattices `Z^d` are built in, with
//! either the `l∞` generating set `{-1,0,1}^d` or the `l1` set `{0, ±e_i}`.
//! Everything else goes through a [`GroupOracle`]: a multiplication oracle on
//! canonical normal forms. Two oracles ship with the crate, finite groups read
//! from a Cayley table and the infinite dihedral group.

mod table;

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub use table::{CayleyTable, InfiniteDihedral};

/// A group element in canonical form.
///
/// Lattice elements are coordinate vectors. Oracle-backed elements use the
/// encoding chosen by the oracle; the derived order is lexicographic on the
/// encoding.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Site(pub SmallVec<[i64; 4]>);

impl Site {
    pub fn new(coords: &[i64]) -> Self {
        Site(SmallVec::from_slice(coords))
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// A finite set of sites kept sorted and duplicate free.
#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Vec<Site>", into = "Vec<Site>")]
pub struct SiteSet {
    sites: Vec<Site>,
}

impl From<Vec<Site>> for SiteSet {
    fn from(mut sites: Vec<Site>) -> Self {
        sites.sort();
        sites.dedup();
        SiteSet { sites }
    }
}

impl From<SiteSet> for Vec<Site> {
    fn from(s: SiteSet) -> Self {
        s.sites
    }
}

impl FromIterator<Site> for SiteSet {
    fn from_iter<I: IntoIterator<Item = Site>>(iter: I) -> Self {
        SiteSet::from(iter.into_iter().collect::<Vec<_>>())
    }
}

impl fmt::Debug for SiteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.sites.iter()).finish()
    }
}

impl SiteSet {
    pub fn empty() -> Self {
        SiteSet::default()
    }

    pub fn singleton(s: Site) -> Self {
        SiteSet { sites: vec![s] }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, s: &Site) -> bool {
        self.sites.binary_search(s).is_ok()
    }

    /// Position of `s` in canonical order.
    pub fn index_of(&self, s: &Site) -> Option<usize> {
        self.sites.binary_search(s).ok()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Site> {
        self.sites.iter()
    }

    pub fn as_slice(&self) -> &[Site] {
        &self.sites
    }

    pub fn union(&self, other: &SiteSet) -> SiteSet {
        self.sites
            .iter()
            .chain(other.sites.iter())
            .cloned()
            .collect()
    }

    pub fn difference(&self, other: &SiteSet) -> SiteSet {
        SiteSet {
            sites: self
                .sites
                .iter()
                .filter(|s| !other.contains(s))
                .cloned()
                .collect(),
        }
    }

    pub fn intersection(&self, other: &SiteSet) -> SiteSet {
        SiteSet {
            sites: self
                .sites
                .iter()
                .filter(|s| other.contains(s))
                .cloned()
                .collect(),
        }
    }

    pub fn symmetric_difference(&self, other: &SiteSet) -> SiteSet {
        self.difference(other).union(&other.difference(self))
    }

    pub fn is_subset(&self, other: &SiteSet) -> bool {
        self.sites.iter().all(|s| other.contains(s))
    }
}

impl<'a> IntoIterator for &'a SiteSet {
    type Item = &'a Site;
    type IntoIter = std::slice::Iter<'a, Site>;
    fn into_iter(self) -> Self::IntoIter {
        self.sites.iter()
    }
}

/// Generating set of an integer lattice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    /// `{-1,0,1}^d`; balls are cubes.
    Linf,
    /// `{0, ±e_i}`; balls are cross-polytopes.
    L1,
}

/// Polynomial bound `|sphere(k)| <= coef * (k+1)^power`, valid for every
/// `k >= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthBound {
    pub coef: f64,
    pub power: u32,
}

/// Multiplication oracle for a finitely generated group given by normal forms.
pub trait GroupOracle: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn identity(&self) -> Site;
    /// A symmetric generating set. The identity may be omitted.
    fn generators(&self) -> Vec<Site>;
    fn is_element(&self, a: &Site) -> bool;
    fn multiply(&self, a: &Site, b: &Site) -> Site;
    fn inverse(&self, a: &Site) -> Site;
    /// Word length with respect to [`GroupOracle::generators`].
    fn word_length(&self, a: &Site) -> usize;
    /// Number of elements, when finite.
    fn order(&self) -> Option<usize>;
    /// Exact sphere size, when the oracle knows a closed form.
    fn sphere_size(&self, _k: usize) -> Option<usize> {
        None
    }
    fn growth_bound(&self) -> GrowthBound;
}

#[derive(Clone, Debug)]
pub enum GroupKind {
    Lattice { d: usize, norm: Norm },
    Oracle(Arc<dyn GroupOracle>),
}

/// Default element cap for enumerations in oracle-backed groups.
pub const DEFAULT_GROWTH_CAP: usize = 1 << 20;

/// A finitely generated group together with a symmetric generating set `S`
/// that contains the identity.
#[derive(Clone, Debug)]
pub struct GroupContext {
    kind: GroupKind,
    generators: SiteSet,
    identity: Site,
    growth_cap: usize,
}

/// Serialized group description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GroupSpec {
    Zd {
        d: usize,
        #[serde(default = "default_norm")]
        norm: Norm,
    },
    Table {
        file: String,
        #[serde(default)]
        growth_cap: Option<usize>,
    },
    InfiniteDihedral,
}

fn default_norm() -> Norm {
    Norm::Linf
}

impl GroupSpec {
    /// Builds the context; relative table paths are resolved against `base`.
    pub fn build(&self, base: Option<&std::path::Path>) -> Result<GroupContext> {
        match self {
            GroupSpec::Zd { d, norm } => GroupContext::lattice(*d, *norm),
            GroupSpec::Table { file, growth_cap } => {
                let mut path = std::path::PathBuf::from(file);
                if path.is_relative() {
                    if let Some(b) = base {
                        path = b.join(path);
                    }
                }
                let table = CayleyTable::from_file(&path)?;
                let mut ctx = GroupContext::from_oracle(Arc::new(table))?;
                if let Some(cap) = growth_cap {
                    ctx.growth_cap = *cap;
                }
                Ok(ctx)
            }
            GroupSpec::InfiniteDihedral => GroupContext::from_oracle(Arc::new(InfiniteDihedral)),
        }
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

impl GroupContext {
    pub fn lattice(d: usize, norm: Norm) -> Result<Self> {
        if d == 0 || d > 4 {
            return Err(Error::Usage(format!(
                "lattice dimension must be between 1 and 4, got {d}"
            )));
        }
        let identity = Site(SmallVec::from_elem(0, d));
        let generators: SiteSet = match norm {
            Norm::Linf => (0..3usize.pow(d as u32))
                .map(|mut code| {
                    let mut c = SmallVec::with_capacity(d);
                    for _ in 0..d {
                        c.push((code % 3) as i64 - 1);
                        code /= 3;
                    }
                    Site(c)
                })
                .collect(),
            Norm::L1 => {
                let mut v = vec![identity.clone()];
                for i in 0..d {
                    for s in [-1, 1] {
                        let mut c = identity.clone();
                        c.0[i] = s;
                        v.push(c);
                    }
                }
                v.into_iter().collect()
            }
        };
        Ok(GroupContext {
            kind: GroupKind::Lattice { d, norm },
            generators,
            identity,
            growth_cap: DEFAULT_GROWTH_CAP,
        })
    }

    pub fn from_oracle(oracle: Arc<dyn GroupOracle>) -> Result<Self> {
        let identity = oracle.identity();
        let mut gens = oracle.generators();
        for g in gens.clone() {
            let inv = oracle.inverse(&g);
            if !gens.contains(&inv) {
                gens.push(inv);
            }
        }
        gens.push(identity.clone());
        for g in &gens {
            if !oracle.is_element(g) {
                return Err(Error::Usage(format!(
                    "generator {g} is not a group element"
                )));
            }
        }
        Ok(GroupContext {
            kind: GroupKind::Oracle(oracle),
            generators: gens.into_iter().collect(),
            identity,
            growth_cap: DEFAULT_GROWTH_CAP,
        })
    }

    pub fn with_growth_cap(mut self, cap: usize) -> Self {
        self.growth_cap = cap;
        self
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            GroupKind::Lattice { d, norm } => format!("Z^{d} ({norm:?})"),
            GroupKind::Oracle(o) => o.name(),
        }
    }

    pub fn identity(&self) -> &Site {
        &self.identity
    }

    /// The symmetric generating set `S`, identity included.
    pub fn generators(&self) -> &SiteSet {
        &self.generators
    }

    pub fn growth_cap(&self) -> usize {
        self.growth_cap
    }

    pub fn is_abelian_lattice(&self) -> bool {
        matches!(self.kind, GroupKind::Lattice { .. })
    }

    /// Whether `a` is an element of this group.
    pub fn is_element(&self, a: &Site) -> bool {
        match &self.kind {
            GroupKind::Lattice { d, .. } => a.0.len() == *d,
            GroupKind::Oracle(o) => o.is_element(a),
        }
    }

    pub fn check_element(&self, a: &Site) -> Result<()> {
        if self.is_element(a) {
            Ok(())
        } else {
            Err(Error::Usage(format!(
                "site {a} does not belong to {}",
                self.describe()
            )))
        }
    }

    /// Validated product `ab`.
    pub fn multiply(&self, a: &Site, b: &Site) -> Result<Site> {
        self.check_element(a)?;
        self.check_element(b)?;
        Ok(self.mul(a, b))
    }

    /// Product `ab` without validation.
    pub fn mul(&self, a: &Site, b: &Site) -> Site {
        match &self.kind {
            GroupKind::Lattice { .. } => {
                Site(a.0.iter().zip(b.0.iter()).map(|(x, y)| x + y).collect())
            }
            GroupKind::Oracle(o) => o.multiply(a, b),
        }
    }

    pub fn inverse(&self, a: &Site) -> Site {
        match &self.kind {
            GroupKind::Lattice { .. } => Site(a.0.iter().map(|x| -x).collect()),
            GroupKind::Oracle(o) => o.inverse(a),
        }
    }

    /// `a b^{-1}`.
    pub fn mul_inv(&self, a: &Site, b: &Site) -> Site {
        match &self.kind {
            GroupKind::Lattice { .. } => {
                Site(a.0.iter().zip(b.0.iter()).map(|(x, y)| x - y).collect())
            }
            GroupKind::Oracle(o) => o.multiply(a, &o.inverse(b)),
        }
    }

    pub fn word_length(&self, a: &Site) -> usize {
        match &self.kind {
            GroupKind::Lattice { norm, .. } => match norm {
                Norm::Linf => a.0.iter().map(|x| x.unsigned_abs()).max().unwrap_or(0) as usize,
                Norm::L1 => a.0.iter().map(|x| x.unsigned_abs()).sum::<u64>() as usize,
            },
            GroupKind::Oracle(o) => o.word_length(a),
        }
    }

    /// Number of elements of word length exactly `k`.
    pub fn sphere_size(&self, k: usize) -> Result<usize> {
        match &self.kind {
            GroupKind::Lattice { d, norm } => {
                if k == 0 {
                    return Ok(1);
                }
                let d = *d as u32;
                let k64 = k as u64;
                let n = match norm {
                    Norm::Linf => (2 * k64 + 1).pow(d) - (2 * k64 - 1).pow(d),
                    Norm::L1 => (1..=d as u64)
                        .map(|i| (1u64 << i) * binomial(d as u64, i) * binomial(k64 - 1, i - 1))
                        .sum(),
                };
                Ok(n as usize)
            }
            GroupKind::Oracle(o) => {
                if let Some(n) = o.sphere_size(k) {
                    return Ok(n);
                }
                let outer = self.ball(k)?.len();
                let inner = if k == 0 { 0 } else { self.ball(k - 1)?.len() };
                Ok(outer - inner)
            }
        }
    }

    pub fn ball_size(&self, m: usize) -> Result<usize> {
        match &self.kind {
            GroupKind::Lattice { .. } => (0..=m).map(|k| self.sphere_size(k)).sum(),
            GroupKind::Oracle(_) => Ok(self.ball(m)?.len()),
        }
    }

    /// Bound on sphere sizes used to close infinite series.
    pub fn growth_bound(&self) -> GrowthBound {
        match &self.kind {
            GroupKind::Lattice { d, norm } => {
                let d = *d as u32;
                match norm {
                    Norm::Linf => GrowthBound {
                        coef: (2 * d as u64 * (1u64 << (d - 1))) as f64,
                        power: d - 1,
                    },
                    Norm::L1 => GrowthBound {
                        coef: (1u64 << d) as f64,
                        power: d - 1,
                    },
                }
            }
            GroupKind::Oracle(o) => o.growth_bound(),
        }
    }

    /// Order of the group when finite.
    pub fn order(&self) -> Option<usize> {
        match &self.kind {
            GroupKind::Lattice { .. } => None,
            GroupKind::Oracle(o) => o.order(),
        }
    }

    /// The word-metric ball `S^m`.
    pub fn ball(&self, m: usize) -> Result<SiteSet> {
        match &self.kind {
            GroupKind::Lattice { d, .. } => {
                let size = self.ball_size(m)?;
                if size > self.growth_cap {
                    return Err(Error::GrowthCap {
                        cap: self.growth_cap,
                    });
                }
                let r = m as i64;
                let cube = lattice_box(&vec![-r; *d], &vec![r; *d]);
                Ok(cube
                    .iter()
                    .filter(|s| self.word_length(s) <= m)
                    .cloned()
                    .collect())
            }
            GroupKind::Oracle(_) => {
                let mut seen: BTreeSet<Site> = BTreeSet::new();
                seen.insert(self.identity.clone());
                let mut frontier = vec![self.identity.clone()];
                for _ in 0..m {
                    let mut next = Vec::new();
                    for a in &frontier {
                        for s in &self.generators {
                            let b = self.mul(a, s);
                            if seen.insert(b.clone()) {
                                next.push(b);
                            }
                        }
                    }
                    if seen.len() > self.growth_cap {
                        return Err(Error::GrowthCap {
                            cap: self.growth_cap,
                        });
                    }
                    if next.is_empty() {
                        break;
                    }
                    frontier = next;
                }
                Ok(SiteSet::from(seen.into_iter().collect::<Vec<_>>()))
            }
        }
    }

    /// `KF = {kf : k in K, f in F}`.
    pub fn product_set(&self, k: &SiteSet, f: &SiteSet) -> Result<SiteSet> {
        let n = k.len().saturating_mul(f.len());
        if n > self.growth_cap.saturating_mul(8) {
            return Err(Error::GrowthCap {
                cap: self.growth_cap,
            });
        }
        let mut v = Vec::with_capacity(n);
        for a in k {
            for b in f {
                v.push(self.mul(a, b));
            }
        }
        Ok(SiteSet::from(v))
    }

    /// `F^{-1}`, computed element-wise.
    pub fn inverse_set(&self, f: &SiteSet) -> SiteSet {
        f.iter().map(|a| self.inverse(a)).collect()
    }

    /// Right translate `Fg`.
    pub fn translate_right(&self, f: &SiteSet, g: &Site) -> SiteSet {
        f.iter().map(|a| self.mul(a, g)).collect()
    }

    /// Left translate `gF`.
    pub fn translate_left(&self, g: &Site, f: &SiteSet) -> SiteSet {
        f.iter().map(|a| self.mul(g, a)).collect()
    }

    /// Candidates `g` for which `Kg` can meet `F`, namely `K^{-1}F`.
    fn reach(&self, k: &SiteSet, f: &SiteSet) -> Result<SiteSet> {
        self.product_set(&self.inverse_set(k), f)
    }

    /// `Int_K(F) = {g : Kg ⊆ F}`.
    pub fn k_interior(&self, k: &SiteSet, f: &SiteSet) -> Result<SiteSet> {
        if k.is_empty() {
            return Err(Error::Usage("K must be nonempty".into()));
        }
        Ok(self
            .reach(k, f)?
            .iter()
            .filter(|g| k.iter().all(|a| f.contains(&self.mul(a, g))))
            .cloned()
            .collect())
    }

    /// `∂_K(F) = {g : Kg meets both F and its complement}`.
    pub fn k_boundary(&self, k: &SiteSet, f: &SiteSet) -> Result<SiteSet> {
        Ok(self
            .reach(k, f)?
            .iter()
            .filter(|g| {
                let (mut inside, mut outside) = (false, false);
                for a in k {
                    if f.contains(&self.mul(a, g)) {
                        inside = true;
                    } else {
                        outside = true;
                    }
                }
                inside && outside
            })
            .cloned()
            .collect())
    }

    /// Membership test for the `K`-exterior `{g : Kg ⊆ G \ F}`.
    pub fn k_exterior<'a>(&'a self, k: &'a SiteSet, f: &'a SiteSet) -> impl Fn(&Site) -> bool + 'a {
        move |g: &Site| k.iter().all(|a| !f.contains(&self.mul(a, g)))
    }

    /// Whether `|KF Δ F| < δ|F|`.
    pub fn is_invariant(&self, k: &SiteSet, delta: f64, f: &SiteSet) -> Result<bool> {
        if f.is_empty() {
            return Err(Error::Usage("F must be nonempty".into()));
        }
        if !(delta > 0.0) {
            return Err(Error::Usage("delta must be positive".into()));
        }
        let kf = self.product_set(k, f)?;
        let sym = kf.symmetric_difference(f).len();
        Ok((sym as f64) < delta * f.len() as f64)
    }

    /// Outer boundary `SF \ F`.
    pub fn outer_boundary(&self, f: &SiteSet) -> Result<SiteSet> {
        Ok(self.product_set(&self.generators, f)?.difference(f))
    }

    /// The `n`-th set of the default Følner sequence: the box `[-n,n]^d` on
    /// lattices (for either norm) and the ball of radius `n` otherwise.
    pub fn folner_set(&self, n: usize) -> Result<SiteSet> {
        match &self.kind {
            GroupKind::Lattice { d, .. } => {
                Ok(lattice_box(&vec![-(n as i64); *d], &vec![n as i64; *d]))
            }
            GroupKind::Oracle(_) => self.ball(n),
        }
    }

    /// Elements of `F` reachable from `start` inside `F` by generator steps,
    /// recorded by breadth-first layer.
    pub fn layers_within(&self, start: &Site, f: &SiteSet) -> Vec<Vec<Site>> {
        let mut seen: BTreeSet<Site> = BTreeSet::new();
        let mut out = Vec::new();
        if !f.contains(start) {
            return out;
        }
        seen.insert(start.clone());
        let mut queue = VecDeque::from([start.clone()]);
        while !queue.is_empty() {
            let layer: Vec<Site> = queue.drain(..).collect();
            for a in &layer {
                for s in &self.generators {
                    let b = self.mul(s, a);
                    if f.contains(&b) && seen.insert(b.clone()) {
                        queue.push_back(b);
                    }
                }
            }
            out.push(layer);
        }
        out
    }

    pub fn exhaustion(&self) -> ExhaustionHandle<'_> {
        ExhaustionHandle { group: self }
    }
}

/// Axis-aligned box `∏ [lo_i, hi_i]` in a lattice.
pub fn lattice_box(lo: &[i64], hi: &[i64]) -> SiteSet {
    assert_eq!(lo.len(), hi.len());
    let d = lo.len();
    if lo.iter().zip(hi).any(|(a, b)| a > b) {
        return SiteSet::empty();
    }
    let mut out = Vec::new();
    let mut c: SmallVec<[i64; 4]> = SmallVec::from_slice(lo);
    loop {
        out.push(Site(c.clone()));
        let mut i = d;
        loop {
            if i == 0 {
                return SiteSet::from(out);
            }
            i -= 1;
            if c[i] < hi[i] {
                c[i] += 1;
                for j in i + 1..d {
                    c[j] = lo[j];
                }
                break;
            }
        }
    }
}

/// Word-ball exhaustion `E_1 = {1}`, `E_{m+1} = S^m`.
#[derive(Clone, Copy, Debug)]
pub struct ExhaustionHandle<'a> {
    group: &'a GroupContext,
}

impl ExhaustionHandle<'_> {
    /// `E_m` for `m >= 1`.
    pub fn set(&self, m: usize) -> Result<SiteSet> {
        if m == 0 {
            return Err(Error::Usage("exhaustion index starts at 1".into()));
        }
        self.group.ball(m - 1)
    }

    /// `|E_{m+1} \ E_m|`.
    pub fn shell_size(&self, m: usize) -> Result<usize> {
        self.group.sphere_size(m)
    }

    /// Smallest `m` with `E_m ⊇ F`.
    pub fn covering_index(&self, f: &SiteSet) -> usize {
        f.iter()
            .map(|s| self.group.word_length(s))
            .max()
            .unwrap_or(0)
            + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn z1() -> GroupContext {
        GroupContext::lattice(1, Norm::Linf).unwrap()
    }

    fn z2() -> GroupContext {
        GroupContext::lattice(2, Norm::Linf).unwrap()
    }

    fn int(lo: i64, hi: i64) -> SiteSet {
        lattice_box(&[lo], &[hi])
    }

    /// Independent breadth-first ball enumeration on the Cayley graph.
    fn bfs_ball(g: &GroupContext, m: usize) -> BTreeSet<Site> {
        let mut seen = BTreeSet::from([g.identity().clone()]);
        for _ in 0..m {
            let cur: Vec<Site> = seen.iter().cloned().collect();
            for a in cur {
                for s in g.generators() {
                    seen.insert(g.mul(&a, s));
                }
            }
        }
        seen
    }

    #[test]
    fn lattice_products() {
        let g = z1();
        let p = g.multiply(&Site::new(&[3]), &Site::new(&[4])).unwrap();
        assert_eq!(p, Site::new(&[7]));
        assert!(g.multiply(&Site::new(&[3]), &Site::new(&[1, 2])).is_err());
        let a = Site::new(&[-5]);
        assert_eq!(g.mul(&a, &g.inverse(&a)), *g.identity());
    }

    #[test]
    fn balls_match_breadth_first_enumeration() {
        let g = z1();
        let b = g.ball(2).unwrap();
        assert_eq!(b, int(-2, 2));
        assert_eq!(b.len(), 5);
        assert_eq!(g.ball(0).unwrap(), SiteSet::singleton(Site::new(&[0])));
        assert_eq!(z2().ball(1).unwrap().len(), 9);
        for (d, norm) in [
            (2, Norm::Linf),
            (2, Norm::L1),
            (3, Norm::L1),
            (3, Norm::Linf),
        ] {
            let g = GroupContext::lattice(d, norm).unwrap();
            for m in 0..4 {
                let want: SiteSet = bfs_ball(&g, m).into_iter().collect();
                assert_eq!(g.ball(m).unwrap(), want, "d={d} {norm:?} m={m}");
                let shell = if m == 0 {
                    1
                } else {
                    want.len() - bfs_ball(&g, m - 1).len()
                };
                assert_eq!(g.sphere_size(m).unwrap(), shell);
            }
        }
    }

    #[test]
    fn growth_bounds_dominate_spheres() {
        for (d, norm) in [
            (1, Norm::Linf),
            (2, Norm::Linf),
            (3, Norm::L1),
            (4, Norm::Linf),
            (4, Norm::L1),
        ] {
            let g = GroupContext::lattice(d, norm).unwrap();
            let gb = g.growth_bound();
            for k in 1..200 {
                let s = g.sphere_size(k).unwrap() as f64;
                assert!(s <= gb.coef * ((k + 1) as f64).powi(gb.power as i32));
            }
        }
    }

    #[test]
    fn product_sets() {
        let g = z1();
        assert_eq!(
            g.product_set(&g.ball(1).unwrap(), &int(0, 9)).unwrap(),
            int(-1, 10)
        );
        assert_eq!(g.product_set(&int(0, 1), &int(0, 1)).unwrap(), int(0, 2));
        let id = SiteSet::singleton(g.identity().clone());
        assert_eq!(g.product_set(&id, &int(3, 7)).unwrap(), int(3, 7));
    }

    #[test]
    fn boundaries_and_interiors() {
        let g = z1();
        let k = g.ball(1).unwrap();
        let f = int(0, 9);
        let b = g.k_boundary(&k, &f).unwrap();
        let want: SiteSet = [-1, 0, 9, 10].iter().map(|&i| Site::new(&[i])).collect();
        assert_eq!(b, want);
        assert_eq!(g.k_interior(&k, &f).unwrap(), int(1, 8));
        let id = SiteSet::singleton(g.identity().clone());
        assert!(g.k_boundary(&id, &f).unwrap().is_empty());
        let ext = g.k_exterior(&k, &f);
        assert!(ext(&Site::new(&[-2])) && !ext(&Site::new(&[-1])));

        let g2 = z2();
        let f2 = lattice_box(&[0, 0], &[9, 9]);
        assert_eq!(g2.k_boundary(&g2.ball(1).unwrap(), &f2).unwrap().len(), 80);
    }

    #[test]
    fn invariance() {
        let g = z1();
        let k = g.ball(1).unwrap();
        assert!(g.is_invariant(&k, 0.3, &int(0, 9)).unwrap());
        let id = SiteSet::singleton(g.identity().clone());
        assert!(g.is_invariant(&id, 1e-9, &int(0, 9)).unwrap());
        let g2 = z2();
        let f2 = lattice_box(&[0, 0], &[9, 9]);
        let kf = g2.product_set(&g2.ball(1).unwrap(), &f2).unwrap();
        assert_eq!(kf.symmetric_difference(&f2).len(), 44);
        assert!(!g2.is_invariant(&g2.ball(1).unwrap(), 0.4, &f2).unwrap());
        assert!(g.is_invariant(&k, 0.3, &SiteSet::empty()).is_err());
    }

    #[test]
    fn folner_boxes() {
        assert_eq!(z2().folner_set(3).unwrap().len(), 49);
        assert_eq!(z1().folner_set(1).unwrap(), int(-1, 1));
        let g = z1();
        let mut prev = f64::INFINITY;
        for n in 1..30 {
            let f = g.folner_set(n).unwrap();
            let ratio = g.outer_boundary(&f).unwrap().len() as f64 / f.len() as f64;
            assert!(ratio < prev);
            prev = ratio;
        }
    }

    #[test]
    fn exhaustion_starts_at_identity() {
        let g = z2();
        let e = g.exhaustion();
        assert_eq!(e.set(1).unwrap(), SiteSet::singleton(Site::new(&[0, 0])));
        for m in 1..5 {
            let a = e.set(m).unwrap();
            let b = e.set(m + 1).unwrap();
            assert!(a.is_subset(&b) && a.len() < b.len());
            assert_eq!(b.len() - a.len(), e.shell_size(m).unwrap());
        }
    }

    #[test]
    fn symmetrized_difference_alone_does_not_bound_boundary() {
        // K = {-2, 0}, F = {-1, 3}: four boundary points against three points
        // in (K ∪ K^{-1} ∪ {1})F Δ F.
        let g = z1();
        let k: SiteSet = [Site::new(&[-2]), Site::new(&[0])].into_iter().collect();
        let f: SiteSet = [Site::new(&[-1]), Site::new(&[3])].into_iter().collect();
        let kk = k.union(&g.inverse_set(&k));
        let sym = g.product_set(&kk, &f).unwrap().symmetric_difference(&f);
        assert_eq!(g.k_boundary(&k, &f).unwrap().len(), 4);
        assert_eq!(sym.len(), 3);
    }

    fn arb_set(d: usize, r: i64, max: usize) -> impl Strategy<Value = SiteSet> {
        proptest::collection::vec(proptest::collection::vec(-r..=r, d), 1..max)
            .prop_map(|v| v.into_iter().map(|c| Site::new(&c)).collect())
    }

    proptest! {
        #[test]
        fn boundary_bounded_by_difference_set_growth(k in arb_set(2, 2, 5), f in arb_set(2, 3, 12)) {
            let g = z2();
            let kk = g.product_set(&k, &g.inverse_set(&k)).unwrap();
            let b = g.k_boundary(&k, &f).unwrap();
            let sym = g.product_set(&kk, &f).unwrap().symmetric_difference(&f);
            prop_assert!(b.len() <= k.len() * sym.len());
        }

        #[test]
        fn translation_equivariance(k in arb_set(2, 2, 5), f in arb_set(2, 3, 12), t in proptest::collection::vec(-20i64..20, 2)) {
            let g = z2();
            let t = Site::new(&t);
            let fg = g.translate_right(&f, &t);
            let b = g.k_boundary(&k, &f).unwrap();
            prop_assert_eq!(g.k_boundary(&k, &fg).unwrap(), g.translate_right(&b, &t));
            prop_assert_eq!(g.k_interior(&k, &fg).unwrap().len(), g.k_interior(&k, &f).unwrap().len());
        }

        #[test]
        fn identity_product_is_neutral(f in arb_set(2, 5, 20)) {
            let g = z2();
            let id = SiteSet::singleton(g.identity().clone());
            prop_assert_eq!(g.product_set(&id, &f).unwrap(), f);
        }
    }
}
