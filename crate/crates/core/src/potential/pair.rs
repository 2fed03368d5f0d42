//! Finite-range pair potentials on a finite alphabet.
//!
//! `φ(x) = β (u(x(1_G)) + Σ_{h ∈ R} W_h(x(1_G), x(h)))`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupContext, Site, SiteSet};
use crate::interval::Interval;

use super::single_site::check_letters;
use super::{
    Alphabet, BoundaryCondition, FiniteAlphabet, Letter, Pattern, Potential, VariationProfile,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairCoupling {
    /// The offset `h`; the term couples `x(1_G)` with `x(h)`.
    pub offset: Vec<i64>,
    /// `matrix[a][b] = W_h(a, b)`.
    pub matrix: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairParams {
    /// Alphabet size; letters are `0..q`.
    pub q: u32,
    /// `field[a] = u(a)`; zero when omitted.
    #[serde(default)]
    pub field: Vec<f64>,
    #[serde(default)]
    pub couplings: Vec<PairCoupling>,
}

#[derive(Clone, Debug)]
struct Term {
    offset: Site,
    /// Row-major `q × q`.
    w: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct PairPotential {
    group: GroupContext,
    beta: f64,
    q: usize,
    field: Vec<f64>,
    terms: Vec<Term>,
    influence: SiteSet,
    profile: VariationProfile,
}

impl PairPotential {
    pub fn new(group: GroupContext, beta: f64, params: PairParams) -> Result<Self> {
        let q = params.q as usize;
        if q == 0 {
            return Err(Error::config("params.q", "must be positive"));
        }
        let field = if params.field.is_empty() {
            vec![0.0; q]
        } else {
            params.field
        };
        if field.len() != q || field.iter().any(|v| !v.is_finite()) {
            return Err(Error::config(
                "params.field",
                format!("needs {q} finite values"),
            ));
        }
        let mut merged: BTreeMap<Site, Vec<f64>> = BTreeMap::new();
        for (i, c) in params.couplings.iter().enumerate() {
            let h = Site::new(&c.offset);
            if !group.is_element(&h) || h == *group.identity() {
                return Err(Error::config(
                    format!("params.couplings[{i}].offset"),
                    "must be a non-identity group element",
                ));
            }
            if c.matrix.len() != q
                || c.matrix
                    .iter()
                    .any(|r| r.len() != q || r.iter().any(|v| !v.is_finite()))
            {
                return Err(Error::config(
                    format!("params.couplings[{i}].matrix"),
                    format!("must be a {q}x{q} matrix of finite values"),
                ));
            }
            let entry = merged.entry(h).or_insert_with(|| vec![0.0; q * q]);
            for (a, row) in c.matrix.iter().enumerate() {
                for (b, v) in row.iter().enumerate() {
                    entry[a * q + b] += v;
                }
            }
        }
        let terms: Vec<Term> = merged
            .into_iter()
            .map(|(offset, w)| Term { offset, w })
            .collect();
        let mut influence: Vec<Site> = terms.iter().map(|t| t.offset.clone()).collect();
        influence.push(group.identity().clone());
        let influence = SiteSet::from(influence);

        let range = terms
            .iter()
            .map(|t| group.word_length(&t.offset))
            .max()
            .unwrap_or(0);
        let mut deltas = vec![Interval::ZERO; range];
        for t in &terms {
            let osc = (0..q)
                .map(|a| {
                    let row = &t.w[a * q..(a + 1) * q];
                    let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
                    Interval::point(hi) - Interval::point(lo)
                })
                .fold(Interval::ZERO, |m, v| m.max(&v));
            // The term moves only when x(h) moves, which E_m fixes iff |h| < m.
            for m in 1..=group.word_length(&t.offset) {
                deltas[m - 1] = deltas[m - 1] + osc * beta;
            }
        }
        let deltas: Vec<f64> = deltas.iter().map(|d| d.hi()).collect();
        let profile = VariationProfile::from_deltas(&group, deltas, 0.0)?;
        Ok(PairPotential {
            group,
            beta,
            q,
            field,
            terms,
            influence,
            profile,
        })
    }

    /// Nearest-neighbour chain on `{0, 1}` with spins `s = 2a - 1`:
    /// `u(a) = h s_a` and `W_{+1}(a, b) = J s_a s_b`.
    pub fn ising_chain(group: GroupContext, beta: f64, j: f64, h: f64) -> Result<Self> {
        let s = |a: usize| 2.0 * a as f64 - 1.0;
        let mut offset = vec![0i64; group.identity().coords().len()];
        offset[0] = 1;
        Self::new(
            group,
            beta,
            PairParams {
                q: 2,
                field: vec![h * s(0), h * s(1)],
                couplings: vec![PairCoupling {
                    offset,
                    matrix: (0..2)
                        .map(|a| (0..2).map(|b| j * s(a) * s(b)).collect())
                        .collect(),
                }],
            },
        )
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// `u(a)` without the inverse temperature.
    pub fn field(&self, a: Letter) -> f64 {
        self.field[a as usize]
    }

    /// Offsets and coupling matrices `W_h(a, b)` without the inverse
    /// temperature.
    pub fn couplings(&self) -> impl Iterator<Item = (&Site, &[f64])> {
        self.terms.iter().map(|t| (&t.offset, t.w.as_slice()))
    }

    fn w(&self, t: &Term, a: Letter, b: Letter) -> f64 {
        t.w[a as usize * self.q + b as usize]
    }

    /// Extreme of `φ_F` over `[w]` with exterior letters drawn from `letters`.
    fn cylinder_extreme(&self, w: &Pattern, letters: &[Letter], upper: bool) -> Result<Interval> {
        self.validate_pattern(w)?;
        let mut interior = Interval::ZERO;
        // Exterior site -> accumulated W terms as a function of its letter.
        let mut exterior: BTreeMap<Site, Vec<Interval>> = BTreeMap::new();
        for (g, a) in w.iter() {
            interior = interior + Interval::point(self.field(a));
            for t in &self.terms {
                let o = self.group.mul(&t.offset, g);
                match w.get(&o) {
                    Some(b) => interior = interior + Interval::point(self.w(t, a, b)),
                    None => {
                        let acc = exterior
                            .entry(o)
                            .or_insert_with(|| vec![Interval::ZERO; letters.len()]);
                        for (slot, &b) in acc.iter_mut().zip(letters) {
                            *slot = *slot + Interval::point(self.w(t, a, b));
                        }
                    }
                }
            }
        }
        let mut total = interior;
        for acc in exterior.values() {
            let pick = if upper {
                acc.iter().skip(1).fold(acc[0], |m, v| m.max(v))
            } else {
                acc.iter().skip(1).fold(acc[0], |m, v| m.min(v))
            };
            total = total + pick;
        }
        Ok(total * self.beta)
    }

    fn all_letters(&self) -> Vec<Letter> {
        (0..self.q as Letter).collect()
    }
}

impl Potential for PairPotential {
    fn group(&self) -> &GroupContext {
        &self.group
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn alphabet(&self) -> Alphabet {
        Alphabet::Finite(self.q as u32)
    }

    fn describe(&self) -> String {
        format!(
            "pair potential on {} letters with {} coupling offsets, beta={}",
            self.q,
            self.terms.len(),
            self.beta
        )
    }

    fn eval_at(&self, g: &Site, x: &BoundaryCondition) -> Interval {
        let a = x.letter(g);
        let mut acc = Interval::point(self.field(a));
        for t in &self.terms {
            let b = x.letter(&self.group.mul(&t.offset, g));
            acc = acc + Interval::point(self.w(t, a, b));
        }
        acc * self.beta
    }

    fn profile(&self) -> Option<&VariationProfile> {
        Some(&self.profile)
    }

    fn sup_cylinder(&self, w: &Pattern) -> Result<Interval> {
        self.cylinder_extreme(w, &self.all_letters(), true)
    }

    fn inf_cylinder(&self, w: &Pattern) -> Result<Interval> {
        self.cylinder_extreme(w, &self.all_letters(), false)
    }

    fn sup_cylinder_within(&self, w: &Pattern, alphabet: &FiniteAlphabet) -> Result<Interval> {
        let a = self.effective_alphabet(alphabet)?;
        self.cylinder_extreme(w, a.letters(), true)
    }

    fn single_site_sup(&self, a: Letter) -> Interval {
        let mut acc = Interval::point(self.field(a));
        for t in &self.terms {
            let best = (0..self.q as Letter)
                .map(|b| self.w(t, a, b))
                .fold(f64::NEG_INFINITY, f64::max);
            acc = acc + Interval::point(best);
        }
        acc * self.beta
    }

    fn single_site_tail(&self, alphabet: &FiniteAlphabet) -> Result<Interval> {
        Ok((0..self.q as Letter)
            .filter(|a| !alphabet.contains(*a))
            .map(|a| self.single_site_sup(a).exp())
            .sum())
    }

    fn influence(&self) -> Option<SiteSet> {
        Some(self.influence.clone())
    }

    fn mean_energy(&self, letters: &[Letter], q: &[Interval]) -> Result<Interval> {
        check_letters(self, letters, q.len())?;
        let mut acc: Interval = letters
            .iter()
            .zip(q)
            .map(|(&a, &qa)| qa * self.field(a))
            .sum();
        for t in &self.terms {
            for (&a, &qa) in letters.iter().zip(q) {
                for (&b, &qb) in letters.iter().zip(q) {
                    acc = acc + qa * qb * self.w(t, a, b);
                }
            }
        }
        Ok(acc * self.beta)
    }

    fn mean_energy_gradient(&self, letters: &[Letter], q: &[f64]) -> Result<Vec<f64>> {
        check_letters(self, letters, q.len())?;
        Ok(letters
            .iter()
            .map(|&a| {
                let mut g = self.field(a);
                for t in &self.terms {
                    for (&b, &qb) in letters.iter().zip(q) {
                        g += (self.w(t, a, b) + self.w(t, b, a)) * qb;
                    }
                }
                self.beta * g
            })
            .collect())
    }

    fn sup_norm_on(&self, alphabet: &FiniteAlphabet) -> Result<f64> {
        let al = self.effective_alphabet(alphabet)?;
        let mut best = 0.0f64;
        for &a in al.letters() {
            let mut acc = Interval::point(self.field(a).abs());
            for t in &self.terms {
                let m = al
                    .letters()
                    .iter()
                    .map(|&b| self.w(t, a, b).abs())
                    .fold(0.0, f64::max);
                acc = acc + Interval::point(m);
            }
            best = best.max((acc * self.beta).hi());
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Norm;
    use crate::potential::{decode_pattern, delta_f_bound, phi_f, v_f};

    fn chain() -> PairPotential {
        let g = GroupContext::lattice(1, Norm::Linf).unwrap();
        PairPotential::ising_chain(g, 1.0, 0.7, -0.3).unwrap()
    }

    /// Brute force over every exterior letter assignment on `F ∪ RF`.
    fn brute_extremes(p: &PairPotential, w: &Pattern) -> (f64, f64) {
        let group = p.group().clone();
        let ext: Vec<Site> = group
            .product_set(&p.influence().unwrap(), w.support())
            .unwrap()
            .difference(w.support())
            .iter()
            .cloned()
            .collect();
        let letters: Vec<Letter> = (0..p.q() as Letter).collect();
        let mut buf = vec![0; ext.len()];
        let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
        for i in 0..(p.q() as u64).pow(ext.len() as u32) {
            decode_pattern(i, &letters, &mut buf);
            let x = BoundaryCondition::new(0, ext.iter().cloned().zip(buf.iter().copied()))
                .with_pattern(w);
            let v = phi_f(p, w.support(), &x).mid();
            hi = hi.max(v);
            lo = lo.min(v);
        }
        (hi, lo)
    }

    #[test]
    fn cylinder_extremes_match_brute_force() {
        let p = chain();
        let f = SiteSet::from(vec![Site::new(&[0]), Site::new(&[1])]);
        for letters in [[0, 0], [1, 1], [0, 1]] {
            let w = Pattern::new(f.clone(), letters.to_vec()).unwrap();
            let (hi, lo) = brute_extremes(&p, &w);
            assert!(p.sup_cylinder(&w).unwrap().contains(hi));
            assert!(p.inf_cylinder(&w).unwrap().contains(lo));
        }
    }

    #[test]
    fn variation_is_supported_on_the_range() {
        let p = chain();
        // osc = max_a (|J| - (-|J|)) = 2|J|
        assert!((p.profile().unwrap().delta(1) - 1.4).abs() < 1e-12);
        assert_eq!(p.profile().unwrap().delta(2), 0.0);
        assert!((p.profile().unwrap().total() - 2.8).abs() < 1e-12);
        let f = p.group().folner_set(5).unwrap();
        assert!(v_f(&p, &f).unwrap().hi() <= 2.8 * 11.0 + 1e-9);
        assert!(delta_f_bound(&p, &f).unwrap().hi() > 0.0);
    }

    #[test]
    fn mean_energy_matches_enumeration() {
        let p = chain();
        let q = [0.3, 0.7];
        let qi: Vec<Interval> = q.iter().map(|&v| Interval::point(v)).collect();
        let e = p.mean_energy(&[0, 1], &qi).unwrap();
        let s = |a: usize| 2.0 * a as f64 - 1.0;
        let mut want = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                want += q[a] * q[b] * (-0.3 * s(a) + 0.7 * s(a) * s(b));
            }
        }
        assert!((e.mid() - want).abs() < 1e-12);
    }

    #[test]
    fn rejects_identity_offsets() {
        let g = GroupContext::lattice(1, Norm::Linf).unwrap();
        let params = PairParams {
            q: 2,
            field: vec![],
            couplings: vec![PairCoupling {
                offset: vec![0],
                matrix: vec![vec![0.0; 2]; 2],
            }],
        };
        assert!(PairPotential::new(g, 1.0, params).is_err());
    }
}
