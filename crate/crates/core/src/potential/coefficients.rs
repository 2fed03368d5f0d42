//! Closed-form coefficient families and their certified tails.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupContext, Site};
use crate::interval::Interval;

use super::Letter;

/// Largest number of explicit terms summed before a series must have reached
/// its geometric regime.
const MAX_SERIES_TERMS: usize = 1_000_000;

/// Upper bound on `Σ_{j ≥ m} coef · (j+1)^p · r^j` for `0 <= r < 1`.
///
/// Terms are summed explicitly until the ratio of consecutive terms, which is
/// non-increasing in `j`, drops below one; the rest is closed by a geometric
/// series with that ratio.
pub fn poly_geometric_tail(coef: f64, p: u32, r: f64, m: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&r) || coef < 0.0 {
        return Err(Error::Usage(format!("series ratio {r} outside [0,1)")));
    }
    if r == 0.0 || coef == 0.0 {
        return Ok(if m == 0 { coef } else { 0.0 });
    }
    let ri = Interval::point(r);
    let mut acc = Interval::ZERO;
    let mut j = m;
    loop {
        let term =
            Interval::point(coef) * Interval::point((j + 1) as f64).powi(p) * ri.powi(j as u32);
        let growth = Interval::point((j + 2) as f64)
            .checked_div(&Interval::point((j + 1) as f64))
            .expect("positive")
            .powi(p);
        let ratio = growth * ri;
        if ratio.hi() < 0.999 {
            let rest = term
                .checked_div(&(Interval::ONE - ratio))
                .expect("ratio below one");
            return Ok((acc + rest).hi());
        }
        acc = acc + term;
        j += 1;
        if j - m > MAX_SERIES_TERMS {
            return Err(Error::Numeric(
                "series tail did not reach its geometric regime".into(),
            ));
        }
    }
}

/// The self-interaction coefficient `c(1_G, n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SelfCoefficient {
    /// `slope · n + offset`.
    Linear {
        slope: f64,
        #[serde(default)]
        offset: f64,
    },
    /// `scale · n^exponent` with `exponent >= 1`.
    Power { scale: f64, exponent: f64 },
    /// `scale · ln(1 + n)`.
    Log { scale: f64 },
}

/// Outcome of a check that may be undecidable from finite data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Verified,
    Refuted,
    Inconclusive,
}

impl SelfCoefficient {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            SelfCoefficient::Linear { slope, offset } => {
                slope.is_finite() && offset.is_finite() && *slope > 0.0 && *offset >= 0.0
            }
            SelfCoefficient::Power { scale, exponent } => {
                scale.is_finite() && *scale > 0.0 && exponent.is_finite() && *exponent >= 1.0
            }
            SelfCoefficient::Log { scale } => scale.is_finite() && *scale > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(
                "self",
                format!("coefficient {self:?} must be non-negative and strictly increasing (power exponent >= 1)"),
            ))
        }
    }

    /// `c(n)` as an interval.
    pub fn value(&self, n: Letter) -> Interval {
        let x = Interval::point(n as f64);
        match self {
            SelfCoefficient::Linear { slope, offset } => x * *slope + *offset,
            SelfCoefficient::Power { scale, exponent } => {
                if n == 0 {
                    Interval::ZERO
                } else if exponent.fract() == 0.0 && *exponent <= 64.0 {
                    x.powi(*exponent as u32) * *scale
                } else {
                    (x.ln().expect("positive") * *exponent).exp() * *scale
                }
            }
            SelfCoefficient::Log { scale } => (x + 1.0).ln().expect("positive") * *scale,
        }
    }

    /// `exp(-β c(n))`.
    pub fn weight(&self, beta: f64, n: Letter) -> Interval {
        (-(self.value(n) * beta)).exp()
    }

    /// Interval containing `Σ_{n >= n0} exp(-β c(n))`.
    pub fn tail(&self, beta: f64, n0: u64) -> Result<Interval> {
        if !(beta > 0.0) {
            return Err(Error::Capability(
                "countable alphabets need a positive inverse temperature".into(),
            ));
        }
        let b = Interval::point(beta);
        let first = (-(self.value(n0.min(u32::MAX as u64) as Letter) * beta)).exp();
        let hi = match self {
            SelfCoefficient::Linear { slope, offset } => {
                let s = b * *slope;
                let num = (-(b * (Interval::point(n0 as f64) * *slope + *offset))).exp();
                let den = Interval::ONE - (-s).exp();
                let exact = num
                    .checked_div(&den)
                    .ok_or_else(|| Error::Numeric("degenerate geometric tail".into()))?;
                return Ok(exact);
            }
            SelfCoefficient::Power { scale, exponent } => {
                // Consecutive exponents grow by at least n0^(p-1) for n >= n0 >= 1.
                let start = n0.max(1);
                let head = if n0 == 0 {
                    Interval::ONE
                } else {
                    Interval::ZERO
                };
                let sn = Interval::point(start as f64);
                let lead = if exponent.fract() == 0.0 && *exponent <= 64.0 {
                    sn.powi(*exponent as u32)
                } else {
                    (sn.ln().expect("positive") * *exponent).exp()
                };
                let gap = if *exponent == 1.0 {
                    Interval::ONE
                } else {
                    (sn.ln().expect("positive") * (*exponent - 1.0)).exp()
                };
                let num = (-(b * lead * *scale)).exp();
                let den = Interval::ONE - (-(b * gap * *scale)).exp();
                (head
                    + num
                        .checked_div(&den)
                        .ok_or_else(|| Error::Numeric("degenerate tail".into()))?)
                .hi()
            }
            SelfCoefficient::Log { scale } => {
                let alpha = b * *scale;
                if alpha.lo() <= 1.0 {
                    return Err(Error::Capability(format!(
                        "exp(-β c(n)) = (1+n)^(-{}) is not summable",
                        alpha.lo()
                    )));
                }
                let base = Interval::point((n0 + 1) as f64);
                let lnb = base.ln().expect("positive");
                let t1 = (-(alpha * lnb)).exp();
                let t2 = ((Interval::ONE - alpha) * lnb)
                    .exp()
                    .checked_div(&(alpha - Interval::ONE))
                    .expect("alpha above one");
                (t1 + t2).hi()
            }
        };
        Ok(Interval::new(first.lo().min(hi), hi))
    }

    /// Whether `M log n <= c(n)` holds for all large `n`, decided from the
    /// closed form.
    pub fn dominates_log(&self, m: f64) -> Verdict {
        match self {
            SelfCoefficient::Linear { .. } | SelfCoefficient::Power { .. } => Verdict::Verified,
            SelfCoefficient::Log { scale } => {
                if m > *scale {
                    Verdict::Refuted
                } else if m < *scale {
                    Verdict::Verified
                } else {
                    Verdict::Inconclusive
                }
            }
        }
    }

    /// Whether the growth condition holds for every `M > 0`.
    pub fn dominates_every_log(&self) -> Verdict {
        match self {
            SelfCoefficient::Linear { .. } | SelfCoefficient::Power { .. } => Verdict::Verified,
            SelfCoefficient::Log { .. } => Verdict::Refuted,
        }
    }
}

/// One explicit coupling value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingEntry {
    pub site: Vec<i64>,
    pub value: f64,
}

/// The off-diagonal coefficient `C(g)` for `g != 1_G`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Coupling {
    /// `scale · λ^{|g|}`.
    Geometric { scale: f64, lambda: f64 },
    /// Finitely many explicit values, zero elsewhere.
    Table { entries: Vec<CouplingEntry> },
}

/// Precomputed sums of a coupling over the complements of word balls.
#[derive(Clone, Debug)]
pub struct CouplingTails {
    /// `ct[k]` contains `Σ_{|g| >= k} C(g)`, for `k = 0..=len-1`; `ct[0]`
    /// equals `ct[1]` because `C(1_G)` is not part of the coupling.
    ct: Vec<Interval>,
    /// `shell_weighted[k]` contains `Σ_{j >= k} |S_j| · Σ_{|g| >= j} C(g)`.
    shell_weighted: Vec<Interval>,
    /// Largest word length carrying a nonzero coefficient, if finite.
    range: Option<usize>,
}

impl CouplingTails {
    /// `Σ_{|g| >= k} C(g)`; beyond the precomputed range the last value is a
    /// valid upper bound.
    pub fn tail(&self, k: usize) -> Interval {
        let k = k.max(1);
        match self.ct.get(k) {
            Some(v) => *v,
            None => {
                if self.range.is_some_and(|r| k > r) {
                    Interval::ZERO
                } else {
                    Interval::new(0.0, self.ct.last().map(|v| v.hi()).unwrap_or(0.0))
                }
            }
        }
    }

    /// `Σ_{g != 1} C(g)`.
    pub fn total(&self) -> Interval {
        self.tail(1)
    }

    /// `Σ_{j >= k} |E_{j+1} \ E_j| · Σ_{|g| >= j} C(g)`.
    pub fn shell_weighted(&self, k: usize) -> Interval {
        let k = k.max(1);
        match self.shell_weighted.get(k) {
            Some(v) => *v,
            None => {
                if self.range.is_some_and(|r| k > r) {
                    Interval::ZERO
                } else {
                    Interval::new(
                        0.0,
                        self.shell_weighted.last().map(|v| v.hi()).unwrap_or(0.0),
                    )
                }
            }
        }
    }

    pub fn precomputed_len(&self) -> usize {
        self.ct.len()
    }

    pub fn range(&self) -> Option<usize> {
        self.range
    }
}

impl Coupling {
    pub fn validate(&self, group: &GroupContext) -> Result<()> {
        match self {
            Coupling::Geometric { scale, lambda } => {
                if !(scale.is_finite() && *scale >= 0.0 && (0.0..1.0).contains(lambda)) {
                    return Err(Error::config(
                        "coupling",
                        "geometric coupling needs scale >= 0 and 0 <= lambda < 1",
                    ));
                }
            }
            Coupling::Table { entries } => {
                for (i, e) in entries.iter().enumerate() {
                    let s = Site::new(&e.site);
                    if !group.is_element(&s) || s == *group.identity() {
                        return Err(Error::config(
                            format!("coupling.entries[{i}].site"),
                            "must be a non-identity group element",
                        ));
                    }
                    if !(e.value.is_finite() && e.value >= 0.0) {
                        return Err(Error::config(
                            format!("coupling.entries[{i}].value"),
                            "must be finite and non-negative",
                        ));
                    }
                }
            }
        }
        Ok(())
    }

    /// `C(g)`; zero at the identity.
    pub fn value(&self, group: &GroupContext, g: &Site) -> Interval {
        if g == group.identity() {
            return Interval::ZERO;
        }
        match self {
            Coupling::Geometric { scale, lambda } => {
                Interval::point(*lambda).powi(group.word_length(g) as u32) * *scale
            }
            Coupling::Table { entries } => entries
                .iter()
                .filter(|e| e.site.as_slice() == g.coords())
                .map(|e| Interval::point(e.value))
                .sum(),
        }
    }

    /// Sites with nonzero coefficient, when finitely many.
    pub fn support(&self, group: &GroupContext) -> Option<Vec<Site>> {
        match self {
            Coupling::Geometric { scale, .. } if *scale == 0.0 => Some(Vec::new()),
            Coupling::Geometric { .. } => None,
            Coupling::Table { entries } => {
                let mut v: Vec<Site> = entries
                    .iter()
                    .filter(|e| e.value > 0.0)
                    .map(|e| Site::new(&e.site))
                    .filter(|s| s != group.identity())
                    .collect();
                v.sort();
                v.dedup();
                Some(v)
            }
        }
    }

    /// Precomputes tails up to word length `horizon`.
    pub fn tails(&self, group: &GroupContext, horizon: usize) -> Result<CouplingTails> {
        match self {
            Coupling::Table { .. } => {
                let support = self.support(group).unwrap_or_default();
                let range = support
                    .iter()
                    .map(|s| group.word_length(s))
                    .max()
                    .unwrap_or(0);
                let mut by_len = vec![Interval::ZERO; range + 2];
                for s in &support {
                    by_len[group.word_length(s)] =
                        by_len[group.word_length(s)] + self.value(group, s);
                }
                let mut ct = vec![Interval::ZERO; range + 2];
                for k in (1..=range).rev() {
                    ct[k] = ct[k + 1] + by_len[k];
                }
                ct[0] = ct[1];
                let mut sw = vec![Interval::ZERO; range + 2];
                for k in (1..=range).rev() {
                    sw[k] = sw[k + 1] + ct[k] * group.sphere_size(k)? as f64;
                }
                sw[0] = sw[1];
                Ok(CouplingTails {
                    ct,
                    shell_weighted: sw,
                    range: Some(range),
                })
            }
            Coupling::Geometric { scale, lambda } => {
                if *scale == 0.0 || *lambda == 0.0 {
                    let ct = vec![Interval::ZERO; 2];
                    return Ok(CouplingTails {
                        shell_weighted: ct.clone(),
                        ct,
                        range: Some(0),
                    });
                }
                let gb = group.growth_bound();
                let p = gb.power;
                let lam = Interval::point(*lambda);
                // Cut-off where the explicit sums stop and the analytic bound starts.
                let mut cut = horizon + 64;
                let ratio_at = |l: usize| {
                    ((l + 2) as f64 / (l + 1) as f64).powi(p as i32) * lambda * (1.0 + 1e-12)
                };
                while ratio_at(cut) >= 0.999 {
                    cut *= 2;
                    if cut > MAX_SERIES_TERMS {
                        return Err(Error::Numeric("coupling decays too slowly".into()));
                    }
                }
                let mut shells = Vec::with_capacity(cut + 1);
                for j in 0..=cut {
                    shells.push(group.sphere_size(j)? as f64);
                }
                // Σ_{|g| >= cut} C(g) <= scale Σ_{j >= cut} coef (j+1)^p λ^j.
                let rest = *scale * poly_geometric_tail(gb.coef, p, *lambda, cut)?;
                let rest = Interval::new(0.0, rest * (1.0 + 1e-12));
                let mut ct = vec![Interval::ZERO; cut + 1];
                ct[cut] = rest;
                for k in (1..cut).rev() {
                    ct[k] = ct[k + 1] + lam.powi(k as u32) * (*scale * shells[k]);
                }
                ct[0] = ct[1];
                // For k >= cut: Σ_{|g|>=k} C(g) <= scale·coef (k+1)^p λ^k / (1 - ρ),
                // so the shell-weighted remainder is a polynomial-geometric series.
                let rho = ratio_at(cut);
                let pref = *scale * gb.coef / (1.0 - rho);
                let sw_rest = pref * poly_geometric_tail(gb.coef, 2 * p, *lambda, cut)?;
                let mut sw = vec![Interval::ZERO; cut + 1];
                sw[cut] = Interval::new(0.0, sw_rest * (1.0 + 1e-9));
                for k in (1..cut).rev() {
                    sw[k] = sw[k + 1] + ct[k] * shells[k];
                }
                sw[0] = sw[1];
                Ok(CouplingTails {
                    ct,
                    shell_weighted: sw,
                    range: None,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Norm;

    #[test]
    fn geometric_tail_closed_form() {
        // Σ_{j>=3} 2·(1/2)^j = 2·(1/8)/(1/2) = 0.5
        let t = poly_geometric_tail(2.0, 0, 0.5, 3).unwrap();
        assert!((t - 0.5).abs() < 1e-14 && t >= 0.5);
        // Σ_{j>=0} (j+1) r^j = 1/(1-r)^2
        let r = 0.3;
        let t = poly_geometric_tail(1.0, 1, r, 0).unwrap();
        assert!(t >= 1.0 / (1.0 - r) / (1.0 - r));
        assert!(t < 1.0 / (1.0 - r) / (1.0 - r) * 1.5);
    }

    #[test]
    fn linear_self_tail_is_exact_geometric() {
        let c = SelfCoefficient::Linear {
            slope: 1.0,
            offset: 0.0,
        };
        let t = c.tail(1.0, 0).unwrap();
        assert!(t.contains(1.0 / (1.0 - (-1.0f64).exp())));
        let n = 10u64;
        let t = c.tail(1.0, n + 1).unwrap();
        let want = (-(n as f64 + 1.0)).exp() / (1.0 - (-1.0f64).exp());
        assert!(t.contains(want) && t.width() < 1e-18);
    }

    #[test]
    fn self_tails_dominate_explicit_partial_sums() {
        let forms = [
            SelfCoefficient::Linear {
                slope: 0.7,
                offset: 0.2,
            },
            SelfCoefficient::Power {
                scale: 0.3,
                exponent: 2.0,
            },
            SelfCoefficient::Power {
                scale: 0.5,
                exponent: 1.5,
            },
            SelfCoefficient::Log { scale: 3.0 },
        ];
        for c in forms {
            for n0 in [0u64, 1, 5, 20] {
                let t = c.tail(1.0, n0).unwrap();
                let explicit: f64 = (n0..n0 + 5000)
                    .map(|n| c.weight(1.0, n as Letter).lo())
                    .sum();
                assert!(explicit <= t.hi(), "{c:?} n0={n0}: {explicit} > {}", t.hi());
            }
        }
    }

    #[test]
    fn log_coefficient_growth_condition() {
        let c = SelfCoefficient::Log { scale: 1.0 };
        assert_eq!(c.dominates_log(2.0), Verdict::Refuted);
        assert_eq!(c.dominates_every_log(), Verdict::Refuted);
        let lin = SelfCoefficient::Linear {
            slope: 1.0,
            offset: 0.0,
        };
        assert_eq!(lin.dominates_log(100.0), Verdict::Verified);
        assert!(c.tail(1.0, 0).is_err());
    }

    #[test]
    fn geometric_coupling_tails_on_the_line() {
        let g = GroupContext::lattice(1, Norm::Linf).unwrap();
        let c = Coupling::Geometric {
            scale: 1.0,
            lambda: 0.5,
        };
        let t = c.tails(&g, 64).unwrap();
        // Σ_{g != 0} (1/2)^{|g|} = 2; Σ_{|g| >= k} = 4·2^{-k}
        assert!(t.total().contains(2.0));
        for k in 1..40 {
            assert!(t.tail(k).contains(4.0 * 0.5f64.powi(k as i32)));
            // Σ_{j >= k} 2·4·2^{-j} = 16·2^{-k}
            assert!(t.shell_weighted(k).contains(16.0 * 0.5f64.powi(k as i32)));
        }
        assert!(t.shell_weighted(1).contains(8.0));
    }

    #[test]
    fn geometric_coupling_tails_against_ball_enumeration() {
        for (d, norm) in [(2, Norm::Linf), (2, Norm::L1), (3, Norm::L1)] {
            let g = GroupContext::lattice(d, norm).unwrap();
            let c = Coupling::Geometric {
                scale: 0.8,
                lambda: 0.3,
            };
            let t = c.tails(&g, 16).unwrap();
            let ball = g.ball(14).unwrap();
            for k in 1..6 {
                let explicit: f64 = ball
                    .iter()
                    .filter(|s| g.word_length(s) >= k)
                    .map(|s| c.value(&g, s).lo())
                    .sum();
                assert!(explicit <= t.tail(k).hi());
                assert!(t.tail(k).hi() - explicit < 1e-4);
            }
        }
    }

    #[test]
    fn table_coupling_has_finite_range() {
        let g = GroupContext::lattice(1, Norm::Linf).unwrap();
        let c = Coupling::Table {
            entries: vec![
                CouplingEntry {
                    site: vec![1],
                    value: 0.5,
                },
                CouplingEntry {
                    site: vec![-2],
                    value: 0.25,
                },
            ],
        };
        let t = c.tails(&g, 8).unwrap();
        assert_eq!(t.total(), Interval::point(0.75));
        assert_eq!(t.tail(2), Interval::point(0.25));
        assert_eq!(t.tail(3), Interval::ZERO);
        assert_eq!(t.tail(50), Interval::ZERO);
        assert_eq!(t.range(), Some(2));
    }
}
