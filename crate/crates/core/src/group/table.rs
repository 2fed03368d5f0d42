use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use serde::Deserialize;

use super::{GroupOracle, GrowthBound, Site};
use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    elements: Vec<String>,
    identity: String,
    generators: Vec<String>,
    table: Vec<Vec<String>>,
}

/// A finite group given by its multiplication table.
///
/// Elements are renumbered in shortlex order of their minimal words over the
/// (symmetrized) generators, and a site is the one-element vector holding that
/// number. Site order therefore coincides with shortlex order on normal forms.
#[derive(Clone, Debug)]
pub struct CayleyTable {
    names: Vec<String>,
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
    length: Vec<usize>,
    generators: Vec<usize>,
    spheres: Vec<usize>,
}

/// Largest order for which associativity is checked on every triple.
const FULL_ASSOCIATIVITY_CHECK: usize = 160;

impl CayleyTable {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::config(
                path.display().to_string(),
                format!("cannot read table: {e}"),
            )
        })?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config { path: p, message } => {
                Error::config(format!("{}:{p}", path.display()), message)
            }
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: TableFile = serde::Deserialize::deserialize(de)
            .map_err(|e| Error::config("table", e.to_string()))?;
        Self::from_parts(
            &file.elements,
            &file.identity,
            &file.generators,
            &file.table,
        )
    }

    pub fn from_parts(
        elements: &[String],
        identity: &str,
        generators: &[String],
        table: &[Vec<String>],
    ) -> Result<Self> {
        let n = elements.len();
        if n == 0 {
            return Err(Error::config("elements", "empty element list"));
        }
        let index: BTreeMap<&str, usize> = elements
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        if index.len() != n {
            return Err(Error::config("elements", "duplicate element names"));
        }
        let lookup = |name: &str, path: String| -> Result<usize> {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::config(path, format!("unknown element `{name}`")))
        };
        let e = lookup(identity, "identity".into())?;
        if table.len() != n {
            return Err(Error::config("table", format!("expected {n} rows")));
        }
        let mut raw = vec![vec![0usize; n]; n];
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::config(
                    format!("table[{i}]"),
                    format!("expected {n} entries"),
                ));
            }
            for (j, name) in row.iter().enumerate() {
                raw[i][j] = lookup(name, format!("table[{i}][{j}]"))?;
            }
        }
        for a in 0..n {
            if raw[e][a] != a || raw[a][e] != a {
                return Err(Error::config(
                    "table",
                    format!("identity law fails at `{}`", elements[a]),
                ));
            }
        }
        let mut raw_inv = vec![usize::MAX; n];
        for a in 0..n {
            let b = (0..n)
                .find(|&b| raw[a][b] == e && raw[b][a] == e)
                .ok_or_else(|| {
                    Error::config(
                        "table",
                        format!("`{}` has no two-sided inverse", elements[a]),
                    )
                })?;
            raw_inv[a] = b;
        }
        let triples: Box<dyn Iterator<Item = (usize, usize, usize)>> = if n
            <= FULL_ASSOCIATIVITY_CHECK
        {
            Box::new(
                (0..n).flat_map(move |a| (0..n).flat_map(move |b| (0..n).map(move |c| (a, b, c)))),
            )
        } else {
            // Deterministic stride through the triples for large tables.
            let total = n * n * n;
            let step = total / (FULL_ASSOCIATIVITY_CHECK.pow(3)) + 1;
            Box::new(
                (0..total)
                    .step_by(step)
                    .map(move |t| (t / (n * n), (t / n) % n, t % n)),
            )
        };
        for (a, b, c) in triples {
            if raw[raw[a][b]][c] != raw[a][raw[b][c]] {
                return Err(Error::config(
                    "table",
                    format!(
                        "associativity fails on ({}, {}, {})",
                        elements[a], elements[b], elements[c]
                    ),
                ));
            }
        }

        let mut gens: Vec<usize> = Vec::new();
        for (i, g) in generators.iter().enumerate() {
            let a = lookup(g, format!("generators[{i}]"))?;
            for x in [a, raw_inv[a]] {
                if x != e && !gens.contains(&x) {
                    gens.push(x);
                }
            }
        }

        // Breadth-first search with ordered generator expansion visits elements
        // in shortlex order of their minimal words.
        let mut order = vec![usize::MAX; n];
        let mut length = vec![0usize; n];
        let mut visited = vec![e];
        order[e] = 0;
        let mut queue = VecDeque::from([e]);
        while let Some(a) = queue.pop_front() {
            for &s in &gens {
                let b = raw[a][s];
                if order[b] == usize::MAX {
                    order[b] = visited.len();
                    length[b] = length[a] + 1;
                    visited.push(b);
                    queue.push_back(b);
                }
            }
        }
        if visited.len() != n {
            return Err(Error::config(
                "generators",
                "generators do not generate the group",
            ));
        }
        let mul: Vec<Vec<usize>> = visited
            .iter()
            .map(|&a| visited.iter().map(|&b| order[raw[a][b]]).collect())
            .collect();
        let inv = visited.iter().map(|&a| order[raw_inv[a]]).collect();
        let names = visited.iter().map(|&a| elements[a].clone()).collect();
        let canon_len: Vec<usize> = visited.iter().map(|&a| length[a]).collect();
        let diameter = canon_len.iter().copied().max().unwrap_or(0);
        let mut spheres = vec![0usize; diameter + 1];
        for &l in &canon_len {
            spheres[l] += 1;
        }
        Ok(CayleyTable {
            names,
            mul,
            inv,
            length: canon_len,
            generators: gens.iter().map(|&g| order[g]).collect(),
            spheres,
        })
    }

    pub fn element_name(&self, s: &Site) -> Option<&str> {
        self.idx(s).map(|i| self.names[i].as_str())
    }

    pub fn site_of(&self, name: &str) -> Option<Site> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| Site::new(&[i as i64]))
    }

    fn idx(&self, s: &Site) -> Option<usize> {
        match s.coords() {
            [i] if *i >= 0 && (*i as usize) < self.names.len() => Some(*i as usize),
            _ => None,
        }
    }

    fn site(i: usize) -> Site {
        Site::new(&[i as i64])
    }
}

impl GroupOracle for CayleyTable {
    fn name(&self) -> String {
        format!("finite group of order {}", self.names.len())
    }

    fn identity(&self) -> Site {
        Self::site(0)
    }

    fn generators(&self) -> Vec<Site> {
        self.generators.iter().map(|&g| Self::site(g)).collect()
    }

    fn is_element(&self, a: &Site) -> bool {
        self.idx(a).is_some()
    }

    fn multiply(&self, a: &Site, b: &Site) -> Site {
        let (i, j) = (self.idx(a).expect("element"), self.idx(b).expect("element"));
        Self::site(self.mul[i][j])
    }

    fn inverse(&self, a: &Site) -> Site {
        Self::site(self.inv[self.idx(a).expect("element")])
    }

    fn word_length(&self, a: &Site) -> usize {
        self.length[self.idx(a).expect("element")]
    }

    fn order(&self) -> Option<usize> {
        Some(self.names.len())
    }

    fn sphere_size(&self, k: usize) -> Option<usize> {
        Some(self.spheres.get(k).copied().unwrap_or(0))
    }

    fn growth_bound(&self) -> GrowthBound {
        GrowthBound {
            coef: self.spheres.iter().copied().max().unwrap_or(1) as f64,
            power: 0,
        }
    }
}

/// The infinite dihedral group `Z ⋊ Z/2`.
///
/// A site `[n, s]` stands for `a^n b^s`, with product
/// `(n1,s1)(n2,s2) = (n1 + (-1)^s1 n2, s1 xor s2)` and generators
/// `a^{±1} = [±1, 0]`, `b = [0, 1]`.
#[derive(Clone, Copy, Debug, Default)]
pub struct InfiniteDihedral;

impl InfiniteDihedral {
    fn parts(a: &Site) -> (i64, i64) {
        match a.coords() {
            [n, s] => (*n, *s),
            _ => panic!("not an element of the infinite dihedral group: {a:?}"),
        }
    }
}

impl GroupOracle for InfiniteDihedral {
    fn name(&self) -> String {
        "infinite dihedral group".into()
    }

    fn identity(&self) -> Site {
        Site::new(&[0, 0])
    }

    fn generators(&self) -> Vec<Site> {
        vec![Site::new(&[1, 0]), Site::new(&[-1, 0]), Site::new(&[0, 1])]
    }

    fn is_element(&self, a: &Site) -> bool {
        matches!(a.coords(), [_, s] if *s == 0 || *s == 1)
    }

    fn multiply(&self, a: &Site, b: &Site) -> Site {
        let (n1, s1) = Self::parts(a);
        let (n2, s2) = Self::parts(b);
        let n = if s1 == 0 { n1 + n2 } else { n1 - n2 };
        Site::new(&[n, s1 ^ s2])
    }

    fn inverse(&self, a: &Site) -> Site {
        let (n, s) = Self::parts(a);
        if s == 0 {
            Site::new(&[-n, 0])
        } else {
            a.clone()
        }
    }

    fn word_length(&self, a: &Site) -> usize {
        let (n, s) = Self::parts(a);
        n.unsigned_abs() as usize + s as usize
    }

    fn order(&self) -> Option<usize> {
        None
    }

    fn sphere_size(&self, k: usize) -> Option<usize> {
        Some(match k {
            0 => 1,
            1 => 3,
            _ => 4,
        })
    }

    fn growth_bound(&self) -> GrowthBound {
        GrowthBound {
            coef: 4.0,
            power: 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{GroupContext, SiteSet};
    use std::sync::Arc;

    pub(crate) const S3: &str = r#"{
        "elements": ["e", "r", "rr", "s", "sr", "srr"],
        "identity": "e",
        "generators": ["r", "s"],
        "table": [
            ["e",   "r",   "rr",  "s",   "sr",  "srr"],
            ["r",   "rr",  "e",   "srr", "s",   "sr"],
            ["rr",  "e",   "r",   "sr",  "srr", "s"],
            ["s",   "sr",  "srr", "e",   "r",   "rr"],
            ["sr",  "srr", "s",   "rr",  "e",   "r"],
            ["srr", "s",   "sr",  "r",   "rr",  "e"]
        ]
    }"#;

    #[test]
    fn s3_is_non_abelian_and_balls_saturate() {
        let t = CayleyTable::from_json(S3).unwrap();
        let g = GroupContext::from_oracle(Arc::new(t.clone())).unwrap();
        let r = t.site_of("r").unwrap();
        let s = t.site_of("s").unwrap();
        assert_ne!(g.mul(&r, &s), g.mul(&s, &r));
        assert_eq!(g.ball(0).unwrap().len(), 1);
        assert_eq!(g.ball(5).unwrap().len(), 6);
        let total: usize = (0..6).map(|k| g.sphere_size(k).unwrap()).sum();
        assert_eq!(total, 6);
        // inverse sets differ from negation-style shortcuts in non-abelian groups
        let f: SiteSet = [r.clone(), g.mul(&s, &r)].into_iter().collect();
        let finv = g.inverse_set(&f);
        assert_eq!(finv.len(), 2);
        for a in &f {
            assert!(finv.contains(&g.inverse(a)));
        }
    }

    #[test]
    fn rejects_broken_tables() {
        let bad = S3.replace(
            r#"["r",   "rr",  "e",   "srr", "s",   "sr"]"#,
            r#"["r",   "rr",  "e",   "sr", "s",   "srr"]"#,
        );
        assert!(CayleyTable::from_json(&bad).is_err());
        let not_generating = S3.replace(r#""generators": ["r", "s"]"#, r#""generators": ["r"]"#);
        assert!(CayleyTable::from_json(&not_generating).is_err());
    }

    #[test]
    fn dihedral_laws() {
        let g = GroupContext::from_oracle(Arc::new(InfiniteDihedral)).unwrap();
        let ball = g.ball(4).unwrap();
        for a in &ball {
            assert_eq!(g.mul(a, &g.inverse(a)), *g.identity());
            for b in &ball {
                for c in g.generators() {
                    assert_eq!(g.mul(&g.mul(a, b), c), g.mul(a, &g.mul(b, c)));
                }
            }
        }
        for k in 0..6 {
            let outer = g.ball(k).unwrap();
            for a in &outer {
                assert!(g.word_length(a) <= k);
            }
            if k > 0 {
                assert_eq!(
                    outer.len() - g.ball(k - 1).unwrap().len(),
                    g.sphere_size(k).unwrap()
                );
            }
        }
    }
}
