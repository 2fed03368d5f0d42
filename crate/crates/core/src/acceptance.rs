//! The acceptance suite: one check per headline criterion, each timed.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dobrushin::{rho_numeric, uniqueness_certificate, Uniqueness};
use crate::enumerate::Budget;
use crate::error::Result;
use crate::group::{lattice_box, GroupContext, Norm, Site, SiteSet};
use crate::oracle::ising_chain_pressure;
use crate::potential::{
    BoundaryCondition, CountablePotts, FiniteAlphabet, Letter, PairCoupling, PairParams,
    PairPotential, Pattern, Potential, SelfCoefficient, SingleSitePotential,
};
use crate::sampler::empirical_kernel_check;
use crate::specification::{bowen_gibbs_check, consistency_check, invariance_check};
use crate::thermo::{
    partition_function, partition_function_countable, pressure_bracket, segment_candidates,
    shearer_check, BracketConfig, TruncationMode,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionOutcome {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub runtime_secs: f64,
    pub limit_secs: Option<f64>,
    pub detail: String,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        let limit = self
            .limit_secs
            .map(|l| format!(" (limit {l} s)"))
            .unwrap_or_default();
        format!(
            "{} {:<22} {:>8.3} s{}  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.runtime_secs,
            limit,
            self.detail
        )
    }
}

type Check = fn(u64) -> Result<(bool, String)>;

/// Identifier, title, runtime limit in seconds, and check.
pub const CRITERIA: [(&str, &str, Option<f64>, Check); 8] = [
    (
        "single-site-countable",
        "single-site countable pressure",
        Some(1.0),
        single_site_countable,
    ),
    (
        "nn-transfer-matrix",
        "NN chain against transfer matrix",
        Some(30.0),
        nn_transfer_matrix,
    ),
    (
        "shearer",
        "Shearer inequality suite",
        Some(60.0),
        shearer_suite,
    ),
    (
        "kernel-consistency",
        "kernel consistency",
        Some(10.0),
        kernel_consistency,
    ),
    (
        "bowen-gibbs",
        "Bowen-Gibbs kernel bounds",
        Some(60.0),
        bowen_gibbs,
    ),
    (
        "dobrushin-threshold",
        "Dobrushin threshold",
        Some(30.0),
        dobrushin_threshold,
    ),
    (
        "sampler-fidelity",
        "sampler fidelity",
        Some(60.0),
        sampler_fidelity,
    ),
    (
        "translation-invariance",
        "translation invariance",
        None,
        translation_invariance,
    ),
];

pub fn run_criterion(id: &str, seed: u64) -> Option<CriterionOutcome> {
    let (id, title, limit, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let result = check(seed);
    let runtime = start.elapsed().as_secs_f64();
    let (ok, detail) = match result {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = limit.is_none_or(|l| runtime < l);
    Some(CriterionOutcome {
        id: id.to_string(),
        title: title.to_string(),
        passed: ok && in_time,
        runtime_secs: runtime,
        limit_secs: *limit,
        detail: if in_time {
            detail
        } else {
            format!("{detail}; over time limit")
        },
    })
}

/// Runs every criterion in order with the given suite seed.
pub fn run_suite(seed: u64) -> Vec<CriterionOutcome> {
    CRITERIA
        .iter()
        .map(|c| run_criterion(c.0, seed).expect("known id"))
        .collect()
}

fn line() -> GroupContext {
    GroupContext::lattice(1, Norm::Linf).expect("Z")
}

fn plane() -> GroupContext {
    GroupContext::lattice(2, Norm::Linf).expect("Z^2")
}

fn single_site_countable(_seed: u64) -> Result<(bool, String)> {
    let group = line();
    let p = SingleSitePotential::countable(
        group.clone(),
        1.0,
        SelfCoefficient::Linear {
            slope: 1.0,
            offset: 0.0,
        },
    )?;
    let a = FiniteAlphabet::up_to(40);
    let exact = 1.0 / (1.0 - (-1.0f64).exp());
    let z = partition_function_countable(
        &p,
        &SiteSet::singleton(group.identity().clone()),
        &a,
        Budget::default(),
    )?;
    let bracket = pressure_bracket(&p, &BracketConfig::standard(&p, a, 0, Budget::default())?)?;
    let target = 0.4586751;
    // The target is quoted to 7 decimals.
    let contains = bracket.lower.lo() <= target + 5e-8 && bracket.upper.hi() >= target - 5e-8;
    let ok = z.contains(exact) && z.width() <= 1e-6 && contains && bracket.width() <= 1e-5;
    Ok((
        ok,
        format!(
            "Z in [{:.10}, {:.10}] width {:.2e}; bracket [{:.9}, {:.9}] width {:.2e}",
            z.lo(),
            z.hi(),
            z.width(),
            bracket.lower.lo(),
            bracket.upper.hi(),
            bracket.width()
        ),
    ))
}

fn nn_transfer_matrix(seed: u64) -> Result<(bool, String)> {
    let group = line();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates = segment_candidates(&group, 12)?;
    let (mut inside, mut worst_gap) = (0, 0.0f64);
    let draws = 20;
    for _ in 0..draws {
        let j = rng.gen_range(-1.0..=1.0);
        let h = rng.gen_range(-0.5..=0.5);
        let p = PairPotential::ising_chain(group.clone(), 1.0, j, h)?;
        let cfg = BracketConfig {
            alphabet: FiniteAlphabet::first(2),
            mode: TruncationMode::Finite,
            candidates: candidates.clone(),
            ladder: Vec::new(),
            max_iter: 10_000,
            budget: Budget::default(),
        };
        let b = pressure_bracket(&p, &cfg)?;
        let oracle = ising_chain_pressure(1.0, j, h)?;
        if b.contains(oracle) {
            inside += 1;
        }
        worst_gap = worst_gap.max(b.upper.hi() - oracle);
    }
    Ok((
        inside == draws && worst_gap <= 0.05,
        format!("{inside}/{draws} brackets contain the oracle; worst upper gap {worst_gap:.4}"),
    ))
}

fn random_pair_potential(
    rng: &mut ChaCha8Rng,
    group: &GroupContext,
    q: u32,
) -> Result<PairPotential> {
    let offsets = [[1, 0], [0, 1], [1, 1], [2, 0]];
    let u = |rng: &mut ChaCha8Rng| rng.gen_range(-1.0..=1.0);
    let mut couplings = Vec::new();
    for o in offsets {
        if rng.gen_bool(0.6) {
            couplings.push(PairCoupling {
                offset: o.to_vec(),
                matrix: (0..q).map(|_| (0..q).map(|_| u(rng)).collect()).collect(),
            });
        }
    }
    let field = (0..q).map(|_| u(rng)).collect();
    PairPotential::new(
        group.clone(),
        1.0,
        PairParams {
            q,
            field,
            couplings,
        },
    )
}

fn random_subset(rng: &mut ChaCha8Rng, pool: &SiteSet, n: usize) -> SiteSet {
    let mut sites = pool.as_slice().to_vec();
    for i in 0..n {
        let j = rng.gen_range(i..sites.len());
        sites.swap(i, j);
    }
    sites.truncate(n);
    sites.into_iter().collect()
}

/// `k` random partitions of `f` into blocks, plus a few random extra subsets.
fn random_cover(rng: &mut ChaCha8Rng, f: &SiteSet, k: usize) -> Vec<SiteSet> {
    let mut cover = Vec::new();
    for _ in 0..k {
        let blocks = rng.gen_range(1..=f.len());
        let mut parts = vec![Vec::new(); blocks];
        for (i, s) in f.iter().enumerate() {
            let b = if i < blocks {
                i
            } else {
                rng.gen_range(0..blocks)
            };
            parts[b].push(s.clone());
        }
        cover.extend(
            parts
                .into_iter()
                .map(|p| p.into_iter().collect::<SiteSet>()),
        );
    }
    for _ in 0..rng.gen_range(0..=2) {
        let n = rng.gen_range(1..=f.len());
        cover.push(random_subset(rng, f, n));
    }
    cover
}

fn shearer_suite(seed: u64) -> Result<(bool, String)> {
    let group = plane();
    let pool = lattice_box(&[0, 0], &[2, 2]);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5EA7);
    let cases = 1000;
    let (mut violations, mut strict) = (0, 0);
    for _ in 0..cases {
        let q = rng.gen_range(1..=3u32);
        let p = random_pair_potential(&mut rng, &group, q)?;
        let n = rng.gen_range(1..=6);
        let f = random_subset(&mut rng, &pool, n);
        let k = rng.gen_range(1..=3);
        let cover = random_cover(&mut rng, &f, k);
        let r = shearer_check(
            &p,
            &f,
            &cover,
            k,
            &FiniteAlphabet::first(q),
            Budget::default(),
        )?;
        if !r.holds {
            violations += 1;
        }
        if r.certified_strict {
            strict += 1;
        }
    }
    Ok((
        violations == 0,
        format!("{cases} cases, {violations} violations, {strict} certified strictly"),
    ))
}

fn random_boundary(rng: &mut ChaCha8Rng, sites: &[Site], max_letter: Letter) -> BoundaryCondition {
    let mut x = BoundaryCondition::constant(rng.gen_range(0..=max_letter));
    for s in sites {
        if rng.gen_bool(0.5) {
            x.set(s.clone(), rng.gen_range(0..=max_letter));
        }
    }
    x
}

fn kernel_consistency(seed: u64) -> Result<(bool, String)> {
    let group = line();
    let p = CountablePotts::geometric(group, 0.1, 1.0, 0.5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC0);
    let near: Vec<Site> = (-4..=6).map(|c| Site::new(&[c])).collect();
    let mut boundaries = vec![
        BoundaryCondition::constant(0),
        BoundaryCondition::constant(2),
    ];
    boundaries.extend((0..4).map(|_| random_boundary(&mut rng, &near, 5)));
    let (mut worst, mut worst_slack, mut fine_worst, mut events) =
        (f64::NEG_INFINITY, 0.0f64, f64::NEG_INFINITY, 0);
    for d in 1..=2 {
        let k: SiteSet = [Site::new(&[0]), Site::new(&[d])].into_iter().collect();
        for f in k.iter() {
            let f = SiteSet::singleton(f.clone());
            for x in &boundaries {
                let r =
                    consistency_check(&p, &k, &f, x, &FiniteAlphabet::first(3), Budget::default())?;
                events += r.events;
                if r.excess > worst {
                    worst = r.excess;
                    worst_slack = r.slack;
                }
                // The same identity with a nearly exhaustive alphabet.
                let fine = consistency_check(
                    &p,
                    &k,
                    &f,
                    x,
                    &FiniteAlphabet::up_to(99),
                    Budget::default(),
                )?;
                fine_worst = fine_worst.max(fine.excess);
            }
        }
    }
    Ok((
        worst <= 1e-10 && fine_worst <= 1e-10,
        format!(
            "{events} events at |A|=3: worst excess over slack {worst:.2e} (slack {worst_slack:.2e}); at |A|=100 worst excess {fine_worst:.2e}"
        ),
    ))
}

fn bowen_gibbs(seed: u64) -> Result<(bool, String)> {
    let group = line();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xB0);
    let potts_hot = CountablePotts::geometric(group.clone(), 0.1, 1.0, 0.5)?;
    let potts_cold = potts_hot.with_beta(1.0)?;
    let nn = PairPotential::ising_chain(group.clone(), 1.0, 0.8, 0.3)?;
    let cases: [(&dyn Potential, FiniteAlphabet, Letter); 3] = [
        (&potts_cold, FiniteAlphabet::first(5), 6),
        (&potts_hot, FiniteAlphabet::first(5), 6),
        (&nn, FiniteAlphabet::first(2), 1),
    ];
    let near: Vec<Site> = (-3..=7).map(|c| Site::new(&[c])).collect();
    let (mut checked, mut violations, mut undecided) = (0, 0, 0);
    for (p, a, max_letter) in &cases {
        for n in 1..=4 {
            let f = lattice_box(&[0], &[n - 1]);
            for _ in 0..10 {
                let x = random_boundary(&mut rng, &near, *max_letter);
                let y = random_boundary(&mut rng, &near, *max_letter);
                let r = bowen_gibbs_check(*p, &f, &x, &y, a, Budget::default())?;
                checked += r.checked;
                violations += r.violations.len();
                undecided += r.undecided;
            }
        }
    }
    Ok((
        violations == 0,
        format!("{checked} ratios, {violations} violations, {undecided} undecided"),
    ))
}

fn dobrushin_threshold(seed: u64) -> Result<(bool, String)> {
    let p = CountablePotts::geometric(line(), 0.1, 1.0, 0.5)?;
    let lowish = uniqueness_certificate(&p, 0.1125)?;
    let highish = uniqueness_certificate(&p, 0.1375)?;
    let threshold = lowish.threshold.expect("nonzero coupling");
    let tuned = p.with_beta(0.1125)?;
    let (mut grid_ok, mut worst_ratio) = (true, 0.0f64);
    for g in -2..=2 {
        for h in -2..=2 {
            let est = rho_numeric(
                &tuned,
                &Site::new(&[g]),
                &Site::new(&[h]),
                &FiniteAlphabet::up_to(255),
                20,
                seed ^ ((g + 2) * 5 + h + 2) as u64,
            )?;
            let upper = est.upper.expect("Potts").hi();
            grid_ok &= est.lower <= upper;
            if upper > 0.0 {
                worst_ratio = worst_ratio.max(est.lower / upper);
            }
        }
    }
    let ok = threshold.contains(0.125)
        && lowish.verdict == Uniqueness::Unique
        && highish.verdict == Uniqueness::Inconclusive
        && grid_ok;
    Ok((
        ok,
        format!(
            "beta* in [{:.12}, {:.12}]; 0.1125 -> {:?}, 0.1375 -> {:?}; max lower/upper on grid {worst_ratio:.3}",
            threshold.lo(),
            threshold.hi(),
            lowish.verdict,
            highish.verdict
        ),
    ))
}

fn sampler_fidelity(seed: u64) -> Result<(bool, String)> {
    let group = line();
    let g = Site::new(&[0]);
    let n = 100_000;
    let zero = SingleSitePotential::finite(group.clone(), 1.0, vec![0.0, 0.0])?;
    let single = SingleSitePotential::finite(group.clone(), 1.0, vec![0.0, 1.0, -0.5, 0.25])?;
    let potts = CountablePotts::geometric(group, 0.1, 1.0, 0.5)?;
    let c0 = empirical_kernel_check(
        &zero,
        &g,
        &BoundaryCondition::constant(0),
        n,
        &FiniteAlphabet::first(2),
        seed,
        0.05,
    )?;
    let c1 = empirical_kernel_check(
        &single,
        &g,
        &BoundaryCondition::constant(0),
        n,
        &FiniteAlphabet::first(4),
        seed ^ 1,
        0.05,
    )?;
    let boundary = BoundaryCondition::new(
        0,
        [
            (Site::new(&[1]), 3),
            (Site::new(&[-1]), 3),
            (Site::new(&[2]), 1),
        ],
    );
    let c2 = empirical_kernel_check(
        &potts,
        &g,
        &boundary,
        n,
        &FiniteAlphabet::up_to(255),
        seed ^ 2,
        0.05,
    )?;
    let ok = c0.tv <= 0.01 && c1.tv <= 0.01 && c2.tv <= 0.02 + c2.tail_slack;
    let low_p = [&c0, &c1, &c2].iter().filter(|c| c.p_value < 0.001).count();
    Ok((
        ok,
        format!(
            "TV zero {:.4}, single-site {:.4}, Potts {:.4} (slack {:.1e}); chi-square p {:.3}/{:.3}/{:.3}{}",
            c0.tv,
            c1.tv,
            c2.tv,
            c2.tail_slack,
            c0.p_value,
            c1.p_value,
            c2.p_value,
            if low_p > 0 { format!("; {low_p} low p-value flagged") } else { String::new() }
        ),
    ))
}

fn translation_invariance(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7A);
    let plane = plane();
    let pair = random_pair_potential(&mut rng, &plane, 3)?;
    let potts = CountablePotts::geometric(line(), 0.5, 1.0, 0.5)?;
    let plane_pool = lattice_box(&[-1, -1], &[2, 2]);
    let line_pool = lattice_box(&[-3], &[3]);
    let (mut z_exact, mut kernels_ok) = (0, 0);
    let translates = 100;
    for _ in 0..translates {
        let g2 = Site::new(&[rng.gen_range(-50..=50), rng.gen_range(-50..=50)]);
        let n = rng.gen_range(1..=5);
        let f = random_subset(&mut rng, &plane_pool, n);
        let a3 = FiniteAlphabet::first(3);
        let z = partition_function(&pair, &a3, &f, Budget::default())?;
        let zg = partition_function(
            &pair,
            &a3,
            &plane.translate_right(&f, &g2),
            Budget::default(),
        )?;

        let g1 = Site::new(&[rng.gen_range(-50..=50)]);
        let n = rng.gen_range(1..=3);
        let f1 = random_subset(&mut rng, &line_pool, n);
        let a4 = FiniteAlphabet::first(4);
        let zc = partition_function_countable(&potts, &f1, &a4, Budget::default())?;
        let zcg = partition_function_countable(
            &potts,
            &line().translate_right(&f1, &g1),
            &a4,
            Budget::default(),
        )?;
        if z == zg && zc == zcg {
            z_exact += 1;
        }

        let n = rng.gen_range(1..=2);
        let k = random_subset(&mut rng, &line_pool, n);
        let letters = (0..k.len()).map(|_| rng.gen_range(0..4)).collect();
        let w = Pattern::new(k, letters)?;
        let sites: Vec<Site> = line_pool.iter().cloned().collect();
        let x = random_boundary(&mut rng, &sites, 5);
        if invariance_check(&potts, &w, &x, &g1, &a4, Budget::default())?.holds {
            kernels_ok += 1;
        }
    }
    Ok((
        z_exact == translates && kernels_ok == translates,
        format!("{z_exact}/{translates} translates with bit-identical Z, {kernels_ok}/{translates} kernels within widths"),
    ))
}
