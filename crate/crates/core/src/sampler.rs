//! Heat-bath Gibbs sampler driven by the single-site kernels.

use std::collections::{BTreeMap, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::enumerate::Budget;
use crate::error::{Error, Result};
use crate::group::{Site, SiteSet};
use crate::potential::{BoundaryCondition, FiniteAlphabet, Letter, Pattern, Potential};
use crate::specification::{kernel_table, KernelTable};

/// Truncation settings for single-site draws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerConfig {
    pub alphabet: FiniteAlphabet,
    /// Largest certified tail mass a truncated table may leave.
    #[serde(default = "default_tail_cap")]
    pub tail_cap: f64,
    /// Number of alphabet doublings allowed for a single draw.
    #[serde(default = "default_max_extensions")]
    pub max_extensions: u32,
}

fn default_tail_cap() -> f64 {
    0.05
}

fn default_max_extensions() -> u32 {
    8
}

impl SamplerConfig {
    pub fn new(alphabet: FiniteAlphabet) -> Self {
        SamplerConfig {
            alphabet,
            tail_cap: default_tail_cap(),
            max_extensions: default_max_extensions(),
        }
    }
}

const CACHE_LIMIT: usize = 1 << 16;

struct Cached {
    letters: Vec<Letter>,
    cumulative: Vec<f64>,
    tail: f64,
}

impl Cached {
    fn new(table: &KernelTable) -> Self {
        let mut acc = 0.0;
        let cumulative = table
            .entries
            .iter()
            .map(|e| {
                acc += e.value.mid().max(0.0);
                acc
            })
            .collect();
        Cached {
            letters: table.entries.iter().map(|e| e.letters[0]).collect(),
            cumulative,
            tail: table.tail_mass.hi(),
        }
    }

    /// `None` when the draw lands in the tail.
    fn draw(&self, rng: &mut ChaCha8Rng) -> Option<Letter> {
        let body = *self.cumulative.last().unwrap_or(&0.0);
        let u = rng.gen::<f64>() * (body + self.tail);
        if u >= body {
            return None;
        }
        let i = self.cumulative.partition_point(|&c| c <= u);
        Some(self.letters[i.min(self.letters.len() - 1)])
    }
}

pub struct ChainState<'p> {
    potential: &'p dyn Potential,
    window: SiteSet,
    letters: Vec<Letter>,
    boundary: BoundaryCondition,
    rng: ChaCha8Rng,
    sweep_count: u64,
    alphabet: FiniteAlphabet,
    config: SamplerConfig,
    extensions: u64,
    cache: HashMap<(usize, Vec<Letter>), Cached>,
}

impl<'p> ChainState<'p> {
    /// Starts from the boundary condition restricted to the window.
    pub fn new(
        potential: &'p dyn Potential,
        window: SiteSet,
        boundary: BoundaryCondition,
        config: SamplerConfig,
        seed: u64,
    ) -> Result<Self> {
        if window.is_empty() {
            return Err(Error::Usage("sampling window is empty".into()));
        }
        for s in &window {
            potential.group().check_element(s)?;
        }
        potential.validate_boundary(&boundary)?;
        if !(config.tail_cap >= 0.0 && config.tail_cap < 1.0) {
            return Err(Error::config("tail_cap", "must lie in [0, 1)"));
        }
        let alphabet = potential.effective_alphabet(&config.alphabet)?;
        let letters = boundary.restrict(&window).letters().to_vec();
        Ok(ChainState {
            potential,
            window,
            letters,
            boundary,
            rng: ChaCha8Rng::seed_from_u64(seed),
            sweep_count: 0,
            alphabet,
            config,
            extensions: 0,
            cache: HashMap::new(),
        })
    }

    pub fn window(&self) -> &SiteSet {
        &self.window
    }

    pub fn letters(&self) -> Pattern {
        Pattern::new(self.window.clone(), self.letters.clone()).expect("window letters")
    }

    pub fn boundary(&self) -> &BoundaryCondition {
        &self.boundary
    }

    pub fn sweep_count(&self) -> u64 {
        self.sweep_count
    }

    /// Number of tail hits that forced an alphabet extension.
    pub fn extensions(&self) -> u64 {
        self.extensions
    }

    pub fn alphabet(&self) -> &FiniteAlphabet {
        &self.alphabet
    }

    fn configuration(&self) -> BoundaryCondition {
        self.boundary.with_pattern(&self.letters())
    }

    fn table(&mut self, i: usize) -> Result<&Cached> {
        let mut key = self.letters.clone();
        key[i] = 0;
        let key = (i, key);
        if !self.cache.contains_key(&key) {
            if self.cache.len() >= CACHE_LIMIT {
                self.cache.clear();
            }
            let k = SiteSet::singleton(self.window.as_slice()[i].clone());
            let table = kernel_table(
                self.potential,
                &k,
                &self.configuration(),
                &self.alphabet,
                Budget::default(),
            )?;
            if table.tail_mass.hi() > self.config.tail_cap {
                return Err(Error::config(
                    "alphabet",
                    format!(
                        "truncation too coarse: tail mass {:.3e} exceeds cap {:.3e} at site {}",
                        table.tail_mass.hi(),
                        self.config.tail_cap,
                        k.as_slice()[0]
                    ),
                ));
            }
            self.cache.insert(key.clone(), Cached::new(&table));
        }
        Ok(&self.cache[&key])
    }

    /// Resamples the letter at `g` from its single-site kernel.
    pub fn heat_bath_step(&mut self, g: &Site) -> Result<Letter> {
        let i = self
            .window
            .index_of(g)
            .ok_or_else(|| Error::Usage(format!("site {g} is outside the sampling window")))?;
        let mut attempts = 0;
        loop {
            let mut rng = self.rng.clone();
            let drawn = self.table(i)?.draw(&mut rng);
            self.rng = rng;
            if let Some(a) = drawn {
                self.letters[i] = a;
                return Ok(a);
            }
            attempts += 1;
            if attempts > self.config.max_extensions {
                return Err(Error::config(
                    "max_extensions",
                    format!(
                        "tail still hit after {} alphabet extensions",
                        self.config.max_extensions
                    ),
                ));
            }
            self.extensions += 1;
            self.alphabet = self.alphabet.extended(self.alphabet.len() as u32);
            self.cache.clear();
        }
    }

    /// One systematic scan over the window in canonical order.
    pub fn sweep(&mut self) -> Result<()> {
        for i in 0..self.window.len() {
            let g = self.window.as_slice()[i].clone();
            self.heat_bath_step(&g)?;
        }
        self.sweep_count += 1;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteMarginal {
    pub site: Site,
    /// Letter frequencies over the recorded sweeps.
    pub frequencies: BTreeMap<Letter, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainRun {
    pub sweeps: u64,
    pub seed: u64,
    pub marginals: Vec<SiteMarginal>,
    pub final_state: Pattern,
    pub extensions: u64,
    /// Window letters after each sweep, when requested.
    pub samples: Option<Vec<Vec<Letter>>>,
}

/// Runs `sweeps` systematic-scan sweeps from the boundary restricted to the
/// window and tallies per-site marginals after every sweep.
pub fn run_chain(
    p: &dyn Potential,
    window: &SiteSet,
    boundary: &BoundaryCondition,
    sweeps: u64,
    seed: u64,
    config: &SamplerConfig,
    record_samples: bool,
) -> Result<ChainRun> {
    let mut state = ChainState::new(p, window.clone(), boundary.clone(), config.clone(), seed)?;
    let mut counts: Vec<BTreeMap<Letter, u64>> = vec![BTreeMap::new(); window.len()];
    let mut samples = record_samples.then(Vec::new);
    for _ in 0..sweeps {
        state.sweep()?;
        for (c, &a) in counts.iter_mut().zip(&state.letters) {
            *c.entry(a).or_insert(0) += 1;
        }
        if let Some(s) = samples.as_mut() {
            s.push(state.letters.clone());
        }
    }
    let marginals = window
        .iter()
        .zip(counts)
        .map(|(s, c)| SiteMarginal {
            site: s.clone(),
            frequencies: c
                .into_iter()
                .map(|(a, n)| (a, n as f64 / sweeps as f64))
                .collect(),
        })
        .collect();
    Ok(ChainRun {
        sweeps,
        seed,
        marginals,
        final_state: state.letters(),
        extensions: state.extensions,
        samples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelCheck {
    pub draws: u64,
    /// Total variation between the empirical law and the table midpoints,
    /// with the tail treated as one extra outcome.
    pub tv: f64,
    /// Half the summed entry widths plus the certified tail mass.
    pub tail_slack: f64,
    /// `max(0, tv - tail_slack)`.
    pub adjusted_tv: f64,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
    pub extensions: u64,
}

/// Draws `n` heat-bath updates at `g` under a frozen boundary and compares
/// the empirical law with the certified kernel table over `alphabet`.
pub fn empirical_kernel_check(
    p: &dyn Potential,
    g: &Site,
    boundary: &BoundaryCondition,
    n: u64,
    alphabet: &FiniteAlphabet,
    seed: u64,
    tail_cap: f64,
) -> Result<KernelCheck> {
    if n == 0 {
        return Err(Error::Usage("need at least one draw".into()));
    }
    let k = SiteSet::singleton(g.clone());
    let table = kernel_table(p, &k, boundary, alphabet, Budget::default())?;
    let config = SamplerConfig {
        alphabet: table.alphabet.clone(),
        tail_cap,
        max_extensions: default_max_extensions(),
    };
    let mut state = ChainState::new(p, k, boundary.clone(), config, seed)?;
    let mut counts = vec![0u64; table.entries.len()];
    let mut outside = 0u64;
    for _ in 0..n {
        let a = state.heat_bath_step(g)?;
        match table.alphabet.index_of(a) {
            Some(i) => counts[i] += 1,
            None => outside += 1,
        }
    }
    let nf = n as f64;
    let mut tv = (outside as f64 / nf - table.tail_mass.mid()).abs();
    let mut slack = table.tail_mass.hi();
    let mut chi = 0.0;
    let mut bins = 0usize;
    let (mut pooled_obs, mut pooled_exp) = (outside as f64, table.tail_mass.mid() * nf);
    for (e, &c) in table.entries.iter().zip(&counts) {
        let f = c as f64 / nf;
        tv += (f - e.value.mid()).abs();
        slack += e.value.width();
        let expected = e.value.mid() * nf;
        if expected >= 5.0 {
            chi += (c as f64 - expected).powi(2) / expected;
            bins += 1;
        } else {
            pooled_obs += c as f64;
            pooled_exp += expected;
        }
    }
    if pooled_exp >= 5.0 {
        chi += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        bins += 1;
    }
    let tv = tv / 2.0;
    let tail_slack = slack / 2.0;
    let dof = bins.saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        1.0 - ChiSquared::new(dof as f64).expect("positive dof").cdf(chi)
    };
    Ok(KernelCheck {
        draws: n,
        tv,
        tail_slack,
        adjusted_tv: (tv - tail_slack).max(0.0),
        chi_square: chi,
        degrees_of_freedom: dof,
        p_value,
        extensions: state.extensions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{GroupContext, Norm};
    use crate::potential::{CountablePotts, PairPotential, SingleSitePotential};

    fn line() -> GroupContext {
        GroupContext::lattice(1, Norm::Linf).unwrap()
    }

    fn zero() -> SingleSitePotential {
        SingleSitePotential::finite(line(), 1.0, vec![0.0, 0.0]).unwrap()
    }

    #[test]
    fn zero_potential_is_fair() {
        let p = zero();
        let a = FiniteAlphabet::first(2);
        let g = Site::new(&[0]);
        let mut state = ChainState::new(
            &p,
            SiteSet::singleton(g.clone()),
            BoundaryCondition::constant(0),
            SamplerConfig::new(a),
            11,
        )
        .unwrap();
        let n = 100_000;
        let ones = (0..n)
            .filter(|_| state.heat_bath_step(&g).unwrap() == 1)
            .count() as f64;
        let sigma = (n as f64 * 0.25).sqrt();
        assert!((ones - n as f64 / 2.0).abs() < 3.0 * sigma);
        assert_eq!(state.extensions(), 0);
    }

    #[test]
    fn softmax_target() {
        let p = SingleSitePotential::finite(line(), 1.0, vec![0.0, 1.0, -0.5]).unwrap();
        let check = empirical_kernel_check(
            &p,
            &Site::new(&[0]),
            &BoundaryCondition::constant(0),
            100_000,
            &FiniteAlphabet::first(3),
            3,
            0.05,
        )
        .unwrap();
        assert!(check.tv <= 0.01, "{check:?}");
        assert_eq!(check.extensions, 0);
    }

    #[test]
    fn same_seed_same_trajectory() {
        let p = CountablePotts::geometric(line(), 0.1, 1.0, 0.5).unwrap();
        let window = crate::group::lattice_box(&[0], &[4]);
        let cfg = SamplerConfig::new(FiniteAlphabet::up_to(255));
        let a = run_chain(
            &p,
            &window,
            &BoundaryCondition::constant(0),
            30,
            5,
            &cfg,
            true,
        )
        .unwrap();
        let b = run_chain(
            &p,
            &window,
            &BoundaryCondition::constant(0),
            30,
            5,
            &cfg,
            true,
        )
        .unwrap();
        assert_eq!(a, b);
        let c = run_chain(
            &p,
            &window,
            &BoundaryCondition::constant(0),
            30,
            6,
            &cfg,
            true,
        )
        .unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn zero_sweeps_keep_the_initial_state() {
        let p = zero();
        let window = crate::group::lattice_box(&[0], &[3]);
        let boundary = BoundaryCondition::new(0, [(Site::new(&[2]), 1)]);
        let run = run_chain(
            &p,
            &window,
            &boundary,
            0,
            1,
            &SamplerConfig::new(FiniteAlphabet::first(2)),
            true,
        )
        .unwrap();
        assert_eq!(run.final_state, boundary.restrict(&window));
        assert!(run.marginals.iter().all(|m| m.frequencies.is_empty()));
        assert_eq!(run.samples, Some(vec![]));
    }

    #[test]
    fn zero_potential_marginals_are_uniform() {
        let p = zero();
        let window = crate::group::lattice_box(&[0], &[3]);
        let sweeps = 20_000;
        let run = run_chain(
            &p,
            &window,
            &BoundaryCondition::constant(0),
            sweeps,
            9,
            &SamplerConfig::new(FiniteAlphabet::first(2)),
            false,
        )
        .unwrap();
        let sigma = (0.25 / sweeps as f64).sqrt();
        for m in &run.marginals {
            assert!((m.frequencies[&1] - 0.5).abs() < 3.0 * sigma, "{m:?}");
        }
    }

    #[test]
    fn attractive_coupling_raises_agreement() {
        let strong = PairPotential::ising_chain(line(), 1.0, 1.5, 0.0).unwrap();
        let free = zero();
        let window = crate::group::lattice_box(&[0], &[7]);
        let cfg = SamplerConfig::new(FiniteAlphabet::first(2));
        let agree = |p: &dyn Potential| {
            let run = run_chain(
                p,
                &window,
                &BoundaryCondition::constant(0),
                4000,
                2,
                &cfg,
                true,
            )
            .unwrap();
            let samples = run.samples.unwrap();
            let hits: usize = samples
                .iter()
                .map(|s| s.windows(2).filter(|w| w[0] == w[1]).count())
                .sum();
            hits as f64 / (samples.len() * 7) as f64
        };
        let a = agree(&strong);
        let b = agree(&free);
        // Exact two-site conditional agreement is e^{3}/(e^{3}+e^{-3}) ~ 0.9975.
        assert!(a > 0.9 && (b - 0.5).abs() < 0.05, "{a} {b}");
    }

    #[test]
    fn coarse_truncation_is_a_config_error() {
        let p = CountablePotts::geometric(line(), 0.1, 1.0, 0.5).unwrap();
        let g = Site::new(&[0]);
        let mut state = ChainState::new(
            &p,
            SiteSet::singleton(g.clone()),
            BoundaryCondition::constant(0),
            SamplerConfig::new(FiniteAlphabet::first(3)),
            1,
        )
        .unwrap();
        assert!(matches!(
            state.heat_bath_step(&g),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn countable_tail_hits_extend_the_alphabet() {
        let p = CountablePotts::geometric(line(), 0.1, 1.0, 0.5).unwrap();
        let g = Site::new(&[0]);
        let cfg = SamplerConfig {
            alphabet: FiniteAlphabet::up_to(31),
            tail_cap: 0.2,
            max_extensions: 8,
        };
        let mut state = ChainState::new(
            &p,
            SiteSet::singleton(g.clone()),
            BoundaryCondition::constant(0),
            cfg,
            4,
        )
        .unwrap();
        for _ in 0..2000 {
            state.heat_bath_step(&g).unwrap();
        }
        assert!(state.extensions() > 0);
        assert!(state.alphabet().len() > 32);
    }

    #[test]
    fn potts_kernel_check() {
        let p = CountablePotts::geometric(line(), 0.1, 1.0, 0.5).unwrap();
        let boundary = BoundaryCondition::new(0, [(Site::new(&[1]), 2), (Site::new(&[-1]), 2)]);
        let check = empirical_kernel_check(
            &p,
            &Site::new(&[0]),
            &boundary,
            100_000,
            &FiniteAlphabet::up_to(255),
            8,
            0.05,
        )
        .unwrap();
        assert!(check.tv <= 0.02 + check.tail_slack, "{check:?}");
        assert!(check.tail_slack < 1e-6);
    }
}
