use std::sync::Arc;
use std::time::Instant;

use amenable_gibbs::acceptance::{run_criterion, CriterionOutcome, CRITERIA};
use amenable_gibbs::dobrushin::{
    rho_numeric, uniqueness_certificate, DobrushinCertificate, RhoEstimate,
};
use amenable_gibbs::group::{GroupContext, SiteSet};
use amenable_gibbs::potential::{Alphabet, BoundaryCondition, Potential};
use amenable_gibbs::sampler::{run_chain, ChainRun, SamplerConfig};
use amenable_gibbs::specification::{kernel_table, KernelTable};
use amenable_gibbs::thermo::{
    partition_function, partition_function_countable, pressure_bracket, segment_candidates,
    BracketConfig, PressureBracket,
};
use amenable_gibbs::Budget;
use serde::{Deserialize, Serialize};

use crate::config::{alphabet, CandidateFamily, ExperimentConfig, WindowSpec};
use crate::output::{fmt_f64, to_json, Emitted, Table};
use crate::CliError;

/// Settings resolved from flags and config.
pub struct Run {
    pub config: ExperimentConfig,
    pub group: GroupContext,
    pub potential: Arc<dyn Potential>,
    pub seed: u64,
    pub budget: Budget,
}

impl Run {
    pub fn new(
        config: ExperimentConfig,
        seed: Option<u64>,
        budget: Option<u64>,
    ) -> Result<Self, CliError> {
        let group = config.group.build(None).map_err(|e| prefixed("group", e))?;
        let potential = config
            .potential
            .build(&group)
            .map_err(|e| prefixed("potential", e))?;
        let seed = seed.or(config.seed).unwrap_or(0);
        let budget = budget.or(config.budget).map(Budget).unwrap_or_default();
        Ok(Run {
            config,
            group,
            potential,
            seed,
            budget,
        })
    }

    fn p(&self) -> &dyn Potential {
        self.potential.as_ref()
    }
}

/// Prefixes configuration paths with the config section they came from.
fn prefixed(section: &str, e: amenable_gibbs::Error) -> CliError {
    match e {
        amenable_gibbs::Error::Config { path, message } => CliError::Config(format!(
            "configuration error at `{section}.{path}`: {message}"
        )),
        other => CliError::from(other),
    }
}

fn interval_cells(i: amenable_gibbs::Interval) -> [String; 2] {
    [fmt_f64(i.lo()), fmt_f64(i.hi())]
}

pub fn pressure(run: &Run) -> Result<Emitted, CliError> {
    let sec = &run.config.pressure;
    let mut cfg = BracketConfig::standard(
        run.p(),
        alphabet(sec.alphabet_max),
        sec.max_radius,
        run.budget,
    )?;
    if sec.candidates == CandidateFamily::Segments {
        cfg.candidates = segment_candidates(&run.group, sec.max_len)?;
    }
    cfg.ladder = sec.ladder.iter().map(|&m| alphabet(m)).collect();
    cfg.max_iter = sec.max_iter;
    let bracket: PressureBracket = pressure_bracket(run.p(), &cfg)?;
    let mut trials = Table::new(
        "pressure",
        &["size", "z_lo", "z_hi", "bound_lo", "bound_hi"],
    );
    for t in &bracket.trials {
        let [zl, zh] = interval_cells(t.z);
        let [bl, bh] = interval_cells(t.bound);
        trials.push(vec![t.size.to_string(), zl, zh, bl, bh]);
    }
    let mut tables = vec![trials];
    if !bracket.ladder.is_empty() {
        let mut ladder = Table::new(
            "pressure_ladder",
            &[
                "alphabet_max",
                "alphabet_size",
                "set_size",
                "upper_lo",
                "upper_hi",
            ],
        );
        for r in &bracket.ladder {
            let [lo, hi] = interval_cells(r.upper);
            ladder.push(vec![
                r.alphabet_max.to_string(),
                r.alphabet_size.to_string(),
                r.set_size.to_string(),
                lo,
                hi,
            ]);
        }
        tables.push(ladder);
    }
    Ok(Emitted {
        name: "pressure",
        json: to_json(&bracket),
        tables,
    })
}

pub fn kernel(run: &Run) -> Result<Emitted, CliError> {
    let sec = &run.config.kernel;
    let k: SiteSet = if sec.sites.is_empty() {
        SiteSet::singleton(run.group.identity().clone())
    } else {
        sec.sites.iter().cloned().collect()
    };
    let table: KernelTable = kernel_table(
        run.p(),
        &k,
        &sec.boundary,
        &alphabet(sec.alphabet_max),
        run.budget,
    )?;
    let mut csv = Table::new("kernel", &["pattern", "lo", "hi"]);
    for e in &table.entries {
        let label: Vec<String> = e.letters.iter().map(|a| a.to_string()).collect();
        let [lo, hi] = interval_cells(e.value);
        csv.push(vec![label.join(" "), lo, hi]);
    }
    Ok(Emitted {
        name: "kernel",
        json: to_json(&table),
        tables: vec![csv],
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DobrushinOutput {
    pub certificates: Vec<DobrushinCertificate>,
    pub rho: Vec<RhoEstimate>,
}

pub fn dobrushin(run: &Run) -> Result<Emitted, CliError> {
    let sec = &run.config.dobrushin;
    let betas = if sec.betas.is_empty() {
        vec![run.p().beta()]
    } else {
        sec.betas.clone()
    };
    let certificates = betas
        .iter()
        .map(|&b| uniqueness_certificate(run.p(), b))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rho = Vec::new();
    if let Some(r) = sec.rho_radius {
        let r = usize::try_from(r)
            .map_err(|_| CliError::Config("`dobrushin.rho_radius` must be non-negative".into()))?;
        let grid = run.group.ball(r)?;
        let a = alphabet(sec.rho_alphabet_max);
        for (i, g) in grid.iter().enumerate() {
            for (j, h) in grid.iter().enumerate() {
                let seed = run.seed ^ ((i * grid.len() + j) as u64);
                rho.push(rho_numeric(run.p(), g, h, &a, sec.rho_trials, seed)?);
            }
        }
    }
    let mut scan = Table::new("dobrushin", &["beta", "c_lo", "c_hi", "verdict"]);
    for c in &certificates {
        let [lo, hi] = interval_cells(c.c_bound);
        let verdict = serde_json::to_value(c.verdict).expect("enum");
        scan.push(vec![
            fmt_f64(c.beta),
            lo,
            hi,
            verdict.as_str().unwrap_or_default().to_string(),
        ]);
    }
    let mut tables = vec![scan];
    if !rho.is_empty() {
        let mut t = Table::new(
            "dobrushin_rho",
            &["g", "h", "lower", "upper_lo", "upper_hi"],
        );
        for e in &rho {
            let (ul, uh) = match e.upper {
                Some(u) => (fmt_f64(u.lo()), fmt_f64(u.hi())),
                None => (String::new(), String::new()),
            };
            t.push(vec![
                e.g.to_string(),
                e.h.to_string(),
                fmt_f64(e.lower),
                ul,
                uh,
            ]);
        }
        tables.push(t);
    }
    Ok(Emitted {
        name: "dobrushin",
        json: to_json(&DobrushinOutput { certificates, rho }),
        tables,
    })
}

/// Overrides from the `sample` flags.
#[derive(Default)]
pub struct SampleFlags {
    pub window: Option<WindowSpec>,
    pub sweeps: Option<u64>,
    pub boundary: Option<BoundaryCondition>,
}

pub fn sample(run: &Run, flags: SampleFlags) -> Result<Emitted, CliError> {
    let sec = &run.config.sample;
    let window = flags
        .window
        .or_else(|| sec.window.clone())
        .ok_or_else(|| {
            CliError::Config("sampling needs a window (`--window lo:hi` or `sample.window`)".into())
        })?
        .sites();
    let sweeps = flags.sweeps.unwrap_or(sec.sweeps);
    let boundary = flags.boundary.unwrap_or_else(|| sec.boundary.clone());
    let cfg = SamplerConfig {
        alphabet: alphabet(sec.alphabet_max),
        tail_cap: sec.tail_cap,
        max_extensions: sec.max_extensions,
    };
    let chain: ChainRun = run_chain(
        run.p(),
        &window,
        &boundary,
        sweeps,
        run.seed,
        &cfg,
        sec.record_samples,
    )?;
    let mut marginals = Table::new("sample", &["site", "letter", "frequency"]);
    for m in &chain.marginals {
        for (a, f) in &m.frequencies {
            marginals.push(vec![m.site.to_string(), a.to_string(), fmt_f64(*f)]);
        }
    }
    let mut tables = vec![marginals];
    if let Some(samples) = &chain.samples {
        let mut header = vec!["sweep".to_string()];
        header.extend(window.iter().map(|s| s.to_string()));
        let mut t = Table {
            name: "sample_samples".into(),
            header,
            rows: Vec::new(),
        };
        for (i, s) in samples.iter().enumerate() {
            let mut row = vec![(i + 1).to_string()];
            row.extend(s.iter().map(|a| a.to_string()));
            t.push(row);
        }
        tables.push(t);
    }
    Ok(Emitted {
        name: "sample",
        json: to_json(&chain),
        tables,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutput {
    pub seed: u64,
    pub passed: bool,
    pub outcomes: Vec<CriterionOutcome>,
}

fn timed(
    id: &str,
    title: &str,
    f: impl FnOnce() -> amenable_gibbs::Result<(bool, String)>,
) -> CriterionOutcome {
    let start = Instant::now();
    let (passed, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionOutcome {
        id: id.into(),
        title: title.into(),
        passed,
        runtime_secs: start.elapsed().as_secs_f64(),
        limit_secs: None,
        detail,
    }
}

/// Invariants checked on the configured potential itself.
fn config_checks(run: &Run) -> Vec<CriterionOutcome> {
    let p = run.p();
    let a = alphabet(run.config.kernel.alphabet_max);
    let normalization = timed(
        "config-normalization",
        "kernel at the identity sums to one",
        || {
            let k = SiteSet::singleton(run.group.identity().clone());
            let t = kernel_table(p, &k, &run.config.kernel.boundary, &a, run.budget)?;
            let total = t.total();
            Ok((
                total.contains(1.0),
                format!("total [{}, {}]", total.lo(), total.hi()),
            ))
        },
    );
    let translation = timed("config-translation", "Z_F is translation invariant", || {
        let eff = p.effective_alphabet(&a)?;
        let f = match run.group.folner_set(1) {
            Ok(f) if run.budget.check(eff.len(), f.len()).is_ok() => f,
            _ => SiteSet::singleton(run.group.identity().clone()),
        };
        let g = run
            .group
            .generators()
            .iter()
            .find(|s| *s != run.group.identity())
            .cloned()
            .unwrap_or_else(|| run.group.identity().clone());
        let fg = run.group.translate_right(&f, &g);
        let z = |s: &SiteSet| match p.alphabet() {
            Alphabet::Countable => partition_function_countable(p, s, &eff, run.budget),
            Alphabet::Finite(_) => partition_function(p, &eff, s, run.budget),
        };
        let (z0, z1) = (z(&f)?, z(&fg)?);
        Ok((
            z0 == z1,
            format!(
                "|F| = {}, Z_F = [{}, {}], translate by {g}",
                f.len(),
                z0.lo(),
                z0.hi()
            ),
        ))
    });
    vec![normalization, translation]
}

pub fn verify(run: Option<&Run>, seed: u64) -> Result<(Emitted, bool), CliError> {
    let mut outcomes = Vec::new();
    let section = run.map(|r| r.config.verify.clone()).unwrap_or_default();
    if let Some(unknown) = section
        .only
        .iter()
        .find(|id| !CRITERIA.iter().any(|c| c.0 == id.as_str()))
    {
        return Err(CliError::Config(format!(
            "`verify.only`: unknown criterion `{unknown}`"
        )));
    }
    if !section.config_only {
        for c in CRITERIA.iter() {
            if section.only.is_empty() || section.only.iter().any(|id| id == c.0) {
                outcomes.push(run_criterion(c.0, seed).expect("known id"));
            }
        }
    }
    if let Some(run) = run {
        outcomes.extend(config_checks(run));
    }
    for o in &outcomes {
        println!("{}", o.line());
    }
    let passed = outcomes.iter().all(|o| o.passed);
    let mut t = Table::new("verify", &["id", "passed", "runtime_secs", "detail"]);
    for o in &outcomes {
        t.push(vec![
            o.id.clone(),
            o.passed.to_string(),
            fmt_f64(o.runtime_secs),
            o.detail.clone(),
        ]);
    }
    let out = VerifyOutput {
        seed,
        passed,
        outcomes,
    };
    Ok((
        Emitted {
            name: "verify",
            json: to_json(&out),
            tables: vec![t],
        },
        passed,
    ))
}
