use std::path::{Path, PathBuf};

use amenable_gibbs::group::{lattice_box, GroupSpec, Site, SiteSet};
use amenable_gibbs::potential::{BoundaryCondition, FiniteAlphabet, Letter, PotentialSpec};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub group: GroupSpec,
    pub potential: PotentialSpec,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub budget: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub pressure: PressureSection,
    #[serde(default)]
    pub kernel: KernelSection,
    #[serde(default)]
    pub dobrushin: DobrushinSection,
    #[serde(default)]
    pub sample: SampleSection,
    #[serde(default)]
    pub verify: VerifySection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateFamily {
    /// Følner sets `F_0, ..., F_max_radius`.
    Folner,
    /// Segments `[0, L-1]` on the first axis, `L <= max_len`.
    Segments,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PressureSection {
    /// Truncation alphabet `{0..=alphabet_max}`.
    pub alphabet_max: Letter,
    pub candidates: CandidateFamily,
    pub max_radius: usize,
    pub max_len: usize,
    /// Maxima of the alphabets in the finite-alphabet ladder.
    pub ladder: Vec<Letter>,
    pub max_iter: usize,
}

impl Default for PressureSection {
    fn default() -> Self {
        PressureSection {
            alphabet_max: 20,
            candidates: CandidateFamily::Folner,
            max_radius: 2,
            max_len: 12,
            ladder: Vec::new(),
            max_iter: 10_000,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelSection {
    /// The finite set `K`; the identity when empty.
    pub sites: Vec<Site>,
    pub boundary: BoundaryCondition,
    pub alphabet_max: Letter,
}

impl Default for KernelSection {
    fn default() -> Self {
        KernelSection {
            sites: Vec::new(),
            boundary: BoundaryCondition::constant(0),
            alphabet_max: 9,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DobrushinSection {
    /// Inverse temperatures to certify; the potential's own `beta` when empty.
    pub betas: Vec<f64>,
    /// Radius of the `(g, h)` grid for numeric `ρ` estimates; none when absent.
    pub rho_radius: Option<i64>,
    pub rho_trials: usize,
    pub rho_alphabet_max: Letter,
}

impl Default for DobrushinSection {
    fn default() -> Self {
        DobrushinSection {
            betas: Vec::new(),
            rho_radius: None,
            rho_trials: 20,
            rho_alphabet_max: 255,
        }
    }
}

/// A lattice box `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub lo: Vec<i64>,
    pub hi: Vec<i64>,
}

impl WindowSpec {
    /// Parses `lo:hi` with comma-separated coordinates, e.g. `0,0:3,3`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
        let coords = |t: &str| -> Result<Vec<i64>, String> {
            t.split(',')
                .map(|c| {
                    c.trim()
                        .parse::<i64>()
                        .map_err(|e| format!("bad coordinate `{c}`: {e}"))
                })
                .collect()
        };
        let w = WindowSpec {
            lo: coords(lo)?,
            hi: coords(hi)?,
        };
        if w.lo.len() != w.hi.len() {
            return Err("lo and hi have different dimensions".into());
        }
        Ok(w)
    }

    pub fn sites(&self) -> SiteSet {
        lattice_box(&self.lo, &self.hi)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleSection {
    pub window: Option<WindowSpec>,
    pub sweeps: u64,
    pub boundary: BoundaryCondition,
    pub alphabet_max: Letter,
    pub tail_cap: f64,
    pub max_extensions: u32,
    /// Also write the window letters after every sweep.
    pub record_samples: bool,
}

impl Default for SampleSection {
    fn default() -> Self {
        SampleSection {
            window: None,
            sweeps: 1000,
            boundary: BoundaryCondition::constant(0),
            alphabet_max: 255,
            tail_cap: 0.05,
            max_extensions: 8,
            record_samples: false,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    /// Acceptance criteria to run; all when empty.
    pub only: Vec<String>,
    /// Skip the acceptance suite and run only the checks on this config.
    pub config_only: bool,
}

pub fn alphabet(max: Letter) -> FiniteAlphabet {
    FiniteAlphabet::up_to(max)
}

/// Reads a TOML (`.toml`) or JSON config, reporting the field path of any
/// schema error.
pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let is_toml = path.extension().is_some_and(|e| e == "toml");
    let mut config: ExperimentConfig = if is_toml {
        let de = toml::Deserializer::parse(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            CliError::Config(format!(
                "{}: at `{}`: {}",
                path.display(),
                e.path(),
                e.inner()
            ))
        })?
    } else {
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            CliError::Config(format!(
                "{}: at `{}`: {}",
                path.display(),
                e.path(),
                e.inner()
            ))
        })?
    };
    if let (GroupSpec::Table { file, .. }, Some(base)) = (&mut config.group, path.parent()) {
        let p = PathBuf::from(&*file);
        if p.is_relative() {
            *file = base.join(p).to_string_lossy().into_owned();
        }
    }
    Ok(config)
}
