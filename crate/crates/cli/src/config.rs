//! Run configuration: one TOML file per experiment, overridable by flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wearpolicy::anneal::SaConfig;
use wearpolicy::landscape::LandscapeConfig;
use wearpolicy::{CostModel, GridShape, Limits, RATE_MAX};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub history: Option<PathBuf>,
    pub rates_a: Option<PathBuf>,
    pub rates_b: Option<PathBuf>,
    pub limits: LimitsSection,
    pub costs: CostsSection,
    pub grid: GridSection,
    pub simulate: SimulateSection,
    pub solve: SolveSection,
    pub anneal: AnnealSection,
    pub landscape: LandscapeSection,
    pub evaluate: EvaluateSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsSection {
    pub l1: u32,
    pub l2: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostsSection {
    pub c1: f64,
    pub c2: f64,
    pub v: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub bin_width: u32,
    pub rows: usize,
    pub cols: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    /// Fixed number of days; takes precedence over `counts`.
    pub days: Option<u32>,
    /// Run until each part has this many replacements.
    pub counts: Option<[usize; 2]>,
    pub max_days: Option<u32>,
    pub trajectory: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    pub tolerance: Option<f64>,
    pub export_lp: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealSection {
    pub a0: f64,
    pub cool: f64,
    pub iters_per_temp: u32,
    pub total_iters: u32,
    pub init_temp_samples: u32,
    pub initial_temperature: Option<f64>,
    pub rate_max: u32,
    /// Seeds for the multi-start summary; the master seed when empty.
    pub seeds: Vec<u64>,
    /// Extra schedules for the summary grid.
    pub grid_iters_per_temp: Vec<u32>,
    pub grid_cool: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LandscapeSection {
    pub population: usize,
    pub walk_starts: usize,
    pub walk_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    pub horizon: u32,
    /// Policy grid CSV; the optimal policy is solved for when absent.
    pub policy: Option<PathBuf>,
    pub scenarios: Vec<Scenario>,
}

/// Cost variant compared against the same history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub v: Option<f64>,
    pub alpha: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("out"),
            history: None,
            rates_a: None,
            rates_b: None,
            limits: LimitsSection { l1: 90, l2: 90 },
            costs: CostsSection { c1: 100.0, c2: 120.0, v: 220.0, alpha: 0.95 },
            grid: GridSection::default(),
            simulate: SimulateSection::default(),
            solve: SolveSection::default(),
            anneal: AnnealSection::default(),
            landscape: LandscapeSection::default(),
            evaluate: EvaluateSection::default(),
        }
    }
}

impl Default for LimitsSection {
    fn default() -> Self {
        Self { l1: 90, l2: 90 }
    }
}

impl Default for CostsSection {
    fn default() -> Self {
        RunConfig::default().costs
    }
}

impl Default for GridSection {
    fn default() -> Self {
        let g = GridShape::default();
        Self { bin_width: g.bin_width, rows: g.rows, cols: g.cols }
    }
}

impl Default for AnnealSection {
    fn default() -> Self {
        let d = SaConfig::default();
        Self {
            a0: d.a0,
            cool: d.cool,
            iters_per_temp: d.iters_per_temp,
            total_iters: d.total_iters,
            init_temp_samples: d.init_temp_samples,
            initial_temperature: None,
            rate_max: RATE_MAX,
            seeds: Vec::new(),
            grid_iters_per_temp: Vec::new(),
            grid_cool: Vec::new(),
        }
    }
}

impl Default for LandscapeSection {
    fn default() -> Self {
        let d = LandscapeConfig::default();
        Self { population: d.population, walk_starts: d.walk_starts, walk_steps: d.walk_steps }
    }
}

impl Default for EvaluateSection {
    fn default() -> Self {
        Self { horizon: 10_000, policy: None, scenarios: Vec::new() }
    }
}

impl RunConfig {
    /// Parses a config file; relative paths resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let mut config: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.resolve_paths(base);
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.output_dir);
        for p in [&mut self.history, &mut self.rates_a, &mut self.rates_b, &mut self.evaluate.policy]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
    }

    pub fn limits(&self) -> Result<Limits, CliError> {
        Ok(Limits::new(self.limits.l1, self.limits.l2)?)
    }

    pub fn costs(&self) -> Result<CostModel, CliError> {
        let c = self.costs;
        Ok(CostModel::new(c.c1, c.c2, c.v, c.alpha)?)
    }

    pub fn shape(&self) -> Result<GridShape, CliError> {
        let g = self.grid;
        Ok(GridShape::new(g.bin_width, g.rows, g.cols)?)
    }

    pub fn sa_config(&self) -> Result<SaConfig, CliError> {
        let a = &self.anneal;
        let config = SaConfig {
            a0: a.a0,
            cool: a.cool,
            iters_per_temp: a.iters_per_temp,
            total_iters: a.total_iters,
            init_temp_samples: a.init_temp_samples,
            seed: self.seed,
            rate_min: 1,
            rate_max: a.rate_max,
            shape: self.shape()?,
            initial_temperature: a.initial_temperature,
            record_trace: true,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn landscape_config(&self) -> Result<LandscapeConfig, CliError> {
        let l = self.landscape;
        let config = LandscapeConfig {
            population: l.population,
            walk_starts: l.walk_starts,
            walk_steps: l.walk_steps,
            seed: self.seed,
            shape: self.shape()?,
            rate_min: 1,
            rate_max: self.anneal.rate_max,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn seeds(&self) -> Vec<u64> {
        if self.anneal.seeds.is_empty() {
            vec![self.seed]
        } else {
            self.anneal.seeds.clone()
        }
    }

    /// Canonical TOML of the effective configuration.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config is always serialisable")
    }

    /// First 16 hex digits of the SHA-256 of [`RunConfig::canonical`].
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn require<'a>(&self, field: &'a Option<PathBuf>, name: &str) -> Result<&'a Path, CliError> {
        let p = field
            .as_deref()
            .ok_or_else(|| CliError::Validation(format!("`{name}` is not set")))?;
        if !p.exists() {
            return Err(CliError::Validation(format!("{name} file {} does not exist", p.display())));
        }
        Ok(p)
    }
}
