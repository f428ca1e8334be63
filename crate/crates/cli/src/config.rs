//! Experiment configuration: a single JSON file, every field overridable
//! from the command line. Identical configs must reproduce outputs
//! byte-for-byte (timestamps and wall times excepted), so everything that
//! influences results — seeds included — lives here.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use hexglass::model::{CouplingMap, Instance};
use hexglass::optimize::fixed_transfer_angles;
use hexglass::Angles;

/// Where each round's angles come from.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum AngleSource {
    /// The embedded transfer table (depths 1–5).
    BuiltinTable,
    /// A JSON file mapping depth `p` (as a string key) to `{beta, gamma}`.
    File { path: PathBuf },
    /// Basin-hop on one ensemble member, then transfer to all of them.
    TrainOnInstance { instance_index: usize },
}

impl Default for AngleSource {
    fn default() -> Self {
        AngleSource::BuiltinTable
    }
}

/// Simulation backend selection.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum BackendConfig {
    Statevector,
    Mps {
        chi: usize,
        #[serde(default)]
        cutoff: f64,
    },
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::Statevector
    }
}

impl BackendConfig {
    pub fn label(&self) -> &'static str {
        match self {
            BackendConfig::Statevector => "statevector",
            BackendConfig::Mps { .. } => "mps",
        }
    }

    pub fn chi(&self) -> Option<usize> {
        match self {
            BackendConfig::Statevector => None,
            BackendConfig::Mps { chi, .. } => Some(*chi),
        }
    }
}

fn default_ensemble_size() -> usize {
    20
}
fn default_base_seed() -> u64 {
    1
}
fn default_p_list() -> Vec<usize> {
    vec![1, 2, 3, 4, 5]
}
fn default_sample_seed() -> u64 {
    7
}
fn default_chi_list() -> Vec<usize> {
    vec![16, 32, 64, 128]
}
fn default_chi_ref() -> usize {
    512
}
fn default_grid_count() -> usize {
    50
}
fn default_grid_cap() -> usize {
    250_000
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_train_iterations() -> usize {
    20
}

/// The one configuration object shared by all subcommands. Subcommands
/// read the fields they need and ignore the rest.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Built-in map name or path to a coupling-map JSON file.
    pub map: String,
    #[serde(default = "default_ensemble_size")]
    pub ensemble_size: usize,
    /// Instance k of the ensemble uses seed `base_seed + k`.
    #[serde(default = "default_base_seed")]
    pub base_seed: u64,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<usize>,
    #[serde(default)]
    pub angle_source: AngleSource,
    #[serde(default)]
    pub backend: BackendConfig,
    /// Per-command defaults apply when absent: 20000 for sampling
    /// experiments, 8192 for distribution plots.
    #[serde(default)]
    pub shots: Option<usize>,
    /// Root seed of the sampling RNG streams (one derived stream per
    /// instance × depth).
    #[serde(default = "default_sample_seed")]
    pub sample_seed: u64,
    /// Bond-dimension ladder for `bond-scan`.
    #[serde(default = "default_chi_list")]
    pub chi_list: Vec<usize>,
    /// Reference bond dimension the ladder is compared against.
    #[serde(default = "default_chi_ref")]
    pub chi_ref: usize,
    /// Landscape grid: number of β points.
    #[serde(default = "default_grid_count")]
    pub grid_beta: usize,
    /// Landscape grid: number of γ points.
    #[serde(default = "default_grid_count")]
    pub grid_gamma: usize,
    /// Upper bound on landscape grid cells (budget guard).
    #[serde(default = "default_grid_cap")]
    pub grid_cap: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Basin-hopping iterations for the train-on-instance angle source.
    #[serde(default = "default_train_iterations")]
    pub train_iterations: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            map: "guadalupe-16".into(),
            ensemble_size: default_ensemble_size(),
            base_seed: default_base_seed(),
            p_list: default_p_list(),
            angle_source: AngleSource::default(),
            backend: BackendConfig::default(),
            shots: None,
            sample_seed: default_sample_seed(),
            chi_list: default_chi_list(),
            chi_ref: default_chi_ref(),
            grid_beta: default_grid_count(),
            grid_gamma: default_grid_count(),
            grid_cap: default_grid_cap(),
            output_dir: default_output_dir(),
            train_iterations: default_train_iterations(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.ensemble_size == 0 {
            bail!("ensemble_size must be at least 1");
        }
        if self.p_list.is_empty() {
            bail!("p_list must not be empty");
        }
        if let BackendConfig::Mps { chi, cutoff } = self.backend {
            if chi == 0 {
                bail!("mps backend needs chi >= 1");
            }
            if !(0.0..1.0).contains(&cutoff) {
                bail!("mps cutoff must be in [0, 1)");
            }
        }
        if let AngleSource::TrainOnInstance { instance_index } = self.angle_source {
            if instance_index >= self.ensemble_size {
                bail!(
                    "train instance index {instance_index} outside ensemble of {}",
                    self.ensemble_size
                );
            }
        }
        if self.grid_beta == 0 || self.grid_gamma == 0 {
            bail!("landscape grid must have at least one point per axis");
        }
        Ok(())
    }

    pub fn coupling_map(&self) -> hexglass::Result<CouplingMap> {
        CouplingMap::load(&self.map)
    }

    /// The deterministic ensemble: instance k uses seed `base_seed + k`.
    pub fn ensemble(&self, map: &CouplingMap) -> hexglass::Result<Vec<Instance>> {
        (0..self.ensemble_size)
            .map(|k| hexglass::model::generate_instance(map, self.base_seed + k as u64))
            .collect()
    }

    /// Resolve one angle schedule per requested depth. Depth 0 always maps
    /// to the empty schedule (the unevolved uniform superposition).
    pub fn resolve_angles(&self, map: &CouplingMap) -> anyhow::Result<BTreeMap<usize, Angles>> {
        let mut out = BTreeMap::new();
        let file_table: Option<BTreeMap<String, Angles>> = match &self.angle_source {
            AngleSource::File { path } => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading angle file {}", path.display()))?;
                Some(
                    serde_json::from_str(&text)
                        .with_context(|| format!("parsing angle file {}", path.display()))?,
                )
            }
            _ => None,
        };
        let trained: Option<Vec<(Angles, f64)>> = match &self.angle_source {
            AngleSource::TrainOnInstance { instance_index } => {
                let inst = hexglass::model::generate_instance(
                    map,
                    self.base_seed + *instance_index as u64,
                )?;
                let p_max = self.p_list.iter().copied().max().unwrap_or(0);
                if p_max == 0 {
                    Some(Vec::new())
                } else {
                    Some(hexglass::optimize::basin_hopping_ladder(
                        &inst,
                        p_max,
                        self.train_iterations,
                        self.base_seed,
                    )?)
                }
            }
            _ => None,
        };
        for &p in &self.p_list {
            if p == 0 {
                out.insert(0, Angles::new(vec![], vec![])?);
                continue;
            }
            let angles = match &self.angle_source {
                AngleSource::BuiltinTable => fixed_transfer_angles(p).with_context(|| {
                    format!("the built-in transfer table covers depths 1-5, not {p}")
                })?,
                AngleSource::File { path } => file_table
                    .as_ref()
                    .unwrap()
                    .get(&p.to_string())
                    .cloned()
                    .with_context(|| {
                        format!("angle file {} has no entry for depth {p}", path.display())
                    })?,
                AngleSource::TrainOnInstance { .. } => {
                    let ladder = trained.as_ref().unwrap();
                    ladder
                        .get(p - 1)
                        .map(|(a, _)| a.clone())
                        .with_context(|| format!("training ladder has no depth {p}"))?
                }
            };
            if angles.p() != p {
                bail!("angle schedule for depth {p} has {} rounds", angles.p());
            }
            out.insert(p, angles);
        }
        Ok(out)
    }
}

/// Command-line overrides applied on top of the loaded (or default) config.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct ConfigOverrides {
    /// Path to the experiment config JSON.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Built-in map name or coupling-map JSON path.
    #[arg(long, global = true)]
    pub map: Option<String>,
    /// Number of instances in the ensemble.
    #[arg(long, global = true)]
    pub ensemble_size: Option<usize>,
    /// Seed of instance 0; instance k uses base_seed + k.
    #[arg(long, global = true)]
    pub base_seed: Option<u64>,
    /// Comma-separated depths, e.g. "1,2,3".
    #[arg(long, global = true, value_delimiter = ',')]
    pub p_list: Option<Vec<usize>>,
    /// Backend: "statevector" or "mps".
    #[arg(long, global = true)]
    pub backend: Option<String>,
    /// Bond-dimension cap for the mps backend.
    #[arg(long, global = true)]
    pub chi: Option<usize>,
    /// Relative singular-value cutoff for the mps backend.
    #[arg(long, global = true)]
    pub cutoff: Option<f64>,
    /// Shots for sampling commands.
    #[arg(long, global = true)]
    pub shots: Option<usize>,
    /// Root seed for sampling RNG streams.
    #[arg(long, global = true)]
    pub sample_seed: Option<u64>,
    /// Comma-separated bond-dimension ladder for bond-scan.
    #[arg(long, global = true, value_delimiter = ',')]
    pub chi_list: Option<Vec<usize>>,
    /// Reference bond dimension for bond-scan.
    #[arg(long, global = true)]
    pub chi_ref: Option<usize>,
    /// Landscape β-axis point count.
    #[arg(long, global = true)]
    pub grid_beta: Option<usize>,
    /// Landscape γ-axis point count.
    #[arg(long, global = true)]
    pub grid_gamma: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// JSON angle file mapping depth to {beta, gamma}; overrides the
    /// angle source.
    #[arg(long, global = true)]
    pub angles_file: Option<PathBuf>,
    /// Train angles on this ensemble member instead of the built-in table.
    #[arg(long, global = true)]
    pub train_on: Option<usize>,
    /// Basin-hopping iterations when training.
    #[arg(long, global = true)]
    pub train_iterations: Option<usize>,
}

impl ConfigOverrides {
    /// Load the config (or defaults) and apply every provided flag.
    pub fn resolve(&self) -> anyhow::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(map) = &self.map {
            cfg.map = map.clone();
        }
        if let Some(v) = self.ensemble_size {
            cfg.ensemble_size = v;
        }
        if let Some(v) = self.base_seed {
            cfg.base_seed = v;
        }
        if let Some(v) = &self.p_list {
            cfg.p_list = v.clone();
        }
        match self.backend.as_deref() {
            None => {}
            Some("statevector") => cfg.backend = BackendConfig::Statevector,
            Some("mps") => {
                let (chi, cutoff) = match cfg.backend {
                    BackendConfig::Mps { chi, cutoff } => (chi, cutoff),
                    BackendConfig::Statevector => (default_chi_ref(), 0.0),
                };
                cfg.backend = BackendConfig::Mps { chi, cutoff };
            }
            Some(other) => bail!("unknown backend '{other}' (statevector | mps)"),
        }
        if let Some(chi) = self.chi {
            let cutoff = match cfg.backend {
                BackendConfig::Mps { cutoff, .. } => cutoff,
                BackendConfig::Statevector => 0.0,
            };
            cfg.backend = BackendConfig::Mps { chi, cutoff };
        }
        if let Some(cutoff) = self.cutoff {
            match &mut cfg.backend {
                BackendConfig::Mps { cutoff: c, .. } => *c = cutoff,
                BackendConfig::Statevector => {
                    bail!("--cutoff only applies to the mps backend")
                }
            }
        }
        if let Some(v) = self.shots {
            cfg.shots = Some(v);
        }
        if let Some(v) = self.sample_seed {
            cfg.sample_seed = v;
        }
        if let Some(v) = &self.chi_list {
            cfg.chi_list = v.clone();
        }
        if let Some(v) = self.chi_ref {
            cfg.chi_ref = v;
        }
        if let Some(v) = self.grid_beta {
            cfg.grid_beta = v;
        }
        if let Some(v) = self.grid_gamma {
            cfg.grid_gamma = v;
        }
        if let Some(v) = &self.output_dir {
            cfg.output_dir = v.clone();
        }
        if let Some(path) = &self.angles_file {
            cfg.angle_source = AngleSource::File { path: path.clone() };
        }
        if let Some(k) = self.train_on {
            cfg.angle_source = AngleSource::TrainOnInstance { instance_index: k };
        }
        if let Some(v) = self.train_iterations {
            cfg.train_iterations = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
