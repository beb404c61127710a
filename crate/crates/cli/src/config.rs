//! Command-line arguments and the resolved run configurations behind them.
//!
//! Each subcommand has a flag struct whose fields are all optional and a
//! config struct that a run is actually executed from. Flags are layered
//! over an optional `--config` JSON object, and the merged object is
//! deserialized into the config struct, which rejects unknown keys. The
//! resolved config is echoed into every output, so feeding it back through
//! `--config` repeats the run exactly.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, ValueEnum};
use qconn::{ConcurrenceDistribution, Error, NodeId, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};

pub const DEFAULT_MC_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TopologyKind {
    Complete,
    Er,
    Waxman,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Edge distribution of an ensemble sweep; the mean comes from the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SweepDist {
    Delta,
    Uniform { variance: f64 },
}

impl SweepDist {
    pub fn at(&self, mean: f64) -> Result<ConcurrenceDistribution> {
        match *self {
            SweepDist::Delta => ConcurrenceDistribution::delta(mean),
            SweepDist::Uniform { variance } => ConcurrenceDistribution::uniform(mean, variance),
        }
    }
}

/// Inclusive `start:step:stop` grid of mean concurrences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: f64,
    pub step: f64,
    pub stop: f64,
}

impl Grid {
    /// Grid values rounded to 12 decimals so that `0:0.01:1` hits 0.3
    /// exactly rather than 0.30000000000000004.
    pub fn values(&self) -> Result<Vec<f64>> {
        let Grid { start, step, stop } = *self;
        let ok = [start, step, stop].iter().all(|x| x.is_finite()) && step > 0.0 && start <= stop;
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "grid {start}:{step}:{stop} needs finite bounds, step > 0 and start <= stop"
            )));
        }
        let n = ((stop - start) / step + 1e-9).floor();
        if n > 1e6 {
            return Err(Error::InvalidParameter(format!(
                "grid {start}:{step}:{stop} has over a million points"
            )));
        }
        let values: Vec<f64> = (0..=n as usize)
            .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
            .collect();
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!("grid value {bad} outside [0, 1]")));
        }
        Ok(values)
    }
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    s.trim().parse().map_err(|_| format!("`{s}` is not a number"))
}

/// `delta:C0` or `uniform:MEAN:VARIANCE`.
pub fn parse_distribution(s: &str) -> std::result::Result<ConcurrenceDistribution, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let dist = match parts.as_slice() {
        ["delta", c0] => ConcurrenceDistribution::delta(parse_f64(c0)?),
        ["uniform", mean, var] => ConcurrenceDistribution::uniform(parse_f64(mean)?, parse_f64(var)?),
        _ => return Err(format!("expected delta:C0 or uniform:MEAN:VARIANCE, got `{s}`")),
    };
    dist.map_err(|e| e.to_string())
}

/// `delta` or `uniform:VARIANCE`.
pub fn parse_sweep_dist(s: &str) -> std::result::Result<SweepDist, String> {
    match s.split(':').collect::<Vec<_>>().as_slice() {
        ["delta"] => Ok(SweepDist::Delta),
        ["uniform", var] => {
            let variance = parse_f64(var)?;
            if variance >= 0.0 && variance.is_finite() {
                Ok(SweepDist::Uniform { variance })
            } else {
                Err(format!("variance must be finite and >= 0, got {variance}"))
            }
        }
        _ => Err(format!("expected delta or uniform:VARIANCE, got `{s}`")),
    }
}

pub fn parse_grid(s: &str) -> std::result::Result<Grid, String> {
    match s.split(':').collect::<Vec<_>>().as_slice() {
        [a, b, c] => {
            let grid = Grid {
                start: parse_f64(a)?,
                step: parse_f64(b)?,
                stop: parse_f64(c)?,
            };
            grid.values().map_err(|e| e.to_string())?;
            Ok(grid)
        }
        _ => Err(format!("expected START:STEP:STOP, got `{s}`")),
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Accepts a single number or an array of numbers.
fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

/// Overlays the flags that were given on the `--config` object, then
/// deserializes the result.
pub fn resolve<A: Serialize, C: DeserializeOwned>(config: Option<&Path>, flags: &A) -> Result<C> {
    let mut merged = match config {
        Some(path) => {
            let file = crate::commands::at_path(path, File::open(path).map_err(Error::from))?;
            serde_json::from_reader(BufReader::new(file))?
        }
        None => serde_json::Value::Object(Default::default()),
    };
    let Some(map) = merged.as_object_mut() else {
        return Err(Error::InvalidParameter("config file must hold a JSON object".into()));
    };
    if let serde_json::Value::Object(given) = serde_json::to_value(flags)? {
        map.extend(given);
    }
    Ok(serde_json::from_value(merged)?)
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologyKind>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    /// Mean degree k of the Erdős–Rényi model.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avg_degree: Option<f64>,
    /// Waxman disk radius in km.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    /// Waxman length scale; defaults to 226 / (2 * radius).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Fiber loss in dB/km.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Photons per entanglement-generation attempt.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub photons: Option<u32>,
    /// delta:C0 or uniform:MEAN:VARIANCE
    #[arg(long = "dist", value_parser = parse_distribution)]
    #[serde(rename = "distribution", skip_serializing_if = "Option::is_none")]
    pub distribution: Option<ConcurrenceDistribution>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Network JSON destination; stdout when omitted.
    #[arg(long, short)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateConfig {
    pub topology: TopologyKind,
    pub nodes: usize,
    #[serde(default)]
    pub avg_degree: Option<f64>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub photons: Option<u32>,
    pub distribution: ConcurrenceDistribution,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct MetricsArgs {
    /// Network JSON file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub network: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Comma-separated node ids; all nodes when omitted.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<NodeId>>,
    /// Also report the clustering coefficients of this node.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qcc: Option<NodeId>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Write the pair strength table (with paths) to this CSV file.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strengths: Option<PathBuf>,
    #[arg(long, short)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsConfig {
    pub network: PathBuf,
    pub epsilon: f64,
    #[serde(default)]
    pub subset: Option<Vec<NodeId>>,
    #[serde(default)]
    pub qcc: Option<NodeId>,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub strengths: Option<PathBuf>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PmfArgs {
    /// Network JSON file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub network: Option<PathBuf>,
    #[arg(long, short)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PmfConfig {
    pub network: PathBuf,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EnsembleArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologyKind>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub avg_degree: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub photons: Option<u32>,
    /// Hop-distance PMF JSON, as written by `qconn pmf`.
    #[arg(long, conflicts_with = "auto")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pmf: Option<PathBuf>,
    /// Measure the PMF on one generated realization of the topology.
    #[arg(long, action = ArgAction::SetTrue)]
    #[serde(skip_serializing_if = "is_false")]
    pub auto: bool,
    /// delta or uniform:VARIANCE
    #[arg(long = "dist", value_parser = parse_sweep_dist)]
    #[serde(rename = "distribution", skip_serializing_if = "Option::is_none")]
    pub distribution: Option<SweepDist>,
    /// Comma-separated thresholds.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Vec<f64>>,
    /// START:STEP:STOP over the mean concurrence.
    #[arg(long, value_parser = parse_grid)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cbar_grid: Option<Grid>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mc_samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Add rows measured on the generated realization with sampled edges.
    #[arg(long, action = ArgAction::SetTrue)]
    #[serde(skip_serializing_if = "is_false")]
    pub simulate: bool,
    #[arg(long, short)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    pub topology: TopologyKind,
    #[serde(default)]
    pub nodes: Option<usize>,
    #[serde(default)]
    pub avg_degree: Option<f64>,
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub photons: Option<u32>,
    #[serde(default)]
    pub pmf: Option<PathBuf>,
    #[serde(default)]
    pub auto: bool,
    pub distribution: SweepDist,
    #[serde(deserialize_with = "one_or_many")]
    pub epsilon: Vec<f64>,
    pub cbar_grid: Grid,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub simulate: bool,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_mc_samples() -> usize {
    DEFAULT_MC_SAMPLES
}

#[derive(Debug, Args, Serialize)]
pub struct RegionalArgs {
    /// Network JSON file with node positions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub network: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Region radius r in km; centres sit on a hexagonal lattice of spacing 2r.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region_radius: Option<f64>,
    #[arg(long, short)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionalConfig {
    pub network: PathBuf,
    pub epsilon: f64,
    pub region_radius: f64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// Topology fields shared by `generate` and `ensemble`.
pub struct TopologyParams {
    pub kind: TopologyKind,
    pub nodes: Option<usize>,
    pub avg_degree: Option<f64>,
    pub radius: Option<f64>,
    pub alpha: Option<f64>,
    pub gamma: Option<f64>,
    pub photons: Option<u32>,
}

impl GenerateConfig {
    pub fn topology_params(&self) -> TopologyParams {
        TopologyParams {
            kind: self.topology,
            nodes: Some(self.nodes),
            avg_degree: self.avg_degree,
            radius: self.radius,
            alpha: self.alpha,
            gamma: self.gamma,
            photons: self.photons,
        }
    }
}

impl EnsembleConfig {
    pub fn topology_params(&self) -> TopologyParams {
        TopologyParams {
            kind: self.topology,
            nodes: self.nodes,
            avg_degree: self.avg_degree,
            radius: self.radius,
            alpha: self.alpha,
            gamma: self.gamma,
            photons: self.photons,
        }
    }
}
