//! Run configuration: a versioned TOML document with strict key checking.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use vorproc::statistics::{CollapseCut, TestRegion};
use vorproc::{DensityGrid, InitKind, Mode, ProcessParams, SelectionSpec, Space, SpaceKind};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub space: SpaceConfig,
    pub process: ProcessConfig,
    #[serde(default)]
    pub statistics: StatisticsConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub kind: SpaceKind,
    #[serde(default = "one")]
    pub size: f64,
    /// Shared density of `λ` and `μ`, one row per band of the chart.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_density: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_density: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessConfig {
    pub n: usize,
    pub steps: usize,
    #[serde(default = "replacement")]
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
    #[serde(default = "iid")]
    pub init: InitKind,
    pub selection: SelectionConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SelectionConfig {
    VolumePower {
        alpha: f64,
    },
    VolumeTable {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    NeighborTable {
        values: Vec<f64>,
    },
    /// `base + scale·|d - center|^power` for degrees up to `max_degree`
    /// (default `n - 1`), then `overrides` as `[degree, value]` pairs.
    NeighborFormula {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max_degree: Option<usize>,
        base: f64,
        scale: f64,
        center: f64,
        #[serde(default = "one")]
        power: f64,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        overrides: Vec<(usize, f64)>,
    },
}

impl SelectionConfig {
    pub fn to_spec(&self, n: usize) -> SelectionSpec {
        match self {
            SelectionConfig::VolumePower { alpha } => SelectionSpec::volume_power(*alpha),
            SelectionConfig::VolumeTable { breakpoints, values } => {
                SelectionSpec::VolumeTable { breakpoints: breakpoints.clone(), values: values.clone() }
            }
            SelectionConfig::NeighborTable { values } => SelectionSpec::NeighborTable { values: values.clone() },
            SelectionConfig::NeighborFormula { max_degree, base, scale, center, power, overrides } => {
                let max = max_degree.unwrap_or(n.saturating_sub(1).max(1));
                SelectionSpec::neighbor_formula(max, *base, *scale, *center, *power, overrides)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionConfig {
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    Arc { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatisticsConfig {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub regions: Vec<RegionConfig>,
    /// Fit the drift model once over all regions instead of per region.
    #[serde(default)]
    pub pool_regions: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub r_grid: Vec<f64>,
    #[serde(default = "f_resolution")]
    pub f_resolution: usize,
    #[serde(default = "ten")]
    pub quadrat_grid: usize,
    #[serde(default = "twenty")]
    pub volume_bins: usize,
    #[serde(default = "fifty")]
    pub min_bin_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collapse_threshold: Option<f64>,
    #[serde(default = "hundred")]
    pub collapse_every: usize,
}

impl Default for StatisticsConfig {
    fn default() -> Self {
        StatisticsConfig {
            regions: Vec::new(),
            pool_regions: false,
            r_grid: Vec::new(),
            f_resolution: f_resolution(),
            quadrat_grid: 10,
            volume_bins: 20,
            min_bin_count: 50,
            collapse_threshold: None,
            collapse_every: 100,
        }
    }
}

impl StatisticsConfig {
    pub fn regions(&self, space: &Space) -> Result<Vec<TestRegion>> {
        self.regions
            .iter()
            .enumerate()
            .map(|(k, r)| {
                match *r {
                    RegionConfig::Rect { x0, y0, x1, y1 } => TestRegion::rect(space, x0, y0, x1, y1),
                    RegionConfig::Arc { lo, hi } => TestRegion::arc(space, lo, hi),
                }
                .with_context(|| format!("statistics.regions[{k}]"))
            })
            .collect()
    }

    pub fn collapse_cut(&self) -> Option<CollapseCut> {
        self.collapse_threshold.map(|threshold| CollapseCut {
            grid_n: self.quadrat_grid,
            threshold,
            every: self.collapse_every.max(1),
        })
    }

    /// Configured radii, or eight radii up to half the mean spacing.
    pub fn radii(&self, space: &Space, n: usize) -> Vec<f64> {
        if !self.r_grid.is_empty() {
            return self.r_grid.clone();
        }
        let spacing = (space.size().powi(space.dim() as i32) / n.max(1) as f64).powf(1.0 / space.dim() as f64);
        (1..=8).map(|k| k as f64 / 8.0 * 0.5 * spacing).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "out_dir")]
    pub dir: PathBuf,
    /// Columns of the space-time raster (one-dimensional spaces only).
    #[serde(default = "raster")]
    pub spacetime_bins: usize,
    /// Side of the final-configuration raster.
    #[serde(default = "raster")]
    pub raster_size: usize,
    #[serde(default = "yes")]
    pub snapshots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: out_dir(), spacetime_bins: 256, raster_size: 256, snapshots: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alphas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub selections: Vec<SelectionConfig>,
    #[serde(default = "checkpoint_every")]
    pub checkpoint_every: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collapse_threshold: Option<f64>,
}

fn one() -> f64 {
    1.0
}
fn replacement() -> Mode {
    Mode::Replacement
}
fn iid() -> InitKind {
    InitKind::IidMu
}
fn f_resolution() -> usize {
    10_000
}
fn ten() -> usize {
    10
}
fn twenty() -> usize {
    20
}
fn fifty() -> usize {
    50
}
fn hundred() -> usize {
    100
}
fn raster() -> usize {
    256
}
fn checkpoint_every() -> usize {
    256
}
fn yes() -> bool {
    true
}
fn out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn from_str_with(text: &str, overrides: &[String]) -> Result<Self> {
        let mut doc: toml::Table = toml::from_str(text).context("config is not valid TOML")?;
        for ov in overrides {
            apply_override(&mut doc, ov)?;
        }
        match doc.get("schema_version") {
            None => bail!("missing key `schema_version`"),
            Some(toml::Value::Integer(v)) if *v == SCHEMA_VERSION as i64 => {}
            Some(v) => bail!("schema_version: unsupported value {v}, expected {SCHEMA_VERSION}"),
        }
        let cfg: RunConfig =
            toml::Value::Table(doc).try_into().map_err(|e: toml::de::Error| anyhow!("{}", e.message()))?;
        cfg.params().context("invalid configuration")?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        Self::from_str_with(&text, overrides).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn seed(&self) -> u64 {
        self.process.seed.unwrap_or(0)
    }

    pub fn space(&self) -> Result<Space> {
        let s = &self.space;
        let mut space = Space::new(s.kind, s.size).context("space.size")?;
        let grid =
            |rows: &Vec<Vec<f64>>, key: &str| DensityGrid::from_rows(rows).with_context(|| format!("space.{key}"));
        if let Some(rows) = &s.density {
            if s.lambda_density.is_some() || s.mu_density.is_some() {
                bail!("space.density: cannot be combined with lambda_density or mu_density");
            }
            space = space.with_density(grid(rows, "density")?).context("space.density")?;
        }
        if let Some(rows) = &s.lambda_density {
            space = space.with_lambda_density(grid(rows, "lambda_density")?).context("space.lambda_density")?;
        }
        if let Some(rows) = &s.mu_density {
            space = space.with_mu_density(grid(rows, "mu_density")?).context("space.mu_density")?;
        }
        Ok(space)
    }

    pub fn params(&self) -> Result<ProcessParams> {
        let p = &self.process;
        let params = ProcessParams {
            space: self.space()?,
            n: p.n,
            steps: p.steps,
            mode: p.mode,
            selection: p.selection.to_spec(p.n),
            init: p.init.clone(),
            seed: self.seed(),
            snapshot_every: p.snapshot_every.unwrap_or(p.steps.max(1)),
        };
        params.validate().map_err(|e| match e {
            vorproc::Error::InvalidParameter { key, reason } => anyhow!("process.{key}: {reason}"),
            other => anyhow!("process: {other}"),
        })?;
        Ok(params)
    }
}

/// Applies `dotted.key=value`; the value is parsed as TOML and falls back
/// to a bare string.
pub fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| anyhow!("override `{spec}` is not key=value"))?;
    let key = key.trim();
    if key.is_empty() {
        bail!("override `{spec}` has an empty key");
    }
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.trim().to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    let mut table = doc;
    for part in &parts[..parts.len() - 1] {
        let entry = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| anyhow!("override {key}: `{part}` is not a table"))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
schema_version = 1

[space]
kind = "circle"

[process]
n = 16
steps = 100
selection = { kind = "volume_power", alpha = 1.5 }
"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = RunConfig::from_str_with(BASE, &[]).unwrap();
        assert_eq!(c.seed(), 0);
        assert_eq!(c.process.seed, None);
        assert_eq!(c.output.spacetime_bins, 256);
        assert_eq!(c.params().unwrap().snapshot_every, 100);
    }

    #[test]
    fn overrides_edit_nested_keys() {
        let c =
            RunConfig::from_str_with(BASE, &["process.selection.alpha=0.5".into(), "process.seed=9".into()]).unwrap();
        assert_eq!(c.process.selection, SelectionConfig::VolumePower { alpha: 0.5 });
        assert_eq!(c.seed(), 9);
        let c = RunConfig::from_str_with(BASE, &["output.dir=results/a".into()]).unwrap();
        assert_eq!(c.output.dir, PathBuf::from("results/a"));
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = RunConfig::from_str_with(BASE, &["process.alpah=1".into()]).unwrap_err();
        assert!(format!("{err:#}").contains("alpah"), "{err:#}");
        let err = RunConfig::from_str_with(&BASE.replace("schema_version = 1", "schema_version = 2"), &[]).unwrap_err();
        assert!(format!("{err:#}").contains("schema_version"));
    }

    #[test]
    fn zero_steps_name_the_key() {
        let err = RunConfig::from_str_with(BASE, &["process.steps=0".into()]).unwrap_err();
        assert!(format!("{err:#}").contains("process.steps"), "{err:#}");
    }

    #[test]
    fn round_trip() {
        let text = r#"
schema_version = 1
[space]
kind = "torus"
size = 2.0
density = [[1.0, 2.0], [0.5, 1.0]]
[process]
n = 64
steps = 1000
seed = 3
init = { kind = "single_cluster", center = [0.5, 0.5], radius = 0.1 }
selection = { kind = "neighbor_formula", base = 1.0, scale = 1.0, center = 6.0, overrides = [[5, 50.0]] }
[statistics]
regions = [{ shape = "rect", x0 = 0.0, y0 = 0.0, x1 = 0.5, y1 = 0.5 }]
r_grid = [0.01, 0.02]
[sweep]
alphas = [0.5, 1.0]
"#;
        let c = RunConfig::from_str_with(text, &[]).unwrap();
        let again = RunConfig::from_str_with(&c.to_toml(), &[]).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.params().unwrap(), again.params().unwrap());
    }
}
