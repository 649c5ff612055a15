//! Subcommand implementations. Each returns the one-line summary printed
//! on success.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use vorproc::diagnostics::{normalize_alphas, selection_sweep, SweepOptions};
use vorproc::process::{self, apply_event, Snapshot};
use vorproc::statistics::{estimate_drift, summarize, DriftEstimate, SummaryOptions, TestRegion};
use vorproc::{Configuration, Error, Mode, SelectionSpec, Tessellation, Trajectory};

use crate::config::{RunConfig, StatisticsConfig};
use crate::output::{opt, read_trajectory, snapshot_raster, spacetime_raster, write_trajectory, Table};

pub fn describe(sel: &SelectionSpec) -> String {
    match sel {
        SelectionSpec::VolumePower { alpha } => format!("volume_power(alpha={alpha})"),
        SelectionSpec::VolumeTable { values, .. } => format!("volume_table({} pieces)", values.len()),
        SelectionSpec::NeighborTable { values } => format!("neighbor_table({} degrees)", values.len()),
    }
}

fn seed_note(cfg: &RunConfig) -> String {
    match cfg.process.seed {
        Some(s) => format!("seed={s}"),
        None => "seed=0 (default)".into(),
    }
}

fn write_snapshots(dir: &Path, traj: &Trajectory) -> Result<()> {
    let dim = traj.params.space.dim();
    let sdir = dir.join("snapshots");
    fs::create_dir_all(&sdir)?;
    for s in &traj.snapshots {
        let path = sdir.join(format!("step_{:08}.csv", s.step));
        let f = fs::File::create(&path).with_context(|| format!("cannot create {}", path.display()))?;
        s.write_table(dim, std::io::BufWriter::new(f))?;
    }
    Ok(())
}

fn write_rasters(dir: &Path, traj: &Trajectory, spacetime_bins: usize, raster_size: usize) -> Result<()> {
    let space = &traj.params.space;
    snapshot_raster(space, &traj.final_points(), raster_size)?.save(&dir.join("snapshot.pgm"))?;
    if space.dim() == 1 {
        spacetime_raster(space, &traj.initial, &traj.events, spacetime_bins)?.save(&dir.join("spacetime.pgm"))?;
    }
    Ok(())
}

pub struct FinalStats {
    pub clustering_index: f64,
    pub thiel_r: f64,
    pub drift_fits: usize,
    pub warnings: Vec<String>,
}

/// Pattern statistics of the final configuration and, for volume-power
/// chains with test regions, the drift tables.
pub fn write_statistics(dir: &Path, traj: &Trajectory, stats: &StatisticsConfig) -> Result<FinalStats> {
    let params = &traj.params;
    let space = Arc::new(params.space.clone());
    let regions = stats.regions(&space)?;
    let points = traj.final_points();
    let n = points.len();
    let config = Configuration::new(space.clone(), points)?;
    let tess = Tessellation::build(&config)?;
    let opts = SummaryOptions {
        volume_bins: stats.volume_bins,
        r_grid: stats.radii(&space, n),
        f_resolution: stats.f_resolution,
        quadrat_grid: stats.quadrat_grid,
    };
    let summary = summarize(&config, &tess, &opts);

    let mut t = Table::new(&["metric", "value"]);
    for (k, v) in [
        ("points", n.to_string()),
        ("steps", traj.events.len().to_string()),
        ("thiel_r", summary.thiel_r.to_string()),
        ("quadrat_variance", summary.quadrat_variance.to_string()),
        ("clustering_index", summary.clustering_index.to_string()),
    ] {
        t.row(vec![k.into(), v]);
    }
    t.save(&dir.join("summary.csv"))?;

    let mut t = Table::new(&["lo", "hi", "count"]);
    let h = &summary.volume_histogram;
    for k in 0..h.counts.len() {
        t.row(vec![h.edges[k].to_string(), h.edges[k + 1].to_string(), h.counts[k].to_string()]);
    }
    t.save(&dir.join("volume_histogram.csv"))?;

    let mut t = Table::new(&["degree", "count"]);
    for (d, c) in summary.degree_histogram.iter().enumerate().filter(|(_, &c)| c > 0) {
        t.row(vec![d.to_string(), c.to_string()]);
    }
    t.save(&dir.join("degree_histogram.csv"))?;

    let mut t = Table::new(&["r", "j"]);
    for (r, j) in &summary.j_function {
        t.row(vec![r.to_string(), j.to_string()]);
    }
    t.save(&dir.join("j_function.csv"))?;

    let mut warnings = Vec::new();
    let mut fits: Vec<(String, DriftEstimate)> = Vec::new();
    if !regions.is_empty() {
        if params.selection.alpha().is_none() || params.mode != Mode::Replacement {
            warnings.push("drift tables need a volume_power selection in replacement mode; skipped".into());
        } else {
            let groups: Vec<(String, Vec<TestRegion>)> = if stats.pool_regions {
                vec![("pooled".into(), regions.clone())]
            } else {
                regions.iter().enumerate().map(|(k, r)| (k.to_string(), vec![*r])).collect()
            };
            for (label, group) in groups {
                match estimate_drift(traj, &group, stats.min_bin_count, stats.collapse_cut()) {
                    Ok(e) => fits.push((label, e)),
                    Err(Error::InsufficientData(why)) => {
                        warnings.push(format!("drift for region {label} skipped: {why}"))
                    }
                    Err(e) => return Err(e).with_context(|| format!("drift for region {label}")),
                }
            }
        }
    }
    if !fits.is_empty() {
        let mut bins = Table::new(&["region", "n_a", "mean_delta", "count"]);
        let mut fit = Table::new(&[
            "region",
            "alpha",
            "mu_a",
            "fitted_k",
            "comparator_k",
            "fitted_alpha_check",
            "slope",
            "constant_drift",
            "steps_used",
            "collapse_step",
            "beta",
            "beta_samples",
        ]);
        for (label, e) in &fits {
            for b in &e.bins {
                bins.row(vec![label.clone(), b.n_a.to_string(), b.mean.to_string(), b.count.to_string()]);
            }
            fit.row(vec![
                label.clone(),
                e.alpha.to_string(),
                e.mu_a.to_string(),
                e.fitted_k.to_string(),
                e.comparator_k.to_string(),
                e.fitted_alpha_check.to_string(),
                e.slope.to_string(),
                e.constant_drift.to_string(),
                e.steps_used.to_string(),
                opt(e.collapse_step),
                opt(e.beta.map(|b| b.mean)),
                opt(e.beta.map(|b| b.samples)),
            ]);
        }
        bins.save(&dir.join("drift_bins.csv"))?;
        fit.save(&dir.join("drift_fit.csv"))?;
    }
    Ok(FinalStats {
        clustering_index: summary.clustering_index,
        thiel_r: summary.thiel_r,
        drift_fits: fits.len(),
        warnings,
    })
}

pub fn simulate(cfg: &RunConfig) -> Result<String> {
    let params = cfg.params()?;
    cfg.statistics.regions(&params.space)?;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    fs::write(dir.join("config.toml"), cfg.to_toml())?;
    let traj = process::run(&params, &mut [])?;
    write_trajectory(&dir.join("trajectory.ndjson"), &traj)?;
    if cfg.output.snapshots {
        write_snapshots(dir, &traj)?;
    }
    write_rasters(dir, &traj, cfg.output.spacetime_bins, cfg.output.raster_size)?;
    let st = write_statistics(dir, &traj, &cfg.statistics)?;
    for w in &st.warnings {
        eprintln!("warning: {w}");
    }
    Ok(format!(
        "simulate: {} N={} T={} {} {} {:?}: clustering index {:.4}, Thiel R {:.4}, {} drift fit(s); outputs in {}",
        params.space.kind().name(),
        params.n,
        traj.events.len(),
        describe(&params.selection),
        seed_note(cfg),
        params.mode,
        st.clustering_index,
        st.thiel_r,
        st.drift_fits,
        dir.display()
    ))
}

pub fn sweep(cfg: &RunConfig, alphas: Option<&[f64]>) -> Result<String> {
    let base = cfg.params()?;
    let sc = cfg.sweep.clone().unwrap_or(crate::config::SweepConfig {
        alphas: Vec::new(),
        selections: Vec::new(),
        checkpoint_every: 256,
        collapse_threshold: None,
    });
    let alphas = alphas.map(|a| a.to_vec()).unwrap_or_else(|| sc.alphas.clone());
    let selections: Vec<SelectionSpec> = if !alphas.is_empty() || sc.selections.is_empty() {
        let (list, dropped) = normalize_alphas(&alphas).map_err(|e| anyhow::anyhow!("sweep.alphas: {e}"))?;
        if dropped {
            eprintln!("warning: duplicate α values removed; sweeping {list:?}");
        }
        list.into_iter().map(SelectionSpec::volume_power).collect()
    } else {
        sc.selections.iter().map(|s| s.to_spec(base.n)).collect()
    };
    let opts = SweepOptions {
        grid_n: cfg.statistics.quadrat_grid,
        checkpoint_every: sc.checkpoint_every,
        collapse_threshold: sc.collapse_threshold,
    };
    let report = selection_sweep(&selections, &base, &opts)?;
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    fs::write(dir.join("config.toml"), cfg.to_toml())?;
    let mut t = Table::new(&["cell", "selection", "alpha", "final_index", "mean_index", "thiel_r", "collapse_time"]);
    for (k, row) in report.rows.iter().enumerate() {
        t.row(vec![
            k.to_string(),
            describe(&row.selection),
            opt(row.alpha),
            row.final_index.to_string(),
            row.mean_index.to_string(),
            row.thiel_r.to_string(),
            opt(row.collapse_time),
        ]);
        let cdir = dir.join(format!("cell_{k:02}"));
        fs::create_dir_all(&cdir)?;
        write_trajectory(&cdir.join("trajectory.ndjson"), &row.trajectory)?;
        let last = row.trajectory.snapshots.last().expect("final snapshot");
        let f = fs::File::create(cdir.join("final_snapshot.csv"))?;
        last.write_table(base.space.dim(), std::io::BufWriter::new(f))?;
        write_rasters(&cdir, &row.trajectory, cfg.output.spacetime_bins, cfg.output.raster_size)?;
    }
    t.save(&dir.join("sweep.csv"))?;
    Ok(format!(
        "sweep: {} cells on {} N={} T={} {}; outputs in {}",
        report.rows.len(),
        base.space.kind().name(),
        base.n,
        base.steps,
        seed_note(cfg),
        dir.display()
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RenderKind {
    Spacetime,
    Snapshot,
}

pub fn render(trajectory: &Path, kind: RenderKind, bins: usize, out: Option<PathBuf>) -> Result<String> {
    let traj = read_trajectory(trajectory)?;
    let space = &traj.params.space;
    let (img, name) = match kind {
        RenderKind::Spacetime => (spacetime_raster(space, &traj.initial, &traj.events, bins)?, "spacetime.pgm"),
        RenderKind::Snapshot => (snapshot_raster(space, &traj.final_points(), bins)?, "snapshot.pgm"),
    };
    let out = out.unwrap_or_else(|| trajectory.parent().unwrap_or(Path::new(".")).join(name));
    img.save(&out)?;
    Ok(format!("render: {}x{} graymap written to {}", img.width, img.height, out.display()))
}

/// Snapshots at the recorded cadence, recomputed from the event log.
pub fn rebuild_snapshots(traj: &Trajectory) -> Result<Vec<Snapshot>> {
    let space = Arc::new(traj.params.space.clone());
    let every = traj.params.snapshot_every.max(1);
    let capture = |step: usize, pts: &[vorproc::Point]| -> Result<Snapshot> {
        let config = Configuration::new(space.clone(), pts.to_vec())?;
        let tess = Tessellation::build(&config)?;
        Ok(Snapshot {
            step,
            points: pts.to_vec(),
            volumes: tess.volumes().to_vec(),
            neighbors: (0..tess.len()).map(|i| tess.neighbors(i).to_vec()).collect(),
        })
    };
    let mut pts = traj.initial.clone();
    let mut out = vec![capture(0, &pts)?];
    for ev in &traj.events {
        apply_event(&mut pts, ev);
        if ev.step % every == 0 || ev.step == traj.events.len() {
            out.push(capture(ev.step, &pts)?);
        }
    }
    Ok(out)
}

pub fn stats(trajectory: &Path, cfg: Option<&RunConfig>, out_dir: Option<PathBuf>) -> Result<String> {
    let mut traj = read_trajectory(trajectory)?;
    if traj.initial.len() < 2 && traj.events.is_empty() {
        bail!("{}: statistics need at least two points", trajectory.display());
    }
    traj.snapshots = rebuild_snapshots(&traj)?;
    let stats_cfg = cfg.map(|c| c.statistics.clone()).unwrap_or_default();
    let dir = out_dir.or_else(|| cfg.map(|c| c.output.dir.clone())).unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let st = write_statistics(&dir, &traj, &stats_cfg)?;
    for w in &st.warnings {
        eprintln!("warning: {w}");
    }
    Ok(format!(
        "stats: clustering index {:.4}, Thiel R {:.4}, {} drift fit(s); tables in {}",
        st.clustering_index,
        st.thiel_r,
        st.drift_fits,
        dir.display()
    ))
}
