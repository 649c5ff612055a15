//! Pattern statistics and the local drift model for the count in a test
//! region.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::{apply_event, Mode, Trajectory};
use crate::selection::SelectionSpec;
use crate::space::{Point, Space};
use crate::tessellation::{Configuration, Tessellation};

/// Drift fits need at least this many recorded steps.
pub const MIN_DRIFT_STEPS: usize = 10_000;
/// β is reported from snapshots with at least this many points in the region.
pub const BETA_MIN_COUNT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    /// Closed axis-aligned rectangle.
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
    /// Closed arc `[lo, hi]`; on the circle `hi` may exceed the length and wrap.
    Arc { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestRegion {
    pub shape: Shape,
    pub mu_measure: f64,
    pub lambda_measure: f64,
    length: f64,
}

impl TestRegion {
    pub fn rect(space: &Space, x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self> {
        if space.dim() != 2 {
            return Err(Error::DimensionMismatch("rectangular region on a one-dimensional space".into()));
        }
        let l = space.size();
        if !(0.0 <= x0 && x0 < x1 && x1 <= l && 0.0 <= y0 && y0 < y1 && y1 <= l) {
            return Err(Error::InvalidParameter { key: "region", reason: format!("rectangle outside [0, {l}]²") });
        }
        let ring = [[x0, y0], [x1, y0], [x1, y1], [x0, y1]];
        Self::checked(Shape::Rect { x0, y0, x1, y1 }, space.mu_of_polygon(&ring), space.lambda_of_polygon(&ring), l)
    }

    /// `[lo, hi]` with `0 ≤ lo < L`; on the circle an arc across the origin
    /// is written with `hi > L`.
    pub fn arc(space: &Space, lo: f64, hi: f64) -> Result<Self> {
        if space.dim() != 1 {
            return Err(Error::DimensionMismatch("arc region on a two-dimensional space".into()));
        }
        let l = space.size();
        let max_hi = if space.kind().is_periodic() { lo + l } else { l };
        if !(0.0 <= lo && lo < hi && hi <= max_hi && lo < l) {
            return Err(Error::InvalidParameter {
                key: "region",
                reason: format!("arc [{lo}, {hi}] outside the space"),
            });
        }
        Self::checked(Shape::Arc { lo, hi }, space.mu_of_interval(lo, hi), space.lambda_of_interval(lo, hi), l)
    }

    fn checked(shape: Shape, mu: f64, lambda: f64, length: f64) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::InvalidParameter { key: "region", reason: format!("μ(A) = {mu} must lie in (0, 1)") });
        }
        Ok(TestRegion { shape, mu_measure: mu, lambda_measure: lambda, length })
    }

    pub fn contains(&self, p: Point) -> bool {
        match self.shape {
            Shape::Rect { x0, y0, x1, y1 } => x0 <= p.x && p.x <= x1 && y0 <= p.y && p.y <= y1,
            Shape::Arc { lo, hi } => (lo <= p.x && p.x <= hi) || (p.x + self.length <= hi),
        }
    }
}

/// `N_A`: number of generators inside the region.
pub fn count_in_region(config: &Configuration, region: &TestRegion) -> usize {
    config.points().iter().filter(|p| region.contains(**p)).count()
}

/// Total selection weight of the generators in `region`, or of all of them
/// when `region` is `None`.
pub fn selection_mass(
    config: &Configuration,
    tess: &Tessellation,
    sel: &SelectionSpec,
    region: Option<&TestRegion>,
) -> Result<f64> {
    let mut acc = 0.0;
    for (i, p) in config.points().iter().enumerate() {
        if region.is_none_or(|r| r.contains(*p)) {
            acc += sel.weight(tess.volume(i), tess.degree(i))?;
        }
    }
    Ok(acc)
}

/// `1 - H / log k` for the entropy `H` of the cell-measure fractions.
pub fn thiel_redundancy(tess: &Tessellation) -> f64 {
    thiel_from_volumes(tess.volumes())
}

pub fn thiel_from_volumes(volumes: &[f64]) -> f64 {
    let k = volumes.len();
    if k < 2 {
        return 0.0;
    }
    let total: f64 = volumes.iter().sum();
    let h: f64 = volumes.iter().map(|v| v / total).filter(|&q| q > 0.0).map(|q| -q * q.ln()).sum();
    (1.0 - h / (k as f64).ln()).clamp(0.0, 1.0)
}

/// Variance of the counts in `grid_n^d` congruent quadrats divided by the
/// mean count. The population variance is used, so all points in a single
/// quadrat give `N (m - 1) / m` for `m` quadrats.
pub fn quadrat_variance(space: &Space, points: &[Point], grid_n: usize) -> f64 {
    let counts = quadrat_counts(space, points, grid_n);
    index_of_counts(&counts, points.len())
}

fn quadrat_of(space: &Space, p: Point, grid_n: usize) -> usize {
    let l = space.size();
    let cell = |v: f64| ((v / l * grid_n as f64) as usize).min(grid_n - 1);
    if space.dim() == 1 {
        cell(p.x)
    } else {
        cell(p.y) * grid_n + cell(p.x)
    }
}

fn quadrat_counts(space: &Space, points: &[Point], grid_n: usize) -> Vec<usize> {
    let grid_n = grid_n.max(1);
    let mut counts = vec![0usize; grid_n.pow(space.dim() as u32)];
    for p in points {
        counts[quadrat_of(space, *p, grid_n)] += 1;
    }
    counts
}

fn index_of_counts(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let m = counts.len() as f64;
    let mean = n as f64 / m;
    let ss: f64 = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum();
    ss / m / mean
}

/// Largest gap between consecutive sorted points, in units of the mean
/// spacing `L / N`. On the circle the wrap-around gap counts; on the
/// interval so do the two end gaps.
pub fn max_gap_index(space: &Space, points: &[Point]) -> f64 {
    let n = points.len();
    if n == 0 {
        return 0.0;
    }
    let l = space.size();
    let mut xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    xs.sort_by(f64::total_cmp);
    let mut gap = xs.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if space.kind().is_periodic() {
        gap = gap.max(xs[0] + l - xs[n - 1]);
    } else {
        gap = gap.max(xs[0]).max(l - xs[n - 1]);
    }
    gap * n as f64 / l
}

/// Scalar clustering index: quadrat variance ratio in 2D, normalised
/// maximal gap in 1D.
pub fn clustering_index(space: &Space, points: &[Point], grid_n: usize) -> f64 {
    if space.dim() == 1 {
        max_gap_index(space, points)
    } else {
        quadrat_variance(space, points, grid_n)
    }
}

/// Distance from `p` to the boundary of a bounded space (infinite when periodic).
fn border_distance(space: &Space, p: Point) -> f64 {
    if space.kind().is_periodic() {
        return f64::INFINITY;
    }
    let l = space.size();
    let d = p.x.min(l - p.x);
    if space.dim() == 1 {
        d
    } else {
        d.min(p.y).min(l - p.y)
    }
}

fn nearest_distance(space: &Space, q: Point, points: &[Point], skip: Option<usize>) -> f64 {
    let mut best = f64::INFINITY;
    for (k, p) in points.iter().enumerate() {
        if Some(k) != skip {
            best = best.min(space.distance_sq(q, *p));
        }
    }
    best.sqrt()
}

/// `(r, J(r))` with `J = (1 - G) / (1 - F)`. `G` uses nearest-neighbour
/// distances of the generators and `F` empty-space distances from a
/// stratified grid of about `f_resolution` test points. Bounded spaces use
/// minus sampling at erosion distance `r`. Radii where `F` or `G` reach 1, or
/// where no sample survives the erosion, are omitted.
pub fn j_function(space: &Space, points: &[Point], r_grid: &[f64], f_resolution: usize) -> Vec<(f64, f64)> {
    if points.len() < 2 {
        return Vec::new();
    }
    let nn: Vec<(f64, f64)> = crate::par_map(points.len(), |i| {
        (nearest_distance(space, points[i], points, Some(i)), border_distance(space, points[i]))
    });
    let l = space.size();
    let tests: Vec<Point> = if space.dim() == 1 {
        let m = f_resolution.max(1);
        (0..m).map(|s| Point::on_line((s as f64 + 0.5) * l / m as f64)).collect()
    } else {
        let m = ((f_resolution as f64).sqrt().ceil() as usize).max(1);
        let h = l / m as f64;
        (0..m * m).map(|s| Point::new(((s % m) as f64 + 0.5) * h, ((s / m) as f64 + 0.5) * h)).collect()
    };
    let es: Vec<(f64, f64)> = crate::par_map(tests.len(), |k| {
        (nearest_distance(space, tests[k], points, None), border_distance(space, tests[k]))
    });
    let cdf = |samples: &[(f64, f64)], r: f64| -> Option<f64> {
        let mut hit = 0usize;
        let mut total = 0usize;
        for &(d, b) in samples {
            if b >= r {
                total += 1;
                if d <= r {
                    hit += 1;
                }
            }
        }
        (total > 0).then(|| hit as f64 / total as f64)
    };
    let mut out = Vec::with_capacity(r_grid.len());
    for &r in r_grid {
        let (Some(g), Some(f)) = (cdf(&nn, r), cdf(&es, r)) else { continue };
        if f >= 1.0 || g >= 1.0 {
            continue;
        }
        out.push((r, (1.0 - g) / (1.0 - f)));
    }
    out
}

/// Nearest-neighbour distances between generators.
pub fn nearest_neighbor_distances(space: &Space, points: &[Point]) -> Vec<f64> {
    crate::par_map(points.len(), |i| nearest_distance(space, points[i], points, Some(i)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `bins + 1` increasing edges; the last bin is closed.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn new(values: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let bins = bins.max(1);
        let w = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|k| lo + k as f64 * w).collect();
        let mut counts = vec![0; bins];
        for &v in values {
            let k = if w > 0.0 { ((v - lo) / w).floor() } else { 0.0 };
            counts[(k.max(0.0) as usize).min(bins - 1)] += 1;
        }
        Histogram { edges, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSummary {
    pub volume_histogram: Histogram,
    /// `degree_histogram[d]` cells with `d` neighbours.
    pub degree_histogram: Vec<usize>,
    pub thiel_r: f64,
    pub j_function: Vec<(f64, f64)>,
    pub quadrat_variance: f64,
    pub clustering_index: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryOptions {
    pub volume_bins: usize,
    pub r_grid: Vec<f64>,
    pub f_resolution: usize,
    pub quadrat_grid: usize,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        SummaryOptions { volume_bins: 20, r_grid: Vec::new(), f_resolution: 10_000, quadrat_grid: 10 }
    }
}

pub fn summarize(config: &Configuration, tess: &Tessellation, opts: &SummaryOptions) -> PatternSummary {
    let space = config.space();
    let vols = tess.volumes();
    let hi = vols.iter().copied().fold(0.0, f64::max);
    let degrees = tess.degrees();
    let mut degree_histogram = vec![0; degrees.iter().copied().max().unwrap_or(0) + 1];
    for d in degrees {
        degree_histogram[d] += 1;
    }
    PatternSummary {
        volume_histogram: Histogram::new(vols, 0.0, hi, opts.volume_bins),
        degree_histogram,
        thiel_r: thiel_redundancy(tess),
        j_function: j_function(space, config.points(), &opts.r_grid, opts.f_resolution),
        quadrat_variance: quadrat_variance(space, config.points(), opts.quadrat_grid),
        clustering_index: clustering_index(space, config.points(), opts.quadrat_grid),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftBin {
    pub n_a: usize,
    pub mean: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaReport {
    pub mean: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftEstimate {
    pub alpha: f64,
    pub mu_a: f64,
    pub bins: Vec<DriftBin>,
    /// Least-squares `K` in `E(ΔN_A | N_A) = μ(A) - K N_A^(1-α)`.
    pub fitted_k: f64,
    /// `μ(A)^α N^(α-1)`.
    pub comparator_k: f64,
    /// `α` recovered from a log-log fit of `μ(A) - E(ΔN_A)`; NaN if under-determined.
    pub fitted_alpha_check: f64,
    /// Count-weighted slope of the binned mean drift against `N_A`.
    pub slope: f64,
    /// Drift does not depend on `N_A` (`α = 1`).
    pub constant_drift: bool,
    pub steps_used: usize,
    pub collapse_step: Option<usize>,
    pub beta: Option<BetaReport>,
}

impl DriftEstimate {
    /// Sign of `d/dN_A E(ΔN_A)` implied by the fitted model.
    pub fn model_drift_increasing(&self) -> bool {
        -self.fitted_k * (1.0 - self.alpha) > 0.0
    }
}

/// Truncates the fit at the first check where the clustering index exceeds
/// `threshold`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapseCut {
    pub grid_n: usize,
    pub threshold: f64,
    pub every: usize,
}

/// Bins the one-step increments of `N_A` (pooled over congruent `regions`)
/// by the current `N_A` and fits the drift model.
pub fn estimate_drift(
    traj: &Trajectory,
    regions: &[TestRegion],
    min_bin_count: usize,
    collapse: Option<CollapseCut>,
) -> Result<DriftEstimate> {
    let params = &traj.params;
    let alpha = params.selection.alpha().ok_or(Error::InvalidParameter {
        key: "selection",
        reason: "drift model needs a volume power selection".into(),
    })?;
    if params.mode != Mode::Replacement {
        return Err(Error::InvalidParameter { key: "mode", reason: "drift model covers replacement only".into() });
    }
    if regions.is_empty() {
        return Err(Error::InvalidParameter { key: "region", reason: "no test region".into() });
    }
    if traj.events.len() < MIN_DRIFT_STEPS {
        return Err(Error::InsufficientData(format!(
            "{} steps recorded, drift fits need {MIN_DRIFT_STEPS}",
            traj.events.len()
        )));
    }
    let mu_a = regions[0].mu_measure;
    let space = &params.space;

    let mut points = traj.initial.clone();
    let mut n_a: Vec<usize> = regions.iter().map(|r| points.iter().filter(|p| r.contains(**p)).count()).collect();
    // sums[n] = (Σ ΔN_A, count)
    let mut sums: Vec<(i64, usize)> = vec![(0, 0); params.n + 1];
    let mut collapse_step = None;
    let mut steps_used = 0;
    for ev in &traj.events {
        if let Some(cut) = collapse {
            if (ev.step % cut.every.max(1) == 1 || cut.every <= 1)
                && clustering_index(space, &points, cut.grid_n) > cut.threshold
            {
                collapse_step = Some(ev.step - 1);
                break;
            }
        }
        for (r, region) in regions.iter().enumerate() {
            let lost = region.contains(ev.removed) as i64;
            let gained = ev.inserted.is_some_and(|p| region.contains(p)) as i64;
            let slot = &mut sums[n_a[r]];
            slot.0 += gained - lost;
            slot.1 += 1;
            n_a[r] = (n_a[r] as i64 + gained - lost) as usize;
        }
        apply_event(&mut points, ev);
        steps_used += 1;
    }

    let bins: Vec<DriftBin> = sums
        .iter()
        .enumerate()
        .filter(|(_, s)| s.1 >= min_bin_count.max(1))
        .map(|(n, s)| DriftBin { n_a: n, mean: s.0 as f64 / s.1 as f64, count: s.1 })
        .collect();
    if bins.is_empty() {
        return Err(Error::InsufficientData(format!("no N_A bin reached {min_bin_count} samples")));
    }

    let expo = 1.0 - alpha;
    let constant_drift = expo == 0.0;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for b in &bins {
        let x = (b.n_a as f64).powf(expo);
        if !x.is_finite() {
            // N_A = 0 with α > 1
            continue;
        }
        let w = b.count as f64;
        sxy += w * x * (mu_a - b.mean);
        sxx += w * x * x;
    }
    let fitted_k = if sxx > 0.0 { sxy / sxx } else { f64::NAN };

    let slope = weighted_slope(bins.iter().map(|b| (b.n_a as f64, b.mean, b.count as f64)));
    let log_pts: Vec<(f64, f64, f64)> = bins
        .iter()
        .filter(|b| b.n_a > 0 && mu_a - b.mean > 0.0)
        .map(|b| ((b.n_a as f64).ln(), (mu_a - b.mean).ln(), b.count as f64))
        .collect();
    let fitted_alpha_check = if log_pts.len() >= 2 { 1.0 - weighted_slope(log_pts.into_iter()) } else { f64::NAN };

    let limit = collapse_step.unwrap_or(usize::MAX);
    let mut beta_sum = 0.0;
    let mut beta_n = 0usize;
    for snap in traj.snapshots.iter().filter(|s| s.step <= limit) {
        for region in regions {
            let inside: Vec<usize> = (0..snap.points.len()).filter(|&i| region.contains(snap.points[i])).collect();
            if inside.len() >= BETA_MIN_COUNT {
                let m = inside.iter().map(|&i| snap.volumes[i]).sum::<f64>() / inside.len() as f64;
                beta_sum += inside.len() as f64 * m / region.lambda_measure;
                beta_n += 1;
            }
        }
    }

    Ok(DriftEstimate {
        alpha,
        mu_a,
        bins,
        fitted_k,
        comparator_k: mu_a.powf(alpha) * (params.n as f64).powf(alpha - 1.0),
        fitted_alpha_check,
        slope,
        constant_drift,
        steps_used,
        collapse_step,
        beta: (beta_n > 0).then(|| BetaReport { mean: beta_sum / beta_n as f64, samples: beta_n }),
    })
}

fn weighted_slope(pts: impl Iterator<Item = (f64, f64, f64)>) -> f64 {
    let pts: Vec<_> = pts.collect();
    let w: f64 = pts.iter().map(|p| p.2).sum();
    if w <= 0.0 {
        return f64::NAN;
    }
    let mx = pts.iter().map(|p| p.0 * p.2).sum::<f64>() / w;
    let my = pts.iter().map(|p| p.1 * p.2).sum::<f64>() / w;
    let sxy: f64 = pts.iter().map(|p| p.2 * (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| p.2 * (p.0 - mx).powi(2)).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        f64::NAN
    }
}

/// Tiles a space into `k` (1D) or `k × k` (2D) congruent regions.
pub fn region_tiling(space: &Space, k: usize) -> Result<Vec<TestRegion>> {
    let l = space.size();
    let h = l / k as f64;
    if space.dim() == 1 {
        (0..k).map(|i| TestRegion::arc(space, i as f64 * h, (i + 1) as f64 * h)).collect()
    } else {
        (0..k * k)
            .map(|s| {
                let (r, c) = (s / k, s % k);
                TestRegion::rect(space, c as f64 * h, r as f64 * h, (c + 1) as f64 * h, (r + 1) as f64 * h)
            })
            .collect()
    }
}
