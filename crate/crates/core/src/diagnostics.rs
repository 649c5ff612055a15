//! Empirical checks of the chain's long-run behaviour: two-chain
//! convergence, the minorization bound, and clustering sweeps over `α`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::{self, ChainState, InitKind, ProcessParams, StepEvent};
use crate::selection::{minorization_bound, SelectionSpec};
use crate::statistics::{clustering_index, thiel_from_volumes};

/// Two-sample Kolmogorov-Smirnov distance `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return f64::NAN;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceOptions {
    /// Discarded prefix; `None` means a quarter of the run.
    pub burn_in: Option<usize>,
    /// Sampling interval; `None` means `max(1, N / 4)` steps.
    pub thin: Option<usize>,
    /// `None` means powers of two up to the run length, plus the run length.
    pub checkpoints: Option<Vec<usize>>,
    /// Stream cells of the two chains.
    pub streams: (u64, u64),
    pub threshold: f64,
}

impl Default for ConvergenceOptions {
    fn default() -> Self {
        ConvergenceOptions { burn_in: None, thin: None, checkpoints: None, streams: (0, 1), threshold: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// `(checkpoint, KS)` for checkpoints past the burn-in.
    pub ks_series: Vec<(usize, f64)>,
    pub burn_in: usize,
    pub verdict_threshold: f64,
    pub samples: (usize, usize),
}

impl ConvergenceReport {
    pub fn final_ks(&self) -> f64 {
        self.ks_series.last().map_or(f64::NAN, |s| s.1)
    }

    pub fn converged(&self) -> bool {
        self.final_ks() < self.verdict_threshold
    }
}

/// `(step, cell volumes)` pairs recorded by one chain.
type Samples = Vec<(usize, Vec<f64>)>;

pub fn default_checkpoints(steps: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..usize::BITS).map(|k| 1usize << k).take_while(|&c| c < steps).collect();
    out.push(steps);
    out
}

/// Runs two chains that differ only in their initial configuration and
/// stream, and compares their pooled post-burn-in cell measures.
pub fn two_chain_convergence(
    params: &ProcessParams,
    init_a: &InitKind,
    init_b: &InitKind,
    opts: &ConvergenceOptions,
) -> Result<ConvergenceReport> {
    params.validate()?;
    let steps = params.steps;
    let burn_in = opts.burn_in.unwrap_or(steps / 4);
    let thin = opts.thin.unwrap_or((params.n / 4).max(1)).max(1);
    let setups = [(init_a, opts.streams.0), (init_b, opts.streams.1)];
    let runs: Vec<Result<Samples>> = crate::par_map(2, |c| {
        let mut p = params.clone();
        p.init = setups[c].0.clone();
        p.snapshot_every = steps;
        let mut samples = Vec::new();
        let mut obs = |step: usize, state: &ChainState, _: &StepEvent| {
            if step > burn_in && (step - burn_in).is_multiple_of(thin) {
                samples.push((step, state.tessellation().volumes().to_vec()));
            }
        };
        process::run_cell(&p, setups[c].1, &mut [&mut obs])?;
        Ok(samples)
    });
    let mut runs = runs.into_iter();
    let a = runs.next().expect("two chains")?;
    let b = runs.next().expect("two chains")?;
    let pool = |s: &[(usize, Vec<f64>)], upto: usize| -> Vec<f64> {
        s.iter().take_while(|x| x.0 <= upto).flat_map(|x| x.1.iter().copied()).collect()
    };
    let checkpoints = opts.checkpoints.clone().unwrap_or_else(|| default_checkpoints(steps));
    let mut ks_series = Vec::new();
    for c in checkpoints {
        let (pa, pb) = (pool(&a, c), pool(&b, c));
        if !pa.is_empty() && !pb.is_empty() {
            ks_series.push((c, ks_two_sample(&pa, &pb)));
        }
    }
    let samples = (a.iter().map(|x| x.1.len()).sum(), b.iter().map(|x| x.1.len()).sum());
    Ok(ConvergenceReport { ks_series, burn_in, verdict_threshold: opts.threshold, samples })
}

/// Correctly rounded sum (Shewchuk's partials).
fn exact_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut k = 0;
        for i in 0..partials.len() {
            let mut y = partials[i];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[k] = lo;
                k += 1;
            }
            x = hi;
        }
        partials.truncate(k);
        partials.push(x);
    }
    let mut hi = 0.0;
    let mut lo = 0.0;
    while let Some(x) = partials.pop() {
        let prev = hi;
        hi = prev + x;
        lo = x - (hi - prev);
        if lo != 0.0 {
            break;
        }
    }
    if !partials.is_empty()
        && ((lo < 0.0 && partials[partials.len() - 1] < 0.0) || (lo > 0.0 && partials[partials.len() - 1] > 0.0))
    {
        let y = lo * 2.0;
        let x = hi + y;
        if y == x - hi {
            hi = x;
        }
    }
    hi
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinorizationReport {
    pub bound: f64,
    pub min_observed: f64,
    pub states: usize,
    pub violations: usize,
}

impl MinorizationReport {
    pub fn holds(&self) -> bool {
        self.violations == 0 && self.min_observed >= self.bound
    }

    pub fn merge(self, other: MinorizationReport) -> MinorizationReport {
        MinorizationReport {
            bound: self.bound.min(other.bound),
            min_observed: self.min_observed.min(other.min_observed),
            states: self.states + other.states,
            violations: self.violations + other.violations,
        }
    }
}

/// Smallest selection probability of a state. The normaliser is summed
/// exactly so the comparison with the bound is free of rounding drift.
pub fn min_selection_probability(weights: &[f64]) -> f64 {
    let total = exact_sum(weights.iter().copied());
    weights.iter().copied().fold(f64::INFINITY, f64::min) / total
}

/// Checks `min_j p_j ≥ min S / (N max S)` on every given weight vector.
pub fn minorization_check<'a>(
    states: impl IntoIterator<Item = &'a [f64]>,
    sel: &SelectionSpec,
    n: usize,
) -> Result<MinorizationReport> {
    let bound = minorization_bound(sel, n)?;
    let mut rep = MinorizationReport { bound, min_observed: f64::INFINITY, states: 0, violations: 0 };
    for w in states {
        if w.len() != n {
            return Err(Error::DimensionMismatch(format!("state has {} cells, expected {n}", w.len())));
        }
        let p = min_selection_probability(w);
        rep.min_observed = rep.min_observed.min(p);
        rep.states += 1;
        if p < bound {
            rep.violations += 1;
        }
    }
    Ok(rep)
}

/// Runs the chain and checks the bound on every visited state.
pub fn minorization_chain(params: &ProcessParams, cell: u64) -> Result<MinorizationReport> {
    let bound = minorization_bound(&params.selection, params.n)?;
    let mut rep = MinorizationReport { bound, min_observed: f64::INFINITY, states: 0, violations: 0 };
    let mut obs = |_: usize, state: &ChainState, _: &StepEvent| {
        let p = min_selection_probability(state.weights());
        rep.min_observed = rep.min_observed.min(p);
        rep.states += 1;
        if p < bound {
            rep.violations += 1;
        }
    };
    process::run_cell(params, cell, &mut [&mut obs])?;
    Ok(rep)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub grid_n: usize,
    /// Clustering index is recorded every this many steps.
    pub checkpoint_every: usize,
    /// `None` means `N / 2` in 1D and `N / 10` in 2D.
    pub collapse_threshold: Option<f64>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { grid_n: 10, checkpoint_every: 256, collapse_threshold: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRow {
    pub selection: SelectionSpec,
    /// Exponent of a volume power selection.
    pub alpha: Option<f64>,
    pub final_index: f64,
    pub mean_index: f64,
    pub thiel_r: f64,
    pub collapse_time: Option<usize>,
    pub trajectory: process::Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSweepReport {
    pub rows: Vec<PhaseRow>,
}

pub fn default_collapse_threshold(dim: usize, n: usize) -> f64 {
    if dim == 1 {
        n as f64 / 2.0
    } else {
        n as f64 / 10.0
    }
}

/// Sorts and deduplicates an `α` list; returns the list and whether
/// duplicates were dropped.
pub fn normalize_alphas(alphas: &[f64]) -> Result<(Vec<f64>, bool)> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter { key: "alphas", reason: "empty α list".into() });
    }
    if let Some(a) = alphas.iter().find(|a| !a.is_finite()) {
        return Err(Error::InvalidParameter { key: "alphas", reason: format!("non-finite α {a}") });
    }
    let mut out = alphas.to_vec();
    out.sort_by(f64::total_cmp);
    out.dedup();
    let dropped = out.len() != alphas.len();
    Ok((out, dropped))
}

/// One volume-power chain per `α`; rows come back in increasing `α`.
pub fn phase_sweep(alphas: &[f64], base: &ProcessParams, opts: &SweepOptions) -> Result<PhaseSweepReport> {
    let (alphas, _) = normalize_alphas(alphas)?;
    let sels: Vec<SelectionSpec> = alphas.into_iter().map(SelectionSpec::volume_power).collect();
    selection_sweep(&sels, base, opts)
}

/// One chain per selection, run concurrently with the row index as stream
/// cell; rows keep the order of `selections`.
pub fn selection_sweep(
    selections: &[SelectionSpec],
    base: &ProcessParams,
    opts: &SweepOptions,
) -> Result<PhaseSweepReport> {
    if selections.is_empty() {
        return Err(Error::InvalidParameter { key: "selections", reason: "empty selection list".into() });
    }
    base.validate()?;
    for s in selections {
        s.validate()?;
    }
    let every = opts.checkpoint_every.max(1);
    let threshold = opts.collapse_threshold.unwrap_or_else(|| default_collapse_threshold(base.space.dim(), base.n));
    let rows: Vec<Result<PhaseRow>> = crate::par_map(selections.len(), |k| {
        let mut p = base.clone();
        p.selection = selections[k].clone();
        let mut series = Vec::new();
        let mut obs = |step: usize, state: &ChainState, _: &StepEvent| {
            if step.is_multiple_of(every) || step == p.steps {
                series.push((step, clustering_index(&p.space, state.config().points(), opts.grid_n)));
            }
        };
        let trajectory = process::run_cell(&p, k as u64, &mut [&mut obs])?;
        let final_index = series.last().map_or(f64::NAN, |s| s.1);
        let mean_index = series.iter().map(|s| s.1).sum::<f64>() / series.len().max(1) as f64;
        let collapse_time = series.iter().find(|s| s.1 > threshold).map(|s| s.0);
        let last = trajectory.snapshots.last().expect("final snapshot");
        Ok(PhaseRow {
            selection: selections[k].clone(),
            alpha: selections[k].alpha(),
            final_index,
            mean_index,
            thiel_r: thiel_from_volumes(&last.volumes),
            collapse_time,
            trajectory,
        })
    });
    Ok(PhaseSweepReport { rows: rows.into_iter().collect::<Result<_>>()? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::Space;

    #[test]
    fn ks_basics() {
        assert_eq!(ks_two_sample(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]), 0.0);
        assert_eq!(ks_two_sample(&[0.0, 0.1], &[1.0, 2.0]), 1.0);
        assert!((ks_two_sample(&[1.0, 2.0, 3.0, 4.0], &[3.0, 4.0, 5.0, 6.0]) - 0.5).abs() < 1e-15);
        assert!((ks_two_sample(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exact_sum_is_correctly_rounded() {
        assert_eq!(exact_sum([0.1; 10]), 1.0);
        assert_eq!(exact_sum([1e100, 1.0, -1e100]), 1.0);
        assert_eq!(exact_sum(std::iter::repeat_n(0.7, 64)), 64.0 * 0.7);
    }

    #[test]
    fn constant_table_attains_the_bound() {
        let sel = SelectionSpec::NeighborTable { values: vec![0.3; 30] };
        let w = vec![0.3; 17];
        let rep = minorization_check([w.as_slice()], &sel, 17).unwrap();
        assert_eq!(rep.min_observed, rep.bound);
        assert!(rep.holds());
    }

    #[test]
    fn identical_chains_have_zero_distance() {
        let mut p = ProcessParams::new(Space::torus(1.0), 16, 2000, SelectionSpec::volume_power(0.5));
        p.seed = 9;
        let opts = ConvergenceOptions { streams: (3, 3), ..Default::default() };
        let rep = two_chain_convergence(&p, &InitKind::GridJittered, &InitKind::GridJittered, &opts).unwrap();
        assert!(!rep.ks_series.is_empty());
        assert!(rep.ks_series.iter().all(|s| s.1 == 0.0));
    }

    #[test]
    fn alpha_lists_are_normalised() {
        assert!(normalize_alphas(&[]).is_err());
        let (a, dup) = normalize_alphas(&[1.0, 0.5, 1.0]).unwrap();
        assert_eq!(a, vec![0.5, 1.0]);
        assert!(dup);
    }

    #[test]
    fn sweep_rows_follow_alpha_order() {
        let p = ProcessParams::new(Space::circle(1.0), 16, 200, SelectionSpec::volume_power(0.0));
        let rep = phase_sweep(&[0.5, -1.0], &p, &SweepOptions { checkpoint_every: 50, ..Default::default() }).unwrap();
        assert_eq!(rep.rows.iter().map(|r| r.alpha).collect::<Vec<_>>(), vec![Some(-1.0), Some(0.5)]);
        assert_eq!(
            rep,
            phase_sweep(&[0.5, -1.0], &p, &SweepOptions { checkpoint_every: 50, ..Default::default() }).unwrap()
        );
    }
}
