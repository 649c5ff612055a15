//! The Markov chain: selection of one coordinate by the selection rule,
//! followed by removal (thinning) or replacement by a fresh draw from `μ`.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, RandomStream, StreamKind};
use crate::selection::{sample_index, SelectionSpec};
use crate::space::{Point, Space};
use crate::tessellation::{Configuration, Tessellation};

/// Relative jitter applied to grid initialisations (times the side length).
pub const GRID_JITTER: f64 = 1e-9;
/// Attempts at drawing a fresh point that does not coincide with a generator.
pub const MAX_RESAMPLE: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Replacement,
    Thinning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitKind {
    /// `N` independent draws from `μ`.
    IidMu,
    /// Regular grid (row-major, `⌈√N⌉` columns in 2D) with tiny jitter.
    GridJittered,
    /// Uniform in a ball of `radius` around `center`.
    SingleCluster { center: Vec<f64>, radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessParams {
    pub space: Space,
    pub n: usize,
    pub steps: usize,
    pub mode: Mode,
    pub selection: SelectionSpec,
    pub init: InitKind,
    pub seed: u64,
    pub snapshot_every: usize,
}

impl ProcessParams {
    pub fn new(space: Space, n: usize, steps: usize, selection: SelectionSpec) -> Self {
        ProcessParams {
            space,
            n,
            steps,
            mode: Mode::Replacement,
            selection,
            init: InitKind::IidMu,
            seed: 0,
            snapshot_every: steps.max(1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter {
                key: "n",
                reason: format!("need at least 2 points, got {}", self.n),
            });
        }
        if self.steps < 1 {
            return Err(Error::InvalidParameter { key: "steps", reason: "need at least one step".into() });
        }
        if self.snapshot_every < 1 {
            return Err(Error::InvalidParameter { key: "snapshot_every", reason: "must be at least 1".into() });
        }
        if let InitKind::SingleCluster { center, radius } = &self.init {
            if center.len() != self.space.dim() {
                return Err(Error::InvalidParameter {
                    key: "init.center",
                    reason: format!("expected {} coordinates", self.space.dim()),
                });
            }
            if !(radius.is_finite() && *radius > 0.0) {
                return Err(Error::InvalidParameter { key: "init.radius", reason: "must be positive".into() });
            }
        }
        self.selection.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepEvent {
    pub step: usize,
    pub chosen: usize,
    pub removed: Point,
    pub inserted: Option<Point>,
}

/// Periodic record of the full pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: usize,
    pub points: Vec<Point>,
    pub volumes: Vec<f64>,
    pub neighbors: Vec<Vec<usize>>,
}

impl Snapshot {
    pub fn capture(step: usize, state: &ChainState) -> Self {
        Snapshot {
            step,
            points: state.config.points().to_vec(),
            volumes: state.tess.volumes().to_vec(),
            neighbors: (0..state.tess.len()).map(|i| state.tess.neighbors(i).to_vec()).collect(),
        }
    }

    /// Same table as [`Tessellation::write_snapshot`].
    pub fn write_table<W: std::io::Write>(&self, dim: usize, w: W) -> std::io::Result<()> {
        crate::tessellation::write_cell_table(dim, &self.points, &self.volumes, &self.neighbors, w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: ProcessParams,
    pub initial: Vec<Point>,
    pub events: Vec<StepEvent>,
    pub snapshots: Vec<Snapshot>,
}

impl Trajectory {
    /// Configurations after each step, starting with the initial one.
    pub fn replay(&self) -> Replay<'_> {
        Replay { points: self.initial.clone(), events: self.events.iter(), started: false }
    }

    pub fn final_points(&self) -> Vec<Point> {
        self.replay().last().unwrap_or_else(|| self.initial.clone())
    }
}

pub struct Replay<'a> {
    points: Vec<Point>,
    events: std::slice::Iter<'a, StepEvent>,
    started: bool,
}

impl Iterator for Replay<'_> {
    type Item = Vec<Point>;

    fn next(&mut self) -> Option<Vec<Point>> {
        if !self.started {
            self.started = true;
            return Some(self.points.clone());
        }
        let ev = self.events.next()?;
        apply_event(&mut self.points, ev);
        Some(self.points.clone())
    }
}

/// Applies one recorded step to a point list.
pub fn apply_event(points: &mut Vec<Point>, ev: &StepEvent) {
    match ev.inserted {
        Some(p) => points[ev.chosen] = p,
        None => {
            points.remove(ev.chosen);
        }
    }
}

/// Configuration, its tessellation and the cached selection weights.
#[derive(Debug, Clone)]
pub struct ChainState {
    config: Configuration,
    tess: Tessellation,
    selection: SelectionSpec,
    weights: Vec<f64>,
}

impl ChainState {
    pub fn new(config: Configuration, selection: SelectionSpec) -> Result<Self> {
        selection.validate()?;
        let tess = Tessellation::build(&config)?;
        let weights = selection.weights(&tess)?;
        Ok(ChainState { config, tess, selection, weights })
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn tessellation(&self) -> &Tessellation {
        &self.tess
    }

    pub fn selection(&self) -> &SelectionSpec {
        &self.selection
    }

    /// Unnormalised selection weights `S(C_i)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        self.weights.iter().map(|w| w / total).collect()
    }

    pub fn len(&self) -> usize {
        self.config.len()
    }

    pub fn is_empty(&self) -> bool {
        self.config.is_empty()
    }

    /// Moves generator `j` to `p` and refreshes the affected weights.
    pub fn replace(&mut self, j: usize, p: Point) -> Result<()> {
        let stats = self.tess.replace_point(&mut self.config, j, p)?;
        if stats.incremental {
            for &i in &stats.affected {
                self.weights[i] = self.selection.weight(self.tess.volume(i), self.tess.degree(i))?;
            }
        } else {
            self.weights = self.selection.weights(&self.tess)?;
        }
        Ok(())
    }

    /// One transition of the chain.
    pub fn step<R: Rng + ?Sized>(&mut self, step: usize, mode: Mode, rng: &mut R) -> Result<StepEvent> {
        let total: f64 = self.weights.iter().sum();
        let j = sample_index(&self.weights, total, rng);
        let removed = self.config.point(j);
        match mode {
            Mode::Replacement => {
                let space = self.config.space().clone();
                for _ in 0..MAX_RESAMPLE {
                    let z = space.sample_mu(rng);
                    match self.replace(j, z) {
                        Ok(()) => return Ok(StepEvent { step, chosen: j, removed, inserted: Some(z) }),
                        Err(Error::DuplicatePoints { .. }) => continue,
                        Err(e) => return Err(e),
                    }
                }
                Err(Error::ResampleExhausted(MAX_RESAMPLE))
            }
            Mode::Thinning => {
                if self.config.len() < 2 {
                    return Err(Error::InvalidParameter { key: "points", reason: "thinning needs two points".into() });
                }
                self.tess.remove_point(&mut self.config, j)?;
                self.weights = self.selection.weights(&self.tess)?;
                Ok(StepEvent { step, chosen: j, removed, inserted: None })
            }
        }
    }
}

/// Per-step callback for statistics collected while a chain runs.
pub trait Observer {
    fn on_step(&mut self, step: usize, state: &ChainState, event: &StepEvent);
}

impl<F: FnMut(usize, &ChainState, &StepEvent)> Observer for F {
    fn on_step(&mut self, step: usize, state: &ChainState, event: &StepEvent) {
        self(step, state, event)
    }
}

fn draw_distinct<R: Rng + ?Sized>(
    space: &Space,
    n: usize,
    rng: &mut R,
    mut propose: impl FnMut(&mut R) -> Option<Point>,
) -> Vec<Point> {
    let mut seen = std::collections::HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if let Some(p) = propose(rng) {
            if space.contains(p) && seen.insert(p.bits()) {
                out.push(p);
            }
        }
    }
    out
}

/// Initial configuration drawn from the initialisation stream.
pub fn initial_configuration<R: Rng + ?Sized>(
    params: &ProcessParams,
    space: Arc<Space>,
    rng: &mut R,
) -> Result<Configuration> {
    params.validate()?;
    let n = params.n;
    let l = space.size();
    let points = match &params.init {
        InitKind::IidMu => draw_distinct(&space, n, rng, |r| Some(space.sample_mu(r))),
        InitKind::GridJittered => {
            let jitter = |r: &mut R| (r.gen::<f64>() * 2.0 - 1.0) * GRID_JITTER * l;
            let mut pts = Vec::with_capacity(n);
            if space.dim() == 1 {
                for i in 0..n {
                    pts.push(space.canonicalize(Point::on_line((i as f64 + 0.5) * l / n as f64 + jitter(rng))));
                }
            } else {
                let cols = (n as f64).sqrt().ceil() as usize;
                let rows = n.div_ceil(cols);
                for i in 0..n {
                    let (r, c) = (i / cols, i % cols);
                    let x = (c as f64 + 0.5) * l / cols as f64 + jitter(rng);
                    let y = (r as f64 + 0.5) * l / rows as f64 + jitter(rng);
                    pts.push(space.canonicalize(Point::new(x, y)));
                }
            }
            pts
        }
        InitKind::SingleCluster { center, radius } => {
            let periodic = space.kind().is_periodic();
            let sp = space.clone();
            draw_distinct(&space, n, rng, move |r| {
                let p = if sp.dim() == 1 {
                    Point::on_line(center[0] + (r.gen::<f64>() * 2.0 - 1.0) * radius)
                } else {
                    let (dx, dy) = loop {
                        let dx = r.gen::<f64>() * 2.0 - 1.0;
                        let dy = r.gen::<f64>() * 2.0 - 1.0;
                        if dx * dx + dy * dy <= 1.0 {
                            break (dx, dy);
                        }
                    };
                    Point::new(center[0] + dx * radius, center[1] + dy * radius)
                };
                if periodic {
                    Some(sp.canonicalize(p))
                } else {
                    sp.contains(p).then_some(p)
                }
            })
        }
    };
    Configuration::new(space, points)
}

/// Runs the chain described by `params` on stream cell 0.
pub fn run(params: &ProcessParams, observers: &mut [&mut dyn Observer]) -> Result<Trajectory> {
    run_cell(params, 0, observers)
}

/// Runs the chain on the initialisation/chain streams of sweep cell `cell`.
pub fn run_cell(params: &ProcessParams, cell: u64, observers: &mut [&mut dyn Observer]) -> Result<Trajectory> {
    params.validate()?;
    let space = Arc::new(params.space.clone());
    let mut init_rng = stream(params.seed, StreamKind::Init, cell);
    let config = initial_configuration(params, space, &mut init_rng)?;
    let mut rng = stream(params.seed, StreamKind::Chain, cell);
    run_from(params, config, &mut rng, observers)
}

/// Runs the chain from a given configuration with a caller-owned stream.
pub fn run_from(
    params: &ProcessParams,
    config: Configuration,
    rng: &mut RandomStream,
    observers: &mut [&mut dyn Observer],
) -> Result<Trajectory> {
    params.validate()?;
    let initial = config.points().to_vec();
    let mut state = ChainState::new(config, params.selection.clone())?;
    let mut events = Vec::with_capacity(params.steps);
    let mut snapshots = vec![Snapshot::capture(0, &state)];
    for s in 1..=params.steps {
        if params.mode == Mode::Thinning && state.len() < 2 {
            break;
        }
        let ev = state.step(s, params.mode, rng)?;
        for obs in observers.iter_mut() {
            obs.on_step(s, &state, &ev);
        }
        events.push(ev);
        if s % params.snapshot_every == 0 {
            snapshots.push(Snapshot::capture(s, &state));
        }
    }
    let last = events.len();
    if snapshots.last().map(|s| s.step) != Some(last) {
        snapshots.push(Snapshot::capture(last, &state));
    }
    Ok(Trajectory { params: params.clone(), initial, events, snapshots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::selection_probabilities;

    #[test]
    fn replacement_changes_exactly_one_coordinate() {
        let space = Arc::new(Space::circle(1.0));
        let config = Configuration::new(space, vec![Point::on_line(0.2), Point::on_line(0.7)]).unwrap();
        let mut state = ChainState::new(config, SelectionSpec::volume_power(1.0)).unwrap();
        let mut rng = stream(3, StreamKind::Chain, 0);
        for s in 1..50 {
            let before = state.config().points().to_vec();
            let ev = state.step(s, Mode::Replacement, &mut rng).unwrap();
            let after = state.config().points();
            let changed: Vec<usize> = (0..2).filter(|&i| before[i] != after[i]).collect();
            assert_eq!(changed, vec![ev.chosen]);
            assert_eq!(ev.removed, before[ev.chosen]);
        }
    }

    #[test]
    fn thinning_from_two_leaves_an_original() {
        let space = Arc::new(Space::square(1.0));
        let pts = vec![Point::new(0.2, 0.3), Point::new(0.7, 0.6)];
        let config = Configuration::new(space, pts.clone()).unwrap();
        let mut state = ChainState::new(config, SelectionSpec::volume_power(0.5)).unwrap();
        let mut rng = stream(1, StreamKind::Chain, 0);
        state.step(1, Mode::Thinning, &mut rng).unwrap();
        assert_eq!(state.len(), 1);
        assert!(pts.contains(&state.config().point(0)));
    }

    #[test]
    fn thinning_run_stops_at_one_point() {
        let mut p = ProcessParams::new(Space::torus(1.0), 5, 100, SelectionSpec::volume_power(1.0));
        p.mode = Mode::Thinning;
        let t = run(&p, &mut []).unwrap();
        assert_eq!(t.events.len(), 4);
        assert!(t.events.iter().all(|e| e.inserted.is_none()));
        assert_eq!(t.final_points().len(), 1);
    }

    #[test]
    fn runs_are_reproducible() {
        let mut p = ProcessParams::new(Space::square(1.0), 30, 300, SelectionSpec::volume_power(-1.0));
        p.seed = 42;
        p.snapshot_every = 100;
        let a = run(&p, &mut []).unwrap();
        let b = run(&p, &mut []).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.snapshots.iter().map(|s| s.step).collect::<Vec<_>>(), vec![0, 100, 200, 300]);
    }

    #[test]
    fn cached_weights_track_the_tessellation() {
        let mut p =
            ProcessParams::new(Space::torus(1.0), 40, 1, SelectionSpec::neighbor_formula(39, 1.0, 1.0, 6.0, 1.0, &[]));
        p.init = InitKind::GridJittered;
        let space = Arc::new(p.space.clone());
        let config = initial_configuration(&p, space, &mut stream(0, StreamKind::Init, 0)).unwrap();
        let mut state = ChainState::new(config, p.selection.clone()).unwrap();
        let mut rng = stream(0, StreamKind::Chain, 0);
        for s in 1..500 {
            state.step(s, Mode::Replacement, &mut rng).unwrap();
            let fresh = selection_probabilities(state.tessellation(), &p.selection).unwrap();
            let cached = state.probabilities();
            for (a, b) in fresh.iter().zip(&cached) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn invalid_params_are_rejected() {
        let p = ProcessParams::new(Space::circle(1.0), 1, 10, SelectionSpec::volume_power(1.0));
        assert!(matches!(p.validate(), Err(Error::InvalidParameter { key: "n", .. })));
        let p = ProcessParams::new(Space::circle(1.0), 4, 0, SelectionSpec::volume_power(1.0));
        assert!(matches!(p.validate(), Err(Error::InvalidParameter { key: "steps", .. })));
    }

    #[test]
    fn cluster_init_stays_in_the_ball() {
        let mut p = ProcessParams::new(Space::square(1.0), 50, 1, SelectionSpec::volume_power(1.0));
        p.init = InitKind::SingleCluster { center: vec![0.5, 0.5], radius: 0.05 };
        let c = initial_configuration(&p, Arc::new(p.space.clone()), &mut stream(0, StreamKind::Init, 0)).unwrap();
        assert!(c.points().iter().all(|q| (q.x - 0.5).hypot(q.y - 0.5) <= 0.05 + 1e-12));
    }
}
