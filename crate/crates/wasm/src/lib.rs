//! Browser bindings: a space-time raster of the circle v-process and a
//! steppable planar chain with its Voronoi cells.

use std::sync::Arc;

use vorproc::process::{self, initial_configuration};
use vorproc::rng::{stream, RandomStream, StreamKind};
use vorproc::statistics::{clustering_index, thiel_redundancy};
use vorproc::{ChainState, Mode, ProcessParams, SelectionSpec, Space};
use wasm_bindgen::prelude::*;

/// Upper bound on steps per call so a slider drag cannot hang the page.
pub const MAX_STEPS: usize = 1 << 16;

fn err(e: vorproc::Error) -> String {
    e.to_string()
}

/// Runs the v-process `S(v) = v^alpha` on the unit circle and returns an
/// RGBA image `bins` wide with one row per step, time increasing downward.
/// Occupied bins are dark.
#[wasm_bindgen]
pub fn spacetime_raster(alpha: f64, n: usize, steps: usize, bins: usize, seed: u32) -> Result<Vec<u8>, String> {
    if bins == 0 || steps == 0 || steps > MAX_STEPS {
        return Err(format!("need 0 < bins and 0 < steps ≤ {MAX_STEPS}"));
    }
    let mut params = ProcessParams::new(Space::circle(1.0), n, steps, SelectionSpec::volume_power(alpha));
    params.seed = seed.into();
    let traj = process::run(&params, &mut []).map_err(err)?;
    let mut rgba = vec![255u8; bins * steps * 4];
    for (row, points) in traj.replay().skip(1).enumerate() {
        for p in points {
            let x = ((p.x * bins as f64) as usize).min(bins - 1);
            let px = (row * bins + x) * 4;
            rgba[px..px + 3].copy_from_slice(&[20, 20, 40]);
        }
    }
    Ok(rgba)
}

/// A replacement chain on the unit square or torus that the page advances
/// in small batches.
#[wasm_bindgen]
pub struct PlanarChain {
    state: ChainState,
    rng: RandomStream,
    step: usize,
}

#[wasm_bindgen]
impl PlanarChain {
    /// `selection` is `"volume"` for `S(v) = v^param` or `"neighbor"` for
    /// `S(d) = 0.1 + (d - param)^2`.
    #[wasm_bindgen(constructor)]
    pub fn new(torus: bool, n: usize, selection: &str, param: f64, seed: u32) -> Result<PlanarChain, String> {
        let space = if torus { Space::torus(1.0) } else { Space::square(1.0) };
        let sel = match selection {
            "volume" => SelectionSpec::volume_power(param),
            "neighbor" => SelectionSpec::neighbor_formula(n.max(2) - 1, 0.1, 1.0, param, 2.0, &[]),
            other => return Err(format!("unknown selection {other:?}")),
        };
        let mut params = ProcessParams::new(space.clone(), n, 1, sel.clone());
        params.seed = seed.into();
        let mut init = stream(params.seed, StreamKind::Init, 0);
        let config = initial_configuration(&params, Arc::new(space), &mut init).map_err(err)?;
        let state = ChainState::new(config, sel).map_err(err)?;
        Ok(PlanarChain { state, rng: stream(params.seed, StreamKind::Chain, 0), step: 0 })
    }

    /// Performs `k` replacement steps.
    pub fn advance(&mut self, k: usize) -> Result<(), String> {
        for _ in 0..k.min(MAX_STEPS) {
            self.step += 1;
            self.state.step(self.step, Mode::Replacement, &mut self.rng).map_err(err)?;
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        self.step
    }

    pub fn len(&self) -> usize {
        self.state.len()
    }

    pub fn is_empty(&self) -> bool {
        self.state.is_empty()
    }

    pub fn is_torus(&self) -> bool {
        self.state.config().space().kind().is_periodic()
    }

    /// Generator coordinates as `[x0, y0, x1, y1, ...]`.
    pub fn points(&self) -> Vec<f64> {
        self.state.config().points().iter().flat_map(|p| [p.x, p.y]).collect()
    }

    /// Cell `i` as `[x0, y0, x1, y1, ...]`; on the torus the ring may leave
    /// the unit square and should be drawn with its periodic copies.
    pub fn cell_polygon(&self, i: usize) -> Vec<f64> {
        if i >= self.len() {
            return Vec::new();
        }
        self.state.tessellation().cell_polygon(i).into_iter().flatten().collect()
    }

    /// Current selection probability of every cell.
    pub fn probabilities(&self) -> Vec<f64> {
        self.state.probabilities()
    }

    /// Quadrat variance-to-mean ratio on a 10 by 10 grid.
    pub fn clustering_index(&self) -> f64 {
        let config = self.state.config();
        clustering_index(config.space(), config.points(), 10)
    }

    pub fn thiel_redundancy(&self) -> f64 {
        thiel_redundancy(self.state.tessellation())
    }
}
