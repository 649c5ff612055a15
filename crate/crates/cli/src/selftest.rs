//! Reduced-scale oracle, invariant and minorization suites.

use std::panic::{self, AssertUnwindSafe};
use std::sync::Arc;

use vorproc::diagnostics::minorization_chain;
use vorproc::rng::{stream, StreamKind};
use vorproc::selection::{sample_index, selection_probabilities};
use vorproc::tessellation::compare_with_oracle;
use vorproc::{process, Configuration, InitKind, Point, ProcessParams, SelectionSpec, Space, Tessellation};

type Suite = fn() -> Result<String, String>;

pub const SUITES: &[(&str, Suite)] = &[
    ("oracle-equivalence", oracle_equivalence),
    ("incremental-vs-rebuild", incremental_vs_rebuild),
    ("partition-and-euler", partition_and_euler),
    ("selection-rule", selection_rule),
    ("minorization", minorization),
    ("determinism", determinism),
];

fn spaces() -> [Space; 4] {
    [Space::circle(1.0), Space::interval(1.0), Space::square(1.0), Space::torus(1.0)]
}

fn random_config(space: &Arc<Space>, n: usize, cell: u64) -> Result<Configuration, String> {
    let mut rng = stream(0x5e1f, StreamKind::Analysis, cell);
    Configuration::new(space.clone(), (0..n).map(|_| space.sample_mu(&mut rng)).collect()).map_err(|e| e.to_string())
}

fn oracle_equivalence() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    for space in spaces() {
        let space = Arc::new(space);
        for c in 0..10u64 {
            let config = random_config(&space, 2 + (c as usize % 11), c)?;
            let cmp = compare_with_oracle(&config, 40_000).map_err(|e| e.to_string())?;
            if !cmp.agrees(1e-2) {
                return Err(format!("{} config {c}: {cmp:?}", space.kind().name()));
            }
            worst = worst.max(cmp.max_volume_error);
        }
    }
    Ok(format!("40 configurations, worst volume error {worst:.1e}"))
}

fn incremental_vs_rebuild() -> Result<String, String> {
    for space in spaces() {
        let space = Arc::new(space);
        let mut config = random_config(&space, 100, 1)?;
        let mut tess = Tessellation::build(&config).map_err(|e| e.to_string())?;
        let mut rng = stream(0x5e1f, StreamKind::Analysis, 99);
        for u in 0..200 {
            let j = sample_index(&[1.0; 100], 100.0, &mut rng);
            let p = space.sample_mu(&mut rng);
            tess.replace_point(&mut config, j, p).map_err(|e| e.to_string())?;
            if u % 10 == 9 {
                let fresh = Tessellation::build(&config).map_err(|e| e.to_string())?;
                for i in 0..100 {
                    if (tess.volume(i) - fresh.volume(i)).abs() > 1e-9 || tess.neighbors(i) != fresh.neighbors(i) {
                        return Err(format!("{} update {u}: cell {i} differs from rebuild", space.kind().name()));
                    }
                }
            }
        }
        tess.validate()?;
    }
    Ok("800 updates".into())
}

fn partition_and_euler() -> Result<String, String> {
    let mut p = ProcessParams::new(Space::torus(1.0), 200, 1000, SelectionSpec::volume_power(0.5));
    p.seed = 0x5e1f;
    let mut failure = None;
    let mut check = |step: usize, state: &process::ChainState, _: &vorproc::StepEvent| {
        let t = state.tessellation();
        let total: f64 = t.volumes().iter().sum();
        let mean_degree = t.degrees().iter().sum::<usize>() as f64 / t.len() as f64;
        if failure.is_none() && ((total - 1.0).abs() > 1e-9 || (mean_degree - 6.0).abs() > 1e-9) {
            failure = Some(format!("step {step}: total {total}, mean degree {mean_degree}"));
        }
    };
    process::run(&p, &mut [&mut check]).map_err(|e| e.to_string())?;
    failure.map_or(Ok("1000 steps".into()), Err)
}

fn selection_rule() -> Result<String, String> {
    let space = Arc::new(Space::circle(1.0));
    let config = Configuration::new(space, [0.0, 0.1, 0.5].map(Point::on_line).to_vec()).map_err(|e| e.to_string())?;
    let tess = Tessellation::build(&config).map_err(|e| e.to_string())?;
    let p = selection_probabilities(&tess, &SelectionSpec::volume_power(1.0)).map_err(|e| e.to_string())?;
    for (a, b) in p.iter().zip([0.30, 0.25, 0.45]) {
        if (a - b).abs() > 1e-12 {
            return Err(format!("probabilities {p:?}"));
        }
    }
    let q = selection_probabilities(&tess, &SelectionSpec::volume_power(-1.0)).map_err(|e| e.to_string())?;
    if (q.iter().sum::<f64>() - 1.0).abs() > 1e-12 || (q[1] - 18.0 / 43.0).abs() > 1e-12 {
        return Err(format!("α = -1 probabilities {q:?}"));
    }
    Ok("circle example exact".into())
}

fn minorization() -> Result<String, String> {
    let mut states = 0;
    for (k, n) in [3usize, 10, 30].into_iter().enumerate() {
        let sel = SelectionSpec::neighbor_formula(n - 1, 1.0, 1.0, 6.0, 1.0, &[]);
        let mut p = ProcessParams::new(Space::torus(1.0), n, 500, sel);
        p.seed = 0x5e1f;
        let rep = minorization_chain(&p, k as u64).map_err(|e| e.to_string())?;
        if !rep.holds() {
            return Err(format!("N = {n}: {rep:?}"));
        }
        states += rep.states;
    }
    Ok(format!("{states} states"))
}

fn determinism() -> Result<String, String> {
    let mut p = ProcessParams::new(Space::square(1.0), 50, 500, SelectionSpec::volume_power(1.2));
    p.init = InitKind::GridJittered;
    p.seed = 0x5e1f;
    p.snapshot_every = 100;
    let a = process::run(&p, &mut []).map_err(|e| e.to_string())?;
    let b = process::run(&p, &mut []).map_err(|e| e.to_string())?;
    if a != b {
        return Err("reruns differ".into());
    }
    Ok("identical reruns".into())
}

/// Runs every suite, printing one PASS/FAIL line each; true when all pass.
pub fn run_all(out: &mut dyn std::io::Write) -> bool {
    let hook = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let mut ok = true;
    for (name, suite) in SUITES {
        let result = match panic::catch_unwind(AssertUnwindSafe(suite)) {
            Ok(r) => r,
            Err(payload) => Err(payload
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                .map_or("panicked".into(), |m| format!("panicked: {m}"))),
        };
        let _ = match &result {
            Ok(detail) => writeln!(out, "PASS {name}: {detail}"),
            Err(why) => writeln!(out, "FAIL {name}: {why}"),
        };
        ok &= result.is_ok();
    }
    panic::set_hook(hook);
    ok
}
