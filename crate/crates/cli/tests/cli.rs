use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vorproc_cli::output::Pgm;

fn vorproc(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vorproc")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

const CIRCLE: &str = r#"
schema_version = 1
[space]
kind = "circle"
[process]
n = 32
steps = 4096
selection = { kind = "volume_power", alpha = 1.5 }
[output]
dir = "run"
"#;

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

fn files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn zero_steps_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", &CIRCLE.replace("steps = 4096", "steps = 0"));
    let o = vorproc(&["simulate", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(!o.status.success());
    assert!(text(&o).contains("process.steps"), "{}", text(&o));
    assert!(!tmp.path().join("run").exists());
}

#[test]
fn unknown_keys_are_rejected_by_name() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", &CIRCLE.replace("n = 32", "n = 32\nalhpa = 2"));
    let o = vorproc(&["simulate", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(!o.status.success());
    assert!(text(&o).contains("alhpa"), "{}", text(&o));
}

#[test]
fn missing_seed_defaults_to_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", CIRCLE);
    let a = vorproc(&["simulate", "--config", cfg.to_str().unwrap(), "--out-dir", "a"], tmp.path());
    assert!(a.status.success(), "{}", text(&a));
    assert!(text(&a).contains("seed=0 (default)"));
    let b = vorproc(&["simulate", "--config", cfg.to_str().unwrap(), "--out-dir", "b", "--seed", "0"], tmp.path());
    assert!(b.status.success());
    let read = |d: &str| fs::read(tmp.path().join(d).join("trajectory.ndjson")).unwrap();
    assert_eq!(read("a"), read("b"));
    let c = vorproc(&["simulate", "--config", cfg.to_str().unwrap(), "--out-dir", "c", "--seed", "1"], tmp.path());
    assert!(c.status.success());
    assert_ne!(read("a"), read("c"));
}

#[test]
fn simulate_is_byte_reproducible() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let body = CIRCLE.replace("n = 32", "n = 32\nsnapshot_every = 1000");
    for tmp in [&a, &b] {
        let cfg = write_config(tmp.path(), "c.toml", &body);
        let o = vorproc(&["simulate", "--config", cfg.to_str().unwrap()], tmp.path());
        assert!(o.status.success());
    }
    let (x, y) = (files(&a.path().join("run")), files(&b.path().join("run")));
    assert!(x.len() >= 10);
    assert_eq!(x.iter().map(|f| &f.0).collect::<Vec<_>>(), y.iter().map(|f| &f.0).collect::<Vec<_>>());
    for (fx, fy) in x.iter().zip(&y) {
        assert!(fx.1 == fy.1, "{} differs", fx.0.display());
    }
}

#[test]
fn spacetime_raster_has_one_row_per_step() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", CIRCLE);
    assert!(vorproc(&["simulate", "--config", cfg.to_str().unwrap()], tmp.path()).status.success());
    let img = Pgm::parse(&fs::read(tmp.path().join("run/spacetime.pgm")).unwrap()).unwrap();
    assert_eq!((img.width, img.height), (256, 4096));
    let o = vorproc(
        &["render", "--trajectory", "run/trajectory.ndjson", "--kind", "spacetime", "--bins", "64", "--out", "st.pgm"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", text(&o));
    let img = Pgm::parse(&fs::read(tmp.path().join("st.pgm")).unwrap()).unwrap();
    assert_eq!((img.width, img.height), (64, 4096));
    // Every row shows at least one and at most N occupied bins.
    for y in 0..img.height {
        let dark = (0..img.width).filter(|&x| img.get(x, y) == 0).count();
        assert!((1..=32).contains(&dark));
    }
}

#[test]
fn spacetime_of_a_planar_run_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", &CIRCLE.replace("\"circle\"", "\"square\"").replace("4096", "50"));
    assert!(vorproc(&["simulate", "--config", cfg.to_str().unwrap()], tmp.path()).status.success());
    assert!(!tmp.path().join("run/spacetime.pgm").exists());
    let o = vorproc(&["render", "--trajectory", "run/trajectory.ndjson"], tmp.path());
    assert!(!o.status.success());
    assert!(text(&o).contains("one-dimensional"));
    let o =
        vorproc(&["render", "--trajectory", "run/trajectory.ndjson", "--kind", "snapshot", "--bins", "32"], tmp.path());
    assert!(o.status.success());
    let img = Pgm::parse(&fs::read(tmp.path().join("run/snapshot.pgm")).unwrap()).unwrap();
    assert_eq!((img.width, img.height), (32, 32));
}

#[test]
fn stats_from_a_trajectory_match_simulate() {
    let tmp = tempfile::tempdir().unwrap();
    let body = CIRCLE.replace("alpha = 1.5", "alpha = 0.5").replace("4096", "10000")
        + "[statistics]\nregions = [{ shape = \"arc\", lo = 0.0, hi = 0.25 }]\nmin_bin_count = 20\n";
    let cfg = write_config(tmp.path(), "c.toml", &body);
    assert!(vorproc(&["simulate", "--config", cfg.to_str().unwrap()], tmp.path()).status.success());
    let o = vorproc(
        &["stats", "--trajectory", "run/trajectory.ndjson", "--config", cfg.to_str().unwrap(), "--out-dir", "again"],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", text(&o));
    for f in ["summary.csv", "j_function.csv", "volume_histogram.csv", "drift_bins.csv", "drift_fit.csv"] {
        assert_eq!(
            fs::read(tmp.path().join("run").join(f)).unwrap(),
            fs::read(tmp.path().join("again").join(f)).unwrap(),
            "{f}"
        );
    }
    let fit = fs::read_to_string(tmp.path().join("run/drift_fit.csv")).unwrap();
    assert!(fit.starts_with("region,alpha,mu_a,fitted_k"));
}

#[test]
fn sweep_validates_and_deduplicates_alphas() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", &CIRCLE.replace("4096", "300"));
    let o = vorproc(&["sweep", "--config", cfg.to_str().unwrap()], tmp.path());
    assert!(!o.status.success());
    assert!(text(&o).contains("empty α list"), "{}", text(&o));
    let o = vorproc(&["sweep", "--config", cfg.to_str().unwrap(), "--alphas=1.0,-1,1.0"], tmp.path());
    assert!(o.status.success(), "{}", text(&o));
    assert!(text(&o).contains("duplicate"));
    let table = fs::read_to_string(tmp.path().join("run/sweep.csv")).unwrap();
    let alphas: Vec<&str> = table.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(alphas, vec!["-1", "1"]);
    for k in 0..2 {
        assert!(tmp.path().join(format!("run/cell_{k:02}/final_snapshot.csv")).exists());
        assert!(tmp.path().join(format!("run/cell_{k:02}/spacetime.pgm")).exists());
    }
}

#[test]
fn overrides_reach_nested_keys() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.toml", CIRCLE);
    let o = vorproc(
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--override",
            "process.steps=10",
            "--override",
            "space.kind=torus",
        ],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", text(&o));
    assert!(text(&o).contains("torus N=32 T=10"), "{}", text(&o));
}
