use std::sync::Arc;

use rand::Rng;
use vorproc::rng::{stream, StreamKind};
use vorproc::tessellation::compare_with_oracle;
use vorproc::{Configuration, DensityGrid, Space, Tessellation};

fn check_space(space: Space, configs: usize, resolution: usize) {
    let space = Arc::new(space);
    let mut rng = stream(11, StreamKind::Analysis, space.kind() as u64);
    let mut worst: f64 = 0.0;
    for c in 0..configs {
        let n = rng.gen_range(2..=12);
        let pts = (0..n).map(|_| space.sample_mu(&mut rng)).collect();
        let config = Configuration::new(space.clone(), pts).unwrap();
        let cmp = compare_with_oracle(&config, resolution).unwrap();
        worst = worst.max(cmp.max_volume_error);
        assert!(cmp.agrees(1e-2), "{} config {c}: {cmp:?}", space.kind().name());
    }
    println!("{}: worst volume error {worst:.2e}", space.kind().name());
}

#[test]
fn build_agrees_with_sampling_oracle() {
    for space in [Space::circle(1.0), Space::interval(1.0), Space::square(1.0), Space::torus(1.0)] {
        check_space(space, 25, 40_000);
    }
}

#[test]
fn oracle_agreement_with_a_density() {
    let grid = DensityGrid::from_rows(&[vec![2.0, 1.0, 0.5], vec![1.0, 1.0, 3.0]]).unwrap();
    check_space(Space::torus(2.0).with_density(grid.clone()).unwrap(), 10, 40_000);
    check_space(Space::square(2.0).with_density(grid).unwrap(), 10, 40_000);
    let row = DensityGrid::from_rows(&[vec![1.0, 4.0, 0.25]]).unwrap();
    check_space(Space::circle(3.0).with_density(row).unwrap(), 10, 40_000);
}

#[test]
fn partition_and_euler_invariants() {
    let space = Arc::new(Space::torus(1.0));
    let mut rng = stream(4, StreamKind::Analysis, 0);
    let pts = (0..200).map(|_| space.sample_mu(&mut rng)).collect();
    let mut config = Configuration::new(space.clone(), pts).unwrap();
    let mut tess = Tessellation::build(&config).unwrap();
    for _ in 0..2000 {
        let j = rng.gen_range(0..200);
        let p = space.sample_mu(&mut rng);
        tess.replace_point(&mut config, j, p).unwrap();
        let total: f64 = tess.volumes().iter().sum();
        assert!((total - 1.0).abs() <= 1e-9);
        let mean_degree = tess.degrees().iter().sum::<usize>() as f64 / 200.0;
        assert!((mean_degree - 6.0).abs() <= 1e-9);
    }
}
