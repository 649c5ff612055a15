use std::sync::Arc;

use vorproc::rng::{stream, StreamKind};
use vorproc::selection::{sample_index, selection_probabilities};
use vorproc::statistics::{
    count_in_region, estimate_drift, j_function, nearest_neighbor_distances, quadrat_variance, selection_mass,
    TestRegion,
};
use vorproc::{process, Configuration, ProcessParams, SelectionSpec, Space, Tessellation};

fn iid(space: &Arc<Space>, n: usize, seed: u64, cell: u64) -> Configuration {
    let mut rng = stream(seed, StreamKind::Analysis, cell);
    Configuration::new(space.clone(), (0..n).map(|_| space.sample_mu(&mut rng)).collect()).unwrap()
}

#[test]
fn removal_frequency_from_a_region_matches_selection_mass() {
    let space = Arc::new(Space::square(1.0));
    let config = iid(&space, 300, 1, 0);
    let tess = Tessellation::build(&config).unwrap();
    let region = TestRegion::rect(&space, 0.2, 0.2, 0.45, 0.4).unwrap();
    for sel in [SelectionSpec::volume_power(1.5), SelectionSpec::volume_power(-1.0)] {
        let w = sel.weights(&tess).unwrap();
        let total: f64 = w.iter().sum();
        let p = selection_mass(&config, &tess, &sel, Some(&region)).unwrap()
            / selection_mass(&config, &tess, &sel, None).unwrap();
        let trials = 100_000;
        let mut rng = stream(2, StreamKind::Analysis, 0);
        let hits = (0..trials).filter(|_| region.contains(config.point(sample_index(&w, total, &mut rng)))).count();
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        let freq = hits as f64 / trials as f64;
        assert!((freq - p).abs() <= 3.0 * sigma, "{freq} vs {p} ± {sigma}");
    }
}

#[test]
fn selection_frequencies_pass_chi_square() {
    let space = Arc::new(Space::circle(1.0));
    let config = iid(&space, 20, 3, 0);
    let tess = Tessellation::build(&config).unwrap();
    let sel = SelectionSpec::volume_power(0.7);
    let p = selection_probabilities(&tess, &sel).unwrap();
    let w = sel.weights(&tess).unwrap();
    let total: f64 = w.iter().sum();
    let trials = 200_000;
    let mut counts = [0usize; 20];
    let mut rng = stream(4, StreamKind::Analysis, 0);
    for _ in 0..trials {
        counts[sample_index(&w, total, &mut rng)] += 1;
    }
    let chi2: f64 =
        counts.iter().zip(&p).map(|(&c, &q)| (c as f64 - q * trials as f64).powi(2) / (q * trials as f64)).sum();
    // 99.9% quantile of χ² with 19 degrees of freedom.
    assert!(chi2 < 43.82, "χ² = {chi2}");
}

#[test]
fn replacement_draws_are_uniform() {
    let space = Space::square(1.0);
    let mut rng = stream(5, StreamKind::Analysis, 0);
    let mut counts = [0usize; 16];
    let trials = 160_000;
    for _ in 0..trials {
        let p = space.sample_mu(&mut rng);
        counts[(p.y * 4.0) as usize * 4 + (p.x * 4.0) as usize] += 1;
    }
    let e = trials as f64 / 16.0;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    // 99.9% quantile with 15 degrees of freedom.
    assert!(chi2 < 37.70, "χ² = {chi2}");
}

#[test]
fn binomial_quadrat_index_is_near_one() {
    let space = Arc::new(Space::torus(1.0));
    let reps = 100;
    let mean: f64 =
        (0..reps).map(|k| quadrat_variance(&space, iid(&space, 2000, 6, k).points(), 10)).sum::<f64>() / reps as f64;
    assert!((mean - 1.0).abs() <= 0.1, "{mean}");
}

#[test]
fn binomial_j_function_is_near_one() {
    let space = Arc::new(Space::torus(1.0));
    let reps = 10;
    let first = iid(&space, 500, 7, 1000);
    let mut nn = nearest_neighbor_distances(&space, first.points());
    nn.sort_by(f64::total_cmp);
    let r_max = nn[nn.len() / 5];
    let r: Vec<f64> = (1..=5).map(|k| r_max * k as f64 / 5.0).collect();
    let mut acc = vec![0.0; r.len()];
    for k in 0..reps {
        let c = iid(&space, 500, 7, k);
        let j = j_function(&space, c.points(), &r, 10_000);
        assert_eq!(j.len(), r.len());
        for (a, v) in acc.iter_mut().zip(&j) {
            *a += v.1 / reps as f64;
        }
    }
    assert!(acc.iter().all(|&v| (0.85..=1.15).contains(&v)), "{acc:?}");
}

#[test]
fn minus_sampling_on_the_square() {
    let space = Arc::new(Space::square(1.0));
    let c = iid(&space, 400, 8, 0);
    let j = j_function(&space, c.points(), &[0.01, 0.02, 0.03], 10_000);
    assert_eq!(j.len(), 3);
    assert!(j.iter().all(|&(_, v)| v > 0.7 && v < 1.3), "{j:?}");
}

#[test]
fn counts_cover_the_space() {
    let space = Arc::new(Space::square(1.0));
    let c = iid(&space, 100, 9, 0);
    let halves =
        [TestRegion::rect(&space, 0.0, 0.0, 0.5, 1.0).unwrap(), TestRegion::rect(&space, 0.5, 0.0, 1.0, 1.0).unwrap()];
    let on_seam = c.points().iter().filter(|p| p.x == 0.5).count();
    assert_eq!(count_in_region(&c, &halves[0]) + count_in_region(&c, &halves[1]), 100 + on_seam);
}

#[test]
fn neutral_alpha_reports_constant_drift() {
    let mut p = ProcessParams::new(Space::circle(1.0), 32, 10_000, SelectionSpec::volume_power(1.0));
    p.seed = 1;
    let t = process::run(&p, &mut []).unwrap();
    let a = TestRegion::arc(&p.space, 0.0, 0.25).unwrap();
    let e = estimate_drift(&t, &[a], 100, None).unwrap();
    assert!(e.constant_drift);
    assert!(e.fitted_k.is_finite());
    assert!((e.comparator_k - 0.25).abs() < 1e-12);
}
