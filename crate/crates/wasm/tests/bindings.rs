use vorproc_wasm::{spacetime_raster, PlanarChain};

#[test]
fn raster_has_one_row_per_step() {
    let img = spacetime_raster(1.5, 16, 300, 64, 3).unwrap();
    assert_eq!(img.len(), 64 * 300 * 4);
    for row in img.chunks(64 * 4) {
        let dark = row.chunks(4).filter(|px| px[0] < 128).count();
        assert!((1..=16).contains(&dark));
        assert!(row.chunks(4).all(|px| px[3] == 255));
    }
    assert_eq!(img, spacetime_raster(1.5, 16, 300, 64, 3).unwrap());
    assert_ne!(img, spacetime_raster(1.5, 16, 300, 64, 4).unwrap());
}

#[test]
fn raster_rejects_empty_requests() {
    assert!(spacetime_raster(1.0, 16, 0, 64, 0).is_err());
    assert!(spacetime_raster(1.0, 16, 10, 0, 0).is_err());
    assert!(spacetime_raster(1.0, 0, 10, 10, 0).is_err());
}

#[test]
fn planar_chain_cells_tile_the_square() {
    for selection in ["volume", "neighbor"] {
        let mut chain =
            PlanarChain::new(false, 40, selection, if selection == "volume" { 1.2 } else { 6.0 }, 1).unwrap();
        chain.advance(250).unwrap();
        assert_eq!(chain.steps(), 250);
        assert_eq!(chain.points().len(), 80);
        let area: f64 = (0..chain.len())
            .map(|i| {
                let ring = chain.cell_polygon(i);
                let n = ring.len() / 2;
                (0..n)
                    .map(|k| {
                        let (a, b) = (k, (k + 1) % n);
                        ring[2 * a] * ring[2 * b + 1] - ring[2 * b] * ring[2 * a + 1]
                    })
                    .sum::<f64>()
                    / 2.0
            })
            .sum();
        assert!((area - 1.0).abs() < 1e-9, "{selection}: {area}");
        assert!((chain.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(chain.clustering_index().is_finite());
        assert!((0.0..1.0).contains(&chain.thiel_redundancy()));
    }
}

#[test]
fn torus_chain_is_reproducible() {
    let run = || {
        let mut c = PlanarChain::new(true, 30, "volume", 0.5, 9).unwrap();
        c.advance(100).unwrap();
        c.points()
    };
    assert_eq!(run(), run());
    assert!(PlanarChain::new(true, 30, "degree", 0.5, 9).is_err());
    assert!(PlanarChain::new(true, 30, "volume", 0.5, 9).unwrap().cell_polygon(30).is_empty());
}
