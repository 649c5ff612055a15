//! Selection functions and the selection rule: generator `j` is picked with
//! probability `S(C_j) / Σ_i S(C_i)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tessellation::Tessellation;

/// Smallest selection weight; keeps `v^α` away from zero for extreme `α`.
pub const WEIGHT_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SelectionSpec {
    /// `S(v) = v^α` of the cell measure.
    VolumePower { alpha: f64 },
    /// Step function of the cell measure: `values[i]` on
    /// `[breakpoints[i], breakpoints[i + 1])`, the last piece closed.
    VolumeTable { breakpoints: Vec<f64>, values: Vec<f64> },
    /// `values[d - 1]` for a cell with `d` Voronoi neighbours.
    NeighborTable { values: Vec<f64> },
}

impl SelectionSpec {
    pub fn volume_power(alpha: f64) -> Self {
        SelectionSpec::VolumePower { alpha }
    }

    /// Neighbour table `S(d) = base + scale·|d - center|^power` for
    /// `d = 1..=max_degree`, then `overrides` as `(degree, value)`.
    pub fn neighbor_formula(
        max_degree: usize,
        base: f64,
        scale: f64,
        center: f64,
        power: f64,
        overrides: &[(usize, f64)],
    ) -> Self {
        let mut values: Vec<f64> =
            (1..=max_degree).map(|d| base + scale * (d as f64 - center).abs().powf(power)).collect();
        for &(d, v) in overrides {
            if (1..=max_degree).contains(&d) {
                values[d - 1] = v;
            }
        }
        SelectionSpec::NeighborTable { values }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::InvalidParameter { key: "selection", reason });
        match self {
            SelectionSpec::VolumePower { alpha } if !alpha.is_finite() => {
                bad(format!("alpha must be finite, got {alpha}"))
            }
            SelectionSpec::VolumePower { .. } => Ok(()),
            SelectionSpec::VolumeTable { breakpoints, values } => {
                if values.is_empty() || breakpoints.len() != values.len() + 1 {
                    return bad("volume table needs one more breakpoint than values".into());
                }
                if breakpoints.windows(2).any(|w| w[0] >= w[1]) || breakpoints.iter().any(|b| !b.is_finite()) {
                    return bad("volume table breakpoints must be finite and strictly increasing".into());
                }
                if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return bad("volume table values must be positive and finite".into());
                }
                Ok(())
            }
            SelectionSpec::NeighborTable { values } => {
                if values.is_empty() {
                    return bad("neighbour table is empty".into());
                }
                if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                    return bad("neighbour table values must be positive and finite".into());
                }
                Ok(())
            }
        }
    }

    pub fn is_neighbor_based(&self) -> bool {
        matches!(self, SelectionSpec::NeighborTable { .. })
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            SelectionSpec::VolumePower { alpha } => Some(*alpha),
            _ => None,
        }
    }

    /// `S` for a cell with measure `volume` and `degree` neighbours.
    pub fn weight(&self, volume: f64, degree: usize) -> Result<f64> {
        match self {
            SelectionSpec::VolumePower { alpha } => {
                if *alpha == 0.0 {
                    return Ok(1.0);
                }
                Ok(volume.powf(*alpha).clamp(WEIGHT_FLOOR, f64::MAX))
            }
            SelectionSpec::VolumeTable { breakpoints, values } => {
                let (lo, hi) = (breakpoints[0], breakpoints[breakpoints.len() - 1]);
                if !(volume >= lo && volume <= hi) {
                    return Err(Error::SelectionOutOfDomain(format!(
                        "cell measure {volume} outside table range [{lo}, {hi}]"
                    )));
                }
                let k = breakpoints.partition_point(|&b| b <= volume).saturating_sub(1);
                Ok(values[k.min(values.len() - 1)])
            }
            SelectionSpec::NeighborTable { values } => {
                if degree == 0 || degree > values.len() {
                    return Err(Error::SelectionOutOfDomain(format!(
                        "degree {degree} outside neighbour table range 1..={}",
                        values.len()
                    )));
                }
                Ok(values[degree - 1])
            }
        }
    }

    /// Selection weights of every cell of `tess`.
    pub fn weights(&self, tess: &Tessellation) -> Result<Vec<f64>> {
        (0..tess.len()).map(|i| self.weight(tess.volume(i), tess.degree(i))).collect()
    }
}

/// Normalised selection probabilities over the current generators.
pub fn selection_probabilities(tess: &Tessellation, sel: &SelectionSpec) -> Result<Vec<f64>> {
    let w = sel.weights(tess)?;
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / total).collect())
}

/// Inverse-CDF draw from unnormalised non-negative weights.
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], total: f64, rng: &mut R) -> usize {
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last = i;
            if u < acc {
                return i;
            }
        }
    }
    last
}

/// Lower bound `min S / (N · max S)` on every selection probability of an
/// n-process with this table.
pub fn minorization_bound(sel: &SelectionSpec, n: usize) -> Result<f64> {
    match sel {
        SelectionSpec::NeighborTable { values } => {
            sel.validate()?;
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            let max = values.iter().copied().fold(0.0, f64::max);
            Ok(min / (n as f64 * max))
        }
        _ => Err(Error::InvalidParameter {
            key: "selection",
            reason: "minorization bound needs a neighbour table".into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::space::{Point, Space};
    use crate::tessellation::Configuration;

    fn circle_example() -> Tessellation {
        let c = Configuration::new(Arc::new(Space::circle(1.0)), [0.0, 0.1, 0.5].map(Point::on_line).to_vec()).unwrap();
        Tessellation::build(&c).unwrap()
    }

    #[test]
    fn alpha_one_reproduces_volumes() {
        let p = selection_probabilities(&circle_example(), &SelectionSpec::volume_power(1.0)).unwrap();
        for (a, b) in p.iter().zip([0.30, 0.25, 0.45]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn alpha_minus_one_by_direct_evaluation() {
        let p = selection_probabilities(&circle_example(), &SelectionSpec::volume_power(-1.0)).unwrap();
        let w = [1.0 / 0.30, 1.0 / 0.25, 1.0 / 0.45];
        let s: f64 = w.iter().sum();
        for (a, b) in p.iter().zip(w) {
            assert!((a - b / s).abs() < 1e-12);
        }
        // Weights 10/3, 4, 20/9 are proportional to 30, 36, 20.
        assert!((p[0] - 15.0 / 43.0).abs() < 1e-12);
        assert!((p[1] - 18.0 / 43.0).abs() < 1e-12);
        assert!((p[2] - 10.0 / 43.0).abs() < 1e-12);
    }

    #[test]
    fn degree_outside_table_is_an_error() {
        let sel = SelectionSpec::NeighborTable { values: vec![1.0] };
        assert!(matches!(selection_probabilities(&circle_example(), &sel), Err(Error::SelectionOutOfDomain(_))));
    }

    #[test]
    fn volume_table_lookup() {
        let sel = SelectionSpec::VolumeTable { breakpoints: vec![0.0, 0.3, 1.0], values: vec![2.0, 5.0] };
        sel.validate().unwrap();
        assert_eq!(sel.weight(0.1, 0).unwrap(), 2.0);
        assert_eq!(sel.weight(0.3, 0).unwrap(), 5.0);
        assert_eq!(sel.weight(1.0, 0).unwrap(), 5.0);
        assert!(sel.weight(1.5, 0).is_err());
    }

    #[test]
    fn minorization_bounds() {
        let constant = SelectionSpec::NeighborTable { values: vec![3.0; 20] };
        assert!((minorization_bound(&constant, 17).unwrap() - 1.0 / 17.0).abs() < 1e-15);
        let spike = SelectionSpec::neighbor_formula(1999, 1.0, 0.0, 0.0, 1.0, &[(5, 5000.0)]);
        assert!((minorization_bound(&spike, 2000).unwrap() - 1e-7).abs() < 1e-20);
        let quad = SelectionSpec::neighbor_formula(1999, 0.1, 1.0, 6.0, 2.0, &[]);
        let max = 0.1 + 1993.0f64.powi(2);
        assert!((minorization_bound(&quad, 2000).unwrap() - 0.1 / (2000.0 * max)).abs() < 1e-20);
    }

    #[test]
    fn non_positive_tables_are_rejected() {
        assert!(SelectionSpec::NeighborTable { values: vec![1.0, 0.0] }.validate().is_err());
        assert!(SelectionSpec::volume_power(f64::NAN).validate().is_err());
    }
}
