//! Critical selection intensity and domain-truncation study.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TraitGrid;
use crate::spectral::eigen::principal_eigenvalue;
use crate::spectral::operator::{Boundary, Diffusion, DiscreteOperator};
use crate::spectral::potential::{PotentialSpec, DEFAULT_KAPPA};

/// Bracket policy for the critical-intensity search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaSearch {
    /// Initial unit bracket `[start, start + 1]`.
    pub start: f64,
    pub min_alpha: f64,
    pub max_alpha: f64,
    pub boundary: Boundary,
    pub diffusion: Diffusion,
}

impl Default for AlphaSearch {
    fn default() -> Self {
        Self {
            start: 0.5,
            min_alpha: 1e-8,
            max_alpha: 1e8,
            boundary: Boundary::Dirichlet,
            diffusion: Diffusion::Standard,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaBar {
    pub alpha: f64,
    /// `lambda_0` evaluated at `alpha`.
    pub lambda0: f64,
    /// Final bracket.
    pub lo: f64,
    pub hi: f64,
    /// Number of bisection halvings performed.
    pub halvings: usize,
}

/// Intensity at which the principal eigenvalue crosses 1, by bisection.
pub fn find_alpha_bar(g: &PotentialSpec, grid: &TraitGrid, tol: f64) -> Result<AlphaBar> {
    find_alpha_bar_with(g, grid, tol, &AlphaSearch::default())
}

pub fn find_alpha_bar_with(
    g: &PotentialSpec,
    grid: &TraitGrid,
    tol: f64,
    search: &AlphaSearch,
) -> Result<AlphaBar> {
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let g_values = g.validate(grid, DEFAULT_KAPPA)?;
    let lambda0 = |alpha: f64| -> Result<f64> {
        let pot = g_values.iter().map(|v| alpha * v).collect();
        let op =
            DiscreteOperator::from_potential(grid, pot, alpha, search.boundary, search.diffusion)?;
        principal_eigenvalue(&op)
    };

    let mut lo = search.start;
    let mut hi = search.start + 1.0;
    let out_of_range = |lo: f64, hi: f64| Error::NoCriticalIntensity { lo, hi };
    while lambda0(lo)? >= 1.0 {
        hi = lo;
        lo *= 0.5;
        if lo < search.min_alpha {
            return Err(out_of_range(search.min_alpha, search.max_alpha));
        }
    }
    while lambda0(hi)? <= 1.0 {
        lo = hi;
        hi *= 2.0;
        if hi > search.max_alpha {
            return Err(out_of_range(search.min_alpha, search.max_alpha));
        }
    }

    let mut halvings = 0;
    loop {
        let mid = 0.5 * (lo + hi);
        let lam = lambda0(mid)?;
        if (hi - lo <= tol && (lam - 1.0).abs() <= tol) || halvings >= 200 {
            return Ok(AlphaBar {
                alpha: mid,
                lambda0: lam,
                lo,
                hi,
                halvings,
            });
        }
        if lam < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        halvings += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationPoint {
    pub radius: f64,
    pub n_points: usize,
    pub lambda0: f64,
}

/// Principal eigenvalue on `[-R, R]` for each radius at a fixed node density.
///
/// Grids share the spacing `1 / n_per_unit`, so smaller domains are nested
/// in larger ones and the discrete min-max principle makes the sequence
/// non-increasing.
pub fn truncation_study(
    g: &PotentialSpec,
    alpha: f64,
    radii: &[f64],
    n_per_unit: usize,
) -> Result<Vec<TruncationPoint>> {
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Parameter("radii must be strictly ascending".into()));
    }
    if n_per_unit == 0 {
        return Err(Error::Parameter("node density must be positive".into()));
    }
    radii
        .iter()
        .map(|&radius| {
            let n_points = 2 * (radius * n_per_unit as f64).round() as usize + 1;
            let grid = TraitGrid::new(radius, n_points)?;
            let op = crate::spectral::operator::assemble_operator(
                &grid,
                g,
                alpha,
                Boundary::Dirichlet,
                Diffusion::Standard,
            )?;
            Ok(TruncationPoint {
                radius,
                n_points,
                lambda0: principal_eigenvalue(&op)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_alpha_bar_is_one() {
        let grid = TraitGrid::new(10.0, 2001).unwrap();
        let res = find_alpha_bar(&PotentialSpec::harmonic(), &grid, 1e-6).unwrap();
        assert!((res.alpha - 1.0).abs() < 1e-3, "{res:?}");
        assert!((res.lambda0 - 1.0).abs() <= 1e-6);
        assert!(res.halvings >= 20, "{res:?}");
        assert!(res.hi - res.lo <= 1e-6);
    }

    #[test]
    fn quartic_self_consistent() {
        let grid = TraitGrid::new(6.0, 1201).unwrap();
        let g = PotentialSpec::Quartic { a: 1.0 };
        let tol = 1e-7;
        let res = find_alpha_bar(&g, &grid, tol).unwrap();
        let op = crate::spectral::operator::assemble_operator(
            &grid,
            &g,
            res.alpha,
            Boundary::Dirichlet,
            Diffusion::Standard,
        )
        .unwrap();
        let lam = principal_eigenvalue(&op).unwrap();
        assert!((lam - 1.0).abs() <= tol);
    }

    #[test]
    fn bracket_expands_downward() {
        // lambda_0 = sqrt(a * alpha): with a = 100 the crossing sits at alpha = 0.01.
        let grid = TraitGrid::new(4.0, 801).unwrap();
        let res = find_alpha_bar(&PotentialSpec::Quadratic { a: 100.0 }, &grid, 1e-8).unwrap();
        assert!((res.alpha - 0.01).abs() < 1e-4, "{res:?}");
    }

    #[test]
    fn bracket_limits_reported() {
        let grid = TraitGrid::new(4.0, 201).unwrap();
        let search = AlphaSearch {
            max_alpha: 1.2,
            ..AlphaSearch::default()
        };
        // crossing at alpha = 100 is out of range
        let err = find_alpha_bar_with(&PotentialSpec::Quadratic { a: 0.01 }, &grid, 1e-6, &search)
            .unwrap_err();
        assert!(matches!(err, Error::NoCriticalIntensity { .. }));
        assert!(err.to_string().contains("no critical intensity in range"));
    }

    #[test]
    fn truncation_monotone() {
        let pts =
            truncation_study(&PotentialSpec::harmonic(), 1.0, &[4.0, 6.0, 8.0, 10.0], 100).unwrap();
        assert_eq!(pts.len(), 4);
        for w in pts.windows(2) {
            assert!(w[0].lambda0 >= w[1].lambda0 - 1e-10);
        }
        assert!((pts[3].lambda0 - pts[2].lambda0).abs() < 1e-6);
        let single = truncation_study(&PotentialSpec::harmonic(), 1.0, &[5.0], 50).unwrap();
        assert_eq!(single.len(), 1);
        assert!(truncation_study(&PotentialSpec::harmonic(), 1.0, &[5.0, 4.0], 50).is_err());
    }

    #[test]
    fn truncation_limit_within_1e6() {
        // Discretization error is about -h^2/16 for alpha = 1.
        let pts =
            truncation_study(&PotentialSpec::harmonic(), 1.0, &[4.0, 6.0, 8.0, 10.0], 400).unwrap();
        assert!(pts.windows(2).all(|w| w[0].lambda0 > w[1].lambda0 - 1e-10));
        assert!((pts[3].lambda0 - 1.0).abs() <= 1e-6, "{:?}", pts[3]);
    }
}
