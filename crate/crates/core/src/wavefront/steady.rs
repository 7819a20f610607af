//! Homogeneous-in-space steady states `V = mu psi_0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TraitGrid;
use crate::spectral::{KernelSpec, SpectralBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `lambda_0 < 1`: a positive steady state exists and invades.
    Persistence,
    /// `lambda_0 >= 1`: the only steady state is zero.
    Extinction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    pub mu: f64,
    #[serde(rename = "V")]
    pub v: Vec<f64>,
    pub lambda0: f64,
    /// `∫ psi_0 K` by trapezoid quadrature.
    pub kernel_moment: f64,
    pub regime: Regime,
    #[serde(skip)]
    pub grid: Option<TraitGrid>,
}

impl SteadyState {
    /// `|mu ∫ psi_0 K + lambda_0 - 1|`; zero by construction in the extinction regime.
    pub fn identity_defect(&self) -> f64 {
        match self.regime {
            Regime::Persistence => (self.mu * self.kernel_moment + self.lambda0 - 1.0).abs(),
            Regime::Extinction => 0.0,
        }
    }

    pub fn max_v(&self) -> f64 {
        self.v.iter().cloned().fold(0.0, f64::max)
    }

    pub fn is_extinct(&self) -> bool {
        self.regime == Regime::Extinction
    }
}

/// The positive solution of `L V = (1 - ∫ K V) V`, or zero when `lambda_0 >= 1`.
pub fn steady_state(basis: &SpectralBasis, kernel: &KernelSpec) -> Result<SteadyState> {
    let grid = &basis.grid;
    let k = kernel.sample(grid)?;
    if let Some(bad) = k.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::Validation(format!(
            "kernel must be nonnegative, found {bad}"
        )));
    }
    let psi = basis.psi0();
    let moment = grid.inner(psi, &k);
    let lambda0 = basis.lambda0();
    if lambda0 >= 1.0 {
        return Ok(SteadyState {
            mu: 0.0,
            v: vec![0.0; psi.len()],
            lambda0,
            kernel_moment: moment,
            regime: Regime::Extinction,
            grid: Some(grid.clone()),
        });
    }
    let psi_mass = grid.integrate(&psi.iter().map(|p| p.abs()).collect::<Vec<_>>());
    if !(moment > 1e-14 * psi_mass.max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateKernel(moment));
    }
    let mu = (1.0 - lambda0) / moment;
    Ok(SteadyState {
        mu,
        v: psi.iter().map(|p| mu * p).collect(),
        lambda0,
        kernel_moment: moment,
        regime: Regime::Persistence,
        grid: Some(grid.clone()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{
        assemble_operator, eigenpairs, Boundary, Diffusion, KernelShape, PotentialSpec,
    };

    fn basis(alpha: f64) -> SpectralBasis {
        let grid = TraitGrid::new(10.0, 2001).unwrap();
        let op = assemble_operator(
            &grid,
            &PotentialSpec::harmonic(),
            alpha,
            Boundary::Dirichlet,
            Diffusion::Standard,
        )
        .unwrap();
        eigenpairs(&op, 1).unwrap()
    }

    #[test]
    fn gaussian_ground_state_mass() {
        let b = basis(0.25);
        let s = steady_state(&b, &KernelSpec::constant(1.0)).unwrap();
        // psi_0 = (a/pi)^{1/4} exp(-a y^2/2) with a = sqrt(alpha) integrates to sqrt(2) pi^{1/4} a^{-1/4}
        let a = 0.5f64;
        let mass = 2f64.sqrt() * std::f64::consts::PI.powf(0.25) * a.powf(-0.25);
        assert!((s.kernel_moment - mass).abs() < 1e-4, "{}", s.kernel_moment);
        assert!((s.mu - 0.5 / mass).abs() < 1e-4);
        assert!(s.identity_defect() < 1e-12);
        assert_eq!(s.regime, Regime::Persistence);
    }

    #[test]
    fn doubling_kernel_halves_mu() {
        let b = basis(0.25);
        let s1 = steady_state(&b, &KernelSpec::constant(1.0)).unwrap();
        let s2 = steady_state(&b, &KernelSpec::constant(2.0)).unwrap();
        assert!((s2.mu - 0.5 * s1.mu).abs() < 1e-14);
        assert!(s2.identity_defect() < 1e-12);
    }

    #[test]
    fn extinction_is_zero() {
        let b = basis(1.5);
        let s = steady_state(&b, &KernelSpec::constant(1.0)).unwrap();
        assert!(s.is_extinct());
        assert_eq!(s.mu, 0.0);
        assert!(s.v.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn kernel_away_from_mass_is_degenerate() {
        let b = basis(0.25);
        // supported only on the boundary node, where psi_0 vanishes
        let spike = KernelSpec::new(KernelShape::Tabulated(
            crate::spectral::Table::from_samples(vec![[-10.0, 0.0], [9.99, 0.0], [10.0, 1.0]]),
        ));
        let err = steady_state(&b, &spike).unwrap_err();
        assert!(matches!(err, Error::DegenerateKernel(_)), "{err}");
    }
}
