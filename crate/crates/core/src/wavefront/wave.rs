//! Separable traveling wave `u(x, y) = v(x) V(y)` and its residual in the full equation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Field2, FieldSidecar};
use crate::spectral::{DiscreteOperator, KernelSpec};
use crate::wavefront::profile::WaveProfile;
use crate::wavefront::steady::SteadyState;

#[derive(Debug, Clone, PartialEq)]
pub struct TravelingWave {
    pub field: Field2,
    pub c: f64,
    pub mu: f64,
    pub lambda0: f64,
}

impl TravelingWave {
    pub fn sidecar(&self) -> FieldSidecar {
        FieldSidecar {
            c: Some(self.c),
            mu: Some(self.mu),
            lambda0: Some(self.lambda0),
            ..FieldSidecar::for_field(&self.field)
        }
    }
}

pub fn assemble_wave(profile: &WaveProfile, steady: &SteadyState) -> Result<TravelingWave> {
    let y = steady
        .grid
        .as_ref()
        .ok_or_else(|| Error::GridMismatch("steady state carries no trait grid".into()))?;
    if (profile.lambda0 - steady.lambda0).abs() > 1e-12 * steady.lambda0.abs().max(1.0) {
        return Err(Error::GridMismatch(format!(
            "profile built for lambda0 = {} but steady state has {}",
            profile.lambda0, steady.lambda0
        )));
    }
    let field = Field2::separable(profile.grid(), y, &profile.v, &steady.v)?;
    Ok(TravelingWave {
        field,
        c: profile.speed,
        mu: steady.mu,
        lambda0: steady.lambda0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveResidual {
    pub max: f64,
    pub l2: f64,
    /// Interior node where the maximum is attained.
    pub argmax: (f64, f64),
}

/// Residual of `-c u_x - u_xx + L u - (1 - ∫ K u) u` at interior nodes.
///
/// `x`-derivatives use five-point fourth-order centred differences, so that
/// for a wave computed with second-order differences the residual exposes the
/// profile's own truncation error instead of the solver tolerance. The first
/// two and last two `x` nodes and the trait boundary nodes are skipped.
pub fn wave_residual(
    u: &Field2,
    c: f64,
    op: &DiscreteOperator,
    kernel: &KernelSpec,
) -> Result<WaveResidual> {
    if op.grid() != &u.y {
        return Err(Error::GridMismatch(
            "operator and field trait grids differ".into(),
        ));
    }
    let n_x = u.n_x();
    if n_x < 5 {
        return Err(Error::GridMismatch(format!(
            "need at least 5 x nodes, got {n_x}"
        )));
    }
    let k = kernel.sample(&u.y)?;
    let b = u.competition(&k);
    let h = u.x.spacing();
    let active = 1..u.n_y() - 1;
    let lu: Vec<Vec<f64>> = u.rows().map(|row| op.apply(row)).collect();

    let mut max = 0.0f64;
    let mut argmax = (0.0, 0.0);
    let mut sum_sq = 0.0;
    for i in 2..n_x - 2 {
        let (m2, m1, p0, p1, p2) = (
            u.row(i - 2),
            u.row(i - 1),
            u.row(i),
            u.row(i + 1),
            u.row(i + 2),
        );
        for j in active.clone() {
            let d1 = (-p2[j] + 8.0 * p1[j] - 8.0 * m1[j] + m2[j]) / (12.0 * h);
            let d2 = (-p2[j] + 16.0 * p1[j] - 30.0 * p0[j] + 16.0 * m1[j] - m2[j]) / (12.0 * h * h);
            let res = -c * d1 - d2 + lu[i][j] - (1.0 - b[i]) * p0[j];
            sum_sq += res * res;
            if res.abs() > max {
                max = res.abs();
                argmax = (u.x.nodes()[i], u.y.nodes()[j]);
            }
        }
    }
    Ok(WaveResidual {
        max,
        l2: (sum_sq * h * u.y.spacing()).sqrt(),
        argmax,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{SpaceGrid, TraitGrid};
    use crate::spectral::{assemble_operator, eigenpairs, Boundary, Diffusion, PotentialSpec};
    use crate::wavefront::{critical_speed, solve_kpp_profile, steady_state};

    fn setup(n_y: usize) -> (DiscreteOperator, SteadyState) {
        let y = TraitGrid::new(8.0, n_y).unwrap();
        let op = assemble_operator(
            &y,
            &PotentialSpec::harmonic(),
            0.25,
            Boundary::Dirichlet,
            Diffusion::Standard,
        )
        .unwrap();
        let basis = eigenpairs(&op, 1).unwrap();
        let s = steady_state(&basis, &KernelSpec::constant(1.0)).unwrap();
        (op, s)
    }

    #[test]
    fn zero_field_has_zero_residual() {
        let (op, _) = setup(81);
        let u = Field2::zeros(&SpaceGrid::new(5.0, 11).unwrap(), op.grid());
        let r = wave_residual(&u, 1.3, &op, &KernelSpec::constant(1.0)).unwrap();
        assert_eq!(r.max, 0.0);
        assert_eq!(r.l2, 0.0);
    }

    #[test]
    fn steady_state_is_a_residual_zero() {
        let (op, s) = setup(161);
        let x = SpaceGrid::new(5.0, 21).unwrap();
        let u = Field2::separable(&x, op.grid(), &[1.0; 21], &s.v).unwrap();
        for c in [0.0, 0.7, 3.0] {
            let r = wave_residual(&u, c, &op, &KernelSpec::constant(1.0)).unwrap();
            assert!(r.max < 1e-9, "{r:?}");
        }
    }

    #[test]
    fn assembled_wave_limits_and_competition() {
        let (op, s) = setup(161);
        let c = critical_speed(s.lambda0).unwrap();
        let p = solve_kpp_profile(c, s.lambda0, 60.0, 2401).unwrap();
        let w = assemble_wave(&p, &s).unwrap();
        let vmax = s.max_v();
        let n = w.field.n_x();
        for j in 0..w.field.n_y() {
            assert!((w.field.at(0, j) - s.v[j]).abs() <= 1e-3 * vmax);
            assert!(w.field.at(n - 1, j) <= 1e-3 * vmax);
        }
        let b = w
            .field
            .competition(&KernelSpec::constant(1.0).sample(op.grid()).unwrap());
        for (bi, vi) in b.iter().zip(&p.v) {
            assert!((bi - (1.0 - s.lambda0) * vi).abs() < 1e-10);
        }
        let sc = serde_json::to_value(w.sidecar()).unwrap();
        assert_eq!(sc["n_x"], 2401);
        assert!(sc["mu"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn mismatched_lambda_rejected() {
        let (_, s) = setup(81);
        let p = solve_kpp_profile(1.9, 0.1, 40.0, 801).unwrap();
        assert!(matches!(assemble_wave(&p, &s), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn residual_is_second_order() {
        let k = KernelSpec::constant(1.0);
        let mut maxima = Vec::new();
        for (n_x, n_y) in [(601, 81), (1201, 161), (2401, 321)] {
            let (op, s) = setup(n_y);
            let c = critical_speed(s.lambda0).unwrap();
            let p = solve_kpp_profile(c, s.lambda0, 56.0, n_x).unwrap();
            let w = assemble_wave(&p, &s).unwrap();
            maxima.push(wave_residual(&w.field, c, &op, &k).unwrap().max);
        }
        eprintln!("{maxima:?}");
        for m in maxima.windows(2) {
            let ratio = m[0] / m[1];
            assert!((3.2..=4.8).contains(&ratio), "{maxima:?}");
        }
    }
}
