//! Compactly supported and trait-profile initial data.

use serde::{Deserialize, Serialize};

use crate::cauchy::Field;
use crate::error::{Error, Result};
use crate::field::Field2;
use crate::grid::SpaceGrid;
use crate::spectral::SpectralBasis;
use crate::wavefront::SteadyState;

fn default_plateau() -> f64 {
    0.5
}

/// Unit of a bump amplitude.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeUnit {
    #[default]
    Absolute,
    /// Multiple of the steady-state mass `mu`.
    Mu,
    /// Multiple of `max V`.
    MaxV,
}

/// Product bump `A phi((x - x_c)/r_x) phi((y - y_c)/r_y)` where `phi` equals 1 on
/// `|s| <= plateau` and falls to 0 at `|s| = 1` along a cosine-squared ramp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "is_absolute")]
    pub unit: AmplitudeUnit,
    pub r_x: f64,
    pub r_y: f64,
    #[serde(default)]
    pub x_center: f64,
    #[serde(default)]
    pub y_center: f64,
    #[serde(default = "default_plateau")]
    pub plateau: f64,
    /// Required cap `C_0` with `u_0 <= C_0 psi_0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
}

impl BumpSpec {
    pub fn new(amplitude: f64, r_x: f64, r_y: f64) -> Self {
        Self {
            amplitude,
            unit: AmplitudeUnit::Absolute,
            r_x,
            r_y,
            x_center: 0.0,
            y_center: 0.0,
            plateau: default_plateau(),
            cap: None,
        }
    }

    /// Copy with the amplitude converted to absolute units.
    pub fn resolve(&self, steady: Option<&SteadyState>) -> Result<BumpSpec> {
        let scale = match (self.unit, steady) {
            (AmplitudeUnit::Absolute, _) => 1.0,
            (_, None) => {
                return Err(Error::Validation(
                    "relative bump amplitude needs a steady state".into(),
                ))
            }
            (_, Some(s)) if s.is_extinct() => {
                return Err(Error::Validation(
                    "relative bump amplitude in the extinction regime".into(),
                ))
            }
            (AmplitudeUnit::Mu, Some(s)) => s.mu,
            (AmplitudeUnit::MaxV, Some(s)) => s.max_v(),
        };
        Ok(BumpSpec {
            amplitude: scale * self.amplitude,
            unit: AmplitudeUnit::Absolute,
            ..self.clone()
        })
    }

    fn cutoff(&self, s: f64) -> f64 {
        let s = s.abs();
        if s <= self.plateau {
            1.0
        } else if s >= 1.0 {
            0.0
        } else {
            let t = (s - self.plateau) / (1.0 - self.plateau);
            (0.5 * std::f64::consts::PI * t).cos().powi(2)
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.amplitude
            * self.cutoff((x - self.x_center) / self.r_x)
            * self.cutoff((y - self.y_center) / self.r_y)
    }

    fn validate(&self, half_x: f64, half_y: f64) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return Err(Error::Validation(format!(
                "initial amplitude must be positive, got {}",
                self.amplitude
            )));
        }
        if !(self.r_x > 0.0 && self.r_y > 0.0) {
            return Err(Error::Validation("bump radii must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.plateau) {
            return Err(Error::Validation(format!(
                "plateau must lie in [0, 1), got {}",
                self.plateau
            )));
        }
        if self.x_center.abs() + self.r_x >= half_x || self.y_center.abs() + self.r_y >= half_y {
            return Err(Error::Validation(
                "initial bump touches the boundary of the computational domain".into(),
            ));
        }
        Ok(())
    }
}

fn is_absolute(u: &AmplitudeUnit) -> bool {
    *u == AmplitudeUnit::Absolute
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    Bump(BumpSpec),
    /// `amplitude psi_0(y)` at every interior `x` node.
    GroundState {
        amplitude: f64,
    },
    /// `scale V(y)` at every interior `x` node, plus an optional bump.
    Steady {
        scale: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bump: Option<BumpSpec>,
    },
}

#[derive(Debug, Clone)]
pub struct InitialField {
    pub field: Field,
    /// `max u_0 / psi_0` over the support of `u_0`.
    pub c0: f64,
}

pub fn init_field(
    spec: &InitialData,
    x: &SpaceGrid,
    basis: &SpectralBasis,
    steady: Option<&SteadyState>,
) -> Result<InitialField> {
    let y = &basis.grid;
    let psi = basis.psi0();
    let n_x = x.len();
    let interior = |i: usize| i > 0 && i + 1 < n_x;
    let u = match spec {
        InitialData::Bump(b) => {
            let b = b.resolve(steady)?;
            b.validate(x.half_width(), y.half_width())?;
            Field2::from_fn(x, y, |a, c| b.eval(a, c))
        }
        InitialData::GroundState { amplitude } => {
            if !(amplitude.is_finite() && *amplitude > 0.0) {
                return Err(Error::Validation(format!(
                    "amplitude must be positive, got {amplitude}"
                )));
            }
            let a: Vec<f64> = (0..n_x)
                .map(|i| if interior(i) { *amplitude } else { 0.0 })
                .collect();
            Field2::separable(x, y, &a, psi)?
        }
        InitialData::Steady { scale, bump } => {
            let steady = steady.ok_or_else(|| {
                Error::Validation("steady initial data needs a steady state".into())
            })?;
            if steady.is_extinct() {
                return Err(Error::Validation(
                    "steady initial data in the extinction regime is zero".into(),
                ));
            }
            if !(scale.is_finite() && *scale >= 0.0) {
                return Err(Error::Validation(format!(
                    "scale must be nonnegative, got {scale}"
                )));
            }
            let a: Vec<f64> = (0..n_x)
                .map(|i| if interior(i) { *scale } else { 0.0 })
                .collect();
            let mut u = Field2::separable(x, y, &a, &steady.v)?;
            if let Some(b) = bump {
                let b = b.resolve(Some(steady))?;
                b.validate(x.half_width(), y.half_width())?;
                for (i, &xi) in x.nodes().iter().enumerate() {
                    for (j, &yj) in y.nodes().iter().enumerate() {
                        u.data[i * y.len() + j] += b.eval(xi, yj);
                    }
                }
            }
            u
        }
    };
    if u.data.iter().all(|v| *v == 0.0) {
        return Err(Error::Validation(
            "initial data vanishes on the grid".into(),
        ));
    }
    let mut c0 = 0.0f64;
    for row in u.rows() {
        for (v, p) in row.iter().zip(psi) {
            if *v > 0.0 {
                if !(*p > 0.0) {
                    return Err(Error::Validation(
                        "initial data is positive where psi_0 vanishes".into(),
                    ));
                }
                c0 = c0.max(v / p);
            }
        }
    }
    if let InitialData::Bump(BumpSpec { cap: Some(cap), .. }) = spec {
        if c0 > *cap {
            return Err(Error::Validation(format!(
                "initial data exceeds the cap: max u0/psi0 = {c0} > {cap}"
            )));
        }
    }
    Ok(InitialField {
        field: Field { t: 0.0, u },
        c0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TraitGrid;
    use crate::spectral::{
        assemble_operator, eigenpairs, Boundary, Diffusion, KernelSpec, PotentialSpec,
    };
    use crate::wavefront::steady_state;

    fn basis() -> SpectralBasis {
        let y = TraitGrid::new(10.0, 101).unwrap();
        let op = assemble_operator(
            &y,
            &PotentialSpec::harmonic(),
            0.25,
            Boundary::Dirichlet,
            Diffusion::Standard,
        )
        .unwrap();
        eigenpairs(&op, 4).unwrap()
    }

    #[test]
    fn zero_amplitude_rejected() {
        let x = SpaceGrid::new(20.0, 201).unwrap();
        let spec = InitialData::Bump(BumpSpec::new(0.0, 2.0, 1.0));
        assert!(init_field(&spec, &x, &basis(), None).is_err());
    }

    #[test]
    fn boundary_contact_rejected() {
        let x = SpaceGrid::new(5.0, 51).unwrap();
        let b = basis();
        assert!(init_field(
            &InitialData::Bump(BumpSpec::new(1.0, 5.0, 1.0)),
            &x,
            &b,
            None
        )
        .is_err());
        assert!(init_field(
            &InitialData::Bump(BumpSpec::new(1.0, 2.0, 10.0)),
            &x,
            &b,
            None
        )
        .is_err());
    }

    #[test]
    fn cap_respected() {
        let x = SpaceGrid::new(20.0, 201).unwrap();
        let b = basis();
        let cap = 3.0;
        // A <= C_0 min psi_0 over the support guarantees the cap
        let support_min = b
            .grid
            .nodes()
            .iter()
            .zip(b.psi0())
            .filter(|(y, _)| y.abs() < 1.0)
            .map(|(_, p)| *p)
            .fold(f64::INFINITY, f64::min);
        let spec = BumpSpec {
            cap: Some(cap),
            ..BumpSpec::new(cap * support_min, 2.0, 1.0)
        };
        let init = init_field(&InitialData::Bump(spec.clone()), &x, &b, None).unwrap();
        assert!(init.c0 <= cap);
        for row in init.field.u.rows() {
            for (u, p) in row.iter().zip(b.psi0()) {
                assert!(*u <= cap * p);
            }
        }
        let too_big = BumpSpec {
            amplitude: 10.0,
            ..spec
        };
        assert!(init_field(&InitialData::Bump(too_big), &x, &b, None).is_err());
    }

    #[test]
    fn default_bump_mass() {
        let x = SpaceGrid::new(20.0, 201).unwrap();
        let b = basis();
        let s = steady_state(&b, &KernelSpec::constant(1.0)).unwrap();
        let init = init_field(
            &InitialData::Bump(BumpSpec::new(0.1 * s.mu, 2.0, 1.0)),
            &x,
            &b,
            Some(&s),
        )
        .unwrap();
        let u = &init.field.u;
        let mut mass = 0.0;
        for (i, wx) in x.weights().iter().enumerate() {
            for (j, wy) in b.grid.weights().iter().enumerate() {
                mass += wx * wy * u.at(i, j);
            }
        }
        // continuum value: A (r_x (1 + p)) (r_y (1 + p)) with p = 1/2 for the cos^2 ramp
        let continuum = 0.1 * s.mu * 3.0 * 1.5;
        assert!(mass > 0.0);
        assert!(
            (mass / continuum - 1.0).abs() < 0.02,
            "{mass} vs {continuum}"
        );
        assert!((mass - 0.100_663_005_29).abs() < 1e-10, "{mass}");
    }

    #[test]
    fn steady_and_ground_state_data() {
        let x = SpaceGrid::new(20.0, 41).unwrap();
        let b = basis();
        let s = steady_state(&b, &KernelSpec::constant(1.0)).unwrap();
        let g = init_field(&InitialData::GroundState { amplitude: 2.0 }, &x, &b, None).unwrap();
        assert!((g.c0 - 2.0).abs() < 1e-14);
        assert!(g.field.u.row(0).iter().all(|v| *v == 0.0));
        let v = init_field(
            &InitialData::Steady {
                scale: 1.0,
                bump: None,
            },
            &x,
            &b,
            Some(&s),
        )
        .unwrap();
        assert_eq!(v.field.u.row(20), s.v.as_slice());
        assert!(init_field(
            &InitialData::Steady {
                scale: 1.0,
                bump: None
            },
            &x,
            &b,
            None
        )
        .is_err());
    }
}
