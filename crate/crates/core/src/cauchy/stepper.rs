//! One IMEX step: explicit nonlocal reaction, implicit direction sweeps.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::cauchy::Field;
use crate::error::{Error, Result};
use crate::field::Field2;
use crate::linalg::ThomasFactor;
use crate::spectral::{DiscreteOperator, KernelSpec, OperatorMatrix};

/// Values in `[-NEGATIVE_TOLERANCE, 0)` are rounding and are clamped to zero.
pub const NEGATIVE_TOLERANCE: f64 = 1e-13;

/// Largest admissible `dt * max |1 - b|` for the explicit reaction.
pub const REACTION_LIMIT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepOptions {
    /// Speed of the comoving frame; adds `c u_x` by first-order upwinding.
    pub frame_speed: f64,
    /// Drop the competition integral, leaving the linear equation.
    pub forced_b_zero: bool,
}

enum TraitSolve {
    Tridiagonal(ThomasFactor),
    /// Inverse of `I + dt A` on the active nodes.
    Dense(DMatrix<f64>),
}

/// Reusable stepper; factorizations are cached per `dt`.
pub struct Stepper<'a> {
    op: &'a DiscreteOperator,
    kernel: Vec<f64>,
    options: StepOptions,
    cached_dt: f64,
    x_factor: Option<ThomasFactor>,
    y_solve: Option<TraitSolve>,
}

impl<'a> Stepper<'a> {
    pub fn new(
        op: &'a DiscreteOperator,
        kernel: &KernelSpec,
        options: StepOptions,
    ) -> Result<Self> {
        let k = kernel.sample(op.grid())?;
        if let Some(bad) = k.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Validation(format!(
                "kernel must be nonnegative, found {bad}"
            )));
        }
        if !options.frame_speed.is_finite() {
            return Err(Error::Parameter("frame speed must be finite".into()));
        }
        Ok(Self {
            op,
            kernel: k,
            options,
            cached_dt: f64::NAN,
            x_factor: None,
            y_solve: None,
        })
    }

    pub fn options(&self) -> StepOptions {
        self.options
    }

    pub fn kernel(&self) -> &[f64] {
        &self.kernel
    }

    /// `b(x)`, or zeros when the competition is switched off.
    pub fn competition(&self, u: &Field2) -> Vec<f64> {
        if self.options.forced_b_zero {
            vec![0.0; u.n_x()]
        } else {
            u.competition(&self.kernel)
        }
    }

    /// Largest `dt` allowed by the explicit terms for the given competition values.
    pub fn dt_limit(&self, b: &[f64], h_x: f64) -> f64 {
        let reaction = b.iter().fold(0.0f64, |m, v| m.max((1.0 - v).abs()));
        let mut limit = if reaction > 0.0 {
            REACTION_LIMIT / reaction
        } else {
            f64::INFINITY
        };
        let c = self.options.frame_speed.abs();
        if c > 0.0 {
            limit = limit.min(h_x / c);
        }
        limit
    }

    fn prepare(&mut self, dt: f64, n_x: usize, h_x: f64) -> Result<()> {
        if dt == self.cached_dt && self.x_factor.as_ref().map(|f| f.len()) == Some(n_x - 2) {
            return Ok(());
        }
        let m = n_x - 2;
        let r = dt / (h_x * h_x);
        self.x_factor = Some(ThomasFactor::new(
            &vec![-r; m - 1],
            &vec![1.0 + 2.0 * r; m],
            &vec![-r; m - 1],
        )?);
        self.y_solve = Some(match self.op.tridiagonal_bands() {
            Some((sub, diag, sup)) => {
                let sub: Vec<f64> = sub.iter().map(|v| dt * v).collect();
                let sup: Vec<f64> = sup.iter().map(|v| dt * v).collect();
                let diag: Vec<f64> = diag.iter().map(|v| 1.0 + dt * v).collect();
                TraitSolve::Tridiagonal(ThomasFactor::new(&sub, &diag, &sup)?)
            }
            None => {
                let OperatorMatrix::Dense(s) = self.op.matrix() else {
                    unreachable!("non-tridiagonal operators are dense")
                };
                let w = self.op.sqrt_weights();
                let n = s.nrows();
                let a = DMatrix::from_fn(n, n, |i, j| {
                    let v = dt * s[(i, j)] * w[j] / w[i];
                    if i == j {
                        1.0 + v
                    } else {
                        v
                    }
                });
                let inv = a.try_inverse().ok_or_else(|| Error::Numeric {
                    t: f64::NAN,
                    message: "singular trait sweep".into(),
                })?;
                TraitSolve::Dense(inv.transpose())
            }
        });
        self.cached_dt = dt;
        Ok(())
    }

    /// Advances `field` by `dt` in place.
    pub fn advance(&mut self, field: &mut Field, dt: f64) -> Result<()> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Parameter(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let u = &mut field.u;
        if u.y != *self.op.grid() {
            return Err(Error::GridMismatch(
                "field and operator trait grids differ".into(),
            ));
        }
        let (n_x, n_y) = (u.n_x(), u.n_y());
        if n_x < 3 {
            return Err(Error::GridMismatch("need at least 3 x nodes".into()));
        }
        let h_x = u.x.spacing();
        let b = self.competition(u);
        let limit = self.dt_limit(&b, h_x);
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::Numeric {
                t: field.t,
                message: format!("time step {dt} exceeds the explicit stability limit {limit}"),
            });
        }
        self.prepare(dt, n_x, h_x)?;

        // explicit reaction (1 - b) u
        u.data
            .par_chunks_mut(n_y)
            .zip(b.par_iter())
            .for_each(|(row, bi)| {
                let f = 1.0 + dt * (1.0 - bi);
                row.iter_mut().for_each(|v| *v *= f);
            });

        // comoving frame: u += dt c u_x, upwinded
        let c = self.options.frame_speed;
        if c != 0.0 {
            let nu = c.abs() * dt / h_x;
            let old = u.data.clone();
            let (lo, hi) = if c > 0.0 { (0, n_x - 1) } else { (1, n_x) };
            for i in lo..hi {
                let src = if c > 0.0 { i + 1 } else { i - 1 };
                for j in 0..n_y {
                    u.data[i * n_y + j] = (1.0 - nu) * old[i * n_y + j] + nu * old[src * n_y + j];
                }
            }
        }

        // implicit x sweep with u = 0 at both ends
        u.data[..n_y].iter_mut().for_each(|v| *v = 0.0);
        u.data[(n_x - 1) * n_y..].iter_mut().for_each(|v| *v = 0.0);
        self.x_factor
            .as_ref()
            .expect("prepared")
            .solve_interleaved(&mut u.data, n_y, 1, n_y);

        // implicit trait sweep on the active nodes of every row
        let active = self.op.active();
        match self.y_solve.as_ref().expect("prepared") {
            TraitSolve::Tridiagonal(f) => {
                u.data.par_chunks_mut(n_y).for_each(|row| {
                    f.solve_in_place(&mut row[active.clone()]);
                    row[..active.start].iter_mut().for_each(|v| *v = 0.0);
                    row[active.end..].iter_mut().for_each(|v| *v = 0.0);
                });
            }
            TraitSolve::Dense(inv_t) => {
                let m = active.len();
                let block = DMatrix::from_fn(n_x, m, |i, j| u.data[i * n_y + active.start + j]);
                let solved = block * inv_t;
                for i in 0..n_x {
                    let row = &mut u.data[i * n_y..(i + 1) * n_y];
                    row.iter_mut().for_each(|v| *v = 0.0);
                    for j in 0..m {
                        row[active.start + j] = solved[(i, j)];
                    }
                }
            }
        }

        field.t += dt;
        sanitize(field)
    }
}

/// Clamps rounding-level negatives and rejects anything worse.
fn sanitize(field: &mut Field) -> Result<()> {
    let t = field.t;
    let n_y = field.u.n_y();
    for (k, v) in field.u.data.iter_mut().enumerate() {
        if !v.is_finite() {
            return Err(Error::Numeric {
                t,
                message: format!("non-finite value {v} at node ({}, {})", k / n_y, k % n_y),
            });
        }
        if *v < 0.0 {
            if *v >= -NEGATIVE_TOLERANCE {
                *v = 0.0;
            } else {
                return Err(Error::Numeric {
                    t,
                    message: format!("negative value {v:e} at node ({}, {})", k / n_y, k % n_y),
                });
            }
        }
    }
    Ok(())
}

/// Single step without caching.
pub fn step(
    field: &Field,
    dt: f64,
    op: &DiscreteOperator,
    kernel: &KernelSpec,
    options: StepOptions,
) -> Result<Field> {
    let mut out = field.clone();
    Stepper::new(op, kernel, options)?.advance(&mut out, dt)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{SpaceGrid, TraitGrid};
    use crate::spectral::{assemble_operator, eigenpairs, Boundary, Diffusion, PotentialSpec};
    use crate::wavefront::steady_state;

    fn op(boundary: Boundary) -> DiscreteOperator {
        let y = TraitGrid::new(8.0, 81).unwrap();
        assemble_operator(
            &y,
            &PotentialSpec::harmonic(),
            0.25,
            boundary,
            Diffusion::Standard,
        )
        .unwrap()
    }

    #[test]
    fn zero_stays_zero() {
        let op = op(Boundary::Dirichlet);
        let x = SpaceGrid::new(10.0, 101).unwrap();
        let f = Field {
            t: 0.0,
            u: Field2::zeros(&x, op.grid()),
        };
        let g = step(
            &f,
            0.01,
            &op,
            &KernelSpec::constant(1.0),
            StepOptions::default(),
        )
        .unwrap();
        assert!(g.u.data.iter().all(|v| *v == 0.0));
        assert!((g.t - 0.01).abs() < 1e-15);
    }

    #[test]
    fn linear_mode_growth_one_step() {
        let op = op(Boundary::Dirichlet);
        let basis = eigenpairs(&op, 1).unwrap();
        let x = SpaceGrid::new(10.0, 21).unwrap();
        let ones: Vec<f64> = (0..21)
            .map(|i| if i == 0 || i == 20 { 0.0 } else { 1.0 })
            .collect();
        let f = Field {
            t: 0.0,
            u: Field2::separable(&x, op.grid(), &ones, basis.psi0()).unwrap(),
        };
        let dt = 1e-3;
        let opts = StepOptions {
            forced_b_zero: true,
            ..Default::default()
        };
        let g = step(&f, dt, &op, &KernelSpec::constant(1.0), opts).unwrap();
        let lam = basis.lambda0();
        let j = op.grid().center();
        // centre of the x range is far from the clamps after one step
        let ratio = g.u.at(10, j) / f.u.at(10, j);
        assert!((ratio - (1.0 + dt) / (1.0 + dt * lam)).abs() < 1e-12);
        assert!((ratio - (1.0 + dt * (1.0 - lam))).abs() < 2.0 * dt * dt);
    }

    #[test]
    fn steady_state_is_fixed_in_the_core() {
        for boundary in [Boundary::Dirichlet, Boundary::Neumann] {
            let op = op(boundary);
            let basis = eigenpairs(&op, 1).unwrap();
            let s = steady_state(&basis, &KernelSpec::constant(1.0)).unwrap();
            let x = SpaceGrid::new(20.0, 201).unwrap();
            let a: Vec<f64> = (0..201)
                .map(|i| if i == 0 || i == 200 { 0.0 } else { 1.0 })
                .collect();
            let mut f = Field {
                t: 0.0,
                u: Field2::separable(&x, op.grid(), &a, &s.v).unwrap(),
            };
            let mut st =
                Stepper::new(&op, &KernelSpec::constant(1.0), StepOptions::default()).unwrap();
            for _ in 0..100 {
                st.advance(&mut f, 0.01).unwrap();
            }
            for (j, v) in s.v.iter().enumerate() {
                assert!(
                    (f.u.at(100, j) - v).abs() < 1e-10 * s.max_v(),
                    "{boundary:?}"
                );
            }
        }
    }

    #[test]
    fn rejects_large_steps_and_bad_values() {
        let op = op(Boundary::Dirichlet);
        let x = SpaceGrid::new(10.0, 101).unwrap();
        let f = Field {
            t: 0.0,
            u: Field2::from_fn(&x, op.grid(), |_, _| 0.0),
        };
        assert!(step(
            &f,
            0.6,
            &op,
            &KernelSpec::constant(1.0),
            StepOptions::default()
        )
        .is_err());
        assert!(step(
            &f,
            -0.1,
            &op,
            &KernelSpec::constant(1.0),
            StepOptions::default()
        )
        .is_err());
        let mut bad = f.clone();
        bad.u.data[500] = f64::NAN;
        let err = step(
            &bad,
            0.01,
            &op,
            &KernelSpec::constant(1.0),
            StepOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Numeric { .. }));
        let moving = StepOptions {
            frame_speed: 2.0,
            ..Default::default()
        };
        assert!(step(&f, 0.15, &op, &KernelSpec::constant(1.0), moving).is_err());
    }

    #[test]
    fn fractional_sweep_preserves_positivity() {
        let y = TraitGrid::new(6.0, 61).unwrap();
        let op = assemble_operator(
            &y,
            &PotentialSpec::harmonic(),
            0.25,
            Boundary::Dirichlet,
            Diffusion::Fractional { sigma: 0.5 },
        )
        .unwrap();
        let basis = eigenpairs(&op, 1).unwrap();
        let x = SpaceGrid::new(5.0, 11).unwrap();
        let ones: Vec<f64> = (0..11)
            .map(|i| if i == 0 || i == 10 { 0.0 } else { 1.0 })
            .collect();
        let f = Field {
            t: 0.0,
            u: Field2::separable(&x, &y, &ones, basis.psi0()).unwrap(),
        };
        let opts = StepOptions {
            forced_b_zero: true,
            ..Default::default()
        };
        let g = step(&f, 0.01, &op, &KernelSpec::constant(1.0), opts).unwrap();
        let ratio = g.u.at(5, 30) / f.u.at(5, 30);
        assert!(g.u.data.iter().all(|v| *v >= 0.0));
        assert!(ratio > 1.0 && ratio < 1.01);
    }
}
