//! Scalar KPP front `-v'' - c v' = r v (1 - v)` with `r = 1 - lambda_0`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::SpaceGrid;
use crate::linalg::PivotedTridiagonal;
use crate::stats::fit_line;
use crate::wavefront::rates::{critical_speed, decay_rates, ModeRates};

/// Relative slack when comparing `c` with `c*`.
const SPEED_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    /// Stop once the sup-norm of the discrete equations drops below this.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Smallest damping factor tried before giving up.
    pub min_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 100,
            min_step: 1.0 / 1024.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileResidual {
    pub newton_residual: f64,
    pub iterations: usize,
    /// Fast rates of the modes attached with [`WaveProfile::with_modes`].
    pub gamma_tilde: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveProfile {
    pub speed: f64,
    pub lambda0: f64,
    #[serde(skip)]
    pub grid: Option<SpaceGrid>,
    pub v: Vec<f64>,
    pub gamma0: f64,
    pub gammas: Vec<ModeRates>,
    pub residual: ProfileResidual,
}

impl WaveProfile {
    pub fn grid(&self) -> &SpaceGrid {
        self.grid.as_ref().expect("profile grid")
    }

    /// Attaches the decay rates of the higher trait modes.
    pub fn with_modes(mut self, lambdas: &[f64]) -> Self {
        self.gammas = decay_rates(self.speed, lambdas);
        self.residual.gamma_tilde = self.gammas.iter().map(|r| r.gamma_tilde()).collect();
        self
    }

    /// Largest upward step `max_i (v_{i+1} - v_i)`, nonpositive for a monotone profile.
    pub fn monotonicity_defect(&self) -> f64 {
        self.v
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Exponential rate fitted to `log v` where `1e-12 <= v <= 1e-4` on `x > 0`.
    pub fn fitted_tail_rate(&self) -> Option<f64> {
        let (xs, ys): (Vec<f64>, Vec<f64>) = self
            .grid()
            .nodes()
            .iter()
            .zip(&self.v)
            .filter(|(x, v)| **x > 0.0 && **v >= 1e-12 && **v <= 1e-4)
            .map(|(x, v)| (*x, v.ln()))
            .unzip();
        if xs.len() < 5 {
            return None;
        }
        fit_line(&xs, &ys).map(|f| -f.slope)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,v")?;
        for (x, v) in self.grid().nodes().iter().zip(&self.v) {
            writeln!(out, "{x:.17e},{v:.17e}")?;
        }
        Ok(())
    }
}

/// Half-width `40 / gamma_0` over which the tail decays far below the clamps.
pub fn default_half_width(c: f64, lambda0: f64) -> Result<f64> {
    let gamma0 = slow_rate(c, lambda0)?;
    Ok(40.0 / gamma0)
}

fn slow_rate(c: f64, lambda0: f64) -> Result<f64> {
    let c_star = critical_speed(lambda0)?;
    if !(c >= c_star * (1.0 - SPEED_SLACK)) {
        return Err(Error::BelowCriticalSpeed { c, c_star });
    }
    Ok(decay_rates(c.max(c_star), &[lambda0])[0]
        .gamma()
        .expect("real rates at or above c*"))
}

/// Front connecting `v = 1` at `-L_x` to `v = 0` at `+L_x`, normalized by `v(0) = 1/2`.
///
/// Damped Newton on the centred second-order discretization. The midpoint
/// condition takes the place of a right clamp: it removes the translation
/// mode that makes the two-clamp problem nearly singular on long domains.
pub fn solve_kpp_profile(c: f64, lambda0: f64, half_width: f64, n_x: usize) -> Result<WaveProfile> {
    let grid = SpaceGrid::new(half_width, n_x)?;
    let gamma0 = slow_rate(c, lambda0)?;
    let guess: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|x| 0.5 * (1.0 - (0.5 * gamma0 * x).tanh()))
        .collect();
    solve_kpp_profile_from(c, lambda0, &grid, guess, &NewtonOptions::default())
}

pub fn solve_kpp_profile_from(
    c: f64,
    lambda0: f64,
    grid: &SpaceGrid,
    mut v: Vec<f64>,
    opts: &NewtonOptions,
) -> Result<WaveProfile> {
    let gamma0 = slow_rate(c, lambda0)?;
    let r = 1.0 - lambda0;
    let n = grid.len();
    let h = grid.spacing();
    if v.len() != n {
        return Err(Error::GridMismatch(format!(
            "initial guess has {} values on {n} nodes",
            v.len()
        )));
    }
    if 0.5 * c * h >= 1.0 {
        return Err(Error::Parameter(format!(
            "grid too coarse for speed {c}: c h / 2 = {} >= 1",
            0.5 * c * h
        )));
    }
    let m = grid.center();
    v[0] = 1.0;
    v[m] = 0.5;

    let lower = 1.0 / (h * h) - 0.5 * c / h;
    let upper = 1.0 / (h * h) + 0.5 * c / h;
    let equations = |v: &[f64], f: &mut [f64]| -> f64 {
        let mut norm = 0.0f64;
        for i in 1..n - 1 {
            let fi = -lower * v[i - 1] + 2.0 / (h * h) * v[i]
                - upper * v[i + 1]
                - r * v[i] * (1.0 - v[i]);
            f[i] = fi;
            norm = norm.max(fi.abs());
        }
        norm
    };

    let mut f = vec![0.0; n];
    let mut trial_f = vec![0.0; n];
    let mut norm = equations(&v, &mut f);
    let mut iterations = 0;
    let mut delta = vec![0.0; n];
    while norm >= opts.tolerance {
        if iterations >= opts.max_iterations || !norm.is_finite() {
            return Err(Error::Newton {
                iterations,
                residual: norm,
            });
        }
        // Jacobian row i: -lower, 2/h^2 - r (1 - 2 v_i), -upper.
        // Unknowns left of the midpoint form a tridiagonal block with both
        // ends pinned; the rest follow by marching the remaining equations.
        delta.iter_mut().for_each(|d| *d = 0.0);
        if m > 1 {
            let k = m - 1;
            let diag: Vec<f64> = (1..m)
                .map(|i| 2.0 / (h * h) - r * (1.0 - 2.0 * v[i]))
                .collect();
            let lu =
                PivotedTridiagonal::new(&vec![-lower; k - 1], &diag, &vec![-upper; k - 1], 1e-300);
            let mut rhs: Vec<f64> = (1..m).map(|i| -f[i]).collect();
            lu.solve_in_place(&mut rhs);
            delta[1..m].copy_from_slice(&rhs);
        }
        for i in m..n - 1 {
            let b = 2.0 / (h * h) - r * (1.0 - 2.0 * v[i]);
            delta[i + 1] = (-f[i] + lower * delta[i - 1] - b * delta[i]) / -upper;
        }

        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = v.iter().zip(&delta).map(|(a, d)| a + step * d).collect();
            let trial_norm = equations(&trial, &mut trial_f);
            if trial_norm.is_finite() && trial_norm < (1.0 - 1e-4 * step) * norm {
                v = trial;
                std::mem::swap(&mut f, &mut trial_f);
                norm = trial_norm;
                break;
            }
            step *= 0.5;
            if step < opts.min_step {
                return Err(Error::Newton {
                    iterations,
                    residual: norm,
                });
            }
        }
        iterations += 1;
    }

    // rounding-level excursions outside [0, 1]
    for x in v.iter_mut() {
        if *x < 0.0 && *x >= -1e-12 {
            *x = 0.0;
        } else if *x > 1.0 && *x <= 1.0 + 1e-12 {
            *x = 1.0;
        }
    }
    if let Some((i, bad)) = v
        .iter()
        .enumerate()
        .find(|(_, x)| !(-1e-12..=1.0 + 1e-12).contains(*x))
    {
        return Err(Error::Validation(format!(
            "front leaves [0, 1] at x = {}: v = {bad}",
            grid.nodes()[i]
        )));
    }
    let right = v[n - 1];
    if right > 1e-3 {
        return Err(Error::Parameter(format!(
            "half-width {} too short for c = {c}: v(L_x) = {right:e} > 1e-3",
            grid.half_width()
        )));
    }

    Ok(WaveProfile {
        speed: c,
        lambda0,
        grid: Some(grid.clone()),
        v,
        gamma0,
        gammas: vec![ModeRates::Real {
            gamma: gamma0,
            gamma_tilde: decay_rates(c.max(critical_speed(lambda0)?), &[lambda0])[0]
                .gamma_tilde()
                .expect("real rates"),
        }],
        residual: ProfileResidual {
            newton_residual: norm,
            iterations,
            gamma_tilde: Vec::new(),
        },
    })
}
