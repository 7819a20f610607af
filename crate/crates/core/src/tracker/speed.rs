//! Front traces and least-squares speed estimates.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cauchy::Trajectory;
use crate::error::{Error, Result};
use crate::stats::fit_line;
use crate::tracker::position::{level_crossings, SlicePolicy};

/// Minimum number of front samples inside the fit window.
pub const MIN_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontTrace {
    pub times: Vec<f64>,
    pub left: Vec<Option<f64>>,
    pub right: Vec<Option<f64>>,
    pub theta: f64,
    pub policy: SlicePolicy,
    /// Node spacing, used as the monotonicity slack unit.
    pub spacing: f64,
}

impl FrontTrace {
    pub fn from_trajectory(traj: &Trajectory, theta: f64, policy: SlicePolicy) -> Self {
        let mut times = Vec::with_capacity(traj.slices.len());
        let mut left = Vec::with_capacity(traj.slices.len());
        let mut right = Vec::with_capacity(traj.slices.len());
        for s in &traj.slices {
            let c = level_crossings(traj.x.nodes(), s.profile(policy), theta);
            times.push(s.t);
            left.push(c.map(|p| p.0));
            right.push(c.map(|p| p.1));
        }
        Self {
            times,
            left,
            right,
            theta,
            policy,
            spacing: traj.x.spacing(),
        }
    }

    /// Trace from explicit right-front samples, mirrored to the left.
    pub fn from_samples(times: Vec<f64>, right: Vec<f64>, spacing: f64) -> Self {
        Self {
            left: right.iter().map(|x| Some(-x)).collect(),
            right: right.into_iter().map(Some).collect(),
            times,
            theta: f64::NAN,
            policy: SlicePolicy::Center,
            spacing,
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W, comment: Option<&str>) -> Result<()> {
        if let Some(c) = comment {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "t,x_minus,x_plus")?;
        let fmt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |x| format!("{x:e}"));
        for ((t, l), r) in self.times.iter().zip(&self.left).zip(&self.right) {
            writeln!(out, "{t:e},{},{}", fmt(*l), fmt(*r))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    /// Mean of the right and left speeds.
    pub c_hat: f64,
    pub c_right: f64,
    pub c_left: f64,
    pub t1: f64,
    pub t2: f64,
    /// Larger of the two fit RMS residuals.
    pub residual: f64,
    /// Standard error of `c_hat`.
    pub stderr: f64,
    pub samples: usize,
    pub warnings: Vec<String>,
}

impl SpeedEstimate {
    pub fn write_csv<W: Write>(&self, mut out: W, comment: Option<&str>) -> Result<()> {
        if let Some(c) = comment {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "c_hat,c_right,c_left,t1,t2,residual,stderr,samples")?;
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{}",
            self.c_hat,
            self.c_right,
            self.c_left,
            self.t1,
            self.t2,
            self.residual,
            self.stderr,
            self.samples
        )?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SpeedOutcome {
    Estimate(SpeedEstimate),
    /// The level set is empty at the end of the window (extinction).
    NoFront,
    /// Too few samples to fit, e.g. a zero-length run.
    NoData {
        samples: usize,
    },
}

impl SpeedOutcome {
    pub fn estimate(&self) -> Option<&SpeedEstimate> {
        match self {
            SpeedOutcome::Estimate(e) => Some(e),
            _ => None,
        }
    }
}

/// Fits `X_+(t)` and `-X_-(t)` over `[window_fraction T, T]`.
pub fn estimate_speed(trace: &FrontTrace, window_fraction: f64) -> Result<SpeedOutcome> {
    if !(0.0..1.0).contains(&window_fraction) {
        return Err(Error::Parameter(format!(
            "window fraction must lie in [0, 1), got {window_fraction}"
        )));
    }
    let Some(&t_end) = trace.times.last() else {
        return Ok(SpeedOutcome::NoData { samples: 0 });
    };
    let t_start = trace.times[0];
    let t1 = t_start + window_fraction * (t_end - t_start);
    let idx: Vec<usize> = (0..trace.times.len())
        .filter(|&k| trace.times[k] >= t1)
        .collect();
    if trace.right.last().copied().flatten().is_none() {
        return Ok(SpeedOutcome::NoFront);
    }
    let valid: Vec<usize> = idx
        .iter()
        .copied()
        .filter(|&k| trace.right[k].is_some() && trace.left[k].is_some())
        .collect();
    if valid.len() < MIN_SAMPLES {
        return Ok(SpeedOutcome::NoData {
            samples: valid.len(),
        });
    }
    let t: Vec<f64> = valid.iter().map(|&k| trace.times[k]).collect();
    let xr: Vec<f64> = valid
        .iter()
        .map(|&k| trace.right[k].expect("valid"))
        .collect();
    let xl: Vec<f64> = valid
        .iter()
        .map(|&k| -trace.left[k].expect("valid"))
        .collect();
    let fr = fit_line(&t, &xr).ok_or_else(|| Error::Parameter("degenerate fit window".into()))?;
    let fl = fit_line(&t, &xl).ok_or_else(|| Error::Parameter("degenerate fit window".into()))?;

    let mut warnings = Vec::new();
    let slack = 2.0 * trace.spacing;
    for (name, series) in [("right", &xr), ("left", &xl)] {
        let mut running = f64::NEG_INFINITY;
        for (x, tk) in series.iter().zip(&t) {
            if *x < running - slack {
                warnings.push(format!(
                    "{name} front recedes by more than 2 h_x at t = {tk:.3}"
                ));
                break;
            }
            running = running.max(*x);
        }
    }
    Ok(SpeedOutcome::Estimate(SpeedEstimate {
        c_hat: 0.5 * (fr.slope + fl.slope),
        c_right: fr.slope,
        c_left: fl.slope,
        t1: t[0],
        t2: *t.last().expect("nonempty"),
        residual: fr.rms.max(fl.rms),
        stderr: 0.5 * (fr.slope_stderr.powi(2) + fl.slope_stderr.powi(2)).sqrt(),
        samples: t.len(),
        warnings,
    }))
}
