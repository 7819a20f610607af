//! Sup-norms over the space-time cones `|x| <= c t` and `|x| >= c t`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::cauchy::Trajectory;
use crate::error::{Error, Result};
use crate::grid::SpaceGrid;
use crate::stats::fit_line;
use crate::wavefront::SteadyState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeSeries {
    pub c: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Samples whose region misses the grid entirely.
    pub empty: Vec<bool>,
    pub warnings: Vec<String>,
}

impl ConeSeries {
    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }

    /// True when the series does not increase over `t >= t_from`, up to `rel` relative slack.
    pub fn nonincreasing_from(&self, t_from: f64, rel: f64) -> bool {
        let vals: Vec<f64> = self
            .times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t >= t_from)
            .map(|(_, v)| *v)
            .collect();
        vals.windows(2).all(|w| w[1] <= w[0] * (1.0 + rel))
    }

    pub fn write_csv<W: Write>(&self, mut out: W, comment: Option<&str>) -> Result<()> {
        if let Some(c) = comment {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "t,value,region_empty")?;
        for ((t, v), e) in self.times.iter().zip(&self.values).zip(&self.empty) {
            writeln!(out, "{t:e},{v:e},{}", u8::from(*e))?;
        }
        Ok(())
    }
}

fn interpolate(x: &SpaceGrid, f: &[f64], at: f64) -> Option<f64> {
    (at.abs() <= x.half_width()).then(|| x.interpolate(f, at))
}

/// `sup_{|x| <= r} f`, with interpolated values at `x = ±r`.
fn sup_inside(x: &SpaceGrid, f: &[f64], r: f64) -> f64 {
    let mut m = x
        .nodes()
        .iter()
        .zip(f)
        .filter(|(xi, _)| xi.abs() <= r)
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);
    for edge in [-r, r] {
        if let Some(v) = interpolate(x, f, edge) {
            m = m.max(v);
        }
    }
    m
}

/// `sup_{x >= r}` (and `x <= -r` when `both_sides`), or `None` when the region misses the grid.
fn sup_outside(x: &SpaceGrid, f: &[f64], r: f64, both_sides: bool) -> Option<f64> {
    if r > x.half_width() {
        return None;
    }
    let mut m = x
        .nodes()
        .iter()
        .zip(f)
        .filter(|(xi, _)| **xi >= r || (both_sides && **xi <= -r))
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);
    let edges: &[f64] = if both_sides { &[-r, r] } else { &[r] };
    for &edge in edges {
        if let Some(v) = interpolate(x, f, edge) {
            m = m.max(v);
        }
    }
    Some(m)
}

fn safe_radius(traj: &Trajectory) -> f64 {
    traj.x.half_width() - 5.0 / (1.0 - traj.lambda0).abs().max(1e-2).sqrt()
}

/// `sup_{|x| <= c t} max_y |u - V|` at every diagnostic time, for `0 <= c < c*`.
pub fn invasion_profile_error(
    traj: &Trajectory,
    steady: &SteadyState,
    c: f64,
    c_star: f64,
) -> Result<ConeSeries> {
    if !(c >= 0.0 && c < c_star) {
        return Err(Error::Parameter(format!(
            "cone speed {c} must lie in [0, c* = {c_star})"
        )));
    }
    if steady.is_extinct() || (steady.mu - traj.mu).abs() > 1e-12 * steady.mu {
        return Err(Error::Validation(
            "trajectory was not run against this steady state".into(),
        ));
    }
    let safe = safe_radius(traj);
    let mut out = ConeSeries {
        c,
        times: Vec::new(),
        values: Vec::new(),
        empty: Vec::new(),
        warnings: Vec::new(),
    };
    for s in &traj.slices {
        let dev = s.deviation.as_ref().ok_or_else(|| {
            Error::Validation("trajectory carries no steady-state deviation".into())
        })?;
        let mut r = c * s.t;
        if r > safe {
            if out.warnings.is_empty() {
                out.warnings.push(format!(
                    "cone truncated to the safe region |x| <= {safe:.2} from t = {:.3}",
                    s.t
                ));
            }
            r = safe;
        }
        out.times.push(s.t);
        out.values.push(sup_inside(&traj.x, dev, r));
        out.empty.push(false);
    }
    Ok(out)
}

/// `sup_{|x| <= radius} max_y |u - V|` at every diagnostic time.
pub fn core_deviation(traj: &Trajectory, radius: f64) -> Result<ConeSeries> {
    let mut out = ConeSeries {
        c: 0.0,
        times: Vec::new(),
        values: Vec::new(),
        empty: Vec::new(),
        warnings: Vec::new(),
    };
    for s in &traj.slices {
        let dev = s.deviation.as_ref().ok_or_else(|| {
            Error::Validation("trajectory carries no steady-state deviation".into())
        })?;
        out.times.push(s.t);
        out.values.push(sup_inside(&traj.x, dev, radius));
        out.empty.push(false);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Emptiness {
    /// `sup_{|x| >= c t} max_y u`.
    pub two_sided: ConeSeries,
    /// `sup_{x >= c t} max_y u`.
    pub right: ConeSeries,
}

/// Sup of `u` beyond the cone `|x| = c t`, for `c > c*`.
pub fn emptiness_beyond(traj: &Trajectory, c: f64, c_star: f64) -> Result<Emptiness> {
    if !(c > c_star) {
        return Err(Error::Parameter(format!(
            "cone speed {c} must exceed c* = {c_star}"
        )));
    }
    let blank = || ConeSeries {
        c,
        times: Vec::new(),
        values: Vec::new(),
        empty: Vec::new(),
        warnings: Vec::new(),
    };
    let (mut two, mut right) = (blank(), blank());
    for s in &traj.slices {
        let r = c * s.t;
        for (series, both) in [(&mut two, true), (&mut right, false)] {
            let v = sup_outside(&traj.x, &s.max_y, r, both);
            series.times.push(s.t);
            series.values.push(v.unwrap_or(0.0));
            series.empty.push(v.is_none());
        }
    }
    if two.empty.iter().any(|e| *e) {
        two.warnings
            .push("region beyond the cone leaves the grid".into());
        right
            .warnings
            .push("region beyond the cone leaves the grid".into());
    }
    Ok(Emptiness {
        two_sided: two,
        right,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeForecast {
    pub t_fit: f64,
    /// Fitted `M_3`.
    pub m3: f64,
    /// `(c*/2)(c - c*)`.
    pub rate: f64,
    /// Worst ratio of measured value to forecast over `t >= t_fit`.
    pub worst_ratio: f64,
}

impl EnvelopeForecast {
    pub fn holds(&self, tolerance: f64) -> bool {
        self.worst_ratio <= 1.0 + tolerance
    }
}

/// Fits `M_3` in `s(t) <= M_3 e^{-(c*/2)(c - c*) t} max V` at the first sample with `t >= t_fit`,
/// then checks the forecast on all later samples.
pub fn envelope_forecast(
    series: &ConeSeries,
    c_star: f64,
    max_v: f64,
    t_fit: f64,
) -> Result<EnvelopeForecast> {
    let rate = 0.5 * c_star * (series.c - c_star);
    let k = series
        .times
        .iter()
        .position(|t| *t >= t_fit)
        .ok_or_else(|| Error::Parameter(format!("no samples after t = {t_fit}")))?;
    let t0 = series.times[k];
    let m3 = series.values[k] / ((-rate * t0).exp() * max_v);
    let mut worst = 0.0f64;
    for (t, v) in series.times[k..].iter().zip(&series.values[k..]) {
        let forecast = m3 * (-rate * t).exp() * max_v;
        if forecast > 0.0 {
            worst = worst.max(v / forecast);
        } else if *v > 0.0 {
            worst = f64::INFINITY;
        }
    }
    Ok(EnvelopeForecast {
        t_fit: t0,
        m3,
        rate,
        worst_ratio: worst,
    })
}

/// Exponential decay rate of `sup u` fitted over `[window_fraction T, T]`.
pub fn fit_decay_rate(traj: &Trajectory, window_fraction: f64) -> Option<f64> {
    let t_end = traj.diagnostics.last()?.t;
    let (t, y): (Vec<f64>, Vec<f64>) = traj
        .diagnostics
        .iter()
        .filter(|d| d.t >= window_fraction * t_end && d.sup_u > 0.0)
        .map(|d| (d.t, d.sup_u.ln()))
        .unzip();
    fit_line(&t, &y).map(|f| -f.slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inside_and_outside_sups() {
        let x = SpaceGrid::new(5.0, 11).unwrap();
        let f: Vec<f64> = x.nodes().iter().map(|v| v.abs()).collect();
        assert!((sup_inside(&x, &f, 2.5) - 2.5).abs() < 1e-14);
        assert!((sup_outside(&x, &f, 2.5, true).unwrap() - 5.0).abs() < 1e-14);
        assert!(sup_outside(&x, &f, 6.0, true).is_none());
        let g: Vec<f64> = x.nodes().iter().map(|v| (-v.abs()).exp()).collect();
        // decreasing away from 0: the sup beyond the cone sits at its edge
        let edge = sup_outside(&x, &g, 2.5, false).unwrap();
        assert!((edge - x.interpolate(&g, 2.5)).abs() < 1e-15);
    }

    #[test]
    fn forecast_of_exact_exponential() {
        let c_star = 2f64.sqrt();
        let c = 1.2 * c_star;
        let rate = 0.5 * c_star * (c - c_star);
        let times: Vec<f64> = (0..50).map(|k| k as f64).collect();
        let values: Vec<f64> = times
            .iter()
            .map(|t| 0.3 * (-1.1 * rate * t).exp())
            .collect();
        let s = ConeSeries {
            c,
            empty: vec![false; values.len()],
            times,
            values,
            warnings: vec![],
        };
        let f = envelope_forecast(&s, c_star, 1.0, 12.0).unwrap();
        assert!(f.holds(0.1));
        assert!((f.worst_ratio - 1.0).abs() < 1e-12);
        assert!(s.nonincreasing_from(0.0, 0.0));
    }
}
