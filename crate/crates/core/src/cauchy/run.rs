//! Time integration with diagnostics and a priori bound checks.

use std::io::Write;
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::cauchy::initial::InitialField;
use crate::cauchy::modes::max_mode_amplitudes;
use crate::cauchy::stepper::{StepOptions, Stepper};
use crate::cauchy::Field;
use crate::error::{Error, Result};
use crate::field::{write_field_dump, FieldSidecar};
use crate::grid::{SpaceGrid, TraitGrid};
use crate::spectral::{DiscreteOperator, KernelSpec, SpectralBasis};
use crate::tracker::{level_crossings, SlicePolicy};
use crate::wavefront::SteadyState;

/// Number of mode columns in the diagnostics table.
pub const DIAGNOSTIC_MODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DtPolicy {
    /// `min(h_x^2, 0.5 / max|1 - b|)`, optionally capped further.
    Adaptive {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        max: Option<f64>,
    },
    Fixed {
        dt: f64,
    },
}

impl Default for DtPolicy {
    fn default() -> Self {
        DtPolicy::Adaptive { max: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub t_final: f64,
    pub dt: DtPolicy,
    /// Spacing of diagnostic samples; steps are shortened to land on them.
    pub diag_interval: f64,
    /// Approximate number of stored snapshots besides the initial one.
    pub snapshots: usize,
    pub step: StepOptions,
    /// Front level; defaults to `0.01 max V`.
    pub theta: Option<f64>,
    /// Rate of the exponential trait envelope checked at the final time.
    pub envelope_gamma: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            t_final: 10.0,
            dt: DtPolicy::default(),
            diag_interval: 0.5,
            snapshots: 24,
            step: StepOptions::default(),
            theta: None,
            envelope_gamma: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub t: f64,
    pub sup_u: f64,
    pub max_b: f64,
    pub min_b: f64,
    /// Right front on the `y = 0` slice.
    pub front: Option<f64>,
    /// `max_x |v_i|` for the leading modes.
    pub modes: Vec<f64>,
}

/// Space profiles recorded at each diagnostic time.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub t: f64,
    pub center: Vec<f64>,
    pub max_y: Vec<f64>,
    /// `max_y |u - V|`, when a positive steady state is known.
    pub deviation: Option<Vec<f64>>,
}

impl Slice {
    pub fn profile(&self, policy: SlicePolicy) -> &[f64] {
        match policy {
            SlicePolicy::Center => &self.center,
            SlicePolicy::MaxOverY => &self.max_y,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `u <= C_0 e^{(1 - lambda_0) t} psi_0`, in its time-discrete form.
    Comparison,
    /// `sup u <= M`, with `M` three times the first-quarter maximum.
    Uniform,
    /// Exponential decay in `y` at the final time.
    Envelope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundViolation {
    pub t: f64,
    pub kind: BoundKind,
    /// Relative excess over the bound.
    pub excess: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub x: SpaceGrid,
    pub y: TraitGrid,
    pub lambda0: f64,
    pub mu: f64,
    pub theta: f64,
    pub c0: f64,
    pub frame_speed: f64,
    pub snapshots: Vec<Field>,
    pub diagnostics: Vec<Diagnostic>,
    pub slices: Vec<Slice>,
    /// Comparison-bound violations are counted; only the worst is kept.
    pub violations: Vec<BoundViolation>,
    pub comparison_violations: usize,
    /// Empirical uniform bound, when the check applies.
    pub uniform_bound: Option<f64>,
    /// Largest `u / (F(t) C_0 psi_0)` seen over the run.
    pub comparison_ratio: f64,
    pub warnings: Vec<String>,
    pub steps: usize,
}

impl Trajectory {
    pub fn final_field(&self) -> &Field {
        self.snapshots
            .last()
            .expect("trajectory has the initial snapshot")
    }

    pub fn times(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|d| d.t).collect()
    }

    /// Diagnostics table with header `t,sup_u,max_b,front_pos_theta,mode_0..mode_7`.
    pub fn write_diagnostics_csv<W: Write>(&self, mut out: W, comment: Option<&str>) -> Result<()> {
        if let Some(c) = comment {
            writeln!(out, "# {c}")?;
        }
        write!(out, "t,sup_u,max_b,front_pos_theta")?;
        for i in 0..DIAGNOSTIC_MODES {
            write!(out, ",mode_{i}")?;
        }
        writeln!(out)?;
        for d in &self.diagnostics {
            write!(out, "{:e},{:e},{:e},", d.t, d.sup_u, d.max_b)?;
            match d.front {
                Some(x) => write!(out, "{x:e}")?,
                None => write!(out, "nan")?,
            }
            for i in 0..DIAGNOSTIC_MODES {
                match d.modes.get(i) {
                    Some(v) => write!(out, ",{v:e}")?,
                    None => write!(out, ",nan")?,
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Writes `snapshot_NNNN.bin` / `.json` pairs into `dir`.
    pub fn write_snapshots(&self, dir: &Path, config_hash: Option<&str>) -> Result<()> {
        for (k, snap) in self.snapshots.iter().enumerate() {
            let sidecar = FieldSidecar {
                t: Some(snap.t),
                config_hash: config_hash.map(str::to_owned),
                ..FieldSidecar::for_field(&snap.u)
            };
            write_field_dump(dir, &format!("snapshot_{k:04}"), &snap.u, &sidecar)?;
        }
        Ok(())
    }
}

/// Everything the integrator needs besides the initial data.
pub struct RunContext<'a> {
    pub op: &'a DiscreteOperator,
    pub basis: &'a SpectralBasis,
    pub kernel: &'a KernelSpec,
    pub steady: Option<&'a SteadyState>,
}

fn kernel_bounded_below(kernel: &KernelSpec, samples: &[f64], y: &TraitGrid) -> bool {
    match kernel.check_lower_bound(y) {
        Ok(true) => true,
        Ok(false) => samples[1..samples.len() - 1].iter().all(|k| *k > 0.0),
        Err(_) => false,
    }
}

/// Smallest `C` with `m(y) <= C max(m) e^{-gamma |y|}`.
fn envelope_constant(profile: &[f64], nodes: &[f64], gamma: f64) -> Option<f64> {
    let peak = profile.iter().cloned().fold(0.0, f64::max);
    (peak > 0.0).then(|| {
        profile
            .iter()
            .zip(nodes)
            .map(|(m, y)| m / peak * (gamma * y.abs()).exp())
            .fold(0.0, f64::max)
    })
}

/// Integrates from `init` to `opts.t_final`.
pub fn run(init: &InitialField, ctx: &RunContext<'_>, opts: &RunOptions) -> Result<Trajectory> {
    let RunContext {
        op,
        basis,
        kernel,
        steady,
    } = *ctx;
    if !(opts.t_final >= 0.0 && opts.t_final.is_finite()) {
        return Err(Error::Parameter(format!(
            "final time must be nonnegative, got {}",
            opts.t_final
        )));
    }
    if !(opts.diag_interval > 0.0) {
        return Err(Error::Parameter(
            "diagnostic interval must be positive".into(),
        ));
    }
    match opts.dt {
        DtPolicy::Fixed { dt } if !(dt > 0.0 && dt.is_finite()) => {
            return Err(Error::Parameter(format!(
                "time step must be positive, got {dt}"
            )));
        }
        DtPolicy::Adaptive { max: Some(m) } if !(m > 0.0) => {
            return Err(Error::Parameter(format!(
                "time step cap must be positive, got {m}"
            )));
        }
        _ => {}
    }
    if basis.grid != *op.grid() || init.field.u.y != *op.grid() {
        return Err(Error::GridMismatch(
            "operator, basis and field trait grids differ".into(),
        ));
    }

    let mut stepper = Stepper::new(op, kernel, opts.step)?;
    let x = init.field.u.x.clone();
    let y = op.grid().clone();
    let (n_x, n_y) = (x.len(), y.len());
    let h_x = x.spacing();
    let lambda0 = basis.lambda0();
    let psi0 = basis.psi0().to_vec();
    let psi_max = psi0.iter().cloned().fold(0.0, f64::max);
    let mode_count = DIAGNOSTIC_MODES.min(basis.len());
    let v = steady.filter(|s| !s.is_extinct());
    let mu = v.map_or(0.0, |s| s.mu);

    let theta = match opts.theta {
        Some(t) if t > 0.0 => t,
        Some(t) => {
            return Err(Error::Parameter(format!(
                "front level must be positive, got {t}"
            )))
        }
        None => match v {
            Some(s) => 0.01 * s.max_v(),
            None => 0.01 * init.field.u.sup(),
        },
    };
    let diffusion_length = 1.0 / (1.0 - lambda0).abs().max(1e-2).sqrt();
    let safe_edge = x.half_width() - 5.0 * diffusion_length;

    let uniform_active = !opts.step.forced_b_zero
        && lambda0 < 1.0
        && kernel_bounded_below(kernel, stepper.kernel(), &y);
    let quarter = 0.25 * opts.t_final;

    let n_diag = (opts.t_final / opts.diag_interval).ceil().max(0.0) as usize;
    let stride = (n_diag as f64 / opts.snapshots.max(1) as f64)
        .ceil()
        .max(1.0) as usize;

    let mut field = init.field.clone();
    let mut traj = Trajectory {
        x: x.clone(),
        y: y.clone(),
        lambda0,
        mu,
        theta,
        c0: init.c0,
        frame_speed: opts.step.frame_speed,
        snapshots: vec![field.clone()],
        diagnostics: Vec::new(),
        slices: Vec::new(),
        violations: Vec::new(),
        comparison_violations: 0,
        uniform_bound: None,
        comparison_ratio: 0.0,
        warnings: Vec::new(),
        steps: 0,
    };
    let mut margin_warned = false;
    let mut first_quarter_max = 0.0f64;

    let kernel_samples = stepper.kernel().to_vec();
    let record = |field: &Field, traj: &mut Trajectory, margin_warned: &mut bool| -> Result<()> {
        let u = &field.u;
        let b = if opts.step.forced_b_zero {
            vec![0.0; n_x]
        } else {
            u.competition(&kernel_samples)
        };
        let center = u.column(y.center());
        let max_y: Vec<f64> = u
            .rows()
            .map(|r| r.iter().cloned().fold(0.0, f64::max))
            .collect();
        let deviation = v.map(|s| {
            u.rows()
                .map(|r| {
                    r.iter()
                        .zip(&s.v)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max)
                })
                .collect::<Vec<f64>>()
        });
        let front = level_crossings(x.nodes(), &center, theta).map(|(_, r)| r);
        if !*margin_warned {
            if let Some((l, r)) = level_crossings(x.nodes(), &max_y, theta) {
                if r > safe_edge || l < -safe_edge {
                    let msg = format!(
                        "front within 5 diffusion lengths of the x boundary at t = {:.3} (X = [{l:.2}, {r:.2}])",
                        field.t
                    );
                    warn!("{msg}");
                    traj.warnings.push(msg);
                    *margin_warned = true;
                }
            }
        }
        traj.diagnostics.push(Diagnostic {
            t: field.t,
            sup_u: u.sup(),
            max_b: b.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            min_b: b.iter().cloned().fold(f64::INFINITY, f64::min),
            front,
            modes: max_mode_amplitudes(u, basis, mode_count)?,
        });
        traj.slices.push(Slice {
            t: field.t,
            center,
            max_y,
            deviation,
        });
        Ok(())
    };

    record(&field, &mut traj, &mut margin_warned)?;
    first_quarter_max = first_quarter_max.max(field.u.sup());

    // discrete counterpart of e^{(1 - lambda_0) t}
    let mut growth = 1.0f64;
    for k in 1..=n_diag {
        let target = (k as f64 * opts.diag_interval).min(opts.t_final);
        while field.t < target {
            let remaining = target - field.t;
            let cap = match opts.dt {
                DtPolicy::Fixed { dt } => dt,
                DtPolicy::Adaptive { max } => {
                    let b = stepper.competition(&field.u);
                    let limit = stepper.dt_limit(&b, h_x);
                    (h_x * h_x).min(limit).min(max.unwrap_or(f64::INFINITY))
                }
            };
            let pieces = (remaining / cap - 1e-9).ceil().max(1.0);
            let dt = if pieces <= 1.0 {
                remaining
            } else {
                remaining / pieces
            };
            let t_before = field.t;
            stepper.advance(&mut field, dt)?;
            traj.steps += 1;
            if pieces <= 1.0 {
                // land exactly on the diagnostic time
                field.t = target;
            } else {
                field.t = t_before + dt;
            }
            growth *= (1.0 + dt) / (1.0 + dt * lambda0);

            let scale = growth * init.c0;
            let slack = 1e-12 * scale * psi_max;
            let mut worst = 0.0f64;
            for row in field.u.rows() {
                for (u, p) in row.iter().zip(&psi0) {
                    let bound = scale * p;
                    if *u > bound * (1.0 + 1e-6) + slack {
                        worst = worst.max((u - bound) / (bound + slack));
                    }
                    if bound > 0.0 {
                        traj.comparison_ratio = traj.comparison_ratio.max(u / bound);
                    }
                }
            }
            if worst > 0.0 {
                traj.comparison_violations += 1;
                let replace = traj
                    .violations
                    .iter()
                    .position(|v| v.kind == BoundKind::Comparison);
                let entry = BoundViolation {
                    t: field.t,
                    kind: BoundKind::Comparison,
                    excess: worst,
                };
                match replace {
                    Some(i) if traj.violations[i].excess < worst => traj.violations[i] = entry,
                    Some(_) => {}
                    None => traj.violations.push(entry),
                }
            }
        }
        debug_assert!(field.u.n_x() == n_x && field.u.n_y() == n_y);
        record(&field, &mut traj, &mut margin_warned)?;
        let sup = field.u.sup();
        if field.t <= quarter {
            first_quarter_max = first_quarter_max.max(sup);
        } else if uniform_active {
            let m = 3.0 * first_quarter_max;
            traj.uniform_bound = Some(m);
            if sup > m {
                traj.violations.push(BoundViolation {
                    t: field.t,
                    kind: BoundKind::Uniform,
                    excess: sup / m - 1.0,
                });
            }
        }
        if k % stride == 0 || k == n_diag {
            traj.snapshots.push(field.clone());
        }
    }

    // trait envelope at the final time, relative to that of psi_0
    let m_final: Vec<f64> = (0..n_y)
        .map(|j| field.u.rows().map(|r| r[j]).fold(0.0, f64::max))
        .collect();
    if let (Some(c_final), Some(c_ref)) = (
        envelope_constant(&m_final, y.nodes(), opts.envelope_gamma),
        envelope_constant(&psi0, y.nodes(), opts.envelope_gamma),
    ) {
        if c_final > 10.0 * c_ref {
            traj.violations.push(BoundViolation {
                t: field.t,
                kind: BoundKind::Envelope,
                excess: c_final / (10.0 * c_ref) - 1.0,
            });
        }
    }
    if traj.comparison_violations > 0 {
        traj.warnings.push(format!(
            "comparison bound exceeded on {} steps",
            traj.comparison_violations
        ));
    }
    Ok(traj)
}
