//! Subcommand implementations shared by the CLI and the tests.

use std::path::Path;

use log::info;
use serde::Serialize;
use serde_json::{json, Value};

use crate::cauchy::{
    init_field, run, AmplitudeUnit, BumpSpec, InitialData, RunContext, RunOptions, StepOptions,
    Trajectory,
};
use crate::error::{Error, Result};
use crate::grid::{SpaceGrid, TraitGrid};
use crate::harness::artifacts::ArtifactWriter;
use crate::harness::config::{AlphaSpec, ExperimentConfig, SpeedSpec};
use crate::spectral::{
    assemble_operator, decay_report, eigenpairs, find_alpha_bar_with, AlphaBar, AlphaSearch,
    DiscreteOperator, SpectralBasis,
};
use crate::tracker::{estimate_speed, fit_decay_rate, FrontTrace, SpeedOutcome};
use crate::wavefront::{
    assemble_wave, critical_speed, default_half_width, solve_kpp_profile, steady_state,
    wave_residual, Regime, SteadyState,
};

/// Spacing of default wave-profile grids.
const WAVE_SPACING: f64 = 0.05;

/// Relative tolerances of the simulation verdicts.
pub const SPEED_LOWER: f64 = 0.95;
pub const SPEED_UPPER: f64 = 1.02;
pub const DECAY_TOLERANCE: f64 = 0.20;

/// What a subcommand produced.
#[derive(Debug, Clone)]
pub struct CommandOutcome {
    pub report: Value,
    /// Some requested items were rejected but the command still succeeded.
    pub partial: bool,
}

/// Spectral data shared by every subcommand.
pub struct Prepared {
    pub hash: String,
    pub y: TraitGrid,
    pub alpha: f64,
    pub alpha_bar: Option<AlphaBar>,
    pub op: DiscreteOperator,
    pub basis: SpectralBasis,
    pub steady: SteadyState,
}

fn search(cfg: &ExperimentConfig) -> AlphaSearch {
    AlphaSearch {
        boundary: cfg.boundary,
        diffusion: cfg.diffusion,
        ..AlphaSearch::default()
    }
}

pub fn compute_alpha_bar(cfg: &ExperimentConfig) -> Result<AlphaBar> {
    find_alpha_bar_with(
        cfg.potential()?,
        &cfg.trait_grid()?,
        cfg.alpha_tol,
        &search(cfg),
    )
}

/// Validates `cfg`, resolves `alpha` and computes the eigenbasis and steady state.
pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let y = cfg.trait_grid()?;
    let g = cfg.potential()?;
    let (alpha, alpha_bar) = match cfg.alpha {
        AlphaSpec::Value(a) => (a, None),
        AlphaSpec::Auto { auto } => {
            let bar = compute_alpha_bar(cfg)?;
            (auto * bar.alpha, Some(bar))
        }
    };
    let op = assemble_operator(&y, g, alpha, cfg.boundary, cfg.diffusion)?;
    let basis = eigenpairs(&op, cfg.modes)?;
    let steady = steady_state(&basis, &cfg.kernel)?;
    Ok(Prepared {
        hash: cfg.hash(),
        y,
        alpha,
        alpha_bar,
        op,
        basis,
        steady,
    })
}

fn header(cfg: &ExperimentConfig, p: &Prepared) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("alpha".into(), json!(p.alpha));
    if let Some(bar) = &p.alpha_bar {
        m.insert("alpha_bar".into(), json!(bar.alpha));
    }
    m.insert("boundary".into(), json!(cfg.boundary));
    m.insert("diffusion".into(), json!(cfg.diffusion));
    m.insert("eigenvalues".into(), json!(p.basis.eigenvalues));
    m.insert("lambda0".into(), json!(p.basis.lambda0()));
    m.insert("mu".into(), json!(p.steady.mu));
    m.insert("regime".into(), json!(p.steady.regime));
    m.insert(
        "c_star".into(),
        json!(critical_speed(p.basis.lambda0()).ok()),
    );
    m
}

pub fn cmd_spectrum(cfg: &ExperimentConfig, out: &Path) -> Result<CommandOutcome> {
    let p = prepare(cfg)?;
    let mut w = ArtifactWriter::new(out, &p.hash)?;
    w.csv("spectrum.csv", |o| p.basis.write_csv(o))?;
    let mut report = header(cfg, &p);
    let residuals = p.basis.residuals(&p.op);
    report.insert("residuals".into(), json!(residuals));
    report.insert(
        "orthonormality_defect".into(),
        json!(p.basis.orthonormality_defect()),
    );
    report.insert(
        "decay".into(),
        json!(decay_report(&p.basis, cfg.envelope_gamma)),
    );
    report.insert("kernel_moment".into(), json!(p.steady.kernel_moment));
    let report = Value::Object(report);
    w.json("report.json", &report)?;
    Ok(CommandOutcome {
        report,
        partial: false,
    })
}

pub fn cmd_alpha_bar(cfg: &ExperimentConfig, out: &Path) -> Result<CommandOutcome> {
    cfg.validate()?;
    let bar = compute_alpha_bar(cfg)?;
    let mut w = ArtifactWriter::new(out, &cfg.hash())?;
    let report = json!({
        "alpha_bar": bar.alpha,
        "lambda0": bar.lambda0,
        "bracket": [bar.lo, bar.hi],
        "halvings": bar.halvings,
        "tolerance": cfg.alpha_tol,
    });
    w.json("alpha_bar.json", &report)?;
    Ok(CommandOutcome {
        report,
        partial: false,
    })
}

#[derive(Debug, Serialize)]
struct WaveEntry {
    c: f64,
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_x: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    newton_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fitted_tail_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    monotonicity_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    residual_l2: Option<f64>,
    passed: bool,
}

/// Wave grid for speed `c`: configured, or `40 / gamma_0` wide at spacing 0.05.
pub fn wave_grid(cfg: &ExperimentConfig, c: f64, lambda0: f64) -> Result<(f64, usize)> {
    let l = match cfg.wave_grid.l_x {
        Some(l) => l,
        None => default_half_width(c, lambda0)?,
    };
    let n = cfg
        .wave_grid
        .n_x
        .unwrap_or_else(|| 2 * (l / WAVE_SPACING).ceil() as usize + 1);
    Ok((l, n))
}

pub fn cmd_wave(cfg: &ExperimentConfig, out: &Path) -> Result<CommandOutcome> {
    let p = prepare(cfg)?;
    let lambda0 = p.basis.lambda0();
    let c_star = critical_speed(lambda0)?;
    let speeds: Vec<f64> = if cfg.speeds.is_empty() {
        vec![c_star]
    } else {
        cfg.speeds.iter().map(|s| s.resolve(c_star)).collect()
    };
    let mut w = ArtifactWriter::new(out, &p.hash)?;
    let mut entries = Vec::new();
    let mut partial = false;
    for (k, &c) in speeds.iter().enumerate() {
        let blank = |status: String| WaveEntry {
            c,
            status,
            half_width: None,
            n_x: None,
            newton_residual: None,
            iterations: None,
            gamma0: None,
            fitted_tail_rate: None,
            monotonicity_defect: None,
            residual_max: None,
            residual_l2: None,
            passed: false,
        };
        let (l, n) = match wave_grid(cfg, c, lambda0) {
            Ok(g) => g,
            Err(Error::BelowCriticalSpeed { .. }) => {
                partial = true;
                entries.push(blank("rejected: c < c*".into()));
                continue;
            }
            Err(e) => return Err(e),
        };
        let profile = match solve_kpp_profile(c, lambda0, l, n) {
            Ok(pr) => pr.with_modes(&p.basis.eigenvalues),
            Err(Error::BelowCriticalSpeed { .. }) => {
                partial = true;
                entries.push(blank("rejected: c < c*".into()));
                continue;
            }
            Err(e @ (Error::Newton { .. } | Error::Validation(_) | Error::Parameter(_))) => {
                partial = true;
                entries.push(blank(format!("failed: {e}")));
                continue;
            }
            Err(e) => return Err(e),
        };
        w.csv(&format!("profile_{k:02}.csv"), |o| profile.write_csv(o))?;
        let wave = assemble_wave(&profile, &p.steady)?;
        w.field(&format!("wave_{k:02}"), &wave.field, wave.sidecar())?;
        let res = wave_residual(&wave.field, c, &p.op, &cfg.kernel)?;
        let defect = profile.monotonicity_defect();
        let passed = profile.residual.newton_residual < 1e-10 && defect <= 1e-12;
        info!("wave c = {c}: residual {:e}", res.max);
        entries.push(WaveEntry {
            status: "ok".into(),
            half_width: Some(l),
            n_x: Some(n),
            newton_residual: Some(profile.residual.newton_residual),
            iterations: Some(profile.residual.iterations),
            gamma0: Some(profile.gamma0),
            fitted_tail_rate: profile.fitted_tail_rate(),
            monotonicity_defect: Some(defect),
            residual_max: Some(res.max),
            residual_l2: Some(res.l2),
            passed,
            ..blank(String::new())
        });
    }
    let mut report = header(cfg, &p);
    report.insert("waves".into(), json!(entries));
    let report = Value::Object(report);
    w.json("report.json", &report)?;
    Ok(CommandOutcome { report, partial })
}

/// Default initial data: bump of amplitude `0.1 mu`, or 0.1 in the extinction regime.
pub fn initial_data(cfg: &ExperimentConfig, steady: &SteadyState) -> InitialData {
    cfg.initial.clone().unwrap_or_else(|| {
        let mut bump = BumpSpec::new(0.1, 2.0, 1.0);
        if !steady.is_extinct() {
            bump.unit = AmplitudeUnit::Mu;
        }
        InitialData::Bump(bump)
    })
}

pub fn run_options(cfg: &ExperimentConfig, lambda0: f64) -> Result<RunOptions> {
    let frame_speed = match cfg.frame_speed {
        SpeedSpec::Value(v) => v,
        rel => rel.resolve(critical_speed(lambda0)?),
    };
    Ok(RunOptions {
        t_final: cfg.time.t_final,
        dt: cfg.time.dt,
        diag_interval: cfg.time.diag_interval,
        snapshots: cfg.time.snapshots,
        step: StepOptions {
            frame_speed,
            forced_b_zero: cfg.linear,
        },
        theta: cfg.tracker.theta,
        envelope_gamma: cfg.envelope_gamma,
    })
}

/// Runs the configured simulation.
pub fn simulate(cfg: &ExperimentConfig, p: &Prepared) -> Result<Trajectory> {
    let x: SpaceGrid = cfg.space_grid()?;
    let init = init_field(&initial_data(cfg, &p.steady), &x, &p.basis, Some(&p.steady))?;
    let ctx = RunContext {
        op: &p.op,
        basis: &p.basis,
        kernel: &cfg.kernel,
        steady: Some(&p.steady),
    };
    run(&init, &ctx, &run_options(cfg, p.basis.lambda0())?)
}

fn regime_report(
    cfg: &ExperimentConfig,
    p: &Prepared,
    traj: &Trajectory,
) -> Result<(Value, Option<FrontTrace>, SpeedOutcome)> {
    let lambda0 = p.basis.lambda0();
    let trace = FrontTrace::from_trajectory(traj, traj.theta, cfg.tracker.policy);
    let outcome = estimate_speed(&trace, cfg.tracker.window)?;
    let mut verdicts = Vec::new();
    let mut v = serde_json::Map::new();
    match p.steady.regime {
        Regime::Persistence => {
            let c_star = critical_speed(lambda0)?;
            if let Some(e) = outcome.estimate() {
                let pass = e.c_hat >= SPEED_LOWER * c_star && e.c_hat <= SPEED_UPPER * c_star;
                verdicts.push(json!({
                    "criterion": "propagation speed",
                    "value": e.c_hat / c_star,
                    "tolerance": [SPEED_LOWER, SPEED_UPPER],
                    "pass": pass,
                }));
                v.insert("c_hat".into(), json!(e.c_hat));
            } else {
                v.insert("c_hat".into(), Value::Null);
            }
            v.insert("regime".into(), json!("invasion"));
        }
        Regime::Extinction => {
            v.insert("regime".into(), json!("extinction"));
            let rate = fit_decay_rate(traj, cfg.tracker.window);
            v.insert("decay_rate".into(), json!(rate));
            if let Some(r) = rate {
                let target = lambda0 - 1.0;
                verdicts.push(json!({
                    "criterion": "extinction rate",
                    "value": r,
                    "target": target,
                    "tolerance": DECAY_TOLERANCE,
                    "pass": (r / target - 1.0).abs() <= DECAY_TOLERANCE,
                }));
            }
        }
    }
    v.insert("speed".into(), json!(outcome));
    v.insert("theta".into(), json!(traj.theta));
    v.insert("steps".into(), json!(traj.steps));
    v.insert("violations".into(), json!(traj.violations));
    v.insert("warnings".into(), json!(traj.warnings));
    v.insert("verdicts".into(), json!(verdicts));
    Ok((Value::Object(v), Some(trace), outcome))
}

fn simulate_command(cfg: &ExperimentConfig, out: &Path, full: bool) -> Result<CommandOutcome> {
    let p = prepare(cfg)?;
    let traj = simulate(cfg, &p)?;
    let mut w = ArtifactWriter::new(out, &p.hash)?;
    if full {
        let comment = None;
        w.csv("diagnostics.csv", |o| {
            traj.write_diagnostics_csv(o, comment)
        })?;
        for (k, snap) in traj.snapshots.iter().enumerate() {
            let sidecar = crate::field::FieldSidecar {
                t: Some(snap.t),
                ..crate::field::FieldSidecar::for_field(&snap.u)
            };
            w.field(&format!("snapshot_{k:04}"), &snap.u, sidecar)?;
        }
    }
    let (regime, trace, outcome) = regime_report(cfg, &p, &traj)?;
    if let Some(trace) = trace {
        w.csv("front_trace.csv", |o| trace.write_csv(o, None))?;
    }
    if let Some(e) = outcome.estimate() {
        w.csv("speed.csv", |o| e.write_csv(o, None))?;
    }
    let mut report = header(cfg, &p);
    if let Value::Object(m) = regime {
        report.extend(m);
    }
    let report = Value::Object(report);
    w.json("report.json", &report)?;
    Ok(CommandOutcome {
        report,
        partial: false,
    })
}

pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<CommandOutcome> {
    simulate_command(cfg, out, true)
}

/// Simulation reduced to the front trace and the speed estimate.
pub fn cmd_speed(cfg: &ExperimentConfig, out: &Path) -> Result<CommandOutcome> {
    simulate_command(cfg, out, false)
}
