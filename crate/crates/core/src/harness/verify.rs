//! The bundled verification suite: fifteen checks run against pinned configs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use log::info;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::cauchy::Trajectory;
use crate::error::{Error, Result};
use crate::grid::TraitGrid;
use crate::harness::artifacts::ArtifactWriter;
use crate::harness::commands::{
    compute_alpha_bar, prepare, simulate, Prepared, SPEED_LOWER, SPEED_UPPER,
};
use crate::harness::config::{AlphaSpec, ExperimentConfig};
use crate::spectral::{
    assemble_operator, eigenpairs, tail_exponent, truncation_study, KernelShape, KernelSpec, Table,
    TruncationPoint,
};
use crate::tracker::{
    core_deviation, emptiness_beyond, estimate_speed, fit_decay_rate, invasion_profile_error,
    FrontTrace, SlicePolicy,
};
use crate::wavefront::{
    assemble_wave, critical_speed, solve_kpp_profile, steady_state, wave_residual, Regime,
    WaveProfile,
};

/// Names of the pinned configs, in load order.
pub const PRESET_NAMES: [&str; 8] = [
    "harmonic",
    "fractional",
    "wave",
    "kpp_oracle",
    "linear",
    "invasion",
    "extinction",
    "liouville",
];

const BUILTIN: [(&str, &str); 8] = [
    ("harmonic", include_str!("../../presets/harmonic.json")),
    ("fractional", include_str!("../../presets/fractional.json")),
    ("wave", include_str!("../../presets/wave.json")),
    ("kpp_oracle", include_str!("../../presets/kpp_oracle.json")),
    ("linear", include_str!("../../presets/linear.json")),
    ("invasion", include_str!("../../presets/invasion.json")),
    ("extinction", include_str!("../../presets/extinction.json")),
    ("liouville", include_str!("../../presets/liouville.json")),
];

/// Parsed and validated pinned configs.
#[derive(Debug, Clone)]
pub struct Presets {
    configs: BTreeMap<&'static str, ExperimentConfig>,
}

impl Presets {
    pub fn builtin() -> Result<Self> {
        Self::from_sources(|name| {
            BUILTIN
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, text)| text.to_string())
                .ok_or_else(|| Error::Config(format!("no builtin preset {name}")))
        })
    }

    /// Reads `<name>.json` for every preset from `dir`.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        Self::from_sources(|name| {
            let path = dir.join(format!("{name}.json"));
            std::fs::read_to_string(&path)
                .map_err(|e| Error::Config(format!("cannot read preset {}: {e}", path.display())))
        })
    }

    /// Parses every preset before returning, so one bad file aborts the whole suite.
    pub fn from_sources(mut read: impl FnMut(&str) -> Result<String>) -> Result<Self> {
        let mut configs = BTreeMap::new();
        for name in PRESET_NAMES {
            let text = read(name)?;
            let cfg = ExperimentConfig::from_json(&text)
                .map_err(|e| Error::Config(format!("preset {name}: {e}")))?;
            cfg.validate()
                .map_err(|e| Error::Config(format!("preset {name}: {e}")))?;
            configs.insert(name, cfg);
        }
        Ok(Self { configs })
    }

    pub fn get(&self, name: &str) -> &ExperimentConfig {
        &self.configs[name]
    }

    /// Digest over the hashes of all presets.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (name, cfg) in &self.configs {
            h.update(name.as_bytes());
            h.update(cfg.hash().as_bytes());
        }
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    Spectrum,
    Wave,
    Cauchy,
    Invasion,
}

impl Group {
    pub fn parse(name: &str) -> Option<Group> {
        match name {
            "spectrum" | "spectral" => Some(Group::Spectrum),
            "wave" | "wavefront" => Some(Group::Wave),
            "cauchy" | "simulate" => Some(Group::Cauchy),
            "invasion" | "tracker" => Some(Group::Invasion),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub group: Group,
    /// Runtime budget in seconds.
    pub budget: u64,
}

pub const CRITERIA: [Criterion; 15] = [
    Criterion {
        id: 1,
        name: "harmonic spectrum",
        group: Group::Spectrum,
        budget: 10,
    },
    Criterion {
        id: 2,
        name: "critical intensity",
        group: Group::Spectrum,
        budget: 30,
    },
    Criterion {
        id: 3,
        name: "critical speed",
        group: Group::Wave,
        budget: 10,
    },
    Criterion {
        id: 4,
        name: "steady-state identity",
        group: Group::Wave,
        budget: 10,
    },
    Criterion {
        id: 5,
        name: "closed-form KPP wave",
        group: Group::Wave,
        budget: 30,
    },
    Criterion {
        id: 6,
        name: "wave residual convergence",
        group: Group::Wave,
        budget: 60,
    },
    Criterion {
        id: 7,
        name: "linear solver oracle",
        group: Group::Cauchy,
        budget: 120,
    },
    Criterion {
        id: 8,
        name: "propagation speed",
        group: Group::Invasion,
        budget: 900,
    },
    Criterion {
        id: 9,
        name: "invasion to V",
        group: Group::Invasion,
        budget: 0,
    },
    Criterion {
        id: 10,
        name: "emptiness beyond c*",
        group: Group::Invasion,
        budget: 0,
    },
    Criterion {
        id: 11,
        name: "extinction rate",
        group: Group::Cauchy,
        budget: 120,
    },
    Criterion {
        id: 12,
        name: "Liouville relaxation",
        group: Group::Cauchy,
        budget: 300,
    },
    Criterion {
        id: 13,
        name: "mode decay",
        group: Group::Invasion,
        budget: 0,
    },
    Criterion {
        id: 14,
        name: "truncation study",
        group: Group::Spectrum,
        budget: 30,
    },
    Criterion {
        id: 15,
        name: "fractional variant",
        group: Group::Spectrum,
        budget: 60,
    },
];

/// Criterion ids selected by `filter`: a group name, a criterion id, or a
/// comma-separated list of either. `None` and `"all"` select everything.
pub fn select(filter: Option<&str>) -> Result<Vec<u8>> {
    let Some(filter) = filter
        .map(str::trim)
        .filter(|f| !f.is_empty() && *f != "all")
    else {
        return Ok(CRITERIA.iter().map(|c| c.id).collect());
    };
    let mut ids = Vec::new();
    for part in filter.split(',').map(str::trim) {
        if let Some(g) = Group::parse(part) {
            ids.extend(CRITERIA.iter().filter(|c| c.group == g).map(|c| c.id));
        } else if let Ok(id) = part.parse::<u8>() {
            if !CRITERIA.iter().any(|c| c.id == id) {
                return Err(Error::Config(format!("no criterion {id}")));
            }
            ids.push(id);
        } else {
            return Err(Error::Config(format!(
                "unknown filter {part:?}; expected spectrum, wave, cauchy, invasion or a criterion id"
            )));
        }
    }
    ids.sort_unstable();
    ids.dedup();
    Ok(ids)
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub group: Group,
    pub pass: bool,
    /// Headline measurement compared against the tolerance.
    pub value: Option<f64>,
    pub tolerance: Value,
    pub details: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub regime: Option<Regime>,
    pub c_star: Option<f64>,
    pub c_hat: Option<f64>,
    pub tolerances: BTreeMap<String, Value>,
    pub criteria: Vec<CriterionResult>,
    pub passed: usize,
    pub failed: usize,
}

impl Verdict {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    /// Fixed-width summary, one line per criterion.
    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>3}  {:<28} {:<6} {:>13}  {:>8}",
            "id", "criterion", "result", "value", "time"
        );
        for r in &self.criteria {
            let value = r
                .value
                .map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
            let _ = writeln!(
                s,
                "{:>3}  {:<28} {:<6} {:>13}  {:>7.1}s",
                r.id,
                r.name,
                if r.pass { "PASS" } else { "FAIL" },
                value,
                r.elapsed.as_secs_f64()
            );
        }
        let _ = writeln!(s, "{} passed, {} failed", self.passed, self.failed);
        s
    }
}

struct Outcome {
    pass: bool,
    value: Option<f64>,
    tolerance: Value,
    details: Value,
}

/// Shared state: the long invasion run feeds four criteria.
struct Suite<'a> {
    presets: &'a Presets,
    invasion: Option<(Prepared, Trajectory)>,
    profile_check: Option<(WaveProfile, Vec<f64>)>,
    truncation: Option<Vec<TruncationPoint>>,
    front: Option<FrontTrace>,
    c_star: Option<f64>,
    c_hat: Option<f64>,
    regime: Option<Regime>,
}

/// Runs the selected criteria. Plot-data CSVs and `verdict.json` go to `out` when given.
pub fn verify(presets: &Presets, ids: &[u8], out: Option<&Path>) -> Result<Verdict> {
    let mut suite = Suite {
        presets,
        invasion: None,
        profile_check: None,
        truncation: None,
        front: None,
        c_star: None,
        c_hat: None,
        regime: None,
    };
    let mut results = Vec::new();
    for c in CRITERIA.iter().filter(|c| ids.contains(&c.id)) {
        let start = Instant::now();
        let outcome = suite.run(c.id);
        let elapsed = start.elapsed();
        info!(
            "criterion {} finished in {:.1}s",
            c.id,
            elapsed.as_secs_f64()
        );
        let r = match outcome {
            Ok(o) => CriterionResult {
                id: c.id,
                name: c.name,
                group: c.group,
                pass: o.pass,
                value: o.value,
                tolerance: o.tolerance,
                details: o.details,
                error: None,
                elapsed,
            },
            Err(e) if e.is_config() => return Err(e),
            Err(e) => CriterionResult {
                id: c.id,
                name: c.name,
                group: c.group,
                pass: false,
                value: None,
                tolerance: tolerance_of(c.id),
                details: Value::Null,
                error: Some(e.to_string()),
                elapsed,
            },
        };
        results.push(r);
    }
    let passed = results.iter().filter(|r| r.pass).count();
    let verdict = Verdict {
        regime: suite.regime,
        c_star: suite.c_star,
        c_hat: suite.c_hat,
        tolerances: results
            .iter()
            .map(|r| (r.id.to_string(), r.tolerance.clone()))
            .collect(),
        failed: results.len() - passed,
        passed,
        criteria: results,
    };
    if let Some(dir) = out {
        suite.write(dir, &verdict)?;
    }
    Ok(verdict)
}

/// Tolerances as reported when a criterion errors before measuring.
fn tolerance_of(id: u8) -> Value {
    match id {
        1 => json!({ "relative": 1e-3 }),
        2 => json!({ "absolute": 1e-3 }),
        3 => json!({ "absolute": 1e-3 }),
        4 => json!({ "absolute": 1e-10 }),
        5 => json!({ "sup_norm": 5e-4 }),
        6 => json!({ "ratio": [3.2, 4.8] }),
        7 => json!({ "relative": 1e-2 }),
        8 => json!({ "c_hat_over_c_star": [SPEED_LOWER, SPEED_UPPER] }),
        9 => json!({ "relative_to_max_v": 0.05, "monotone_over_last_half": true }),
        10 => json!({ "relative_to_max_v": 1e-3 }),
        11 => json!({ "relative": 0.2 }),
        12 => json!({ "relative_to_max_v": 1e-2 }),
        13 => json!({ "fraction_of_peak": 1e-4 }),
        14 => json!({ "nonincreasing": true, "absolute": 1e-6 }),
        15 => json!({ "residual": 1e-8, "lambda0_change": 1e-3, "tail_exponent": 0.5 }),
        _ => Value::Null,
    }
}

fn with_alpha(cfg: &ExperimentConfig, alpha: f64) -> ExperimentConfig {
    ExperimentConfig {
        alpha: AlphaSpec::Value(alpha),
        ..cfg.clone()
    }
}

fn az_wave(x: f64, r: f64) -> f64 {
    (1.0 + (2f64.sqrt() - 1.0) * ((r / 6.0).sqrt() * x).exp()).powi(-2)
}

fn refined(n: usize) -> usize {
    2 * n - 1
}

impl Suite<'_> {
    fn run(&mut self, id: u8) -> Result<Outcome> {
        match id {
            1 => self.harmonic_spectrum(),
            2 => self.critical_intensity(),
            3 => self.critical_speed(),
            4 => self.steady_identity(),
            5 => self.closed_form_wave(),
            6 => self.residual_convergence(),
            7 => self.linear_oracle(),
            8 => self.propagation_speed(),
            9 => self.invasion_to_v(),
            10 => self.emptiness(),
            11 => self.extinction(),
            12 => self.liouville(),
            13 => self.mode_decay(),
            14 => self.truncation(),
            15 => self.fractional(),
            _ => Err(Error::Config(format!("no criterion {id}"))),
        }
    }

    fn harmonic_spectrum(&mut self) -> Result<Outcome> {
        let cfg = self.presets.get("harmonic");
        let y = cfg.trait_grid()?;
        let g = cfg.potential()?;
        let mut worst = 0.0f64;
        let mut rows = Vec::new();
        for alpha in [0.25, 1.0, 4.0] {
            let op = assemble_operator(&y, g, alpha, cfg.boundary, cfg.diffusion)?;
            let basis = eigenpairs(&op, 5)?;
            let errs: Vec<f64> = basis
                .eigenvalues
                .iter()
                .enumerate()
                .map(|(n, lam)| {
                    let exact = alpha.sqrt() * (2 * n + 1) as f64;
                    (lam - exact).abs() / exact
                })
                .collect();
            worst = errs.iter().fold(worst, |m, e| m.max(*e));
            rows.push(json!({ "alpha": alpha, "eigenvalues": basis.eigenvalues, "relative_errors": errs }));
        }
        Ok(Outcome {
            pass: worst < 1e-3,
            value: Some(worst),
            tolerance: tolerance_of(1),
            details: json!({ "runs": rows }),
        })
    }

    fn critical_intensity(&mut self) -> Result<Outcome> {
        let bar = compute_alpha_bar(self.presets.get("harmonic"))?;
        let err = (bar.alpha - 1.0).abs();
        Ok(Outcome {
            pass: err <= 1e-3,
            value: Some(bar.alpha),
            tolerance: tolerance_of(2),
            details: json!({ "alpha_bar": bar.alpha, "lambda0": bar.lambda0, "halvings": bar.halvings }),
        })
    }

    fn critical_speed(&mut self) -> Result<Outcome> {
        let p = prepare(&with_alpha(self.presets.get("harmonic"), 0.25))?;
        let lambda0 = p.basis.lambda0();
        let c_star = critical_speed(lambda0)?;
        let formula = 2.0 * (1.0 - lambda0).sqrt();
        let err = (c_star - 2f64.sqrt()).abs();
        self.c_star.get_or_insert(c_star);
        Ok(Outcome {
            pass: err <= 1e-3 && (c_star - formula).abs() <= 1e-3,
            value: Some(c_star),
            tolerance: tolerance_of(3),
            details: json!({ "lambda0": lambda0, "c_star": c_star, "sqrt2_error": err }),
        })
    }

    fn steady_identity(&mut self) -> Result<Outcome> {
        let cfg = with_alpha(self.presets.get("harmonic"), 0.25);
        let y = cfg.trait_grid()?;
        let op = assemble_operator(&y, cfg.potential()?, 0.25, cfg.boundary, cfg.diffusion)?;
        let basis = eigenpairs(&op, 1)?;
        let r = y.half_width();
        let table: Vec<[f64; 2]> = (0..=80)
            .map(|k| {
                let z = -r + 2.0 * r * k as f64 / 80.0;
                [z, 1.0 / (1.0 + z * z)]
            })
            .collect();
        let kernels = [
            ("constant_1", KernelSpec::constant(1.0)),
            ("constant_2.5", KernelSpec::constant(2.5)),
            (
                "gaussian",
                KernelSpec::new(KernelShape::Gaussian {
                    amplitude: 1.0,
                    width: 2.0,
                }),
            ),
            (
                "indicator",
                KernelSpec::new(KernelShape::Indicator {
                    radius: 3.0,
                    height: 1.0,
                }),
            ),
            (
                "tabulated",
                KernelSpec::new(KernelShape::Tabulated(Table::from_samples(table))),
            ),
        ];
        let mut worst = 0.0f64;
        let mut rows = Vec::new();
        for (name, k) in kernels {
            let s = steady_state(&basis, &k)?;
            let d = s.identity_defect();
            worst = worst.max(d);
            rows.push(json!({ "kernel": name, "mu": s.mu, "defect": d }));
        }
        Ok(Outcome {
            pass: worst <= 1e-10,
            value: Some(worst),
            tolerance: tolerance_of(4),
            details: json!({ "kernels": rows }),
        })
    }

    fn closed_form_wave(&mut self) -> Result<Outcome> {
        let cfg = self.presets.get("kpp_oracle");
        let r: f64 = 0.5;
        let c = 5.0 / 6f64.sqrt() * r.sqrt();
        let l = cfg.wave_grid.l_x.unwrap_or(cfg.grid.l_x);
        let n = cfg.wave_grid.n_x.unwrap_or(cfg.grid.n_x);
        let p = solve_kpp_profile(c, 1.0 - r, l, n)?;
        let exact: Vec<f64> = p.grid().nodes().iter().map(|x| az_wave(*x, r)).collect();
        let err =
            p.v.iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
        let details = json!({
            "c": c,
            "n_x": n,
            "newton_residual": p.residual.newton_residual,
            "iterations": p.residual.iterations,
        });
        self.profile_check = Some((p, exact));
        Ok(Outcome {
            pass: err < 5e-4,
            value: Some(err),
            tolerance: tolerance_of(5),
            details,
        })
    }

    fn residual_convergence(&mut self) -> Result<Outcome> {
        let cfg = self.presets.get("wave");
        let mut maxima = Vec::new();
        let (mut n_x, mut n_y) = (cfg.grid.n_x, cfg.grid.n_y);
        for _ in 0..3 {
            let mut level = cfg.clone();
            level.grid.n_x = n_x;
            level.grid.n_y = n_y;
            let p = prepare(&level)?;
            let lambda0 = p.basis.lambda0();
            let c = cfg
                .speeds
                .first()
                .map_or(Ok(0.0), |s| critical_speed(lambda0).map(|cs| s.resolve(cs)))?;
            let profile = solve_kpp_profile(c, lambda0, cfg.grid.l_x, n_x)?;
            let wave = assemble_wave(&profile, &p.steady)?;
            maxima.push(wave_residual(&wave.field, c, &p.op, &cfg.kernel)?.max);
            n_x = refined(n_x);
            n_y = refined(n_y);
        }
        let ratios: Vec<f64> = maxima.windows(2).map(|m| m[0] / m[1]).collect();
        let pass = ratios.iter().all(|r| (3.2..=4.8).contains(r));
        Ok(Outcome {
            pass,
            value: ratios.first().copied(),
            tolerance: tolerance_of(6),
            details: json!({ "residual_max": maxima, "ratios": ratios }),
        })
    }

    fn linear_oracle(&mut self) -> Result<Outcome> {
        let cfg = self.presets.get("linear");
        if !cfg.linear {
            return Err(Error::Config(
                "preset linear must set \"linear\": true".into(),
            ));
        }
        let p = prepare(cfg)?;
        let traj = simulate(cfg, &p)?;
        let f = traj.final_field();
        let growth = (f.t * (1.0 - p.basis.lambda0())).exp();
        let amplitude = match &cfg.initial {
            Some(crate::cauchy::InitialData::GroundState { amplitude }) => *amplitude,
            _ => {
                return Err(Error::Config(
                    "preset linear needs ground-state initial data".into(),
                ))
            }
        };
        // Dirichlet ends in x pull the solution down near |x| = L_x; compare on the inner half.
        let core = 0.5 * traj.x.half_width();
        let (mut err, mut scale) = (0.0f64, 0.0f64);
        for (i, xi) in traj.x.nodes().iter().enumerate() {
            if xi.abs() > core {
                continue;
            }
            for (j, psi) in p.basis.psi0().iter().enumerate() {
                let exact = amplitude * growth * psi;
                err = err.max((f.u.at(i, j) - exact).abs());
                scale = scale.max(exact.abs());
            }
        }
        let rel = err / scale;
        Ok(Outcome {
            pass: rel < 1e-2 && (f.t - cfg.time.t_final).abs() < 1e-9,
            value: Some(rel),
            tolerance: tolerance_of(7),
            details: json!({ "t": f.t, "core_radius": core, "steps": traj.steps }),
        })
    }

    fn invasion(&mut self) -> Result<&(Prepared, Trajectory)> {
        if self.invasion.is_none() {
            let cfg = self.presets.get("invasion");
            let p = prepare(cfg)?;
            let traj = simulate(cfg, &p)?;
            self.regime = Some(p.steady.regime);
            self.c_star = Some(critical_speed(p.basis.lambda0())?);
            self.invasion = Some((p, traj));
        }
        Ok(self.invasion.as_ref().expect("invasion run present"))
    }

    fn propagation_speed(&mut self) -> Result<Outcome> {
        let cfg = self.presets.get("invasion");
        let (window, policy, t_final, l_x) = (
            cfg.tracker.window,
            cfg.tracker.policy,
            cfg.time.t_final,
            cfg.grid.l_x,
        );
        let (p, traj) = self.invasion()?;
        let c_star = critical_speed(p.basis.lambda0())?;
        let reach_ok = c_star * t_final <= 0.7 * l_x;
        let trace = FrontTrace::from_trajectory(traj, traj.theta, policy);
        let outcome = estimate_speed(&trace, window)?;
        let estimate = outcome.estimate().cloned();
        let mut invariance = Vec::new();
        if let Some(e) = &estimate {
            for (theta, pol) in [
                (2.0 * traj.theta, policy),
                (traj.theta, SlicePolicy::MaxOverY),
            ] {
                let alt = estimate_speed(&FrontTrace::from_trajectory(traj, theta, pol), window)?;
                if let Some(a) = alt.estimate() {
                    invariance.push(json!({ "theta": theta, "policy": pol, "c_hat": a.c_hat, "relative_change": (a.c_hat / e.c_hat - 1.0).abs() }));
                }
            }
        }
        let violations = traj.violations.len();
        let warnings = traj.warnings.clone();
        self.front = Some(trace);
        let Some(e) = estimate else {
            return Ok(Outcome {
                pass: false,
                value: None,
                tolerance: tolerance_of(8),
                details: json!({ "speed": outcome }),
            });
        };
        self.c_hat = Some(e.c_hat);
        let ratio = e.c_hat / c_star;
        Ok(Outcome {
            pass: reach_ok && (SPEED_LOWER..=SPEED_UPPER).contains(&ratio),
            value: Some(ratio),
            tolerance: tolerance_of(8),
            details: json!({
                "c_star": c_star,
                "c_hat": e.c_hat,
                "c_right": e.c_right,
                "c_left": e.c_left,
                "fit_window": [e.t1, e.t2],
                "c_star_T_within_0.7_L_x": reach_ok,
                "invariance": invariance,
                "bound_violations": violations,
                "warnings": warnings,
            }),
        })
    }

    fn invasion_to_v(&mut self) -> Result<Outcome> {
        let (p, traj) = self.invasion()?;
        let c_star = critical_speed(p.basis.lambda0())?;
        let series = invasion_profile_error(traj, &p.steady, 0.5 * c_star, c_star)?;
        let max_v = p.steady.max_v();
        let last = series
            .last()
            .ok_or_else(|| Error::Parameter("empty trajectory".into()))?
            / max_v;
        let t_end = series.times.last().copied().unwrap_or(0.0);
        let monotone = series.nonincreasing_from(0.5 * t_end, 0.0);
        Ok(Outcome {
            pass: last <= 0.05 && monotone,
            value: Some(last),
            tolerance: tolerance_of(9),
            details: json!({ "monotone": monotone, "warnings": series.warnings }),
        })
    }

    fn emptiness(&mut self) -> Result<Outcome> {
        let (p, traj) = self.invasion()?;
        let c_star = critical_speed(p.basis.lambda0())?;
        let e = emptiness_beyond(traj, 1.2 * c_star, c_star)?;
        let last = e.two_sided.last().unwrap_or(0.0) / p.steady.max_v();
        Ok(Outcome {
            pass: last <= 1e-3,
            value: Some(last),
            tolerance: tolerance_of(10),
            details: json!({ "region_empty_at_end": e.two_sided.empty.last(), "warnings": e.two_sided.warnings }),
        })
    }

    fn mode_decay(&mut self) -> Result<Outcome> {
        let (p, traj) = self.invasion()?;
        let mut worst = 0.0f64;
        let mut rows = Vec::new();
        let mut pass = true;
        let floor = 1e-12 * p.steady.max_v();
        for (j, lam) in p.basis.eigenvalues.iter().enumerate() {
            if *lam <= 1.0 {
                continue;
            }
            let series: Vec<f64> = traj
                .diagnostics
                .iter()
                .filter_map(|d| d.modes.get(j).copied())
                .collect();
            let Some((k, peak)) = series.iter().copied().enumerate().fold(
                None,
                |best: Option<(usize, f64)>, (i, v)| match best {
                    Some((_, b)) if b >= v => best,
                    _ => Some((i, v)),
                },
            ) else {
                continue;
            };
            if peak <= floor {
                rows.push(
                    json!({ "mode": j, "lambda": lam, "peak": peak, "skipped": "not excited" }),
                );
                continue;
            }
            let cutoff = 1e-4 * peak;
            let tail = &series[k..];
            let end = tail
                .iter()
                .position(|v| *v < cutoff)
                .unwrap_or(tail.len() - 1);
            let monotone = tail[..=end].windows(2).all(|w| w[1] <= w[0]);
            let final_ratio = series.last().copied().unwrap_or(peak) / peak;
            let ok = monotone && final_ratio < 1e-4;
            pass &= ok;
            worst = worst.max(final_ratio);
            rows.push(json!({
                "mode": j,
                "lambda": lam,
                "peak": peak,
                "peak_time": traj.diagnostics[k].t,
                "final_over_peak": final_ratio,
                "monotone": monotone,
            }));
        }
        Ok(Outcome {
            pass,
            value: Some(worst),
            tolerance: tolerance_of(13),
            details: json!({ "modes": rows }),
        })
    }

    fn extinction(&mut self) -> Result<Outcome> {
        let cfg = self.presets.get("extinction");
        let p = prepare(cfg)?;
        let lambda0 = p.basis.lambda0();
        let traj = simulate(cfg, &p)?;
        let rate = fit_decay_rate(&traj, cfg.tracker.window)
            .ok_or_else(|| Error::Parameter("too few samples to fit a decay rate".into()))?;
        let target = lambda0 - 1.0;
        let rel = (rate / target - 1.0).abs();
        Ok(Outcome {
            pass: p.steady.regime == Regime::Extinction && rel <= 0.2,
            value: Some(rel),
            tolerance: tolerance_of(11),
            details: json!({
                "alpha": p.alpha,
                "alpha_bar": p.alpha_bar.map(|b| b.alpha),
                "lambda0": lambda0,
                "rate": rate,
                "target": target,
                "regime": p.steady.regime,
            }),
        })
    }

    fn liouville(&mut self) -> Result<Outcome> {
        let cfg = self.presets.get("liouville");
        let p = prepare(cfg)?;
        let traj = simulate(cfg, &p)?;
        // Dirichlet ends in x hold u at 0, so V is only reachable away from them.
        let core = 0.5 * traj.x.half_width();
        let dev = core_deviation(&traj, core)?;
        let last = dev.last().unwrap_or(f64::INFINITY) / p.steady.max_v();
        Ok(Outcome {
            pass: last < 1e-2,
            value: Some(last),
            tolerance: tolerance_of(12),
            details: json!({ "core_radius": core, "frame_speed": traj.frame_speed, "t": traj.final_field().t }),
        })
    }

    fn truncation(&mut self) -> Result<Outcome> {
        let cfg = self.presets.get("harmonic");
        let pts = truncation_study(cfg.potential()?, 1.0, &[4.0, 6.0, 8.0, 10.0], 400)?;
        let monotone = pts.windows(2).all(|w| w[1].lambda0 <= w[0].lambda0);
        let diff = (pts[3].lambda0 - pts[2].lambda0).abs();
        let details = json!({ "points": pts, "nonincreasing": monotone });
        self.truncation = Some(pts);
        Ok(Outcome {
            pass: monotone && diff < 1e-6,
            value: Some(diff),
            tolerance: tolerance_of(14),
            details,
        })
    }

    fn fractional(&mut self) -> Result<Outcome> {
        let cfg = self.presets.get("fractional");
        let y = cfg.trait_grid()?;
        let fine = TraitGrid::new(y.half_width(), refined(y.len()))?;
        let g = cfg.potential()?;
        let alpha = match cfg.alpha {
            AlphaSpec::Value(a) => a,
            AlphaSpec::Auto { .. } => {
                return Err(Error::Config(
                    "preset fractional needs an explicit alpha".into(),
                ))
            }
        };
        let op = assemble_operator(&y, g, alpha, cfg.boundary, cfg.diffusion)?;
        let basis = eigenpairs(&op, cfg.modes)?;
        let fine_op = assemble_operator(&fine, g, alpha, cfg.boundary, cfg.diffusion)?;
        let fine_basis = eigenpairs(&fine_op, 1)?;
        let residual = basis.residuals(&op).into_iter().fold(0.0, f64::max);
        let shift = (fine_basis.lambda0() - basis.lambda0()).abs();
        let sigma = match cfg.diffusion {
            crate::spectral::Diffusion::Fractional { sigma } => sigma,
            crate::spectral::Diffusion::Standard => {
                return Err(Error::Config(
                    "preset fractional needs fractional diffusion".into(),
                ))
            }
        };
        let target = -(1.0 + 2.0 * sigma);
        let exponent = tail_exponent(&fine_basis);
        let tail_ok = exponent.is_some_and(|e| (e - target).abs() <= 0.5);
        Ok(Outcome {
            pass: residual < 1e-8 && shift < 1e-3 && tail_ok,
            value: exponent,
            tolerance: tolerance_of(15),
            details: json!({
                "residual": residual,
                "lambda0": basis.lambda0(),
                "lambda0_refined": fine_basis.lambda0(),
                "lambda0_change": shift,
                "tail_exponent": exponent,
                "tail_exponent_coarse": tail_exponent(&basis),
                "target_exponent": target,
            }),
        })
    }

    fn write(&self, dir: &Path, verdict: &Verdict) -> Result<()> {
        let mut w = ArtifactWriter::new(dir, &self.presets.hash())?;
        w.json("verdict.json", verdict)?;
        if let Some(trace) = &self.front {
            w.csv("front_position.csv", |o| trace.write_csv(o, None))?;
        }
        if let Some((p, exact)) = &self.profile_check {
            w.csv("profile_vs_closed_form.csv", |o| {
                writeln!(o, "x,v,v_closed_form")?;
                for ((x, v), e) in p.grid().nodes().iter().zip(&p.v).zip(exact) {
                    writeln!(o, "{x:.17e},{v:.17e},{e:.17e}")?;
                }
                Ok(())
            })?;
        }
        if let Some(pts) = &self.truncation {
            w.csv("lambda0_vs_R.csv", |o| {
                writeln!(o, "R,n_y,lambda0")?;
                for pt in pts {
                    writeln!(o, "{},{},{:.17e}", pt.radius, pt.n_points, pt.lambda0)?;
                }
                Ok(())
            })?;
        }
        Ok(())
    }
}
