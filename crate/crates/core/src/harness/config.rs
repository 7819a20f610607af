//! Experiment configuration: a single JSON document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cauchy::{BumpSpec, DtPolicy, InitialData};
use crate::error::{Error, Result};
use crate::grid::{SpaceGrid, TraitGrid};
use crate::spectral::{Boundary, Diffusion, KernelShape, KernelSpec, PotentialSpec, DEFAULT_KAPPA};
use crate::tracker::SlicePolicy;

fn default_kernel() -> KernelSpec {
    KernelSpec::constant(1.0)
}

fn default_kappa() -> f64 {
    DEFAULT_KAPPA
}

fn default_modes() -> usize {
    8
}

/// Selection intensity, either explicit or a multiple of the critical one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Value(f64),
    /// `auto * alpha_bar`.
    Auto {
        auto: f64,
    },
}

impl Default for AlphaSpec {
    fn default() -> Self {
        AlphaSpec::Value(1.0)
    }
}

/// Wave speed, absolute or relative to `c*`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpeedSpec {
    Value(f64),
    /// `c_star * c*`.
    Relative {
        c_star: f64,
    },
}

impl SpeedSpec {
    pub fn resolve(self, c_star: f64) -> f64 {
        match self {
            SpeedSpec::Value(c) => c,
            SpeedSpec::Relative { c_star: k } => k * c_star,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "R_y")]
    pub r_y: f64,
    pub n_y: usize,
    #[serde(rename = "L_x")]
    pub l_x: f64,
    pub n_x: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            r_y: 10.0,
            n_y: 101,
            l_x: 60.0,
            n_x: 601,
        }
    }
}

fn default_diag_interval() -> f64 {
    0.5
}

fn default_snapshots() -> usize {
    24
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default)]
    pub dt: DtPolicy,
    #[serde(default = "default_diag_interval")]
    pub diag_interval: f64,
    #[serde(default = "default_snapshots")]
    pub snapshots: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            t_final: 10.0,
            dt: DtPolicy::default(),
            diag_interval: default_diag_interval(),
            snapshots: default_snapshots(),
        }
    }
}

fn default_window() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackerConfig {
    /// Front level; `0.01 max V` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    /// Fit window starts at this fraction of the run.
    #[serde(default = "default_window")]
    pub window: f64,
    #[serde(default)]
    pub policy: SlicePolicy,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            theta: None,
            window: default_window(),
            policy: SlicePolicy::default(),
        }
    }
}

/// Grid for scalar wave profiles; defaults to `L_x = 40 / gamma_0` and spacing 0.05.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveGridConfig {
    #[serde(default, rename = "L_x", skip_serializing_if = "Option::is_none")]
    pub l_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_x: Option<usize>,
}

fn default_alpha_tol() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default = "default_kernel")]
    pub kernel: KernelSpec,
    #[serde(default)]
    pub alpha: AlphaSpec,
    #[serde(default)]
    pub diffusion: Diffusion,
    #[serde(default)]
    pub boundary: Boundary,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default)]
    pub grid: GridConfig,
    /// Number of eigenpairs computed.
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default = "default_alpha_tol")]
    pub alpha_tol: f64,
    #[serde(default)]
    pub time: TimeConfig,
    /// Initial data; a bump of amplitude `0.1 mu` by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<InitialData>,
    /// Speed of the moving frame.
    #[serde(default = "default_frame")]
    pub frame_speed: SpeedSpec,
    /// Drop the competition term and solve the linearized equation.
    #[serde(default)]
    pub linear: bool,
    #[serde(default)]
    pub speeds: Vec<SpeedSpec>,
    #[serde(default)]
    pub wave_grid: WaveGridConfig,
    #[serde(default)]
    pub tracker: TrackerConfig,
    /// Rate of the exponential trait envelope checked at the end of a run.
    #[serde(default = "default_envelope_gamma")]
    pub envelope_gamma: f64,
    /// Output directory, overridden by `--out`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Outputs must not depend on wall-clock time or thread count.
    #[serde(default = "default_true")]
    pub deterministic: bool,
}

fn default_frame() -> SpeedSpec {
    SpeedSpec::Value(0.0)
}

fn default_envelope_gamma() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    /// Reads a config file; tabulated potentials and kernels are resolved
    /// relative to the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(PotentialSpec::Tabulated(t)) = cfg.potential.as_mut() {
            t.resolve(base)?;
        }
        if let KernelShape::Tabulated(t) = &mut cfg.kernel.shape {
            t.resolve(base)?;
        }
        Ok(cfg)
    }

    pub fn potential(&self) -> Result<&PotentialSpec> {
        self.potential
            .as_ref()
            .ok_or_else(|| Error::Config("config.potential required".into()))
    }

    pub fn trait_grid(&self) -> Result<TraitGrid> {
        TraitGrid::new(self.grid.r_y, self.grid.n_y)
            .map_err(|e| Error::Config(format!("config.grid: {e}")))
    }

    pub fn space_grid(&self) -> Result<SpaceGrid> {
        SpaceGrid::new(self.grid.l_x, self.grid.n_x)
            .map_err(|e| Error::Config(format!("config.grid: {e}")))
    }

    /// Checks every field against the preconditions of the operations it feeds.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::Config(format!("config.{field}: {msg}")));
        let g = self.potential()?;
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad("kappa", format!("must be positive, got {}", self.kappa));
        }
        let y = self.trait_grid()?;
        let x = self.space_grid()?;
        g.validate(&y, self.kappa)
            .map_err(|e| Error::Config(format!("config.potential: {e}")))?;
        self.kernel
            .validate(&y, self.kappa)
            .map_err(|e| Error::Config(format!("config.kernel: {e}")))?;
        match self.alpha {
            AlphaSpec::Value(a) if !(a > 0.0 && a.is_finite()) => {
                return bad("alpha", format!("must be positive, got {a}"));
            }
            AlphaSpec::Auto { auto } if !(auto > 0.0 && auto.is_finite()) => {
                return bad(
                    "alpha",
                    format!("auto fraction must be positive, got {auto}"),
                );
            }
            _ => {}
        }
        if let Diffusion::Fractional { sigma } = self.diffusion {
            if !(sigma > 0.0 && sigma < 1.0) {
                return bad(
                    "diffusion",
                    format!("sigma must lie in (0, 1), got {sigma}"),
                );
            }
            if self.boundary != Boundary::Dirichlet {
                return bad(
                    "boundary",
                    "fractional diffusion requires dirichlet truncation".into(),
                );
            }
        }
        let max_modes = match self.boundary {
            Boundary::Dirichlet => y.len() - 2,
            Boundary::Neumann => y.len(),
        };
        if self.modes == 0 || self.modes > max_modes {
            return bad(
                "modes",
                format!("must lie in 1..={max_modes}, got {}", self.modes),
            );
        }
        if !(self.alpha_tol > 0.0) {
            return bad(
                "alpha_tol",
                format!("must be positive, got {}", self.alpha_tol),
            );
        }
        let t = &self.time;
        if !(t.t_final >= 0.0 && t.t_final.is_finite()) {
            return bad("time.T", format!("must be nonnegative, got {}", t.t_final));
        }
        if !(t.diag_interval > 0.0) {
            return bad(
                "time.diag_interval",
                format!("must be positive, got {}", t.diag_interval),
            );
        }
        match t.dt {
            DtPolicy::Fixed { dt } if !(dt > 0.0 && dt.is_finite()) => {
                return bad("time.dt", format!("must be positive, got {dt}"));
            }
            DtPolicy::Adaptive { max: Some(m) } if !(m > 0.0) => {
                return bad("time.dt", format!("cap must be positive, got {m}"));
            }
            _ => {}
        }
        if let Some(init) = &self.initial {
            let check = |b: &BumpSpec| -> Result<()> {
                if !(b.amplitude > 0.0 && b.amplitude.is_finite()) {
                    return bad(
                        "initial",
                        format!("amplitude must be positive, got {}", b.amplitude),
                    );
                }
                if !(b.r_x > 0.0 && b.r_y > 0.0) {
                    return bad("initial", "bump radii must be positive".into());
                }
                if b.x_center.abs() + b.r_x >= x.half_width()
                    || b.y_center.abs() + b.r_y >= y.half_width()
                {
                    return bad(
                        "initial",
                        "bump touches the boundary of the computational domain".into(),
                    );
                }
                Ok(())
            };
            match init {
                InitialData::Bump(b) => check(b)?,
                InitialData::GroundState { amplitude } if !(*amplitude > 0.0) => {
                    return bad(
                        "initial",
                        format!("amplitude must be positive, got {amplitude}"),
                    );
                }
                InitialData::Steady { scale, bump } => {
                    if !(*scale >= 0.0 && scale.is_finite()) {
                        return bad("initial", format!("scale must be nonnegative, got {scale}"));
                    }
                    if let Some(b) = bump {
                        check(b)?;
                    }
                }
                _ => {}
            }
        }
        let frame = match self.frame_speed {
            SpeedSpec::Value(v) | SpeedSpec::Relative { c_star: v } => v,
        };
        if !frame.is_finite() {
            return bad("frame_speed", "must be finite".into());
        }
        for s in &self.speeds {
            let v = match s {
                SpeedSpec::Value(v) | SpeedSpec::Relative { c_star: v } => *v,
            };
            if !(v > 0.0 && v.is_finite()) {
                return bad("speeds", format!("entries must be positive, got {v}"));
            }
        }
        if let Some(l) = self.wave_grid.l_x {
            if !(l > 0.0) {
                return bad("wave_grid.L_x", format!("must be positive, got {l}"));
            }
        }
        if let Some(n) = self.wave_grid.n_x {
            if n < 5 || n % 2 == 0 {
                return bad(
                    "wave_grid.n_x",
                    format!("must be odd and at least 5, got {n}"),
                );
            }
        }
        if let Some(th) = self.tracker.theta {
            if !(th > 0.0) {
                return bad("tracker.theta", format!("must be positive, got {th}"));
            }
        }
        if !(self.envelope_gamma > 0.0 && self.envelope_gamma.is_finite()) {
            return bad(
                "envelope_gamma",
                format!("must be positive, got {}", self.envelope_gamma),
            );
        }
        if !(0.0..1.0).contains(&self.tracker.window) {
            return bad(
                "tracker.window",
                format!("must lie in [0, 1), got {}", self.tracker.window),
            );
        }
        Ok(())
    }

    /// SHA-256 of the canonical serialization, as lowercase hex.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        // where results are written does not change them
        canonical.output = None;
        let text = serde_json::to_string(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::from_json("{}").expect("empty config parses")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HARMONIC: &str = r#"{"potential": {"kind": "quadratic", "a": 1.0}, "alpha": 0.25}"#;

    #[test]
    fn missing_potential_reported() {
        let cfg = ExperimentConfig::from_json(r#"{"alpha": 0.25}"#).unwrap();
        let err = cfg.validate().unwrap_err();
        assert_eq!(
            err.to_string(),
            "configuration error: config.potential required"
        );
        assert!(err.is_config());
    }

    #[test]
    fn unknown_fields_rejected() {
        let err = ExperimentConfig::from_json(
            r#"{"potential": {"kind": "quadratic", "a": 1.0}, "alpah": 1}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("unknown field"), "{err}");
    }

    #[test]
    fn defaults_and_hash() {
        let cfg = ExperimentConfig::from_json(HARMONIC).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.kernel, KernelSpec::constant(1.0));
        assert_eq!(cfg.grid.n_y, 101);
        let h = cfg.hash();
        assert_eq!(h.len(), 64);
        let mut moved = cfg.clone();
        moved.output = Some("elsewhere".into());
        assert_eq!(moved.hash(), h);
        let mut other = cfg.clone();
        other.alpha = AlphaSpec::Value(0.3);
        assert_ne!(other.hash(), h);
    }

    #[test]
    fn alpha_and_speed_forms() {
        let cfg = ExperimentConfig::from_json(
            r#"{"potential": {"kind": "quadratic", "a": 1.0}, "alpha": {"auto": 1.5},
                "speeds": [{"c_star": 1.02}, 1.443376]}"#,
        )
        .unwrap();
        assert_eq!(cfg.alpha, AlphaSpec::Auto { auto: 1.5 });
        assert_eq!(cfg.speeds[0].resolve(2.0), 2.04);
        assert_eq!(cfg.speeds[1].resolve(2.0), 1.443376);
    }

    #[test]
    fn validation_catches_bad_numbers() {
        for patch in [
            r#""grid": {"R_y": 10, "n_y": 100, "L_x": 60, "n_x": 601}"#,
            r#""alpha": -1"#,
            r#""time": {"T": -1}"#,
            r#""tracker": {"window": 1.5}"#,
            r#""speeds": [0.0]"#,
            r#""modes": 0"#,
            r#""diffusion": {"kind": "fractional", "sigma": 1.5}"#,
            r#""initial": {"kind": "bump", "amplitude": 1.0, "r_x": 80, "r_y": 1}"#,
        ] {
            let text = format!(r#"{{"potential": {{"kind": "quadratic", "a": 1.0}}, {patch}}}"#);
            let cfg = ExperimentConfig::from_json(&text).unwrap();
            let err = cfg.validate().unwrap_err();
            assert!(err.is_config(), "{patch}: {err}");
        }
    }
}
