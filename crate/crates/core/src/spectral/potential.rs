//! Selection potential `g` and competition kernel `K` presets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TraitGrid;

/// Default growth constant for the `kappa * exp(kappa |y|)` bound checks.
pub const DEFAULT_KAPPA: f64 = 10.0;

/// Tabulated `(y, value)` samples, either inline or loaded from a two-column CSV.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Table {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub samples: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

impl Table {
    pub fn from_samples(samples: Vec<[f64; 2]>) -> Self {
        Self {
            samples,
            path: None,
        }
    }

    /// Parses a two-column `y,value` CSV. A non-numeric first line is treated as a header;
    /// lines starting with `#` are skipped.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut samples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let parsed = match (cols.next(), cols.next(), cols.next()) {
                (Some(a), Some(b), None) => a.parse::<f64>().ok().zip(b.parse::<f64>().ok()),
                _ => None,
            };
            match parsed {
                Some((y, v)) => samples.push([y, v]),
                None if lineno == 0 => continue,
                None => {
                    return Err(Error::Config(format!(
                        "{}:{}: expected two numeric columns",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        let table = Self::from_samples(samples);
        table.check()?;
        Ok(table)
    }

    /// Loads `path` into `samples` if the table was given by path only.
    pub fn resolve(&mut self, base: &Path) -> Result<()> {
        if self.samples.is_empty() {
            if let Some(p) = &self.path {
                let full = if p.is_absolute() {
                    p.clone()
                } else {
                    base.join(p)
                };
                self.samples = Self::read_csv(&full)?.samples;
            }
        }
        self.check()
    }

    fn check(&self) -> Result<()> {
        if self.samples.len() < 2 {
            return Err(Error::Validation(
                "tabulated spec needs at least two samples".into(),
            ));
        }
        if self.samples.windows(2).any(|w| w[1][0] <= w[0][0]) {
            return Err(Error::Validation(
                "tabulated abscissae must be strictly increasing".into(),
            ));
        }
        if self.samples.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Validation(
                "tabulated spec has non-finite entries".into(),
            ));
        }
        Ok(())
    }

    /// Piecewise-linear interpolation; `None` outside the table.
    pub fn eval(&self, y: f64) -> Option<f64> {
        let s = &self.samples;
        let first = s.first()?;
        let last = s.last()?;
        let tol = 1e-12 * (last[0] - first[0]).abs();
        if y < first[0] - tol || y > last[0] + tol {
            return None;
        }
        let idx = s.partition_point(|p| p[0] <= y).clamp(1, s.len() - 1);
        let (a, b) = (s[idx - 1], s[idx]);
        let t = (y - a[0]) / (b[0] - a[0]);
        Some(a[1] + t.clamp(0.0, 1.0) * (b[1] - a[1]))
    }
}

/// Trait-selection potential `g(y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// `a * y^2`
    Quadratic {
        a: f64,
    },
    /// `a * y^4`
    Quartic {
        a: f64,
    },
    /// `a * |y|`
    Abs {
        a: f64,
    },
    Tabulated(Table),
    /// `g = 0`. Not confining; only admitted by the unchecked assembly path.
    Zero,
}

impl PotentialSpec {
    pub fn harmonic() -> Self {
        PotentialSpec::Quadratic { a: 1.0 }
    }

    pub fn eval(&self, y: f64) -> Result<f64> {
        Ok(match self {
            PotentialSpec::Quadratic { a } => a * y * y,
            PotentialSpec::Quartic { a } => a * y.powi(4),
            PotentialSpec::Abs { a } => a * y.abs(),
            PotentialSpec::Tabulated(t) => t.eval(y).ok_or_else(|| {
                Error::Validation(format!("tabulated potential does not cover y = {y}"))
            })?,
            PotentialSpec::Zero => 0.0,
        })
    }

    pub fn sample(&self, grid: &TraitGrid) -> Result<Vec<f64>> {
        grid.nodes().iter().map(|&y| self.eval(y)).collect()
    }

    /// Confinement and growth checks on the grid: `g(0) = 0`, `g > 0` away
    /// from zero, nondecreasing in `|y|`, and `g <= kappa exp(kappa |y|)`.
    pub fn validate(&self, grid: &TraitGrid, kappa: f64) -> Result<Vec<f64>> {
        if let PotentialSpec::Quadratic { a }
        | PotentialSpec::Quartic { a }
        | PotentialSpec::Abs { a } = self
        {
            if !(a.is_finite() && *a > 0.0) {
                return Err(Error::Validation(format!(
                    "potential coefficient must be positive, got {a}"
                )));
            }
        }
        let values = self.sample(grid)?;
        let c = grid.center();
        let scale = values
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(1e-300);
        let tol = 1e-12 * scale;
        if values[c].abs() > tol {
            return Err(Error::Validation(format!(
                "non-confining potential: g(0) = {} must vanish",
                values[c]
            )));
        }
        for (j, (&y, &g)) in grid.nodes().iter().zip(&values).enumerate() {
            if j != c && g <= 0.0 {
                return Err(Error::Validation(format!(
                    "non-confining potential: g({y}) = {g} must be positive"
                )));
            }
            if g > kappa * (kappa * y.abs()).exp() {
                return Err(Error::Validation(format!(
                    "potential violates growth bound at y = {y}: {g} > kappa e^(kappa|y|)"
                )));
            }
        }
        let right_ok = values[c..].windows(2).all(|w| w[1] >= w[0] - tol);
        let left_ok = values[..=c].windows(2).all(|w| w[0] >= w[1] - tol);
        if !(right_ok && left_ok) {
            return Err(Error::Validation(
                "non-confining potential: samples must increase toward the boundary".into(),
            ));
        }
        Ok(values)
    }
}

/// Shape of the competition kernel `K(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelShape {
    Constant {
        k: f64,
    },
    /// `amplitude * exp(-z^2 / (2 width^2))`
    Gaussian {
        amplitude: f64,
        width: f64,
    },
    /// `height` on `|z| <= radius`, zero elsewhere.
    Indicator {
        radius: f64,
        height: f64,
    },
    Tabulated(Table),
}

/// Competition kernel together with the optional lower bound `K >= k1` on `|z| <= r0 + 2`
/// required by the spreading experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    #[serde(flatten)]
    pub shape: KernelShape,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r0: Option<f64>,
}

impl KernelSpec {
    pub fn new(shape: KernelShape) -> Self {
        Self {
            shape,
            k1: None,
            r0: None,
        }
    }

    pub fn constant(k: f64) -> Self {
        Self::new(KernelShape::Constant { k })
    }

    pub fn with_lower_bound(mut self, k1: f64, r0: f64) -> Self {
        self.k1 = Some(k1);
        self.r0 = Some(r0);
        self
    }

    pub fn eval(&self, z: f64) -> Result<f64> {
        Ok(match &self.shape {
            KernelShape::Constant { k } => *k,
            KernelShape::Gaussian { amplitude, width } => {
                amplitude * (-z * z / (2.0 * width * width)).exp()
            }
            KernelShape::Indicator { radius, height } => {
                if z.abs() <= *radius {
                    *height
                } else {
                    0.0
                }
            }
            KernelShape::Tabulated(t) => t.eval(z).ok_or_else(|| {
                Error::Validation(format!("tabulated kernel does not cover z = {z}"))
            })?,
        })
    }

    pub fn sample(&self, grid: &TraitGrid) -> Result<Vec<f64>> {
        grid.nodes().iter().map(|&z| self.eval(z)).collect()
    }

    /// Nonnegativity, nontriviality and growth checks; returns the samples.
    pub fn validate(&self, grid: &TraitGrid, kappa: f64) -> Result<Vec<f64>> {
        if let KernelShape::Gaussian { width, .. } = &self.shape {
            if !(*width > 0.0) {
                return Err(Error::Validation(format!(
                    "gaussian kernel width must be positive, got {width}"
                )));
            }
        }
        let values = self.sample(grid)?;
        for (&z, &k) in grid.nodes().iter().zip(&values) {
            if !(k >= 0.0) {
                return Err(Error::Validation(format!(
                    "kernel negative at z = {z}: {k}"
                )));
            }
            if k > kappa * (kappa * z.abs()).exp() {
                return Err(Error::Validation(format!(
                    "kernel violates growth bound at z = {z}"
                )));
            }
        }
        // Only interior nodes matter under Dirichlet truncation.
        let n = values.len();
        if values[1..n - 1].iter().all(|&k| k == 0.0) {
            return Err(Error::Validation(
                "kernel vanishes identically on the grid".into(),
            ));
        }
        Ok(values)
    }

    /// Checks `K >= k1 > 0` on `|z| <= r0 + 2` (restricted to the grid).
    pub fn check_lower_bound(&self, grid: &TraitGrid) -> Result<bool> {
        let (Some(k1), Some(r0)) = (self.k1, self.r0) else {
            return Ok(false);
        };
        if !(k1 > 0.0) {
            return Err(Error::Validation(format!("k1 must be positive, got {k1}")));
        }
        for &z in grid.nodes() {
            if z.abs() <= r0 + 2.0 && self.eval(z)? < k1 {
                return Err(Error::Validation(format!(
                    "kernel drops below k1 = {k1} at z = {z}"
                )));
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TraitGrid {
        TraitGrid::new(5.0, 101).unwrap()
    }

    #[test]
    fn presets_pass_validation() {
        for g in [
            PotentialSpec::Quadratic { a: 1.0 },
            PotentialSpec::Quartic { a: 0.5 },
            PotentialSpec::Abs { a: 2.0 },
        ] {
            g.validate(&grid(), DEFAULT_KAPPA).unwrap();
        }
    }

    #[test]
    fn zero_and_shifted_potentials_rejected() {
        assert!(PotentialSpec::Zero
            .validate(&grid(), DEFAULT_KAPPA)
            .is_err());
        let shifted = PotentialSpec::Tabulated(Table::from_samples(vec![[-5.0, 1.0], [5.0, 1.0]]));
        assert!(shifted.validate(&grid(), DEFAULT_KAPPA).is_err());
        // double well: g(0) = 0 but not increasing toward the boundary
        let well = PotentialSpec::Tabulated(Table::from_samples(vec![
            [-5.0, 1.0],
            [-2.0, 3.0],
            [0.0, 0.0],
            [2.0, 3.0],
            [5.0, 1.0],
        ]));
        assert!(well.validate(&grid(), DEFAULT_KAPPA).is_err());
    }

    #[test]
    fn growth_bound_enforced() {
        let g = PotentialSpec::Quadratic { a: 1.0 };
        assert!(g.validate(&grid(), 0.1).is_err());
    }

    #[test]
    fn tabulated_interpolates_and_covers() {
        let t = Table::from_samples(vec![[-5.0, 25.0], [0.0, 0.0], [5.0, 25.0]]);
        let g = PotentialSpec::Tabulated(t);
        assert_eq!(g.eval(2.5).unwrap(), 12.5);
        assert!(g.eval(6.0).is_err());
        g.validate(&grid(), DEFAULT_KAPPA).unwrap();
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        std::fs::write(&p, "y,value\n-1,1\n0,0\n1,1\n").unwrap();
        let t = Table::read_csv(&p).unwrap();
        assert_eq!(t.samples, vec![[-1.0, 1.0], [0.0, 0.0], [1.0, 1.0]]);
        std::fs::write(&p, "y,value\n-1,1\n0,zero\n").unwrap();
        assert!(Table::read_csv(&p).is_err());
    }

    #[test]
    fn kernel_checks() {
        let g = grid();
        KernelSpec::constant(1.0)
            .validate(&g, DEFAULT_KAPPA)
            .unwrap();
        assert!(KernelSpec::constant(0.0)
            .validate(&g, DEFAULT_KAPPA)
            .is_err());
        assert!(KernelSpec::constant(-1.0)
            .validate(&g, DEFAULT_KAPPA)
            .is_err());
        let ind = KernelSpec::new(KernelShape::Indicator {
            radius: 1.0,
            height: 2.0,
        });
        assert_eq!(ind.eval(0.5).unwrap(), 2.0);
        assert_eq!(ind.eval(1.5).unwrap(), 0.0);
        let bounded = KernelSpec::constant(1.0).with_lower_bound(0.5, 1.0);
        assert!(bounded.check_lower_bound(&g).unwrap());
        let narrow = ind.with_lower_bound(1.0, 1.0);
        assert!(narrow.check_lower_bound(&g).is_err());
    }

    #[test]
    fn serde_shapes() {
        let k: KernelSpec = serde_json::from_str(
            r#"{"kind":"gaussian","amplitude":1.0,"width":2.0,"k1":0.1,"r0":1.0}"#,
        )
        .unwrap();
        assert_eq!(k.k1, Some(0.1));
        assert!(matches!(k.shape, KernelShape::Gaussian { .. }));
        let g: PotentialSpec = serde_json::from_str(r#"{"kind":"quadratic","a":1.0}"#).unwrap();
        assert_eq!(g, PotentialSpec::harmonic());
        let t: PotentialSpec =
            serde_json::from_str(r#"{"kind":"tabulated","path":"g.csv"}"#).unwrap();
        assert!(matches!(
            t,
            PotentialSpec::Tabulated(Table { path: Some(_), .. })
        ));
    }
}
