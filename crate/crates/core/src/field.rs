//! Grid functions on the `(x, y)` tensor grid.
//!
//! Storage is row-major with `x` as the slow index: `u(x_i, y_j)` lives at
//! `i * n_y + j`, so every `x`-row is a contiguous trait profile.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{SpaceGrid, TraitGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct Field2 {
    pub x: SpaceGrid,
    pub y: TraitGrid,
    pub data: Vec<f64>,
}

impl Field2 {
    pub fn zeros(x: &SpaceGrid, y: &TraitGrid) -> Self {
        Self {
            x: x.clone(),
            y: y.clone(),
            data: vec![0.0; x.len() * y.len()],
        }
    }

    pub fn from_fn(x: &SpaceGrid, y: &TraitGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut data = Vec::with_capacity(x.len() * y.len());
        for &xi in x.nodes() {
            for &yj in y.nodes() {
                data.push(f(xi, yj));
            }
        }
        Self {
            x: x.clone(),
            y: y.clone(),
            data,
        }
    }

    /// Outer product `a(x) b(y)`.
    pub fn separable(x: &SpaceGrid, y: &TraitGrid, a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != x.len() || b.len() != y.len() {
            return Err(Error::GridMismatch(format!(
                "separable factors of length {}x{} on a {}x{} grid",
                a.len(),
                b.len(),
                x.len(),
                y.len()
            )));
        }
        let mut data = Vec::with_capacity(a.len() * b.len());
        for ai in a {
            data.extend(b.iter().map(|bj| ai * bj));
        }
        Ok(Self {
            x: x.clone(),
            y: y.clone(),
            data,
        })
    }

    pub fn n_x(&self) -> usize {
        self.x.len()
    }

    pub fn n_y(&self) -> usize {
        self.y.len()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_y() + j]
    }

    /// Trait profile at `x_i`.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_y();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.n_y())
    }

    /// Space profile at the trait node `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn sup(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `b(x_i) = ∫ K(z) u(x_i, z) dz` by trapezoid quadrature; `kernel` sampled on the trait grid.
    pub fn competition(&self, kernel: &[f64]) -> Vec<f64> {
        let w = self.y.weights();
        self.rows()
            .map(|r| {
                r.iter()
                    .zip(w)
                    .zip(kernel)
                    .map(|((u, w), k)| u * w * k)
                    .sum()
            })
            .collect()
    }

    pub fn same_grids(&self, other: &Field2) -> bool {
        self.x == other.x && self.y == other.y
    }

    /// Little-endian `f64` values, row-major with `x` as the slow index.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        for v in &self.data {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(x: &SpaceGrid, y: &TraitGrid, mut input: R) -> Result<Self> {
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        let n = x.len() * y.len();
        if bytes.len() != 8 * n {
            return Err(Error::GridMismatch(format!(
                "binary field has {} bytes, expected {}",
                bytes.len(),
                8 * n
            )));
        }
        let data = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(Self {
            x: x.clone(),
            y: y.clone(),
            data,
        })
    }
}

/// Writes `value` as pretty JSON followed by a newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Sidecar describing a binary field dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    pub n_x: usize,
    pub n_y: usize,
    #[serde(rename = "L_x")]
    pub l_x: f64,
    #[serde(rename = "R_y")]
    pub r_y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl FieldSidecar {
    pub fn for_field(field: &Field2) -> Self {
        Self {
            t: None,
            n_x: field.n_x(),
            n_y: field.n_y(),
            l_x: field.x.half_width(),
            r_y: field.y.half_width(),
            c: None,
            mu: None,
            lambda0: None,
            config_hash: None,
        }
    }
}

/// Writes `<stem>.bin` and `<stem>.json` into `dir`.
pub fn write_field_dump(
    dir: &Path,
    stem: &str,
    field: &Field2,
    sidecar: &FieldSidecar,
) -> Result<()> {
    let file = std::fs::File::create(dir.join(format!("{stem}.bin")))?;
    field.write_binary(std::io::BufWriter::new(file))?;
    write_json(&dir.join(format!("{stem}.json")), sidecar)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grids() -> (SpaceGrid, TraitGrid) {
        (
            SpaceGrid::new(2.0, 5).unwrap(),
            TraitGrid::new(1.0, 3).unwrap(),
        )
    }

    #[test]
    fn layout_is_x_major() {
        let (x, y) = grids();
        let f = Field2::from_fn(&x, &y, |a, b| 10.0 * a + b);
        assert_eq!(f.at(0, 2), -19.0);
        assert_eq!(f.row(4), &[19.0, 20.0, 21.0]);
        assert_eq!(f.column(1), vec![-20.0, -10.0, 0.0, 10.0, 20.0]);
    }

    #[test]
    fn competition_integrates_rows() {
        let (x, y) = grids();
        let f = Field2::from_fn(&x, &y, |_, _| 2.0);
        let b = f.competition(&[1.0, 1.0, 1.0]);
        assert!(b.iter().all(|v| (v - 4.0).abs() < 1e-14));
    }

    #[test]
    fn binary_round_trip() {
        let (x, y) = grids();
        let f = Field2::from_fn(&x, &y, |a, b| (a * b).sin() + 0.1);
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 * 15);
        let g = Field2::read_binary(&x, &y, buf.as_slice()).unwrap();
        assert_eq!(f, g);
        assert!(Field2::read_binary(&x, &y, &buf[..16]).is_err());
    }

    #[test]
    fn separable_checks_lengths() {
        let (x, y) = grids();
        assert!(Field2::separable(&x, &y, &[1.0; 5], &[1.0; 2]).is_err());
        let f = Field2::separable(&x, &y, &[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0, 0.5, 0.0]).unwrap();
        assert_eq!(f.at(3, 1), 2.0);
    }

    #[test]
    fn sidecar_keys() {
        let (x, y) = grids();
        let f = Field2::zeros(&x, &y);
        let mut s = FieldSidecar::for_field(&f);
        s.c = Some(1.5);
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(v["L_x"], 2.0);
        assert_eq!(v["R_y"], 1.0);
        assert_eq!(v["n_x"], 5);
        assert!(v.get("mu").is_none());
    }
}
