//! Low-lying eigenpairs of the discrete operator.

use std::io::Write;

use nalgebra::linalg::SymmetricTridiagonal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TraitGrid;
use crate::linalg::SymTridiagonal;
use crate::spectral::operator::{Boundary, Diffusion, DiscreteOperator, OperatorMatrix};

/// Eigen-residual threshold `|L psi - lambda psi| / |lambda|` accepted from the solver.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorMeta {
    pub alpha: f64,
    pub boundary: Boundary,
    pub diffusion: Diffusion,
}

/// Ascending eigenvalues with quadrature-orthonormal eigenvectors sampled on the full grid.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<Vec<f64>>,
    pub grid: TraitGrid,
    pub meta: OperatorMeta,
}

impl SpectralBasis {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn lambda0(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn psi0(&self) -> &[f64] {
        &self.eigenvectors[0]
    }

    /// `max_{i,j} |<psi_i, psi_j> - delta_ij|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.eigenvectors.iter().enumerate() {
            for (j, b) in self.eigenvectors.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.grid.inner(a, b) - target).abs());
            }
        }
        worst
    }

    /// `|L psi_i - lambda_i psi_i|_2 / |lambda_i|` for each pair, with the
    /// Euclidean norm over grid nodes.
    pub fn residuals(&self, op: &DiscreteOperator) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .zip(&self.eigenvectors)
            .map(|(&lam, psi)| {
                let lpsi = op.apply(psi);
                let r = lpsi
                    .iter()
                    .zip(psi)
                    .map(|(a, b)| (a - lam * b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                r / lam.abs()
            })
            .collect()
    }

    /// True when `psi_i` takes both signs at significant nodes.
    pub fn changes_sign(&self, i: usize) -> bool {
        let v = &self.eigenvectors[i];
        let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let tol = 1e-8 * max;
        v.iter().any(|x| *x > tol) && v.iter().any(|x| *x < -tol)
    }

    /// CSV export: first row eigenvalues, then one row per grid node with the
    /// eigenvector values at that node.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{}", join(&self.eigenvalues))?;
        for j in 0..self.grid.len() {
            let row: Vec<f64> = self.eigenvectors.iter().map(|v| v[j]).collect();
            writeln!(out, "{}", join(&row))?;
        }
        Ok(())
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// The `k` smallest eigenpairs of `op`.
///
/// Standard diffusion uses Sturm bisection plus inverse iteration on the
/// tridiagonal matrix. Fractional operators are first reduced to tridiagonal
/// form by Householder reflections. Eigenvectors are returned on the full
/// grid (zero at Dirichlet boundary nodes), orthonormal in the trapezoid inner
/// product, with `psi_0` positive at the centre node and every other vector
/// having a positive first significant component.
pub fn eigenpairs(op: &DiscreteOperator, k: usize) -> Result<SpectralBasis> {
    let grid = op.grid();
    let active = op.active();
    let limit = grid.len() - 2;
    if k == 0 || k > limit {
        return Err(Error::Parameter(format!(
            "eigenpair count must lie in 1..={limit}, got {k}"
        )));
    }
    let (values, sym_vectors) = match op.matrix() {
        OperatorMatrix::Tridiagonal(t) => t.smallest_eigenpairs(k)?,
        OperatorMatrix::Dense(d) => {
            let (q, diag, off) = SymmetricTridiagonal::new(d.clone()).unpack();
            let t = SymTridiagonal::new(diag.as_slice().to_vec(), off.as_slice().to_vec())?;
            let (values, z) = t.smallest_eigenpairs(k)?;
            let vectors = z
                .iter()
                .map(|zi| {
                    (&q * nalgebra::DVector::from_column_slice(zi))
                        .as_slice()
                        .to_vec()
                })
                .collect();
            (values, vectors)
        }
    };

    let sw = op.sqrt_weights();
    let center = grid.center();
    let mut eigenvectors = Vec::with_capacity(k);
    for (i, phi) in sym_vectors.iter().enumerate() {
        let mut psi = vec![0.0; grid.len()];
        for ((slot, v), s) in psi[active.clone()].iter_mut().zip(phi).zip(sw) {
            *slot = v / s;
        }
        let flip = if i == 0 {
            psi[center] < 0.0
        } else {
            let max = psi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            psi.iter()
                .find(|x| x.abs() > 1e-8 * max)
                .is_some_and(|x| *x < 0.0)
        };
        if flip {
            psi.iter_mut().for_each(|x| *x = -*x);
        }
        eigenvectors.push(psi);
    }

    let basis = SpectralBasis {
        eigenvalues: values,
        eigenvectors,
        grid: grid.clone(),
        meta: OperatorMeta {
            alpha: op.alpha(),
            boundary: op.boundary(),
            diffusion: op.diffusion(),
        },
    };
    let residuals = basis.residuals(op);
    if residuals
        .iter()
        .any(|r| !(r.is_finite() && *r < RESIDUAL_TOLERANCE))
    {
        return Err(Error::Eigensolver {
            message: format!("eigen-residual above {RESIDUAL_TOLERANCE:e}"),
            residuals,
        });
    }
    Ok(basis)
}

/// Principal eigenvalue only; bisection without eigenvectors for standard diffusion.
pub fn principal_eigenvalue(op: &DiscreteOperator) -> Result<f64> {
    match op.matrix() {
        OperatorMatrix::Tridiagonal(t) => Ok(t.eigenvalue(0)),
        OperatorMatrix::Dense(_) => Ok(eigenpairs(op, 1)?.lambda0()),
    }
}
