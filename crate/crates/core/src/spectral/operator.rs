//! Finite-difference discretization of `-d²/dy² + alpha g(y)` on the trait grid.
//!
//! The operator acts on the *active* nodes: interior nodes for Dirichlet
//! truncation, all nodes for Neumann. It is stored in the symmetrized form
//! `S = W^{1/2} A W^{-1/2}` where `W` holds the trapezoid weights of the
//! active nodes, so that `A` is self-adjoint in the quadrature inner product
//! and `S` is an ordinary symmetric matrix. For Dirichlet truncation the
//! active weights are all equal and `S = A`.

use std::ops::Range;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TraitGrid;
use crate::linalg::SymTridiagonal;
use crate::spectral::potential::{PotentialSpec, DEFAULT_KAPPA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    #[default]
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Diffusion {
    #[default]
    Standard,
    /// Spectral power `sigma` of the Dirichlet finite-difference Laplacian.
    Fractional { sigma: f64 },
}

/// Operator matrix on the active nodes, symmetrized.
#[derive(Debug, Clone)]
pub enum OperatorMatrix {
    Tridiagonal(SymTridiagonal),
    Dense(DMatrix<f64>),
}

#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    grid: TraitGrid,
    alpha: f64,
    boundary: Boundary,
    diffusion: Diffusion,
    /// `alpha * g(y_j)` at every node.
    potential: Vec<f64>,
    active: Range<usize>,
    sqrt_weights: Vec<f64>,
    matrix: OperatorMatrix,
}

/// Builds the discrete operator after validating the potential and parameters.
pub fn assemble_operator(
    grid: &TraitGrid,
    g: &PotentialSpec,
    alpha: f64,
    boundary: Boundary,
    diffusion: Diffusion,
) -> Result<DiscreteOperator> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::Parameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let g_values = g.validate(grid, DEFAULT_KAPPA)?;
    let potential: Vec<f64> = g_values.iter().map(|v| alpha * v).collect();
    DiscreteOperator::from_potential(grid, potential, alpha, boundary, diffusion)
}

impl DiscreteOperator {
    /// Assembles from sampled `alpha g` values without any confinement check.
    ///
    /// Meant for diagnostics such as the zero-potential Laplacian.
    pub fn from_potential(
        grid: &TraitGrid,
        potential: Vec<f64>,
        alpha: f64,
        boundary: Boundary,
        diffusion: Diffusion,
    ) -> Result<Self> {
        let n = grid.len();
        if potential.len() != n {
            return Err(Error::GridMismatch(format!(
                "potential has {} samples, grid has {n} nodes",
                potential.len()
            )));
        }
        let h2 = grid.spacing() * grid.spacing();
        let active = match boundary {
            Boundary::Dirichlet => 1..n - 1,
            Boundary::Neumann => 0..n,
        };
        let sqrt_weights: Vec<f64> = grid.weights()[active.clone()]
            .iter()
            .map(|w| w.sqrt())
            .collect();
        let m = active.len();
        let matrix = match diffusion {
            Diffusion::Standard => {
                let diag: Vec<f64> = potential[active.clone()]
                    .iter()
                    .map(|p| 2.0 / h2 + p)
                    .collect();
                let mut off = vec![-1.0 / h2; m - 1];
                if boundary == Boundary::Neumann {
                    // Reflected ghost node: rows 0 and n-1 read (2u_0 - 2u_1)/h^2.
                    // Symmetrizing with the half weights at the ends gives -sqrt(2)/h^2.
                    off[0] = -std::f64::consts::SQRT_2 / h2;
                    off[m - 2] = -std::f64::consts::SQRT_2 / h2;
                }
                OperatorMatrix::Tridiagonal(SymTridiagonal::new(diag, off)?)
            }
            Diffusion::Fractional { sigma } => {
                if !(sigma > 0.0 && sigma < 1.0) {
                    return Err(Error::Parameter(format!(
                        "fractional order must lie in (0, 1), got {sigma}"
                    )));
                }
                if boundary != Boundary::Dirichlet {
                    return Err(Error::Parameter(
                        "fractional diffusion is defined through the Dirichlet Laplacian only"
                            .into(),
                    ));
                }
                let mut dense = dirichlet_laplacian_power(m, grid.spacing(), sigma);
                for (i, p) in potential[active.clone()].iter().enumerate() {
                    dense[(i, i)] += p;
                }
                OperatorMatrix::Dense(dense)
            }
        };
        Ok(Self {
            grid: grid.clone(),
            alpha,
            boundary,
            diffusion,
            potential,
            active,
            sqrt_weights,
            matrix,
        })
    }

    pub fn grid(&self) -> &TraitGrid {
        &self.grid
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn diffusion(&self) -> Diffusion {
        self.diffusion
    }

    /// `alpha g(y_j)` on every node.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Grid indices on which the operator acts.
    pub fn active(&self) -> Range<usize> {
        self.active.clone()
    }

    pub fn matrix(&self) -> &OperatorMatrix {
        &self.matrix
    }

    pub(crate) fn sqrt_weights(&self) -> &[f64] {
        &self.sqrt_weights
    }

    /// Applies the symmetrized matrix to a vector on the active nodes.
    pub(crate) fn apply_symmetric(&self, x: &[f64]) -> Vec<f64> {
        match &self.matrix {
            OperatorMatrix::Tridiagonal(t) => t.apply(x),
            OperatorMatrix::Dense(d) => {
                let v = nalgebra::DVector::from_column_slice(x);
                (d * v).as_slice().to_vec()
            }
        }
    }

    /// `L f` for a function sampled on the full grid; inactive nodes return zero.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let scaled: Vec<f64> = f[self.active.clone()]
            .iter()
            .zip(&self.sqrt_weights)
            .map(|(v, s)| v * s)
            .collect();
        let out = self.apply_symmetric(&scaled);
        let mut full = vec![0.0; self.grid.len()];
        for ((slot, v), s) in full[self.active.clone()]
            .iter_mut()
            .zip(out)
            .zip(&self.sqrt_weights)
        {
            *slot = v / s;
        }
        full
    }

    /// Quadrature Rayleigh quotient `<L f, f> / <f, f>`.
    pub fn rayleigh_quotient(&self, f: &[f64]) -> f64 {
        let lf = self.apply(f);
        self.grid.inner(&lf, f) / self.grid.inner(f, f)
    }

    /// Unsymmetrized operator as a full `n x n` grid matrix.
    ///
    /// Dirichlet boundary rows are identity clamps; interior rows keep their
    /// stencil coupling to the (zero) boundary values, so the Dirichlet and
    /// Neumann matrices of a standard operator differ only in rows `0` and `n-1`.
    pub fn full_matrix(&self) -> DMatrix<f64> {
        let n = self.grid.len();
        let mut a = DMatrix::zeros(n, n);
        let h2 = self.grid.spacing().powi(2);
        let off = self.active.start;
        match (&self.matrix, self.boundary) {
            (OperatorMatrix::Tridiagonal(_), _) => {
                for i in 1..n - 1 {
                    a[(i, i - 1)] = -1.0 / h2;
                    a[(i, i)] = 2.0 / h2 + self.potential[i];
                    a[(i, i + 1)] = -1.0 / h2;
                }
                if self.boundary == Boundary::Neumann {
                    a[(0, 0)] = 2.0 / h2 + self.potential[0];
                    a[(0, 1)] = -2.0 / h2;
                    a[(n - 1, n - 1)] = 2.0 / h2 + self.potential[n - 1];
                    a[(n - 1, n - 2)] = -2.0 / h2;
                }
            }
            (OperatorMatrix::Dense(d), _) => {
                let m = self.active.len();
                for i in 0..m {
                    for j in 0..m {
                        a[(i + off, j + off)] =
                            d[(i, j)] * self.sqrt_weights[j] / self.sqrt_weights[i];
                    }
                }
            }
        }
        if self.boundary == Boundary::Dirichlet {
            a[(0, 0)] = 1.0;
            a[(n - 1, n - 1)] = 1.0;
        }
        a
    }

    /// Unsymmetrized tridiagonal bands `(sub, diag, sup)` on the active nodes,
    /// or `None` for fractional (dense) operators.
    pub fn tridiagonal_bands(&self) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let OperatorMatrix::Tridiagonal(t) = &self.matrix else {
            return None;
        };
        let w = &self.sqrt_weights;
        let sub: Vec<f64> = (0..t.off().len())
            .map(|i| t.off()[i] * w[i] / w[i + 1])
            .collect();
        let sup: Vec<f64> = (0..t.off().len())
            .map(|i| t.off()[i] * w[i + 1] / w[i])
            .collect();
        Some((sub, t.diag().to_vec(), sup))
    }

    /// Largest absolute asymmetry of the stored symmetric matrix.
    pub fn asymmetry(&self) -> f64 {
        match &self.matrix {
            OperatorMatrix::Tridiagonal(_) => 0.0,
            OperatorMatrix::Dense(d) => (d - d.transpose()).abs().max(),
        }
    }
}

/// `sigma`-th power of the `m x m` Dirichlet finite-difference Laplacian with spacing `h`,
/// assembled from its closed-form sine eigenbasis.
///
/// With `theta = pi/(m+1)` and `mu_k = ((2 - 2 cos k theta)/h^2)^sigma`,
/// `(A^sigma)_{ij} = c(i-j) - c(i+j)` where `c(p) = (1/(m+1)) sum_k mu_k cos(p k theta)`.
pub fn dirichlet_laplacian_power(m: usize, h: f64, sigma: f64) -> DMatrix<f64> {
    let period = 2 * (m + 1);
    let theta = std::f64::consts::PI / (m + 1) as f64;
    let mu: Vec<f64> = (1..=m)
        .map(|k| ((2.0 - 2.0 * (k as f64 * theta).cos()) / (h * h)).powf(sigma))
        .collect();
    let table: Vec<f64> = (0..=period).map(|r| (r as f64 * theta).cos()).collect();
    let coeffs: Vec<f64> = (0..=2 * m + 2)
        .map(|p| {
            mu.iter()
                .enumerate()
                .map(|(k, mk)| mk * table[(p * (k + 1)) % period])
                .sum::<f64>()
                / (m + 1) as f64
        })
        .collect();
    DMatrix::from_fn(m, m, |i, j| {
        let (a, b) = (i + 1, j + 1);
        coeffs[a.abs_diff(b)] - coeffs[a + b]
    })
}
