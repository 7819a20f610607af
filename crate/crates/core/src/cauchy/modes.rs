//! Projections `v_i(x) = <u(x, .), psi_i>` onto the trait eigenbasis.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::Field2;
use crate::spectral::SpectralBasis;

fn weighted_modes(field: &Field2, basis: &SpectralBasis, count: usize) -> Result<Vec<Vec<f64>>> {
    if field.y != basis.grid {
        return Err(Error::GridMismatch(
            "field and basis trait grids differ".into(),
        ));
    }
    let w = basis.grid.weights();
    Ok(basis.eigenvectors[..count.min(basis.len())]
        .iter()
        .map(|psi| psi.iter().zip(w).map(|(p, w)| p * w).collect())
        .collect())
}

/// `v_i(x_k)` for every basis mode `i` and requested index `k`, as `[i][k]`.
pub fn mode_amplitudes(
    field: &Field2,
    basis: &SpectralBasis,
    x_indices: &[usize],
) -> Result<Vec<Vec<f64>>> {
    let wpsi = weighted_modes(field, basis, basis.len())?;
    if let Some(bad) = x_indices.iter().find(|&&k| k >= field.n_x()) {
        return Err(Error::GridMismatch(format!(
            "x index {bad} outside the grid"
        )));
    }
    Ok(wpsi
        .iter()
        .map(|wp| {
            x_indices
                .iter()
                .map(|&k| field.row(k).iter().zip(wp).map(|(u, w)| u * w).sum())
                .collect()
        })
        .collect())
}

/// `max_x |v_i(x)|` for the first `count` modes.
pub fn max_mode_amplitudes(
    field: &Field2,
    basis: &SpectralBasis,
    count: usize,
) -> Result<Vec<f64>> {
    let wpsi = weighted_modes(field, basis, count)?;
    let per_row: Vec<Vec<f64>> = field
        .data
        .par_chunks(field.n_y())
        .map(|row| {
            wpsi.iter()
                .map(|wp| row.iter().zip(wp).map(|(u, w)| u * w).sum::<f64>().abs())
                .collect()
        })
        .collect();
    let mut out = vec![0.0f64; wpsi.len()];
    for row in per_row {
        for (o, v) in out.iter_mut().zip(row) {
            *o = o.max(v);
        }
    }
    Ok(out)
}
