//! Tridiagonal kernels: factored solves for the implicit sweeps and a
//! Sturm-bisection / inverse-iteration eigensolver for symmetric matrices.

use crate::error::{Error, Result};

/// LU factors of a tridiagonal matrix without pivoting.
///
/// Only used for diagonally dominant M-matrices (implicit diffusion sweeps
/// and shifted Schrödinger operators below their spectrum), where the
/// elimination is stable and maps nonnegative data to nonnegative data.
#[derive(Debug, Clone)]
pub struct ThomasFactor {
    multipliers: Vec<f64>,
    pivots: Vec<f64>,
    sup: Vec<f64>,
}

impl ThomasFactor {
    /// `sub[i]` is entry `(i + 1, i)`, `sup[i]` is entry `(i, i + 1)`.
    pub fn new(sub: &[f64], diag: &[f64], sup: &[f64]) -> Result<Self> {
        let n = diag.len();
        if n == 0 || sub.len() + 1 != n || sup.len() + 1 != n {
            return Err(Error::Parameter(format!(
                "tridiagonal band lengths {}/{}/{} are inconsistent",
                sub.len(),
                n,
                sup.len()
            )));
        }
        let mut pivots = Vec::with_capacity(n);
        let mut multipliers = Vec::with_capacity(n.saturating_sub(1));
        pivots.push(diag[0]);
        for i in 1..n {
            let m = sub[i - 1] / pivots[i - 1];
            multipliers.push(m);
            pivots.push(diag[i] - m * sup[i - 1]);
        }
        if let Some(p) = pivots.iter().find(|p| !(p.is_finite() && **p != 0.0)) {
            return Err(Error::Parameter(format!(
                "tridiagonal factorization hit pivot {p}"
            )));
        }
        Ok(Self {
            multipliers,
            pivots,
            sup: sup.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivots.is_empty()
    }

    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.len();
        debug_assert_eq!(rhs.len(), n);
        for i in 1..n {
            rhs[i] -= self.multipliers[i - 1] * rhs[i - 1];
        }
        rhs[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            rhs[i] = (rhs[i] - self.sup[i] * rhs[i + 1]) / self.pivots[i];
        }
    }

    /// Solves `width` interleaved systems at once: row `i` of system `j`
    /// lives at `data[(i + offset) * stride + j]` for `j < width`.
    ///
    /// Rows outside `offset..offset + n` are left untouched, which lets the
    /// caller keep clamped boundary rows in the same buffer.
    pub fn solve_interleaved(&self, data: &mut [f64], stride: usize, offset: usize, width: usize) {
        let n = self.len();
        for i in 1..n {
            let m = self.multipliers[i - 1];
            let (prev, cur) = data.split_at_mut((i + offset) * stride);
            let prev = &prev[(i + offset - 1) * stride..(i + offset - 1) * stride + width];
            for (c, p) in cur[..width].iter_mut().zip(prev) {
                *c -= m * p;
            }
        }
        let last = (n - 1 + offset) * stride;
        let inv = 1.0 / self.pivots[n - 1];
        for v in &mut data[last..last + width] {
            *v *= inv;
        }
        for i in (0..n - 1).rev() {
            let s = self.sup[i];
            let inv = 1.0 / self.pivots[i];
            let (cur, next) = data.split_at_mut((i + offset + 1) * stride);
            let cur = &mut cur[(i + offset) * stride..(i + offset) * stride + width];
            for (c, nx) in cur.iter_mut().zip(&next[..width]) {
                *c = (*c - s * nx) * inv;
            }
        }
    }
}

/// LU with partial pivoting of a general tridiagonal matrix (LAPACK `gttrf`).
#[derive(Debug, Clone)]
pub(crate) struct PivotedTridiagonal {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl PivotedTridiagonal {
    pub(crate) fn new(sub: &[f64], diag: &[f64], sup: &[f64], tiny: f64) -> Self {
        let n = diag.len();
        let mut dl = sub.to_vec();
        let mut d = diag.to_vec();
        let mut du = sup.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        for p in &mut d {
            if *p == 0.0 {
                *p = tiny;
            }
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    pub(crate) fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i] - self.dl[i] * b[i + 1];
                b[i] = b[i + 1];
                b[i + 1] = temp;
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || off.len() + 1 != diag.len() {
            return Err(Error::Parameter(format!(
                "symmetric tridiagonal needs n diagonal and n-1 off-diagonal entries, got {} and {}",
                diag.len(),
                off.len()
            )));
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y: Vec<f64> = self.diag.iter().zip(x).map(|(d, v)| d * v).collect();
        for i in 0..n - 1 {
            y[i] += self.off[i] * x[i + 1];
            y[i + 1] += self.off[i] * x[i];
        }
        y
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE.sqrt() * self.norm_bound();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        for i in 0..self.len() {
            if i > 0 {
                q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q;
            }
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `index`-th smallest eigenvalue (0-based) by bisection.
    pub fn eigenvalue(&self, index: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let pad = f64::EPSILON * self.norm_bound() * 4.0;
        lo -= pad;
        hi += pad;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > index {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// The `k` smallest eigenpairs with Euclidean-orthonormal eigenvectors.
    ///
    /// Eigenvector signs follow the convention of [`fix_sign`]: the ground
    /// state is made positive, the others get a positive leading component.
    pub fn smallest_eigenpairs(&self, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let n = self.len();
        if k == 0 || k > n {
            return Err(Error::Parameter(format!(
                "requested {k} eigenpairs of a {n}x{n} matrix"
            )));
        }
        let values: Vec<f64> = (0..k).map(|i| self.eigenvalue(i)).collect();
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
        for (i, &lambda) in values.iter().enumerate() {
            let mut v = if i == 0 {
                self.ground_state(lambda)
                    .unwrap_or_else(|| self.inverse_iteration(lambda, &vectors))
            } else {
                self.inverse_iteration(lambda, &vectors)
            };
            fix_sign(&mut v, i == 0);
            vectors.push(v);
        }
        Ok((values, vectors))
    }

    /// Inverse iteration just below the bottom of the spectrum.
    ///
    /// For a matrix with nonpositive off-diagonal (an M-matrix once shifted
    /// below its spectrum) the shifted inverse is entrywise positive, so this
    /// route returns a ground state that is positive to the last digit.
    fn ground_state(&self, lambda: f64) -> Option<Vec<f64>> {
        if self.off.iter().any(|&e| e > 0.0) {
            return None;
        }
        let delta = 1e-6 * lambda.abs().max(1e-3);
        let shifted: Vec<f64> = self.diag.iter().map(|d| d - (lambda - delta)).collect();
        let factor = ThomasFactor::new(&self.off, &shifted, &self.off).ok()?;
        if factor.pivots().iter().any(|&p| p <= 0.0) {
            return None;
        }
        let mut v = vec![1.0; self.len()];
        for _ in 0..4 {
            factor.solve_in_place(&mut v);
            normalize(&mut v);
        }
        Some(v)
    }

    fn inverse_iteration(&self, lambda: f64, previous: &[Vec<f64>]) -> Vec<f64> {
        let n = self.len();
        let scale = self.norm_bound();
        let shift = lambda + 1e-14 * scale.max(lambda.abs());
        let shifted: Vec<f64> = self.diag.iter().map(|d| d - shift).collect();
        let lu = PivotedTridiagonal::new(&self.off, &shifted, &self.off, f64::EPSILON * scale);
        // Deterministic start vector without any parity symmetry.
        let mut v: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.5 * (1.7 * i as f64 + 0.3).sin())
            .collect();
        for _ in 0..4 {
            orthogonalize(&mut v, previous);
            normalize(&mut v);
            lu.solve_in_place(&mut v);
            orthogonalize(&mut v, previous);
            normalize(&mut v);
        }
        v
    }
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
        v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
    }
}

/// Deterministic sign convention: positive sum for a ground state, otherwise
/// a positive first significant component.
pub fn fix_sign(v: &mut [f64], ground: bool) {
    let flip = if ground {
        v.iter().sum::<f64>() < 0.0
    } else {
        let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        v.iter()
            .find(|x| x.abs() > 1e-8 * max)
            .is_some_and(|x| *x < 0.0)
    };
    if flip {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize, h: f64) -> SymTridiagonal {
        SymTridiagonal::new(vec![2.0 / (h * h); n], vec![-1.0 / (h * h); n - 1]).unwrap()
    }

    #[test]
    fn thomas_solves_poisson() {
        let n = 9;
        let sub = vec![-1.0; n - 1];
        let diag = vec![2.0; n];
        let f = ThomasFactor::new(&sub, &diag, &sub).unwrap();
        // x_i = i*(n+1-i)/2 solves -x'' = 1 with zero ends (1-based i).
        let mut rhs = vec![1.0; n];
        f.solve_in_place(&mut rhs);
        for (i, x) in rhs.iter().enumerate() {
            let k = (i + 1) as f64;
            assert!((x - k * (n as f64 + 1.0 - k) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn interleaved_matches_single() {
        let n = 6;
        let sub: Vec<f64> = (0..n - 1).map(|i| -0.3 - 0.01 * i as f64).collect();
        let sup: Vec<f64> = (0..n - 1).map(|i| -0.2 + 0.02 * i as f64).collect();
        let diag = vec![2.0; n];
        let f = ThomasFactor::new(&sub, &diag, &sup).unwrap();
        let width = 3;
        let stride = 4;
        let offset = 1;
        let mut data = vec![7.0; (n + 2) * stride];
        for i in 0..n {
            for j in 0..width {
                data[(i + offset) * stride + j] = (i * 3 + j) as f64;
            }
        }
        let snapshot = data.clone();
        f.solve_interleaved(&mut data, stride, offset, width);
        for j in 0..width {
            let mut col: Vec<f64> = (0..n)
                .map(|i| snapshot[(i + offset) * stride + j])
                .collect();
            f.solve_in_place(&mut col);
            for i in 0..n {
                assert!((data[(i + offset) * stride + j] - col[i]).abs() < 1e-14);
            }
        }
        // untouched padding
        assert_eq!(data[3], 7.0);
        assert_eq!(data[(n + 1) * stride], 7.0);
    }

    #[test]
    fn pivoted_solver_handles_zero_diagonal() {
        // [[0,1,0],[1,0,1],[0,1,1]] x = b
        let lu = PivotedTridiagonal::new(&[1.0, 1.0], &[0.0, 0.0, 1.0], &[1.0, 1.0], 1e-300);
        let x = [1.0, 2.0, 3.0];
        let mut b = vec![2.0, 4.0, 5.0];
        lu.solve_in_place(&mut b);
        for (a, e) in b.iter().zip(x) {
            assert!((a - e).abs() < 1e-12, "{b:?}");
        }
    }

    #[test]
    fn laplacian_spectrum_closed_form() {
        let n = 50;
        let h = 0.1;
        let t = laplacian(n, h);
        let (vals, vecs) = t.smallest_eigenpairs(5).unwrap();
        for (k, (lam, v)) in vals.iter().zip(&vecs).enumerate() {
            let theta = (k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64;
            let exact = (2.0 - 2.0 * theta.cos()) / (h * h);
            assert!((lam - exact).abs() < 1e-10 * exact, "{k}: {lam} vs {exact}");
            let r = t.apply(v);
            let res: f64 = r
                .iter()
                .zip(v)
                .map(|(a, b)| (a - lam * b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(res < 1e-9 * lam, "residual {res}");
        }
        assert!(vecs[0].iter().all(|x| *x > 0.0));
    }

    #[test]
    fn sturm_count_brackets() {
        let t = laplacian(10, 1.0);
        assert_eq!(t.count_below(-1.0), 0);
        assert_eq!(t.count_below(5.0), 10);
        let l3 = t.eigenvalue(3);
        assert_eq!(t.count_below(l3 - 1e-9), 3);
        assert_eq!(t.count_below(l3 + 1e-9), 4);
    }

    #[test]
    fn rejects_bad_requests() {
        let t = laplacian(4, 1.0);
        assert!(t.smallest_eigenpairs(0).is_err());
        assert!(t.smallest_eigenpairs(5).is_err());
        assert!(SymTridiagonal::new(vec![1.0; 3], vec![0.0; 3]).is_err());
    }
}
