//! Uniform one-dimensional grids with trapezoid quadrature.
//!
//! Both grids are symmetric about the origin and contain it as a node, so
//! quantities pinned at `0` (the optimal trait, the front midpoint) are
//! sampled exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A symmetric uniform grid on `[-half_width, half_width]` including both endpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    half_width: f64,
    nodes: Vec<f64>,
    spacing: f64,
    weights: Vec<f64>,
}

impl UniformGrid {
    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Parameter(format!(
                "grid half-width must be positive and finite, got {half_width}"
            )));
        }
        if n_points < 3 || n_points % 2 == 0 {
            return Err(Error::Parameter(format!(
                "grid needs an odd number of points >= 3, got {n_points}"
            )));
        }
        let spacing = 2.0 * half_width / (n_points - 1) as f64;
        let mid = (n_points / 2) as isize;
        // Nodes are built from the centre index so that the middle node is
        // exactly zero and the grid is exactly antisymmetric.
        let nodes = (0..n_points as isize)
            .map(|i| (i - mid) as f64 * spacing)
            .collect();
        let mut weights = vec![spacing; n_points];
        weights[0] = 0.5 * spacing;
        weights[n_points - 1] = 0.5 * spacing;
        Ok(Self {
            half_width,
            nodes,
            spacing,
            weights,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the node at the origin.
    pub fn center(&self) -> usize {
        self.nodes.len() / 2
    }

    /// Trapezoid rule for samples on this grid.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Weighted inner product `sum_j w_j a_j b_j`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(a.iter().zip(b))
            .map(|(w, (x, y))| w * x * y)
            .sum()
    }

    /// Linear interpolation of grid samples at an arbitrary point; zero outside the grid.
    pub fn interpolate(&self, values: &[f64], x: f64) -> f64 {
        let s = (x + self.half_width) / self.spacing;
        if s < 0.0 || s > (self.len() - 1) as f64 {
            return 0.0;
        }
        let i = (s.floor() as usize).min(self.len() - 2);
        let frac = s - i as f64;
        values[i] * (1.0 - frac) + values[i + 1] * frac
    }
}

/// Discrete home of the trait variable `y`.
pub type TraitGrid = UniformGrid;

/// Discrete home of the space variable `x`.
pub type SpaceGrid = UniformGrid;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_with_zero_node() {
        let g = UniformGrid::new(10.0, 2001).unwrap();
        assert_eq!(g.nodes()[g.center()], 0.0);
        for (a, b) in g.nodes().iter().zip(g.nodes().iter().rev()) {
            assert_eq!(*a, -*b);
        }
        assert_eq!(g.nodes()[0], -10.0);
    }

    #[test]
    fn weights_sum_to_length() {
        for n in [3, 5, 101, 2001] {
            let g = UniformGrid::new(7.5, n).unwrap();
            let s: f64 = g.weights().iter().sum();
            assert!((s - 15.0).abs() < 1e-12, "n={n}: {s}");
        }
    }

    #[test]
    fn rejects_even_or_tiny() {
        assert!(UniformGrid::new(1.0, 4).is_err());
        assert!(UniformGrid::new(1.0, 1).is_err());
        assert!(UniformGrid::new(0.0, 5).is_err());
    }

    #[test]
    fn trapezoid_exact_for_linear() {
        let g = UniformGrid::new(3.0, 7).unwrap();
        let f: Vec<f64> = g.nodes().iter().map(|x| 2.0 * x + 1.0).collect();
        assert!((g.integrate(&f) - 6.0).abs() < 1e-14);
    }

    #[test]
    fn interpolation_hits_nodes() {
        let g = UniformGrid::new(2.0, 5).unwrap();
        let f = [0.0, 1.0, 4.0, 9.0, 16.0];
        assert_eq!(g.interpolate(&f, 0.0), 4.0);
        assert_eq!(g.interpolate(&f, 0.5), 6.5);
        assert_eq!(g.interpolate(&f, 2.0), 16.0);
        assert_eq!(g.interpolate(&f, 2.5), 0.0);
    }
}
