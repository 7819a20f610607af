//! Tail envelopes of the ground state.

use serde::{Deserialize, Serialize};

use crate::spectral::eigen::SpectralBasis;
use crate::spectral::operator::Diffusion;
use crate::stats::fit_line;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "envelope", rename_all = "snake_case")]
pub enum Envelope {
    /// `psi_0(y) <= C exp(-gamma |y|)` at every node.
    Exponential { gamma: f64 },
    /// `psi_0(y) <= C / |y|^exponent` for `|y| >= 1`.
    Polynomial { exponent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub envelope: Envelope,
    /// Smallest admissible constant.
    pub constant: f64,
    /// Node where the envelope touches `psi_0`.
    pub tight_at: f64,
    /// Slope of `log psi_0` against `log |y|` on the outer half of the domain.
    pub tail_exponent: Option<f64>,
}

/// Envelope constant for the ground state of `basis`.
///
/// Standard diffusion gets the exponential envelope with rate `gamma`; for
/// fractional diffusion of order `sigma` the polynomial envelope with exponent
/// `1 + 2 sigma` is used and `gamma` is ignored.
pub fn decay_report(basis: &SpectralBasis, gamma: f64) -> DecayReport {
    let psi = basis.psi0();
    let nodes = basis.grid.nodes();
    let (envelope, weight): (Envelope, Box<dyn Fn(f64) -> Option<f64>>) = match basis.meta.diffusion
    {
        Diffusion::Standard => (
            Envelope::Exponential { gamma },
            Box::new(move |y: f64| Some((gamma * y.abs()).exp())),
        ),
        Diffusion::Fractional { sigma } => {
            let exponent = 1.0 + 2.0 * sigma;
            (
                Envelope::Polynomial { exponent },
                Box::new(move |y: f64| (y.abs() >= 1.0).then(|| y.abs().powf(exponent))),
            )
        }
    };
    let mut constant = 0.0;
    let mut tight_at = 0.0;
    for (&y, &p) in nodes.iter().zip(psi) {
        if let Some(w) = weight(y) {
            let c = p * w;
            if c > constant {
                constant = c;
                tight_at = y;
            }
        }
    }
    DecayReport {
        envelope,
        constant,
        tight_at,
        tail_exponent: tail_exponent(basis),
    }
}

/// Log-log regression of `psi_0` on `R/2 <= |y|`, skipping nonpositive samples.
pub fn tail_exponent(basis: &SpectralBasis) -> Option<f64> {
    let half = 0.5 * basis.grid.half_width();
    let (xs, ys): (Vec<f64>, Vec<f64>) = basis
        .grid
        .nodes()
        .iter()
        .zip(basis.psi0())
        .filter(|(y, p)| y.abs() >= half && y.abs() >= 1.0 && **p > 0.0)
        .map(|(y, p)| (y.abs().ln(), p.ln()))
        .unzip();
    fit_line(&xs, &ys).map(|f| f.slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TraitGrid;
    use crate::spectral::eigen::eigenpairs;
    use crate::spectral::operator::{assemble_operator, Boundary};
    use crate::spectral::potential::PotentialSpec;

    fn basis() -> SpectralBasis {
        let grid = TraitGrid::new(8.0, 801).unwrap();
        let op = assemble_operator(
            &grid,
            &PotentialSpec::harmonic(),
            1.0,
            Boundary::Dirichlet,
            Diffusion::Standard,
        )
        .unwrap();
        eigenpairs(&op, 1).unwrap()
    }

    #[test]
    fn gaussian_beats_exponential() {
        let b = basis();
        let r = decay_report(&b, 1.0);
        assert!(r.constant.is_finite() && r.constant > 0.0);
        // loose far out: the envelope sits well above psi_0 at |y| = 6
        let j = b
            .grid
            .nodes()
            .iter()
            .position(|y| (*y - 6.0).abs() < 1e-9)
            .unwrap();
        assert!(b.psi0()[j] < 1e-3 * r.constant * (-6.0f64).exp());
        for (y, p) in b.grid.nodes().iter().zip(b.psi0()) {
            assert!(*p <= r.constant * (-y.abs()).exp() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn vanishing_rate_gives_max() {
        let b = basis();
        let max = b.psi0().iter().cloned().fold(0.0, f64::max);
        let r = decay_report(&b, 1e-12);
        assert!((r.constant - max).abs() < 1e-9 * max);
        assert_eq!(r.tight_at, 0.0);
    }
}
