//! Spectral analysis of the confining operator `-d²/dy² + alpha g(y)`.

pub mod critical;
pub mod decay;
pub mod eigen;
pub mod operator;
pub mod potential;

pub use critical::{
    find_alpha_bar, find_alpha_bar_with, truncation_study, AlphaBar, AlphaSearch, TruncationPoint,
};
pub use decay::{decay_report, tail_exponent, DecayReport, Envelope};
pub use eigen::{eigenpairs, principal_eigenvalue, OperatorMeta, SpectralBasis};
pub use operator::{assemble_operator, Boundary, Diffusion, DiscreteOperator, OperatorMatrix};
pub use potential::{KernelShape, KernelSpec, PotentialSpec, Table, DEFAULT_KAPPA};
