//! Time stepping of the nonlocal Cauchy problem on the truncated `(x, y)` rectangle.

mod initial;
mod modes;
mod run;
mod stepper;

use crate::field::Field2;

pub use initial::{init_field, AmplitudeUnit, BumpSpec, InitialData, InitialField};
pub use modes::{max_mode_amplitudes, mode_amplitudes};
pub use run::{
    run, BoundKind, BoundViolation, Diagnostic, DtPolicy, RunContext, RunOptions, Slice,
    Trajectory, DIAGNOSTIC_MODES,
};
pub use stepper::{step, StepOptions, Stepper, NEGATIVE_TOLERANCE, REACTION_LIMIT};

/// Solution at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub t: f64,
    pub u: Field2,
}
