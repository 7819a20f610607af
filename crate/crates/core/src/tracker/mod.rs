//! Front positions, speed estimates and invasion/emptiness measurements.

mod cones;
mod position;
mod speed;

pub use cones::{
    core_deviation, emptiness_beyond, envelope_forecast, fit_decay_rate, invasion_profile_error,
    ConeSeries, Emptiness, EnvelopeForecast,
};
pub use position::{front_position, level_crossings, SlicePolicy};
pub use speed::{estimate_speed, FrontTrace, SpeedEstimate, SpeedOutcome, MIN_SAMPLES};
