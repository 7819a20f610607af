//! Steady states, minimal speed, decay rates and traveling fronts.

mod profile;
mod rates;
mod steady;
mod wave;

pub use profile::{
    default_half_width, solve_kpp_profile, solve_kpp_profile_from, NewtonOptions, ProfileResidual,
    WaveProfile,
};
pub use rates::{critical_speed, decay_rates, ModeRates};
pub use steady::{steady_state, Regime, SteadyState};
pub use wave::{assemble_wave, wave_residual, TravelingWave, WaveResidual};
