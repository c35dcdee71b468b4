//! Shared fixtures for the criterion benches.

use aoi_coexist::{NetworkSizes, ScenarioParams, SlotLengths};

/// `N_A = N_T = n` with `sigma_I = 0.01`, `sigma_S = 1.01` and
/// `sigma_C = ratio * sigma_S`.
pub fn scenario(n: usize, ratio: f64) -> ScenarioParams {
    ScenarioParams::new(
        NetworkSizes::new(n, n).expect("n >= 1"),
        SlotLengths::from_beta(0.01, ratio).expect("valid slot lengths"),
    )
}
