//! Coexistence of an age-optimizing network (AON) and a throughput-optimizing
//! network (TON) on a shared slotted collision channel.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: domain types, slot-outcome probability kernels for the
//!   competitive and device-coordinated channels, slot sampling and age
//!   dynamics.
//! * [`equilibrium`]: closed-form stage-game solutions (mixed-strategy Nash
//!   equilibrium and cooperative optimum), expected stage payoffs, a grid
//!   best-response oracle and the one-shot cooperation range.
//! * [`sim`]: repeated-game trajectories, realized discounted payoffs and
//!   deterministic Monte Carlo aggregation.
//! * [`etiquette`]: grim-trigger compliance tracking, the four deviation
//!   inequalities and `(alpha, P_R)` region sweeps.

pub mod equilibrium;
pub mod error;
pub mod etiquette;
pub mod model;
pub mod rng;
pub mod sim;
pub mod stats;

pub use equilibrium::{
    best_response_oracle, cooperation_beneficial_pr_set, cooperative_optimum,
    expected_stage_payoffs, msne, msne_equal_slots, GridBestResponse, PrSet, Regime, StageMode,
    StagePayoffs, ThresholdAges,
};
pub use error::{Error, Result};
pub use etiquette::{
    deviation_inequalities, expected_next_network_age, grim_trigger_path, region_sweep,
    spe_feasible, stage_one_throughput, Action, ActionProfile, DeviationCase, DeviationReport,
    EtiquetteStage, Inequality, InequalityEstimate, Play, RegionCell, RegionGrid, StageOneCase,
    Verdict,
};
pub use model::{
    apply_slot, expected_network_age, expected_network_throughput, expected_node_age,
    network_age, sample_slot, slot_probabilities_competitive, slot_probabilities_cooperative,
    AccessProfile, AgeState, Network, NetworkSizes, Recommendation, ScenarioParams, SlotEvent,
    SlotLengths, SlotMode, SlotProbabilities,
};
pub use sim::{
    discounted, gain_between, gain_of_cooperation, monte_carlo, run, run_competition,
    run_cooperation, run_seed, run_with_trace, Aggregate, Gain, Mode, PayoffAccounting, RunConfig, RunResult, StageRecord,
};
pub use stats::Estimate;
