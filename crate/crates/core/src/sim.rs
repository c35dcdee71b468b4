//! Repeated-game trajectories and Monte Carlo aggregation.
//!
//! A run plays `n_stages` stages. Each stage the AON reads its current network
//! age, both networks pick access probabilities (competitive equilibrium, or
//! the cooperative optimum for whichever network the device selects), one slot
//! is sampled and the ages are updated. The discounted payoff is the truncated
//! sum `(1 - alpha) * sum_{n=1}^{N} alpha^(n-1) u_n`; the neglected tail is at
//! most `alpha^N * sup |u_n|`.
//!
//! Every stage consumes one uniform for the device and one per node, in both
//! modes, so runs sharing a seed see the same random numbers stage by stage.

use rand::Rng;
use rayon::prelude::*;

use crate::equilibrium::{cooperative_optimum, msne, Regime};
use crate::error::{Error, Result};
use crate::model::{
    expected_network_age, expected_network_throughput, sample_slot,
    slot_probabilities_competitive, slot_probabilities_cooperative, AccessProfile, AgeState,
    Recommendation, ScenarioParams, SlotEvent, SlotMode,
};
use crate::rng::{derive_seed, stream};
use crate::stats::Estimate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Competition,
    Cooperation,
}

/// What a stage contributes to the discounted payoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PayoffAccounting {
    /// The sampled slot's throughput and resulting network age.
    #[default]
    Realized,
    /// The stage expectation given the age and profile at the start of the
    /// stage (and the realized recommendation under cooperation).
    Expected,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub params: ScenarioParams,
    pub n_stages: usize,
    pub mode: Mode,
    pub seed: u64,
    pub accounting: PayoffAccounting,
}

impl RunConfig {
    pub fn new(params: ScenarioParams, n_stages: usize, mode: Mode, seed: u64) -> Self {
        RunConfig {
            params,
            n_stages,
            mode,
            seed,
            accounting: PayoffAccounting::Realized,
        }
    }

    pub fn with_accounting(mut self, accounting: PayoffAccounting) -> Self {
        self.accounting = accounting;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_stages == 0 {
            return Err(Error::invalid("n_stages", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageRecord {
    pub network_age_before: f64,
    /// `None` under competition.
    pub recommendation: Option<Recommendation>,
    pub profile: AccessProfile,
    pub regime: Regime,
    pub event: SlotEvent,
    pub network_age_after: f64,
    pub u_aon: f64,
    pub u_ton: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub u_aon_discounted: f64,
    pub u_ton_discounted: f64,
    /// Share of counted stages with `tau_A = 1`.
    pub freq_tau_one: f64,
    pub freq_tau_zero: f64,
    pub final_ages: AgeState,
}

/// Advance `state` by one stage and report what happened.
pub(crate) fn play_stage<R: Rng + ?Sized>(
    params: &ScenarioParams,
    mode: Mode,
    accounting: PayoffAccounting,
    state: &mut AgeState,
    rng: &mut R,
) -> Result<StageRecord> {
    let sizes = params.sizes;
    let slots = params.slots;
    let age = state.network_age();
    let u_rec: f64 = rng.gen();

    let (recommendation, profile, regime, slot_mode, probs) = match mode {
        Mode::Competition => {
            let (profile, th) = msne(sizes, slots, age)?;
            let probs = slot_probabilities_competitive(sizes, profile);
            (None, profile, th.regime, SlotMode::Competitive, probs)
        }
        Mode::Cooperation => {
            let rec = Recommendation::from_uniform(u_rec, params.p_r);
            let (profile, regime, p) = match rec {
                Recommendation::Heads => {
                    let (profile, th) = cooperative_optimum(sizes, slots, age)?;
                    (profile, th.regime, 1.0)
                }
                Recommendation::Tails => {
                    let tau_t = 1.0 / sizes.n_ton() as f64;
                    (AccessProfile::new(0.0, tau_t)?, Regime::ForcedZero, 0.0)
                }
            };
            let probs = slot_probabilities_cooperative(sizes, profile, p)?;
            (Some(rec), profile, regime, SlotMode::Cooperative(rec), probs)
        }
    };

    let event = sample_slot(rng, sizes, profile, slot_mode);
    state.apply(event, &slots);

    let (u_aon, u_ton) = match accounting {
        PayoffAccounting::Realized => {
            let thr = match event {
                SlotEvent::SuccessTon(_) => {
                    slots.sigma_success() * params.rate / sizes.n_ton() as f64
                }
                _ => 0.0,
            };
            (-state.network_age(), thr)
        }
        PayoffAccounting::Expected => (
            -expected_network_age(&probs, age, &slots),
            expected_network_throughput(&probs, &slots, params.rate),
        ),
    };

    Ok(StageRecord {
        network_age_before: age,
        recommendation,
        profile,
        regime,
        event,
        network_age_after: state.network_age(),
        u_aon,
        u_ton,
    })
}

/// `(1 - alpha) * sum_n alpha^(n-1) u_n`, weights built by repeated
/// multiplication.
pub fn discounted<I: IntoIterator<Item = f64>>(alpha: f64, payoffs: I) -> f64 {
    let mut w = 1.0;
    let mut sum = 0.0;
    for u in payoffs {
        sum += w * u;
        w *= alpha;
    }
    (1.0 - alpha) * sum
}

fn simulate(config: &RunConfig, mut trace: Option<&mut Vec<StageRecord>>) -> Result<RunResult> {
    config.validate()?;
    let params = &config.params;
    let mut rng = stream(config.seed);
    let mut state = AgeState::uniform(params.sizes.n_aon(), params.initial_age)?;

    let mut w = 1.0;
    let (mut sum_aon, mut sum_ton) = (0.0, 0.0);
    let (mut counted, mut ones, mut zeros) = (0usize, 0usize, 0usize);
    for _ in 0..config.n_stages {
        let rec = play_stage(params, config.mode, config.accounting, &mut state, &mut rng)?;
        sum_aon += w * rec.u_aon;
        sum_ton += w * rec.u_ton;
        w *= params.alpha;
        if rec.recommendation != Some(Recommendation::Tails) {
            counted += 1;
            ones += (rec.profile.tau_aon() == 1.0) as usize;
            zeros += (rec.profile.tau_aon() == 0.0) as usize;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(rec);
        }
    }

    let frac = |k: usize| if counted == 0 { 0.0 } else { k as f64 / counted as f64 };
    Ok(RunResult {
        u_aon_discounted: (1.0 - params.alpha) * sum_aon,
        u_ton_discounted: (1.0 - params.alpha) * sum_ton,
        freq_tau_one: frac(ones),
        freq_tau_zero: frac(zeros),
        final_ages: state,
    })
}

/// One run in the configured mode, seeded directly with `config.seed`.
pub fn run(config: &RunConfig) -> Result<RunResult> {
    simulate(config, None)
}

pub fn run_with_trace(config: &RunConfig) -> Result<(RunResult, Vec<StageRecord>)> {
    let mut trace = Vec::with_capacity(config.n_stages);
    let result = simulate(config, Some(&mut trace))?;
    Ok((result, trace))
}

pub fn run_competition(config: &RunConfig) -> Result<RunResult> {
    if config.mode != Mode::Competition {
        return Err(Error::invalid("mode", "run_competition needs Mode::Competition"));
    }
    run(config)
}

/// Cooperative run. Frequencies count only stages in which the device
/// selected the AON, and are zero if it never did.
pub fn run_cooperation(config: &RunConfig) -> Result<RunResult> {
    if config.mode != Mode::Cooperation {
        return Err(Error::invalid("mode", "run_cooperation needs Mode::Cooperation"));
    }
    run(config)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub n_runs: usize,
    pub u_aon: Estimate,
    pub u_ton: Estimate,
    pub freq_tau_one: Estimate,
    pub freq_tau_zero: Estimate,
}

/// Seed of run `index` under master seed `master`.
pub fn run_seed(master: u64, index: usize) -> u64 {
    derive_seed(master, &[index as u64])
}

fn run_all(config: &RunConfig, n_runs: usize) -> Result<Vec<RunResult>> {
    if n_runs == 0 {
        return Err(Error::invalid("n_runs", "must be at least 1"));
    }
    config.validate()?;
    (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let cfg = RunConfig {
                seed: run_seed(config.seed, i),
                ..*config
            };
            run(&cfg)
        })
        .collect()
}

/// Mean and standard error over `n_runs` independent runs.
///
/// Runs execute on the current rayon pool; results are collected in run order
/// and summed sequentially, so the output does not depend on the pool size.
pub fn monte_carlo(config: &RunConfig, n_runs: usize) -> Result<Aggregate> {
    let results = run_all(config, n_runs)?;
    let est = |f: fn(&RunResult) -> f64| Estimate::from_samples(results.iter().map(f));
    Ok(Aggregate {
        n_runs,
        u_aon: est(|r| r.u_aon_discounted),
        u_ton: est(|r| r.u_ton_discounted),
        freq_tau_one: est(|r| r.freq_tau_one),
        freq_tau_zero: est(|r| r.freq_tau_zero),
    })
}

/// Paired difference `treatment - baseline` of discounted payoffs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gain {
    pub aon: Estimate,
    pub ton: Estimate,
}

/// Gain of `treatment` over `baseline`, pairing run `i` of each under the
/// treatment's master seed.
pub fn gain_between(treatment: &RunConfig, baseline: &RunConfig, n_runs: usize) -> Result<Gain> {
    let base = RunConfig {
        seed: treatment.seed,
        ..*baseline
    };
    let a = run_all(treatment, n_runs)?;
    let b = run_all(&base, n_runs)?;
    let diff = |f: fn(&RunResult) -> f64| {
        Estimate::from_samples(a.iter().zip(&b).map(move |(x, y)| f(x) - f(y)))
    };
    Ok(Gain {
        aon: diff(|r| r.u_aon_discounted),
        ton: diff(|r| r.u_ton_discounted),
    })
}

/// Cooperation minus competition at the given `alpha` and `P_R`.
pub fn gain_of_cooperation(
    params: &ScenarioParams,
    alpha: f64,
    p_r: f64,
    n_runs: usize,
    n_stages: usize,
    seed: u64,
) -> Result<Gain> {
    let params = params.with_alpha(alpha).with_p_r(p_r);
    let coop = RunConfig::new(params, n_stages, Mode::Cooperation, seed);
    let comp = RunConfig::new(params, n_stages, Mode::Competition, seed);
    gain_between(&coop, &comp, n_runs)
}
