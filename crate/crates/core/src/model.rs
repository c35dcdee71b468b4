//! Domain types, slot-outcome probability kernels and age dynamics.
//!
//! A slot is idle when no node transmits, a success when exactly one node
//! transmits and a collision otherwise. Nodes within a network share one
//! access probability. Under the coordination device only the recommended
//! network contends, so the cooperative kernel is a `P_R`-weighted mixture of
//! two single-network channels.

use rand::Rng;

use crate::error::{Error, Result};

/// Idle, success and collision slot durations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotLengths {
    idle: f64,
    success: f64,
    collision: f64,
}

impl SlotLengths {
    pub fn new(idle: f64, success: f64, collision: f64) -> Result<Self> {
        for (name, v) in [
            ("sigma_idle", idle),
            ("sigma_success", success),
            ("sigma_collision", collision),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("{v} must be finite and > 0")));
            }
        }
        if idle >= success {
            return Err(Error::invalid(
                "sigma_idle",
                format!("{idle} must be smaller than sigma_success {success}"),
            ));
        }
        Ok(SlotLengths {
            idle,
            success,
            collision,
        })
    }

    /// `sigma_I = beta`, `sigma_S = 1 + beta`, `sigma_C = ratio * sigma_S`.
    pub fn from_beta(beta: f64, collision_ratio: f64) -> Result<Self> {
        let success = 1.0 + beta;
        SlotLengths::new(beta, success, collision_ratio * success)
    }

    pub fn sigma_idle(&self) -> f64 {
        self.idle
    }

    pub fn sigma_success(&self) -> f64 {
        self.success
    }

    pub fn sigma_collision(&self) -> f64 {
        self.collision
    }

    /// Expected slot duration under `probs`.
    pub fn mean_length(&self, probs: &SlotProbabilities) -> f64 {
        probs.p_idle * self.idle
            + probs.p_success_total * self.success
            + probs.p_collision * self.collision
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NetworkSizes {
    n_aon: usize,
    n_ton: usize,
}

impl NetworkSizes {
    pub fn new(n_aon: usize, n_ton: usize) -> Result<Self> {
        if n_aon == 0 {
            return Err(Error::invalid("n_aon", "must be at least 1"));
        }
        if n_ton == 0 {
            return Err(Error::invalid("n_ton", "must be at least 1"));
        }
        Ok(NetworkSizes { n_aon, n_ton })
    }

    pub fn n_aon(&self) -> usize {
        self.n_aon
    }

    pub fn n_ton(&self) -> usize {
        self.n_ton
    }
}

/// Everything that defines one coexistence scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioParams {
    pub sizes: NetworkSizes,
    pub slots: SlotLengths,
    /// Transmission rate `r` of a TON node.
    pub rate: f64,
    /// Discount factor in `(0, 1)`.
    pub alpha: f64,
    /// Probability that the coordination device recommends the AON.
    pub p_r: f64,
    /// Age of every AON node before the first stage.
    pub initial_age: f64,
}

impl ScenarioParams {
    /// Scenario with `r = 1`, `alpha = 0.9`, `P_R = 0.5` and initial age `sigma_S`.
    pub fn new(sizes: NetworkSizes, slots: SlotLengths) -> Self {
        ScenarioParams {
            sizes,
            slots,
            rate: 1.0,
            alpha: 0.9,
            p_r: 0.5,
            initial_age: slots.sigma_success(),
        }
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_p_r(mut self, p_r: f64) -> Self {
        self.p_r = p_r;
        self
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        self.rate = rate;
        self
    }

    pub fn with_initial_age(mut self, initial_age: f64) -> Self {
        self.initial_age = initial_age;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid("alpha", format!("{} not in (0, 1)", self.alpha)));
        }
        if !(0.0..=1.0).contains(&self.p_r) {
            return Err(Error::invalid("p_r", format!("{} not in [0, 1]", self.p_r)));
        }
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(Error::invalid("rate", format!("{} must be > 0", self.rate)));
        }
        if !(self.initial_age.is_finite() && self.initial_age >= 0.0) {
            return Err(Error::invalid(
                "initial_age",
                format!("{} must be >= 0", self.initial_age),
            ));
        }
        Ok(())
    }
}

/// Per-node transmit probabilities of the two networks for one stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccessProfile {
    tau_aon: f64,
    tau_ton: f64,
}

impl AccessProfile {
    pub fn new(tau_aon: f64, tau_ton: f64) -> Result<Self> {
        check_probability("tau_aon", tau_aon)?;
        check_probability("tau_ton", tau_ton)?;
        Ok(AccessProfile { tau_aon, tau_ton })
    }

    pub fn tau_aon(&self) -> f64 {
        self.tau_aon
    }

    pub fn tau_ton(&self) -> f64 {
        self.tau_ton
    }
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{p} not in [0, 1]")))
    }
}

/// Slot-outcome probabilities seen by one stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotProbabilities {
    pub p_idle: f64,
    pub p_success_total: f64,
    pub p_success_node_aon: f64,
    pub p_success_node_ton: f64,
    pub p_busy_aon: f64,
    pub p_busy_ton: f64,
    pub p_collision: f64,
}

impl SlotProbabilities {
    /// Assemble the full table from the idle probability and the per-node
    /// success probabilities; busy and collision follow by counting.
    fn from_parts(sizes: NetworkSizes, p_idle: f64, s_aon: f64, s_ton: f64) -> Self {
        let na = sizes.n_aon as f64;
        let nt = sizes.n_ton as f64;
        let p_success_total = na * s_aon + nt * s_ton;
        let p_collision = (1.0 - p_success_total - p_idle).max(0.0);
        SlotProbabilities {
            p_idle,
            p_success_total,
            p_success_node_aon: s_aon,
            p_success_node_ton: s_ton,
            p_busy_aon: (na - 1.0) * s_aon + nt * s_ton,
            p_busy_ton: (nt - 1.0) * s_ton + na * s_aon,
            p_collision,
        }
    }
}

/// Which network a node belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Network {
    Aon,
    Ton,
}

/// Coordination-device outcome: `Heads` grants the AON access, `Tails` the TON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Recommendation {
    Heads,
    Tails,
}

impl Recommendation {
    /// Map a uniform variate in `[0, 1)` to a recommendation with `P(Heads) = p_r`.
    pub fn from_uniform(u: f64, p_r: f64) -> Self {
        if u < p_r {
            Recommendation::Heads
        } else {
            Recommendation::Tails
        }
    }

    pub fn granted(&self) -> Network {
        match self {
            Recommendation::Heads => Network::Aon,
            Recommendation::Tails => Network::Ton,
        }
    }
}

/// Channel discipline for a sampled slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotMode {
    /// Both networks contend.
    Competitive,
    /// Only the recommended network contends; the other stays silent.
    Cooperative(Recommendation),
}

/// Realized outcome of one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SlotEvent {
    Idle,
    SuccessAon(usize),
    SuccessTon(usize),
    Collision,
}

/// `(1 - tau)^n`, `tau (1 - tau)^(n - 1)` with `0^0 = 1`.
#[inline]
fn idle_and_single(tau: f64, n: usize) -> (f64, f64) {
    let q = 1.0 - tau;
    let n = n as i32;
    (q.powi(n), tau * q.powi(n - 1))
}

pub fn slot_probabilities_competitive(
    sizes: NetworkSizes,
    profile: AccessProfile,
) -> SlotProbabilities {
    let (idle_a, single_a) = idle_and_single(profile.tau_aon, sizes.n_aon);
    let (idle_t, single_t) = idle_and_single(profile.tau_ton, sizes.n_ton);
    SlotProbabilities::from_parts(sizes, idle_a * idle_t, single_a * idle_t, single_t * idle_a)
}

pub fn slot_probabilities_cooperative(
    sizes: NetworkSizes,
    profile: AccessProfile,
    p_r: f64,
) -> Result<SlotProbabilities> {
    check_probability("p_r", p_r)?;
    let (idle_a, single_a) = idle_and_single(profile.tau_aon, sizes.n_aon);
    let (idle_t, single_t) = idle_and_single(profile.tau_ton, sizes.n_ton);
    Ok(SlotProbabilities::from_parts(
        sizes,
        p_r * idle_a + (1.0 - p_r) * idle_t,
        p_r * single_a,
        (1.0 - p_r) * single_t,
    ))
}

/// Conditional expected end-of-slot age of one AON node whose age at the
/// start of the slot is `prior_age`.
pub fn expected_node_age(
    probs: &SlotProbabilities,
    prior_age: f64,
    slots: &SlotLengths,
    node_network: Network,
) -> Result<f64> {
    match node_network {
        Network::Ton => Err(Error::NotAnAonNode),
        Network::Aon => {
            Ok((1.0 - probs.p_success_node_aon) * prior_age + slots.mean_length(probs))
        }
    }
}

/// Expected AON network age at the end of a slot. Linear in the prior ages,
/// so only their mean matters.
pub fn expected_network_age(probs: &SlotProbabilities, network_age: f64, slots: &SlotLengths) -> f64 {
    (1.0 - probs.p_success_node_aon) * network_age + slots.mean_length(probs)
}

/// Expected TON network throughput (bits) in one slot.
pub fn expected_network_throughput(probs: &SlotProbabilities, slots: &SlotLengths, rate: f64) -> f64 {
    probs.p_success_node_ton * slots.sigma_success() * rate
}

pub fn network_age(ages: &[f64]) -> Result<f64> {
    if ages.is_empty() {
        return Err(Error::EmptyAges);
    }
    Ok(ages.iter().sum::<f64>() / ages.len() as f64)
}

/// Draw one slot.
///
/// Exactly `N_A + N_T` uniforms are consumed regardless of mode (AON nodes
/// first, then TON nodes), so streams stay aligned across branches that share
/// a seed. Draws belonging to a silenced network are discarded.
pub fn sample_slot<R: Rng + ?Sized>(
    rng: &mut R,
    sizes: NetworkSizes,
    profile: AccessProfile,
    mode: SlotMode,
) -> SlotEvent {
    let (aon_on, ton_on) = match mode {
        SlotMode::Competitive => (true, true),
        SlotMode::Cooperative(Recommendation::Heads) => (true, false),
        SlotMode::Cooperative(Recommendation::Tails) => (false, true),
    };
    let mut count = 0usize;
    let mut last = SlotEvent::Idle;
    for i in 0..sizes.n_aon {
        let u: f64 = rng.gen();
        if aon_on && u < profile.tau_aon {
            count += 1;
            last = SlotEvent::SuccessAon(i);
        }
    }
    for j in 0..sizes.n_ton {
        let u: f64 = rng.gen();
        if ton_on && u < profile.tau_ton {
            count += 1;
            last = SlotEvent::SuccessTon(j);
        }
    }
    match count {
        0 => SlotEvent::Idle,
        1 => last,
        _ => SlotEvent::Collision,
    }
}

/// Per-node ages of the AON and their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct AgeState {
    ages: Vec<f64>,
    network_age: f64,
}

impl AgeState {
    pub fn new(ages: Vec<f64>) -> Result<Self> {
        let network_age = network_age(&ages)?;
        if let Some(bad) = ages.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return Err(Error::invalid("age", format!("{bad} must be finite and >= 0")));
        }
        Ok(AgeState { ages, network_age })
    }

    pub fn uniform(n_aon: usize, age: f64) -> Result<Self> {
        AgeState::new(vec![age; n_aon])
    }

    pub fn ages(&self) -> &[f64] {
        &self.ages
    }

    pub fn network_age(&self) -> f64 {
        self.network_age
    }

    /// Advance every age by one slot in place.
    pub fn apply(&mut self, event: SlotEvent, slots: &SlotLengths) {
        let step = match event {
            SlotEvent::Idle => slots.idle,
            SlotEvent::Collision => slots.collision,
            SlotEvent::SuccessAon(_) | SlotEvent::SuccessTon(_) => slots.success,
        };
        for a in &mut self.ages {
            *a += step;
        }
        if let SlotEvent::SuccessAon(i) = event {
            self.ages[i] = slots.success;
        }
        self.network_age = self.ages.iter().sum::<f64>() / self.ages.len() as f64;
    }
}

pub fn apply_slot(state: &AgeState, event: SlotEvent, slots: &SlotLengths) -> AgeState {
    let mut next = state.clone();
    next.apply(event, slots);
    next
}
