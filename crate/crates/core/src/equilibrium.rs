//! Stage-game solutions.
//!
//! Both the competitive equilibrium and the cooperative optimum are piecewise:
//! below a threshold network age the AON's best action is a pure one (always
//! or never transmit), above it an interior mixed probability. The TON's
//! choice never depends on the AON and is `1 / N_T`.

use crate::error::{Error, Result};
use crate::model::{
    expected_network_age, expected_network_throughput, slot_probabilities_competitive,
    slot_probabilities_cooperative, AccessProfile, NetworkSizes, SlotLengths,
};

/// Largest excursion outside `[0, 1]` that is clamped rather than reported.
const CLAMP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    Interior,
    ForcedOne,
    ForcedZero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdAges {
    pub th0: f64,
    pub th1: f64,
    /// `max(th0, th1)`.
    pub th: f64,
    /// Branch selected for the network age the thresholds were evaluated at.
    pub regime: Regime,
}

impl ThresholdAges {
    fn classify(th0: f64, th1: f64, network_age: f64) -> Self {
        let th = th0.max(th1);
        let regime = if network_age > th {
            Regime::Interior
        } else if th0 == th1 {
            // Ambiguous tie; resolved toward not transmitting.
            Regime::ForcedZero
        } else if th == th1 {
            Regime::ForcedOne
        } else {
            Regime::ForcedZero
        };
        ThresholdAges {
            th0,
            th1,
            th,
            regime,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StagePayoffs {
    /// Expected TON network throughput in the stage.
    pub u_ton: f64,
    /// Negative expected AON network age at the end of the stage.
    pub u_aon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StageMode {
    Competitive,
    /// Device-coordinated access with `P(Heads) = p_r`.
    Cooperative(f64),
}

fn check_age(network_age: f64) -> Result<()> {
    if network_age.is_finite() && network_age >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "network_age",
            format!("{network_age} must be finite and >= 0"),
        ))
    }
}

fn clamp_unit(what: &'static str, value: f64, network_age: f64) -> Result<f64> {
    if (-CLAMP_TOLERANCE..=1.0 + CLAMP_TOLERANCE).contains(&value) {
        Ok(value.clamp(0.0, 1.0))
    } else {
        Err(Error::OutOfRange {
            what,
            value,
            network_age,
        })
    }
}

fn pure(regime: Regime) -> f64 {
    match regime {
        Regime::ForcedOne => 1.0,
        _ => 0.0,
    }
}

fn ton_profile(sizes: NetworkSizes, tau_aon: f64) -> AccessProfile {
    AccessProfile::new(tau_aon, 1.0 / sizes.n_ton() as f64).expect("probabilities in [0, 1]")
}

/// Mixed-strategy Nash equilibrium of the competitive stage game at the given
/// AON network age.
///
/// Equal success and collision lengths are delegated to [`msne_equal_slots`]
/// so the two always agree bit for bit.
pub fn msne(
    sizes: NetworkSizes,
    slots: SlotLengths,
    network_age: f64,
) -> Result<(AccessProfile, ThresholdAges)> {
    check_age(network_age)?;
    let na = sizes.n_aon() as f64;
    let nt = sizes.n_ton() as f64;
    let (s_i, s_s, s_c) = (slots.sigma_idle(), slots.sigma_success(), slots.sigma_collision());

    if s_s == s_c {
        let th0 = na * (s_s - s_i);
        let th = ThresholdAges::classify(th0, 0.0, network_age);
        return Ok((msne_equal_slots(sizes, slots, network_age)?, th));
    }

    let tau_t = 1.0 / nt;
    let th1 = na * (s_s - s_c);
    let th0 = if sizes.n_ton() == 1 {
        // 1 - tau_T vanishes; the sign of sigma_S - sigma_C decides.
        if s_s > s_c {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    } else {
        na * (s_s - s_i) - na * nt * tau_t * (s_s - s_c) / (1.0 - tau_t)
    };
    let th = ThresholdAges::classify(th0, th1, network_age);

    let tau_a = match th.regime {
        Regime::Interior => {
            let q = 1.0 - tau_t;
            let k = na * nt * tau_t * (s_s - s_c);
            let num = q * (network_age - na * (s_s - s_i)) + k;
            let den = q * na * (network_age + s_i - s_c - na * (s_s - s_c)) + k;
            clamp_unit("tau_aon", num / den, network_age)?
        }
        r => pure(r),
    };
    Ok((ton_profile(sizes, tau_a), th))
}

/// Competitive equilibrium when success and collision slots are equally long.
pub fn msne_equal_slots(
    sizes: NetworkSizes,
    slots: SlotLengths,
    network_age: f64,
) -> Result<AccessProfile> {
    check_age(network_age)?;
    let (s_i, s_s, s_c) = (slots.sigma_idle(), slots.sigma_success(), slots.sigma_collision());
    if s_s != s_c {
        return Err(Error::invalid(
            "sigma_collision",
            format!("{s_c} must equal sigma_success {s_s}"),
        ));
    }
    let na = sizes.n_aon() as f64;
    let tau_a = if network_age > na * (s_s - s_i) {
        let v = (na * (s_i - s_s) + network_age) / (na * (s_i - s_c + network_age));
        clamp_unit("tau_aon", v, network_age)?
    } else {
        0.0
    };
    Ok(ton_profile(sizes, tau_a))
}

/// Access probabilities that maximize each network's own stage payoff when
/// the device grants it exclusive access.
pub fn cooperative_optimum(
    sizes: NetworkSizes,
    slots: SlotLengths,
    network_age: f64,
) -> Result<(AccessProfile, ThresholdAges)> {
    check_age(network_age)?;
    let na = sizes.n_aon() as f64;
    let (s_i, s_s, s_c) = (slots.sigma_idle(), slots.sigma_success(), slots.sigma_collision());
    let mut th = ThresholdAges::classify(na * (s_s - s_i), na * (s_s - s_c), network_age);
    // A lone AON node cannot collide, so its payoff is linear in tau and only
    // th0 matters. Without this, sigma_C < sigma_I would force tau = 1 below th0.
    if sizes.n_aon() == 1 && network_age <= th.th0 {
        th.regime = Regime::ForcedZero;
    }
    let tau_a = match th.regime {
        Regime::Interior => {
            let num = network_age - na * (s_s - s_i);
            let den = na * (network_age + s_i - s_c - na * (s_s - s_c));
            clamp_unit("tau_hat_aon", num / den, network_age)?
        }
        r => pure(r),
    };
    Ok((ton_profile(sizes, tau_a), th))
}

pub fn expected_stage_payoffs(
    mode: StageMode,
    sizes: NetworkSizes,
    slots: SlotLengths,
    profile: AccessProfile,
    network_age: f64,
    rate: f64,
) -> Result<StagePayoffs> {
    check_age(network_age)?;
    let probs = match mode {
        StageMode::Competitive => slot_probabilities_competitive(sizes, profile),
        StageMode::Cooperative(p_r) => slot_probabilities_cooperative(sizes, profile, p_r)?,
    };
    Ok(StagePayoffs {
        u_ton: expected_network_throughput(&probs, &slots, rate),
        u_aon: -expected_network_age(&probs, network_age, &slots),
    })
}

/// Objective values of an exhaustive grid search over `tau in [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridBestResponse {
    step: f64,
    values: Vec<f64>,
    argmax: f64,
    max: f64,
}

impl GridBestResponse {
    /// First grid point attaining the maximum.
    pub fn argmax(&self) -> f64 {
        self.argmax
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    fn point(&self, k: usize) -> f64 {
        (k as f64 * self.step).min(1.0)
    }

    /// Whether some grid point within one step of `tau` attains the maximum
    /// up to a relative tolerance of `1e-12`.
    ///
    /// Objectives are often flat near the optimum (for example `x^N` terms
    /// with large `N`), so the first argmax alone is not a reliable witness.
    pub fn accepts(&self, tau: f64) -> bool {
        let tol = 1e-12 * self.max.abs().max(1.0);
        let centre = (tau / self.step).round() as i64;
        let last = self.values.len() as i64 - 1;
        (centre - 2..=centre + 2)
            .filter(|&k| (0..=last).contains(&k))
            .map(|k| k as usize)
            .filter(|&k| (self.point(k) - tau).abs() <= self.step * (1.0 + 1e-9))
            .any(|k| self.values[k] >= self.max - tol)
    }
}

/// Maximize `objective` over `{0, step, 2 step, ..., 1}`.
///
/// Age objectives should be passed as stage payoffs, i.e. negated ages.
pub fn best_response_oracle<F>(objective: F, grid_step: f64) -> Result<GridBestResponse>
where
    F: Fn(f64) -> f64,
{
    if !(grid_step > 0.0 && grid_step <= 0.01) {
        return Err(Error::invalid("grid_step", format!("{grid_step} not in (0, 0.01]")));
    }
    let n = (1.0 / grid_step - 1e-9).ceil() as usize;
    let values: Vec<f64> = (0..=n)
        .map(|k| objective((k as f64 * grid_step).min(1.0)))
        .collect();
    let (best, max) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bk, bv), (k, &v)| if v > bv { (k, v) } else { (bk, bv) });
    Ok(GridBestResponse {
        step: grid_step,
        argmax: (best as f64 * grid_step).min(1.0),
        values,
        max,
    })
}

/// Values of `P_R` for which both networks weakly prefer the cooperative
/// stage game to the competitive one.
#[derive(Debug, Clone, PartialEq)]
pub struct PrSet {
    /// Disjoint closed intervals in increasing order; a singleton is `(p, p)`.
    pub intervals: Vec<(f64, f64)>,
    /// `1 - (1 - tau_A*)^N_A`, reported for comparison only.
    pub printed_upper_bound: f64,
}

impl PrSet {
    pub fn contains(&self, p: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= p && p <= b)
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

pub fn cooperation_beneficial_pr_set(
    sizes: NetworkSizes,
    slots: SlotLengths,
    network_age: f64,
    pr_grid_step: f64,
) -> Result<PrSet> {
    if !(pr_grid_step > 0.0 && pr_grid_step <= 0.01) {
        return Err(Error::invalid(
            "pr_grid_step",
            format!("{pr_grid_step} not in (0, 0.01]"),
        ));
    }
    let (nc_profile, _) = msne(sizes, slots, network_age)?;
    let (c_profile, _) = cooperative_optimum(sizes, slots, network_age)?;
    let nc = expected_stage_payoffs(
        StageMode::Competitive,
        sizes,
        slots,
        nc_profile,
        network_age,
        1.0,
    )?;
    let slack = |v: f64| 1e-12 * v.abs().max(1.0);

    let n = (1.0 / pr_grid_step - 1e-9).ceil() as usize;
    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut open: Option<(f64, f64)> = None;
    for k in 0..=n {
        let p = (k as f64 * pr_grid_step).min(1.0);
        let c = expected_stage_payoffs(
            StageMode::Cooperative(p),
            sizes,
            slots,
            c_profile,
            network_age,
            1.0,
        )?;
        let ok = c.u_aon >= nc.u_aon - slack(nc.u_aon) && c.u_ton >= nc.u_ton - slack(nc.u_ton);
        open = match (ok, open) {
            (true, Some((a, _))) => Some((a, p)),
            (true, None) => Some((p, p)),
            (false, Some(iv)) => {
                intervals.push(iv);
                None
            }
            (false, None) => None,
        };
    }
    intervals.extend(open);
    Ok(PrSet {
        intervals,
        printed_upper_bound: 1.0 - (1.0 - nc_profile.tau_aon()).powi(sizes.n_aon() as i32),
    })
}
