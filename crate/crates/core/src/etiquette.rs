//! Grim-trigger coexistence etiquette.
//!
//! While both networks obey the device they cooperate; after any stage in
//! which one of them disobeys, both play the competitive equilibrium forever.
//! Obedience is self-enforcing when, for either recommendation in stage 1,
//! neither network gains from a unilateral deviation:
//!
//! | inequality | recommendation | network | obey  | deviate |
//! |------------|----------------|---------|-------|---------|
//! | 1          | Heads          | AON     | (A,B) | (B,B)   |
//! | 2          | Heads          | TON     | (A,B) | (A,A)   |
//! | 3          | Tails          | AON     | (B,A) | (A,A)   |
//! | 4          | Tails          | TON     | (B,A) | (B,B)   |
//!
//! Each side is `(1 - alpha) * (u_1 + sum_{n>=2} alpha^(n-1) u_n)`. The stage-1
//! term `u_1` is the exact expectation; the continuation is estimated by
//! truncated Monte Carlo starting from a sampled stage-1 outcome, so the
//! stage-1 zero throughput of an obeying, silent TON enters with weight
//! `alpha^0`.
//!
//! All four branches of a run (obey under Heads, obey under Tails, joint
//! access, joint back-off) replay the same random stream, so the paired
//! differences cancel most slot noise.

use rayon::prelude::*;

use crate::equilibrium::cooperative_optimum;
use crate::error::{Error, Result};
use crate::model::{
    sample_slot, AccessProfile, AgeState, Network, NetworkSizes, Recommendation, ScenarioParams,
    SlotEvent, SlotLengths, SlotMode,
};
use crate::rng::{derive_seed, stream, SimRng};
use crate::sim::{discounted, play_stage, Mode, PayoffAccounting};
use crate::stats::Estimate;

/// Number of standard errors separating a decided margin from zero.
const DECISION_SE: f64 = 2.0;

const RUN_CHUNK: usize = 256;

/// Stage action of a network: access the medium (`A`) or back off (`B`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Access,
    Backoff,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ActionProfile {
    pub aon: Action,
    pub ton: Action,
}

impl ActionProfile {
    pub const fn new(aon: Action, ton: Action) -> Self {
        ActionProfile { aon, ton }
    }

    pub fn recommended(rec: Recommendation) -> Self {
        match rec {
            Recommendation::Heads => ActionProfile::new(Action::Access, Action::Backoff),
            Recommendation::Tails => ActionProfile::new(Action::Backoff, Action::Access),
        }
    }

    /// Compliance indicator: the profile is exactly the recommended one.
    pub fn complies_with(&self, rec: Recommendation) -> bool {
        *self == ActionProfile::recommended(rec)
    }

    /// Access probabilities in the stage, given the cooperative optimum.
    pub fn access(&self, hat: AccessProfile) -> AccessProfile {
        let pick = |a: Action, tau: f64| if a == Action::Access { tau } else { 0.0 };
        AccessProfile::new(pick(self.aon, hat.tau_aon()), pick(self.ton, hat.tau_ton()))
            .expect("probabilities in [0, 1]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeviationCase {
    /// Heads, TON also accesses: (A, A).
    HeadsTonDeviates,
    /// Heads, AON backs off: (B, B).
    HeadsAonDeviates,
    /// Tails, AON also accesses: (A, A).
    TailsAonDeviates,
    /// Tails, TON backs off: (B, B).
    TailsTonDeviates,
}

impl DeviationCase {
    pub const ALL: [DeviationCase; 4] = [
        DeviationCase::HeadsTonDeviates,
        DeviationCase::HeadsAonDeviates,
        DeviationCase::TailsAonDeviates,
        DeviationCase::TailsTonDeviates,
    ];

    pub fn new(rec: Recommendation, deviator: Network) -> Self {
        match (rec, deviator) {
            (Recommendation::Heads, Network::Ton) => DeviationCase::HeadsTonDeviates,
            (Recommendation::Heads, Network::Aon) => DeviationCase::HeadsAonDeviates,
            (Recommendation::Tails, Network::Aon) => DeviationCase::TailsAonDeviates,
            (Recommendation::Tails, Network::Ton) => DeviationCase::TailsTonDeviates,
        }
    }

    pub fn recommendation(&self) -> Recommendation {
        match self {
            DeviationCase::HeadsTonDeviates | DeviationCase::HeadsAonDeviates => {
                Recommendation::Heads
            }
            _ => Recommendation::Tails,
        }
    }

    pub fn deviator(&self) -> Network {
        match self {
            DeviationCase::HeadsTonDeviates | DeviationCase::TailsTonDeviates => Network::Ton,
            _ => Network::Aon,
        }
    }

    pub fn profile(&self) -> ActionProfile {
        match self {
            DeviationCase::HeadsTonDeviates | DeviationCase::TailsAonDeviates => {
                ActionProfile::new(Action::Access, Action::Access)
            }
            _ => ActionProfile::new(Action::Backoff, Action::Backoff),
        }
    }
}

/// What happens in stage 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StageOneCase {
    Obey(Recommendation),
    Deviate(DeviationCase),
}

impl StageOneCase {
    pub fn profile(&self) -> ActionProfile {
        match self {
            StageOneCase::Obey(rec) => ActionProfile::recommended(*rec),
            StageOneCase::Deviate(case) => case.profile(),
        }
    }

    fn continuation(&self) -> Mode {
        match self {
            StageOneCase::Obey(_) => Mode::Cooperation,
            StageOneCase::Deviate(_) => Mode::Competition,
        }
    }
}

/// Expected AON network age after stage 1.
///
/// `profile_hat` is the cooperative optimum at `network_age`; a network that
/// accesses the medium in stage 1 does so with its component of it.
pub fn expected_next_network_age(
    case: StageOneCase,
    sizes: NetworkSizes,
    slots: SlotLengths,
    profile_hat: AccessProfile,
    network_age: f64,
) -> f64 {
    let na = sizes.n_aon() as i32;
    let nt = sizes.n_ton() as i32;
    let (s_i, s_s, s_c) = (slots.sigma_idle(), slots.sigma_success(), slots.sigma_collision());
    let (ta, tt) = (profile_hat.tau_aon(), profile_hat.tau_ton());
    let (qa, qt) = (1.0 - ta, 1.0 - tt);
    let single_a = ta * qa.powi(na - 1);
    let single_t = tt * qt.powi(nt - 1);

    match case.profile() {
        ActionProfile {
            aon: Action::Access,
            ton: Action::Backoff,
        } => {
            network_age * (1.0 - single_a)
                + s_c
                + qa.powi(na) * (s_i - s_c)
                + na as f64 * single_a * (s_s - s_c)
        }
        ActionProfile {
            aon: Action::Backoff,
            ton: Action::Access,
        } => network_age + s_c + qt.powi(nt) * (s_i - s_c) + nt as f64 * single_t * (s_s - s_c),
        ActionProfile {
            aon: Action::Access,
            ton: Action::Access,
        } => {
            network_age * (1.0 - single_a * qt.powi(nt))
                + s_c
                + qt.powi(nt) * qa.powi(na) * (s_i - s_c)
                + (na as f64 * single_a * qt.powi(nt) + nt as f64 * single_t * qa.powi(na))
                    * (s_s - s_c)
        }
        ActionProfile {
            aon: Action::Backoff,
            ton: Action::Backoff,
        } => network_age + s_i,
    }
}

/// Expected TON network throughput in stage 1.
pub fn stage_one_throughput(
    case: StageOneCase,
    sizes: NetworkSizes,
    slots: SlotLengths,
    profile_hat: AccessProfile,
    rate: f64,
) -> f64 {
    let p = case.profile();
    if p.ton == Action::Backoff {
        return 0.0;
    }
    let tt = profile_hat.tau_ton();
    let mut s = tt * (1.0 - tt).powi(sizes.n_ton() as i32 - 1) * slots.sigma_success() * rate;
    if p.aon == Action::Access {
        s *= (1.0 - profile_hat.tau_aon()).powi(sizes.n_aon() as i32);
    }
    s
}

/// Per-stage payoffs of one branch; index 0 is the exact stage-1 expectation.
struct BranchPath {
    aon: Vec<f64>,
    ton: Vec<f64>,
}

impl BranchPath {
    fn discounted(&self, alpha: f64) -> (f64, f64) {
        (
            discounted(alpha, self.aon.iter().copied()),
            discounted(alpha, self.ton.iter().copied()),
        )
    }
}

fn branch_path(
    params: &ScenarioParams,
    case: StageOneCase,
    n_stages: usize,
    mut rng: SimRng,
) -> Result<BranchPath> {
    let sizes = params.sizes;
    let slots = params.slots;
    let mut state = AgeState::uniform(sizes.n_aon(), params.initial_age)?;
    let age = state.network_age();
    let (hat, _) = cooperative_optimum(sizes, slots, age)?;

    let mut aon = Vec::with_capacity(n_stages);
    let mut ton = Vec::with_capacity(n_stages);
    aon.push(-expected_next_network_age(case, sizes, slots, hat, age));
    ton.push(stage_one_throughput(case, sizes, slots, hat, params.rate));

    // keep the stream aligned with a regular stage: device draw, then nodes
    let _: f64 = rand::Rng::gen(&mut rng);
    let event = sample_slot(&mut rng, sizes, case.profile().access(hat), SlotMode::Competitive);
    state.apply(event, &slots);

    let mode = case.continuation();
    for _ in 1..n_stages {
        let rec = play_stage(params, mode, PayoffAccounting::Realized, &mut state, &mut rng)?;
        aon.push(rec.u_aon);
        ton.push(rec.u_ton);
    }
    Ok(BranchPath { aon, ton })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Inequality {
    /// Heads: the AON prefers (A,B) to backing off.
    AonUnderHeads,
    /// Heads: the TON prefers (A,B) to accessing.
    TonUnderHeads,
    /// Tails: the AON prefers (B,A) to accessing.
    AonUnderTails,
    /// Tails: the TON prefers (B,A) to backing off.
    TonUnderTails,
}

impl Inequality {
    pub const ALL: [Inequality; 4] = [
        Inequality::AonUnderHeads,
        Inequality::TonUnderHeads,
        Inequality::AonUnderTails,
        Inequality::TonUnderTails,
    ];

    pub fn deviation(&self) -> DeviationCase {
        match self {
            Inequality::AonUnderHeads => DeviationCase::HeadsAonDeviates,
            Inequality::TonUnderHeads => DeviationCase::HeadsTonDeviates,
            Inequality::AonUnderTails => DeviationCase::TailsAonDeviates,
            Inequality::TonUnderTails => DeviationCase::TailsTonDeviates,
        }
    }
}

/// Three-valued outcome of a Monte Carlo decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Holds,
    Fails,
    /// The margin is within two standard errors of zero.
    Indeterminate,
}

impl Verdict {
    pub fn from_margin(margin: &Estimate) -> Self {
        if !margin.decided(DECISION_SE) {
            Verdict::Indeterminate
        } else if margin.mean >= 0.0 {
            Verdict::Holds
        } else {
            Verdict::Fails
        }
    }

    /// Kleene conjunction.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
            (Verdict::Holds, Verdict::Holds) => Verdict::Holds,
            _ => Verdict::Indeterminate,
        }
    }

    pub fn is_true(self) -> bool {
        self == Verdict::Holds
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityEstimate {
    pub inequality: Inequality,
    /// Obeying minus deviating discounted payoff of the deviator.
    pub margin: Estimate,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationReport {
    /// In the order of [`Inequality::ALL`].
    pub estimates: [InequalityEstimate; 4],
}

impl DeviationReport {
    fn from_margins(margins: [Estimate; 4]) -> Self {
        let estimates = std::array::from_fn(|k| InequalityEstimate {
            inequality: Inequality::ALL[k],
            margin: margins[k],
            verdict: Verdict::from_margin(&margins[k]),
        });
        DeviationReport { estimates }
    }

    pub fn get(&self, inequality: Inequality) -> &InequalityEstimate {
        &self.estimates[Inequality::ALL.iter().position(|&i| i == inequality).unwrap()]
    }

    /// Inequalities 2 and 4.
    pub fn ton_prefers(&self) -> Verdict {
        self.get(Inequality::TonUnderHeads)
            .verdict
            .and(self.get(Inequality::TonUnderTails).verdict)
    }

    /// Inequalities 1 and 3.
    pub fn aon_prefers(&self) -> Verdict {
        self.get(Inequality::AonUnderHeads)
            .verdict
            .and(self.get(Inequality::AonUnderTails).verdict)
    }

    /// All four inequalities, i.e. the intersection of the preferences.
    pub fn spe(&self) -> Verdict {
        self.ton_prefers().and(self.aon_prefers())
    }

    pub fn any_indeterminate(&self) -> bool {
        self.estimates.iter().any(|e| e.verdict == Verdict::Indeterminate)
    }
}

/// Running mean and variance (Welford), fed in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    fn estimate(&self) -> Estimate {
        match self.n {
            0 => Estimate::default(),
            1 => Estimate {
                mean: self.mean,
                std_error: 0.0,
            },
            n => Estimate {
                mean: self.mean,
                std_error: (self.m2 / (n - 1) as f64 / n as f64).sqrt(),
            },
        }
    }
}

/// Paired margins of one run for every `(alpha, P_R)` pair, alpha-major,
/// four per cell.
fn run_margins(
    params: &ScenarioParams,
    alphas: &[f64],
    prs: &[f64],
    n_stages: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let rng = stream(seed);
    let joint_access = StageOneCase::Deviate(DeviationCase::HeadsTonDeviates);
    let joint_backoff = StageOneCase::Deviate(DeviationCase::HeadsAonDeviates);
    let aa = branch_path(params, joint_access, n_stages, rng.clone())?;
    let bb = branch_path(params, joint_backoff, n_stages, rng.clone())?;
    let aa_u: Vec<_> = alphas.iter().map(|&a| aa.discounted(a)).collect();
    let bb_u: Vec<_> = alphas.iter().map(|&a| bb.discounted(a)).collect();

    let mut out = vec![0.0; alphas.len() * prs.len() * 4];
    for (j, &p_r) in prs.iter().enumerate() {
        let p = params.with_p_r(p_r);
        let h = branch_path(&p, StageOneCase::Obey(Recommendation::Heads), n_stages, rng.clone())?;
        let t = branch_path(&p, StageOneCase::Obey(Recommendation::Tails), n_stages, rng.clone())?;
        for (i, &alpha) in alphas.iter().enumerate() {
            let (h_aon, h_ton) = h.discounted(alpha);
            let (t_aon, t_ton) = t.discounted(alpha);
            let base = (i * prs.len() + j) * 4;
            out[base] = h_aon - bb_u[i].0;
            out[base + 1] = h_ton - aa_u[i].1;
            out[base + 2] = t_aon - aa_u[i].0;
            out[base + 3] = t_ton - bb_u[i].1;
        }
    }
    Ok(out)
}

fn sweep_margins(
    params: &ScenarioParams,
    alphas: &[f64],
    prs: &[f64],
    n_runs: usize,
    n_stages: usize,
    seed: u64,
) -> Result<Vec<[Estimate; 4]>> {
    if n_runs == 0 {
        return Err(Error::invalid("n_runs", "must be at least 1"));
    }
    if n_stages == 0 {
        return Err(Error::invalid("n_stages", "must be at least 1"));
    }
    let mut acc = vec![Accumulator::default(); alphas.len() * prs.len() * 4];
    let mut start = 0;
    while start < n_runs {
        let end = (start + RUN_CHUNK).min(n_runs);
        let chunk: Vec<Vec<f64>> = (start..end)
            .into_par_iter()
            .map(|r| run_margins(params, alphas, prs, n_stages, derive_seed(seed, &[r as u64])))
            .collect::<Result<_>>()?;
        for margins in &chunk {
            for (a, &m) in acc.iter_mut().zip(margins) {
                a.push(m);
            }
        }
        start = end;
    }
    Ok(acc
        .chunks(4)
        .map(|c| std::array::from_fn(|k| c[k].estimate()))
        .collect())
}

/// Estimate the four deviation inequalities at the scenario's `alpha` and
/// `P_R`.
pub fn deviation_inequalities(
    params: &ScenarioParams,
    n_runs: usize,
    n_stages: usize,
    seed: u64,
) -> Result<DeviationReport> {
    params.validate()?;
    let m = sweep_margins(params, &[params.alpha], &[params.p_r], n_runs, n_stages, seed)?;
    Ok(DeviationReport::from_margins(m[0]))
}

fn check_open_unit(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{v} not in (0, 1)")))
    }
}

/// Whether obeying the device is subgame perfect at `(alpha, P_R)`.
pub fn spe_feasible(
    params: &ScenarioParams,
    alpha: f64,
    p_r: f64,
    n_runs: usize,
    n_stages: usize,
    seed: u64,
) -> Result<Verdict> {
    check_open_unit("alpha", alpha)?;
    check_open_unit("p_r", p_r)?;
    let p = params.with_alpha(alpha).with_p_r(p_r);
    Ok(deviation_inequalities(&p, n_runs, n_stages, seed)?.spe())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionCell {
    pub alpha: f64,
    pub p_r: f64,
    pub report: DeviationReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionGrid {
    pub alpha_axis: Vec<f64>,
    pub pr_axis: Vec<f64>,
    /// Alpha-major: `cells[i * pr_axis.len() + j]` is `(alpha_axis[i], pr_axis[j])`.
    pub cells: Vec<RegionCell>,
}

impl RegionGrid {
    pub fn cell(&self, alpha_index: usize, pr_index: usize) -> &RegionCell {
        &self.cells[alpha_index * self.pr_axis.len() + pr_index]
    }

    fn matrix(&self, f: impl Fn(&DeviationReport) -> Verdict) -> Vec<Vec<Verdict>> {
        (0..self.alpha_axis.len())
            .map(|i| (0..self.pr_axis.len()).map(|j| f(&self.cell(i, j).report)).collect())
            .collect()
    }

    pub fn ton_prefers(&self) -> Vec<Vec<Verdict>> {
        self.matrix(DeviationReport::ton_prefers)
    }

    pub fn aon_prefers(&self) -> Vec<Vec<Verdict>> {
        self.matrix(DeviationReport::aon_prefers)
    }

    pub fn spe(&self) -> Vec<Vec<Verdict>> {
        self.matrix(DeviationReport::spe)
    }

    /// Number of cells where cooperation is decided to be self-enforcing.
    pub fn spe_count(&self) -> usize {
        self.cells.iter().filter(|c| c.report.spe().is_true()).count()
    }

    /// `(p_r index, lower alpha index, higher alpha index)` triples where
    /// cooperation holds at the lower discount factor but fails at the higher
    /// one, both decided.
    pub fn non_monotone_pairs(&self) -> Vec<(usize, usize, usize)> {
        let spe = |i: usize, j: usize| self.cell(i, j).report.spe();
        let mut out = Vec::new();
        for j in 0..self.pr_axis.len() {
            for lo in 0..self.alpha_axis.len() {
                for hi in lo + 1..self.alpha_axis.len() {
                    if spe(lo, j) == Verdict::Holds && spe(hi, j) == Verdict::Fails {
                        out.push((j, lo, hi));
                    }
                }
            }
        }
        out
    }
}

/// Evaluate the deviation inequalities over an `(alpha, P_R)` grid.
///
/// Run `r` uses the same seed in every cell. The two deviation branches do
/// not depend on `P_R` and are simulated once per run; no branch depends on
/// `alpha` beyond its discount weights.
pub fn region_sweep(
    params: &ScenarioParams,
    alpha_grid: &[f64],
    pr_grid: &[f64],
    n_runs: usize,
    n_stages: usize,
    seed: u64,
) -> Result<RegionGrid> {
    params.validate()?;
    for &a in alpha_grid {
        check_open_unit("alpha", a)?;
    }
    for &p in pr_grid {
        check_open_unit("p_r", p)?;
    }
    let m = sweep_margins(params, alpha_grid, pr_grid, n_runs, n_stages, seed)?;
    let mut cells = Vec::with_capacity(m.len());
    for (i, &alpha) in alpha_grid.iter().enumerate() {
        for (j, &p_r) in pr_grid.iter().enumerate() {
            cells.push(RegionCell {
                alpha,
                p_r,
                report: DeviationReport::from_margins(m[i * pr_grid.len() + j]),
            });
        }
    }
    Ok(RegionGrid {
        alpha_axis: alpha_grid.to_vec(),
        pr_axis: pr_grid.to_vec(),
        cells,
    })
}

/// How a stage of an etiquette trajectory was played.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Play {
    Cooperate,
    Deviate(DeviationCase),
    /// Competitive equilibrium after a trigger.
    Compete,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EtiquetteStage {
    /// `None` once the networks compete and ignore the device.
    pub recommendation: Option<Recommendation>,
    pub play: Play,
    /// Compliance indicator; false once the networks compete.
    pub complied: bool,
    pub network_age_before: f64,
    pub profile: AccessProfile,
    pub event: SlotEvent,
}

/// Simulate the etiquette for `n_stages`, optionally with `deviator`
/// disobeying at 1-based stage `k`.
pub fn grim_trigger_path(
    params: &ScenarioParams,
    n_stages: usize,
    deviation: Option<(usize, Network)>,
    seed: u64,
) -> Result<Vec<EtiquetteStage>> {
    params.validate()?;
    let sizes = params.sizes;
    let slots = params.slots;
    let mut rng = stream(seed);
    let mut state = AgeState::uniform(sizes.n_aon(), params.initial_age)?;
    let mut triggered = false;
    let mut out = Vec::with_capacity(n_stages);

    for n in 1..=n_stages {
        let age = state.network_age();
        let deviate_now = deviation.filter(|&(k, _)| k == n && !triggered);
        let stage = if triggered {
            let rec = play_stage(params, Mode::Competition, PayoffAccounting::Realized, &mut state, &mut rng)?;
            EtiquetteStage {
                recommendation: None,
                play: Play::Compete,
                complied: false,
                network_age_before: age,
                profile: rec.profile,
                event: rec.event,
            }
        } else if let Some((_, who)) = deviate_now {
            let u: f64 = rand::Rng::gen(&mut rng);
            let recommendation = Recommendation::from_uniform(u, params.p_r);
            let case = DeviationCase::new(recommendation, who);
            let (hat, _) = cooperative_optimum(sizes, slots, age)?;
            let profile = case.profile().access(hat);
            let event = sample_slot(&mut rng, sizes, profile, SlotMode::Competitive);
            state.apply(event, &slots);
            EtiquetteStage {
                recommendation: Some(recommendation),
                play: Play::Deviate(case),
                complied: case.profile().complies_with(recommendation),
                network_age_before: age,
                profile,
                event,
            }
        } else {
            let rec = play_stage(params, Mode::Cooperation, PayoffAccounting::Realized, &mut state, &mut rng)?;
            EtiquetteStage {
                recommendation: rec.recommendation,
                play: Play::Cooperate,
                complied: true,
                network_age_before: age,
                profile: rec.profile,
                event: rec.event,
            }
        };
        triggered |= !stage.complied;
        out.push(stage);
    }
    Ok(out)
}
