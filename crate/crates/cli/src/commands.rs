//! Subcommand implementations. Each writes one CSV table.

use std::io::Write;

use aoi_coexist::{
    cooperation_beneficial_pr_set, cooperative_optimum, expected_stage_payoffs,
    gain_between, gain_of_cooperation, monte_carlo, msne, region_sweep, Mode, NetworkSizes,
    Regime, StageMode, Verdict,
};

use crate::config::{default_axis, ExperimentConfig};
use crate::error::CliError;

pub const SIMULATE_HEADER: [&str; 15] = [
    "mode",
    "N_A",
    "N_T",
    "sigma_C_ratio",
    "alpha",
    "p_r",
    "n_runs",
    "n_stages",
    "seed",
    "U_aon_mean",
    "U_aon_se",
    "U_ton_mean",
    "U_ton_se",
    "f_tau1_mean",
    "f_tau0_mean",
];

pub const MSNE_HEADER: [&str; 8] = [
    "N_A", "N_T", "network_age", "tau_aon", "tau_ton", "th0", "th1", "regime",
];

pub const STAGE_HEADER: [&str; 9] = [
    "mode",
    "N_A",
    "N_T",
    "p_r",
    "network_age",
    "tau_aon",
    "tau_ton",
    "u_aon",
    "u_ton",
];

pub const REGION_HEADER: [&str; 15] = [
    "alpha",
    "p_r",
    "ton_prefers",
    "aon_prefers",
    "spe",
    "margin_1",
    "se_1",
    "margin_2",
    "se_2",
    "margin_3",
    "se_3",
    "margin_4",
    "se_4",
    "indeterminate",
    "n_runs",
];

pub const GAIN_HEADER: [&str; 9] = [
    "alpha",
    "p_r",
    "sigma_C_ratio",
    "n_runs",
    "n_stages",
    "gain_aon_mean",
    "gain_aon_se",
    "gain_ton_mean",
    "gain_ton_se",
];

pub const FREQ_HEADER: [&str; 10] = [
    "N_A",
    "N_T",
    "sigma_C_ratio",
    "n_runs",
    "n_stages",
    "seed",
    "f_tau1_mean",
    "f_tau1_se",
    "f_tau0_mean",
    "f_tau0_se",
];

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Competition => "competition",
        Mode::Cooperation => "cooperation",
    }
}

fn regime_name(r: Regime) -> &'static str {
    match r {
        Regime::Interior => "interior",
        Regime::ForcedOne => "forced-one",
        Regime::ForcedZero => "forced-zero",
    }
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "true",
        Verdict::Fails => "false",
        Verdict::Indeterminate => "indeterminate",
    }
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

fn network_ages(cfg: &ExperimentConfig) -> Result<Vec<f64>, CliError> {
    if cfg.sweep.network_ages.is_empty() {
        Ok(vec![cfg.params()?.initial_age])
    } else {
        Ok(cfg.sweep.network_ages.clone())
    }
}

pub fn cmd_msne<W: Write>(cfg: &ExperimentConfig, out: W) -> Result<(), CliError> {
    let p = cfg.params()?;
    let mut w = writer(out);
    w.write_record(MSNE_HEADER)?;
    for age in network_ages(cfg)? {
        let (prof, th) = msne(p.sizes, p.slots, age)?;
        w.write_record([
            p.sizes.n_aon().to_string(),
            p.sizes.n_ton().to_string(),
            fmt_f64(age),
            fmt_f64(prof.tau_aon()),
            fmt_f64(prof.tau_ton()),
            fmt_f64(th.th0),
            fmt_f64(th.th1),
            regime_name(th.regime).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Expected stage payoffs at the equilibrium and at the cooperative optimum,
/// with the one-shot cooperation range of `P_R` in the last column.
pub fn cmd_stage<W: Write>(cfg: &ExperimentConfig, out: W) -> Result<(), CliError> {
    let p = cfg.params()?;
    let mut w = writer(out);
    let mut header = STAGE_HEADER.to_vec();
    header.push("pr_set");
    w.write_record(&header)?;
    for age in network_ages(cfg)? {
        let (nc, _) = msne(p.sizes, p.slots, age)?;
        let (c, _) = cooperative_optimum(p.sizes, p.slots, age)?;
        let set = cooperation_beneficial_pr_set(p.sizes, p.slots, age, 0.01)?;
        let set_text = set
            .intervals
            .iter()
            .map(|(a, b)| format!("[{a};{b}]"))
            .collect::<Vec<_>>()
            .join(" ");
        for (name, mode, prof, pr) in [
            ("competition", StageMode::Competitive, nc, String::new()),
            ("cooperation", StageMode::Cooperative(p.p_r), c, fmt_f64(p.p_r)),
        ] {
            let u = expected_stage_payoffs(mode, p.sizes, p.slots, prof, age, p.rate)?;
            w.write_record([
                name.to_string(),
                p.sizes.n_aon().to_string(),
                p.sizes.n_ton().to_string(),
                pr,
                fmt_f64(age),
                fmt_f64(prof.tau_aon()),
                fmt_f64(prof.tau_ton()),
                fmt_f64(u.u_aon),
                fmt_f64(u.u_ton),
                set_text.clone(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_simulate<W: Write>(
    cfg: &ExperimentConfig,
    mode: Mode,
    out: W,
) -> Result<(), CliError> {
    let base = cfg.run_config(mode)?;
    let ratio = cfg.collision_ratio()?;
    let mut w = writer(out);
    w.write_record(SIMULATE_HEADER)?;
    for alpha in cfg.alpha_axis(vec![base.params.alpha]) {
        for p_r in cfg.pr_axis(vec![base.params.p_r]) {
            let mut rc = base;
            rc.params = rc.params.with_alpha(alpha).with_p_r(p_r);
            let agg = monte_carlo(&rc, cfg.run.n_runs)?;
            w.write_record([
                mode_name(mode).to_string(),
                rc.params.sizes.n_aon().to_string(),
                rc.params.sizes.n_ton().to_string(),
                fmt_f64(ratio),
                fmt_f64(alpha),
                fmt_f64(p_r),
                cfg.run.n_runs.to_string(),
                rc.n_stages.to_string(),
                rc.seed.to_string(),
                fmt_f64(agg.u_aon.mean),
                fmt_f64(agg.u_aon.std_error),
                fmt_f64(agg.u_ton.mean),
                fmt_f64(agg.u_ton.std_error),
                fmt_f64(agg.freq_tau_one.mean),
                fmt_f64(agg.freq_tau_zero.mean),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_region<W: Write>(cfg: &ExperimentConfig, out: W) -> Result<(), CliError> {
    let p = cfg.params()?;
    let alphas = cfg.alpha_axis(default_axis());
    let prs = cfg.pr_axis(default_axis());
    if cfg.run.n_runs == 0 || cfg.run.n_stages == 0 {
        return Err(CliError::Config("n_runs and n_stages must be at least 1".into()));
    }
    let grid = region_sweep(&p, &alphas, &prs, cfg.run.n_runs, cfg.run.n_stages, cfg.run.seed)?;
    let mut w = writer(out);
    w.write_record(REGION_HEADER)?;
    for cell in &grid.cells {
        let r = &cell.report;
        let mut row = vec![
            fmt_f64(cell.alpha),
            fmt_f64(cell.p_r),
            verdict_name(r.ton_prefers()).to_string(),
            verdict_name(r.aon_prefers()).to_string(),
            verdict_name(r.spe()).to_string(),
        ];
        for e in &r.estimates {
            row.push(fmt_f64(e.margin.mean));
            row.push(fmt_f64(e.margin.std_error));
        }
        row.push(r.any_indeterminate().to_string());
        row.push(cfg.run.n_runs.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Gain of cooperation over competition. With `self_test` cooperation is
/// compared against itself, which must give zero.
pub fn cmd_gain<W: Write>(cfg: &ExperimentConfig, self_test: bool, out: W) -> Result<(), CliError> {
    let base = cfg.run_config(Mode::Cooperation)?;
    let ratio = cfg.collision_ratio()?;
    let mut w = writer(out);
    w.write_record(GAIN_HEADER)?;
    for alpha in cfg.alpha_axis(vec![base.params.alpha]) {
        for p_r in cfg.pr_axis(default_axis()) {
            let g = if self_test {
                let mut rc = base;
                rc.params = rc.params.with_alpha(alpha).with_p_r(p_r);
                gain_between(&rc, &rc, cfg.run.n_runs)?
            } else {
                gain_of_cooperation(
                    &base.params,
                    alpha,
                    p_r,
                    cfg.run.n_runs,
                    base.n_stages,
                    base.seed,
                )?
            };
            w.write_record([
                fmt_f64(alpha),
                fmt_f64(p_r),
                fmt_f64(ratio),
                cfg.run.n_runs.to_string(),
                base.n_stages.to_string(),
                fmt_f64(g.aon.mean),
                fmt_f64(g.aon.std_error),
                fmt_f64(g.ton.mean),
                fmt_f64(g.ton.std_error),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Competitive frequencies of `tau_A* = 1` and `tau_A* = 0` for
/// `N_A = N_T = N`.
pub fn cmd_freq<W: Write>(cfg: &ExperimentConfig, out: W) -> Result<(), CliError> {
    let base = cfg.run_config(Mode::Competition)?;
    let ratio = cfg.collision_ratio()?;
    let sizes = if cfg.sweep.sizes.is_empty() {
        vec![1, 2, 5, 10]
    } else {
        cfg.sweep.sizes.clone()
    };
    let mut w = writer(out);
    w.write_record(FREQ_HEADER)?;
    for n in sizes {
        let mut rc = base;
        rc.params.sizes = NetworkSizes::new(n, n)?;
        let agg = monte_carlo(&rc, cfg.run.n_runs)?;
        w.write_record([
            n.to_string(),
            n.to_string(),
            fmt_f64(ratio),
            cfg.run.n_runs.to_string(),
            rc.n_stages.to_string(),
            rc.seed.to_string(),
            fmt_f64(agg.freq_tau_one.mean),
            fmt_f64(agg.freq_tau_one.std_error),
            fmt_f64(agg.freq_tau_zero.mean),
            fmt_f64(agg.freq_tau_zero.std_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}
