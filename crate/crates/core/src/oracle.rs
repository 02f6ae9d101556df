//! Independent cross-checks of an experiment's results.
//!
//! The checks recompute quantities from closed forms written out here,
//! simulate frames bit by bit, scan continuous utilities densely and
//! enumerate equilibria exhaustively, then compare against the library
//! results.

use serde::Serialize;

use crate::channel::ChannelKind;
use crate::config::{Experiment, ExperimentKind};
use crate::equilibrium::{enumerate_nash_bruteforce, find_equilibrium};
use crate::error::{ModelError, Result};
use crate::experiments::{grid_argmax, run};
use crate::game::{threshold_power, Action, GameConfig, StrategyProfile};
use crate::modulation::{db_to_linear, ModulationScheme};
use crate::montecarlo::{simulate_frames, stream_rng};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCheck {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl OracleCheck {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        OracleCheck {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

const RELATIVE_TOLERANCE: f64 = 1e-12;
const MC_FRAMES: u64 = 200_000;
const MC_SIGMAS: f64 = 4.0;
const MC_POINTS: usize = 5;
const DENSE_SCAN_POINTS: usize = 100_000;

fn pe_closed_form(scheme: ModulationScheme, gamma: f64) -> f64 {
    match scheme {
        ModulationScheme::Fsk => 0.5 * (-gamma / 2.0).exp(),
        ModulationScheme::Dpsk => 0.5 * (-gamma).exp(),
        ModulationScheme::Bpsk => 0.5 * (-gamma.sqrt()).exp(),
    }
}

fn snr_closed_form(cfg: &GameConfig, p_node: f64) -> f64 {
    match cfg.channel.kind() {
        ChannelKind::Exogenous { gamma } => gamma,
        ChannelKind::LinkBudget { gain, .. } => gain * p_node,
    }
}

/// Net utility of a lone transmitter, written out from the model definition.
fn net_closed_form(cfg: &GameConfig, p: f64) -> f64 {
    let m = f64::from(cfg.antennas.n_tx().min(cfg.antennas.n_rx()));
    let gamma = snr_closed_form(cfg, p / m);
    let f = (1.0 - 2.0 * pe_closed_form(cfg.scheme, gamma)).powi(cfg.frame.frame_bits as i32);
    let b = f64::from(cfg.frame.info_bits);
    let big_f = f64::from(cfg.frame.frame_bits);
    let gross: f64 = cfg.branch_rates().iter().map(|r| b * r * f).sum::<f64>() / (big_f * p);
    gross - cfg.cost_k * p
}

fn relative_close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= RELATIVE_TOLERANCE * a.abs().max(b.abs())
}

fn compare_column(
    label: &str,
    what: &str,
    got: Option<&[f64]>,
    expected: impl Iterator<Item = f64>,
) -> OracleCheck {
    let name = format!("{label}: {what} matches closed form");
    let Some(got) = got else {
        return OracleCheck::new(name, false, "column missing");
    };
    let mut worst = 0.0f64;
    let mut failures = 0usize;
    for (g, e) in got.iter().zip(expected) {
        if !relative_close(*g, e) {
            failures += 1;
        }
        if e != 0.0 {
            worst = worst.max(((g - e) / e).abs());
        }
    }
    OracleCheck::new(
        name,
        failures == 0,
        format!("{failures} mismatches, worst relative error {worst:e}"),
    )
}

/// Runs the experiment and every applicable check. `seed` drives the
/// simulated frames.
pub fn run_oracle(exp: &Experiment, seed: u64) -> Result<Vec<OracleCheck>> {
    let table = run(exp)?;
    let mut checks = Vec::new();
    match exp.kind {
        ExperimentKind::BerSweep | ExperimentKind::FrameSuccessSweep => {
            let sinr_db = table.column("sinr_db").unwrap_or(&[]).to_vec();
            for (ci, (label, cfg)) in exp.configs.iter().enumerate() {
                let pe: Vec<f64> = sinr_db
                    .iter()
                    .map(|&d| pe_closed_form(cfg.scheme, db_to_linear(d)))
                    .collect();
                checks.push(compare_column(
                    label,
                    "bit error probability",
                    table.column(&format!("{label}_pe")),
                    pe.iter().copied(),
                ));
                if exp.kind == ExperimentKind::FrameSuccessSweep {
                    checks.push(compare_column(
                        label,
                        "frame success",
                        table.column(&format!("{label}_frame_success")),
                        pe.iter()
                            .map(|p| (1.0 - p).powi(cfg.frame.frame_bits as i32)),
                    ));
                    checks.push(monte_carlo_check(label, cfg, &pe, seed, ci)?);
                }
            }
        }
        ExperimentKind::PowerEfficiencySweep => {
            let power = table.column("power_mw").unwrap_or(&[]).to_vec();
            for (label, cfg) in &exp.configs {
                let m = f64::from(cfg.antennas.n_tx().min(cfg.antennas.n_rx()));
                checks.push(compare_column(
                    label,
                    "power efficiency",
                    table.column(&format!("{label}_efficiency")),
                    power.iter().map(|&p| {
                        let pe = pe_closed_form(cfg.scheme, snr_closed_form(cfg, p / m));
                        (1.0 - pe).powi(cfg.frame.frame_bits as i32) / (p / m)
                    }),
                ));
            }
        }
        ExperimentKind::NetUtilitySweep => {
            let power = table.column("power_mw").unwrap_or(&[]).to_vec();
            for (label, cfg) in &exp.configs {
                let net = table.column(&format!("{label}_net"));
                checks.push(compare_column(
                    label,
                    "net utility",
                    net.map(|v| &v[1..]),
                    power[1..].iter().map(|&p| net_closed_form(cfg, p)),
                ));
                if let Some(net) = net {
                    let scanned = grid_argmax(&net[1..]).map(|i| power[i + 1]);
                    let reported = table
                        .summary(&format!("{label}.argmax_mw"))
                        .and_then(|s| s.parse::<f64>().ok());
                    checks.push(OracleCheck::new(
                        format!("{label}: argmax agrees with grid scan"),
                        scanned.is_some() && scanned == reported,
                        format!("scan {scanned:?}, reported {reported:?}"),
                    ));
                }
                let mut grid_cfg = cfg.clone();
                if let Some(axis) = &exp.sweep {
                    if let Ok(g) = axis.as_grid() {
                        grid_cfg.grid = g;
                    }
                }
                checks.push(threshold_check(label, &grid_cfg)?);
            }
        }
        ExperimentKind::EquilibriumSolve => {
            for (label, cfg) in &exp.configs {
                checks.extend(equilibrium_checks(label, cfg, exp.options.max_rounds)?);
            }
        }
    }
    Ok(checks)
}

fn monte_carlo_check(
    label: &str,
    cfg: &GameConfig,
    pe: &[f64],
    seed: u64,
    config_index: usize,
) -> Result<OracleCheck> {
    let frame_bits = cfg.frame.frame_bits;
    // Points spread over the sweep, skipping ones with vanishing variance.
    let candidates: Vec<usize> = (0..pe.len())
        .filter(|&i| {
            let ps = (1.0 - pe[i]).powi(frame_bits as i32);
            ps > 1e-3 && ps < 1.0 - 1e-3
        })
        .collect();
    let step = (candidates.len() / MC_POINTS).max(1);
    let mut worst = 0.0f64;
    let mut tested = 0;
    for &i in candidates.iter().step_by(step).take(MC_POINTS) {
        let expected = (1.0 - pe[i]).powi(frame_bits as i32);
        let mut rng = stream_rng(seed, (config_index * pe.len() + i) as u64);
        let est = simulate_frames(pe[i], frame_bits, MC_FRAMES, &mut rng)?;
        worst = worst.max((est.success_rate - expected).abs() / est.std_error_at(expected));
        tested += 1;
    }
    Ok(OracleCheck::new(
        format!("{label}: simulated frame success within {MC_SIGMAS} standard errors"),
        worst <= MC_SIGMAS,
        format!("{tested} points x {MC_FRAMES} frames, worst deviation {worst:.3} SE"),
    ))
}

fn threshold_check(label: &str, cfg: &GameConfig) -> Result<OracleCheck> {
    let (lo, hi) = (cfg.grid.p_min(), cfg.grid.p_max());
    let step = (hi - lo) / (DENSE_SCAN_POINTS - 1) as f64;
    let mut last_nonneg = None;
    for i in 0..DENSE_SCAN_POINTS {
        let p = lo + step * i as f64;
        if net_closed_form(cfg, p) >= 0.0 {
            last_nonneg = Some(p);
        }
    }
    let at_max = net_closed_form(cfg, hi);
    let name = format!("{label}: threshold power agrees with dense scan");
    Ok(match (threshold_power(cfg)?, last_nonneg) {
        (Ok(pt), Some(scan)) if at_max <= 0.0 => OracleCheck::new(
            name,
            (pt - scan).abs() <= step,
            format!("threshold {pt} mW, scan {scan} mW, step {step:e}"),
        ),
        (Err(reason), _) => {
            let consistent = match last_nonneg {
                None => true,
                Some(_) => at_max > 0.0,
            };
            OracleCheck::new(name, consistent, format!("no threshold ({reason})"))
        }
        (Ok(pt), scan) => OracleCheck::new(
            name,
            false,
            format!("threshold {pt} mW but scan gives {scan:?}"),
        ),
    })
}

fn equilibrium_checks(
    label: &str,
    cfg: &GameConfig,
    max_rounds: usize,
) -> Result<Vec<OracleCheck>> {
    let set = match enumerate_nash_bruteforce(cfg) {
        Ok(set) => set,
        Err(e @ ModelError::TooLarge { .. }) => {
            return Ok(vec![OracleCheck::new(
                format!("{label}: exhaustive enumeration"),
                true,
                format!("skipped: {e}"),
            )])
        }
        Err(e) => return Err(e),
    };
    let mut checks = Vec::new();
    for (name, start) in [
        ("silent", Action::Silent),
        ("min power", Action::Transmit(cfg.grid.p_min())),
        ("max power", Action::Transmit(cfg.grid.p_max())),
    ] {
        let initial = StrategyProfile::uniform(cfg.n_players, start, &cfg.grid)?;
        let result = find_equilibrium(cfg, &initial, max_rounds)?;
        let member = set.contains(&result.profile);
        checks.push(OracleCheck::new(
            format!("{label}: equilibrium from {name} start is in enumerated set"),
            !result.is_nash || member,
            format!(
                "profile {}, certified {}, set size {}",
                result.profile,
                result.is_nash,
                set.len()
            ),
        ));
    }
    Ok(checks)
}
