//! Sweep runners and tabular output.
//!
//! Each runner takes a resolved [`Experiment`] and produces a
//! [`ResultTable`]. Sweep points are independent and may be evaluated in
//! parallel; rows always come back in sweep order.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use crate::channel::ChannelModel;
use crate::config::{Experiment, ExperimentKind, InitialProfile, SweepAxis};
use crate::energy::{amplifier_power, circuit_power, total_power};
use crate::equilibrium::{enumerate_nash_bruteforce, find_equilibrium, UTILITY_TOLERANCE};
use crate::error::{ExperimentError, ModelError, Result};
use crate::game::{
    expected_power_efficiency, net_utility, threshold_power, Action, GameConfig, StrategyProfile,
};
use crate::modulation::{
    bit_error_probability, db_to_linear, frame_error_probability, frame_success_probability,
};
use crate::montecarlo::{simulate_frames, stream_rng};

pub const TOOL_VERSION: &str = concat!("vmimo-core ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Num(Vec<f64>),
    Text(Vec<String>),
}

impl ColumnData {
    fn len(&self) -> usize {
        match self {
            ColumnData::Num(v) => v.len(),
            ColumnData::Text(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metadata {
    pub experiment: String,
    pub kind: ExperimentKind,
    pub tool_version: String,
    /// Seconds since the Unix epoch when the table was produced.
    pub timestamp: u64,
    pub summary: Vec<(String, String)>,
    /// Self-contained experiment file that reproduces the table.
    pub resolved: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<Column>,
    pub metadata: Metadata,
}

impl ResultTable {
    fn new(exp: &Experiment) -> Self {
        ResultTable {
            columns: Vec::new(),
            metadata: Metadata {
                experiment: exp.name.clone(),
                kind: exp.kind,
                tool_version: TOOL_VERSION.to_string(),
                timestamp: SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                summary: Vec::new(),
                resolved: exp.to_toml_string(),
            },
        }
    }

    fn push_num(&mut self, name: impl Into<String>, values: Vec<f64>) {
        self.columns.push(Column {
            name: name.into(),
            data: ColumnData::Num(values),
        });
    }

    fn push_text(&mut self, name: impl Into<String>, values: Vec<String>) {
        self.columns.push(Column {
            name: name.into(),
            data: ColumnData::Text(values),
        });
    }

    fn note(&mut self, key: impl Into<String>, value: impl ToString) {
        self.metadata.summary.push((key.into(), value.to_string()));
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.data.len())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .and_then(|c| match &c.data {
                ColumnData::Num(v) => Some(v.as_slice()),
                ColumnData::Text(_) => None,
            })
    }

    pub fn text_column(&self, name: &str) -> Option<&[String]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .and_then(|c| match &c.data {
                ColumnData::Text(v) => Some(v.as_slice()),
                ColumnData::Num(_) => None,
            })
    }

    pub fn column_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    pub fn summary(&self, key: &str) -> Option<&str> {
        self.metadata
            .summary
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    /// Header line plus data rows, without the metadata block.
    pub fn data_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(|c| c.name.as_str()))
            .expect("in-memory write");
        for row in 0..self.rows() {
            w.write_record(self.columns.iter().map(|c| match &c.data {
                ColumnData::Num(v) => format!("{}", v[row]),
                ColumnData::Text(v) => v[row].clone(),
            }))
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }

    /// Full CSV: `#`-prefixed metadata block followed by [`data_csv`](Self::data_csv).
    pub fn to_csv(&self) -> String {
        let m = &self.metadata;
        let mut out = String::new();
        let _ = writeln!(out, "# experiment: {}", m.experiment);
        let _ = writeln!(out, "# kind: {}", kind_name(m.kind));
        let _ = writeln!(out, "# tool: {}", m.tool_version);
        let _ = writeln!(out, "# timestamp: {}", m.timestamp);
        for (k, v) in &m.summary {
            let _ = writeln!(out, "# summary.{k}: {v}");
        }
        out.push_str("# resolved-config:\n");
        for line in m.resolved.lines() {
            let _ = writeln!(out, "#   {line}");
        }
        out.push_str(&self.data_csv());
        out
    }
}

pub fn kind_name(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::BerSweep => "ber_sweep",
        ExperimentKind::FrameSuccessSweep => "frame_success_sweep",
        ExperimentKind::PowerEfficiencySweep => "power_efficiency_sweep",
        ExperimentKind::NetUtilitySweep => "net_utility_sweep",
        ExperimentKind::EquilibriumSolve => "equilibrium_solve",
    }
}

/// Evaluates `f` at every index, in parallel when asked, keeping index order.
fn evaluate<T, F>(parallel: bool, n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if parallel {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

fn axis(exp: &Experiment) -> Result<&SweepAxis> {
    exp.sweep
        .as_ref()
        .ok_or_else(|| ModelError::invalid("sweep", "this experiment kind needs a sweep axis"))
}

/// Lowest index whose value is within tolerance of the maximum.
pub fn grid_argmax(values: &[f64]) -> Option<usize> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values.iter().position(|v| *v >= max - UTILITY_TOLERANCE)
}

fn consumed_power(p: f64, config: &GameConfig) -> Result<f64> {
    total_power(
        amplifier_power(p, &config.amplifier)?,
        circuit_power(&config.circuit, config.antennas),
    )
}

pub fn run(exp: &Experiment) -> Result<ResultTable> {
    match exp.kind {
        ExperimentKind::BerSweep => run_ber_sweep(exp),
        ExperimentKind::FrameSuccessSweep => run_frame_success_sweep(exp),
        ExperimentKind::PowerEfficiencySweep => run_power_efficiency_sweep(exp),
        ExperimentKind::NetUtilitySweep => run_net_utility_sweep(exp),
        ExperimentKind::EquilibriumSolve => run_equilibrium_solve(exp),
    }
}

/// Bit-error probability of each config's scheme versus SINR in dB.
pub fn run_ber_sweep(exp: &Experiment) -> Result<ResultTable> {
    let sinr_db = axis(exp)?.values();
    let gamma: Vec<f64> = sinr_db.iter().map(|&d| db_to_linear(d)).collect();
    let mut table = ResultTable::new(exp);
    table.push_num("sinr_db", sinr_db.clone());
    table.push_num("gamma", gamma.clone());
    for (label, cfg) in &exp.configs {
        let pe = evaluate(exp.options.parallel, gamma.len(), |i| {
            bit_error_probability(cfg.scheme, gamma[i])
        })?;
        table.push_num(format!("{label}_pe"), pe);
        table.note(format!("{label}.scheme"), cfg.scheme);
    }
    Ok(table)
}

/// Frame success `(1 - Pe)^F` and its complement versus SINR in dB, with
/// optional simulated success columns.
pub fn run_frame_success_sweep(exp: &Experiment) -> Result<ResultTable> {
    let sinr_db = axis(exp)?.values();
    let gamma: Vec<f64> = sinr_db.iter().map(|&d| db_to_linear(d)).collect();
    let n = gamma.len();
    let mut table = ResultTable::new(exp);
    table.push_num("sinr_db", sinr_db.clone());
    table.push_num("gamma", gamma.clone());
    for (ci, (label, cfg)) in exp.configs.iter().enumerate() {
        let frame_bits = cfg.frame.frame_bits;
        let rows = evaluate(exp.options.parallel, n, |i| {
            let pe = bit_error_probability(cfg.scheme, gamma[i])?;
            Ok((
                pe,
                frame_success_probability(pe, frame_bits)?,
                frame_error_probability(pe, frame_bits)?,
            ))
        })?;
        table.push_num(format!("{label}_pe"), rows.iter().map(|r| r.0).collect());
        table.push_num(
            format!("{label}_frame_success"),
            rows.iter().map(|r| r.1).collect(),
        );
        table.push_num(
            format!("{label}_frame_error"),
            rows.iter().map(|r| r.2).collect(),
        );
        if let Some(frames) = exp.options.monte_carlo_frames {
            let seed = exp.options.seed;
            let sims = evaluate(exp.options.parallel, n, |i| {
                let mut rng = stream_rng(seed, (ci * n + i) as u64);
                simulate_frames(rows[i].0, frame_bits, frames, &mut rng)
            })?;
            table.push_num(
                format!("{label}_mc_success"),
                sims.iter().map(|s| s.success_rate).collect(),
            );
            table.push_num(
                format!("{label}_mc_std_error"),
                sims.iter()
                    .zip(&rows)
                    .map(|(s, r)| s.std_error_at(r.1))
                    .collect(),
            );
        }
        table.note(format!("{label}.scheme"), cfg.scheme);
        table.note(format!("{label}.frame_bits"), frame_bits);
    }
    if exp.options.monte_carlo_frames.is_some() {
        table.note("monte_carlo.seed", exp.options.seed);
    }
    Ok(table)
}

/// Expected power efficiency under retransmit-until-success versus the
/// chosen transmit power.
pub fn run_power_efficiency_sweep(exp: &Experiment) -> Result<ResultTable> {
    let power = axis(exp)?.values();
    let n = power.len();
    let mut table = ResultTable::new(exp);
    table.push_num("power_mw", power.clone());
    for (label, cfg) in &exp.configs {
        let rows = evaluate(exp.options.parallel, n, |i| {
            Ok((
                expected_power_efficiency(power[i], cfg)?,
                consumed_power(power[i], cfg)?,
            ))
        })?;
        let eff: Vec<f64> = rows.iter().map(|r| r.0.efficiency).collect();
        let peak = eff.iter().copied().fold(0.0, f64::max);
        let normalized = eff
            .iter()
            .map(|e| if peak > 0.0 { e / peak } else { 0.0 })
            .collect();
        table.push_num(format!("{label}_efficiency"), eff.clone());
        table.push_num(format!("{label}_normalized"), normalized);
        table.push_num(
            format!("{label}_success"),
            rows.iter().map(|r| r.0.success_probability).collect(),
        );
        table.push_num(
            format!("{label}_expected_tx"),
            rows.iter().map(|r| r.0.expected_transmissions).collect(),
        );
        table.push_num(
            format!("{label}_consumed_mw"),
            rows.iter().map(|r| r.1).collect(),
        );
        if let Some(best) = grid_argmax(&eff) {
            table.note(format!("{label}.best_power_mw"), power[best]);
        }
        table.note(format!("{label}.peak_efficiency"), peak);
    }
    Ok(table)
}

/// Net utility at every strategy level (plus the silent action) for each
/// config, with argmax, threshold power and improvement over the first
/// config.
pub fn run_net_utility_sweep(exp: &Experiment) -> Result<ResultTable> {
    let grid = axis(exp)?
        .as_grid()
        .map_err(|e| ModelError::invalid("sweep", e.to_string()))?;
    let levels = grid.levels().to_vec();
    let n = levels.len();

    let mut table = ResultTable::new(exp);
    let mut power = vec![0.0];
    power.extend_from_slice(&levels);
    let mut action = vec!["silent".to_string()];
    action.extend(std::iter::repeat_n("transmit".to_string(), n));
    table.push_num("power_mw", power);
    table.push_text("action", action);

    let mut nets: Vec<Vec<f64>> = Vec::new();
    for (label, cfg) in &exp.configs {
        let cfg = GameConfig {
            grid: grid.clone(),
            ..cfg.clone()
        };
        let reports = evaluate(exp.options.parallel, n, |i| {
            Ok((
                net_utility(Action::Transmit(levels[i]), &cfg)?,
                consumed_power(levels[i], &cfg)?,
            ))
        })?;
        let with_silent = |f: &dyn Fn(usize) -> f64| {
            std::iter::once(0.0)
                .chain((0..n).map(f))
                .collect::<Vec<f64>>()
        };
        let net: Vec<f64> = reports.iter().map(|r| r.0.net_utility).collect();
        table.push_num(format!("{label}_net"), with_silent(&|i| net[i]));
        table.push_num(
            format!("{label}_gross"),
            with_silent(&|i| reports[i].0.gross_utility),
        );
        table.push_num(format!("{label}_cost"), with_silent(&|i| reports[i].0.cost));
        table.push_num(
            format!("{label}_consumed_mw"),
            with_silent(&|i| reports[i].1),
        );

        let best = grid_argmax(&net).expect("non-empty grid");
        table.note(format!("{label}.argmax_mw"), levels[best]);
        table.note(format!("{label}.argmax_index"), best);
        table.note(format!("{label}.argmax_interior"), best > 0 && best + 1 < n);
        table.note(format!("{label}.max_net_utility"), net[best]);
        match threshold_power(&cfg)? {
            Ok(pt) => table.note(format!("{label}.threshold_mw"), pt),
            Err(reason) => table.note(format!("{label}.threshold_mw"), format!("none ({reason})")),
        }
        nets.push(net);
    }

    if let Some((base_label, _)) = exp.configs.first() {
        let base = &nets[0];
        for (k, (label, _)) in exp.configs.iter().enumerate().skip(1) {
            let ratio: Vec<f64> = nets[k].iter().zip(base).map(|(v, b)| v / b).collect();
            let best = grid_argmax(&nets[k]).expect("non-empty grid");
            table.note(
                format!("{label}.ratio_vs_{base_label}_at_argmax"),
                ratio[best],
            );
            table.push_num(
                format!("{label}_vs_{base_label}_ratio"),
                std::iter::once(f64::NAN).chain(ratio).collect(),
            );
        }
    }
    Ok(table)
}

fn initial_profile(config: &GameConfig, initial: InitialProfile) -> Result<StrategyProfile> {
    let action = match initial {
        InitialProfile::Silent => Action::Silent,
        InitialProfile::MinPower => Action::Transmit(config.grid.p_min()),
        InitialProfile::MaxPower => Action::Transmit(config.grid.p_max()),
    };
    StrategyProfile::uniform(config.n_players, action, &config.grid)
}

/// Best-response equilibrium per config, certified by the deviation check
/// and compared against exhaustive enumeration when the instance is small
/// enough.
pub fn run_equilibrium_solve(exp: &Experiment) -> Result<ResultTable> {
    let mut cfg_col = Vec::new();
    let mut player_col = Vec::new();
    let mut action_col = Vec::new();
    let mut power_col = Vec::new();
    let mut net_col = Vec::new();
    let mut nash_col = Vec::new();
    let mut converged_col = Vec::new();
    let mut iter_col = Vec::new();
    let mut moves_col = Vec::new();
    let mut dev_col = Vec::new();
    let mut set_size_col = Vec::new();
    let mut in_set_col = Vec::new();
    let mut warn_col = Vec::new();
    let mut notes = Vec::new();

    for (label, cfg) in &exp.configs {
        let initial = initial_profile(cfg, exp.options.initial)?;
        let result = find_equilibrium(cfg, &initial, exp.options.max_rounds)?;
        let (set_size, in_set, warning) = match enumerate_nash_bruteforce(cfg) {
            Ok(set) => {
                let member = set.contains(&result.profile);
                let rendered: Vec<String> = set.iter().take(20).map(|p| p.to_string()).collect();
                notes.push((format!("{label}.oracle_nash_set"), rendered.join("; ")));
                (
                    set.len() as f64,
                    if member { 1.0 } else { 0.0 },
                    String::new(),
                )
            }
            Err(e @ ModelError::TooLarge { .. }) => (f64::NAN, f64::NAN, e.to_string()),
            Err(e) => return Err(e),
        };
        notes.push((format!("{label}.profile"), result.profile.to_string()));
        notes.push((format!("{label}.is_nash"), result.is_nash.to_string()));
        let dev = result
            .certificate
            .best_deviation
            .as_ref()
            .map_or(f64::NAN, |d| d.gain);
        for player in 0..cfg.n_players {
            let a = result.profile.get(player);
            cfg_col.push(label.clone());
            player_col.push(player as f64);
            action_col.push(if a.is_silent() { "silent" } else { "transmit" }.to_string());
            power_col.push(a.power());
            net_col.push(result.per_player_net[player]);
            nash_col.push(f64::from(u8::from(result.is_nash)));
            converged_col.push(f64::from(u8::from(result.converged)));
            iter_col.push(result.iterations as f64);
            moves_col.push(
                result
                    .best_response_trace
                    .iter()
                    .filter(|m| m.player == player)
                    .count() as f64,
            );
            dev_col.push(dev);
            set_size_col.push(set_size);
            in_set_col.push(in_set);
            warn_col.push(warning.clone());
        }
    }

    let mut table = ResultTable::new(exp);
    table.push_text("config", cfg_col);
    table.push_num("player", player_col);
    table.push_text("action", action_col);
    table.push_num("power_mw", power_col);
    table.push_num("net_utility", net_col);
    table.push_num("is_nash", nash_col);
    table.push_num("converged", converged_col);
    table.push_num("iterations", iter_col);
    table.push_num("moves", moves_col);
    table.push_num("best_deviation_gain", dev_col);
    table.push_num("oracle_set_size", set_size_col);
    table.push_num("in_oracle_set", in_set_col);
    table.push_text("oracle_warning", warn_col);
    for (k, v) in notes {
        table.note(k, v);
    }
    Ok(table)
}

/// Fixed-SNR copy of `config`, used by SINR-anchored sweeps.
pub fn with_exogenous_snr(config: &GameConfig, sinr_db: f64) -> Result<GameConfig> {
    Ok(GameConfig {
        channel: ChannelModel::exogenous_db(sinr_db)?,
        ..config.clone()
    })
}

/// Paths written by [`write_outputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct WrittenFiles {
    pub csv: PathBuf,
    pub resolved: PathBuf,
}

/// Writes the CSV and the resolved-config sidecar under `dir`.
pub fn write_outputs(
    table: &ResultTable,
    exp: &Experiment,
    dir: &Path,
) -> std::result::Result<WrittenFiles, ExperimentError> {
    let io_err = |path: &Path| {
        let path = path.display().to_string();
        move |source| ExperimentError::Output { path, source }
    };
    let csv = dir.join(&exp.output);
    if let Some(parent) = csv.parent() {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    std::fs::write(&csv, table.to_csv()).map_err(io_err(&csv))?;
    let resolved = csv.with_extension("resolved.toml");
    std::fs::write(&resolved, &table.metadata.resolved).map_err(io_err(&resolved))?;
    Ok(WrittenFiles { csv, resolved })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn experiment(text: &str) -> Experiment {
        Experiment::from_toml_str(text).unwrap()
    }

    const BER: &str = r#"
        name = "ber"
        kind = "ber_sweep"
        [sweep]
        variable = "sinr_db"
        start = -15.0
        stop = 15.0
        points = 31
        [[configs]]
        label = "fsk"
        game = { scheme = "fsk" }
        [[configs]]
        label = "dpsk"
        game = { scheme = "dpsk" }
        [[configs]]
        label = "bpsk"
        game = { scheme = "bpsk" }
    "#;

    const NET: &str = r#"
        name = "net"
        kind = "net_utility_sweep"
        [sweep]
        variable = "power_mw"
        start = 1.0
        stop = 100.0
        points = 100
        [[configs]]
        label = "SISO"
        game = { antennas = { n_tx = 1, n_rx = 1 } }
        [[configs]]
        label = "VMIMO"
    "#;

    #[test]
    fn ber_columns_at_zero_db() {
        let t = run(&experiment(BER)).unwrap();
        assert_eq!(t.rows(), 31);
        let zero = t
            .column("sinr_db")
            .unwrap()
            .iter()
            .position(|d| *d == 0.0)
            .unwrap();
        let want = 0.5 * (-1.0f64).exp();
        assert_eq!(t.column("dpsk_pe").unwrap()[zero], want);
        assert_eq!(t.column("bpsk_pe").unwrap()[zero], want);
        for label in ["fsk", "dpsk", "bpsk"] {
            let pe = t.column(&format!("{label}_pe")).unwrap();
            assert!(pe.windows(2).all(|w| w[1] < w[0]));
        }
    }

    #[test]
    fn frame_success_composes_with_ber() {
        let text = BER.replace("ber_sweep", "frame_success_sweep");
        let t = run(&experiment(&text)).unwrap();
        let ber = run(&experiment(BER)).unwrap();
        for label in ["fsk", "dpsk", "bpsk"] {
            let pe = ber.column(&format!("{label}_pe")).unwrap();
            let ps = t.column(&format!("{label}_frame_success")).unwrap();
            let pf = t.column(&format!("{label}_frame_error")).unwrap();
            for i in 0..pe.len() {
                assert_eq!(ps[i], frame_success_probability(pe[i], 40).unwrap());
                assert!((ps[i] + pf[i] - 1.0).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn monte_carlo_columns_are_seeded() {
        let text = format!(
            "{}\n[options]\nmonte_carlo_frames = 2000\nseed = 9\n",
            BER.replace("ber_sweep", "frame_success_sweep")
        );
        let exp = experiment(&text);
        let a = run(&exp).unwrap();
        let b = run(&exp).unwrap();
        assert_eq!(a.column("bpsk_mc_success"), b.column("bpsk_mc_success"));
        assert!(a.column("bpsk_mc_std_error").is_some());
    }

    #[test]
    fn net_utility_sweep_reports_landscape() {
        let t = run(&experiment(NET)).unwrap();
        assert_eq!(t.rows(), 101);
        assert_eq!(t.text_column("action").unwrap()[0], "silent");
        assert_eq!(t.column("SISO_net").unwrap()[0], 0.0);
        assert_eq!(t.column("VMIMO_net").unwrap()[0], 0.0);
        assert_eq!(t.summary("VMIMO.argmax_interior"), Some("true"));
        let pt: f64 = t.summary("VMIMO.threshold_mw").unwrap().parse().unwrap();
        assert!((pt - 80.0).abs() < 1e-6);
        assert!(t.summary("VMIMO.ratio_vs_SISO_at_argmax").is_some());
        assert!(t.column("VMIMO_vs_SISO_ratio").unwrap()[0].is_nan());
    }

    #[test]
    fn parallel_and_sequential_rows_match() {
        for text in [BER, NET] {
            let mut exp = experiment(text);
            exp.options.parallel = true;
            let a = run(&exp).unwrap();
            exp.options.parallel = false;
            let b = run(&exp).unwrap();
            assert_eq!(a.data_csv(), b.data_csv());
        }
    }

    #[test]
    fn power_efficiency_at_high_snr_scales_inversely() {
        let exp = experiment(
            r#"
            name = "eff"
            kind = "power_efficiency_sweep"
            game = { channel = { mode = "exogenous", sinr_db = 10.0 } }
            [sweep]
            variable = "power_mw"
            start = 1.0
            stop = 100.0
            points = 100
            [[configs]]
            label = "SISO"
            game = { antennas = { n_tx = 1, n_rx = 1 }, scheme = "dpsk" }
            "#,
        );
        let t = run(&exp).unwrap();
        let e = t.column("SISO_efficiency").unwrap();
        assert!((e[0] / e[99] - 100.0).abs() < 1e-9);
        assert_eq!(t.summary("SISO.best_power_mw"), Some("1"));
        assert_eq!(t.column("SISO_normalized").unwrap()[0], 1.0);
    }

    #[test]
    fn equilibrium_solve_rows() {
        let exp = experiment(
            r#"
            name = "eq"
            kind = "equilibrium_solve"
            game = { n_players = 2, grid = { spacing = "uniform", p_min_mw = 1.0, p_max_mw = 100.0, levels = 20 } }
            [[configs]]
            label = "priced"
            [[configs]]
            label = "free"
            game = { cost_k = 0.0, channel = { mode = "exogenous", sinr_db = 10.0 } }
            "#,
        );
        let t = run(&exp).unwrap();
        assert_eq!(t.rows(), 4);
        assert!(t.column("is_nash").unwrap().iter().all(|v| *v == 1.0));
        assert!(t.column("in_oracle_set").unwrap().iter().all(|v| *v == 1.0));
        assert_eq!(&t.column("power_mw").unwrap()[2..], &[1.0, 1.0]);
    }

    #[test]
    fn oversized_oracle_becomes_warning() {
        let exp = experiment(
            r#"
            name = "eq"
            kind = "equilibrium_solve"
            game = { n_players = 4 }
            "#,
        );
        let t = run(&exp).unwrap();
        assert!(t.text_column("oracle_warning").unwrap()[0].contains("too large"));
        assert!(t.column("oracle_set_size").unwrap()[0].is_nan());
    }

    #[test]
    fn metadata_reproduces_run() {
        let exp = experiment(NET);
        let t = run(&exp).unwrap();
        let again = Experiment::from_toml_str(&t.metadata.resolved).unwrap();
        assert_eq!(again, exp);
        assert_eq!(run(&again).unwrap().data_csv(), t.data_csv());
        let csv = t.to_csv();
        assert!(csv.starts_with("# experiment: net\n"));
        assert!(csv.contains("# summary.VMIMO.argmax_mw: "));
    }

    #[test]
    fn writes_csv_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let exp = experiment(BER);
        let t = run(&exp).unwrap();
        let files = write_outputs(&t, &exp, dir.path()).unwrap();
        assert!(files.csv.ends_with("ber.csv"));
        assert!(files.resolved.ends_with("ber.resolved.toml"));
        let sidecar = std::fs::read_to_string(&files.resolved).unwrap();
        assert_eq!(Experiment::from_toml_str(&sidecar).unwrap(), exp);
    }
}
