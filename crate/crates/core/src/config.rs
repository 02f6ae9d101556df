//! Experiment description files.
//!
//! An experiment is a TOML document. Game parameters are layered: the
//! built-in default (see [`default_game_config`]), then an optional `base`
//! file, then the experiment's `[game]` table, then each `[[configs]]`
//! entry's `game` table. Tables merge key by key; arrays and scalars replace.
//! A table carrying a variant tag (`mode` for channels, `spacing` for grids)
//! replaces the previous table instead of merging into it.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::calibration;
use crate::channel::ChannelModel;
use crate::energy::{AmplifierParams, AntennaConfig, CircuitPowerParams};
use crate::error::ConfigError;
use crate::game::{GameConfig, StrategyGrid};
use crate::modulation::{FrameFormat, ModulationScheme};

/// Reference defaults (BPSK, 32/40-bit frames at 1 Mbit/s, 2x2 cooperation,
/// 100 uniform levels over 1-100 mW, one player) with the calibrated link
/// gain and cost factor.
pub fn default_game_config() -> GameConfig {
    static DEFAULT: OnceLock<GameConfig> = OnceLock::new();
    DEFAULT
        .get_or_init(|| {
            let base = GameConfig {
                scheme: ModulationScheme::Bpsk,
                frame: FrameFormat::default(),
                cost_k: 0.0,
                antennas: AntennaConfig::default(),
                channel: ChannelModel::link_budget(1.0).expect("positive gain"),
                branch_rates_bps: None,
                grid: StrategyGrid::uniform(1.0, 100.0, 100).expect("valid grid"),
                n_players: 1,
                amplifier: AmplifierParams::ideal(),
                circuit: CircuitPowerParams::default(),
            };
            calibration::apply(&base).expect("default calibration")
        })
        .clone()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    BerSweep,
    FrameSuccessSweep,
    PowerEfficiencySweep,
    NetUtilitySweep,
    EquilibriumSolve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    SinrDb,
    PowerMw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default = "default_scale")]
    pub scale: SweepScale,
}

fn default_scale() -> SweepScale {
    SweepScale::Linear
}

impl SweepAxis {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.points < 2 {
            return Err(ConfigError::field("sweep.points", "must be >= 2"));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.stop <= self.start {
            return Err(ConfigError::field(
                "sweep",
                format!(
                    "need finite start < stop, got {} .. {}",
                    self.start, self.stop
                ),
            ));
        }
        match (self.variable, self.scale) {
            (SweepVariable::SinrDb, SweepScale::Log) => Err(ConfigError::field(
                "sweep.scale",
                "sinr_db is already logarithmic; use linear",
            )),
            (SweepVariable::PowerMw, _) if self.start <= 0.0 => Err(ConfigError::field(
                "sweep.start",
                format!("power must be > 0 mW, got {}", self.start),
            )),
            _ => Ok(()),
        }
    }

    /// Strategy grid with the axis' points as levels (power axes only).
    pub fn as_grid(&self) -> Result<StrategyGrid, ConfigError> {
        if self.variable != SweepVariable::PowerMw {
            return Err(ConfigError::field("sweep.variable", "expected power_mw"));
        }
        let grid = match self.scale {
            SweepScale::Linear => StrategyGrid::uniform(self.start, self.stop, self.points),
            SweepScale::Log => StrategyGrid::geometric(self.start, self.stop, self.points),
        };
        grid.map_err(|e| ConfigError::field("sweep", e.to_string()))
    }

    pub fn values(&self) -> Vec<f64> {
        match self.variable {
            SweepVariable::PowerMw => self
                .as_grid()
                .map(|g| g.levels().to_vec())
                .unwrap_or_default(),
            SweepVariable::SinrDb => {
                let step = (self.stop - self.start) / (self.points - 1) as f64;
                let mut v: Vec<f64> = (0..self.points)
                    .map(|i| self.start + step * i as f64)
                    .collect();
                v[self.points - 1] = self.stop;
                v
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialProfile {
    Silent,
    MinPower,
    MaxPower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentOptions {
    #[serde(default = "default_true")]
    pub parallel: bool,
    #[serde(default = "default_max_rounds")]
    pub max_rounds: usize,
    #[serde(default = "default_initial")]
    pub initial: InitialProfile,
    /// Adds simulated frame-success columns with this many frames per point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monte_carlo_frames: Option<u64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_true() -> bool {
    true
}

fn default_max_rounds() -> usize {
    100
}

fn default_initial() -> InitialProfile {
    InitialProfile::Silent
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            parallel: true,
            max_rounds: default_max_rounds(),
            initial: default_initial(),
            monte_carlo_frames: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverlay {
    pub label: String,
    /// Recompute link gain and cost factor for this config's scheme and antennas.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub calibrate: bool,
    #[serde(default, skip_serializing_if = "Table::is_empty")]
    pub game: Table,
}

/// Raw experiment file as written by a user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub name: String,
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    /// Game overlay file, relative to the experiment file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepAxis>,
    #[serde(default)]
    pub options: ExperimentOptions,
    #[serde(default, skip_serializing_if = "Table::is_empty")]
    pub game: Table,
    #[serde(default)]
    pub configs: Vec<ConfigOverlay>,
}

/// A fully resolved experiment: every config is a complete [`GameConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub kind: ExperimentKind,
    pub output: String,
    pub sweep: Option<SweepAxis>,
    pub options: ExperimentOptions,
    pub configs: Vec<(String, GameConfig)>,
}

fn parse_toml(text: &str) -> Result<Table, ConfigError> {
    text.parse::<Table>()
        .map_err(|e| ConfigError::Parse(e.to_string()))
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}

const VARIANT_TAGS: [&str; 2] = ["mode", "spacing"];

/// Recursively merges `overlay` into `base`.
pub fn merge_tables(base: &mut Table, overlay: &Table) {
    for (key, value) in overlay {
        match (base.get_mut(key), value) {
            (Some(Value::Table(b)), Value::Table(o))
                if !VARIANT_TAGS.iter().any(|t| o.contains_key(*t)) =>
            {
                merge_tables(b, o)
            }
            _ => {
                base.insert(key.clone(), value.clone());
            }
        }
    }
}

/// Applies `key.path=value` to a TOML document. Numeric segments index arrays.
/// The value is parsed as a TOML value, falling back to a bare string.
pub fn apply_override(doc: &mut Table, assignment: &str) -> Result<(), ConfigError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| ConfigError::field(assignment, "expected key=value"))?;
    let path = path.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));

    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(ConfigError::field(path, "empty path segment"));
    }
    let (last, parents) = segments.split_last().expect("non-empty");
    let mut cursor: &mut Value = doc_entry(doc, parents.first().copied().unwrap_or(last));
    if parents.is_empty() {
        *cursor = value;
        return Ok(());
    }
    for seg in parents[1..].iter().chain(std::iter::once(last)) {
        cursor = match cursor {
            Value::Table(t) => t
                .entry(seg.to_string())
                .or_insert_with(|| Value::Table(Table::new())),
            Value::Array(a) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| ConfigError::field(path, format!("`{seg}` is not an index")))?;
                a.get_mut(idx)
                    .ok_or_else(|| ConfigError::field(path, format!("index {idx} out of range")))?
            }
            _ => {
                return Err(ConfigError::field(
                    path,
                    format!("cannot descend into `{seg}`"),
                ))
            }
        };
    }
    *cursor = value;
    Ok(())
}

fn doc_entry<'a>(doc: &'a mut Table, key: &str) -> &'a mut Value {
    doc.entry(key.to_string())
        .or_insert_with(|| Value::Table(Table::new()))
}

fn to_table<T: Serialize>(value: &T) -> Table {
    match Value::try_from(value).expect("config serializes to TOML") {
        Value::Table(t) => t,
        _ => unreachable!("structs serialize to tables"),
    }
}

fn game_from_table(table: Table, prefix: &str) -> Result<GameConfig, ConfigError> {
    let de = Value::Table(table);
    let config: GameConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." {
            prefix.to_string()
        } else {
            format!("{prefix}.{inner}")
        };
        ConfigError::field(path, e.into_inner().to_string())
    })?;
    config
        .validate()
        .map_err(|e| ConfigError::field(prefix, e.to_string()))?;
    Ok(config)
}

impl ExperimentFile {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        Self::from_table(parse_toml(text)?)
    }

    pub fn from_table(table: Table) -> Result<Self, ConfigError> {
        serde_path_to_error::deserialize(Value::Table(table))
            .map_err(|e| ConfigError::field(e.path().to_string(), e.into_inner().to_string()))
    }

    /// Resolves overlays into complete game configs. `dir` anchors a
    /// relative `base` path.
    pub fn resolve(&self, dir: Option<&Path>) -> Result<Experiment, ConfigError> {
        if self.name.trim().is_empty() {
            return Err(ConfigError::field("name", "must not be empty"));
        }
        let mut root = to_table(&default_game_config());
        if let Some(base) = &self.base {
            let path = dir.map_or_else(|| PathBuf::from(base), |d| d.join(base));
            let overlay = parse_toml(&read(&path)?)?;
            merge_tables(&mut root, &overlay);
            game_from_table(root.clone(), "base")?;
        }
        merge_tables(&mut root, &self.game);

        let overlays: Vec<ConfigOverlay> = if self.configs.is_empty() {
            vec![ConfigOverlay {
                label: "default".to_string(),
                calibrate: false,
                game: Table::new(),
            }]
        } else {
            self.configs.clone()
        };
        let mut seen = BTreeSet::new();
        let mut configs = Vec::with_capacity(overlays.len());
        for (i, overlay) in overlays.iter().enumerate() {
            let prefix = format!("configs[{i}]");
            if overlay.label.trim().is_empty() {
                return Err(ConfigError::field(
                    format!("{prefix}.label"),
                    "must not be empty",
                ));
            }
            if !seen.insert(overlay.label.clone()) {
                return Err(ConfigError::field(
                    format!("{prefix}.label"),
                    format!("duplicate label `{}`", overlay.label),
                ));
            }
            let mut table = root.clone();
            merge_tables(&mut table, &overlay.game);
            let mut game = game_from_table(table, &format!("{prefix}.game"))?;
            if overlay.calibrate {
                game = calibration::apply(&game).map_err(|e| {
                    ConfigError::field(format!("{prefix}.calibrate"), e.to_string())
                })?;
            }
            configs.push((overlay.label.clone(), game));
        }

        let needs_sweep = !matches!(self.kind, ExperimentKind::EquilibriumSolve);
        match (&self.sweep, needs_sweep) {
            (None, true) => return Err(ConfigError::field("sweep", "required for this kind")),
            (Some(axis), _) => {
                axis.validate()?;
                let want = match self.kind {
                    ExperimentKind::BerSweep | ExperimentKind::FrameSuccessSweep => {
                        Some(SweepVariable::SinrDb)
                    }
                    ExperimentKind::PowerEfficiencySweep | ExperimentKind::NetUtilitySweep => {
                        Some(SweepVariable::PowerMw)
                    }
                    ExperimentKind::EquilibriumSolve => None,
                };
                if let Some(want) = want {
                    if axis.variable != want {
                        return Err(ConfigError::field(
                            "sweep.variable",
                            format!("{:?} needs {:?}", self.kind, want),
                        ));
                    }
                }
            }
            (None, false) => {}
        }
        if self.options.max_rounds == 0 {
            return Err(ConfigError::field("options.max_rounds", "must be >= 1"));
        }
        if self.options.monte_carlo_frames == Some(0) {
            return Err(ConfigError::field(
                "options.monte_carlo_frames",
                "must be >= 1",
            ));
        }

        Ok(Experiment {
            name: self.name.clone(),
            kind: self.kind,
            output: self
                .output
                .clone()
                .unwrap_or_else(|| format!("{}.csv", self.name)),
            sweep: self.sweep.clone(),
            options: self.options.clone(),
            configs,
        })
    }
}

impl Experiment {
    /// Loads, applies `--set` style overrides, and resolves an experiment file.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut doc = parse_toml(&read(path)?)?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        ExperimentFile::from_table(doc)?.resolve(path.parent())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        ExperimentFile::from_toml_str(text)?.resolve(None)
    }

    /// Self-contained experiment file reproducing this experiment exactly.
    pub fn to_file(&self) -> ExperimentFile {
        ExperimentFile {
            name: self.name.clone(),
            kind: self.kind,
            output: Some(self.output.clone()),
            base: None,
            sweep: self.sweep.clone(),
            options: self.options.clone(),
            game: Table::new(),
            configs: self
                .configs
                .iter()
                .map(|(label, game)| ConfigOverlay {
                    label: label.clone(),
                    calibrate: false,
                    game: to_table(game),
                })
                .collect(),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.to_file()).expect("experiment serializes to TOML")
    }
}

/// TOML rendering of a game config, as shipped in `configs/default.toml`.
pub fn game_config_to_toml(config: &GameConfig) -> String {
    toml::to_string(config).expect("game config serializes to TOML")
}

pub fn game_config_from_toml(text: &str) -> Result<GameConfig, ConfigError> {
    let mut root = to_table(&default_game_config());
    merge_tables(&mut root, &parse_toml(text)?);
    game_from_table(root, "game")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelSpec;

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
        game.antennas = { n_tx = 1, n_rx = 1 }
        [[configs]]
        label = "VMIMO"
    "#;

    #[test]
    fn overlays_resolve_over_defaults() {
        let exp = Experiment::from_toml_str(NET).unwrap();
        assert_eq!(exp.configs.len(), 2);
        assert!(exp.configs[0].1.antennas.is_siso());
        assert_eq!(exp.configs[1].1, default_game_config());
        assert_eq!(exp.output, "net.csv");
    }

    #[test]
    fn default_config_round_trips_through_toml() {
        let text = game_config_to_toml(&default_game_config());
        assert_eq!(game_config_from_toml(&text).unwrap(), default_game_config());
    }

    #[test]
    fn resolved_snapshot_round_trips() {
        let exp = Experiment::from_toml_str(NET).unwrap();
        let again = Experiment::from_toml_str(&exp.to_toml_string()).unwrap();
        assert_eq!(exp, again);
    }

    #[test]
    fn bad_field_is_named() {
        let text = NET.replace(
            "game.antennas = { n_tx = 1, n_rx = 1 }",
            "game.cost_k = \"x\"",
        );
        let err = Experiment::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("configs[0].game.cost_k"), "{err}");

        let text = NET.replace("n_rx = 1", "n_rx = 0");
        let err = Experiment::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("configs[0].game.antennas"), "{err}");
    }

    #[test]
    fn duplicate_labels_rejected() {
        let text = NET.replace("label = \"VMIMO\"", "label = \"SISO\"");
        let err = Experiment::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("duplicate"), "{err}");
    }

    #[test]
    fn sweep_validation() {
        let text = NET.replace("points = 100", "points = 1");
        assert!(Experiment::from_toml_str(&text).is_err());
        let text = NET.replace("start = 1.0", "start = 0.0");
        assert!(Experiment::from_toml_str(&text).is_err());
        let text = NET.replace("variable = \"power_mw\"", "variable = \"sinr_db\"");
        assert!(Experiment::from_toml_str(&text).is_err());
    }

    #[test]
    fn overrides_apply_to_paths() {
        let mut doc: Table = NET.parse().unwrap();
        apply_override(&mut doc, "game.cost_k=12.5").unwrap();
        apply_override(&mut doc, "configs.1.game.scheme=dpsk").unwrap();
        apply_override(&mut doc, "sweep.points=10").unwrap();
        let exp = ExperimentFile::from_table(doc)
            .unwrap()
            .resolve(None)
            .unwrap();
        assert_eq!(exp.configs[0].1.cost_k, 12.5);
        assert_eq!(exp.configs[1].1.scheme, ModulationScheme::Dpsk);
        assert_eq!(exp.sweep.unwrap().points, 10);

        let mut doc: Table = NET.parse().unwrap();
        assert!(apply_override(&mut doc, "configs.7.label=x").is_err());
        assert!(apply_override(&mut doc, "novalue").is_err());
    }

    #[test]
    fn calibrate_flag_recomputes_gain() {
        let text = NET.replace(
            "label = \"VMIMO\"",
            "label = \"VMIMO\"\ncalibrate = true\ngame.scheme = \"dpsk\"",
        );
        let exp = Experiment::from_toml_str(&text).unwrap();
        let cal = calibration::calibrate(&exp.configs[1].1).unwrap();
        match exp.configs[1].1.channel.spec() {
            ChannelSpec::LinkBudget { gain_per_mw, .. } => {
                assert_eq!(*gain_per_mw, Some(cal.gain_per_mw))
            }
            other => panic!("{other:?}"),
        }
        assert_ne!(exp.configs[1].1.cost_k, default_game_config().cost_k);
    }

    #[test]
    fn channel_mode_switch_replaces_table() {
        let text = NET.replace(
            "label = \"VMIMO\"",
            "label = \"VMIMO\"\ngame.channel = { mode = \"exogenous\", sinr_db = 5.0 }",
        );
        let exp = Experiment::from_toml_str(&text).unwrap();
        assert!(!exp.configs[1].1.channel.is_link_budget());

        let text = NET.replace(
            "label = \"VMIMO\"",
            "label = \"VMIMO\"\ngame.grid = { spacing = \"explicit\", levels_mw = [1.0, 2.0] }",
        );
        let exp = Experiment::from_toml_str(&text).unwrap();
        assert_eq!(exp.configs[1].1.grid.len(), 2);
    }
}
