//! Payoff machinery of the power-control game: strategy grids, gross and
//! net utility, the linear power cost, the threshold power and the
//! retransmission-based power efficiency.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelModel;
use crate::energy::{AmplifierParams, AntennaConfig, CircuitPowerParams};
use crate::error::{ModelError, Result};
use crate::modulation::{
    bit_error_probability, efficiency_function, frame_success_probability, FrameFormat,
    ModulationScheme,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpacing {
    Uniform,
    Geometric,
    Explicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "spacing", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridSpec {
    Uniform {
        p_min_mw: f64,
        p_max_mw: f64,
        levels: usize,
    },
    Geometric {
        p_min_mw: f64,
        p_max_mw: f64,
        levels: usize,
    },
    Explicit {
        levels_mw: Vec<f64>,
    },
}

/// Ordered set of transmit powers (mW) a player may choose from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct StrategyGrid {
    spec: GridSpec,
    levels: Vec<f64>,
}

impl TryFrom<GridSpec> for StrategyGrid {
    type Error = ModelError;

    fn try_from(spec: GridSpec) -> Result<Self> {
        let levels = match &spec {
            GridSpec::Uniform {
                p_min_mw,
                p_max_mw,
                levels,
            } => {
                check_bounds(*p_min_mw, *p_max_mw, *levels)?;
                let step = (p_max_mw - p_min_mw) / (*levels - 1) as f64;
                let mut v: Vec<f64> = (0..*levels).map(|i| p_min_mw + step * i as f64).collect();
                v[*levels - 1] = *p_max_mw;
                v
            }
            GridSpec::Geometric {
                p_min_mw,
                p_max_mw,
                levels,
            } => {
                check_bounds(*p_min_mw, *p_max_mw, *levels)?;
                let ratio = (p_max_mw / p_min_mw).ln() / (*levels - 1) as f64;
                let mut v: Vec<f64> = (0..*levels)
                    .map(|i| p_min_mw * (ratio * i as f64).exp())
                    .collect();
                v[0] = *p_min_mw;
                v[*levels - 1] = *p_max_mw;
                v
            }
            GridSpec::Explicit { levels_mw } => levels_mw.clone(),
        };
        if levels.len() < 2 {
            return Err(ModelError::invalid("grid", "needs at least 2 levels"));
        }
        if !(levels[0].is_finite() && levels[0] > 0.0) {
            return Err(ModelError::domain(
                "grid.p_min_mw",
                "finite and > 0",
                levels[0],
            ));
        }
        if levels.iter().any(|p| !p.is_finite()) || levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ModelError::invalid(
                "grid",
                "levels must be finite and strictly increasing",
            ));
        }
        Ok(StrategyGrid { spec, levels })
    }
}

impl From<StrategyGrid> for GridSpec {
    fn from(grid: StrategyGrid) -> Self {
        grid.spec
    }
}

fn check_bounds(p_min: f64, p_max: f64, levels: usize) -> Result<()> {
    if !(p_min.is_finite() && p_min > 0.0) {
        return Err(ModelError::domain("grid.p_min_mw", "finite and > 0", p_min));
    }
    if !(p_max.is_finite() && p_max > p_min) {
        return Err(ModelError::domain(
            "grid.p_max_mw",
            "finite and > p_min_mw",
            p_max,
        ));
    }
    if levels < 2 {
        return Err(ModelError::invalid("grid.levels", "must be >= 2"));
    }
    Ok(())
}

impl StrategyGrid {
    pub fn uniform(p_min_mw: f64, p_max_mw: f64, levels: usize) -> Result<Self> {
        GridSpec::Uniform {
            p_min_mw,
            p_max_mw,
            levels,
        }
        .try_into()
    }

    pub fn geometric(p_min_mw: f64, p_max_mw: f64, levels: usize) -> Result<Self> {
        GridSpec::Geometric {
            p_min_mw,
            p_max_mw,
            levels,
        }
        .try_into()
    }

    pub fn explicit(levels_mw: Vec<f64>) -> Result<Self> {
        GridSpec::Explicit { levels_mw }.try_into()
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn p_min(&self) -> f64 {
        self.levels[0]
    }

    pub fn p_max(&self) -> f64 {
        self.levels[self.levels.len() - 1]
    }

    pub fn spacing(&self) -> GridSpacing {
        match self.spec {
            GridSpec::Uniform { .. } => GridSpacing::Uniform,
            GridSpec::Geometric { .. } => GridSpacing::Geometric,
            GridSpec::Explicit { .. } => GridSpacing::Explicit,
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        self.index_of(p).is_some()
    }

    pub fn index_of(&self, p: f64) -> Option<usize> {
        self.levels.binary_search_by(|l| l.total_cmp(&p)).ok()
    }

    /// Every action available to a player: `Silent` followed by the levels
    /// in increasing order.
    pub fn actions(&self) -> impl Iterator<Item = Action> + '_ {
        std::iter::once(Action::Silent).chain(self.levels.iter().map(|&p| Action::Transmit(p)))
    }
}

/// A player's move: stay silent or transmit at a power in mW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Silent,
    Transmit(f64),
}

impl Action {
    /// Transmit power in mW; zero when silent.
    pub fn power(self) -> f64 {
        match self {
            Action::Silent => 0.0,
            Action::Transmit(p) => p,
        }
    }

    pub fn is_silent(self) -> bool {
        matches!(self, Action::Silent)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::Silent => f.write_str("silent"),
            Action::Transmit(p) => write!(f, "{p} mW"),
        }
    }
}

/// One action per player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    actions: Vec<Action>,
}

impl StrategyProfile {
    pub fn new(actions: Vec<Action>, grid: &StrategyGrid) -> Result<Self> {
        for (i, a) in actions.iter().enumerate() {
            if let Action::Transmit(p) = a {
                if !grid.contains(*p) {
                    return Err(ModelError::invalid(
                        "strategy profile",
                        format!("player {i} power {p} mW is not a grid level"),
                    ));
                }
            }
        }
        Ok(StrategyProfile { actions })
    }

    pub fn all_silent(n_players: usize) -> Self {
        StrategyProfile {
            actions: vec![Action::Silent; n_players],
        }
    }

    pub fn uniform(n_players: usize, action: Action, grid: &StrategyGrid) -> Result<Self> {
        Self::new(vec![action; n_players], grid)
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn get(&self, player: usize) -> Action {
        self.actions[player]
    }

    /// Copy of the profile with one player's action replaced.
    pub fn with(&self, player: usize, action: Action) -> Self {
        let mut actions = self.actions.clone();
        actions[player] = action;
        StrategyProfile { actions }
    }

    pub(crate) fn from_actions(actions: Vec<Action>) -> Self {
        StrategyProfile { actions }
    }

    pub(crate) fn set(&mut self, player: usize, action: Action) {
        self.actions[player] = action;
    }
}

impl fmt::Display for StrategyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, a) in self.actions.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str("]")
    }
}

/// Full parameter set of one game instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameConfig {
    pub scheme: ModulationScheme,
    pub frame: FrameFormat,
    /// Cost per mW of transmit power, in utility units.
    pub cost_k: f64,
    pub antennas: AntennaConfig,
    pub channel: ChannelModel,
    /// Rate of each receive branch; `None` means every branch uses `frame.rate_bps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch_rates_bps: Option<Vec<f64>>,
    pub grid: StrategyGrid,
    pub n_players: usize,
    #[serde(default)]
    pub amplifier: AmplifierParams,
    #[serde(default)]
    pub circuit: CircuitPowerParams,
}

impl GameConfig {
    pub fn validate(&self) -> Result<()> {
        self.frame.validate()?;
        if !(self.cost_k.is_finite() && self.cost_k >= 0.0) {
            return Err(ModelError::domain("cost_k", "finite and >= 0", self.cost_k));
        }
        if self.n_players == 0 {
            return Err(ModelError::invalid("n_players", "must be >= 1"));
        }
        if let Some(rates) = &self.branch_rates_bps {
            if rates.len() != self.antennas.n_rx() as usize {
                return Err(ModelError::invalid(
                    "branch_rates_bps",
                    format!(
                        "expected {} entries (one per receive branch), got {}",
                        self.antennas.n_rx(),
                        rates.len()
                    ),
                ));
            }
            if let Some(r) = rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
                return Err(ModelError::domain("branch_rates_bps", "finite and > 0", *r));
            }
        }
        self.circuit.validate()
    }

    pub fn branch_rates(&self) -> Vec<f64> {
        match &self.branch_rates_bps {
            Some(r) => r.clone(),
            None => vec![self.frame.rate_bps; self.antennas.n_rx() as usize],
        }
    }

    /// Power carried by each cooperating transmitter for a chosen level.
    pub fn per_node_power(&self, p: f64) -> f64 {
        p / f64::from(self.antennas.spatial_paths())
    }
}

/// Breakdown of one player's payoff at one action.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UtilityReport {
    pub transmitting: bool,
    pub gross_utility: f64,
    pub cost: f64,
    pub net_utility: f64,
    pub gamma_used: f64,
    pub per_branch_terms: Vec<f64>,
}

impl UtilityReport {
    pub fn silent() -> Self {
        UtilityReport {
            transmitting: false,
            gross_utility: 0.0,
            cost: 0.0,
            net_utility: 0.0,
            gamma_used: 0.0,
            per_branch_terms: Vec::new(),
        }
    }
}

fn check_positive_power(p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 0.0) {
        return Err(ModelError::domain("p_i", "finite and > 0", p));
    }
    Ok(p)
}

fn efficiency_at(config: &GameConfig, gamma: f64) -> Result<f64> {
    let pe = bit_error_probability(config.scheme, gamma)?;
    efficiency_function(pe, config.frame.frame_bits)
}

/// Single-link utility `b r f(gamma) / (F p)`, ignoring the antenna
/// configuration.
pub fn utility_siso(p: f64, config: &GameConfig) -> Result<UtilityReport> {
    let p = check_positive_power(p)?;
    let gamma = config.channel.received_snr(p)?;
    let frame = &config.frame;
    let gross = f64::from(frame.info_bits) * frame.rate_bps * efficiency_at(config, gamma)?
        / (f64::from(frame.frame_bits) * p);
    Ok(UtilityReport {
        transmitting: true,
        gross_utility: gross,
        cost: cost(p, config.cost_k),
        net_utility: gross - cost(p, config.cost_k),
        gamma_used: gamma,
        per_branch_terms: vec![gross],
    })
}

/// Cooperative-link utility. The chosen level `p` is split over the
/// `m = min(N_T, N_R)` active transmitters (`p / m` each), every receive
/// branch `j` contributes `b r_j f(gamma_j)`, and the denominator is
/// `F * sum_{i=1..m} p / m`.
pub fn utility_vmimo(p: f64, config: &GameConfig) -> Result<UtilityReport> {
    utility_under_interference(p, 0.0, config)
}

/// [`utility_vmimo`] with `interference_mw` of per-node co-channel power
/// from other players. Identical to it when the channel is uncoupled.
pub fn utility_under_interference(
    p: f64,
    interference_mw: f64,
    config: &GameConfig,
) -> Result<UtilityReport> {
    let p = check_positive_power(p)?;
    let paths = config.antennas.spatial_paths();
    let p_node = config.per_node_power(p);
    let radiated: f64 = (0..paths).map(|_| p_node).sum();
    let gamma = config.channel.received_sinr(p_node, interference_mw)?;
    let f = efficiency_at(config, gamma)?;
    let frame = &config.frame;
    let info = f64::from(frame.info_bits);
    let denom = f64::from(frame.frame_bits) * radiated;
    let per_branch_terms: Vec<f64> = config
        .branch_rates()
        .into_iter()
        .map(|r| info * r * f / denom)
        .collect();
    let gross: f64 = per_branch_terms.iter().sum();
    let c = cost(p, config.cost_k);
    Ok(UtilityReport {
        transmitting: true,
        gross_utility: gross,
        cost: c,
        net_utility: gross - c,
        gamma_used: gamma,
        per_branch_terms,
    })
}

/// Linear power cost `k p`.
pub fn cost(p: f64, k: f64) -> f64 {
    k * p
}

/// Net utility: gross minus cost when transmitting, zero when silent.
pub fn net_utility(action: Action, config: &GameConfig) -> Result<UtilityReport> {
    match action {
        Action::Silent => Ok(UtilityReport::silent()),
        Action::Transmit(p) => utility_vmimo(p, config),
    }
}

/// Net utility of `player` in `profile`. Other players only matter through
/// the channel's interference coupling.
pub fn player_net_utility(
    player: usize,
    profile: &StrategyProfile,
    config: &GameConfig,
) -> Result<UtilityReport> {
    match profile.get(player) {
        Action::Silent => Ok(UtilityReport::silent()),
        Action::Transmit(p) => {
            let interference = if config.channel.is_coupled() {
                profile
                    .actions()
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != player)
                    .map(|(_, a)| config.per_node_power(a.power()))
                    .sum()
            } else {
                0.0
            };
            utility_under_interference(p, interference, config)
        }
    }
}

/// Why no threshold power exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoThreshold {
    /// Net utility is still positive at `p_max`.
    NeverCrossesZero,
    /// Net utility is negative over the whole range.
    AlwaysNegative,
}

impl fmt::Display for NoThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NoThreshold::NeverCrossesZero => f.write_str("never crosses zero"),
            NoThreshold::AlwaysNegative => f.write_str("always negative"),
        }
    }
}

/// Samples used to bracket the last sign change before bisection.
const THRESHOLD_SCAN_POINTS: usize = 4096;
const THRESHOLD_MAX_BISECTIONS: usize = 200;

fn continuous_net(p: f64, config: &GameConfig) -> Result<f64> {
    Ok(utility_vmimo(p, config)?.net_utility)
}

/// Largest power in `[p_min, p_max]` where transmitting still breaks even,
/// i.e. where net utility falls to zero.
pub fn threshold_power(config: &GameConfig) -> Result<std::result::Result<f64, NoThreshold>> {
    let (lo, hi) = (config.grid.p_min(), config.grid.p_max());
    let at_max = continuous_net(hi, config)?;
    if at_max > 0.0 {
        return Ok(Err(NoThreshold::NeverCrossesZero));
    }
    if at_max == 0.0 {
        return Ok(Ok(hi));
    }

    // Log-spaced scan for the last sample with non-negative net utility.
    let ratio = (hi / lo).ln() / (THRESHOLD_SCAN_POINTS - 1) as f64;
    let sample = |i: usize| {
        if i + 1 == THRESHOLD_SCAN_POINTS {
            hi
        } else {
            lo * (ratio * i as f64).exp()
        }
    };
    let mut bracket = None;
    for i in (0..THRESHOLD_SCAN_POINTS - 1).rev() {
        if continuous_net(sample(i), config)? >= 0.0 {
            bracket = Some((sample(i), sample(i + 1)));
            break;
        }
    }
    let Some((mut a, mut b)) = bracket else {
        return Ok(Err(NoThreshold::AlwaysNegative));
    };

    // invariant: net(a) >= 0 > net(b)
    for _ in 0..THRESHOLD_MAX_BISECTIONS {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let v = continuous_net(mid, config)?;
        if v.abs() <= 1e-9 * cost(mid, config.cost_k).max(1.0) {
            return Ok(Ok(mid));
        }
        if v >= 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Ok(a))
}

/// Expected behaviour of a retransmit-until-success link at one power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EfficiencyReport {
    /// Successful frames per mW of per-node transmit power.
    pub efficiency: f64,
    pub success_probability: f64,
    /// Mean number of attempts until success, `1 / p_s`; infinite when `p_s = 0`.
    pub expected_transmissions: f64,
    pub per_node_power: f64,
    pub gamma_used: f64,
}

/// Power efficiency `p_s / p_node` under retransmission until success, where
/// `p_s = (1 - Pe)^F` at the receiver SNR produced by the per-node power.
pub fn expected_power_efficiency(p: f64, config: &GameConfig) -> Result<EfficiencyReport> {
    let p = check_positive_power(p)?;
    let p_node = config.per_node_power(p);
    let gamma = config.channel.received_snr(p_node)?;
    let pe = bit_error_probability(config.scheme, gamma)?;
    let success = frame_success_probability(pe, config.frame.frame_bits)?;
    let (efficiency, expected_transmissions) = if success > 0.0 {
        (success / p_node, 1.0 / success)
    } else {
        (0.0, f64::INFINITY)
    };
    Ok(EfficiencyReport {
        efficiency,
        success_probability: success,
        expected_transmissions,
        per_node_power: p_node,
        gamma_used: gamma,
    })
}
