//! Pure-strategy Nash equilibria of the discrete power-control game.
//!
//! Every player's action set is `Silent` plus the levels of the shared
//! strategy grid. Utilities closer than [`UTILITY_TOLERANCE`] are treated
//! as tied; ties resolve to the lower power.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ModelError, Result};
use crate::game::{player_net_utility, Action, GameConfig, StrategyProfile};

pub const UTILITY_TOLERANCE: f64 = 1e-12;

/// Upper bound on `(levels + 1)^players` accepted by the brute-force oracle.
pub const BRUTE_FORCE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Move {
    pub round: usize,
    pub player: usize,
    pub from: Action,
    pub to: Action,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Deviation {
    pub player: usize,
    pub from: Action,
    pub to: Action,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NashCertificate {
    pub is_nash: bool,
    /// Most profitable unilateral deviation found (may be non-positive).
    pub best_deviation: Option<Deviation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumResult {
    pub profile: StrategyProfile,
    pub per_player_net: Vec<f64>,
    pub is_nash: bool,
    /// A full round passed with no improving move.
    pub converged: bool,
    pub best_response_trace: Vec<Move>,
    /// Rounds executed, including the final confirming round.
    pub iterations: usize,
    pub certificate: NashCertificate,
}

fn check_profile(profile: &StrategyProfile, config: &GameConfig) -> Result<()> {
    if profile.len() != config.n_players {
        return Err(ModelError::invalid(
            "strategy profile",
            format!(
                "has {} entries for {} players",
                profile.len(),
                config.n_players
            ),
        ));
    }
    StrategyProfile::new(profile.actions().to_vec(), &config.grid).map(|_| ())
}

fn deviation_value(
    player: usize,
    action: Action,
    profile: &StrategyProfile,
    config: &GameConfig,
) -> Result<f64> {
    Ok(player_net_utility(player, &profile.with(player, action), config)?.net_utility)
}

/// Best action for `player` with everyone else held fixed, and its net
/// utility.
///
/// Picks the lowest power whose utility is within tolerance of the maximum.
/// `Silent` wins only when no power earns strictly more than zero.
pub fn best_response_with_value(
    player: usize,
    profile: &StrategyProfile,
    config: &GameConfig,
) -> Result<(Action, f64)> {
    let values = config
        .grid
        .levels()
        .iter()
        .map(|&p| {
            let a = Action::Transmit(p);
            deviation_value(player, a, profile, config).map(|v| (a, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let max = values
        .iter()
        .map(|(_, v)| *v)
        .fold(f64::NEG_INFINITY, f64::max);
    if max <= 0.0 {
        return Ok((Action::Silent, 0.0));
    }
    let chosen = values
        .into_iter()
        .find(|(_, v)| *v >= max - UTILITY_TOLERANCE)
        .expect("maximum is attained");
    Ok(chosen)
}

pub fn best_response(
    player: usize,
    profile: &StrategyProfile,
    config: &GameConfig,
) -> Result<Action> {
    if player >= profile.len() {
        return Err(ModelError::invalid(
            "player",
            format!("index {player} out of range for {} players", profile.len()),
        ));
    }
    check_profile(profile, config)?;
    Ok(best_response_with_value(player, profile, config)?.0)
}

/// Round-robin best-response dynamics from `initial`, at most `max_rounds`
/// rounds. A player moves only when the best response beats its current
/// action by more than the tolerance.
pub fn find_equilibrium(
    config: &GameConfig,
    initial: &StrategyProfile,
    max_rounds: usize,
) -> Result<EquilibriumResult> {
    if max_rounds == 0 {
        return Err(ModelError::invalid("max_rounds", "must be >= 1"));
    }
    config.validate()?;
    check_profile(initial, config)?;

    let mut profile = initial.clone();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    for round in 1..=max_rounds {
        iterations = round;
        let mut moved = false;
        for player in 0..config.n_players {
            let current = player_net_utility(player, &profile, config)?.net_utility;
            let (action, value) = best_response_with_value(player, &profile, config)?;
            let gain = value - current;
            if action != profile.get(player) && gain > UTILITY_TOLERANCE {
                trace.push(Move {
                    round,
                    player,
                    from: profile.get(player),
                    to: action,
                    gain,
                });
                profile.set(player, action);
                moved = true;
            }
        }
        if !moved {
            converged = true;
            break;
        }
    }

    let certificate = verify_nash(&profile, config)?;
    let per_player_net = (0..config.n_players)
        .map(|i| player_net_utility(i, &profile, config).map(|r| r.net_utility))
        .collect::<Result<Vec<_>>>()?;
    Ok(EquilibriumResult {
        profile,
        per_player_net,
        is_nash: certificate.is_nash,
        converged,
        best_response_trace: trace,
        iterations,
        certificate,
    })
}

/// Exhaustive unilateral-deviation check over every player's full action set.
pub fn verify_nash(profile: &StrategyProfile, config: &GameConfig) -> Result<NashCertificate> {
    check_profile(profile, config)?;
    let per_player: Vec<Option<Deviation>> = (0..config.n_players)
        .into_par_iter()
        .map(|player| -> Result<Option<Deviation>> {
            let current = player_net_utility(player, profile, config)?.net_utility;
            let mut best: Option<Deviation> = None;
            for action in config.grid.actions() {
                if action == profile.get(player) {
                    continue;
                }
                let gain = deviation_value(player, action, profile, config)? - current;
                if best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(Deviation {
                        player,
                        from: profile.get(player),
                        to: action,
                        gain,
                    });
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    let best_deviation =
        per_player
            .into_iter()
            .flatten()
            .fold(None::<Deviation>, |acc, d| match acc {
                Some(a) if a.gain >= d.gain => Some(a),
                _ => Some(d),
            });
    let is_nash = best_deviation
        .as_ref()
        .is_none_or(|d| d.gain <= UTILITY_TOLERANCE);
    Ok(NashCertificate {
        is_nash,
        best_deviation,
    })
}

/// Number of pure profiles, `(levels + 1)^players`, saturating.
pub fn profile_count(config: &GameConfig) -> u128 {
    let base = config.grid.len() as u128 + 1;
    (0..config.n_players).fold(1u128, |acc, _| acc.saturating_mul(base))
}

/// Every pure-strategy Nash profile, by checking all deviations of all
/// profiles. Profiles come back in lexicographic order of action index
/// (silent first, then increasing power), player 0 most significant.
pub fn enumerate_nash_bruteforce(config: &GameConfig) -> Result<Vec<StrategyProfile>> {
    config.validate()?;
    let total = profile_count(config);
    if total > BRUTE_FORCE_LIMIT {
        return Err(ModelError::TooLarge {
            profiles: total,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let actions: Vec<Action> = config.grid.actions().collect();
    let base = actions.len();
    let n = config.n_players;
    let decode = |mut index: usize| {
        let mut profile = vec![Action::Silent; n];
        for slot in profile.iter_mut().rev() {
            *slot = actions[index % base];
            index /= base;
        }
        StrategyProfile::from_actions(profile)
    };

    let verdicts = (0..total as usize)
        .into_par_iter()
        .map(|idx| -> Result<Option<StrategyProfile>> {
            let profile = decode(idx);
            for player in 0..n {
                let here = player_net_utility(player, &profile, config)?.net_utility;
                for &alt in &actions {
                    let there =
                        player_net_utility(player, &profile.with(player, alt), config)?.net_utility;
                    if there > here + UTILITY_TOLERANCE {
                        return Ok(None);
                    }
                }
            }
            Ok(Some(profile))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(verdicts.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelModel;
    use crate::config::default_game_config;
    use crate::game::{net_utility, StrategyGrid};

    fn grid_argmax(config: &GameConfig) -> Action {
        let mut best = (Action::Silent, 0.0);
        for &p in config.grid.levels() {
            let v = net_utility(Action::Transmit(p), config)
                .unwrap()
                .net_utility;
            if v > best.1 + UTILITY_TOLERANCE {
                best = (Action::Transmit(p), v);
            }
        }
        best.0
    }

    fn small(levels: usize, players: usize) -> GameConfig {
        GameConfig {
            grid: StrategyGrid::uniform(1.0, 100.0, levels).unwrap(),
            n_players: players,
            ..default_game_config()
        }
    }

    #[test]
    fn prohibitive_cost_means_silence() {
        let cfg = GameConfig {
            cost_k: 1e12,
            ..small(10, 2)
        };
        let all_silent = StrategyProfile::all_silent(2);
        assert_eq!(best_response(0, &all_silent, &cfg).unwrap(), Action::Silent);
        assert_eq!(enumerate_nash_bruteforce(&cfg).unwrap(), vec![all_silent]);
    }

    #[test]
    fn free_power_at_fixed_snr_picks_lowest_level() {
        let cfg = GameConfig {
            cost_k: 0.0,
            channel: ChannelModel::exogenous_db(20.0).unwrap(),
            ..small(10, 3)
        };
        let start = StrategyProfile::all_silent(3);
        assert_eq!(
            best_response(1, &start, &cfg).unwrap(),
            Action::Transmit(1.0)
        );
        let eq = find_equilibrium(&cfg, &start, 10).unwrap();
        assert!(eq.is_nash && eq.converged);
        assert!(eq
            .profile
            .actions()
            .iter()
            .all(|a| *a == Action::Transmit(1.0)));
    }

    #[test]
    fn single_player_matches_grid_scan() {
        let cfg = default_game_config();
        let eq = find_equilibrium(&cfg, &StrategyProfile::all_silent(1), 10).unwrap();
        assert!(eq.is_nash);
        assert_eq!(eq.profile.get(0), grid_argmax(&cfg));
        assert_eq!(
            best_response(0, &eq.profile, &cfg).unwrap(),
            eq.profile.get(0)
        );
    }

    #[test]
    fn decoupled_players_converge_in_first_round() {
        let cfg = small(20, 3);
        let eq = find_equilibrium(&cfg, &StrategyProfile::all_silent(3), 10).unwrap();
        assert!(eq.converged);
        assert_eq!(eq.iterations, 2);
        assert!(eq
            .best_response_trace
            .iter()
            .all(|m| m.round == 1 && m.gain > 0.0));
        let target = grid_argmax(&cfg);
        assert!(eq.profile.actions().iter().all(|a| *a == target));
    }

    #[test]
    fn perturbed_equilibrium_is_rejected() {
        let cfg = small(20, 2);
        let eq = find_equilibrium(&cfg, &StrategyProfile::all_silent(2), 10).unwrap();
        let perturbed = eq.profile.with(1, Action::Transmit(100.0));
        let cert = verify_nash(&perturbed, &cfg).unwrap();
        assert!(!cert.is_nash);
        let dev = cert.best_deviation.unwrap();
        assert_eq!(dev.player, 1);
        assert_eq!(dev.to, eq.profile.get(1));
    }

    #[test]
    fn bruteforce_is_cartesian_product_when_decoupled() {
        let cfg = small(12, 2);
        let set = enumerate_nash_bruteforce(&cfg).unwrap();
        let a = grid_argmax(&cfg);
        assert_eq!(
            set,
            vec![StrategyProfile::uniform(2, a, &cfg.grid).unwrap()]
        );
    }

    #[test]
    fn bruteforce_refuses_large_instances() {
        let cfg = small(100, 4);
        assert_eq!(profile_count(&cfg), 101u128.pow(4));
        assert!(matches!(
            enumerate_nash_bruteforce(&cfg),
            Err(ModelError::TooLarge { .. })
        ));
    }

    #[test]
    fn coupled_game_equilibrium_is_in_enumerated_set() {
        let base = small(15, 2);
        let cfg = GameConfig {
            channel: base.channel.clone().with_interference(0.05).unwrap(),
            ..base
        };
        let eq = find_equilibrium(&cfg, &StrategyProfile::all_silent(2), 100).unwrap();
        assert!(eq.is_nash);
        assert!(enumerate_nash_bruteforce(&cfg)
            .unwrap()
            .contains(&eq.profile));
        for m in &eq.best_response_trace {
            assert!(m.gain > UTILITY_TOLERANCE);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let cfg = small(5, 2);
        assert!(find_equilibrium(&cfg, &StrategyProfile::all_silent(2), 0).is_err());
        assert!(find_equilibrium(&cfg, &StrategyProfile::all_silent(3), 5).is_err());
        assert!(best_response(2, &StrategyProfile::all_silent(2), &cfg).is_err());
    }
}
