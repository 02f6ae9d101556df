//! Mapping from a node's transmit power to the SNR seen by the receiver.
//!
//! Two modes are supported. `Exogenous` pins the SNR regardless of power and
//! is used for the SINR sweeps. `LinkBudget` makes the SNR proportional to
//! the per-node transmit power, `gamma = g * p`, which is what gives the net
//! utility an interior optimum.
//!
//! `LinkBudget` optionally carries a cross-player coupling `h`:
//! `gamma_i = g p_i / (1 + h * sum_{j != i} p_j)`. It defaults to zero, in
//! which case players do not affect each other.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::modulation::{db_to_linear, linear_to_db};

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Serialized form of a channel; keeps the user's units so a resolved
/// configuration can be written back out unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Exogenous {
        sinr_db: f64,
    },
    LinkBudget {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gain_per_mw: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reference: Option<ReferencePoint>,
        #[serde(default, skip_serializing_if = "is_zero")]
        interference_gain_per_mw: f64,
    },
    FreeSpace {
        distance_m: f64,
        frequency_hz: f64,
        noise_dbm: f64,
        #[serde(default)]
        antenna_gain_dbi: f64,
    },
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

/// Calibration point `(p_ref, gamma_ref)` for a link budget.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferencePoint {
    pub power_mw: f64,
    pub sinr_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelSpec", into = "ChannelSpec")]
pub struct ChannelModel {
    spec: ChannelSpec,
    kind: ChannelKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelKind {
    Exogenous { gamma: f64 },
    LinkBudget { gain: f64, interference: f64 },
}

impl TryFrom<ChannelSpec> for ChannelModel {
    type Error = ModelError;

    fn try_from(spec: ChannelSpec) -> Result<Self> {
        let kind = match &spec {
            ChannelSpec::Exogenous { sinr_db } => {
                if !sinr_db.is_finite() {
                    return Err(ModelError::domain("channel.sinr_db", "finite", *sinr_db));
                }
                ChannelKind::Exogenous {
                    gamma: db_to_linear(*sinr_db),
                }
            }
            ChannelSpec::LinkBudget {
                gain_per_mw,
                reference,
                interference_gain_per_mw,
            } => {
                let gain = match (gain_per_mw, reference) {
                    (Some(g), None) => *g,
                    (None, Some(r)) => {
                        if !(r.power_mw.is_finite() && r.power_mw > 0.0) {
                            return Err(ModelError::domain(
                                "channel.reference.power_mw",
                                "finite and > 0",
                                r.power_mw,
                            ));
                        }
                        if !r.sinr_db.is_finite() {
                            return Err(ModelError::domain(
                                "channel.reference.sinr_db",
                                "finite",
                                r.sinr_db,
                            ));
                        }
                        db_to_linear(r.sinr_db) / r.power_mw
                    }
                    _ => {
                        return Err(ModelError::invalid(
                            "channel",
                            "link_budget needs exactly one of gain_per_mw or reference",
                        ))
                    }
                };
                if !(gain.is_finite() && gain > 0.0) {
                    return Err(ModelError::domain(
                        "channel.gain_per_mw",
                        "finite and > 0",
                        gain,
                    ));
                }
                let h = *interference_gain_per_mw;
                if !(h.is_finite() && h >= 0.0) {
                    return Err(ModelError::domain(
                        "channel.interference_gain_per_mw",
                        "finite and >= 0",
                        h,
                    ));
                }
                ChannelKind::LinkBudget {
                    gain,
                    interference: h,
                }
            }
            ChannelSpec::FreeSpace {
                distance_m,
                frequency_hz,
                noise_dbm,
                antenna_gain_dbi,
            } => ChannelKind::LinkBudget {
                gain: free_space_gain(*distance_m, *frequency_hz, *noise_dbm, *antenna_gain_dbi)?,
                interference: 0.0,
            },
        };
        Ok(ChannelModel { spec, kind })
    }
}

impl From<ChannelModel> for ChannelSpec {
    fn from(model: ChannelModel) -> Self {
        model.spec
    }
}

impl ChannelModel {
    /// Fixed SNR given in dB.
    pub fn exogenous_db(sinr_db: f64) -> Result<Self> {
        ChannelSpec::Exogenous { sinr_db }.try_into()
    }

    /// `gamma = gain * p` with `gain` in 1/mW.
    pub fn link_budget(gain_per_mw: f64) -> Result<Self> {
        ChannelSpec::LinkBudget {
            gain_per_mw: Some(gain_per_mw),
            reference: None,
            interference_gain_per_mw: 0.0,
        }
        .try_into()
    }

    /// Link budget anchored so that `power_mw` yields `sinr_db`.
    pub fn link_budget_from_reference(power_mw: f64, sinr_db: f64) -> Result<Self> {
        ChannelSpec::LinkBudget {
            gain_per_mw: None,
            reference: Some(ReferencePoint { power_mw, sinr_db }),
            interference_gain_per_mw: 0.0,
        }
        .try_into()
    }

    /// Adds cross-player interference coupling to a link budget model.
    pub fn with_interference(self, gain_per_mw: f64) -> Result<Self> {
        match self.spec {
            ChannelSpec::LinkBudget {
                gain_per_mw: g,
                reference,
                ..
            } => ChannelSpec::LinkBudget {
                gain_per_mw: g,
                reference,
                interference_gain_per_mw: gain_per_mw,
            }
            .try_into(),
            _ => Err(ModelError::invalid(
                "channel",
                "interference coupling requires link_budget mode",
            )),
        }
    }

    pub fn kind(&self) -> ChannelKind {
        self.kind
    }

    pub fn spec(&self) -> &ChannelSpec {
        &self.spec
    }

    pub fn is_link_budget(&self) -> bool {
        matches!(self.kind, ChannelKind::LinkBudget { .. })
    }

    /// True when other players' powers can change this player's SNR.
    pub fn is_coupled(&self) -> bool {
        matches!(self.kind, ChannelKind::LinkBudget { interference, .. } if interference > 0.0)
    }

    /// Linear SNR at the receiver for a node transmitting `p_node` mW.
    pub fn received_snr(&self, p_node: f64) -> Result<f64> {
        self.received_sinr(p_node, 0.0)
    }

    /// As [`received_snr`](Self::received_snr), with `interference_mw` of
    /// co-channel power from other players.
    pub fn received_sinr(&self, p_node: f64, interference_mw: f64) -> Result<f64> {
        match self.kind {
            ChannelKind::Exogenous { gamma } => {
                if !(p_node.is_finite() && p_node >= 0.0) {
                    return Err(ModelError::domain("p_node", "finite and >= 0", p_node));
                }
                Ok(gamma)
            }
            ChannelKind::LinkBudget { gain, interference } => {
                if !(p_node.is_finite() && p_node > 0.0) {
                    return Err(ModelError::domain("p_node", "finite and > 0", p_node));
                }
                if !(interference_mw.is_finite() && interference_mw >= 0.0) {
                    return Err(ModelError::domain(
                        "interference_mw",
                        "finite and >= 0",
                        interference_mw,
                    ));
                }
                Ok(gain * p_node / (1.0 + interference * interference_mw))
            }
        }
    }
}

/// Convenience link gain (1/mW) from the free-space path loss
/// `(lambda / 4 pi d)^2`, a combined antenna gain and receiver noise floor.
pub fn free_space_gain(
    distance_m: f64,
    frequency_hz: f64,
    noise_dbm: f64,
    antenna_gain_dbi: f64,
) -> Result<f64> {
    if !(distance_m.is_finite() && distance_m > 0.0) {
        return Err(ModelError::domain(
            "distance_m",
            "finite and > 0",
            distance_m,
        ));
    }
    if !(frequency_hz.is_finite() && frequency_hz > 0.0) {
        return Err(ModelError::domain(
            "frequency_hz",
            "finite and > 0",
            frequency_hz,
        ));
    }
    if !noise_dbm.is_finite() || !antenna_gain_dbi.is_finite() {
        return Err(ModelError::invalid(
            "free space channel",
            "noise_dbm and antenna_gain_dbi must be finite",
        ));
    }
    let wavelength = SPEED_OF_LIGHT / frequency_hz;
    let path = (wavelength / (4.0 * PI * distance_m)).powi(2);
    let loss_db = -linear_to_db(path);
    Ok(db_to_linear(antenna_gain_dbi - loss_db - noise_dbm))
}
