//! Implementer calibration of the two constants the game needs but the
//! model does not pin down: the link gain `g` and the cost factor `k`.
//!
//! * `g` places the peak of the cost-free cooperative utility at
//!   [`UTILITY_PEAK_MW`]. The peak of `f(gamma) / gamma` sits at a fixed
//!   per-node SNR `gamma*` for each scheme and frame length, so
//!   `g = gamma* * m / UTILITY_PEAK_MW` with `m = min(N_T, N_R)`.
//! * `k` makes the cooperative net utility break even at
//!   [`THRESHOLD_TARGET_MW`]: `k = u(p_t) / p_t`.

use serde::Serialize;

use crate::channel::ChannelModel;
use crate::error::{ModelError, Result};
use crate::game::{utility_vmimo, GameConfig};
use crate::modulation::ModulationScheme;

pub const UTILITY_PEAK_MW: f64 = 15.0;
pub const THRESHOLD_TARGET_MW: f64 = 80.0;

const GOLDEN_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    pub peak_snr: f64,
    pub gain_per_mw: f64,
    pub cost_k: f64,
}

/// `ln f(gamma)` evaluated without underflow: `F ln(1 - exp(-x))`.
fn ln_efficiency(scheme: ModulationScheme, frame_bits: u32, gamma: f64) -> f64 {
    let x = match scheme {
        ModulationScheme::Fsk => gamma / 2.0,
        ModulationScheme::Dpsk => gamma,
        ModulationScheme::Bpsk => gamma.sqrt(),
    };
    f64::from(frame_bits) * (-(-x).exp()).ln_1p()
}

/// SNR maximizing `f(gamma) / gamma`, found by golden-section search on
/// `ln gamma` over `[1e-3, 1e5]`.
pub fn peak_snr(scheme: ModulationScheme, frame_bits: u32) -> Result<f64> {
    if frame_bits == 0 {
        return Err(ModelError::invalid("frame_bits", "must be >= 1"));
    }
    let objective = |t: f64| ln_efficiency(scheme, frame_bits, t.exp()) - t;
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (1e-3f64.ln(), 1e5f64.ln());
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (objective(c), objective(d));
    for _ in 0..GOLDEN_ITERATIONS {
        if (b - a).abs() < 1e-14 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = objective(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = objective(d);
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// Computes `g` and `k` for `base` (its scheme, frame, antennas and branch
/// rates), ignoring its current channel and cost.
pub fn calibrate(base: &GameConfig) -> Result<Calibration> {
    let peak = peak_snr(base.scheme, base.frame.frame_bits)?;
    let paths = f64::from(base.antennas.spatial_paths());
    let gain_per_mw = peak * paths / UTILITY_PEAK_MW;
    let probe = GameConfig {
        channel: ChannelModel::link_budget(gain_per_mw)?,
        cost_k: 0.0,
        ..base.clone()
    };
    let gross = utility_vmimo(THRESHOLD_TARGET_MW, &probe)?.gross_utility;
    Ok(Calibration {
        peak_snr: peak,
        gain_per_mw,
        cost_k: gross / THRESHOLD_TARGET_MW,
    })
}

/// `base` with the calibrated link-budget channel and cost factor applied.
pub fn apply(base: &GameConfig) -> Result<GameConfig> {
    let cal = calibrate(base)?;
    Ok(GameConfig {
        channel: ChannelModel::link_budget(cal.gain_per_mw)?,
        cost_k: cal.cost_k,
        ..base.clone()
    })
}
