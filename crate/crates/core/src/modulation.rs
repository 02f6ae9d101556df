//! Bit-error, efficiency-function and frame-success models for the three
//! supported binary modulations.
//!
//! Every function here is pure; SNR is always carried in linear units and
//! converted to dB only at configuration and output boundaries.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModulationScheme {
    /// Noncoherent frequency shift keying.
    Fsk,
    /// Differential phase shift keying.
    Dpsk,
    /// Binary phase shift keying.
    Bpsk,
}

impl ModulationScheme {
    pub const ALL: [ModulationScheme; 3] = [
        ModulationScheme::Fsk,
        ModulationScheme::Dpsk,
        ModulationScheme::Bpsk,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModulationScheme::Fsk => "fsk",
            ModulationScheme::Dpsk => "dpsk",
            ModulationScheme::Bpsk => "bpsk",
        }
    }

    /// Exponent `x` in `Pe = 0.5 * exp(-x)`.
    fn decay_exponent(self, gamma: f64) -> f64 {
        match self {
            ModulationScheme::Fsk => gamma / 2.0,
            ModulationScheme::Dpsk => gamma,
            ModulationScheme::Bpsk => gamma.sqrt(),
        }
    }
}

impl fmt::Display for ModulationScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModulationScheme {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fsk" => Ok(ModulationScheme::Fsk),
            "dpsk" => Ok(ModulationScheme::Dpsk),
            "bpsk" => Ok(ModulationScheme::Bpsk),
            other => Err(ModelError::invalid(
                "modulation scheme",
                format!("unknown scheme `{other}` (expected fsk, dpsk or bpsk)"),
            )),
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Expected receiver SNR, stored linearly.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LinkQuality(f64);

impl LinkQuality {
    pub fn from_linear(gamma: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(ModelError::domain("gamma", "finite and > 0", gamma));
        }
        Ok(LinkQuality(gamma))
    }

    pub fn from_db(gamma_db: f64) -> Result<Self> {
        if !gamma_db.is_finite() {
            return Err(ModelError::domain("gamma_db", "finite", gamma_db));
        }
        Self::from_linear(db_to_linear(gamma_db))
    }

    pub fn linear(self) -> f64 {
        self.0
    }

    pub fn db(self) -> f64 {
        linear_to_db(self.0)
    }
}

/// Packet layout: `b` information bits inside an `F`-bit frame sent at `r` bit/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameFormat {
    pub info_bits: u32,
    pub frame_bits: u32,
    pub rate_bps: f64,
}

impl FrameFormat {
    pub fn new(info_bits: u32, frame_bits: u32, rate_bps: f64) -> Result<Self> {
        let frame = FrameFormat {
            info_bits,
            frame_bits,
            rate_bps,
        };
        frame.validate()?;
        Ok(frame)
    }

    pub fn validate(&self) -> Result<()> {
        if self.info_bits == 0 || self.info_bits > self.frame_bits {
            return Err(ModelError::invalid(
                "frame format",
                format!(
                    "need 0 < info_bits <= frame_bits, got {} / {}",
                    self.info_bits, self.frame_bits
                ),
            ));
        }
        if i32::try_from(self.frame_bits).is_err() {
            return Err(ModelError::invalid("frame format", "frame_bits too large"));
        }
        if !(self.rate_bps.is_finite() && self.rate_bps > 0.0) {
            return Err(ModelError::domain(
                "rate_bps",
                "finite and > 0",
                self.rate_bps,
            ));
        }
        Ok(())
    }
}

impl Default for FrameFormat {
    fn default() -> Self {
        FrameFormat {
            info_bits: 32,
            frame_bits: 40,
            rate_bps: 1e6,
        }
    }
}

/// Average bit-error probability: `0.5 exp(-g/2)` (FSK), `0.5 exp(-g)`
/// (DPSK) or `0.5 exp(-sqrt g)` (BPSK).
pub fn bit_error_probability(scheme: ModulationScheme, gamma: f64) -> Result<f64> {
    let gamma = LinkQuality::from_linear(gamma)?.linear();
    Ok(0.5 * (-scheme.decay_exponent(gamma)).exp())
}

fn frame_exponent(frame_bits: u32) -> Result<i32> {
    if frame_bits == 0 {
        return Err(ModelError::invalid("frame_bits", "must be >= 1"));
    }
    i32::try_from(frame_bits).map_err(|_| ModelError::invalid("frame_bits", "too large"))
}

/// `(1 - 2 Pe)^F`, the smooth frame-success proxy used in the utility.
pub fn efficiency_function(pe: f64, frame_bits: u32) -> Result<f64> {
    if !(0.0..=0.5).contains(&pe) {
        return Err(ModelError::domain("pe", "within [0, 0.5]", pe));
    }
    Ok((1.0 - 2.0 * pe).powi(frame_exponent(frame_bits)?))
}

/// Probability that all `F` iid bits arrive intact, `(1 - Pe)^F`.
pub fn frame_success_probability(pe: f64, frame_bits: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&pe) {
        return Err(ModelError::domain("pe", "within [0, 1]", pe));
    }
    Ok((1.0 - pe).powi(frame_exponent(frame_bits)?))
}

/// `1 - (1 - Pe)^F`. Complement of [`frame_success_probability`].
pub fn frame_error_probability(pe: f64, frame_bits: u32) -> Result<f64> {
    Ok(1.0 - frame_success_probability(pe, frame_bits)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dpsk_and_bpsk_coincide_at_unit_snr() {
        let d = bit_error_probability(ModulationScheme::Dpsk, 1.0).unwrap();
        let b = bit_error_probability(ModulationScheme::Bpsk, 1.0).unwrap();
        assert_eq!(d, b);
        assert!((d - 0.183_939_720_585_721_16).abs() < 1e-15);
    }

    #[test]
    fn fsk_vanishes_at_high_snr() {
        assert!(bit_error_probability(ModulationScheme::Fsk, 60.0).unwrap() < 1e-13);
    }

    #[test]
    fn bad_gamma_is_rejected() {
        for g in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(
                bit_error_probability(ModulationScheme::Bpsk, g).is_err(),
                "{g}"
            );
        }
    }

    #[test]
    fn efficiency_examples() {
        assert_eq!(efficiency_function(0.0, 40).unwrap(), 1.0);
        assert_eq!(efficiency_function(0.5, 40).unwrap(), 0.0);
        let v = efficiency_function(0.01, 40).unwrap();
        assert!((v - 0.445_700_403_950_951_05).abs() < 1e-12, "{v}");
        assert!(efficiency_function(0.6, 40).is_err());
        assert!(efficiency_function(-0.1, 40).is_err());
        assert!(efficiency_function(0.1, 0).is_err());
    }

    #[test]
    fn frame_success_examples() {
        assert_eq!(frame_success_probability(0.0, 40).unwrap(), 1.0);
        assert_eq!(frame_error_probability(0.0, 40).unwrap(), 0.0);
        assert_eq!(frame_success_probability(1.0, 40).unwrap(), 0.0);
        assert_eq!(frame_error_probability(1.0, 40).unwrap(), 1.0);
        let pe = bit_error_probability(ModulationScheme::Dpsk, 1.0).unwrap();
        let s = frame_success_probability(pe, 40).unwrap();
        // (1 - e^-1 / 2)^40, high-precision value
        assert!((s - 2.943_673_159_077_295e-4).abs() / s < 1e-6, "{s}");
        assert!(frame_success_probability(1.5, 40).is_err());
    }

    #[test]
    fn scheme_ordering_around_unit_snr() {
        use ModulationScheme::*;
        for g in [0.05, 0.3, 0.9] {
            let (f, d, b) = (
                bit_error_probability(Fsk, g).unwrap(),
                bit_error_probability(Dpsk, g).unwrap(),
                bit_error_probability(Bpsk, g).unwrap(),
            );
            assert!(b < d && d < f, "gamma {g}");
        }
        for g in [1.1, 3.0, 30.0] {
            let d = bit_error_probability(Dpsk, g).unwrap();
            let b = bit_error_probability(Bpsk, g).unwrap();
            assert!(d < b, "gamma {g}");
        }
    }

    #[test]
    fn scheme_parse_round_trip() {
        for s in ModulationScheme::ALL {
            assert_eq!(s.name().parse::<ModulationScheme>().unwrap(), s);
        }
        assert!("qpsk".parse::<ModulationScheme>().is_err());
    }

    #[test]
    fn link_quality_db_consistency() {
        let q = LinkQuality::from_db(-5.0).unwrap();
        assert!((q.db() + 5.0).abs() < 1e-12);
        let q = LinkQuality::from_linear(3.162).unwrap();
        assert!((db_to_linear(q.db()) - 3.162).abs() / 3.162 < 1e-12);
    }

    #[test]
    fn frame_format_validation() {
        assert!(FrameFormat::new(32, 40, 1e6).is_ok());
        assert!(FrameFormat::new(0, 40, 1e6).is_err());
        assert!(FrameFormat::new(41, 40, 1e6).is_err());
        assert!(FrameFormat::new(32, 40, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn efficiency_in_unit_interval(pe in 0.0f64..=0.5, f in 1u32..2000) {
            let v = efficiency_function(pe, f).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn efficiency_decreasing_in_frame_length(pe in 1e-6f64..0.49, f in 1u32..500) {
            let a = efficiency_function(pe, f).unwrap();
            let b = efficiency_function(pe, f + 1).unwrap();
            prop_assert!(b <= a);
        }

        #[test]
        fn success_and_error_sum_to_one(pe in 0.0f64..=1.0, f in 1u32..200) {
            let s = frame_success_probability(pe, f).unwrap();
            let e = frame_error_probability(pe, f).unwrap();
            prop_assert!((s + e - 1.0).abs() <= 1e-15);
        }

        #[test]
        fn ber_strictly_decreasing(g in 1e-3f64..500.0, step in 1e-3f64..1.0) {
            for s in ModulationScheme::ALL {
                let a = bit_error_probability(s, g).unwrap();
                let b = bit_error_probability(s, g * (1.0 + step)).unwrap();
                prop_assert!(b < a);
                prop_assert!(a > 0.0 && a < 0.5);
            }
        }
    }
}
