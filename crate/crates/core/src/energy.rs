//! Transceiver power accounting for a cooperative (virtual MIMO) link.
//!
//! All powers are in milliwatts.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// RF power amplifier model. The overhead factor is `alpha = xi / eta - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AmplifierSpec", into = "AmplifierSpec")]
pub struct AmplifierParams {
    drain_efficiency: f64,
    peak_to_average: f64,
    alpha: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AmplifierSpec {
    drain_efficiency: f64,
    peak_to_average: f64,
}

impl TryFrom<AmplifierSpec> for AmplifierParams {
    type Error = ModelError;

    fn try_from(spec: AmplifierSpec) -> Result<Self> {
        AmplifierParams::new(spec.drain_efficiency, spec.peak_to_average)
    }
}

impl From<AmplifierParams> for AmplifierSpec {
    fn from(p: AmplifierParams) -> Self {
        AmplifierSpec {
            drain_efficiency: p.drain_efficiency,
            peak_to_average: p.peak_to_average,
        }
    }
}

impl AmplifierParams {
    pub fn new(drain_efficiency: f64, peak_to_average: f64) -> Result<Self> {
        if !(drain_efficiency > 0.0 && drain_efficiency <= 1.0) {
            return Err(ModelError::domain(
                "drain_efficiency",
                "within (0, 1]",
                drain_efficiency,
            ));
        }
        if !(peak_to_average.is_finite() && peak_to_average >= 1.0) {
            return Err(ModelError::domain(
                "peak_to_average",
                "finite and >= 1",
                peak_to_average,
            ));
        }
        Ok(AmplifierParams {
            drain_efficiency,
            peak_to_average,
            alpha: peak_to_average / drain_efficiency - 1.0,
        })
    }

    /// Lossless amplifier (`alpha = 0`).
    pub fn ideal() -> Self {
        AmplifierParams {
            drain_efficiency: 1.0,
            peak_to_average: 1.0,
            alpha: 0.0,
        }
    }

    pub fn drain_efficiency(&self) -> f64 {
        self.drain_efficiency
    }

    pub fn peak_to_average(&self) -> f64 {
        self.peak_to_average
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Default for AmplifierParams {
    fn default() -> Self {
        Self::ideal()
    }
}

/// Per-block circuit power draw in mW.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CircuitPowerParams {
    pub dac: f64,
    pub mixer: f64,
    pub tx_filter: f64,
    pub synthesizer: f64,
    pub lna: f64,
    pub ifa: f64,
    pub rx_filter: f64,
    pub adc: f64,
}

impl CircuitPowerParams {
    pub fn uniform(mw: f64) -> Self {
        CircuitPowerParams {
            dac: mw,
            mixer: mw,
            tx_filter: mw,
            synthesizer: mw,
            lna: mw,
            ifa: mw,
            rx_filter: mw,
            adc: mw,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let entries = [
            ("circuit.dac", self.dac),
            ("circuit.mixer", self.mixer),
            ("circuit.tx_filter", self.tx_filter),
            ("circuit.synthesizer", self.synthesizer),
            ("circuit.lna", self.lna),
            ("circuit.ifa", self.ifa),
            ("circuit.rx_filter", self.rx_filter),
            ("circuit.adc", self.adc),
        ];
        for (name, v) in entries {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ModelError::domain(name, "finite and >= 0", v));
            }
        }
        Ok(())
    }

    fn tx_chain(&self) -> f64 {
        self.dac + self.mixer + self.tx_filter
    }

    fn rx_chain(&self) -> f64 {
        self.lna + self.mixer + self.ifa + self.rx_filter + self.adc
    }
}

/// Number of cooperating transmit and receive nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "AntennaSpec", into = "AntennaSpec")]
pub struct AntennaConfig {
    n_tx: u32,
    n_rx: u32,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AntennaSpec {
    n_tx: u32,
    n_rx: u32,
}

impl TryFrom<AntennaSpec> for AntennaConfig {
    type Error = ModelError;

    fn try_from(spec: AntennaSpec) -> Result<Self> {
        AntennaConfig::new(spec.n_tx, spec.n_rx)
    }
}

impl From<AntennaConfig> for AntennaSpec {
    fn from(a: AntennaConfig) -> Self {
        AntennaSpec {
            n_tx: a.n_tx,
            n_rx: a.n_rx,
        }
    }
}

impl AntennaConfig {
    pub const SISO: AntennaConfig = AntennaConfig { n_tx: 1, n_rx: 1 };

    pub fn new(n_tx: u32, n_rx: u32) -> Result<Self> {
        if n_tx == 0 || n_rx == 0 {
            return Err(ModelError::invalid(
                "antennas",
                format!("n_tx and n_rx must be >= 1, got {n_tx}x{n_rx}"),
            ));
        }
        Ok(AntennaConfig { n_tx, n_rx })
    }

    pub fn n_tx(&self) -> u32 {
        self.n_tx
    }

    pub fn n_rx(&self) -> u32 {
        self.n_rx
    }

    /// `min(N_T, N_R)`, the number of independent spatial paths.
    pub fn spatial_paths(&self) -> u32 {
        self.n_tx.min(self.n_rx)
    }

    pub fn is_siso(&self) -> bool {
        *self == Self::SISO
    }
}

impl Default for AntennaConfig {
    fn default() -> Self {
        AntennaConfig { n_tx: 2, n_rx: 2 }
    }
}

fn check_power(name: &'static str, p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 0.0) {
        return Err(ModelError::domain(name, "finite and >= 0", p));
    }
    Ok(p)
}

/// `P_PA = (1 + alpha) P_out`.
pub fn amplifier_power(p_out: f64, params: &AmplifierParams) -> Result<f64> {
    Ok((1.0 + params.alpha) * check_power("p_out", p_out)?)
}

/// Circuit draw of the cooperative link:
/// `N_T (DAC + mixer + filter) + 2 synth + N_R (LNA + mixer + IFA + filter + ADC)`.
pub fn circuit_power(params: &CircuitPowerParams, antennas: AntennaConfig) -> f64 {
    f64::from(antennas.n_tx) * params.tx_chain()
        + 2.0 * params.synthesizer
        + f64::from(antennas.n_rx) * params.rx_chain()
}

pub fn total_power(p_pa: f64, p_c: f64) -> Result<f64> {
    Ok(check_power("p_pa", p_pa)? + check_power("p_c", p_c)?)
}

/// Transmit power carried by each cooperating node when a SISO budget of
/// `p_total` is split over `min(N_T, N_R)` spatial paths.
pub fn per_node_transmit_power(p_total: f64, antennas: AntennaConfig) -> Result<f64> {
    Ok(check_power("p_total", p_total)? / f64::from(antennas.spatial_paths()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn amplifier_examples() {
        assert_eq!(
            amplifier_power(10.0, &AmplifierParams::ideal()).unwrap(),
            10.0
        );
        let amp = AmplifierParams::new(0.35, 1.0).unwrap();
        assert_eq!(amplifier_power(0.0, &amp).unwrap(), 0.0);
        let p = amplifier_power(10.0, &amp).unwrap();
        assert!((p - 28.571_428_571_428_57).abs() < 1e-12, "{p}");
        assert!(amplifier_power(-1.0, &amp).is_err());
    }

    #[test]
    fn amplifier_param_bounds() {
        assert!(AmplifierParams::new(0.0, 1.0).is_err());
        assert!(AmplifierParams::new(1.2, 1.0).is_err());
        assert!(AmplifierParams::new(0.5, 0.9).is_err());
        let amp = AmplifierParams::new(0.5, 2.0).unwrap();
        assert_eq!(amp.alpha(), 3.0);
    }

    #[test]
    fn circuit_power_structure() {
        let zero = CircuitPowerParams::default();
        assert_eq!(circuit_power(&zero, AntennaConfig::new(4, 3).unwrap()), 0.0);
        let ones = CircuitPowerParams::uniform(1.0);
        assert_eq!(circuit_power(&ones, AntennaConfig::SISO), 10.0);
        assert_eq!(
            circuit_power(&ones, AntennaConfig::new(2, 2).unwrap()),
            18.0
        );
    }

    #[test]
    fn chained_total_matches_recomputation() {
        let amp = AmplifierParams::new(0.35, 1.0).unwrap();
        let pa = amplifier_power(10.0, &amp).unwrap();
        let pc = circuit_power(&CircuitPowerParams::uniform(1.0), AntennaConfig::default());
        let total = total_power(pa, pc).unwrap();
        assert!((total - (10.0 / 0.35 + 18.0)).abs() < 1e-12);
        assert_eq!(total_power(0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn per_node_split() {
        let siso = AntennaConfig::SISO;
        assert_eq!(per_node_transmit_power(40.0, siso).unwrap(), 40.0);
        let two = AntennaConfig::new(2, 2).unwrap();
        assert_eq!(per_node_transmit_power(40.0, two).unwrap(), 20.0);
        let three_two = AntennaConfig::new(3, 2).unwrap();
        assert_eq!(per_node_transmit_power(40.0, three_two).unwrap(), 20.0);
    }

    #[test]
    fn zero_antennas_rejected() {
        assert!(AntennaConfig::new(0, 2).is_err());
        assert!(AntennaConfig::new(2, 0).is_err());
    }

    proptest! {
        #[test]
        fn amplifier_is_linear(a in 0.0f64..100.0, p in 0.0f64..100.0, eta in 0.05f64..=1.0, xi in 1.0f64..4.0) {
            let amp = AmplifierParams::new(eta, xi).unwrap();
            let lhs = amplifier_power(a * p, &amp).unwrap();
            let rhs = a * amplifier_power(p, &amp).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(f64::MIN_POSITIVE));
            prop_assert!(amplifier_power(p, &amp).unwrap() >= p);
        }

        #[test]
        fn more_antennas_never_cheaper(nt in 1u32..8, nr in 1u32..8, mw in 0.0f64..50.0) {
            let params = CircuitPowerParams::uniform(mw);
            let base = circuit_power(&params, AntennaConfig::new(nt, nr).unwrap());
            let doubled = circuit_power(&params, AntennaConfig::new(2 * nt, 2 * nr).unwrap());
            prop_assert!(doubled >= base);
        }
    }
}
