//! Energy-efficient power control for cooperative (virtual MIMO) wireless
//! links, modelled as a non-cooperative game.
//!
//! The crate covers bit-error models for non-coherent and coherent
//! modulation, the transmit-chain energy model, the link channel, the
//! per-player utility and cost, pure-strategy equilibrium search, and a
//! configurable experiment runner.

pub mod calibration;
pub mod channel;
pub mod config;
pub mod energy;
pub mod equilibrium;
pub mod error;
pub mod experiments;
pub mod game;
pub mod modulation;
pub mod montecarlo;
pub mod oracle;

pub use channel::{ChannelKind, ChannelModel, ChannelSpec};
pub use config::{default_game_config, Experiment, ExperimentKind};
pub use energy::{AmplifierParams, AntennaConfig, CircuitPowerParams};
pub use equilibrium::{EquilibriumResult, NashCertificate};
pub use error::{ConfigError, ExperimentError, ModelError};
pub use experiments::ResultTable;
pub use game::{Action, GameConfig, StrategyGrid, StrategyProfile, UtilityReport};
pub use modulation::{FrameFormat, LinkQuality, ModulationScheme};
