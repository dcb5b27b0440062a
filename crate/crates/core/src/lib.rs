//! Driven-dissipative qubit dynamics under a two-point energy measurement.
//!
//! A qubit is driven coherently (amplitude-modulated or phase-rotating
//! microwave drive) and interrupted by short laser pulses acting as an
//! engineered dissipation channel. This crate provides exact propagation,
//! the pulse channel in deterministic and sampled form, the conditional
//! probabilities and energy-change statistics of the two-point measurement,
//! closed-form work/heat analytics, and a reproducible parallel
//! Monte-Carlo trajectory engine.
//!
//! Conventions: hbar = 1, time in ns, frequencies and energies in rad/ns.

pub mod channel;
pub mod drive;
pub mod error;
pub mod montecarlo;
pub mod oracle;
pub mod protocol;
pub mod state;
pub mod thermal;

pub use channel::{apply_pulse_map, channel_fixed_point, sample_pulse, PulseChannelParams, PulseEvent};
pub use drive::{evolve_unitary, instantaneous_eigensystem, AmplitudeDrive, DriveSpec, EigenSystem, Level, PhaseDrive};
pub use error::{Error, Result};
pub use protocol::{ConditionalMatrix, EnergyChangeDistribution, FrReport, ProtocolConfig};
pub use montecarlo::{EnsembleStats, TrajectoryRecord};
pub use state::QubitState;
pub use thermal::{free_energy_delta, gibbs_population, partition_function, ThermalContext};
