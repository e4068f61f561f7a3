//! Monostatic MIMO-OFDM sensing echoes with an optional deceptive (DRFM) jammer.

pub mod array;
pub mod channel;
pub mod config;
pub mod observation;
pub mod scenario;

pub use array::{jammer_beamformer, rx_combiner, steering_vector, tx_beamformer};
pub use channel::{draw_rcs, jammer_gain, noise_power, noise_std, target_gain};
pub use config::{JammerConfig, NoiseBandwidth, SystemConfig};
pub use observation::{
    generate_dataset, observation_rng, synth_complex, synth_observation, synth_observation_with, Dataset, DatasetMode,
    Label, Observation, SignalTerms, SymbolGrid,
};
pub use scenario::{beam_schedule, draw_scenario, JammerDraw, ScenarioDraw};
