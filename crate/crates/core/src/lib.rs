//! Jamming detection for monostatic MIMO-OFDM sensing.
//!
//! * [`sim`] synthesises reciprocal-filtered echo observations with and
//!   without a deceptive jammer.
//! * [`nn`] is a small dense-network toolkit with exact gradients and Adagrad.
//! * [`vae`] trains the variational autoencoder (and an AE baseline) on
//!   jammer-free echoes and scores observations.
//! * [`detect`] turns scores into calibrated decisions and ROC curves.
//! * [`pipeline`] wires these together for experiments.

pub mod config;
pub mod detect;
pub mod error;
pub mod io;
pub mod manifest;
pub mod nn;
pub mod pipeline;
pub mod sim;
pub mod vae;

pub use error::{Error, Result};
