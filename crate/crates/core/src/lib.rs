//! Two-photon emission from electrically pumped semiconductors: carrier
//! statistics, quantum-well envelopes, spontaneous and singly-stimulated
//! spectra, and a Monte Carlo of the pulsed coincidence experiment.

pub mod carriers;
pub mod coincidence;
pub mod config;
pub mod error;
pub mod kv;
pub mod materials;
pub mod numerics;
pub mod quantumwell;
pub mod run;
pub mod spectra;
pub mod svg;
pub mod units;

pub use config::{parse_config, parse_preset, SimulationPlan};
pub use error::{Error, Result};
pub use run::{calibrate, run, RunReport};
