//! Noise frequency correlations of multiply scattered light.
//!
//! The crate pairs closed-form correlation functions for shot noise,
//! classical noise and arbitrary single-mode input states ([`analytics`],
//! [`photon`]) with a Monte Carlo model of frequency-correlated circular
//! Gaussian speckle ([`ensemble`]) that checks them independently.
//! [`validation`] bundles those checks into one reproducible campaign.

pub mod analytics;
pub mod curve;
pub mod ensemble;
pub mod error;
pub mod grid;
pub mod photon;
pub mod rng;
pub mod validation;

pub use analytics::{
    classical_noise_correlation, expansion_terms, frequency_decay, mesoscopic_decay,
    mesoscopic_pair_moment, mesoscopic_term, quantum_noise_correlation, shot_noise_correlation,
    DiffusionGeometry, ExpansionTerms, NormalizedOffset,
};
pub use curve::{CorrelationCurve, CurvePoint, CurveTable};
pub use ensemble::SpeckleEnsemble;
pub use error::{Error, Result};
pub use grid::{GridScale, GridSpec};
pub use photon::{ChannelTransmission, QuantumState, StateKind};
