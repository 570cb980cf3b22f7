//! Simulation and analysis of the Hadamard joint-detection receiver (JDR) for
//! BPSK over optical fiber with Kerr-induced phase noise.
//!
//! The crate is organized bottom-up:
//!
//! - [`model`]: Hadamard codebook, beamsplitter network, received amplitudes.
//! - [`noise`]: phase-noise models, baud-rate scaling, circular moments, Bessel ratios.
//! - [`detection`]: homodyne outcome model, ternary thresholding, threshold optimizer.
//! - [`capacity`]: port-law estimation, mutual information, classical baseline, bounds.
//! - [`experiments`]: configuration, sweeps, CSV persistence, self-test.
//!
//! Amplitudes are in photon-number units: `|alpha|^2` is the mean photon count
//! of a pulse. All information quantities are in bits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod detection;
mod error;
pub mod experiments;
pub mod model;
pub mod noise;
pub mod quad;
pub mod rng;

pub use error::{Error, Result};
pub use model::{ComplexAmplitude, HadamardOrder, LinkParams};
pub use noise::{CircularMoments, ModelKind, PhaseNoiseModel};
