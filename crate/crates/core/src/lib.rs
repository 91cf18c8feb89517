//! Radar-assisted predictive beamforming for a vehicle-to-infrastructure
//! link.
//!
//! A road-side unit (RSU) with a uniform linear array serves one vehicle
//! driving past on a straight road. Every epoch the RSU predicts the
//! vehicle's angle, steers its transmit beam there, and refines its
//! estimate from the radar echo of the same downlink signal with an
//! extended Kalman filter. A two-step angle prediction is sent to the
//! vehicle for its receive combiner. A communication-only baseline, which
//! tracks from a single combined downlink pilot, runs through the same
//! filter for comparison.
//!
//! Modules, bottom-up:
//!
//! - [`numerics`]: small dense real/complex matrices, inversion with a
//!   condition check, real augmentation.
//! - [`array`](mod@array): ULA steering vectors and gains.
//! - [`motion`]: exact Cartesian ground truth and the polar evolution model.
//! - [`propagation`]: measurement synthesis, noise law, LoS channel, SNR
//!   and rate.
//! - [`tracker`]: the EKF, its Jacobians and both measurement models.
//! - [`harness`]: configuration, trials, Monte Carlo, CSV/JSON/SVG output.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod error;
pub mod harness;
pub mod motion;
pub mod numerics;
pub mod propagation;
pub mod tracker;

pub use error::{Error, Result};
