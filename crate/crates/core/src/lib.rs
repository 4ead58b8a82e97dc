//! Second-order perturbative model of two qubits coupled to an open 1D
//! transmission line: exchange amplitudes, the reduced two-qubit state,
//! concurrence, and an independent quadrature oracle for every amplitude.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix it to `f64`, which is what the accuracy targets assume.

// `!(x > 0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplitudes;
pub mod audit;
pub mod config;
mod error;
pub mod oracle;
pub mod quadrature;
mod scalar;
pub mod specfun;
pub mod state;
pub mod sweep;

pub use amplitudes::{AmplitudeSet, Point, Region, Spectrum};
pub use error::{Error, Result};
pub use oracle::RegulatorSchedule;
pub use scalar::Real;
pub use state::{Branch, ValidityReport, XStateDensityMatrix};
pub use sweep::{LightconeReport, SweepRecord};

pub type Point64 = Point<f64>;
pub type AmplitudeSet64 = AmplitudeSet<f64>;
pub type XStateDensityMatrix64 = XStateDensityMatrix<f64>;
pub type ValidityReport64 = ValidityReport<f64>;
pub type SweepRecord64 = SweepRecord<f64>;
pub type RegulatorSchedule64 = RegulatorSchedule<f64>;
pub type LightconeReport64 = LightconeReport<f64>;
