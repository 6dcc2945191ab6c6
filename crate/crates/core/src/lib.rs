//! Spread and spread dimension of finite metric spaces.
//!
//! Implements the spread `sigma_d(t)` of a finite metric space, the
//! per-point quantities `psi_x(t)` and `phi_x(t)`, the subsampled pseudo
//! spread and pseudo spread dimension computed from a `|S| x |X|` partial
//! distance matrix, and delta-method standard errors with 95% confidence
//! intervals for the dimension estimate. Experiment drivers reproduce
//! Swiss-roll dimension profiles and the Monte-Carlo CI-coverage check.

pub mod data;
pub mod error;
pub mod experiment;
pub mod metric;
pub mod plot;
pub mod profile_io;
pub mod spread;
pub mod uncertainty;

pub use error::{Error, Result};
