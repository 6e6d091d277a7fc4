//! Finite-time identification of a linear plant and its reference exosystem
//! by dynamic regressor extension and mixing, followed by discounted LQR
//! tracking synthesis through a gradient flow over the stabilizing gains.
//!
//! The crate is organised along the design flow:
//!
//! * [`model`] — plant, exosystem, augmented system, scenario files;
//! * [`sim`] — fixed-step RK4, state layouts, CSV time series;
//! * [`regressor`] and [`estimator`] — DREM signals and the finite-time
//!   estimator, coupled in [`identification`];
//! * [`lqr`] — cost, gradient, gradient flow and the Kleinman oracle;
//! * [`pipeline`] — the three steps end to end, with artifacts on disk.

pub mod error;
pub mod estimator;
pub mod identification;
pub mod linalg;
pub mod lqr;
pub mod model;
pub mod pipeline;
pub mod regressor;
pub mod serde_matrix;
pub mod sim;

pub use error::{Error, Result};
pub use model::{AugmentedSystem, Exosystem, LtiPlant, ScenarioConfig};
