//! Control stack for a one-handed smart walker.
//!
//! - [`signals`]: fixed-rate series and the causal moving average.
//! - [`admittance`]: force/torque to velocity through virtual
//!   mass-damper-spring models.
//! - [`pose`]: keypoint deprojection and the shoulder abduction angle.
//! - [`fuzzy`]: Mamdani steering on shoulder angle and handle torque.
//! - [`sim`]: unicycle plant, synthetic user and trial logging.
//! - [`analysis`]: segment statistics, correlation and paired tests.

pub mod admittance;
pub mod analysis;
pub mod fuzzy;
pub mod pose;
pub mod signals;
pub mod sim;
