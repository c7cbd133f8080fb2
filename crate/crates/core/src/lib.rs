//! Few-boson physics in a finite 1D square well.

pub mod config;
pub mod dmc;
pub mod error;
pub mod exact_diag;
pub mod meanfield;
pub mod model;
pub mod optimize;
#[cfg(test)]
pub(crate) mod oracle;
pub mod quadrature;
pub mod roots;
pub mod scan;
pub mod single_particle;
pub mod tonks;

pub use error::{CullError, Result};
pub use model::{InteractionSpec, Method, PhasePoint, ScheduleSpec, WellSpec};
