//! Age-of-Information analysis for multi-source status updates sent by an
//! energy-harvesting transmitter.

mod error;

pub mod analysis;
pub mod chains;
pub mod closed_form;
pub mod config;
pub mod linalg;
pub mod params;
pub mod shs;
pub mod sim;
pub mod sweep;

pub use analysis::{analyze, compare, jfi, simulate_cmd, Method};
pub use chains::Discipline;
pub use error::{AoiError, Result};
pub use params::{DerivedRates, SystemParams};
