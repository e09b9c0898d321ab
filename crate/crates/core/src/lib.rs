pub mod classical;
pub mod cli;
pub mod elliptic;
pub mod error;
pub mod fluctuation;
pub mod oracle;
pub mod quadrature;
pub mod rate;
pub mod units;

pub use error::{Error, Result};
pub use units::PotentialParams;
