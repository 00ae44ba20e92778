pub mod bmo;
pub mod contfrac;
pub mod error;
pub mod gauss;
pub mod numeric;
mod quad;
pub mod series;
pub mod weyl;

pub use error::{Error, Result};
