//! Equal-weighted portfolio simulation over a reconstituting universe, with
//! size-exposure, leakage and trading-profit attribution.

pub mod attribution;
pub mod error;
pub mod market_data;
pub mod portfolio;
pub mod report;
pub mod series_csv;
pub mod spt;

pub use error::{Error, Result};
