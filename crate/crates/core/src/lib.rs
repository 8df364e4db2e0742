pub mod cli;
pub mod collision;
pub mod config;
pub mod constants;
pub mod error;
pub mod fock;
pub mod gaussian;
pub mod optimizer;
pub mod params;
pub mod rates;
pub mod reference;
pub mod units;

pub use error::{Error, Result};
