pub mod assignment;
pub mod bounds;
pub mod channel;
pub mod cli;
pub mod error;
pub mod rational;
pub mod search;
pub mod simulator;
pub mod zf_scheme;

pub use error::{Error, Result};
