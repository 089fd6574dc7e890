pub mod cli;
pub mod construct;
pub mod error;
pub mod levy;
pub mod likelihood;
pub mod measure;
pub mod posterior;
pub mod quad;
pub mod rng;
pub mod rv;
pub mod verify;

pub use error::{Error, Result};
