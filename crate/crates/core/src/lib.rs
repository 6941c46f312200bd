//! Range-of-motion measurement from body landmark streams and the reliability
//! statistics used to evaluate it.

pub mod engine;
pub mod error;
pub mod io;
pub mod landmark;
pub mod registry;
pub mod stats;

pub use error::{Error, Result};
