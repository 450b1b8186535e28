//! Finite-element assembly with lane-packed element batches.

pub mod assembly;
pub mod elements;
pub mod error;
pub mod krylov;
pub mod mesh;
pub mod packing;
pub mod sparse;
pub mod timeloop;

pub use error::{Error, Result};
