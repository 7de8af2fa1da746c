pub mod affine;
pub mod algebra;
pub mod approx;
pub mod cli;
pub mod cochain;
pub mod error;
pub mod fp;
pub mod group;
pub mod homotopy;
pub mod linalg;
pub mod module;
pub mod rational;
pub mod samples;
pub mod spec;

pub use error::{Error, Result};
