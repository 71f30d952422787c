//! Sampling approximation in Sobolev spaces with refinable generators:
//! uniform and jittered sampling operators, the quantities that bound their
//! error, and a seeded experiment harness.

pub mod analysis;
pub mod error;
pub mod functions;
pub mod generators;
pub mod harness;
pub mod lattice;
pub mod operators;
pub mod perturbation;

pub use error::{Error, Result};
pub use functions::TestFunction;
pub use generators::Generator;
pub use lattice::{DilationScheme, IndexBox, RealBox};
pub use operators::{Approximant, Grid};
pub use perturbation::PerturbationSequence;
