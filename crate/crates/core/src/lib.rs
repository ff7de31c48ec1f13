pub mod cli;
pub mod embedding;
pub mod error;
pub mod functionals;
pub mod groupalg;
pub mod propagators;
pub mod sampling;
pub mod schrep;
pub mod states;
pub mod timeaxis;

pub use error::{Error, Result};
