//! File formats, simulation output and the command-line front end.

pub mod cli;
pub mod error;
pub mod lattice;
pub mod output;
pub mod plan;
pub mod sweep;

pub use error::{AppError, AppResult, ParseError};
pub use lattice::{parse_lattice_spec, LatticeSpec};
pub use plan::{emit_plan, parse_plan};
