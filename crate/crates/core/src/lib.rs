//! Boson-lattice simulation core: ladder algebra, model builders, effective
//! Hamiltonian transforms, Lindblad dynamics and drive-plan compilation.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod error;
pub mod math;
pub mod operators;

pub use error::{Error, Result};
pub mod models;
pub mod transforms;
pub mod compiler;
pub mod dynamics;
pub mod verify;
