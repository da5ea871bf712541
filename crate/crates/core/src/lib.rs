//! Permutation-module resolutions over elementary abelian p-groups.

pub mod cli;
pub mod complex;
pub mod error;
pub mod field;
pub mod group;
pub mod io;
pub mod module;
pub mod perm;
pub mod random;
pub mod resolution;
pub mod series;

pub use error::{Error, Result};
pub use field::{Matrix, PrimeField};
pub use group::{Caps, Group};
pub use module::{Module, ModuleMap};
