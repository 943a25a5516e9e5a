//! Exact tools for the question of which set systems of a given size contain
//! the most maximal chains of the Boolean lattice `P({1,…,n})`.
//!
//! Modules follow the layers of the toolkit: [`lattice`] holds the subset
//! encoding and set systems, [`count`] counts chains, [`constructions`]
//! builds towers of cubes, [`compression`] applies `ij`-compressions,
//! [`search`] maximises chain counts exactly, [`fraction`] realises the
//! constant-fraction construction, and [`poset`] and [`grid`] cover the
//! linear-extension and grid variants. [`verify`] bundles the exact
//! finite-instance checks into named suites.

pub mod compression;
pub mod constructions;
pub mod count;
pub mod error;
pub mod exact;
pub mod format;
pub mod fraction;
pub mod grid;
pub mod lattice;
pub mod poset;
pub mod sample;
pub mod search;
pub mod serde_exact;
pub mod verify;

pub use error::{Error, Result};
pub use exact::{ExactCount, ExactRatio};
pub use lattice::{PermutationWord, SetSystem, SubsetMask};
