//! Packings and partitions of Boolean lattices and grids into copies of a finite poset.

pub mod absorber;
pub mod assembly;
pub mod chains;
pub mod cli;
pub mod embed;
pub mod error;
pub mod exact;
pub mod grid;
pub mod io;
pub mod ground;
pub mod oracle;
pub mod packing;
pub mod poset;
pub mod product;
pub mod residues;
pub mod rng;
pub mod svg;

pub use error::{Error, Outcome, Result};
pub use ground::{Element, GroundPoset};
pub use packing::{is_copy, CopySet, Packing};
pub use poset::{find_realizer, Poset, Realizer};
