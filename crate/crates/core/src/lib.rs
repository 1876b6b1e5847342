//! Computational companions to coincidence theorems for finite group
//! actions: group tables and orbit tuples, exact covers of configuration
//! spaces, `F_p` homology of k-equal arrangement complements, and numerical
//! search for coincidence points on orbits.

pub mod arrangement;
pub mod config_spaces;
pub mod cover_check;
pub mod error;
pub mod group;
pub mod partition;
pub mod scalar;
pub mod selftest;
pub mod solver;

pub use error::{Error, Result};
