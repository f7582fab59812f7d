pub mod bound;
pub mod coneplane;
pub mod convexify;
pub mod error;
pub mod euclid_hull;
pub mod freegroup;
pub mod index;
pub mod lattice;
pub mod product;
pub mod rational;
pub mod subgroup;
pub mod tree;

pub use error::{Error, Result};

/// Library version, embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
