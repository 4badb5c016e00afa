//! Anchor-oriented multi-robot coverage without a shared global frame.
//!
//! Robots agree on a square workspace centred on a common anchor, then each
//! computes its own Voronoi cell in its private frame from anchor-relative
//! neighbour reports and follows Lloyd's centroid controller.

pub mod consensus;
pub mod controller;
pub mod density;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod partition;
pub mod sim;

pub use error::{Error, Result};
