//! Numerical verification of nested level-set Bochner identities.
//!
//! The crate builds exact order-3 jets of scalar fields and metrics on chart
//! domains, derives the full slicing geometry of joint level sets (adapted
//! frames, second fundamental forms, the Z-cascade under both normalizations,
//! induced curvature via iterated Gauss equations), and evaluates every
//! identity and inequality of the underlying Bochner machinery as a numeric
//! residual with pass/fail reports. A flat three-dimensional spinor toolkit
//! and a periodic-torus level-set experiment round out the suite.
//!
//! Run `cargo run --release --bin verify -- --suite all` for the full battery,
//! or look at `examples/` for focused entry points.

// dense tensor contractions read better with explicit indices
#![allow(clippy::needless_range_loop)]

pub mod curvature;
pub mod error;
pub mod field;
pub mod identity;
pub mod jet;
pub mod linalg;
pub mod metric;
pub mod rng;
pub mod slicing;
pub mod spinor;
pub mod stern;
pub mod suite;

pub use error::{Error, Result};
pub use jet::Jet3;
