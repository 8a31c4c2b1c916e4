//! Revenue-maximizing mechanisms for selling one joint ad slot to two buyers.
//!
//! The crate covers exact solving on finite supports, grid approximations,
//! two online learners, the valuation processes used to stress them, and an
//! episode harness that measures regret.

pub mod environments;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod grid;
pub mod harness;
pub mod learners;
pub mod mechanism;
pub mod scalar;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{Edge, Point, Rect, Valuation};
pub use graph::{OrthogonalGraph, Violation};
pub use mechanism::Mechanism;
pub use scalar::{Rational, Scalar};
