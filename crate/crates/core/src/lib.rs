//! Wave equations coupled to structured boundaries.
//!
//! A one-dimensional line or a circular membrane carries waves; each end (or
//! the rim) holds a boundary node with its own inertia, support stiffness
//! and memory friction, attached through a spring, a rigid link, or nothing.
//! The crate integrates the coupled system, keeps energy ledgers, measures
//! frequency responses and provides the curve geometry used on the ring.

pub mod energy;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod linalg;
pub mod model;
pub mod output;
pub mod response;
pub mod run;
pub mod solver1d;
pub mod solver2d;
pub mod cli;

pub use error::{Error, Result};
