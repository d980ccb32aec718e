//! Numerical laboratory for unit-trace Hermitian quasi-states.
//!
//! Qubit preparations with Bloch vectors longer than one, and d-level
//! operators with an eigenvalue above one, break complementarity: two
//! non-colinear measurements become simultaneously predictable. This crate
//! builds the consequences explicitly and checks them by direct
//! computation:
//!
//! * [`nonlocal`]: non-signalling boxes beyond Tsirelson's bound,
//! * [`discrimination`]: perfect discrimination and cloning of overlapping
//!   qubit states,
//! * [`highdim`]: the same discrimination in d dimensions,
//!
//! on top of a small dense substrate in [`operator`] and the Bloch layer in
//! [`bloch`].

pub mod bloch;
pub mod cli;
pub mod discrimination;
pub mod error;
pub mod highdim;
pub mod nonlocal;
pub mod operator;
pub mod report;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
