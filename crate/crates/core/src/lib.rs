//! Typed boxes, wiring diagrams, and the interpretations that turn a wiring
//! diagram into an operation on systems or matrices: discrete and continuous
//! open dynamical systems, steady-state matrices over semirings, and linear
//! systems.

pub mod continuous;
pub mod dense;
pub mod discrete;
pub mod error;
pub mod expr;
pub mod instrument;
pub mod linear;
pub mod matrix;
pub mod plan;
pub mod random;
pub mod semiring;
pub mod setmat;
pub mod tfs;
pub mod wiring;

pub use error::{Error, Result};
