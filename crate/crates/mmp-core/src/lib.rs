//! Decorated Hirzebruch-Jung chains, class T0 singularities, symplectic flips and
//! the constructive minimal model program between a minimal resolution and an
//! M-resolution, with an independent homological certificate for each flip.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod chain;
pub mod driver;
pub mod flip;
pub mod homology;
mod lattice;
pub mod t0;
pub mod toi;

/// Exact rational used for discrepancies and intersection numbers.
pub type Q = num_rational::Ratio<i128>;

pub use chain::{ChainError, DecoratedChain, Fraction, ProjectiveRational, Segment};
pub use driver::{DriverError, Move, MoveKind, MoveSite, MoveTrace};
pub use flip::{Case, FlipError, FlipSite, Orientation};
pub use t0::{T0Certificate, TCertificate};
