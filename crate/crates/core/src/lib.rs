//! Exact rational lattice toolkit centred on the maximal distance sub-lattice
//! problem (MDSP): keep a fixed basis vector `v` and choose the remaining
//! basis vectors so that `v` is as far as possible from their span.

pub mod bench;
pub mod cvp;
pub mod error;
pub mod exact;
pub mod heuristic;
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod lll;
pub mod rational;

pub use error::{Error, Result};
pub use lattice::{LatticeBasis, MdspInstance, ShiftVector};
pub use linalg::{QMatrix, QVector};
pub use rational::Rational;
