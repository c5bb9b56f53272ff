//! Exact computations around CM points on Shimura curves and their
//! reductions: imaginary-quadratic class numbers, definite quaternion
//! orders and their ideal class sets, Gross lattices and ternary theta
//! series, genus and spinor genus, optimal-embedding measures, and the
//! counting layer of the special fibres.

pub mod arith;
pub mod census;
pub mod equidist;
pub mod error;
pub mod genus;
pub mod grosslattice;
pub mod lattice;
pub mod quadorders;
pub mod quatarith;
pub mod rational;

pub use error::{Error, Result};
