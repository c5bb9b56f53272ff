//! Lattice machinery shared by the quaternion and quadratic-form modules.

pub mod enumerate;
pub mod hnf;
pub mod reduce;

pub use enumerate::Enumerator;
pub use hnf::{det, invert, vec_mat, QLattice};
pub use reduce::{canonical_form, lll_gram, CanonicalForm, IntMatrix};
