//! Definite quaternion algebras over Q, their maximal and Eichler orders,
//! and right-ideal class sets.

mod algebra;
mod classset;
mod order;

pub use algebra::{quat_from_slice, ramified_primes, Quat, QuatAlgebra};
pub use classset::{expected_mass, mass, right_ideal_class_set, right_ideal_class_set_with, IdealClass, IdealClassSet};
pub use order::{
    eichler_order, eichler_order_for, ideal_norm, lattice_conj, lattice_product, left_mul, maximal_order,
    scaled_norm_gram, trace_gram, QuatOrder,
};

/// Build the algebra ramified exactly at `ram` (finite primes).
pub fn build_algebra(ram: &[u64]) -> crate::Result<QuatAlgebra> {
    QuatAlgebra::with_ramification(ram)
}
