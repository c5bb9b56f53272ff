//! Shared fixtures for the benchmarks.

use quatcm::equidist::ClassData;
use quatcm::quatarith::{eichler_order_for, right_ideal_class_set, IdealClassSet};

pub fn class_set(delta: u64, level: u64) -> IdealClassSet {
    right_ideal_class_set(&eichler_order_for(delta, level).expect("valid fixture")).expect("class set")
}

pub fn class_data(delta: u64, level: u64) -> ClassData {
    ClassData::from_set(&class_set(delta, level)).expect("Gross lattices")
}
