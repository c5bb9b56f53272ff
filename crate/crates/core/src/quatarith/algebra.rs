use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{self, hilbert_symbol};
use crate::error::{input_err, Result};
use crate::rational::{int, Rational};

/// An element `x₀ + x₁i + x₂j + x₃k` in coordinates.
pub type Quat = [Rational; 4];

/// A definite rational quaternion algebra `(a, b | Q)`: `i² = a`, `j² = b`,
/// `ij = −ji = k`, with `a, b < 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuatAlgebra {
    a: i64,
    b: i64,
    ramified: Vec<u64>,
}

/// Finite primes where `(a, b)_p = −1`.
pub fn ramified_primes(a: i64, b: i64) -> Vec<u64> {
    let (ab, bb) = (BigInt::from(a), BigInt::from(b));
    arith::prime_divisors((2 * a as i128 * b as i128).unsigned_abs() as u64)
        .into_iter()
        .filter(|&p| hilbert_symbol(&ab, &bb, p) == -1)
        .collect()
}

impl QuatAlgebra {
    /// Builds `(a, b | Q)`, checking definiteness and computing ramification.
    pub fn new(a: i64, b: i64) -> Result<Self> {
        if a >= 0 || b >= 0 {
            return Err(input_err!("({a}, {b}) is not definite: need a < 0 and b < 0"));
        }
        let ramified = ramified_primes(a, b);
        Ok(QuatAlgebra { a, b, ramified })
    }

    /// The first pair `(a, b)`, searching by increasing `|a| + |b|` and then
    /// increasing `|a|`, whose finite ramification is exactly `ram`.
    pub fn with_ramification(ram: &[u64]) -> Result<Self> {
        let mut want: Vec<u64> = ram.to_vec();
        want.sort_unstable();
        want.dedup();
        if want.is_empty() {
            return Err(input_err!("a definite algebra over Q ramifies at some finite prime"));
        }
        if let Some(p) = want.iter().find(|&&p| !arith::is_prime(p)) {
            return Err(input_err!("{p} is not prime"));
        }
        if want.len() % 2 == 0 {
            return Err(input_err!(
                "no definite algebra ramifies at exactly {} finite primes (need an odd number)",
                want.len()
            ));
        }
        let prod: u64 = want.iter().product();
        for s in 2u64.. {
            for ma in 1..s {
                let (a, b) = (-(ma as i64), -((s - ma) as i64));
                // every odd ramified prime divides ab
                if (a * b).unsigned_abs() % (prod / if prod % 2 == 0 { 2 } else { 1 }) != 0 {
                    continue;
                }
                if ramified_primes(a, b) == want {
                    return QuatAlgebra::new(a, b);
                }
            }
        }
        unreachable!()
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn b(&self) -> i64 {
        self.b
    }

    pub fn ramified(&self) -> &[u64] {
        &self.ramified
    }

    /// Reduced discriminant: product of the finite ramified primes.
    pub fn disc(&self) -> u64 {
        self.ramified.iter().product()
    }

    pub fn one() -> Quat {
        [int(1), int(0), int(0), int(0)]
    }

    pub fn mul(&self, x: &Quat, y: &Quat) -> Quat {
        let a = int(self.a);
        let b = int(self.b);
        let ab = &a * &b;
        [
            &x[0] * &y[0] + &a * &x[1] * &y[1] + &b * &x[2] * &y[2] - &ab * &x[3] * &y[3],
            &x[0] * &y[1] + &x[1] * &y[0] - &b * &x[2] * &y[3] + &b * &x[3] * &y[2],
            &x[0] * &y[2] + &x[2] * &y[0] + &a * &x[1] * &y[3] - &a * &x[3] * &y[1],
            &x[0] * &y[3] + &x[3] * &y[0] + &x[1] * &y[2] - &x[2] * &y[1],
        ]
    }

    pub fn conj(x: &Quat) -> Quat {
        [x[0].clone(), -&x[1], -&x[2], -&x[3]]
    }

    pub fn trd(x: &Quat) -> Rational {
        &x[0] * int(2)
    }

    pub fn nrd(&self, x: &Quat) -> Rational {
        let a = int(self.a);
        let b = int(self.b);
        &x[0] * &x[0] - &a * &x[1] * &x[1] - &b * &x[2] * &x[2] + &a * &b * &x[3] * &x[3]
    }

    pub fn inverse(&self, x: &Quat) -> Quat {
        let n = self.nrd(x);
        assert!(!n.is_zero(), "zero has no inverse");
        let c = Self::conj(x);
        [&c[0] / &n, &c[1] / &n, &c[2] / &n, &c[3] / &n]
    }

    /// Diagonal of the bilinear form `trd(x ȳ)` in the `(1, i, j, k)` frame.
    pub fn trace_form_diag(&self) -> [Rational; 4] {
        let a = int(self.a);
        let b = int(self.b);
        [int(2), int(-2) * &a, int(-2) * &b, int(2) * &a * &b]
    }

    /// `trd(x ȳ)`.
    pub fn trace_pairing(&self, x: &Quat, y: &Quat) -> Rational {
        let d = self.trace_form_diag();
        (0..4).fold(Rational::zero(), |acc, i| acc + &d[i] * &x[i] * &y[i])
    }

    /// Matrix of `x ↦ x·e` on row vectors.
    pub fn right_mul_matrix(&self, e: &Quat) -> Vec<Vec<Rational>> {
        (0..4)
            .map(|i| {
                let mut basis: Quat = [int(0), int(0), int(0), int(0)];
                basis[i] = Rational::one();
                self.mul(&basis, e).to_vec()
            })
            .collect()
    }
}

pub fn quat_from_slice(v: &[Rational]) -> Quat {
    [v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()]
}
