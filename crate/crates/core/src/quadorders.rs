//! Imaginary-quadratic orders: discriminants, unit counts and class numbers.
//!
//! Class numbers are computed two ways: by counting reduced primitive binary
//! quadratic forms, and by the conductor formula relating `h(O_c)` to the
//! class number of the maximal order.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::arith::{self, isqrt, kronecker_prime};
use crate::error::{consistency_err, input_err, Result};
use crate::rational::{int, rat, Rational};

/// Whether `d` is a negative fundamental discriminant.
pub fn is_fundamental(d: i64) -> bool {
    if d >= 0 {
        return false;
    }
    let m = d.rem_euclid(4);
    if m == 1 {
        arith::is_squarefree(d.unsigned_abs())
    } else if m == 0 {
        let q = d / 4;
        matches!(q.rem_euclid(4), 2 | 3) && arith::is_squarefree(q.unsigned_abs())
    } else {
        false
    }
}

pub fn is_discriminant(d: i64) -> bool {
    d < 0 && matches!(d.rem_euclid(4), 0 | 1)
}

/// The order of conductor `c` in the imaginary-quadratic field of
/// fundamental discriminant `D`; its discriminant is `D c²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadOrder {
    fund_disc: i64,
    conductor: u64,
}

impl QuadOrder {
    pub fn new(fund_disc: i64, conductor: u64) -> Result<Self> {
        if !is_fundamental(fund_disc) {
            return Err(input_err!("{fund_disc} is not a negative fundamental discriminant"));
        }
        if conductor == 0 {
            return Err(input_err!("conductor must be positive"));
        }
        (fund_disc as i128)
            .checked_mul((conductor as i128).pow(2))
            .filter(|d| *d >= i64::MIN as i128)
            .ok_or_else(|| input_err!("discriminant {fund_disc}·{conductor}² overflows"))?;
        Ok(QuadOrder { fund_disc, conductor })
    }

    pub fn from_disc(d: i64) -> Result<Self> {
        let (fd, c) = factor_discriminant(d)?;
        QuadOrder::new(fd, c)
    }

    pub fn fund_disc(&self) -> i64 {
        self.fund_disc
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn disc(&self) -> i64 {
        self.fund_disc * (self.conductor * self.conductor) as i64
    }

    /// `|D c²|`, the absolute norm of the discriminant.
    pub fn abs_disc(&self) -> u64 {
        self.disc().unsigned_abs()
    }

    pub fn unit_count(&self) -> u64 {
        match (self.fund_disc, self.conductor) {
            (-3, 1) => 6,
            (-4, 1) => 4,
            _ => 2,
        }
    }

    pub fn class_number(&self) -> Result<u64> {
        class_number_formula(self.fund_disc, self.conductor)
    }
}

/// Kronecker symbol `(D/p)`; errors when `p` is not prime.
pub fn kronecker(d: i64, p: u64) -> Result<i32> {
    arith::kronecker(d, p)
}

/// Splits a discriminant as `d = D c²` with `D` fundamental.
pub fn factor_discriminant(d: i64) -> Result<(i64, u64)> {
    if !is_discriminant(d) {
        return Err(input_err!("{d} is not a negative discriminant (need d < 0, d ≡ 0,1 mod 4)"));
    }
    let mut core = 1u64;
    let mut f = 1u64;
    for (p, e) in arith::factor(d.unsigned_abs()) {
        f *= p.pow(e / 2);
        if e % 2 == 1 {
            core *= p;
        }
    }
    let core = -(core as i64);
    if core.rem_euclid(4) == 1 {
        Ok((core, f))
    } else {
        // d ≡ 0 mod 4 forces f even here
        debug_assert!(f % 2 == 0);
        Ok((4 * core, f / 2))
    }
}

/// Weight of the reduced form `(a, ±b, c)` pair found at nonnegative `b`:
/// both signs count unless a boundary condition forces `b ≥ 0`.
fn reduced_pair_weight(a: u64, b: u64, c: u64) -> u64 {
    if b == 0 || b == a || a == c {
        1
    } else {
        2
    }
}

/// Counts reduced primitive forms `(a, b, c)` with `b² − 4ac = d`,
/// `|b| ≤ a ≤ c`, and `b ≥ 0` when `|b| = a` or `a = c`.
pub fn class_number_bruteforce(d: i64) -> Result<u64> {
    if !is_discriminant(d) {
        return Err(input_err!("{d} is not a negative discriminant"));
    }
    let n = d.unsigned_abs();
    let amax = isqrt(n / 3);
    let mut h = 0u64;
    for a in 1..=amax {
        let mut b = (n % 2) as i64;
        // b runs over [0, a] with b ≡ d (mod 2)
        while b <= a as i64 {
            let bb = b as u64;
            let num = bb * bb + n;
            if num % (4 * a) == 0 {
                let c = num / (4 * a);
                if c >= a && a.gcd(&bb).gcd(&c) == 1 {
                    h += reduced_pair_weight(a, bb, c);
                }
            }
            b += 2;
        }
    }
    Ok(h)
}

/// Batched reduced-form counter for many discriminants up to a bound.
///
/// Enumerates `b` and factors `(b² + |d|)/4 = a·c` through a smallest-prime
/// sieve instead of scanning every `a`; the forms counted are exactly those
/// of [`class_number_bruteforce`].
pub struct ReducedFormCounter {
    spf: Vec<u32>,
}

impl ReducedFormCounter {
    /// Supports every `|d| ≤ max_abs_disc`.
    pub fn new(max_abs_disc: u64) -> Self {
        let limit = (max_abs_disc / 3 + max_abs_disc) / 4 + 2;
        let limit = limit as usize;
        let mut spf = vec![0u32; limit + 1];
        for i in 2..=limit {
            if spf[i] == 0 {
                let mut j = i;
                while j <= limit {
                    if spf[j] == 0 {
                        spf[j] = i as u32;
                    }
                    j += i;
                }
            }
        }
        ReducedFormCounter { spf }
    }

    fn divisors(&self, mut m: u64, out: &mut Vec<u64>) {
        out.clear();
        out.push(1);
        while m > 1 {
            let p = self.spf[m as usize] as u64;
            let mut e = 0;
            while m % p == 0 {
                m /= p;
                e += 1;
            }
            let len = out.len();
            let mut pk = 1;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    out.push(out[i] * pk);
                }
            }
        }
    }

    pub fn class_number(&self, d: i64) -> Result<u64> {
        if !is_discriminant(d) {
            return Err(input_err!("{d} is not a negative discriminant"));
        }
        let n = d.unsigned_abs();
        let bmax = isqrt(n / 3);
        if ((bmax * bmax + n) / 4) as usize >= self.spf.len() {
            return Err(input_err!("|d| = {n} exceeds the sieve bound"));
        }
        let mut divs = Vec::new();
        let mut h = 0;
        let mut b = n % 2;
        while b <= bmax {
            let m = (b * b + n) / 4;
            self.divisors(m, &mut divs);
            for &a in &divs {
                let c = m / a;
                if a >= b.max(1) && a <= c && a.gcd(&b).gcd(&c) == 1 {
                    h += reduced_pair_weight(a, b, c);
                }
            }
            b += 2;
        }
        Ok(h)
    }
}

pub fn unit_count(fund_disc: i64, conductor: u64) -> Result<u64> {
    Ok(QuadOrder::new(fund_disc, conductor)?.unit_count())
}

/// `h(O_c) = h(O_K) · c / [O_K^× : O_c^×] · ∏_{p | c} (1 − (D/p)/p)`,
/// evaluated in exact rationals with `h(O_K)` taken from the reduced-form
/// count.
pub fn class_number_formula(fund_disc: i64, conductor: u64) -> Result<u64> {
    class_number_formula_with(fund_disc, conductor, class_number_bruteforce(fund_disc)?)
}

/// The conductor formula with a caller-supplied `h(O_K)`.
pub fn class_number_formula_with(fund_disc: i64, conductor: u64, h_max: u64) -> Result<u64> {
    let order = QuadOrder::new(fund_disc, conductor)?;
    let unit_index = (QuadOrder::new(fund_disc, 1)?.unit_count() / order.unit_count()) as i64;
    let mut h: Rational = int(h_max as i64) * rat(conductor as i64, unit_index);
    for p in arith::prime_divisors(conductor) {
        let chi = kronecker_prime(fund_disc, p) as i64;
        h *= rat(p as i64 - chi, p as i64);
    }
    if !h.is_integer() {
        return Err(consistency_err!(
            "class number formula gave non-integral {h} for D={fund_disc}, c={conductor}"
        ));
    }
    Ok(num_traits::ToPrimitive::to_u64(&h.to_integer()).expect("positive class number"))
}

/// All negative fundamental discriminants with `lo ≤ |D| < hi`, ordered by `|D|`.
pub fn fundamental_discriminants(lo: u64, hi: u64) -> Vec<i64> {
    (lo.max(3)..hi).map(|n| -(n as i64)).filter(|&d| is_fundamental(d)).collect()
}
