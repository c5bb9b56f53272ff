//! Elementary number theory on machine integers: primality, factorization,
//! quadratic symbols and the arithmetic functions used by the mass formulas.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{input_err, Result};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = 17u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve
        .iter()
        .enumerate()
        .filter_map(|(k, &p)| p.then_some(k as u64))
        .collect()
}

/// Prime factorization as `(prime, exponent)` pairs in increasing order.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factor(n).into_iter().map(|(p, _)| p).collect()
}

pub fn is_squarefree(n: u64) -> bool {
    n >= 1 && factor(n).iter().all(|&(_, e)| e == 1)
}

/// Number of distinct prime factors.
pub fn omega(n: u64) -> u32 {
    factor(n).len() as u32
}

pub fn mobius(n: u64) -> i32 {
    let f = factor(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `∏_{p | n} (p - 1)`, the factor attached to the ramified primes of a
/// quaternion algebra of discriminant `n` (squarefree).
pub fn phi_ramified(n: u64) -> u64 {
    prime_divisors(n).iter().map(|p| p - 1).product()
}

/// Dedekind's `ψ(n) = n ∏_{p | n} (1 + 1/p)`.
pub fn psi(n: u64) -> u64 {
    let mut r = n;
    for p in prime_divisors(n) {
        r = r / p * (p + 1);
    }
    r
}

pub fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = ((n as f64).sqrt() as u128).max(1);
    // Newton steps from the float estimate, then exact correction
    for _ in 0..4 {
        x = (x + n / x) / 2;
    }
    while x.checked_mul(x).map_or(true, |v| v > n) {
        x -= 1;
    }
    while (x + 1).checked_mul(x + 1).is_some_and(|v| v <= n) {
        x += 1;
    }
    x
}

pub fn isqrt(n: u64) -> u64 {
    isqrt_u128(n as u128) as u64
}

pub fn is_square(n: u64) -> bool {
    let r = isqrt(n);
    r * r == n
}

/// Jacobi symbol `(a/n)` for odd positive `n`.
pub fn jacobi(a: i64, n: u64) -> i32 {
    assert!(n % 2 == 1, "jacobi symbol needs an odd modulus");
    let mut a = a.rem_euclid(n as i64) as u64;
    let mut n = n;
    let mut t = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if n % 8 == 3 || n % 8 == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            t = -t;
        }
        a %= n;
    }
    if n == 1 {
        t
    } else {
        0
    }
}

/// Kronecker symbol `(d/p)` for a prime `p`; `d` is typically a discriminant.
pub fn kronecker_prime(d: i64, p: u64) -> i32 {
    if p == 2 {
        if d % 2 == 0 {
            0
        } else {
            match d.rem_euclid(8) {
                1 | 7 => 1,
                _ => -1,
            }
        }
    } else {
        jacobi(d, p)
    }
}

/// Kronecker symbol checked on its primality precondition.
pub fn kronecker(d: i64, p: u64) -> Result<i32> {
    if !is_prime(p) {
        return Err(input_err!("kronecker symbol needs a prime modulus, got {p}"));
    }
    Ok(kronecker_prime(d, p))
}

fn valuation_big(x: &BigInt, p: u64) -> (u32, BigInt) {
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut u = x.clone();
    while (&u % &pb).is_zero() {
        u /= &pb;
        v += 1;
    }
    (v, u)
}

fn legendre_big(u: &BigInt, p: u64) -> i32 {
    let r = u.mod_floor(&BigInt::from(p)).to_i64().unwrap();
    jacobi(r, p)
}

/// Hilbert symbol `(a, b)_p` of two nonzero integers at a finite prime.
pub fn hilbert_symbol(a: &BigInt, b: &BigInt, p: u64) -> i32 {
    assert!(!a.is_zero() && !b.is_zero());
    let (alpha, u) = valuation_big(a, p);
    let (beta, v) = valuation_big(b, p);
    if p == 2 {
        let eight = BigInt::from(8);
        let um = u.mod_floor(&eight).to_u64().unwrap();
        let vm = v.mod_floor(&eight).to_u64().unwrap();
        let eps = |x: u64| ((x - 1) / 2) % 2;
        let omg = |x: u64| ((x * x - 1) / 8) % 2;
        let e = eps(um) * eps(vm) + (alpha as u64) * omg(vm) + (beta as u64) * omg(um);
        if e % 2 == 0 {
            1
        } else {
            -1
        }
    } else {
        let mut s = 1;
        if (alpha as u64 * beta as u64) % 2 == 1 && p % 4 == 3 {
            s = -s;
        }
        if beta % 2 == 1 {
            s *= legendre_big(&u, p);
        }
        if alpha % 2 == 1 {
            s *= legendre_big(&v, p);
        }
        s
    }
}

/// Hilbert symbol at the real place.
pub fn hilbert_symbol_real(a: &BigInt, b: &BigInt) -> i32 {
    if a.is_negative() && b.is_negative() {
        -1
    } else {
        1
    }
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}
