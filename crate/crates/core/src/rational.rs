//! Rational helpers: the `"p/q"` text form used in every persisted artifact
//! and fixed-significance decimal rendering.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{input_err, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Always `p/q` with `q ≥ 1`, including integers (`"3/1"`).
pub fn to_pq(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_pq(s: &str) -> Result<Rational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.trim(), "1"),
    };
    let n: BigInt = n.parse().map_err(|_| input_err!("bad rational {s:?}"))?;
    let d: BigInt = d.parse().map_err(|_| input_err!("bad rational {s:?}"))?;
    if d.is_zero() {
        return Err(input_err!("zero denominator in {s:?}"));
    }
    Ok(Rational::new(n, d))
}

/// Decimal rendering with `digits` significant digits, rounded half away
/// from zero, computed exactly. Zero renders as `"0"`.
pub fn to_sig_decimal(r: &Rational, digits: u32) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let neg = r.is_negative();
    let a = r.abs();
    let (num, den) = (a.numer().clone(), a.denom().clone());
    let ten = BigInt::from(10);
    // exponent e with 10^e <= a < 10^(e+1)
    let mut e: i64 = num.to_string().len() as i64 - den.to_string().len() as i64;
    let pow = |k: i64| -> Rational {
        if k >= 0 {
            Rational::from_integer(num_traits::pow(ten.clone(), k as usize))
        } else {
            Rational::new(BigInt::from(1), num_traits::pow(ten.clone(), (-k) as usize))
        }
    };
    while a < pow(e) {
        e -= 1;
    }
    while a >= pow(e + 1) {
        e += 1;
    }
    let shift = digits as i64 - 1 - e;
    let scaled = &a * pow(shift);
    let (q, rem) = scaled.numer().div_rem(scaled.denom());
    let mut m = q;
    if &rem * BigInt::from(2) >= *scaled.denom() {
        m += 1;
    }
    let mut shift = shift;
    if m.to_string().len() as u32 > digits {
        // rounding carried into a new digit
        m /= &ten;
        shift -= 1;
    }
    let s = m.to_string();
    let body = if shift <= 0 {
        let zeros = "0".repeat((-shift) as usize);
        format!("{s}{zeros}")
    } else {
        let shift = shift as usize;
        if s.len() > shift {
            let (i, f) = s.split_at(s.len() - shift);
            format!("{i}.{f}")
        } else {
            format!("0.{}{}", "0".repeat(shift - s.len()), s)
        }
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}
