//! Gross lattices `(2R + Z) ∩ B⁰` of definite orders with the reduced-norm
//! form, representation numbers and theta coefficients.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith;
use crate::error::{consistency_err, input_err, Result};
use crate::lattice::reduce::{checked_det, upper_triangle};
use crate::lattice::{lll_gram, Enumerator, IntMatrix, QLattice};
use crate::quatarith::{scaled_norm_gram, Quat, QuatAlgebra, QuatOrder};
use crate::rational::{int, Rational};

/// Rank-3 positive definite lattice. `gram` is the bilinear Gram
/// `B(x, y) = Q(x + y) − Q(x) − Q(y)`, so the diagonal holds `2Q(eᵢ)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TernaryLattice {
    pub gram: IntMatrix,
    /// `(Δ, N, class index)` when built from a class set.
    pub provenance: Option<(u64, u64, usize)>,
}

impl TernaryLattice {
    /// Validates an even, symmetric, positive definite 3×3 bilinear Gram.
    pub fn new(gram: IntMatrix) -> Result<Self> {
        if gram.len() != 3 || gram.iter().any(|r| r.len() != 3) {
            return Err(input_err!("ternary Gram must be 3×3"));
        }
        if (0..3).any(|i| gram[i][i] % 2 != 0) {
            return Err(input_err!("bilinear Gram must have even diagonal"));
        }
        Enumerator::new(&gram)?;
        Ok(TernaryLattice { gram, provenance: None })
    }

    pub fn with_provenance(mut self, delta: u64, level: u64, index: usize) -> Self {
        self.provenance = Some((delta, level, index));
        self
    }

    /// `det` of the Q-Gram, i.e. `det(B)/8`.
    pub fn det(&self) -> Rational {
        let m: Vec<Vec<i128>> = self.gram.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        Rational::new(BigInt::from(checked_det(&m).expect("3×3 determinant fits")), BigInt::from(8))
    }

    /// `det` of the Q-Gram as an integer, when integral.
    pub fn det_integer(&self) -> Option<u64> {
        let d = self.det();
        d.is_integer().then(|| u64::try_from(d.to_integer()).ok()).flatten()
    }

    pub fn q(&self, x: &[i64]) -> i64 {
        crate::lattice::reduce::bilinear(&self.gram, x, x) / 2
    }

    pub fn gram6(&self) -> Vec<i64> {
        upper_triangle(&self.gram)
    }
}

/// Basis of `(2R + Z) ∩ B⁰` as quaternions.
pub fn gross_basis(r: &QuatOrder) -> Result<Vec<Quat>> {
    let gens: Vec<Vec<Rational>> = r
        .basis()
        .iter()
        .map(|e| {
            let t = QuatAlgebra::trd(e);
            vec![int(2) * &e[0] - t, int(2) * &e[1], int(2) * &e[2], int(2) * &e[3]]
        })
        .collect();
    let l = QLattice::from_rows(4, &gens);
    if l.rank() != 3 {
        return Err(consistency_err!("Gross lattice has rank {}, expected 3", l.rank()));
    }
    if l.basis().iter().any(|b| !b[0].is_zero()) {
        return Err(consistency_err!("Gross lattice is not trace zero"));
    }
    Ok(l.basis().iter().map(|b| crate::quatarith::quat_from_slice(b)).collect())
}

/// Gross lattice of an order with the reduced-norm form, LLL-reduced.
pub fn gross_lattice(r: &QuatOrder) -> Result<TernaryLattice> {
    let basis = gross_basis(r)?;
    let l = QLattice::from_rows(4, &basis.iter().map(|q| q.to_vec()).collect::<Vec<_>>());
    let g = scaled_norm_gram(r.algebra(), &l, &int(1))?;
    let (red, _) = lll_gram(&g)?;
    TernaryLattice::new(red)
}

/// `#{x : Q(x) = m}`.
pub fn rep_number(l: &TernaryLattice, m: u64) -> Result<u64> {
    let lim = i64::try_from(2 * m).map_err(|_| input_err!("m too large"))?;
    let mut n = 0;
    Enumerator::new(&l.gram)?.for_each(lim, false, |_, v| n += (v == lim) as u64)?;
    Ok(n)
}

/// `#{x primitive : Q(x) = m}`, by a gcd test on each vector.
pub fn primitive_rep_number(l: &TernaryLattice, m: u64) -> Result<u64> {
    if m == 0 {
        return Err(input_err!("primitive representations need m ≥ 1"));
    }
    let lim = i64::try_from(2 * m).map_err(|_| input_err!("m too large"))?;
    let mut n = 0;
    Enumerator::new(&l.gram)?.for_each(lim, false, |x, v| {
        if v == lim {
            let g = x.iter().fold(0u64, |g, &c| arith::gcd_u64(g, c.unsigned_abs()));
            n += (g == 1) as u64;
        }
    })?;
    Ok(n)
}

/// `r(Q, m)` for `0 ≤ m ≤ bound`, in one enumeration pass.
pub fn theta_coeffs(l: &TernaryLattice, bound: u64) -> Result<Vec<u64>> {
    if bound == 0 {
        return Err(input_err!("theta bound must be at least 1"));
    }
    Enumerator::new(&l.gram)?.norm_counts(bound)
}

/// Primitive counts from plain ones: `r*(m) = Σ_{k² | m} μ(k) r(m/k²)`.
pub fn primitive_from_theta(r: &[u64]) -> Vec<u64> {
    let mut out = vec![0i64; r.len()];
    let bound = r.len() as u64;
    for k in 1..bound {
        let mu = arith::mobius(k) as i64;
        if mu == 0 {
            continue;
        }
        let k2 = k * k;
        if k2 >= bound {
            break;
        }
        let mut j = 1;
        while j * k2 < bound {
            out[(j * k2) as usize] += mu * r[j as usize] as i64;
            j += 1;
        }
    }
    out.into_iter().map(|x| x.max(0) as u64).collect()
}

/// Indices `m` with nonzero coefficient outside `m ≡ 0, 3 (mod 4)`.
pub fn kohnen_violations(r: &[u64]) -> Vec<usize> {
    r.iter().enumerate().filter(|&(m, &c)| c != 0 && m % 4 != 0 && m % 4 != 3).map(|(m, _)| m).collect()
}

/// CSV `m,r,r_star` for `m = 0..=bound` (`r_star` at 0 is 0).
pub fn theta_csv(l: &TernaryLattice, bound: u64) -> Result<String> {
    let r = theta_coeffs(l, bound)?;
    let rs = primitive_from_theta(&r);
    let mut s = String::from("m,r,r_star\n");
    for m in 0..r.len() {
        let _ = writeln!(s, "{m},{},{}", r[m], rs[m]);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quatarith::{eichler_order_for, right_ideal_class_set};

    fn brute_rep(l: &TernaryLattice, m: i64, box_: i64) -> (u64, u64) {
        let (mut r, mut rs) = (0, 0);
        for a in -box_..=box_ {
            for b in -box_..=box_ {
                for c in -box_..=box_ {
                    if l.q(&[a, b, c]) == m {
                        r += 1;
                        let g = arith::gcd_u64(arith::gcd_u64(a.unsigned_abs(), b.unsigned_abs()), c.unsigned_abs());
                        rs += (g == 1) as u64;
                    }
                }
            }
        }
        (r, rs)
    }

    #[test]
    fn hurwitz_gross_lattice() {
        let o = eichler_order_for(2, 1).unwrap();
        let g = gross_lattice(&o).unwrap();
        assert_eq!(g.det(), int(16));
        let th = theta_coeffs(&g, 40).unwrap();
        assert_eq!(th[0], 1);
        assert_eq!(th[3], rep_number(&g, 3).unwrap());
        // i + j + k and its sign variants, with the six of the form ±(i ± j)·…
        assert_eq!(th[3], 8);
        assert_eq!(th[4], 6);
        assert!(kohnen_violations(&th).is_empty());
    }

    #[test]
    fn determinants() {
        for (d, n) in [(11u64, 1u64), (11, 7), (3, 1), (2, 3), (37, 2)] {
            let s = right_ideal_class_set(&eichler_order_for(d, n).unwrap()).unwrap();
            for c in &s.classes {
                let g = gross_lattice(&c.left_order).unwrap();
                assert_eq!(g.det(), int(4 * (d * n * d * n) as i64));
            }
        }
    }

    #[test]
    fn primitive_counts() {
        let s = right_ideal_class_set(&eichler_order_for(11, 1).unwrap()).unwrap();
        for c in &s.classes {
            let g = gross_lattice(&c.left_order).unwrap();
            let th = theta_coeffs(&g, 60).unwrap();
            let pr = primitive_from_theta(&th);
            for m in 1..=60u64 {
                assert_eq!(pr[m as usize], primitive_rep_number(&g, m).unwrap());
                let (r, rs) = brute_rep(&g, m as i64, 12);
                assert_eq!((th[m as usize], pr[m as usize]), (r, rs));
            }
            // m = 12 = 4·3: imprimitive vectors are 2·(norm-3 vectors)
            assert_eq!(pr[12], th[12] - th[3]);
        }
    }

    #[test]
    fn csv_layout() {
        let g = gross_lattice(&eichler_order_for(2, 1).unwrap()).unwrap();
        let csv = theta_csv(&g, 4).unwrap();
        assert!(csv.starts_with("m,r,r_star\n0,1,0\n"));
        assert_eq!(csv.lines().count(), 6);
    }
}
