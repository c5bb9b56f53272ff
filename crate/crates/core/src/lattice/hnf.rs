//! Lattices in `Q^n` kept in Hermite normal form over a common denominator.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

/// Row-style Hermite normal form of an integer matrix. Returns the nonzero
/// rows: pivot columns strictly increase, pivots are positive and entries
/// above a pivot lie in `[0, pivot)`.
pub fn hnf_rows(mut a: Vec<Vec<BigInt>>, ncols: usize) -> Vec<Vec<BigInt>> {
    let m = a.len();
    let mut r = 0;
    for col in 0..ncols {
        if r == m {
            break;
        }
        let mut has_pivot = false;
        loop {
            let piv = (r..m)
                .filter(|&i| !a[i][col].is_zero())
                .min_by(|&i, &j| a[i][col].abs().cmp(&a[j][col].abs()));
            let Some(piv) = piv else { break };
            has_pivot = true;
            a.swap(r, piv);
            let mut clean = true;
            for i in r + 1..m {
                if a[i][col].is_zero() {
                    continue;
                }
                let q = a[i][col].div_floor(&a[r][col]);
                if !q.is_zero() {
                    let (top, rest) = a.split_at_mut(i);
                    let pr = &top[r];
                    for (x, y) in rest[0].iter_mut().zip(pr.iter()) {
                        *x -= &q * y;
                    }
                }
                if !a[i][col].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        if !has_pivot {
            continue;
        }
        if a[r][col].is_negative() {
            for x in a[r].iter_mut() {
                *x = -&*x;
            }
        }
        for i in 0..r {
            let q = a[i][col].div_floor(&a[r][col]);
            if !q.is_zero() {
                let (top, rest) = a.split_at_mut(r);
                let pr = &rest[0];
                for (x, y) in top[i].iter_mut().zip(pr.iter()) {
                    *x -= &q * y;
                }
            }
        }
        r += 1;
    }
    a.truncate(r);
    a
}

/// A finitely generated subgroup of `Q^n`, stored as `rows / denom` with
/// `rows` in Hermite normal form and `denom` minimal. Two lattices are
/// equal iff their stored forms are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QLattice {
    dim: usize,
    denom: BigInt,
    rows: Vec<Vec<BigInt>>,
}

fn lcm_denoms<'a>(it: impl Iterator<Item = &'a Rational>) -> BigInt {
    it.fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

impl QLattice {
    pub fn from_rows(dim: usize, gens: &[Vec<Rational>]) -> Self {
        let l = lcm_denoms(gens.iter().flatten());
        let ints: Vec<Vec<BigInt>> = gens
            .iter()
            .map(|g| {
                assert_eq!(g.len(), dim);
                g.iter().map(|x| (x * &l).to_integer()).collect()
            })
            .collect();
        Self::from_integer_rows(dim, ints, l)
    }

    pub fn from_integer_rows(dim: usize, rows: Vec<Vec<BigInt>>, denom: BigInt) -> Self {
        let rows = hnf_rows(rows, dim);
        let mut g = denom.clone();
        for x in rows.iter().flatten() {
            g = g.gcd(x);
        }
        let (rows, denom) = if g.is_one() || g.is_zero() {
            (rows, denom)
        } else {
            (
                rows.into_iter()
                    .map(|r| r.into_iter().map(|x| x / &g).collect())
                    .collect(),
                denom / &g,
            )
        };
        QLattice { dim, denom, rows }
    }

    /// The standard lattice `Z^n`.
    pub fn standard(dim: usize) -> Self {
        let rows = (0..dim)
            .map(|i| (0..dim).map(|j| BigInt::from((i == j) as i32)).collect())
            .collect();
        QLattice { dim, denom: BigInt::one(), rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn denom(&self) -> &BigInt {
        &self.denom
    }

    pub fn integer_rows(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn basis(&self) -> Vec<Vec<Rational>> {
        self.rows
            .iter()
            .map(|r| r.iter().map(|x| Rational::new(x.clone(), self.denom.clone())).collect())
            .collect()
    }

    /// Integer coordinates of `v` in the stored basis, if `v` lies in the lattice.
    pub fn coords(&self, v: &[Rational]) -> Option<Vec<BigInt>> {
        let mut w: Vec<BigInt> = Vec::with_capacity(self.dim);
        for x in v {
            let y = x * &self.denom;
            if !y.is_integer() {
                return None;
            }
            w.push(y.to_integer());
        }
        let mut out = Vec::with_capacity(self.rows.len());
        let mut col = 0;
        for row in &self.rows {
            while row[col].is_zero() {
                if !w[col].is_zero() {
                    return None;
                }
                col += 1;
            }
            let (q, r) = w[col].div_rem(&row[col]);
            if !r.is_zero() {
                return None;
            }
            for (x, y) in w.iter_mut().zip(row.iter()) {
                *x -= &q * y;
            }
            out.push(q);
        }
        if w.iter().all(|x| x.is_zero()) {
            Some(out)
        } else {
            None
        }
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.coords(v).is_some()
    }

    pub fn contains_lattice(&self, other: &QLattice) -> bool {
        other.basis().iter().all(|b| self.contains(b))
    }

    pub fn sum(&self, other: &QLattice) -> QLattice {
        let mut gens = self.basis();
        gens.extend(other.basis());
        QLattice::from_rows(self.dim, &gens)
    }

    pub fn scale(&self, s: &Rational) -> QLattice {
        let gens: Vec<Vec<Rational>> = self
            .basis()
            .into_iter()
            .map(|r| r.into_iter().map(|x| x * s).collect())
            .collect();
        QLattice::from_rows(self.dim, &gens)
    }

    /// Absolute covolume of a full-rank lattice.
    pub fn covolume(&self) -> Rational {
        assert_eq!(self.rank(), self.dim, "covolume of a degenerate lattice");
        let mut p = BigInt::one();
        for (i, r) in self.rows.iter().enumerate() {
            p *= &r[i];
        }
        Rational::new(p, num_traits::pow(self.denom.clone(), self.dim))
    }

    /// Dual lattice with respect to the standard dot product (full rank).
    pub fn dual(&self) -> QLattice {
        let inv = invert(&self.basis()).expect("full-rank lattice");
        let n = self.dim;
        let t: Vec<Vec<Rational>> = (0..n).map(|i| (0..n).map(|j| inv[j][i].clone()).collect()).collect();
        QLattice::from_rows(n, &t)
    }

    pub fn intersect(&self, other: &QLattice) -> QLattice {
        self.dual().sum(&other.dual()).dual()
    }

    /// Image under `v ↦ v·M` for a square rational matrix.
    pub fn transform(&self, m: &[Vec<Rational>]) -> QLattice {
        let gens: Vec<Vec<Rational>> = self.basis().iter().map(|b| vec_mat(b, m)).collect();
        QLattice::from_rows(m[0].len(), &gens)
    }
}

pub fn vec_mat(v: &[Rational], m: &[Vec<Rational>]) -> Vec<Rational> {
    let cols = m[0].len();
    (0..cols)
        .map(|j| v.iter().zip(m.iter()).fold(Rational::zero(), |acc, (x, row)| acc + x * &row[j]))
        .collect()
}

/// Gauss–Jordan inverse of a square rational matrix.
pub fn invert(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, p);
        let inv = a[c][c].recip();
        for x in a[c].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                let (pivot_row, target) = if i < c {
                    let (top, rest) = a.split_at_mut(c);
                    (&rest[0], &mut top[i])
                } else {
                    let (top, rest) = a.split_at_mut(i);
                    (&top[c], &mut rest[0])
                };
                for (x, y) in target.iter_mut().zip(pivot_row.iter()) {
                    *x -= &f * y;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            a.swap(c, p);
            d = -d;
        }
        d *= &a[c][c];
        for i in c + 1..n {
            if !a[i][c].is_zero() {
                let f = &a[i][c] / &a[c][c];
                let (top, rest) = a.split_at_mut(i);
                for (x, y) in rest[0].iter_mut().zip(top[c].iter()) {
                    *x -= &f * y;
                }
            }
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn row(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    #[test]
    fn hnf_is_canonical() {
        let a = QLattice::from_rows(2, &[row(&[2, 0]), row(&[0, 3])]);
        let b = QLattice::from_rows(2, &[row(&[2, 3]), row(&[4, 3]), row(&[0, 6])]);
        assert_eq!(a, b);
        assert_eq!(a.covolume(), int(6));
    }

    #[test]
    fn membership_and_intersection() {
        let half = QLattice::from_rows(2, &[vec![rat(1, 2), int(0)], row(&[0, 1])]);
        assert!(half.contains(&[rat(3, 2), int(4)]));
        assert!(!half.contains(&[rat(1, 3), int(0)]));
        let a = QLattice::from_rows(2, &[row(&[2, 0]), row(&[0, 1])]);
        let b = QLattice::from_rows(2, &[row(&[1, 0]), row(&[0, 3])]);
        let c = a.intersect(&b);
        assert_eq!(c, QLattice::from_rows(2, &[row(&[2, 0]), row(&[0, 3])]));
        assert_eq!(a.sum(&b), QLattice::standard(2));
    }

    #[test]
    fn inverse_and_det() {
        let m = vec![row(&[2, 1, 0]), row(&[1, 3, 1]), row(&[0, 1, 4])];
        let inv = invert(&m).unwrap();
        assert_eq!(det(&m), int(18));
        for i in 0..3 {
            let prod = vec_mat(&m[i], &inv);
            for (j, x) in prod.iter().enumerate() {
                assert_eq!(*x, int((i == j) as i64));
            }
        }
    }
}
