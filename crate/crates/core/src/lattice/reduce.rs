//! Exact LLL reduction of integral Gram matrices and the canonical
//! (Minkowski-reduced, lexicographically minimal) Gram of a positive
//! definite lattice in dimension at most four.

use serde::{Deserialize, Serialize};

use super::enumerate::Enumerator;
use crate::error::{consistency_err, Result};

/// Square integer matrix, row major.
pub type IntMatrix = Vec<Vec<i64>>;

fn ovf() -> crate::error::Error {
    consistency_err!("integer overflow in lattice reduction")
}

fn mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or_else(ovf)
}

fn sub(a: i128, b: i128) -> Result<i128> {
    a.checked_sub(b).ok_or_else(ovf)
}

fn add(a: i128, b: i128) -> Result<i128> {
    a.checked_add(b).ok_or_else(ovf)
}

/// Nearest integer to `a / b` for `b > 0`, ties rounded up.
fn round_div(a: i128, b: i128) -> Result<i128> {
    Ok(add(mul(2, a)?, b)?.div_euclid(mul(2, b)?))
}

/// Integral LLL state: `d[i]` are leading Gram minors (`d[0] = 1`) and
/// `lam[k][j] = d[j+1]·μ_{kj}`, all integers.
struct Lll {
    g: Vec<Vec<i128>>,
    u: Vec<Vec<i128>>,
    d: Vec<i128>,
    lam: Vec<Vec<i128>>,
}

impl Lll {
    fn red(&mut self, k: usize, l: usize) -> Result<()> {
        let dl = self.d[l + 1];
        if mul(2, self.lam[k][l])?.abs() <= dl {
            return Ok(());
        }
        let q = round_div(self.lam[k][l], dl)?;
        let n = self.g.len();
        for i in 0..n {
            let t = self.g[l][i];
            self.g[k][i] = sub(self.g[k][i], mul(q, t)?)?;
        }
        for i in 0..n {
            let t = self.g[i][l];
            self.g[i][k] = sub(self.g[i][k], mul(q, t)?)?;
        }
        for i in 0..n {
            let t = self.u[l][i];
            self.u[k][i] = sub(self.u[k][i], mul(q, t)?)?;
        }
        self.lam[k][l] = sub(self.lam[k][l], mul(q, dl)?)?;
        for i in 0..l {
            let t = self.lam[l][i];
            self.lam[k][i] = sub(self.lam[k][i], mul(q, t)?)?;
        }
        Ok(())
    }

    fn swap(&mut self, k: usize, kmax: usize) -> Result<()> {
        self.g.swap(k, k - 1);
        for row in self.g.iter_mut() {
            row.swap(k, k - 1);
        }
        self.u.swap(k, k - 1);
        for j in 0..k - 1 {
            let t = self.lam[k][j];
            self.lam[k][j] = self.lam[k - 1][j];
            self.lam[k - 1][j] = t;
        }
        let lam = self.lam[k][k - 1];
        let (dkm2, dkm1, dk) = (self.d[k - 1], self.d[k], self.d[k + 1]);
        let b = add(mul(dkm2, dk)?, mul(lam, lam)?)? / dkm1;
        for i in k + 1..=kmax {
            let t = self.lam[i][k];
            self.lam[i][k] = sub(mul(dk, self.lam[i][k - 1])?, mul(lam, t)?)? / dkm1;
            self.lam[i][k - 1] = add(mul(b, t)?, mul(lam, self.lam[i][k])?)? / dk;
        }
        self.d[k] = b;
        Ok(())
    }
}

/// LLL (δ = 3/4) on a positive definite Gram matrix. Returns `(G', U)` with
/// `G' = U G Uᵀ` and `U` unimodular. Uses only integer arithmetic.
pub fn lll_gram(g: &[Vec<i64>]) -> Result<(IntMatrix, IntMatrix)> {
    let n = g.len();
    let mut st = Lll {
        g: g.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect(),
        u: (0..n).map(|i| (0..n).map(|j| (i == j) as i128).collect()).collect(),
        d: vec![0; n + 1],
        lam: vec![vec![0; n]; n],
    };
    st.d[0] = 1;
    if n > 0 {
        st.d[1] = st.g[0][0];
        if st.d[1] <= 0 {
            return Err(consistency_err!("LLL input is not positive definite"));
        }
    }
    let mut k = 1;
    let mut kmax = 0;
    let mut guard = 0usize;
    while k < n {
        if k > kmax {
            kmax = k;
            for j in 0..=k {
                let mut u = st.g[k][j];
                for i in 0..j {
                    u = sub(mul(st.d[i + 1], u)?, mul(st.lam[k][i], st.lam[j][i])?)? / st.d[i];
                }
                if j < k {
                    st.lam[k][j] = u;
                } else {
                    if u <= 0 {
                        return Err(consistency_err!("LLL input is not positive definite"));
                    }
                    st.d[k + 1] = u;
                }
            }
        }
        loop {
            guard += 1;
            if guard > 1_000_000 {
                return Err(consistency_err!("LLL failed to terminate"));
            }
            st.red(k, k - 1)?;
            let lhs = mul(4, mul(st.d[k + 1], st.d[k - 1])?)?;
            let rhs = sub(mul(3, mul(st.d[k], st.d[k])?)?, mul(4, mul(st.lam[k][k - 1], st.lam[k][k - 1])?)?)?;
            if lhs < rhs {
                st.swap(k, kmax)?;
                k = (k - 1).max(1);
            } else {
                break;
            }
        }
        for l in (0..k.saturating_sub(1)).rev() {
            st.red(k, l)?;
        }
        k += 1;
    }
    let cast = |m: Vec<Vec<i128>>| -> Result<IntMatrix> {
        m.into_iter()
            .map(|r| r.into_iter().map(|x| i64::try_from(x).map_err(|_| ovf())).collect())
            .collect()
    };
    Ok((cast(st.g)?, cast(st.u)?))
}

/// Determinant by fraction-free elimination with overflow checks.
pub(crate) fn checked_det(m: &[Vec<i128>]) -> Option<i128> {
    let n = m.len();
    let mut a: Vec<Vec<i128>> = m.to_vec();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let Some(r) = (k + 1..n).find(|&r| a[r][k] != 0) else {
                return Some(0);
            };
            a.swap(k, r);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = a[i][j].checked_mul(a[k][k])?.checked_sub(a[i][k].checked_mul(a[k][j])?)?;
                a[i][j] = v / prev;
            }
        }
        prev = a[k][k];
    }
    if n == 0 {
        return Some(1);
    }
    Some(sign * a[n - 1][n - 1])
}

/// Canonical Gram of a positive definite lattice together with the order
/// of its automorphism group.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalForm {
    /// Bilinear Gram in the canonical basis.
    pub gram: IntMatrix,
    /// Number of ordered bases realising `gram`, i.e. `#Aut(L)`.
    pub automorphisms: u64,
}

impl CanonicalForm {
    /// Upper triangle, row by row.
    pub fn upper_triangle(&self) -> Vec<i64> {
        upper_triangle(&self.gram)
    }
}

pub fn upper_triangle(g: &[Vec<i64>]) -> Vec<i64> {
    let n = g.len();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            out.push(g[i][j]);
        }
    }
    out
}

pub fn from_upper_triangle(n: usize, v: &[i64]) -> IntMatrix {
    let mut g = vec![vec![0; n]; n];
    let mut it = v.iter();
    for i in 0..n {
        for j in i..n {
            let x = *it.next().expect("upper triangle length");
            g[i][j] = x;
            g[j][i] = x;
        }
    }
    g
}

/// Minkowski-reduced Gram with lexicographic tie-breaking.
///
/// Candidate basis vectors are all vectors of norm at most the largest
/// diagonal entry of an LLL-reduced basis; in dimension ≤ 4 successive
/// minima are realised by a basis, so this set contains every Minkowski
/// reduced basis. Bases are compared by the key
/// `(G₀₀; G₁₁, G₀₁; G₂₂, G₀₂, G₁₂; …)` and the smallest wins. The number of
/// bases attaining the minimum equals the automorphism group order.
pub fn canonical_form(g: &[Vec<i64>]) -> Result<CanonicalForm> {
    let n = g.len();
    assert!((1..=4).contains(&n), "canonical form supports dimension 1..=4");
    let (red, _) = lll_gram(g)?;
    let bound = (0..n).map(|i| red[i][i]).max().unwrap();
    let en = Enumerator::new(&red)?;
    let mut vecs: Vec<(i64, Vec<i64>)> = Vec::new();
    en.for_each(bound, true, |x, q| {
        if q > 0 {
            vecs.push((q, x.to_vec()));
        }
    })?;
    vecs.sort();
    let mut search = Search {
        gram: &red,
        vecs: &vecs,
        chosen: Vec::with_capacity(n),
        key: Vec::new(),
        best: None,
        count: 0,
    };
    search.dfs(n);
    let best = search.best.ok_or_else(|| consistency_err!("no basis found among short vectors"))?;
    let basis: Vec<&Vec<i64>> = best.1.iter().map(|&i| &vecs[i].1).collect();
    let gram = (0..n)
        .map(|i| (0..n).map(|j| bilinear(&red, basis[i], basis[j])).collect())
        .collect();
    Ok(CanonicalForm { gram, automorphisms: search.count })
}

pub fn bilinear(g: &[Vec<i64>], x: &[i64], y: &[i64]) -> i64 {
    let n = g.len();
    let mut s: i128 = 0;
    for i in 0..n {
        if x[i] == 0 {
            continue;
        }
        for j in 0..n {
            s += x[i] as i128 * g[i][j] as i128 * y[j] as i128;
        }
    }
    s as i64
}

struct Search<'a> {
    gram: &'a [Vec<i64>],
    vecs: &'a [(i64, Vec<i64>)],
    chosen: Vec<usize>,
    key: Vec<i64>,
    best: Option<(Vec<i64>, Vec<usize>)>,
    count: u64,
}

impl Search<'_> {
    fn dfs(&mut self, n: usize) {
        let depth = self.chosen.len();
        if depth == n {
            match &self.best {
                Some((bk, _)) if *bk == self.key => self.count += 1,
                Some((bk, _)) if *bk < self.key => {}
                _ => {
                    self.best = Some((self.key.clone(), self.chosen.clone()));
                    self.count = 1;
                }
            }
            return;
        }
        let start = depth * (depth + 1) / 2;
        for idx in 0..self.vecs.len() {
            let (q, v) = &self.vecs[idx];
            let mut part = Vec::with_capacity(depth + 1);
            part.push(*q);
            for &c in &self.chosen {
                part.push(bilinear(self.gram, &self.vecs[c].1, v));
            }
            if let Some((bk, _)) = &self.best {
                if self.key[..start] == bk[..start] {
                    let bpart = &bk[start..start + depth + 1];
                    if *q > bpart[0] {
                        break;
                    }
                    if part.as_slice() > bpart {
                        continue;
                    }
                }
            }
            self.chosen.push(idx);
            if !self.partial_primitive(n) {
                self.chosen.pop();
                continue;
            }
            self.key.extend_from_slice(&part);
            self.dfs(n);
            self.key.truncate(start);
            self.chosen.pop();
        }
    }

    /// The chosen vectors extend to a basis iff the gcd of their maximal
    /// minors is one.
    fn partial_primitive(&self, n: usize) -> bool {
        let rows: Vec<&Vec<i64>> = self.chosen.iter().map(|&i| &self.vecs[i].1).collect();
        let mut g: i128 = 0;
        let mut cols = Vec::with_capacity(rows.len());
        minors_gcd(&rows, n, 0, &mut cols, &mut g);
        g == 1
    }
}

fn minors_gcd(rows: &[&Vec<i64>], n: usize, from: usize, cols: &mut Vec<usize>, g: &mut i128) {
    let k = rows.len();
    if *g == 1 {
        return;
    }
    if cols.len() == k {
        let m: Vec<Vec<i128>> = rows.iter().map(|r| cols.iter().map(|&c| r[c] as i128).collect()).collect();
        let d = small_det(&m).abs();
        *g = num_integer::gcd(*g, d);
        return;
    }
    for c in from..n {
        cols.push(c);
        minors_gcd(rows, n, c + 1, cols, g);
        cols.pop();
    }
}

pub(crate) fn small_det(m: &[Vec<i128>]) -> i128 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        n => {
            let mut d = 0;
            for j in 0..n {
                if m[0][j] == 0 {
                    continue;
                }
                let minor: Vec<Vec<i128>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                    .collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                d += s * m[0][j] * small_det(&minor);
            }
            d
        }
    }
}

/// `U G Uᵀ` for integer matrices.
pub fn congruent(g: &[Vec<i64>], u: &[Vec<i64>]) -> IntMatrix {
    let k = u.len();
    (0..k).map(|i| (0..k).map(|j| bilinear(g, &u[i], &u[j])).collect()).collect()
}

pub fn int_det(g: &[Vec<i64>]) -> i128 {
    let m: Vec<Vec<i128>> = g.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    small_det(&m)
}
