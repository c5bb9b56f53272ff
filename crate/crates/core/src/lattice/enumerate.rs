//! Exact Fincke–Pohst enumeration of lattice vectors of bounded norm.
//!
//! Coordinate ranges come from integer Schur complements: after scaling the
//! Schur complement at level `k` by the leading principal minor `D_k`, the
//! admissible range for `x_k` is the integer solution set of a quadratic
//! inequality with integer coefficients, so no rounding is involved.

use super::reduce::{checked_det, lll_gram, IntMatrix};
use crate::arith::isqrt_u128;
use crate::error::{consistency_err, input_err, Result};

struct Level {
    scale: i128,
    t: Vec<Vec<i128>>,
}

/// Enumerates `x` with `xᵀ G x ≤ limit` for a positive definite integer Gram `G`.
pub struct Enumerator {
    n: usize,
    /// LLL transform: reduced basis rows in terms of the input basis.
    u: IntMatrix,
    levels: Vec<Level>,
    /// Diagonal of the inverse reduced Gram, for coordinate bounds.
    /// `(G⁻¹)ᵢᵢ` as numerator and denominator.
    inv_diag: Vec<(i128, i128)>,
}

impl Enumerator {
    pub fn new(gram: &[Vec<i64>]) -> Result<Self> {
        let n = gram.len();
        if n == 0 || gram.iter().any(|r| r.len() != n) {
            return Err(input_err!("Gram matrix must be square and nonempty"));
        }
        for i in 0..n {
            for j in 0..n {
                if gram[i][j] != gram[j][i] {
                    return Err(input_err!("Gram matrix must be symmetric"));
                }
            }
        }
        let big: Vec<Vec<i128>> = gram.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        for k in 1..=n {
            let minor: Vec<Vec<i128>> = (0..k).map(|i| big[i][..k].to_vec()).collect();
            match checked_det(&minor) {
                Some(d) if d > 0 => {}
                Some(_) => return Err(input_err!("Gram matrix is not positive definite")),
                None => return Err(consistency_err!("Gram matrix too large for exact enumeration")),
            }
        }
        let (red, u) = lll_gram(gram)?;
        let g: Vec<Vec<i128>> = red.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        let ovf = || consistency_err!("enumeration coefficients overflow");
        // t[i][j] = det of the leading k×k block bordered by row k+i and column k+j,
        // i.e. the Schur complement scaled by the leading minor.
        let bordered = |k: usize, i: usize, j: usize| -> Option<i128> {
            let rows: Vec<usize> = (0..k).chain(std::iter::once(i)).collect();
            let cols: Vec<usize> = (0..k).chain(std::iter::once(j)).collect();
            let m: Vec<Vec<i128>> = rows.iter().map(|&r| cols.iter().map(|&c| g[r][c]).collect()).collect();
            checked_det(&m)
        };
        let mut levels = Vec::with_capacity(n);
        for k in 0..n {
            let lead: Vec<Vec<i128>> = (0..k).map(|i| g[i][..k].to_vec()).collect();
            let scale = checked_det(&lead).ok_or_else(ovf)?;
            let m = n - k;
            let mut t = vec![vec![0i128; m]; m];
            for i in 0..m {
                for j in i..m {
                    let v = bordered(k, k + i, k + j).ok_or_else(ovf)?;
                    t[i][j] = v;
                    t[j][i] = v;
                }
            }
            levels.push(Level { scale, t });
        }
        let det = checked_det(&g).ok_or_else(ovf)?;
        let inv_diag = (0..n)
            .map(|i| {
                let minor: Vec<Vec<i128>> = (0..n)
                    .filter(|&r| r != i)
                    .map(|r| (0..n).filter(|&c| c != i).map(|c| g[r][c]).collect())
                    .collect();
                checked_det(&minor).map(|c| (c, det)).ok_or_else(ovf)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Enumerator { n, u, levels, inv_diag })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn check_magnitudes(&self, limit: i64) -> Result<()> {
        let mut xmax: i128 = 0;
        for &(num, den) in &self.inv_diag {
            let b = (limit as i128)
                .checked_mul(num)
                .map(|x| x.div_euclid(den) as u128)
                .unwrap_or(u128::MAX);
            xmax = xmax.max(isqrt_u128(b) as i128 + 1);
        }
        let tmax = self
            .levels
            .iter()
            .flat_map(|l| l.t.iter().flatten().map(|x| x.abs()).chain(std::iter::once(l.scale)))
            .max()
            .unwrap_or(1);
        let ok = xmax
            .checked_mul(xmax)
            .and_then(|x2| x2.checked_mul(tmax))
            .and_then(|v| v.checked_mul(64))
            .and_then(|v| v.checked_mul(limit.max(1) as i128 + 1))
            .is_some();
        if ok {
            Ok(())
        } else {
            Err(consistency_err!("enumeration bound {limit} too large for exact i128 arithmetic"))
        }
    }

    /// Calls `f(x, xᵀGx)` for every `x` (including zero) with `xᵀGx ≤ limit`.
    /// With `map_back` the coordinates refer to the input basis; otherwise
    /// to the internal reduced basis (cheaper when only norms matter).
    pub fn for_each<F: FnMut(&[i64], i64)>(&self, limit: i64, map_back: bool, mut f: F) -> Result<()> {
        if limit < 0 {
            return Ok(());
        }
        self.check_magnitudes(limit)?;
        let mut y = vec![0i128; self.n];
        let mut out = vec![0i64; self.n];
        let mut cb = |y: &[i128], v: i128| {
            if map_back {
                for j in 0..self.n {
                    let mut s: i128 = 0;
                    for i in 0..self.n {
                        s += y[i] * self.u[i][j] as i128;
                    }
                    out[j] = s as i64;
                }
            } else {
                for j in 0..self.n {
                    out[j] = y[j] as i64;
                }
            }
            f(&out, v as i64);
        };
        self.rec(self.n - 1, &mut y, limit as i128, &mut cb);
        Ok(())
    }

    fn rec<F: FnMut(&[i128], i128)>(&self, k: usize, y: &mut [i128], limit: i128, f: &mut F) {
        let lv = &self.levels[k];
        let m = self.n - k;
        let t = &lv.t;
        let mut b: i128 = 0;
        let mut c: i128 = 0;
        for i in 1..m {
            let yi = y[k + i];
            if yi == 0 {
                continue;
            }
            b += t[0][i] * yi;
            let mut row = 0;
            for j in 1..m {
                row += t[i][j] * y[k + j];
            }
            c += row * yi;
        }
        let t00 = t[0][0];
        let rhs = lv.scale * limit;
        let disc = b * b - t00 * (c - rhs);
        if disc < 0 {
            return;
        }
        let s = isqrt_u128(disc as u128) as i128;
        let lo = div_ceil(-b - s, t00);
        let hi = (-b + s).div_euclid(t00);
        for v in lo..=hi {
            y[k] = v;
            if k == 0 {
                let val = t00 * v * v + 2 * b * v + c;
                if val <= limit {
                    f(y, val);
                }
            } else {
                self.rec(k - 1, y, limit, f);
            }
        }
        y[k] = 0;
    }

    /// `r[m]` = number of vectors with `xᵀGx = 2m`, for `m ≤ bound`.
    /// Intended for even Grams, where `xᵀGx/2` is the integral norm.
    pub fn norm_counts(&self, bound: u64) -> Result<Vec<u64>> {
        let mut r = vec![0u64; bound as usize + 1];
        let lim = i64::try_from(bound.checked_mul(2).ok_or_else(|| input_err!("bound too large"))?)
            .map_err(|_| input_err!("bound too large"))?;
        self.for_each(lim, false, |_, v| {
            if v % 2 == 0 {
                r[(v / 2) as usize] += 1;
            }
        })?;
        Ok(r)
    }
}

fn div_ceil(a: i128, b: i128) -> i128 {
    -((-a).div_euclid(b))
}

/// Convenience: all vectors with `xᵀGx ≤ limit` in input coordinates.
pub fn vectors_up_to(gram: &IntMatrix, limit: i64) -> Result<Vec<(Vec<i64>, i64)>> {
    let en = Enumerator::new(gram)?;
    let mut out = Vec::new();
    en.for_each(limit, true, |x, v| out.push((x.to_vec(), v)))?;
    Ok(out)
}
