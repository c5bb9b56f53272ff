use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::algebra::{quat_from_slice, Quat, QuatAlgebra};
use crate::arith;
use crate::error::{consistency_err, input_err, Result};
use crate::lattice::{Enumerator, IntMatrix, QLattice};
use crate::rational::{int, Rational};

/// A full-rank lattice in a definite quaternion algebra, as rows in the
/// `(1, i, j, k)` frame.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuatOrder {
    algebra: QuatAlgebra,
    lattice: QLattice,
    level: u64,
}

/// Integer rows and common denominator of a lattice, when everything fits
/// comfortably in `i128` for one round of products.
fn small_rows(l: &QLattice) -> Option<(Vec<[i128; 4]>, i128)> {
    let den = l.denom().to_i128()?;
    let mut rows = Vec::with_capacity(l.rank());
    for r in l.integer_rows() {
        let mut v = [0i128; 4];
        for (x, y) in v.iter_mut().zip(r) {
            *x = y.to_i128().filter(|x| x.abs() < 1 << 40)?;
        }
        rows.push(v);
    }
    (den.abs() < 1 << 40).then_some((rows, den))
}

fn small_params(alg: &QuatAlgebra) -> (i128, i128) {
    (alg.a() as i128, alg.b() as i128)
}

fn mul_small(a: i128, b: i128, x: &[i128; 4], y: &[i128; 4]) -> [i128; 4] {
    [
        x[0] * y[0] + a * x[1] * y[1] + b * x[2] * y[2] - a * b * x[3] * y[3],
        x[0] * y[1] + x[1] * y[0] - b * x[2] * y[3] + b * x[3] * y[2],
        x[0] * y[2] + x[2] * y[0] + a * x[1] * y[3] - a * x[3] * y[1],
        x[0] * y[3] + x[3] * y[0] + x[1] * y[2] - x[2] * y[1],
    ]
}

fn pairing_small(a: i128, b: i128, x: &[i128; 4], y: &[i128; 4]) -> i128 {
    2 * (x[0] * y[0] - a * x[1] * y[1] - b * x[2] * y[2] + a * b * x[3] * y[3])
}

/// `|a|, |b|` small enough that products of 40-bit coordinates stay in range.
fn params_ok(alg: &QuatAlgebra) -> bool {
    alg.a().abs() < 1 << 20 && alg.b().abs() < 1 << 20
}

/// Sublattice spanned by all products `x·y`, `x ∈ l`, `y ∈ m`.
pub fn lattice_product(alg: &QuatAlgebra, l: &QLattice, m: &QLattice) -> QLattice {
    if let (Some((lr, ld)), Some((mr, md)), true) = (small_rows(l), small_rows(m), params_ok(alg)) {
        let (a, b) = small_params(alg);
        let mut gens = Vec::with_capacity(lr.len() * mr.len());
        for x in &lr {
            for y in &mr {
                gens.push(mul_small(a, b, x, y).iter().map(|&v| BigInt::from(v)).collect());
            }
        }
        return QLattice::from_integer_rows(4, gens, BigInt::from(ld) * BigInt::from(md));
    }
    let lb = l.basis();
    let mb = m.basis();
    let mut gens = Vec::with_capacity(lb.len() * mb.len());
    for x in &lb {
        let x = quat_from_slice(x);
        for y in &mb {
            gens.push(alg.mul(&x, &quat_from_slice(y)).to_vec());
        }
    }
    QLattice::from_rows(4, &gens)
}

pub fn lattice_conj(l: &QLattice) -> QLattice {
    let rows: Vec<Vec<BigInt>> = l
        .integer_rows()
        .iter()
        .map(|r| r.iter().enumerate().map(|(i, x)| if i == 0 { x.clone() } else { -x }).collect())
        .collect();
    QLattice::from_integer_rows(4, rows, l.denom().clone())
}

/// `x·l` for a single element `x`.
pub fn left_mul(alg: &QuatAlgebra, x: &Quat, l: &QLattice) -> QLattice {
    let gens: Vec<Vec<Rational>> = l.basis().iter().map(|b| alg.mul(x, &quat_from_slice(b)).to_vec()).collect();
    QLattice::from_rows(4, &gens)
}

/// Rational matrix `trd(bᵢ b̄ⱼ)` on a basis.
pub fn trace_gram(alg: &QuatAlgebra, basis: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = basis.len();
    let mut g = vec![vec![Rational::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let v = alg.trace_pairing(&quat_from_slice(&basis[i]), &quat_from_slice(&basis[j]));
            g[i][j] = v.clone();
            g[j][i] = v;
        }
    }
    g
}

/// `trd(bᵢ b̄ⱼ) / scale` on the stored basis of `l`, as an integer matrix;
/// fails if not integral or too large.
pub fn scaled_norm_gram(alg: &QuatAlgebra, l: &QLattice, scale: &Rational) -> Result<IntMatrix> {
    let not_integral = || consistency_err!("norm form is not integral after scaling by {scale}");
    if let (Some((rows, den)), true, Some(sn), Some(sd)) =
        (small_rows(l), params_ok(alg), scale.numer().to_i128(), scale.denom().to_i128())
    {
        let (a, b) = small_params(alg);
        // entry = pairing · sd / (den² · sn)
        if let Some(q) = den.checked_mul(den).and_then(|d2| d2.checked_mul(sn)) {
            let n = rows.len();
            let mut g = vec![vec![0i64; n]; n];
            for i in 0..n {
                for j in i..n {
                    let v = pairing_small(a, b, &rows[i], &rows[j]).checked_mul(sd).ok_or_else(|| consistency_err!("norm form overflow"))?;
                    if v % q != 0 {
                        return Err(not_integral());
                    }
                    let e = i64::try_from(v / q).map_err(|_| consistency_err!("norm form entry exceeds 64 bits"))?;
                    g[i][j] = e;
                    g[j][i] = e;
                }
            }
            return Ok(g);
        }
    }
    trace_gram(alg, &l.basis())
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|x| {
                    let y = x / scale;
                    if !y.is_integer() {
                        return Err(not_integral());
                    }
                    y.to_integer()
                        .to_i64()
                        .ok_or_else(|| consistency_err!("norm form entry exceeds 64 bits"))
                })
                .collect()
        })
        .collect()
}

/// Reduced discriminant of a lattice with integral trace form: `√det trd(bᵢ b̄ⱼ)`.
fn lattice_disc(alg: &QuatAlgebra, l: &QLattice) -> Option<BigInt> {
    let d = crate::lattice::det(&trace_gram(alg, &l.basis()));
    if !d.is_integer() || !d.is_positive() {
        return None;
    }
    let d = d.to_integer();
    let s = d.sqrt();
    (&s * &s == d).then_some(s)
}

/// Whether every basis element and every pairing is integral.
fn is_integral(alg: &QuatAlgebra, l: &QLattice) -> bool {
    let b = l.basis();
    b.iter().all(|x| {
        let q = quat_from_slice(x);
        QuatAlgebra::trd(&q).is_integer() && alg.nrd(&q).is_integer()
    }) && trace_gram(alg, &b).iter().flatten().all(|x| x.is_integer())
}

/// Ring generated by `l` (which must contain 1), or `None` if it fails to be
/// an order whose discriminant is a multiple of `floor`.
fn ring_closure(alg: &QuatAlgebra, l: &QLattice, floor: u64) -> Option<QLattice> {
    let mut cur = l.clone();
    for _ in 0..64 {
        if !is_integral(alg, &cur) {
            return None;
        }
        let d = lattice_disc(alg, &cur)?;
        if d < BigInt::from(floor) || !(&d % floor).is_zero() {
            return None;
        }
        let next = cur.sum(&lattice_product(alg, &cur, &cur));
        if next == cur {
            return Some(cur);
        }
        cur = next;
    }
    None
}

fn coords_iter(q: u64) -> impl Iterator<Item = [u64; 4]> {
    let n = q.pow(4);
    (1..n).map(move |mut t| {
        let mut c = [0u64; 4];
        for x in c.iter_mut() {
            *x = t % q;
            t /= q;
        }
        c
    })
}

fn combo(basis: &[Vec<Rational>], c: &[u64; 4]) -> Quat {
    let mut v: Quat = [int(0), int(0), int(0), int(0)];
    for (b, &ci) in basis.iter().zip(c) {
        if ci != 0 {
            let ci = int(ci as i64);
            for k in 0..4 {
                v[k] += &b[k] * &ci;
            }
        }
    }
    v
}

impl QuatOrder {
    /// Wraps a lattice, checking it is an order with discriminant `disc(B)·level`.
    pub fn from_lattice(algebra: QuatAlgebra, lattice: QLattice, level: u64) -> Result<Self> {
        if lattice.rank() != 4 || !lattice.contains(&QuatAlgebra::one()) {
            return Err(consistency_err!("lattice is not a rank-4 lattice containing 1"));
        }
        if lattice_product(&algebra, &lattice, &lattice) != lattice || !is_integral(&algebra, &lattice) {
            return Err(consistency_err!("lattice is not an order"));
        }
        let d = lattice_disc(&algebra, &lattice).ok_or_else(|| consistency_err!("order discriminant is not an integer"))?;
        let want = BigInt::from(algebra.disc()) * level;
        if d != want {
            return Err(consistency_err!("order has reduced discriminant {d}, expected {want}"));
        }
        Ok(QuatOrder { algebra, lattice, level })
    }

    pub fn algebra(&self) -> &QuatAlgebra {
        &self.algebra
    }

    pub fn lattice(&self) -> &QLattice {
        &self.lattice
    }

    pub fn delta(&self) -> u64 {
        self.algebra.disc()
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn disc(&self) -> u64 {
        self.delta() * self.level
    }

    pub fn basis(&self) -> Vec<Quat> {
        self.lattice.basis().iter().map(|b| quat_from_slice(b)).collect()
    }

    pub fn contains(&self, x: &Quat) -> bool {
        self.lattice.contains(x)
    }

    /// Integer Gram of `trd(x ȳ)`; `xᵀGx = 2·nrd(x)`.
    pub fn norm_gram(&self) -> IntMatrix {
        scaled_norm_gram(&self.algebra, &self.lattice, &Rational::one()).expect("orders have integral norm forms")
    }

    /// `#O^× / {±1}`.
    pub fn unit_order(&self) -> Result<u64> {
        let en = Enumerator::new(&self.norm_gram())?;
        let mut n = 0u64;
        en.for_each(2, false, |_, v| n += (v == 2) as u64)?;
        Ok(n / 2)
    }

    /// All units, in the `(1, i, j, k)` frame.
    pub fn units(&self) -> Result<Vec<Quat>> {
        let en = Enumerator::new(&self.norm_gram())?;
        let basis = self.lattice.basis();
        let mut out = Vec::new();
        en.for_each(2, true, |x, v| {
            if v == 2 {
                let mut q: Quat = [int(0), int(0), int(0), int(0)];
                for (b, &c) in basis.iter().zip(x) {
                    for k in 0..4 {
                        q[k] += &b[k] * int(c);
                    }
                }
                out.push(q);
            }
        })?;
        Ok(out)
    }

    /// A nonzero element of `O` that is nilpotent modulo `ℓO`, for `ℓ ∤ Δ`.
    /// The search order is fixed, so the result depends only on `O` and `ℓ`.
    pub fn nilpotent_mod(&self, l: u64) -> Result<Quat> {
        let basis = self.lattice.basis();
        let lb = BigInt::from(l);
        for c in coords_iter(l) {
            let y = combo(&basis, &c);
            let t = QuatAlgebra::trd(&y).to_integer();
            let n = self.algebra.nrd(&y).to_integer();
            if t.mod_floor(&lb).is_zero() && n.mod_floor(&lb).is_zero() {
                return Ok(y);
            }
        }
        Err(consistency_err!("no nilpotent element modulo {l}"))
    }

    /// Right ideal `εO + ℓO` of norm `ℓ` attached to [`Self::nilpotent_mod`].
    pub fn standard_ideal(&self, l: u64) -> Result<QLattice> {
        let eps = self.nilpotent_mod(l)?;
        let eo = left_mul(&self.algebra, &eps, &self.lattice);
        Ok(eo.sum(&self.lattice.scale(&int(l as i64))))
    }

    /// Left order `J J̄ / nr(J)` of a lattice `J` with right order `self`.
    pub fn left_order_of(&self, j: &QLattice) -> Result<QLattice> {
        let n = ideal_norm(self, j)?;
        let p = lattice_product(&self.algebra, j, &lattice_conj(j));
        Ok(p.scale(&n.recip()))
    }
}

/// `nr(I) = √[O : I]` for a lattice commensurable with `O`.
pub fn ideal_norm(o: &QuatOrder, i: &QLattice) -> Result<Rational> {
    let r = i.covolume() / o.lattice.covolume();
    let (n, d) = (r.numer(), r.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    if &(&sn * &sn) != n || &(&sd * &sd) != d {
        return Err(consistency_err!("index {r} is not a square"));
    }
    Ok(Rational::new(sn, sd))
}

/// A maximal order of `B`, by saturating `Z⟨1, i, j, k⟩` one prime at a time.
pub fn maximal_order(alg: &QuatAlgebra) -> Result<QuatOrder> {
    let (a, b) = (alg.a(), alg.b());
    let gens: Vec<Vec<Rational>> = (0..4)
        .map(|i| (0..4).map(|j| int((i == j) as i64)).collect())
        .collect();
    let mut cur = QLattice::from_rows(4, &gens);
    let delta = alg.disc();
    let mut d = 4 * (a as i128 * b as i128).unsigned_abs() as u64;
    'outer: while d != delta {
        for q in arith::prime_divisors(d / delta) {
            let qb = BigInt::from(q);
            let q2 = &qb * &qb;
            let basis = cur.basis();
            for c in coords_iter(q) {
                let y = combo(&basis, &c);
                let t = QuatAlgebra::trd(&y).to_integer();
                let n = alg.nrd(&y).to_integer();
                if !t.mod_floor(&qb).is_zero() || !n.mod_floor(&q2).is_zero() {
                    continue;
                }
                let yq: Vec<Rational> = y.iter().map(|x| x / int(q as i64)).collect();
                let cand = cur.sum(&QLattice::from_rows(4, &[yq]));
                if let Some(next) = ring_closure(alg, &cand, delta) {
                    let nd = lattice_disc(alg, &next).and_then(|x| x.to_u64()).unwrap();
                    if nd < d {
                        cur = next;
                        d = nd;
                        continue 'outer;
                    }
                }
            }
        }
        return Err(consistency_err!("saturation stalled at discriminant {d} (target {delta})"));
    }
    QuatOrder::from_lattice(alg.clone(), cur, 1)
}

/// The Eichler order `O ∩ O_L(J_ℓ)` over all `ℓ | N`, with `J_ℓ` from
/// [`QuatOrder::standard_ideal`].
pub fn eichler_order(o: &QuatOrder, level: u64) -> Result<QuatOrder> {
    if o.level != 1 {
        return Err(input_err!("eichler_order expects a maximal order"));
    }
    if level == 0 || !arith::is_squarefree(level) {
        return Err(input_err!("level {level} is not a positive squarefree integer"));
    }
    if arith::gcd_u64(level, o.delta()) != 1 {
        return Err(input_err!("level {level} is not coprime to the discriminant {}", o.delta()));
    }
    let mut e = o.lattice.clone();
    for l in arith::prime_divisors(level) {
        let j = o.standard_ideal(l)?;
        let left = o.left_order_of(&j)?;
        e = e.intersect(&left);
    }
    QuatOrder::from_lattice(o.algebra.clone(), e, level)
}

/// Convenience: the Eichler order of level `N` in the algebra ramified at the
/// primes of `delta`.
pub fn eichler_order_for(delta: u64, level: u64) -> Result<QuatOrder> {
    if delta < 2 || !arith::is_squarefree(delta) {
        return Err(input_err!("discriminant {delta} is not a squarefree integer > 1"));
    }
    let alg = QuatAlgebra::with_ramification(&arith::prime_divisors(delta))?;
    eichler_order(&maximal_order(&alg)?, level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn hurwitz_order() {
        let alg = QuatAlgebra::with_ramification(&[2]).unwrap();
        let o = maximal_order(&alg).unwrap();
        assert_eq!(o.disc(), 2);
        assert!(o.contains(&[rat(1, 2), rat(1, 2), rat(1, 2), rat(1, 2)]));
        assert_eq!(o.unit_order().unwrap(), 12);
        assert_eq!(o.units().unwrap().len(), 24);
    }

    #[test]
    fn maximal_orders_small_primes() {
        for p in [3u64, 5, 7, 11, 13, 17, 19, 23, 37, 101, 197, 199] {
            let alg = QuatAlgebra::with_ramification(&[p]).unwrap();
            let o = maximal_order(&alg).unwrap();
            assert_eq!(o.disc(), p);
        }
        for ram in [vec![2u64, 3, 5], vec![2, 3, 7], vec![3, 5, 7]] {
            let alg = QuatAlgebra::with_ramification(&ram).unwrap();
            assert_eq!(maximal_order(&alg).unwrap().disc(), ram.iter().product::<u64>());
        }
    }

    #[test]
    fn eichler_orders() {
        let e = eichler_order_for(11, 7).unwrap();
        assert_eq!(e.disc(), 77);
        let e = eichler_order_for(2, 3).unwrap();
        assert_eq!(e.disc(), 6);
        let o = eichler_order_for(11, 1).unwrap();
        let e35 = eichler_order_for(11, 35).unwrap();
        let e5 = eichler_order_for(11, 5).unwrap();
        assert_eq!(e35.disc(), 385);
        assert!(o.lattice().contains_lattice(e5.lattice()));
        assert!(e5.lattice().contains_lattice(e35.lattice()));
        assert!(eichler_order_for(11, 11).is_err());
        assert!(eichler_order_for(11, 4).is_err());
    }

    #[test]
    fn unit_order_conjugation_invariant() {
        let o = eichler_order_for(3, 1).unwrap();
        let alg = o.algebra().clone();
        let w = o.unit_order().unwrap();
        for g in [[int(1), int(1), int(0), int(0)], [int(2), int(0), int(1), int(1)], [int(1), int(-1), int(2), int(3)]] {
            let gi = alg.inverse(&g);
            let gens: Vec<Vec<Rational>> =
                o.basis().iter().map(|x| alg.mul(&alg.mul(&gi, x), &g).to_vec()).collect();
            let c = QuatOrder::from_lattice(alg.clone(), QLattice::from_rows(4, &gens), 1).unwrap();
            assert_eq!(c.unit_order().unwrap(), w);
        }
    }
}
