use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde_json::json;

use super::algebra::{Quat, QuatAlgebra};
use super::order::{ideal_norm, lattice_conj, lattice_product, left_mul, scaled_norm_gram, QuatOrder};
use crate::arith;
use crate::error::{consistency_err, input_err, Result};
use crate::lattice::{canonical_form, lll_gram, Enumerator, IntMatrix, QLattice};
use crate::rational::{int, Rational};

/// One right-ideal class: a representative `I`, its left order `I Ī / nr(I)`
/// and that order's unit count modulo `±1`.
#[derive(Debug, Clone)]
pub struct IdealClass {
    pub ideal: QLattice,
    pub norm: Rational,
    pub left_order: QuatOrder,
    pub unit_order: u64,
    /// Canonical Gram of `trd(x ȳ)/nr(I)` on `I`.
    pub gram: IntMatrix,
    key: Vec<u64>,
}

/// Right-ideal classes of an Eichler order, in canonical order.
#[derive(Debug, Clone)]
pub struct IdealClassSet {
    pub order: QuatOrder,
    pub classes: Vec<IdealClass>,
}

/// `trd(x ȳ)/nr(I)` on the stored basis of `I`.
fn normalized_gram(alg: &QuatAlgebra, i: &QLattice, n: &Rational) -> Result<IntMatrix> {
    scaled_norm_gram(alg, i, n)
}

/// Cheap isometry invariant of the normalized norm form: short-vector counts.
fn invariant(g: &IntMatrix) -> Result<Vec<u64>> {
    Enumerator::new(g)?.norm_counts(8)
}

fn combo(basis: &[Vec<Rational>], c: &[i64]) -> Quat {
    let mut v: Quat = [int(0), int(0), int(0), int(0)];
    for (b, &ci) in basis.iter().zip(c) {
        if ci != 0 {
            let ci = int(ci);
            for k in 0..4 {
                v[k] += &b[k] * &ci;
            }
        }
    }
    v
}

struct Rep {
    ideal: QLattice,
    norm: Rational,
    key: Vec<u64>,
}

struct Search<'a> {
    order: &'a QuatOrder,
    alg: &'a QuatAlgebra,
}

impl Search<'_> {
    /// Replaces `J` by the equivalent ideal `ᾱJ/nr(J)` for a short `α ∈ J`.
    fn shrink(&self, j: &QLattice) -> Result<Rep> {
        let n = ideal_norm(self.order, j)?;
        let g = normalized_gram(self.alg, j, &n)?;
        let (_, u) = lll_gram(&g)?;
        let alpha = combo(&j.basis(), &u[0]);
        let ac = QuatAlgebra::conj(&alpha);
        let ideal = left_mul(self.alg, &ac, j).scale(&n.recip());
        let norm = self.alg.nrd(&alpha) / &n;
        let g = normalized_gram(self.alg, &ideal, &norm)?;
        Ok(Rep { key: invariant(&g)?, ideal, norm })
    }

    /// `I ≅ J` iff `I J̄` has an element of reduced norm `nr(I)·nr(J)`.
    fn isomorphic(&self, a: &Rep, b: &Rep) -> Result<bool> {
        if a.key != b.key {
            return Ok(false);
        }
        let l = lattice_product(self.alg, &a.ideal, &lattice_conj(&b.ideal));
        let n = &a.norm * &b.norm;
        let g = normalized_gram(self.alg, &l, &n)?;
        let mut found = false;
        Enumerator::new(&g)?.for_each(2, false, |_, v| found |= v == 2)?;
        Ok(found)
    }

    /// The `p + 1` right ideals `J ⊂ I` with `nr(J) = p·nr(I)`.
    fn neighbors(&self, rep: &Rep, p: u64) -> Result<Vec<QLattice>> {
        let basis = rep.ideal.basis();
        let pi = rep.ideal.scale(&int(p as i64));
        let pb = BigInt::from(p);
        let mut out: Vec<QLattice> = Vec::new();
        let total = p.pow(4);
        for mut t in 1..total {
            let mut c = [0i64; 4];
            for x in c.iter_mut() {
                *x = (t % p) as i64;
                t /= p;
            }
            let x = combo(&basis, &c);
            if out.iter().any(|j| j.contains(&x)) {
                continue;
            }
            let q = self.alg.nrd(&x) / &rep.norm;
            if !q.is_integer() || !q.to_integer().mod_floor(&pb).is_zero() {
                continue;
            }
            let j = left_mul(self.alg, &x, self.order.lattice()).sum(&pi);
            if j.covolume() != rep.ideal.covolume() * int((p * p) as i64) {
                continue;
            }
            out.push(j);
        }
        if out.len() as u64 != p + 1 {
            return Err(consistency_err!("found {} neighbors at {p}, expected {}", out.len(), p + 1));
        }
        Ok(out)
    }

    fn locate(&self, reps: &[Rep], r: &Rep) -> Result<Option<usize>> {
        for (i, s) in reps.iter().enumerate() {
            if self.isomorphic(s, r)? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }
}

/// Smallest prime not dividing `n`.
pub(crate) fn smallest_coprime_prime(n: u64) -> u64 {
    (2..).find(|&p| arith::is_prime(p) && n % p != 0).unwrap()
}

/// Right-ideal class set of `O`, by breadth-first search over neighbors at
/// the smallest prime not dividing the discriminant.
pub fn right_ideal_class_set(o: &QuatOrder) -> Result<IdealClassSet> {
    right_ideal_class_set_with(o, smallest_coprime_prime(o.disc()))
}

/// As [`right_ideal_class_set`], with an explicit neighbor prime `p ∤ ΔN`.
pub fn right_ideal_class_set_with(o: &QuatOrder, p: u64) -> Result<IdealClassSet> {
    if !arith::is_prime(p) || o.disc() % p == 0 {
        return Err(input_err!("neighbor prime {p} must be a prime not dividing {}", o.disc()));
    }
    let alg = o.algebra();
    let s = Search { order: o, alg };
    let mut reps = vec![s.shrink(o.lattice())?];
    let mut head = 0;
    while head < reps.len() {
        for j in s.neighbors(&reps[head], p)? {
            let r = s.shrink(&j)?;
            if s.locate(&reps, &r)?.is_none() {
                reps.push(r);
            }
        }
        head += 1;
    }
    let mut classes = Vec::with_capacity(reps.len());
    for r in reps {
        let left = QuatOrder::from_lattice(alg.clone(), o.left_order_of(&r.ideal)?, o.level())?;
        let unit_order = left.unit_order()?;
        let gram = canonical_form(&normalized_gram(alg, &r.ideal, &r.norm)?)?.gram;
        classes.push(IdealClass { ideal: r.ideal, norm: r.norm, left_order: left, unit_order, gram, key: r.key });
    }
    let mut idx: Vec<usize> = (0..classes.len()).collect();
    idx.sort_by(|&a, &b| {
        let (x, y) = (&classes[a], &classes[b]);
        crate::lattice::reduce::upper_triangle(&x.gram)
            .cmp(&crate::lattice::reduce::upper_triangle(&y.gram))
            .then(x.unit_order.cmp(&y.unit_order))
            .then(a.cmp(&b))
    });
    let mut slots: Vec<Option<IdealClass>> = classes.into_iter().map(Some).collect();
    let classes = idx.into_iter().map(|i| slots[i].take().unwrap()).collect();
    let set = IdealClassSet { order: o.clone(), classes };
    let m = mass(&set);
    let want = expected_mass(o.delta(), o.level());
    if m != want {
        return Err(consistency_err!(
            "class set of (Δ={}, N={}) has mass {m}, expected {want}",
            o.delta(),
            o.level()
        ));
    }
    Ok(set)
}

/// `φ(Δ)ψ(N)/12`.
pub fn expected_mass(delta: u64, level: u64) -> Rational {
    Rational::new(
        BigInt::from(arith::phi_ramified(delta)) * BigInt::from(arith::psi(level)),
        BigInt::from(12),
    )
}

/// `Σ 1/w` over the classes.
pub fn mass(s: &IdealClassSet) -> Rational {
    s.classes
        .iter()
        .fold(Rational::zero(), |acc, c| acc + Rational::new(BigInt::one(), BigInt::from(c.unit_order)))
}

impl IdealClassSet {
    pub fn delta(&self) -> u64 {
        self.order.delta()
    }

    pub fn level(&self) -> u64 {
        self.order.level()
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn unit_orders(&self) -> Vec<u64> {
        self.classes.iter().map(|c| c.unit_order).collect()
    }

    /// Index of the class of an arbitrary right ideal of `self.order`.
    pub fn class_of(&self, ideal: &QLattice) -> Result<usize> {
        let s = Search { order: &self.order, alg: self.order.algebra() };
        let r = s.shrink(ideal)?;
        for (i, c) in self.classes.iter().enumerate() {
            let rep = Rep { ideal: c.ideal.clone(), norm: c.norm.clone(), key: c.key.clone() };
            if s.isomorphic(&rep, &r)? {
                return Ok(i);
            }
        }
        Err(consistency_err!("ideal matches no class of (Δ={}, N={})", self.delta(), self.level()))
    }

    /// Document `{delta, level, classes: [{gram, unit_order}]}`.
    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "delta": self.delta(),
            "level": self.level(),
            "classes": self.classes.iter().map(|c| json!({
                "gram": crate::lattice::reduce::upper_triangle(&c.gram),
                "unit_order": c.unit_order,
            })).collect::<Vec<_>>(),
        })
    }

    /// Rebuilds a class set from stored ideal bases, re-deriving everything
    /// else and re-checking the mass.
    pub fn from_ideals(order: QuatOrder, ideals: Vec<QLattice>) -> Result<Self> {
        let alg = order.algebra().clone();
        let mut classes = Vec::with_capacity(ideals.len());
        for ideal in ideals {
            let norm = ideal_norm(&order, &ideal)?;
            let g = normalized_gram(&alg, &ideal, &norm)?;
            let key = invariant(&g)?;
            let left = QuatOrder::from_lattice(alg.clone(), order.left_order_of(&ideal)?, order.level())?;
            let unit_order = left.unit_order()?;
            let gram = canonical_form(&g)?.gram;
            classes.push(IdealClass { ideal, norm, left_order: left, unit_order, gram, key });
        }
        let set = IdealClassSet { order, classes };
        if mass(&set) != expected_mass(set.delta(), set.level()) {
            return Err(consistency_err!("stored class set fails the mass identity"));
        }
        Ok(set)
    }
}
