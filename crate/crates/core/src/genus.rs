//! Genus and spinor genus of ternary lattices via Kneser neighbors.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::json;

use crate::arith;
use crate::error::{consistency_err, input_err, Result};
use crate::grosslattice::{primitive_from_theta, theta_coeffs, TernaryLattice};
use crate::lattice::reduce::{checked_det, upper_triangle};
use crate::lattice::{canonical_form, lll_gram, QLattice};
use crate::rational::{int, to_pq, Rational};

/// One isometry class in a genus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenusClass {
    pub lattice: TernaryLattice,
    pub automorphs: u64,
}

/// Classes of a genus, sorted by canonical Gram, with the spinor partition
/// at the first driving prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenusSet {
    pub det: Rational,
    pub classes: Vec<GenusClass>,
    pub partition: Vec<Vec<usize>>,
    /// The two primes whose neighbors closed the genus.
    pub primes: (u64, u64),
}

/// `#Aut(L)`.
pub fn automorph_count(l: &TernaryLattice) -> Result<u64> {
    Ok(canonical_form(&l.gram)?.automorphisms)
}

/// Canonical representative of the isometry class of `l`.
pub fn canonical(l: &TernaryLattice) -> Result<(TernaryLattice, u64)> {
    let cf = canonical_form(&l.gram)?;
    Ok((TernaryLattice { gram: cf.gram, provenance: None }, cf.automorphisms))
}

fn det_b(l: &TernaryLattice) -> i128 {
    let m: Vec<Vec<i128>> = l.gram.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    checked_det(&m).expect("3×3 determinant fits")
}

/// Whether `p` is an admissible neighbor prime: odd and prime to `det`.
pub fn admissible(l: &TernaryLattice, p: u64) -> bool {
    arith::is_prime(p) && p != 2 && det_b(l) % p as i128 != 0
}

/// The `k` smallest admissible primes.
pub fn admissible_primes(l: &TernaryLattice, k: usize) -> Vec<u64> {
    (3..).filter(|&p| admissible(l, p)).take(k).collect()
}

fn inv_mod(a: i128, p: i128) -> i128 {
    let (mut r, mut b, mut e) = (1i128, a.rem_euclid(p), p - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn bvec(g: &[Vec<i64>], x: &[i128; 3]) -> [i128; 3] {
    let mut out = [0i128; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i] += g[i][j] as i128 * x[j];
        }
    }
    out
}

/// All `p`-neighbors `M = L_x + Z·x/p`, one per isotropic line of `Q mod p`,
/// with `L_x = {v : B(x, v) ≡ 0 (mod p)}`.
pub fn p_neighbors(l: &TernaryLattice, p: u64) -> Result<Vec<TernaryLattice>> {
    if !admissible(l, p) {
        return Err(input_err!("neighbor prime {p} must be an odd prime not dividing the determinant"));
    }
    let pi = p as i128;
    let g = &l.gram;
    let mut points: Vec<[i128; 3]> = Vec::new();
    for a in 0..pi {
        for b in 0..pi {
            points.push([1, a, b]);
        }
    }
    for b in 0..pi {
        points.push([0, 1, b]);
    }
    points.push([0, 0, 1]);
    let mut out = Vec::new();
    for mut x in points {
        let q = |x: &[i128; 3]| -> i128 {
            let bx = bvec(g, x);
            (x[0] * bx[0] + x[1] * bx[1] + x[2] * bx[2]) / 2
        };
        if q(&x).rem_euclid(pi) != 0 {
            continue;
        }
        let bx = bvec(g, &x);
        let k = (0..3).find(|&k| bx[k].rem_euclid(pi) != 0).ok_or_else(|| consistency_err!("degenerate form mod {p}"))?;
        let t = (-(q(&x) / pi) * inv_mod(bx[k], pi)).rem_euclid(pi);
        x[k] += pi * t;
        if q(&x).rem_euclid(pi * pi) != 0 {
            return Err(consistency_err!("isotropic lift failed at {p}"));
        }
        let bx = bvec(g, &x);
        let ik = inv_mod(bx[k], pi);
        let mut gens: Vec<Vec<Rational>> = Vec::new();
        for i in 0..3 {
            let mut v = vec![int(0), int(0), int(0)];
            if i == k {
                v[k] = int(p as i64);
            } else {
                let s = (bx[i] * ik).rem_euclid(pi);
                v[i] = int(1);
                v[k] = int(-(s as i64));
            }
            gens.push(v);
        }
        gens.push(x.iter().map(|&c| Rational::new(BigInt::from(c), BigInt::from(p))).collect());
        let m = QLattice::from_rows(3, &gens);
        let basis = m.basis();
        let mut gm = vec![vec![0i64; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                let mut s = Rational::zero();
                for a in 0..3 {
                    for b in 0..3 {
                        s += &basis[i][a] * int(g[a][b]) * &basis[j][b];
                    }
                }
                if !s.is_integer() {
                    return Err(consistency_err!("neighbor is not integral"));
                }
                gm[i][j] = i64::try_from(s.to_integer()).map_err(|_| consistency_err!("neighbor Gram overflow"))?;
            }
        }
        let (red, _) = lll_gram(&gm)?;
        out.push(TernaryLattice::new(red)?);
    }
    Ok(out)
}

/// Hasse–Witt invariants `c_p` of the Q-form at every `p | 2·det`, from the
/// diagonalization by leading minors.
pub fn hasse_invariants(l: &TernaryLattice) -> BTreeMap<u64, i32> {
    let g = &l.gram;
    let minor = |k: usize| -> i128 {
        let m: Vec<Vec<i128>> = (0..k).map(|i| (0..k).map(|j| g[i][j] as i128).collect()).collect();
        checked_det(&m).expect("minor fits")
    };
    // Q = B/2 has d_k = D_k(B) / (2 D_{k-1}(B)); as square classes, D_k·2·D_{k-1}.
    let d: Vec<BigInt> = (1..=3).map(|k| BigInt::from(minor(k)) * BigInt::from(2 * minor(k - 1))).collect();
    let det = det_b(l).unsigned_abs() as u64;
    let mut out = BTreeMap::new();
    for p in arith::prime_divisors(2 * det) {
        let mut c = 1;
        for i in 0..3 {
            for j in i + 1..3 {
                c *= arith::hilbert_symbol(&d[i], &d[j], p);
            }
        }
        out.insert(p, c);
    }
    out
}

struct Closure {
    classes: Vec<(TernaryLattice, u64)>,
    index: HashMap<Vec<i64>, usize>,
    /// Neighbor class indices per class, per prime.
    edges: HashMap<u64, Vec<Vec<usize>>>,
}

impl Closure {
    fn intern(&mut self, l: &TernaryLattice) -> Result<(usize, bool)> {
        let (c, w) = canonical(l)?;
        let key = c.gram6();
        if let Some(&i) = self.index.get(&key) {
            return Ok((i, false));
        }
        let i = self.classes.len();
        self.index.insert(key, i);
        self.classes.push((c, w));
        Ok((i, true))
    }
}

fn components(n: usize, adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut comp = vec![usize::MAX; n];
    let mut out = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut block = vec![s];
        comp[s] = id;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = id;
                    block.push(v);
                    q.push_back(v);
                }
            }
        }
        block.sort_unstable();
        out.push(block);
    }
    out
}

/// Closure of `{L}` under neighbors at the two smallest admissible primes.
pub fn genus_enumerate(l: &TernaryLattice) -> Result<GenusSet> {
    let ps = admissible_primes(l, 2);
    genus_enumerate_with(l, ps[0], ps[1])
}

/// As [`genus_enumerate`], with explicit driving primes.
pub fn genus_enumerate_with(l: &TernaryLattice, p1: u64, p2: u64) -> Result<GenusSet> {
    if p1 == p2 || !admissible(l, p1) || !admissible(l, p2) {
        return Err(input_err!("need two distinct admissible primes, got {p1} and {p2}"));
    }
    let mut cl = Closure { classes: Vec::new(), index: HashMap::new(), edges: HashMap::new() };
    cl.intern(l)?;
    let mut head = 0;
    while head < cl.classes.len() {
        let cur = cl.classes[head].0.clone();
        for p in [p1, p2] {
            let mut nb = Vec::new();
            for m in p_neighbors(&cur, p)? {
                nb.push(cl.intern(&m)?.0);
            }
            let e = cl.edges.entry(p).or_default();
            e.resize(head + 1, Vec::new());
            e[head] = nb;
        }
        head += 1;
    }
    let n = cl.classes.len();
    let hasse = hasse_invariants(&cl.classes[0].0);
    for (c, _) in &cl.classes {
        if hasse_invariants(c) != hasse || det_b(c) != det_b(l) {
            return Err(consistency_err!("neighbor closure left the genus"));
        }
    }
    // canonical order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| cl.classes[i].0.gram6());
    let mut pos = vec![0; n];
    for (new, &old) in order.iter().enumerate() {
        pos[old] = new;
    }
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|new| cl.edges[&p1][order[new]].iter().map(|&o| pos[o]).collect())
        .collect();
    let mut partition = components(n, &adj);
    partition.sort();
    let classes = order
        .iter()
        .map(|&i| GenusClass { lattice: cl.classes[i].0.clone(), automorphs: cl.classes[i].1 })
        .collect();
    Ok(GenusSet { det: l.det(), classes, partition, primes: (p1, p2) })
}

impl GenusSet {
    /// Index of the class isometric to `l`, if any.
    pub fn locate(&self, l: &TernaryLattice) -> Result<Option<usize>> {
        let key = canonical(l)?.0.gram6();
        Ok(self.classes.iter().position(|c| c.lattice.gram6() == key))
    }

    /// `Σ 1/#Aut`.
    pub fn mass(&self) -> Rational {
        self.classes
            .iter()
            .fold(Rational::zero(), |acc, c| acc + Rational::new(BigInt::one(), BigInt::from(c.automorphs)))
    }

    /// `{det, classes: [{gram6, w}], spinor_partition}`.
    pub fn to_json(&self) -> serde_json::Value {
        let det = if self.det.is_integer() {
            json!(self.det.to_integer().to_string().parse::<i128>().unwrap_or(0))
        } else {
            json!(to_pq(&self.det))
        };
        json!({
            "det": det,
            "classes": self.classes.iter().map(|c| json!({
                "gram6": upper_triangle(&c.lattice.gram),
                "w": c.automorphs,
            })).collect::<Vec<_>>(),
            "spinor_partition": self.partition,
        })
    }
}

/// Connected components of the `p`-neighbor graph on the classes of `g`.
pub fn spinor_partition(g: &GenusSet, p: u64) -> Result<Vec<Vec<usize>>> {
    let n = g.classes.len();
    let mut adj = vec![Vec::new(); n];
    for (i, c) in g.classes.iter().enumerate() {
        for m in p_neighbors(&c.lattice, p)? {
            let j = g.locate(&m)?.ok_or_else(|| consistency_err!("{p}-neighbor outside the enumerated genus"))?;
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    let mut parts = components(n, &adj);
    parts.sort();
    Ok(parts)
}

/// `(Σ r(Q, m)/w_Q) / (Σ 1/w_Q)` over `subset`, for every `m ≤ bound`.
pub fn mass_averaged_theta(g: &GenusSet, subset: &[usize], bound: u64, primitive: bool) -> Result<Vec<Rational>> {
    if subset.is_empty() {
        return Err(input_err!("subset must be nonempty"));
    }
    let mut num = vec![Rational::zero(); bound as usize + 1];
    let mut den = Rational::zero();
    for &i in subset {
        let c = g.classes.get(i).ok_or_else(|| input_err!("class index {i} out of range"))?;
        let w = Rational::new(BigInt::one(), BigInt::from(c.automorphs));
        let mut r = theta_coeffs(&c.lattice, bound.max(1))?;
        if primitive {
            r = primitive_from_theta(&r);
        }
        for (acc, &x) in num.iter_mut().zip(&r) {
            *acc += &w * int(x as i64);
        }
        den += w;
    }
    Ok(num.into_iter().map(|x| x / &den).collect())
}

/// Single-`m` version of [`mass_averaged_theta`].
pub fn mass_averaged_rep(g: &GenusSet, subset: &[usize], m: u64, primitive: bool) -> Result<Rational> {
    if primitive && m == 0 {
        return Err(input_err!("primitive representations need m ≥ 1"));
    }
    Ok(mass_averaged_theta(g, subset, m, primitive)?.swap_remove(m as usize))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grosslattice::gross_lattice;
    use crate::quatarith::{eichler_order_for, right_ideal_class_set};

    fn diag(v: [i64; 3]) -> TernaryLattice {
        TernaryLattice::new((0..3).map(|i| (0..3).map(|j| if i == j { 2 * v[i] } else { 0 }).collect()).collect()).unwrap()
    }

    #[test]
    fn automorphs() {
        assert_eq!(automorph_count(&diag([1, 1, 1])).unwrap(), 48);
        assert_eq!(automorph_count(&diag([1, 2, 3])).unwrap(), 8);
    }

    fn isotropic_lines(l: &TernaryLattice, p: i64) -> usize {
        let mut n = 0;
        for a in 0..p {
            for b in 0..p {
                for c in 0..p {
                    if (a, b, c) != (0, 0, 0) && l.q(&[a, b, c]).rem_euclid(p) == 0 {
                        n += 1;
                    }
                }
            }
        }
        n / (p as usize - 1)
    }

    #[test]
    fn neighbors_preserve_det_and_are_symmetric() {
        let s = right_ideal_class_set(&eichler_order_for(11, 1).unwrap()).unwrap();
        let l = gross_lattice(&s.classes[0].left_order).unwrap();
        let nb = p_neighbors(&l, 3).unwrap();
        assert_eq!(nb.len(), isotropic_lines(&l, 3));
        let key = canonical(&l).unwrap().0.gram6();
        for m in &nb {
            assert_eq!(m.det(), l.det());
            let back = p_neighbors(m, 3).unwrap();
            assert!(back.iter().any(|b| canonical(b).unwrap().0.gram6() == key));
        }
        assert!(p_neighbors(&l, 11).is_err());
        assert!(p_neighbors(&l, 2).is_err());
    }

    #[test]
    fn small_genera() {
        let l2 = gross_lattice(&eichler_order_for(2, 1).unwrap()).unwrap();
        let g = genus_enumerate(&l2).unwrap();
        assert_eq!(g.classes.len(), 1);
        assert_eq!(g.partition, vec![vec![0]]);
        let th = theta_coeffs(&l2, 30).unwrap();
        let avg = mass_averaged_theta(&g, &[0], 30, false).unwrap();
        assert!(th.iter().zip(&avg).all(|(&a, b)| int(a as i64) == *b));

        let s = right_ideal_class_set(&eichler_order_for(11, 1).unwrap()).unwrap();
        let l = gross_lattice(&s.classes[0].left_order).unwrap();
        let g = genus_enumerate(&l).unwrap();
        assert_eq!(g.classes.len(), 2);
        for c in &s.classes {
            assert!(g.locate(&gross_lattice(&c.left_order).unwrap()).unwrap().is_some());
        }
        let alt = genus_enumerate_with(&l, 5, 7).unwrap();
        assert_eq!(alt.classes, g.classes);
        assert_eq!(spinor_partition(&g, 3).unwrap(), spinor_partition(&g, 7).unwrap());
        // weighted mean lies strictly between differing class values
        let r0 = theta_coeffs(&g.classes[0].lattice, 60).unwrap();
        let r1 = theta_coeffs(&g.classes[1].lattice, 60).unwrap();
        let avg = mass_averaged_theta(&g, &[0, 1], 60, false).unwrap();
        for m in 0..=60 {
            let (a, b) = (int(r0[m] as i64), int(r1[m] as i64));
            if a != b {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                assert!(lo < avg[m] && avg[m] < hi);
            }
        }
    }

    #[test]
    fn hasse_invariants_diagonal() {
        // Π_{i<j} (dᵢ, dⱼ)_p: trivial for 1,1,1; (3,3)_2 = (3,3)_3 = −1.
        let h = hasse_invariants(&diag([1, 1, 1]));
        assert_eq!(h.get(&2), Some(&1));
        let h = hasse_invariants(&diag([3, 3, 1]));
        assert_eq!(h.get(&2), Some(&-1));
        assert_eq!(h.get(&3), Some(&-1));
    }

    #[test]
    fn json_shape() {
        let l2 = gross_lattice(&eichler_order_for(2, 1).unwrap()).unwrap();
        let g = genus_enumerate(&l2).unwrap();
        let v = g.to_json();
        assert_eq!(v["det"], json!(16));
        assert_eq!(v["classes"][0]["gram6"].as_array().unwrap().len(), 6);
        assert_eq!(v["spinor_partition"], json!([[0]]));
    }
}
