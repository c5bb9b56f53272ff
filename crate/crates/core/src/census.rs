//! Counting layer for Shimura curves: CM divisor classification, genus,
//! class numbers of definite Eichler orders, supersingular and superspecial
//! counts, the dual graph of the bad fiber, and the ratio experiment.

use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::arith;
use crate::equidist::ClassData;
use crate::error::{consistency_err, input_err, Result};
use crate::quadorders::{self, ReducedFormCounter};
use crate::quatarith::{
    eichler_order_for, lattice_product, right_ideal_class_set, IdealClassSet, QuatOrder,
};
use crate::rational::{int, rat, to_pq, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DivisorType {
    Ordinary,
    Supersingular,
    Superspecial,
    SmoothSupersingular,
}

impl DivisorType {
    pub fn as_str(self) -> &'static str {
        match self {
            DivisorType::Ordinary => "ordinary",
            DivisorType::Supersingular => "supersingular",
            DivisorType::Superspecial => "superspecial",
            DivisorType::SmoothSupersingular => "smooth-supersingular",
        }
    }
}

fn check_indefinite(delta: u64, level: u64) -> Result<()> {
    if delta == 0 || !arith::is_squarefree(delta) || arith::omega(delta) % 2 != 0 {
        return Err(input_err!("Δ = {delta} must be squarefree with an even number of prime factors"));
    }
    check_level(delta, level)
}

fn check_definite(delta: u64, level: u64) -> Result<()> {
    if delta < 2 || !arith::is_squarefree(delta) || arith::omega(delta) % 2 != 1 {
        return Err(input_err!("Δ = {delta} must be squarefree with an odd number of prime factors"));
    }
    check_level(delta, level)
}

fn check_level(delta: u64, level: u64) -> Result<()> {
    if level == 0 || !arith::is_squarefree(level) || arith::gcd_u64(delta, level) != 1 {
        return Err(input_err!("level {level} must be squarefree and coprime to Δ = {delta}"));
    }
    Ok(())
}

/// Where CM points by the maximal order of `Q(√D)` reduce at `p`.
pub fn classify_divisor(delta: u64, level: u64, p: u64, d: i64) -> Result<DivisorType> {
    check_indefinite(delta, level)?;
    if !arith::is_prime(p) {
        return Err(input_err!("{p} is not prime"));
    }
    if !quadorders::is_fundamental(d) || d >= 0 {
        return Err(input_err!("{d} is not a negative fundamental discriminant"));
    }
    let k = arith::kronecker_prime(d, p);
    if delta % p == 0 {
        match k {
            0 => Ok(DivisorType::Superspecial),
            -1 => Ok(DivisorType::SmoothSupersingular),
            _ => Err(input_err!("{p} splits in Q(√{d}) but ramifies in the algebra")),
        }
    } else if k == 1 {
        Ok(DivisorType::Ordinary)
    } else {
        Ok(DivisorType::Supersingular)
    }
}

/// Elliptic point counts `(e₂, e₃)`; the same local products serve the
/// definite class-number formula.
fn elliptic_counts(delta: u64, level: u64) -> (i64, i64) {
    let e = |d: i64| -> i64 {
        let ram: i64 = arith::prime_divisors(delta).iter().map(|&p| 1 - arith::kronecker_prime(d, p) as i64).product();
        let lev: i64 = arith::prime_divisors(level).iter().map(|&q| 1 + arith::kronecker_prime(d, q) as i64).product();
        ram * lev
    };
    (e(-4), e(-3))
}

fn volume(delta: u64, level: u64) -> Rational {
    rat((arith::phi_ramified(delta) * arith::psi(level)) as i64, 12)
}

/// Genus of the Shimura curve of discriminant `Δ` and level `N`.
pub fn shimura_genus(delta: u64, level: u64) -> Result<u64> {
    check_indefinite(delta, level)?;
    let (e2, e3) = elliptic_counts(delta, level);
    // modular curves also have cusps
    let cusps = if delta == 1 { 1i64 << arith::omega(level) } else { 0 };
    let g = int(1) + volume(delta, level) - rat(e2, 4) - rat(e3, 3) - rat(cusps, 2);
    if !g.is_integer() || g < int(0) {
        return Err(consistency_err!("genus formula gave {} for Δ={delta}, N={level}", to_pq(&g)));
    }
    Ok(g.to_integer().to_u64().unwrap())
}

/// Class number of a definite Eichler order, by the closed formula.
pub fn eichler_class_number(delta: u64, level: u64) -> Result<u64> {
    check_definite(delta, level)?;
    let (e2, e3) = elliptic_counts(delta, level);
    let h = volume(delta, level) + rat(e2, 4) + rat(e3, 3);
    if !h.is_integer() {
        return Err(consistency_err!("class-number formula gave {} for Δ={delta}, N={level}", to_pq(&h)));
    }
    Ok(h.to_integer().to_u64().unwrap())
}

/// Closed formula checked against enumeration.
pub fn eichler_class_number_checked(delta: u64, level: u64) -> Result<u64> {
    let h = eichler_class_number(delta, level)?;
    let n = right_ideal_class_set(&eichler_order_for(delta, level)?)?.len() as u64;
    if h != n {
        return Err(consistency_err!("formula gives h({delta}, {level}) = {h}, enumeration finds {n}"));
    }
    Ok(h)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Count {
    Value(u64),
    /// The formula's hypotheses do not hold.
    Inapplicable,
}

/// `(p − 1)(g − 1)`, valid for `g ≥ 2`.
pub fn supersingular_count(p: u64, genus: u64) -> Result<Count> {
    if !arith::is_prime(p) {
        return Err(input_err!("{p} is not prime"));
    }
    Ok(if genus < 2 { Count::Inapplicable } else { Count::Value((p - 1) * (genus - 1)) })
}

/// `h(Δ/p, Np)`.
pub fn superspecial_count(delta: u64, p: u64, level: u64) -> Result<u64> {
    check_ssp(delta, p, level)?;
    eichler_class_number(delta / p, level * p)
}

fn check_ssp(delta: u64, p: u64, level: u64) -> Result<()> {
    if !arith::is_prime(p) || delta % p != 0 {
        return Err(input_err!("{p} must be a prime dividing Δ = {delta}"));
    }
    check_indefinite(delta, level)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub class: usize,
    pub unit_order: u64,
    /// Vertex index in family `a` and in family `b`.
    pub ends: (usize, usize),
}

/// Bipartite dual graph of the fiber at `p | Δ`: two copies of the level-`N`
/// class set of `Δ/p` as vertices, the level-`Np` classes as edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DualGraph {
    pub delta: u64,
    pub p: u64,
    pub level: u64,
    /// Unit orders of the vertex classes (same for both families).
    pub vertices: Vec<u64>,
    pub edges: Vec<Edge>,
}

impl DualGraph {
    pub fn vertex_count(&self) -> usize {
        2 * self.vertices.len()
    }

    pub fn components(&self) -> usize {
        let h = self.vertices.len();
        let mut parent: Vec<usize> = (0..2 * h).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.ends.0), find(&mut parent, h + e.ends.1));
            parent[a] = b;
        }
        (0..2 * h).filter(|&x| find(&mut parent, x) == x).count()
    }

    pub fn betti(&self) -> i64 {
        self.edges.len() as i64 - self.vertex_count() as i64 + self.components() as i64
    }

    /// `# dual graph …` header, then one `u v` line per edge with vertices
    /// named `a<i>` and `b<j>`.
    pub fn edge_list(&self) -> String {
        let mut s = format!(
            "# dual graph delta={} p={} level={} families=a,b vertices={} edges={}\n",
            self.delta,
            self.p,
            self.level,
            self.vertex_count(),
            self.edges.len()
        );
        for e in &self.edges {
            let _ = writeln!(s, "a{} b{}", e.ends.0, e.ends.1);
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "delta": self.delta,
            "p": self.p,
            "level": self.level,
            "vertices": {"a": self.vertices, "b": self.vertices},
            "edges": self.edges.iter().map(|e| serde_json::json!({
                "class": e.class, "unit_order": e.unit_order, "ends": [e.ends.0, e.ends.1]
            })).collect::<Vec<_>>(),
            "betti": self.betti(),
        })
    }
}

/// Dual graph from precomputed class sets of `Δ/p` at levels `N` and `Np`.
pub fn dual_graph_from(delta: u64, p: u64, vert: &IdealClassSet, edges: &IdealClassSet) -> Result<DualGraph> {
    let level = vert.level();
    check_ssp(delta, p, level)?;
    if vert.delta() != delta / p || edges.delta() != delta / p || edges.level() != level * p {
        return Err(input_err!("class sets do not match Δ/p = {} and levels {level}, {}", delta / p, level * p));
    }
    let e_n: &QuatOrder = &vert.order;
    let alg = e_n.algebra();
    if !e_n.lattice().contains_lattice(edges.order.lattice()) {
        return Err(consistency_err!("level-{} order is not contained in the level-{level} order", level * p));
    }
    let maximal = eichler_order_for(delta / p, 1)?;
    let j = maximal.standard_ideal(p)?.intersect(e_n.lattice());
    let mut out = Vec::with_capacity(edges.len());
    for (k, c) in edges.classes.iter().enumerate() {
        let a = vert.class_of(&lattice_product(alg, &c.ideal, e_n.lattice()))?;
        let b = vert.class_of(&lattice_product(alg, &c.ideal, &j))?;
        out.push(Edge { class: k, unit_order: c.unit_order, ends: (a, b) });
    }
    Ok(DualGraph { delta, p, level, vertices: vert.unit_orders(), edges: out })
}

/// Dual graph with its Betti number checked against the curve's genus.
pub fn dual_graph(delta: u64, p: u64, level: u64) -> Result<DualGraph> {
    check_ssp(delta, p, level)?;
    let vert = right_ideal_class_set(&eichler_order_for(delta / p, level)?)?;
    let edges = right_ideal_class_set(&eichler_order_for(delta / p, level * p)?)?;
    let g = dual_graph_from(delta, p, &vert, &edges)?;
    let genus = shimura_genus(delta, level)?;
    if g.betti() != genus as i64 {
        return Err(consistency_err!("dual graph at p={p} has b1 = {}, genus is {genus}", g.betti()));
    }
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioRow {
    pub d: i64,
    pub h: u64,
    /// `r*(Q_i, |D|)` per class.
    pub reps: Vec<u64>,
    pub ratios: Vec<Rational>,
}

impl RatioRow {
    pub fn max_ratio(&self) -> Rational {
        self.ratios.iter().max().cloned().unwrap_or_else(Rational::zero)
    }
}

/// `r*(Q_i, |D|) / h(D)` for fundamental `D` with `lo ≤ |D| < hi`, sorted by
/// `|D|`.
pub fn ratio_experiment(data: &ClassData, d_range: (u64, u64)) -> Result<Vec<RatioRow>> {
    let ds = quadorders::fundamental_discriminants(d_range.0, d_range.1);
    let Some(max) = ds.iter().map(|d| d.unsigned_abs()).max() else {
        return Ok(vec![]);
    };
    let prim = data.primitive_theta(max)?;
    let counter = ReducedFormCounter::new(max);
    let mut rows = ds
        .into_iter()
        .map(|d| {
            let h = counter.class_number(d)?;
            let m = d.unsigned_abs() as usize;
            let reps: Vec<u64> = prim.iter().map(|t| t[m]).collect();
            let ratios = reps.iter().map(|&r| Rational::new(BigInt::from(r), BigInt::from(h))).collect();
            Ok(RatioRow { d, h, reps, ratios })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.d.unsigned_abs(), r.d));
    Ok(rows)
}

/// `D,h,r_0,…,ratio_0,…,max_ratio`, rationals as `p/q`.
pub fn ratio_csv(rows: &[RatioRow], classes: usize) -> String {
    let mut s = String::from("D,h");
    for i in 0..classes {
        let _ = write!(s, ",r_{i}");
    }
    for i in 0..classes {
        let _ = write!(s, ",ratio_{i}");
    }
    s.push_str(",max_ratio\n");
    for r in rows {
        let _ = write!(s, "{},{}", r.d, r.h);
        for x in &r.reps {
            let _ = write!(s, ",{x}");
        }
        for x in &r.ratios {
            let _ = write!(s, ",{}", to_pq(x));
        }
        let _ = writeln!(s, ",{}", to_pq(&r.max_ratio()));
    }
    s
}
