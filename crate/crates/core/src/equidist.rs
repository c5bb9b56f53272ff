//! Optimal-embedding counts, reduction measures of CM orbits, canonical
//! measures and the convergence experiments.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith;
use crate::error::{consistency_err, input_err, Result};
use crate::genus::{mass_averaged_theta, GenusSet};
use crate::grosslattice::{gross_lattice, primitive_from_theta, theta_coeffs, TernaryLattice};
use crate::lattice::Enumerator;
use crate::quadorders::{self, QuadOrder, ReducedFormCounter};
use crate::quatarith::{IdealClassSet, Quat, QuatAlgebra, QuatOrder};
use crate::rational::{int, to_pq, to_sig_decimal, Rational};

/// Finitely supported measure with exact weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedMeasure {
    pub labels: Vec<String>,
    pub weights: Vec<Rational>,
    /// Set when the weights do not sum to 1 (or are all zero).
    pub diagnostic: Option<String>,
}

impl WeightedMeasure {
    /// Weights taken as given; a diagnostic is attached if they do not sum to 1.
    pub fn new(labels: Vec<String>, weights: Vec<Rational>) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(input_err!("{} labels for {} weights", labels.len(), weights.len()));
        }
        if weights.iter().any(|w| w.is_negative()) {
            return Err(input_err!("measure weights must be nonnegative"));
        }
        let total = weights.iter().fold(Rational::zero(), |a, w| a + w);
        let diagnostic = if total.is_zero() {
            Some("empty measure: all weights are zero".to_string())
        } else if !total.is_one() {
            Some(format!("total mass {} instead of 1", to_pq(&total)))
        } else {
            None
        };
        Ok(WeightedMeasure { labels, weights, diagnostic })
    }

    /// Weights proportional to `raw`, normalized to total 1.
    pub fn normalized(labels: Vec<String>, raw: Vec<Rational>) -> Result<Self> {
        let total = raw.iter().fold(Rational::zero(), |a, w| a + w);
        if total.is_zero() {
            return Self::new(labels, raw);
        }
        Self::new(labels, raw.into_iter().map(|w| w / &total).collect())
    }

    pub fn total(&self) -> Rational {
        self.weights.iter().fold(Rational::zero(), |a, w| a + w)
    }

    pub fn is_probability(&self) -> bool {
        self.total().is_one()
    }
}

fn class_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

/// `(1/2) Σ |μ₁(i) − μ₂(i)|`.
pub fn tv_distance(a: &WeightedMeasure, b: &WeightedMeasure) -> Result<Rational> {
    if a.labels != b.labels {
        return Err(input_err!("measures have different supports"));
    }
    let s = a.weights.iter().zip(&b.weights).fold(Rational::zero(), |acc, (x, y)| acc + (x - y).abs());
    Ok(s / int(2))
}

/// `μ^⋄(i) ∝ 1/w_i`.
pub fn mu_canonical_from(unit_orders: &[u64]) -> Result<WeightedMeasure> {
    if unit_orders.is_empty() {
        return Err(input_err!("canonical measure needs at least one class"));
    }
    let raw = unit_orders.iter().map(|&w| Rational::new(BigInt::one(), BigInt::from(w))).collect();
    WeightedMeasure::normalized(class_labels(unit_orders.len()), raw)
}

pub fn mu_canonical(s: &IdealClassSet) -> Result<WeightedMeasure> {
    mu_canonical_from(&s.unit_orders())
}

/// Per-class optimal-embedding counts `h(O_{D,c}, R_i)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EmbeddingCount {
    pub d: i64,
    pub c: u64,
    pub counts: Vec<u64>,
    pub total: u64,
    /// `h(O_{D,c})`.
    pub class_number: u64,
}

/// `count_i = r*(Q_i, |D|c²) · u_{D,c} / #R_i^×` from primitive counts
/// `prim[i]` at `|D|c²`; `#R_i^× = 2 w_i`.
pub fn embedding_counts_from(prim: &[u64], unit_orders: &[u64], order: QuadOrder, h: u64) -> Result<EmbeddingCount> {
    let u = order.unit_count();
    let mut counts = Vec::with_capacity(prim.len());
    for (&r, &w) in prim.iter().zip(unit_orders) {
        let num = r * u;
        if num % (2 * w) != 0 {
            return Err(consistency_err!(
                "r* = {r} for D={}, c={} gives non-integral count {num}/{}",
                order.fund_disc(),
                order.conductor(),
                2 * w
            ));
        }
        counts.push(num / (2 * w));
    }
    let total = counts.iter().sum();
    Ok(EmbeddingCount { d: order.fund_disc(), c: order.conductor(), counts, total, class_number: h })
}

/// Embedding counts into the left orders of a class set via primitive
/// representations by their Gross lattices.
pub fn embedding_number(s: &IdealClassSet, gross: &[TernaryLattice], d: i64, c: u64) -> Result<EmbeddingCount> {
    let order = QuadOrder::new(d, c)?;
    if gross.len() != s.len() {
        return Err(input_err!("{} Gross lattices for {} classes", gross.len(), s.len()));
    }
    let m = order.abs_disc();
    let prim = gross
        .iter()
        .map(|g| crate::grosslattice::primitive_rep_number(g, m))
        .collect::<Result<Vec<_>>>()?;
    embedding_counts_from(&prim, &s.unit_orders(), order, order.class_number()?)
}

/// Optimal embeddings of `O_{D,c}` into `R`, counted directly: solve for the
/// image of the standard generator, test optimality, and count orbits under
/// conjugation by `R^×`.
pub fn embedding_count_bruteforce(r: &QuatOrder, d: i64, c: u64) -> Result<u64> {
    let order = QuadOrder::new(d, c)?;
    let disc = order.disc();
    let alg = r.algebra();
    // ω = (s + √disc)/2 with s ∈ {0, 1}, s ≡ disc (mod 4)
    let s = disc.rem_euclid(4);
    let (t0, n0) = (s, (s * s - disc) / 4);
    let basis = r.basis();
    let en = Enumerator::new(&r.norm_gram())?;
    let mut sols: Vec<Quat> = Vec::new();
    let mut err = None;
    en.for_each(2 * n0, true, |x, v| {
        if v != 2 * n0 || err.is_some() {
            return;
        }
        let q = combine(&basis, x);
        if QuatAlgebra::trd(&q) != int(t0) {
            return;
        }
        // √disc ↦ 2q − t0; a larger order O_{disc/f²} embeds iff its generator lies in R
        let root: Quat = [int(2) * &q[0] - int(t0), int(2) * &q[1], int(2) * &q[2], int(2) * &q[3]];
        for f in arith::prime_divisors(c) {
            let d2 = disc / (f * f) as i64;
            let s2 = d2.rem_euclid(4);
            let fr = int(f as i64);
            let w2: Quat = [
                (&root[0] / &fr + int(s2)) / int(2),
                &root[1] / &fr / int(2),
                &root[2] / &fr / int(2),
                &root[3] / &fr / int(2),
            ];
            if r.contains(&w2) {
                return;
            }
        }
        sols.push(q);
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    let units = r.units()?;
    let index: HashMap<Quat, usize> = sols.iter().cloned().enumerate().map(|(i, q)| (q, i)).collect();
    let mut seen = vec![false; sols.len()];
    let mut orbits = 0u64;
    for i in 0..sols.len() {
        if seen[i] {
            continue;
        }
        orbits += 1;
        for e in &units {
            let y = alg.mul(&alg.mul(e, &sols[i]), &alg.inverse(e));
            match index.get(&y) {
                Some(&j) => seen[j] = true,
                None => err = Some(consistency_err!("unit conjugate left the solution set")),
            }
        }
    }
    if let Some(e) = err {
        return Err(e);
    }
    Ok(orbits)
}

fn combine(basis: &[Quat], x: &[i64]) -> Quat {
    let mut q: Quat = [int(0), int(0), int(0), int(0)];
    for (b, &c) in basis.iter().zip(x) {
        if c != 0 {
            for k in 0..4 {
                q[k] += &b[k] * int(c);
            }
        }
    }
    q
}

/// `μ_{D,c}(i) = h_i / (2^{ω(n)+ε} · h(O_{D,c}))`, left unnormalized.
pub fn mu_dc(e: &EmbeddingCount, omega_n: u32, eps: u32) -> Result<WeightedMeasure> {
    if e.class_number == 0 {
        return Err(consistency_err!("class number cannot be zero"));
    }
    let den = BigInt::from(e.class_number) << (omega_n + eps) as usize;
    let weights = e.counts.iter().map(|&h| Rational::new(BigInt::from(h), den.clone())).collect();
    WeightedMeasure::new(class_labels(e.counts.len()), weights)
}

/// Which locus a definite class set of `(Δ, N)` describes at `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Locus {
    /// `p | Δ`, `p ∤ N`: supersingular points of a curve of level `N` at `p`.
    Supersingular,
    /// `p | N`: superspecial points of the curve ramified at `p`, level `N/p`.
    Superspecial,
}

impl Locus {
    pub fn of(delta: u64, level: u64, p: u64) -> Result<Self> {
        if !arith::is_prime(p) {
            return Err(input_err!("{p} is not prime"));
        }
        if delta % p == 0 && level % p != 0 {
            Ok(Locus::Supersingular)
        } else if level % p == 0 {
            Ok(Locus::Superspecial)
        } else {
            Err(input_err!("reduction prime {p} must divide Δ·N = {}", delta * level))
        }
    }

    pub fn eps(self) -> u32 {
        match self {
            Locus::Supersingular => 1,
            Locus::Superspecial => 0,
        }
    }

    /// Level of the curve whose points the locus carries.
    pub fn curve_level(self, level: u64, p: u64) -> u64 {
        match self {
            Locus::Supersingular => level,
            Locus::Superspecial => level / p,
        }
    }

    /// Whether `D` reduces into this locus.
    pub fn admits(self, d: i64, p: u64) -> bool {
        let k = arith::kronecker_prime(d, p);
        match self {
            Locus::Supersingular => k != 1,
            Locus::Superspecial => k == 0,
        }
    }
}

/// Per-class data needed by the experiments.
#[derive(Debug, Clone)]
pub struct ClassData {
    pub delta: u64,
    pub level: u64,
    pub unit_orders: Vec<u64>,
    pub gross: Vec<TernaryLattice>,
}

impl ClassData {
    pub fn from_set(s: &IdealClassSet) -> Result<Self> {
        let gross = s.classes.iter().map(|c| gross_lattice(&c.left_order)).collect::<Result<Vec<_>>>()?;
        Ok(ClassData { delta: s.delta(), level: s.level(), unit_orders: s.unit_orders(), gross })
    }

    /// `r*(Q_i, m)` for all classes and `m ≤ bound`.
    pub fn primitive_theta(&self, bound: u64) -> Result<Vec<Vec<u64>>> {
        self.gross
            .par_iter()
            .map(|g| Ok(primitive_from_theta(&theta_coeffs(g, bound)?)))
            .collect()
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentRow {
    pub d: i64,
    pub c: u64,
    pub absnorm: u64,
    pub measure: WeightedMeasure,
    /// TV distance from the normalized empirical measure to `μ^⋄`.
    pub tv: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Experiment {
    pub delta: u64,
    pub level: u64,
    pub p: u64,
    pub classes: usize,
    pub rows: Vec<ExperimentRow>,
    pub diagnostics: Vec<String>,
}

/// Conductors in `c_range` coprime to `ΔN`, with `D` fundamental,
/// `lo ≤ |D| < hi`, and `D` reducing into the locus at `p`.
pub fn admissible_pairs(delta: u64, level: u64, p: u64, d_range: (u64, u64), c_range: (u64, u64)) -> Result<Vec<(i64, u64)>> {
    let locus = Locus::of(delta, level, p)?;
    let mut out = Vec::new();
    for d in quadorders::fundamental_discriminants(d_range.0, d_range.1) {
        if !locus.admits(d, p) {
            continue;
        }
        for c in c_range.0.max(1)..=c_range.1 {
            if arith::gcd_u64(c, delta * level) == 1 {
                out.push((d, c));
            }
        }
    }
    out.sort_by_key(|&(d, c)| (d.unsigned_abs() * c * c, d.unsigned_abs(), c));
    Ok(out)
}

/// Empirical reduction measures `μ_{D,c}` and their distance to `μ^⋄` for
/// every admissible `(D, c)`; rows sorted by `|D|c²`.
pub fn convergence_experiment(data: &ClassData, p: u64, d_range: (u64, u64), c_range: (u64, u64)) -> Result<Experiment> {
    let locus = Locus::of(data.delta, data.level, p)?;
    let pairs = admissible_pairs(data.delta, data.level, p, d_range, c_range)?;
    let mut diagnostics = Vec::new();
    if pairs.is_empty() {
        diagnostics.push("no admissible (D, c) in range".to_string());
        return Ok(Experiment { delta: data.delta, level: data.level, p, classes: data.gross.len(), rows: vec![], diagnostics });
    }
    let max_norm = pairs.iter().map(|&(d, c)| d.unsigned_abs() * c * c).max().unwrap();
    let max_abs = pairs.iter().map(|&(d, _)| d.unsigned_abs()).max().unwrap();
    let prim = data.primitive_theta(max_norm)?;
    let counter = ReducedFormCounter::new(max_abs);
    let canonical = mu_canonical_from(&data.unit_orders)?;
    let omega = arith::omega(locus.curve_level(data.level, p));
    let rows: Vec<Result<ExperimentRow>> = pairs
        .par_iter()
        .map(|&(d, c)| {
            let order = QuadOrder::new(d, c)?;
            let m = order.abs_disc() as usize;
            let h = quadorders::class_number_formula_with(d, c, counter.class_number(d)?)?;
            let r: Vec<u64> = prim.iter().map(|t| t[m]).collect();
            let e = embedding_counts_from(&r, &data.unit_orders, order, h)?;
            let measure = mu_dc(&e, omega, locus.eps())?;
            let empirical = WeightedMeasure::normalized(measure.labels.clone(), measure.weights.clone())?;
            let tv = if empirical.total().is_zero() { Rational::one() } else { tv_distance(&empirical, &canonical)? };
            Ok(ExperimentRow { d, c, absnorm: order.abs_disc(), measure, tv })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    for r in &rows {
        if let Some(msg) = &r.measure.diagnostic {
            diagnostics.push(format!("D={} c={}: {msg}", r.d, r.c));
        }
    }
    Ok(Experiment { delta: data.delta, level: data.level, p, classes: data.gross.len(), rows, diagnostics })
}

impl Experiment {
    /// `D,c,absnorm,mu_0,…,mu_{h−1},tv` with weights as `p/q` and tv to 12
    /// significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("D,c,absnorm");
        for i in 0..self.classes {
            let _ = write!(s, ",mu_{i}");
        }
        s.push_str(",tv\n");
        for r in &self.rows {
            let _ = write!(s, "{},{},{}", r.d, r.c, r.absnorm);
            for w in &r.measure.weights {
                let _ = write!(s, ",{}", to_pq(w));
            }
            let _ = writeln!(s, ",{}", to_sig_decimal(&r.tv, 12));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "delta": self.delta,
            "level": self.level,
            "p": self.p,
            "rows": self.rows.iter().map(|r| serde_json::json!({
                "D": r.d,
                "c": r.c,
                "absnorm": r.absnorm,
                "weights": r.measure.weights.iter().map(to_pq).collect::<Vec<_>>(),
                "tv": to_sig_decimal(&r.tv, 12),
            })).collect::<Vec<_>>(),
            "diagnostics": self.diagnostics,
        })
    }
}

/// Median of exact rationals (mean of the middle pair for even counts).
pub fn median(v: &[Rational]) -> Option<Rational> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort();
    let n = s.len();
    Some(if n % 2 == 1 { s[n / 2].clone() } else { (&s[n / 2 - 1] + &s[n / 2]) / int(2) })
}

/// Result of a deviation-slope fit for one genus class.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum SlopeFit {
    Slope { exponent: f64, points: usize },
    InsufficientData { points: usize },
    /// The genus has one class, so the deviation vanishes identically.
    Undefined,
}

/// Least-squares exponent of `|r*(Q_i, |D|) − r*(gen, |D|)|` against `|D|`
/// over fundamental `D` in range with nonzero deviation, per genus class.
pub fn deviation_slope(g: &GenusSet, d_range: (u64, u64)) -> Result<Vec<SlopeFit>> {
    if g.classes.len() < 2 {
        return Ok(vec![SlopeFit::Undefined; g.classes.len()]);
    }
    let devs = deviations(g, d_range)?;
    Ok(devs
        .iter()
        .map(|pts| {
            let pts: Vec<(f64, f64)> = pts
                .iter()
                .filter(|(_, v)| !v.is_zero())
                .map(|(d, v)| ((*d as f64).ln(), v.abs().to_f64().unwrap_or(f64::NAN).ln()))
                .collect();
            if pts.len() < 8 {
                return SlopeFit::InsufficientData { points: pts.len() };
            }
            let n = pts.len() as f64;
            let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
            let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
            let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
            let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
            SlopeFit::Slope { exponent: sxy / sxx, points: pts.len() }
        })
        .collect())
}

/// `(|D|, r*(Q_i, |D|) − r*(gen, |D|))` per genus class, over fundamental
/// `D` in range represented by the genus.
pub fn deviations(g: &GenusSet, d_range: (u64, u64)) -> Result<Vec<Vec<(u64, Rational)>>> {
    let bound = d_range.1.saturating_sub(1).max(1);
    let all: Vec<usize> = (0..g.classes.len()).collect();
    let gen = mass_averaged_theta(g, &all, bound, true)?;
    let prim = g
        .classes
        .par_iter()
        .map(|c| Ok(primitive_from_theta(&theta_coeffs(&c.lattice, bound)?)))
        .collect::<Result<Vec<_>>>()?;
    let ds = quadorders::fundamental_discriminants(d_range.0, d_range.1);
    Ok(prim
        .iter()
        .map(|r| {
            ds.iter()
                .map(|d| d.unsigned_abs())
                .filter(|&m| !gen[m as usize].is_zero())
                .map(|m| (m, int(r[m as usize] as i64) - &gen[m as usize]))
                .collect()
        })
        .collect())
}

/// Target measure on the dual-graph vertices of the curve ramified at `p`:
/// two copies of the level-`N` classes in the algebra of discriminant
/// `Δ/p`, weighted by `1/w` and normalized over both copies.
pub fn smooth_locus_measure_from(s: &IdealClassSet) -> Result<WeightedMeasure> {
    let w = s.unit_orders();
    let mut labels = Vec::new();
    let mut raw = Vec::new();
    for side in ["a", "b"] {
        for (i, &wi) in w.iter().enumerate() {
            labels.push(format!("{side}{i}"));
            raw.push(Rational::new(BigInt::one(), BigInt::from(wi)));
        }
    }
    WeightedMeasure::normalized(labels, raw)
}

pub fn smooth_locus_measure(delta: u64, p: u64, level: u64) -> Result<WeightedMeasure> {
    if !arith::is_prime(p) || delta % p != 0 {
        return Err(input_err!("{p} must be a prime dividing Δ = {delta}"));
    }
    let o = crate::quatarith::eichler_order_for(delta / p, level)?;
    smooth_locus_measure_from(&crate::quatarith::right_ideal_class_set(&o)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genus::genus_enumerate;
    use crate::quatarith::{eichler_order_for, right_ideal_class_set};
    use crate::rational::rat;

    fn data(d: u64, n: u64) -> (IdealClassSet, ClassData) {
        let s = right_ideal_class_set(&eichler_order_for(d, n).unwrap()).unwrap();
        let cd = ClassData::from_set(&s).unwrap();
        (s, cd)
    }

    #[test]
    fn tv_examples() {
        let a = WeightedMeasure::new(class_labels(2), vec![rat(3, 5), rat(2, 5)]).unwrap();
        let b = WeightedMeasure::new(class_labels(2), vec![rat(1, 2), rat(1, 2)]).unwrap();
        assert_eq!(tv_distance(&a, &b).unwrap(), rat(1, 10));
        assert_eq!(tv_distance(&a, &a).unwrap(), int(0));
        let p = WeightedMeasure::new(class_labels(2), vec![int(1), int(0)]).unwrap();
        let q = WeightedMeasure::new(class_labels(2), vec![int(0), int(1)]).unwrap();
        assert_eq!(tv_distance(&p, &q).unwrap(), int(1));
        let c = WeightedMeasure::new(class_labels(3), vec![int(1), int(0), int(0)]).unwrap();
        assert!(tv_distance(&a, &c).is_err());
    }

    #[test]
    fn canonical_measure() {
        let (s, _) = data(11, 1);
        let mu = mu_canonical(&s).unwrap();
        let mut pairs: Vec<(u64, Rational)> = s.unit_orders().into_iter().zip(mu.weights.clone()).collect();
        pairs.sort();
        assert_eq!(pairs, vec![(2, rat(3, 5)), (3, rat(2, 5))]);
        let doubled: Vec<u64> = s.unit_orders().iter().map(|w| 2 * w).collect();
        assert_eq!(mu_canonical_from(&doubled).unwrap(), mu);
        assert_eq!(mu_canonical_from(&[7]).unwrap().weights, vec![int(1)]);
    }

    #[test]
    fn embeddings_of_minus_three() {
        let (s, cd) = data(11, 1);
        let e = embedding_number(&s, &cd.gross, -3, 1).unwrap();
        assert_eq!(e.total, 2);
        let brute: Vec<u64> =
            s.classes.iter().map(|c| embedding_count_bruteforce(&c.left_order, -3, 1).unwrap()).collect();
        assert_eq!(brute, e.counts);
        let mu = mu_dc(&e, 0, 1).unwrap();
        assert!(mu.is_probability());
    }

    #[test]
    fn split_discriminants_do_not_embed() {
        let (s, cd) = data(11, 1);
        // (−7/11) = (−8/11)... pick D with kronecker +1 at 11
        for d in quadorders::fundamental_discriminants(3, 200) {
            if arith::kronecker_prime(d, 11) == 1 {
                for c in [1u64, 2, 3] {
                    assert_eq!(embedding_number(&s, &cd.gross, d, c).unwrap().total, 0);
                }
            }
        }
    }

    #[test]
    fn representation_counts_match_bruteforce() {
        for (dl, n) in [(11u64, 1u64), (2, 1), (3, 1)] {
            let (s, cd) = data(dl, n);
            for d in quadorders::fundamental_discriminants(3, 60) {
                for c in [1u64, 2, 3] {
                    if arith::gcd_u64(c, dl * n) != 1 {
                        continue;
                    }
                    let e = embedding_number(&s, &cd.gross, d, c).unwrap();
                    let b: Vec<u64> =
                        s.classes.iter().map(|k| embedding_count_bruteforce(&k.left_order, d, c).unwrap()).collect();
                    assert_eq!(e.counts, b, "Δ={dl} D={d} c={c}");
                }
            }
        }
    }

    #[test]
    fn empty_measure_is_flagged() {
        let e = EmbeddingCount { d: -7, c: 1, counts: vec![0, 0], total: 0, class_number: 1 };
        let mu = mu_dc(&e, 0, 1).unwrap();
        assert!(mu.diagnostic.unwrap().contains("empty"));
        let e2 = EmbeddingCount { counts: vec![2, 4], total: 6, ..e };
        let e4 = EmbeddingCount { counts: vec![4, 8], total: 12, ..e2.clone() };
        let (a, b) = (mu_dc(&e2, 0, 1).unwrap(), mu_dc(&e4, 0, 1).unwrap());
        assert!(a.weights.iter().zip(&b.weights).all(|(x, y)| x * int(2) == *y));
    }

    #[test]
    fn experiment_rows() {
        let (_, cd) = data(11, 1);
        let ex = convergence_experiment(&cd, 11, (3, 200), (1, 1)).unwrap();
        let n = admissible_pairs(11, 1, 11, (3, 200), (1, 1)).unwrap().len();
        assert_eq!(ex.rows.len(), n);
        for r in &ex.rows {
            assert!(r.tv >= int(0) && r.tv <= int(1));
            let k = arith::kronecker_prime(r.d, 11);
            let expect = if k == -1 { int(1) } else { rat(1, 2) };
            assert_eq!(r.measure.total(), expect, "D={}", r.d);
        }
        let csv = ex.to_csv();
        assert!(csv.starts_with("D,c,absnorm,mu_0,mu_1,tv\n"));
        assert!(ex.rows.windows(2).all(|w| w[0].absnorm <= w[1].absnorm));
    }

    #[test]
    fn deviations_cancel_under_mass_weighting() {
        let (s, _) = data(37, 1);
        let g = genus_enumerate(&gross_lattice(&s.classes[0].left_order).unwrap()).unwrap();
        let dev = deviations(&g, (3, 400)).unwrap();
        for k in 0..dev[0].len() {
            let mut acc = Rational::zero();
            for (i, c) in g.classes.iter().enumerate() {
                acc += &dev[i][k].1 / int(c.automorphs as i64);
            }
            assert!(acc.is_zero());
        }
        let single = genus_enumerate(&gross_lattice(&eichler_order_for(2, 1).unwrap()).unwrap()).unwrap();
        assert_eq!(deviation_slope(&single, (3, 100)).unwrap(), vec![SlopeFit::Undefined]);
    }

    #[test]
    fn smooth_locus() {
        let mu = smooth_locus_measure(22, 2, 1).unwrap();
        assert!(mu.is_probability());
        assert_eq!(mu.weights.len(), 4);
        let mut side: Vec<Rational> = mu.weights[..2].iter().map(|w| w * int(2)).collect();
        side.sort();
        assert_eq!(side, vec![rat(2, 5), rat(3, 5)]);
        assert!(smooth_locus_measure(22, 3, 1).is_err());
    }
}
