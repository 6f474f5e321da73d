//! Torsion subgroups: E(K)_tors with generators, a bound from reductions,
//! and a brute-force oracle over multiquadratic towers of depth <= 2.

use crate::ecurve::{count_points, division_poly, ldivision_poly, psi2_squared, reduce_curve, Curve, Point, ReductionKind};
use crate::error::{Error, Result};
use crate::ffield::{odd_primes_by_norm, ResidueMap};
use crate::field::Field;
use crate::poly::Poly;
use crate::qfield::{factor_u64, is_square_in_k, roots_in_k, roots_in_tower, FieldElem, PrimeKind, QField, RadicalElem};
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};
use std::fmt;

/// `Z/m + Z/n` with `m | n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Shape {
    pub m: u64,
    pub n: u64,
}

impl Shape {
    pub fn new(m: u64, n: u64) -> Result<Shape> {
        if m == 0 || n == 0 || !n.is_multiple_of(m) {
            return Err(Error::OutOfRange(format!("invalid shape ({m},{n})")));
        }
        Ok(Shape { m, n })
    }

    pub const fn cyclic(n: u64) -> Shape {
        Shape { m: 1, n }
    }

    pub const fn trivial() -> Shape {
        Shape { m: 1, n: 1 }
    }

    pub fn order(&self) -> u64 {
        self.m * self.n
    }

    pub fn is_cyclic(&self) -> bool {
        self.m == 1
    }

    /// Whether this group is isomorphic to a subgroup of `other`.
    pub fn embeds_in(&self, other: &Shape) -> bool {
        other.m.is_multiple_of(self.m) && other.n.is_multiple_of(self.n)
    }

    /// The l-primary part.
    pub fn part(&self, l: u64) -> Shape {
        let lp = |mut x: u64| {
            let mut r = 1;
            while x.is_multiple_of(l) {
                x /= l;
                r *= l;
            }
            r
        };
        Shape { m: lp(self.m), n: lp(self.n) }
    }

    pub fn two_part(&self) -> Shape {
        self.part(2)
    }

    pub fn odd_part(&self) -> Shape {
        let t = self.two_part();
        Shape { m: self.m / t.m, n: self.n / t.n }
    }

    /// Direct sum with a group of coprime order.
    pub fn join(&self, other: &Shape) -> Shape {
        debug_assert_eq!(num_integer::gcd(self.order(), other.order()), 1);
        Shape { m: self.m * other.m, n: self.n * other.n }
    }

    /// Invariant factors of an abelian group given as a list of cyclic orders
    /// with at most two factors per prime.
    pub fn from_cyclic(orders: &[u64]) -> Result<Shape> {
        let mut s = Shape::trivial();
        let mut primes: Vec<u64> = orders.iter().flat_map(|&o| factor_u64(o).into_iter().map(|(p, _)| p)).collect();
        primes.sort_unstable();
        primes.dedup();
        for l in primes {
            let mut ex: Vec<u64> = orders.iter().map(|&o| Shape::cyclic(o).part(l).n).filter(|&x| x > 1).collect();
            ex.sort_unstable();
            match ex.as_slice() {
                [n] => s = s.join(&Shape::cyclic(*n)),
                [m, n] => s = s.join(&Shape { m: *m, n: *n }),
                _ => return Err(Error::OutOfRange(format!("{} cyclic {l}-factors", ex.len()))),
            }
        }
        Ok(s)
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.m, self.n) {
            (1, 1) => f.write_str("0"),
            (1, n) => write!(f, "Z/{n}"),
            (m, n) => write!(f, "Z/{m} x Z/{n}"),
        }
    }
}

fn mazur(s: Shape) -> bool {
    (s.m == 1 && (s.n <= 10 || s.n == 12)) || (s.m == 2 && [2, 4, 6, 8].contains(&s.n))
}

/// The torsion groups that occur over K.
pub fn najman_allowed(field: QField, s: Shape) -> bool {
    mazur(s)
        || match field {
            QField::Gauss => s == Shape { m: 4, n: 4 },
            QField::Eisenstein => s == Shape { m: 3, n: 3 } || s == Shape { m: 3, n: 6 },
        }
}

/// A torsion group with generators `P_m, P_n` of orders m and n (the first
/// omitted when m = 1, both when the group is trivial).
#[derive(Clone, Debug, PartialEq)]
pub struct TorsionGroup<F> {
    pub shape: Shape,
    pub generators: Vec<Point<F>>,
}

impl<F: Field> TorsionGroup<F> {
    pub fn m(&self) -> u64 {
        self.shape.m
    }

    pub fn n(&self) -> u64 {
        self.shape.n
    }

    /// All points of the group.
    pub fn points(&self, e: &Curve<F>) -> Vec<Point<F>> {
        let (pm, pn) = match self.generators.as_slice() {
            [] => (Point::Inf, Point::Inf),
            [pn] => (Point::Inf, pn.clone()),
            [pm, pn, ..] => (pm.clone(), pn.clone()),
        };
        let mut out = Vec::new();
        let mut a = Point::Inf;
        for _ in 0..self.shape.m {
            let mut p = a.clone();
            for _ in 0..self.shape.n {
                out.push(p.clone());
                p = e.add(&p, &pn);
            }
            a = e.add(&a, &pm);
        }
        out
    }

    /// The odd-order subgroup, with generators in the same convention.
    pub fn odd_part(&self, e: &Curve<F>) -> TorsionGroup<F> {
        let orders: Vec<u64> = match self.generators.len() {
            0 => vec![],
            1 => vec![self.shape.n],
            _ => vec![self.shape.m, self.shape.n],
        };
        let generators = self
            .generators
            .iter()
            .zip(orders)
            .filter_map(|(p, o)| {
                let odd = o >> o.trailing_zeros();
                (odd > 1).then(|| e.mul((o / odd) as i64, p))
            })
            .collect();
        TorsionGroup { shape: self.shape.odd_part(), generators }
    }
}

impl<F: Field + fmt::Display> Serialize for TorsionGroup<F> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let gens: Vec<[String; 2]> = self
            .generators
            .iter()
            .filter_map(|p| match p {
                Point::Inf => None,
                Point::Aff(x, y) => Some([x.to_string(), y.to_string()]),
            })
            .collect();
        let mut st = s.serialize_struct("TorsionGroup", 3)?;
        st.serialize_field("m", &self.shape.m)?;
        st.serialize_field("n", &self.shape.n)?;
        st.serialize_field("generators", &gens)?;
        st.end()
    }
}

impl<F: fmt::Display> fmt::Display for TorsionGroup<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.shape)?;
        for (i, g) in self.generators.iter().enumerate() {
            write!(f, "{}{}", if i == 0 { " gen " } else { ", " }, g)?;
        }
        Ok(())
    }
}

const BOUND_NORM: u64 = 169;
const BOUND_PRIMES: usize = 5;
const MIN_PRIMES: usize = 3;
const TOWER_BOUND_NORM: u64 = 3000;

struct LocalCount {
    p: u64,
    ramified: bool,
    n: u64,
}

impl LocalCount {
    /// The l-primary torsion injects into the reduction unless l is the
    /// residue characteristic and the prime is ramified (e = 2 = p - 1 at 3).
    fn injects(&self, l: u64) -> bool {
        self.p != l || !self.ramified
    }
}

fn local_counts(
    e: &Curve<FieldElem>,
    max_norm: u64,
    accept: impl Fn(&ResidueMap) -> bool,
) -> Result<Vec<LocalCount>> {
    let mut out = Vec::new();
    for pi in odd_primes_by_norm(e.field(), max_norm) {
        let Ok(red) = reduce_curve(e, &pi) else { continue };
        if red.kind != ReductionKind::Good || !accept(&red.map) {
            continue;
        }
        let n = count_points(red.curve.as_ref().expect("good reduction"))?;
        out.push(LocalCount { p: red.map.p, ramified: red.map.kind == PrimeKind::Ramified, n });
        if out.len() == BOUND_PRIMES {
            break;
        }
    }
    if out.len() < MIN_PRIMES {
        return Err(Error::TooFewPrimes { found: out.len() });
    }
    Ok(out)
}

fn combine(counts: &[LocalCount]) -> Result<u64> {
    let mut primes: Vec<u64> = counts.iter().flat_map(|c| factor_u64(c.n).into_iter().map(|(l, _)| l)).collect();
    primes.sort_unstable();
    primes.dedup();
    let mut b = 1u64;
    for l in primes {
        let v = counts
            .iter()
            .filter(|c| c.injects(l))
            .map(|c| factor_u64(c.n).into_iter().find(|(q, _)| *q == l).map_or(0, |(_, k)| k))
            .min()
            .ok_or(Error::TooFewPrimes { found: counts.len() })?;
        b *= l.pow(v);
    }
    Ok(b)
}

/// A multiple of `#E(K)_tors`, from point counts at up to 5 good odd primes
/// of residue field size <= 169.
pub fn torsion_bound(e: &Curve<FieldElem>) -> Result<u64> {
    combine(&local_counts(e, BOUND_NORM, |_| true)?)
}

/// A multiple of `#E(L)_tors` for `L = K(sqrt(d_1), ...)`, from primes of K
/// at which every radicand is a nonzero square.
fn tower_bound(e: &Curve<FieldElem>, ds: &[FieldElem]) -> Result<u64> {
    let split = |m: &ResidueMap| ds.iter().all(|d| m.reduce(d).is_ok_and(|r| !r.is_zero() && r.is_square()));
    combine(&local_counts(e, TOWER_BOUND_NORM, split)?)
}

type RootFn<'a, F> = &'a dyn Fn(&Poly<F>) -> Result<Vec<F>>;
type SqrtFn<'a, F> = &'a dyn Fn(&F) -> Result<Option<F>>;

/// Points with the given x-coordinate: `(2y + a1 x + a3)^2 = psi2^2(x)`.
fn points_over_x<F: Field>(e: &Curve<F>, x: &F, sqrt: SqrtFn<F>) -> Result<Vec<Point<F>>> {
    let s = psi2_squared(e).eval(x);
    let t = -(e.a1.clone() * x.clone() + e.a3.clone());
    let two = x.from_i64_like(2);
    if s.is_zero() {
        return Ok(vec![Point::Aff(x.clone(), t / two)]);
    }
    Ok(match sqrt(&s)? {
        Some(w) => vec![
            Point::Aff(x.clone(), (t.clone() + w.clone()) / two.clone()),
            Point::Aff(x.clone(), (t - w) / two),
        ],
        None => vec![],
    })
}

/// The l-primary part of `E(k)[l^j]` with `l^j <= cap`, as generators of
/// the larger and the smaller cyclic factor.
struct Primary<F> {
    big: (u64, Point<F>),
    small: (u64, Point<F>),
}

fn primary_part<F: Field>(e: &Curve<F>, l: u64, cap: u64, roots: RootFn<F>, sqrt: SqrtFn<F>) -> Result<Primary<F>> {
    let trivial = Primary { big: (1, Point::Inf), small: (1, Point::Inf) };
    if cap < l {
        return Ok(trivial);
    }
    let first = if l == 2 { psi2_squared(e) } else { division_poly(e, l as u32)?.poly };
    let mut layer = Vec::new();
    for x in roots(&first)? {
        layer.extend(points_over_x(e, &x, sqrt)?);
    }
    let mut layers: Vec<Vec<Point<F>>> = Vec::new();
    let mut ord = l;
    while !layer.is_empty() {
        layers.push(layer.clone());
        if ord * l > cap {
            break;
        }
        let mut next: Vec<Point<F>> = Vec::new();
        let mut seen: Vec<F> = Vec::new();
        for p in &layer {
            let x0 = p.x().expect("affine");
            if seen.contains(x0) {
                continue;
            }
            seen.push(x0.clone());
            for x in roots(&ldivision_poly(e, l as u32, x0))? {
                for q in points_over_x(e, &x, sqrt)? {
                    if layer.contains(&e.mul(l as i64, &q)) && !next.contains(&q) {
                        next.push(q);
                    }
                }
            }
        }
        layer = next;
        ord *= l;
    }
    if layers.is_empty() {
        return Ok(trivial);
    }
    let total = 1 + layers.iter().map(Vec::len).sum::<usize>() as u64;
    let a = layers.len() as u32;
    let big_order = l.pow(a);
    let ga = layers[a as usize - 1][0].clone();
    if layers[0].len() as u64 + 1 == l {
        debug_assert_eq!(total, big_order);
        return Ok(Primary { big: (big_order, ga), small: (1, Point::Inf) });
    }
    let small_order = total / big_order;
    let mut bexp = 0usize;
    while l.pow(bexp as u32) < small_order {
        bexp += 1;
    }
    let base = e.mul(l.pow(a - 1) as i64, &ga);
    let sub: Vec<Point<F>> = (0..l as i64).map(|k| e.mul(k, &base)).collect();
    let gb = layers[bexp - 1]
        .iter()
        .find(|q| !sub.contains(&e.mul(l.pow(bexp as u32 - 1) as i64, q)))
        .expect("a complement exists in a non-cyclic group")
        .clone();
    Ok(Primary { big: (big_order, ga), small: (small_order, gb) })
}

fn assemble<F: Field>(e: &Curve<F>, parts: Vec<Primary<F>>) -> TorsionGroup<F> {
    let (mut m, mut n) = (1u64, 1u64);
    let (mut pm, mut pn) = (Point::Inf, Point::Inf);
    for p in parts {
        m *= p.small.0;
        n *= p.big.0;
        pm = e.add(&pm, &p.small.1);
        pn = e.add(&pn, &p.big.1);
    }
    let generators = match (m, n) {
        (_, 1) => vec![],
        (1, _) => vec![pn],
        _ => vec![pm, pn],
    };
    TorsionGroup { shape: Shape { m, n }, generators }
}

/// `E(K)_tors` with generators, checked against the groups that occur over K.
pub fn torsion_k(e: &Curve<FieldElem>) -> Result<TorsionGroup<FieldElem>> {
    let b = torsion_bound(e)?;
    let roots = |p: &Poly<FieldElem>| Ok(roots_in_k(p));
    let sqrt = |x: &FieldElem| Ok(is_square_in_k(x));
    let mut parts = Vec::new();
    for (l, k) in factor_u64(b) {
        parts.push(primary_part(e, l, l.pow(k), &roots, &sqrt)?);
    }
    let g = assemble(e, parts);
    if !najman_allowed(e.field(), g.shape) {
        return Err(Error::Violation(format!("E(K)_tors = {} for {} over {}", g, e, e.field())));
    }
    Ok(g)
}

/// The product of all conjugates, as a polynomial over K.
fn norm_to_base(p: &Poly<RadicalElem>) -> Poly<FieldElem> {
    let mut g = p.clone();
    if g.coeffs().iter().any(|c| c.as_base().is_none()) {
        for j in 0..p.ctx().depth() {
            let c = g.map(g.ctx(), |c| c.conj(j));
            g = &g * &c;
        }
    }
    Poly::new(g.coeffs().iter().map(|c| c.as_base().expect("conjugate-invariant")).collect())
}

/// Torsion points of order at most `cap` on E over `K(sqrt(d_1), sqrt(d_2))`,
/// found by root finding in the tower.  Brute force; used as an oracle.
pub fn tower_torsion(e: &Curve<FieldElem>, rads: &[FieldElem], cap: u64) -> Result<TorsionGroup<RadicalElem>> {
    if cap > 16 {
        return Err(Error::CapExceeded(cap));
    }
    if rads.len() > 2 {
        return Err(Error::TowerTooDeep(rads.len()));
    }
    let field = e.field();
    let sq = RadicalElem::tower(field, rads)?;
    let ds: Vec<FieldElem> = sq.last().map(|r| r.radicands().to_vec()).unwrap_or_default();
    let template = RadicalElem::new(field, ds.clone(), vec![field.zero(); 1 << ds.len()])?;
    let el = e.map(|c| template.base_like(c.clone()))?;
    let bound = tower_bound(e, &ds)?;
    let roots = |p: &Poly<RadicalElem>| -> Result<Vec<RadicalElem>> {
        let base = norm_to_base(p);
        let rs = roots_in_tower(&base, &ds)?;
        Ok(rs.into_iter().filter(|r| p.eval(r).is_zero()).collect())
    };
    let sqrt = |x: &RadicalElem| Ok(x.sqrt_in_tower());
    let mut parts = Vec::new();
    for (l, k) in factor_u64(bound) {
        let mut lcap = 1;
        while lcap * l <= cap.min(l.pow(k)) {
            lcap *= l;
        }
        parts.push(primary_part(&el, l, lcap, &roots, &sqrt)?);
    }
    Ok(assemble(&el, parts))
}
