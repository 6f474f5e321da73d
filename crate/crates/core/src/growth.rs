//! Growth of torsion from K to F, the maximal elementary abelian 2-extension
//! of K, decided rule by rule with a replayable certificate.

use crate::ecurve::{division_poly, psi2_squared, two_torsion_split, Curve, Point, TwistForm, TwoTorsion};
use crate::error::{Error, Result};
use crate::ffield::{odd_primes_by_norm, Fq, ResidueMap};
use crate::field::Field;
use crate::poly::Poly;
use crate::qfield::{is_square_in_k, roots_in_k, square_class_eq, squarefree_part, FieldElem, QField, RadicalElem};
use crate::torsion::{torsion_k, Shape, TorsionGroup};
use serde::{Deserialize, Serialize};

/// Registered rules and the statement each one applies.
pub const RULES: &[(&str, &str)] = &[
    ("ODD", "odd part of E(F) is the sum of the odd parts of the twists E^(d)(K)"),
    ("R1", "no point of order 2 over K: the 2-division cubic stays irreducible over F"),
    ("R2", "Z/2+Z/8 over K grows to Z/4+Z/16 over F"),
    ("R3", "Z/2+Z/6 over K grows to Z/4+Z/12 over F"),
    ("R4", "Z/4+Z/4 over Q(i) grows to Z/8+Z/8 over F"),
    ("R5", "Z/2+Z/4 over K: 2-part Z/4+Z/8, or Z/8+Z/8 over Q(sqrt(-3)) when E^(-1)(K) has a point of order 4"),
    ("R6", "Z/2+Z/2 over K: E(F) is twist invariant, so pass to a twist with larger torsion, else Z/4+Z/4"),
    ("R7", "one point of order 2 over K: 2-part from halving chains in F"),
    ("R8", "no subgroup Z/4+Z/4+Z/5, Z/12+Z/12, Z/4+Z/32 or Z/4+Z/8+Z/3, and membership in the list over F"),
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub rule: &'static str,
    pub anchor: &'static str,
    pub inputs: Vec<String>,
    pub conclusion: String,
}

fn step(rule: &'static str, inputs: Vec<String>, conclusion: impl ToString) -> Step {
    let anchor = RULES.iter().find(|(id, _)| *id == rule).expect("registered rule").1;
    Step { rule, anchor, inputs, conclusion: conclusion.to_string() }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TorsionF {
    Exact(Shape),
    Candidates(Vec<Shape>),
}

impl TorsionF {
    pub fn shapes(&self) -> Vec<Shape> {
        match self {
            TorsionF::Exact(s) => vec![*s],
            TorsionF::Candidates(v) => v.clone(),
        }
    }

    pub fn exact(&self) -> Option<Shape> {
        match self {
            TorsionF::Exact(s) => Some(*s),
            TorsionF::Candidates(_) => None,
        }
    }
}

impl std::fmt::Display for TorsionF {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let v: Vec<String> = self.shapes().iter().map(|s| s.to_string()).collect();
        match self {
            TorsionF::Exact(_) => write!(f, "{}", v[0]),
            TorsionF::Candidates(_) => write!(f, "one of {{{}}}", v.join(", ")),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthResult {
    #[serde(rename = "torsion_K")]
    pub torsion_k: TorsionGroup<FieldElem>,
    #[serde(rename = "torsion_F")]
    pub torsion_f: TorsionF,
    pub certificate: Vec<Step>,
    /// Square classes adjoined by the halving chains.
    pub witness_radicands: Vec<FieldElem>,
}

impl GrowthResult {
    /// Every step names a registered rule and the closing step restates the result.
    pub fn check_certificate(&self) -> bool {
        let known = self.certificate.iter().all(|s| RULES.iter().any(|(id, a)| *id == s.rule && *a == s.anchor));
        let closing = self.certificate.last().is_some_and(|s| s.rule == "R8" && s.conclusion == self.torsion_f.to_string());
        known && closing
    }
}

/// The groups occurring as `E(F)_tors`.
pub fn allowed_groups(field: QField) -> Vec<Shape> {
    let mut v = Vec::new();
    for n in [2, 3, 4, 5, 6, 8] {
        v.push(Shape { m: 2, n: 2 * n });
    }
    for n in [2, 3, 4] {
        v.push(Shape { m: 4, n: 4 * n });
    }
    for n in [2, 3, 4, 6, 8] {
        v.push(Shape { m: n, n });
    }
    for n in [1, 3, 5, 7, 9, 15] {
        v.push(Shape::cyclic(n));
    }
    if field == QField::Eisenstein {
        v.push(Shape { m: 2, n: 32 });
    }
    v
}

const EXCLUDED: [(Shape, &str); 4] = [
    (Shape { m: 4, n: 20 }, "Z/4+Z/4+Z/5"),
    (Shape { m: 12, n: 12 }, "Z/12+Z/12"),
    (Shape { m: 4, n: 32 }, "Z/4+Z/32"),
    (Shape { m: 4, n: 24 }, "Z/4+Z/8+Z/3"),
];

/// The first excluded subgroup contained in `s`.
pub fn excluded_subgroup(s: &Shape) -> Option<&'static str> {
    EXCLUDED.iter().find(|(x, _)| x.embeds_in(s)).map(|(_, name)| *name)
}

const ODD_ALLOWED: [Shape; 7] = [
    Shape::cyclic(1),
    Shape::cyclic(3),
    Shape::cyclic(5),
    Shape::cyclic(7),
    Shape::cyclic(9),
    Shape::cyclic(15),
    Shape { m: 3, n: 3 },
];

#[derive(Clone, Debug)]
pub struct OddWitness {
    pub d: FieldElem,
    pub twist: Curve<FieldElem>,
    /// Odd part of `E^(d)(K)`.
    pub odd: TorsionGroup<FieldElem>,
}

#[derive(Clone, Debug)]
pub struct OddPart {
    pub shape: Shape,
    pub witnesses: Vec<OddWitness>,
}

/// The odd part of `E(F)_tors`.  A point of odd order l over F has its
/// x-coordinate in K and is defined over `K(sqrt(d))` with d the class of
/// `f(x)`; so every odd point lives on one of the twists read off the
/// K-roots of psi_3, psi_5 and psi_7.
pub fn odd_part_f(e: &Curve<FieldElem>) -> Result<OddPart> {
    let bq = psi2_squared(e);
    let mut classes: Vec<FieldElem> = Vec::new();
    for l in [3u32, 5, 7] {
        let psi = division_poly(e, l)?.poly;
        if rootless_mod_some_prime(e, &psi, l as u64) {
            continue;
        }
        for x0 in roots_in_k(&psi) {
            let d = squarefree_part(&bq.eval(&x0))?;
            if !classes.iter().any(|c| square_class_eq(c, &d)) {
                classes.push(d);
            }
        }
    }
    let mut witnesses = Vec::new();
    let mut orders = Vec::new();
    for d in classes {
        let twist = if is_square_in_k(&d).is_some() { e.clone() } else { e.quadratic_twist(&d)? };
        let t = torsion_k(&twist)?;
        let odd = t.odd_part(&twist);
        if odd.shape.order() == 1 {
            return Err(Error::Violation(format!("twist of {e} by {d} has no odd torsion over K")));
        }
        if odd.shape.m > 1 {
            orders.push(odd.shape.m);
        }
        orders.push(odd.shape.n);
        witnesses.push(OddWitness { d, twist, odd });
    }
    let shape = Shape::from_cyclic(&orders)
        .map_err(|_| Error::Violation(format!("odd torsion of orders {orders:?} over F for {e}")))?;
    if !ODD_ALLOWED.contains(&shape) {
        return Err(Error::Violation(format!("odd part {shape} of E(F) for {e}")));
    }
    Ok(OddPart { shape, witnesses })
}

/// A K-root of psi_l is integral at every prime where the model is integral
/// (l prime), so it survives reduction modulo primes above p != 2, l.
fn rootless_mod_some_prime(e: &Curve<FieldElem>, psi: &Poly<FieldElem>, l: u64) -> bool {
    let mut tried = 0;
    for prime in odd_primes_by_norm(e.field(), 400) {
        let Ok(map) = ResidueMap::new(&prime) else { continue };
        if map.p == l || map.q() > 400 || e.coeffs().iter().any(|c| map.reduce(c).is_err()) {
            continue;
        }
        let Ok(c) = psi.coeffs().iter().map(|c| map.reduce(c)).collect::<Result<Vec<Fq>>>() else { continue };
        let red = Poly::new(c);
        if map.ctx.elements().all(|x| !red.eval(&x).is_zero()) {
            return true;
        }
        tried += 1;
        if tried == 10 {
            break;
        }
    }
    false
}

/// Rewrites all elements over one tower.
fn common(xs: &[RadicalElem]) -> Result<Vec<RadicalElem>> {
    let mut acc = xs[0].clone();
    for x in &xs[1..] {
        acc = RadicalElem::unify(&acc, x)?.0;
    }
    xs.iter().map(|x| Ok(RadicalElem::unify(&acc, x)?.1)).collect()
}

fn split_curve(roots: &[RadicalElem; 3]) -> Result<Curve<RadicalElem>> {
    let r = common(roots)?;
    let z = r[0].zero_like();
    let [a, b, c] = [r[0].clone(), r[1].clone(), r[2].clone()];
    let s1 = a.clone() + b.clone() + c.clone();
    let s2 = a.clone() * b.clone() + a.clone() * c.clone() + b.clone() * c.clone();
    let s3 = a * b * c;
    Curve::new([z.clone(), -s1, z, s2, -s3])
}

/// All Q with `2Q = P` on `y^2 = (x - e1)(x - e2)(x - e3)`, with coordinates
/// in F.  Empty when P is not in 2E(F).  `TowerTooDeep` when the square
/// roots need more radicands than the cap allows.
pub fn knapp_halving(roots: &[RadicalElem; 3], p: &Point<RadicalElem>) -> Result<Vec<Point<RadicalElem>>> {
    let (x0, y0) = match p {
        Point::Inf => {
            let mut out = vec![Point::Inf];
            out.extend(roots.iter().map(|r| Point::Aff(r.clone(), r.zero_like())));
            return Ok(out);
        }
        Point::Aff(x, y) => (x, y),
    };
    let v = common(&[x0.clone(), y0.clone(), roots[0].clone(), roots[1].clone(), roots[2].clone()])?;
    let ds: Vec<RadicalElem> = (2..5).map(|i| v[0].clone() - v[i].clone()).collect();
    let Some(r1) = ds[0].sqrt_in_f()? else { return Ok(vec![]) };
    let Some(r2) = ds[1].sqrt_in_f()? else { return Ok(vec![]) };
    let (r1, r2) = RadicalElem::unify(&r1, &r2)?;
    let r12 = r1.clone() * r2.clone();
    let r3 = if r12.is_zero() {
        let (_, d3) = RadicalElem::unify(&r1, &ds[2])?;
        match d3.sqrt_in_f()? {
            Some(r) => r,
            None => return Ok(vec![]),
        }
    } else {
        let (r12, y) = RadicalElem::unify(&r12, &v[1])?;
        y / r12
    };
    let r = common(&[r1, r2, r3, v[0].clone(), v[1].clone()])?;
    let e = split_curve(roots)?;
    let target = Point::Aff(r[3].clone(), r[4].clone());
    let mut out: Vec<Point<RadicalElem>> = Vec::new();
    for signs in 0..8u32 {
        let s: Vec<RadicalElem> =
            (0..3).map(|i| if signs >> i & 1 == 1 { -r[i].clone() } else { r[i].clone() }).collect();
        let [s0, s1, s2] = [s[0].clone(), s[1].clone(), s[2].clone()];
        let x = r[3].clone() + s0.clone() * s1.clone() + s0.clone() * s2.clone() + s1.clone() * s2.clone();
        let y = (s0.clone() + s1.clone()) * (s0 + s2.clone()) * (s1 + s2);
        for y in [y.clone(), -y] {
            let q = Point::Aff(x.clone(), y);
            if e.double(&q) == target && !out.contains(&q) {
                out.push(q);
            }
        }
    }
    if out.len() != 4 {
        return Err(Error::Violation(format!("{} halves of {p} found", out.len())));
    }
    Ok(out
        .into_iter()
        .map(|q| match q {
            Point::Aff(x, y) => {
                let mut v = RadicalElem::shrink_all(&[x, y]);
                let y = v.pop().unwrap();
                Point::Aff(v.pop().unwrap(), y)
            }
            Point::Inf => Point::Inf,
        })
        .collect())
}

fn sq(x: &FieldElem) -> bool {
    is_square_in_k(x).is_some()
}

fn ono_pairs(t: &TwistForm) -> [(FieldElem, FieldElem); 3] {
    let (a, b) = (&t.a, &t.b);
    [(a.clone(), b.clone()), (-a.clone(), b - a), (-b.clone(), a - b)]
}

/// A point of order 4 over K on `E(a,b)`: both members of one of the pairs
/// `(a, b)`, `(-a, b-a)`, `(-b, a-b)` are squares.
pub fn ono_order4(t: &TwistForm) -> bool {
    ono_pairs(t).iter().any(|(a, b)| sq(a) && sq(b))
}

/// A point of order 8 over K on `E(a,b)`: for one pair `a = d^2 u^4`,
/// `b = d^2 v^4` with `u^2 + v^2` a square.  With `a = r^2`, `b = s^2` this
/// asks for a sign with `±r/s` a square `t^2` and `t^2 + 1` a square.
pub fn ono_order8(t: &TwistForm) -> bool {
    ono_pairs(t).iter().any(|(a, b)| {
        let (Some(r), Some(s)) = (is_square_in_k(a), is_square_in_k(b)) else { return false };
        let q = &r / &s;
        [q.clone(), -q].iter().any(|q| sq(q) && sq(&(q + &q.field.one())))
    })
}

/// Some twist `E(da, db)` has a point of order 4 over K; the witness d is the
/// square class shared by one of the Ono pairs.
pub fn exists_twist_order4(t: &TwistForm) -> Result<Option<FieldElem>> {
    for (a, b) in ono_pairs(t) {
        let d = squarefree_part(&a)?;
        if square_class_eq(&d, &b) {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

/// Whether `T = E(K)_tors` and `T' = E^(d)(K)_tors` can occur together for a
/// curve with full 2-torsion over K.
pub fn verify_burt_compatibility(t: Shape, t2: Shape, field: QField, d: &FieldElem) -> bool {
    if !t.m.is_multiple_of(2) || !t2.m.is_multiple_of(2) {
        return false;
    }
    if sq(d) {
        return t == t2;
    }
    let minus_one = square_class_eq(d, &field.int(-1));
    let two2 = Shape { m: 2, n: 2 };
    let row = |a: Shape, b: Shape| match (a.m, a.n) {
        (2, 8) | (2, 6) => b == two2,
        (4, 4) => field == QField::Gauss && b == two2,
        (2, 4) => b == two2 || (field == QField::Eisenstein && minus_one && b == a),
        (2, 2) => true,
        _ => false,
    };
    row(t, t2) && row(t2, t)
}

/// Layers of the 2-primary part of E(F), found by halving.
#[derive(Clone, Debug)]
pub struct HalvingChain {
    /// `counts[k-1] = |E(F)[2^k]|`.
    pub counts: Vec<u64>,
    /// False when a square root needed more radicands than the cap.
    pub complete: bool,
    /// Lower bound for the next count when incomplete.
    pub lower_next: u64,
    pub radicands: Vec<FieldElem>,
}

impl HalvingChain {
    /// 2-primary groups `Z/2^a + Z/2^b` consistent with the counts.
    pub fn shapes(&self) -> Vec<Shape> {
        let k = self.counts.len() as u32;
        let f = |a: u32, b: u32, k: u32| 1u64 << (k.min(a) + k.min(b));
        let mut out = Vec::new();
        for a in 1..=6u32 {
            for b in a..=6u32 {
                let fits = (1..=k).all(|j| f(a, b, j) == self.counts[j as usize - 1]);
                let next = f(a, b, k + 1);
                let tail = if self.complete { next == self.counts[k as usize - 1] } else { next >= self.lower_next };
                if fits && tail {
                    out.push(Shape { m: 1 << a, n: 1 << b });
                }
            }
        }
        out
    }
}

/// The roots of the 2-division cubic in a tower over K.
fn cubic_roots(e: &Curve<FieldElem>) -> Result<[RadicalElem; 3]> {
    let field = e.field();
    match two_torsion_split(e) {
        TwoTorsion::Irreducible => Err(Error::OutOfRange("no point of order 2 over K".into())),
        TwoTorsion::Full([a, b, c]) => Ok([a, b, c].map(RadicalElem::from_base)),
        TwoTorsion::OneRoot(e1) => {
            // psi2^2 / 4 = (x - e1)(x^2 + p x + c)
            let q = psi2_squared(e);
            let lead = q.coeffs()[3].clone();
            let p = &(&q.coeffs()[2] / &lead) + &e1;
            let c = &(&q.coeffs()[1] / &lead) + &(&p * &e1);
            let disc = &(&p * &p) - &(&c * &field.int(4));
            let sd = RadicalElem::tower(field, &[disc])?.pop().unwrap();
            let half = field.frac(1, 2, 0, 1);
            let mp = sd.base_like(-p);
            let e2 = (mp.clone() + sd.clone()).scale(&half);
            let e3 = (mp - sd.clone()).scale(&half);
            Ok([sd.base_like(e1), e2, e3])
        }
    }
}

const MAX_LAYERS: usize = 6;

/// Halves layer after layer, starting from `E[2]`, for at most `layers`
/// layers.  Stops early (incomplete) on tower overflow.
pub fn halving_chain(e: &Curve<FieldElem>, layers: usize) -> Result<HalvingChain> {
    let roots = cubic_roots(e)?;
    let mut layer: Vec<Point<RadicalElem>> =
        roots.iter().map(|r| Point::Aff(r.clone(), r.zero_like())).collect();
    let mut chain = HalvingChain { counts: vec![4], complete: false, lower_next: 4, radicands: Vec::new() };
    let note = |p: &Point<RadicalElem>, rads: &mut Vec<FieldElem>| {
        if let Some(x) = p.x() {
            for d in x.radicands().iter().chain(p.y().unwrap().radicands()) {
                if !rads.iter().any(|r| square_class_eq(r, d)) {
                    rads.push(d.clone());
                }
            }
        }
    };
    for p in &layer {
        note(p, &mut chain.radicands);
    }
    while chain.counts.len() < layers.min(MAX_LAYERS) {
        let last = *chain.counts.last().unwrap();
        let mut next = Vec::new();
        for p in &layer {
            match knapp_halving(&roots, p) {
                Ok(h) => next.extend(h),
                Err(Error::TowerTooDeep(_)) => {
                    chain.lower_next = last + next.len() as u64;
                    return Ok(chain);
                }
                Err(err) => return Err(err),
            }
        }
        if next.is_empty() {
            chain.complete = true;
            chain.lower_next = last;
            return Ok(chain);
        }
        for p in &next {
            note(p, &mut chain.radicands);
        }
        chain.counts.push(last + next.len() as u64);
        layer = next;
    }
    if chain.counts.len() == MAX_LAYERS {
        return Err(Error::Violation(format!("point of order {} in E(F) for {e}", 1u64 << MAX_LAYERS)));
    }
    chain.lower_next = *chain.counts.last().unwrap();
    Ok(chain)
}

fn violation(e: &Curve<FieldElem>, what: String) -> Error {
    Error::Violation(format!("{what} for {e} over {}", e.field()))
}

/// 2-part of E(F) when E(K) has full 2-torsion.
fn full_two_part(e: &Curve<FieldElem>, t: &TorsionGroup<FieldElem>, odd: &OddPart, cert: &mut Vec<Step>, depth: u32) -> Result<Shape> {
    let field = e.field();
    let s = t.shape;
    let trivial_odd = |rule: &str| {
        if odd.shape != Shape::trivial() {
            return Err(violation(e, format!("{rule} with odd part {}", odd.shape)));
        }
        Ok(())
    };
    let inputs = vec![format!("E = {e}"), format!("E(K)_tors = {s}")];
    match (s.m, s.n) {
        (2, 8) => {
            trivial_odd("T = Z/2+Z/8")?;
            cert.push(step("R2", inputs, "2-part Z/4+Z/16"));
            Ok(Shape { m: 4, n: 16 })
        }
        (2, 6) => {
            if odd.shape != Shape::cyclic(3) {
                return Err(violation(e, format!("T = Z/2+Z/6 with odd part {}", odd.shape)));
            }
            cert.push(step("R3", inputs, "2-part Z/4+Z/4"));
            Ok(Shape { m: 4, n: 4 })
        }
        (4, 4) => {
            trivial_odd("T = Z/4+Z/4")?;
            cert.push(step("R4", inputs, "2-part Z/8+Z/8"));
            Ok(Shape { m: 8, n: 8 })
        }
        (2, 4) => {
            trivial_odd("T = Z/2+Z/4")?;
            if field == QField::Gauss {
                cert.push(step("R5", inputs, "2-part Z/4+Z/8"));
                return Ok(Shape { m: 4, n: 8 });
            }
            let tw = torsion_k(&e.quadratic_twist(&field.int(-1))?)?;
            let mut inputs = inputs;
            inputs.push(format!("E^(-1)(K)_tors = {}", tw.shape));
            if tw.shape.n % 4 == 0 {
                cert.push(step("R5", inputs, "2-part Z/8+Z/8"));
                Ok(Shape { m: 8, n: 8 })
            } else {
                cert.push(step("R5", inputs, "2-part Z/4+Z/8"));
                Ok(Shape { m: 4, n: 8 })
            }
        }
        (2, 2) if depth == 0 => {
            let TwoTorsion::Full([e1, e2, e3]) = two_torsion_split(e) else {
                return Err(violation(e, "full 2-torsion lost".into()));
            };
            let tf = TwistForm::from_roots(&e1, &e2, &e3)?.normalized()?;
            let (d, twist) = if let Some(d) = exists_twist_order4(&tf)? {
                (d.clone(), tf.twist(&d)?.curve())
            } else if let Some(w) = odd.witnesses.first() {
                (w.d.clone(), w.twist.clone())
            } else {
                cert.push(step("R6", vec![format!("E = {e}"), format!("{tf}"), "no twist gains torsion".into()], "2-part Z/4+Z/4"));
                return Ok(Shape { m: 4, n: 4 });
            };
            let tt = torsion_k(&twist)?;
            if tt.shape == s || !verify_burt_compatibility(s, tt.shape, field, &d) {
                return Err(violation(e, format!("twist by {d} has torsion {}", tt.shape)));
            }
            cert.push(step(
                "R6",
                vec![format!("E = {e}"), format!("{tf}"), format!("d = {d}"), format!("E^(d)(K)_tors = {}", tt.shape)],
                format!("E(F) = E^(d)(F) with E^(d) = {twist}"),
            ));
            full_two_part(&twist, &tt, odd, cert, 1)
        }
        _ => Err(violation(e, format!("E(K)_tors = {s} with full 2-torsion"))),
    }
}

/// Known counts must agree with a predicted 2-part.
fn chain_agrees(chain: &HalvingChain, s: Shape) -> bool {
    let (a, b) = (s.m.trailing_zeros(), s.n.trailing_zeros());
    let f = |k: u32| 1u64 << (k.min(a) + k.min(b));
    let k = chain.counts.len() as u32;
    let known = (1..=k).all(|j| f(j) == chain.counts[j as usize - 1]);
    let tail = if chain.complete { f(k + 1) == chain.counts[k as usize - 1] } else { f(k + 1) >= chain.lower_next };
    known && tail
}

fn cyclic_allowed(field: QField, s: &Shape) -> bool {
    match field {
        QField::Gauss => s.m <= 2,
        QField::Eisenstein => !Shape { m: 8, n: 8 }.embeds_in(s),
    }
}

/// Layers checked against the rules in the full 2-torsion case.
const CHECK_LAYERS: usize = 3;

/// `E(F)_tors` with a certificate.
pub fn classify_growth(e: &Curve<FieldElem>) -> Result<GrowthResult> {
    let field = e.field();
    let tk = torsion_k(e)?;
    let odd = odd_part_f(e)?;
    let mut cert = Vec::new();
    let mut inputs: Vec<String> = odd.witnesses.iter().map(|w| format!("d = {}: {}", w.d, w.odd.shape)).collect();
    inputs.insert(0, format!("E = {e}"));
    cert.push(step("ODD", inputs, format!("odd part {}", odd.shape)));
    let mut radicands = Vec::new();
    let (two, decided) = match two_torsion_split(e) {
        TwoTorsion::Irreducible => {
            cert.push(step("R1", vec![format!("E = {e}")], "2-part trivial"));
            (vec![Shape::trivial()], true)
        }
        TwoTorsion::Full(_) => {
            let s = full_two_part(e, &tk, &odd, &mut cert, 0)?;
            let chain = halving_chain(e, CHECK_LAYERS)?;
            if !chain_agrees(&chain, s) {
                return Err(violation(e, format!("halving counts {:?} contradict 2-part {s}", chain.counts)));
            }
            radicands = chain.radicands;
            (vec![s], true)
        }
        TwoTorsion::OneRoot(_) => {
            let chain = halving_chain(e, MAX_LAYERS)?;
            let mut shapes = chain.shapes();
            if chain.complete && shapes.iter().any(|s| !cyclic_allowed(field, s)) {
                return Err(violation(e, format!("2-part {} with cyclic E(K)[2]", shapes[0])));
            }
            shapes.retain(|s| cyclic_allowed(field, s));
            let conclusion = shapes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" or ");
            cert.push(step(
                "R7",
                vec![
                    format!("E = {e}"),
                    format!("|E(F)[2^k]| = {:?}", chain.counts),
                    format!("chain {}", if chain.complete { "complete" } else { "truncated by the radicand cap" }),
                ],
                format!("2-part {conclusion}"),
            ));
            radicands = chain.radicands;
            (shapes, chain.complete)
        }
    };
    let mut kept = Vec::new();
    let mut notes = Vec::new();
    for s in two.iter().map(|s| s.join(&odd.shape)) {
        let problem = if let Some(x) = excluded_subgroup(&s) {
            Some(format!("{s} contains {x}"))
        } else if !allowed_groups(field).contains(&s) {
            Some(format!("{s} is not in the list"))
        } else if !tk.shape.embeds_in(&s) {
            Some(format!("{} does not embed in {s}", tk.shape))
        } else {
            None
        };
        match problem {
            Some(p) if decided => return Err(violation(e, p)),
            Some(p) => notes.push(p),
            None => kept.push(s),
        }
    }
    if kept.is_empty() {
        return Err(violation(e, format!("no admissible group ({})", notes.join("; "))));
    }
    let torsion_f = if kept.len() == 1 { TorsionF::Exact(kept[0]) } else { TorsionF::Candidates(kept) };
    let mut inputs = vec![format!("E(K)_tors = {}", tk.shape)];
    inputs.extend(notes);
    cert.push(step("R8", inputs, &torsion_f));
    Ok(GrowthResult { torsion_k: tk, torsion_f, certificate: cert, witness_radicands: radicands })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torsion::tower_torsion;
    use proptest::prelude::*;

    fn curve(field: QField, a: [i64; 5]) -> Curve<FieldElem> {
        Curve::from_i64(field, a).unwrap()
    }

    fn shape(m: u64, n: u64) -> Shape {
        Shape::new(m, n).unwrap()
    }

    #[test]
    fn lists() {
        assert_eq!(allowed_groups(QField::Gauss).len(), 20);
        assert_eq!(allowed_groups(QField::Eisenstein).len(), 21);
        assert!(!allowed_groups(QField::Gauss).contains(&shape(2, 32)));
        assert_eq!(excluded_subgroup(&shape(4, 20)), Some("Z/4+Z/4+Z/5"));
        assert_eq!(excluded_subgroup(&shape(8, 24)), Some("Z/4+Z/8+Z/3"));
        assert_eq!(excluded_subgroup(&shape(4, 16)), None);
        assert_eq!(excluded_subgroup(&shape(4, 12)), None);
        for f in [QField::Gauss, QField::Eisenstein] {
            assert!(allowed_groups(f).iter().all(|s| excluded_subgroup(s).is_none()));
        }
    }

    #[test]
    fn odd_parts() {
        let h = QField::Eisenstein;
        let g = QField::Gauss;
        let o = odd_part_f(&curve(h, [0, 0, 0, 0, 1])).unwrap();
        assert_eq!(o.shape, Shape::cyclic(3));
        let o = odd_part_f(&curve(g, [0, 0, 0, 0, -2])).unwrap();
        assert_eq!(o.shape, shape(3, 3));
        // E(K) has three points, but x = 0 gives a second 3-torsion line over K(sqrt(-3))
        let o = odd_part_f(&curve(g, [0, 0, 1, 0, -7])).unwrap();
        assert_eq!(o.shape, shape(3, 3));
        assert_eq!(odd_part_f(&curve(g, [0, 0, 0, 4, 0])).unwrap().shape, Shape::trivial());
        let s3 = RadicalElem::tower(g, &[g.int(-3)]).unwrap().pop().unwrap();
        let half = g.frac(1, 2, 0, 1);
        let y = (s3.scale(&g.int(3)) - s3.one_like()).scale(&half);
        let el = curve(g, [0, 0, 1, 0, -7]).map(|c| s3.base_like(c.clone())).unwrap();
        let p = Point::Aff(s3.zero_like(), y);
        assert!(el.contains(&p));
        assert!(el.mul(3, &p).is_inf());
        for w in o.witnesses {
            for (p, n) in w.odd.generators.iter().zip([w.odd.shape.n]) {
                assert!(w.twist.contains(p));
                assert!(w.twist.mul(n as i64, p).is_inf());
            }
        }
    }

    #[test]
    fn odd_part_from_a_twist() {
        // y^2 = x^3 - 2 has no 3-torsion over Q(i), its twists by -2 and 2 do
        let g = QField::Gauss;
        let e = curve(g, [0, 0, 0, 0, -2]);
        assert_eq!(torsion_k(&e).unwrap().shape.odd_part(), Shape::trivial());
        let o = odd_part_f(&e).unwrap();
        assert_eq!(o.witnesses.len(), 2);
        for w in &o.witnesses {
            assert!(!is_square_in_k(&w.d).is_some());
            assert_eq!(w.odd.shape, Shape::cyclic(3));
            assert!(w.twist.mul(3, &w.odd.generators[0]).is_inf());
        }
    }

    fn base_roots(field: QField, r: [i64; 3]) -> [RadicalElem; 3] {
        r.map(|v| RadicalElem::from_base(field.int(v)))
    }

    #[test]
    fn halving() {
        let g = QField::Gauss;
        let roots = base_roots(g, [0, -9, -16]);
        let b = |v: i64| RadicalElem::from_base(g.int(v));
        let halves = knapp_halving(&roots, &Point::Aff(b(0), b(0))).unwrap();
        let mut xs: Vec<String> = halves.iter().map(|q| q.x().unwrap().to_string()).collect();
        xs.sort();
        xs.dedup();
        assert_eq!(xs, vec!["-12", "12"]);
        assert!(halves.contains(&Point::Aff(b(12), b(84))));
        let e = split_curve(&roots).unwrap();
        assert_eq!(e.double(&Point::Aff(b(12), b(84))), Point::Aff(b(0), b(0)));
        let o = knapp_halving(&roots, &Point::Inf).unwrap();
        assert_eq!(o.len(), 4);
        assert!(o.iter().skip(1).all(|p| e.double(p).is_inf()));
        // (-9, 0): -9 and 7 must be squares in F; both are
        let h = knapp_halving(&roots, &Point::Aff(b(-9), b(0))).unwrap();
        assert_eq!(h.len(), 4);
        assert!(h.iter().all(|q| e.double(q) == Point::Aff(b(-9), b(0))));
    }

    #[test]
    fn halving_refuses_non_squares() {
        // y^2 = x(x^2 - 2) over Q(i): T = (0, 0) needs sqrt(2) to be a square in F
        let g = QField::Gauss;
        let e = curve(g, [0, 0, 0, -2, 0]);
        let roots = cubic_roots(&e).unwrap();
        let t = Point::Aff(roots[0].clone(), roots[0].zero_like());
        assert!(knapp_halving(&roots, &t).unwrap().is_empty());
    }

    #[test]
    fn ono_criteria() {
        for f in [QField::Gauss, QField::Eisenstein] {
            let t = TwistForm::from_i64(f, 1, 4).unwrap();
            assert!(ono_order4(&t));
            let t = TwistForm::from_i64(f, 1, 16).unwrap();
            assert!(!ono_order8(&t));
            let t = TwistForm::from_i64(f, 9, 16).unwrap();
            assert!(ono_order4(&t));
        }
        let t = TwistForm::from_i64(QField::Gauss, 9, 16).unwrap();
        assert!(!ono_order8(&t));
        // over Q(sqrt(-3)), -3/4 and 1/4 are squares
        let t = TwistForm::from_i64(QField::Eisenstein, 9, 16).unwrap();
        assert!(ono_order8(&t));
        assert_eq!(torsion_k(&t.curve()).unwrap().shape, shape(2, 8));
        assert_eq!(torsion_k(&TwistForm::from_i64(QField::Gauss, 9, 16).unwrap().curve()).unwrap().shape, shape(2, 4));
    }

    #[test]
    fn twist_with_order_four() {
        let g = QField::Gauss;
        let d = exists_twist_order4(&TwistForm::from_i64(g, 2, 8).unwrap()).unwrap().unwrap();
        assert!(square_class_eq(&d, &g.int(2)));
        let d = exists_twist_order4(&TwistForm::from_i64(g, 1, 4).unwrap()).unwrap().unwrap();
        assert!(is_square_in_k(&d).is_some());
        assert_eq!(exists_twist_order4(&TwistForm::from_i64(g, 1, 3).unwrap()).unwrap(), None);
    }

    fn small_twists(field: QField) -> Vec<FieldElem> {
        let mut out: Vec<FieldElem> = Vec::new();
        for a in -14i64..=14 {
            for b in -14i64..=14 {
                let d = field.elem(a, b);
                if d.is_zero() || d.norm() > crate::qfield::rat(200) {
                    continue;
                }
                let s = squarefree_part(&d).unwrap();
                if !out.iter().any(|c| square_class_eq(c, &s)) {
                    out.push(s);
                }
            }
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn twist_criterion_against_search(a in -6i64..=6, b in -6i64..=6, ai in -3i64..=3, eis in any::<bool>()) {
            let field = if eis { QField::Eisenstein } else { QField::Gauss };
            let Ok(t) = TwistForm::new(field.elem(a, ai), field.int(b)) else { return Ok(()) };
            let found = small_twists(field).into_iter().find(|d| ono_order4(&t.twist(d).unwrap()));
            let claim = exists_twist_order4(&t).unwrap();
            prop_assert_eq!(found.is_some(), claim.is_some());
            if let Some(d) = claim {
                let tw = t.twist(&d).unwrap();
                prop_assert!(ono_order4(&tw));
                prop_assert_eq!(torsion_k(&tw.curve()).unwrap().shape.n % 4, 0);
            }
        }
    }

    #[test]
    fn twist_rows() {
        let h = QField::Eisenstein;
        let g = QField::Gauss;
        assert!(verify_burt_compatibility(shape(2, 8), shape(2, 2), g, &g.int(3)));
        assert!(!verify_burt_compatibility(shape(2, 8), shape(2, 4), g, &g.int(3)));
        assert!(verify_burt_compatibility(shape(2, 4), shape(2, 4), h, &h.int(-1)));
        assert!(!verify_burt_compatibility(shape(2, 4), shape(2, 4), h, &h.int(2)));
        assert!(!verify_burt_compatibility(shape(4, 4), shape(2, 2), h, &h.int(2)));
        assert!(verify_burt_compatibility(shape(2, 2), shape(2, 6), g, &g.int(5)));
        assert!(!verify_burt_compatibility(shape(2, 2), Shape::cyclic(2), g, &g.int(5)));
    }

    #[test]
    fn twist_rows_on_curves() {
        // y^2 = x(x+9)(x+16) over Q(sqrt(-3)) has Z/2+Z/8; its twists drop to Z/2+Z/2
        let h = QField::Eisenstein;
        let e = TwistForm::from_i64(h, 9, 16).unwrap().curve();
        let t = torsion_k(&e).unwrap().shape;
        for d in [h.int(-1), h.int(2), h.elem(1, 1)] {
            let t2 = torsion_k(&e.quadratic_twist(&d).unwrap()).unwrap().shape;
            assert!(verify_burt_compatibility(t, t2, h, &d), "{d}: {t2}");
        }
    }

    fn exact(field: QField, a: [i64; 5]) -> Shape {
        let r = classify_growth(&curve(field, a)).unwrap();
        assert!(r.check_certificate());
        r.torsion_f.exact().unwrap_or_else(|| panic!("not exact: {}", r.torsion_f))
    }

    #[test]
    fn classify_examples() {
        let h = QField::Eisenstein;
        let g = QField::Gauss;
        assert_eq!(exact(h, [0, 0, 0, 0, 1]), shape(4, 12));
        assert_eq!(exact(g, [0, 0, 0, 4, 0]), shape(4, 8));
        // Z/2+Z/8 from E(9,16) over Q(sqrt(-3))
        assert_eq!(exact(h, [0, 25, 0, 144, 0]), shape(4, 16));
        // Z/4+Z/4 from E(9,25) over Q(i)
        assert_eq!(exact(g, [0, 34, 0, 225, 0]), shape(8, 8));
        // no 2-torsion over K
        assert_eq!(exact(g, [0, 0, 1, 0, -7]), shape(3, 3));
        assert_eq!(exact(g, [0, 0, 0, 0, -2]), shape(3, 3));
    }

    #[test]
    fn certificate_serialization() {
        let r = classify_growth(&curve(QField::Gauss, [0, 0, 0, 4, 0])).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["torsion_F"]["exact"], serde_json::json!({"m": 4, "n": 8}));
        assert_eq!(v["torsion_K"]["n"], 4);
        let steps = v["certificate"].as_array().unwrap();
        assert_eq!(steps.last().unwrap()["rule"], "R8");
        assert!(steps.iter().any(|s| s["rule"] == "R5"));
        let c = TorsionF::Candidates(vec![shape(2, 16), shape(2, 32)]);
        assert_eq!(serde_json::to_value(&c).unwrap()["candidates"][1]["n"], 32);
    }

    #[test]
    fn tower_oracle_agrees() {
        let g = QField::Gauss;
        let e = curve(g, [0, 0, 0, 4, 0]);
        let r = classify_growth(&e).unwrap();
        let claimed = r.torsion_f.exact().unwrap();
        let rads: Vec<FieldElem> = r.witness_radicands.iter().take(2).cloned().collect();
        let t = tower_torsion(&e, &rads, 16).unwrap();
        assert!(t.shape.embeds_in(&claimed));
        assert!(t.shape.order() > r.torsion_k.shape.order());
    }

    fn admissible(field: QField, r: &GrowthResult) {
        for s in r.torsion_f.shapes() {
            assert!(allowed_groups(field).contains(&s));
            assert!(excluded_subgroup(&s).is_none());
            assert!(r.torsion_k.shape.embeds_in(&s));
        }
        assert!(r.check_certificate());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]
        #[test]
        fn random_growth(a in -4i64..=4, b in -4i64..=4, c in -4i64..=4, eis in any::<bool>()) {
            let field = if eis { QField::Eisenstein } else { QField::Gauss };
            let Ok(e) = Curve::new([field.zero(), field.int(a), field.zero(), field.int(b), field.int(c)]) else { return Ok(()) };
            let r = classify_growth(&e).unwrap();
            admissible(field, &r);
        }

        #[test]
        fn twist_invariance(a in -5i64..=5, b in -5i64..=5, d in 0usize..6, eis in any::<bool>()) {
            let field = if eis { QField::Eisenstein } else { QField::Gauss };
            let Ok(e) = Curve::short(field.int(a), field.int(b)) else { return Ok(()) };
            if a == 0 || b == 0 {
                return Ok(());
            }
            let ds = [field.int(-1), field.int(2), field.int(3), field.elem(1, 1), field.elem(2, -1), field.int(-7)];
            let tw = e.quadratic_twist(&ds[d]).unwrap();
            let (r1, r2) = (classify_growth(&e).unwrap(), classify_growth(&tw).unwrap());
            match (r1.torsion_f.exact(), r2.torsion_f.exact()) {
                (Some(x), Some(y)) => prop_assert_eq!(x, y),
                _ => {
                    let s2 = r2.torsion_f.shapes();
                    prop_assert!(r1.torsion_f.shapes().iter().any(|s| s2.contains(s)));
                }
            }
        }
    }
}
