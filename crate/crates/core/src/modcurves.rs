//! Cusp counts of X0(n), point inventories of the low-genus models, the
//! Fermat quartic over small towers and the finite-field spot checks.

use crate::ecurve::{count_points, division_poly, genus2_affine_count, genus2_jacobian_order, Curve, Point};
use crate::error::{Error, Result};
use crate::ffield::{Fq, FqCtx, ResidueMap};
use crate::field::Field;
use crate::poly::Poly;
use crate::qfield::{ratio, FieldElem, QField, RadicalElem};
use crate::torsion::{torsion_k, Shape};
use num_integer::Integer;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CuspTable {
    pub n: u64,
    /// `(d, phi(gcd(d, n/d)))` for each divisor d of n.
    pub rows: Vec<(u64, u64)>,
    pub total: u64,
}

fn phi(n: u64) -> u64 {
    crate::qfield::factor_u64(n).iter().fold(n, |acc, &(p, _)| acc / p * (p - 1))
}

/// Ogg's count of the cusps of X0(n).
pub fn ogg_cusps(n: u64) -> Result<CuspTable> {
    if !(1..=10_000).contains(&n) {
        return Err(Error::OutOfRange(format!("level {n}")));
    }
    let rows: Vec<(u64, u64)> = (1..=n).filter(|d| n.is_multiple_of(*d)).map(|d| (d, phi(d.gcd(&(n / d))))).collect();
    let total = rows.iter().map(|r| r.1).sum();
    Ok(CuspTable { n, rows, total })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ModelId {
    X20,
    X27,
    X32,
    X36,
}

impl ModelId {
    pub const ALL: [ModelId; 4] = [ModelId::X20, ModelId::X27, ModelId::X32, ModelId::X36];

    pub fn coeffs(self) -> [i64; 5] {
        match self {
            ModelId::X20 => [0, 1, 0, 4, 4],
            ModelId::X27 => [0, 0, 1, 0, -7],
            ModelId::X32 => [0, 0, 0, 4, 0],
            ModelId::X36 => [0, 0, 0, 0, 1],
        }
    }

    pub fn level(self) -> u64 {
        match self {
            ModelId::X20 => 20,
            ModelId::X27 => 27,
            ModelId::X32 => 32,
            ModelId::X36 => 36,
        }
    }

    /// The number of K-points the inventory must reproduce, where known.
    pub fn expected_count(self, field: QField) -> Option<usize> {
        match (self, field) {
            (ModelId::X20, QField::Gauss) => Some(12),
            (ModelId::X20, QField::Eisenstein) => None,
            (ModelId::X27, QField::Gauss) => Some(3),
            (ModelId::X27, QField::Eisenstein) => Some(9),
            (ModelId::X32, QField::Gauss) => Some(8),
            (ModelId::X32, QField::Eisenstein) => Some(4),
            (ModelId::X36, QField::Gauss) => Some(6),
            (ModelId::X36, QField::Eisenstein) => Some(12),
        }
    }

    pub fn curve(self, field: QField) -> Curve<FieldElem> {
        Curve::from_i64(field, self.coeffs()).expect("nonsingular model")
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "X0({})", self.level())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Inventory {
    pub model: ModelId,
    pub field: QField,
    pub curve: String,
    pub group: Shape,
    pub points: Vec<String>,
    pub expected: Option<usize>,
    /// The models have rank 0 over K, so the K-points are the torsion points.
    pub assumption: &'static str,
}

/// All K-points of the model, as the torsion points of its Mordell-Weil group.
pub fn model_point_inventory(model: ModelId, field: QField) -> Result<Inventory> {
    let e = model.curve(field);
    let t = torsion_k(&e)?;
    let mut pts: Vec<Point<FieldElem>> = t.points(&e);
    pts.sort_by_key(|p| p.to_string());
    let expected = model.expected_count(field);
    if let Some(n) = expected {
        if pts.len() != n {
            return Err(Error::Violation(format!("{model} over {field} has {} points, expected {n}", pts.len())));
        }
    }
    Ok(Inventory {
        model,
        field,
        curve: e.to_string(),
        group: t.shape,
        points: pts.iter().map(|p| p.to_string()).collect(),
        expected,
        assumption: "Mordell-Weil rank 0 over K",
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FermatSolution {
    pub x: RadicalElem,
    pub y: RadicalElem,
    pub trivial: bool,
}

impl FermatSolution {
    fn new(x: RadicalElem, y: RadicalElem) -> Self {
        let trivial = x.is_zero() || y.is_zero();
        FermatSolution { x, y, trivial }
    }

    pub fn verify(&self) -> bool {
        let (x, y) = RadicalElem::unify(&self.x, &self.y).expect("same tower");
        (x.pow(4) + y.pow(4)).is_one()
    }
}

impl fmt::Display for FermatSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Serialize for FermatSolution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("FermatSolution", 3)?;
        st.serialize_field("x", &self.x.to_string())?;
        st.serialize_field("y", &self.y.to_string())?;
        st.serialize_field("trivial", &self.trivial)?;
        st.end()
    }
}

fn sort_solutions(v: &mut Vec<FermatSolution>) {
    v.sort_by_key(|s| (!s.trivial, s.to_string()));
    v.dedup_by(|a, b| a.x == b.x && a.y == b.y);
}

/// The solutions of `x^4 + y^4 = 1` over `Q(i, sqrt(-7))`: the eight trivial
/// ones and `(e1 (1 + e3 w)/2, e2 (1 - e3 w)/2)` with `w = sqrt(-7)`,
/// `e1, e2` fourth roots of unity and `e3 = ±1`.  Each one is checked.
pub fn fermat_quartic_solutions() -> Result<Vec<FermatSolution>> {
    let g = QField::Gauss;
    let w = RadicalElem::tower(g, &[g.int(-7)])?.pop().unwrap();
    let units: Vec<RadicalElem> = g.units().into_iter().map(|u| w.base_like(u)).collect();
    let zero = w.zero_like();
    let mut out = Vec::new();
    for u in &units {
        out.push(FermatSolution::new(u.clone(), zero.clone()));
        out.push(FermatSolution::new(zero.clone(), u.clone()));
    }
    let half = g.frac(1, 2, 0, 1);
    for e3 in [1, -1] {
        let s = w.scale(&g.int(e3));
        let a = (w.one_like() + s.clone()).scale(&half);
        let b = (w.one_like() - s).scale(&half);
        for e1 in &units {
            for e2 in &units {
                out.push(FermatSolution::new(e1.clone() * a.clone(), e2.clone() * b.clone()));
            }
        }
    }
    if let Some(bad) = out.iter().find(|s| !s.verify()) {
        return Err(Error::Violation(format!("{bad} is not on x^4 + y^4 = 1")));
    }
    sort_solutions(&mut out);
    Ok(out)
}

/// Largest absolute numerator or denominator among the rational coordinates.
pub fn height(x: &RadicalElem) -> u64 {
    let h = x.coords().iter().map(|c| c.height()).max().unwrap_or_default();
    u64::try_from(h).unwrap_or(u64::MAX)
}

fn rationals(h: u64) -> Vec<BigRational> {
    let h = h as i64;
    let mut v = Vec::new();
    for q in 1..=h {
        for p in -h..=h {
            if p != 0 && p.gcd(&q) == 1 {
                v.push(ratio(p, q));
            }
        }
    }
    v
}

/// All y in the tower with `y^4 = c`.
fn fourth_roots(c: &RadicalElem) -> Vec<RadicalElem> {
    if c.is_zero() {
        return vec![c.clone()];
    }
    let mut out = Vec::new();
    if let Some(w) = c.sqrt_in_tower() {
        for w in [w.clone(), -w] {
            if let Some(y) = w.sqrt_in_tower() {
                out.push(y.clone());
                out.push(-y);
            }
        }
    }
    out
}

/// Solutions of `x^4 + y^4 = 1` in `K(sqrt(d1), ...)` (depth <= 2) with both
/// coordinates of height <= h.  Over K itself every x is tried; in a tower x
/// runs over elements with at most two nonzero rational coordinates.
pub fn fermat_quartic_search(field: QField, rads: &[FieldElem], h: u64) -> Result<Vec<FermatSolution>> {
    if rads.len() > 2 {
        return Err(Error::TowerTooDeep(rads.len()));
    }
    if h > 50 {
        return Err(Error::OutOfRange(format!("height bound {h}")));
    }
    let ds: Vec<FieldElem> = match RadicalElem::tower(field, rads)?.pop() {
        Some(r) => r.radicands().to_vec(),
        None => vec![],
    };
    let template = RadicalElem::new(field, ds.clone(), vec![field.zero(); 1 << ds.len()])?;
    let slots = 2usize << ds.len();
    let qs = rationals(h);
    let build = |picks: &[(usize, &BigRational)]| {
        let mut coords = vec![field.zero(); 1 << ds.len()];
        for (slot, q) in picks {
            let c = &mut coords[slot / 2];
            if slot % 2 == 0 {
                c.a = (*q).clone();
            } else {
                c.b = (*q).clone();
            }
        }
        RadicalElem::new(field, ds.clone(), coords).expect("tower within cap")
    };
    let mut supports: Vec<(usize, Option<usize>)> = (0..slots).map(|i| (i, None)).collect();
    for i in 0..slots {
        for j in i + 1..slots {
            supports.push((i, Some(j)));
        }
    }
    let solve = |x: RadicalElem| -> Vec<FermatSolution> {
        let c = x.one_like() - x.pow(4);
        fourth_roots(&c)
            .into_iter()
            .filter(|y| height(y) <= h)
            .map(|y| FermatSolution::new(x.clone(), y))
            .collect()
    };
    let mut out: Vec<FermatSolution> = solve(template.clone());
    let found: Vec<FermatSolution> = supports
        .par_iter()
        .flat_map_iter(|&(i, j)| {
            let mut local = Vec::new();
            for qi in &qs {
                match j {
                    None => local.extend(solve(build(&[(i, qi)]))),
                    Some(j) => {
                        for qj in &qs {
                            local.extend(solve(build(&[(i, qi), (j, qj)])));
                        }
                    }
                }
            }
            local
        })
        .collect();
    out.extend(found);
    if let Some(bad) = out.iter().find(|s| !s.verify()) {
        return Err(Error::Violation(format!("{bad} is not on x^4 + y^4 = 1")));
    }
    sort_solutions(&mut out);
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberReport {
    pub equation: &'static str,
    pub field: QField,
    pub point: String,
    pub preimages: Vec<String>,
    pub nontrivial: usize,
}

fn affine(e: &Curve<FieldElem>) -> Result<Vec<(FieldElem, FieldElem)>> {
    let t = torsion_k(e)?;
    Ok(t.points(e)
        .into_iter()
        .filter_map(|p| match p {
            Point::Aff(x, y) => Some((x, y)),
            Point::Inf => None,
        })
        .collect())
}

/// `x^4 + y^2 = 1` over `y^2 = x^3 + 4x` by `(2x^2/(1-y), 4x/(1-y))`.
fn fiber_quartic_square(x0: &FieldElem, y0: &FieldElem) -> Vec<(FieldElem, FieldElem)> {
    let f = x0.field;
    let one = f.one();
    let on = |x: &FieldElem, y: &FieldElem| (x.pow(4) + y.square()).is_one();
    if y0.is_zero() {
        let p = (f.zero(), -one);
        return if x0.is_zero() && on(&p.0, &p.1) { vec![p] } else { vec![] };
    }
    let x = f.int(2) * x0 / y0;
    let y = &one - &(f.int(4) * &x / y0);
    let maps = !(&one - &y).is_zero() && f.int(2) * x.square() / (&one - &y) == *x0;
    if on(&x, &y) && maps { vec![(x, y)] } else { vec![] }
}

/// `x^4 - y^4 = z^2`, up to `(a, b, c) -> (la, lb, l^2 c)`, over
/// `y^2 = x^3 + 4x` by `(2b^2/(a^2-c), 4ab/(a^2-c))`; b = 1 when b != 0.
fn fiber_quartic_difference(x0: &FieldElem, y0: &FieldElem) -> Vec<[FieldElem; 3]> {
    let f = x0.field;
    if x0.is_zero() {
        return vec![];
    }
    let a = y0 / &(f.int(2) * x0);
    let c = a.square() - f.int(2) / x0.clone();
    if a.pow(4) - f.one() == c.square() { vec![[a, f.one(), c]] } else { vec![] }
}

/// `x^4 + y^4 = z^2` over `y^2 = x^3 - 4x` by `(-2x^2/(y^2-z), 4xy/(y^2-z))`; x = 1 when x != 0.
fn fiber_quartic_sum(x0: &FieldElem, y0: &FieldElem) -> Vec<[FieldElem; 3]> {
    let f = x0.field;
    if x0.is_zero() {
        return vec![];
    }
    let y = -(y0 / &(f.int(2) * x0));
    let z = y.square() + f.int(2) / x0.clone();
    if f.one() + y.pow(4) == z.square() { vec![[f.one(), y, z]] } else { vec![] }
}

/// Pulls every K-point of `y^2 = x^3 + 4x` (both fields) and `y^2 = x^3 - 4x`
/// (over Q(i)) back along the maps from the three quartics; a nontrivial
/// preimage is a violation.
pub fn diophantine_maps_check() -> Result<Vec<FiberReport>> {
    let mut out = Vec::new();
    let show = |v: &[FieldElem]| format!("({})", v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", "));
    for field in [QField::Gauss, QField::Eisenstein] {
        let e = Curve::from_i64(field, [0, 0, 0, 4, 0])?;
        for (x0, y0) in affine(&e)? {
            let point = format!("({x0}, {y0})");
            let pre = fiber_quartic_square(&x0, &y0);
            out.push(FiberReport {
                equation: "x^4 + y^2 = 1",
                field,
                point: point.clone(),
                nontrivial: pre.iter().filter(|(x, y)| !x.is_zero() && !y.is_zero()).count(),
                preimages: pre.iter().map(|(x, y)| show(&[x.clone(), y.clone()])).collect(),
            });
            let pre = fiber_quartic_difference(&x0, &y0);
            out.push(FiberReport {
                equation: "x^4 - y^4 = z^2",
                field,
                point,
                nontrivial: pre.iter().filter(|v| v.iter().all(|c| !c.is_zero())).count(),
                preimages: pre.iter().map(|v| show(v)).collect(),
            });
        }
    }
    let g = QField::Gauss;
    let e = Curve::from_i64(g, [0, 0, 0, -4, 0])?;
    for (x0, y0) in affine(&e)? {
        let pre = fiber_quartic_sum(&x0, &y0);
        out.push(FiberReport {
            equation: "x^4 + y^4 = z^2",
            field: g,
            point: format!("({x0}, {y0})"),
            nontrivial: pre.iter().filter(|v| !v[0].is_zero() && !v[1].is_zero()).count(),
            preimages: pre.iter().map(|v| show(v)).collect(),
        });
    }
    if let Some(r) = out.iter().find(|r| r.nontrivial > 0) {
        return Err(Error::Violation(format!("nontrivial solution of {} over {} above {}", r.equation, r.field, r.point)));
    }
    Ok(out)
}

/// One spot check: a quoted value against the computed one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub computed: String,
    pub pass: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, expected: impl ToString, computed: impl ToString) -> Check {
        let (expected, computed) = (expected.to_string(), computed.to_string());
        Check { name: name.into(), pass: expected == computed, expected, computed }
    }
}

fn q_curve(a: [i64; 5]) -> Result<Curve<BigRational>> {
    Curve::new(a.map(|v| BigRational::from_integer(v.into())))
}

/// j of the CM models with orders of conductor 3 (discriminant -27) and
/// 2 (discriminant -16), and of `y^2 = x^3 + 4x`.
pub fn j_invariant_checks() -> Result<Vec<Check>> {
    let quoted = [
        ("j(y^2 + y = x^3 - 270x - 1708)", [0, 0, 1, -270, -1708], "-12288000"),
        ("j(y^2 = x^3 - 11x - 14)", [0, 0, 0, -11, -14], "1331"),
        ("j(y^2 = x^3 + 4x)", [0, 0, 0, 4, 0], "1728"),
    ];
    quoted.iter().map(|(name, a, v)| Ok(Check::new(*name, v, q_curve(*a)?.j()))).collect()
}

/// `h(u) = u^6 + u^5 - 6u^4 - 3u^3 + 14u^2 - 7u + 1`, the sextic factor of the
/// descent curve for the order-7 family.
pub const DESCENT_SEXTIC: [i64; 7] = [1, -7, 14, -3, -6, 1, 1];

fn sextic_mod(ctx: &'static FqCtx) -> Poly<Fq> {
    Poly::new(DESCENT_SEXTIC.iter().map(|&v| ctx.from_i64(v)).collect())
}

/// Point counts over finite fields: `y^2 = x^3 - 11x - 14` over F_81, the
/// Jacobians of `z^2 = h(u)` and `z^2 = 7i h(u)` at `(2-i)` and `(2-3i)`,
/// and the empty covers `z^2 = d h(u)` for the remaining square-free d.
pub fn finite_field_checks() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let f81 = FqCtx::get(3, 4)?;
    let e = Curve::new([0, 0, 0, -11, -14].map(|v| f81.from_i64(v)))?;
    let n = count_points(&e)?;
    out.push(Check::new("#E(F_81) for y^2 = x^3 - 11x - 14", 64, n));
    out.push(Check::new("5 divides #E(F_81)", false, n % 5 == 0));
    let g = QField::Gauss;
    for (prime, expect) in [(g.elem(2, -1), 79), (g.elem(2, -3), 171)] {
        let map = ResidueMap::new(&prime)?;
        let h = sextic_mod(map.ctx);
        for (label, d) in [("1", g.one()), ("7i", g.elem(0, 7))] {
            let z = genus2_jacobian_order(&h, &map.reduce(&d)?)?;
            out.push(Check::new(format!("#J(F_{}) for z^2 = {label} h(u) at ({prime})", map.q()), expect, z.jacobian_order));
        }
    }
    let covers = [
        (g.elem(0, 1), g.elem(2, -1)),
        (g.elem(1, 1), g.elem(2, -1)),
        (g.int(7), g.elem(2, -1)),
        (g.elem(-7, 7), g.elem(2, -1)),
        (g.elem(-1, 1), g.elem(2, 1)),
        (g.elem(7, 7), g.elem(2, 1)),
    ];
    for (d, prime) in covers {
        let map = ResidueMap::new(&prime)?;
        let r = map.reduce(&d)?;
        let h = sextic_mod(map.ctx);
        let pts = genus2_affine_count(&h, &r)? + if r.is_square() { 2 } else { 0 };
        out.push(Check::new(format!("#C(F_{}) for z^2 = ({d}) h(u) at ({prime})", map.q()), 0, pts));
    }
    Ok(out)
}

/// `E_t: y^2 + (1-c)xy - by = x^3 - bx^2` with `b = t^3 - t^2`, `c = t^2 - t`,
/// the curves with a point (0, 0) of order 7.
pub fn kubert_curve(t: &BigRational) -> Result<Curve<BigRational>> {
    let one = BigRational::from_integer(1.into());
    let b = t.pow(3) - t.square();
    let c = t.square() - t.clone();
    let z = t.zero_like();
    Curve::new([one - c, -b.clone(), -b.clone(), z.clone(), z])
}

/// The displayed closed form of the monic 3-division polynomial of `E_t`.
pub fn kubert_psi3_formula(t: &BigRational) -> Poly<BigRational> {
    let q = |n: i64, d: i64| ratio(n, d);
    let c0 = q(-1, 3) * t.pow(9) + t.pow(8) - t.pow(7) + q(1, 3) * t.pow(6);
    let c1 = t.pow(6) - q(2, 1) * t.pow(5) + t.pow(4);
    let c2 = t.pow(5) - q(2, 1) * t.pow(4) + t.square();
    let c3 = q(1, 3) * t.pow(4) - q(2, 1) * t.pow(3) + t.square() + q(2, 3) * t.clone() + q(1, 3);
    Poly::new(vec![c0, c1, c2, c3, q(1, 1)])
}

/// psi_3 of `E_t` divided by its leading coefficient.
pub fn kubert_psi3(t: &BigRational) -> Result<Poly<BigRational>> {
    Ok(division_poly(&kubert_curve(t)?, 3)?.monic())
}

/// Named groups of checks driven by `verify`.
pub fn verify_suite(name: &str) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let all = name == "all";
    if all || name == "cusps" {
        let expect: [(u64, u64, Option<&[(u64, u64)]>); 4] = [
            (32, 8, Some(&[(1, 1), (2, 1), (4, 2), (8, 2), (16, 1), (32, 1)])),
            (36, 12, Some(&[(1, 1), (2, 1), (3, 2), (4, 1), (6, 2), (9, 1), (12, 2), (18, 1), (36, 1)])),
            (20, 6, None),
            (27, 6, None),
        ];
        for (n, total, rows) in expect {
            let t = ogg_cusps(n)?;
            out.push(Check::new(format!("cusps of X0({n})"), total, t.total));
            if let Some(rows) = rows {
                out.push(Check::new(format!("cusp table of X0({n})"), format!("{rows:?}"), format!("{:?}", t.rows)));
            }
        }
    }
    if all || name == "inventories" {
        for m in ModelId::ALL {
            for f in [QField::Gauss, QField::Eisenstein] {
                let Some(n) = m.expected_count(f) else { continue };
                let got = match model_point_inventory(m, f) {
                    Ok(inv) => inv.points.len().to_string(),
                    Err(e) => e.to_string(),
                };
                out.push(Check::new(format!("#{m}({})", f.name()), n, got));
            }
        }
    }
    if all || name == "fermat" {
        let s = fermat_quartic_solutions()?;
        let ok = s.iter().filter(|s| s.verify()).count();
        out.push(Check::new("solutions of x^4 + y^4 = 1 over Q(i, sqrt(-7)) verified", 40, ok));
        out.push(Check::new("nontrivial solutions", 32, s.iter().filter(|s| !s.trivial).count()));
    }
    if all || name == "jacobian" {
        out.extend(finite_field_checks()?);
    }
    if all || name == "jinv" {
        out.extend(j_invariant_checks()?);
    }
    if all || name == "division" {
        let t = ratio(2, 1);
        out.push(Check::new("monic psi_3 of E_2", format!("{:?}", kubert_psi3_formula(&t)), format!("{:?}", kubert_psi3(&t)?)));
    }
    if out.is_empty() {
        return Err(Error::Parse { pos: 0, token: name.to_string(), msg: "unknown suite".into() });
    }
    Ok(out)
}
