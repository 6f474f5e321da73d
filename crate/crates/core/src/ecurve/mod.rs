//! Elliptic curves in long Weierstrass form over any [`Field`].

mod divpoly;
mod genus2;
mod reduce;
mod twist;

pub use divpoly::{division_poly, division_polys, halving_quartic, ldivision_poly, psi2_squared, torsion_x_poly, DivisionPoly};
pub use genus2::{genus2_affine_count, genus2_jacobian_order, ZetaData};
pub use reduce::{chi, count_points, reduce_curve, Reduction, ReductionKind};
pub use twist::{two_torsion_point, two_torsion_split, TwistForm, TwoTorsion};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::qfield::{parse_coeffs, FieldElem, QField};
use std::fmt;

#[derive(Clone, PartialEq)]
pub enum Point<F> {
    Inf,
    Aff(F, F),
}

impl<F: Field> Point<F> {
    pub fn is_inf(&self) -> bool {
        matches!(self, Point::Inf)
    }

    pub fn x(&self) -> Option<&F> {
        match self {
            Point::Inf => None,
            Point::Aff(x, _) => Some(x),
        }
    }

    pub fn y(&self) -> Option<&F> {
        match self {
            Point::Inf => None,
            Point::Aff(_, y) => Some(y),
        }
    }

    pub fn map<G>(&self, f: impl Fn(&F) -> G) -> Point<G> {
        match self {
            Point::Inf => Point::Inf,
            Point::Aff(x, y) => Point::Aff(f(x), f(y)),
        }
    }
}

impl<F: fmt::Debug> fmt::Debug for Point<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Inf => f.write_str("O"),
            Point::Aff(x, y) => write!(f, "({:?}, {:?})", x, y),
        }
    }
}

impl<F: fmt::Display> fmt::Display for Point<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Inf => f.write_str("O"),
            Point::Aff(x, y) => write!(f, "({}, {})", x, y),
        }
    }
}

/// `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6` with cached invariants.
#[derive(Clone, PartialEq)]
pub struct Curve<F> {
    pub a1: F,
    pub a2: F,
    pub a3: F,
    pub a4: F,
    pub a6: F,
    b2: F,
    b4: F,
    b6: F,
    b8: F,
    c4: F,
    c6: F,
    disc: F,
    j: F,
}

impl<F: Field> Curve<F> {
    pub fn new(a: [F; 5]) -> Result<Self> {
        let [a1, a2, a3, a4, a6] = a;
        let n = |k: i64| a1.from_i64_like(k);
        let b2 = a1.square() + n(4) * a2.clone();
        let b4 = n(2) * a4.clone() + a1.clone() * a3.clone();
        let b6 = a3.square() + n(4) * a6.clone();
        let b8 = a1.square() * a6.clone() + n(4) * a2.clone() * a6.clone() - a1.clone() * a3.clone() * a4.clone()
            + a2.clone() * a3.square()
            - a4.square();
        let c4 = b2.square() - n(24) * b4.clone();
        let c6 = -(b2.pow(3)) + n(36) * b2.clone() * b4.clone() - n(216) * b6.clone();
        let disc = -(b2.square() * b8.clone()) - n(8) * b4.pow(3) - n(27) * b6.square()
            + n(9) * b2.clone() * b4.clone() * b6.clone();
        if disc.is_zero() {
            return Err(Error::Singular);
        }
        let j = c4.pow(3) / disc.clone();
        Ok(Curve { a1, a2, a3, a4, a6, b2, b4, b6, b8, c4, c6, disc, j })
    }

    /// `y^2 = x^3 + a x + b`.
    pub fn short(a: F, b: F) -> Result<Self> {
        let z = a.zero_like();
        Curve::new([z.clone(), z.clone(), z, a, b])
    }

    pub fn coeffs(&self) -> [F; 5] {
        [self.a1.clone(), self.a2.clone(), self.a3.clone(), self.a4.clone(), self.a6.clone()]
    }

    pub fn b2(&self) -> &F {
        &self.b2
    }
    pub fn b4(&self) -> &F {
        &self.b4
    }
    pub fn b6(&self) -> &F {
        &self.b6
    }
    pub fn b8(&self) -> &F {
        &self.b8
    }
    pub fn c4(&self) -> &F {
        &self.c4
    }
    pub fn c6(&self) -> &F {
        &self.c6
    }
    pub fn disc(&self) -> &F {
        &self.disc
    }
    pub fn j(&self) -> &F {
        &self.j
    }

    pub fn is_short(&self) -> bool {
        self.a1.is_zero() && self.a2.is_zero() && self.a3.is_zero()
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> Result<Curve<G>> {
        Curve::new([f(&self.a1), f(&self.a2), f(&self.a3), f(&self.a4), f(&self.a6)])
    }

    /// Right side minus left side of the equation at (x, y).
    fn defect(&self, x: &F, y: &F) -> F {
        let lhs = y.square() + self.a1.clone() * x.clone() * y.clone() + self.a3.clone() * y.clone();
        let rhs = x.pow(3) + self.a2.clone() * x.square() + self.a4.clone() * x.clone() + self.a6.clone();
        rhs - lhs
    }

    pub fn contains(&self, p: &Point<F>) -> bool {
        match p {
            Point::Inf => true,
            Point::Aff(x, y) => self.defect(x, y).is_zero(),
        }
    }

    /// The cubic `x^3 + a2 x^2 + a4 x + a6`.
    pub fn rhs(&self, x: &F) -> F {
        x.pow(3) + self.a2.clone() * x.square() + self.a4.clone() * x.clone() + self.a6.clone()
    }

    pub fn neg(&self, p: &Point<F>) -> Point<F> {
        match p {
            Point::Inf => Point::Inf,
            Point::Aff(x, y) => {
                Point::Aff(x.clone(), -y.clone() - self.a1.clone() * x.clone() - self.a3.clone())
            }
        }
    }

    pub fn add(&self, p: &Point<F>, q: &Point<F>) -> Point<F> {
        let (x1, y1, x2, y2) = match (p, q) {
            (Point::Inf, _) => return q.clone(),
            (_, Point::Inf) => return p.clone(),
            (Point::Aff(x1, y1), Point::Aff(x2, y2)) => (x1, y1, x2, y2),
        };
        let two = x1.from_i64_like(2);
        let three = x1.from_i64_like(3);
        let (lambda, nu) = if x1 == x2 {
            let den = y1.clone() + y2.clone() + self.a1.clone() * x2.clone() + self.a3.clone();
            if den.is_zero() {
                return Point::Inf;
            }
            let den = two.clone() * y1.clone() + self.a1.clone() * x1.clone() + self.a3.clone();
            let lam = (three * x1.square() + two.clone() * self.a2.clone() * x1.clone() + self.a4.clone()
                - self.a1.clone() * y1.clone())
                / den.clone();
            let nu = (-(x1.pow(3)) + self.a4.clone() * x1.clone() + two * self.a6.clone()
                - self.a3.clone() * y1.clone())
                / den;
            (lam, nu)
        } else {
            let den = x2.clone() - x1.clone();
            let lam = (y2.clone() - y1.clone()) / den.clone();
            let nu = (y1.clone() * x2.clone() - y2.clone() * x1.clone()) / den;
            (lam, nu)
        };
        let x3 = lambda.square() + self.a1.clone() * lambda.clone() - self.a2.clone() - x1.clone() - x2.clone();
        let y3 = -(lambda + self.a1.clone()) * x3.clone() - nu - self.a3.clone();
        Point::Aff(x3, y3)
    }

    pub fn double(&self, p: &Point<F>) -> Point<F> {
        self.add(p, p)
    }

    /// `[n]P` by double-and-add.
    pub fn mul(&self, n: i64, p: &Point<F>) -> Point<F> {
        let mut k = n.unsigned_abs();
        let mut base = if n < 0 { self.neg(p) } else { p.clone() };
        let mut acc = Point::Inf;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(&acc, &base);
            }
            base = self.double(&base);
            k >>= 1;
        }
        acc
    }

    /// Order of a point, searched up to `limit`.
    pub fn order(&self, p: &Point<F>, limit: u64) -> Option<u64> {
        let mut q = p.clone();
        for n in 1..=limit {
            if q.is_inf() {
                return Some(n);
            }
            q = self.add(&q, p);
        }
        None
    }

    /// The model `Y^2 = X^3 + A X + B` with X = x + b2/12, Y = y + (a1 x + a3)/2.
    pub fn to_short(&self) -> Curve<F> {
        let n = |k: i64| self.a1.from_i64_like(k);
        let a = -(self.c4.clone()) / n(48);
        let b = -(self.c6.clone()) / n(864);
        Curve::short(a, b).expect("isomorphic model is nonsingular")
    }

    pub fn point_to_short(&self, p: &Point<F>) -> Point<F> {
        match p {
            Point::Inf => Point::Inf,
            Point::Aff(x, y) => {
                let n = |k: i64| x.from_i64_like(k);
                let xs = x.clone() + self.b2.clone() / n(12);
                let ys = y.clone() + (self.a1.clone() * x.clone() + self.a3.clone()) / n(2);
                Point::Aff(xs, ys)
            }
        }
    }

    pub fn point_from_short(&self, p: &Point<F>) -> Point<F> {
        match p {
            Point::Inf => Point::Inf,
            Point::Aff(xs, ys) => {
                let n = |k: i64| xs.from_i64_like(k);
                let x = xs.clone() - self.b2.clone() / n(12);
                let y = ys.clone() - (self.a1.clone() * x.clone() + self.a3.clone()) / n(2);
                Point::Aff(x, y)
            }
        }
    }

    /// `y^2 = x^3 + a d^2 x + b d^3` from the short model.
    pub fn quadratic_twist(&self, d: &F) -> Result<Curve<F>> {
        if d.is_zero() {
            return Err(Error::Zero);
        }
        let s = if self.is_short() { self.clone() } else { self.to_short() };
        Curve::short(s.a4.clone() * d.square(), s.a6.clone() * d.pow(3))
    }
}

impl<F: Field + fmt::Display> fmt::Display for Curve<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{},{},{}]", self.a1, self.a2, self.a3, self.a4, self.a6)
    }
}

impl<F: Field> fmt::Debug for Curve<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?},{:?},{:?},{:?},{:?}]", self.a1, self.a2, self.a3, self.a4, self.a6)
    }
}

impl Curve<FieldElem> {
    pub fn parse(field: QField, text: &str) -> Result<Self> {
        let c = parse_coeffs(field, text)?;
        let c: [FieldElem; 5] = c.try_into().map_err(|v: Vec<FieldElem>| Error::Parse {
            pos: 0,
            token: text.to_string(),
            msg: format!("expected 5 coefficients, found {}", v.len()),
        })?;
        Curve::new(c)
    }

    pub fn from_i64(field: QField, a: [i64; 5]) -> Result<Self> {
        Curve::new(a.map(|v| field.int(v)))
    }

    pub fn field(&self) -> QField {
        self.a1.field
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::{Fq, FqCtx};
    use proptest::prelude::*;

    fn pt(f: QField, x: i64, y: i64) -> Point<FieldElem> {
        Point::Aff(f.int(x), f.int(y))
    }

    #[test]
    fn group_law_examples() {
        let g = QField::Gauss;
        let e = Curve::from_i64(g, [0, 0, 0, 4, 0]).unwrap();
        assert_eq!(e.double(&pt(g, 2, 4)), pt(g, 0, 0));
        assert_eq!(e.add(&pt(g, 2, 4), &Point::Inf), pt(g, 2, 4));
        assert_eq!(e.double(&pt(g, 0, 0)), Point::Inf);
        assert_eq!(e.mul(4, &pt(g, 2, 4)), Point::Inf);
        assert_eq!(e.mul(1, &pt(g, 2, 4)), pt(g, 2, 4));
        assert_eq!(e.mul(-1, &pt(g, 2, 4)), pt(g, 2, -4));
        assert_eq!(e.order(&pt(g, 2, 4), 10), Some(4));
        let e = Curve::from_i64(g, [0, 25, 0, 144, 0]).unwrap();
        assert!(e.contains(&pt(g, 12, 84)));
        assert_eq!(e.mul(2, &pt(g, 12, 84)), pt(g, 0, 0));
        assert_eq!(*e.j(), Curve::from_i64(g, [0, 25, 0, 144, 0]).unwrap().j().clone());
        assert_eq!(Curve::from_i64(g, [0, 0, 0, 0, 0]), Err(Error::Singular));
    }

    #[test]
    fn j_values() {
        let g = QField::Gauss;
        assert_eq!(*Curve::from_i64(g, [0, 0, 0, 4, 0]).unwrap().j(), g.int(1728));
        assert_eq!(*Curve::from_i64(g, [0, 0, 1, -270, -1708]).unwrap().j(), g.int(-12288000));
        // c4 = 528, disc = 512, so j = 528^3 / 512 = 66^3
        assert_eq!(*Curve::from_i64(g, [0, 0, 0, -11, -14]).unwrap().j(), g.int(287496));
    }

    #[test]
    fn twist_examples() {
        let g = QField::Gauss;
        let e = Curve::from_i64(g, [0, 0, 0, 4, 0]).unwrap();
        assert_eq!(e.quadratic_twist(&g.s()).unwrap(), Curve::from_i64(g, [0, 0, 0, -4, 0]).unwrap());
        assert_eq!(e.quadratic_twist(&g.one()).unwrap(), e);
        assert!(e.quadratic_twist(&g.zero()).is_err());
    }

    #[test]
    fn short_model_roundtrip() {
        let g = QField::Gauss;
        let e = Curve::parse(g, "[1,-1,1,-3,3]").unwrap();
        let s = e.to_short();
        assert_eq!(s.j(), e.j());
        let p = Point::Aff(g.int(1), g.int(0));
        assert!(e.contains(&p));
        let ps = e.point_to_short(&p);
        assert!(s.contains(&ps));
        assert_eq!(e.point_from_short(&ps), p);
        assert_eq!(e.point_to_short(&e.double(&p)), s.double(&ps));
    }

    #[test]
    fn parse_errors() {
        let g = QField::Gauss;
        assert!(matches!(Curve::parse(g, "[0,0,0,4]"), Err(Error::Parse { .. })));
        assert!(matches!(Curve::parse(g, "[0,0,0,4,x]"), Err(Error::Parse { pos: 9, .. })));
    }

    fn random_point(e: &Curve<Fq>, ctx: &'static FqCtx, seed: u64) -> Point<Fq> {
        let mut i = seed % ctx.q;
        loop {
            let x = ctx.from_index(i);
            let b = e.a1 * x + e.a3;
            let disc = b * b + ctx.from_i64(4) * e.rhs(&x);
            if let Some(r) = disc.sqrt() {
                let y = (r - b) / ctx.from_i64(2);
                return Point::Aff(x, y);
            }
            i = (i + 1) % ctx.q;
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn associativity(p_idx in 0usize..8, a in proptest::array::uniform5(0u64..1000), s in proptest::array::uniform3(0u64..10_000)) {
            let primes = [5u64, 7, 11, 13, 17, 19, 23, 29];
            let ctx = FqCtx::get(primes[p_idx], 1).unwrap();
            let c = a.map(|v| ctx.from_i64(v as i64));
            let Ok(e) = Curve::new(c) else { return Ok(()) };
            let (p, q, r) = (random_point(&e, ctx, s[0]), random_point(&e, ctx, s[1]), random_point(&e, ctx, s[2]));
            prop_assert!(e.contains(&p) && e.contains(&q) && e.contains(&r));
            prop_assert_eq!(e.add(&e.add(&p, &q), &r), e.add(&p, &e.add(&q, &r)));
            prop_assert_eq!(e.add(&p, &e.neg(&p)), Point::Inf);
            prop_assert!(e.contains(&e.add(&p, &q)));
        }

        #[test]
        fn twist_preserves_j(a in -20i64..20, b in -20i64..20, d1 in -9i64..9, d2 in -9i64..9, eis: bool) {
            let f = if eis { QField::Eisenstein } else { QField::Gauss };
            let Ok(e) = Curve::from_i64(f, [0, 0, 0, a, b]) else { return Ok(()) };
            let d = f.elem(d1, d2);
            prop_assume!(!d.is_zero());
            let t = e.quadratic_twist(&d).unwrap();
            prop_assert_eq!(t.j(), e.j());
        }
    }
}
