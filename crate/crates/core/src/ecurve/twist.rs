//! Full 2-torsion models `y^2 = x(x+a)(x+b)` and the splitting of the
//! 2-division cubic over K.

use super::divpoly::psi2_squared;
use super::{Curve, Point};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::qfield::{factor_ok, gcd_ok, roots_in_k, FieldElem, QField, RingElem};
use num_rational::BigRational;
use serde::Serialize;
use std::fmt;

/// `E(a,b): y^2 = x(x+a)(x+b)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwistForm {
    pub a: FieldElem,
    pub b: FieldElem,
}

impl TwistForm {
    pub fn new(a: FieldElem, b: FieldElem) -> Result<Self> {
        if a.field != b.field {
            return Err(Error::WrongField("E(a,b) with coefficients in different fields".into()));
        }
        if a.is_zero() || b.is_zero() || a == b {
            return Err(Error::Singular);
        }
        Ok(TwistForm { a, b })
    }

    pub fn from_i64(field: QField, a: i64, b: i64) -> Result<Self> {
        TwistForm::new(field.int(a), field.int(b))
    }

    /// The model moving the root `e1` to the origin, for
    /// `y^2 = (x-e1)(x-e2)(x-e3)`.
    pub fn from_roots(e1: &FieldElem, e2: &FieldElem, e3: &FieldElem) -> Result<Self> {
        TwistForm::new(e1 - e2, e1 - e3)
    }

    pub fn field(&self) -> QField {
        self.a.field
    }

    /// `[0, a+b, 0, ab, 0]`.
    pub fn curve(&self) -> Curve<FieldElem> {
        let z = self.field().zero();
        Curve::new([z.clone(), &self.a + &self.b, z.clone(), &self.a * &self.b, z])
            .expect("a, b, a-b nonzero")
    }

    /// The twist by t, which is `E(ta, tb)`.
    pub fn twist(&self, t: &FieldElem) -> Result<Self> {
        if t.is_zero() {
            return Err(Error::Zero);
        }
        TwistForm::new(t * &self.a, t * &self.b)
    }

    pub fn two_torsion(&self) -> [Point<FieldElem>; 3] {
        let z = self.field().zero();
        [
            Point::Aff(z.clone(), z.clone()),
            Point::Aff(-&self.a, z.clone()),
            Point::Aff(-&self.b, z),
        ]
    }

    /// Integral representative with square-free gcd(a, b), up to twisting
    /// by squares, with the unit-square associate chosen maximal.
    pub fn normalized(&self) -> Result<Self> {
        let field = self.field();
        let l = self.a.denom_lcm() * self.b.denom_lcm();
        let l2 = BigRational::from_integer(&l * &l);
        let (a, b) = (self.a.scale(&l2), self.b.scale(&l2));
        let g = gcd_ok(&RingElem::new(a.clone())?, &RingElem::new(b.clone())?)?;
        let mut d = field.one();
        for (p, e) in factor_ok(&g)?.factors {
            for _ in 0..e / 2 {
                d = d * p.elem();
            }
        }
        let d2 = d.square();
        let (a, b) = (&a / &d2, &b / &d2);
        let best = field
            .unit_squares()
            .into_iter()
            .map(|u| (&u * &a, &u * &b))
            .max()
            .unwrap();
        TwistForm::new(best.0, best.1)
    }
}

impl fmt::Display for TwistForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E({},{})", self.a, self.b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TwoTorsion {
    Irreducible,
    OneRoot(FieldElem),
    Full([FieldElem; 3]),
}

impl TwoTorsion {
    pub fn roots(&self) -> Vec<FieldElem> {
        match self {
            TwoTorsion::Irreducible => vec![],
            TwoTorsion::OneRoot(r) => vec![r.clone()],
            TwoTorsion::Full(r) => r.to_vec(),
        }
    }

    /// Order of E(K)[2].
    pub fn size(&self) -> u32 {
        1 + self.roots().len() as u32
    }
}

/// The splitting of the 2-division cubic over K; roots are x-coordinates of
/// the points of order 2 on the given model, sorted.
pub fn two_torsion_split(e: &Curve<FieldElem>) -> TwoTorsion {
    let r = roots_in_k(&psi2_squared(e));
    match r.len() {
        0 => TwoTorsion::Irreducible,
        1 => TwoTorsion::OneRoot(r[0].clone()),
        3 => TwoTorsion::Full([r[0].clone(), r[1].clone(), r[2].clone()]),
        n => unreachable!("a separable cubic has {n} roots"),
    }
}

/// The point of order 2 with the given x-coordinate.
pub fn two_torsion_point(e: &Curve<FieldElem>, x: &FieldElem) -> Point<FieldElem> {
    let y = -(&e.a1 * x + &e.a3) / x.field.int(2);
    Point::Aff(x.clone(), y)
}
