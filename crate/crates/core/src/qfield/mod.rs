//! Exact arithmetic in K = Q(i) and K = Q(sqrt(-3)).
//!
//! An element is stored as `a + b*s` with rational `a`, `b` and `s^2 = D`.
//! Square classes, factorization in the ring of integers and the
//! square-in-F decisions live in the submodules.

mod intfactor;
mod radical;
mod ring;
mod roots;

pub use intfactor::{factor_u64, is_prime_u64, sqrt_mod};
pub use radical::{set_tower_cap, tower_cap, RadicalElem, MAX_RADICANDS};
pub use ring::{
    factor_ok, factor_ok_bounded, factor_norm_bound, gcd_ok, gcd_via_factorization,
    primes_above, set_factor_norm_bound, square_class_eq, squarefree_part, unit_normalize, valuation,
    Factorization, PrimeKind, RingElem,
};
pub use roots::{roots_in_k, roots_in_tower};

use crate::error::{Error, Result};
use crate::field::Field;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// One of the two quadratic cyclotomic fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QField {
    /// Q(i), D = -1.
    Gauss,
    /// Q(sqrt(-3)), D = -3.
    Eisenstein,
}

impl QField {
    pub fn d(self) -> i64 {
        match self {
            QField::Gauss => -1,
            QField::Eisenstein => -3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QField::Gauss => "gauss",
            QField::Eisenstein => "eisenstein",
        }
    }

    pub fn from_name(s: &str) -> Result<QField> {
        match s {
            "gauss" => Ok(QField::Gauss),
            "eisenstein" => Ok(QField::Eisenstein),
            _ => Err(Error::Parse { pos: 0, token: s.to_string(), msg: "expected gauss or eisenstein".into() }),
        }
    }

    pub fn int(self, a: i64) -> FieldElem {
        FieldElem::new(self, rat(a), BigRational::zero())
    }

    pub fn elem(self, a: i64, b: i64) -> FieldElem {
        FieldElem::new(self, rat(a), rat(b))
    }

    pub fn frac(self, an: i64, ad: i64, bn: i64, bd: i64) -> FieldElem {
        FieldElem::new(self, ratio(an, ad), ratio(bn, bd))
    }

    pub fn zero(self) -> FieldElem {
        self.int(0)
    }

    pub fn one(self) -> FieldElem {
        self.int(1)
    }

    /// The generator `s` with `s^2 = D`.
    pub fn s(self) -> FieldElem {
        self.elem(0, 1)
    }

    /// A square root of -1 when it lies in K.
    pub fn i(self) -> Option<FieldElem> {
        match self {
            QField::Gauss => Some(self.s()),
            QField::Eisenstein => None,
        }
    }

    /// The roots of unity of the ring of integers.
    pub fn units(self) -> Vec<FieldElem> {
        match self {
            QField::Gauss => vec![self.elem(1, 0), self.elem(0, 1), self.elem(-1, 0), self.elem(0, -1)],
            QField::Eisenstein => {
                let w = self.frac(-1, 2, 1, 2);
                let mut out = vec![self.one()];
                for _ in 0..5 {
                    let next = out.last().unwrap().clone() * (-w.clone());
                    out.push(next);
                }
                out
            }
        }
    }

    /// Units modulo squares of units: a set of representatives.
    pub fn unit_classes(self) -> Vec<FieldElem> {
        match self {
            QField::Gauss => vec![self.one(), self.s()],
            QField::Eisenstein => vec![self.one(), self.int(-1)],
        }
    }

    /// Squares of units.
    pub fn unit_squares(self) -> Vec<FieldElem> {
        let mut out: Vec<FieldElem> = Vec::new();
        for u in self.units() {
            let sq = u.clone() * u;
            if !out.contains(&sq) {
                out.push(sq);
            }
        }
        out
    }

    pub fn parse(self, text: &str) -> Result<FieldElem> {
        parse_elem(self, text, 0)
    }
}

impl fmt::Display for QField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exact square root of a nonnegative rational, when it is rational.
pub fn rat_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer();
    let d = q.denom();
    let rn = n.sqrt();
    let rd = d.sqrt();
    if &(&rn * &rn) == n && &(&rd * &rd) == d {
        Some(BigRational::new(rn, rd))
    } else {
        None
    }
}

/// An element `a + b*s` of K.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldElem {
    pub field: QField,
    pub a: BigRational,
    pub b: BigRational,
}

impl FieldElem {
    pub fn new(field: QField, a: BigRational, b: BigRational) -> Self {
        FieldElem { field, a, b }
    }

    pub fn from_rational(field: QField, a: BigRational) -> Self {
        FieldElem { field, a, b: BigRational::zero() }
    }

    pub fn is_rational(&self) -> bool {
        Zero::is_zero(&self.b)
    }

    pub fn conj(&self) -> Self {
        FieldElem::new(self.field, self.a.clone(), -self.b.clone())
    }

    pub fn norm(&self) -> BigRational {
        &self.a * &self.a - rat(self.field.d()) * &self.b * &self.b
    }

    pub fn trace(&self) -> BigRational {
        &self.a + &self.a
    }

    pub fn inv(&self) -> Self {
        let n = self.norm();
        assert!(!Zero::is_zero(&n), "inverse of zero in K");
        FieldElem::new(self.field, &self.a / &n, -&self.b / &n)
    }

    /// Least common denominator of both coordinates.
    pub fn denom_lcm(&self) -> BigInt {
        self.a.denom().lcm(self.b.denom())
    }

    /// Membership in the ring of integers.
    pub fn is_integral(&self) -> bool {
        match self.field {
            QField::Gauss => self.a.is_integer() && self.b.is_integer(),
            QField::Eisenstein => {
                let two = rat(2);
                let a2 = &self.a * &two;
                let b2 = &self.b * &two;
                a2.is_integer() && b2.is_integer() && (a2.to_integer() - b2.to_integer()).is_even()
            }
        }
    }

    /// Largest absolute value among numerators and denominators.
    pub fn height(&self) -> BigInt {
        let mut h = BigInt::zero();
        for q in [&self.a, &self.b] {
            for v in [q.numer().abs(), q.denom().abs()] {
                if v > h {
                    h = v;
                }
            }
        }
        h
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        FieldElem::new(self.field, &self.a * q, &self.b * q)
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.field, other.field, "mixing elements of different fields");
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if Zero::is_zero(&self.b) {
            return write!(f, "{}", self.a);
        }
        let mag = self.b.abs();
        let s_term = if One::is_one(&mag) { "s".to_string() } else { format!("{mag}*s") };
        let sign = if self.b.is_negative() { "-" } else { "+" };
        if Zero::is_zero(&self.a) {
            write!(f, "{}{s_term}", if self.b.is_negative() { "-" } else { "" })
        } else {
            write!(f, "{}{sign}{s_term}", self.a)
        }
    }
}

impl fmt::Debug for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl PartialOrd for FieldElem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FieldElem {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.field, &self.a, &self.b).cmp(&(other.field, &other.a, &other.b))
    }
}

impl Serialize for FieldElem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'a> Add<&'a FieldElem> for &'a FieldElem {
    type Output = FieldElem;
    fn add(self, o: &FieldElem) -> FieldElem {
        self.check(o);
        FieldElem::new(self.field, &self.a + &o.a, &self.b + &o.b)
    }
}

impl<'a> Sub<&'a FieldElem> for &'a FieldElem {
    type Output = FieldElem;
    fn sub(self, o: &FieldElem) -> FieldElem {
        self.check(o);
        FieldElem::new(self.field, &self.a - &o.a, &self.b - &o.b)
    }
}

impl<'a> Mul<&'a FieldElem> for &'a FieldElem {
    type Output = FieldElem;
    fn mul(self, o: &FieldElem) -> FieldElem {
        self.check(o);
        let d = rat(self.field.d());
        FieldElem::new(
            self.field,
            &self.a * &o.a + d * &self.b * &o.b,
            &self.a * &o.b + &self.b * &o.a,
        )
    }
}

impl<'a> Div<&'a FieldElem> for &'a FieldElem {
    type Output = FieldElem;
    fn div(self, o: &FieldElem) -> FieldElem {
        self * &o.inv()
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $m(self, o: FieldElem) -> FieldElem {
                (&self).$m(&o)
            }
        }
        impl<'a> $tr<&'a FieldElem> for FieldElem {
            type Output = FieldElem;
            fn $m(self, o: &FieldElem) -> FieldElem {
                (&self).$m(o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem::new(self.field, -self.a, -self.b)
    }
}

impl Neg for &FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem::new(self.field, -self.a.clone(), -self.b.clone())
    }
}

impl Field for FieldElem {
    fn zero_like(&self) -> Self {
        self.field.zero()
    }
    fn one_like(&self) -> Self {
        self.field.one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.a) && Zero::is_zero(&self.b)
    }
    fn from_i64_like(&self, n: i64) -> Self {
        self.field.int(n)
    }
}

/// Decides whether `x` is a square in K; on success returns a witness `w`
/// with `w^2 = x`, normalized to the lexicographically larger of `±w`.
pub fn is_square_in_k(x: &FieldElem) -> Option<FieldElem> {
    if x.is_zero() {
        return Some(x.clone());
    }
    let field = x.field;
    let n = rat_sqrt(&x.norm())?;
    let d = rat(field.d());
    let two = rat(2);
    for nn in [n.clone(), -n] {
        let p2 = (&x.a + &nn) / &two;
        let q2 = (&x.a - &nn) / (&two * &d);
        let (Some(p), Some(q)) = (rat_sqrt(&p2), rat_sqrt(&q2)) else { continue };
        for q in [q.clone(), -q] {
            let w = FieldElem::new(field, p.clone(), q);
            if &w * &w == *x {
                let mw = -w.clone();
                return Some(if mw > w { mw } else { w });
            }
        }
    }
    None
}

/// Decides whether sqrt(x) is a square in F, the maximal elementary abelian
/// 2-extension of K.  On yes, returns a fourth root of `x` in a radical tower.
pub fn sqrt_is_square_in_f(x: &FieldElem) -> Result<Option<RadicalElem>> {
    if x.is_zero() {
        return Err(Error::Zero);
    }
    let field = x.field;
    if let Some(w) = is_square_in_k(x) {
        let r = RadicalElem::from_base(w);
        return Ok(Some(r.sqrt_in_f()?.expect("elements of K are squares in F")));
    }
    if field == QField::Eisenstein {
        if let Some(w) = is_square_in_k(&-x.clone()) {
            // x = -w^2, and (1+i) sqrt(2w) / 2 is a fourth root of x.
            let i = RadicalElem::from_base(field.int(-1)).sqrt_in_f()?.unwrap();
            let r = RadicalElem::from_base(field.int(2) * w).sqrt_in_f()?.unwrap();
            let one = i.one_like();
            let half = RadicalElem::from_base(FieldElem::from_rational(field, ratio(1, 2)));
            return Ok(Some((one + i) * r * half));
        }
    }
    Ok(None)
}

/// The named rule that `sqrt(a*i)` is never a square in F when K = Q(sqrt(-3)).
/// The input must be `a*i` presented in the tower K(sqrt(-1)).
pub fn sqrt_i_multiple_never_square(x: &RadicalElem) -> Result<bool> {
    if x.field() != QField::Eisenstein {
        return Err(Error::WrongField("rule applies over Q(sqrt(-3)) only".into()));
    }
    let rads = x.radicands();
    if rads.len() != 1 || is_square_in_k(&-rads[0].clone()).is_none() {
        return Err(Error::WrongField("expected the tower K(sqrt(-1))".into()));
    }
    let c = x.coords();
    if !c[0].is_zero() || c[1].is_zero() {
        return Err(Error::WrongField("expected a nonzero multiple of i".into()));
    }
    Ok(false)
}

fn parse_elem(field: QField, text: &str, offset: usize) -> Result<FieldElem> {
    let bytes = text.as_bytes();
    let mut pos = 0usize;
    let err = |pos: usize, msg: &str| {
        let end = (pos + 8).min(text.len());
        let start = pos.min(text.len());
        Error::Parse { pos: pos + offset, token: text[start..end].to_string(), msg: msg.to_string() }
    };
    let skip_ws = |pos: &mut usize| {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    let mut a: Option<BigRational> = None;
    let mut b: Option<BigRational> = None;
    let mut first = true;
    skip_ws(&mut pos);
    if pos >= bytes.len() {
        return Err(err(pos, "empty element"));
    }
    while pos < bytes.len() {
        skip_ws(&mut pos);
        let mut neg = false;
        if pos < bytes.len() && (bytes[pos] == b'+' || bytes[pos] == b'-') {
            neg = bytes[pos] == b'-';
            pos += 1;
        } else if !first {
            return Err(err(pos, "expected + or -"));
        }
        skip_ws(&mut pos);
        let start = pos;
        let mut coef: Option<BigRational> = None;
        if pos < bytes.len() && bytes[pos].is_ascii_digit() {
            while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                pos += 1;
            }
            let num: BigInt = text[start..pos].parse().map_err(|_| err(start, "bad integer"))?;
            let mut q = BigRational::from_integer(num);
            if pos < bytes.len() && bytes[pos] == b'/' {
                pos += 1;
                let ds = pos;
                while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                    pos += 1;
                }
                if ds == pos {
                    return Err(err(ds, "expected denominator"));
                }
                let den: BigInt = text[ds..pos].parse().map_err(|_| err(ds, "bad integer"))?;
                if den.is_zero() {
                    return Err(err(ds, "zero denominator"));
                }
                q = BigRational::new(q.to_integer(), den);
            }
            coef = Some(q);
        }
        skip_ws(&mut pos);
        let mut is_s = false;
        if pos < bytes.len() && bytes[pos] == b'*' {
            if coef.is_none() {
                return Err(err(pos, "unexpected *"));
            }
            pos += 1;
            skip_ws(&mut pos);
            if pos < bytes.len() && bytes[pos] == b's' {
                pos += 1;
                is_s = true;
            } else {
                return Err(err(pos, "expected s"));
            }
        } else if pos < bytes.len() && bytes[pos] == b's' {
            if coef.is_some() {
                return Err(err(pos, "expected * before s"));
            }
            pos += 1;
            is_s = true;
            coef = Some(BigRational::one());
        }
        let Some(mut c) = coef else { return Err(err(start, "expected a number or s")) };
        if neg {
            c = -c;
        }
        let slot = if is_s { &mut b } else { &mut a };
        if slot.is_some() {
            return Err(err(start, "repeated term"));
        }
        *slot = Some(c);
        first = false;
        skip_ws(&mut pos);
    }
    Ok(FieldElem::new(field, a.unwrap_or_else(BigRational::zero), b.unwrap_or_else(BigRational::zero)))
}

/// Parses a bracketed list of five coefficients `[a1,a2,a3,a4,a6]`.
pub fn parse_coeffs(field: QField, text: &str) -> Result<Vec<FieldElem>> {
    let t = text.trim();
    let lead = text.len() - text.trim_start().len();
    if !t.starts_with('[') {
        return Err(Error::Parse { pos: lead, token: t.chars().take(8).collect(), msg: "expected [".into() });
    }
    if !t.ends_with(']') {
        return Err(Error::Parse { pos: lead + t.len(), token: String::new(), msg: "expected ]".into() });
    }
    let inner = &t[1..t.len() - 1];
    let mut out = Vec::new();
    let mut off = lead + 1;
    for part in inner.split(',') {
        out.push(parse_elem(field, part, off)?);
        off += part.len() + 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let g = QField::Gauss;
        let x = g.parse("1/2+3*s").unwrap();
        assert_eq!(x, g.frac(1, 2, 3, 1));
        assert_eq!(x.to_string(), "1/2+3*s");
        assert_eq!(g.parse("-7").unwrap(), g.int(-7));
        assert_eq!(g.parse("2-5/3*s").unwrap().to_string(), "2-5/3*s");
        assert_eq!(g.parse("s").unwrap(), g.s());
        assert_eq!(g.parse(" -2*s ").unwrap(), g.elem(0, -2));
        let e = g.parse("1+x").unwrap_err();
        assert!(matches!(e, Error::Parse { pos: 2, .. }), "{e:?}");
        assert!(g.parse("1/0").is_err());
        assert!(g.parse("").is_err());
        let e = parse_coeffs(g, "[0,0,0,4,q]").unwrap_err();
        assert!(matches!(e, Error::Parse { pos: 9, .. }), "{e:?}");
    }

    #[test]
    fn square_examples() {
        let g = QField::Gauss;
        let e = QField::Eisenstein;
        assert_eq!(is_square_in_k(&g.elem(0, 2)), Some(g.elem(1, 1)));
        assert_eq!(is_square_in_k(&e.int(-3)), Some(e.s()));
        assert_eq!(is_square_in_k(&g.elem(1, 1)), None);
        assert_eq!(is_square_in_k(&g.int(-1)), Some(g.s()));
        assert_eq!(is_square_in_k(&e.int(-1)), None);
        let w = e.frac(1, 2, 3, 2);
        assert!(is_square_in_k(&(&w * &w)).is_some());
    }

    #[test]
    fn sqrt_square_in_f_examples() {
        let g = QField::Gauss;
        let e = QField::Eisenstein;
        let w = sqrt_is_square_in_f(&g.int(9)).unwrap().unwrap();
        assert_eq!(w.pow(4), RadicalElem::from_base(g.int(9)).embed_like(&w));
        let w = sqrt_is_square_in_f(&e.int(-25)).unwrap().unwrap();
        assert_eq!(w.pow(4), RadicalElem::from_base(e.int(-25)).embed_like(&w));
        assert!(w.radicands().len() <= 2);
        assert!(sqrt_is_square_in_f(&g.int(3)).unwrap().is_none());
        assert!(sqrt_is_square_in_f(&g.int(-3)).unwrap().is_none());
        assert!(sqrt_is_square_in_f(&g.int(-25)).unwrap().is_some());
        assert!(sqrt_is_square_in_f(&g.int(0)).is_err());
    }

    #[test]
    fn sqrt_i_rule() {
        let e = QField::Eisenstein;
        for a in [1, 2, -5] {
            let x = RadicalElem::new(e, vec![e.int(-1)], vec![e.zero(), e.int(a)]).unwrap();
            assert_eq!(sqrt_i_multiple_never_square(&x), Ok(false));
        }
        let g = QField::Gauss;
        let x = RadicalElem::new(g, vec![g.int(2)], vec![g.zero(), g.one()]).unwrap();
        assert!(sqrt_i_multiple_never_square(&x).is_err());
        let x = RadicalElem::new(e, vec![e.int(-1)], vec![e.one(), e.one()]).unwrap();
        assert!(sqrt_i_multiple_never_square(&x).is_err());
    }

    #[test]
    fn integrality() {
        let e = QField::Eisenstein;
        assert!(e.frac(1, 2, 1, 2).is_integral());
        assert!(!e.frac(1, 2, 1, 1).is_integral());
        assert!(e.elem(3, -2).is_integral());
        assert!(!QField::Gauss.frac(1, 2, 1, 2).is_integral());
        assert_eq!(e.units().len(), 6);
        assert_eq!(e.unit_squares().len(), 3);
        assert_eq!(QField::Gauss.unit_squares().len(), 2);
    }
}
