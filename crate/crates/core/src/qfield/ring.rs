//! The rings of integers Z[i] and Z[w]: Euclidean gcd, factorization and
//! square-free representatives of square classes.

use super::intfactor::{factor_u64, sqrt_mod};
use super::{is_square_in_k, rat, FieldElem, QField};
use crate::error::{Error, Result};
use crate::field::Field;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use std::sync::atomic::{AtomicU64, Ordering};

static FACTOR_NORM_BOUND: AtomicU64 = AtomicU64::new(1_000_000_000_000);

pub fn factor_norm_bound() -> u64 {
    FACTOR_NORM_BOUND.load(Ordering::Relaxed)
}

pub fn set_factor_norm_bound(bound: u64) {
    FACTOR_NORM_BOUND.store(bound, Ordering::Relaxed);
}

/// An integral element of K.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingElem(FieldElem);

impl RingElem {
    pub fn new(x: FieldElem) -> Result<Self> {
        if x.is_integral() {
            Ok(RingElem(x))
        } else {
            Err(Error::NotIntegral)
        }
    }

    pub fn elem(&self) -> &FieldElem {
        &self.0
    }

    pub fn into_elem(self) -> FieldElem {
        self.0
    }

    pub fn field(&self) -> QField {
        self.0.field
    }

    /// Norm as a rational integer.
    pub fn norm(&self) -> BigInt {
        self.0.norm().to_integer()
    }

    pub fn divides(&self, x: &FieldElem) -> bool {
        !self.0.is_zero() && (x / &self.0).is_integral()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimeKind {
    Split,
    Inert,
    Ramified,
}

/// `unit * prod(prime^e)`, primes unit-normalized and sorted by (norm, value).
#[derive(Clone, Debug, PartialEq)]
pub struct Factorization {
    pub unit: FieldElem,
    pub factors: Vec<(RingElem, u32)>,
}

impl Factorization {
    pub fn product(&self) -> FieldElem {
        let mut acc = self.unit.clone();
        for (p, e) in &self.factors {
            for _ in 0..*e {
                acc = acc * p.elem();
            }
        }
        acc
    }
}

/// The associate with lexicographically largest coordinates.
pub fn unit_normalize(x: &FieldElem) -> FieldElem {
    x.field.units().into_iter().map(|u| u * x).max().unwrap()
}

fn round_half_up(q: &BigRational) -> BigInt {
    (q + BigRational::new(1.into(), 2.into())).floor().to_integer()
}

fn euclid_rem(x: &FieldElem, y: &FieldElem) -> FieldElem {
    let q = x / y;
    let field = x.field;
    let qr = match field {
        QField::Gauss => FieldElem::new(
            field,
            BigRational::from_integer(round_half_up(&q.a)),
            BigRational::from_integer(round_half_up(&q.b)),
        ),
        QField::Eisenstein => {
            // coordinates in the basis (1, w), w = (-1 + s)/2
            let u = BigRational::from_integer(round_half_up(&(&q.a + &q.b)));
            let v = BigRational::from_integer(round_half_up(&(&q.b + &q.b)));
            let half = BigRational::new(1.into(), 2.into());
            FieldElem::new(field, &u - &v * &half, &v * &half)
        }
    };
    x - &(qr * y)
}

/// Euclidean gcd, unit-normalized.
pub fn gcd_ok(x: &RingElem, y: &RingElem) -> Result<RingElem> {
    if x.0.is_zero() && y.0.is_zero() {
        return Err(Error::Zero);
    }
    let mut a = x.0.clone();
    let mut b = y.0.clone();
    while !b.is_zero() {
        let r = euclid_rem(&a, &b);
        a = b;
        b = r;
    }
    Ok(RingElem(unit_normalize(&a)))
}

/// The primes of O_K above a rational prime, unit-normalized.
pub fn primes_above(p: u64, field: QField) -> (PrimeKind, Vec<RingElem>) {
    let elem = |a: i64, b: i64| field.elem(a, b);
    match field {
        QField::Gauss => {
            if p == 2 {
                (PrimeKind::Ramified, vec![RingElem(unit_normalize(&elem(1, 1)))])
            } else if p % 4 == 3 {
                (PrimeKind::Inert, vec![RingElem(field.int(p as i64))])
            } else {
                split_with_root(p, field)
            }
        }
        QField::Eisenstein => {
            if p == 3 {
                (PrimeKind::Ramified, vec![RingElem(unit_normalize(&elem(0, 1)))])
            } else if p % 3 == 2 {
                (PrimeKind::Inert, vec![RingElem(field.int(p as i64))])
            } else {
                split_with_root(p, field)
            }
        }
    }
}

fn split_with_root(p: u64, field: QField) -> (PrimeKind, Vec<RingElem>) {
    let r = sqrt_mod(field.d(), p).expect("split prime has a root of D");
    let pp = RingElem(FieldElem::from_rational(field, BigRational::from_integer(BigInt::from(p))));
    let t = RingElem(FieldElem::new(field, BigRational::from_integer(BigInt::from(r)), rat(1)));
    let pi = gcd_ok(&pp, &t).unwrap().0;
    let mut v = vec![RingElem(pi.clone()), RingElem(unit_normalize(&pi.conj()))];
    v.sort_by(|a, b| b.0.cmp(&a.0));
    (PrimeKind::Split, v)
}

/// Valuation of a nonzero element of K at a prime of O_K.
pub fn valuation(x: &FieldElem, pi: &RingElem) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let d = x.denom_lcm();
    let dd = FieldElem::from_rational(x.field, BigRational::from_integer(d));
    Some(int_valuation(&(x * &dd), pi) - int_valuation(&dd, pi))
}

fn int_valuation(x: &FieldElem, pi: &RingElem) -> i64 {
    let mut v = 0;
    let mut y = x.clone();
    loop {
        let q = &y / &pi.0;
        if !q.is_integral() {
            return v;
        }
        y = q;
        v += 1;
    }
}

pub fn factor_ok(x: &RingElem) -> Result<Factorization> {
    factor_ok_bounded(x, factor_norm_bound())
}

pub fn factor_ok_bounded(x: &RingElem, bound: u64) -> Result<Factorization> {
    if x.0.is_zero() {
        return Err(Error::Zero);
    }
    let n = x.norm();
    let nn = n.to_u64().filter(|&v| v <= bound).ok_or_else(|| Error::NormBound { norm: n.to_string(), bound })?;
    let field = x.field();
    let mut rest = x.0.clone();
    let mut factors = Vec::new();
    for (p, _) in factor_u64(nn) {
        for pi in primes_above(p, field).1 {
            let mut e = 0;
            loop {
                let q = &rest / &pi.0;
                if !q.is_integral() {
                    break;
                }
                rest = q;
                e += 1;
            }
            if e > 0 {
                factors.push((pi, e));
            }
        }
    }
    factors.sort_by(|a, b| a.0.norm().cmp(&b.0.norm()).then_with(|| b.0 .0.cmp(&a.0 .0)));
    debug_assert!(rest.norm() == rat(1));
    Ok(Factorization { unit: rest, factors })
}

/// gcd computed from the two factorizations; used to cross-check `gcd_ok`.
pub fn gcd_via_factorization(x: &RingElem, y: &RingElem) -> Result<RingElem> {
    if x.0.is_zero() {
        return gcd_ok(x, y);
    }
    if y.0.is_zero() {
        return gcd_ok(x, y);
    }
    let fx = factor_ok(x)?;
    let fy = factor_ok(y)?;
    let mut acc = x.field().one();
    for (p, e) in &fx.factors {
        if let Some((_, f)) = fy.factors.iter().find(|(q, _)| q == p) {
            for _ in 0..(*e).min(*f) {
                acc = acc * p.elem();
            }
        }
    }
    Ok(RingElem(unit_normalize(&acc)))
}

/// Canonical square-free integral representative of the class of `x` in K*/K*^2.
pub fn squarefree_part(x: &FieldElem) -> Result<FieldElem> {
    if x.is_zero() {
        return Err(Error::Zero);
    }
    let d = x.denom_lcm();
    let d2 = BigRational::from_integer(&d * &d);
    let y = RingElem(x.scale(&d2));
    let f = factor_ok(&y)?;
    let mut s = f.unit.clone();
    for (p, e) in &f.factors {
        if e % 2 == 1 {
            s = s * p.elem();
        }
    }
    Ok(x.field.unit_squares().into_iter().map(|u| u * &s).max().unwrap())
}

/// Equality of square classes without factoring.
pub fn square_class_eq(x: &FieldElem, y: &FieldElem) -> bool {
    !x.is_zero() && !y.is_zero() && is_square_in_k(&(x * y)).is_some()
}
