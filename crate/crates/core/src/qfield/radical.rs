//! Multiquadratic towers K(sqrt(d1), ..., sqrt(dm)).
//!
//! Coordinates are indexed by subsets of the radicands (bit masks), so an
//! element is `sum_S c_S * prod_{i in S} sqrt(d_i)` with `c_S` in K.
//! Radicands are kept as canonical square-free representatives.

use super::ring::squarefree_part;
use super::{is_square_in_k, FieldElem, QField};
use crate::error::{Error, Result};
use crate::field::Field;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

/// Default number of independent radicands a tower may carry.
pub const MAX_RADICANDS: usize = 3;
const HARD_CAP: usize = 6;

static TOWER_CAP: AtomicUsize = AtomicUsize::new(MAX_RADICANDS);

pub fn tower_cap() -> usize {
    TOWER_CAP.load(Ordering::Relaxed)
}

/// Changes the radicand cap; values above 6 are clamped.
pub fn set_tower_cap(n: usize) {
    TOWER_CAP.store(n.min(HARD_CAP), Ordering::Relaxed);
}

#[derive(Clone)]
pub struct RadicalElem {
    field: QField,
    rads: Arc<Vec<FieldElem>>,
    coords: Vec<FieldElem>,
}

fn mask_products(rads: &[FieldElem], field: QField) -> Vec<FieldElem> {
    let m = rads.len();
    let mut out = vec![field.one(); 1 << m];
    for mask in 1..(1usize << m) {
        let low = mask.trailing_zeros() as usize;
        out[mask] = &out[mask & (mask - 1)] * &rads[low];
    }
    out
}

/// Finds a subset `M` of `rads` with `d * prod_M` a square in K.
fn dependency(d: &FieldElem, rads: &[FieldElem]) -> Option<(usize, FieldElem)> {
    let prods = mask_products(rads, d.field);
    for (mask, p) in prods.iter().enumerate() {
        if let Some(c) = is_square_in_k(&(d / p)) {
            return Some((mask, c));
        }
    }
    None
}

impl RadicalElem {
    pub fn new(field: QField, rads: Vec<FieldElem>, coords: Vec<FieldElem>) -> Result<Self> {
        if rads.len() > tower_cap() {
            return Err(Error::TowerTooDeep(rads.len()));
        }
        if coords.len() != 1 << rads.len() {
            return Err(Error::OutOfRange(format!("{} coordinates for {} radicands", coords.len(), rads.len())));
        }
        if rads.iter().chain(coords.iter()).any(|x| x.field != field) {
            return Err(Error::WrongField("radicand or coordinate from another field".into()));
        }
        let mut canon: Vec<FieldElem> = Vec::new();
        for d in &rads {
            if d.is_zero() {
                return Err(Error::Zero);
            }
            if dependency(d, &canon).is_some() {
                return Err(Error::DependentRadicand(d.to_string()));
            }
            canon.push(d.clone());
        }
        Ok(RadicalElem { field, rads: Arc::new(rads), coords })
    }

    pub fn from_base(x: FieldElem) -> Self {
        RadicalElem { field: x.field, rads: Arc::new(Vec::new()), coords: vec![x] }
    }

    /// Builds the tower over the given radicands (independence is checked)
    /// and returns `sqrt(d_i)` for each.
    pub fn tower(field: QField, rads: &[FieldElem]) -> Result<Vec<RadicalElem>> {
        let mut out = Vec::new();
        let mut acc = RadicalElem::from_base(field.one());
        for d in rads {
            if is_square_in_k(d).is_some() || dependency(d, &acc.rads).is_some() {
                return Err(Error::DependentRadicand(d.to_string()));
            }
            let (ext, r) = acc.adjoin_sqrt(d)?;
            acc = ext;
            out.push(r);
        }
        let out = out.into_iter().map(|r| r.embed_like(&acc)).collect();
        Ok(out)
    }

    pub fn field(&self) -> QField {
        self.field
    }

    pub fn radicands(&self) -> &[FieldElem] {
        &self.rads
    }

    pub fn coords(&self) -> &[FieldElem] {
        &self.coords
    }

    pub fn depth(&self) -> usize {
        self.rads.len()
    }

    pub fn same_tower(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.rads, &other.rads) || self.rads == other.rads
    }

    /// The element when it lies in K.
    pub fn as_base(&self) -> Option<FieldElem> {
        if self.coords[1..].iter().all(|c| c.is_zero()) {
            Some(self.coords[0].clone())
        } else {
            None
        }
    }

    /// The same element over the smallest sub-tower carrying its support.
    pub fn shrink(&self) -> Self {
        RadicalElem::shrink_all(std::slice::from_ref(self)).pop().unwrap()
    }

    /// Drops the radicands unused by all of `xs`, which share one tower.
    pub fn shrink_all(xs: &[RadicalElem]) -> Vec<RadicalElem> {
        let Some(first) = xs.first() else { return vec![] };
        let m = first.rads.len();
        let used: Vec<usize> = (0..m)
            .filter(|&j| {
                xs.iter().any(|x| x.coords.iter().enumerate().any(|(s, c)| s >> j & 1 == 1 && !c.is_zero()))
            })
            .collect();
        if used.len() == m {
            return xs.to_vec();
        }
        let rads = Arc::new(used.iter().map(|&j| first.rads[j].clone()).collect::<Vec<_>>());
        xs.iter()
            .map(|x| {
                let mut coords = vec![x.field.zero(); 1 << used.len()];
                for (s, c) in x.coords.iter().enumerate() {
                    if c.is_zero() {
                        continue;
                    }
                    let t = used.iter().enumerate().filter(|(_, &j)| s >> j & 1 == 1).fold(0, |acc, (k, _)| acc | 1 << k);
                    coords[t] = c.clone();
                }
                RadicalElem { field: x.field, rads: rads.clone(), coords }
            })
            .collect()
    }

    /// An element of K placed in this tower.
    pub fn base_like(&self, x: FieldElem) -> Self {
        let mut coords = vec![self.field.zero(); self.coords.len()];
        coords[0] = x;
        RadicalElem { field: self.field, rads: self.rads.clone(), coords }
    }

    pub fn scale(&self, x: &FieldElem) -> Self {
        RadicalElem { field: self.field, rads: self.rads.clone(), coords: self.coords.iter().map(|c| c * x).collect() }
    }

    /// The conjugate flipping the sign of `sqrt(d_j)`.
    pub fn conj(&self, j: usize) -> Self {
        let coords = self
            .coords
            .iter()
            .enumerate()
            .map(|(s, c)| if s >> j & 1 == 1 { -c } else { c.clone() })
            .collect();
        RadicalElem { field: self.field, rads: self.rads.clone(), coords }
    }

    fn with_rads(&self, rads: Arc<Vec<FieldElem>>) -> Self {
        let mut coords = self.coords.clone();
        coords.resize(1 << rads.len(), self.field.zero());
        RadicalElem { field: self.field, rads, coords }
    }

    /// Image of `sqrt(d)` in this tower, extending it when `d` is new.
    fn adjoin_sqrt(&self, d: &FieldElem) -> Result<(RadicalElem, RadicalElem)> {
        if d.is_zero() {
            return Ok((self.clone(), self.zero_like()));
        }
        if let Some((mask, c)) = dependency(d, &self.rads) {
            let mut coords = vec![self.field.zero(); self.coords.len()];
            coords[mask] = c;
            return Ok((self.clone(), RadicalElem { field: self.field, rads: self.rads.clone(), coords }));
        }
        let s = squarefree_part(d)?;
        if self.rads.len() + 1 > tower_cap() {
            return Err(Error::TowerTooDeep(self.rads.len() + 1));
        }
        let c = is_square_in_k(&(d / &s)).expect("d / sf(d) is a square");
        let mut rads = (*self.rads).clone();
        rads.push(s);
        let ext = self.with_rads(Arc::new(rads));
        let mut coords = vec![self.field.zero(); ext.coords.len()];
        coords[1 << self.rads.len()] = c;
        let r = RadicalElem { field: self.field, rads: ext.rads.clone(), coords };
        Ok((ext, r))
    }

    /// Rewrites both elements over a common tower.
    pub fn unify(a: &Self, b: &Self) -> Result<(Self, Self)> {
        if a.field != b.field {
            return Err(Error::WrongField("elements of different base fields".into()));
        }
        if a.same_tower(b) {
            return Ok((a.clone(), b.clone()));
        }
        if b.rads.len() > a.rads.len() && b.rads.starts_with(&a.rads) {
            return Ok((a.with_rads(b.rads.clone()), b.clone()));
        }
        if a.rads.starts_with(&b.rads) {
            return Ok((a.clone(), b.with_rads(a.rads.clone())));
        }
        let mut acc = a.clone();
        let mut images = Vec::new();
        for d in b.rads.iter() {
            let (ext, r) = acc.adjoin_sqrt(d)?;
            acc = ext;
            images.push(r);
        }
        let images: Vec<RadicalElem> = images.into_iter().map(|r| r.with_rads(acc.rads.clone())).collect();
        let mut out = acc.zero_like();
        for (mask, c) in b.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut term = acc.base_like(c.clone());
            for (j, img) in images.iter().enumerate() {
                if mask >> j & 1 == 1 {
                    term = term.mul_same(img);
                }
            }
            out = out.add_same(&term);
        }
        Ok((acc, out))
    }

    /// This element rewritten over the tower of `other` (or a common extension).
    pub fn embed_like(&self, other: &Self) -> Self {
        RadicalElem::unify(other, self).expect("tower overflow while embedding").1
    }

    fn add_same(&self, o: &Self) -> Self {
        let coords = self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect();
        RadicalElem { field: self.field, rads: self.rads.clone(), coords }
    }

    fn sub_same(&self, o: &Self) -> Self {
        let coords = self.coords.iter().zip(&o.coords).map(|(a, b)| a - b).collect();
        RadicalElem { field: self.field, rads: self.rads.clone(), coords }
    }

    fn mul_same(&self, o: &Self) -> Self {
        let n = self.coords.len();
        let prods = mask_products(&self.rads, self.field);
        let mut out = vec![self.field.zero(); n];
        for (s, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (t, b) in o.coords.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let mut term = a * b;
                if s & t != 0 {
                    term = term * &prods[s & t];
                }
                out[s ^ t] = &out[s ^ t] + &term;
            }
        }
        RadicalElem { field: self.field, rads: self.rads.clone(), coords: out }
    }

    pub fn inv(&self) -> Self {
        let mut num = self.one_like();
        let mut cur = self.clone();
        for j in 0..self.rads.len() {
            let c = cur.conj(j);
            num = num.mul_same(&c);
            cur = cur.mul_same(&c);
        }
        let n = cur.as_base().expect("norm lies in K");
        assert!(!n.is_zero(), "inverse of zero in a radical tower");
        num.scale(&n.inv())
    }

    /// Splits over the last radicand d: `self = A + B*sqrt(d)`.
    fn split_last(&self) -> (RadicalElem, RadicalElem) {
        let m = self.rads.len();
        let half = 1 << (m - 1);
        let rads = Arc::new(self.rads[..m - 1].to_vec());
        let a = RadicalElem { field: self.field, rads: rads.clone(), coords: self.coords[..half].to_vec() };
        let b = RadicalElem { field: self.field, rads, coords: self.coords[half..].to_vec() };
        (a, b)
    }

    fn sqrt_last(&self) -> RadicalElem {
        let m = self.rads.len();
        let mut coords = vec![self.field.zero(); self.coords.len()];
        coords[1 << (m - 1)] = self.field.one();
        RadicalElem { field: self.field, rads: self.rads.clone(), coords }
    }

    /// A square root inside this tower, if one exists.
    pub fn sqrt_in_tower(&self) -> Option<RadicalElem> {
        if self.rads.is_empty() {
            return is_square_in_k(&self.coords[0]).map(|w| self.base_like(w));
        }
        if self.is_zero() {
            return Some(self.clone());
        }
        let (a, b) = self.split_last();
        let d = self.rads.last().unwrap().clone();
        let sd = self.sqrt_last();
        if b.is_zero() {
            if let Some(r) = a.sqrt_in_tower() {
                return Some(r.with_rads(self.rads.clone()));
            }
            let ad = a.scale(&d.inv());
            return ad.sqrt_in_tower().map(|r| r.with_rads(self.rads.clone()).mul_same(&sd));
        }
        let norm = a.mul_same(&a).sub_same(&b.mul_same(&b).scale(&d));
        let n = norm.sqrt_in_tower()?;
        let half = self.field.frac(1, 2, 0, 1);
        for n in [n.clone(), -n] {
            let r1sq = a.add_same(&n).scale(&half);
            if r1sq.is_zero() {
                continue;
            }
            if let Some(r1) = r1sq.sqrt_in_tower() {
                let r2 = b.mul_same(&r1.scale(&self.field.int(2)).inv());
                let r = r1.with_rads(self.rads.clone()).add_same(&r2.with_rads(self.rads.clone()).mul_same(&sd));
                if r.mul_same(&r) == *self {
                    return Some(r);
                }
            }
        }
        None
    }

    /// Finds `e` in K and `w` in this tower with `self * e = w^2`.
    ///
    /// A square root of `self` in F has the form `w / sqrt(e)`, because the
    /// Galois group of F over the tower acts on it by signs.  Splitting
    /// `self = A + B*sqrt(d)`, the relative norm `A^2 - d*B^2` must then be
    /// a square `n` in the smaller tower and `(A + n)/2` (for one sign of `n`)
    /// must again be a twisted square there.
    pub fn twisted_sqrt(&self) -> Option<(FieldElem, RadicalElem)> {
        if self.is_zero() {
            return Some((self.field.one(), self.clone()));
        }
        if self.rads.is_empty() {
            let x = &self.coords[0];
            // every element of K is a square in F; x * x is the fallback witness
            let Ok(e) = squarefree_part(x) else { return Some((x.clone(), self.base_like(x.clone()))) };
            let w = is_square_in_k(&(x * &e)).expect("x * sf(x) is a square");
            return Some((e, self.base_like(w)));
        }
        let (a, b) = self.split_last();
        let d = self.rads.last().unwrap().clone();
        let sd = self.sqrt_last();
        if b.is_zero() {
            let (e, w) = a.twisted_sqrt()?;
            return Some((e, w.with_rads(self.rads.clone())));
        }
        let norm = a.mul_same(&a).sub_same(&b.mul_same(&b).scale(&d));
        let n = norm.sqrt_in_tower()?;
        let half = self.field.frac(1, 2, 0, 1);
        for n in [n.clone(), -n] {
            let v1 = a.add_same(&n).scale(&half);
            if v1.is_zero() {
                continue;
            }
            let Some((e, t1)) = v1.twisted_sqrt() else { continue };
            let t2 = b.scale(&e).mul_same(&t1.scale(&self.field.int(2)).inv());
            let w = t1.with_rads(self.rads.clone()).add_same(&t2.with_rads(self.rads.clone()).mul_same(&sd));
            debug_assert!(w.mul_same(&w) == self.scale(&e));
            return Some((e, w));
        }
        None
    }

    /// A square root in F, adjoining at most one radicand.  `Ok(None)` means
    /// the element is not a square in F; `TowerTooDeep` means the root needs
    /// more radicands than the cap allows.
    pub fn sqrt_in_f(&self) -> Result<Option<RadicalElem>> {
        if let Some(r) = self.sqrt_in_tower() {
            return Ok(Some(r));
        }
        let Some((e, w)) = self.twisted_sqrt() else { return Ok(None) };
        let (ext, se) = self.adjoin_sqrt(&e)?;
        let w = w.with_rads(ext.rads.clone());
        Ok(Some(w.mul_same(&se.inv())))
    }
}

impl PartialEq for RadicalElem {
    fn eq(&self, other: &Self) -> bool {
        if self.same_tower(other) {
            return self.coords == other.coords;
        }
        match RadicalElem::unify(self, other) {
            Ok((a, b)) => a.coords == b.coords,
            Err(_) => false,
        }
    }
}

impl fmt::Display for RadicalElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (mask, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if mask == 0 {
                write!(f, "{}", c)?;
            } else {
                write!(f, "({})", c)?;
                for (j, d) in self.rads.iter().enumerate() {
                    if mask >> j & 1 == 1 {
                        write!(f, "*r({})", d)?;
                    }
                }
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for RadicalElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn unified(a: RadicalElem, b: RadicalElem) -> (RadicalElem, RadicalElem) {
    if a.same_tower(&b) {
        return (a, b);
    }
    RadicalElem::unify(&a, &b).expect("radical towers exceed the radicand cap")
}

impl Add for RadicalElem {
    type Output = RadicalElem;
    fn add(self, o: RadicalElem) -> RadicalElem {
        let (a, b) = unified(self, o);
        a.add_same(&b)
    }
}

impl Sub for RadicalElem {
    type Output = RadicalElem;
    fn sub(self, o: RadicalElem) -> RadicalElem {
        let (a, b) = unified(self, o);
        a.sub_same(&b)
    }
}

impl Mul for RadicalElem {
    type Output = RadicalElem;
    fn mul(self, o: RadicalElem) -> RadicalElem {
        let (a, b) = unified(self, o);
        a.mul_same(&b)
    }
}

impl Div for RadicalElem {
    type Output = RadicalElem;
    fn div(self, o: RadicalElem) -> RadicalElem {
        let (a, b) = unified(self, o);
        a.mul_same(&b.inv())
    }
}

impl Neg for RadicalElem {
    type Output = RadicalElem;
    fn neg(self) -> RadicalElem {
        RadicalElem { field: self.field, rads: self.rads, coords: self.coords.into_iter().map(|c| -c).collect() }
    }
}

impl Field for RadicalElem {
    fn zero_like(&self) -> Self {
        self.base_like(self.field.zero())
    }
    fn one_like(&self) -> Self {
        self.base_like(self.field.one())
    }
    fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }
    fn from_i64_like(&self, n: i64) -> Self {
        self.base_like(self.field.int(n))
    }
}
