//! Dense univariate polynomials over any [`Field`].

use crate::field::Field;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// Coefficients are stored low degree first with no trailing zeros.
/// `ctx` is a zero of the coefficient field, kept so the zero polynomial
/// still knows where it lives.
#[derive(Clone, PartialEq)]
pub struct Poly<F: Field> {
    c: Vec<F>,
    ctx: F,
}

impl<F: Field> Poly<F> {
    /// Panics on an empty coefficient list; use [`Poly::zero`] for zero.
    pub fn new(c: Vec<F>) -> Self {
        let ctx = c.first().expect("coefficient list must be nonempty").zero_like();
        let mut p = Poly { c, ctx };
        p.trim();
        p
    }

    pub fn zero(ctx: &F) -> Self {
        Poly { c: Vec::new(), ctx: ctx.zero_like() }
    }

    pub fn constant(a: F) -> Self {
        Poly::new(vec![a])
    }

    /// The polynomial `x`.
    pub fn x(ctx: &F) -> Self {
        Poly::new(vec![ctx.zero_like(), ctx.one_like()])
    }

    pub fn from_i64(ctx: &F, c: &[i64]) -> Self {
        let mut v: Vec<F> = c.iter().map(|&n| ctx.from_i64_like(n)).collect();
        if v.is_empty() {
            v.push(ctx.zero_like());
        }
        Poly::new(v)
    }

    fn trim(&mut self) {
        while self.c.last().is_some_and(|x| x.is_zero()) {
            self.c.pop();
        }
    }

    pub fn ctx(&self) -> &F {
        &self.ctx
    }

    pub fn coeffs(&self) -> &[F] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> F {
        self.c.get(i).cloned().unwrap_or_else(|| self.ctx.clone())
    }

    pub fn lead(&self) -> F {
        self.c.last().cloned().unwrap_or_else(|| self.ctx.clone())
    }

    pub fn eval(&self, x: &F) -> F {
        let mut acc = x.zero_like();
        for a in self.c.iter().rev() {
            acc = acc * x.clone() + a.clone();
        }
        acc
    }

    pub fn deriv(&self) -> Self {
        if self.c.len() <= 1 {
            return Poly::zero(&self.ctx);
        }
        let c = self.c.iter().enumerate().skip(1).map(|(i, a)| a.clone() * a.from_i64_like(i as i64)).collect();
        Poly::new(c)
    }

    pub fn scale(&self, a: &F) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Poly::new(self.c.iter().map(|x| x.clone() * a.clone()).collect())
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = self.lead().one_like() / self.lead();
        self.scale(&inv)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Poly::constant(self.ctx.one_like());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Euclidean division: `self = q * d + r` with `deg r < deg d`.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let mut r = self.c.clone();
        let n = self.c.len();
        if n <= dd {
            return (Poly::zero(&self.ctx), self.clone());
        }
        let inv = d.lead().one_like() / d.lead();
        let mut q = vec![self.ctx.clone(); n - dd];
        for i in (0..n - dd).rev() {
            let coef = r[i + dd].clone() * inv.clone();
            if !coef.is_zero() {
                for j in 0..=dd {
                    r[i + j] = r[i + j].clone() - coef.clone() * d.c[j].clone();
                }
            }
            q[i] = coef;
        }
        r.truncate(dd);
        let mut rem = Poly { c: r, ctx: self.ctx.clone() };
        rem.trim();
        let mut quo = Poly { c: q, ctx: self.ctx.clone() };
        quo.trim();
        (quo, rem)
    }

    /// Monic gcd (zero when both inputs are zero).
    pub fn gcd(&self, o: &Self) -> Self {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let r = a.divrem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// The product of the distinct irreducible factors, made monic.
    pub fn squarefree(&self) -> Self {
        let g = self.gcd(&self.deriv());
        if g.degree() == Some(0) || g.is_zero() {
            return self.monic();
        }
        self.divrem(&g).0.monic()
    }

    pub fn map<G: Field>(&self, ctx: &G, f: impl Fn(&F) -> G) -> Poly<G> {
        if self.is_zero() {
            return Poly::zero(ctx);
        }
        Poly::new(self.c.iter().map(f).collect())
    }
}

impl<F: Field> Add for &Poly<F> {
    type Output = Poly<F>;
    fn add(self, o: &Poly<F>) -> Poly<F> {
        let n = self.c.len().max(o.c.len());
        let c: Vec<F> = (0..n).map(|i| self.coeff(i) + o.coeff(i)).collect();
        let mut p = Poly { c, ctx: self.ctx.clone() };
        p.trim();
        p
    }
}

impl<F: Field> Sub for &Poly<F> {
    type Output = Poly<F>;
    fn sub(self, o: &Poly<F>) -> Poly<F> {
        let n = self.c.len().max(o.c.len());
        let c: Vec<F> = (0..n).map(|i| self.coeff(i) - o.coeff(i)).collect();
        let mut p = Poly { c, ctx: self.ctx.clone() };
        p.trim();
        p
    }
}

impl<F: Field> Mul for &Poly<F> {
    type Output = Poly<F>;
    fn mul(self, o: &Poly<F>) -> Poly<F> {
        if self.is_zero() || o.is_zero() {
            return Poly::zero(&self.ctx);
        }
        let mut c = vec![self.ctx.clone(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] = c[i + j].clone() + a.clone() * b.clone();
            }
        }
        let mut p = Poly { c, ctx: self.ctx.clone() };
        p.trim();
        p
    }
}

impl<F: Field> Neg for &Poly<F> {
    type Output = Poly<F>;
    fn neg(self) -> Poly<F> {
        Poly { c: self.c.iter().map(|a| -a.clone()).collect(), ctx: self.ctx.clone() }
    }
}

impl<F: Field + fmt::Display> fmt::Display for Poly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, a) in self.c.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "({})", a)?,
                1 => write!(f, "({})*x", a)?,
                _ => write!(f, "({})*x^{}", a, i)?,
            }
        }
        Ok(())
    }
}

impl<F: Field> fmt::Debug for Poly<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.c.iter()).finish()
    }
}
