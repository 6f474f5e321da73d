//! Division polynomials in x alone.
//!
//! `F_n = psi_n` for odd n and `F_n = psi_n / psi_2` for even n, where
//! `psi_2^2 = 4x^3 + b2 x^2 + 2 b4 x + b6`.

use super::Curve;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::poly::Poly;

#[derive(Clone, Debug, PartialEq)]
pub struct DivisionPoly<F: Field> {
    pub n: u32,
    pub poly: Poly<F>,
}

impl<F: Field> DivisionPoly<F> {
    /// Divided by the leading coefficient.
    pub fn monic(&self) -> Poly<F> {
        self.poly.monic()
    }
}

/// `4x^3 + b2 x^2 + 2 b4 x + b6`.
pub fn psi2_squared<F: Field>(e: &Curve<F>) -> Poly<F> {
    let n = |k: i64| e.a1.from_i64_like(k);
    Poly::new(vec![e.b6().clone(), n(2) * e.b4().clone(), e.b2().clone(), n(4)])
}

/// `F_0, ..., F_n`.
pub fn division_polys<F: Field>(e: &Curve<F>, n: u32) -> Vec<Poly<F>> {
    let z = e.a1.zero_like();
    let k = |v: i64| z.from_i64_like(v);
    let (b2, b4, b6, b8) = (e.b2().clone(), e.b4().clone(), e.b6().clone(), e.b8().clone());
    let bq = psi2_squared(e);
    let bq2 = &bq * &bq;
    let mut f: Vec<Poly<F>> = vec![
        Poly::zero(&z),
        Poly::constant(k(1)),
        Poly::constant(k(1)),
        Poly::new(vec![b8.clone(), k(3) * b6.clone(), k(3) * b4.clone(), b2.clone(), k(3)]),
        Poly::new(vec![
            b4.clone() * b8.clone() - b6.square(),
            b2.clone() * b8.clone() - b4.clone() * b6.clone(),
            k(10) * b8,
            k(10) * b6,
            k(5) * b4,
            b2,
            k(2),
        ]),
    ];
    for idx in 5..=n as usize {
        let m = idx / 2;
        let next = if idx % 2 == 1 {
            let t1 = &f[m + 2] * &f[m].pow(3);
            let t2 = &f[m - 1] * &f[m + 1].pow(3);
            if m % 2 == 0 {
                &(&bq2 * &t1) - &t2
            } else {
                &t1 - &(&bq2 * &t2)
            }
        } else {
            let inner = &(&f[m + 2] * &f[m - 1].pow(2)) - &(&f[m - 2] * &f[m + 1].pow(2));
            &f[m] * &inner
        };
        f.push(next);
    }
    f.truncate(n as usize + 1);
    f
}

/// The n-th division polynomial, 1 <= n <= 32.
pub fn division_poly<F: Field>(e: &Curve<F>, n: u32) -> Result<DivisionPoly<F>> {
    if !(1..=32).contains(&n) {
        return Err(Error::OutOfRange(format!("division polynomial index {n}")));
    }
    let poly = division_polys(e, n).pop().unwrap();
    Ok(DivisionPoly { n, poly })
}

/// A polynomial whose roots are the x-coordinates of the nonzero points
/// of order dividing n.
pub fn torsion_x_poly<F: Field>(e: &Curve<F>, n: u32) -> Result<Poly<F>> {
    let d = division_poly(e, n)?;
    if n.is_multiple_of(2) {
        Ok(&d.poly * &psi2_squared(e))
    } else {
        Ok(d.poly)
    }
}

/// Numerator of `x([l]Q) - x0` as a polynomial in x(Q), of degree l^2.
pub fn ldivision_poly<F: Field>(e: &Curve<F>, l: u32, x0: &F) -> Poly<F> {
    assert!(l >= 2);
    let f = division_polys(e, l + 1);
    let bq = psi2_squared(e);
    let x = Poly::x(x0);
    let x0p = Poly::constant(x0.clone());
    let fl2 = &f[l as usize] * &f[l as usize];
    let cross = &f[l as usize + 1] * &f[l as usize - 1];
    if l % 2 == 1 {
        &(&(&x - &x0p) * &fl2) - &(&bq * &cross)
    } else {
        &(&(&x - &x0p) * &(&bq * &fl2)) - &cross
    }
}

/// For `y^2 = x^3 + a x + b`, the quartic whose roots are x(Q) with
/// `x([2]Q) = x0`.
pub fn halving_quartic<F: Field>(a: &F, b: &F, x0: &F) -> Poly<F> {
    let k = |v: i64| a.from_i64_like(v);
    // x^4 - 2a x^2 - 8b x + a^2 - 4 x0 (x^3 + a x + b)
    Poly::new(vec![
        a.square() - k(4) * x0.clone() * b.clone(),
        -(k(8) * b.clone()) - k(4) * x0.clone() * a.clone(),
        -(k(2) * a.clone()),
        -(k(4) * x0.clone()),
        k(1),
    ])
}
