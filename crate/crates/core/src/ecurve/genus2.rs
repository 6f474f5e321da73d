//! Point counts of genus-2 curves `z^2 = c h(u)` with deg h = 6, and the
//! Jacobian order from the zeta function.

use super::reduce::chi;
use crate::error::{Error, Result};
use crate::ffield::{Fq, FqCtx};
use crate::field::Field;
use crate::poly::Poly;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZetaData {
    pub q: u64,
    pub n1: u64,
    pub n2: u64,
    pub c1: i64,
    pub c2: i64,
    pub jacobian_order: u64,
}

impl ZetaData {
    /// Coefficients `1, c1, c2, q c1, q^2` of the L-polynomial.
    pub fn l_poly(&self) -> [i64; 5] {
        let q = self.q as i64;
        [1, self.c1, self.c2, q * self.c1, q * q]
    }
}

fn check_sextic(h: &Poly<Fq>) -> Result<()> {
    if h.degree() != Some(6) {
        return Err(Error::OutOfRange(format!("expected a sextic, degree {:?}", h.degree())));
    }
    Ok(())
}

/// Affine solutions (u, z) of `z^2 = scale * h(u)` over F_q, q <= 10^4.
pub fn genus2_affine_count(h: &Poly<Fq>, scale: &Fq) -> Result<u64> {
    check_sextic(h)?;
    let ctx = scale.ctx();
    if ctx.q > 10_000 {
        return Err(Error::CapExceeded(ctx.q));
    }
    Ok(affine(h, scale))
}

fn affine(h: &Poly<Fq>, scale: &Fq) -> u64 {
    let ctx = scale.ctx();
    let s: i64 = ctx.elements().map(|u| 1 + chi(&(*scale * h.eval(&u)))).sum();
    s as u64
}

/// `#J(F_q)` for the smooth projective model of `z^2 = scale * h(u)` over a
/// prime field, via `N1 = #C(F_p)` and `N2 = #C(F_p^2)`.
pub fn genus2_jacobian_order(h: &Poly<Fq>, scale: &Fq) -> Result<ZetaData> {
    check_sextic(h)?;
    let ctx = scale.ctx();
    if ctx.k != 1 {
        return Err(Error::OutOfRange(format!("base field F_{}^{} is not prime", ctx.p, ctx.k)));
    }
    let q = ctx.q;
    if q * q > 1_000_000 {
        return Err(Error::CapExceeded(q * q));
    }
    if scale.is_zero() || h.gcd(&h.deriv()).degree() != Some(0) {
        return Err(Error::SingularReduction);
    }
    let at_inf = |lead: Fq| if lead.is_square() { 2 } else { 0 };
    let n1 = affine(h, scale) + at_inf(*scale * h.lead());
    let big = FqCtx::get(ctx.p, 2)?;
    let lift = |x: &Fq| big.from_i64(x.coeffs()[0] as i64);
    let h2 = h.map(&big.zero(), lift);
    let scale2 = lift(scale);
    let n2 = affine(&h2, &scale2) + at_inf(scale2 * h2.lead());
    let (qi, n1i, n2i) = (q as i64, n1 as i64, n2 as i64);
    let c1 = n1i - qi - 1;
    let twice = n2i - qi * qi - 1 + c1 * c1;
    debug_assert!(twice % 2 == 0);
    let c2 = twice / 2;
    let j = 1 + c1 + c2 + qi * c1 + qi * qi;
    Ok(ZetaData { q, n1, n2, c1, c2, jacobian_order: j as u64 })
}
