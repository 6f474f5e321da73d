//! Roots in K of polynomials with coefficients in K.
//!
//! Degrees one and two are solved directly.  Higher degrees are made
//! integral and monic, reduced modulo a split prime p, lifted p-adically
//! past a Cauchy bound and recovered from the lattice p^k by a 2-dimensional
//! closest-vector step; every candidate is checked exactly.

use super::intfactor::{is_prime_u64, sqrt_mod};
use super::{is_square_in_k, FieldElem, QField, RadicalElem};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::poly::Poly;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Distinct roots in K, sorted.
pub fn roots_in_k(p: &Poly<FieldElem>) -> Vec<FieldElem> {
    if p.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let g = p.squarefree();
    let field = g.ctx().field;
    let mut out = match g.degree().unwrap() {
        1 => vec![-g.coeff(0) / g.coeff(1)],
        2 => quadratic_roots(&g.coeff(2), &g.coeff(1), &g.coeff(0)),
        _ => lattice_roots(&g, field),
    };
    out.sort();
    out.dedup();
    out
}

fn quadratic_roots(a: &FieldElem, b: &FieldElem, c: &FieldElem) -> Vec<FieldElem> {
    let disc = b * b - a * c * a.from_i64_like(4);
    let Some(w) = is_square_in_k(&disc) else { return Vec::new() };
    let two_a = a * &a.from_i64_like(2);
    vec![(-b + &w) / &two_a, (-b - &w) / &two_a]
}

fn big(n: u64) -> BigInt {
    BigInt::from(n)
}

fn modinv(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.mod_floor(m).extended_gcd(m);
    assert!(e.gcd.is_one(), "not invertible");
    e.x.mod_floor(m)
}

fn to_mod(x: &BigRational, m: &BigInt) -> BigInt {
    (x.numer() * modinv(x.denom(), m)).mod_floor(m)
}

fn elem_mod(x: &FieldElem, s: &BigInt, m: &BigInt) -> BigInt {
    (to_mod(&x.a, m) + to_mod(&x.b, m) * s).mod_floor(m)
}

fn eval_mod(c: &[BigInt], x: &BigInt, m: &BigInt) -> BigInt {
    let mut acc = BigInt::zero();
    for a in c.iter().rev() {
        acc = (acc * x + a).mod_floor(m);
    }
    acc
}

fn deriv_mod(c: &[BigInt], m: &BigInt) -> Vec<BigInt> {
    c.iter().enumerate().skip(1).map(|(i, a)| (a * BigInt::from(i)).mod_floor(m)).collect()
}

/// gcd over F_p of two coefficient lists, as a degree.
fn gcd_degree_mod(a: &[BigInt], b: &[BigInt], p: &BigInt) -> usize {
    let trim = |v: &mut Vec<BigInt>| {
        while v.last().is_some_and(|x| x.is_zero()) {
            v.pop();
        }
    };
    let mut a: Vec<BigInt> = a.iter().map(|x| x.mod_floor(p)).collect();
    let mut b: Vec<BigInt> = b.iter().map(|x| x.mod_floor(p)).collect();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let inv = modinv(b.last().unwrap(), p);
        while a.len() >= b.len() {
            let shift = a.len() - b.len();
            let coef = (a.last().unwrap() * &inv).mod_floor(p);
            for (j, bj) in b.iter().enumerate() {
                a[shift + j] = (&a[shift + j] - &coef * bj).mod_floor(p);
            }
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

fn norm_form(field: QField, u: &BigInt, v: &BigInt) -> BigInt {
    match field {
        QField::Gauss => u * u + v * v,
        QField::Eisenstein => u * u - u * v + v * v,
    }
}

fn bilinear(field: QField, a: &(BigInt, BigInt), b: &(BigInt, BigInt)) -> BigRational {
    let n = |x: &(BigInt, BigInt)| norm_form(field, &x.0, &x.1);
    let s = (&a.0 + &b.0, &a.1 + &b.1);
    BigRational::new(n(&s) - n(a) - n(b), BigInt::from(2))
}

fn round(q: &BigRational) -> BigInt {
    (q + BigRational::new(1.into(), 2.into())).floor().to_integer()
}

/// Lagrange reduction of a basis under the norm form.
fn reduce_basis(field: QField, mut b1: (BigInt, BigInt), mut b2: (BigInt, BigInt)) -> ((BigInt, BigInt), (BigInt, BigInt)) {
    let n = |x: &(BigInt, BigInt)| norm_form(field, &x.0, &x.1);
    if n(&b1) > n(&b2) {
        std::mem::swap(&mut b1, &mut b2);
    }
    loop {
        let mu = round(&(bilinear(field, &b1, &b2) / BigRational::from_integer(n(&b1))));
        b2 = (&b2.0 - &mu * &b1.0, &b2.1 - &mu * &b1.1);
        if n(&b2) >= n(&b1) {
            return (b1, b2);
        }
        std::mem::swap(&mut b1, &mut b2);
    }
}

/// `h(y) = L^n g(y / L)` for monic g: integral and monic.
fn integral_monic(g: &Poly<FieldElem>) -> (Vec<FieldElem>, BigInt) {
    let n = g.degree().unwrap();
    let g = g.monic();
    let mut l = BigInt::one();
    for a in g.coeffs() {
        l = l.lcm(&a.denom_lcm());
    }
    let lq = BigRational::from_integer(l.clone());
    let mut h: Vec<FieldElem> = Vec::with_capacity(n + 1);
    let mut pw = BigRational::one();
    for i in (0..=n).rev() {
        h.push(g.coeff(i).scale(&pw));
        pw = &pw * &lq;
    }
    h.reverse();
    (h, l)
}

/// p-adic data at a split prime: images of sqrt(D), of the roots of h and
/// of the square roots of the extra radicands, modulo p^k.
struct Padic {
    field: QField,
    modulus: BigInt,
    s: BigInt,
    roots: Vec<BigInt>,
    extra: Vec<BigInt>,
}

fn padic_setup(h: &[FieldElem], field: QField, extra: &[FieldElem], target: &BigInt) -> Padic {
    let mut p = 7u64;
    let (p, s1, roots_mod_p, extra1) = loop {
        p += 1;
        let split = match field {
            QField::Gauss => p % 4 == 1,
            QField::Eisenstein => p % 3 == 1,
        };
        if !split || !is_prime_u64(p) {
            continue;
        }
        let s = BigInt::from(sqrt_mod(field.d(), p).unwrap());
        let pb = big(p);
        let mut ex = Vec::new();
        for d in extra {
            let img = elem_mod(d, &s, &pb);
            match sqrt_mod(img.to_i64().unwrap(), p) {
                Some(r) if r != 0 => ex.push(big(r)),
                _ => break,
            }
        }
        if ex.len() < extra.len() {
            continue;
        }
        let c: Vec<BigInt> = h.iter().map(|a| elem_mod(a, &s, &pb)).collect();
        if gcd_degree_mod(&c, &deriv_mod(&c, &pb), &pb) != 0 {
            continue;
        }
        let mut roots = Vec::new();
        for x in 0..p {
            if eval_mod(&c, &big(x), &pb).is_zero() {
                roots.push(big(x));
            }
        }
        break (p, s, roots, ex);
    };

    let mut modulus = big(p);
    let mut s = s1;
    let mut roots = roots_mod_p;
    let mut ex = extra1;
    let d = BigInt::from(field.d());
    let newton_sqrt = |r: &BigInt, a: &BigInt, m: &BigInt| -> BigInt {
        let two_r = (r * BigInt::from(2)).mod_floor(m);
        (r - (r * r - a) * modinv(&two_r, m)).mod_floor(m)
    };
    while modulus <= *target {
        let next = &modulus * &modulus;
        s = newton_sqrt(&s, &d, &next);
        ex = ex.iter().zip(extra).map(|(r, e)| newton_sqrt(r, &elem_mod(e, &s, &next), &next)).collect();
        let c: Vec<BigInt> = h.iter().map(|a| elem_mod(a, &s, &next)).collect();
        let dc = deriv_mod(&c, &next);
        roots = roots
            .iter()
            .map(|r| (r - eval_mod(&c, r, &next) * modinv(&eval_mod(&dc, r, &next), &next)).mod_floor(&next))
            .collect();
        modulus = next;
    }
    Padic { field, modulus, s, roots, extra: ex }
}

/// Recovery of small integral elements of K from residues modulo p^k.
struct Recon {
    field: QField,
    b1: (BigInt, BigInt),
    b2: (BigInt, BigInt),
    det: BigRational,
}

impl Recon {
    fn new(pd: &Padic) -> Recon {
        let field = pd.field;
        let m = &pd.modulus;
        // tau = i or w, and its image modulo p^k
        let half = modinv(&BigInt::from(2), m);
        let tau_k = match field {
            QField::Gauss => pd.s.clone(),
            QField::Eisenstein => ((&pd.s - BigInt::one()) * &half).mod_floor(m),
        };
        let (b1, b2) = reduce_basis(field, (m.clone(), BigInt::zero()), ((-&tau_k).mod_floor(m), BigInt::one()));
        let det = BigRational::from_integer(&b1.0 * &b2.1 - &b1.1 * &b2.0);
        Recon { field, b1, b2, det }
    }

    /// The integral element of norm at most `bound` with image `theta`.
    fn recover(&self, theta: &BigInt, bound: &BigInt) -> Option<FieldElem> {
        let field = self.field;
        let (b1, b2) = (&self.b1, &self.b2);
        let tx = BigRational::from_integer(-theta.clone());
        let c1 = round(&(&tx * BigRational::from_integer(b2.1.clone()) / &self.det));
        let c2 = round(&(-&tx * BigRational::from_integer(b1.1.clone()) / &self.det));
        for e1 in -1i64..=1 {
            for e2 in -1i64..=1 {
                let k1 = &c1 + BigInt::from(e1);
                let k2 = &c2 + BigInt::from(e2);
                let u = theta + &k1 * &b1.0 + &k2 * &b2.0;
                let v = &k1 * &b1.1 + &k2 * &b2.1;
                if norm_form(field, &u, &v) > *bound {
                    continue;
                }
                return Some(match field {
                    QField::Gauss => FieldElem::new(field, BigRational::from_integer(u), BigRational::from_integer(v)),
                    QField::Eisenstein => {
                        let vh = BigRational::new(v, BigInt::from(2));
                        FieldElem::new(field, BigRational::from_integer(u) - &vh, vh)
                    }
                });
            }
        }
        None
    }
}

/// Bound on the absolute value of every root of a monic polynomial.
fn cauchy_abs_bound(h: &[FieldElem]) -> BigInt {
    let max_norm = h.iter().map(|a| a.norm().to_integer()).max().unwrap();
    BigInt::one() + max_norm.sqrt() + BigInt::one()
}

fn lattice_roots(g: &Poly<FieldElem>, field: QField) -> Vec<FieldElem> {
    let (h, l) = integral_monic(g);
    let m = cauchy_abs_bound(&h);
    let bound = &m * &m;
    let pd = padic_setup(&h, field, &[], &(&bound * BigInt::from(64)));
    let rc = Recon::new(&pd);
    let hp = Poly::new(h);
    let lq_inv = BigRational::new(BigInt::one(), l);
    pd.roots
        .iter()
        .filter_map(|theta| rc.recover(theta, &bound))
        .filter(|y| hp.eval(y).is_zero())
        .map(|y| y.scale(&lq_inv))
        .collect()
}

/// Roots lying in the tower `K(sqrt(d_1), ..., sqrt(d_m))`, m <= 2, of a
/// polynomial with coefficients in K.
///
/// At a prime p of K split completely in the tower, a root `alpha` and its
/// conjugates `alpha_e` (e a sign vector) embed as p-adic roots `rho_e`, and
/// `sqrt(d_S) * sum_e chi_S(e) rho_e = 2^m d_S c_S` is a small integer of K
/// for every coordinate `c_S`. Tuples of p-adic roots are tried against
/// this, and every candidate is checked exactly.
pub fn roots_in_tower(g: &Poly<FieldElem>, rads: &[FieldElem]) -> Result<Vec<RadicalElem>> {
    let field = g.ctx().field;
    if rads.len() > 2 {
        return Err(Error::TowerTooDeep(rads.len()));
    }
    let sq = RadicalElem::tower(field, rads)?;
    let ds: Vec<FieldElem> = sq.last().map(|r| r.radicands().to_vec()).unwrap_or_default();
    if g.degree().unwrap_or(0) == 0 {
        return Ok(Vec::new());
    }
    let m = ds.len();
    let n_e = 1usize << m;
    let (h, l) = integral_monic(&g.squarefree());
    let mabs = cauchy_abs_bound(&h);
    let scale = BigInt::from(n_e) * &mabs;
    let masks: Vec<FieldElem> = (0..n_e)
        .map(|s| (0..m).filter(|j| s >> j & 1 == 1).fold(field.one(), |acc, j| acc * &ds[j]))
        .collect();
    let bounds: Vec<BigInt> = masks.iter().map(|d| &scale * &scale * d.norm().to_integer()).collect();
    let target = bounds.iter().max().unwrap() * BigInt::from(64);
    let pd = padic_setup(&h, field, &ds, &target);
    let rc = Recon::new(&pd);
    let md = &pd.modulus;
    let r_s: Vec<BigInt> = (0..n_e)
        .map(|s| (0..m).filter(|j| s >> j & 1 == 1).fold(BigInt::one(), |acc, j| (acc * &pd.extra[j]).mod_floor(md)))
        .collect();
    let hp = Poly::new(h.iter().map(|c| RadicalElem::new(field, ds.clone(), base_coords(c, n_e)).unwrap()).collect());
    let lq_inv = BigRational::new(BigInt::one(), l);
    let two_m = field.int(n_e as i64);

    let rr = &pd.roots;
    let nr = rr.len();
    let mut out: Vec<RadicalElem> = Vec::new();
    let mut idx = vec![0usize; n_e];
    if nr == 0 {
        return Ok(out);
    }
    loop {
        // the conjugate with the least index is the representative
        if idx.iter().all(|&i| i >= idx[0]) {
            if let Some(alpha) = try_tuple(&idx, rr, &r_s, md, &rc, &bounds, &masks, &two_m, &ds, field) {
                if hp.eval(&alpha).is_zero() {
                    let mut conj = vec![alpha];
                    for j in 0..m {
                        let more: Vec<RadicalElem> = conj.iter().map(|a| a.conj(j)).collect();
                        conj.extend(more);
                    }
                    for a in conj {
                        let x = a.scale(&FieldElem::from_rational(field, lq_inv.clone()));
                        if !out.contains(&x) {
                            out.push(x);
                        }
                    }
                }
            }
        }
        let mut k = 0;
        loop {
            if k == n_e {
                return Ok(out);
            }
            idx[k] += 1;
            if idx[k] < nr {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

fn base_coords(c: &FieldElem, n: usize) -> Vec<FieldElem> {
    let mut v = vec![c.field.zero(); n];
    v[0] = c.clone();
    v
}

#[allow(clippy::too_many_arguments)]
fn try_tuple(
    idx: &[usize],
    rr: &[BigInt],
    r_s: &[BigInt],
    md: &BigInt,
    rc: &Recon,
    bounds: &[BigInt],
    masks: &[FieldElem],
    two_m: &FieldElem,
    ds: &[FieldElem],
    field: QField,
) -> Option<RadicalElem> {
    let n_e = idx.len();
    let mut coords = Vec::with_capacity(n_e);
    for s in 0..n_e {
        let mut acc = BigInt::zero();
        for (e, &i) in idx.iter().enumerate() {
            if (s & e).count_ones() % 2 == 0 {
                acc += &rr[i];
            } else {
                acc -= &rr[i];
            }
        }
        let w = (acc * &r_s[s]).mod_floor(md);
        let w = rc.recover(&w, &bounds[s])?;
        coords.push(w / (two_m * &masks[s]));
    }
    RadicalElem::new(field, ds.to_vec(), coords).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn poly_from_roots(field: QField, roots: &[FieldElem], extra: &[i64]) -> Poly<FieldElem> {
        let mut p = Poly::from_i64(&field.one(), extra);
        for r in roots {
            p = &p * &Poly::new(vec![-r.clone(), field.one()]);
        }
        p
    }

    #[test]
    fn cubic_examples() {
        let g = QField::Gauss;
        let e = QField::Eisenstein;
        // x^3 + 4x
        let p = Poly::from_i64(&g.one(), &[0, 4, 0, 1]);
        assert_eq!(roots_in_k(&p), vec![g.elem(0, -2), g.zero(), g.elem(0, 2)]);
        // x^3 + 1 over Q(sqrt(-3))
        let p = Poly::from_i64(&e.one(), &[1, 0, 0, 1]);
        assert_eq!(roots_in_k(&p), vec![e.int(-1), e.frac(1, 2, -1, 2), e.frac(1, 2, 1, 2)]);
        // x^3 - 2 has no root in Q(i)
        let p = Poly::from_i64(&g.one(), &[-2, 0, 0, 1]);
        assert!(roots_in_k(&p).is_empty());
    }

    #[test]
    fn random_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for field in [QField::Gauss, QField::Eisenstein] {
            for _ in 0..40 {
                let k = rng.gen_range(1..5);
                let roots: Vec<FieldElem> = (0..k)
                    .map(|_| {
                        field.frac(rng.gen_range(-30..30), rng.gen_range(1..6), rng.gen_range(-30..30), rng.gen_range(1..6))
                    })
                    .collect();
                // an irreducible cofactor with no roots in either field
                let p = poly_from_roots(field, &roots, &[3, 0, 0, 1]).scale(&field.frac(7, 3, 1, 1));
                let mut want = roots.clone();
                want.sort();
                want.dedup();
                assert_eq!(roots_in_k(&p), want);
            }
        }
    }

    fn tower_poly(field: QField, alpha: &RadicalElem) -> Poly<FieldElem> {
        let one = alpha.one_like();
        let mut p = Poly::new(vec![one.clone()]);
        let mut conj = vec![alpha.clone()];
        for j in 0..alpha.depth() {
            let more: Vec<RadicalElem> = conj.iter().map(|a| a.conj(j)).collect();
            conj.extend(more);
        }
        for c in conj {
            p = &p * &Poly::new(vec![-c, one.clone()]);
        }
        Poly::new(p.coeffs().iter().map(|c| c.as_base().unwrap()).collect()).scale(&field.one())
    }

    #[test]
    fn tower_examples() {
        let g = QField::Gauss;
        let r = roots_in_tower(&Poly::from_i64(&g.one(), &[-2, 0, 1]), &[g.int(2)]).unwrap();
        assert_eq!(r.len(), 2);
        let p = Poly::from_i64(&g.one(), &[1, 0, -10, 0, 1]);
        assert_eq!(roots_in_tower(&p, &[g.int(2), g.int(3)]).unwrap().len(), 4);
        assert!(roots_in_tower(&p, &[g.int(2)]).unwrap().is_empty());
        assert_eq!(roots_in_tower(&p, &[]).unwrap().len(), 0);
        // (x^2 - 2)(2x - 1)(x^2 + 3)
        let p = &(&Poly::from_i64(&g.one(), &[-2, 0, 1]) * &Poly::from_i64(&g.one(), &[-1, 2])) * &Poly::from_i64(&g.one(), &[3, 0, 1]);
        let r = roots_in_tower(&p, &[g.int(2), g.int(-3)]).unwrap();
        assert_eq!(r.len(), 5);
        for x in &r {
            let v = p.coeffs().iter().rev().fold(x.zero_like(), |acc, c| acc * x.clone() + x.base_like(c.clone()));
            assert!(v.is_zero());
        }
        let e = QField::Eisenstein;
        let r = roots_in_tower(&Poly::from_i64(&e.one(), &[1, 0, 0, 0, 1]), &[e.int(-1), e.int(2)]).unwrap();
        assert_eq!(r.len(), 4);
        assert!(roots_in_tower(&p, &[g.int(2), g.int(8)]).is_err());
        assert!(roots_in_tower(&p, &[g.int(2), g.int(3), g.int(5)]).is_err());
    }

    #[test]
    fn tower_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for field in [QField::Gauss, QField::Eisenstein] {
            for _ in 0..12 {
                let rads = vec![field.elem(rng.gen_range(2..9), rng.gen_range(-3..4)), field.int(rng.gen_range(-7..-1))];
                let Ok(sq) = RadicalElem::tower(field, &rads) else { continue };
                let ds = sq[1].radicands().to_vec();
                let coords: Vec<FieldElem> = (0..4)
                    .map(|_| field.frac(rng.gen_range(-9..9), rng.gen_range(1..4), rng.gen_range(-9..9), 1))
                    .collect();
                let alpha = RadicalElem::new(field, ds.clone(), coords).unwrap();
                let p = &tower_poly(field, &alpha) * &Poly::from_i64(&field.one(), &[5, 1, 0, 1]);
                let r = roots_in_tower(&p, &rads).unwrap();
                assert!(r.contains(&alpha), "{alpha} missing from {r:?}");
            }
        }
    }
}
