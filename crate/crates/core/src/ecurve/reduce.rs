//! Reduction of curves over K modulo odd primes, and point counts over F_q.

use super::Curve;
use crate::error::{Error, Result};
use crate::ffield::{Fq, ResidueMap};
use crate::field::Field;
use crate::qfield::{valuation, FieldElem, RingElem};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ReductionKind {
    Good,
    Multiplicative,
    Additive,
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub kind: ReductionKind,
    pub map: ResidueMap,
    /// A model over K, minimal at the prime, with a1 = a3 = 0.
    pub model: Curve<FieldElem>,
    /// The reduced curve, when the reduction is good.
    pub curve: Option<Curve<Fq>>,
}

fn val(x: &FieldElem, pi: &RingElem) -> i64 {
    valuation(x, pi).unwrap_or(i64::MAX / 4)
}

/// Least k >= 0 with v(c_i) + w_i k >= 0 for all i.
fn integral_shift(c: &[(&FieldElem, i64)], pi: &RingElem) -> i64 {
    c.iter()
        .map(|(x, w)| {
            let v = val(x, pi);
            if v >= 0 { 0 } else { (-v + w - 1) / w }
        })
        .max()
        .unwrap_or(0)
}

fn pi_pow(pi: &RingElem, k: i64) -> FieldElem {
    let mut acc = pi.field().one();
    let base = if k >= 0 { pi.elem().clone() } else { pi.elem().inv() };
    for _ in 0..k.abs() {
        acc = acc * &base;
    }
    acc
}

/// `[0, a2, 0, a4, a6]` scaled by u = pi^k: `(u^2 a2, u^4 a4, u^6 a6)`.
fn rescale(a: &[FieldElem; 3], pi: &RingElem, k: i64) -> [FieldElem; 3] {
    let u2 = pi_pow(pi, 2 * k);
    [&a[0] * &u2, &a[1] * &u2.square(), &a[2] * &u2.pow(3)]
}

/// Translate x -> x + r in `x^3 + a2 x^2 + a4 x + a6`.
fn translate(a: &[FieldElem; 3], r: &FieldElem) -> [FieldElem; 3] {
    let k = |n: i64| r.field.int(n);
    [
        &a[0] + &(k(3) * r),
        &a[1] + &(k(2) * &a[0] * r) + k(3) * r.square(),
        &a[2] + &(&a[1] * r) + &a[0] * &r.square() + r.pow(3),
    ]
}

fn cubic_curve(a: &[FieldElem; 3]) -> Result<Curve<FieldElem>> {
    let z = a[0].zero_like();
    Curve::new([z.clone(), a[0].clone(), z, a[1].clone(), a[2].clone()])
}

/// Residue representatives of O_K modulo the prime.
fn residue_reps(map: &ResidueMap) -> Vec<FieldElem> {
    let field = map.field();
    let p = map.p as i64;
    let mut all = Vec::new();
    for a in 0..p {
        for b in 0..p {
            all.push(field.elem(a, b));
        }
    }
    let mut seen = std::collections::HashSet::new();
    all.into_iter()
        .filter(|x| seen.insert(map.reduce(x).expect("integral").index()))
        .collect()
}

/// A translation r with v(a2') >= 2, v(a4') >= 4, v(a6') >= 6, found digit
/// by digit in base pi.  A truncation c of such an r, correct to precision
/// k, already has v(f(c)) >= min(6, 4+k, 2+2k, 3k), v(f'(c)) >= min(4, 2+k, 2k)
/// and v(f''(c)/2) >= min(2, k), by Taylor expansion at r.
fn non_minimal_translation(a: &[FieldElem; 3], map: &ResidueMap) -> Option<FieldElem> {
    let pi = &map.prime;
    let field = pi.field();
    let reps = residue_reps(map);
    let f = |r: &FieldElem| r.pow(3) + &a[0] * &r.square() + &a[1] * r + a[2].clone();
    let df = |r: &FieldElem| field.int(3) * r.square() + field.int(2) * &a[0] * r + a[1].clone();
    let half_ddf = |r: &FieldElem| field.int(3) * r + a[0].clone();
    let works = |r: &FieldElem| {
        let t = translate(a, r);
        val(&t[0], pi) >= 2 && val(&t[1], pi) >= 4 && val(&t[2], pi) >= 6
    };
    let mut layer = vec![field.zero()];
    for k in 0..6i64 {
        if let Some(r) = layer.iter().find(|r| works(r)) {
            return Some(r.clone());
        }
        let step = pi_pow(pi, k);
        let prec = k + 1;
        let mut next = Vec::new();
        for r in &layer {
            for d in &reps {
                let c = r + &(d * &step);
                if val(&f(&c), pi) >= 6.min(4 + prec).min(2 + 2 * prec).min(3 * prec)
                    && val(&df(&c), pi) >= 4.min(2 + prec).min(2 * prec)
                    && val(&half_ddf(&c), pi) >= 2.min(prec)
                {
                    next.push(c);
                }
            }
        }
        layer = next;
        if layer.is_empty() {
            return None;
        }
    }
    layer.into_iter().find(|r| works(r))
}

/// Reduction of E at an odd prime of O_K.
pub fn reduce_curve(e: &Curve<FieldElem>, prime: &FieldElem) -> Result<Reduction> {
    let map = ResidueMap::new(prime)?;
    if prime.field != e.field() {
        return Err(Error::WrongField("curve and prime in different fields".into()));
    }
    let pi = map.prime.clone();
    let field = e.field();
    let k = |n: i64| field.int(n);
    let model = if map.p >= 5 {
        let (a, b) = (-(k(27) * e.c4()), -(k(54) * e.c6()));
        let s = integral_shift(&[(&a, 4), (&b, 6)], &pi);
        let mut ab = [&a * &pi_pow(&pi, 4 * s), &b * &pi_pow(&pi, 6 * s)];
        while val(&ab[0], &pi) >= 4 && val(&ab[1], &pi) >= 6 {
            ab = [&ab[0] / &pi_pow(&pi, 4), &ab[1] / &pi_pow(&pi, 6)];
        }
        Curve::short(ab[0].clone(), ab[1].clone())?
    } else {
        // y^2 = x^3 + (b2/4) x^2 + (b4/2) x + b6/4
        let a = [e.b2() / &k(4), e.b4() / &k(2), e.b6() / &k(4)];
        let s = integral_shift(&[(&a[0], 2), (&a[1], 4), (&a[2], 6)], &pi);
        let mut a = rescale(&a, &pi, s);
        while let Some(r) = non_minimal_translation(&a, &map) {
            a = rescale(&translate(&a, &r), &pi, -1);
        }
        cubic_curve(&a)?
    };
    let vd = val(model.disc(), &pi);
    let kind = if vd == 0 {
        ReductionKind::Good
    } else if val(model.c4(), &pi) == 0 {
        ReductionKind::Multiplicative
    } else {
        ReductionKind::Additive
    };
    let curve = if kind == ReductionKind::Good {
        let c = model.coeffs();
        let red: Vec<Fq> = c.iter().map(|x| map.reduce(x)).collect::<Result<_>>()?;
        Some(Curve::new(red.try_into().unwrap())?)
    } else {
        None
    };
    Ok(Reduction { kind, map, model, curve })
}

/// Quadratic character on F_q.
pub fn chi(x: &Fq) -> i64 {
    if x.is_zero() {
        0
    } else if x.is_square() {
        1
    } else {
        -1
    }
}

/// `#E(F_q)` including the point at infinity; q <= 10^6.
pub fn count_points(e: &Curve<Fq>) -> Result<u64> {
    let ctx = e.a1.ctx();
    if ctx.q > 1_000_000 {
        return Err(Error::CapExceeded(ctx.q));
    }
    let bq = super::divpoly::psi2_squared(e);
    let total: i64 = ctx.elements().map(|x| 1 + chi(&bq.eval(&x))).sum();
    let n = (total + 1) as u64;
    debug_assert!(((n as f64) - (ctx.q as f64 + 1.0)).abs() <= 2.0 * (ctx.q as f64).sqrt());
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::FqCtx;
    use crate::qfield::QField;
    use proptest::prelude::*;

    fn over(ctx: &'static FqCtx, a: [i64; 5]) -> Curve<Fq> {
        Curve::new(a.map(|v| ctx.from_i64(v))).unwrap()
    }

    #[test]
    fn good_reduction_examples() {
        let g = QField::Gauss;
        let e = Curve::from_i64(g, [0, 0, 0, -11, -14]).unwrap();
        let r = reduce_curve(&e, &g.int(3)).unwrap();
        assert_eq!(r.kind, ReductionKind::Good);
        assert_eq!(r.map.q(), 9);
        let n9 = count_points(r.curve.as_ref().unwrap()).unwrap();
        let n81 = count_points(&over(FqCtx::get(3, 4).unwrap(), [0, 0, 0, -11, -14])).unwrap();
        assert_eq!(n81, 64);
        // the count over F_81 follows from the one over F_9
        let t = 10 - n9 as i64;
        assert_eq!(n81 as i64, 82 - (t * t - 18));
        let e = Curve::from_i64(g, [0, 0, 0, 4, 0]).unwrap();
        for p in [g.elem(2, 1), g.elem(2, -1)] {
            let r = reduce_curve(&e, &p).unwrap();
            assert_eq!(r.kind, ReductionKind::Good);
            assert_eq!(count_points(r.curve.as_ref().unwrap()).unwrap(), 8);
        }
        assert!(matches!(reduce_curve(&e, &g.elem(1, 1)), Err(Error::ResidueCharTwo)));
    }

    #[test]
    fn bad_reduction_kinds() {
        let g = QField::Gauss;
        let e = Curve::from_i64(g, [0, 0, 0, 0, 5]).unwrap();
        assert_eq!(reduce_curve(&e, &g.elem(2, 1)).unwrap().kind, ReductionKind::Additive);
        let e = Curve::from_i64(g, [0, 1, 0, 0, 5]).unwrap();
        assert_eq!(reduce_curve(&e, &g.elem(2, 1)).unwrap().kind, ReductionKind::Multiplicative);
        assert!(reduce_curve(&e, &g.elem(2, 1)).unwrap().curve.is_none());
        let h = QField::Eisenstein;
        let e = Curve::from_i64(h, [0, 0, 0, 0, 1]).unwrap();
        assert_eq!(reduce_curve(&e, &h.s()).unwrap().kind, ReductionKind::Additive);
    }

    #[test]
    fn minimalization() {
        let g = QField::Gauss;
        // y^2 = x^3 + x + 1 scaled by 5 and by 3
        let e = Curve::from_i64(g, [0, 0, 0, 625, 15625]).unwrap();
        assert_eq!(reduce_curve(&e, &g.elem(2, 1)).unwrap().kind, ReductionKind::Good);
        let e = Curve::from_i64(g, [0, 0, 0, 81, 729]).unwrap();
        let r = reduce_curve(&e, &g.int(3)).unwrap();
        assert_eq!(r.kind, ReductionKind::Good);
        let base = reduce_curve(&Curve::from_i64(g, [0, 0, 0, 1, 1]).unwrap(), &g.int(3)).unwrap();
        assert_eq!(count_points(r.curve.as_ref().unwrap()).unwrap(), count_points(base.curve.as_ref().unwrap()).unwrap());
        // the same after x -> x + 1, which needs a translation to minimalize
        let e = Curve::from_i64(g, [0, 3, 0, 84, 811]).unwrap();
        assert_eq!(reduce_curve(&e, &g.int(3)).unwrap().kind, ReductionKind::Good);
        // and a long model with denominators
        let e = Curve::parse(g, "[1,1/3,0,0,1/27]").unwrap();
        let r = reduce_curve(&e, &g.int(3)).unwrap();
        assert_eq!(r.model.j(), e.j());
        let h = QField::Eisenstein;
        let e = Curve::from_i64(h, [0, 0, 0, 9, -27]).unwrap();
        assert_eq!(reduce_curve(&e, &h.s()).unwrap().kind, ReductionKind::Good);
    }

    #[test]
    fn small_counts() {
        assert_eq!(count_points(&over(FqCtx::get(3, 1).unwrap(), [0, 0, 0, 1, 0])).unwrap(), 4);
        assert_eq!(count_points(&over(FqCtx::get(5, 1).unwrap(), [0, 0, 0, 4, 0])).unwrap(), 8);
    }

    fn brute_count(e: &Curve<Fq>) -> u64 {
        let ctx = e.a1.ctx();
        let mut n = 1;
        for x in ctx.elements() {
            for y in ctx.elements() {
                if e.contains(&super::super::Point::Aff(x, y)) {
                    n += 1;
                }
            }
        }
        n
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn weil_and_twist_trace(p_idx in 0usize..10, k in 1usize..=2, a in proptest::array::uniform5(0i64..97), dseed in 0u64..10_000) {
            let primes = [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31];
            let ctx = FqCtx::get(primes[p_idx], k).unwrap();
            let Ok(e) = Curve::new(a.map(|v| ctx.from_i64(v))) else { return Ok(()) };
            let n = count_points(&e).unwrap();
            let q = ctx.q as f64;
            prop_assert!(((n as f64) - q - 1.0).abs() <= 2.0 * q.sqrt());
            if ctx.q < 200 {
                prop_assert_eq!(n, brute_count(&e));
            }
            if ctx.p >= 5 {
                let d = (0..ctx.q).map(|i| ctx.from_index((i + dseed) % ctx.q)).find(|x| !x.is_zero() && !x.is_square()).unwrap();
                let t = e.quadratic_twist(&d).unwrap();
                prop_assert_eq!(n + count_points(&t).unwrap(), 2 * (ctx.q + 1));
            }
        }
    }
}
