//! Finite fields F_q, q = p^k with p odd and k <= 4, and reduction of K
//! modulo primes of O_K.
//!
//! Elements are residues modulo a fixed monic irreducible polynomial taken
//! from `data/moduli.txt` (the least irreducible in a fixed ranking), or
//! found at runtime by the same rule when p is not in the table.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::qfield::{primes_above, FieldElem, PrimeKind, QField, RingElem};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

const MODULI: &str = include_str!("../data/moduli.txt");

pub struct FqCtx {
    pub p: u64,
    pub k: usize,
    pub q: u64,
    /// Low coefficients of the monic modulus.
    pub modulus: Vec<u64>,
    squares: OnceLock<Vec<bool>>,
}

impl fmt::Debug for FqCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}", self.p, self.k)
    }
}

fn registry() -> &'static Mutex<HashMap<(u64, usize), &'static FqCtx>> {
    static REG: OnceLock<Mutex<HashMap<(u64, usize), &'static FqCtx>>> = OnceLock::new();
    REG.get_or_init(|| Mutex::new(HashMap::new()))
}

fn table_modulus(p: u64, k: usize) -> Option<Vec<u64>> {
    for line in MODULI.lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let v: Vec<u64> = line.split_whitespace().map(|t| t.parse().unwrap()).collect();
        if v[0] == p && v[1] as usize == k {
            return Some(v[2..].to_vec());
        }
    }
    None
}

/// The least monic irreducible of degree k over F_p in the table's ranking.
pub fn least_irreducible(p: u64, k: usize) -> Vec<u64> {
    for n in 0..p.pow(k as u32) {
        let low: Vec<u64> = (0..k).map(|i| n / p.pow(i as u32) % p).collect();
        if rabin_irreducible(&low, p) {
            return low;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

// Polynomials over F_p as coefficient vectors, low degree first.
fn pp_trim(v: &mut Vec<u64>) {
    while v.last() == Some(&0) {
        v.pop();
    }
}

fn pp_inv(a: u64, p: u64) -> u64 {
    let e = (a as i64).extended_gcd(&(p as i64));
    e.x.rem_euclid(p as i64) as u64
}

fn pp_rem(a: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    pp_trim(&mut r);
    let dm = m.len() - 1;
    let inv = pp_inv(m[dm], p);
    while r.len() > dm {
        let c = r[r.len() - 1] * inv % p;
        let shift = r.len() - 1 - dm;
        for (j, mj) in m.iter().enumerate() {
            r[shift + j] = (r[shift + j] + p - c * mj % p) % p;
        }
        pp_trim(&mut r);
    }
    r
}

fn pp_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + x * y) % p;
        }
    }
    pp_rem(&out, m, p)
}

fn pp_gcd(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    pp_trim(&mut a);
    pp_trim(&mut b);
    while !b.is_empty() {
        let r = pp_rem(&a, &b, p);
        a = b;
        b = r;
    }
    a
}

/// x^(p^e) modulo m.
fn frob_power(m: &[u64], p: u64, e: u32) -> Vec<u64> {
    let mut x = pp_rem(&[0, 1], m, p);
    for _ in 0..e {
        let mut acc = vec![1u64];
        let mut base = x.clone();
        let mut n = p;
        while n > 0 {
            if n & 1 == 1 {
                acc = pp_mulmod(&acc, &base, m, p);
            }
            base = pp_mulmod(&base, &base, m, p);
            n >>= 1;
        }
        x = acc;
    }
    x
}

/// Rabin's test for the monic polynomial with the given low coefficients.
pub fn rabin_irreducible(low: &[u64], p: u64) -> bool {
    let k = low.len();
    let mut m = low.to_vec();
    m.push(1);
    if k == 1 {
        return true;
    }
    let sub_x = |mut v: Vec<u64>| {
        v.resize(v.len().max(2), 0);
        v[1] = (v[1] + p - 1) % p;
        pp_trim(&mut v);
        v
    };
    if !sub_x(frob_power(&m, p, k as u32)).is_empty() {
        return false;
    }
    for r in [2usize, 3] {
        if k.is_multiple_of(r) {
            let g = pp_gcd(&m, &sub_x(frob_power(&m, p, (k / r) as u32)), p);
            if g.len() != 1 {
                return false;
            }
        }
    }
    true
}

impl FqCtx {
    /// The field with p^k elements; p odd prime, 1 <= k <= 4.
    pub fn get(p: u64, k: usize) -> Result<&'static FqCtx> {
        if p == 2 {
            return Err(Error::ResidueCharTwo);
        }
        if !(1..=4).contains(&k) || !crate::qfield::is_prime_u64(p) {
            return Err(Error::OutOfRange(format!("F_{p}^{k}")));
        }
        let q = p.checked_pow(k as u32).filter(|&q| q <= 1 << 40).ok_or_else(|| Error::OutOfRange(format!("F_{p}^{k}")))?;
        let mut reg = registry().lock().unwrap();
        if let Some(c) = reg.get(&(p, k)) {
            return Ok(c);
        }
        let modulus = table_modulus(p, k).unwrap_or_else(|| least_irreducible(p, k));
        assert!(rabin_irreducible(&modulus, p), "modulus for F_{p}^{k} is reducible");
        let ctx: &'static FqCtx = Box::leak(Box::new(FqCtx { p, k, q, modulus, squares: OnceLock::new() }));
        reg.insert((p, k), ctx);
        Ok(ctx)
    }

    pub fn zero(&'static self) -> Fq {
        Fq { c: [0; 4], ctx: self }
    }

    pub fn one(&'static self) -> Fq {
        self.from_i64(1)
    }

    pub fn from_i64(&'static self, n: i64) -> Fq {
        let mut c = [0; 4];
        c[0] = n.rem_euclid(self.p as i64) as u64;
        Fq { c, ctx: self }
    }

    pub fn from_index(&'static self, mut idx: u64) -> Fq {
        let mut c = [0; 4];
        for ci in c.iter_mut().take(self.k) {
            *ci = idx % self.p;
            idx /= self.p;
        }
        Fq { c, ctx: self }
    }

    /// The class of the polynomial variable (a generator over F_p when k > 1).
    pub fn gen(&'static self) -> Fq {
        if self.k == 1 {
            return self.from_i64(-(self.modulus[0] as i64));
        }
        let mut c = [0; 4];
        c[1] = 1;
        Fq { c, ctx: self }
    }

    pub fn elements(&'static self) -> impl Iterator<Item = Fq> {
        (0..self.q).map(move |i| self.from_index(i))
    }

    /// Squareness of every element, indexed by element index.
    pub fn squares(&'static self) -> &'static [bool] {
        self.squares.get_or_init(|| {
            let mut t = vec![false; self.q as usize];
            for x in self.elements() {
                t[(x * x).index() as usize] = true;
            }
            t
        })
    }
}

#[derive(Clone, Copy)]
pub struct Fq {
    c: [u64; 4],
    ctx: &'static FqCtx,
}

impl PartialEq for Fq {
    fn eq(&self, o: &Self) -> bool {
        self.c == o.c && std::ptr::eq(self.ctx, o.ctx)
    }
}

impl Eq for Fq {}

impl std::hash::Hash for Fq {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.c.hash(h)
    }
}

impl Fq {
    pub fn ctx(&self) -> &'static FqCtx {
        self.ctx
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c[..self.ctx.k]
    }

    pub fn index(&self) -> u64 {
        let p = self.ctx.p;
        self.c[..self.ctx.k].iter().rev().fold(0, |acc, &x| acc * p + x)
    }

    pub fn inv(&self) -> Fq {
        assert!(!Field::is_zero(self), "inverse of zero in a finite field");
        self.pow(self.ctx.q - 2)
    }

    pub fn is_square(&self) -> bool {
        if self.ctx.q <= 1 << 22 {
            self.ctx.squares()[self.index() as usize]
        } else {
            Field::is_zero(self) || self.pow((self.ctx.q - 1) / 2).is_one()
        }
    }

    /// A square root by exhaustive search (small fields only).
    pub fn sqrt(&self) -> Option<Fq> {
        if !self.is_square() {
            return None;
        }
        self.ctx.elements().find(|y| *y * *y == *self)
    }
}

impl fmt::Debug for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ctx.k == 1 {
            write!(f, "{}", self.c[0])
        } else {
            write!(f, "{:?}", self.coeffs())
        }
    }
}

impl fmt::Display for Fq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Add for Fq {
    type Output = Fq;
    fn add(self, o: Fq) -> Fq {
        let p = self.ctx.p;
        let mut c = [0; 4];
        for i in 0..self.ctx.k {
            c[i] = (self.c[i] + o.c[i]) % p;
        }
        Fq { c, ctx: self.ctx }
    }
}

impl Sub for Fq {
    type Output = Fq;
    fn sub(self, o: Fq) -> Fq {
        let p = self.ctx.p;
        let mut c = [0; 4];
        for i in 0..self.ctx.k {
            c[i] = (self.c[i] + p - o.c[i]) % p;
        }
        Fq { c, ctx: self.ctx }
    }
}

impl Neg for Fq {
    type Output = Fq;
    fn neg(self) -> Fq {
        let p = self.ctx.p;
        let mut c = [0; 4];
        for i in 0..self.ctx.k {
            c[i] = (p - self.c[i]) % p;
        }
        Fq { c, ctx: self.ctx }
    }
}

impl Mul for Fq {
    type Output = Fq;
    fn mul(self, o: Fq) -> Fq {
        let ctx = self.ctx;
        let (p, k) = (ctx.p as u128, ctx.k);
        let mut t = [0u128; 7];
        for i in 0..k {
            if self.c[i] == 0 {
                continue;
            }
            for j in 0..k {
                t[i + j] = (t[i + j] + self.c[i] as u128 * o.c[j] as u128) % p;
            }
        }
        for d in (k..2 * k - 1).rev() {
            let top = t[d];
            if top == 0 {
                continue;
            }
            t[d] = 0;
            for (j, m) in ctx.modulus.iter().enumerate() {
                t[d - k + j] = (t[d - k + j] + (p - top) * *m as u128) % p;
            }
        }
        let mut c = [0; 4];
        for i in 0..k {
            c[i] = t[i] as u64;
        }
        Fq { c, ctx }
    }
}

impl Div for Fq {
    type Output = Fq;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Fq) -> Fq {
        self * o.inv()
    }
}

impl Field for Fq {
    fn zero_like(&self) -> Self {
        self.ctx.zero()
    }
    fn one_like(&self) -> Self {
        self.ctx.one()
    }
    fn is_zero(&self) -> bool {
        self.c == [0; 4]
    }
    fn from_i64_like(&self, n: i64) -> Self {
        self.ctx.from_i64(n)
    }
}

/// Reduction of K modulo a prime of O_K of odd residue characteristic.
#[derive(Clone, Debug)]
pub struct ResidueMap {
    pub prime: RingElem,
    pub kind: PrimeKind,
    pub p: u64,
    pub ctx: &'static FqCtx,
    s_image: Fq,
    ram_index: u32,
}

impl ResidueMap {
    pub fn new(prime: &FieldElem) -> Result<ResidueMap> {
        let pr = RingElem::new(prime.clone())?;
        let n = pr.norm();
        let field = prime.field;
        let n64 = n.to_u64().ok_or_else(|| Error::NotPrime(prime.to_string()))?;
        let fac = crate::qfield::factor_u64(n64);
        let p = match fac.as_slice() {
            [(p, _)] => *p,
            _ => return Err(Error::NotPrime(prime.to_string())),
        };
        if p == 2 {
            return Err(Error::ResidueCharTwo);
        }
        let (kind, primes) = primes_above(p, field);
        let canon = crate::qfield::unit_normalize(prime);
        let Some(pi) = primes.into_iter().find(|q| q.elem() == &canon) else {
            return Err(Error::NotPrime(prime.to_string()));
        };
        let d = field.d();
        let (ctx, s_image) = match kind {
            PrimeKind::Split => {
                let ctx = FqCtx::get(p, 1)?;
                // pi = a + b s vanishes, so s = -a/b modulo p
                let (a, b) = half_int_pair(pi.elem(), p);
                let s = ctx.from_i64(-(a as i64)) / ctx.from_i64(b as i64);
                (ctx, s)
            }
            PrimeKind::Ramified => (FqCtx::get(p, 1)?, FqCtx::get(p, 1)?.zero()),
            PrimeKind::Inert => {
                let ctx = FqCtx::get(p, 2)?;
                let dd = ctx.from_i64(d);
                let root = ctx.elements().find(|t| *t * *t == dd).expect("D is a square in F_p^2");
                (ctx, root)
            }
        };
        let ram_index = if kind == PrimeKind::Ramified { 2 } else { 1 };
        Ok(ResidueMap { prime: pi, kind, p, ctx, s_image, ram_index })
    }

    pub fn field(&self) -> QField {
        self.prime.field()
    }

    pub fn q(&self) -> u64 {
        self.ctx.q
    }

    fn reduce_integral(&self, x: &FieldElem) -> Fq {
        let (a, b) = half_int_pair(x, self.p);
        let half = self.ctx.from_i64(2).inv();
        (self.ctx.from_i64(a as i64) + self.ctx.from_i64(b as i64) * self.s_image) * half
    }

    /// Image of x in the residue field; x must be integral at the prime.
    pub fn reduce(&self, x: &FieldElem) -> Result<Fq> {
        if x.field != self.field() {
            return Err(Error::WrongField("element and prime in different fields".into()));
        }
        let l = x.denom_lcm();
        let mut t = 0u32;
        let mut lr = l.clone();
        let pb = BigInt::from(self.p);
        while lr.is_multiple_of(&pb) {
            lr /= &pb;
            t += 1;
        }
        let lq = FieldElem::from_rational(x.field, num_rational::BigRational::from_integer(l));
        let y = x * &lq;
        let mut pit = x.field.one();
        for _ in 0..t * self.ram_index {
            pit = pit * self.prime.elem();
        }
        let y2 = &y / &pit;
        let d2 = &lq / &pit;
        if !y2.is_integral() {
            return Err(Error::NotIntegral);
        }
        Ok(self.reduce_integral(&y2) / self.reduce_integral(&d2))
    }
}

/// (2a mod p, 2b mod p) for an element a + b s with a, b in (1/2)Z.
fn half_int_pair(x: &FieldElem, p: u64) -> (u64, u64) {
    let pb = BigInt::from(p);
    let conv = |q: &num_rational::BigRational| -> u64 {
        let two = q * num_rational::BigRational::from_integer(BigInt::from(2));
        assert!(two.is_integer(), "expected a half-integral coordinate");
        two.to_integer().mod_floor(&pb).to_u64().unwrap()
    };
    (conv(&x.a), conv(&x.b))
}

/// Good odd primes of O_K in increasing norm order, up to a norm bound.
pub fn odd_primes_by_norm(field: QField, max_norm: u64) -> Vec<FieldElem> {
    let mut out: Vec<(u64, FieldElem)> = Vec::new();
    for p in 3..=max_norm {
        if !crate::qfield::is_prime_u64(p) {
            continue;
        }
        let (kind, primes) = primes_above(p, field);
        let norm = if kind == PrimeKind::Inert { p * p } else { p };
        if norm > max_norm {
            continue;
        }
        for pi in primes {
            out.push((norm, pi.into_elem()));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| b.1.cmp(&a.1)));
    out.into_iter().map(|(_, e)| e).collect()
}
