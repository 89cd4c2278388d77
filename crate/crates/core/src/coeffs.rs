//! Coefficient rings: prime fields, complex doubles, and the contract the
//! algebra code is written against.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;

/// Default verification prime, 2^31 - 1.
pub const MERSENNE_31: u64 = (1 << 31) - 1;

/// Default prime for the Jacobian rank bound.
pub const SMALL_PRIME: u64 = 313;

/// Ring operations shared by every coefficient type.
///
/// Values carry whatever context they need (a modulus, a variable count), so
/// constants are built from a context obtained from an existing value.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    type Ctx: Copy + Debug + PartialEq + Send + Sync;

    fn ctx(&self) -> Self::Ctx;
    fn from_i64(ctx: Self::Ctx, n: i64) -> Self;
    fn is_zero(&self) -> bool;

    fn zero(ctx: Self::Ctx) -> Self {
        Self::from_i64(ctx, 0)
    }

    fn one(ctx: Self::Ctx) -> Self {
        Self::from_i64(ctx, 1)
    }

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(self.ctx());
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.square();
            e >>= 1;
        }
        acc
    }
}

/// Field extension of the contract: inverses, square roots, sampling and a
/// pivot magnitude for elimination.
pub trait Field: Scalar {
    fn inv(&self) -> Option<Self>;
    fn sqrt(&self) -> Option<Self>;
    fn random<R: Rng + ?Sized>(ctx: Self::Ctx, rng: &mut R) -> Self;

    /// Pivot score: any nonzero residue scores 1 over F_p; the modulus over C.
    fn magnitude(&self) -> f64;

    /// Deterministic sign normalisation used to pick one of `±x`.
    fn is_canonical_sign(&self) -> bool;
}

/// Element of F_p. The modulus travels with the value.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fp {
    v: u64,
    p: u64,
}

impl Fp {
    pub fn new(v: i64, p: u64) -> Self {
        let r = v.rem_euclid(p as i64) as u64;
        Fp { v: r, p }
    }

    pub fn from_u64(v: u64, p: u64) -> Self {
        Fp { v: v % p, p }
    }

    pub fn residue(&self) -> u64 {
        self.v
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }
}

impl Debug for Fp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl std::fmt::Display for Fp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.v)
    }
}

impl Add for Fp {
    type Output = Fp;
    fn add(self, o: Fp) -> Fp {
        debug_assert_eq!(self.p, o.p);
        let s = self.v + o.v;
        Fp { v: if s >= self.p { s - self.p } else { s }, p: self.p }
    }
}

impl Sub for Fp {
    type Output = Fp;
    fn sub(self, o: Fp) -> Fp {
        debug_assert_eq!(self.p, o.p);
        let v = if self.v >= o.v { self.v - o.v } else { self.v + self.p - o.v };
        Fp { v, p: self.p }
    }
}

impl Mul for Fp {
    type Output = Fp;
    fn mul(self, o: Fp) -> Fp {
        debug_assert_eq!(self.p, o.p);
        Fp { v: mulmod(self.v, o.v, self.p), p: self.p }
    }
}

impl Neg for Fp {
    type Output = Fp;
    fn neg(self) -> Fp {
        Fp { v: if self.v == 0 { 0 } else { self.p - self.v }, p: self.p }
    }
}

impl Scalar for Fp {
    type Ctx = u64;

    fn ctx(&self) -> u64 {
        self.p
    }

    fn from_i64(p: u64, n: i64) -> Self {
        Fp::new(n, p)
    }

    fn is_zero(&self) -> bool {
        self.v == 0
    }
}

impl Field for Fp {
    fn inv(&self) -> Option<Self> {
        if self.v == 0 {
            None
        } else {
            Some(Fp { v: powmod(self.v, self.p - 2, self.p), p: self.p })
        }
    }

    fn sqrt(&self) -> Option<Self> {
        field_sqrt(*self)
    }

    fn random<R: Rng + ?Sized>(p: u64, rng: &mut R) -> Self {
        Fp { v: rng.random_range(0..p), p }
    }

    fn magnitude(&self) -> f64 {
        if self.v == 0 {
            0.0
        } else {
            1.0
        }
    }

    fn is_canonical_sign(&self) -> bool {
        self.v <= self.p / 2
    }
}

pub(crate) fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn powmod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, p);
        }
        b = mulmod(b, b, p);
        e >>= 1;
    }
    acc
}

/// Square root in F_p by Tonelli–Shanks; `None` for non-residues.
pub fn field_sqrt(x: Fp) -> Option<Fp> {
    let p = x.p;
    if x.v == 0 {
        return Some(x);
    }
    if p == 2 {
        return Some(x);
    }
    if powmod(x.v, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(Fp { v: powmod(x.v, (p + 1) / 4, p), p });
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q.is_multiple_of(2) {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while powmod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = powmod(z, q, p);
    let mut t = powmod(x.v, q, p);
    let mut r = powmod(x.v, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mulmod(t2, t2, p);
            i += 1;
        }
        let b = powmod(c, 1 << (m - i - 1), p);
        m = i;
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        r = mulmod(r, b, p);
    }
    Some(Fp { v: r, p })
}

/// Deterministic Miller–Rabin, exact for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &BASES {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

impl Scalar for Complex64 {
    type Ctx = ();

    fn ctx(&self) {}

    fn from_i64(_: (), n: i64) -> Self {
        Complex64::new(n as f64, 0.0)
    }

    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
}

impl Field for Complex64 {
    fn inv(&self) -> Option<Self> {
        if Scalar::is_zero(self) {
            None
        } else {
            Some(Complex64::new(1.0, 0.0) / self)
        }
    }

    fn sqrt(&self) -> Option<Self> {
        Some(Complex64::sqrt(*self))
    }

    fn random<R: Rng + ?Sized>(_: (), rng: &mut R) -> Self {
        Complex64::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))
    }

    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn is_canonical_sign(&self) -> bool {
        self.re > 0.0 || (self.re == 0.0 && self.im >= 0.0)
    }
}

/// Relative closeness of complex numbers: `|x - y| <= tol * max(1, |x|, |y|)`.
pub fn close(x: Complex64, y: Complex64, tol: f64) -> bool {
    (x - y).norm() <= tol * 1f64.max(x.norm()).max(y.norm())
}

/// Default relative tolerance for complex equality.
pub const DEFAULT_TOL: f64 = 1e-9;
