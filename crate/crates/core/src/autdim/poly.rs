//! Sparse multivariate polynomials over F_p.
//!
//! Monomials are packed into a `u128`: total degree in the top byte, then
//! four bits per variable with `x_1` most significant. Integer order on the
//! packed key is graded lexicographic order.

use std::collections::HashMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::coeffs::{mulmod, Fp, Scalar};

pub const MAX_VARS: usize = 30;
const DEG_SHIFT: u32 = 120;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PolyCtx {
    pub nvars: usize,
    pub p: u64,
}

pub type Monomial = u128;

fn var_shift(i: usize) -> u32 {
    (DEG_SHIFT - 4) - 4 * i as u32
}

pub fn degree_of(m: Monomial) -> u32 {
    (m >> DEG_SHIFT) as u32
}

pub fn exponent(m: Monomial, i: usize) -> u32 {
    ((m >> var_shift(i)) & 0xF) as u32
}

pub fn monomial(exps: &[u32]) -> Monomial {
    assert!(exps.len() <= MAX_VARS);
    let mut m: u128 = 0;
    let mut d = 0;
    for (i, &e) in exps.iter().enumerate() {
        assert!(e < 16, "exponent overflow");
        m |= (e as u128) << var_shift(i);
        d += e;
    }
    m | ((d as u128) << DEG_SHIFT)
}

fn unit(i: usize) -> Monomial {
    (1u128 << var_shift(i)) | (1u128 << DEG_SHIFT)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparsePoly {
    pub ctx: PolyCtx,
    /// Sorted by monomial, no zero coefficients.
    terms: Vec<(Monomial, u64)>,
}

impl SparsePoly {
    pub fn zero(ctx: PolyCtx) -> Self {
        SparsePoly { ctx, terms: Vec::new() }
    }

    pub fn constant(ctx: PolyCtx, c: Fp) -> Self {
        let mut p = Self::zero(ctx);
        if c.residue() != 0 {
            p.terms.push((0, c.residue()));
        }
        p
    }

    pub fn var(ctx: PolyCtx, i: usize) -> Self {
        assert!(i < ctx.nvars);
        SparsePoly { ctx, terms: vec![(unit(i), 1)] }
    }

    pub fn from_terms(ctx: PolyCtx, terms: impl IntoIterator<Item = (Monomial, Fp)>) -> Self {
        let mut acc: HashMap<Monomial, u64> = HashMap::new();
        for (m, c) in terms {
            let e = acc.entry(m).or_insert(0);
            *e = (*e + c.residue()) % ctx.p;
        }
        Self::from_map(ctx, acc)
    }

    fn from_map(ctx: PolyCtx, acc: HashMap<Monomial, u64>) -> Self {
        let mut terms: Vec<_> = acc.into_iter().filter(|&(_, c)| c != 0).collect();
        terms.sort_unstable_by_key(|&(m, _)| m);
        SparsePoly { ctx, terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (Monomial, Fp)> + '_ {
        self.terms.iter().map(move |&(m, c)| (m, Fp::from_u64(c, self.ctx.p)))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: Monomial) -> Fp {
        let c = self.terms.binary_search_by_key(&m, |&(k, _)| k).map(|i| self.terms[i].1).unwrap_or(0);
        Fp::from_u64(c, self.ctx.p)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.last().map(|&(m, _)| degree_of(m))
    }

    pub fn is_homogeneous(&self, d: u32) -> bool {
        self.terms.iter().all(|&(m, _)| degree_of(m) == d)
    }

    pub fn eval(&self, x: &[Fp]) -> Fp {
        assert_eq!(x.len(), self.ctx.nvars);
        let p = self.ctx.p;
        let mut acc = 0u64;
        for &(m, c) in &self.terms {
            let mut t = c;
            for (i, xi) in x.iter().enumerate() {
                let e = exponent(m, i);
                if e > 0 {
                    t = mulmod(t, xi.pow(e as u64).residue(), p);
                }
            }
            acc = (acc + t) % p;
        }
        Fp::from_u64(acc, p)
    }

    pub fn derivative(&self, i: usize) -> Self {
        let p = self.ctx.p;
        let mut terms = Vec::new();
        for &(m, c) in &self.terms {
            let e = exponent(m, i) as u64;
            if e == 0 {
                continue;
            }
            let c = mulmod(c, e % p, p);
            if c != 0 {
                terms.push((m - unit(i), c));
            }
        }
        // Subtracting one fixed key from a sorted subsequence keeps it sorted.
        SparsePoly { ctx: self.ctx, terms }
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.ctx.nvars).map(|i| self.derivative(i)).collect()
    }

    fn combine(&self, o: &Self, neg: bool) -> Self {
        assert_eq!(self.ctx, o.ctx);
        let p = self.ctx.p;
        let mut out = Vec::with_capacity(self.terms.len() + o.terms.len());
        let (mut i, mut j) = (0, 0);
        let flip = |c: u64| if neg && c != 0 { p - c } else { c };
        while i < self.terms.len() || j < o.terms.len() {
            if j == o.terms.len() || (i < self.terms.len() && self.terms[i].0 < o.terms[j].0) {
                out.push(self.terms[i]);
                i += 1;
            } else if i == self.terms.len() || o.terms[j].0 < self.terms[i].0 {
                out.push((o.terms[j].0, flip(o.terms[j].1)));
                j += 1;
            } else {
                let c = (self.terms[i].1 + flip(o.terms[j].1)) % p;
                if c != 0 {
                    out.push((self.terms[i].0, c));
                }
                i += 1;
                j += 1;
            }
        }
        SparsePoly { ctx: self.ctx, terms: out }
    }

    fn product(&self, o: &Self) -> Self {
        assert_eq!(self.ctx, o.ctx);
        if self.terms.is_empty() || o.terms.is_empty() {
            return Self::zero(self.ctx);
        }
        let p = self.ctx.p;
        let big = self.total_degree().unwrap() + o.total_degree().unwrap() > 15;
        let mut acc: HashMap<Monomial, u64> = HashMap::with_capacity(self.terms.len() * o.terms.len() / 2 + 1);
        for &(m1, c1) in &self.terms {
            for &(m2, c2) in &o.terms {
                if big {
                    for i in 0..self.ctx.nvars {
                        assert!(exponent(m1, i) + exponent(m2, i) < 16, "exponent overflow");
                    }
                }
                let e = acc.entry(m1 + m2).or_insert(0);
                *e = (*e + mulmod(c1, c2, p)) % p;
            }
        }
        Self::from_map(self.ctx, acc)
    }
}

impl Add for SparsePoly {
    type Output = SparsePoly;
    fn add(self, o: SparsePoly) -> SparsePoly {
        self.combine(&o, false)
    }
}

impl Sub for SparsePoly {
    type Output = SparsePoly;
    fn sub(self, o: SparsePoly) -> SparsePoly {
        self.combine(&o, true)
    }
}

impl Mul for SparsePoly {
    type Output = SparsePoly;
    fn mul(self, o: SparsePoly) -> SparsePoly {
        self.product(&o)
    }
}

impl Neg for SparsePoly {
    type Output = SparsePoly;
    fn neg(self) -> SparsePoly {
        SparsePoly::zero(self.ctx).combine(&self, true)
    }
}

impl Scalar for SparsePoly {
    type Ctx = PolyCtx;

    fn ctx(&self) -> PolyCtx {
        self.ctx
    }

    fn from_i64(ctx: PolyCtx, n: i64) -> Self {
        SparsePoly::constant(ctx, Fp::new(n, ctx.p))
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Monomials of a fixed degree in `n` variables, in grlex order, with
/// multiplication-by-variable tables into the next degree.
pub struct DenseBasis {
    pub nvars: usize,
    pub degree: u32,
    pub monomials: Vec<Monomial>,
    index: HashMap<Monomial, usize>,
}

impl DenseBasis {
    pub fn new(nvars: usize, degree: u32) -> Self {
        let mut monomials = Vec::new();
        let mut exps = vec![0u32; nvars];
        fn rec(i: usize, left: u32, exps: &mut Vec<u32>, out: &mut Vec<Monomial>) {
            if i + 1 == exps.len() {
                exps[i] = left;
                out.push(monomial(exps));
                return;
            }
            for e in 0..=left {
                exps[i] = e;
                rec(i + 1, left - e, exps, out);
            }
            exps[i] = 0;
        }
        rec(0, degree, &mut exps, &mut monomials);
        monomials.sort_unstable();
        let index = monomials.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        DenseBasis { nvars, degree, monomials, index }
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn index_of(&self, m: Monomial) -> Option<usize> {
        self.index.get(&m).copied()
    }

    /// Index in `next` of `monomial[i] * z_v`.
    pub fn shift_table(&self, next: &DenseBasis) -> Vec<Vec<usize>> {
        assert_eq!(next.degree, self.degree + 1);
        self.monomials
            .iter()
            .map(|&m| (0..self.nvars).map(|v| next.index_of(m + unit(v)).expect("monomial in next degree")).collect())
            .collect()
    }
}

pub(crate) fn add_scaled(dst: &mut [u64], src: &[u64], s: u64, p: u64) {
    for (d, &x) in dst.iter_mut().zip(src) {
        *d = (*d + mulmod(x, s, p)) % p;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CTX: PolyCtx = PolyCtx { nvars: 3, p: 313 };

    fn x(i: usize) -> SparsePoly {
        SparsePoly::var(CTX, i)
    }

    #[test]
    fn grlex_order() {
        // x1 > x2 > x3; degree beats lex
        assert!(monomial(&[1, 0, 0]) > monomial(&[0, 1, 0]));
        assert!(monomial(&[0, 0, 2]) > monomial(&[1, 0, 0]));
        assert!(monomial(&[1, 1, 0]) > monomial(&[1, 0, 1]));
    }

    #[test]
    fn arithmetic() {
        let f = x(0) + x(1);
        let g = f.clone() * f.clone();
        assert_eq!(g.coeff(monomial(&[1, 1, 0])), Fp::new(2, 313));
        assert_eq!(g.len(), 3);
        assert!((f.clone() - f.clone()).is_zero());
        assert!((f.clone() + (-f)).is_zero());
        assert_eq!(g.total_degree(), Some(2));
    }

    #[test]
    fn derivative_and_euler() {
        let f = x(0) * x(0) * x(1) + x(2) * x(2) * x(2);
        assert_eq!(f.derivative(0), SparsePoly::from_i64(CTX, 2) * x(0) * x(1));
        let pt = [Fp::new(3, 313), Fp::new(5, 313), Fp::new(7, 313)];
        let euler = f.gradient().iter().zip(&pt).fold(Fp::new(0, 313), |acc, (g, &xi)| acc + g.eval(&pt) * xi);
        assert_eq!(euler, Fp::new(3, 313) * f.eval(&pt));
        assert!(SparsePoly::zero(CTX).gradient().iter().all(|g| g.is_zero()));
    }

    #[test]
    fn dense_basis_sizes() {
        assert_eq!(DenseBasis::new(6, 5).len(), 252);
        assert_eq!(DenseBasis::new(6, 6).len(), 462);
        let b5 = DenseBasis::new(6, 5);
        let b6 = DenseBasis::new(6, 6);
        let t = b5.shift_table(&b6);
        assert_eq!(t.len(), 252);
    }
}
