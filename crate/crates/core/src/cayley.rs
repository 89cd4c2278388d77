//! Cayley–Dickson algebras of dimension 1, 2, 4, 8.
//!
//! The doubling rule is `(a, b)(c, d) = (ac - conj(d) b, d a + b conj(c))`.
//! Basis vectors are ordered with `e_{h+i} = (0, e_i)`.

use std::sync::OnceLock;

use rand::Rng;

use crate::coeffs::{Field, Scalar};
use crate::linalg::DenseMatrix;

/// `e_i * e_j = SIGN * e_k`, stored as `(sign, k)`.
type Table = [[(i8, u8); 8]; 8];

fn basis_product(i: usize, j: usize, n: usize) -> (i8, usize) {
    if n == 1 {
        return (1, 0);
    }
    let h = n / 2;
    let conj_sign = |k: usize| if k == 0 { 1 } else { -1 };
    match (i < h, j < h) {
        (true, true) => basis_product(i, j, h),
        // (a,0)(0,d) = (0, d a)
        (true, false) => {
            let (s, k) = basis_product(j - h, i, h);
            (s, k + h)
        }
        // (0,b)(c,0) = (0, b conj(c))
        (false, true) => {
            let (s, k) = basis_product(i - h, j, h);
            (s * conj_sign(j), k + h)
        }
        // (0,b)(0,d) = (-conj(d) b, 0)
        (false, false) => {
            let (s, k) = basis_product(j - h, i - h, h);
            (-s * conj_sign(j - h), k)
        }
    }
}

fn table() -> &'static Table {
    static T: OnceLock<Table> = OnceLock::new();
    T.get_or_init(|| {
        let mut t = [[(0i8, 0u8); 8]; 8];
        for (i, row) in t.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let (s, k) = basis_product(i, j, 8);
                *cell = (s, k as u8);
            }
        }
        t
    })
}

/// Product of basis vectors: `e_i e_j = sign * e_k` (0-based indices).
pub fn basis_mul(i: usize, j: usize) -> (i8, usize) {
    let (s, k) = table()[i][j];
    (s, k as usize)
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CayleyError {
    #[error("level mismatch: {0} vs {1}")]
    LevelMismatch(usize, usize),
    #[error("operation requires level 3, got level {0}")]
    NotOctonion(usize),
}

/// Element of the Cayley–Dickson algebra of dimension `2^level`.
#[derive(Clone, Debug, PartialEq)]
pub struct Elem<S> {
    pub coords: Vec<S>,
}

impl<S: Scalar> Elem<S> {
    pub fn new(coords: Vec<S>) -> Self {
        assert!(matches!(coords.len(), 1 | 2 | 4 | 8), "dimension must be 1, 2, 4 or 8");
        Elem { coords }
    }

    pub fn zero(ctx: S::Ctx, level: usize) -> Self {
        Elem { coords: vec![S::zero(ctx); 1 << level] }
    }

    pub fn one(ctx: S::Ctx, level: usize) -> Self {
        Self::basis(ctx, level, 0)
    }

    /// `e_{i+1}` in 1-based naming.
    pub fn basis(ctx: S::Ctx, level: usize, i: usize) -> Self {
        let mut e = Self::zero(ctx, level);
        e.coords[i] = S::one(ctx);
        e
    }

    pub fn scalar(s: S, level: usize) -> Self {
        let mut e = Self::zero(s.ctx(), level);
        e.coords[0] = s;
        e
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn level(&self) -> usize {
        self.coords.len().trailing_zeros() as usize
    }

    pub fn ctx(&self) -> S::Ctx {
        self.coords[0].ctx()
    }

    pub fn try_mul(&self, y: &Self) -> Result<Self, CayleyError> {
        if self.dim() != y.dim() {
            return Err(CayleyError::LevelMismatch(self.level(), y.level()));
        }
        Ok(self.mul(y))
    }

    /// Bilinear product; panics on a level mismatch (see [`Elem::try_mul`]).
    pub fn mul(&self, y: &Self) -> Self {
        assert_eq!(self.dim(), y.dim(), "level mismatch");
        let n = self.dim();
        let mut out = Self::zero(self.ctx(), self.level());
        for i in 0..n {
            if self.coords[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if y.coords[j].is_zero() {
                    continue;
                }
                let (s, k) = basis_mul(i, j);
                let t = self.coords[i].clone() * y.coords[j].clone();
                out.coords[k] = if s > 0 { out.coords[k].clone() + t } else { out.coords[k].clone() - t };
            }
        }
        out
    }

    pub fn add(&self, y: &Self) -> Self {
        Elem { coords: self.coords.iter().zip(&y.coords).map(|(a, b)| a.clone() + b.clone()).collect() }
    }

    pub fn sub(&self, y: &Self) -> Self {
        Elem { coords: self.coords.iter().zip(&y.coords).map(|(a, b)| a.clone() - b.clone()).collect() }
    }

    pub fn neg(&self) -> Self {
        Elem { coords: self.coords.iter().map(|a| -a.clone()).collect() }
    }

    pub fn scale(&self, s: &S) -> Self {
        Elem { coords: self.coords.iter().map(|a| s.clone() * a.clone()).collect() }
    }

    pub fn conj(&self) -> Self {
        let mut c: Vec<S> = self.coords.iter().map(|a| -a.clone()).collect();
        c[0] = self.coords[0].clone();
        Elem { coords: c }
    }

    pub fn re(&self) -> S {
        self.coords[0].clone()
    }

    pub fn im(&self) -> Self {
        let mut c = self.coords.clone();
        c[0] = S::zero(self.ctx());
        Elem { coords: c }
    }

    /// Sum of squared coordinates, equal to `x conj(x)`.
    pub fn norm_sq(&self) -> S {
        self.dot(self)
    }

    /// The bilinear form polarising `norm_sq`.
    pub fn dot(&self, y: &Self) -> S {
        let mut acc = S::zero(self.ctx());
        for (a, b) in self.coords.iter().zip(&y.coords) {
            acc = acc + a.clone() * b.clone();
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// Matrix of `y -> x y`; column `j` holds the coordinates of `x e_j`.
    pub fn left_matrix(&self) -> DenseMatrix<S> {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(self.ctx(), n, n);
        for i in 0..n {
            for j in 0..n {
                let (s, k) = basis_mul(i, j);
                let v = self.coords[i].clone();
                m[(k, j)] = if s > 0 { v } else { -v };
            }
        }
        m
    }

    /// Matrix of `y -> y x`; column `j` holds the coordinates of `e_j x`.
    pub fn right_matrix(&self) -> DenseMatrix<S> {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(self.ctx(), n, n);
        for i in 0..n {
            for j in 0..n {
                let (s, k) = basis_mul(j, i);
                let v = self.coords[i].clone();
                m[(k, j)] = if s > 0 { v } else { -v };
            }
        }
        m
    }

    pub fn from_column(m: &DenseMatrix<S>, col: usize) -> Self {
        Elem::new((0..m.rows).map(|r| m[(r, col)].clone()).collect())
    }

    /// Apply a linear map given as a matrix to the coordinate vector.
    pub fn transform(&self, m: &DenseMatrix<S>) -> Self {
        Elem::new(m.mul_vec(&self.coords))
    }
}

impl<S: Field> Elem<S> {
    pub fn random<R: Rng + ?Sized>(ctx: S::Ctx, level: usize, rng: &mut R) -> Self {
        Elem { coords: (0..1usize << level).map(|_| S::random(ctx, rng)).collect() }
    }
}

/// `[c, b, a] = (cb)a - c(ba)`.
pub fn associator<S: Scalar>(c: &Elem<S>, b: &Elem<S>, a: &Elem<S>) -> Elem<S> {
    c.mul(b).mul(a).sub(&c.mul(&b.mul(a)))
}

/// `2 phi(c, b, a) = Re((c conj(b) - conj(b) c) a)`.
///
/// The doubled value keeps the formula free of division, so it also runs
/// over polynomial rings.
pub fn twice_phi<S: Scalar>(c: &Elem<S>, b: &Elem<S>, a: &Elem<S>) -> S {
    let bb = b.conj();
    real_part_of_product(&c.mul(&bb).sub(&bb.mul(c)), a)
}

/// `phi(c, b, a)`; needs 2 to be invertible.
pub fn phi<S: Field>(c: &Elem<S>, b: &Elem<S>, a: &Elem<S>) -> S {
    let half = S::from_i64(c.ctx(), 2).inv().expect("characteristic 2");
    half * twice_phi(c, b, a)
}

/// Gram determinant of `(Im c, Im b, Im a)`.
pub fn gram_im<S: Scalar>(c: &Elem<S>, b: &Elem<S>, a: &Elem<S>) -> S {
    let v = [c.im(), b.im(), a.im()];
    let g: Vec<Vec<S>> = v.iter().map(|x| v.iter().map(|y| x.dot(y)).collect()).collect();
    det3(&g)
}

pub(crate) fn det3<S: Scalar>(g: &[Vec<S>]) -> S {
    let t = |i: usize, j: usize| g[i][j].clone();
    t(0, 0) * (t(1, 1) * t(2, 2) - t(1, 2) * t(2, 1)) - t(0, 1) * (t(1, 0) * t(2, 2) - t(1, 2) * t(2, 0))
        + t(0, 2) * (t(1, 0) * t(2, 1) - t(1, 1) * t(2, 0))
}

/// `Re(x y)` without forming the full product.
pub fn real_part_of_product<S: Scalar>(x: &Elem<S>, y: &Elem<S>) -> S {
    // Re(e_i e_j) is +1 for i = j = 0, -1 for i = j > 0, else 0.
    let mut acc = x.coords[0].clone() * y.coords[0].clone();
    for i in 1..x.dim() {
        acc = acc - x.coords[i].clone() * y.coords[i].clone();
    }
    acc
}

/// `x = x0 + x1 * l` with `l = e_5` and `x0, x1` in the quaternions.
#[derive(Clone, Debug, PartialEq)]
pub struct QuaternionSplitting<S> {
    pub x0: Elem<S>,
    pub x1: Elem<S>,
}

/// Quaternion splitting of an octonion.
///
/// In this basis `q * e_5 = (0, q)`, so the second half of the coordinates is
/// already `x1`.
pub fn split<S: Scalar>(x: &Elem<S>) -> Result<QuaternionSplitting<S>, CayleyError> {
    if x.dim() != 8 {
        return Err(CayleyError::NotOctonion(x.level()));
    }
    Ok(QuaternionSplitting { x0: Elem::new(x.coords[..4].to_vec()), x1: Elem::new(x.coords[4..].to_vec()) })
}

pub fn recompose<S: Scalar>(s: &QuaternionSplitting<S>) -> Elem<S> {
    let ctx = s.x0.ctx();
    let embed = |q: &Elem<S>| {
        let mut c = q.coords.clone();
        c.extend((0..4).map(|_| S::zero(ctx)));
        Elem::new(c)
    };
    let l = Elem::basis(ctx, 3, 4);
    embed(&s.x0).add(&embed(&s.x1).mul(&l))
}
