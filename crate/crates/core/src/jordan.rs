//! Hermitian 3x3 matrices over a composition algebra and their invariants.
//!
//! A triple stands for
//!
//! ```text
//! [ l1       c        conj(b) ]
//! [ conj(c)  l2       a       ]
//! [ b        conj(a)  l3      ]
//! ```

use rand::Rng;

use crate::cayley::{associator, real_part_of_product, twice_phi, Elem};
use crate::coeffs::{Field, Scalar};
use crate::linalg::DenseMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianTriple<S> {
    pub lambda: [S; 3],
    pub a: Elem<S>,
    pub b: Elem<S>,
    pub c: Elem<S>,
}

/// 3x3 matrix with algebra entries, row-major.
pub type AlgebraMatrix<S> = [[Elem<S>; 3]; 3];

impl<S: Scalar> HermitianTriple<S> {
    pub fn new(lambda: [S; 3], a: Elem<S>, b: Elem<S>, c: Elem<S>) -> Self {
        assert!(a.dim() == b.dim() && b.dim() == c.dim(), "entries must share a level");
        HermitianTriple { lambda, a, b, c }
    }

    pub fn identity(ctx: S::Ctx, level: usize) -> Self {
        Self::diagonal([S::one(ctx), S::one(ctx), S::one(ctx)], level)
    }

    pub fn diagonal(lambda: [S; 3], level: usize) -> Self {
        let ctx = lambda[0].ctx();
        HermitianTriple { lambda, a: Elem::zero(ctx, level), b: Elem::zero(ctx, level), c: Elem::zero(ctx, level) }
    }

    pub fn level(&self) -> usize {
        self.a.level()
    }

    pub fn ctx(&self) -> S::Ctx {
        self.lambda[0].ctx()
    }

    /// Coordinates in the order `c, b, a, l1, l2, l3`.
    pub fn flatten(&self) -> Vec<S> {
        let mut v = Vec::with_capacity(3 * self.a.dim() + 3);
        v.extend(self.c.coords.iter().cloned());
        v.extend(self.b.coords.iter().cloned());
        v.extend(self.a.coords.iter().cloned());
        v.extend(self.lambda.iter().cloned());
        v
    }

    pub fn unflatten(v: &[S]) -> Option<Self> {
        let n = v.len().checked_sub(3)? / 3;
        if !matches!(n, 1 | 2 | 4 | 8) || v.len() != 3 * n + 3 {
            return None;
        }
        Some(HermitianTriple {
            c: Elem::new(v[..n].to_vec()),
            b: Elem::new(v[n..2 * n].to_vec()),
            a: Elem::new(v[2 * n..3 * n].to_vec()),
            lambda: [v[3 * n].clone(), v[3 * n + 1].clone(), v[3 * n + 2].clone()],
        })
    }

    pub fn scale(&self, t: &S) -> Self {
        HermitianTriple {
            lambda: self.lambda.clone().map(|l| t.clone() * l),
            a: self.a.scale(t),
            b: self.b.scale(t),
            c: self.c.scale(t),
        }
    }

    pub fn to_matrix(&self) -> AlgebraMatrix<S> {
        let lv = self.level();
        let d = |s: &S| Elem::scalar(s.clone(), lv);
        [
            [d(&self.lambda[0]), self.c.clone(), self.b.conj()],
            [self.c.conj(), d(&self.lambda[1]), self.a.clone()],
            [self.b.clone(), self.a.conj(), d(&self.lambda[2])],
        ]
    }

    /// Read back the hermitian triple from a 3x3 algebra matrix (no check).
    pub fn from_matrix(m: &AlgebraMatrix<S>) -> Self {
        HermitianTriple {
            lambda: [m[0][0].re(), m[1][1].re(), m[2][2].re()],
            c: m[0][1].clone(),
            a: m[1][2].clone(),
            b: m[2][0].clone(),
        }
    }
}

impl<S: Field> HermitianTriple<S> {
    pub fn random<R: Rng + ?Sized>(ctx: S::Ctx, level: usize, rng: &mut R) -> Self {
        HermitianTriple {
            lambda: [S::random(ctx, rng), S::random(ctx, rng), S::random(ctx, rng)],
            a: Elem::random(ctx, level, rng),
            b: Elem::random(ctx, level, rng),
            c: Elem::random(ctx, level, rng),
        }
    }
}

pub fn matrix_product<S: Scalar>(x: &AlgebraMatrix<S>, y: &AlgebraMatrix<S>) -> AlgebraMatrix<S> {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut acc = x[i][0].mul(&y[0][j]);
            for k in 1..3 {
                acc = acc.add(&x[i][k].mul(&y[k][j]));
            }
            acc
        })
    })
}

/// Cartan cubic `l1 l2 l3 + 2 Re(c(ab)) - l2|b|^2 - l1|a|^2 - l3|c|^2`.
pub fn det_cartan<S: Scalar>(m: &HermitianTriple<S>) -> S {
    let [l1, l2, l3] = m.lambda.clone();
    let two = S::from_i64(m.ctx(), 2);
    l1.clone() * l2.clone() * l3.clone() + two * real_part_of_product(&m.c, &m.a.mul(&m.b))
        - l2 * m.b.norm_sq()
        - l1 * m.a.norm_sq()
        - l3 * m.c.norm_sq()
}

/// Adjugate-like `Com(A)`.
pub fn com<S: Scalar>(m: &HermitianTriple<S>) -> HermitianTriple<S> {
    let [l1, l2, l3] = m.lambda.clone();
    let (a, b, c) = (&m.a, &m.b, &m.c);
    HermitianTriple {
        lambda: [
            l2.clone() * l3.clone() - a.norm_sq(),
            l1.clone() * l3.clone() - b.norm_sq(),
            l1.clone() * l2.clone() - c.norm_sq(),
        ],
        c: b.conj().mul(&a.conj()).sub(&c.scale(&l3)),
        a: c.conj().mul(&b.conj()).sub(&a.scale(&l1)),
        b: a.conj().mul(&c.conj()).sub(&b.scale(&l2)),
    }
}

/// `Com(A) A - Det(A) I` and `A Com(A) - Det(A) I`, entrywise.
pub fn com_defect<S: Scalar>(m: &HermitianTriple<S>) -> (AlgebraMatrix<S>, AlgebraMatrix<S>) {
    let d = det_cartan(m);
    let lv = m.level();
    let cm = com(m).to_matrix();
    let am = m.to_matrix();
    let shift = |x: AlgebraMatrix<S>| {
        let mut x = x;
        for (i, row) in x.iter_mut().enumerate() {
            row[i] = row[i].sub(&Elem::scalar(d.clone(), lv));
        }
        x
    };
    (shift(matrix_product(&cm, &am)), shift(matrix_product(&am, &cm)))
}

/// `Det^2 - 4 phi Det - |[c,b,a]|^2`.
pub fn s_odm<S: Scalar>(m: &HermitianTriple<S>) -> S {
    let d = det_cartan(m);
    let two = S::from_i64(m.ctx(), 2);
    let p2 = twice_phi(&m.c, &m.b, &m.a);
    d.clone() * d.clone() - two * p2 * d - associator(&m.c, &m.b, &m.a).norm_sq()
}

/// `Det - 2 Re(c(ab)) + 2 Re(conj(c)(ba))`.
pub fn twisted_cubic<S: Scalar>(m: &HermitianTriple<S>) -> S {
    let two = S::from_i64(m.ctx(), 2);
    det_cartan(m) - two.clone() * real_part_of_product(&m.c, &m.a.mul(&m.b))
        + two * real_part_of_product(&m.c.conj(), &m.b.mul(&m.a))
}

/// The sextic factor of the twisted degeneracy locus.
pub fn twisted_sextic<S: Scalar>(m: &HermitianTriple<S>) -> S {
    let [l1, l2, l3] = m.lambda.clone();
    let ctx = m.ctx();
    let four = S::from_i64(ctx, 4);
    let (na, nb, nc) = (m.a.norm_sq(), m.b.norm_sq(), m.c.norm_sq());
    let q = l1.clone() * na.clone() + l2.clone() * nb.clone() + l3.clone() * nc.clone() - l1 * l2 * l3;
    let rc = m.c.re();
    let rab = real_part_of_product(&m.a, &m.b);
    let k = nb.clone() * na.clone() * rc.clone() * rc.clone() + nc.clone() * rab.clone() * rab.clone() - na * nb * nc;
    q.clone() * q.clone() - four.clone() * q * rc * rab + four * k
}

/// `[[l1 I, L_c, L_b^T], [L_c^T, l2 I, L_a], [L_b, L_a^T, l3 I]]`.
pub fn build_m<S: Scalar>(m: &HermitianTriple<S>) -> DenseMatrix<S> {
    assemble(m, m.c.left_matrix())
}

/// As [`build_m`] with `R_c` in the (1,2) block.
pub fn build_n<S: Scalar>(m: &HermitianTriple<S>) -> DenseMatrix<S> {
    assemble(m, m.c.right_matrix())
}

fn assemble<S: Scalar>(m: &HermitianTriple<S>, xc: DenseMatrix<S>) -> DenseMatrix<S> {
    let n = m.a.dim();
    let d: Vec<DenseMatrix<S>> = m.lambda.iter().map(|l| DenseMatrix::scalar(l.clone(), n)).collect();
    let la = m.a.left_matrix();
    let lb = m.b.left_matrix();
    let (lat, lbt, xct) = (la.transpose(), lb.transpose(), xc.transpose());
    DenseMatrix::block(&[vec![&d[0], &xc, &lbt], vec![&xct, &d[1], &la], vec![&lb, &lat, &d[2]]])
}
