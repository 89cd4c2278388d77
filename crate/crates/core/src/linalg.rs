//! Dense matrices over exact fields and complex doubles.

use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::coeffs::{Field, Fp, Scalar};

/// Default relative tolerance for numeric rank decisions.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Debug, thiserror::Error, PartialEq, Eq, Clone)]
pub enum LinalgError {
    #[error("matrix is singular")]
    Singular,
    #[error("vector is isotropic")]
    Isotropic,
    #[error("no square root of the normalising scalar in the field")]
    NonResidue,
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<S> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<S>,
}

impl<S> Index<(usize, usize)> for DenseMatrix<S> {
    type Output = S;
    fn index(&self, (r, c): (usize, usize)) -> &S {
        &self.data[r * self.cols + c]
    }
}

impl<S> IndexMut<(usize, usize)> for DenseMatrix<S> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut S {
        &mut self.data[r * self.cols + c]
    }
}

impl<S: Scalar> DenseMatrix<S> {
    pub fn zeros(ctx: S::Ctx, rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![S::zero(ctx); rows * cols] }
    }

    pub fn identity(ctx: S::Ctx, n: usize) -> Self {
        Self::scalar(S::one(ctx), n)
    }

    pub fn scalar(s: S, n: usize) -> Self {
        let mut m = Self::zeros(s.ctx(), n, n);
        for i in 0..n {
            m[(i, i)] = s.clone();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        DenseMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn diagonal(d: &[S]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(d[0].ctx(), n, n);
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    pub fn ctx(&self) -> S::Ctx {
        self.data[0].ctx()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "shape mismatch");
        let ctx = self.ctx();
        let mut out = Self::zeros(ctx, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let t = a.clone() * o[(k, j)].clone();
                    out[(i, j)] = out[(i, j)].clone() + t;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = S::zero(v[0].ctx());
                for (k, x) in v.iter().enumerate() {
                    acc = acc + self[(i, k)].clone() * x.clone();
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| s.clone() * a.clone()).collect() }
    }

    pub fn neg(&self) -> Self {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| -a.clone()).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn column(&self, c: usize) -> Vec<S> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    /// Assemble from a grid of equally sized square blocks.
    pub fn block(blocks: &[Vec<&DenseMatrix<S>>]) -> Self {
        let br = blocks.len();
        let bc = blocks[0].len();
        let h = blocks[0][0].rows;
        let w = blocks[0][0].cols;
        Self::from_fn(br * h, bc * w, |r, c| blocks[r / h][c / w][(r % h, c % w)].clone())
    }

    /// Block-diagonal matrix.
    pub fn block_diag(blocks: &[&DenseMatrix<S>]) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let ctx = blocks[0].ctx();
        let mut m = Self::zeros(ctx, n, n);
        let mut off = 0;
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m[(off + i, off + j)] = b[(i, j)].clone();
                }
            }
            off += b.rows;
        }
        m
    }

    pub fn sub_matrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |r, c| self[(r0 + r, c0 + c)].clone())
    }

    pub fn trace(&self) -> S {
        let mut acc = S::zero(self.ctx());
        for i in 0..self.rows.min(self.cols) {
            acc = acc + self[(i, i)].clone();
        }
        acc
    }
}

impl DenseMatrix<Complex64> {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        DenseMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)])
    }
}

/// Row echelon data from Gaussian elimination with magnitude pivoting.
struct Echelon<S> {
    m: DenseMatrix<S>,
    pivots: Vec<usize>,
}

fn echelon<S: Field>(a: &DenseMatrix<S>, reduce_above: bool, tol: f64) -> Echelon<S> {
    let mut m = a.clone();
    let mut pivots = Vec::new();
    let scale = m.data.iter().fold(0.0f64, |x, y| x.max(y.magnitude()));
    let thresh = tol * scale;
    let mut row = 0;
    for col in 0..m.cols {
        if row == m.rows {
            break;
        }
        let (best, mag) = (row..m.rows)
            .map(|r| (r, m[(r, col)].magnitude()))
            .fold((row, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag <= thresh || mag == 0.0 {
            continue;
        }
        if best != row {
            for c in 0..m.cols {
                m.data.swap(best * m.cols + c, row * m.cols + c);
            }
        }
        let inv = m[(row, col)].inv().expect("nonzero pivot");
        for c in col..m.cols {
            m[(row, c)] = m[(row, c)].clone() * inv.clone();
        }
        let targets: Vec<usize> = if reduce_above { (0..m.rows).filter(|&r| r != row).collect() } else { (row + 1..m.rows).collect() };
        for r in targets {
            let f = m[(r, col)].clone();
            if f.is_zero() {
                continue;
            }
            for c in col..m.cols {
                let t = f.clone() * m[(row, c)].clone();
                m[(r, c)] = m[(r, c)].clone() - t;
            }
        }
        pivots.push(col);
        row += 1;
    }
    Echelon { m, pivots }
}

/// Determinant by elimination; exact over F_p.
pub fn det<S: Field>(a: &DenseMatrix<S>) -> S {
    assert!(a.is_square(), "det of non-square matrix");
    let n = a.rows;
    let ctx = a.ctx();
    let mut m = a.clone();
    let mut acc = S::one(ctx);
    for col in 0..n {
        let (best, mag) = (col..n)
            .map(|r| (r, m[(r, col)].magnitude()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if mag == 0.0 {
            return S::zero(ctx);
        }
        if best != col {
            for c in 0..n {
                m.data.swap(best * n + c, col * n + c);
            }
            acc = -acc;
        }
        let p = m[(col, col)].clone();
        acc = acc * p.clone();
        let inv = p.inv().expect("nonzero pivot");
        for r in col + 1..n {
            let f = m[(r, col)].clone() * inv.clone();
            if f.is_zero() {
                continue;
            }
            for c in col..n {
                let t = f.clone() * m[(col, c)].clone();
                m[(r, c)] = m[(r, c)].clone() - t;
            }
        }
    }
    acc
}

/// Inverse by Gauss–Jordan.
pub fn inverse<S: Field>(a: &DenseMatrix<S>) -> Result<DenseMatrix<S>, LinalgError> {
    assert!(a.is_square());
    let n = a.rows;
    let ctx = a.ctx();
    let id = DenseMatrix::<S>::identity(ctx, n);
    let aug = DenseMatrix::from_fn(n, 2 * n, |r, c| if c < n { a[(r, c)].clone() } else { id[(r, c - n)].clone() });
    let e = echelon(&aug, true, 0.0);
    if e.pivots.len() < n || e.pivots[n - 1] >= n {
        return Err(LinalgError::Singular);
    }
    Ok(e.m.sub_matrix(0, n, n, n))
}

/// Rank and nullspace, exact over F_p and SVD-based over C.
pub trait LinearAlgebra: Field {
    fn rank_tol(m: &DenseMatrix<Self>, tol: f64) -> usize;
    fn nullspace_tol(m: &DenseMatrix<Self>, tol: f64) -> Vec<Vec<Self>>;
}

impl LinearAlgebra for Fp {
    fn rank_tol(m: &DenseMatrix<Self>, _: f64) -> usize {
        echelon(m, false, 0.0).pivots.len()
    }

    fn nullspace_tol(m: &DenseMatrix<Self>, _: f64) -> Vec<Vec<Self>> {
        exact_nullspace(m)
    }
}

fn exact_nullspace<S: Field>(m: &DenseMatrix<S>) -> Vec<Vec<S>> {
    let ctx = m.ctx();
    let e = echelon(m, true, 0.0);
    let free: Vec<usize> = (0..m.cols).filter(|c| !e.pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![S::zero(ctx); m.cols];
            v[f] = S::one(ctx);
            for (r, &pc) in e.pivots.iter().enumerate() {
                v[pc] = -e.m[(r, f)].clone();
            }
            v
        })
        .collect()
}

impl LinearAlgebra for Complex64 {
    fn rank_tol(m: &DenseMatrix<Self>, tol: f64) -> usize {
        numeric_rank(&singular_values(m), tol)
    }

    fn nullspace_tol(m: &DenseMatrix<Self>, tol: f64) -> Vec<Vec<Self>> {
        // Pad to at least as many rows as columns so the thin SVD keeps the
        // whole right singular basis.
        let rows = m.rows.max(m.cols);
        let mut a = DMatrix::<Complex64>::zeros(rows, m.cols);
        for r in 0..m.rows {
            for c in 0..m.cols {
                a[(r, c)] = m[(r, c)];
            }
        }
        let svd = a.svd(false, true);
        let vt = svd.v_t.expect("v_t requested");
        let smax = svd.singular_values.iter().fold(0.0f64, |x, &y| x.max(y));
        (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] <= tol * smax || smax == 0.0)
            .map(|i| (0..m.cols).map(|c| vt[(i, c)].conj()).collect())
            .collect()
    }
}

pub fn rank<S: LinearAlgebra>(m: &DenseMatrix<S>) -> usize {
    S::rank_tol(m, RANK_TOL)
}

pub fn nullspace<S: LinearAlgebra>(m: &DenseMatrix<S>) -> Vec<Vec<S>> {
    S::nullspace_tol(m, RANK_TOL)
}

/// Singular values in decreasing order.
pub fn singular_values(m: &DenseMatrix<Complex64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.to_nalgebra().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Count of singular values above `tol * s_max`.
pub fn numeric_rank(sv: &[f64], tol: f64) -> usize {
    let smax = sv.iter().fold(0.0f64, |x, &y| x.max(y));
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Basis of `{X : X P_j = Q_j X for all j}`.
pub fn solve_intertwiner<S: LinearAlgebra>(pairs: &[(DenseMatrix<S>, DenseMatrix<S>)]) -> Vec<DenseMatrix<S>> {
    let n = pairs[0].0.rows;
    let ctx = pairs[0].0.ctx();
    let mut sys = DenseMatrix::<S>::zeros(ctx, pairs.len() * n * n, n * n);
    for (j, (p, q)) in pairs.iter().enumerate() {
        assert!(p.is_square() && q.is_square() && p.rows == n && q.rows == n);
        for r in 0..n {
            for c in 0..n {
                let eq = j * n * n + r * n + c;
                // (X P)[r][c] = sum_k X[r][k] P[k][c]
                for k in 0..n {
                    let v = sys[(eq, r * n + k)].clone() + p[(k, c)].clone();
                    sys[(eq, r * n + k)] = v;
                    let v = sys[(eq, k * n + c)].clone() - q[(r, k)].clone();
                    sys[(eq, k * n + c)] = v;
                }
            }
        }
    }
    nullspace(&sys).into_iter().map(|v| DenseMatrix { rows: n, cols: n, data: v }).collect()
}

/// Cayley transform `(I - S)(I + S)^{-1}`.
pub fn cayley_orthogonal<S: Field>(s: &DenseMatrix<S>) -> Result<DenseMatrix<S>, LinalgError> {
    let id = DenseMatrix::identity(s.ctx(), s.rows);
    Ok(id.sub(s).mul(&inverse(&id.add(s))?))
}

/// `I - 2 w w^T / <w, w>`.
pub fn householder<S: Field>(w: &[S]) -> Result<DenseMatrix<S>, LinalgError> {
    let ctx = w[0].ctx();
    let q = dot(w, w);
    if q.magnitude() <= 1e-300 || q.is_zero() {
        return Err(LinalgError::Isotropic);
    }
    let f = S::from_i64(ctx, 2) * q.inv().ok_or(LinalgError::Isotropic)?;
    let n = w.len();
    let id = DenseMatrix::<S>::identity(ctx, n);
    Ok(DenseMatrix::from_fn(n, n, |r, c| id[(r, c)].clone() - f.clone() * w[r].clone() * w[c].clone()))
}

pub fn dot<S: Scalar>(x: &[S], y: &[S]) -> S {
    let mut acc = S::zero(x[0].ctx());
    for (a, b) in x.iter().zip(y) {
        acc = acc + a.clone() * b.clone();
    }
    acc
}

/// Rotation (product of two reflections) taking the direction of `u` to the
/// direction of `v`.
pub fn reflection_pair<S: Field>(u: &[S], v: &[S]) -> Result<DenseMatrix<S>, LinalgError> {
    let qu = dot(u, u);
    let qv = dot(v, v);
    if qu.is_zero() || qv.is_zero() || qu.magnitude() < 1e-200 || qv.magnitude() < 1e-200 {
        return Err(LinalgError::Isotropic);
    }
    let k = (qu.clone() * qv.inv().ok_or(LinalgError::Isotropic)?).sqrt().ok_or(LinalgError::NonResidue)?;
    let vp: Vec<S> = v.iter().map(|x| k.clone() * x.clone()).collect();
    let vm: Vec<S> = vp.iter().map(|x| -x.clone()).collect();
    let plus = qu.clone() + dot(u, &vp);
    let minus = qu.clone() + dot(u, &vm);
    let vp = if minus.magnitude() > plus.magnitude() { vm } else { vp };
    let w: Vec<S> = u.iter().zip(&vp).map(|(a, b)| a.clone() + b.clone()).collect();
    Ok(householder(&vp)?.mul(&householder(&w)?))
}

/// Orthogonality defect `max |Q^T Q - I|` for complex matrices.
pub fn orthogonality_defect(q: &DenseMatrix<Complex64>) -> f64 {
    q.transpose().mul(q).sub(&DenseMatrix::identity((), q.rows)).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::MERSENNE_31;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const P: u64 = MERSENNE_31;

    fn rand_fp(n: usize, m: usize, rng: &mut ChaCha8Rng) -> DenseMatrix<Fp> {
        DenseMatrix::from_fn(n, m, |_, _| Fp::random(P, rng))
    }

    fn rand_c(n: usize, m: usize, rng: &mut ChaCha8Rng) -> DenseMatrix<Complex64> {
        DenseMatrix::from_fn(n, m, |_, _| Complex64::random((), rng))
    }

    #[test]
    fn det_basics() {
        assert_eq!(det(&DenseMatrix::<Fp>::identity(P, 24)), Fp::one(P));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = rand_fp(24, 24, &mut rng);
        let d = det(&m);
        assert_eq!(det(&m.transpose().mul(&m)), d * d);
        let n = rand_fp(24, 24, &mut rng);
        assert_eq!(det(&m.mul(&n)), d * det(&n));
    }

    #[test]
    fn rank_basics() {
        assert_eq!(rank(&DenseMatrix::<Fp>::zeros(P, 5, 7)), 0);
        assert_eq!(rank(&DenseMatrix::<Fp>::identity(P, 24)), 24);
        assert_eq!(rank(&DenseMatrix::<Complex64>::identity((), 24)), 24);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = rand_fp(6, 3, &mut rng);
        let b = rand_fp(3, 9, &mut rng);
        let ab = a.mul(&b);
        assert_eq!(rank(&ab), 3);
        let ns = nullspace(&ab);
        assert_eq!(ns.len(), 6);
        for v in ns {
            assert!(ab.mul_vec(&v).iter().all(|x| x.is_zero()));
        }
    }

    #[test]
    fn numeric_nullspace() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = rand_c(6, 3, &mut rng).mul(&rand_c(3, 9, &mut rng));
        assert_eq!(rank(&a), 3);
        let ns = nullspace(&a);
        assert_eq!(ns.len(), 6);
        for v in ns {
            let r: f64 = a.mul_vec(&v).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(r < 1e-10 * a.frobenius());
        }
    }

    #[test]
    fn intertwiner_trivia() {
        let id = DenseMatrix::<Fp>::identity(P, 3);
        assert_eq!(solve_intertwiner(&[(id.clone(), id)]).len(), 9);
    }

    #[test]
    fn cayley_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let zero = DenseMatrix::<Fp>::zeros(P, 8, 8);
        assert_eq!(cayley_orthogonal(&zero).unwrap(), DenseMatrix::identity(P, 8));
        let x = rand_fp(8, 8, &mut rng);
        let mut s = x.sub(&x.transpose());
        for j in 0..8 {
            s[(0, j)] = Fp::zero(P);
            s[(j, 0)] = Fp::zero(P);
        }
        let q = cayley_orthogonal(&s).unwrap();
        assert_eq!(q.transpose().mul(&q), DenseMatrix::identity(P, 8));
        assert_eq!(q.column(0), DenseMatrix::<Fp>::identity(P, 8).column(0));
        assert_eq!(det(&q), Fp::one(P));

        let x = rand_c(8, 8, &mut rng);
        let mut s = x.sub(&x.transpose());
        for j in 0..8 {
            s[(0, j)] = Complex64::new(0.0, 0.0);
            s[(j, 0)] = Complex64::new(0.0, 0.0);
        }
        let q = cayley_orthogonal(&s).unwrap();
        assert!(orthogonality_defect(&q) < 1e-12);
        assert!((q[(0, 0)] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn reflection_pair_steers() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u: Vec<Complex64> = (0..8).map(|_| Complex64::random((), &mut rng)).collect();
        let r = reflection_pair(&u, &u).unwrap();
        assert!(r.sub(&DenseMatrix::identity((), 8)).max_abs() < 1e-12);
        let mut u = u;
        u[0] = Complex64::new(0.0, 0.0);
        let mut v = vec![Complex64::new(0.0, 0.0); 8];
        v[1] = Complex64::new(1.0, 0.0);
        let r = reflection_pair(&u, &v).unwrap();
        let ru = r.mul_vec(&u);
        assert!(ru.iter().enumerate().all(|(i, z)| i == 1 || z.norm() < 1e-12));
        assert!(orthogonality_defect(&r) < 1e-12);
        assert!((det(&r) - 1.0).norm() < 1e-12);
        assert!((r[(0, 0)] - 1.0).norm() < 1e-12);
    }

    #[test]
    fn inverse_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = rand_fp(10, 10, &mut rng);
        assert_eq!(m.mul(&inverse(&m).unwrap()), DenseMatrix::identity(P, 10));
        assert_eq!(inverse(&DenseMatrix::<Fp>::zeros(P, 3, 3)), Err(LinalgError::Singular));
    }
}
