//! Triality pairs, the Spin(7) copy acting on J3(O), and the SL3 and SO7
//! actions.

use num_complex::Complex64;
use rand::Rng;

use crate::cayley::Elem;
use crate::coeffs::{Field, Scalar};
use crate::jordan::{AlgebraMatrix, HermitianTriple};
use crate::linalg::{cayley_orthogonal, det, solve_intertwiner, DenseMatrix, LinalgError, LinearAlgebra};

#[derive(Debug, thiserror::Error, PartialEq, Eq, Clone)]
pub enum LiftError {
    #[error("intertwiner space has dimension {0}, expected 1")]
    Dimension(usize),
    #[error("normalising scalar is not a square; retry with another element")]
    NonResidue,
    #[error("normalising scalar vanishes")]
    Isotropic,
    #[error("no liftable element found after {0} attempts")]
    Exhausted(usize),
}

/// `(T1, T2)` with `T1(x) T2(y) = T1(xy)`; acts as `(T1, T2, T1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialityTriple<S> {
    pub t1: DenseMatrix<S>,
    pub t2: DenseMatrix<S>,
}

/// Congruence `A -> H^T A H`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sl3Move<S> {
    pub h: DenseMatrix<S>,
    pub det: S,
}

impl<S: Field> Sl3Move<S> {
    pub fn new(h: DenseMatrix<S>) -> Self {
        let d = det(&h);
        Sl3Move { h, det: d }
    }
}

fn basis_images<S: Scalar>(t: &DenseMatrix<S>) -> Vec<Elem<S>> {
    (0..t.cols).map(|j| Elem::from_column(t, j)).collect()
}

/// `T1(e_i) T2(e_j) - T1(e_i e_j)` over all 64 basis pairs.
pub fn triality_defects<S: Scalar>(t1: &DenseMatrix<S>, t2: &DenseMatrix<S>) -> Vec<Elem<S>> {
    let ctx = t1.ctx();
    let x1 = basis_images(t1);
    let x2 = basis_images(t2);
    let mut out = Vec::with_capacity(64);
    for (i, xi) in x1.iter().enumerate() {
        for (j, xj) in x2.iter().enumerate() {
            let prod = Elem::basis(ctx, 3, i).mul(&Elem::basis(ctx, 3, j));
            out.push(xi.mul(xj).sub(&prod.transform(t1)));
        }
    }
    out
}

impl<S: Scalar> TrialityTriple<S> {
    pub fn identity(ctx: S::Ctx) -> Self {
        TrialityTriple { t1: DenseMatrix::identity(ctx, 8), t2: DenseMatrix::identity(ctx, 8) }
    }

    /// Exact check of the 64 defining equations.
    pub fn is_exact(&self) -> bool {
        triality_defects(&self.t1, &self.t2).iter().all(|d| d.is_zero())
    }

    pub fn negate_t1(&self) -> Self {
        TrialityTriple { t1: self.t1.neg(), t2: self.t2.clone() }
    }
}

impl TrialityTriple<Complex64> {
    /// Largest coordinate of any of the 64 defining defects.
    pub fn defect(&self) -> f64 {
        triality_defects(&self.t1, &self.t2)
            .iter()
            .flat_map(|d| d.coords.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }
}

fn normalise<S: Field>(x: DenseMatrix<S>) -> Result<DenseMatrix<S>, LiftError> {
    let s = x.transpose().mul(&x)[(0, 0)].clone();
    if s.is_zero() || s.magnitude() < 1e-300 {
        return Err(LiftError::Isotropic);
    }
    let r = s.sqrt().ok_or(LiftError::NonResidue)?;
    let mut t = x.scale(&r.inv().ok_or(LiftError::Isotropic)?);
    let scale = t.data.iter().fold(0.0f64, |m, v| m.max(v.magnitude()));
    if let Some(first) = t.data.iter().find(|v| v.magnitude() > 1e-6 * scale) {
        if !first.is_canonical_sign() {
            t = t.neg();
        }
    }
    Ok(t)
}

fn one_dim<S: LinearAlgebra>(pairs: Vec<(DenseMatrix<S>, DenseMatrix<S>)>) -> Result<DenseMatrix<S>, LiftError> {
    let mut sols = solve_intertwiner(&pairs);
    if sols.len() != 1 {
        return Err(LiftError::Dimension(sols.len()));
    }
    normalise(sols.pop().unwrap())
}

/// Given `T2` fixing `e1`, solve `T1 R_y = R_{T2 y} T1` for `T1`.
pub fn lift_right_companion<S: LinearAlgebra>(t2: &DenseMatrix<S>) -> Result<TrialityTriple<S>, LiftError> {
    let ctx = t2.ctx();
    let pairs = (0..8)
        .map(|j| {
            let e = Elem::basis(ctx, 3, j);
            (e.right_matrix(), e.transform(t2).right_matrix())
        })
        .collect();
    Ok(TrialityTriple { t1: one_dim(pairs)?, t2: t2.clone() })
}

/// Given `T1` fixing `e1`, solve `T2 L_u = L_{T1 u} T2` for `T2`.
pub fn lift_left_companion<S: LinearAlgebra>(t1: &DenseMatrix<S>) -> Result<DenseMatrix<S>, LiftError> {
    let ctx = t1.ctx();
    let pairs = (0..8)
        .map(|j| {
            let e = Elem::basis(ctx, 3, j);
            (e.left_matrix(), e.transform(t1).left_matrix())
        })
        .collect();
    one_dim(pairs)
}

/// `T2(u v) - T1(u) T2(v)` over all basis pairs.
pub fn left_companion_defects<S: Scalar>(t1: &DenseMatrix<S>, t2: &DenseMatrix<S>) -> Vec<Elem<S>> {
    let ctx = t1.ctx();
    let x1 = basis_images(t1);
    let x2 = basis_images(t2);
    let mut out = Vec::with_capacity(64);
    for (i, xi) in x1.iter().enumerate() {
        for (j, xj) in x2.iter().enumerate() {
            let prod = Elem::basis(ctx, 3, i).mul(&Elem::basis(ctx, 3, j));
            out.push(prod.transform(t2).sub(&xi.mul(xj)));
        }
    }
    out
}

/// `T1 = L_u T2` where `u` spans the kernel of the stacked
/// `R_{T2(e_i e_j)} - R_{T2 e_j} R_{T2 e_i}`. Sign follows `reference`.
///
/// Cheaper than [`lift_right_companion`]: an 512x8 kernel instead of 512x64.
pub fn lift_right_fast(
    t2: &DenseMatrix<Complex64>,
    reference: Option<&DenseMatrix<Complex64>>,
) -> Result<DenseMatrix<Complex64>, LiftError> {
    let imgs = basis_images(t2);
    let mut sys = DenseMatrix::zeros((), 512, 8);
    for i in 0..8 {
        for j in 0..8 {
            let (s, k) = crate::cayley::basis_mul(i, j);
            let xy = imgs[k].scale(&Complex64::new(s as f64, 0.0));
            let blk = xy.right_matrix().sub(&imgs[j].right_matrix().mul(&imgs[i].right_matrix()));
            for r in 0..8 {
                for c in 0..8 {
                    sys[((i * 8 + j) * 8 + r, c)] = blk[(r, c)];
                }
            }
        }
    }
    let svd = sys.to_nalgebra().svd(false, true);
    let vt = svd.v_t.expect("v_t");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc });
    let u = Elem::new((0..8).map(|c| vt[(imin, c)].conj()).collect());
    let q = u.norm_sq();
    if q.norm() < 1e-300 {
        return Err(LiftError::Isotropic);
    }
    let u = u.scale(&(Complex64::new(1.0, 0.0) / q.sqrt()));
    let mut t1 = u.left_matrix().mul(t2);
    if let Some(r) = reference {
        let overlap: Complex64 = t1.data.iter().zip(&r.data).map(|(a, b)| a * b.conj()).sum();
        if overlap.re < 0.0 {
            t1 = t1.neg();
        }
    }
    Ok(t1)
}

/// `K_T = C T C` with `C = diag(1, -1, ..., -1)`, i.e. `x -> conj(T(conj x))`.
pub fn kappa<S: Scalar>(t: &DenseMatrix<S>) -> DenseMatrix<S> {
    DenseMatrix::from_fn(t.rows, t.cols, |r, c| {
        let v = t[(r, c)].clone();
        if (r == 0) == (c == 0) {
            v
        } else {
            -v
        }
    })
}

/// `c <- T2 c`, `a <- T1 a`, `b <- K_{T1} b`.
pub fn spin7_act<S: Scalar>(t: &TrialityTriple<S>, m: &HermitianTriple<S>) -> HermitianTriple<S> {
    HermitianTriple {
        lambda: m.lambda.clone(),
        a: m.a.transform(&t.t1),
        b: m.b.transform(&kappa(&t.t1)),
        c: m.c.transform(&t.t2),
    }
}

/// `T1` applied entrywise to `a, b, c`.
pub fn so7_act<S: Scalar>(t1: &DenseMatrix<S>, m: &HermitianTriple<S>) -> HermitianTriple<S> {
    HermitianTriple { lambda: m.lambda.clone(), a: m.a.transform(t1), b: m.b.transform(t1), c: m.c.transform(t1) }
}

/// The hermitian triple of `H^T A H`.
pub fn sl3_act<S: Scalar>(h: &DenseMatrix<S>, m: &HermitianTriple<S>) -> HermitianTriple<S> {
    let z = m.to_matrix();
    let lv = m.level();
    let ctx = m.ctx();
    let w: AlgebraMatrix<S> = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut acc = Elem::zero(ctx, lv);
            for k in 0..3 {
                for l in 0..3 {
                    let s = h[(k, i)].clone() * h[(l, j)].clone();
                    if !s.is_zero() {
                        acc = acc.add(&z[k][l].scale(&s));
                    }
                }
            }
            acc
        })
    });
    HermitianTriple::from_matrix(&w)
}

/// Random skew matrix supported on the imaginary coordinates.
pub fn random_imaginary_skew<S: Field, R: Rng + ?Sized>(ctx: S::Ctx, rng: &mut R) -> DenseMatrix<S> {
    let mut s = DenseMatrix::zeros(ctx, 8, 8);
    for i in 1..8 {
        for j in i + 1..8 {
            let v = S::random(ctx, rng);
            s[(i, j)] = v.clone();
            s[(j, i)] = -v;
        }
    }
    s
}

/// Random element of SO(7) (fixing `e1`) via the Cayley transform.
pub fn random_so7<S: Field, R: Rng + ?Sized>(ctx: S::Ctx, rng: &mut R) -> DenseMatrix<S> {
    loop {
        match cayley_orthogonal(&random_imaginary_skew::<S, R>(ctx, rng)) {
            Ok(q) => return q,
            Err(LinalgError::Singular) => continue,
            Err(e) => unreachable!("{e}"),
        }
    }
}

/// Random triality pair, resampling `T2` when the lift is not defined over
/// the field.
pub fn random_triality<S: LinearAlgebra, R: Rng + ?Sized>(
    ctx: S::Ctx,
    rng: &mut R,
    attempts: usize,
) -> Result<TrialityTriple<S>, LiftError> {
    for _ in 0..attempts {
        match lift_right_companion(&random_so7::<S, R>(ctx, rng)) {
            Ok(t) => return Ok(t),
            Err(LiftError::NonResidue) | Err(LiftError::Isotropic) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(LiftError::Exhausted(attempts))
}

/// Random `(T1, T2)` with `T2 = lift_left_companion(T1)`, with retries.
pub fn random_so7_with_left_lift<S: LinearAlgebra, R: Rng + ?Sized>(
    ctx: S::Ctx,
    rng: &mut R,
    attempts: usize,
) -> Result<(DenseMatrix<S>, DenseMatrix<S>), LiftError> {
    for _ in 0..attempts {
        let t1 = random_so7::<S, R>(ctx, rng);
        match lift_left_companion(&t1) {
            Ok(t2) => return Ok((t1, t2)),
            Err(LiftError::NonResidue) | Err(LiftError::Isotropic) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(LiftError::Exhausted(attempts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::{Fp, MERSENNE_31};
    use crate::jordan::{build_m, build_n, det_cartan};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const P: u64 = MERSENNE_31;

    #[test]
    fn identity_lifts() {
        let t = lift_right_companion(&DenseMatrix::<Fp>::identity(P, 8)).unwrap();
        assert_eq!(t.t1, DenseMatrix::identity(P, 8));
        assert_eq!(lift_left_companion(&DenseMatrix::<Fp>::identity(P, 8)).unwrap(), DenseMatrix::identity(P, 8));
        let t = lift_right_companion(&DenseMatrix::<Complex64>::identity((), 8)).unwrap();
        assert!(t.t1.sub(&DenseMatrix::identity((), 8)).max_abs() < 1e-12);
    }

    #[test]
    fn exact_lift_over_fp() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = random_triality::<Fp, _>(P, &mut rng, 20).unwrap();
        assert!(t.is_exact());
        assert_eq!(t.t1.transpose().mul(&t.t1), DenseMatrix::identity(P, 8));
        assert!(t.negate_t1().is_exact());
    }

    #[test]
    fn complex_lift_and_fast_lift_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t2 = random_so7::<Complex64, _>((), &mut rng);
        let t = lift_right_companion(&t2).unwrap();
        assert!(t.defect() < 1e-10);
        let fast = lift_right_fast(&t2, Some(&t.t1)).unwrap();
        assert!(fast.sub(&t.t1).max_abs() < 1e-9);
    }

    #[test]
    fn kappa_gives_second_triality() {
        assert_eq!(kappa(&DenseMatrix::<Fp>::identity(P, 8)), DenseMatrix::identity(P, 8));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = random_triality::<Fp, _>(P, &mut rng, 20).unwrap();
        let k = kappa(&t.t1);
        assert_eq!(kappa(&k), t.t1);
        assert_eq!(k.transpose().mul(&k), DenseMatrix::identity(P, 8));
        // K(x) T1(y) = T2(xy)
        for i in 0..8 {
            for j in 0..8 {
                let (x, y) = (Elem::basis(P, 3, i), Elem::basis(P, 3, j));
                assert_eq!(x.transform(&k).mul(&y.transform(&t.t1)), x.mul(&y).transform(&t.t2));
            }
        }
    }

    #[test]
    fn left_lift_satisfies_definition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (t1, t2) = random_so7_with_left_lift::<Fp, _>(P, &mut rng, 20).unwrap();
        assert!(left_companion_defects(&t1, &t2).iter().all(|d| d.is_zero()));
        assert_eq!(t2.transpose().mul(&t2), DenseMatrix::identity(P, 8));
    }

    #[test]
    fn conjugation_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = HermitianTriple::<Fp>::random(P, 3, &mut rng);
        let t = random_triality::<Fp, _>(P, &mut rng, 20).unwrap();
        let d = DenseMatrix::block_diag(&[&t.t1, &t.t1, &t.t2]);
        assert_eq!(build_n(&spin7_act(&t, &a)).mul(&d), d.mul(&build_n(&a)));
        let (t1, t2) = random_so7_with_left_lift::<Fp, _>(P, &mut rng, 20).unwrap();
        let d = DenseMatrix::block_diag(&[&t2, &t2, &t2]);
        assert_eq!(build_m(&so7_act(&t1, &a)).mul(&d), d.mul(&build_m(&a)));
    }

    #[test]
    fn sl3_identity_and_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = HermitianTriple::<Fp>::random(P, 3, &mut rng);
        assert_eq!(sl3_act(&DenseMatrix::identity(P, 3), &a), a);
        let h = DenseMatrix::from_fn(3, 3, |_, _| Fp::random(P, &mut rng));
        let mv = Sl3Move::new(h.clone());
        assert_eq!(det_cartan(&sl3_act(&h, &a)), mv.det * mv.det * det_cartan(&a));
    }

    #[test]
    fn spin7_identity_is_trivial() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = HermitianTriple::<Fp>::random(P, 3, &mut rng);
        assert_eq!(spin7_act(&TrialityTriple::identity(P), &a), a);
    }
}
