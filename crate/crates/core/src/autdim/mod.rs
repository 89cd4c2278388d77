//! Expansion of the sextic in 27 variables and the rank of the differential
//! of the restriction map `m -> S(m z)` at random 27x6 points.

pub mod poly;

use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::cayley::{gram_im, twice_phi};
use crate::coeffs::{mulmod, Field, Fp, Scalar};
use crate::exec::{task_rng, Exec};
use crate::jordan::{det_cartan, twisted_sextic, HermitianTriple};
use crate::linalg::{rank, DenseMatrix};
use poly::{exponent, add_scaled, DenseBasis, PolyCtx, SparsePoly};

pub const NVARS: usize = 27;
pub const NSUB: usize = 6;
pub const EXPECTED_RANK: usize = 133;
/// `dim SO(7) + dim SL(3)`.
pub const GROUP_DIM: usize = 29;

/// Which hypersurface the Jacobian computation runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Sodm,
    TwistedSextic,
}

/// The generic point `x_1 .. x_27` laid out as `c, b, a, l1, l2, l3`.
pub fn variable_triple(p: u64) -> HermitianTriple<SparsePoly> {
    let ctx = PolyCtx { nvars: NVARS, p };
    let v: Vec<SparsePoly> = (0..NVARS).map(|i| SparsePoly::var(ctx, i)).collect();
    HermitianTriple::unflatten(&v).expect("27 coordinates")
}

/// `Det^2 - 4 phi Det - 4 Gram + 4 phi^2`, the Gram form of the sextic.
pub fn sodm_gram_form<S: Scalar>(m: &HermitianTriple<S>) -> S {
    let ctx = m.ctx();
    let d = det_cartan(m);
    let p2 = twice_phi(&m.c, &m.b, &m.a);
    let g = gram_im(&m.c, &m.b, &m.a);
    d.clone() * d.clone() - S::from_i64(ctx, 2) * p2.clone() * d - S::from_i64(ctx, 4) * g + p2.clone() * p2
}

pub fn expand_sodm(p: u64) -> SparsePoly {
    sodm_gram_form(&variable_triple(p))
}

pub fn expand_twisted_sextic(p: u64) -> SparsePoly {
    twisted_sextic(&variable_triple(p))
}

/// Random substitution matrix `x_i <- sum_j m_ij z_j`.
pub fn random_restriction<R: Rng + ?Sized>(p: u64, rng: &mut R) -> DenseMatrix<Fp> {
    DenseMatrix::from_fn(NVARS, NSUB, |_, _| Fp::random(p, rng))
}

/// Precomputed gradient and dense monomial tables.
pub struct JacobianRank {
    pub p: u64,
    pub gradient: Vec<SparsePoly>,
    bases: Vec<DenseBasis>,
    shifts: Vec<Vec<Vec<usize>>>,
}

impl JacobianRank {
    pub fn new(poly: &SparsePoly) -> Self {
        let deg = poly.total_degree().unwrap_or(0);
        let bases: Vec<DenseBasis> = (0..=deg).map(|d| DenseBasis::new(NSUB, d)).collect();
        let shifts = (0..deg as usize).map(|d| bases[d].shift_table(&bases[d + 1])).collect();
        JacobianRank { p: poly.ctx.p, gradient: poly.gradient(), bases, shifts }
    }

    fn degree(&self) -> usize {
        self.bases.len() - 1
    }

    /// Dense coefficients of `f(m z)` for homogeneous `f` of degree `d`.
    pub fn restrict(&self, f: &SparsePoly, m: &DenseMatrix<Fp>, d: usize) -> Vec<u64> {
        let p = self.p;
        let mut out = vec![0u64; self.bases[d].len()];
        let rows: Vec<Vec<u64>> = (0..NVARS).map(|i| (0..NSUB).map(|j| m[(i, j)].residue()).collect()).collect();
        let mut cur = Vec::with_capacity(462);
        let mut next = Vec::with_capacity(462);
        for (mono, c) in f.terms() {
            cur.clear();
            cur.push(c.residue());
            let mut deg = 0;
            for (i, row) in rows.iter().enumerate() {
                for _ in 0..exponent(mono, i) {
                    next.clear();
                    next.resize(self.bases[deg + 1].len(), 0);
                    for (k, &v) in cur.iter().enumerate() {
                        if v == 0 {
                            continue;
                        }
                        for (j, &mij) in row.iter().enumerate() {
                            let t = &mut next[self.shifts[deg][k][j]];
                            *t = (*t + mulmod(v, mij, p)) % p;
                        }
                    }
                    std::mem::swap(&mut cur, &mut next);
                    deg += 1;
                }
            }
            debug_assert_eq!(deg, d);
            add_scaled(&mut out, &cur, 1, p);
        }
        out
    }

    /// The `27 * 6` rows `z_j * (dS/dx_i)(m z)`.
    pub fn image_matrix(&self, m: &DenseMatrix<Fp>, exec: Exec) -> DenseMatrix<Fp> {
        let d = self.degree();
        let p = self.p;
        let restricted = exec.map(NVARS, |i| self.restrict(&self.gradient[i], m, d - 1));
        let cols = self.bases[d].len();
        let mut out = DenseMatrix::zeros(p, NVARS * NSUB, cols);
        for (i, g) in restricted.iter().enumerate() {
            for j in 0..NSUB {
                let r = i * NSUB + j;
                for (k, &v) in g.iter().enumerate() {
                    if v != 0 {
                        out[(r, self.shifts[d - 1][k][j])] = Fp::from_u64(v, p);
                    }
                }
            }
        }
        out
    }

    pub fn rank_at(&self, m: &DenseMatrix<Fp>, exec: Exec) -> usize {
        rank(&self.image_matrix(m, exec))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AutDimReport {
    pub target: Target,
    pub prime: u64,
    pub seed: u64,
    pub retries: usize,
    pub ranks: Vec<usize>,
    /// Largest rank seen; absent when no point was tried.
    pub rank: Option<usize>,
    /// `162 - rank`, an upper bound on the dimension of the Lie algebra of
    /// the automorphism group.
    pub bound: Option<usize>,
    pub rows: usize,
    pub cols: usize,
    pub expected_rank: usize,
    pub group_dim: usize,
    pub consistent: Option<bool>,
    pub terms: usize,
    pub degree: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u128>,
}

/// Rank of the differential at `retries` random points; keeps the maximum.
pub fn aut_dimension_bound(target: Target, p: u64, seed: u64, retries: usize, exec: Exec) -> AutDimReport {
    let start = Instant::now();
    let poly = match target {
        Target::Sodm => expand_sodm(p),
        Target::TwistedSextic => expand_twisted_sextic(p),
    };
    let rows = NVARS * NSUB;
    let jr = if retries > 0 { Some(JacobianRank::new(&poly)) } else { None };
    let ranks: Vec<usize> = match &jr {
        Some(jr) => exec.map(retries, |t| {
            let mut rng = task_rng(seed, 0xA0D1, t as u64);
            jr.rank_at(&random_restriction(p, &mut rng), Exec::Sequential)
        }),
        None => Vec::new(),
    };
    let rank = ranks.iter().copied().max();
    let bound = rank.map(|r| rows - r);
    AutDimReport {
        target,
        prime: p,
        seed,
        retries,
        rank,
        bound,
        rows,
        cols: DenseBasis::new(NSUB, poly.total_degree().unwrap_or(0)).len(),
        expected_rank: EXPECTED_RANK,
        group_dim: GROUP_DIM,
        consistent: rank.map(|r| r == EXPECTED_RANK && rows - r == GROUP_DIM),
        ranks,
        terms: poly.len(),
        degree: poly.total_degree().unwrap_or(0),
        elapsed_ms: Some(start.elapsed().as_millis()),
    }
}

/// Generic point of the triple as polynomials evaluated at `x`.
pub fn eval_triple(x: &[Fp]) -> HermitianTriple<Fp> {
    HermitianTriple::unflatten(x).expect("27 coordinates")
}
