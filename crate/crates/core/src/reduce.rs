//! Constructive reduction of a generic complex triple to the identity by
//! Spin(7) moves, SL3 congruences and one overall scalar.
//!
//! Basis names follow `1, i, j, k, l, m, n, o` for coordinates `0..8`, so
//! `i` is coordinate 1 and `n` is coordinate 6. States after each step are
//! `A1, ..., A11`; the final congruence and scalar carry `A11` to `I`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cayley::{split, Elem};
use crate::jordan::HermitianTriple;
use crate::json::{matrix_to_json, triple_to_json, JsonScalar};
use crate::linalg::{cayley_orthogonal, det, reflection_pair, DenseMatrix, LinalgError};
use crate::symmetry::{lift_right_companion, lift_right_fast, sl3_act, spin7_act, LiftError, TrialityTriple};

type C = Complex64;
type Mat = DenseMatrix<C>;
type Triple = HermitianTriple<C>;

/// Denominators below this fraction of the current scale are non-generic.
pub const DENOM_TOL: f64 = 1e-8;
/// Gauss–Newton acceptance, relative to the steered vector.
pub const GN_TOL: f64 = 1e-10;
pub const GN_ITERS: usize = 50;
pub const GN_RESTARTS: usize = 20;
/// Largest accepted triality defect.
pub const DEFECT_TOL: f64 = 1e-10;
const FD_STEP: f64 = 1e-7;

const I: usize = 1;
const N: usize = 6;

fn c(re: f64) -> C {
    C::new(re, 0.0)
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ReduceError {
    #[error("input must be an octonionic triple")]
    Level,
    #[error("non-generic input at step {step}: {quantity}")]
    NonGeneric { step: usize, quantity: String },
    #[error("lift failed at step {step}: {source}")]
    Lift { step: usize, source: LiftError },
    #[error("triality at step {step} has defect {defect:e}")]
    Defect { step: usize, defect: f64 },
    #[error("replay residual {residual:e} exceeds {tol:e}")]
    Residual { residual: f64, tol: f64 },
}

impl ReduceError {
    fn non_generic(step: usize, quantity: impl Into<String>) -> Self {
        ReduceError::NonGeneric { step, quantity: quantity.into() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Move {
    Triality(TrialityTriple<C>),
    Congruence(Mat),
}

impl Move {
    pub fn apply(&self, m: &Triple) -> Triple {
        match self {
            Move::Triality(t) => spin7_act(t, m),
            Move::Congruence(h) => sl3_act(h, m),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Move::Triality(t) => json!({"kind": "triality", "t1": matrix_to_json(&t.t1), "t2": matrix_to_json(&t.t2)}),
            Move::Congruence(h) => json!({"kind": "congruence", "h": matrix_to_json(h)}),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    /// Pipeline step producing `A_step`; 12 is the final congruence.
    pub step: usize,
    pub mv: Move,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats {
    pub step: usize,
    pub iterations: usize,
    pub restarts: usize,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransformWord {
    pub moves: Vec<Step>,
    /// Trailing scalar `t`: the final state is `t * (word . A)`.
    pub scale: C,
    /// `A1, ..., A11`; empty when the input was already diagonal.
    pub intermediates: Vec<Triple>,
    /// Deviation of each intermediate from the shape expected at its step,
    /// relative to its norm.
    pub shape_defects: Vec<f64>,
    pub solves: Vec<SolveStats>,
    pub final_state: Triple,
    pub residual: f64,
    pub max_triality_defect: f64,
}

impl TransformWord {
    pub fn replay(&self, a: &Triple) -> Triple {
        let m = self.moves.iter().fold(a.clone(), |m, s| s.mv.apply(&m));
        m.scale(&self.scale)
    }

    /// Largest coordinate of `replay(a) - I`.
    pub fn replay_residual(&self, a: &Triple) -> f64 {
        distance(&self.replay(a), &Triple::identity((), 3))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "moves": self.moves.iter().map(|s| {
                let mut v = s.mv.to_json();
                v["step"] = json!(s.step);
                v
            }).collect::<Vec<_>>(),
            "scale": self.scale.to_json(),
            "intermediates": self.intermediates.iter().map(triple_to_json).collect::<Vec<_>>(),
            "shape_defects": self.shape_defects,
            "solves": self.solves.iter().map(|s| json!({
                "step": s.step, "iterations": s.iterations, "restarts": s.restarts, "residual": s.residual,
            })).collect::<Vec<_>>(),
            "final_state": triple_to_json(&self.final_state),
            "residual": self.residual,
            "max_triality_defect": self.max_triality_defect,
        })
    }
}

fn norm(m: &Triple) -> f64 {
    m.flatten().iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn distance(x: &Triple, y: &Triple) -> f64 {
    x.flatten().iter().zip(y.flatten()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

fn coord_norm(x: &Elem<C>) -> f64 {
    x.coords.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest coordinate of `x` outside `keep`.
fn outside(x: &Elem<C>, keep: &[usize]) -> f64 {
    x.coords.iter().enumerate().filter(|(i, _)| !keep.contains(i)).map(|(_, z)| z.norm()).fold(0.0, f64::max)
}

fn basis_vec(i: usize) -> Vec<C> {
    let mut v = vec![c(0.0); 8];
    v[i] = c(1.0);
    v
}

fn ensure(step: usize, name: &str, value: C, scale: f64) -> Result<C, ReduceError> {
    if value.norm() > DENOM_TOL * scale.max(f64::MIN_POSITIVE) {
        Ok(value)
    } else {
        Err(ReduceError::non_generic(step, format!("{name} vanishes ({:e})", value.norm())))
    }
}

fn unipotent(r: usize, col: usize, h: C) -> Mat {
    let mut m = Mat::identity((), 3);
    m[(r, col)] = h;
    m
}

/// Spin(7) move whose `T2` rotates the imaginary part of `c` onto the
/// `(1, e_u)` plane. Real `c` gives the identity move.
pub fn move_c_to_plane(a: &Triple, u: usize, step: usize) -> Result<(TrialityTriple<C>, Triple), ReduceError> {
    let mut im = a.c.coords.clone();
    im[0] = c(0.0);
    let size = im.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if size <= 1e-14 * norm(a).max(1.0) {
        return Ok((TrialityTriple::identity(()), a.clone()));
    }
    let t2 = reflection_pair(&im, &basis_vec(u)).map_err(|e| match e {
        LinalgError::Isotropic => ReduceError::non_generic(step, "imaginary part of c is isotropic"),
        other => ReduceError::non_generic(step, other.to_string()),
    })?;
    let t = lift_right_companion(&t2).map_err(|source| ReduceError::Lift { step, source })?;
    let next = spin7_act(&t, a);
    Ok((t, next))
}

/// What the `T1` slot must do to a fixed octonion `w`.
#[derive(Clone, Debug)]
pub enum StabilizerTarget {
    /// `T1 w` has no coordinates outside `keep`.
    Plane { w: Elem<C>, keep: Vec<usize> },
    /// `T1 w = w`.
    Fix { w: Elem<C> },
}

impl StabilizerTarget {
    fn w(&self) -> &Elem<C> {
        match self {
            StabilizerTarget::Plane { w, .. } | StabilizerTarget::Fix { w } => w,
        }
    }

    fn residual(&self, t1: &Mat) -> Vec<C> {
        match self {
            StabilizerTarget::Plane { w, keep } => {
                let v = w.transform(t1);
                v.coords.iter().enumerate().filter(|(i, _)| !keep.contains(i)).map(|(_, z)| *z).collect()
            }
            // Projective form: both signs of T1 solve it, the sign is fixed afterwards.
            StabilizerTarget::Fix { w } => {
                let v = w.transform(t1);
                let k = v.dot(w) / w.dot(w);
                v.sub(&w.scale(&k)).coords
            }
        }
    }
}

fn skew_basis(support: &[usize]) -> Vec<Mat> {
    let mut out = Vec::new();
    for (x, &i) in support.iter().enumerate() {
        for &j in &support[x + 1..] {
            let mut s = Mat::zeros((), 8, 8);
            s[(i, j)] = c(1.0);
            s[(j, i)] = c(-1.0);
            out.push(s);
        }
    }
    out
}

fn chart(basis: &[Mat], z: &[C]) -> Option<Mat> {
    let mut s = Mat::zeros((), 8, 8);
    for (b, zi) in basis.iter().zip(z) {
        s = s.add(&b.scale(zi));
    }
    cayley_orthogonal(&s).ok()
}

fn vnorm(v: &[C]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Minimum-norm least-squares solution of `J d = -r`.
fn lstsq(j: &DMatrix<C>, r: &[C]) -> Option<Vec<C>> {
    let (m, n) = j.shape();
    // Pad to a tall system.
    let rows = m.max(n);
    let mut jj = DMatrix::zeros(rows, n);
    jj.view_mut((0, 0), (m, n)).copy_from(j);
    let mut b = DVector::zeros(rows);
    for (i, z) in r.iter().enumerate() {
        b[i] = -z;
    }
    let svd = jj.svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s));
    svd.solve(&b, 1e-12 * smax).ok().map(|x| x.iter().copied().collect())
}

/// Spin(7) element with `T2 = base * Q`, `Q` in the stabiliser of the
/// coordinates outside `support`, whose `T1` meets `target`.
///
/// Gauss–Newton on the Cayley chart of `Q` with restarts; `T1` is recovered
/// from `T2` inside every residual evaluation.
pub fn stabilizer_solve(
    base: &Mat,
    support: &[usize],
    target: &StabilizerTarget,
    step: usize,
) -> Result<(TrialityTriple<C>, SolveStats), ReduceError> {
    let basis = skew_basis(support);
    let scale = coord_norm(target.w()).max(f64::MIN_POSITIVE);
    let accept = GN_TOL * scale;
    let lift = |t2: &Mat| lift_right_fast(t2, None).map_err(|source| ReduceError::Lift { step, source });
    let eval = |t2: &Mat| -> Result<Vec<C>, ReduceError> { Ok(target.residual(&lift(t2)?)) };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED ^ step as u64);
    let mut best = f64::INFINITY;
    for restart in 0..GN_RESTARTS {
        let mut cur = if restart == 0 {
            base.clone()
        } else {
            let z: Vec<C> =
                (0..basis.len()).map(|_| C::new(rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5))).collect();
            match chart(&basis, &z) {
                Some(q) => base.mul(&q),
                None => continue,
            }
        };
        let mut r = eval(&cur)?;
        let mut nr = vnorm(&r);
        for it in 0..=GN_ITERS {
            best = best.min(nr);
            if nr <= 1e-4 * accept || (it == GN_ITERS && nr <= accept) {
                return finish(cur, target, step, SolveStats { step, iterations: it, restarts: restart, residual: nr / scale });
            }
            if it == GN_ITERS {
                break;
            }
            let mut jac = DMatrix::zeros(r.len(), basis.len());
            for (k, s) in basis.iter().enumerate() {
                let plus = cayley_orthogonal(&s.scale(&c(FD_STEP))).ok();
                let minus = cayley_orthogonal(&s.scale(&c(-FD_STEP))).ok();
                let (Some(p), Some(m)) = (plus, minus) else { continue };
                let (fp, fm) = (eval(&cur.mul(&p))?, eval(&cur.mul(&m))?);
                for i in 0..r.len() {
                    jac[(i, k)] = (fp[i] - fm[i]) / (2.0 * FD_STEP);
                }
            }
            let Some(d) = lstsq(&jac, &r) else { break };
            let mut t = 1.0;
            let mut improved = None;
            while t > 1e-4 {
                let z: Vec<C> = d.iter().map(|x| x * t).collect();
                if let Some(q) = chart(&basis, &z) {
                    let cand = cur.mul(&q);
                    let rc = eval(&cand)?;
                    if vnorm(&rc) < nr {
                        improved = Some((cand, rc));
                        break;
                    }
                }
                t /= 2.0;
            }
            match improved {
                Some((cand, rc)) => {
                    cur = cand;
                    nr = vnorm(&rc);
                    r = rc;
                }
                None if nr <= accept => {
                    return finish(cur, target, step, SolveStats { step, iterations: it, restarts: restart, residual: nr / scale })
                }
                None => break,
            }
        }
    }
    Err(ReduceError::non_generic(step, format!("Gauss-Newton stagnated at relative residual {:e}", best / scale)))
}

fn finish(
    t2: Mat,
    target: &StabilizerTarget,
    step: usize,
    stats: SolveStats,
) -> Result<(TrialityTriple<C>, SolveStats), ReduceError> {
    let t1 = lift_right_fast(&t2, None).map_err(|source| ReduceError::Lift { step, source })?;
    let mut t = TrialityTriple { t1, t2 };
    if t.defect() > DEFECT_TOL {
        t = lift_right_companion(&t.t2).map_err(|source| ReduceError::Lift { step, source })?;
    }
    if let StabilizerTarget::Fix { w } = target {
        let v = w.transform(&t.t1);
        if (v.dot(w) / w.dot(w)).re < 0.0 {
            t = t.negate_t1();
        }
    }
    Ok((t, stats))
}

/// `H` with `H^T S H = I` by symmetric elimination with diagonal pivoting.
pub fn symmetric_congruence_to_identity(s: &Mat) -> Result<Mat, ReduceError> {
    let n = s.rows;
    let scale = s.max_abs().max(f64::MIN_POSITIVE);
    if det(s).norm() <= 1e-10 * scale.powi(n as i32) {
        return Err(ReduceError::non_generic(12, "symmetric matrix is singular"));
    }
    let mut cur = s.clone();
    let mut h = Mat::identity((), n);
    let apply = |cur: &mut Mat, h: &mut Mat, e: &Mat| {
        *cur = e.transpose().mul(cur).mul(e);
        *h = h.mul(e);
    };
    for k in 0..n {
        let (p, best) = (k..n).map(|j| (j, cur[(j, j)].norm())).fold((k, -1.0), |a, b| if b.1 > a.1 { b } else { a });
        if best <= 1e-12 * scale {
            // All remaining diagonal entries vanish: fold an off-diagonal
            // entry onto the diagonal.
            let (mut bi, mut bj, mut bv) = (k, k, 0.0);
            for i in k..n {
                for j in i + 1..n {
                    if cur[(i, j)].norm() > bv {
                        (bi, bj, bv) = (i, j, cur[(i, j)].norm());
                    }
                }
            }
            let mut e = Mat::identity((), n);
            e[(bj, bi)] = c(1.0);
            apply(&mut cur, &mut h, &e);
            apply(&mut cur, &mut h, &swap(n, k, bi));
        } else if p != k {
            apply(&mut cur, &mut h, &swap(n, k, p));
        }
        let d = cur[(k, k)];
        let mut e = Mat::identity((), n);
        for r in k + 1..n {
            e[(k, r)] = -cur[(k, r)] / d;
        }
        apply(&mut cur, &mut h, &e);
    }
    let inv_sqrt: Vec<C> = (0..n).map(|k| c(1.0) / cur[(k, k)].sqrt()).collect();
    Ok(h.mul(&Mat::diagonal(&inv_sqrt)))
}

fn swap(n: usize, a: usize, b: usize) -> Mat {
    let mut p = Mat::identity((), n);
    p[(a, a)] = c(0.0);
    p[(b, b)] = c(0.0);
    p[(a, b)] = c(1.0);
    p[(b, a)] = c(1.0);
    p
}

struct Reducer {
    state: Triple,
    moves: Vec<Step>,
    intermediates: Vec<Triple>,
    shapes: Vec<f64>,
    solves: Vec<SolveStats>,
}

impl Reducer {
    fn push(&mut self, step: usize, mv: Move) {
        self.state = mv.apply(&self.state);
        self.moves.push(Step { step, mv });
    }

    fn record(&mut self, shape: f64) {
        let sc = norm(&self.state).max(f64::MIN_POSITIVE);
        self.intermediates.push(self.state.clone());
        self.shapes.push(shape / sc);
    }

    fn scale(&self) -> f64 {
        norm(&self.state)
    }

    fn solve(&mut self, step: usize, base: &Mat, support: &[usize], target: StabilizerTarget) -> Result<(), ReduceError> {
        let (t, stats) = stabilizer_solve(base, support, &target, step)?;
        self.solves.push(stats);
        self.push(step, Move::Triality(t));
        Ok(())
    }

    fn generic_steps(&mut self) -> Result<(), ReduceError> {
        // A1: c = r1 + r2 i.
        let (t, _) = move_c_to_plane(&self.state, I, 1)?;
        self.push(1, Move::Triality(t));
        ensure(1, "r2 (imaginary part of c)", self.state.c.coords[I], self.scale())?;
        self.record(outside(&self.state.c, &[0, I]));

        // A2: quaternion halves of a made orthogonal.
        let sa = split(&self.state.a).expect("octonion");
        let cbar = split(&self.state.c.conj()).expect("octonion").x0;
        let sc = self.scale();
        let pairing = ensure(2, "<r1 - r2 i, a1'>", cbar.dot(&sa.x1), sc * sc)?;
        self.push(2, Move::Congruence(unipotent(0, 2, -sa.x0.dot(&sa.x1) / pairing)));
        let sa = split(&self.state.a).expect("octonion");
        self.record(sa.x0.dot(&sa.x1).norm() / self.scale());

        // A3: c = r1 + r2 n, a = r3 i + r4 n.
        let base = reflection_pair(&basis_vec(I), &basis_vec(N)).expect("basis vectors");
        let target = StabilizerTarget::Plane { w: self.state.a.clone(), keep: vec![I, N] };
        self.solve(3, &base, &[2, 3, 4, 5, 6, 7], target)?;
        let sc = self.scale();
        let r2 = ensure(3, "r2 (n-coordinate of c)", self.state.c.coords[N], sc)?;
        ensure(3, "r3 (i-coordinate of a)", self.state.a.coords[I], sc)?;
        let r4 = ensure(3, "r4 (n-coordinate of a)", self.state.a.coords[N], sc)?;
        self.record(outside(&self.state.c, &[0, N]).max(outside(&self.state.a, &[I, N])));

        // A4: a = r5 + r3 i.
        self.push(4, Move::Congruence(unipotent(0, 2, r4 / r2)));
        self.record(outside(&self.state.a, &[0, I]));

        // A5: c back to r1 + r2 i with a fixed.
        let base = reflection_pair(&basis_vec(N), &basis_vec(I)).expect("basis vectors");
        let w = self.state.a.clone();
        self.solve(5, &base, &[1, 2, 3, 4, 5, 7], StabilizerTarget::Fix { w: w.clone() })?;
        let sc = self.scale();
        let r2 = self.state.c.coords[I];
        let r3 = ensure(5, "r3 (i-coordinate of a)", self.state.a.coords[I], sc)?;
        self.record(outside(&self.state.c, &[0, I]).max(coord_norm(&self.state.a.sub(&w))));

        // A6: c = r6.
        self.push(6, Move::Congruence(unipotent(2, 0, r2 / r3)));
        self.record(outside(&self.state.c, &[0]));

        // A7: a = r7.
        let target = StabilizerTarget::Plane { w: self.state.a.clone(), keep: vec![0] };
        self.solve(7, &Mat::identity((), 8), &[1, 2, 3, 4, 5, 6, 7], target)?;
        let sc = self.scale();
        let r6 = self.state.c.coords[0];
        let r7 = ensure(7, "r7 (a after rotation to the real axis)", self.state.a.coords[0], sc)?;
        self.record(outside(&self.state.a, &[0]).max(outside(&self.state.c, &[0])));

        // A8: only the (1,2) block and mu3 remain.
        self.push(8, Move::Congruence(unipotent(2, 0, -r6 / r7)));
        let l2 = ensure(8, "lambda2", self.state.lambda[1], self.scale())?;
        self.push(8, Move::Congruence(unipotent(1, 2, -r7 / l2)));
        let h3 = Mat::from_rows(vec![vec![c(-1.0), c(0.0), c(0.0)], vec![c(0.0), c(0.0), c(1.0)], vec![c(0.0), c(1.0), c(0.0)]]);
        self.push(8, Move::Congruence(h3));
        self.record(coord_norm(&self.state.a).max(coord_norm(&self.state.b)));

        // A9: c = r8 + r9 i.
        let (t, _) = move_c_to_plane(&self.state, I, 9)?;
        self.push(9, Move::Triality(t));
        self.record(outside(&self.state.c, &[0, I]).max(coord_norm(&self.state.a)).max(coord_norm(&self.state.b)));

        // A10: the block moves to (2,3).
        let h = Mat::from_rows(vec![vec![c(0.0), c(0.0), c(1.0)], vec![c(0.0), c(-1.0), c(0.0)], vec![c(1.0), c(0.0), c(0.0)]]);
        self.push(10, Move::Congruence(h));
        self.record(outside(&self.state.a, &[0, I]).max(coord_norm(&self.state.b)).max(coord_norm(&self.state.c)));

        // A11: a = r10, a complex symmetric matrix.
        let target = StabilizerTarget::Plane { w: self.state.a.clone(), keep: vec![0] };
        self.solve(11, &Mat::identity((), 8), &[1, 2, 3, 4, 5, 6, 7], target)?;
        self.record(outside(&self.state.a, &[0]).max(coord_norm(&self.state.b)).max(coord_norm(&self.state.c)));
        Ok(())
    }
}

/// The complex symmetric 3x3 matrix of real parts.
pub fn real_part_matrix(m: &Triple) -> Mat {
    let [l1, l2, l3] = m.lambda;
    let (a, b, cc) = (m.a.coords[0], m.b.coords[0], m.c.coords[0]);
    Mat::from_rows(vec![vec![l1, cc, b], vec![cc, l2, a], vec![b, a, l3]])
}

pub fn reduce_to_identity(a: &Triple, tol: f64) -> Result<TransformWord, ReduceError> {
    if a.level() != 3 {
        return Err(ReduceError::Level);
    }
    let scale = norm(a);
    if scale == 0.0 || !scale.is_finite() {
        return Err(ReduceError::non_generic(0, "input is zero or not finite"));
    }
    let mut r = Reducer { state: a.clone(), moves: Vec::new(), intermediates: Vec::new(), shapes: Vec::new(), solves: Vec::new() };
    let off = [&a.a, &a.b, &a.c].iter().map(|x| coord_norm(x)).fold(0.0, f64::max);
    if off > 1e-14 * scale {
        r.generic_steps()?;
    }
    let h0 = symmetric_congruence_to_identity(&real_part_matrix(&r.state))?;
    let alpha = det(&h0).powf(-1.0 / 3.0);
    let h = h0.scale(&alpha);
    let mut t = c(1.0) / (alpha * alpha);
    if h.sub(&Mat::identity((), 3)).max_abs() > 1e-15 {
        r.push(12, Move::Congruence(h));
    } else {
        t = c(1.0);
    }
    let max_triality_defect = r
        .moves
        .iter()
        .filter_map(|s| match &s.mv {
            Move::Triality(t) => Some((s.step, t.defect())),
            Move::Congruence(_) => None,
        })
        .try_fold(0.0f64, |m, (step, d)| if d > DEFECT_TOL { Err(ReduceError::Defect { step, defect: d }) } else { Ok(m.max(d)) })?;
    let mut word = TransformWord {
        moves: r.moves,
        scale: t,
        intermediates: r.intermediates,
        shape_defects: r.shapes,
        solves: r.solves,
        final_state: r.state.scale(&t),
        residual: 0.0,
        max_triality_defect,
    };
    word.residual = word.replay_residual(a);
    if word.residual > tol {
        return Err(ReduceError::Residual { residual: word.residual, tol });
    }
    Ok(word)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strata::gaussian_triple;

    #[test]
    fn identity_gives_empty_word() {
        let w = reduce_to_identity(&Triple::identity((), 3), 1e-12).unwrap();
        assert!(w.moves.is_empty());
        assert_eq!(w.residual, 0.0);
    }

    #[test]
    fn diagonal_needs_only_the_final_congruence() {
        let m = Triple::diagonal([C::new(4.0, 0.0), C::new(-1.0, 2.0), C::new(0.5, -0.3)], 3);
        let w = reduce_to_identity(&m, 1e-12).unwrap();
        assert_eq!(w.moves.len(), 1);
        assert_eq!(w.moves[0].step, 12);
        assert!(w.residual < 1e-12);
    }

    #[test]
    fn congruence_examples() {
        let id = Mat::identity((), 3);
        assert_eq!(symmetric_congruence_to_identity(&id).unwrap(), id);
        let s = Mat::diagonal(&[c(4.0), c(1.0), c(1.0)]);
        let h = symmetric_congruence_to_identity(&s).unwrap();
        assert!(h.transpose().mul(&s).mul(&h).sub(&id).max_abs() < 1e-15);
        // zero diagonal
        let s = Mat::from_rows(vec![
            vec![c(0.0), c(1.0), c(0.0)],
            vec![c(1.0), c(0.0), c(0.0)],
            vec![c(0.0), c(0.0), C::new(0.0, 2.0)],
        ]);
        let h = symmetric_congruence_to_identity(&s).unwrap();
        assert!(h.transpose().mul(&s).mul(&h).sub(&id).max_abs() < 1e-12);
        let sing = Mat::from_rows(vec![vec![c(1.0), c(1.0), c(0.0)], vec![c(1.0), c(1.0), c(0.0)], vec![c(0.0), c(0.0), c(1.0)]]);
        assert!(symmetric_congruence_to_identity(&sing).is_err());
    }

    #[test]
    fn move_c_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = gaussian_triple(&mut rng);
        let (t, n) = move_c_to_plane(&m, I, 1).unwrap();
        assert!(outside(&n.c, &[0, I]) < 1e-9);
        assert!(t.defect() < DEFECT_TOL);
        let mut real = m.clone();
        real.c = Elem::scalar(C::new(0.3, 0.1), 3);
        let (t, n) = move_c_to_plane(&real, I, 1).unwrap();
        assert_eq!(t, TrialityTriple::identity(()));
        assert_eq!(n, real);
        let mut planar = m.clone();
        planar.c = Elem::new((0..8).map(|k| if k < 2 { C::new(0.7, -0.2) } else { c(0.0) }).collect());
        let (_, n) = move_c_to_plane(&planar, I, 1).unwrap();
        assert!(coord_norm(&n.c.sub(&planar.c)) < 1e-9);
    }

    #[test]
    fn satisfied_target_is_accepted_immediately() {
        let w = Elem::scalar(c(2.0), 3);
        let target = StabilizerTarget::Plane { w, keep: vec![0] };
        let (_, stats) = stabilizer_solve(&Mat::identity((), 8), &[1, 2, 3, 4, 5, 6, 7], &target, 7).unwrap();
        assert_eq!((stats.iterations, stats.restarts), (0, 0));
    }

    #[test]
    fn random_triples_reduce() {
        for seed in 0..3 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = gaussian_triple(&mut rng);
            let w = reduce_to_identity(&m, 1e-6).unwrap();
            assert!(w.residual <= 1e-6, "{}", w.residual);
            assert_eq!(w.intermediates.len(), 11);
            assert!(w.shape_defects.iter().all(|&d| d < 1e-8), "{:?}", w.shape_defects);
            assert!(w.max_triality_defect <= DEFECT_TOL);
            assert!(w.moves.iter().all(|s| match &s.mv {
                Move::Congruence(h) => (det(h) - c(1.0)).norm() < 1e-9,
                Move::Triality(_) => true,
            }));
        }
    }

    #[test]
    fn degenerate_pairing_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut m = gaussian_triple(&mut rng);
        m.c = Elem::new((0..8).map(|k| if k < 2 { C::new(0.7, -0.2) } else { c(0.0) }).collect());
        m.a = Elem::new((0..8).map(|k| if k < 4 { C::new(1.0, 0.5) } else { c(0.0) }).collect());
        match reduce_to_identity(&m, 1e-6) {
            Err(ReduceError::NonGeneric { step, .. }) => assert_eq!(step, 2),
            other => panic!("{other:?}"),
        }
    }
}
