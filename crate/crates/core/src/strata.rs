//! Complex sampling of the degeneracy hypersurfaces and corank statistics of
//! `M_O` and `N_O` on them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::cayley::{real_part_of_product, twice_phi, associator, Elem};
use crate::coeffs::Scalar;
use crate::exec::{task_rng, Exec};
use crate::jordan::{build_m, build_n, s_odm, twisted_cubic, twisted_sextic, HermitianTriple};
use crate::json::triple_to_json;
use crate::linalg::{numeric_rank, singular_values, DenseMatrix, RANK_TOL};

/// Leading coefficients below this are resampled.
pub const LEADING_TOL: f64 = 1e-12;
/// Resampling budget per point.
pub const SAMPLE_RETRIES: usize = 100;
/// Required separation between the last kept and first dropped singular value.
pub const GAP_THRESHOLD: f64 = 1e4;
/// Minimum frequency of the expected corank.
pub const MODE_FRACTION: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypersurfaceId {
    Sodm,
    TwistedCubic,
    TwistedSextic,
}

impl HypersurfaceId {
    pub const ALL: [HypersurfaceId; 3] = [HypersurfaceId::Sodm, HypersurfaceId::TwistedCubic, HypersurfaceId::TwistedSextic];

    pub fn degree(self) -> i32 {
        match self {
            HypersurfaceId::TwistedCubic => 3,
            _ => 6,
        }
    }

    pub fn eval<S: Scalar>(self, m: &HermitianTriple<S>) -> S {
        match self {
            HypersurfaceId::Sodm => s_odm(m),
            HypersurfaceId::TwistedCubic => twisted_cubic(m),
            HypersurfaceId::TwistedSextic => twisted_sextic(m),
        }
    }

    /// The matrix whose degeneracy the hypersurface describes.
    pub fn natural_matrix(self) -> MatrixKind {
        match self {
            HypersurfaceId::Sodm => MatrixKind::M,
            _ => MatrixKind::N,
        }
    }
}

impl FromStr for HypersurfaceId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "sodm" | "s_odm" => Ok(HypersurfaceId::Sodm),
            "cubic" | "twisted_cubic" => Ok(HypersurfaceId::TwistedCubic),
            "sextic" | "twisted_sextic" => Ok(HypersurfaceId::TwistedSextic),
            _ => Err(format!("unknown surface {s:?} (expected sodm, cubic or sextic)")),
        }
    }
}

impl fmt::Display for HypersurfaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HypersurfaceId::Sodm => "sodm",
            HypersurfaceId::TwistedCubic => "cubic",
            HypersurfaceId::TwistedSextic => "sextic",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MatrixKind {
    M,
    N,
}

impl MatrixKind {
    pub fn build<S: Scalar>(self, m: &HermitianTriple<S>) -> DenseMatrix<S> {
        match self {
            MatrixKind::M => build_m(m),
            MatrixKind::N => build_n(m),
        }
    }
}

impl FromStr for MatrixKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "M" | "m" => Ok(MatrixKind::M),
            "N" | "n" => Ok(MatrixKind::N),
            _ => Err(format!("unknown matrix {s:?} (expected M or N)")),
        }
    }
}

/// Generic corank of the matrix on the hypersurface, where one is claimed.
pub fn expected_corank(h: HypersurfaceId, m: MatrixKind) -> Option<usize> {
    match (h, m) {
        (HypersurfaceId::Sodm, MatrixKind::M) => Some(4),
        (HypersurfaceId::TwistedCubic, MatrixKind::N) => Some(4),
        (HypersurfaceId::TwistedSextic, MatrixKind::N) => Some(2),
        _ => None,
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SampleError {
    #[error("leading coefficient stayed below {LEADING_TOL} after {0} draws")]
    Degenerate(usize),
}

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Triple with independent standard complex normal coordinates.
pub fn gaussian_triple<R: Rng + ?Sized>(rng: &mut R) -> HermitianTriple<Complex64> {
    let mut oct = || Elem::new((0..8).map(|_| gaussian(rng)).collect());
    let (a, b, c) = (oct(), oct(), oct());
    HermitianTriple::new([gaussian(rng), gaussian(rng), gaussian(rng)], a, b, c)
}

/// Random point of the hypersurface: 26 Gaussian coordinates, `l3` solved
/// in closed form. The root of a quadratic is chosen by a fair coin.
pub fn sample_on<R: Rng + ?Sized>(h: HypersurfaceId, rng: &mut R) -> Result<HermitianTriple<Complex64>, SampleError> {
    for _ in 0..SAMPLE_RETRIES {
        let mut m = gaussian_triple(rng);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        if let Some(l3) = solve_lambda3(h, &m, sign) {
            m.lambda[2] = l3;
            return Ok(m);
        }
    }
    Err(SampleError::Degenerate(SAMPLE_RETRIES))
}

/// `l3` making `h` vanish with the other 26 coordinates of `m` fixed.
pub fn solve_lambda3(h: HypersurfaceId, m: &HermitianTriple<Complex64>, sign: f64) -> Option<Complex64> {
    let [l1, l2, _] = m.lambda;
    let (na, nb, nc) = (m.a.norm_sq(), m.b.norm_sq(), m.c.norm_sq());
    // Det and the cubic are k l3 + rest; the sextic's q is -k l3 + rest.
    let k = l1 * l2 - nc;
    if k.norm() < LEADING_TOL {
        return None;
    }
    let base = l2 * nb + l1 * na;
    match h {
        HypersurfaceId::Sodm => {
            let rest = 2.0 * real_part_of_product(&m.c, &m.a.mul(&m.b)) - base;
            let tp = twice_phi(&m.c, &m.b, &m.a);
            let d = tp + sign * (tp * tp + associator(&m.c, &m.b, &m.a).norm_sq()).sqrt();
            Some((d - rest) / k)
        }
        HypersurfaceId::TwistedCubic => {
            let rest = 2.0 * real_part_of_product(&m.c.conj(), &m.b.mul(&m.a)) - base;
            Some(-rest / k)
        }
        HypersurfaceId::TwistedSextic => {
            let t = m.c.re() * real_part_of_product(&m.a, &m.b);
            let kk = nb * na * m.c.re() * m.c.re()
                + nc * real_part_of_product(&m.a, &m.b).powi(2)
                - na * nb * nc;
            let q = 2.0 * t + sign * 2.0 * (t * t - kk).sqrt();
            Some((base - q) / k)
        }
    }
}

/// `|h(A)| / max(1, |A|)^deg`.
pub fn relative_residual(h: HypersurfaceId, m: &HermitianTriple<Complex64>) -> f64 {
    let scale = m.flatten().iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    h.eval(m).norm() / scale.powi(h.degree())
}

/// Corank → count. Merging is addition of counts.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CorankHistogram(pub BTreeMap<usize, usize>);

impl CorankHistogram {
    pub fn record(&mut self, corank: usize) {
        *self.0.entry(corank).or_insert(0) += 1;
    }

    pub fn merge(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&k, &v) in &other.0 {
            *out.0.entry(k).or_insert(0) += v;
        }
        out
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    /// Most frequent corank; ties go to the smaller corank.
    pub fn mode(&self) -> Option<(usize, usize)> {
        self.0.iter().fold(None, |best, (&k, &v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((k, v)),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusPoint {
    pub corank: usize,
    /// `s[r-1] / s[r]` at the numeric rank `r`; `None` at full rank.
    pub gap: Option<f64>,
    pub residual: f64,
}

/// Singular-value rank decision for one matrix.
pub fn corank_of(m: &DenseMatrix<Complex64>, tol: f64) -> CensusPoint {
    let sv = singular_values(m);
    let r = numeric_rank(&sv, tol);
    let gap = (r > 0 && r < sv.len()).then(|| sv[r - 1] / sv[r].max(f64::MIN_POSITIVE));
    CensusPoint { corank: sv.len() - r, gap, residual: 0.0 }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapStats {
    pub threshold: f64,
    pub fraction_above: f64,
    pub min_log10: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub rank: usize,
    pub point: Value,
    pub singular_values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CorankCensus {
    pub surface: HypersurfaceId,
    pub matrix: MatrixKind,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub backend: &'static str,
    pub histogram: CorankHistogram,
    pub mode: Option<usize>,
    pub mode_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_corank: Option<usize>,
    pub passed: bool,
    pub gap: GapStats,
    pub max_residual: f64,
    pub failed_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u128>,
}

impl CorankCensus {
    /// `corank,count` lines with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("corank,count\n");
        for (k, v) in &self.histogram.0 {
            s.push_str(&format!("{k},{v}\n"));
        }
        s
    }
}

#[derive(Clone, Debug)]
pub struct CensusConfig {
    pub surface: HypersurfaceId,
    pub matrix: MatrixKind,
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    pub exec: Exec,
}

impl CensusConfig {
    pub fn new(surface: HypersurfaceId, samples: usize, seed: u64) -> Self {
        CensusConfig { surface, matrix: surface.natural_matrix(), samples, tol: RANK_TOL, seed, exec: Exec::Parallel }
    }
}

pub fn corank_census(cfg: &CensusConfig) -> CorankCensus {
    let start = Instant::now();
    let stream = 0x5EA5 + cfg.surface as u64 * 2 + cfg.matrix as u64;
    let points = cfg.exec.map(cfg.samples, |i| {
        let mut rng = task_rng(cfg.seed, stream, i as u64);
        sample_on(cfg.surface, &mut rng).map(|m| {
            let mut pt = corank_of(&cfg.matrix.build(&m), cfg.tol);
            pt.residual = relative_residual(cfg.surface, &m);
            (m, pt)
        })
    });
    let mut histogram = CorankHistogram::default();
    let mut gaps = Vec::new();
    let mut max_residual = 0.0f64;
    let mut failed = 0;
    let mut witness = None;
    let mut above = 0;
    for p in &points {
        let Ok((m, pt)) = p else {
            failed += 1;
            continue;
        };
        histogram.record(pt.corank);
        max_residual = max_residual.max(pt.residual);
        if let Some(g) = pt.gap {
            gaps.push(g);
            if g >= GAP_THRESHOLD {
                above += 1;
            }
        }
        if witness.is_none() && cfg.surface == HypersurfaceId::TwistedSextic && cfg.matrix == MatrixKind::N && pt.corank == 2 {
            witness = Some(Witness {
                rank: 24 - pt.corank,
                point: triple_to_json(m),
                singular_values: singular_values(&cfg.matrix.build(m)),
            });
        }
    }
    let counted = histogram.total();
    let (mode, count) = histogram.mode().map_or((None, 0), |(k, v)| (Some(k), v));
    let mode_fraction = if counted == 0 { 0.0 } else { count as f64 / cfg.samples as f64 };
    let expected = expected_corank(cfg.surface, cfg.matrix);
    let passed = expected.is_none_or(|e| mode == Some(e) && mode_fraction >= MODE_FRACTION);
    CorankCensus {
        surface: cfg.surface,
        matrix: cfg.matrix,
        samples: cfg.samples,
        seed: cfg.seed,
        tol: cfg.tol,
        backend: "svd",
        histogram,
        mode,
        mode_fraction,
        expected_corank: expected,
        passed,
        gap: GapStats {
            threshold: GAP_THRESHOLD,
            fraction_above: if gaps.is_empty() { 0.0 } else { above as f64 / gaps.len() as f64 },
            min_log10: gaps.iter().copied().reduce(f64::min).map(f64::log10),
        },
        max_residual,
        failed_samples: failed,
        witness,
        elapsed_ms: Some(start.elapsed().as_millis()),
    }
}
