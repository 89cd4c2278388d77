//! Independent re-derivations checked against the library.

use num_complex::Complex64;
use octjordan::cayley::real_part_of_product;
use octjordan::coeffs::{Field, Fp, Scalar, MERSENNE_31};
use octjordan::jordan::{build_m, build_n, com, det_cartan, s_odm, HermitianTriple};
use octjordan::linalg::{det, nullspace, DenseMatrix};
use octjordan::strata::{sample_on, HypersurfaceId};
use octjordan::Elem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const P: u64 = MERSENNE_31;

fn modp(v: i128) -> u64 {
    v.rem_euclid(P as i128) as u64
}

/// Cayley–Dickson product on raw residues, straight from the doubling formula.
fn cd_mul(x: &[u64], y: &[u64]) -> Vec<u64> {
    let n = x.len();
    if n == 1 {
        return vec![((x[0] as u128 * y[0] as u128) % P as u128) as u64];
    }
    let h = n / 2;
    let (a, b) = x.split_at(h);
    let (c, d) = y.split_at(h);
    let conj = |v: &[u64]| -> Vec<u64> {
        v.iter().enumerate().map(|(i, &t)| if i == 0 { t } else { modp(-(t as i128)) }).collect()
    };
    let sub = |u: Vec<u64>, v: Vec<u64>| -> Vec<u64> { u.iter().zip(&v).map(|(&s, &t)| modp(s as i128 - t as i128)).collect() };
    let add = |u: Vec<u64>, v: Vec<u64>| -> Vec<u64> { u.iter().zip(&v).map(|(&s, &t)| modp(s as i128 + t as i128)).collect() };
    let mut out = sub(cd_mul(a, c), cd_mul(&conj(d), b));
    out.extend(add(cd_mul(d, a), cd_mul(b, &conj(c))));
    out
}

fn residues(x: &Elem<Fp>) -> Vec<u64> {
    x.coords.iter().map(|c| c.residue()).collect()
}

#[test]
fn doubling_formula_matches_basis_table() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for level in 0..=3 {
        for _ in 0..50 {
            let x = Elem::<Fp>::random(P, level, &mut rng);
            let y = Elem::<Fp>::random(P, level, &mut rng);
            assert_eq!(residues(&x.mul(&y)), cd_mul(&residues(&x), &residues(&y)), "level {level}");
        }
    }
}

#[test]
fn named_units() {
    // i j = k, i l = m, and n = j l in the ordered basis 1, i, j, k, l, m, n, o.
    let e = |i| Elem::<Fp>::basis(P, 3, i);
    assert_eq!(e(1).mul(&e(2)), e(3));
    assert_eq!(e(1).mul(&e(4)), e(5));
    assert_eq!(e(2).mul(&e(4)), e(6));
    assert_eq!(e(3).mul(&e(4)), e(7));
    for i in 1..8 {
        assert_eq!(e(i).mul(&e(i)), e(0).neg());
    }
}

/// Determinant by Gaussian elimination on raw residues.
fn det_oracle(m: &[Vec<u64>]) -> u64 {
    let n = m.len();
    let mut a: Vec<Vec<u128>> = m.iter().map(|r| r.iter().map(|&v| v as u128).collect()).collect();
    let p = P as u128;
    let pow = |mut b: u128, mut e: u128| {
        let mut r = 1u128;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    };
    let mut d = 1u128;
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| a[r][col] != 0) else { return 0 };
        if piv != col {
            a.swap(piv, col);
            d = (p - d) % p;
        }
        d = d * a[col][col] % p;
        let inv = pow(a[col][col], p - 2);
        let pivot = a[col].clone();
        for row in a.iter_mut().skip(col + 1) {
            let f = row[col] * inv % p;
            for (x, &y) in row.iter_mut().zip(&pivot).skip(col) {
                *x = (*x + p * p - f * y) % p;
            }
        }
    }
    d as u64
}

/// Leibniz expansion over all permutations.
fn leibniz(m: &[Vec<i64>]) -> i64 {
    fn perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(n - 1) {
            for k in 0..n {
                let mut q = p.clone();
                q.insert(k, n - 1);
                out.push(q);
            }
        }
        out
    }
    perms(m.len())
        .into_iter()
        .map(|s| {
            let inv = (0..s.len()).flat_map(|i| (i + 1..s.len()).map(move |j| (i, j))).filter(|&(i, j)| s[i] > s[j]).count();
            let prod: i64 = s.iter().enumerate().map(|(r, &c)| m[r][c]).product();
            if inv % 2 == 0 { prod } else { -prod }
        })
        .sum()
}

#[test]
fn determinant_matches_leibniz_and_elimination() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..=6 {
        let ints: Vec<Vec<i64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-9..=9)).collect()).collect();
        let m = DenseMatrix::from_rows(ints.iter().map(|r| r.iter().map(|&v| Fp::new(v, P)).collect()).collect());
        assert_eq!(det(&m), Fp::new(leibniz(&ints), P));
    }
    for n in [10, 24] {
        let m = DenseMatrix::from_fn(n, n, |_, _| Fp::random(P, &mut rng));
        let raw: Vec<Vec<u64>> = (0..n).map(|r| (0..n).map(|c| m[(r, c)].residue()).collect()).collect();
        assert_eq!(det(&m).residue(), det_oracle(&raw));
    }
}

#[test]
fn cartan_cubic_is_ordinary_determinant_over_scalars() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let m = HermitianTriple::<Fp>::random(P, 0, &mut rng);
        let (a, b, c) = (m.a.coords[0], m.b.coords[0], m.c.coords[0]);
        let [l1, l2, l3] = m.lambda;
        let sym = DenseMatrix::from_rows(vec![vec![l1, c, b], vec![c, l2, a], vec![b, a, l3]]);
        assert_eq!(det_cartan(&m), det(&sym));
        let adj = com(&m);
        assert_eq!(adj.lambda[0], l2 * l3 - a * a);
        assert_eq!(adj.c.coords[0], a * b - c * l3);
    }
}

#[test]
fn block_determinants_on_diagonal_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..5 {
        let l = [Fp::random(P, &mut rng), Fp::random(P, &mut rng), Fp::random(P, &mut rng)];
        let m = HermitianTriple::diagonal(l, 3);
        let want = (l[0] * l[1] * l[2]).pow(8);
        assert_eq!(det(&build_m(&m)), want);
        assert_eq!(det(&build_n(&m)), want);
    }
}

#[test]
fn sodm_at_scalar_points() {
    // With scalar off-diagonal entries phi and the associator vanish.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let s = |rng: &mut ChaCha8Rng| Elem::scalar(Fp::random(P, rng), 3);
        let l = [Fp::random(P, &mut rng), Fp::random(P, &mut rng), Fp::random(P, &mut rng)];
        let m = HermitianTriple::new(l, s(&mut rng), s(&mut rng), s(&mut rng));
        assert_eq!(s_odm(&m), det_cartan(&m).square());
    }
}

#[test]
fn twisted_kernel_solves_octonion_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let oct = |v: &[Complex64]| Elem::new(v.to_vec());
    let mut seen = 0;
    for _ in 0..10 {
        let m = sample_on(HypersurfaceId::TwistedCubic, &mut rng).unwrap();
        let [l1, l2, l3] = m.lambda;
        for v in nullspace(&build_n(&m)) {
            let (x, y, z) = (oct(&v[..8]), oct(&v[8..16]), oct(&v[16..]));
            let scale = |e: &Elem<Complex64>, s| e.scale(&s);
            let r1 = scale(&x, l1).add(&y.mul(&m.c)).add(&m.b.conj().mul(&z));
            let r2 = x.mul(&m.c.conj()).add(&scale(&y, l2)).add(&m.a.mul(&z));
            let r3 = m.b.mul(&x).add(&m.a.conj().mul(&y)).add(&scale(&z, l3));
            for r in [r1, r2, r3] {
                let n: f64 = r.coords.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
                assert!(n < 1e-8, "residual {n}");
            }
            seen += 1;
        }
    }
    assert!(seen >= 10);
}

#[test]
fn real_part_of_product_is_symmetric_bilinear_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let x = Elem::<Fp>::random(P, 3, &mut rng);
        let y = Elem::<Fp>::random(P, 3, &mut rng);
        assert_eq!(real_part_of_product(&x, &y), real_part_of_product(&y, &x));
        assert_eq!(real_part_of_product(&x, &y), x.mul(&y).re());
    }
}
