use octjordan::autdim::poly::{PolyCtx, SparsePoly};
use octjordan::coeffs::{Fp, Scalar};
use octjordan::{DenseMatrix, Elem};

const TABLES: &str = include_str!("fixtures/multiplication_tables.m2");

/// Entries of `name = matrix{{...}}` as `(sign, variable index)`.
fn parse(name: &str) -> Vec<Vec<(i64, usize)>> {
    let start = TABLES
        .lines()
        .position(|l| l.replace(' ', "").starts_with(&format!("{name}=matrix")))
        .unwrap_or_else(|| panic!("table {name} missing"));
    let mut rows = Vec::new();
    for line in TABLES.lines().skip(start).take(8) {
        let body = line.split_once("{{").map_or(line, |(_, b)| b);
        let body = body.trim_start_matches('{').trim_end_matches(',').trim_end_matches('}');
        let row = body
            .split(',')
            .map(|t| {
                let t = t.trim();
                let (sign, v) = t.strip_prefix('-').map_or((1, t), |v| (-1, v));
                let idx: usize = v.strip_prefix("x_").expect("variable").parse().expect("index");
                (sign, idx - 1)
            })
            .collect::<Vec<_>>();
        assert_eq!(row.len(), 8);
        rows.push(row);
    }
    rows
}

fn symbolic_octonion() -> Elem<SparsePoly> {
    let ctx = PolyCtx { nvars: 8, p: 313 };
    Elem::new((0..8).map(|i| SparsePoly::var(ctx, i)).collect())
}

fn compare(m: &DenseMatrix<SparsePoly>, table: &[Vec<(i64, usize)>]) -> usize {
    let ctx = PolyCtx { nvars: 8, p: 313 };
    let mut equal = 0;
    for (r, row) in table.iter().enumerate() {
        for (c, &(sign, v)) in row.iter().enumerate() {
            let want = SparsePoly::var(ctx, v) * SparsePoly::constant(ctx, Fp::new(sign, 313));
            assert_eq!(m[(r, c)], want, "entry ({r}, {c})");
            equal += 1;
        }
    }
    equal
}

#[test]
fn left_multiplication_matches_table() {
    assert_eq!(compare(&symbolic_octonion().left_matrix(), &parse("M")), 64);
}

#[test]
fn right_multiplication_matches_table() {
    assert_eq!(compare(&symbolic_octonion().right_matrix(), &parse("N")), 64);
}

#[test]
fn tables_are_orthogonal_up_to_norm() {
    let x = symbolic_octonion();
    for m in [x.left_matrix(), x.right_matrix()] {
        let g = m.transpose().mul(&m);
        let n = x.norm_sq();
        for r in 0..8 {
            for c in 0..8 {
                let want = if r == c { n.clone() } else { SparsePoly::zero(n.ctx()) };
                assert_eq!(g[(r, c)], want);
            }
        }
    }
}
