//! JSON encodings. F_p scalars are decimal strings, complex scalars are
//! `[re, im]` pairs. Objects use sorted keys (serde_json's default map).

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::cayley::Elem;
use crate::coeffs::{Fp, Scalar};
use crate::jordan::HermitianTriple;
use crate::linalg::DenseMatrix;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum JsonError {
    #[error("expected {0}")]
    Shape(&'static str),
    #[error("bad scalar: {0}")]
    Scalar(String),
    #[error("entries of a triple must share one level")]
    Level,
}

pub trait JsonScalar: Scalar {
    fn to_json(&self) -> Value;
    fn from_json(v: &Value, ctx: Self::Ctx) -> Result<Self, JsonError>;
}

impl JsonScalar for Fp {
    fn to_json(&self) -> Value {
        Value::String(self.residue().to_string())
    }

    fn from_json(v: &Value, p: u64) -> Result<Self, JsonError> {
        match v {
            Value::String(s) => {
                let t = s.trim();
                if let Some(neg) = t.strip_prefix('-') {
                    let n: u64 = neg.parse().map_err(|_| JsonError::Scalar(s.clone()))?;
                    Ok(-Fp::from_u64(n, p))
                } else {
                    Ok(Fp::from_u64(t.parse().map_err(|_| JsonError::Scalar(s.clone()))?, p))
                }
            }
            Value::Number(n) => n
                .as_i64()
                .map(|i| Fp::new(i, p))
                .or_else(|| n.as_u64().map(|u| Fp::from_u64(u, p)))
                .ok_or_else(|| JsonError::Scalar(n.to_string())),
            other => Err(JsonError::Scalar(other.to_string())),
        }
    }
}

impl JsonScalar for Complex64 {
    fn to_json(&self) -> Value {
        json!([self.re, self.im])
    }

    fn from_json(v: &Value, _: ()) -> Result<Self, JsonError> {
        let num = |x: &Value| x.as_f64().filter(|f| f.is_finite()).ok_or_else(|| JsonError::Scalar(x.to_string()));
        match v {
            Value::Array(a) if a.len() == 2 => Ok(Complex64::new(num(&a[0])?, num(&a[1])?)),
            Value::Number(_) => Ok(Complex64::new(num(v)?, 0.0)),
            other => Err(JsonError::Scalar(other.to_string())),
        }
    }
}

pub fn elem_to_json<S: JsonScalar>(x: &Elem<S>) -> Value {
    Value::Array(x.coords.iter().map(|c| c.to_json()).collect())
}

pub fn elem_from_json<S: JsonScalar>(v: &Value, ctx: S::Ctx) -> Result<Elem<S>, JsonError> {
    let a = v.as_array().ok_or(JsonError::Shape("array of scalars"))?;
    if !matches!(a.len(), 1 | 2 | 4 | 8) {
        return Err(JsonError::Shape("1, 2, 4 or 8 coordinates"));
    }
    Ok(Elem::new(a.iter().map(|x| S::from_json(x, ctx)).collect::<Result<_, _>>()?))
}

pub fn triple_to_json<S: JsonScalar>(m: &HermitianTriple<S>) -> Value {
    json!({
        "level": m.level(),
        "lambda": m.lambda.iter().map(|l| l.to_json()).collect::<Vec<_>>(),
        "a": elem_to_json(&m.a),
        "b": elem_to_json(&m.b),
        "c": elem_to_json(&m.c),
    })
}

/// Accepts the object form or a flat `c, b, a, l1, l2, l3` array.
pub fn triple_from_json<S: JsonScalar>(v: &Value, ctx: S::Ctx) -> Result<HermitianTriple<S>, JsonError> {
    if let Some(arr) = v.as_array() {
        let xs: Vec<S> = arr.iter().map(|x| S::from_json(x, ctx)).collect::<Result<_, _>>()?;
        return HermitianTriple::unflatten(&xs).ok_or(JsonError::Shape("3 * 2^k + 3 flat coordinates"));
    }
    let o = v.as_object().ok_or(JsonError::Shape("object or flat array"))?;
    let get = |k: &'static str| o.get(k).ok_or(JsonError::Shape(k));
    let lam = get("lambda")?.as_array().filter(|a| a.len() == 3).ok_or(JsonError::Shape("lambda of length 3"))?;
    let lambda = [S::from_json(&lam[0], ctx)?, S::from_json(&lam[1], ctx)?, S::from_json(&lam[2], ctx)?];
    let a = elem_from_json(get("a")?, ctx)?;
    let b = elem_from_json(get("b")?, ctx)?;
    let c = elem_from_json(get("c")?, ctx)?;
    if a.dim() != b.dim() || b.dim() != c.dim() {
        return Err(JsonError::Level);
    }
    if let Some(l) = o.get("level") {
        if l.as_u64() != Some(a.level() as u64) {
            return Err(JsonError::Level);
        }
    }
    Ok(HermitianTriple::new(lambda, a, b, c))
}

pub fn matrix_to_json<S: JsonScalar>(m: &DenseMatrix<S>) -> Value {
    Value::Array((0..m.rows).map(|r| Value::Array((0..m.cols).map(|c| m[(r, c)].to_json()).collect())).collect())
}

pub fn matrix_from_json<S: JsonScalar>(v: &Value, ctx: S::Ctx) -> Result<DenseMatrix<S>, JsonError> {
    let rows = v.as_array().ok_or(JsonError::Shape("array of rows"))?;
    let rows: Vec<Vec<S>> = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or(JsonError::Shape("row array"))?
                .iter()
                .map(|x| S::from_json(x, ctx))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(JsonError::Shape("rectangular matrix"));
    }
    Ok(DenseMatrix::from_rows(rows))
}

/// Whether a point document holds complex scalars. F_p scalars are strings,
/// so the first diagonal entry decides.
pub fn looks_complex(v: &Value) -> bool {
    let first = match v {
        Value::Object(o) => o.get("lambda").and_then(|l| l.get(0)),
        Value::Array(a) => a.first(),
        _ => None,
    };
    !matches!(first, Some(Value::String(_)) | None)
}

/// Pretty-printed JSON with sorted keys and a trailing newline.
pub fn canonical(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::MERSENNE_31;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fp_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = HermitianTriple::<Fp>::random(MERSENNE_31, 3, &mut rng);
        let v = triple_to_json(&m);
        assert!(v["a"][0].is_string());
        assert_eq!(triple_from_json::<Fp>(&v, MERSENNE_31).unwrap(), m);
        let flat = Value::Array(m.flatten().iter().map(|x| x.to_json()).collect());
        assert_eq!(triple_from_json::<Fp>(&flat, MERSENNE_31).unwrap(), m);
    }

    #[test]
    fn complex_roundtrip_and_detection() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = HermitianTriple::<Complex64>::random((), 3, &mut rng);
        let v = triple_to_json(&m);
        assert!(looks_complex(&v));
        assert!(!looks_complex(&triple_to_json(&HermitianTriple::<Fp>::identity(7, 3))));
        assert_eq!(triple_from_json::<Complex64>(&v, ()).unwrap(), m);
    }

    #[test]
    fn keys_are_sorted() {
        let s = canonical(&triple_to_json(&HermitianTriple::<Fp>::identity(7, 0)));
        let pos = |k: &str| s.find(&format!("\"{k}\"")).unwrap();
        assert!(pos("a") < pos("b") && pos("b") < pos("c") && pos("c") < pos("lambda") && pos("lambda") < pos("level"));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(triple_from_json::<Fp>(&json!({"lambda": ["1"]}), 7).is_err());
        assert!(triple_from_json::<Fp>(&json!([1, 2, 3]), 7).is_err());
        assert!(Fp::from_json(&json!("x"), 7).is_err());
        assert_eq!(Fp::from_json(&json!("-1"), 7).unwrap(), Fp::new(6, 7));
    }
}
