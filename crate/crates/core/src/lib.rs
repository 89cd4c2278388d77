//! Octonionic and twisted eigenvalue problems on the exceptional Jordan
//! algebra J3(O): identity testing over prime fields, symmetry actions,
//! degeneracy-locus sampling and the constructive orbit reduction.

pub mod autdim;
pub mod cayley;
pub mod coeffs;
pub mod exec;
pub mod jordan;
pub mod json;
pub mod linalg;
pub mod reduce;
pub mod strata;
pub mod symmetry;
pub mod verify;

pub use cayley::Elem;
pub use coeffs::{Field, Fp, Scalar};
pub use jordan::HermitianTriple;
pub use linalg::DenseMatrix;
pub use num_complex::Complex64;
