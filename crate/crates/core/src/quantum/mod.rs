//! Complex operator algebra on tensor-product Hilbert spaces of one or two
//! multilevel atoms.
//!
//! Basis ordering is site-1-major: for a two-site space with per-site level
//! counts `d1` and `d2`, the product basis state `|i1 i2>` has index
//! `i1 * d2 + i2`.

mod level;
mod operator;
mod space;
mod sparse;
mod state;

pub use level::Level;
pub use operator::{tensor_product, transition_operator, Operator};
pub use space::HilbertSpace;
pub use sparse::CsrMatrix;
pub use state::{expectation, DensityMatrix, StateVector};

pub use num_complex::Complex64 as C64;

/// Largest Hilbert-space dimension accepted by the tensor product.
pub const MAX_DIM: usize = 10_000;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Largest entrywise modulus of `a - a^dagger`.
pub fn hermiticity_defect(a: &nalgebra::DMatrix<C64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    worst
}
