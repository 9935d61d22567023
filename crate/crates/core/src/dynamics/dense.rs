use matrixmultiply::{zgemm, CGemmOption};

use crate::quantum::C64;

/// `c = a · b` for row-major `a: m×p`, `b: p×n`.
pub(crate) fn matmul(m: usize, p: usize, n: usize, a: &[C64], b: &[C64], c: &mut [C64]) {
    assert!(a.len() >= m * p && b.len() >= p * n && c.len() >= m * n);
    // SAFETY: Complex64 is repr(C) {re, im}, layout-identical to [f64; 2];
    // the slices are large enough for the given shapes and strides.
    unsafe {
        zgemm(
            CGemmOption::Standard,
            CGemmOption::Standard,
            m,
            p,
            n,
            [1.0, 0.0],
            a.as_ptr() as *const [f64; 2],
            p as isize,
            1,
            b.as_ptr() as *const [f64; 2],
            n as isize,
            1,
            [0.0, 0.0],
            c.as_mut_ptr() as *mut [f64; 2],
            n as isize,
            1,
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn matches_nalgebra() {
        let (m, p, n) = (7, 5, 3);
        let a = DMatrix::<C64>::from_fn(m, p, |i, j| C64::new(i as f64 - j as f64, (i * j) as f64 * 0.1));
        let b = DMatrix::<C64>::from_fn(p, n, |i, j| C64::new((i + 2 * j) as f64, -(i as f64)));
        let row = |x: &DMatrix<C64>| -> Vec<C64> { x.transpose().iter().copied().collect() };
        let mut c = vec![C64::new(0.0, 0.0); m * n];
        matmul(m, p, n, &row(&a), &row(&b), &mut c);
        let want = row(&(&a * &b));
        for (x, y) in c.iter().zip(&want) {
            assert!((x - y).norm() < 1e-12);
        }
    }
}
