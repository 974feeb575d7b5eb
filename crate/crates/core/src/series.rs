//! Taylor coefficients of `exp(v^T A v / 2)` for a symmetric matrix `A`.
//!
//! Stores `e(n) = sqrt(n!) c(n)` where `c(n)` is the coefficient of `v^n`;
//! this scaling keeps entries of order one for the matrix elements of
//! Gaussian operators. From `d/dv_j exp(...) = (A v)_j exp(...)`:
//!
//! `e(n) = sum_l A_jl sqrt(n'_l / n_j) e(n - e_j - e_l)`, `n' = n - e_j`.

use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTensor {
    dims: Vec<usize>,
    strides: Vec<usize>,
    data: Vec<Complex64>,
}

impl SeriesTensor {
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn offset(&self, n: &[usize]) -> usize {
        n.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    /// `sqrt(n!) c(n)`; zero outside the computed range.
    pub fn get(&self, n: &[usize]) -> Complex64 {
        if n.iter().zip(&self.dims).any(|(a, d)| a >= d) {
            return Complex64::new(0.0, 0.0);
        }
        self.data[self.offset(n)]
    }

    /// Mixed partial derivative `d^n / dv^n` at the origin, `n! c(n)`.
    pub fn derivative(&self, n: &[usize]) -> Complex64 {
        let f: f64 = n.iter().map(|&k| (1..=k).map(|v| v as f64).product::<f64>()).product();
        self.get(n) * f.sqrt()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }
}

/// Coefficients for all multi-indices with `n_j < dims[j]`.
pub fn normalized_series(a: &DMatrix<Complex64>, dims: &[usize]) -> SeriesTensor {
    let k = dims.len();
    assert_eq!(a.nrows(), k, "matrix size must match the number of variables");
    let mut strides = vec![1; k];
    for j in (0..k.saturating_sub(1)).rev() {
        strides[j] = strides[j + 1] * dims[j + 1];
    }
    let total: usize = dims.iter().product();
    let mut data = vec![Complex64::new(0.0, 0.0); total];
    if total == 0 {
        return SeriesTensor { dims: dims.to_vec(), strides, data };
    }
    data[0] = Complex64::new(1.0, 0.0);
    let mut n = vec![0usize; k];
    for flat in 1..total {
        // advance the multi-index in row-major order
        let mut pos = k - 1;
        loop {
            n[pos] += 1;
            if n[pos] < dims[pos] {
                break;
            }
            n[pos] = 0;
            pos -= 1;
        }
        let j = n.iter().position(|&v| v > 0).expect("non-zero index");
        let nj = n[j] as f64;
        let base = flat - strides[j];
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..k {
            let nl = if l == j { n[j] - 1 } else { n[l] };
            if nl == 0 {
                continue;
            }
            let coef = a[(j, l)];
            if coef == Complex64::new(0.0, 0.0) {
                continue;
            }
            acc += coef * (nl as f64 / nj).sqrt() * data[base - strides[l]];
        }
        data[flat] = acc;
    }
    SeriesTensor { dims: dims.to_vec(), strides, data }
}
