//! Fock-space matrix elements of two-mode Gaussian detect operators and the
//! numerical search for their maximal mean over product states.

mod iterate;
mod sweep;

pub use iterate::{
    alternate_maximize, conditional_matrix, random_detect_operator, random_detect_operator_counted,
    random_detect_operator_with, AlternationResult, Mode, ProductStateVec, CONVERGED_M0, DEFAULT_MAX_ROUNDS,
};
pub use sweep::{fig1_sample, sweep_fig1, write_failures_csv, write_fig1_csv, SweepRow, FAILURE_TOL};

use nalgebra::{DMatrix, Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::normalized_series;
use crate::symplectic::{sigma1_kron_identity, to_complex_cm};
use crate::witness::{lambda_product_vacuum, SixParamDetect};

pub const DEFAULT_CUTOFF: usize = 6;
pub const MAX_CUTOFF: usize = 64;
const STATIONARITY_TOL: f64 = 1e-6;

/// `gamma_M` conjugated by the local squeezing `diag(sqrt x, 1/sqrt x, sqrt y, 1/sqrt y)`.
pub fn presqueezed(d: &SixParamDetect, x: f64, y: f64) -> SixParamDetect {
    let [m1, m2, m3, m4, m5, m6] = d.m;
    let s = (x * y).sqrt();
    SixParamDetect::new(m1 / x, m2 * x, m3 / y, m4 * y, m5 / s, m6 * s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaFock {
    pub beta: DMatrix<Complex64>,
    pub sqrt_det_beta: f64,
}

impl BetaFock {
    /// `sigma_1 (x) I + beta`, the quadratic form of the generating function.
    pub fn generating_matrix(&self) -> DMatrix<Complex64> {
        sigma1_kron_identity(self.beta.nrows() / 2) + &self.beta
    }
}

/// `beta = (sigma_3 (x) I)(g/2 + sigma_1 (x) I / 2)^-1 (sigma_3 (x) I)` for
/// the complex covariance matrix `g` of the pre-squeezed detect operator.
pub fn beta_fock(d: &SixParamDetect, x: f64, y: f64) -> Result<BetaFock> {
    let g = presqueezed(d, x, y).to_matrix();
    let gt = to_complex_cm(&g);
    let n = gt.modes();
    let inner = (gt.matrix() + sigma1_kron_identity(n)) * Complex64::new(0.5, 0.0);
    let inv = inner.try_inverse().ok_or(Error::SingularMatrix)?;
    let mut beta = inv;
    for i in 0..2 * n {
        for j in 0..2 * n {
            if (i < n) != (j < n) {
                beta[(i, j)] = -beta[(i, j)];
            }
        }
    }
    let det = beta.determinant();
    if !(det.re > 0.0) {
        return Err(Error::SingularMatrix);
    }
    Ok(BetaFock { beta, sqrt_det_beta: det.re.sqrt() })
}

/// Parameters of the generating function at a stationary squeezing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratingCoeffs {
    pub n: [f64; 4],
    pub sqrt_det_beta: f64,
    pub k: [f64; 6],
    pub x: f64,
    pub y: f64,
    /// Diagonal of `T`, zero at a stationary point.
    pub t_diag: (f64, f64),
}

impl GeneratingCoeffs {
    /// The 4x4 matrix with zero diagonal blocks built from `N1..N4`.
    pub fn to_matrix(&self) -> Matrix4<f64> {
        let [n1, n2, n3, n4] = self.n;
        Matrix4::new(0.0, n1, n2, n3, n1, 0.0, n3, n4, n2, n3, 0.0, n1, n3, n4, n1, 0.0)
    }
}

/// Coefficients at the squeezing that minimizes the product-vacuum
/// determinant.
pub fn generating_coeffs(d: &SixParamDetect) -> Result<GeneratingCoeffs> {
    let lam = lambda_product_vacuum(d)?;
    generating_coeffs_at(d, lam.x, lam.y)
}

pub fn generating_coeffs_at(d: &SixParamDetect, x: f64, y: f64) -> Result<GeneratingCoeffs> {
    let [m1, m2, m3, m4, m5, m6] = d.m;
    let s = (x * y).sqrt();
    let k = [
        0.5 * (m2 * x - m1 / x),
        0.5 * (m2 * x + m1 / x) + 1.0,
        0.5 * (m4 * y - m3 / y),
        0.5 * (m4 * y + m3 / y) + 1.0,
        -0.5 * (s * m6 + m5 / s),
        0.5 * (-s * m6 + m5 / s),
    ];
    let u = Matrix2::new(k[0], k[4], k[4], k[2]);
    let v = Matrix2::new(k[1], k[5], k[5], k[3]);
    let u_inv = u.try_inverse().ok_or(Error::SingularMatrix)?;
    let t = (u - v * u_inv * v).try_inverse().ok_or(Error::SingularMatrix)?;
    let t_diag = (t[(0, 0)], t[(1, 1)]);
    if t_diag.0.abs() > STATIONARITY_TOL || t_diag.1.abs() > STATIONARITY_TOL {
        return Err(Error::StationarityViolated(t_diag.0, t_diag.1));
    }
    let w = u_inv * v * t;
    let n = [2.0 * t[(0, 1)], 1.0 + 2.0 * w[(0, 0)], 2.0 * w[(0, 1)], 1.0 + 2.0 * w[(1, 1)]];
    let mut beta = Matrix4::zeros();
    beta.fixed_view_mut::<2, 2>(0, 0).copy_from(&(2.0 * t));
    beta.fixed_view_mut::<2, 2>(2, 2).copy_from(&(2.0 * t));
    beta.fixed_view_mut::<2, 2>(0, 2).copy_from(&(2.0 * w));
    beta.fixed_view_mut::<2, 2>(2, 0).copy_from(&(2.0 * w.transpose()));
    let det = beta.determinant();
    if !(det > 0.0) {
        return Err(Error::SingularMatrix);
    }
    Ok(GeneratingCoeffs { n, sqrt_det_beta: det.sqrt(), k, x, y, t_diag })
}

/// Matrix elements `M[k1, k2; m1, m2]` for indices below the cutoff; bra
/// indices first.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    cutoff: usize,
    data: Vec<f64>,
    sqrt_det_beta: f64,
    detect: SixParamDetect,
}

impl FockOperator {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn sqrt_det_beta(&self) -> f64 {
        self.sqrt_det_beta
    }

    /// Detect operator whose (pre-squeezed) elements these are.
    pub fn detect(&self) -> &SixParamDetect {
        &self.detect
    }

    #[inline]
    pub fn get(&self, k1: usize, k2: usize, m1: usize, m2: usize) -> f64 {
        let d = self.cutoff;
        self.data[((k1 * d + k2) * d + m1) * d + m2]
    }

    /// `<psi|M|psi>` by direct contraction.
    pub fn expectation(&self, psi: &ProductStateVec) -> f64 {
        let d = self.cutoff;
        let (a, b) = (psi.a(), psi.b());
        let mut acc = Complex64::new(0.0, 0.0);
        for k1 in 0..d.min(a.len()) {
            for k2 in 0..d.min(b.len()) {
                let bra = (a[k1] * b[k2]).conj();
                for m1 in 0..d.min(a.len()) {
                    for m2 in 0..d.min(b.len()) {
                        acc += bra * self.get(k1, k2, m1, m2) * a[m1] * b[m2];
                    }
                }
            }
        }
        acc.re
    }

    /// `sum_k M[k1, k2; k1, k2]` over the truncated basis.
    pub fn trace(&self) -> f64 {
        let d = self.cutoff;
        (0..d).flat_map(|i| (0..d).map(move |j| (i, j))).map(|(i, j)| self.get(i, j, i, j)).sum()
    }
}

/// Elements of the detect operator pre-squeezed with `(x, y)`.
pub fn fock_elements_at(d: &SixParamDetect, x: f64, y: f64, cutoff: usize) -> Result<FockOperator> {
    if cutoff == 0 || cutoff > MAX_CUTOFF {
        return Err(Error::InvalidArgument(format!("cutoff must be in 1..={MAX_CUTOFF}, got {cutoff}")));
    }
    let bf = beta_fock(d, x, y)?;
    let series = normalized_series(&bf.generating_matrix(), &[cutoff; 4]);
    let data = series.data().iter().map(|v| bf.sqrt_det_beta * v.re).collect();
    Ok(FockOperator { cutoff, data, sqrt_det_beta: bf.sqrt_det_beta, detect: presqueezed(d, x, y) })
}

/// Elements of the detect operator pre-squeezed at the minimizer of the
/// product-vacuum determinant.
pub fn fock_elements(d: &SixParamDetect, cutoff: usize) -> Result<FockOperator> {
    let lam = lambda_product_vacuum(d)?;
    fock_elements_at(d, lam.x, lam.y, cutoff)
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

/// Normalized mean `<psi|M|psi> / sqrt(det beta)` from the six-index
/// expansion of the generating function; the state vectors set the
/// truncation.
pub fn m0_eval(g: &GeneratingCoeffs, psi: &ProductStateVec) -> f64 {
    let (a, b) = (psi.a(), psi.b());
    let (da, db) = (a.len(), b.len());
    let lf = ln_factorials(da.max(db) + 1);
    let [n1, n2, n3, n4] = g.n;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..da.min(db) {
        for j in 0..da.min(db) {
            for k in 0..da {
                for m in 0..da {
                    let k1 = k + m + i;
                    let m2_base = m + j;
                    if k1 >= da || m2_base >= db {
                        continue;
                    }
                    for n in 0..db {
                        let k2_base = n + i;
                        let m1 = k + n + j;
                        if k2_base >= db || m1 >= da {
                            continue;
                        }
                        for l in 0..db {
                            let k2 = k2_base + l;
                            let m2 = m2_base + l;
                            if k2 >= db || m2 >= db {
                                break;
                            }
                            let log_ratio = 0.5 * (lf[k1] + lf[k2] + lf[m1] + lf[m2])
                                - (lf[k] + lf[l] + lf[m] + lf[n] + lf[i] + lf[j]);
                            let pw = n1.powi((i + j) as i32)
                                * n2.powi(k as i32)
                                * n3.powi((m + n) as i32)
                                * n4.powi(l as i32);
                            if pw == 0.0 {
                                continue;
                            }
                            let amp = (a[k1] * b[k2]).conj() * a[m1] * b[m2];
                            acc += amp * pw * log_ratio.exp();
                        }
                    }
                }
            }
        }
    }
    acc.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::overlap_matrices;
    use crate::witness::{stationarity_residuals, PositivityMode};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn coherent(alpha: Complex64, d: usize) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(d);
        let mut amp = c((-0.5 * alpha.norm_sqr()).exp(), 0.0);
        for k in 0..d {
            out.push(amp);
            amp = amp * alpha / ((k + 1) as f64).sqrt();
        }
        out
    }

    /// `<alpha, beta| M |alpha, beta>` from the Gaussian overlap with a
    /// displaced vacuum.
    fn coherent_oracle(g: &DMatrix<f64>, alpha: Complex64, beta: Complex64) -> f64 {
        let s = g + DMatrix::identity(4, 4);
        let delta = nalgebra::DVector::from_vec(vec![alpha.re, alpha.im, beta.re, beta.im]) * 2f64.sqrt();
        let quad = (delta.transpose() * s.clone().try_inverse().unwrap() * &delta)[(0, 0)];
        4.0 / s.determinant().sqrt() * (-quad).exp()
    }

    #[test]
    fn vacuum_operator_is_the_vacuum_projector() {
        let d = SixParamDetect::new(1.0, 1.0, 1.0, 1.0, 0.0, 0.0);
        let bf = beta_fock(&d, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(bf.sqrt_det_beta, 1.0, epsilon = 1e-14);
        let expect = -sigma1_kron_identity(2);
        assert!((bf.beta - expect).camax() < 1e-14);
        let op = fock_elements_at(&d, 1.0, 1.0, 4).unwrap();
        assert_abs_diff_eq!(op.get(0, 0, 0, 0), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(op.trace(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn uncoupled_beta_is_block_diagonal_per_mode() {
        let d = SixParamDetect::new(2.0, 3.0, 1.5, 4.0, 0.0, 0.0);
        let bf = beta_fock(&d, 0.8, 1.3).unwrap();
        // entries coupling mode 1 to mode 2 (either operator type) vanish
        for (i, j) in [(0, 1), (0, 3), (2, 1), (2, 3)] {
            assert_eq!(bf.beta[(i, j)].norm(), 0.0);
            assert_eq!(bf.beta[(j, i)].norm(), 0.0);
        }
    }

    #[test]
    fn sqrt_det_beta_is_the_vacuum_overlap() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..30 {
            let d = random_detect_operator_with(&mut rng);
            let (x, y) = (rng.gen_range(0.3..3.0), rng.gen_range(0.3..3.0));
            let bf = beta_fock(&d, x, y).unwrap();
            let g = d.to_matrix() + DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![x, 1.0 / x, y, 1.0 / y]));
            assert_abs_diff_eq!(bf.sqrt_det_beta, 4.0 / g.determinant().sqrt(), epsilon = 1e-9);
        }
    }

    #[test]
    fn elements_match_coherent_state_oracle() {
        let d = SixParamDetect::new(2.0, 3.0, 1.5, 2.5, 0.7, -0.4);
        let op = fock_elements_at(&d, 1.0, 1.0, 22).unwrap();
        let g = d.to_matrix();
        for (al, be) in [(c(0.3, 0.2), c(-0.1, 0.4)), (c(0.0, 0.5), c(0.2, 0.0)), (c(-0.6, 0.1), c(0.3, -0.3))] {
            let psi = ProductStateVec::from_unnormalized(coherent(al, 22), coherent(be, 22));
            assert_abs_diff_eq!(op.expectation(&psi), coherent_oracle(&g, al, be), epsilon = 1e-9);
        }
    }

    #[test]
    fn presqueezed_elements_match_oracle() {
        let d = SixParamDetect::new(1.2, 2.8, 3.1, 0.9, -0.6, 0.8);
        let (x, y) = (0.7, 1.6);
        let op = fock_elements_at(&d, x, y, 22).unwrap();
        let g = presqueezed(&d, x, y).to_matrix();
        let (al, be) = (c(0.25, -0.35), c(-0.4, 0.1));
        let psi = ProductStateVec::from_unnormalized(coherent(al, 22), coherent(be, 22));
        assert_abs_diff_eq!(op.expectation(&psi), coherent_oracle(&g, al, be), epsilon = 1e-9);
    }

    #[test]
    fn trace_converges_to_one() {
        let d = SixParamDetect::new(2.0, 3.0, 1.5, 2.5, 0.7, -0.4);
        let op = fock_elements(&d, 30).unwrap();
        // Tr M = chi_M(0) = 1
        assert_abs_diff_eq!(op.trace(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn vacuum_element_and_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = random_detect_operator_with(&mut rng);
        let op = fock_elements(&d, 6).unwrap();
        assert_abs_diff_eq!(op.get(0, 0, 0, 0), op.sqrt_det_beta(), epsilon = 1e-15);
        for k1 in 0..6 {
            for k2 in 0..6 {
                for m1 in 0..6 {
                    for m2 in 0..6 {
                        let v = op.get(k1, k2, m1, m2);
                        if (k1 + k2 + m1 + m2) % 2 == 1 {
                            assert_eq!(v, 0.0);
                        }
                        assert_abs_diff_eq!(v, op.get(m1, m2, k1, k2), epsilon = 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn elements_do_not_depend_on_cutoff() {
        let d = SixParamDetect::new(2.0, 1.0, 3.0, 1.5, 0.5, 0.3);
        let (small, large) = (fock_elements(&d, 6).unwrap(), fock_elements(&d, 8).unwrap());
        for idx in 0..6usize.pow(4) {
            let (k1, k2, m1, m2) = (idx / 216, idx / 36 % 6, idx / 6 % 6, idx % 6);
            assert_eq!(small.get(k1, k2, m1, m2), large.get(k1, k2, m1, m2));
        }
    }

    #[test]
    fn generating_coeffs_match_beta() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let d = random_detect_operator_with(&mut rng);
            let g = generating_coeffs(&d).unwrap();
            let (r1, r2) = stationarity_residuals(&d, g.x, g.y);
            assert!(r1.abs() < 1e-6 && r2.abs() < 1e-6);
            let bf = beta_fock(&d, g.x, g.y).unwrap();
            let a = bf.generating_matrix();
            let n = g.to_matrix();
            for i in 0..4 {
                for j in 0..4 {
                    assert_abs_diff_eq!(a[(i, j)].re, n[(i, j)], epsilon = 1e-9);
                    assert_abs_diff_eq!(a[(i, j)].im, 0.0, epsilon = 1e-12);
                }
            }
            assert_abs_diff_eq!(g.sqrt_det_beta, bf.sqrt_det_beta, epsilon = 1e-9);
        }
    }

    #[test]
    fn generating_coeffs_symmetric_and_uncoupled() {
        let d = SixParamDetect::new(2.5, 2.5, 2.5, 2.5, 1.0, 1.0);
        let g = generating_coeffs(&d).unwrap();
        assert_abs_diff_eq!(g.x, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g.y, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g.k[0], g.k[2], epsilon = 1e-9);
        assert_abs_diff_eq!(g.k[1], g.k[3], epsilon = 1e-9);

        let d = SixParamDetect::new(2.0, 3.0, 1.5, 2.5, 0.0, 0.0);
        let g = generating_coeffs(&d).unwrap();
        assert_eq!((g.k[4], g.k[5]), (0.0, 0.0));
        assert_abs_diff_eq!(g.n[0], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.n[2], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn off_stationary_point_is_rejected() {
        let d = SixParamDetect::new(2.0, 3.0, 1.5, 2.5, 0.7, -0.4);
        assert!(matches!(generating_coeffs_at(&d, 2.0, 0.5), Err(Error::StationarityViolated(_, _))));
    }

    #[test]
    fn m0_examples() {
        let d = SixParamDetect::new(2.0, 3.0, 1.5, 2.5, 0.7, -0.4);
        let g = generating_coeffs(&d).unwrap();
        assert_abs_diff_eq!(m0_eval(&g, &ProductStateVec::vacuum(6)), 1.0, epsilon = 1e-15);

        let mut zero = g;
        zero.n = [0.0; 4];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let psi = ProductStateVec::random(&mut rng, 6);
        let expect = psi.a()[0].norm_sqr() * psi.b()[0].norm_sqr();
        assert_abs_diff_eq!(m0_eval(&zero, &psi), expect, epsilon = 1e-15);
    }

    #[test]
    fn m0_matches_tensor_contraction() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..20 {
            let d = random_detect_operator_with(&mut rng);
            let g = generating_coeffs(&d).unwrap();
            let op = fock_elements_at(&d, g.x, g.y, 6).unwrap();
            let psi = ProductStateVec::random(&mut rng, 6);
            assert_abs_diff_eq!(m0_eval(&g, &psi), op.expectation(&psi) / op.sqrt_det_beta(), epsilon = 1e-8);
        }
    }

    #[test]
    fn psd_detectors_have_vacuum_overlap_lambda() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = random_detect_operator_with(&mut rng);
        d.check(PositivityMode::Psd).unwrap();
        let op = fock_elements(&d, 4).unwrap();
        let lam = lambda_product_vacuum(&d).unwrap();
        assert_abs_diff_eq!(op.sqrt_det_beta(), lam.lambda, epsilon = 1e-9);
        let g = presqueezed(&d, lam.x, lam.y).to_matrix();
        assert_abs_diff_eq!(overlap_matrices(&g, &DMatrix::identity(4, 4)).unwrap(), lam.lambda, epsilon = 1e-9);
    }
}
