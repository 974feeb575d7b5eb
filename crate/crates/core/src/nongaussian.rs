//! Photon-added and photon-subtracted Gaussian states
//! `rho = N a^dagger^k a^m rho_G a^dagger^m a^k` and their overlap with
//! Gaussian detect operators.
//!
//! `rho` is a mixed derivative of
//! `Q = exp(eps a^dagger) exp(xi a) rho_G exp(eta a^dagger) exp(zeta a)`
//! at zero, and `Tr(Q M)` is a Gaussian in `(eps, xi, eta, zeta)`, so every
//! trace reduces to Taylor coefficients of quadratic exponentials.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::criteria::{squeezed_thermal, symmetric_two_mode, CriterionId, Verdict};
use crate::error::{Error, Result};
use crate::series::normalized_series;
use crate::symplectic::{
    overlap_matrices, sigma1_kron_identity, standard_form, to_complex_cm, CovarianceMatrix, StandardForm, SYM_TOL,
};
use crate::witness::minimize_L;

/// Largest supported photon count per mode and operation.
pub const MAX_COUNT: usize = 2;
const FAMILY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NGPASGSpec {
    pub kernel: CovarianceMatrix,
    /// Photons added per mode.
    pub adds: Vec<usize>,
    /// Photons subtracted per mode.
    pub subs: Vec<usize>,
}

impl NGPASGSpec {
    pub fn new(kernel: CovarianceMatrix, adds: Vec<usize>, subs: Vec<usize>) -> Result<Self> {
        let n = kernel.modes();
        for counts in [&adds, &subs] {
            if counts.len() != n {
                return Err(Error::ModeMismatch(counts.len(), n));
            }
        }
        Ok(Self { kernel, adds, subs })
    }

    pub fn modes(&self) -> usize {
        self.kernel.modes()
    }

    fn check_counts(&self) -> Result<()> {
        let n = self.modes();
        for counts in [&self.adds, &self.subs] {
            if counts.len() != n {
                return Err(Error::ModeMismatch(counts.len(), n));
            }
            if let Some(&c) = counts.iter().find(|&&c| c > MAX_COUNT) {
                return Err(Error::UnsupportedOrder(c));
            }
        }
        Ok(())
    }

    /// Derivative orders in the variable order `(eps, xi, eta, zeta)`.
    fn orders(&self) -> Vec<usize> {
        [&self.adds, &self.subs, &self.subs, &self.adds].into_iter().flatten().copied().collect()
    }
}

/// Two-mode squeezed thermal kernel with thermal photon number `n_th` and
/// squeezing `r`.
pub fn squeezed_thermal_kernel(n_th: f64, r: f64) -> Result<CovarianceMatrix> {
    if !(n_th >= 0.0) {
        return Err(Error::InvalidArgument(format!("thermal photon number {n_th} is negative")));
    }
    let s = 2.0 * n_th + 1.0;
    let (a, c) = (s * (2.0 * r).cosh(), s * (2.0 * r).sinh());
    StandardForm::new(a, a, c, c)?.to_cm()
}

/// Squeezing at which the photon-added two-mode squeezed thermal state
/// becomes entangled: `tanh r = N / (N + 1)`.
pub fn fig2a_boundary(n_th: f64) -> Result<f64> {
    if !(n_th >= 0.0) {
        return Err(Error::InvalidArgument(format!("thermal photon number {n_th} is negative")));
    }
    Ok((n_th / (n_th + 1.0)).atanh())
}

/// `gamma_G +/- sigma_1 (x) I` together with the values of the generating
/// function at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct QEvaluation {
    pub g_plus: DMatrix<Complex64>,
    pub g_minus: DMatrix<Complex64>,
    /// `chi_Q` at zero displacement.
    pub chi_q: Complex64,
    /// Exponent picked up from the overlap with the detect operator; zero
    /// when no detect operator is given.
    pub f: Complex64,
}

fn shifted_ccms(kernel: &DMatrix<f64>) -> (DMatrix<Complex64>, DMatrix<Complex64>, DMatrix<Complex64>) {
    let n = kernel.nrows() / 2;
    let g = to_complex_cm(kernel).matrix().clone();
    let s1 = sigma1_kron_identity(n);
    (&g + &s1, &g - &s1, g)
}

fn stack(top: &[f64], bottom: &[f64]) -> DVector<Complex64> {
    DVector::from_iterator(top.len() + bottom.len(), top.iter().chain(bottom).map(|&v| Complex64::new(v, 0.0)))
}

fn bilinear(u: &DVector<Complex64>, g: &DMatrix<Complex64>, w: &DVector<Complex64>) -> Complex64 {
    (u.transpose() * g * w)[(0, 0)]
}

fn check_detect(kernel: &CovarianceMatrix, gamma_m: &DMatrix<f64>) -> Result<()> {
    let dim = 2 * kernel.modes();
    if gamma_m.shape() != (dim, dim) {
        return Err(Error::ModeMismatch(gamma_m.nrows() / 2, kernel.modes()));
    }
    let asym = (gamma_m - gamma_m.transpose()).amax();
    if asym > SYM_TOL * gamma_m.amax().max(1.0) {
        return Err(Error::NotSymmetric(asym));
    }
    Ok(())
}

/// Evaluates the generating function and, with a detect operator, the
/// exponent `f` at `(eps, xi, eta, zeta)`.
pub fn q_evaluate(
    kernel: &CovarianceMatrix,
    gamma_m: Option<&DMatrix<f64>>,
    eps: &[f64],
    xi: &[f64],
    eta: &[f64],
    zeta: &[f64],
) -> Result<QEvaluation> {
    let n = kernel.modes();
    for v in [eps, xi, eta, zeta] {
        if v.len() != n {
            return Err(Error::ModeMismatch(v.len(), n));
        }
    }
    let (g_plus, g_minus, g) = shifted_ccms(kernel.matrix());
    let neg = |v: &[f64]| v.iter().map(|x| -x).collect::<Vec<_>>();
    let u = stack(eps, &neg(zeta));
    let w = stack(eta, &neg(xi));
    let quarter = Complex64::new(0.25, 0.0);
    let chi_q = (-(bilinear(&u, &g_plus, &u) * quarter)
        - bilinear(&u, &g_minus, &w) * 0.5
        - bilinear(&w, &g_minus, &w) * quarter)
        .exp();
    let f = match gamma_m {
        None => Complex64::new(0.0, 0.0),
        Some(m) => {
            check_detect(kernel, m)?;
            let s = g + to_complex_cm(m).matrix();
            let s_inv = s.try_inverse().ok_or(Error::SingularSum(0.0))?;
            let v = &g_plus * &u + &g_minus * &w;
            bilinear(&v, &s_inv, &v) * quarter
        }
    };
    Ok(QEvaluation { g_plus, g_minus, chi_q, f })
}

/// `chi_Q(0, eps, xi, eta, zeta)` of the kernel.
pub fn q_char_zero(kernel: &CovarianceMatrix, eps: &[f64], xi: &[f64], eta: &[f64], zeta: &[f64]) -> Result<Complex64> {
    Ok(q_evaluate(kernel, None, eps, xi, eta, zeta)?.chi_q)
}

/// Matrices `A` with `log chi_Q = v^T A v / 2` and `f = v^T A_f v / 2` over
/// `v = (eps, xi, eta, zeta)`.
fn exponent_forms(
    kernel: &DMatrix<f64>,
    gamma_m: Option<&DMatrix<f64>>,
) -> Result<(DMatrix<Complex64>, Option<DMatrix<Complex64>>)> {
    let n = kernel.nrows() / 2;
    let (g_plus, g_minus, g) = shifted_ccms(kernel);
    let one = Complex64::new(1.0, 0.0);
    // u = (eps, -zeta), w = (eta, -xi)
    let mut pu = DMatrix::zeros(2 * n, 4 * n);
    let mut pw = DMatrix::zeros(2 * n, 4 * n);
    for j in 0..n {
        pu[(j, j)] = one;
        pu[(n + j, 3 * n + j)] = -one;
        pw[(j, 2 * n + j)] = one;
        pw[(n + j, n + j)] = -one;
    }
    let half = Complex64::new(0.5, 0.0);
    let cross = pu.transpose() * &g_minus * &pw;
    let a0 = -(pu.transpose() * &g_plus * &pu + &cross + cross.transpose() + pw.transpose() * &g_minus * &pw) * half;
    let a0 = (&a0 + a0.transpose()) * half;
    let af = match gamma_m {
        None => None,
        Some(m) => {
            let s = g + to_complex_cm(m).matrix();
            let s_inv = s.try_inverse().ok_or(Error::SingularSum(0.0))?;
            let b = &g_plus * &pu + &g_minus * &pw;
            let af = b.transpose() * s_inv * b * half;
            Some((&af + af.transpose()) * half)
        }
    };
    Ok((a0, af))
}

fn coefficient(a: &DMatrix<Complex64>, orders: &[usize]) -> Complex64 {
    let dims: Vec<usize> = orders.iter().map(|k| k + 1).collect();
    normalized_series(a, &dims).derivative(orders)
}

/// `1 / O chi_Q(0, ...)`, the normalization of the photon-added state.
pub fn normalization(s: &NGPASGSpec) -> Result<f64> {
    s.check_counts()?;
    let (a0, _) = exponent_forms(s.kernel.matrix(), None)?;
    let d = coefficient(&a0, &s.orders());
    if !(d.re > 0.0) {
        return Err(Error::NotPositive(format!("photon-number weight {d}")));
    }
    Ok(1.0 / d.re)
}

/// `Tr(rho M)` for the Gaussian detect operator with covariance matrix
/// `gamma_m`, normalized so that `Tr M = 1`.
pub fn ngpasg_trace_finite(s: &NGPASGSpec, gamma_m: &DMatrix<f64>) -> Result<f64> {
    s.check_counts()?;
    check_detect(&s.kernel, gamma_m)?;
    let overlap = overlap_matrices(s.kernel.matrix(), gamma_m)?;
    let orders = s.orders();
    if orders.iter().all(|&k| k == 0) {
        return Ok(overlap);
    }
    let (a0, af) = exponent_forms(s.kernel.matrix(), Some(gamma_m))?;
    let af = af.expect("detect operator given");
    let den = coefficient(&a0, &orders);
    if !(den.re > 0.0) {
        return Err(Error::NotPositive(format!("photon-number weight {den}")));
    }
    let num = coefficient(&(a0 + af), &orders);
    Ok((num / den).re * overlap)
}

/// Value of [`ngpasg_trace_finite`] for a detect operator with diverging
/// parameters: the kernel overlap, whatever the photon counts.
pub fn ngpasg_trace_limit(s: &NGPASGSpec, gamma_m: &DMatrix<f64>) -> Result<f64> {
    check_detect(&s.kernel, gamma_m)?;
    overlap_matrices(s.kernel.matrix(), gamma_m)
}

/// Separability test of a two-mode photon-added/subtracted state through its
/// kernel. Adding or subtracting photons is local, so the verdict is that
/// of the kernel for every photon count.
pub fn photon_added_criterion(s: &NGPASGSpec) -> Result<Verdict> {
    if s.modes() != 2 {
        return Err(Error::ModeMismatch(s.modes(), 2));
    }
    let sf = standard_form(&s.kernel)?;
    let scale = sf.a.abs().max(sf.b.abs()).max(1.0);
    if (sf.c1 - sf.c2).abs() <= FAMILY_TOL * scale {
        return Ok(squeezed_thermal(sf.a, sf.b, 0.5 * (sf.c1 + sf.c2)));
    }
    if (sf.a - sf.b).abs() <= FAMILY_TOL * scale {
        return Ok(symmetric_two_mode(sf.a, sf.c1, sf.c2));
    }
    let res = minimize_L(&s.kernel).map_err(|_| Error::UnclassifiedKernel)?;
    Ok(Verdict::new(CriterionId::WitnessRatio, res.value - 1.0))
}
