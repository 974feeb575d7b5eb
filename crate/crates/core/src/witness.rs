//! Gaussian detect operators and the witness quantities built from them:
//! the two-fold kernel, the extremal local covariance matrices, the product
//! state bound and the determinant ratio test.

use nalgebra::{DMatrix, Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symplectic::{
    min_eigenvalue, min_physical_eigenvalue, standard_form, CovarianceMatrix, StandardForm, PSD_TOL,
};

pub const OMEGA_TOL: f64 = 1e-9;
pub const FIXED_POINT_TOL: f64 = 1e-12;
pub const FIXED_POINT_MAX_ITER: usize = 10_000;
pub const DEFAULT_SCHEDULE: [f64; 3] = [1e2, 1e3, 1e4];
const GRID_MISMATCH_TOL: f64 = 1e-6;
const INIT_GRID_POINTS: usize = 41;

/// Which positivity condition a detect operator is required to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositivityMode {
    /// `gamma_M >= 0`.
    Psd,
    /// `gamma_M + i sigma >= 0`.
    Physical,
}

/// Two-mode detect operator with covariance matrix
///
/// ```text
/// M1  0   M5  0
/// 0   M2  0  -M6
/// M5  0   M3  0
/// 0  -M6  0   M4
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SixParamDetect {
    pub m: [f64; 6],
}

impl SixParamDetect {
    pub fn new(m1: f64, m2: f64, m3: f64, m4: f64, m5: f64, m6: f64) -> Self {
        Self { m: [m1, m2, m3, m4, m5, m6] }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        let [m1, m2, m3, m4, m5, m6] = self.m;
        DMatrix::from_row_slice(4, 4, &[m1, 0.0, m5, 0.0, 0.0, m2, 0.0, -m6, m5, 0.0, m3, 0.0, 0.0, -m6, 0.0, m4])
    }

    /// Smallest eigenvalue relevant to `mode`.
    pub fn positivity_margin(&self, mode: PositivityMode) -> f64 {
        let g = self.to_matrix();
        match mode {
            PositivityMode::Psd => min_eigenvalue(&g),
            PositivityMode::Physical => min_physical_eigenvalue(&g),
        }
    }

    pub fn check(&self, mode: PositivityMode) -> Result<()> {
        let margin = self.positivity_margin(mode);
        if margin < -PSD_TOL {
            let what = match mode {
                PositivityMode::Psd => "gamma_M",
                PositivityMode::Physical => "gamma_M + i sigma",
            };
            return Err(Error::NotPositive(format!("{what} has eigenvalue {margin:e}")));
        }
        Ok(())
    }

    /// Exchanges the roles of the two modes.
    pub fn swapped(&self) -> Self {
        let [m1, m2, m3, m4, m5, m6] = self.m;
        Self::new(m3, m4, m1, m2, m5, m6)
    }

    /// Multiplies every entry by `lambda`.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self { m: self.m.map(|v| v * lambda) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OmegaMembership {
    pub residual_a: f64,
    pub residual_b: f64,
}

impl OmegaMembership {
    pub fn is_member(&self) -> bool {
        self.residual_a < OMEGA_TOL && self.residual_b < OMEGA_TOL
    }
}

pub fn omega_residuals(d: &SixParamDetect) -> OmegaMembership {
    let [m1, m2, m3, m4, m5, m6] = d.m;
    OmegaMembership {
        residual_a: (m1 * m2 - m3 * m4).abs(),
        residual_b: ((m1 * m3 - m5 * m5) * (m2 * m4 - m6 * m6) - 1.0).abs(),
    }
}

/// Blocks `gamma_1` (party A), `gamma_2` (party B) and the coupling
/// `gamma_3` of a detect operator whose first `2 modes_a` quadratures belong
/// to party A.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectBlocks {
    pub g1: DMatrix<f64>,
    pub g2: DMatrix<f64>,
    pub g3: DMatrix<f64>,
}

impl DetectBlocks {
    pub fn split(gamma_m: &DMatrix<f64>, modes_a: usize) -> Result<Self> {
        let n = gamma_m.nrows();
        if !gamma_m.is_square() {
            return Err(Error::NotSquare { rows: n, cols: gamma_m.ncols() });
        }
        let ka = 2 * modes_a;
        if n % 2 != 0 || ka == 0 || ka >= n {
            return Err(Error::InvalidPartition(format!("{modes_a} modes of a {n}x{n} matrix")));
        }
        let kb = n - ka;
        Ok(Self {
            g1: gamma_m.view((0, 0), (ka, ka)).into_owned(),
            g2: gamma_m.view((ka, ka), (kb, kb)).into_owned(),
            g3: gamma_m.view((0, ka), (ka, kb)).into_owned(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoFoldKernelCM {
    pub zeta: DMatrix<f64>,
    pub omega: DMatrix<f64>,
    pub gamma_2m: DMatrix<f64>,
}

/// Kernel obtained by integrating out party B from two copies of the detect
/// operator's characteristic function.
pub fn two_fold_kernel(gamma_m: &DMatrix<f64>, modes_a: usize) -> Result<TwoFoldKernelCM> {
    let DetectBlocks { g1, g2, g3 } = DetectBlocks::split(gamma_m, modes_a)?;
    let g2_inv = g2.try_inverse().ok_or(Error::SingularGamma2)?;
    let omega = -0.5 * &g3 * g2_inv * g3.transpose();
    let zeta = &g1 + &omega;
    let k = zeta.nrows();
    let mut gamma_2m = DMatrix::zeros(2 * k, 2 * k);
    gamma_2m.view_mut((0, 0), (k, k)).copy_from(&zeta);
    gamma_2m.view_mut((k, k), (k, k)).copy_from(&zeta);
    gamma_2m.view_mut((0, k), (k, k)).copy_from(&omega);
    gamma_2m.view_mut((k, 0), (k, k)).copy_from(&omega);
    Ok(TwoFoldKernelCM { zeta, omega, gamma_2m })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint {
    pub gamma_a: DMatrix<f64>,
    pub gamma_b: DMatrix<f64>,
    pub iterations: usize,
}

/// Solves `gamma_A = g1 - g3 (g2 + gamma_B)^-1 g3^T` and
/// `gamma_B = g2 - g3^T (g1 + gamma_A)^-1 g3` by alternating substitution
/// starting from `gamma_B = I`.
pub fn fixed_point_ab(gamma_m: &DMatrix<f64>, modes_a: usize, tol: f64, max_iter: usize) -> Result<FixedPoint> {
    let DetectBlocks { g1, g2, g3 } = DetectBlocks::split(gamma_m, modes_a)?;
    let g3t = g3.transpose();
    let update_a = |gb: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let inv = (&g2 + gb).try_inverse().ok_or(Error::SingularMatrix)?;
        Ok(&g1 - &g3 * inv * &g3t)
    };
    let update_b = |ga: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let inv = (&g1 + ga).try_inverse().ok_or(Error::SingularMatrix)?;
        Ok(&g2 - &g3t * inv * &g3)
    };
    let mut gamma_b = DMatrix::identity(g2.nrows(), g2.nrows());
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let gamma_a = update_a(&gamma_b)?;
        gamma_b = update_b(&gamma_a)?;
        // gamma_B satisfies its equation exactly; check gamma_A's.
        residual = (update_a(&gamma_b)? - &gamma_a).amax();
        if !residual.is_finite() {
            break;
        }
        if residual < tol {
            return Ok(FixedPoint { gamma_a, gamma_b, iterations: it });
        }
    }
    Err(Error::NoConvergence { iterations: max_iter, residual })
}

/// `sum_k c_k exp(e_k . z)` in log coordinates `z = (ln x, ln y)`.
struct Posynomial([(f64, f64, f64); 4]);

impl Posynomial {
    /// Value, gradient and Hessian of the logarithm.
    fn log_derivs(&self, z: Vector2<f64>) -> (f64, Vector2<f64>, Matrix2<f64>) {
        let mut p = 0.0;
        let mut g = Vector2::zeros();
        let mut h = Matrix2::zeros();
        for &(c, eu, ev) in &self.0 {
            let e = Vector2::new(eu, ev);
            let w = c * (e.dot(&z)).exp();
            p += w;
            g += w * e;
            h += w * e * e.transpose();
        }
        let g = g / p;
        (p.ln(), g, h / p - g * g.transpose())
    }
}

/// `det(gamma_M + diag(x, 1/x, y, 1/y))` factored into its x- and p-blocks.
struct DetObjective {
    p: Posynomial,
    q: Posynomial,
}

impl DetObjective {
    fn new(d: &SixParamDetect) -> Self {
        let [m1, m2, m3, m4, m5, m6] = d.m;
        Self {
            p: Posynomial([(m1 * m3 - m5 * m5, 0.0, 0.0), (m1, 0.0, 1.0), (m3, 1.0, 0.0), (1.0, 1.0, 1.0)]),
            q: Posynomial([(m2 * m4 - m6 * m6, 0.0, 0.0), (m2, 0.0, -1.0), (m4, -1.0, 0.0), (1.0, -1.0, -1.0)]),
        }
    }

    fn eval(&self, z: Vector2<f64>) -> (f64, Vector2<f64>, Matrix2<f64>) {
        let (fp, gp, hp) = self.p.log_derivs(z);
        let (fq, gq, hq) = self.q.log_derivs(z);
        (fp + fq, gp + gq, hp + hq)
    }

    fn value(&self, z: Vector2<f64>) -> f64 {
        let v = self.eval(z).0;
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

/// `det(gamma_M + diag(x, 1/x, y, 1/y))`.
pub fn product_vacuum_det(d: &SixParamDetect, x: f64, y: f64) -> f64 {
    let [m1, m2, m3, m4, m5, m6] = d.m;
    ((m1 + x) * (m3 + y) - m5 * m5) * ((m2 + 1.0 / x) * (m4 + 1.0 / y) - m6 * m6)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LambdaResult {
    /// Maximal mean of the detect operator over product states.
    pub lambda: f64,
    pub x: f64,
    pub y: f64,
    /// `min det(gamma_M + diag(x, 1/x, y, 1/y))`.
    pub min_det: f64,
}

/// Minimizes `det(gamma_M + diag(x, 1/x, y, 1/y))` over `x, y > 0`.
///
/// In log coordinates both block determinants are posynomials, so the log
/// of the objective is convex; a damped Newton iteration from the best point
/// of a coarse log grid converges to the global minimum.
pub fn lambda_product_vacuum(d: &SixParamDetect) -> Result<LambdaResult> {
    d.check(PositivityMode::Psd)?;
    let obj = DetObjective::new(d);

    let lo = -3.0 * std::f64::consts::LN_10;
    let step = 6.0 * std::f64::consts::LN_10 / (INIT_GRID_POINTS - 1) as f64;
    let mut z = Vector2::zeros();
    let mut grid_best = f64::INFINITY;
    for i in 0..INIT_GRID_POINTS {
        for j in 0..INIT_GRID_POINTS {
            let cand = Vector2::new(lo + step * i as f64, lo + step * j as f64);
            let v = obj.value(cand);
            if v < grid_best {
                grid_best = v;
                z = cand;
            }
        }
    }
    if !grid_best.is_finite() {
        return Err(Error::OptimFailure("objective is not finite on the initial grid".into()));
    }

    let (mut f, mut g, mut h) = obj.eval(z);
    for _ in 0..200 {
        if g.amax() < 1e-15 {
            break;
        }
        let mut shift = 0.0;
        let dir = loop {
            let hs = h + Matrix2::identity() * shift;
            match hs.cholesky() {
                Some(ch) => break -ch.solve(&g),
                None => shift = if shift == 0.0 { 1e-10 } else { shift * 10.0 },
            }
        };
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-12 {
            let cand = z + dir * t;
            let fc = obj.value(cand);
            if fc <= f + 1e-4 * t * g.dot(&dir) || (fc <= f && t < 1e-6) {
                z = cand;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        (f, g, h) = obj.eval(z);
    }

    if f > grid_best + GRID_MISMATCH_TOL.ln_1p() {
        return Err(Error::OptimFailure(format!(
            "Newton value {:e} exceeds grid value {:e}",
            f.exp(),
            grid_best.exp()
        )));
    }
    let (x, y) = (z[0].exp(), z[1].exp());
    let min_det = product_vacuum_det(d, x, y);
    Ok(LambdaResult { lambda: 4.0 / min_det.sqrt(), x, y, min_det })
}

/// The two stationarity conditions of the product-vacuum determinant,
/// which equal its partial derivatives in `x` and `y`.
pub fn stationarity_residuals(d: &SixParamDetect, x: f64, y: f64) -> (f64, f64) {
    let [m1, m2, m3, m4, m5, m6] = d.m;
    let r1 = (m3 + y) * (m2 * (m4 + 1.0 / y) - m6 * m6) - (m4 + 1.0 / y) * (m1 * (m3 + y) - m5 * m5) / (x * x);
    let r2 = (m1 + x) * (m4 * (m2 + 1.0 / x) - m6 * m6) - (m2 + 1.0 / x) * (m3 * (m1 + x) - m5 * m5) / (y * y);
    (r1, r2)
}

/// `det(gamma + gamma_M) / min_{x,y} det(diag(x, 1/x, y, 1/y) + gamma_M)`.
///
/// Values below one certify entanglement.
#[allow(non_snake_case)]
pub fn L_ratio(gamma: &CovarianceMatrix, d: &SixParamDetect) -> Result<f64> {
    if gamma.modes() != 2 {
        return Err(Error::ModeMismatch(gamma.modes(), 2));
    }
    let num = (gamma.matrix() + d.to_matrix()).determinant();
    let lam = lambda_product_vacuum(d)?;
    Ok(num / lam.min_det)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeLResult {
    /// Smallest ratio found.
    pub value: f64,
    /// Detect operator at the largest schedule entry along the best direction.
    pub detect: SixParamDetect,
    /// Ratio at each schedule entry, evaluated numerically.
    pub schedule_values: Vec<f64>,
    /// Closed-form value in the limit of infinite detect operator entries.
    pub limit_value: f64,
}

/// Ratio of the symmetric family `M2 = M1`, `M4 = M3`, `M6 = M5`,
/// `M5 = t (M1 + 1)`, `M3 = 1 + t^2 (M1 + 1)`, for which `x = y = 1` is the
/// product-vacuum minimizer. `m1 = None` is the limit of infinite entries.
fn family_ratio(a: f64, b: f64, c1: f64, c2: f64, m1: Option<f64>, t: f64) -> f64 {
    let block = |c: f64| {
        let lead = m1.map_or(0.0, |m1| ((a - 1.0) * (b + 1.0) - c * c) / (2.0 * (m1 + 1.0)));
        lead + 0.5 * (t * t * (a - 1.0) + (b + 1.0) - 2.0 * c * t)
    };
    block(c1) * block(c2)
}

/// Largest `|t|` keeping the family inside `gamma_M + i sigma >= 0`.
fn family_t_bound(m1: Option<f64>) -> f64 {
    m1.map_or(1.0, |m1| ((m1 - 1.0) / (m1 + 1.0)).sqrt())
}

fn optimize_t(a: f64, b: f64, c1: f64, c2: f64, m1: Option<f64>) -> (f64, f64) {
    let bound = family_t_bound(m1);
    let h = |t: f64| family_ratio(a, b, c1, c2, m1, t);
    let (mut lo, mut hi) = (-bound, bound);
    let n = 400;
    let mut best = (0.0, h(0.0));
    for i in 0..=n {
        let t = lo + (hi - lo) * i as f64 / n as f64;
        let v = h(t);
        if v < best.1 {
            best = (t, v);
        }
    }
    let w = 2.0 * bound / n as f64;
    lo = (best.0 - w).max(-bound);
    hi = (best.0 + w).min(bound);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..100 {
        let t1 = hi - inv_phi * (hi - lo);
        let t2 = lo + inv_phi * (hi - lo);
        if h(t1) < h(t2) {
            hi = t2
        } else {
            lo = t1
        }
    }
    let t = 0.5 * (lo + hi);
    if h(t) < best.1 {
        (t, h(t))
    } else {
        best
    }
}

fn family_detect(m1: f64, t: f64) -> SixParamDetect {
    let m3 = 1.0 + t * t * (m1 + 1.0);
    let m5 = t * (m1 + 1.0);
    SixParamDetect::new(m1, m1, m3, m3, m5, m5)
}

/// Minimizes the determinant ratio over the symmetric detect-operator family
/// along a schedule of growing entries and in the closed-form limit.
#[allow(non_snake_case)]
pub fn minimize_L(gamma: &CovarianceMatrix) -> Result<MinimizeLResult> {
    minimize_L_with_schedule(gamma, &DEFAULT_SCHEDULE)
}

#[allow(non_snake_case)]
pub fn minimize_L_with_schedule(gamma: &CovarianceMatrix, schedule: &[f64]) -> Result<MinimizeLResult> {
    let sf = standard_form(gamma)?;
    let sf_cm = sf.to_matrix_unchecked();
    let StandardForm { a, b, c1, c2 } = sf;
    // Either mode may play the role of the first party.
    let orientations = [(a, b, false), (b, a, true)];

    let mut schedule_values = Vec::with_capacity(schedule.len());
    let mut detect = None;
    for &m1 in schedule {
        if !(m1 > 1.0) {
            return Err(Error::InvalidArgument(format!("schedule entry {m1} must exceed 1")));
        }
        let mut best: Option<(f64, SixParamDetect)> = None;
        for &(p, q, swap) in &orientations {
            let (t, _) = optimize_t(p, q, c1, c2, Some(m1));
            let mut d = family_detect(m1, t);
            if swap {
                d = d.swapped();
            }
            let v = L_ratio(&sf_cm, &d)?;
            if best.is_none_or(|(bv, _)| v < bv) {
                best = Some((v, d));
            }
        }
        let (v, d) = best.expect("two orientations");
        schedule_values.push(v);
        detect = Some(d);
    }

    let limit_value =
        orientations.iter().map(|&(p, q, _)| optimize_t(p, q, c1, c2, None).1).fold(f64::INFINITY, f64::min);
    let value = schedule_values.iter().copied().fold(limit_value, f64::min);
    let detect = detect.unwrap_or_else(|| family_detect(1.0, 0.0));
    Ok(MinimizeLResult { value, detect, schedule_values, limit_value })
}
