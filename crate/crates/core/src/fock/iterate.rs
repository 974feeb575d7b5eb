use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::FockOperator;
use crate::error::{Error, Result};
use crate::witness::{PositivityMode, SixParamDetect};

/// Rounds stop once the normalized mean exceeds this.
pub const CONVERGED_M0: f64 = 0.99999;
pub const DEFAULT_MAX_ROUNDS: usize = 100;
const NORM_TOL: f64 = 1e-12;
const MONOTONE_TOL: f64 = 1e-10;
const DETECT_REGULARIZER: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    First,
    Second,
}

impl Mode {
    fn other(self) -> Self {
        match self {
            Mode::First => Mode::Second,
            Mode::Second => Mode::First,
        }
    }
}

/// Truncated product state `|a> (x) |b>` in the Fock basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductStateVec {
    a: Vec<Complex64>,
    b: Vec<Complex64>,
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let n = norm(&v);
    v.iter_mut().for_each(|z| *z /= n);
    v
}

fn mean_photon(v: &[Complex64]) -> f64 {
    v.iter().enumerate().map(|(k, z)| k as f64 * z.norm_sqr()).sum()
}

impl ProductStateVec {
    /// Both factors must be normalized.
    pub fn new(a: Vec<Complex64>, b: Vec<Complex64>) -> Result<Self> {
        for v in [&a, &b] {
            if v.is_empty() || (norm(v) - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidArgument(format!("state factor has norm {}", norm(v))));
            }
        }
        Ok(Self { a, b })
    }

    /// Normalizes both factors; panics on a zero vector.
    pub fn from_unnormalized(a: Vec<Complex64>, b: Vec<Complex64>) -> Self {
        assert!(norm(&a) > 0.0 && norm(&b) > 0.0, "zero state vector");
        Self { a: normalize(a), b: normalize(b) }
    }

    pub fn vacuum(d: usize) -> Self {
        let mut v = vec![Complex64::new(0.0, 0.0); d];
        v[0] = Complex64::new(1.0, 0.0);
        Self { a: v.clone(), b: v }
    }

    /// Independent random factors with complex normal entries damped by
    /// `s^k`, `s` uniform in `(0, 1)` per factor, so that low photon numbers
    /// dominate with varying weight.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Self {
        let a = random_factor(rng, d);
        let b = random_factor(rng, d);
        Self { a, b }
    }

    pub fn a(&self) -> &[Complex64] {
        &self.a
    }

    pub fn b(&self) -> &[Complex64] {
        &self.b
    }

    pub fn factor(&self, mode: Mode) -> &[Complex64] {
        match mode {
            Mode::First => &self.a,
            Mode::Second => &self.b,
        }
    }

    fn set_factor(&mut self, mode: Mode, v: Vec<Complex64>) {
        match mode {
            Mode::First => self.a = v,
            Mode::Second => self.b = v,
        }
    }

    /// Mean photon number averaged over the two modes.
    pub fn avg_photon(&self) -> f64 {
        0.5 * (mean_photon(&self.a) + mean_photon(&self.b))
    }
}

fn random_factor<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<Complex64> {
    let s: f64 = rng.gen_range(f64::EPSILON..1.0);
    let mut damp = 1.0;
    let mut v = Vec::with_capacity(d);
    for _ in 0..d {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        v.push(Complex64::new(re, im) * damp);
        damp *= s;
    }
    if norm(&v) == 0.0 {
        v[0] = Complex64::new(1.0, 0.0);
    }
    normalize(v)
}

/// Operator on one mode obtained by taking the expectation of `M` in the
/// factor `v` of the traced mode.
pub fn conditional_matrix(m: &FockOperator, v: &[Complex64], traced: Mode) -> DMatrix<Complex64> {
    let d = m.cutoff();
    let len = d.min(v.len());
    let mut out = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for p in 0..len {
                for q in 0..len {
                    let e = match traced {
                        Mode::Second => m.get(i, p, j, q),
                        Mode::First => m.get(p, i, q, j),
                    };
                    if e != 0.0 {
                        acc += v[p].conj() * e * v[q];
                    }
                }
            }
            out[(i, j)] = acc;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlternationResult {
    /// Final `<psi|M|psi> / sqrt(det beta)`.
    pub m0: f64,
    pub state: ProductStateVec,
    pub rounds: usize,
    pub converged: bool,
    /// Mode-averaged photon number after each round.
    pub photon_trace: Vec<f64>,
    pub m0_trace: Vec<f64>,
    /// False if some round lowered `M0` by more than round-off.
    pub monotone: bool,
}

/// Alternately replaces one factor of a product state by the top
/// eigenvector of the conditional operator, starting from a random factor.
///
/// The random factor goes into the second mode when `M1 M2 <= M3 M4`, into
/// the first otherwise.
pub fn alternate_maximize(m: &FockOperator, seed: u64, max_rounds: usize) -> AlternationResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    alternate_maximize_with(m, &mut rng, max_rounds)
}

pub(crate) fn alternate_maximize_with<R: Rng + ?Sized>(
    m: &FockOperator,
    rng: &mut R,
    max_rounds: usize,
) -> AlternationResult {
    let d = m.cutoff();
    let [m1, m2, m3, m4, _, _] = m.detect().m;
    let mut state = ProductStateVec::random(rng, d);
    let mut traced = if m1 * m2 <= m3 * m4 { Mode::Second } else { Mode::First };
    let scale = m.sqrt_det_beta();

    let mut photon_trace = Vec::new();
    let mut m0_trace = Vec::new();
    let mut monotone = true;
    let mut converged = false;
    let mut m0 = 0.0;
    let mut rounds = 0;
    while rounds < max_rounds {
        rounds += 1;
        let c = conditional_matrix(m, state.factor(traced), traced);
        let eig = c.symmetric_eigen();
        let (imax, lmax) =
            eig.eigenvalues
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        let v: Vec<Complex64> = eig.eigenvectors.column(imax).iter().copied().collect();
        state.set_factor(traced.other(), normalize(v));
        let next = lmax / scale;
        if rounds > 1 && next < m0 - MONOTONE_TOL {
            monotone = false;
        }
        m0 = next;
        m0_trace.push(m0);
        photon_trace.push(state.avg_photon());
        if m0 > CONVERGED_M0 {
            converged = true;
            break;
        }
        traced = traced.other();
    }
    AlternationResult { m0, state, rounds, converged, photon_trace, m0_trace, monotone }
}

/// Random detect operator from `R R^T + eps I` with Gaussian `R`, restricted
/// to the six-parameter pattern; redrawn until positive semidefinite.
pub fn random_detect_operator(seed: u64) -> SixParamDetect {
    random_detect_operator_with(&mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_detect_operator_with<R: Rng + ?Sized>(rng: &mut R) -> SixParamDetect {
    random_detect_operator_counted(rng).0
}

/// Also returns the number of draws used, one more than the rejections.
pub fn random_detect_operator_counted<R: Rng + ?Sized>(rng: &mut R) -> (SixParamDetect, usize) {
    let mut draws = 0;
    loop {
        draws += 1;
        let r = Matrix4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        let g = r * r.transpose() + Matrix4::identity() * DETECT_REGULARIZER;
        let d = SixParamDetect::new(g[(0, 0)], g[(1, 1)], g[(2, 2)], g[(3, 3)], g[(0, 2)], -g[(1, 3)]);
        if d.positivity_margin(PositivityMode::Psd) >= 0.0 {
            return (d, draws);
        }
    }
}
