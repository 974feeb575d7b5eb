//! Full separability and biseparability of symmetric multimode states with
//! `gamma = gamma^x (+) gamma^p`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{CriterionId, Verdict};
use crate::error::{Error, Result};
use crate::symplectic::CovarianceMatrix;

fn sqrt11() -> f64 {
    11f64.sqrt()
}

/// Value of `c` where the two branches of the three-mode boundary meet,
/// `1/sqrt(5 + 2 sqrt 11)`.
pub static BISEP_THRESHOLD: std::sync::LazyLock<f64> = std::sync::LazyLock::new(|| 1.0 / (5.0 + 2.0 * sqrt11()).sqrt());

/// Minimal `a - c` for biseparability above the threshold.
pub static BISEP_LARGE_C_BOUND: std::sync::LazyLock<f64> = std::sync::LazyLock::new(|| {
    let s = sqrt11();
    (4.0 * (14.0 + 2.0 * s).sqrt() + (29.0 + 8.0 * s).sqrt() - 9.0) / (6.0 * (5.0 + 2.0 * s).sqrt())
});

/// `gamma^x` has diagonal `a` and off-diagonal `c1`, `gamma^p` has diagonal
/// `b` and off-diagonal `-c2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricMultimodeParams {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
}

impl SymmetricMultimodeParams {
    /// GHZ-type family: `b = a + (n - 2) c`, `c1 = c2 = c`.
    pub fn ghz(a: f64, c: f64, n: usize) -> Self {
        Self { n, a, b: a + (n as f64 - 2.0) * c, c1: c, c2: c }
    }

    /// Matrix in `(x1, p1, ..., xn, pn)` order.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(2 * n, 2 * n, |r, s| {
            let (i, j) = (r / 2, s / 2);
            match (r % 2, s % 2) {
                (0, 0) => {
                    if i == j {
                        self.a
                    } else {
                        self.c1
                    }
                }
                (1, 1) => {
                    if i == j {
                        self.b
                    } else {
                        -self.c2
                    }
                }
                _ => 0.0,
            }
        })
    }

    pub fn to_cm(&self) -> Result<CovarianceMatrix> {
        CovarianceMatrix::new(self.to_matrix())
    }
}

/// `(a - c1)(b - (n - 1) c2) >= 1`.
pub fn multimode_symmetric_full_sep(p: &SymmetricMultimodeParams) -> Verdict {
    let margin = (p.a - p.c1) * (p.b - (p.n as f64 - 1.0) * p.c2) - 1.0;
    Verdict::new(CriterionId::MultimodeSymmetric, margin)
}

/// Full separability of the GHZ-type family with `b = a + (n - 2) c`.
pub fn ghz_full_sep(a: f64, c: f64, n: usize) -> Verdict {
    let margin = if c > 0.0 { a - c - 1.0 } else { a + (n as f64 - 2.0) * c + c - 1.0 };
    Verdict::new(CriterionId::GhzFullSeparability, margin)
}

/// Biseparability of the three-mode family with `b = a + c`, `c >= 0`.
pub fn three_mode_biseparable(a: f64, c: f64) -> Result<Verdict> {
    if c < 0.0 {
        return Err(Error::NegativeC(c));
    }
    let margin = if c >= *BISEP_THRESHOLD {
        a - c - *BISEP_LARGE_C_BOUND
    } else {
        a - (0.5 * (c * c + 4.0 / 9.0).sqrt() + 2.0 * (c * c + 1.0 / 9.0).sqrt() - 0.5 * c)
    };
    Ok(Verdict::new(CriterionId::ThreeModeBiseparable, margin))
}

/// Equal-weight mixture of the three `1|2` product certificates, each built
/// from a squeezed vacuum `diag(x, 1/x)` and a two-mode squeezed vacuum with
/// parameter `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiseparabilityCertificate {
    pub x: f64,
    pub s: f64,
    /// Slack of `gamma - mixture` along its four eigen-directions:
    /// x-quadrature transverse, x-quadrature uniform, p-quadrature transverse,
    /// p-quadrature uniform.
    pub residuals: [f64; 4],
}

impl BiseparabilityCertificate {
    pub fn min_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// The averaged certificate matrix in `(x1, p1, ..., x3, p3)` order.
    pub fn mixture_matrix(&self) -> DMatrix<f64> {
        let (ch, sh) = ((2.0 * self.s).cosh(), (2.0 * self.s).sinh());
        let mut m = DMatrix::zeros(6, 6);
        for single in 0..3 {
            for i in 0..3 {
                let (dx, dp) = if i == single { (self.x, 1.0 / self.x) } else { (ch, ch) };
                m[(2 * i, 2 * i)] += dx / 3.0;
                m[(2 * i + 1, 2 * i + 1)] += dp / 3.0;
            }
            let pair: Vec<usize> = (0..3).filter(|&i| i != single).collect();
            let (i, j) = (pair[0], pair[1]);
            for (u, v) in [(i, j), (j, i)] {
                m[(2 * u, 2 * v)] += sh / 3.0;
                m[(2 * u + 1, 2 * v + 1)] -= sh / 3.0;
            }
        }
        m
    }
}

/// Certificate for the three-mode family at the branch squeezing
/// `sinh 2s = 3 min(c, threshold)`. All residuals are non-negative exactly when the state is
/// certified biseparable.
pub fn biseparability_certificate(a: f64, c: f64) -> Result<BiseparabilityCertificate> {
    if c < 0.0 {
        return Err(Error::NegativeC(c));
    }
    let sh = if c >= *BISEP_THRESHOLD { 3.0 * *BISEP_THRESHOLD } else { 3.0 * c };
    let s = 0.5 * sh.asinh();
    let ch = (1.0 + sh * sh).sqrt();
    // positive root of x - 1/x + sh = 0
    let x = 0.5 * (-sh + (sh * sh + 4.0).sqrt());
    let b = a + c;
    let residuals = [
        (a - c) - (x + 2.0 * ch - sh) / 3.0,
        (a + 2.0 * c) - (x + 2.0 * ch + 2.0 * sh) / 3.0,
        (b + c) - (1.0 / x + 2.0 * ch + sh) / 3.0,
        (b - 2.0 * c) - (1.0 / x + 2.0 * ch - 2.0 * sh) / 3.0,
    ];
    Ok(BiseparabilityCertificate { x, s, residuals })
}
