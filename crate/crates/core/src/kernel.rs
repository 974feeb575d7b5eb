//! Spectrum of the Gaussian kernel `exp[-alpha (x^2 + y^2) + 2 alpha r x y]`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureGrid;

pub const DEFAULT_NODES: usize = 256;
/// Default grid half width in units of the eigenfunction width `1/sqrt(beta)`.
pub const DEFAULT_WIDTHS: f64 = 8.0;
const MIN_WIDTHS: f64 = 6.0;
const MAX_TAIL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub alpha: f64,
    pub r: f64,
    pub beta: f64,
}

impl KernelSpec {
    pub fn new(alpha: f64, r: f64) -> Result<Self> {
        if !(alpha > 0.0) || !(r.abs() < 1.0) {
            return Err(Error::InvalidArgument(format!("kernel needs alpha > 0 and |r| < 1, got ({alpha}, {r})")));
        }
        Ok(Self { alpha, r, beta: alpha * (1.0 - r * r).sqrt() })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (-self.alpha * (x * x + y * y) + 2.0 * self.alpha * self.r * x * y).exp()
    }

    /// `mu_n / mu_0`.
    pub fn ratio(&self) -> f64 {
        self.alpha * self.r / (self.alpha + self.beta)
    }

    /// `integral kappa(x, x) dx`, the sum of all eigenvalues.
    pub fn trace(&self) -> f64 {
        (std::f64::consts::PI / (2.0 * self.alpha * (1.0 - self.r))).sqrt()
    }

    /// Grid with the default half width and node count.
    pub fn default_grid(&self) -> QuadratureGrid {
        QuadratureGrid::gauss_legendre(DEFAULT_NODES, DEFAULT_WIDTHS / self.beta.sqrt()).expect("positive width")
    }
}

pub fn analytic_eigenvalue(k: &KernelSpec, n: usize) -> f64 {
    (std::f64::consts::PI / (k.alpha + k.beta)).sqrt() * k.ratio().powi(n as i32)
}

/// Physicists' Hermite polynomial by the three-term recurrence.
pub fn hermite(n: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, 2.0 * x);
    if n == 0 {
        return h0;
    }
    for k in 1..n {
        let h2 = 2.0 * x * h1 - 2.0 * k as f64 * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// `H_n(x) / sqrt(2^n n!)`, computed with the scaled recurrence so that no
/// factorials appear.
fn scaled_hermite(n: usize, x: f64) -> f64 {
    let (mut h0, mut h1) = (1.0, std::f64::consts::SQRT_2 * x);
    if n == 0 {
        return h0;
    }
    for k in 1..n {
        let kf = k as f64;
        let h2 = (2.0 / (kf + 1.0)).sqrt() * x * h1 - (kf / (kf + 1.0)).sqrt() * h0;
        h0 = h1;
        h1 = h2;
    }
    h1
}

/// Unit-norm eigenfunction `N_n exp(-beta x^2) H_n(sqrt(2 beta) x)`.
pub fn eigenfunction(k: &KernelSpec, n: usize, x: f64) -> f64 {
    let norm = (2.0 * k.beta / std::f64::consts::PI).powf(0.25);
    norm * (-k.beta * x * x).exp() * scaled_hermite(n, (2.0 * k.beta).sqrt() * x)
}

fn check_grid(k: &KernelSpec, grid: &QuadratureGrid) -> Result<()> {
    let widths = grid.half_width * k.beta.sqrt();
    let tail = (-widths * widths).exp();
    if tail > MAX_TAIL || widths < MIN_WIDTHS {
        return Err(Error::GridTooNarrow(tail));
    }
    Ok(())
}

/// `(T f)(x_i) = sum_j w_j kappa(x_i, x_j) f(x_j)` on the grid nodes.
pub fn apply_kernel(k: &KernelSpec, f: &[f64], grid: &QuadratureGrid) -> Result<Vec<f64>> {
    check_grid(k, grid)?;
    if f.len() != grid.len() {
        return Err(Error::InvalidArgument(format!("{} samples for {} nodes", f.len(), grid.len())));
    }
    Ok(grid
        .nodes
        .iter()
        .map(|&x| grid.nodes.iter().zip(&grid.weights).zip(f).map(|((&y, &w), &fy)| w * k.eval(x, y) * fy).sum())
        .collect())
}

/// Symmetrized Nystrom matrix `sqrt(w_i) kappa(x_i, x_j) sqrt(w_j)`.
pub fn nystrom_matrix(k: &KernelSpec, grid: &QuadratureGrid) -> DMatrix<f64> {
    let sw: Vec<f64> = grid.weights.iter().map(|w| w.sqrt()).collect();
    DMatrix::from_fn(grid.len(), grid.len(), |i, j| sw[i] * k.eval(grid.nodes[i], grid.nodes[j]) * sw[j])
}

/// Eigenvalues of the Nystrom discretization on the default grid width,
/// sorted by decreasing modulus.
pub fn nystrom_spectrum(k: &KernelSpec, nodes: usize) -> Result<Vec<f64>> {
    if nodes < 64 {
        return Err(Error::InvalidArgument(format!("Nystrom grid needs at least 64 nodes, got {nodes}")));
    }
    let grid = QuadratureGrid::gauss_legendre(nodes, DEFAULT_WIDTHS / k.beta.sqrt())?;
    check_grid(k, &grid)?;
    let mut ev: Vec<f64> = nystrom_matrix(k, &grid).symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    Ok(ev)
}
