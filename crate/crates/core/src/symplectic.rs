//! Covariance-matrix algebra for zero-mean Gaussian states.
//!
//! Quadratures are ordered `(x1, p1, ..., xn, pn)` and the vacuum covariance
//! matrix is the identity.

use nalgebra::{DMatrix, Matrix2, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenvalue tolerance for `gamma + i sigma >= 0`.
pub const PSD_TOL: f64 = 1e-9;
/// Relative tolerance for the symmetry check.
pub const SYM_TOL: f64 = 1e-12;

/// The symplectic form `(0 1; -1 0)^{+n}`.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        s[(2 * k, 2 * k + 1)] = 1.0;
        s[(2 * k + 1, 2 * k)] = -1.0;
    }
    s
}

/// Smallest eigenvalue of the Hermitian matrix `m + i sigma`.
pub fn min_physical_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows() / 2;
    let sigma = symplectic_form(n);
    let h = DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| Complex64::new(m[(i, j)], sigma[(i, j)]));
    h.symmetric_eigenvalues().min()
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().min()
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// A validated covariance matrix satisfying `gamma + i sigma >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct CovarianceMatrix {
    matrix: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        validate_cm(matrix)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare { rows: n, cols: bad.len() });
        }
        validate_cm(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// Vacuum state of `modes` modes.
    pub fn vacuum(modes: usize) -> Self {
        Self { matrix: DMatrix::identity(2 * modes, 2 * modes) }
    }

    /// Single-mode thermal state with mean photon number `n`.
    pub fn thermal(n: f64) -> Result<Self> {
        Self::new(DMatrix::identity(2, 2) * (2.0 * n + 1.0))
    }

    /// Two-mode squeezed vacuum with squeezing `r`.
    pub fn two_mode_squeezed_vacuum(r: f64) -> Self {
        let a = (2.0 * r).cosh();
        let c = (2.0 * r).sinh();
        StandardForm { a, b: a, c1: c, c2: c }.to_matrix_unchecked()
    }

    pub fn modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.matrix.nrows()).map(|i| self.matrix.row(i).iter().copied().collect()).collect()
    }

    /// Direct sum of local covariance matrices in mode order.
    pub fn direct_sum(parts: &[&CovarianceMatrix]) -> Self {
        let dim: usize = parts.iter().map(|p| p.matrix.nrows()).sum();
        let mut m = DMatrix::zeros(dim, dim);
        let mut off = 0;
        for p in parts {
            let d = p.matrix.nrows();
            m.view_mut((off, off), (d, d)).copy_from(&p.matrix);
            off += d;
        }
        Self { matrix: m }
    }

    pub(crate) fn from_trusted(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }
}

impl TryFrom<Vec<Vec<f64>>> for CovarianceMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<CovarianceMatrix> for Vec<Vec<f64>> {
    fn from(cm: CovarianceMatrix) -> Self {
        cm.to_rows()
    }
}

/// Checks shape, symmetry and the uncertainty relation.
pub fn validate_cm(matrix: DMatrix<f64>) -> Result<CovarianceMatrix> {
    let (rows, cols) = matrix.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 || rows % 2 != 0 {
        return Err(Error::OddDimension(rows));
    }
    let scale = matrix.amax().max(1.0);
    let asym = max_asymmetry(&matrix);
    if asym > SYM_TOL * scale {
        return Err(Error::NotSymmetric(asym));
    }
    let sym = (&matrix + matrix.transpose()) * 0.5;
    let min_eig = min_physical_eigenvalue(&sym);
    if min_eig < -PSD_TOL {
        return Err(Error::NotPhysical(min_eig));
    }
    Ok(CovarianceMatrix { matrix: sym })
}

/// Symplectic spectrum of a positive-definite matrix, sorted descending.
///
/// The values are the moduli of the eigenvalues of `i sigma m`, computed as the
/// singular values of `m^{1/2} sigma m^{1/2}` which come in equal pairs.
pub fn symplectic_spectrum(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows() / 2;
    let eig = SymmetricEigen::new(m.clone());
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()))
        * eig.eigenvectors.transpose();
    let k = &root * symplectic_form(n) * &root;
    let mut sv: Vec<f64> = k.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv.iter().step_by(2).copied().take(n).collect()
}

pub fn symplectic_eigenvalues(gamma: &CovarianceMatrix) -> Vec<f64> {
    symplectic_spectrum(&gamma.matrix)
}

/// Assignment of every mode to a party.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModePartition {
    parties: Vec<usize>,
    party_count: usize,
}

impl ModePartition {
    /// `assignment[k]` is the party of mode `k`; parties are numbered from 0.
    pub fn new(assignment: Vec<usize>) -> Result<Self> {
        if assignment.is_empty() {
            return Err(Error::InvalidPartition("no modes".into()));
        }
        let party_count = assignment.iter().max().map_or(0, |m| m + 1);
        for p in 0..party_count {
            if !assignment.contains(&p) {
                return Err(Error::InvalidPartition(format!("party {p} has no modes")));
            }
        }
        Ok(Self { parties: assignment, party_count })
    }

    /// First `modes_a` modes to party A, the rest to party B.
    pub fn split(modes_a: usize, total: usize) -> Result<Self> {
        if modes_a == 0 || modes_a >= total {
            return Err(Error::InvalidPartition(format!("split {modes_a} of {total}")));
        }
        Self::new((0..total).map(|k| usize::from(k >= modes_a)).collect())
    }

    pub fn modes(&self) -> usize {
        self.parties.len()
    }

    pub fn party_count(&self) -> usize {
        self.party_count
    }

    pub fn party_of(&self, mode: usize) -> usize {
        self.parties[mode]
    }

    pub fn is_bipartite(&self) -> bool {
        self.party_count == 2
    }
}

/// Transposes party B by flipping the sign of its momentum quadratures.
///
/// The result need not be a physical covariance matrix.
pub fn partial_transpose(gamma: &CovarianceMatrix, part: &ModePartition) -> Result<DMatrix<f64>> {
    if part.modes() != gamma.modes() {
        return Err(Error::ModeMismatch(part.modes(), gamma.modes()));
    }
    if !part.is_bipartite() {
        return Err(Error::InvalidPartition("partial transpose needs two parties".into()));
    }
    let dim = gamma.matrix.nrows();
    let sign: Vec<f64> = (0..dim).map(|i| if i % 2 == 1 && part.party_of(i / 2) == 1 { -1.0 } else { 1.0 }).collect();
    Ok(DMatrix::from_fn(dim, dim, |i, j| sign[i] * sign[j] * gamma.matrix[(i, j)]))
}

/// Smallest symplectic eigenvalue of the partial transpose; `>= 1` iff PPT.
pub fn ppt_min_symplectic(gamma: &CovarianceMatrix, part: &ModePartition) -> Result<f64> {
    let pt = partial_transpose(gamma, part)?;
    Ok(symplectic_spectrum(&pt).last().copied().unwrap_or(f64::NAN))
}

/// Two-mode standard form: `A = a I`, `B = b I`, `C = diag(c1, -c2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardForm {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
}

impl StandardForm {
    pub fn new(a: f64, b: f64, c1: f64, c2: f64) -> Result<Self> {
        let sf = Self { a, b, c1, c2 };
        sf.to_cm()?;
        Ok(sf)
    }

    pub fn to_matrix_unchecked(&self) -> CovarianceMatrix {
        let Self { a, b, c1, c2 } = *self;
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(4, 4, &[
            a,   0.0, c1,  0.0,
            0.0, a,   0.0, -c2,
            c1,  0.0, b,   0.0,
            0.0, -c2, 0.0, b,
        ]);
        CovarianceMatrix { matrix: m }
    }

    pub fn to_cm(&self) -> Result<CovarianceMatrix> {
        validate_cm(self.to_matrix_unchecked().matrix)
    }
}

fn inv_sqrt_unimodular(block: &Matrix2<f64>) -> Result<(f64, Matrix2<f64>)> {
    let det = block.determinant();
    if det <= 1e-300 {
        return Err(Error::DegenerateBlock);
    }
    let scale = det.sqrt();
    let eig = SymmetricEigen::new(block / scale);
    if eig.eigenvalues.min() <= 0.0 {
        return Err(Error::DegenerateBlock);
    }
    let d = Matrix2::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()));
    Ok((scale, eig.eigenvectors * d * eig.eigenvectors.transpose()))
}

/// Reduces a two-mode covariance matrix to standard form by local symplectics.
///
/// Each local block is brought to a multiple of the identity with a unimodular
/// rescaling, then local rotations from the SVD of the correlation block
/// diagonalize it. Signs are fixed so that `c1 >= |c2|`.
pub fn standard_form(gamma: &CovarianceMatrix) -> Result<StandardForm> {
    if gamma.modes() != 2 {
        return Err(Error::ModeMismatch(gamma.modes(), 2));
    }
    let m = &gamma.matrix;
    let blk = |r: usize, c: usize| Matrix2::new(m[(r, c)], m[(r, c + 1)], m[(r + 1, c)], m[(r + 1, c + 1)]);
    let (a, la) = inv_sqrt_unimodular(&blk(0, 0))?;
    let (b, lb) = inv_sqrt_unimodular(&blk(2, 2))?;
    let c = la * blk(0, 2) * lb.transpose();
    let svd = c.svd(true, true);
    let mut u = svd.u.ok_or(Error::DegenerateBlock)?;
    let mut vt = svd.v_t.ok_or(Error::DegenerateBlock)?;
    let mut s = svd.singular_values;
    if s[0] < s[1] {
        s.swap_rows(0, 1);
        u.swap_columns(0, 1);
        vt.swap_rows(0, 1);
    }
    if u.determinant() < 0.0 {
        u.column_mut(1).neg_mut();
        s[1] = -s[1];
    }
    if vt.determinant() < 0.0 {
        vt.row_mut(1).neg_mut();
        s[1] = -s[1];
    }
    Ok(StandardForm { a, b, c1: s[0], c2: -s[1] })
}

/// Complex covariance matrix in `(a, a^dagger)` ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexCM {
    matrix: DMatrix<Complex64>,
}

impl ComplexCM {
    pub fn modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Inverse of [`to_complex_cm`].
    pub fn to_real(&self) -> DMatrix<f64> {
        let n = self.modes();
        let g = &self.matrix;
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                let d = g[(i, j)] * 2.0;
                let o = g[(i, j + n)] * 2.0;
                // d = (gp - gx) + i (gxp + gpx), o = (gp + gx) + i (gxp - gpx)
                let gp = 0.5 * (d.re + o.re);
                let gx = 0.5 * (o.re - d.re);
                let gxp = 0.5 * (d.im + o.im);
                let gpx = 0.5 * (d.im - o.im);
                out[(2 * i, 2 * j)] = gx;
                out[(2 * i + 1, 2 * j + 1)] = gp;
                out[(2 * i, 2 * j + 1)] = gxp;
                out[(2 * i + 1, 2 * j)] = gpx;
            }
        }
        out
    }

    /// Residual of the block-conjugation symmetry `g = X conj(g) X`.
    pub fn conjugation_residual(&self) -> f64 {
        let n = self.modes();
        let g = &self.matrix;
        let mut worst = 0.0f64;
        for i in 0..2 * n {
            for j in 0..2 * n {
                let other = g[((i + n) % (2 * n), (j + n) % (2 * n))].conj();
                worst = worst.max((g[(i, j)] - other).norm());
            }
        }
        worst
    }
}

/// Transforms a real covariance matrix to the complex one used for
/// photon-number calculations.
pub fn to_complex_cm(gamma: &DMatrix<f64>) -> ComplexCM {
    let n = gamma.nrows() / 2;
    let mut m = DMatrix::from_element(2 * n, 2 * n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            let gx = gamma[(2 * i, 2 * j)];
            let gp = gamma[(2 * i + 1, 2 * j + 1)];
            let gxp = gamma[(2 * i, 2 * j + 1)];
            let gpx = gamma[(2 * i + 1, 2 * j)];
            m[(i, j)] = Complex64::new(gp - gx, gxp + gpx) * 0.5;
            m[(i, j + n)] = Complex64::new(gp + gx, gxp - gpx) * 0.5;
            m[(i + n, j)] = Complex64::new(gp + gx, -(gxp - gpx)) * 0.5;
            m[(i + n, j + n)] = Complex64::new(gp - gx, -(gxp + gpx)) * 0.5;
        }
    }
    ComplexCM { matrix: m }
}

/// `sigma_1 (x) I_n`, the block swap of the `(a, a^dagger)` halves.
pub(crate) fn sigma1_kron_identity(n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        if (i + n) % (2 * n) == j {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `2^n det(g1 + g2)^{-1/2}` for raw matrices.
pub fn overlap_matrices(g1: &DMatrix<f64>, g2: &DMatrix<f64>) -> Result<f64> {
    if g1.shape() != g2.shape() {
        return Err(Error::ModeMismatch(g1.nrows() / 2, g2.nrows() / 2));
    }
    let det = (g1 + g2).determinant();
    if det <= 1e-300 {
        return Err(Error::SingularSum(det));
    }
    let n = g1.nrows() / 2;
    Ok(2f64.powi(n as i32) / det.sqrt())
}

/// `Tr(rho_1 rho_2)` for zero-mean Gaussian operators.
pub fn gaussian_overlap(g1: &CovarianceMatrix, g2: &CovarianceMatrix) -> Result<f64> {
    overlap_matrices(&g1.matrix, &g2.matrix)
}
