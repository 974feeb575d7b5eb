//! Werner-Wolf type criteria: the generalized 2x2 closed form, the existence
//! of a pure product certificate, and the refined matrix-inequality check.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{CriterionId, Verdict};
use crate::error::{Error, Result};
use crate::symplectic::{min_eigenvalue, CovarianceMatrix, StandardForm, PSD_TOL};

pub const GRID_POINTS: usize = 600;
pub const GRID_LO_EXP: f64 = -3.0;
pub const GRID_HI_EXP: f64 = 3.0;
const PURITY_TOL: f64 = 1e-6;
const FEASIBLE_TOL: f64 = 1e-12;

/// Parameters of the generalized Werner-Wolf 2x2 state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct WernerWolf2x2Params {
    pub A: f64,
    pub B: f64,
    pub C: f64,
    pub D: f64,
    pub E: f64,
    pub F: f64,
}

impl WernerWolf2x2Params {
    /// The 8x8 covariance matrix; modes 1,2 belong to party A and 3,4 to B.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let Self { A, B, C, D, E, F } = *self;
        let mut g = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![A, B, A, B, C, D, C, D]));
        // (x1,x3) E, (p1,p4) -F, (x2,x4) -E, (p2,p3) -F
        for (i, j, v) in [(0, 4, E), (1, 7, -F), (2, 6, -E), (3, 5, -F)] {
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
        g
    }

    pub fn to_cm(&self) -> Result<CovarianceMatrix> {
        CovarianceMatrix::new(self.to_matrix())
    }
}

/// `(AC - E^2)(BD - F^2) - 2|EF| - CD - AB + 1`.
pub fn werner_wolf_2x2(p: &WernerWolf2x2Params) -> Verdict {
    let WernerWolf2x2Params { A, B, C, D, E, F } = *p;
    let margin = (A * C - E * E) * (B * D - F * F) - 2.0 * (E * F).abs() - C * D - A * B + 1.0;
    Verdict::new(CriterionId::WernerWolf2x2, margin)
}

/// Feasibility of `(p - 1/x)(q - 1/y) >= e^2` and `(r - x)(s - y) >= f^2`
/// with all four factors non-negative.
///
/// For fixed `x` the admissible `y` form an interval `[lower(x), upper(x)]`
/// and `upper - lower` is concave in `x`, so the search is a log grid in `x`
/// followed by golden-section refinement.
#[derive(Debug, Clone, Copy)]
struct PairProblem {
    p: f64,
    q: f64,
    e2: f64,
    r: f64,
    s: f64,
    f2: f64,
}

impl PairProblem {
    fn lower(&self, x: f64) -> Option<f64> {
        let u = self.p - 1.0 / x;
        if u < 0.0 {
            return None;
        }
        let q = if self.e2 == 0.0 {
            self.q
        } else if u == 0.0 {
            return None;
        } else {
            self.q - self.e2 / u
        };
        (q > 0.0).then(|| 1.0 / q)
    }

    fn upper(&self, x: f64) -> Option<f64> {
        let v = self.r - x;
        if v < 0.0 {
            return None;
        }
        if self.f2 == 0.0 {
            Some(self.s)
        } else if v == 0.0 {
            None
        } else {
            Some(self.s - self.f2 / v)
        }
    }

    fn slack(&self, x: f64) -> f64 {
        match (self.lower(x), self.upper(x)) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => f64::NEG_INFINITY,
        }
    }

    fn domain(&self) -> Option<(f64, f64)> {
        let lo = if self.e2 == 0.0 {
            if self.q <= 0.0 {
                return None;
            }
            1.0 / self.p
        } else {
            let d = self.p - self.e2 / self.q;
            if self.q <= 0.0 || d <= 0.0 {
                return None;
            }
            1.0 / d
        };
        (self.p > 0.0 && lo <= self.r).then_some((lo, self.r))
    }

    /// Returns the best `x` and the slack there.
    fn solve(&self) -> Option<(f64, f64)> {
        let (dlo, dhi) = self.domain()?;
        let step = (GRID_HI_EXP - GRID_LO_EXP) / (GRID_POINTS - 1) as f64;
        let grid: Vec<f64> = (0..GRID_POINTS).map(|i| 10f64.powf(GRID_LO_EXP + step * i as f64)).collect();
        let best = grid
            .iter()
            .enumerate()
            .map(|(i, &x)| (i, self.slack(x)))
            .filter(|(_, s)| s.is_finite())
            .max_by(|a, b| a.1.total_cmp(&b.1));
        let (mut lo, mut hi) = match best {
            Some((i, _)) => (
                if i > 0 { grid[i - 1].max(dlo) } else { dlo },
                if i + 1 < GRID_POINTS { grid[i + 1].min(dhi) } else { dhi },
            ),
            None => (dlo, dhi),
        };
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let (mut f1, mut f2) = (self.slack(x1), self.slack(x2));
        for _ in 0..200 {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = self.slack(x2);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = self.slack(x1);
            }
            if hi - lo <= 1e-15 * hi.abs().max(1.0) {
                break;
            }
        }
        let mut cands = vec![(x1, f1), (x2, f2), (dlo, self.slack(dlo)), (dhi, self.slack(dhi))];
        if let Some((i, s)) = best {
            cands.push((grid[i], s));
        }
        cands.into_iter().filter(|c| c.1.is_finite()).max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

/// Whether some `x, y > 0` satisfy both `(A - 1/x)(C - 1/y) >= E^2` and
/// `(B - x)(D - y) >= F^2` with non-negative factors.
pub fn ww_pair_exists(p: &WernerWolf2x2Params) -> bool {
    let prob = PairProblem { p: p.A, q: p.C, e2: p.E * p.E, r: p.B, s: p.D, f2: p.F * p.F };
    prob.solve().is_some_and(|(_, slack)| slack >= -FEASIBLE_TOL)
}

/// Checks `gamma >= gamma_1 + ... + gamma_k` for pure local covariance
/// matrices laid out in mode order.
pub fn refined_ww_check_multi(gamma: &CovarianceMatrix, locals: &[&CovarianceMatrix]) -> Result<bool> {
    for l in locals {
        let det = l.matrix().determinant();
        if (det - 1.0).abs() > PURITY_TOL {
            return Err(Error::ImpureLocalCM(det));
        }
    }
    let total: usize = locals.iter().map(|l| l.modes()).sum();
    if total != gamma.modes() {
        return Err(Error::ModeMismatch(total, gamma.modes()));
    }
    let sum = CovarianceMatrix::direct_sum(locals);
    Ok(min_eigenvalue(&(gamma.matrix() - sum.matrix())) >= -PSD_TOL)
}

pub fn refined_ww_check(
    gamma: &CovarianceMatrix,
    gamma_a: &CovarianceMatrix,
    gamma_b: &CovarianceMatrix,
) -> Result<bool> {
    refined_ww_check_multi(gamma, &[gamma_a, gamma_b])
}

/// Certificate `gamma_A = diag(1/x, x)`, `gamma_B = diag(y, 1/y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinedCertificate {
    pub x: f64,
    pub y: f64,
}

impl RefinedCertificate {
    pub fn local_cms(&self) -> (CovarianceMatrix, CovarianceMatrix) {
        let d = |u: f64, v: f64| {
            CovarianceMatrix::from_trusted(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![u, v])))
        };
        (d(1.0 / self.x, self.x), d(self.y, 1.0 / self.y))
    }
}

/// Searches for a pure product certificate below a standard-form state.
pub fn refined_ww_search(sf: &StandardForm) -> Option<RefinedCertificate> {
    // With w = 1/y the two 2x2 blocks read (a - 1/x)(b - 1/w) >= c1^2 and
    // (a - x)(b - w) >= c2^2.
    let prob = PairProblem { p: sf.a, q: sf.b, e2: sf.c1 * sf.c1, r: sf.a, s: sf.b, f2: sf.c2 * sf.c2 };
    let (x, slack) = prob.solve()?;
    if slack < -FEASIBLE_TOL {
        return None;
    }
    let w = 0.5 * (prob.lower(x)? + prob.upper(x)?);
    let cert = RefinedCertificate { x, y: 1.0 / w };
    let (ga, gb) = cert.local_cms();
    let gamma = sf.to_matrix_unchecked();
    let ok = refined_ww_check(&gamma, &ga, &gb).unwrap_or(false);
    ok.then_some(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::simon_criterion;
    use approx::assert_abs_diff_eq;
    use nalgebra::Matrix2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ww(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> WernerWolf2x2Params {
        WernerWolf2x2Params { A: a, B: b, C: c, D: d, E: e, F: f }
    }

    #[test]
    fn product_vacuum_boundary() {
        let p = ww(1.0, 1.0, 1.0, 1.0, 0.0, 0.0);
        assert_abs_diff_eq!(werner_wolf_2x2(&p).margin, 0.0);
        assert!(ww_pair_exists(&p));
    }

    #[test]
    fn uncorrelated_always_has_pair() {
        for (a, b, c, d) in [(1.0, 2.0, 3.0, 1.5), (4.0, 1.0, 1.0, 1.0)] {
            assert!(ww_pair_exists(&ww(a, b, c, d, 0.0, 0.0)));
        }
    }

    #[test]
    fn symmetric_reduces_to_two_factor_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let a = rng.gen_range(1.0..4.0);
            let e = rng.gen_range(0.0..a);
            let m = werner_wolf_2x2(&ww(a, a, a, a, e, e)).margin;
            let two = (a - e) * (a - e) - 1.0;
            if m.abs() > 1e-9 {
                assert_eq!(m > 0.0, two > 0.0, "a={a} e={e}");
            }
        }
    }

    #[test]
    fn closed_form_matches_search_examples() {
        let p = ww(2.0, 2.0, 2.0, 2.0, 1.5, 1.5);
        assert_eq!(werner_wolf_2x2(&p).margin >= 0.0, ww_pair_exists(&p));
        let q = ww(1.0, 1.0, 1.0, 1.0, 0.5, 0.5);
        assert_abs_diff_eq!(werner_wolf_2x2(&q).margin, -0.9375, epsilon = 1e-15);
        assert!(!ww_pair_exists(&q));
    }

    #[test]
    fn refined_check_examples() {
        let ga = CovarianceMatrix::vacuum(1);
        let gb = CovarianceMatrix::from_trusted(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 0.5])));
        let g = CovarianceMatrix::direct_sum(&[&ga, &gb]);
        assert!(refined_ww_check(&g, &ga, &gb).unwrap());

        let sf = StandardForm { a: 3.0, b: 3.0, c1: 2.0, c2: 2.0 }.to_cm().unwrap();
        let v = CovarianceMatrix::vacuum(1);
        assert!(refined_ww_check(&sf, &v, &v).unwrap());

        let thermal = CovarianceMatrix::thermal(1.0).unwrap();
        assert!(matches!(refined_ww_check(&sf, &thermal, &v), Err(Error::ImpureLocalCM(_))));
    }

    fn random_pure(rng: &mut ChaCha8Rng) -> CovarianceMatrix {
        let t: f64 = rng.gen_range(0.0..std::f64::consts::PI);
        let s: f64 = rng.gen_range(-1.5..1.5);
        let rot = Matrix2::new(t.cos(), -t.sin(), t.sin(), t.cos());
        let m = rot * Matrix2::new(s.exp(), 0.0, 0.0, (-s).exp()) * rot.transpose();
        CovarianceMatrix::from_trusted(DMatrix::from_fn(2, 2, |i, j| m[(i, j)]))
    }

    #[test]
    fn squeezed_vacuum_defeats_pure_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = CovarianceMatrix::two_mode_squeezed_vacuum(0.4);
        for _ in 0..100 {
            let (ga, gb) = (random_pure(&mut rng), random_pure(&mut rng));
            assert!(!refined_ww_check(&g, &ga, &gb).unwrap());
        }
    }

    #[test]
    fn search_finds_certificates() {
        let prod = StandardForm { a: 2.0, b: 3.0, c1: 0.0, c2: 0.0 };
        assert!(refined_ww_search(&prod).is_some());
        let boundary = StandardForm { a: 3.0, b: 3.0, c1: 2.0, c2: 2.0 };
        let cert = refined_ww_search(&boundary).expect("certificate");
        assert_abs_diff_eq!(cert.x, 1.0, epsilon = 1e-4);
    }

    #[test]
    fn search_agrees_with_simon() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut n = 0;
        while n < 500 {
            let sf = StandardForm {
                a: rng.gen_range(1.0..4.0),
                b: rng.gen_range(1.0..4.0),
                c1: rng.gen_range(0.0..3.0),
                c2: rng.gen_range(-3.0..3.0),
            };
            if sf.to_cm().is_err() {
                continue;
            }
            let m = simon_criterion(&sf).margin;
            if m.abs() < 1e-6 {
                continue;
            }
            n += 1;
            let found = refined_ww_search(&sf);
            assert_eq!(found.is_some(), m > 0.0, "{sf:?} margin {m}");
            if let Some(c) = found {
                let (ga, gb) = c.local_cms();
                assert!(refined_ww_check(&sf.to_cm().unwrap(), &ga, &gb).unwrap());
            }
        }
    }
}
