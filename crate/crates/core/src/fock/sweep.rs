use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::iterate::{alternate_maximize_with, random_detect_operator_with, ProductStateVec, DEFAULT_MAX_ROUNDS};
use super::{fock_elements_at, generating_coeffs, m0_eval};
use crate::error::{Error, Result};
use crate::witness::SixParamDetect;

/// Samples whose normalized mean exceeds `1 + FAILURE_TOL` are reported.
pub const FAILURE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub seed: u64,
    pub avg_photon: f64,
    pub m0: f64,
    pub rounds: usize,
    pub converged: bool,
    #[serde(skip)]
    pub detect: SixParamDetect,
    #[serde(skip)]
    pub squeezing: (f64, f64),
}

/// One sample: a random detect operator, a random product state evaluated
/// through the generating function, and an alternating search seeded from
/// the same stream.
pub fn fig1_sample(seed: u64, cutoff: usize) -> Result<SweepRow> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let detect = random_detect_operator_with(&mut rng);
    let g = generating_coeffs(&detect)?;
    let psi = ProductStateVec::random(&mut rng, cutoff);
    let m0 = m0_eval(&g, &psi);
    let op = fock_elements_at(&detect, g.x, g.y, cutoff)?;
    let alt = alternate_maximize_with(&op, &mut rng, DEFAULT_MAX_ROUNDS);
    Ok(SweepRow {
        seed,
        avg_photon: psi.avg_photon(),
        m0,
        rounds: alt.rounds,
        converged: alt.converged,
        detect,
        squeezing: (g.x, g.y),
    })
}

/// `samples` independent samples; sample `i` uses the seed drawn from
/// stream `i` of the master generator, so output does not depend on the
/// thread count.
pub fn sweep_fig1(samples: usize, cutoff: usize, seed: u64) -> Result<Vec<SweepRow>> {
    if cutoff == 0 {
        return Err(Error::InvalidArgument("cutoff must be positive".into()));
    }
    (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            fig1_sample(rng.gen(), cutoff)
        })
        .collect()
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidArgument(format!("csv: {e}"))
}

pub fn write_fig1_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))
}

/// Rows with `m0 > 1 + FAILURE_TOL`, with the operator parameters needed to
/// reproduce them.
pub fn write_failures_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<usize> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["seed", "m1", "m2", "m3", "m4", "m5", "m6", "x", "y", "avg_photon", "m0"]).map_err(csv_error)?;
    let mut count = 0;
    for row in rows.iter().filter(|r| r.m0 > 1.0 + FAILURE_TOL) {
        let mut rec = vec![row.seed.to_string()];
        rec.extend(row.detect.m.iter().map(|v| v.to_string()));
        rec.extend([row.squeezing.0, row.squeezing.1, row.avg_photon, row.m0].iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(csv_error)?;
        count += 1;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    Ok(count)
}
