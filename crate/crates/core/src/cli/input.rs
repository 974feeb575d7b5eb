//! JSON state descriptions.
//!
//! Accepted documents:
//!
//! - `{"cm": [[...], ...]}`: raw covariance matrix, `(x1, p1, x2, p2, ...)`
//! - `{"family": "standard_form", "a", "b", "c1", "c2"}`
//! - `{"family": "squeezed_thermal", "a", "b", "c"}`
//! - `{"family": "symmetric_two_mode", "a", "c1", "c2"}`
//! - `{"family": "werner_wolf_2x2", "A", "B", "C", "D", "E", "F"}`
//! - `{"family": "symmetric_multimode", "n", "a", "b", "c1", "c2"}`
//! - `{"family": "ghz", "n", "a", "c"}`
//! - `{"family": "ngpasg", "kernel": {...}, "add": [...], "sub": [...]}`
//!
//! Detect operators are `{"detect": [m1, m2, m3, m4, m5, m6]}`.

use serde_json::Value;

use super::CliError;
use crate::criteria::{SymmetricMultimodeParams, WernerWolf2x2Params};
use crate::nongaussian::NGPASGSpec;
use crate::symplectic::{CovarianceMatrix, StandardForm};
use crate::witness::SixParamDetect;

#[derive(Debug, Clone, PartialEq)]
pub enum StateDesc {
    Cm(CovarianceMatrix),
    StandardForm(StandardForm),
    WernerWolf2x2(WernerWolf2x2Params),
    SymmetricMultimode(SymmetricMultimodeParams),
    Ghz { n: usize, a: f64, c: f64 },
    Ngpasg(NGPASGSpec),
}

impl StateDesc {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Cm(_) => "cm",
            Self::StandardForm(_) => "standard_form",
            Self::WernerWolf2x2(_) => "werner_wolf_2x2",
            Self::SymmetricMultimode(_) => "symmetric_multimode",
            Self::Ghz { .. } => "ghz",
            Self::Ngpasg(_) => "ngpasg",
        }
    }

    /// Covariance matrix of the state; the kernel for photon-added states.
    pub fn covariance(&self) -> crate::Result<CovarianceMatrix> {
        match self {
            Self::Cm(g) => Ok(g.clone()),
            Self::StandardForm(sf) => sf.to_cm(),
            Self::WernerWolf2x2(p) => p.to_cm(),
            Self::SymmetricMultimode(p) => p.to_cm(),
            Self::Ghz { n, a, c } => SymmetricMultimodeParams::ghz(*a, *c, *n).to_cm(),
            Self::Ngpasg(s) => Ok(s.kernel.clone()),
        }
    }
}

fn schema(pointer: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Schema { pointer: pointer.into(), message: message.into() }
}

fn child(ptr: &str, key: &str) -> String {
    format!("{ptr}/{}", key.replace('~', "~0").replace('/', "~1"))
}

fn field<'a>(v: &'a Value, ptr: &str, key: &str) -> Result<&'a Value, CliError> {
    v.get(key).ok_or_else(|| schema(ptr, format!("missing field `{key}`")))
}

fn num(v: &Value, ptr: &str, key: &str) -> Result<f64, CliError> {
    let p = child(ptr, key);
    let x = field(v, ptr, key)?.as_f64().ok_or_else(|| schema(&p, "expected a number"))?;
    if !x.is_finite() {
        return Err(schema(p, "expected a finite number"));
    }
    Ok(x)
}

fn count(v: &Value, ptr: &str) -> Result<usize, CliError> {
    v.as_u64().map(|n| n as usize).ok_or_else(|| schema(ptr, "expected a non-negative integer"))
}

fn numbers(v: &Value, ptr: &str) -> Result<Vec<f64>, CliError> {
    let arr = v.as_array().ok_or_else(|| schema(ptr, "expected an array"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_f64().filter(|x| x.is_finite()).ok_or_else(|| schema(format!("{ptr}/{i}"), "expected a finite number"))
        })
        .collect()
}

fn counts(v: &Value, ptr: &str) -> Result<Vec<usize>, CliError> {
    let arr = v.as_array().ok_or_else(|| schema(ptr, "expected an array"))?;
    arr.iter().enumerate().map(|(i, x)| count(x, &format!("{ptr}/{i}"))).collect()
}

fn compute_at(ptr: &str, r: crate::Result<StandardForm>) -> Result<StandardForm, CliError> {
    r.map_err(|e| schema(ptr, e.to_string()))
}

fn parse_cm(v: &Value, ptr: &str) -> Result<CovarianceMatrix, CliError> {
    let rows = v.as_array().ok_or_else(|| schema(ptr, "expected an array of rows"))?;
    let rows =
        rows.iter().enumerate().map(|(i, r)| numbers(r, &format!("{ptr}/{i}"))).collect::<Result<Vec<_>, _>>()?;
    if rows.len() % 2 == 1 {
        return Err(schema(ptr, format!("odd dimension {}", rows.len())));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != rows.len()) {
        return Err(schema(
            format!("{ptr}/{i}"),
            format!("row has {} entries, expected {}", rows[i].len(), rows.len()),
        ));
    }
    CovarianceMatrix::from_rows(&rows).map_err(|e| schema(ptr, e.to_string()))
}

/// Parses a state description rooted at `ptr` (empty for the document).
pub fn parse_state_at(v: &Value, ptr: &str) -> Result<StateDesc, CliError> {
    if !v.is_object() {
        return Err(schema(ptr, "expected an object"));
    }
    if let Some(cm) = v.get("cm") {
        return Ok(StateDesc::Cm(parse_cm(cm, &child(ptr, "cm"))?));
    }
    let family_ptr = child(ptr, "family");
    let family = field(v, ptr, "family")?.as_str().ok_or_else(|| schema(&family_ptr, "expected a string"))?;
    let n = |key: &str| num(v, ptr, key);
    match family {
        "standard_form" => {
            let sf = StandardForm::new(n("a")?, n("b")?, n("c1")?, n("c2")?);
            Ok(StateDesc::StandardForm(compute_at(ptr, sf)?))
        }
        "squeezed_thermal" => {
            let c = n("c")?;
            Ok(StateDesc::StandardForm(compute_at(ptr, StandardForm::new(n("a")?, n("b")?, c, c))?))
        }
        "symmetric_two_mode" => {
            let a = n("a")?;
            Ok(StateDesc::StandardForm(compute_at(ptr, StandardForm::new(a, a, n("c1")?, n("c2")?))?))
        }
        "werner_wolf_2x2" => {
            let p = WernerWolf2x2Params { A: n("A")?, B: n("B")?, C: n("C")?, D: n("D")?, E: n("E")?, F: n("F")? };
            p.to_cm().map_err(|e| schema(ptr, e.to_string()))?;
            Ok(StateDesc::WernerWolf2x2(p))
        }
        "symmetric_multimode" => {
            let modes = count(field(v, ptr, "n")?, &child(ptr, "n"))?;
            let p = SymmetricMultimodeParams { n: modes, a: n("a")?, b: n("b")?, c1: n("c1")?, c2: n("c2")? };
            if modes < 2 {
                return Err(schema(child(ptr, "n"), "need at least two modes"));
            }
            p.to_cm().map_err(|e| schema(ptr, e.to_string()))?;
            Ok(StateDesc::SymmetricMultimode(p))
        }
        "ghz" => {
            let modes = count(field(v, ptr, "n")?, &child(ptr, "n"))?;
            if modes < 2 {
                return Err(schema(child(ptr, "n"), "need at least two modes"));
            }
            let (a, c) = (n("a")?, n("c")?);
            SymmetricMultimodeParams::ghz(a, c, modes).to_cm().map_err(|e| schema(ptr, e.to_string()))?;
            Ok(StateDesc::Ghz { n: modes, a, c })
        }
        "ngpasg" => {
            let kernel_ptr = child(ptr, "kernel");
            let kernel = parse_state_at(field(v, ptr, "kernel")?, &kernel_ptr)?;
            if let StateDesc::Ngpasg(_) = kernel {
                return Err(schema(kernel_ptr, "kernel must be Gaussian"));
            }
            let kernel = kernel.covariance().map_err(|e| schema(&kernel_ptr, e.to_string()))?;
            let adds = counts(field(v, ptr, "add")?, &child(ptr, "add"))?;
            let subs = counts(field(v, ptr, "sub")?, &child(ptr, "sub"))?;
            for (key, c) in [("add", &adds), ("sub", &subs)] {
                if c.len() != kernel.modes() {
                    return Err(schema(
                        child(ptr, key),
                        format!("expected {} counts, got {}", kernel.modes(), c.len()),
                    ));
                }
            }
            Ok(StateDesc::Ngpasg(NGPASGSpec { kernel, adds, subs }))
        }
        other => Err(schema(family_ptr, format!("unknown family `{other}`"))),
    }
}

pub fn parse_state(v: &Value) -> Result<StateDesc, CliError> {
    parse_state_at(v, "")
}

pub fn parse_detect(v: &Value) -> Result<SixParamDetect, CliError> {
    let m = numbers(field(v, "", "detect")?, "/detect")?;
    let m: [f64; 6] =
        m.try_into().map_err(|m: Vec<f64>| schema("/detect", format!("expected 6 entries, got {}", m.len())))?;
    Ok(SixParamDetect { m })
}
