use serde::Serialize;

use crate::criteria::{Classification, Verdict};

/// Margins this close to zero are flagged as boundary cases.
const BOUNDARY_TOL: f64 = 1e-9;

/// Nine significant digits; fixed notation for moderate magnitudes.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0.00000000".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..9).contains(&exp) {
        format!("{:.*}", (8 - exp) as usize, x)
    } else {
        format!("{x:.8e}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictRecord {
    pub criterion_id: &'static str,
    pub margin: f64,
    pub margin_text: String,
    pub classification: Classification,
    pub boundary: bool,
}

impl From<&Verdict> for VerdictRecord {
    fn from(v: &Verdict) -> Self {
        Self {
            criterion_id: v.criterion.as_str(),
            margin: v.margin,
            margin_text: format_sig9(v.margin),
            classification: v.classification,
            boundary: v.margin.abs() <= BOUNDARY_TOL,
        }
    }
}

impl VerdictRecord {
    pub fn line(&self) -> String {
        let class = match self.classification {
            Classification::Entangled => "entangled",
            Classification::CriterionSatisfied => "criterion_satisfied",
        };
        let mut s = format!("{} margin {} {}", self.criterion_id, self.margin_text, class);
        if self.boundary {
            s.push_str(" boundary");
        }
        s
    }
}
