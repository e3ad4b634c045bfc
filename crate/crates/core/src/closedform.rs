//! Closed-form trace predictions: cross-ratio formulas for separated and
//! overlapping intervals, the Rényi coefficient and separation asymptotics.

use std::f64::consts::PI;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::{cross_ratio_log, multi_cross_ratio_log, set_algebra, Interval, IntervalSet, Partition};
use crate::testfns::{u01, TestFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    TwoInterval,
    NInterval,
    RenyiMutualInformation,
    Intersecting,
    AsymptoticBounded,
    AsymptoticUnbounded,
}

impl FormulaId {
    /// Human-readable statement the value comes from.
    pub fn provenance(self) -> &'static str {
        match self {
            FormulaId::TwoInterval => "two-interval cross-ratio trace formula",
            FormulaId::NInterval => "multi-interval pairwise cross-ratio trace formula",
            FormulaId::RenyiMutualInformation => "Rényi mutual information coefficient (1+α)/(12α)",
            FormulaId::Intersecting => "overlapping-interval measure-ratio formula",
            FormulaId::AsymptoticBounded => "large-separation expansion, two bounded intervals",
            FormulaId::AsymptoticUnbounded => "large-separation expansion, bounded and unbounded interval",
        }
    }
}

/// A closed-form prediction with an echo of its inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormResult {
    pub value: f64,
    pub formula_id: FormulaId,
    pub provenance: &'static str,
    /// Set when the formula is only conjectured for the given test function.
    pub conjectural: bool,
    pub inputs: Value,
}

impl ClosedFormResult {
    fn new(value: f64, formula_id: FormulaId, conjectural: bool, inputs: Value) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::numerical(format!("closed form {formula_id:?} is not finite")));
        }
        Ok(ClosedFormResult { value, formula_id, provenance: formula_id.provenance(), conjectural, inputs })
    }
}

/// `U(0,1;f)/(2π²)`, the universal prefactor of every cross-ratio formula.
pub fn trace_prefactor(f: &TestFunction) -> Result<f64> {
    Ok(u01(f)? / (2.0 * PI * PI))
}

/// `(1+α)/(12α)`.
pub fn renyi_coefficient(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(Error::argument(format!("Rényi index must be positive, got {alpha}")));
    }
    Ok((1.0 + alpha) / (12.0 * alpha))
}

/// `tr Δ(I1,I2;f) = U(0,1;f)/(2π²) · ln(cross ratio)`.
pub fn two_interval_trace(i1: &Interval, i2: &Interval, f: &TestFunction) -> Result<ClosedFormResult> {
    let value = trace_prefactor(f)? * cross_ratio_log(i1, i2)?;
    ClosedFormResult::new(value, FormulaId::TwoInterval, false, json!({ "i1": i1, "i2": i2, "f": f }))
}

/// Multi-interval version: prefactor times the pairwise sum over the partition.
pub fn n_interval_trace(set: &IntervalSet, part: &Partition, f: &TestFunction) -> Result<ClosedFormResult> {
    let value = trace_prefactor(f)? * multi_cross_ratio_log(set, part)?;
    ClosedFormResult::new(value, FormulaId::NInterval, false, json!({ "set": set, "partition": part, "f": f }))
}

/// Rényi mutual information `(1+α)/(12α) · Σ ln(cross ratio)`.
pub fn renyi_ee(set: &IntervalSet, part: &Partition, alpha: f64) -> Result<ClosedFormResult> {
    let value = renyi_coefficient(alpha)? * multi_cross_ratio_log(set, part)?;
    ClosedFormResult::new(value, FormulaId::RenyiMutualInformation, false, json!({ "set": set, "partition": part, "alpha": alpha }))
}

/// `ln[|I1||I2| / (|I1∩I2||I1∪I2|)]`, with unbounded members paired off
/// against the (equally unbounded) union.
pub fn intersecting_log(i1: &Interval, i2: &Interval) -> Result<f64> {
    let alg = set_algebra(i1, i2);
    let inter = alg.intersection.measure();
    if !(inter > 0.0) {
        return Err(Error::domain(format!("{i1} and {i2} do not overlap")));
    }
    if alg.difference.is_empty() || set_algebra(i2, i1).difference.is_empty() {
        return Err(Error::domain(format!("{i1} and {i2} are nested; both differences must be nonempty")));
    }
    match (i1.is_bounded(), i2.is_bounded()) {
        (true, true) => Ok((i1.length() * i2.length() / (inter * alg.union.measure())).ln()),
        (true, false) => Ok((i1.length() / inter).ln()),
        (false, true) => Ok((i2.length() / inter).ln()),
        (false, false) => Err(Error::domain("at most one overlapping interval may be unbounded")),
    }
}

/// Predicted `tr F(I1,I2;f)` for overlapping intervals; proved for
/// polynomial `f`, flagged conjectural otherwise.
pub fn intersecting_trace(i1: &Interval, i2: &Interval, f: &TestFunction) -> Result<ClosedFormResult> {
    let value = trace_prefactor(f)? * intersecting_log(i1, i2)?;
    let conjectural = f.poly_coeffs().is_none();
    ClosedFormResult::new(value, FormulaId::Intersecting, conjectural, json!({ "i1": i1, "i2": i2, "f": f }))
}

/// Exact Rényi mutual information and its leading large-separation term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationExpansion {
    pub r: f64,
    pub exact: f64,
    pub leading: f64,
    pub formula_id: FormulaId,
}

/// Shifts `i2_template` right by `r` and compares the exact Rényi mutual
/// information with its leading term: `(1+α)/(12α)·|I1||I2|/r²` when both
/// are bounded, `(1+α)/(12α)·|I1|/r` when the template is unbounded.
/// With a template adjacent to `i1`, `r` is the gap.
pub fn separation_expansion(i1: &Interval, i2_template: &Interval, r: f64, alpha: f64) -> Result<SeparationExpansion> {
    if !i1.is_bounded() {
        return Err(Error::domain("the fixed interval must be bounded"));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::argument(format!("separation must be positive and finite, got {r}")));
    }
    let i2 = Interval::new(i2_template.lo() + r, i2_template.hi() + r)?;
    let coef = renyi_coefficient(alpha)?;
    let exact = coef * cross_ratio_log(i1, &i2)?;
    let (leading, formula_id) = if i2.is_bounded() {
        (coef * i1.length() * i2.length() / (r * r), FormulaId::AsymptoticBounded)
    } else {
        (coef * i1.length() / r, FormulaId::AsymptoticUnbounded)
    };
    Ok(SeparationExpansion { r, exact, leading, formula_id })
}
