//! One-sided numerical checks of displacement convexity, functional
//! inequalities and concentration for the m-relative entropy.
//!
//! Every check returns a [`Verdict`](crate::report::Verdict) (or a report
//! carrying verdicts) and never panics on a failed inequality.

pub mod concentration;
pub mod convexity;
pub mod functional;

use crate::domain::{ric_n, Domain1D, ReferencePotential};
use crate::error::Result;

/// Hypotheses shared by the curvature-based results, as readable labels.
pub(crate) const RIC_FLAT: &str = "Ric_N >= 0 (ψ ≡ 0)";
pub(crate) const RIC_CHECKED: &str = "Ric_N >= 0 (checked at every node)";

/// `Some(label)` when `Ric_N ≥ -tol` holds at every node.
pub(crate) fn curvature_hypothesis(d: &Domain1D, r: &ReferencePotential, tol: f64) -> Result<Option<&'static str>> {
    if d.is_flat() {
        return Ok(Some(RIC_FLAT));
    }
    for i in 0..d.len() {
        if ric_n(d, r.p(), i)?.value < -tol {
            return Ok(None);
        }
    }
    Ok(Some(RIC_CHECKED))
}

/// Whether `ν(M) = 1` to within `tol`.
pub(crate) fn is_normalized(d: &Domain1D, r: &ReferencePotential, tol: f64) -> bool {
    (r.mass(d) - 1.0).abs() <= tol
}
