//! Entropy profiles along displacement geodesics.
//!
//! The geodesic between two measures interpolates their quantile edges
//! linearly. The entropy of each intermediate state is evaluated in the same
//! Lagrangian coordinates, which avoids re-gridding noise:
//!
//! ```text
//! H(E) = Σ_j (1/J) [ ρ_j^{m-1}/(m(m-1)) + avg_{[E_{j-1},E_j]} V ] + (1/m)∫σ^m dω
//! ```
//!
//! with `ρ_j = e^{ψ(c_j)}/(JΔ_j)` and `V = -σ^{m-1}/(m-1)`. The cell average of
//! `V` uses Simpson's rule, which is exact for quadratic potentials.

use serde::Serialize;

use crate::domain::{Domain1D, ReferencePotential};
use crate::error::{invalid, Result};
use crate::inequalities::curvature_hypothesis;
use crate::measures::{to_quantile, GridMeasure, QuantileRep};
use crate::report::Outcome;
use crate::transport::{displacement, w2_piecewise};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityProfile {
    pub t: Vec<f64>,
    pub h: Vec<f64>,
    pub k_target: f64,
    pub w2: f64,
    /// `(1-t)H(0) + tH(1) - (K/2)t(1-t)W₂² - H(t)`.
    pub margin: Vec<f64>,
    pub min_margin: f64,
    pub tol: f64,
    pub verdict: Outcome,
    pub notes: Vec<String>,
}

/// Entropy of a quantile state in Lagrangian coordinates.
pub fn lagrangian_entropy(q: &QuantileRep, d: &Domain1D, r: &ReferencePotential) -> f64 {
    let m = r.p().m();
    let k = m - 1.0;
    let jf = q.j() as f64;
    let e = q.edges();
    let sm: Vec<f64> = r.sigma().iter().map(|s| s.powf(m)).collect();
    let mut total = d.integrate(&sm) / m;
    let edge_v: Vec<f64> = e.iter().map(|&x| r.drift_at(x)).collect();
    for c in 0..q.j() {
        let (a, b) = (e[c], e[c + 1]);
        let width = b - a;
        if width <= 0.0 {
            return f64::INFINITY;
        }
        let mid = 0.5 * (a + b);
        let rho = d.psi_at(mid).exp() / (jf * width);
        let internal = rho.powf(k) / (m * k);
        let potential = (edge_v[c] + 4.0 * r.drift_at(mid) + edge_v[c + 1]) / 6.0;
        total += (internal + potential) / jf;
    }
    total
}

/// Profile along the geodesic from `mu0` to `mu1`, each resolved with `j`
/// quantile cells and sampled at `t_grid + 1` equally spaced times.
pub fn convexity_profile(
    mu0: &GridMeasure,
    mu1: &GridMeasure,
    d: &Domain1D,
    r: &ReferencePotential,
    k: f64,
    t_grid: usize,
    j: usize,
) -> Result<ConvexityProfile> {
    let q0 = to_quantile(mu0, d, j)?;
    let q1 = to_quantile(mu1, d, j)?;
    convexity_profile_quantile(&q0, &q1, d, r, k, t_grid)
}

pub fn convexity_profile_quantile(
    q0: &QuantileRep,
    q1: &QuantileRep,
    d: &Domain1D,
    r: &ReferencePotential,
    k: f64,
    t_grid: usize,
) -> Result<ConvexityProfile> {
    if t_grid < 2 {
        return Err(invalid("convexity profile needs at least two time intervals"));
    }
    let mut notes: Vec<String> = r.p().model_note().map(String::from).into_iter().collect();
    let t: Vec<f64> = (0..=t_grid).map(|i| i as f64 / t_grid as f64).collect();
    let w2 = w2_piecewise(q0, q1)?;
    let h = t
        .iter()
        .map(|&s| Ok(lagrangian_entropy(&displacement(q0, q1, s)?, d, r)))
        .collect::<Result<Vec<f64>>>()?;
    let (h0, h1) = (h[0], h[t_grid]);
    let margin: Vec<f64> = t
        .iter()
        .zip(&h)
        .map(|(&s, &hs)| (1.0 - s) * h0 + s * h1 - 0.5 * k * s * (1.0 - s) * w2 * w2 - hs)
        .collect();
    let min_margin = margin.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = h.iter().filter(|v| v.is_finite()).fold(0.0f64, |a, v| a.max(v.abs()));
    let tol = 1e-4 * (1.0 + scale);
    let verdict = if curvature_hypothesis(d, r, 1e-9)?.is_none() {
        notes.push("Ric_N >= 0 fails at some node".into());
        Outcome::NotApplicable
    } else if !within_m0(q0, d, r) || !within_m0(q1, d, r) {
        notes.push("an endpoint charges the complement of M0".into());
        Outcome::NotApplicable
    } else if !(h0.is_finite() && h1.is_finite()) {
        Outcome::Vacuous
    } else if min_margin >= -tol {
        Outcome::Pass
    } else {
        Outcome::Fail
    };
    Ok(ConvexityProfile {
        t,
        h,
        k_target: k,
        w2,
        margin,
        min_margin,
        tol,
        verdict,
        notes,
    })
}

/// For `m > 1`, whether every quantile edge lies in the closure of
/// `M0 = {Ψ < 1/(m-1)}`; the end edges may overhang by one cell.
fn within_m0(q: &QuantileRep, d: &Domain1D, r: &ReferencePotential) -> bool {
    let m = r.p().m();
    if m < 1.0 {
        return true;
    }
    let cut = 1.0 / (m - 1.0);
    let e = q.edges();
    let n = e.len();
    let inside = |x: f64| r.potential_at(x) <= cut + 1e-9;
    e[1..n - 1].iter().all(|&x| inside(x))
        && inside((e[0] + d.h()).min(e[1]))
        && inside((e[n - 1] - d.h()).max(e[n - 2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::shift_normalize;
    use crate::entropy::h_m;
    use crate::mcalc::MParam;
    use crate::measures::{m_gaussian, MGaussianBuilder};

    #[test]
    fn matches_grid_entropy() {
        let d = Domain1D::segment(-6.0, 6.0, 2400).unwrap();
        for (m, j, tol) in [(1.5, 1024, 1e-3), (0.75, 16384, 3e-3)] {
            let p = MParam::one_d(m).unwrap();
            let r = ReferencePotential::from_fn(&d, p, |x| x * x / 2.0).unwrap();
            let (r, _) = shift_normalize(&r, &d).unwrap();
            let g = MGaussianBuilder::new(p, 0.4, 0.25).tail_tol(1e-3).build(&d).unwrap();
            let q = to_quantile(&g.measure, &d, j).unwrap();
            let lag = lagrangian_entropy(&q, &d, &r);
            let grid = h_m(&p, &g.measure, &r, &d).unwrap().value;
            assert!(
                (lag - grid).abs() < tol * (1.0 + grid.abs()),
                "m = {m}: {lag} vs {grid}"
            );
        }
    }

    #[test]
    fn identical_endpoints_have_zero_margin() {
        let d = Domain1D::segment(-5.0, 5.0, 500).unwrap();
        let p = MParam::one_d(1.5).unwrap();
        let r = ReferencePotential::from_fn(&d, p, |x| x * x / 2.0).unwrap();
        let mu = m_gaussian(&p, 0.2, 0.2, &d).unwrap().measure;
        let prof = convexity_profile(&mu, &mu, &d, &r, 1.0, 8, 128).unwrap();
        assert!(prof.margin.iter().all(|m| m.abs() < 1e-12));
        assert_eq!(prof.verdict, Outcome::Pass);
    }
}
