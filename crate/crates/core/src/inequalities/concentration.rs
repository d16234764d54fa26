//! Concentration function of the reference measure and the bounds it obeys.
//!
//! `α(r) = sup { 1 - ν(B(A, r)) : ν(A) ≥ ½ }` is estimated from below by
//! maximizing over a fixed family of sets, so every estimate is a valid lower
//! bound for the grid measure and the estimate is nonincreasing in `r`.

use serde::Serialize;

use crate::domain::{k_modulus, shift_normalize, Domain1D, ReferencePotential};
use crate::error::{invalid, Result};
use crate::inequalities::{curvature_hypothesis, is_normalized};
use crate::mcalc::MParam;
use crate::report::{Outcome, Verdict};

const NORMALIZATION_TOL: f64 = 1e-6;
/// Quantile resolution of the interval families.
const S_STEPS: usize = 400;
/// Largest number of intervals in a union.
const MAX_PIECES: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub r_grid: Vec<f64>,
    pub alpha_lower: Vec<f64>,
    /// Family member attaining each estimate.
    pub family: Vec<String>,
    /// Explicit upper bound for the exponent range, `∞` when none applies.
    pub bound: Vec<f64>,
    pub bound_name: String,
    pub slack: Vec<f64>,
    pub notes: Vec<String>,
}

/// `G_c = ∫ σ^c dω`.
pub fn g_c_moment(r: &ReferencePotential, d: &Domain1D, c: f64) -> Result<f64> {
    if !(c > 0.5 && c.is_finite()) {
        return Err(invalid(format!("G_c needs c > 1/2, got {c}")));
    }
    Ok(r.sigma_power_integral(d, c))
}

/// `½ e^{-Kr²/4 + 2}`, the normal concentration bound of the classical case.
pub fn classical_limit_bound(k: f64, r: f64) -> f64 {
    0.5 * (2.0 - 0.25 * k * r * r).exp()
}

/// `(2m-1)^{1/(m-1)}/2 · exp_m(-mK r² / (4 ω(M)^{1-m}))` for `m ∈ (1/2, 1)`.
pub fn m_normal_bound(p: &MParam, k: f64, omega_mass: f64, r: f64) -> Result<f64> {
    let m = p.m();
    if !p.supports_concentration_lt1() {
        return Err(invalid(format!("m-normal bound needs m in (1/2, 1), got {m}")));
    }
    let t = -m * k * r * r / (4.0 * omega_mass.powf(1.0 - m));
    Ok(0.5 * (2.0 * m - 1.0).powf(1.0 / (m - 1.0)) * p.exp_m(t)?)
}

/// `1 / [(2/m-1)^{1/(m-1)} exp_m(mK ‖σ‖∞^{1-m} r²/4)]` for `m ∈ (1, 2)`.
pub fn sup_norm_bound(p: &MParam, k: f64, sigma_max: f64, r: f64) -> Result<f64> {
    let m = p.m();
    if !(m > 1.0 && m < 2.0) {
        return Err(invalid(format!("sup-norm bound needs m in (1, 2), got {m}")));
    }
    let t = m * k * sigma_max.powf(1.0 - m) * r * r / 4.0;
    Ok(1.0 / ((2.0 / m - 1.0).powf(1.0 / (m - 1.0)) * p.exp_m(t)?))
}

/// Both sides of the implicit bound
/// `α^{θ-m} ln_m(2α) ≤ -G_c^{θ-1} {(√(mK/2) r - √G_m)² - G_m}` with
/// `c = (m-θ)/(1-θ)`. The left side increases with `α` on `(0, ½]`, so a lower
/// estimate of `α` that violates it would also expose the true value.
pub fn implicit_sides(p: &MParam, alpha: f64, r: f64, k: f64, g_m: f64, g_c: f64, theta: f64) -> (f64, f64) {
    let m = p.m();
    let lhs = if alpha <= 0.0 {
        f64::NEG_INFINITY
    } else {
        alpha.powf(theta - m) * p.ln_m_unchecked(2.0 * alpha)
    };
    let inner = ((0.5 * m * k).sqrt() * r - g_m.sqrt()).powi(2) - g_m;
    (lhs, -g_c.powf(theta - 1.0) * inner)
}

/// Admissible `θ`: `[0, 2m-1)` for `m ∈ (1/2, 1)`, `[0, 1)` for `m ∈ (1, 2]`.
fn theta_range(m: f64) -> Option<f64> {
    if m > 0.5 && m < 1.0 {
        Some(2.0 * m - 1.0)
    } else if m > 1.0 && m <= 2.0 {
        Some(1.0)
    } else {
        None
    }
}

/// Piecewise-linear distribution function of `ν`, extended periodically on
/// a circle.
struct Cdf {
    f: Vec<f64>,
    a: f64,
    h: f64,
    length: f64,
    circle: bool,
}

impl Cdf {
    fn new(r: &ReferencePotential, d: &Domain1D) -> Self {
        let masses: Vec<f64> = r.sigma().iter().zip(d.weight()).map(|(s, w)| s * w * d.h()).collect();
        let total: f64 = masses.iter().sum();
        let mut f = vec![0.0];
        let mut acc = 0.0;
        for m in masses {
            acc += m;
            f.push(acc / total);
        }
        Self {
            f,
            a: d.a(),
            h: d.h(),
            length: d.length(),
            circle: d.is_circle(),
        }
    }

    fn base(&self, x: f64) -> f64 {
        let n = self.f.len() - 1;
        let s = ((x - self.a) / self.h).clamp(0.0, n as f64);
        let i = (s.floor() as usize).min(n - 1);
        let t = s - i as f64;
        self.f[i] + t * (self.f[i + 1] - self.f[i])
    }

    fn at(&self, x: f64) -> f64 {
        if self.circle {
            let turns = ((x - self.a) / self.length).floor();
            turns + self.base(x - turns * self.length)
        } else {
            self.base(x)
        }
    }

    /// Generalized inverse on `[0, 1]`.
    fn quantile(&self, s: f64) -> f64 {
        let n = self.f.len() - 1;
        let i = self.f.partition_point(|&v| v < s).clamp(1, n);
        let (lo, hi) = (self.f[i - 1], self.f[i]);
        let t = if hi > lo {
            ((s - lo) / (hi - lo)).clamp(0.0, 1.0)
        } else {
            0.0
        };
        self.a + (i as f64 - 1.0 + t) * self.h
    }

    /// `ν` of a union of intervals, each given by endpoints `u ≤ v`.
    fn union_mass(&self, mut pieces: Vec<(f64, f64)>) -> f64 {
        pieces.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut total = 0.0;
        let mut cur: Option<(f64, f64)> = None;
        for (u, v) in pieces {
            match cur {
                Some((cu, cv)) if u <= cv => cur = Some((cu, cv.max(v))),
                Some((cu, cv)) => {
                    total += self.span(cu, cv);
                    cur = Some((u, v));
                }
                None => cur = Some((u, v)),
            }
        }
        if let Some((cu, cv)) = cur {
            total += self.span(cu, cv);
        }
        total.min(1.0)
    }

    fn span(&self, u: f64, v: f64) -> f64 {
        if self.circle && v - u >= self.length {
            return 1.0;
        }
        self.at(v) - self.at(u)
    }
}

/// Candidate half-mass sets, as unions of quantile intervals `[s0, s1]`.
fn family() -> Vec<(String, Vec<(f64, f64)>)> {
    let mut out = Vec::new();
    for i in 0..=S_STEPS / 2 {
        let s = i as f64 / S_STEPS as f64;
        out.push((format!("interval [{s:.4}, {:.4}]", s + 0.5), vec![(s, s + 0.5)]));
    }
    for k in 2..=MAX_PIECES {
        let half = 0.25 / k as f64;
        let pieces = (0..k)
            .map(|i| {
                let c = (i as f64 + 0.5) / k as f64;
                (c - half, c + half)
            })
            .collect();
        out.push((format!("{k} spread intervals"), pieces));
    }
    out
}

/// `1 - ν(B(A, r))` for `A` the complement of the open quantile interval
/// `(Q(s), Q(s + ½))`.
fn complement_value(cdf: &Cdf, s: f64, r: f64) -> f64 {
    let (u, v) = (cdf.quantile(s), cdf.quantile(s + 0.5));
    if v - u <= 2.0 * r {
        0.0
    } else {
        cdf.span(u + r, v - r)
    }
}

/// Smallest superlevel set of `σ` with mass at least ½, built cell by cell.
fn greedy_cells(r: &ReferencePotential, d: &Domain1D) -> Vec<(f64, f64)> {
    let masses: Vec<f64> = r.sigma().iter().zip(d.weight()).map(|(s, w)| s * w).collect();
    let total: f64 = masses.iter().sum();
    let mut order: Vec<usize> = (0..masses.len()).collect();
    order.sort_by(|&i, &j| r.sigma()[j].total_cmp(&r.sigma()[i]).then(i.cmp(&j)));
    let mut acc = 0.0;
    let mut cells = Vec::new();
    for i in order {
        if acc >= 0.5 * total {
            break;
        }
        acc += masses[i];
        let left = d.a() + i as f64 * d.h();
        cells.push((left, left + d.h()));
    }
    cells
}

/// Lower estimates of `α(r)` over the candidate family, with the explicit
/// upper bound that applies to the exponent.
pub fn alpha_estimate(r: &ReferencePotential, d: &Domain1D, r_grid: &[f64]) -> Result<ConcentrationReport> {
    if !is_normalized(d, r, NORMALIZATION_TOL) {
        return Err(invalid(format!("reference mass {} is not 1", r.mass(d))));
    }
    if r_grid.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
        return Err(invalid("radii must be finite and nonnegative"));
    }
    let cdf = Cdf::new(r, d);
    let members = family();
    let greedy = greedy_cells(r, d);
    let mut alpha_lower = Vec::with_capacity(r_grid.len());
    let mut best_name = Vec::with_capacity(r_grid.len());
    for &rad in r_grid {
        let mut best = (0.0, String::from("none"));
        let mut consider = |value: f64, name: &dyn Fn() -> String| {
            if value > best.0 {
                best = (value, name());
            }
        };
        for (name, pieces) in &members {
            if d.is_circle() && pieces.len() > 1 {
                continue;
            }
            let enlarged = pieces
                .iter()
                .map(|&(s0, s1)| (cdf.quantile(s0) - rad, cdf.quantile(s1.min(1.0)) + rad))
                .collect();
            consider(1.0 - cdf.union_mass(enlarged), &|| name.clone());
        }
        for i in 0..=S_STEPS / 2 {
            let s = i as f64 / S_STEPS as f64;
            consider(complement_value(&cdf, s, rad), &|| {
                format!("complement of ({s:.4}, {:.4})", s + 0.5)
            });
        }
        let enlarged = greedy.iter().map(|&(u, v)| (u - rad, v + rad)).collect();
        consider(1.0 - cdf.union_mass(enlarged), &|| "greedy superlevel cells".into());
        alpha_lower.push(best.0.clamp(0.0, 0.5));
        best_name.push(best.1);
    }
    // The family is fixed, so the maximum cannot increase with r; enforce it
    // against rounding in the distribution function.
    let mut order: Vec<usize> = (0..r_grid.len()).collect();
    order.sort_by(|&i, &j| r_grid[i].total_cmp(&r_grid[j]));
    for w in order.windows(2) {
        if alpha_lower[w[1]] > alpha_lower[w[0]] {
            alpha_lower[w[1]] = alpha_lower[w[0]];
        }
    }

    let p = r.p();
    let mut notes: Vec<String> = p.model_note().map(String::from).into_iter().collect();
    let k = k_modulus(r, d)?;
    let curvature = curvature_hypothesis(d, r, 1e-9)?.is_some();
    let m = p.m();
    let (bound, bound_name) = if !(k > 0.0 && curvature) {
        notes.push("K <= 0 or Ric_N < 0: no explicit bound".into());
        (vec![f64::INFINITY; r_grid.len()], "none".to_string())
    } else if p.supports_concentration_lt1() {
        let omega = d.omega_mass();
        notes.push(format!("ω(M) = {omega} on the truncated domain"));
        let b = r_grid
            .iter()
            .map(|&x| m_normal_bound(p, k, omega, x))
            .collect::<Result<Vec<_>>>()?;
        (b, "m_normal".to_string())
    } else if m > 1.0 && m < 2.0 {
        let sup = r.sigma().iter().copied().fold(0.0, f64::max);
        let b = r_grid
            .iter()
            .map(|&x| sup_norm_bound(p, k, sup, x))
            .collect::<Result<Vec<_>>>()?;
        (b, "sup_norm".to_string())
    } else {
        notes.push(format!("no explicit bound for m = {m}"));
        (vec![f64::INFINITY; r_grid.len()], "none".to_string())
    };
    let slack = bound.iter().zip(&alpha_lower).map(|(b, a)| b - a).collect();
    Ok(ConcentrationReport {
        r_grid: r_grid.to_vec(),
        alpha_lower,
        family: best_name,
        bound,
        bound_name,
        slack,
        notes,
    })
}

/// Verdicts for the implicit bound at exponent `theta` and for the explicit
/// bound carried by the report. Each verdict records the radius of least slack.
pub fn conc_bound_check(
    r: &ReferencePotential,
    d: &Domain1D,
    report: &ConcentrationReport,
    theta: f64,
) -> Result<Vec<Verdict>> {
    let p = r.p();
    let m = p.m();
    let Some(theta_max) = theta_range(m) else {
        return Ok(vec![Verdict::not_applicable(
            "concentration_implicit",
            p,
            format!("m = {m} outside (1/2, 1) ∪ (1, 2]"),
        )]);
    };
    if !(theta >= 0.0 && theta < theta_max) {
        return Err(invalid(format!("θ = {theta} outside [0, {theta_max})")));
    }
    if !is_normalized(d, r, NORMALIZATION_TOL) {
        return Ok(vec![Verdict::not_applicable("concentration_implicit", p, "ν(M) != 1")]);
    }
    let k = k_modulus(r, d)?;
    let Some(ric) = curvature_hypothesis(d, r, 1e-9)? else {
        return Ok(vec![Verdict::not_applicable(
            "concentration_implicit",
            p,
            "Ric_N >= 0 fails",
        )]);
    };
    if !(k > 0.0) {
        return Ok(vec![Verdict::not_applicable(
            "concentration_implicit",
            p,
            format!("K = {k} is not positive"),
        )]);
    }
    let hyp = ["ν(M) = 1", "Hess Ψ >= K > 0", ric];
    let g_m = r.sigma_power_integral(d, m);
    let c = (m - theta) / (1.0 - theta);
    let g_c = g_c_moment(r, d, c)?;
    let tol = d.h();

    let mut worst: Option<(f64, f64, f64, f64)> = None;
    for (&rad, &alpha) in report.r_grid.iter().zip(&report.alpha_lower) {
        let (lhs, rhs) = implicit_sides(p, alpha, rad, k, g_m, g_c, theta);
        if lhs == f64::NEG_INFINITY {
            continue;
        }
        let scaled = (rhs - lhs) / (1.0 + rhs.abs());
        if worst.is_none_or(|(w, ..)| scaled < w) {
            worst = Some((scaled, lhs, rhs, rad));
        }
    }
    let mut verdicts = Vec::new();
    let implicit = match worst {
        None => Verdict::compare("concentration_implicit", p, f64::NEG_INFINITY, 0.0, tol),
        Some((_, lhs, rhs, rad)) => {
            Verdict::compare("concentration_implicit", p, lhs, rhs, tol * (1.0 + rhs.abs())).with_tolerance("r", rad)
        }
    };
    verdicts.push(
        implicit
            .with_hypotheses(&hyp)
            .with_tolerance("theta", theta)
            .with_tolerance("K", k)
            .with_tolerance("G_m", g_m)
            .with_tolerance("G_c", g_c),
    );

    if report.bound_name != "none" {
        let mut idx = 0;
        for i in 0..report.r_grid.len() {
            if report.slack[i] < report.slack[idx] {
                idx = i;
            }
        }
        let name = format!("concentration_{}", report.bound_name);
        let v = if report.r_grid.is_empty() {
            Verdict::compare(&name, p, f64::NEG_INFINITY, 0.0, tol)
        } else {
            Verdict::compare(&name, p, report.alpha_lower[idx], report.bound[idx], tol)
                .with_tolerance("r", report.r_grid[idx])
        };
        verdicts.push(v.with_hypotheses(&hyp).with_tolerance("K", k));
    }
    Ok(verdicts)
}

/// `α(r)` for the normalized reference `Ψ = K x²/2` at each `K`.
pub fn k_sweep(d: &Domain1D, p: MParam, ks: &[f64], radius: f64) -> Result<Vec<(f64, f64)>> {
    ks.iter()
        .map(|&k| {
            if !(k > 0.0) {
                return Err(invalid(format!("K = {k} must be positive")));
            }
            let raw = ReferencePotential::from_fn(d, p, |x| 0.5 * k * x * x)?;
            let (r, _) = shift_normalize(&raw, d)?;
            let rep = alpha_estimate(&r, d, &[radius])?;
            Ok((k, rep.alpha_lower[0]))
        })
        .collect()
}

/// Whether every verdict passed or was vacuous.
pub fn all_hold(verdicts: &[Verdict]) -> bool {
    verdicts.iter().all(|v| v.verdict != Outcome::Fail)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference(m: f64, k: f64, a: f64, cells: usize) -> (Domain1D, ReferencePotential) {
        let d = Domain1D::segment(-a, a, cells).unwrap();
        let p = MParam::one_d(m).unwrap();
        let raw = ReferencePotential::from_fn(&d, p, |x| 0.5 * k * x * x).unwrap();
        let (r, _) = shift_normalize(&raw, &d).unwrap();
        (d, r)
    }

    #[test]
    fn g_one_is_total_mass() {
        let (d, r) = reference(0.75, 1.0, 8.0, 800);
        assert!((g_c_moment(&r, &d, 1.0).unwrap() - 1.0).abs() < 1e-9);
        assert!(g_c_moment(&r, &d, 0.5).is_err());
    }

    #[test]
    fn estimate_is_monotone_and_bounded() {
        let (d, r) = reference(0.75, 1.0, 8.0, 800);
        let grid: Vec<f64> = (0..30).map(|i| 0.2 * i as f64).collect();
        let rep = alpha_estimate(&r, &d, &grid).unwrap();
        assert!(rep.alpha_lower.iter().all(|&a| (0.0..=0.5).contains(&a)));
        assert!(rep.alpha_lower.windows(2).all(|w| w[1] <= w[0]));
        assert!((rep.alpha_lower[0] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn diameter_radius_gives_zero() {
        let (d, r) = reference(1.5, 1.0, 4.0, 400);
        let rep = alpha_estimate(&r, &d, &[8.0]).unwrap();
        assert_eq!(rep.alpha_lower[0], 0.0);
    }

    #[test]
    fn half_line_attains_symmetric_maximum() {
        let (d, r) = reference(0.75, 1.0, 8.0, 1600);
        let rep = alpha_estimate(&r, &d, &[0.5, 1.0, 2.0]).unwrap();
        for name in &rep.family {
            assert!(
                name == "interval [0.0000, 0.5000]" || name == "interval [0.5000, 1.0000]",
                "{name}"
            );
        }
    }

    #[test]
    fn classical_limit_of_m_normal_bound() {
        let p = MParam::one_d(0.999).unwrap();
        for i in 0..=30 {
            let x = 0.1 * i as f64;
            let b = m_normal_bound(&p, 1.0, 1.0, x).unwrap();
            let c = classical_limit_bound(1.0, x);
            assert!((b / c - 1.0).abs() < 1e-2, "r = {x}: {b} vs {c}");
        }
    }
}
