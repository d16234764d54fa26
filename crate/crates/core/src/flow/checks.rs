//! Consistency checks along computed trajectories.

use serde::Serialize;

use crate::domain::{k_modulus, Domain1D, ReferencePotential};
use crate::entropy::fisher_i_m;
use crate::error::{invalid, Error, Result};
use crate::expr::Expr;
use crate::flow::jko::{JkoConfig, JkoSolver};
use crate::flow::pde::{PdeConfig, PdeSolver};
use crate::flow::FlowTrace;
use crate::measures::{to_quantile, GridMeasure, MGaussianBuilder, QuantileRep};
use crate::transport::w2_piecewise;

/// Both sides of the weak formulation tested against `φ(t, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakResidual {
    /// `∫φ dμ_{t₁} - ∫φ dμ_{t₀}`.
    pub lhs: f64,
    /// Time integral of the action of the generator on `φ`.
    pub rhs: f64,
    pub residual: f64,
}

/// Evaluates the weak formulation on a recorded trajectory.
///
/// The diffusion term is integrated by parts once, so the spatial integrand is
/// `∂_xφ` times the centered flux `-e^{-ψ}((1/m)(ρ^m)_x + ρΨ_x)` at the cell
/// interfaces; with no-flux walls this carries no boundary term. Time
/// integrals use the trapezoid rule over the recorded rows, so the trace
/// should be recorded densely. `phi` takes the variables `(t, x)`.
pub fn weak_residual(trace: &FlowTrace, d: &Domain1D, r: &ReferencePotential, phi: &Expr) -> Result<WeakResidual> {
    if trace.measures.len() < 2 || trace.measures.len() != trace.rows.len() {
        return Err(invalid("weak residual needs at least two recorded states"));
    }
    let m = r.p().m();
    let h = d.h();
    let n = d.len();
    let w = d.weight();
    let psi = r.potential();
    let phi_t = phi.diff(0);
    let phi_x = phi.diff(1);
    let integrand = |t: f64, mu: &GridMeasure| -> f64 {
        let rho = mu.rho();
        let masses = mu.cell_masses(d);
        let mut s: f64 = d
            .nodes()
            .iter()
            .zip(&masses)
            .map(|(&x, mi)| phi_t.eval(&[t, x]) * mi)
            .sum();
        let interfaces = if d.is_circle() { n } else { n - 1 };
        for i in 0..interfaces {
            let k = (i + 1) % n;
            let wbar = 0.5 * (w[i] + w[k]);
            let rbar = 0.5 * (rho[i] + rho[k]);
            let dpm = (rho[k].powf(m) - rho[i].powf(m)) / h;
            let dpsi = (psi[k] - psi[i]) / h;
            let flux = -wbar * (dpm / m + rbar * dpsi);
            let x = d.a() + (i + 1) as f64 * h;
            s += phi_x.eval(&[t, x]) * flux * h;
        }
        s
    };
    let moment = |t: f64, mu: &GridMeasure| -> f64 {
        d.nodes()
            .iter()
            .zip(mu.cell_masses(d))
            .map(|(&x, mi)| phi.eval(&[t, x]) * mi)
            .sum()
    };
    let values: Vec<f64> = trace
        .rows
        .iter()
        .zip(&trace.measures)
        .map(|(row, mu)| integrand(row.t, mu))
        .collect();
    let rhs: f64 = trace
        .rows
        .windows(2)
        .zip(values.windows(2))
        .map(|(r, v)| 0.5 * (r[1].t - r[0].t) * (v[0] + v[1]))
        .sum();
    let (first, last) = (&trace.rows[0], trace.rows.last().unwrap());
    let lhs = moment(last.t, trace.measures.last().unwrap()) - moment(first.t, &trace.measures[0]);
    Ok(WeakResidual {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

/// `W₂` between two minimizing-movement trajectories against `e^{-Kt}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContractionReport {
    pub applicable: bool,
    pub note: Option<String>,
    pub k: f64,
    pub times: Vec<f64>,
    pub w2: Vec<f64>,
    /// Least-squares slope of `-ln W₂(t)`.
    pub fitted_rate: f64,
    /// Largest `W₂(t) - e^{-(K-ε)t} W₂(0)` over the trace.
    pub worst_excess: f64,
    pub eps: f64,
    pub holds: bool,
}

pub fn contraction_check(
    mu_a: &QuantileRep,
    mu_b: &QuantileRep,
    d: &Domain1D,
    r: &ReferencePotential,
    cfg: &JkoConfig,
    t_end: f64,
) -> Result<ContractionReport> {
    let k = k_modulus(r, d)?;
    if !d.is_flat() {
        return Ok(ContractionReport {
            applicable: false,
            note: Some("weighted domain: curvature hypothesis not verified".into()),
            k,
            times: Vec::new(),
            w2: Vec::new(),
            fitted_rate: f64::NAN,
            worst_excess: f64::NAN,
            eps: f64::NAN,
            holds: false,
        });
    }
    let solver = JkoSolver::new(d, r, mu_a.j())?;
    let (ta, tb) = rayon::join(
        || solver.trajectory(mu_a, cfg, t_end, 1),
        || solver.trajectory(mu_b, cfg, t_end, 1),
    );
    let (ta, tb) = (ta?, tb?);
    let times = ta.times();
    let w2 = ta
        .quantiles
        .iter()
        .zip(&tb.quantiles)
        .map(|(a, b)| w2_piecewise(a, b))
        .collect::<Result<Vec<_>>>()?;
    let eps = 0.05 * k.abs() + cfg.delta;
    let w0 = w2[0];
    let worst_excess = times
        .iter()
        .zip(&w2)
        .map(|(&t, &w)| w - (-(k - eps) * t).exp() * w0)
        .fold(f64::NEG_INFINITY, f64::max);
    let fitted_rate = fit_decay_rate(&times, &w2);
    Ok(ContractionReport {
        applicable: true,
        note: None,
        k,
        times,
        w2,
        fitted_rate,
        worst_excess,
        eps,
        holds: worst_excess <= 1e-12 * (1.0 + w0),
    })
}

/// Least-squares rate `λ` in `w(t) ≈ w(0) e^{-λt}`; `NaN` if `w(0) = 0`.
pub fn fit_decay_rate(times: &[f64], w: &[f64]) -> f64 {
    let w0 = w.first().copied().unwrap_or(0.0);
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(w)
        .filter(|(_, &v)| v > 1e-12 * w0 && w0 > 0.0)
        .map(|(&t, &v)| (t, v.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let (st, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mt, my) = (st / n, sy / n);
    let (num, den) = pts.iter().fold((0.0, 0.0), |a, p| {
        (a.0 + (p.0 - mt) * (p.1 - my), a.1 + (p.0 - mt).powi(2))
    });
    -num / den
}

/// Fisher information against the metric slope of the discrete entropy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeReport {
    pub sqrt_fisher: f64,
    /// Extrapolated `(H(μ) - H(μ^δ)) / W₂(μ, μ^δ)` as `δ → 0`.
    pub metric_slope: f64,
    /// Relative gap, or the absolute gap when the Fisher information vanishes.
    pub gap: f64,
    pub holds: bool,
}

/// Compares `√I_m(μ)` on the grid with the decrease rate of the discrete
/// entropy along two short minimizing movements of lengths `δ` and `δ/2`.
pub fn slope_identity_check(
    mu: &GridMeasure,
    d: &Domain1D,
    r: &ReferencePotential,
    cfg: &JkoConfig,
    j: usize,
    tol: f64,
) -> Result<SlopeReport> {
    let sqrt_fisher = fisher_i_m(r.p(), mu, r, d)?.sqrt();
    let solver = JkoSolver::new(d, r, j)?;
    let q = to_quantile(mu, d, j)?;
    let h0 = solver.energy(&q)?;
    let ratio = |delta: f64| -> Result<f64> {
        let c = JkoConfig { delta, ..*cfg };
        let out = solver.step(&q, &c)?.q;
        let w = w2_piecewise(&q, &out)?;
        if w == 0.0 {
            return Ok(0.0);
        }
        Ok((h0 - solver.energy(&out)?) / w)
    };
    let (r1, r2) = (ratio(cfg.delta)?, ratio(0.5 * cfg.delta)?);
    let metric_slope = (2.0 * r2 - r1).max(0.0);
    let abs_floor = 1e-8;
    let gap = if sqrt_fisher > abs_floor {
        (metric_slope - sqrt_fisher).abs() / sqrt_fisher
    } else {
        (metric_slope - sqrt_fisher).abs()
    };
    Ok(SlopeReport {
        sqrt_fisher,
        metric_slope,
        gap,
        holds: gap <= tol,
    })
}

/// Moment-matched m-Gaussian fit at one recorded time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosureRow {
    pub t: f64,
    pub mean: f64,
    pub variance: f64,
    /// `L¹` distance to the fit; `None` when no fit fits the domain.
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureReport {
    pub rows: Vec<ClosureRow>,
    pub max_residual: f64,
    pub threshold: f64,
    pub holds: bool,
}

fn require_quadratic(d: &Domain1D, r: &ReferencePotential) -> Result<()> {
    if !d.is_flat() {
        return Err(Error::NotApplicable(
            "m-Gaussian closure needs an unweighted domain".into(),
        ));
    }
    let v = r.potential();
    let h2 = d.h() * d.h();
    let second: Vec<f64> = v.windows(3).map(|w| (w[0] - 2.0 * w[1] + w[2]) / h2).collect();
    let k = second[0];
    if second.iter().any(|s| (s - k).abs() > 1e-6 * (1.0 + k.abs())) {
        return Err(Error::NotApplicable("reference potential is not quadratic".into()));
    }
    Ok(())
}

/// Runs the finite-volume flow from an m-Gaussian and fits an m-Gaussian by
/// moment matching at every recorded time.
pub fn m_gaussian_closure_check(
    v0: f64,
    var0: f64,
    d: &Domain1D,
    r: &ReferencePotential,
    cfg: &PdeConfig,
    t_end: f64,
    tail_tol: f64,
) -> Result<ClosureReport> {
    require_quadratic(d, r)?;
    let p = *r.p();
    let m = p.m();
    if !(m > (p.n() as f64 - 1.0) / p.n() as f64 && m <= 2.0 && m != 1.0) {
        return Err(Error::NotApplicable(format!("m = {m} outside the closure range")));
    }
    let start = MGaussianBuilder::new(p, v0, var0).tail_tol(tail_tol).build(d)?;
    let trace = PdeSolver::new(d, r)?.trajectory(&start.measure, cfg, t_end)?;
    let rows: Vec<ClosureRow> = trace
        .rows
        .iter()
        .zip(&trace.measures)
        .map(|(row, mu)| {
            let fit = MGaussianBuilder::new(p, row.mean, row.variance)
                .tail_tol(tail_tol)
                .build(d)
                .ok();
            ClosureRow {
                t: row.t,
                mean: row.mean,
                variance: row.variance,
                residual: fit.map(|g| mu.l1_distance(&g.measure, d)),
            }
        })
        .collect();
    let threshold = 5e-2;
    let max_residual = rows
        .iter()
        .map(|r| r.residual.unwrap_or(f64::INFINITY))
        .fold(0.0, f64::max);
    Ok(ClosureReport {
        rows,
        max_residual,
        threshold,
        holds: max_residual <= threshold,
    })
}

/// Moments of a near-classical flow against the Ornstein-Uhlenbeck solution
/// `mean(t) = v + (v0 - v)e^{-Kt}`, `var(t) = 1/K + (var0 - 1/K)e^{-2Kt}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OuReport {
    pub k: f64,
    pub center: f64,
    pub times: Vec<f64>,
    pub mean_error: Vec<f64>,
    pub variance_error: Vec<f64>,
    /// Worst mean error relative to the OU standard deviation.
    pub max_mean_error: f64,
    /// Worst relative variance error.
    pub max_variance_error: f64,
    pub holds: bool,
}

pub fn ou_limit_check(
    v0: f64,
    var0: f64,
    d: &Domain1D,
    r: &ReferencePotential,
    cfg: &PdeConfig,
    t_end: f64,
    tol: f64,
) -> Result<OuReport> {
    require_quadratic(d, r)?;
    let p = *r.p();
    let v = r.potential();
    let k = (v[0] - 2.0 * v[1] + v[2]) / (d.h() * d.h());
    // Vertex from the secant slope between the first two nodes.
    let center = d.nodes()[0] + 0.5 * d.h() - (v[1] - v[0]) / (d.h() * k);
    let start = MGaussianBuilder::new(p, v0, var0).tail_tol(1e-6).build(d)?;
    let trace = PdeSolver::new(d, r)?.trajectory(&start.measure, cfg, t_end)?;
    let mut times = Vec::new();
    let mut mean_error = Vec::new();
    let mut variance_error = Vec::new();
    for row in &trace.rows {
        let decay = (-k * row.t).exp();
        let mean_ou = center + (v0 - center) * decay;
        let var_ou = 1.0 / k + (var0 - 1.0 / k) * decay * decay;
        times.push(row.t);
        mean_error.push((row.mean - mean_ou).abs() / var_ou.sqrt());
        variance_error.push((row.variance - var_ou).abs() / var_ou);
    }
    let max_mean_error = mean_error.iter().copied().fold(0.0, f64::max);
    let max_variance_error = variance_error.iter().copied().fold(0.0, f64::max);
    Ok(OuReport {
        k,
        center,
        times,
        mean_error,
        variance_error,
        max_mean_error,
        max_variance_error,
        holds: max_mean_error <= tol && max_variance_error <= tol,
    })
}

/// Compares the discrete rate of change of the entropy with `-I_m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DissipationReport {
    pub max_relative_error: f64,
    pub intervals: usize,
    pub holds: bool,
}

/// Uses consecutive rows with finite Fisher information above `floor`.
pub fn dissipation_check(trace: &FlowTrace, floor: f64, tol: f64) -> DissipationReport {
    let mut worst = 0.0f64;
    let mut intervals = 0;
    for w in trace.rows.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let i_mid = 0.5 * (a.i_m + b.i_m);
        if !(i_mid.is_finite() && i_mid > floor) || b.t <= a.t {
            continue;
        }
        let rate = (b.h_m - a.h_m) / (b.t - a.t);
        worst = worst.max((rate + i_mid).abs() / i_mid);
        intervals += 1;
    }
    DissipationReport {
        max_relative_error: worst,
        intervals,
        holds: intervals > 0 && worst <= tol,
    }
}

/// `L¹` gap between the two discretizations at common times.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub times: Vec<f64>,
    pub l1_gaps: Vec<f64>,
    pub sup_gap: f64,
}

/// Runs both schemes from `mu0` and compares densities at `samples` equally
/// spaced times after the start. Both steps must divide the sample spacing.
#[allow(clippy::too_many_arguments)]
pub fn compare_jko_pde(
    mu0: &GridMeasure,
    d: &Domain1D,
    r: &ReferencePotential,
    jko: &JkoConfig,
    j: usize,
    pde: &PdeConfig,
    t_end: f64,
    samples: usize,
) -> Result<CompareReport> {
    let spacing = t_end / samples.max(1) as f64;
    let stride_of = |dt: f64| -> Result<usize> {
        let s = (spacing / dt).round();
        if s < 1.0 || (s * dt - spacing).abs() > 1e-9 * spacing {
            return Err(invalid(format!(
                "step {dt} does not divide the sample spacing {spacing}"
            )));
        }
        Ok(s as usize)
    };
    let (sj, sp) = (stride_of(jko.delta)?, stride_of(pde.dt)?);
    let q0 = to_quantile(mu0, d, j)?;
    let solver = JkoSolver::new(d, r, j)?;
    let fv = PdeSolver::new(d, r)?;
    let pcfg = PdeConfig { stride: sp, ..*pde };
    let (tj, tp) = rayon::join(
        || solver.trajectory(&q0, jko, t_end, sj),
        || fv.trajectory(mu0, &pcfg, t_end),
    );
    let (tj, tp) = (tj?, tp?);
    if tj.measures.len() != tp.measures.len() {
        return Err(Error::Mismatch("trajectories recorded at different times".into()));
    }
    let l1_gaps: Vec<f64> = tj
        .measures
        .iter()
        .zip(&tp.measures)
        .map(|(a, b)| a.l1_distance(b, d))
        .collect();
    Ok(CompareReport {
        times: tp.times(),
        sup_gap: l1_gaps.iter().copied().fold(0.0, f64::max),
        l1_gaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::pde::Stepping;
    use crate::mcalc::MParam;
    use std::collections::BTreeMap;

    fn expr(src: &str) -> Expr {
        Expr::parse(src, &["t", "x"], &BTreeMap::new()).unwrap()
    }

    #[test]
    fn decay_rate_fit_recovers_exponent() {
        let t: Vec<f64> = (0..30).map(|k| k as f64 * 0.1).collect();
        let w: Vec<f64> = t.iter().map(|t| 2.0 * (-0.7 * t).exp()).collect();
        assert!((fit_decay_rate(&t, &w) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn constant_test_function_sees_only_mass_drift() {
        let d = Domain1D::segment(-4.0, 4.0, 128).unwrap();
        let p = MParam::one_d(2.0).unwrap();
        let r = ReferencePotential::from_fn(&d, p, |x| x * x / 2.0).unwrap();
        let mu = GridMeasure::from_fn(&d, |x| (-(x - 0.5) * (x - 0.5)).exp()).unwrap();
        let cfg = PdeConfig {
            dt: 1e-3,
            stepping: Stepping::Adaptive,
            stride: 1,
        };
        let trace = PdeSolver::new(&d, &r).unwrap().trajectory(&mu, &cfg, 0.1).unwrap();
        let res = weak_residual(&trace, &d, &r, &expr("1")).unwrap();
        assert!(res.residual < 1e-10);
    }
}
