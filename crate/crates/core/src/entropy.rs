//! Entropy functionals on grid measures.
//!
//! The m-relative entropy of `μ = ρω + μ^s` with respect to `ν = σω` is
//!
//! ```text
//! H_m(μ|ν) = 1/(m(m-1)) ∫ (ρ^m + (m-1)σ^m) dω - 1/(m-1) ∫ σ^{m-1} dμ + H_m(∞) μ^s(M)
//! ```
//!
//! with `H_m(∞) = 0` for `m < 1` and `+∞` for `m > 1`. The absolutely
//! continuous part is evaluated pointwise as a Bregman divergence, which is
//! nonnegative term by term and avoids cancellation.

use serde::Serialize;

use crate::domain::{Domain1D, ReferencePotential};
use crate::error::{invalid, Error, Result};
use crate::mcalc::MParam;
use crate::measures::GridMeasure;
use crate::transport::{w2_discrete, DiscreteMeasure};

/// Values above this magnitude are reported as `+∞`.
pub const OVERFLOW_GUARD: f64 = 1e300;

/// Density floor below which nodes are ignored by the Fisher information.
pub const RHO_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyBreakdown {
    /// `1/(m(m-1)) ∫ ρ^m dω`.
    pub internal: f64,
    /// `1/m ∫ σ^m dω`.
    pub reference: f64,
    /// `-1/(m-1) ∫ σ^{m-1} dμ`, atoms included.
    pub cross: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyValue {
    pub value: f64,
    pub ac_part: f64,
    pub singular_part: f64,
    pub breakdown: EntropyBreakdown,
}

fn require_ac(mu: &GridMeasure, what: &str) -> Result<()> {
    if mu.has_atoms() {
        return Err(invalid(format!(
            "{what} is defined for absolutely continuous measures only"
        )));
    }
    Ok(())
}

fn guard(v: f64) -> f64 {
    if v.is_nan() || v.abs() > OVERFLOW_GUARD {
        f64::INFINITY
    } else {
        v
    }
}

/// Tsallis entropy `-∫ e_m(ρ) dω`.
pub fn tsallis(p: &MParam, mu: &GridMeasure, d: &Domain1D) -> Result<f64> {
    require_ac(mu, "tsallis entropy")?;
    let f: Vec<f64> = mu.rho().iter().map(|&r| p.e_m_unchecked(r)).collect();
    Ok(-d.integrate(&f))
}

/// Rényi-type entropy `S_N = -∫ ρ^{1-1/N} dω = -∫ ρ^m dω`.
pub fn renyi(p: &MParam, mu: &GridMeasure, d: &Domain1D) -> Result<f64> {
    require_ac(mu, "renyi entropy")?;
    let m = p.m();
    let f: Vec<f64> = mu
        .rho()
        .iter()
        .map(|&r| if r > 0.0 { r.powf(m) } else { 0.0 })
        .collect();
    Ok(-d.integrate(&f))
}

/// Pointwise integrand `ρ^m/(m(m-1)) + σ^m/m - ρσ^{m-1}/(m-1)`.
pub fn bregman_density(m: f64, rho: f64, sigma: f64) -> f64 {
    let k = m - 1.0;
    if sigma <= 0.0 {
        return if rho > 0.0 { rho.powf(m) / (m * k) } else { 0.0 };
    }
    if rho <= 0.0 {
        return sigma.powf(m) / m;
    }
    let a = rho / sigma;
    let la = a.ln();
    sigma.powf(m) / (m * k) * ((m * la).exp_m1() - m * (a - 1.0))
}

/// `H_m(μ|ν)`.
pub fn h_m(p: &MParam, mu: &GridMeasure, r: &ReferencePotential, d: &Domain1D) -> Result<EntropyValue> {
    let sigma_atoms: Vec<f64> = mu.atoms().iter().map(|a| r.sigma_at(a.x)).collect();
    h_m_against(p, mu, r.sigma(), &sigma_atoms, d)
}

/// `H_m` with an explicit exponent against given reference samples; used to
/// approach the classical limit with `σ` held fixed.
pub fn h_m_against(
    p: &MParam,
    mu: &GridMeasure,
    sigma: &[f64],
    sigma_at_atoms: &[f64],
    d: &Domain1D,
) -> Result<EntropyValue> {
    if sigma.len() != d.len() || mu.rho().len() != d.len() {
        return Err(Error::Mismatch("entropy inputs on different grids".into()));
    }
    let m = p.m();
    let k = m - 1.0;
    let sm: Vec<f64> = sigma.iter().map(|&s| if s > 0.0 { s.powf(m) } else { 0.0 }).collect();
    let sigma_lm = d.integrate(&sm);
    if !sigma_lm.is_finite() {
        return Err(invalid("reference density is not in L^m"));
    }
    let rho = mu.rho();
    let bregman: Vec<f64> = rho.iter().zip(sigma).map(|(&r, &s)| bregman_density(m, r, s)).collect();
    let ac_part = guard(d.integrate(&bregman));
    let rm: Vec<f64> = rho.iter().map(|&r| if r > 0.0 { r.powf(m) } else { 0.0 }).collect();
    let cross_ac: Vec<f64> = rho
        .iter()
        .zip(sigma)
        .map(|(&r, &s)| if s > 0.0 { r * s.powf(k) } else { 0.0 })
        .collect();
    let atom_cross: f64 = mu
        .atoms()
        .iter()
        .zip(sigma_at_atoms)
        .map(|(a, &s)| if s > 0.0 { a.mass * s.powf(k) } else { 0.0 })
        .sum();
    let breakdown = EntropyBreakdown {
        internal: guard(d.integrate(&rm) / (m * k)),
        reference: sigma_lm / m,
        cross: guard(-(d.integrate(&cross_ac) + atom_cross) / k),
    };
    let singular_part = if mu.has_atoms() {
        if m > 1.0 {
            f64::INFINITY
        } else {
            guard(-atom_cross / k)
        }
    } else {
        0.0
    };
    Ok(EntropyValue {
        value: guard(ac_part + singular_part),
        ac_part,
        singular_part,
        breakdown,
    })
}

/// `KL(μ|ν̄)` against the normalized reference.
pub fn kl_divergence(mu: &GridMeasure, sigma: &[f64], d: &Domain1D) -> Result<f64> {
    require_ac(mu, "KL divergence")?;
    let mass = d.integrate(sigma);
    let f: Vec<f64> = mu
        .rho()
        .iter()
        .zip(sigma)
        .map(|(&r, &s)| {
            if r <= 0.0 {
                0.0
            } else if s <= 0.0 {
                f64::INFINITY
            } else {
                r * (r * mass / s).ln()
            }
        })
        .collect();
    Ok(guard(d.integrate(&f)))
}

#[derive(Debug, Clone, Serialize)]
pub struct KlLimitReport {
    pub kl: f64,
    pub eps: f64,
    pub h_below: f64,
    pub h_above: f64,
    pub tolerance: f64,
    pub holds: bool,
}

/// Compares `H_{1±ε}(μ|ν̄)` with `KL(μ|ν̄)` for `ε = 1e-3`.
pub fn kl_limit_check(mu: &GridMeasure, r: &ReferencePotential, d: &Domain1D) -> Result<KlLimitReport> {
    kl_limit_check_at(mu, r, d, 1e-3)
}

pub fn kl_limit_check_at(mu: &GridMeasure, r: &ReferencePotential, d: &Domain1D, eps: f64) -> Result<KlLimitReport> {
    let mass = r.mass(d);
    let sigma: Vec<f64> = r.sigma().iter().map(|s| s / mass).collect();
    let kl = kl_divergence(mu, &sigma, d)?;
    let below = h_m_against(&MParam::new(1.0 - eps, 1)?, mu, &sigma, &[], d)?.value;
    let above = h_m_against(&MParam::new(1.0 + eps, 1)?, mu, &sigma, &[], d)?.value;
    let tolerance = 1e-2 * (1.0 + kl);
    Ok(KlLimitReport {
        kl,
        eps,
        h_below: below,
        h_above: above,
        tolerance,
        holds: (below - kl).abs() < tolerance && (above - kl).abs() < tolerance,
    })
}

/// `I_m(μ|ν) = 1/(m-1)² ∫ |∂_x(ρ^{m-1} - σ^{m-1})|² ρ dω`.
///
/// Derivatives are central differences over nodes with `ρ > RHO_FLOOR`,
/// falling back to one-sided differences next to excluded nodes. For
/// `m > 1`, positive density outside the support of `σ` gives `+∞`.
pub fn fisher_i_m(p: &MParam, mu: &GridMeasure, r: &ReferencePotential, d: &Domain1D) -> Result<f64> {
    Ok(fisher_report(p, mu, r, d)?.value)
}

#[derive(Debug, Clone, Serialize)]
pub struct FisherReport {
    pub value: f64,
    pub rho_floor: f64,
    /// Set when `m > 1` and `ρ` charges the complement of `supp σ`.
    pub support_mismatch: bool,
}

pub fn fisher_report(p: &MParam, mu: &GridMeasure, r: &ReferencePotential, d: &Domain1D) -> Result<FisherReport> {
    require_ac(mu, "Fisher information")?;
    let m = p.m();
    let k = m - 1.0;
    let rho = mu.rho();
    let sigma = r.sigma();
    let live: Vec<bool> = rho.iter().map(|&x| x > RHO_FLOOR).collect();
    if m > 1.0 && live.iter().zip(sigma).any(|(&l, &s)| l && s == 0.0) {
        return Ok(FisherReport {
            value: f64::INFINITY,
            rho_floor: RHO_FLOOR,
            support_mismatch: true,
        });
    }
    let g: Vec<f64> = rho
        .iter()
        .zip(sigma)
        .zip(&live)
        .map(|((&x, &s), &l)| if l { x.powf(k) - s.powf(k) } else { 0.0 })
        .collect();
    let n = d.len();
    let h = d.h();
    let neighbor = |i: usize, step: isize| -> Option<usize> {
        let j = i as isize + step;
        if d.is_circle() {
            Some(j.rem_euclid(n as isize) as usize)
        } else if j < 0 || j >= n as isize {
            None
        } else {
            Some(j as usize)
        }
    };
    let mut f = vec![0.0; n];
    for i in 0..n {
        if !live[i] {
            continue;
        }
        let left = neighbor(i, -1).filter(|&j| live[j]);
        let right = neighbor(i, 1).filter(|&j| live[j]);
        let grad = match (left, right) {
            (Some(l), Some(r)) => (g[r] - g[l]) / (2.0 * h),
            (None, Some(r)) => match neighbor(i, 2).filter(|&j| live[j]) {
                Some(r2) if !d.is_circle() && i == 0 => (-3.0 * g[i] + 4.0 * g[r] - g[r2]) / (2.0 * h),
                _ => (g[r] - g[i]) / h,
            },
            (Some(l), None) => match neighbor(i, -2).filter(|&j| live[j]) {
                Some(l2) if !d.is_circle() && i == n - 1 => (3.0 * g[i] - 4.0 * g[l] + g[l2]) / (2.0 * h),
                _ => (g[i] - g[l]) / h,
            },
            (None, None) => 0.0,
        };
        f[i] = grad * grad * rho[i];
    }
    Ok(FisherReport {
        value: guard(d.integrate(&f) / (k * k)),
        rho_floor: RHO_FLOOR,
        support_mismatch: false,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct LscReport {
    pub values: Vec<f64>,
    pub w2_to_limit: Vec<f64>,
    pub limit_value: f64,
    pub tail_min: f64,
    /// Extrapolated limit of the sequence (Aitken Δ² on the last three
    /// terms), `+∞` for an increasing non-contracting tail.
    pub liminf_estimate: f64,
    pub extrapolation_spread: f64,
    pub diverging: bool,
    pub holds: bool,
}

fn as_discrete(mu: &GridMeasure, d: &Domain1D) -> Result<DiscreteMeasure> {
    let mut atoms: Vec<(f64, f64)> = mu
        .cell_masses(d)
        .into_iter()
        .zip(d.nodes())
        .filter(|(w, _)| *w > 0.0)
        .map(|(w, &x)| (x, w))
        .collect();
    atoms.extend(mu.atoms().iter().map(|a| (a.x, a.mass)));
    let total: f64 = atoms.iter().map(|a| a.1).sum();
    DiscreteMeasure::new(atoms.into_iter().map(|(x, w)| (x, w / total)).collect())
}

fn aitken(x: &[f64]) -> Option<(f64, bool)> {
    let n = x.len();
    if n < 3 {
        return None;
    }
    let (x0, x1, x2) = (x[n - 3], x[n - 2], x[n - 1]);
    let (d1, d2) = (x1 - x0, x2 - x1);
    if d1 == 0.0 && d2 == 0.0 {
        return Some((x2, false));
    }
    if d1 * d2 > 0.0 && d2.abs() < d1.abs() {
        return Some((x2 - d2 * d2 / (d2 - d1), false));
    }
    if d2 > 0.0 && d2.abs() >= d1.abs() {
        return Some((f64::INFINITY, true));
    }
    None
}

/// Checks `H_m(μ|ν) ≤ liminf_k H_m(μ_k|ν)` along a sequence converging to `μ`.
pub fn lsc_check(
    p: &MParam,
    seq: &[GridMeasure],
    mu: &GridMeasure,
    r: &ReferencePotential,
    d: &Domain1D,
) -> Result<LscReport> {
    if seq.len() < 3 {
        return Err(invalid("lsc_check needs at least three sequence terms"));
    }
    let target = as_discrete(mu, d)?;
    let w2s = seq
        .iter()
        .map(|s| Ok(w2_discrete(&as_discrete(s, d)?, &target)))
        .collect::<Result<Vec<f64>>>()?;
    let first = w2s[0];
    let last = *w2s.last().unwrap();
    if !(last <= 1e-12 || last <= 0.25 * first) {
        return Err(invalid(format!(
            "sequence does not approach the limit in W2 ({first:e} -> {last:e})"
        )));
    }
    let values = seq
        .iter()
        .map(|s| Ok(h_m(p, s, r, d)?.value))
        .collect::<Result<Vec<f64>>>()?;
    let limit_value = h_m(p, mu, r, d)?.value;
    let tail = &values[values.len() / 2..];
    let tail_min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let (estimate, diverging) = aitken(&values).unwrap_or((tail_min, false));
    let spread = if values.len() >= 4 && !diverging {
        aitken(&values[..values.len() - 1])
            .map(|(prev, _)| (prev - estimate).abs())
            .filter(|s| s.is_finite())
            .unwrap_or(0.0)
    } else {
        0.0
    };
    let holds = limit_value <= estimate + 1e-6 + spread;
    Ok(LscReport {
        values,
        w2_to_limit: w2s,
        limit_value,
        tail_min,
        liminf_estimate: estimate,
        extrapolation_spread: spread,
        diverging,
        holds,
    })
}
