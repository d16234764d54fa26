//! Minimizing movements in quantile coordinates.
//!
//! A measure is a [`QuantileRep`] with edges `E_0 < ... < E_J`, each cell
//! carrying mass `1/J`. The discrete entropy is
//!
//! ```text
//! H_J(E) = Σ_j (1/J) [ ρ_j^{m-1} / (m(m-1)) + avg_{[E_{j-1}, E_j]} V ] + const
//! ρ_j    = e^{ψ(c_j)} / (J Δ_j),   Δ_j = E_j - E_{j-1},   c_j = (E_{j-1} + E_j)/2
//! ```
//!
//! where the cell average of `V` uses Simpson's rule and the constant makes
//! the discrete ground state have zero entropy. One step minimizes
//! `H_J(E) + W₂(E, E^k)² / (2δ)` with the exact `W₂` between piecewise-linear
//! quantile functions. Both terms couple only neighbouring edges, so Newton
//! steps solve a tridiagonal system.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::domain::{Domain1D, ReferencePotential};
use crate::error::{invalid, Error, Result};
use crate::flow::{FlowTrace, TraceRow};
use crate::mcalc::MParam;
use crate::measures::{to_density, to_quantile, GridMeasure, QuantileRep};
use crate::transport::w2_piecewise;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JkoConfig {
    pub delta: f64,
    /// Tolerance on the `L²(ds)` norm of the projected gradient.
    pub inner_tol: f64,
    pub max_inner_iters: usize,
    /// Lower bound on quantile cell widths.
    pub eps_x: f64,
}

impl Default for JkoConfig {
    fn default() -> Self {
        Self {
            delta: 1e-2,
            inner_tol: 1e-9,
            max_inner_iters: 200,
            eps_x: 1e-12,
        }
    }
}

impl JkoConfig {
    pub fn with_delta(delta: f64) -> Self {
        Self {
            delta,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(invalid(format!("JKO step {} must be positive", self.delta)));
        }
        if !(self.eps_x > 0.0) || !(self.inner_tol > 0.0) || self.max_inner_iters == 0 {
            return Err(invalid("JKO tolerances must be positive"));
        }
        Ok(())
    }
}

/// Result of one minimizing-movement step.
#[derive(Debug, Clone)]
pub struct JkoStep {
    pub q: QuantileRep,
    pub iterations: usize,
    pub grad_norm: f64,
    /// Objective at the previous iterate (where the proximal term vanishes).
    pub objective_in: f64,
    pub objective_out: f64,
}

/// Tridiagonal objective model at one point.
struct Model {
    f: f64,
    g: Vec<f64>,
    diag: Vec<f64>,
    off: Vec<f64>,
}

/// Discrete entropy in quantile coordinates on a segment.
pub struct JkoSolver<'a> {
    d: &'a Domain1D,
    r: &'a ReferencePotential,
    p: MParam,
    j: usize,
    flat: bool,
    ground: OnceLock<std::result::Result<(QuantileRep, f64), String>>,
}

impl<'a> JkoSolver<'a> {
    pub fn new(d: &'a Domain1D, r: &'a ReferencePotential, j: usize) -> Result<Self> {
        if d.is_circle() {
            return Err(Error::Unsupported(
                "minimizing movements are implemented on segments only".into(),
            ));
        }
        if j < 2 {
            return Err(invalid("JKO needs at least two quantile cells"));
        }
        Ok(Self {
            d,
            r,
            p: *r.p(),
            j,
            flat: d.is_flat(),
            ground: OnceLock::new(),
        })
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn p(&self) -> &MParam {
        &self.p
    }

    pub fn domain(&self) -> &Domain1D {
        self.d
    }

    /// `V = Ψ - 1/(m-1)` and its derivatives; the potential is not clamped
    /// outside the reference support.
    fn drift3(&self, x: f64) -> (f64, f64, f64) {
        let (v, d1, d2) = self.r.potential_d(x);
        (v - 1.0 / (self.p.m() - 1.0), d1, d2)
    }

    /// `e^{(m-1)ψ(c)}` and its first two derivatives.
    fn phi3(&self, c: f64) -> (f64, f64, f64) {
        if self.flat {
            return (1.0, 0.0, 0.0);
        }
        let k = self.p.m() - 1.0;
        let (psi, d1, d2) = self.d.psi_d(c);
        let phi = (k * psi).exp();
        (phi, k * d1 * phi, k * (d2 + k * d1 * d1) * phi)
    }

    fn model(&self, e: &[f64], anchor: Option<(&[f64], f64)>, want_hessian: bool) -> Model {
        let j = self.j;
        let jf = j as f64;
        let m = self.p.m();
        let k0 = jf.powf(-m) / (m * (m - 1.0));
        let mut f = 0.0;
        let mut g = vec![0.0; j + 1];
        let (mut diag, mut off) = if want_hessian {
            (vec![0.0; j + 1], vec![0.0; j])
        } else {
            (Vec::new(), Vec::new())
        };
        let edge_v: Vec<(f64, f64, f64)> = e.iter().map(|&x| self.drift3(x)).collect();
        for c in 0..j {
            let (a, b) = (e[c], e[c + 1]);
            let delta = b - a;
            let mid = 0.5 * (a + b);
            if delta <= 0.0 {
                f = f64::INFINITY;
                continue;
            }
            // Internal energy.
            let (phi, phi1, phi2) = self.phi3(mid);
            let pw = delta.powf(1.0 - m);
            let p1 = (1.0 - m) * pw / delta;
            let p2 = -m * p1 / delta;
            f += k0 * phi * pw;
            let g_d = k0 * phi * p1;
            let g_c = k0 * phi1 * pw;
            g[c] += -g_d + 0.5 * g_c;
            g[c + 1] += g_d + 0.5 * g_c;
            // Potential energy, Simpson average over the cell.
            let (va, va1, va2) = edge_v[c];
            let (vb, vb1, vb2) = edge_v[c + 1];
            let (vc, vc1, vc2) = self.drift3(mid);
            f += (va + 4.0 * vc + vb) / (6.0 * jf);
            g[c] += (va1 + 2.0 * vc1) / (6.0 * jf);
            g[c + 1] += (vb1 + 2.0 * vc1) / (6.0 * jf);
            if want_hessian {
                let g_dd = k0 * phi * p2;
                let g_cc = k0 * phi2 * pw;
                let g_cd = k0 * phi1 * p1;
                diag[c] += g_dd - g_cd + 0.25 * g_cc + (va2 + vc2) / (6.0 * jf);
                diag[c + 1] += g_dd + g_cd + 0.25 * g_cc + (vb2 + vc2) / (6.0 * jf);
                off[c] += -g_dd + 0.25 * g_cc + vc2 / (6.0 * jf);
            }
            // Proximal term.
            if let Some((prev, dt)) = anchor {
                let w = 1.0 / (2.0 * dt * jf);
                let (da, db) = (a - prev[c], b - prev[c + 1]);
                f += w * (da * da + da * db + db * db) / 3.0;
                g[c] += w * (2.0 * da + db) / 3.0;
                g[c + 1] += w * (da + 2.0 * db) / 3.0;
                if want_hessian {
                    diag[c] += 2.0 * w / 3.0;
                    diag[c + 1] += 2.0 * w / 3.0;
                    off[c] += w / 3.0;
                }
            }
        }
        Model { f, g, diag, off }
    }

    /// Edges pinned at a domain end with the gradient pointing outward.
    fn active(&self, e: &[f64], g: &[f64]) -> (bool, bool) {
        let tol = 1e-13 * self.d.length();
        let j = self.j;
        (
            e[0] <= self.d.a() + tol && g[0] > 0.0,
            e[j] >= self.d.b() - tol && g[j] < 0.0,
        )
    }

    fn projected_norm(&self, g: &[f64], act: (bool, bool)) -> f64 {
        let j = self.j;
        let s: f64 = g
            .iter()
            .enumerate()
            .filter(|(k, _)| !((*k == 0 && act.0) || (*k == j && act.1)))
            .map(|(_, v)| v * v)
            .sum();
        (j as f64 * s).sqrt()
    }

    /// Projected Newton with Levenberg shifts, fraction-to-boundary control of
    /// the cell widths, and Armijo backtracking.
    fn minimize(
        &self,
        start: &[f64],
        anchor: Option<(&[f64], f64)>,
        cfg: &JkoConfig,
    ) -> Result<(Vec<f64>, usize, f64)> {
        let j = self.j;
        let (lo, hi) = (self.d.a(), self.d.b());
        let mut e: Vec<f64> = start.to_vec();
        e[0] = e[0].max(lo);
        e[j] = e[j].min(hi);
        let mut lambda = 0.0;
        let mut norm = f64::INFINITY;
        for it in 0..cfg.max_inner_iters {
            let mdl = self.model(&e, anchor, true);
            let act = self.active(&e, &mdl.g);
            norm = self.projected_norm(&mdl.g, act);
            if norm < cfg.inner_tol {
                return Ok((e, it, norm));
            }
            let mut rhs: Vec<f64> = mdl.g.iter().map(|v| -v).collect();
            let mut diag = mdl.diag.clone();
            let mut off = mdl.off.clone();
            if act.0 {
                rhs[0] = 0.0;
                diag[0] = 1.0;
                off[0] = 0.0;
            }
            if act.1 {
                rhs[j] = 0.0;
                diag[j] = 1.0;
                off[j - 1] = 0.0;
            }
            let scale = diag.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-300);
            let dir = loop {
                let shifted: Vec<f64> = diag.iter().map(|v| v + lambda).collect();
                match thomas(&shifted, &off, &rhs) {
                    Some(x) => break x,
                    None => lambda = (lambda * 10.0).max(1e-10 * scale),
                }
                if lambda > 1e12 * scale {
                    break rhs.clone();
                }
            };
            let slope: f64 = dir.iter().zip(&mdl.g).map(|(p, g)| p * g).sum();
            let (dir, slope) = if slope < 0.0 {
                (dir, slope)
            } else {
                let s = -rhs.iter().map(|v| v * v).sum::<f64>();
                (rhs.clone(), s)
            };
            // Largest step keeping every cell width above a fraction of itself
            // and the end edges inside the domain.
            let mut amax = 1.0f64;
            for c in 0..j {
                let width = e[c + 1] - e[c];
                let dw = dir[c + 1] - dir[c];
                let floor = (0.005 * width).max(cfg.eps_x);
                if dw < 0.0 && width > floor {
                    amax = amax.min((width - floor) / -dw);
                } else if dw < 0.0 {
                    amax = 0.0;
                }
            }
            let mut snap = (false, false);
            if dir[0] < 0.0 {
                let a = (e[0] - lo) / -dir[0];
                if a <= amax {
                    amax = a;
                    snap = (true, false);
                }
            }
            if dir[j] > 0.0 {
                let a = (hi - e[j]) / dir[j];
                if a <= amax {
                    amax = a;
                    snap = (false, true);
                }
            }
            let mut alpha = amax;
            let mut accepted = None;
            for _ in 0..60 {
                let mut trial: Vec<f64> = e.iter().zip(&dir).map(|(x, p)| x + alpha * p).collect();
                if alpha == amax {
                    if snap.0 {
                        trial[0] = lo;
                    }
                    if snap.1 {
                        trial[j] = hi;
                    }
                }
                let trial_model = self.model(&trial, anchor, false);
                let ft = trial_model.f;
                if ft <= mdl.f + 1e-4 * alpha * slope {
                    accepted = Some(trial);
                    break;
                }
                // Near the minimizer the decrease drowns in rounding; fall back
                // to requiring a smaller gradient.
                if alpha == amax && ft - mdl.f <= 64.0 * f64::EPSILON * (1.0 + mdl.f.abs()) {
                    let g = &trial_model.g;
                    if self.projected_norm(g, self.active(&trial, g)) < norm {
                        accepted = Some(trial);
                        break;
                    }
                }
                alpha *= 0.5;
            }
            match accepted {
                Some(trial) => {
                    let moved = trial.iter().zip(&e).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
                    e = trial;
                    lambda *= 0.1;
                    if moved <= 1e-15 * self.d.length() {
                        let g = self.model(&e, anchor, false).g;
                        let n = self.projected_norm(&g, self.active(&e, &g));
                        if n < 1e3 * cfg.inner_tol {
                            return Ok((e, it + 1, n));
                        }
                    }
                }
                None => {
                    if lambda == 0.0 {
                        lambda = 1e-8 * scale;
                    } else {
                        lambda *= 10.0;
                    }
                    if lambda > 1e12 * scale {
                        let g = self.model(&e, anchor, false).g;
                        let n = self.projected_norm(&g, self.active(&e, &g));
                        if n < 1e3 * cfg.inner_tol {
                            return Ok((e, it + 1, n));
                        }
                        return Err(Error::NonConvergence {
                            iterations: it + 1,
                            grad_norm: n,
                            last_iterate: e,
                        });
                    }
                }
            }
        }
        Err(Error::NonConvergence {
            iterations: cfg.max_inner_iters,
            grad_norm: norm,
            last_iterate: e,
        })
    }

    fn raw_energy(&self, e: &[f64]) -> f64 {
        self.model(e, None, false).f
    }

    /// Discrete ground state and the constant that zeroes its entropy.
    fn ground(&self) -> Result<&(QuantileRep, f64)> {
        let g = self.ground.get_or_init(|| {
            let run = || -> Result<(QuantileRep, f64)> {
                let nu = GridMeasure::reference(self.r, self.d)?;
                let start = to_quantile(&nu, self.d, self.j)?;
                let cfg = JkoConfig {
                    inner_tol: 1e-10,
                    max_inner_iters: 2000,
                    ..JkoConfig::default()
                };
                let (e, _, _) = self.minimize(start.edges(), None, &cfg)?;
                let offset = -self.raw_energy(&e);
                Ok((QuantileRep::from_edges(e)?, offset))
            };
            run().map_err(|e| e.to_string())
        });
        g.as_ref()
            .map_err(|msg| Error::NotApplicable(format!("discrete ground state: {msg}")))
    }

    /// Minimizer of the discrete entropy; the fixed point of every step.
    pub fn ground_state(&self) -> Result<QuantileRep> {
        Ok(self.ground()?.0.clone())
    }

    /// Discrete entropy `H_J`, zero at the ground state.
    pub fn energy(&self, q: &QuantileRep) -> Result<f64> {
        self.check(q)?;
        Ok(self.raw_energy(q.edges()) + self.ground()?.1)
    }

    /// Squared discrete slope `J Σ_k (∂H_J/∂E_k)²`, the quantile-space
    /// counterpart of the Fisher information.
    pub fn slope_squared(&self, q: &QuantileRep) -> Result<f64> {
        self.check(q)?;
        let g = self.model(q.edges(), None, false).g;
        let n = self.projected_norm(&g, self.active(q.edges(), &g));
        Ok(n * n)
    }

    fn check(&self, q: &QuantileRep) -> Result<()> {
        if q.j() != self.j {
            return Err(Error::Mismatch(format!("J = {} but solver uses {}", q.j(), self.j)));
        }
        Ok(())
    }

    pub fn step(&self, q: &QuantileRep, cfg: &JkoConfig) -> Result<JkoStep> {
        cfg.validate()?;
        self.check(q)?;
        let anchor = (q.edges(), cfg.delta);
        let objective_in = self.raw_energy(q.edges());
        let (e, iterations, grad_norm) = self.minimize(q.edges(), Some(anchor), cfg)?;
        let objective_out = self.model(&e, Some(anchor), false).f;
        Ok(JkoStep {
            q: QuantileRep::from_edges(e)?,
            iterations,
            grad_norm,
            objective_in,
            objective_out,
        })
    }

    fn row(&self, k: usize, t: f64, q: &QuantileRep, step_w2: f64) -> Result<(TraceRow, GridMeasure)> {
        let mu = to_density(q, self.d)?;
        let ground = &self.ground()?.0;
        Ok((
            TraceRow {
                k,
                t,
                h_m: self.energy(q)?,
                i_m: self.slope_squared(q)?,
                w2_to_ref: w2_piecewise(q, ground)?,
                mass: mu.total_mass(),
                mean: q.mean(),
                variance: q.variance(),
                step_w2,
            },
            mu,
        ))
    }

    /// Runs `ceil(t_end/δ)` steps, recording every `stride`-th state and the last.
    pub fn trajectory(&self, q0: &QuantileRep, cfg: &JkoConfig, t_end: f64, stride: usize) -> Result<FlowTrace> {
        cfg.validate()?;
        let steps = (t_end / cfg.delta - 1e-9).ceil().max(0.0) as usize;
        let stride = stride.max(1);
        let mut trace = FlowTrace::default();
        if let Some(note) = scope_note(&self.p) {
            trace.notes.push(note);
        }
        let (row, mu) = self.row(0, 0.0, q0, 0.0)?;
        trace.rows.push(row);
        trace.measures.push(mu);
        trace.quantiles.push(q0.clone());
        let mut q = q0.clone();
        let mut last_recorded = q0.clone();
        let mut worst_descent = 0.0f64;
        for k in 1..=steps {
            let s = self.step(&q, cfg)?;
            worst_descent = worst_descent.max(s.objective_out - s.objective_in);
            q = s.q;
            if k % stride == 0 || k == steps {
                let w = w2_piecewise(&q, &last_recorded)?;
                let (row, mu) = self.row(k, k as f64 * cfg.delta, &q, w)?;
                trace.rows.push(row);
                trace.measures.push(mu);
                trace.quantiles.push(q.clone());
                last_recorded = q.clone();
            }
        }
        if worst_descent > 1e-12 {
            trace.notes.push(format!(
                "minimizing-movement objective rose by {worst_descent:e} in some step"
            ));
        }
        boundary_note(&mut trace, self.d);
        Ok(trace)
    }
}

pub(crate) fn scope_note(p: &MParam) -> Option<String> {
    (!p.supports_jko_equivalence())
        .then(|| format!("m = {} > 2: outside the gradient-flow equivalence theorem scope", p.m()))
}

pub(crate) fn boundary_note(trace: &mut FlowTrace, d: &Domain1D) {
    if d.is_circle() {
        return;
    }
    let worst = trace
        .measures
        .iter()
        .map(|mu| {
            let c = mu.cell_masses(d);
            c[0].max(c[c.len() - 1])
        })
        .fold(0.0, f64::max);
    if worst > 1e-6 {
        trace.notes.push(format!(
            "boundary cells carry mass up to {worst:e} (no-flux walls active)"
        ));
    }
}

/// Solves a symmetric tridiagonal system; `None` if a pivot is not positive.
fn thomas(diag: &[f64], off: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if !(piv > 0.0) || !piv.is_finite() {
        return None;
    }
    c[0] = if n > 1 { off[0] / piv } else { 0.0 };
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - off[i - 1] * c[i - 1];
        if !(piv > 0.0) || !piv.is_finite() {
            return None;
        }
        if i < n - 1 {
            c[i] = off[i] / piv;
        }
        d[i] = (rhs[i] - off[i - 1] * d[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Some(d)
}

/// One minimizing-movement step from `mu_k`.
pub fn jko_step(
    mu_k: &QuantileRep,
    d: &Domain1D,
    r: &ReferencePotential,
    p: &MParam,
    cfg: &JkoConfig,
) -> Result<QuantileRep> {
    same_exponent(p, r)?;
    Ok(JkoSolver::new(d, r, mu_k.j())?.step(mu_k, cfg)?.q)
}

/// Repeated minimizing movements up to time `t_end`, recording every step.
pub fn jko_trajectory(
    mu0: &QuantileRep,
    d: &Domain1D,
    r: &ReferencePotential,
    p: &MParam,
    cfg: &JkoConfig,
    t_end: f64,
) -> Result<FlowTrace> {
    same_exponent(p, r)?;
    JkoSolver::new(d, r, mu0.j())?.trajectory(mu0, cfg, t_end, 1)
}

pub(crate) fn same_exponent(p: &MParam, r: &ReferencePotential) -> Result<()> {
    if p.m() != r.p().m() {
        return Err(Error::Mismatch(format!(
            "exponent m = {} differs from the reference's m = {}",
            p.m(),
            r.p().m()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::shift_normalize;

    fn setup(m: f64, a: f64, b: f64, cells: usize) -> (Domain1D, ReferencePotential) {
        let d = Domain1D::segment(a, b, cells).unwrap();
        let p = MParam::one_d(m).unwrap();
        let r = ReferencePotential::from_fn(&d, p, |x| x * x / 2.0).unwrap();
        let (r, _) = shift_normalize(&r, &d).unwrap();
        (d, r)
    }

    #[test]
    fn thomas_solves_small_system() {
        let x = thomas(&[4.0, 4.0, 4.0], &[1.0, 1.0], &[5.0, 6.0, 5.0]).unwrap();
        for v in x {
            assert!((v - 1.0).abs() < 1e-14);
        }
        assert!(thomas(&[1.0, -1.0], &[0.0], &[1.0, 1.0]).is_none());
    }

    #[test]
    fn gradient_and_hessian_match_differences() {
        let (d, r) = setup(0.75, -6.0, 6.0, 300);
        let s = JkoSolver::new(&d, &r, 16).unwrap();
        let e: Vec<f64> = (0..=16).map(|k| -2.0 + 4.0 * (k as f64 / 16.0).powf(1.1)).collect();
        let anchor: Vec<f64> = e.iter().map(|x| x + 0.05).collect();
        let mdl = s.model(&e, Some((&anchor, 0.1)), true);
        let hstep = 1e-6;
        for k in 0..=16 {
            let mut ep = e.clone();
            let mut em = e.clone();
            ep[k] += hstep;
            em[k] -= hstep;
            let fp = s.model(&ep, Some((&anchor, 0.1)), true);
            let fm = s.model(&em, Some((&anchor, 0.1)), true);
            let fd = (fp.f - fm.f) / (2.0 * hstep);
            assert!((fd - mdl.g[k]).abs() < 1e-6 * (1.0 + fd.abs()), "grad {k}");
            let hd = (fp.g[k] - fm.g[k]) / (2.0 * hstep);
            assert!(
                (hd - mdl.diag[k]).abs() < 1e-4 * (1.0 + hd.abs()),
                "diag {k}: {hd} vs {}",
                mdl.diag[k]
            );
            if k < 16 {
                let ho = (fp.g[k + 1] - fm.g[k + 1]) / (2.0 * hstep);
                assert!((ho - mdl.off[k]).abs() < 1e-4 * (1.0 + ho.abs()), "off {k}");
            }
        }
    }

    #[test]
    fn weighted_gradient_matches_differences() {
        let d = Domain1D::segment(-4.0, 4.0, 400)
            .unwrap()
            .with_psi(|x| 0.3 * x * x)
            .unwrap();
        let p = MParam::one_d(1.5).unwrap();
        let r = ReferencePotential::from_fn(&d, p, |x| x * x / 4.0 - 0.2).unwrap();
        let s = JkoSolver::new(&d, &r, 12).unwrap();
        let e: Vec<f64> = (0..=12)
            .map(|k| -1.0 + 2.0 * k as f64 / 12.0 + 0.01 * (k as f64).sin())
            .collect();
        let mdl = s.model(&e, None, true);
        for k in 0..=12 {
            let mut ep = e.clone();
            let mut em = e.clone();
            ep[k] += 1e-6;
            em[k] -= 1e-6;
            let fd = (s.model(&ep, None, false).f - s.model(&em, None, false).f) / 2e-6;
            assert!((fd - mdl.g[k]).abs() < 1e-5 * (1.0 + fd.abs()), "grad {k}");
            let hd = (s.model(&ep, None, false).g[k] - s.model(&em, None, false).g[k]) / 2e-6;
            assert!((hd - mdl.diag[k]).abs() < 1e-3 * (1.0 + hd.abs()), "diag {k}");
        }
    }

    #[test]
    fn ground_state_is_fixed_point() {
        for m in [0.75, 1.5, 2.0] {
            let (d, r) = setup(m, -6.0, 6.0, 600);
            let s = JkoSolver::new(&d, &r, 64).unwrap();
            let g = s.ground_state().unwrap();
            assert!(s.energy(&g).unwrap().abs() < 1e-14);
            let cfg = JkoConfig::with_delta(0.05);
            let out = s.step(&g, &cfg).unwrap().q;
            let dev = out
                .edges()
                .iter()
                .zip(g.edges())
                .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
            assert!(dev < 1e-8, "m = {m}: {dev}");
        }
    }

    #[test]
    fn step_decreases_objective_and_contracts_mean() {
        let (d, r) = setup(0.75, -8.0, 8.0, 800);
        let s = JkoSolver::new(&d, &r, 128).unwrap();
        let g = s.ground_state().unwrap();
        let q0 = g.translate(0.5);
        let cfg = JkoConfig::with_delta(0.1);
        let st = s.step(&q0, &cfg).unwrap();
        assert!(st.objective_out <= st.objective_in);
        let ratio = st.q.mean() / q0.mean();
        assert!((ratio - 1.0 / 1.1).abs() < 5e-3, "{ratio}");
    }

    #[test]
    fn circle_is_unsupported() {
        let d = Domain1D::circle(0.0, 1.0, 32).unwrap();
        let p = MParam::one_d(0.75).unwrap();
        let r = ReferencePotential::from_fn(&d, p, |_| 0.0).unwrap();
        assert!(matches!(JkoSolver::new(&d, &r, 8), Err(Error::Unsupported(_))));
    }
}
