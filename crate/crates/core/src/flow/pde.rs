//! Conservative finite-volume scheme for
//! `∂_t ρ = (1/m) Δ^ω(ρ^m) + div_ω(ρ ∇Ψ)`.
//!
//! Cell masses `ρ_i e^{-ψ_i} h` change by interface fluxes
//! `F_{i+½} = w̄_{i+½} (ρ_i v⁺ + ρ_{i+1} v⁻)` where
//! `v = -(ξ_{i+1} - ξ_i)/h`, `ξ = ρ^{m-1}/(m-1) + Ψ` and `w̄` is the
//! arithmetic mean of the neighbouring weights. Upwinding the whole velocity
//! keeps `ρ ≥ 0` and makes the flux vanish exactly when `ξ` is constant, so
//! the reference measure is a discrete steady state.

use serde::{Deserialize, Serialize};

use crate::domain::{Domain1D, ReferencePotential};
use crate::entropy::{fisher_i_m, h_m};
use crate::error::{invalid, Error, Result};
use crate::flow::jko::{boundary_note, same_exponent, scope_note};
use crate::flow::{FlowTrace, TraceRow};
use crate::mcalc::MParam;
use crate::measures::GridMeasure;
use crate::transport::w2_grid;

const DIFFUSION_CFL: f64 = 0.45;
const TRANSPORT_CFL: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stepping {
    /// Fails with [`Error::Stability`] when `dt` exceeds the stable bound.
    Explicit,
    /// Splits each step into stable explicit sub-steps.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PdeConfig {
    pub dt: f64,
    pub stepping: Stepping,
    /// Record every `stride`-th step.
    pub stride: usize,
}

impl Default for PdeConfig {
    fn default() -> Self {
        Self {
            dt: 1e-4,
            stepping: Stepping::Adaptive,
            stride: 10,
        }
    }
}

pub struct PdeSolver<'a> {
    d: &'a Domain1D,
    r: &'a ReferencePotential,
    p: MParam,
    /// Drift potential at the nodes.
    v: Vec<f64>,
    /// Interface weights; entry `i` sits between nodes `i` and `i + 1`.
    wbar: Vec<f64>,
    reference: Option<GridMeasure>,
}

impl<'a> PdeSolver<'a> {
    pub fn new(d: &'a Domain1D, r: &'a ReferencePotential) -> Result<Self> {
        let n = d.len();
        if r.potential().len() != n {
            return Err(Error::Mismatch("reference and domain grids differ".into()));
        }
        let w = d.weight();
        let wbar = (0..n)
            .map(|i| {
                if i + 1 < n {
                    0.5 * (w[i] + w[i + 1])
                } else if d.is_circle() {
                    0.5 * (w[n - 1] + w[0])
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self {
            d,
            r,
            p: *r.p(),
            v: r.potential().to_vec(),
            wbar,
            reference: GridMeasure::reference(r, d).ok(),
        })
    }

    pub fn domain(&self) -> &Domain1D {
        self.d
    }

    fn check_state(&self, rho: &[f64]) -> Result<()> {
        if rho.len() != self.d.len() {
            return Err(Error::Mismatch(format!(
                "{} densities for {} cells",
                rho.len(),
                self.d.len()
            )));
        }
        if self.p.m() < 1.0 {
            if let Some(i) = rho.iter().position(|&x| !(x > 0.0)) {
                return Err(invalid(format!(
                    "fast diffusion needs a positive density; node {i} has {}",
                    rho[i]
                )));
            }
        }
        Ok(())
    }

    /// Interface velocities `v_{i+½}`; the last entry closes the circle and is
    /// zero on a segment.
    fn velocities(&self, rho: &[f64]) -> Vec<f64> {
        let n = rho.len();
        let k = self.p.m() - 1.0;
        let h = self.d.h();
        let xi: Vec<f64> = rho
            .iter()
            .zip(&self.v)
            .map(|(&r, &v)| if r > 0.0 { r.powf(k) / k + v } else { v })
            .collect();
        (0..n)
            .map(|i| {
                if i + 1 < n {
                    -(xi[i + 1] - xi[i]) / h
                } else if self.d.is_circle() {
                    -(xi[0] - xi[n - 1]) / h
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn fluxes(&self, rho: &[f64], vel: &[f64]) -> Vec<f64> {
        let n = rho.len();
        (0..n)
            .map(|i| {
                let right = if i + 1 < n { rho[i + 1] } else { rho[0] };
                self.wbar[i] * (rho[i] * vel[i].max(0.0) + right * vel[i].min(0.0))
            })
            .collect()
    }

    /// Largest explicit step that keeps the update positive and the
    /// diffusion stable.
    pub fn stable_dt(&self, rho: &[f64]) -> f64 {
        self.stable_dt_with(rho, &self.velocities(rho))
    }

    fn stable_dt_with(&self, rho: &[f64], vel: &[f64]) -> f64 {
        let n = rho.len();
        let h = self.d.h();
        let w = self.d.weight();
        let k = self.p.m() - 1.0;
        let mut rate = 0.0f64;
        let mut diff = 0.0f64;
        for i in 0..n {
            let left = if i > 0 { i - 1 } else { n - 1 };
            let out = self.wbar[i] * vel[i].max(0.0) + self.wbar[left] * (-vel[left]).max(0.0);
            rate = rate.max(out / (w[i] * h));
            if rho[i] > 0.0 {
                let wmax = self.wbar[i].max(self.wbar[left]);
                diff = diff.max(rho[i].powf(k) * wmax / w[i]);
            }
        }
        let dt_diff = if diff > 0.0 {
            DIFFUSION_CFL * h * h / diff
        } else {
            f64::INFINITY
        };
        let dt_pos = if rate > 0.0 {
            TRANSPORT_CFL / rate
        } else {
            f64::INFINITY
        };
        dt_diff.min(dt_pos)
    }

    /// Advances nodal densities by `dt`.
    pub fn step(&self, rho: &[f64], dt: f64, stepping: Stepping) -> Result<Vec<f64>> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid(format!("time step {dt} must be positive")));
        }
        self.check_state(rho)?;
        let n = rho.len();
        let h = self.d.h();
        let w = self.d.weight();
        let mut mass: Vec<f64> = rho.iter().zip(w).map(|(r, w)| r * w * h).collect();
        let mut cur = rho.to_vec();
        let mut left = dt;
        while left > 0.0 {
            let vel = self.velocities(&cur);
            let limit = self.stable_dt_with(&cur, &vel);
            let tau = match stepping {
                Stepping::Explicit => {
                    if left > limit * (1.0 + 1e-12) {
                        return Err(Error::Stability {
                            dt: left,
                            suggested: limit,
                        });
                    }
                    left
                }
                Stepping::Adaptive => {
                    let pieces = (left / limit).ceil().max(1.0);
                    left / pieces
                }
            };
            let f = self.fluxes(&cur, &vel);
            for i in 0..n {
                let prev = if i > 0 { f[i - 1] } else { f[n - 1] };
                mass[i] -= tau * (f[i] - prev);
            }
            for i in 0..n {
                cur[i] = (mass[i] / (w[i] * h)).max(0.0);
            }
            left = if tau >= left { 0.0 } else { left - tau };
        }
        Ok(cur)
    }

    pub fn step_measure(&self, mu: &GridMeasure, dt: f64, stepping: Stepping) -> Result<GridMeasure> {
        if mu.has_atoms() {
            return Err(invalid(
                "the finite-volume scheme needs an absolutely continuous measure",
            ));
        }
        GridMeasure::new(self.d, self.step(mu.rho(), dt, stepping)?, Vec::new())
    }

    fn row(&self, k: usize, t: f64, mu: &GridMeasure, prev: Option<&GridMeasure>) -> Result<TraceRow> {
        let w2_to_ref = match &self.reference {
            Some(nu) => w2_grid(mu, nu, self.d)?,
            None => f64::NAN,
        };
        Ok(TraceRow {
            k,
            t,
            h_m: h_m(&self.p, mu, self.r, self.d)?.value,
            i_m: fisher_i_m(&self.p, mu, self.r, self.d).unwrap_or(f64::NAN),
            w2_to_ref,
            mass: mu.total_mass(),
            mean: mu.mean(self.d),
            variance: mu.variance(self.d),
            step_w2: match prev {
                Some(p) => w2_grid(mu, p, self.d)?,
                None => 0.0,
            },
        })
    }

    /// Runs `ceil(t_end/dt)` steps, recording every `cfg.stride`-th state and
    /// the last.
    pub fn trajectory(&self, mu0: &GridMeasure, cfg: &PdeConfig, t_end: f64) -> Result<FlowTrace> {
        let steps = (t_end / cfg.dt - 1e-9).ceil().max(0.0) as usize;
        let stride = cfg.stride.max(1);
        let mut trace = FlowTrace::default();
        if let Some(note) = scope_note(&self.p) {
            trace.notes.push(note);
        }
        trace.rows.push(self.row(0, 0.0, mu0, None)?);
        trace.measures.push(mu0.clone());
        let mut rho = mu0.rho().to_vec();
        for k in 1..=steps {
            rho = self.step(&rho, cfg.dt, cfg.stepping)?;
            if k % stride == 0 || k == steps {
                let mu = GridMeasure::new(self.d, rho.clone(), Vec::new())?;
                let row = self.row(k, k as f64 * cfg.dt, &mu, trace.measures.last())?;
                trace.rows.push(row);
                trace.measures.push(mu);
            }
        }
        boundary_note(&mut trace, self.d);
        Ok(trace)
    }
}

/// One explicit step of the finite-volume scheme.
pub fn pde_step(rho: &GridMeasure, d: &Domain1D, r: &ReferencePotential, p: &MParam, dt: f64) -> Result<GridMeasure> {
    same_exponent(p, r)?;
    PdeSolver::new(d, r)?.step_measure(rho, dt, Stepping::Explicit)
}
