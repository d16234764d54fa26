//! Wasserstein gradient flow of the m-relative entropy.
//!
//! Two discretizations of the same evolution
//! `∂_t ρ = div_ω(ρ ∇(ρ^{m-1}/(m-1) + V))` with `V = -σ^{m-1}/(m-1)`:
//! minimizing movements in quantile coordinates ([`jko`]) and a conservative
//! finite-volume scheme ([`pde`]). [`checks`] compares them with each other
//! and with closed-form behaviour.

pub mod barenblatt;
pub mod checks;
pub mod jko;
pub mod pde;

use serde::Serialize;

use crate::measures::{GridMeasure, QuantileRep};

/// One recorded state along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub k: usize,
    pub t: f64,
    pub h_m: f64,
    pub i_m: f64,
    pub w2_to_ref: f64,
    pub mass: f64,
    pub mean: f64,
    pub variance: f64,
    /// `W₂` to the previously recorded state; zero for the first row.
    pub step_w2: f64,
}

/// Recorded states of a trajectory.
#[derive(Debug, Clone, Default)]
pub struct FlowTrace {
    pub rows: Vec<TraceRow>,
    pub measures: Vec<GridMeasure>,
    /// Quantile states, present for minimizing-movement trajectories.
    pub quantiles: Vec<QuantileRep>,
    /// Diagnostics collected while running (boundary mass, scope notes).
    pub notes: Vec<String>,
}

impl FlowTrace {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn last(&self) -> Option<&GridMeasure> {
        self.measures.last()
    }

    /// Largest increase `H_{k+1} - H_k` between consecutive rows.
    pub fn max_energy_increase(&self) -> f64 {
        self.rows
            .windows(2)
            .map(|w| w[1].h_m - w[0].h_m)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_mass_error(&self) -> f64 {
        self.rows.iter().map(|r| (r.mass - 1.0).abs()).fold(0.0, f64::max)
    }

    /// CSV with columns `k,t,H_m,I_m,W2_to_ref,mass,mean,variance`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,t,H_m,I_m,W2_to_ref,mass,mean,variance\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.k, r.t, r.h_m, r.i_m, r.w2_to_ref, r.mass, r.mean, r.variance
            ));
        }
        out
    }
}
