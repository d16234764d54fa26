//! JSON scenarios: one deterministic computation plus the assertions made
//! about it.
//!
//! ```json
//! {
//!   "name": "stationary",
//!   "task": "pde",
//!   "m": 1.5,
//!   "domain": { "a": -5, "b": 5, "cells": 400 },
//!   "potential": "x^2/2",
//!   "initial": { "type": "reference" },
//!   "params": { "dt": 1e-3, "t_end": 1, "h_max": 1e-8 }
//! }
//! ```
//!
//! Expressions may use the free variable `x` and any name listed under
//! `constants`.

mod output;
mod run;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::domain::{renormalize_reference, shift_normalize, Domain1D, DomainKind, ReferencePotential};
use crate::error::{invalid, Result};
use crate::expr::Expr;
use crate::flow::barenblatt::Barenblatt;
use crate::flow::pde::Stepping;
use crate::mcalc::MParam;
use crate::measures::{GridMeasure, MGaussianBuilder};

pub use output::{
    run_to_dir, scenario_hash, set_parameter, sweep_to_dir, RunArtifacts, SweepArtifacts, SweepError, EXIT_FAIL,
    EXIT_OK, EXIT_SCHEMA,
};
pub use run::{execute, random_mixture, random_polynomial, RunOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    /// Minimizing-movement trajectory.
    Flow,
    /// Finite-volume trajectory.
    Pde,
    /// Both schemes from one initial state.
    Compare,
    Convexity,
    /// Transport-entropy, HWI, log-Sobolev and Poincaré checks.
    Ineq,
    Conc,
    /// Deformed exponential and logarithm checks.
    Calculus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalize {
    /// Add a constant to `Ψ`; keeps the convexity modulus.
    #[default]
    Shift,
    /// Affine change of `Ψ` that rescales `σ`.
    Affine,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    #[serde(default = "segment")]
    pub kind: DomainKind,
    pub a: f64,
    pub b: f64,
    #[serde(alias = "M")]
    pub cells: usize,
    /// Weight exponent `ψ` of `ω = e^{-ψ} dx`.
    #[serde(default = "zero")]
    pub psi: Field,
}

/// An expression in `x`, or one value per cell center.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Field {
    Expr(String),
    Samples(Vec<f64>),
}

impl From<&str> for Field {
    fn from(s: &str) -> Self {
        Field::Expr(s.into())
    }
}

fn segment() -> DomainKind {
    DomainKind::Segment
}

fn zero() -> Field {
    Field::Expr("0".into())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub center: f64,
    pub width: f64,
    #[serde(default = "one")]
    pub weight: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// The normalized reference measure `ν`.
    Reference,
    Uniform,
    MGaussian {
        mean: f64,
        variance: f64,
        #[serde(default)]
        tail_tol: Option<f64>,
    },
    /// Unnormalized density with respect to `ω`, as an expression in `x`.
    Density {
        expr: String,
    },
    /// Source solution of the pure porous medium equation at time `t0`.
    Barenblatt {
        t0: f64,
        #[serde(default)]
        center: f64,
    },
    /// Sum of `weight · (1 - ((x - center)/width)²)₊³` bumps.
    Mixture {
        components: Vec<Bump>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    /// Minimizing-movement step.
    pub delta: f64,
    pub dt: f64,
    pub stepping: Stepping,
    /// Quantile cells.
    pub j: usize,
    pub t_end: f64,
    pub stride: usize,
    /// Comparison times.
    pub samples: usize,
    /// Generic pass threshold; each task documents its default.
    pub tol: Option<f64>,
    /// Upper bound asserted on `H_m` along a trajectory.
    pub h_max: Option<f64>,
    /// Test functions `φ(t, x)` for the weak-form residual.
    pub phi: Vec<String>,
    /// Convexity modulus; defaults to the measured `K`.
    pub k: Option<f64>,
    /// Geodesic sample points.
    pub t_grid: usize,
    /// Added to `K` for a sharpness probe, reported as metrics.
    pub probe: Option<f64>,
    pub r_grid: Vec<f64>,
    pub theta: Vec<f64>,
    /// Randomized inequality cases drawn from `seed`.
    pub cases: usize,
    /// Poincaré test function `f(x)`.
    pub poincare: Option<String>,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            delta: 1e-2,
            dt: 1e-4,
            stepping: Stepping::Adaptive,
            j: 256,
            t_end: 1.0,
            stride: 10,
            samples: 10,
            tol: None,
            h_max: None,
            phi: Vec::new(),
            k: None,
            t_grid: 16,
            probe: None,
            r_grid: (1..=30).map(|i| 0.1 * i as f64).collect(),
            theta: vec![0.0],
            cases: 0,
            poincare: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub task: Task,
    pub m: f64,
    #[serde(default = "dim_one")]
    pub n: u32,
    pub domain: DomainSpec,
    /// Reference potential `Ψ`.
    #[serde(default = "zero", alias = "Psi")]
    pub potential: Field,
    #[serde(default)]
    pub normalize: Normalize,
    #[serde(default)]
    pub constants: BTreeMap<String, f64>,
    #[serde(default)]
    pub initial: Option<MeasureSpec>,
    /// Second measure for convexity profiles.
    #[serde(default)]
    pub target: Option<MeasureSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: Params,
}

fn dim_one() -> u32 {
    1
}

/// A malformed scenario, with its position when the JSON itself is at fault.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemaError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl std::fmt::Display for SchemaError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.line > 0 {
            write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
        } else {
            write!(f, "{}", self.message)
        }
    }
}

impl std::error::Error for SchemaError {}

/// Everything a task needs, built from a scenario.
#[derive(Debug, Clone)]
pub struct Setup {
    pub p: MParam,
    pub domain: Domain1D,
    pub reference: ReferencePotential,
}

impl Scenario {
    pub fn from_json(text: &str) -> std::result::Result<Self, SchemaError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| {
            let full = e.to_string();
            let suffix = format!(" at line {} column {}", e.line(), e.column());
            SchemaError {
                line: e.line(),
                column: e.column(),
                message: full.strip_suffix(&suffix).unwrap_or(&full).to_string(),
            }
        })?;
        s.validate().map_err(|e| SchemaError {
            line: 0,
            column: 0,
            message: e.to_string(),
        })?;
        Ok(s)
    }

    /// Checks that do not need any computation.
    pub fn validate(&self) -> Result<()> {
        MParam::new(self.m, self.n)?;
        let p = &self.params;
        if self.domain.cells < 4 {
            return Err(invalid("domain.cells must be at least 4"));
        }
        for (name, v) in [("delta", p.delta), ("dt", p.dt), ("t_end", p.t_end)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("params.{name} must be positive")));
            }
        }
        if p.j < 2 || p.stride == 0 || p.samples == 0 {
            return Err(invalid(
                "params.j >= 2, params.stride >= 1 and params.samples >= 1 are required",
            ));
        }
        let needs_initial = !matches!(self.task, Task::Conc | Task::Calculus | Task::Ineq);
        if needs_initial && self.initial.is_none() {
            return Err(invalid(format!("task {:?} needs an initial measure", self.task)));
        }
        if self.task == Task::Convexity && self.target.is_none() {
            return Err(invalid("task convexity needs a target measure"));
        }
        for (name, f) in [("domain.psi", &self.domain.psi), ("potential", &self.potential)] {
            match f {
                Field::Expr(src) => {
                    self.expr(src)?;
                }
                Field::Samples(v) if v.len() != self.domain.cells => {
                    return Err(invalid(format!(
                        "{name} has {} samples for {} cells",
                        v.len(),
                        self.domain.cells
                    )));
                }
                Field::Samples(_) => {}
            }
        }
        Ok(())
    }

    pub fn expr(&self, src: &str) -> Result<Expr> {
        Expr::parse(src, &["x"], &self.constants)
    }

    pub fn setup(&self) -> Result<Setup> {
        let p = MParam::new(self.m, self.n)?;
        let mut domain = Domain1D::new(self.domain.kind, self.domain.a, self.domain.b, self.domain.cells)?;
        match &self.domain.psi {
            Field::Expr(src) => {
                let psi = self.expr(src)?;
                if !psi.is_constant() || psi.eval(&[0.0]) != 0.0 {
                    domain = domain.with_psi(|x| psi.eval(&[x]))?;
                }
            }
            Field::Samples(v) => domain = domain.with_psi_samples(v.clone())?,
        }
        let raw = match &self.potential {
            Field::Expr(src) => {
                let pot = self.expr(src)?;
                ReferencePotential::from_fn(&domain, p, |x| pot.eval(&[x]))?
            }
            Field::Samples(v) => ReferencePotential::new(&domain, p, v.clone())?,
        };
        let reference = match self.normalize {
            Normalize::Shift => shift_normalize(&raw, &domain)?.0,
            Normalize::Affine => renormalize_reference(&raw, &domain)?.0,
            Normalize::None => raw,
        };
        Ok(Setup { p, domain, reference })
    }

    pub fn measure(&self, spec: &MeasureSpec, s: &Setup) -> Result<GridMeasure> {
        let d = &s.domain;
        match spec {
            MeasureSpec::Reference => GridMeasure::reference(&s.reference, d),
            MeasureSpec::Uniform => GridMeasure::uniform(d),
            MeasureSpec::MGaussian {
                mean,
                variance,
                tail_tol,
            } => {
                let mut b = MGaussianBuilder::new(s.p, *mean, *variance);
                if let Some(t) = tail_tol {
                    b = b.tail_tol(*t);
                }
                Ok(b.build(d)?.measure)
            }
            MeasureSpec::Density { expr } => {
                let e = self.expr(expr)?;
                GridMeasure::from_fn(d, |x| e.eval(&[x]))
            }
            MeasureSpec::Barenblatt { t0, center } => Barenblatt::new(self.m, 1.0, *center)?.sample(d, *t0),
            MeasureSpec::Mixture { components } => bump_mixture(d, components),
        }
    }
}

/// Normalized sum of compactly supported `C²` bumps.
pub fn bump_mixture(d: &Domain1D, components: &[Bump]) -> Result<GridMeasure> {
    if components.is_empty() {
        return Err(invalid("a mixture needs at least one component"));
    }
    if components.iter().any(|b| !(b.width > 0.0 && b.weight >= 0.0)) {
        return Err(invalid("bump widths must be positive and weights nonnegative"));
    }
    GridMeasure::from_fn(d, |x| {
        components
            .iter()
            .map(|b| {
                let z = d.dist(x, b.center) / b.width;
                b.weight * (1.0 - z * z).max(0.0).powi(3)
            })
            .sum()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"name": "t", "task": "conc", "m": 0.75,
        "domain": {"a": -6, "b": 6, "cells": 600}, "potential": "K*x^2/2",
        "constants": {"K": 2}}"#;

    #[test]
    fn parses_with_defaults() {
        let s = Scenario::from_json(MINIMAL).unwrap();
        assert_eq!(s.n, 1);
        assert_eq!(s.normalize, Normalize::Shift);
        assert_eq!(s.params.j, 256);
        let setup = s.setup().unwrap();
        assert!((setup.reference.mass(&setup.domain) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reports_position_of_syntax_errors() {
        let err = Scenario::from_json("{\n  \"name\": \"x\",\n  \"task\": ,\n}").unwrap_err();
        assert_eq!(err.line, 3);
        assert_eq!(err.column, 11);
    }

    #[test]
    fn accepts_samples_and_short_names() {
        let samples: Vec<String> = (0..8).map(|i| format!("{}", 0.1 * i as f64)).collect();
        let text = format!(
            r#"{{"name": "s", "task": "conc", "m": 0.75, "domain": {{"a": 0, "b": 1, "M": 8}}, "Psi": [{}]}}"#,
            samples.join(",")
        );
        let s = Scenario::from_json(&text).unwrap();
        assert_eq!(s.domain.cells, 8);
        assert!(matches!(s.potential, Field::Samples(ref v) if v.len() == 8));
        s.setup().unwrap();
        assert!(Scenario::from_json(&text.replace(",0.7000000000000001]", "]")).is_err());
    }

    #[test]
    fn rejects_unknown_fields_and_bad_values() {
        assert!(Scenario::from_json(
            &MINIMAL
                .replace("\"seed\"", "\"sead\"")
                .replace("\"constants\"", "\"sead\": 1, \"constants\"")
        )
        .is_err());
        assert!(Scenario::from_json(&MINIMAL.replace("0.75", "1.0")).is_err());
        assert!(Scenario::from_json(&MINIMAL.replace("\"conc\"", "\"flow\"")).is_err());
    }
}
