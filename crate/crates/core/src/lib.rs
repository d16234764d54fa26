//! m-relative entropy and its Wasserstein gradient flow on one-dimensional
//! weighted domains.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod domain;
pub mod entropy;
pub mod error;
pub mod expr;
pub mod flow;
pub mod inequalities;
pub mod interp;
pub mod mcalc;
pub mod measures;
pub mod report;
pub mod scenario;
pub mod transport;

pub use domain::{Domain1D, DomainKind, ReferencePotential};
pub use error::{Error, Result};
pub use mcalc::MParam;
pub use measures::{GridMeasure, QuantileRep};
