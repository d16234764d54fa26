//! Deformed logarithm/exponential calculus indexed by the exponent `m`.
//!
//! For `m != 1`:
//!
//! ```text
//! ln_m(t)  = (t^(m-1) - 1) / (m-1)
//! exp_m(t) = (1 + (m-1) t)^(1/(m-1))
//! e_m(t)   = t ln_m(t) = (t^m - t) / (m-1)
//! ```
//!
//! All three recover `ln`, `exp` and `t ln t` as `m -> 1`. Evaluation goes
//! through `expm1`/`ln_1p` so that exponents close to one do not lose digits
//! to cancellation.

use serde::Serialize;

use crate::error::{invalid, Error, Result};

/// Distance from `m = 1` below which evaluation is considered near-classical.
pub const NEAR_CLASSICAL: f64 = 1e-3;

/// The exponent `m` together with the ambient dimension `n` and `N = 1/(1-m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MParam {
    m: f64,
    n: u32,
    big_n: f64,
}

impl MParam {
    /// Validates `m` in `[(n-1)/n, 1) ∪ (1, ∞)`; for `n = 1` the lower end is open.
    pub fn new(m: f64, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(invalid("dimension n must be positive"));
        }
        if !m.is_finite() {
            return Err(invalid(format!("m = {m} is not finite")));
        }
        if m == 1.0 {
            return Err(invalid("m = 1 is the classical case; use m != 1"));
        }
        let lower = (n as f64 - 1.0) / n as f64;
        let below = if n == 1 { m <= 0.0 } else { m < lower };
        if below {
            return Err(invalid(format!(
                "m = {m} below the admissible range [(n-1)/n, 1) ∪ (1, ∞) for n = {n}"
            )));
        }
        Ok(Self {
            m,
            n,
            big_n: 1.0 / (1.0 - m),
        })
    }

    /// One-dimensional model space, `n = 1`.
    pub fn one_d(m: f64) -> Result<Self> {
        Self::new(m, 1)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `N = 1/(1-m)`; negative for `m > 1`.
    pub fn big_n(&self) -> f64 {
        self.big_n
    }

    pub fn is_sub_unit(&self) -> bool {
        self.m < 1.0
    }

    /// Gradient flow / weak solution correspondence is stated for `m <= 2`.
    pub fn supports_jko_equivalence(&self) -> bool {
        self.m <= 2.0
    }

    pub fn supports_concentration_lt1(&self) -> bool {
        self.m > 0.5 && self.m < 1.0
    }

    pub fn is_near_classical(&self) -> bool {
        (self.m - 1.0).abs() < NEAR_CLASSICAL
    }

    /// Disclaimer attached to every verdict computed on the 1-D model.
    pub fn model_note(&self) -> Option<&'static str> {
        (self.n == 1).then_some("n = 1 model space: the curvature-dimension theory assumes n >= 2")
    }

    /// Threshold `1/(1-m)` (m < 1) or `-1/(m-1)` (m > 1) of the exp_m domain.
    pub fn exp_cutoff(&self) -> f64 {
        1.0 / (1.0 - self.m)
    }

    pub fn ln_m(&self, t: f64) -> Result<f64> {
        let ok = if self.m < 1.0 { t > 0.0 } else { t >= 0.0 };
        if !ok || !t.is_finite() {
            return Err(Error::Domain(format!(
                "ln_m(t) undefined at t = {t} for m = {}",
                self.m
            )));
        }
        Ok(self.ln_m_unchecked(t))
    }

    pub(crate) fn ln_m_unchecked(&self, t: f64) -> f64 {
        let k = self.m - 1.0;
        if t == 0.0 {
            return -1.0 / k;
        }
        (k * t.ln()).exp_m1() / k
    }

    /// For `m > 1` arguments below `-1/(m-1)` map to `0`; for `m < 1`
    /// arguments at or above `1/(1-m)` are rejected.
    pub fn exp_m(&self, t: f64) -> Result<f64> {
        if t.is_nan() {
            return Err(Error::Domain("exp_m of NaN".into()));
        }
        if self.m < 1.0 && t >= self.exp_cutoff() {
            return Err(Error::Domain(format!(
                "exp_m(t) requires t < 1/(1-m) = {} for m = {}, got {t}",
                self.exp_cutoff(),
                self.m
            )));
        }
        Ok(self.exp_m_unchecked(t))
    }

    pub(crate) fn exp_m_unchecked(&self, t: f64) -> f64 {
        let k = self.m - 1.0;
        let base = k * t;
        if base <= -1.0 {
            return if k > 0.0 { 0.0 } else { f64::INFINITY };
        }
        (base.ln_1p() / k).exp()
    }

    pub fn e_m(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Domain(format!("e_m(t) requires t >= 0, got {t}")));
        }
        Ok(self.e_m_unchecked(t))
    }

    pub(crate) fn e_m_unchecked(&self, t: f64) -> f64 {
        if t == 0.0 {
            0.0
        } else {
            t * self.ln_m_unchecked(t)
        }
    }
}

/// Deviations of the deformed functions from their classical limits.
#[derive(Debug, Clone, Serialize)]
pub struct LimitReport {
    pub t: f64,
    pub eps: f64,
    pub ln_deviation: f64,
    pub exp_deviation: f64,
    pub e_deviation: f64,
    /// Leading-order bounds `c * eps`, one per deviation.
    pub ln_bound: f64,
    pub exp_bound: f64,
    pub e_bound: f64,
    pub holds: bool,
}

/// Evaluates `|f_{1±eps} - f_1|` for `ln`, `exp` (at `s = ln t`) and `t ln t`.
///
/// The bound for each deviation is twice its first-order Taylor coefficient in
/// `m - 1` times `eps`.
pub fn limit_check_m_to_1(t: f64, eps: f64) -> Result<LimitReport> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("t must be positive, got {t}")));
    }
    if !(eps > 0.0 && eps < 0.1) {
        return Err(invalid(format!("eps must lie in (0, 0.1), got {eps}")));
    }
    let l = t.ln();
    let s = l;
    let mut ln_dev = 0.0f64;
    let mut exp_dev = 0.0f64;
    let mut e_dev = 0.0f64;
    for m in [1.0 - eps, 1.0 + eps] {
        let p = MParam::one_d(m)?;
        ln_dev = ln_dev.max((p.ln_m_unchecked(t) - l).abs());
        exp_dev = exp_dev.max((p.exp_m(s)? - s.exp()).abs());
        e_dev = e_dev.max((p.e_m_unchecked(t) - t * l).abs());
    }
    let slack = 1e-13;
    let ln_bound = 2.0 * 0.5 * l * l * eps + slack;
    let exp_bound = 2.0 * 0.5 * s * s * s.exp() * eps + slack;
    let e_bound = 2.0 * 0.5 * t * l * l * eps + slack;
    Ok(LimitReport {
        t,
        eps,
        ln_deviation: ln_dev,
        exp_deviation: exp_dev,
        e_deviation: e_dev,
        ln_bound,
        exp_bound,
        e_bound,
        holds: ln_dev <= ln_bound && exp_dev <= exp_bound && e_dev <= e_bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ConcLemmaCase {
    /// `m ∈ (1/2, 1)`: `lhs <= rhs`.
    SubUnit,
    /// `m ∈ (1, 2)`: `lhs >= rhs`.
    SuperUnit,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcLemma {
    pub case: ConcLemmaCase,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Both sides of the elementary `exp_m` comparison used by the m-normal
/// concentration bounds.
///
/// * `m ∈ (1/2,1)`: `exp_m(-(ar-1)^2+1) <= (2m-1)^{1/(m-1)} exp_m(-a^2 r^2/2)`
/// * `m ∈ (1,2)`:   `exp_m((ar-1)^2-1) >= (2/m-1)^{1/(m-1)} exp_m(a^2 r^2/2)`
pub fn conc_lemma_bounds(p: &MParam, a: f64, r: f64) -> Result<ConcLemma> {
    if !(a > 0.0 && r > 0.0) {
        return Err(invalid("a and r must be positive"));
    }
    let m = p.m();
    let ar = a * r;
    let rel = 1e-12;
    if m > 0.5 && m < 1.0 {
        let lhs = p.exp_m(-(ar - 1.0).powi(2) + 1.0)?;
        let rhs = (2.0 * m - 1.0).powf(1.0 / (m - 1.0)) * p.exp_m(-0.5 * ar * ar)?;
        Ok(ConcLemma {
            case: ConcLemmaCase::SubUnit,
            lhs,
            rhs,
            holds: lhs <= rhs * (1.0 + rel),
        })
    } else if m > 1.0 && m < 2.0 {
        let lhs = p.exp_m((ar - 1.0).powi(2) - 1.0)?;
        let rhs = (2.0 / m - 1.0).powf(1.0 / (m - 1.0)) * p.exp_m(0.5 * ar * ar)?;
        Ok(ConcLemma {
            case: ConcLemmaCase::SuperUnit,
            lhs,
            rhs,
            holds: lhs >= rhs * (1.0 - rel),
        })
    } else {
        Err(invalid(format!("m = {m} outside (1/2,1) ∪ (1,2)")))
    }
}
