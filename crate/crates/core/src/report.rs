//! Machine-readable verdicts of one-sided inequality checks.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::mcalc::MParam;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    Fail,
    /// Hypotheses fail; nothing was asserted.
    NotApplicable,
    /// The inequality holds trivially (an infinite side).
    Vacuous,
}

impl Outcome {
    /// Passing, vacuous and non-applicable verdicts do not fail a suite.
    pub fn is_ok(self) -> bool {
        self != Outcome::Fail
    }
}

/// A checked inequality `lhs ≤ rhs` within the listed tolerances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub hypotheses: Vec<String>,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`; negative beyond the tolerance means failure.
    pub slack: f64,
    pub verdict: Outcome,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Verdict {
    /// Compares `lhs ≤ rhs + tol`; an infinite right side makes it vacuous.
    pub fn compare(name: &str, p: &MParam, lhs: f64, rhs: f64, tol: f64) -> Self {
        let verdict = if rhs == f64::INFINITY || lhs == f64::NEG_INFINITY {
            Outcome::Vacuous
        } else if lhs <= rhs + tol {
            Outcome::Pass
        } else {
            Outcome::Fail
        };
        let mut v = Self {
            name: name.to_string(),
            hypotheses: Vec::new(),
            lhs,
            rhs,
            slack: rhs - lhs,
            verdict,
            tolerances: BTreeMap::from([("abs".to_string(), tol)]),
            notes: Vec::new(),
        };
        if let Some(note) = p.model_note() {
            v.notes.push(note.to_string());
        }
        v
    }

    pub fn not_applicable(name: &str, p: &MParam, reason: impl Into<String>) -> Self {
        let mut v = Self::compare(name, p, f64::NAN, f64::NAN, 0.0);
        v.verdict = Outcome::NotApplicable;
        v.notes.insert(0, reason.into());
        v
    }

    pub fn with_hypotheses(mut self, h: &[&str]) -> Self {
        self.hypotheses.extend(h.iter().map(|s| s.to_string()));
        self
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn with_tolerance(mut self, key: &str, value: f64) -> Self {
        self.tolerances.insert(key.to_string(), value);
        self
    }

    /// Re-decides a comparison with its absolute tolerance scaled by `factor`.
    pub fn tightened(mut self, factor: f64) -> Self {
        if !matches!(self.verdict, Outcome::Pass | Outcome::Fail) {
            return self;
        }
        let tol = self.tolerances.get("abs").copied().unwrap_or(0.0) * factor;
        self.tolerances.insert("abs".to_string(), tol);
        self.verdict = if self.lhs <= self.rhs + tol {
            Outcome::Pass
        } else {
            Outcome::Fail
        };
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict.is_ok()
    }
}

/// Aggregate of many verdicts.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub vacuous: usize,
    pub not_applicable: usize,
    /// Smallest slack over passing comparisons.
    pub min_slack: f64,
}

impl SuiteSummary {
    pub fn of(verdicts: &[Verdict]) -> Self {
        let count = |o: Outcome| verdicts.iter().filter(|v| v.verdict == o).count();
        Self {
            total: verdicts.len(),
            passed: count(Outcome::Pass),
            failed: count(Outcome::Fail),
            vacuous: count(Outcome::Vacuous),
            not_applicable: count(Outcome::NotApplicable),
            min_slack: verdicts
                .iter()
                .filter(|v| v.verdict == Outcome::Pass)
                .map(|v| v.slack)
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn all_ok(&self) -> bool {
        self.failed == 0
    }
}
