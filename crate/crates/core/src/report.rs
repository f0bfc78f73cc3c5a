//! Structured verdicts for inequality and identity checks.

use serde::{Deserialize, Serialize};

/// Default relative tolerance for verdicts; campaigns may override.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    PreconditionFailed,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail => write!(f, "fail"),
            Verdict::PreconditionFailed => write!(f, "precondition-failed"),
        }
    }
}

/// What a check computed. A failed precondition never carries numbers, so a
/// report can never claim pass or fail without having evaluated both sides.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    /// One-sided check: pass iff `rhs - lhs >= -tol * (1 + |lhs| + |rhs|)`.
    Inequality {
        lhs: f64,
        rhs: f64,
    },
    /// Two-sided check: pass iff `|rhs - lhs| <= tol * (1 + |lhs| + |rhs|)`.
    Identity {
        lhs: f64,
        rhs: f64,
    },
    PreconditionFailed {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InequalityReport {
    pub id: String,
    pub reference: String,
    pub seed: u64,
    pub tol: f64,
    pub outcome: Outcome,
    pub metadata: Option<serde_json::Value>,
}

impl InequalityReport {
    pub fn inequality(id: &str, reference: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        InequalityReport {
            id: id.to_string(),
            reference: reference.to_string(),
            seed: 0,
            tol,
            outcome: Outcome::Inequality { lhs, rhs },
            metadata: None,
        }
    }

    pub fn identity(id: &str, reference: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        InequalityReport {
            id: id.to_string(),
            reference: reference.to_string(),
            seed: 0,
            tol,
            outcome: Outcome::Identity { lhs, rhs },
            metadata: None,
        }
    }

    pub fn precondition_failed(
        id: &str,
        reference: &str,
        reason: impl Into<String>,
        tol: f64,
    ) -> Self {
        InequalityReport {
            id: id.to_string(),
            reference: reference.to_string(),
            seed: 0,
            tol,
            outcome: Outcome::PreconditionFailed {
                reason: reason.into(),
            },
            metadata: None,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_metadata(mut self, metadata: serde_json::Value) -> Self {
        self.metadata = Some(metadata);
        self
    }

    pub fn lhs(&self) -> Option<f64> {
        match &self.outcome {
            Outcome::Inequality { lhs, .. } | Outcome::Identity { lhs, .. } => Some(*lhs),
            Outcome::PreconditionFailed { .. } => None,
        }
    }

    pub fn rhs(&self) -> Option<f64> {
        match &self.outcome {
            Outcome::Inequality { rhs, .. } | Outcome::Identity { rhs, .. } => Some(*rhs),
            Outcome::PreconditionFailed { .. } => None,
        }
    }

    /// `rhs - lhs`.
    pub fn gap(&self) -> Option<f64> {
        match &self.outcome {
            Outcome::Inequality { lhs, rhs } | Outcome::Identity { lhs, rhs } => Some(rhs - lhs),
            Outcome::PreconditionFailed { .. } => None,
        }
    }

    pub fn verdict(&self) -> Verdict {
        match &self.outcome {
            Outcome::Inequality { lhs, rhs } => {
                let scale = 1.0 + lhs.abs() + rhs.abs();
                if rhs - lhs >= -self.tol * scale {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            }
            Outcome::Identity { lhs, rhs } => {
                let scale = 1.0 + lhs.abs() + rhs.abs();
                if (rhs - lhs).abs() <= self.tol * scale {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            }
            Outcome::PreconditionFailed { .. } => Verdict::PreconditionFailed,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict() == Verdict::Pass
    }

    pub fn precondition_reason(&self) -> Option<&str> {
        match &self.outcome {
            Outcome::PreconditionFailed { reason } => Some(reason),
            _ => None,
        }
    }

    /// Flat row in the report schema.
    pub fn to_row(&self) -> ReportRow {
        ReportRow {
            id: self.id.clone(),
            reference: self.reference.clone(),
            seed: self.seed,
            lhs: self.lhs(),
            rhs: self.rhs(),
            gap: self.gap(),
            tol: self.tol,
            verdict: self.verdict().to_string(),
        }
    }
}

/// One row of campaign output (JSON object / CSV record).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRow {
    #[serde(rename = "inequality-id")]
    pub id: String,
    #[serde(rename = "paper-ref")]
    pub reference: String,
    pub seed: u64,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub gap: Option<f64>,
    pub tol: f64,
    pub verdict: String,
}
