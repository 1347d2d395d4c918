//! The verdict record shared by every verifier.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Relative tolerance factor used when a verifier does not override it.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// One checked inequality: `slack` is signed with positive meaning satisfied,
/// and `pass ⇔ slack ≥ −tol` where `tol = rel·max(1, |lhs|, |rhs|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub inequality_id: String,
    pub params: BTreeMap<String, Value>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tol: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Value>,
}

impl VerificationReport {
    pub fn new(inequality_id: impl Into<String>, lhs: f64, rhs: f64, slack: f64) -> Self {
        let mut r = Self {
            inequality_id: inequality_id.into(),
            params: BTreeMap::new(),
            lhs,
            rhs,
            slack,
            tol: 0.0,
            pass: false,
            witness: None,
        };
        r.set_relative_tol(DEFAULT_REL_TOL);
        r
    }

    fn set_relative_tol(&mut self, rel: f64) {
        self.tol = rel * 1f64.max(self.lhs.abs()).max(self.rhs.abs());
        self.pass = self.lhs.is_finite()
            && self.rhs.is_finite()
            && self.slack.is_finite()
            && self.slack >= -self.tol;
    }

    /// Recomputes `tol` and `pass` for a different relative factor.
    pub fn with_relative_tol(mut self, rel: f64) -> Self {
        self.set_relative_tol(rel);
        self.params.insert("tol_rel".into(), num(rel));
        self
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    /// Records a real parameter; non-finite values become `"inf"`/`"-inf"`/`"nan"`.
    pub fn with_num(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), num(value));
        self
    }

    pub fn with_witness(mut self, witness: Value) -> Self {
        self.witness = Some(witness);
        self
    }
}

/// JSON value for a real number, mapping non-finite values to strings.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else if x.is_nan() {
        Value::from("nan")
    } else if x > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

/// Summary over a campaign of reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub pass_count: usize,
    pub fail_count: usize,
    pub min_slack: f64,
}

impl CampaignSummary {
    pub fn of(reports: &[VerificationReport]) -> Self {
        let pass_count = reports.iter().filter(|r| r.pass).count();
        Self {
            pass_count,
            fail_count: reports.len() - pass_count,
            min_slack: reports.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.fail_count == 0
    }
}
