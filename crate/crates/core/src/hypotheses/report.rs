use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    pub point: Vec<f64>,
    pub value: f64,
}

impl Witness {
    pub fn new(label: impl Into<String>, point: &[f64], value: f64) -> Self {
        Witness {
            label: label.into(),
            point: point.to_vec(),
            value,
        }
    }
}

/// Outcome of one hypothesis check, decided at grid resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub check: String,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub extremal: f64,
    pub grid: usize,
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

impl HypothesisReport {
    pub fn new(check: &str, verdict: Verdict, grid: usize, tol: f64) -> Self {
        HypothesisReport {
            check: check.to_string(),
            verdict,
            witnesses: Vec::new(),
            extremal: 0.0,
            grid,
            tol,
            reason: None,
            details: serde_json::Value::Null,
        }
    }

    pub fn inconclusive(check: &str, grid: usize, tol: f64, reason: impl Into<String>) -> Self {
        let mut r = HypothesisReport::new(check, Verdict::Inconclusive, grid, tol);
        r.reason = Some(reason.into());
        r
    }
}

/// Running max of `|value|` with its location.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Extremum {
    pub value: f64,
    pub at: [f64; 2],
    pub seen: bool,
}

impl Extremum {
    pub fn max() -> Self {
        Extremum {
            value: f64::NEG_INFINITY,
            at: [f64::NAN; 2],
            seen: false,
        }
    }

    pub fn min() -> Self {
        Extremum {
            value: f64::INFINITY,
            at: [f64::NAN; 2],
            seen: false,
        }
    }

    pub fn push_max(&mut self, v: f64, x: [f64; 2]) {
        if !self.seen || v > self.value {
            *self = Extremum { value: v, at: x, seen: true };
        }
    }

    pub fn push_min(&mut self, v: f64, x: [f64; 2]) {
        if !self.seen || v < self.value {
            *self = Extremum { value: v, at: x, seen: true };
        }
    }
}
