use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{eval_t, Axis, Expr};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableMode {
    Affine,
    Cell,
}

/// Seeded trigonometric sum `c0 + sum c_i sin(lambda_i t + theta_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Oscillatory {
    pub seed: u64,
    pub floor: f64,
    pub maxfreq: f64,
    pub c0: f64,
    /// `(c_i, lambda_i, theta_i)`
    pub terms: Vec<(f64, f64, f64)>,
}

impl Oscillatory {
    pub fn new(seed: u64, terms: usize, maxfreq: f64, floor: f64) -> Result<Self> {
        if !(maxfreq.is_finite() && maxfreq >= 0.0 && floor.is_finite() && floor >= 0.0) {
            return Err(Error::Validation("osc needs finite maxfreq >= 0 and floor >= 0".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms: Vec<_> = (0..terms)
            .map(|_| {
                let c: f64 = rng.gen_range(-1.0..1.0);
                let lambda = rng.gen::<f64>() * maxfreq;
                let theta = rng.gen::<f64>() * std::f64::consts::TAU;
                (c, lambda, theta)
            })
            .collect();
        let c0 = if floor > 0.0 {
            floor + terms.iter().map(|t| t.0.abs()).sum::<f64>()
        } else {
            0.0
        };
        Ok(Oscillatory {
            seed,
            floor,
            maxfreq,
            c0,
            terms,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.c0
            + self
                .terms
                .iter()
                .map(|(c, l, th)| c * (l * t + th).sin())
                .sum::<f64>()
    }
}

/// Piecewise data on `[lo, hi]` with nodes `lo + i h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub lo: f64,
    pub hi: f64,
    pub h: f64,
    pub values: Vec<f64>,
    pub mode: TableMode,
}

impl Table {
    pub fn new(lo: f64, hi: f64, h: f64, values: Vec<f64>, mode: TableMode) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Validation(format!("table step must be positive, got {h}")));
        }
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return Err(Error::Validation("table interval must satisfy lo < hi".into()));
        }
        let cells = (hi - lo) / h;
        let n = cells.round();
        if (cells - n).abs() > 1e-9 * cells.max(1.0) {
            return Err(Error::Validation("table interval is not a whole number of steps".into()));
        }
        let expected = n as usize + 1;
        if values.len() != expected {
            return Err(Error::Validation(format!(
                "table needs {expected} node values, got {}",
                values.len()
            )));
        }
        Ok(Table {
            lo,
            hi,
            h,
            values,
            mode,
        })
    }

    pub fn eval(&self, y: f64) -> Result<f64> {
        if !(y >= self.lo && y <= self.hi) {
            return Err(Error::domain(format!(
                "{y} outside table interval [{}, {}]",
                self.lo, self.hi
            )));
        }
        let last = self.values.len() - 1;
        let s = (y - self.lo) / self.h;
        let i = (s.floor() as usize).min(last);
        Ok(match self.mode {
            TableMode::Cell => self.values[i],
            TableMode::Affine => {
                if i == last {
                    self.values[last]
                } else {
                    let w = s - i as f64;
                    self.values[i] * (1.0 - w) + self.values[i + 1] * w
                }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum TestFunctionSpec {
    Expr {
        e: Expr,
    },
    Table {
        lo: f64,
        hi: f64,
        h: f64,
        values: Vec<f64>,
        #[serde(default = "affine")]
        mode: TableMode,
    },
    Osc {
        seed: u64,
        terms: usize,
        maxfreq: f64,
        #[serde(default)]
        floor: f64,
    },
}

fn affine() -> TableMode {
    TableMode::Affine
}

/// A univariate function `f_j` of the auxiliary variable `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TestFunctionSpec", into = "TestFunctionSpec")]
pub enum TestFunction {
    Expr(Expr),
    Table(Table),
    Osc(Oscillatory),
}

impl TryFrom<TestFunctionSpec> for TestFunction {
    type Error = Error;
    fn try_from(s: TestFunctionSpec) -> Result<Self> {
        match s {
            TestFunctionSpec::Expr { e } => TestFunction::expr(e),
            TestFunctionSpec::Table {
                lo,
                hi,
                h,
                values,
                mode,
            } => Ok(TestFunction::Table(Table::new(lo, hi, h, values, mode)?)),
            TestFunctionSpec::Osc {
                seed,
                terms,
                maxfreq,
                floor,
            } => Ok(TestFunction::Osc(Oscillatory::new(seed, terms, maxfreq, floor)?)),
        }
    }
}

impl From<TestFunction> for TestFunctionSpec {
    fn from(f: TestFunction) -> Self {
        match f {
            TestFunction::Expr(e) => TestFunctionSpec::Expr { e },
            TestFunction::Table(t) => TestFunctionSpec::Table {
                lo: t.lo,
                hi: t.hi,
                h: t.h,
                values: t.values,
                mode: t.mode,
            },
            TestFunction::Osc(o) => TestFunctionSpec::Osc {
                seed: o.seed,
                terms: o.terms.len(),
                maxfreq: o.maxfreq,
                floor: o.floor,
            },
        }
    }
}

impl TestFunction {
    pub fn expr(e: Expr) -> Result<Self> {
        if e.free_axes().iter().any(|a| *a != Axis::T) {
            return Err(Error::Validation(
                "test function expressions may only use `t`".into(),
            ));
        }
        Ok(TestFunction::Expr(e))
    }

    pub fn eval(&self, y: f64) -> Result<f64> {
        match self {
            TestFunction::Expr(e) => eval_t(e, y),
            TestFunction::Table(t) => t.eval(y),
            TestFunction::Osc(o) => Ok(o.eval(y)),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Parse either a single test function or an array of them.
pub fn parse_test_functions(text: &str) -> Result<Vec<TestFunction>> {
    let v: serde_json::Value = serde_json::from_str(text)?;
    if v.is_array() {
        Ok(serde_json::from_value(v)?)
    } else {
        Ok(vec![serde_json::from_value(v)?])
    }
}
