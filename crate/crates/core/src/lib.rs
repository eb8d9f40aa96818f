//! Numerical toolkit for sublevel-set estimates of variable-coefficient
//! sums `a1 f1(phi1) + a2 f2(phi2) + a3 f3(phi3)` over planar 3-webs.

pub mod analytic;
pub mod datum;
pub mod error;
pub mod flows;
pub mod hypotheses;
pub mod lineardata;
pub mod sublevel;

pub use analytic::{AnalyticExpr, Axis, Expr, Jet1, Jet2};
pub use datum::{Datum, Domain, LinearDatum, TestFunction, TripleDatum, VectorField};
pub use error::{Error, Result};
pub use hypotheses::{HypothesisReport, Verdict};
