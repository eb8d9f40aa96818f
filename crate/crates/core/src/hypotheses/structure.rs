use serde::{Deserialize, Serialize};

use super::report::{Extremum, HypothesisReport, Verdict, Witness};
use crate::analytic::{eval_jet, eval_point, value_grad};
use crate::datum::TripleDatum;
use crate::error::{Error, Result};

/// Minimum of `|a_j|` and of `|det(grad phi_i, grad phi_j)|` over the grid.
pub fn check_nondegeneracy(d: &TripleDatum, grid: usize, tol: f64) -> Result<HypothesisReport> {
    let pts = d.domain.grid(grid);
    let mut a_min = [Extremum::min(); 3];
    let mut det_min = [Extremum::min(); 3];
    for &x in &pts {
        let mut g = [[0.0; 2]; 3];
        for j in 0..3 {
            a_min[j].push_min(eval_point(&d.a[j], x)?.abs(), x);
            g[j] = value_grad(&d.phi[j], x)?.1;
        }
        for (slot, (i, j)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
            let det = g[i][0] * g[j][1] - g[i][1] * g[j][0];
            det_min[slot].push_min(det.abs(), x);
        }
    }
    let mut r = HypothesisReport::new("nondegeneracy", Verdict::Holds, grid, tol);
    for (j, e) in a_min.iter().enumerate() {
        r.witnesses.push(Witness::new(format!("min |a{}|", j + 1), &e.at, e.value));
    }
    for (e, (i, j)) in det_min.iter().zip([(1, 2), (1, 3), (2, 3)]) {
        r.witnesses
            .push(Witness::new(format!("min |det(grad phi{i}, grad phi{j})|"), &e.at, e.value));
    }
    r.extremal = r
        .witnesses
        .iter()
        .map(|w| w.value)
        .fold(f64::INFINITY, f64::min);
    if r.extremal < tol {
        r.verdict = Verdict::Fails;
    }
    Ok(r)
}

/// Web curvature `theta = d1(k22/k2) - d2(k11/k1)` of `phi3 = k` in adapted coordinates.
pub fn web_curvature_theta(d: &TripleDatum, x: [f64; 2]) -> Result<f64> {
    if !d.is_adapted() {
        return Err(Error::NotAdapted);
    }
    let j = eval_jet(&d.phi[2], x, 3)?;
    let p = |i, k| j.partial(i, k).expect("order 3");
    let (k1, k2) = (p(1, 0), p(0, 1));
    if k1 == 0.0 || k2 == 0.0 {
        return Err(Error::Domain {
            path: "phi3".into(),
            reason: format!("a first partial of phi3 vanishes at {x:?}"),
        });
    }
    let (k11, k12, k22) = (p(2, 0), p(1, 1), p(0, 2));
    let (k112, k122) = (p(2, 1), p(1, 2));
    let d1 = k122 / k2 - k22 * k12 / (k2 * k2);
    let d2 = k112 / k1 - k11 * k12 / (k1 * k1);
    Ok(d1 - d2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureVerdict {
    pub zero: bool,
    pub max_abs: f64,
    pub argmax: [f64; 2],
    pub skipped: usize,
    pub report: HypothesisReport,
}

/// Decide whether `theta` vanishes on the grid over `B`.
pub fn curvature_identically_zero(d: &TripleDatum, grid: usize, tol: f64) -> Result<CurvatureVerdict> {
    if !d.is_adapted() {
        return Err(Error::NotAdapted);
    }
    let mut ext = Extremum::max();
    let mut skipped = 0;
    for x in d.domain.grid(grid) {
        match web_curvature_theta(d, x) {
            Ok(v) => ext.push_max(v.abs(), x),
            Err(Error::Domain { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if !ext.seen {
        return Err(Error::Domain {
            path: "phi3".into(),
            reason: "curvature undefined on the whole grid".into(),
        });
    }
    let zero = ext.value <= tol;
    let mut report = HypothesisReport::new(
        "web_curvature",
        if zero { Verdict::Fails } else { Verdict::Holds },
        grid,
        tol,
    );
    report.extremal = ext.value;
    report.witnesses.push(Witness::new("max |theta|", &ext.at, ext.value));
    report.details = serde_json::json!({ "skipped_points": skipped });
    if zero {
        report.reason = Some("web curvature vanishes identically at grid resolution".into());
    }
    Ok(CurvatureVerdict {
        zero,
        max_abs: ext.value,
        argmax: ext.at,
        skipped,
        report,
    })
}
