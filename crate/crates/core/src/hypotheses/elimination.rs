use serde::{Deserialize, Serialize};

use crate::analytic::{derivative, eval_point, eval_t, simplify, Axis, Expr};
use crate::datum::TripleDatum;
use crate::error::{Error, Result};

/// `f1''(phi1) = c10 f1(phi1) + c11 f1'(phi1) + c20 f2(phi2) + c21 f2'(phi2)`,
/// valid where every listed denominator is nonzero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EliminationRelation {
    pub c10: Expr,
    pub c11: Expr,
    pub c20: Expr,
    pub c21: Expr,
    /// Coefficient of `f1''(phi1)` before solving.
    pub leading: Expr,
    pub denominators: Vec<(String, Expr)>,
}

impl EliminationRelation {
    /// Build from `W3(G / a3) = 0`, divided by `b2 W3 phi2`, then hit with `W2`.
    pub fn derive(d: &TripleDatum) -> Self {
        let w2 = d.annihilating_field(2);
        let w3 = d.annihilating_field(3);
        let [a1, a2, a3] = d.a.clone();
        let [phi1, phi2, _] = d.phi.clone();
        let b1 = a1 / a3.clone();
        let b2 = a2 / a3.clone();
        let p1 = w3.apply(b1.clone());
        let p2 = w3.apply(b2.clone());
        let q1 = b1 * w3.apply(phi1.clone());
        let q2 = b2 * w3.apply(phi2);
        let r1 = p1 / q2.clone();
        let r2 = p2 / q2.clone();
        let s1 = q1 / q2.clone();
        let w2phi1 = w2.apply(phi1);
        let leading = s1.clone() * w2phi1.clone();
        let c10 = -(w2.apply(r1.clone()) / leading.clone());
        let c11 = -((r1 * w2phi1.clone() + w2.apply(s1)) / leading.clone());
        let c20 = -(w2.apply(r2) / leading.clone());
        EliminationRelation {
            c10: simplify(&c10),
            c11: simplify(&c11),
            c20: simplify(&c20),
            c21: Expr::Const(0.0),
            leading: simplify(&leading),
            denominators: vec![
                ("a3".into(), simplify(&a3)),
                ("b2*W3(phi2)".into(), simplify(&q2)),
                ("W2(phi1)".into(), simplify(&w2phi1)),
            ],
        }
    }

    pub fn coefficients(&self, x: [f64; 2]) -> Result<[f64; 4]> {
        Ok([
            eval_point(&self.c10, x)?,
            eval_point(&self.c11, x)?,
            eval_point(&self.c20, x)?,
            eval_point(&self.c21, x)?,
        ])
    }

    /// `f1''(phi1) - sum c_{jk} f_j^(k)(phi_j)` for `f1, f2` given as expressions in `t`.
    pub fn residual(&self, d: &TripleDatum, f1: &Expr, f2: &Expr, x: [f64; 2]) -> Result<f64> {
        let y1 = eval_point(&d.phi[0], x)?;
        let y2 = eval_point(&d.phi[1], x)?;
        let f1p = derivative(f1, Axis::T);
        let f1pp = derivative(&f1p, Axis::T);
        let f2p = derivative(f2, Axis::T);
        let c = self.coefficients(x)?;
        Ok(eval_t(&f1pp, y1)?
            - c[0] * eval_t(f1, y1)?
            - c[1] * eval_t(&f1p, y1)?
            - c[2] * eval_t(f2, y2)?
            - c[3] * eval_t(&f2p, y2)?)
    }

    /// Fail with the first denominator whose grid minimum is at most `tol`.
    pub fn check_region(&self, d: &TripleDatum, grid: usize, tol: f64) -> Result<()> {
        let mut named: Vec<(&str, &Expr)> = self.denominators.iter().map(|(n, e)| (n.as_str(), e)).collect();
        named.push(("leading", &self.leading));
        for (name, e) in named {
            let mut worst = (f64::INFINITY, d.domain.center());
            for x in d.domain.grid(grid) {
                let v = match eval_point(e, x) {
                    Ok(v) => v.abs(),
                    Err(Error::Domain { .. }) => 0.0,
                    Err(err) => return Err(err),
                };
                if v < worst.0 {
                    worst = (v, x);
                }
            }
            if worst.0 <= tol {
                return Err(Error::DegenerateDenominator {
                    name: name.to_string(),
                    locus: worst.1.to_vec(),
                    value: worst.0,
                });
            }
        }
        Ok(())
    }
}

pub fn elimination_second_order(d: &TripleDatum, grid: usize, tol: f64) -> Result<EliminationRelation> {
    let rel = EliminationRelation::derive(d);
    rel.check_region(d, grid, tol)?;
    Ok(rel)
}
