use serde_json::json;

use super::report::{Extremum, HypothesisReport, Verdict, Witness};
use crate::analytic::{eval_point, simplify, value_grad, Expr};
use crate::datum::TripleDatum;
use crate::error::{Error, Result};

/// `(i, j)` with `i < j` complementary to `k` (all 1-based).
pub fn pair_for(k: usize) -> Result<(usize, usize)> {
    match k {
        1 => Ok((2, 3)),
        2 => Ok((1, 3)),
        3 => Ok((1, 2)),
        _ => Err(Error::Validation(format!("index k must be 1, 2 or 3, got {k}"))),
    }
}

fn check_perm(perm: (usize, usize, usize)) -> Result<()> {
    let (i, j, k) = perm;
    let mut s = [i, j, k];
    s.sort_unstable();
    if s != [1, 2, 3] {
        return Err(Error::Validation(format!("({i}, {j}, {k}) is not a permutation of (1, 2, 3)")));
    }
    Ok(())
}

/// `E[r] = W_j[(W_i r / r) / (W_i phi_j)]`, the defect of `log|r|` from the
/// form `g(phi_i) - h(phi_j)`.
pub fn separability_defect(d: &TripleDatum, i: usize, j: usize, r: &Expr) -> Expr {
    let wi = d.annihilating_field(i);
    let wj = d.annihilating_field(j);
    let inner = wi.apply(r.clone()) / r.clone() / wi.apply(d.phi[j - 1].clone());
    simplify(&wj.apply(inner))
}

/// Values of `r` on the grid; errors where `r` vanishes or changes sign.
fn signed_values(r: &Expr, pts: &[[f64; 2]], label: &str) -> Result<Vec<f64>> {
    let mut sign = 0.0;
    let mut out = Vec::with_capacity(pts.len());
    for &x in pts {
        let v = eval_point(r, x).map_err(|e| e.within(label))?;
        if v == 0.0 || !v.is_finite() {
            return Err(Error::domain(format!("{label} vanishes at {x:?}")).within(label));
        }
        if sign == 0.0 {
            sign = v.signum();
        } else if v.signum() != sign {
            return Err(Error::domain(format!("{label} changes sign (at {x:?})")).within(label));
        }
        out.push(v);
    }
    Ok(out)
}

fn check_transverse(d: &TripleDatum, i: usize, j: usize, pts: &[[f64; 2]]) -> Result<()> {
    let wi_phij = simplify(&d.annihilating_field(i).apply(d.phi[j - 1].clone()));
    for &x in pts {
        if eval_point(&wi_phij, x)? == 0.0 {
            return Err(Error::domain(format!("W{i}(phi{j}) vanishes at {x:?}")).within(&format!("W{i}(phi{j})")));
        }
    }
    Ok(())
}

/// Weak auxiliary check for the ordered pair `(i, j)`: holds iff `log|a_i/a_j|`
/// is not separable, i.e. `max |E| > tol` on the grid.
pub fn aux_weak_check(d: &TripleDatum, perm: (usize, usize, usize), grid: usize, tol: f64) -> Result<HypothesisReport> {
    check_perm(perm)?;
    let (i, j, _) = perm;
    let pts = d.domain.grid(grid);
    let r = d.a[i - 1].clone() / d.a[j - 1].clone();
    signed_values(&r, &pts, &format!("a{i}/a{j}"))?;
    check_transverse(d, i, j, &pts)?;
    let e = separability_defect(d, i, j, &r);
    let mut m = Extremum::max();
    for &x in &pts {
        m.push_max(eval_point(&e, x)?.abs(), x);
    }
    let verdict = if m.value > tol { Verdict::Holds } else { Verdict::Fails };
    let mut rep = HypothesisReport::new("aux_weak", verdict, grid, tol);
    rep.extremal = m.value;
    rep.witnesses.push(Witness::new("max |E|", &m.at, m.value));
    rep.details = json!({"i": i, "j": j});
    Ok(rep)
}

/// Auxiliary check for one `k` over the whole family of exponents: the defect
/// of `u_tau = log|a_i/a_j| + tau log|W_k phi_i / W_k phi_j|` is `A + tau B`.
/// Fails iff some `tau` makes it vanish on the grid. A failing verdict is
/// confirmed by building the separable factorization of `u_tau` explicitly.
pub fn aux_tau_family_check(d: &TripleDatum, k: usize, grid: usize, tol: f64) -> Result<HypothesisReport> {
    let (i, j) = pair_for(k)?;
    let pts = d.domain.grid(grid);
    let r = d.a[i - 1].clone() / d.a[j - 1].clone();
    let wk = d.annihilating_field(k);
    let s = simplify(&(wk.apply(d.phi[i - 1].clone()) / wk.apply(d.phi[j - 1].clone())));
    signed_values(&r, &pts, &format!("a{i}/a{j}"))?;
    signed_values(&s, &pts, &format!("W{k}(phi{i})/W{k}(phi{j})"))?;
    check_transverse(d, i, j, &pts)?;
    let ea = separability_defect(d, i, j, &r);
    let eb = separability_defect(d, i, j, &s);
    let mut ab = Vec::with_capacity(pts.len());
    for &x in &pts {
        ab.push((eval_point(&ea, x)?, eval_point(&eb, x)?));
    }
    let max_a = ab.iter().fold(0.0f64, |m, p| m.max(p.0.abs()));
    let max_b = ab.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
    let tau = if max_b <= tol {
        0.0
    } else {
        let num: f64 = ab.iter().map(|(a, b)| a * b).sum();
        let den: f64 = ab.iter().map(|(_, b)| b * b).sum();
        -num / den
    };
    let mut m = Extremum::max();
    for (&x, (a, b)) in pts.iter().zip(&ab) {
        m.push_max((a + tau * b).abs(), x);
    }
    let solvable = if max_b <= tol { max_a <= tol } else { m.value <= tol };
    let mut rep = HypothesisReport::new("aux_tau_family", Verdict::Holds, grid, tol);
    rep.extremal = m.value;
    rep.witnesses.push(Witness::new("max |A + tau B|", &m.at, m.value));
    let mut details = json!({
        "k": k, "i": i, "j": j, "tau": tau, "max_abs_a": max_a, "max_abs_b": max_b,
        "b_identically_zero": max_b <= tol,
    });
    if solvable {
        let cross = separable_cross_check(d, i, j, &r, &s, tau, grid.min(12))?;
        details["cross_check"] = json!({
            "max_residual": cross.max_residual, "scale": cross.scale,
            "points": cross.points, "skipped": cross.skipped,
        });
        if cross.points > 0 && cross.max_residual <= CROSS_CHECK_RTOL * (1.0 + cross.scale) {
            rep.verdict = Verdict::Fails;
            rep.witnesses.push(Witness::new("tau", &[], tau));
        } else {
            rep.verdict = Verdict::Inconclusive;
            rep.reason = Some(format!(
                "defect vanishes for tau = {tau:.6} but the separable factorization check left residual {:.3e} over {} points",
                cross.max_residual, cross.points
            ));
        }
    }
    rep.details = details;
    Ok(rep)
}

pub const CROSS_CHECK_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
struct CrossCheck {
    max_residual: f64,
    scale: f64,
    points: usize,
    skipped: usize,
}

/// With `u = log|r| + tau log|s|` and `(p, q) = (phi_i, phi_j)`, a separable `u`
/// satisfies `u(x) - u(X(p, q0)) - u(X(p0, q)) + u(x0) = 0`, where `X` inverts
/// `(phi_i, phi_j)` near the domain center `x0`.
fn separable_cross_check(
    d: &TripleDatum,
    i: usize,
    j: usize,
    r: &Expr,
    s: &Expr,
    tau: f64,
    grid: usize,
) -> Result<CrossCheck> {
    let u = |x: [f64; 2]| -> Result<f64> {
        Ok(eval_point(r, x)?.abs().ln() + tau * eval_point(s, x)?.abs().ln())
    };
    let phi = [&d.phi[i - 1], &d.phi[j - 1]];
    let x0 = d.domain.center();
    let p0 = eval_point(phi[0], x0)?;
    let q0 = eval_point(phi[1], x0)?;
    let u0 = u(x0)?;
    let mut out = CrossCheck { max_residual: 0.0, scale: u0.abs(), points: 0, skipped: 0 };
    for x in d.domain.grid(grid) {
        let p = eval_point(phi[0], x)?;
        let q = eval_point(phi[1], x)?;
        let xa = invert(phi, [p, q0], &[x, x0], d);
        let xb = invert(phi, [p0, q], &[x, x0], d);
        match (xa, xb) {
            (Some(xa), Some(xb)) => {
                let ux = u(x)?;
                let res = ux - u(xa)? - u(xb)? + u0;
                out.scale = out.scale.max(ux.abs());
                out.max_residual = out.max_residual.max(res.abs());
                out.points += 1;
            }
            _ => out.skipped += 1,
        }
    }
    Ok(out)
}

/// Damped Newton solve of `(phi_a, phi_b)(y) = target`, staying in the margin box.
fn invert(phi: [&Expr; 2], target: [f64; 2], starts: &[[f64; 2]], d: &TripleDatum) -> Option<[f64; 2]> {
    'start: for &y0 in starts {
        let mut y = y0;
        for _ in 0..60 {
            let (fa, ga) = value_grad(phi[0], y).ok()?;
            let (fb, gb) = value_grad(phi[1], y).ok()?;
            let (ra, rb) = (fa - target[0], fb - target[1]);
            if ra.abs().max(rb.abs()) <= 1e-13 * (1.0 + target[0].abs().max(target[1].abs())) {
                if d.domain.in_margin(y) {
                    return Some(y);
                }
                continue 'start;
            }
            let det = ga[0] * gb[1] - ga[1] * gb[0];
            if det == 0.0 || !det.is_finite() {
                continue 'start;
            }
            let dy = [(ra * gb[1] - rb * ga[1]) / det, (ga[0] * rb - gb[0] * ra) / det];
            let mut lam = 1.0;
            loop {
                let cand = [y[0] - lam * dy[0], y[1] - lam * dy[1]];
                if d.domain.in_margin(cand) {
                    y = cand;
                    break;
                }
                lam *= 0.5;
                if lam < 1e-6 {
                    continue 'start;
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{c, x1, x2};
    use crate::datum::Domain;

    fn datum(ratio: Expr) -> TripleDatum {
        // a2 / a3 = ratio with phi2 = x2, phi3 = x1 + x2
        TripleDatum::new(
            Domain::rect([-1.0, 1.0], [-1.0, 1.0]),
            [c(1.0), ratio, c(1.0)],
            [x1(), x2(), x1() + x2()],
        )
    }

    #[test]
    fn separable_ratio_fails() {
        let d = datum(x1().exp());
        let rep = aux_weak_check(&d, (2, 3, 1), 20, 1e-9).unwrap();
        assert_eq!(rep.verdict, Verdict::Fails);
        assert!(rep.extremal < 1e-12);
    }

    #[test]
    fn gaussian_ratio_holds() {
        let d = datum(x1().powi(2).exp());
        let rep = aux_weak_check(&d, (2, 3, 1), 20, 1e-9).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        // E = 2 identically for this ratio
        assert!((rep.extremal - 2.0).abs() < 1e-9);
        let swapped = aux_weak_check(&d, (3, 2, 1), 20, 1e-9).unwrap();
        assert_eq!(swapped.verdict, Verdict::Holds);
    }

    #[test]
    fn equal_coefficients_fail() {
        let d = datum(c(1.0));
        assert_eq!(aux_weak_check(&d, (1, 2, 3), 10, 1e-9).unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn sign_change_is_a_domain_error() {
        let d = datum(x1());
        assert!(matches!(aux_weak_check(&d, (2, 3, 1), 10, 1e-9), Err(Error::Domain { .. })));
    }

    #[test]
    fn tau_family_trivial_and_nonseparable() {
        let d = datum(c(1.0));
        let rep = aux_tau_family_check(&d, 1, 10, 1e-9).unwrap();
        assert_eq!(rep.verdict, Verdict::Fails);
        assert_eq!(rep.details["tau"], 0.0);
        let d = datum(x1().powi(2).exp());
        let rep = aux_tau_family_check(&d, 1, 10, 1e-9).unwrap();
        assert_eq!(rep.verdict, Verdict::Holds);
        assert_eq!(rep.details["b_identically_zero"], true);
        // a1 / a2 depends on phi1 only, so k = 3 is separable
        let d = TripleDatum::new(
            Domain::rect([-1.0, 1.0], [-1.0, 1.0]),
            [x1().powi(2).exp(), c(1.0), c(1.0)],
            [x1(), x2(), x1() + x2()],
        );
        assert_eq!(aux_tau_family_check(&d, 3, 10, 1e-9).unwrap().verdict, Verdict::Fails);
    }

    #[test]
    fn planted_tau_is_recovered() {
        // W3 phi1 / W3 phi2 = -(x1 + 2 x2) / (2 x1 + x2)
        let ratio = ((c(2.0) * x1() + x2()) / (x1() + c(2.0) * x2())).powi(5);
        let d = TripleDatum::new(
            Domain::rect([0.5, 1.5], [0.5, 1.5]),
            [ratio, c(1.0), c(1.0)],
            [x1(), x2(), x1().powi(2) + x1() * x2() + x2().powi(2)],
        );
        let rep = aux_tau_family_check(&d, 3, 16, 1e-8).unwrap();
        assert_eq!(rep.verdict, Verdict::Fails, "{rep:?}");
        let tau = rep.details["tau"].as_f64().unwrap();
        assert!((tau - 5.0).abs() < 1e-6);
    }
}
