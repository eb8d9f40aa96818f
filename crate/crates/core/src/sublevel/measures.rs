use std::io::Write;

use serde::{Deserialize, Serialize};

use super::fit::{fit_exponent, ExponentFit};
use super::sampling::{excluding, MeasureConfig, MeasureEstimate, Sample, Sampled};
use crate::analytic::{eval3, eval_jet, eval_point, Expr};
use crate::datum::{Domain, TestFunction, TripleDatum};
use crate::error::{Error, Result};

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("eps must be positive and finite, got {eps}")))
    }
}

fn check_three(f: &[TestFunction]) -> Result<()> {
    if f.len() == 3 {
        Ok(())
    } else {
        Err(Error::Validation(format!("need 3 test functions, got {}", f.len())))
    }
}

/// `|sum a_j f_j(phi_j)|` where `|(f_j(phi_j))_j| >= 1`, `INFINITY` elsewhere.
fn sum_level(d: &TripleDatum, f: &[TestFunction], x: [f64; 2]) -> Result<f64> {
    let mut sum = 0.0;
    let mut norm2 = 0.0;
    for j in 0..3 {
        let v = f[j].eval(eval_point(&d.phi[j], x)?)?;
        sum += eval_point(&d.a[j], x)? * v;
        norm2 += v * v;
    }
    Ok(if norm2 >= 1.0 { sum.abs() } else { f64::INFINITY })
}

/// Level values of the main sublevel set over `B`; threshold with [`Sampled::estimate`].
pub fn sample_sublevel(d: &TripleDatum, f: &[TestFunction], cfg: &MeasureConfig) -> Result<Sampled> {
    check_three(f)?;
    Sampled::collect(d.domain.bbox(), cfg, true, |p| {
        if !d.domain.contains(p) {
            return Ok(Sample::Outside);
        }
        Ok(match excluding(sum_level(d, f, p))? {
            Some(v) => Sample::Level(v),
            None => Sample::Excluded,
        })
    })
}

/// `|{x in B : |sum a_j f_j(phi_j(x))| < eps, |f(Phi(x))| >= 1}|`.
pub fn sublevel_measure(d: &TripleDatum, f: &[TestFunction], eps: f64, cfg: &MeasureConfig) -> Result<MeasureEstimate> {
    check_eps(eps)?;
    Ok(sample_sublevel(d, f, cfg)?.estimate(eps))
}

/// Raw membership in `{|sum a_j f_j(phi_j)| < eps}` at the sample points of `B`,
/// ignoring the normalization `|f(Phi)| >= 1`.
pub fn sublevel_mask(d: &TripleDatum, f: &[TestFunction], eps: f64, cfg: &MeasureConfig) -> Result<Vec<bool>> {
    check_three(f)?;
    let s = Sampled::collect(d.domain.bbox(), cfg, true, |p| {
        if !d.domain.contains(p) {
            return Ok(Sample::Outside);
        }
        let v: Result<f64> = (0..3).try_fold(0.0, |acc, j| {
            Ok(acc + eval_point(&d.a[j], p)? * f[j].eval(eval_point(&d.phi[j], p)?)?)
        });
        Ok(match excluding(v)? {
            Some(v) => Sample::Level(v.abs()),
            None => Sample::Excluded,
        })
    })?;
    Ok(s.mask(eps))
}

pub fn sample_analytic(h: &Expr, domain: &Domain, cfg: &MeasureConfig) -> Result<Sampled> {
    Sampled::collect(domain.bbox(), cfg, false, |p| {
        if !domain.contains(p) {
            return Ok(Sample::Outside);
        }
        Ok(match excluding(eval_point(h, p))? {
            Some(v) => Sample::Level(v.abs()),
            None => Sample::Excluded,
        })
    })
}

/// `|{x in B : |H(x)| <= eps}|`.
pub fn generic_analytic_sublevel(h: &Expr, domain: &Domain, eps: f64, cfg: &MeasureConfig) -> Result<MeasureEstimate> {
    check_eps(eps)?;
    Ok(sample_analytic(h, domain, cfg)?.estimate(eps))
}

/// Dyadic values `2^k` for `k = min..=max`, largest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsRange {
    pub min_exp: i32,
    pub max_exp: i32,
}

impl Default for EpsRange {
    fn default() -> Self {
        EpsRange { min_exp: -12, max_exp: -3 }
    }
}

impl EpsRange {
    pub fn new(min_exp: i32, max_exp: i32) -> Result<Self> {
        if min_exp > max_exp {
            return Err(Error::Validation(format!("empty eps range 2^{min_exp}..2^{max_exp}")));
        }
        Ok(EpsRange { min_exp, max_exp })
    }

    pub fn values(&self) -> Vec<f64> {
        (self.min_exp..=self.max_exp).rev().map(|k| 2f64.powi(k)).collect()
    }
}

/// Derivative floor `min_x sum_{|alpha| <= N} |d^alpha F(x)|` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantReport {
    pub order: usize,
    pub delta_floor: f64,
    pub delta_at: [f64; 2],
    pub measures: Vec<MeasureEstimate>,
    pub fit: Option<ExponentFit>,
    /// `false` only when the floor is positive but the fitted exponent is not.
    pub consistent: bool,
}

pub const FLOOR_GRID: usize = 64;

pub fn derivative_floor(f: &Expr, domain: &Domain, order: usize, grid: usize) -> Result<(f64, [f64; 2])> {
    let mut best = (f64::INFINITY, domain.center());
    for x in domain.grid(grid) {
        let jet = eval_jet(f, x, order)?;
        let mut s = 0.0;
        for total in 0..=order {
            for j in 0..=total {
                s += jet.partial(total - j, j)?.abs();
            }
        }
        if s < best.0 {
            best = (s, x);
        }
    }
    Ok(best)
}

pub fn quant_sublevel_harness(
    f: &Expr,
    domain: &Domain,
    order: usize,
    etas: &[f64],
    cfg: &MeasureConfig,
) -> Result<QuantReport> {
    let (delta_floor, delta_at) = derivative_floor(f, domain, order, FLOOR_GRID)?;
    let sampled = sample_analytic(f, domain, cfg)?;
    let mut measures = Vec::with_capacity(etas.len());
    for &eta in etas {
        check_eps(eta)?;
        measures.push(sampled.estimate(eta));
    }
    let vals: Vec<f64> = measures.iter().map(|m| m.value).collect();
    let fit = match fit_exponent(etas, &vals) {
        Ok(fit) => Some(fit),
        Err(Error::InsufficientData { .. }) => None,
        Err(e) => return Err(e),
    };
    let consistent = !(delta_floor > 0.0) || fit.as_ref().is_some_and(|f| f.tau_hat > 0.0);
    Ok(QuantReport { order, delta_floor, delta_at, measures, fit, consistent })
}

/// The two-term set `{(x, t) in B x [-1, 1] : |b1 g1(psi1) + b2 g2(psi2)| < eps}`
/// with `psi_j(x, t) = (phi_j(x), t beta_j(x))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoTerm {
    pub domain: Domain,
    pub b: [Expr; 2],
    pub phi: [Expr; 2],
    pub beta: [Expr; 2],
}

impl TwoTerm {
    /// `b_j = a_j`, `beta_j = W3 phi_j`.
    pub fn from_datum(d: &TripleDatum) -> Self {
        let w3 = d.annihilating_field(3);
        TwoTerm {
            domain: d.domain.clone(),
            b: [d.a[0].clone(), d.a[1].clone()],
            phi: [d.phi[0].clone(), d.phi[1].clone()],
            beta: [
                crate::analytic::simplify(&w3.apply(d.phi[0].clone())),
                crate::analytic::simplify(&w3.apply(d.phi[1].clone())),
            ],
        }
    }

    /// `psi_j(x, t)`.
    pub fn psi(&self, j: usize, x: [f64; 2], t: f64) -> Result<[f64; 2]> {
        Ok([eval_point(&self.phi[j], x)?, t * eval_point(&self.beta[j], x)?])
    }
}

/// `g` is an expression in `x1` (first slot) and `t` (second slot).
fn eval_plane(g: &Expr, y: [f64; 2]) -> Result<f64> {
    eval3(g, [y[0], 0.0, y[1]])
}

pub fn two_term_measure_3d(tt: &TwoTerm, g: &[Expr; 2], eps: f64, cfg: &MeasureConfig) -> Result<MeasureEstimate> {
    check_eps(eps)?;
    let b = tt.domain.bbox();
    let s = Sampled::collect([b[0], b[1], [-1.0, 1.0]], cfg, true, |p| {
        let x = [p[0], p[1]];
        if !tt.domain.contains(x) {
            return Ok(Sample::Outside);
        }
        let v: Result<f64> = (0..2).try_fold(0.0, |acc, j| {
            Ok(acc + eval_point(&tt.b[j], x)? * eval_plane(&g[j], tt.psi(j, x, p[2])?)?)
        });
        Ok(match excluding(v)? {
            Some(v) => Sample::Level(v.abs()),
            None => Sample::Excluded,
        })
    })?;
    Ok(s.estimate(eps))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub estimates: Vec<MeasureEstimate>,
    /// `None` when fewer than three measures are nonzero.
    pub fit: Option<ExponentFit>,
}

/// Measure the main sublevel set at every `eps` of the range on shared sample points and fit the decay.
pub fn run_sweep(d: &TripleDatum, f: &[TestFunction], range: &EpsRange, cfg: &MeasureConfig) -> Result<Sweep> {
    let sampled = sample_sublevel(d, f, cfg)?;
    let eps = range.values();
    let estimates: Vec<MeasureEstimate> = eps.iter().map(|&e| sampled.estimate(e)).collect();
    let vals: Vec<f64> = estimates.iter().map(|m| m.value).collect();
    let fit = match fit_exponent(&eps, &vals) {
        Ok(f) => Some(f),
        Err(Error::InsufficientData { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(Sweep { estimates, fit })
}

pub fn write_sweep_csv<W: Write>(estimates: &[MeasureEstimate], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["eps", "measure", "stderr", "method", "cells_or_samples", "excluded_mass"])?;
    for m in estimates {
        let method = match m.method {
            super::Method::Grid => "grid",
            super::Method::MonteCarlo => "monte-carlo",
        };
        w.write_record([
            m.eps.to_string(),
            m.value.to_string(),
            m.stderr.map(|s| s.to_string()).unwrap_or_default(),
            method.to_string(),
            m.samples.to_string(),
            m.excluded_mass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{c, t, x1, x2};
    use crate::sublevel::CellSample;

    fn constf(v: f64) -> TestFunction {
        TestFunction::expr(c(v)).unwrap()
    }

    fn simple() -> TripleDatum {
        TripleDatum::new(
            Domain::rect([-1.0, 1.0], [-1.0, 1.0]),
            [c(1.0), c(1.0), c(1.0)],
            [x1(), x2(), x1() * x2()],
        )
    }

    #[test]
    fn trivial_sets() {
        let d = simple();
        let f = [constf(0.0), constf(0.0), constf(2.0)];
        let cfg = MeasureConfig::grid(64);
        assert_eq!(sublevel_measure(&d, &f, 0.5, &cfg).unwrap().value, 0.0);
        assert!((sublevel_measure(&d, &f, 3.0, &cfg).unwrap().value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn strips() {
        let dom = Domain::rect([-1.0, 1.0], [-1.0, 1.0]);
        let cfg = MeasureConfig::grid(400).with_cell_sample(CellSample::Center);
        let m = generic_analytic_sublevel(&x1(), &dom, 0.1, &cfg).unwrap();
        assert!((m.value - 0.4).abs() <= 2.0 * 2.0 / 400.0 * 2.0);
        let m = generic_analytic_sublevel(&x1().powi(2), &dom, 0.01, &cfg).unwrap();
        assert!((m.value - 0.4).abs() <= 2.0 * 2.0 / 400.0 * 2.0);
        assert_eq!(generic_analytic_sublevel(&c(1.0), &dom, 0.5, &cfg).unwrap().value, 0.0);
    }

    #[test]
    fn disk_masking() {
        let dom = Domain::disk([0.0, 0.0], 1.0);
        let m = generic_analytic_sublevel(&c(0.0), &dom, 0.5, &MeasureConfig::grid(512)).unwrap();
        assert!((m.value - std::f64::consts::PI).abs() < 0.01);
    }

    #[test]
    fn harness_examples() {
        let dom = Domain::rect([-1.0, 1.0], [-1.0, 1.0]);
        let etas: Vec<f64> = (4..=10).map(|k| 2f64.powi(-k)).collect();
        let cfg = MeasureConfig::grid(512);
        let r = quant_sublevel_harness(&x1(), &dom, 1, &etas, &cfg).unwrap();
        assert!(r.delta_floor >= 1.0 && r.delta_floor < 1.02);
        assert!((r.fit.unwrap().tau_hat - 1.0).abs() < 0.05);
        let r = quant_sublevel_harness(&(x1() * x2()), &dom, 2, &etas, &cfg).unwrap();
        assert!(r.delta_floor >= 1.0);
        let tau = r.fit.unwrap().tau_hat;
        assert!(tau > 0.8 && tau <= 1.0, "{tau}");
        assert!(r.consistent);
    }

    #[test]
    fn two_term_examples() {
        let d = TripleDatum::new(
            Domain::rect([0.0, 1.0], [0.0, 1.0]),
            [c(1.0), c(1.0), c(1.0)],
            [x1(), x2(), x1() + x2()],
        );
        let tt = TwoTerm::from_datum(&d);
        let cfg = MeasureConfig::grid(24);
        let full = 2.0;
        let m = two_term_measure_3d(&tt, &[c(0.0), c(0.0)], 0.1, &cfg).unwrap();
        assert!((m.value - full).abs() < 1e-12);
        let m = two_term_measure_3d(&tt, &[c(1.0), c(0.0)], 0.5, &cfg).unwrap();
        assert_eq!(m.value, 0.0);
        // beta = (1, -1): t^2 h1(y) and -t^2 h2(y) cancel
        let g = [t().powi(2) * (c(1.0) + x1()), -(t().powi(2) * (c(1.0) + x1()))];
        let tt2 = TwoTerm { phi: [x1(), x1()], ..tt };
        for eps in [1e-3, 1e-1] {
            let m = two_term_measure_3d(&tt2, &g, eps, &cfg).unwrap();
            assert!((m.value - full).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_is_monotone_and_exact_solution_is_full() {
        let d = TripleDatum::new(
            Domain::rect([0.0, 1.0], [0.0, 1.0]),
            [c(1.0), c(1.0), c(1.0)],
            [x1(), x2(), x1() + x2()],
        );
        let f = [
            TestFunction::expr(c(1.0) + t()).unwrap(),
            TestFunction::expr(c(1.0) + t()).unwrap(),
            TestFunction::expr(-(c(2.0) + t())).unwrap(),
        ];
        let s = run_sweep(&d, &f, &EpsRange::new(-8, -3).unwrap(), &MeasureConfig::grid(64)).unwrap();
        for m in &s.estimates {
            assert!((m.value - 1.0).abs() < 1e-12);
        }
        assert!(s.fit.unwrap().tau_hat.abs() < 1e-12);
        let mut buf = Vec::new();
        write_sweep_csv(&s.estimates, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("eps,measure,stderr,method"));
    }
}
