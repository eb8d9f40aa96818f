use std::io::Write;

use serde::{Deserialize, Serialize};

use super::ode::{rk4, FlowConfig};
use super::psi::Psi;
use crate::analytic::eval_point;
use crate::datum::{TestFunction, TripleDatum};
use crate::error::{Error, Result};

pub const MAX_CHAIN_LEN: usize = 4;

/// `Theta^eps_{n,z}(t)` together with all intermediate stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainPoint {
    pub z: [f64; 3],
    pub tvec: Vec<f64>,
    pub eps: f64,
    /// `stages[0] = z`, `stages[k] = Theta_k`.
    pub stages: Vec<[f64; 3]>,
}

impl ChainPoint {
    pub fn end(&self) -> [f64; 3] {
        *self.stages.last().expect("stage 0 always present")
    }

    pub fn len(&self) -> usize {
        self.stages.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Both annihilators for one datum, so repeated chains share cached expressions.
pub struct ChainBuilder<'a> {
    pub datum: &'a TripleDatum,
    psi: [Psi<'a>; 2],
    pub cfg: FlowConfig,
}

impl<'a> ChainBuilder<'a> {
    pub fn new(datum: &'a TripleDatum, cfg: FlowConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(ChainBuilder {
            datum,
            psi: [Psi::new(datum, 1)?, Psi::new(datum, 2)?],
            cfg,
        })
    }

    pub fn psi(&self, j: usize) -> &Psi<'a> {
        &self.psi[j - 1]
    }

    fn inside(&self, p: &[f64; 3]) -> bool {
        self.datum.domain.in_margin([p[0], p[1]]) && p[2] > 0.0 && p[2] <= 1.0
    }

    /// Flow along `V_j^eps` for time `t`.
    pub fn flow_v(&self, j: usize, eps: f64, p: [f64; 3], t: f64) -> Result<[f64; 3]> {
        let psi = self.psi(j);
        rk4(
            |q| psi.annihilator(eps, *q, &self.cfg),
            p,
            t,
            self.cfg.steps_for(t),
            |q| self.inside(q),
        )
    }

    pub fn chain(&self, z: [f64; 3], eps: f64, tvec: &[f64]) -> Result<ChainPoint> {
        if tvec.len() > MAX_CHAIN_LEN {
            return Err(Error::Validation(format!(
                "chains have at most {MAX_CHAIN_LEN} stages, got {}",
                tvec.len()
            )));
        }
        if !self.inside(&z) {
            return Err(Error::DomainEscape { exit_time: 0.0 });
        }
        let mut stages = vec![z];
        for (k, &t) in tvec.iter().enumerate() {
            let n = k + 1;
            let j = if n % 2 == 1 { 1 } else { 2 };
            let prev = stages[k];
            stages.push(self.flow_v(j, eps, prev, t)?);
        }
        Ok(ChainPoint {
            z,
            tvec: tvec.to_vec(),
            eps,
            stages,
        })
    }

    /// `b_n` over the first `n` stages of a chain.
    pub fn b_n(&self, chain: &ChainPoint, n: usize) -> Result<f64> {
        b_n_from_stages(self.datum, &chain.stages[..=n])
    }
}

pub fn theta_chain(d: &TripleDatum, z: [f64; 3], eps: f64, tvec: &[f64], cfg: &FlowConfig) -> Result<ChainPoint> {
    ChainBuilder::new(d, *cfg)?.chain(z, eps, tvec)
}

fn ratio_a1_a2(d: &TripleDatum, p: [f64; 3]) -> Result<f64> {
    let x = [p[0], p[1]];
    let a1 = eval_point(&d.a[0], x)?;
    let a2 = eval_point(&d.a[1], x)?;
    for (name, v) in [("a1", a1), ("a2", a2)] {
        if v == 0.0 || !v.is_finite() {
            return Err(Error::DegenerateDenominator {
                name: name.into(),
                locus: x.to_vec(),
                value: v.abs(),
            });
        }
    }
    Ok(a1 / a2)
}

/// Alternating product: stage `k` contributes `a1/a2` for odd `k` and `a2/a1`
/// for even `k`; odd lengths carry a leading minus sign. `stages[0]` is the base point.
pub fn b_n_from_stages(d: &TripleDatum, stages: &[[f64; 3]]) -> Result<f64> {
    let n = stages.len().saturating_sub(1);
    let mut b = if n % 2 == 1 { -1.0 } else { 1.0 };
    for (k, p) in stages.iter().enumerate().skip(1) {
        let r = ratio_a1_a2(d, *p)?;
        b *= if k % 2 == 1 { r } else { 1.0 / r };
    }
    Ok(b)
}

pub fn b_n_product(d: &TripleDatum, z: [f64; 3], eps: f64, tvec: &[f64], cfg: &FlowConfig) -> Result<f64> {
    let chain = theta_chain(d, z, eps, tvec, cfg)?;
    b_n_from_stages(d, &chain.stages)
}

/// `(f(y + s) - f(y)) / s`.
pub fn diff_quotient(f: &TestFunction, y: f64, s: f64) -> Result<f64> {
    if s == 0.0 {
        return Err(Error::domain("difference quotient with s = 0"));
    }
    Ok((f.eval(y + s)? - f.eval(y)?) / s)
}

/// `F(y, r t) - F(y, t)` with `F(y, t) = diff_quotient(f, y, delta t)`.
pub fn sharp_diff(f: &TestFunction, y: f64, t: f64, r: f64, delta: f64) -> Result<f64> {
    if t == 0.0 {
        return Err(Error::domain("sharp difference with t = 0"));
    }
    Ok(diff_quotient(f, y, delta * r * t)? - diff_quotient(f, y, delta * t)?)
}

/// CSV of chain stages: `stage, x1, x2, t`.
pub fn write_chain_csv<W: Write>(chain: &ChainPoint, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["stage", "x1", "x2", "t"])?;
    for (k, p) in chain.stages.iter().enumerate() {
        w.write_record([k.to_string(), p[0].to_string(), p[1].to_string(), p[2].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{c, t, x1, x2};
    use crate::datum::Domain;

    fn curved() -> TripleDatum {
        TripleDatum::new(
            Domain::rect([0.5, 1.5], [0.5, 1.5]),
            [c(1.0) + x2() * c(0.3), c(1.0) + x1().powi(2) * c(0.25), c(1.0)],
            [x1(), x2(), x1().powi(2) + x1() * x2() + x2().powi(2)],
        )
    }

    #[test]
    fn zero_times_return_base() {
        let d = curved();
        let z = [1.0, 1.0, 0.5];
        let ch = theta_chain(&d, z, 0.0, &[0.0, 0.0, 0.0], &FlowConfig::default()).unwrap();
        assert_eq!(ch.end(), z);
        assert_eq!(ch.len(), 3);
    }

    #[test]
    fn stage_one_preserves_psi1() {
        let d = curved();
        let cfg = FlowConfig::default();
        let b = ChainBuilder::new(&d, cfg).unwrap();
        for eps in [0.0, 0.05] {
            let z = [1.0, 0.9, 0.5];
            let ch = b.chain(z, eps, &[0.2, -0.15]).unwrap();
            let before = b.psi(1).eval(eps, [z[0], z[1]], z[2], &cfg).unwrap();
            let s1 = ch.stages[1];
            let after = b.psi(1).eval(eps, [s1[0], s1[1]], s1[2], &cfg).unwrap();
            assert!((before[0] - after[0]).abs() < 1e-6 && (before[1] - after[1]).abs() < 1e-6);
            let s2 = ch.stages[2];
            let p2a = b.psi(2).eval(eps, [s1[0], s1[1]], s1[2], &cfg).unwrap();
            let p2b = b.psi(2).eval(eps, [s2[0], s2[1]], s2[2], &cfg).unwrap();
            assert!((p2a[0] - p2b[0]).abs() < 1e-6 && (p2a[1] - p2b[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn b_n_signs() {
        let mut d = curved();
        d.a = [c(2.0), c(2.0), c(1.0)];
        let cfg = FlowConfig::default();
        let tv = [0.1, -0.1, 0.05, 0.1];
        for n in 0..=4 {
            let b = b_n_product(&d, [1.0, 1.0, 0.5], 0.0, &tv[..n], &cfg).unwrap();
            assert_eq!(b, if n % 2 == 1 { -1.0 } else { 1.0 });
        }
        let d = curved();
        let z = [1.0, 1.0, 0.5];
        let r = ratio_a1_a2(&d, z).unwrap();
        assert_eq!(b_n_product(&d, z, 0.0, &[0.0], &cfg).unwrap(), -r);
        assert!((b_n_product(&d, z, 0.0, &[0.0; 4], &cfg).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quotients() {
        let id = TestFunction::expr(t()).unwrap();
        let sq = TestFunction::expr(t().powi(2)).unwrap();
        assert_eq!(diff_quotient(&id, 0.3, 0.7).unwrap(), 1.0);
        assert!((diff_quotient(&sq, 0.3, 0.5).unwrap() - 1.1).abs() < 1e-14);
        assert_eq!(sharp_diff(&sq, 0.3, 0.2, 1.0, 0.1).unwrap(), 0.0);
        assert!(diff_quotient(&id, 0.0, 0.0).is_err());
    }
}
