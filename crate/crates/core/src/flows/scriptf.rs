use std::io::Write;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chain::{b_n_from_stages, ChainBuilder};
use super::ode::{rk4, FlowConfig};
use crate::analytic::eval_point;
use crate::datum::TripleDatum;
use crate::error::Result;

/// Central-difference step for the fiber Jacobians.
const FD_STEP: f64 = 1e-5;
/// Singular values below this fraction of the largest count as zero in fiber Jacobians.
const KERNEL_RTOL: f64 = 1e-6;
/// RK4 steps for the perturbation flows in parameter space.
const PERTURB_STEPS: usize = 2;
/// Steps per chain stage; fixed so chains are smooth in their times.
pub const SCRIPT_F_STAGE_STEPS: usize = 16;

/// One evaluation of the three-square function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptFSample {
    pub tvec: [f64; 4],
    pub s: f64,
    pub s_prime: [f64; 2],
    pub level: f64,
    pub defect3: f64,
    pub defect4: f64,
    pub value: f64,
}

pub struct ScriptF<'a> {
    chains: ChainBuilder<'a>,
    zbar: [f64; 3],
}

impl<'a> ScriptF<'a> {
    pub fn new(d: &'a TripleDatum, zbar: [f64; 3]) -> Result<Self> {
        Ok(ScriptF {
            chains: ChainBuilder::new(d, FlowConfig::fixed(SCRIPT_F_STAGE_STEPS))?,
            zbar,
        })
    }

    fn datum(&self) -> &TripleDatum {
        self.chains.datum
    }

    fn stages(&self, tvec: &[f64]) -> Result<Vec<[f64; 3]>> {
        Ok(self.chains.chain(self.zbar, 0.0, tvec)?.stages)
    }

    fn b(&self, tvec: &[f64]) -> Result<f64> {
        b_n_from_stages(self.datum(), &self.stages(tvec)?)
    }

    /// `psi_j^0` at the end of the chain with times `tvec`.
    fn fiber(&self, j: usize, tvec: &[f64]) -> Result<[f64; 2]> {
        let p = *self.stages(tvec)?.last().expect("nonempty");
        self.chains.psi(j).eval(0.0, [p[0], p[1]], p[2], &self.chains.cfg)
    }

    fn fiber_jacobian<const N: usize>(&self, j: usize, tvec: [f64; N]) -> Result<[[f64; N]; 2]> {
        let mut jac = [[0.0; N]; 2];
        for c in 0..N {
            let mut plus = tvec;
            let mut minus = tvec;
            plus[c] += FD_STEP;
            minus[c] -= FD_STEP;
            let fp = self.fiber(j, &plus)?;
            let fm = self.fiber(j, &minus)?;
            for r in 0..2 {
                jac[r][c] = (fp[r] - fm[r]) / (2.0 * FD_STEP);
            }
        }
        Ok(jac)
    }

    /// Projection of `e1` onto the fiber of `t' -> psi_2^0(Theta_3(t'))`.
    fn u3(&self, tp: [f64; 3]) -> Result<[f64; 3]> {
        let j = self.fiber_jacobian(2, tp)?;
        Ok(kernel_projection(&j, [1.0, 0.0, 0.0]))
    }

    /// Projection of `v` onto the fiber of `t -> psi_1^0(Theta_4(t))`.
    fn u4(&self, t: [f64; 4], v: [f64; 4]) -> Result<[f64; 4]> {
        let j = self.fiber_jacobian(1, t)?;
        Ok(kernel_projection(&j, v))
    }

    pub fn eval(&self, tvec: [f64; 4], s: f64, s_prime: [f64; 2]) -> Result<ScriptFSample> {
        let stages = self.stages(&tvec)?;
        let d = self.datum();
        let b4 = b_n_from_stages(d, &stages)?;
        let b3 = b_n_from_stages(d, &stages[..4])?;
        let x4 = [stages[4][0], stages[4][1]];
        let level = eval_point(&d.a[0], x4)? * b4 + eval_point(&d.a[1], x4)? * b3;

        let tp = [tvec[0], tvec[1], tvec[2]];
        let defect3 = if s == 0.0 {
            0.0
        } else {
            let moved = rk4(|q| self.u3(*q), tp, s, PERTURB_STEPS, |_| true)?;
            self.b(&moved)? - b3
        };
        let defect4 = if s_prime == [0.0, 0.0] {
            0.0
        } else {
            let v = [s_prime[0], s_prime[1], 0.0, 0.0];
            let moved = rk4(|q| self.u4(*q, v), tvec, 1.0, PERTURB_STEPS, |_| true)?;
            self.b(&moved)? - b4
        };
        Ok(ScriptFSample {
            tvec,
            s,
            s_prime,
            level,
            defect3,
            defect4,
            value: level * level + defect3 * defect3 + defect4 * defect4,
        })
    }
}

/// `(I - J^+ J) v`: the part of `v` in the kernel of `J`, at the numerical rank of `J`.
fn kernel_projection<const N: usize>(j: &[[f64; N]; 2], v: [f64; N]) -> [f64; N] {
    let m = DMatrix::from_fn(2, N, |r, c| j[r][c]);
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let smax = svd.singular_values.max();
    let mut out = v;
    for (k, &sv) in svd.singular_values.iter().enumerate() {
        if smax > 0.0 && sv > KERNEL_RTOL * smax {
            let row = vt.row(k);
            let dot: f64 = (0..N).map(|c| row[c] * v[c]).sum();
            for c in 0..N {
                out[c] -= dot * row[c];
            }
        }
    }
    out
}

pub fn script_f(d: &TripleDatum, zbar: [f64; 3], tvec: [f64; 4], s: f64, s_prime: [f64; 2]) -> Result<ScriptFSample> {
    ScriptF::new(d, zbar)?.eval(tvec, s, s_prime)
}

/// Sampling box for parameter clouds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CloudSpec {
    pub samples: usize,
    pub seed: u64,
    pub t_max: f64,
    pub s_max: f64,
}

impl Default for CloudSpec {
    fn default() -> Self {
        CloudSpec {
            samples: 1000,
            seed: 0,
            t_max: 0.1,
            s_max: 0.05,
        }
    }
}

/// Evaluate on a seeded cloud of `(t, s, s')`; draws are made up front so the
/// result does not depend on the worker count.
pub fn sample_script_f(d: &TripleDatum, zbar: [f64; 3], spec: &CloudSpec) -> Result<Vec<ScriptFSample>> {
    let f = ScriptF::new(d, zbar)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let draws: Vec<([f64; 4], f64, [f64; 2])> = (0..spec.samples)
        .map(|_| {
            let mut u = |m: f64| rng.gen_range(-m..=m);
            let t = [u(spec.t_max), u(spec.t_max), u(spec.t_max), u(spec.t_max)];
            let s = u(spec.s_max);
            let sp = [u(spec.s_max), u(spec.s_max)];
            (t, s, sp)
        })
        .collect();
    draws
        .par_iter()
        .map(|&(t, s, sp)| f.eval(t, s, sp))
        .collect()
}

/// CSV of samples: `t1..t4, s, s1', s2', value`.
pub fn write_script_f_csv<W: Write>(samples: &[ScriptFSample], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t1", "t2", "t3", "t4", "s", "s1p", "s2p", "value"])?;
    for r in samples {
        let mut rec: Vec<String> = r.tvec.iter().map(|v| v.to_string()).collect();
        rec.push(r.s.to_string());
        rec.extend(r.s_prime.iter().map(|v| v.to_string()));
        rec.push(r.value.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
