use serde::{Deserialize, Serialize};

use crate::datum::{Domain, VectorField};
use crate::error::{Error, Result};

pub const DEFAULT_STEPS_PER_UNIT: usize = 64;
pub const MIN_STEPS_PER_UNIT: usize = 8;

/// RK4 integration settings. Trajectories that leave the region abort.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub steps_per_unit: usize,
    /// When set, every flow uses exactly this many steps regardless of its length,
    /// which keeps the result smooth in the flow time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_steps: Option<usize>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            steps_per_unit: DEFAULT_STEPS_PER_UNIT,
            fixed_steps: None,
        }
    }
}

impl FlowConfig {
    pub fn fixed(steps: usize) -> Self {
        FlowConfig {
            fixed_steps: Some(steps),
            ..FlowConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps_per_unit < MIN_STEPS_PER_UNIT {
            return Err(Error::Validation(format!(
                "steps per unit must be at least {MIN_STEPS_PER_UNIT}, got {}",
                self.steps_per_unit
            )));
        }
        if self.fixed_steps == Some(0) {
            return Err(Error::Validation("fixed step count must be positive".into()));
        }
        Ok(())
    }

    pub fn steps_for(&self, t: f64) -> usize {
        self.fixed_steps
            .unwrap_or_else(|| ((self.steps_per_unit as f64 * t.abs()).ceil() as usize).max(1))
    }
}

/// Classic RK4 over `[0, t]` in `steps` equal steps. After each step the
/// state must satisfy `inside`; otherwise the exit time is reported.
pub fn rk4<const N: usize>(
    rhs: impl Fn(&[f64; N]) -> Result<[f64; N]>,
    x0: [f64; N],
    t: f64,
    steps: usize,
    inside: impl Fn(&[f64; N]) -> bool,
) -> Result<[f64; N]> {
    if t == 0.0 {
        return Ok(x0);
    }
    let h = t / steps as f64;
    let axpy = |x: &[f64; N], a: f64, k: &[f64; N]| {
        let mut out = *x;
        for i in 0..N {
            out[i] += a * k[i];
        }
        out
    };
    let mut x = x0;
    for step in 0..steps {
        let k1 = rhs(&x)?;
        let k2 = rhs(&axpy(&x, h / 2.0, &k1))?;
        let k3 = rhs(&axpy(&x, h / 2.0, &k2))?;
        let k4 = rhs(&axpy(&x, h, &k3))?;
        for i in 0..N {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !inside(&x) || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::DomainEscape {
                exit_time: h * (step + 1) as f64,
            });
        }
    }
    Ok(x)
}

/// `e^{tW} x0` for a planar field, confined to the margin box of `domain`.
pub fn flow(w: &VectorField, x0: [f64; 2], t: f64, cfg: &FlowConfig, domain: &Domain) -> Result<[f64; 2]> {
    flow_steps(w, x0, t, cfg.steps_for(t), domain)
}

/// As [`flow`] with an explicit total step count.
pub fn flow_steps(w: &VectorField, x0: [f64; 2], t: f64, steps: usize, domain: &Domain) -> Result<[f64; 2]> {
    if w.dim() != 2 {
        return Err(Error::Validation("planar flow needs a two-component field".into()));
    }
    rk4(
        |x| w.eval_planar(*x),
        x0,
        t,
        steps.max(1),
        |x| domain.in_margin(*x),
    )
}
