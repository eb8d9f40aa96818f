use super::ode::{rk4, FlowConfig};
use crate::analytic::{eval_point, value_grad, Expr};
use crate::datum::{TripleDatum, VectorField};
use crate::error::{Error, Result};

/// Cached pieces of `psi_j^eps(x, t) = (phi_j(x), [phi_j(e^{eps t W3} x) - phi_j(x)] / eps)`.
#[derive(Debug, Clone)]
pub struct Psi<'a> {
    pub datum: &'a TripleDatum,
    pub j: usize,
    pub w3: VectorField,
    w3_phi: Expr,
    /// Field used to orient the annihilator: `-W1` for `j = 1`, `W2` for `j = 2`.
    orient: VectorField,
}

impl<'a> Psi<'a> {
    pub fn new(datum: &'a TripleDatum, j: usize) -> Result<Self> {
        if !(j == 1 || j == 2) {
            return Err(Error::Validation(format!("psi is defined for j = 1, 2; got {j}")));
        }
        let w3 = datum.annihilating_field(3);
        let w3_phi = w3.apply(datum.phi[j - 1].clone());
        let wj = datum.annihilating_field(j);
        let orient = if j == 1 {
            VectorField::planar(-wj.components[0].clone(), -wj.components[1].clone())
        } else {
            wj
        };
        Ok(Psi {
            datum,
            j,
            w3,
            w3_phi,
            orient,
        })
    }

    fn phi(&self) -> &Expr {
        &self.datum.phi[self.j - 1]
    }

    fn inside(&self, y: [f64; 2]) -> bool {
        self.datum.domain.in_margin(y)
    }

    pub fn eval(&self, eps: f64, x: [f64; 2], t: f64, cfg: &FlowConfig) -> Result<[f64; 2]> {
        let p = eval_point(self.phi(), x)?;
        if eps == 0.0 {
            return Ok([p, t * eval_point(&self.w3_phi, x)?]);
        }
        let s = eps * t;
        let y = rk4(|y| self.w3.eval_planar(*y), x, s, cfg.steps_for(s), |y| self.inside(*y))?;
        Ok([p, (eval_point(self.phi(), y)? - p) / eps])
    }

    fn dw3(&self, y: [f64; 2]) -> Result<[[f64; 2]; 2]> {
        let g0 = value_grad(&self.w3.components[0], y)?.1;
        let g1 = value_grad(&self.w3.components[1], y)?.1;
        Ok([g0, g1])
    }

    /// Rows of the `2 x 3` Jacobian of `(x, t) -> psi_j^eps(x, t)`.
    pub fn jacobian(&self, eps: f64, p: [f64; 3], cfg: &FlowConfig) -> Result<[[f64; 3]; 2]> {
        let x = [p[0], p[1]];
        let t = p[2];
        let (_, gx) = value_grad(self.phi(), x)?;
        let row1 = [gx[0], gx[1], 0.0];
        if eps == 0.0 {
            let (b, gb) = value_grad(&self.w3_phi, x)?;
            return Ok([row1, [t * gb[0], t * gb[1], b]]);
        }
        let s = eps * t;
        // state: y, then the variational matrix Y = dy/dx row-major
        let state = rk4(
            |st| {
                let y = [st[0], st[1]];
                let w = self.w3.eval_planar(y)?;
                let dw = self.dw3(y)?;
                let m = [[st[2], st[3]], [st[4], st[5]]];
                let mut out = [w[0], w[1], 0.0, 0.0, 0.0, 0.0];
                for r in 0..2 {
                    for c in 0..2 {
                        out[2 + 2 * r + c] = dw[r][0] * m[0][c] + dw[r][1] * m[1][c];
                    }
                }
                Ok(out)
            },
            [x[0], x[1], 1.0, 0.0, 0.0, 1.0],
            s,
            cfg.steps_for(s),
            |st| self.inside([st[0], st[1]]),
        )?;
        let y = [state[0], state[1]];
        let (_, gy) = value_grad(self.phi(), y)?;
        let w = self.w3.eval_planar(y)?;
        let m = [[state[2], state[3]], [state[4], state[5]]];
        let gy_m = [
            gy[0] * m[0][0] + gy[1] * m[1][0],
            gy[0] * m[0][1] + gy[1] * m[1][1],
        ];
        Ok([
            row1,
            [
                (gy_m[0] - gx[0]) / eps,
                (gy_m[1] - gx[1]) / eps,
                gy[0] * w[0] + gy[1] * w[1],
            ],
        ])
    }

    /// Unit vector `V_j^eps(p)` spanning the kernel of the Jacobian.
    pub fn annihilator(&self, eps: f64, p: [f64; 3], cfg: &FlowConfig) -> Result<[f64; 3]> {
        let [r1, r2] = self.jacobian(eps, p, cfg)?;
        let v = cross(r1, r2);
        let n = norm3(v);
        if !(n > 1e-12 * norm3(r1) * norm3(r2)) {
            return Err(Error::RankDeficient(p.to_vec()));
        }
        let o = self.orient.eval_planar([p[0], p[1]])?;
        let sign = if v[0] * o[0] + v[1] * o[1] < 0.0 { -1.0 } else { 1.0 };
        Ok([sign * v[0] / n, sign * v[1] / n, sign * v[2] / n])
    }
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn psi_map(d: &TripleDatum, j: usize, eps: f64, x: [f64; 2], t: f64, cfg: &FlowConfig) -> Result<[f64; 2]> {
    Psi::new(d, j)?.eval(eps, x, t, cfg)
}

pub fn annihilator_of_psi(d: &TripleDatum, j: usize, eps: f64, p: [f64; 3], cfg: &FlowConfig) -> Result<[f64; 3]> {
    Psi::new(d, j)?.annihilator(eps, p, cfg)
}

/// `V_j = d_{x_i} - (k_ii / k_i) t d_t` in adapted coordinates (`{i, j} = {1, 2}`, `k = phi3`),
/// normalized to unit length.
pub fn closed_form_v(d: &TripleDatum, j: usize, p: [f64; 3]) -> Result<[f64; 3]> {
    if !d.is_adapted() {
        return Err(Error::NotAdapted);
    }
    let jet = crate::analytic::eval_jet(&d.phi[2], [p[0], p[1]], 2)?;
    let i = if j == 1 { 2 } else { 1 };
    let (ki, kii) = if i == 1 {
        (jet.partial(1, 0)?, jet.partial(2, 0)?)
    } else {
        (jet.partial(0, 1)?, jet.partial(0, 2)?)
    };
    if ki == 0.0 {
        return Err(Error::RankDeficient(p.to_vec()));
    }
    let mut v = [0.0; 3];
    v[i - 1] = 1.0;
    v[2] = -kii / ki * p[2];
    let n = norm3(v);
    Ok([v[0] / n, v[1] / n, v[2] / n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{c, x1, x2};
    use crate::datum::Domain;

    fn curved() -> TripleDatum {
        TripleDatum::new(
            Domain::rect([0.5, 1.5], [0.5, 1.5]),
            [c(1.0), c(1.0) + x1().powi(2) * c(0.25), c(1.0)],
            [x1(), x2(), x1().powi(2) + x1() * x2() + x2().powi(2)],
        )
    }

    #[test]
    fn psi_examples() {
        let d = TripleDatum::new(Domain::rect([0.0, 1.0], [0.0, 1.0]), [c(1.0), c(1.0), c(1.0)], [x2(), x2(), x1()]);
        let cfg = FlowConfig::default();
        assert_eq!(psi_map(&d, 2, 0.0, [0.3, 0.6], 0.25, &cfg).unwrap(), [0.6, -0.25]);
        let d = curved();
        for eps in [0.0, 0.1, -0.05] {
            assert_eq!(psi_map(&d, 1, eps, [0.7, 0.9], 0.0, &cfg).unwrap(), [0.7, 0.0]);
        }
    }

    #[test]
    fn annihilator_matches_closed_form_and_kills_psi() {
        let d = curved();
        let cfg = FlowConfig::default();
        for j in [1, 2] {
            let p = [0.8, 1.1, 0.4];
            let v = annihilator_of_psi(&d, j, 0.0, p, &cfg).unwrap();
            let cf = closed_form_v(&d, j, p).unwrap();
            for k in 0..3 {
                assert!((v[k] - cf[k]).abs() < 1e-12);
            }
            for eps in [0.0, 0.05] {
                let v = annihilator_of_psi(&d, j, eps, p, &cfg).unwrap();
                let h = 1e-6;
                let plus = psi_map(&d, j, eps, [p[0] + h * v[0], p[1] + h * v[1]], p[2] + h * v[2], &cfg).unwrap();
                let minus = psi_map(&d, j, eps, [p[0] - h * v[0], p[1] - h * v[1]], p[2] - h * v[2], &cfg).unwrap();
                for k in 0..2 {
                    assert!(((plus[k] - minus[k]) / (2.0 * h)).abs() < 1e-8, "j={j} eps={eps}");
                }
            }
        }
    }

    #[test]
    fn linear_phi3_gives_coordinate_field() {
        let d = TripleDatum::new(Domain::rect([0.0, 1.0], [0.0, 1.0]), [c(1.0), c(1.0), c(1.0)], [x1(), x2(), x1() + x2()]);
        let v = annihilator_of_psi(&d, 1, 0.0, [0.5, 0.5, 0.5], &FlowConfig::default()).unwrap();
        assert_eq!(v, [0.0, 1.0, 0.0]);
        let v = annihilator_of_psi(&d, 2, 0.0, [0.5, 0.5, 0.5], &FlowConfig::default()).unwrap();
        assert_eq!(v, [1.0, 0.0, 0.0]);
    }
}
