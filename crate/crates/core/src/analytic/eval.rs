use super::expr::{AnalyticExpr, Axis, Expr};
use super::jet::{Jet1, Jet2};
use super::scalar::{Elementary, Scalar};
use crate::error::{Error, Result};

/// Headroom for nested derivative nodes; each `Partial`/`Dir` level raises
/// the working order by one.
pub const DEFAULT_MAX_ORDER: usize = 48;

/// How each axis enters a jet: as one of the two jet variables or pinned to a value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slot {
    Jet(usize),
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub x1: Slot,
    pub x2: Slot,
    pub t: Slot,
}

impl Frame {
    /// Jets in `(x1, x2)` with the auxiliary variable pinned.
    pub fn planar(t: f64) -> Self {
        Frame {
            x1: Slot::Jet(0),
            x2: Slot::Jet(1),
            t: Slot::Fixed(t),
        }
    }

    /// Univariate jets in `t` (carried by jet variable 0).
    pub fn in_t() -> Self {
        Frame {
            x1: Slot::Fixed(0.0),
            x2: Slot::Fixed(0.0),
            t: Slot::Jet(0),
        }
    }

    fn slot(&self, axis: Axis) -> Slot {
        match axis {
            Axis::X1 => self.x1,
            Axis::X2 => self.x2,
            Axis::T => self.t,
        }
    }
}

struct JetEval<'a> {
    frame: &'a Frame,
    center: [f64; 2],
    max_order: usize,
}

impl JetEval<'_> {
    fn jet<S: Scalar>(&self, e: &Expr, order: usize) -> Result<Jet2<S>> {
        if order > self.max_order {
            return Err(Error::Order(format!(
                "derivative nesting needs order {order}, headroom is {}",
                self.max_order
            )));
        }
        let c = self.center;
        Ok(match e {
            Expr::Var(axis) => match self.frame.slot(*axis) {
                Slot::Jet(i) => Jet2::variable(c, order, i, S::from_f64(c[i])?),
                Slot::Fixed(v) => Jet2::constant(c, order, S::from_f64(v)?),
            },
            Expr::Const(v) => Jet2::constant(c, order, S::from_f64(*v)?),
            Expr::Add(args) => {
                let mut acc = Jet2::constant(c, order, S::zero());
                for (k, a) in args.iter().enumerate() {
                    let j = self.jet(a, order).map_err(|e| e.within(&format!("add[{k}]")))?;
                    acc = acc.add(&j)?;
                }
                acc
            }
            Expr::Mul(args) => {
                let mut acc = Jet2::constant(c, order, S::one());
                for (k, a) in args.iter().enumerate() {
                    let j = self.jet(a, order).map_err(|e| e.within(&format!("mul[{k}]")))?;
                    acc = acc.mul(&j)?;
                }
                acc
            }
            Expr::Neg(a) => self.jet::<S>(a, order).map_err(|e| e.within("neg"))?.neg(),
            Expr::Div(a, b) => {
                let num = self.jet::<S>(a, order).map_err(|e| e.within("div.num"))?;
                let den = self.jet::<S>(b, order).map_err(|e| e.within("div.den"))?;
                if den.value().is_zero() {
                    return Err(Error::domain("division by zero").within("div"));
                }
                num.div(&den)?
            }
            Expr::PowInt(a, k) => self.jet::<S>(a, order).map_err(|e| e.within("powi"))?.powi(*k),
            Expr::Exp(a) => self.elementary(Elementary::Exp, a, order)?,
            Expr::Log(a) => self.elementary(Elementary::Log, a, order)?,
            Expr::Sin(a) => self.elementary(Elementary::Sin, a, order)?,
            Expr::Cos(a) => self.elementary(Elementary::Cos, a, order)?,
            Expr::Partial(axis, a) => {
                let seg = format!("partial_{axis}");
                self.derivative_along(*axis, a, order)
                    .map_err(|e| e.within(&seg))?
            }
            Expr::Dir(w, a) => {
                let w1 = self.jet::<S>(&w[0], order).map_err(|e| e.within("dir.field[0]"))?;
                let w2 = self.jet::<S>(&w[1], order).map_err(|e| e.within("dir.field[1]"))?;
                let d1 = self.derivative_along(Axis::X1, a, order).map_err(|e| e.within("dir"))?;
                let d2 = self.derivative_along(Axis::X2, a, order).map_err(|e| e.within("dir"))?;
                w1.mul(&d1)?.add(&w2.mul(&d2)?)?
            }
        })
    }

    fn elementary<S: Scalar>(&self, func: Elementary, arg: &Expr, order: usize) -> Result<Jet2<S>> {
        let inner = self.jet::<S>(arg, order).map_err(|e| e.within(func.name()))?;
        let outer = S::elementary(func, inner.value(), order).map_err(|e| e.within(func.name()))?;
        let out = inner.compose_coeffs(&outer);
        if !out.value().to_f64().is_finite() {
            return Err(Error::domain("non-finite value").within(func.name()));
        }
        Ok(out)
    }

    fn derivative_along<S: Scalar>(&self, axis: Axis, e: &Expr, order: usize) -> Result<Jet2<S>> {
        match self.frame.slot(axis) {
            Slot::Jet(i) => self.jet::<S>(e, order + 1)?.differentiate(i),
            Slot::Fixed(_) => {
                if e.free_axes().contains(&axis) {
                    Err(Error::Order(format!(
                        "derivative along `{axis}`, which this jet frame pins to a constant"
                    )))
                } else {
                    Ok(Jet2::constant(self.center, order, S::zero()))
                }
            }
        }
    }
}

/// Jet of `e` of the given order at `center` under an explicit frame.
pub fn eval_jet_in<S: Scalar>(
    e: &Expr,
    frame: &Frame,
    center: [f64; 2],
    order: usize,
    max_order: usize,
) -> Result<Jet2<S>> {
    JetEval {
        frame,
        center,
        max_order,
    }
    .jet(e, order)
}

/// Order-`order` jet of `e` in `(x1, x2)` at `center` (with `t = 0`).
pub fn eval_jet(e: &AnalyticExpr, center: [f64; 2], order: usize) -> Result<Jet2> {
    eval_jet_in(e, &Frame::planar(0.0), center, order, order + DEFAULT_MAX_ORDER)
}

/// Exact jet over the rationals; transcendental nodes are rejected.
pub fn eval_jet_exact(
    e: &AnalyticExpr,
    center: [f64; 2],
    order: usize,
) -> Result<Jet2<num::BigRational>> {
    eval_jet_in(e, &Frame::planar(0.0), center, order, order + DEFAULT_MAX_ORDER)
}

/// Univariate jet of an expression in `t`.
pub fn eval_jet_t(e: &AnalyticExpr, t0: f64, order: usize) -> Result<Jet1> {
    let j: Jet2 = eval_jet_in(e, &Frame::in_t(), [t0, 0.0], order, order + DEFAULT_MAX_ORDER)?;
    let coeffs = (0..=order).map(|k| *j.coeff(k, 0).expect("within order")).collect();
    Ok(Jet1::new(t0, coeffs))
}

/// Evaluate at `(x1, x2, t)`.
pub fn eval3(e: &AnalyticExpr, p: [f64; 3]) -> Result<f64> {
    match e {
        Expr::Var(Axis::X1) => Ok(p[0]),
        Expr::Var(Axis::X2) => Ok(p[1]),
        Expr::Var(Axis::T) => Ok(p[2]),
        Expr::Const(v) => Ok(*v),
        Expr::Add(args) => {
            let mut acc = 0.0;
            for (k, a) in args.iter().enumerate() {
                acc += eval3(a, p).map_err(|e| e.within(&format!("add[{k}]")))?;
            }
            Ok(acc)
        }
        Expr::Mul(args) => {
            let mut acc = 1.0;
            for (k, a) in args.iter().enumerate() {
                acc *= eval3(a, p).map_err(|e| e.within(&format!("mul[{k}]")))?;
            }
            Ok(acc)
        }
        Expr::Neg(a) => Ok(-eval3(a, p).map_err(|e| e.within("neg"))?),
        Expr::Div(a, b) => {
            let num = eval3(a, p).map_err(|e| e.within("div.num"))?;
            let den = eval3(b, p).map_err(|e| e.within("div.den"))?;
            if den == 0.0 {
                return Err(Error::domain("division by zero").within("div"));
            }
            Ok(num / den)
        }
        Expr::PowInt(a, k) => Ok(powi(eval3(a, p).map_err(|e| e.within("powi"))?, *k)),
        Expr::Exp(a) => finite(eval3(a, p).map_err(|e| e.within("exp"))?.exp(), "exp"),
        Expr::Log(a) => {
            let v = eval3(a, p).map_err(|e| e.within("log"))?;
            if v <= 0.0 {
                return Err(Error::domain(format!("log of nonpositive value {v}")).within("log"));
            }
            Ok(v.ln())
        }
        Expr::Sin(a) => Ok(eval3(a, p).map_err(|e| e.within("sin"))?.sin()),
        Expr::Cos(a) => Ok(eval3(a, p).map_err(|e| e.within("cos"))?.cos()),
        Expr::Partial(..) | Expr::Dir(..) => {
            let j: Jet2 = eval_jet_in(e, &Frame::planar(p[2]), [p[0], p[1]], 0, DEFAULT_MAX_ORDER)?;
            Ok(*j.value())
        }
    }
}

/// Square-and-multiply in the same order as `Jet2::powi`.
fn powi(mut base: f64, mut k: u32) -> f64 {
    let mut r = 1.0;
    while k > 0 {
        if k & 1 == 1 {
            r *= base;
        }
        k >>= 1;
        if k > 0 {
            base *= base;
        }
    }
    r
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::domain("non-finite value").within(what))
    }
}

/// Evaluate at a planar point; `t` is bound to 0.
pub fn eval_point(e: &AnalyticExpr, x: [f64; 2]) -> Result<f64> {
    eval3(e, [x[0], x[1], 0.0])
}

/// Evaluate an expression in `t` alone.
pub fn eval_t(e: &AnalyticExpr, t: f64) -> Result<f64> {
    eval3(e, [0.0, 0.0, t])
}

/// Value and gradient at a planar point.
pub fn value_grad(e: &AnalyticExpr, x: [f64; 2]) -> Result<(f64, [f64; 2])> {
    let j = eval_jet(e, x, 1)?;
    Ok((*j.value(), [*j.coeff(1, 0).unwrap(), *j.coeff(0, 1).unwrap()]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::expr::{c, t, x1, x2};

    #[test]
    fn point_examples() {
        let e = x1() + x2().powi(2);
        assert_eq!(eval_point(&e, [1.0, 2.0]).unwrap(), 5.0);
        assert_eq!(eval_point(&c(0.0).exp(), [0.3, 0.1]).unwrap(), 1.0);
    }

    #[test]
    fn partial_node_matches_finite_differences() {
        let e = (x1() * x2()).partial(Axis::X1);
        let v = eval_point(&e, [3.0, 4.0]).unwrap();
        // central differences on the undifferentiated product over an h-sweep
        let f = |a: f64| a * 4.0;
        for h in [1e-2, 1e-3, 1e-4] {
            let fd = (f(3.0 + h) - f(3.0 - h)) / (2.0 * h);
            assert!((fd - v).abs() < 1e-9);
        }
        assert_eq!(v, 4.0);
    }

    #[test]
    fn jet_examples() {
        let j = eval_jet(&x1().powi(2), [0.0, 0.0], 2).unwrap();
        assert_eq!(j.coeffs(), &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let j = eval_jet(&x1().exp(), [0.0, 0.0], 3).unwrap();
        let along: Vec<f64> = (0..=3).map(|k| *j.coeff(k, 0).unwrap()).collect();
        assert_eq!(along, vec![1.0, 1.0, 0.5, 1.0 / 6.0]);
        let j = eval_jet(&(x1() + x2()).exp(), [0.0, 0.0], 3).unwrap();
        assert!((j.partial(2, 1).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn domain_errors_carry_paths() {
        let e = c(1.0) + (x1() - c(1.0)).ln();
        match eval_point(&e, [1.0, 0.0]) {
            Err(Error::Domain { path, .. }) => assert_eq!(path, "add[1]/log"),
            other => panic!("unexpected {other:?}"),
        }
        let e = c(1.0) / x2();
        assert!(matches!(eval_jet(&e, [1.0, 0.0], 2), Err(Error::Domain { .. })));
    }

    #[test]
    fn order_headroom_is_enforced() {
        let mut e = x1().powi(3);
        for _ in 0..5 {
            e = e.partial(Axis::X1);
        }
        let r: Result<Jet2> = eval_jet_in(&e, &Frame::planar(0.0), [0.0, 0.0], 2, 4);
        assert!(matches!(r, Err(Error::Order(_))));
    }

    #[test]
    fn univariate_jets() {
        let e = t().sin();
        let j = eval_jet_t(&e, 0.0, 3).unwrap();
        assert!((j.derivative(1).unwrap() - 1.0).abs() < 1e-15);
        assert!((j.derivative(3).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn dir_combines_partials() {
        let w1 = x2();
        let w2 = x1().exp();
        let e = (x1() * x2().powi(2)).sin();
        let d = e.clone().dir(w1.clone(), w2.clone());
        let p = [0.4, -0.3];
        let (_, g) = value_grad(&e, p).unwrap();
        let expect = eval_point(&w1, p).unwrap() * g[0] + eval_point(&w2, p).unwrap() * g[1];
        assert!((eval_point(&d, p).unwrap() - expect).abs() < 1e-14);
    }
}
