use super::expr::{AnalyticExpr, Axis, Expr};
use super::json::serialize_expr;

/// Canonical form: constants folded, sums and products flattened and
/// sorted, identities removed. Value-preserving wherever the input is defined.
pub fn simplify(e: &AnalyticExpr) -> AnalyticExpr {
    match e {
        Expr::Var(_) | Expr::Const(_) => e.clone(),
        Expr::Add(args) => {
            let mut terms = Vec::new();
            let mut k = 0.0;
            for a in args {
                match simplify(a) {
                    Expr::Const(v) => k += v,
                    Expr::Add(inner) => {
                        for t in inner {
                            match t {
                                Expr::Const(v) => k += v,
                                t => terms.push(t),
                            }
                        }
                    }
                    t => terms.push(t),
                }
            }
            if k != 0.0 || terms.is_empty() {
                terms.push(Expr::Const(k));
            }
            finish(terms, Expr::Add)
        }
        Expr::Mul(args) => {
            let mut factors = Vec::new();
            let mut k = 1.0;
            for a in args {
                match simplify(a) {
                    Expr::Const(v) => k *= v,
                    Expr::Neg(inner) => {
                        k = -k;
                        push_factor(&mut factors, &mut k, *inner);
                    }
                    f => push_factor(&mut factors, &mut k, f),
                }
            }
            if k == 0.0 {
                return Expr::Const(0.0);
            }
            if factors.is_empty() {
                return Expr::Const(k);
            }
            if k == -1.0 {
                return Expr::Neg(Box::new(finish(factors, Expr::Mul)));
            }
            if k != 1.0 {
                factors.push(Expr::Const(k));
            }
            finish(factors, Expr::Mul)
        }
        Expr::Neg(a) => match simplify(a) {
            Expr::Const(v) => Expr::Const(-v),
            Expr::Neg(inner) => *inner,
            s => Expr::Neg(Box::new(s)),
        },
        Expr::Div(a, b) => {
            let (a, b) = (simplify(a), simplify(b));
            match (&a, &b) {
                (Expr::Const(x), Expr::Const(y)) if *y != 0.0 => Expr::Const(x / y),
                (Expr::Const(x), _) if *x == 0.0 => Expr::Const(0.0),
                (_, Expr::Const(y)) if *y == 1.0 => a,
                _ => Expr::Div(Box::new(a), Box::new(b)),
            }
        }
        Expr::PowInt(a, k) => match (simplify(a), *k) {
            (_, 0) => Expr::Const(1.0),
            (s, 1) => s,
            (Expr::Const(v), k) => Expr::Const(v.powi(k as i32)),
            (Expr::PowInt(inner, j), k) => Expr::PowInt(inner, j * k),
            (s, k) => Expr::PowInt(Box::new(s), k),
        },
        Expr::Exp(a) => unary(simplify(a), f64::exp, Expr::Exp),
        Expr::Log(a) => match simplify(a) {
            Expr::Const(v) if v > 0.0 => Expr::Const(v.ln()),
            Expr::Exp(inner) => *inner,
            s => Expr::Log(Box::new(s)),
        },
        Expr::Sin(a) => unary(simplify(a), f64::sin, Expr::Sin),
        Expr::Cos(a) => unary(simplify(a), f64::cos, Expr::Cos),
        Expr::Partial(axis, a) => {
            let s = simplify(a);
            if !s.free_axes().contains(axis) {
                Expr::Const(0.0)
            } else {
                Expr::Partial(*axis, Box::new(s))
            }
        }
        Expr::Dir(w, a) => {
            let s = simplify(a);
            let (w1, w2) = (simplify(&w[0]), simplify(&w[1]));
            let zero = |e: &Expr| e.as_const() == Some(0.0);
            if (zero(&w1) && zero(&w2)) || s.is_const() {
                Expr::Const(0.0)
            } else {
                Expr::Dir(Box::new([w1, w2]), Box::new(s))
            }
        }
    }
}

/// Partial derivative with symbolic rules for the elementary nodes; nested
/// derivative nodes are left as `Partial` for the jet evaluator.
pub fn derivative(e: &AnalyticExpr, axis: Axis) -> AnalyticExpr {
    simplify(&diff(e, axis))
}

fn diff(e: &Expr, axis: Axis) -> Expr {
    if !e.free_axes().contains(&axis) {
        return Expr::Const(0.0);
    }
    let d = |a: &Expr| diff(a, axis);
    match e {
        Expr::Var(a) => Expr::Const(if *a == axis { 1.0 } else { 0.0 }),
        Expr::Const(_) => Expr::Const(0.0),
        Expr::Add(v) => Expr::Add(v.iter().map(d).collect()),
        Expr::Mul(v) => Expr::Add(
            (0..v.len())
                .map(|i| {
                    let mut f = v.clone();
                    f[i] = d(&v[i]);
                    Expr::Mul(f)
                })
                .collect(),
        ),
        Expr::Neg(a) => -d(a),
        Expr::Div(a, b) => {
            let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
            (d(&a) * b.clone() - a * d(&b)) / b.powi(2)
        }
        Expr::PowInt(a, k) => {
            Expr::Const(*k as f64) * Expr::PowInt(a.clone(), k - 1) * d(a)
        }
        Expr::Exp(a) => e.clone() * d(a),
        Expr::Log(a) => d(a) / a.as_ref().clone(),
        Expr::Sin(a) => a.as_ref().clone().cos() * d(a),
        Expr::Cos(a) => -(a.as_ref().clone().sin() * d(a)),
        Expr::Partial(..) | Expr::Dir(..) => Expr::Partial(axis, Box::new(e.clone())),
    }
}

fn push_factor(factors: &mut Vec<Expr>, k: &mut f64, f: Expr) {
    match f {
        Expr::Const(v) => *k *= v,
        Expr::Mul(inner) => {
            for g in inner {
                push_factor(factors, k, g);
            }
        }
        f => factors.push(f),
    }
}

fn unary(s: Expr, f: fn(f64) -> f64, wrap: fn(Box<Expr>) -> Expr) -> Expr {
    match s {
        Expr::Const(v) => Expr::Const(f(v)),
        s => wrap(Box::new(s)),
    }
}

fn finish(mut items: Vec<Expr>, wrap: fn(Vec<Expr>) -> Expr) -> Expr {
    if items.len() == 1 {
        return items.pop().expect("one item");
    }
    let mut keyed: Vec<(String, Expr)> = items.into_iter().map(|e| (serialize_expr(&e), e)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    wrap(keyed.into_iter().map(|(_, e)| e).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::eval::eval_point;
    use crate::analytic::eval::value_grad;
    use crate::analytic::expr::{c, x1, x2};

    #[test]
    fn folds_and_flattens() {
        let e = (x1() + c(0.0)) * c(1.0) + (c(2.0) + c(3.0));
        let s = simplify(&e);
        assert_eq!(eval_point(&s, [0.5, 0.0]).unwrap(), 5.5);
        assert_eq!(s.size(), 3);
        assert_eq!(simplify(&(x2() * c(0.0))), c(0.0));
        assert_eq!(simplify(&x1().partial(Axis::X2)), c(0.0));
    }

    #[test]
    fn ordering_is_canonical() {
        assert_eq!(simplify(&(x1() + x2())), simplify(&(x2() + x1())));
        assert_eq!(simplify(&(x1() * x2() * c(2.0))), simplify(&(c(2.0) * (x2() * x1()))));
    }

    #[test]
    fn symbolic_derivative_matches_jets() {
        let e = (x1() * x2()).sin() / (c(2.0) + x1().exp()) + x2().powi(3).ln() * x1();
        let p = [0.3, 1.7];
        let (_, g) = value_grad(&e, p).unwrap();
        for (k, axis) in [Axis::X1, Axis::X2].into_iter().enumerate() {
            let v = eval_point(&derivative(&e, axis), p).unwrap();
            assert!((v - g[k]).abs() < 1e-12 * (1.0 + g[k].abs()));
        }
        assert_eq!(derivative(&(x1() + x2()), Axis::X1), c(1.0));
        assert_eq!(derivative(&x1(), Axis::X2), c(0.0));
    }
}
