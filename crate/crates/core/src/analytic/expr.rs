use std::collections::BTreeSet;
use std::fmt;
use std::ops;

/// Coordinate axes an expression may depend on. `T` is the auxiliary
/// variable used by test functions and by the lifted space `B x R`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X1,
    X2,
    T,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::X1 => "x1",
            Axis::X2 => "x2",
            Axis::T => "t",
        }
    }

    pub fn from_name(s: &str) -> Option<Axis> {
        match s {
            "x1" => Some(Axis::X1),
            "x2" => Some(Axis::X2),
            "t" => Some(Axis::T),
            _ => None,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Expression tree for a real-analytic function of `(x1, x2, t)`.
///
/// Derivative nodes (`Partial`, `Dir`) are kept unevaluated; the jet
/// evaluator handles them by raising the working order.
#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticExpr {
    Var(Axis),
    Const(f64),
    Add(Vec<AnalyticExpr>),
    Mul(Vec<AnalyticExpr>),
    Neg(Box<AnalyticExpr>),
    Div(Box<AnalyticExpr>, Box<AnalyticExpr>),
    /// Nonnegative integer power. Negative powers are built as `Div(1, PowInt(e, k))`.
    PowInt(Box<AnalyticExpr>, u32),
    Exp(Box<AnalyticExpr>),
    Log(Box<AnalyticExpr>),
    Sin(Box<AnalyticExpr>),
    Cos(Box<AnalyticExpr>),
    Partial(Axis, Box<AnalyticExpr>),
    /// Directional derivative `w1 * d/dx1 + w2 * d/dx2` applied to the inner expression.
    Dir(Box<[AnalyticExpr; 2]>, Box<AnalyticExpr>),
}

pub type Expr = AnalyticExpr;

pub fn x1() -> Expr {
    Expr::Var(Axis::X1)
}

pub fn x2() -> Expr {
    Expr::Var(Axis::X2)
}

pub fn t() -> Expr {
    Expr::Var(Axis::T)
}

pub fn c(v: f64) -> Expr {
    Expr::Const(v)
}

impl AnalyticExpr {
    pub fn var(axis: Axis) -> Self {
        Expr::Var(axis)
    }

    pub fn exp(self) -> Self {
        Expr::Exp(Box::new(self))
    }

    pub fn ln(self) -> Self {
        Expr::Log(Box::new(self))
    }

    pub fn sin(self) -> Self {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Self {
        Expr::Cos(Box::new(self))
    }

    /// Integer power; negative exponents become a reciprocal.
    pub fn powi(self, k: i32) -> Self {
        if k >= 0 {
            Expr::PowInt(Box::new(self), k as u32)
        } else {
            Expr::Div(
                Box::new(Expr::Const(1.0)),
                Box::new(Expr::PowInt(Box::new(self), k.unsigned_abs())),
            )
        }
    }

    pub fn partial(self, axis: Axis) -> Self {
        Expr::Partial(axis, Box::new(self))
    }

    /// Apply the planar field `(w1, w2)` to `self`.
    pub fn dir(self, w1: Expr, w2: Expr) -> Self {
        Expr::Dir(Box::new([w1, w2]), Box::new(self))
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Expr::Const(_))
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(v) => Some(*v),
            _ => None,
        }
    }

    /// Axes appearing anywhere in the tree.
    pub fn free_axes(&self) -> BTreeSet<Axis> {
        let mut out = BTreeSet::new();
        self.collect_axes(&mut out);
        out
    }

    fn collect_axes(&self, out: &mut BTreeSet<Axis>) {
        match self {
            Expr::Var(a) => {
                out.insert(*a);
            }
            Expr::Const(_) => {}
            Expr::Add(v) | Expr::Mul(v) => v.iter().for_each(|e| e.collect_axes(out)),
            Expr::Neg(e)
            | Expr::PowInt(e, _)
            | Expr::Exp(e)
            | Expr::Log(e)
            | Expr::Sin(e)
            | Expr::Cos(e)
            | Expr::Partial(_, e) => e.collect_axes(out),
            Expr::Div(a, b) => {
                a.collect_axes(out);
                b.collect_axes(out);
            }
            Expr::Dir(w, e) => {
                w[0].collect_axes(out);
                w[1].collect_axes(out);
                e.collect_axes(out);
            }
        }
    }

    /// Maximum number of derivative nodes on any root-to-leaf path.
    pub fn derivative_depth(&self) -> usize {
        match self {
            Expr::Var(_) | Expr::Const(_) => 0,
            Expr::Add(v) | Expr::Mul(v) => v.iter().map(|e| e.derivative_depth()).max().unwrap_or(0),
            Expr::Neg(e)
            | Expr::PowInt(e, _)
            | Expr::Exp(e)
            | Expr::Log(e)
            | Expr::Sin(e)
            | Expr::Cos(e) => e.derivative_depth(),
            Expr::Div(a, b) => a.derivative_depth().max(b.derivative_depth()),
            Expr::Partial(_, e) => 1 + e.derivative_depth(),
            Expr::Dir(w, e) => w[0]
                .derivative_depth()
                .max(w[1].derivative_depth())
                .max(1 + e.derivative_depth()),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + match self {
            Expr::Var(_) | Expr::Const(_) => 0,
            Expr::Add(v) | Expr::Mul(v) => v.iter().map(|e| e.size()).sum(),
            Expr::Neg(e)
            | Expr::PowInt(e, _)
            | Expr::Exp(e)
            | Expr::Log(e)
            | Expr::Sin(e)
            | Expr::Cos(e)
            | Expr::Partial(_, e) => e.size(),
            Expr::Div(a, b) => a.size() + b.size(),
            Expr::Dir(w, e) => w[0].size() + w[1].size() + e.size(),
        }
    }
}

impl From<f64> for AnalyticExpr {
    fn from(v: f64) -> Self {
        Expr::Const(v)
    }
}

impl ops::Add for AnalyticExpr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, rhs])
    }
}

impl ops::Sub for AnalyticExpr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, Expr::Neg(Box::new(rhs))])
    }
}

impl ops::Mul for AnalyticExpr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(vec![self, rhs])
    }
}

impl ops::Div for AnalyticExpr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        Expr::Div(Box::new(self), Box::new(rhs))
    }
}

impl ops::Neg for AnalyticExpr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Neg(Box::new(self))
    }
}

impl ops::Add<f64> for AnalyticExpr {
    type Output = Expr;
    fn add(self, rhs: f64) -> Expr {
        self + Expr::Const(rhs)
    }
}

impl ops::Mul<f64> for AnalyticExpr {
    type Output = Expr;
    fn mul(self, rhs: f64) -> Expr {
        Expr::Const(rhs) * self
    }
}

impl fmt::Display for AnalyticExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, v: &[Expr], sep: &str) -> fmt::Result {
            f.write_str("(")?;
            for (i, e) in v.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{e}")?;
            }
            f.write_str(")")
        }
        match self {
            Expr::Var(a) => write!(f, "{a}"),
            Expr::Const(v) => write!(f, "{v}"),
            Expr::Add(v) => list(f, v, " + "),
            Expr::Mul(v) => list(f, v, "*"),
            Expr::Neg(e) => write!(f, "-{e}"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::PowInt(e, k) => write!(f, "{e}^{k}"),
            Expr::Exp(e) => write!(f, "exp({e})"),
            Expr::Log(e) => write!(f, "log({e})"),
            Expr::Sin(e) => write!(f, "sin({e})"),
            Expr::Cos(e) => write!(f, "cos({e})"),
            Expr::Partial(a, e) => write!(f, "d_{a}[{e}]"),
            Expr::Dir(w, e) => write!(f, "<{}, {}>[{e}]", w[0], w[1]),
        }
    }
}
