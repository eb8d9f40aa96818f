//! Expression trees over `(x1, x2, t)`, truncated Taylor jets, and their
//! evaluation, serialization and simplification.

pub mod eval;
pub mod expr;
pub mod jet;
pub mod json;
pub mod scalar;
pub mod simplify;

pub use eval::{
    eval3, eval_jet, eval_jet_exact, eval_jet_in, eval_jet_t, eval_point, eval_t, value_grad, Frame,
    Slot,
};
pub use expr::{c, t, x1, x2, AnalyticExpr, Axis, Expr};
pub use jet::{index_of, jet_combine, jet_len, multi_indices, partial_extract, Jet1, Jet2, JetOp};
pub use json::{expr_from_value, expr_to_value, parse_expr, serialize_expr};
pub use scalar::{Elementary, Scalar};
pub use simplify::{derivative, simplify};
