use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Map, Value};

use super::expr::{AnalyticExpr, Axis, Expr};
use crate::error::{Error, Result};

fn schema(location: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        location: if location.is_empty() {
            "/".to_string()
        } else {
            location.to_string()
        },
        message: message.into(),
    }
}

/// Parse an expression from its JSON text.
pub fn parse_expr(text: &str) -> Result<AnalyticExpr> {
    let v: Value = serde_json::from_str(text)?;
    expr_from_value(&v, "")
}

/// Canonical compact JSON for an expression.
pub fn serialize_expr(e: &AnalyticExpr) -> String {
    expr_to_value(e).to_string()
}

/// Decode a JSON value; `location` is the JSON pointer of `v`, used in errors.
pub fn expr_from_value(v: &Value, location: &str) -> Result<AnalyticExpr> {
    let obj = v
        .as_object()
        .ok_or_else(|| schema(location, "expression must be an object"))?;
    if let Some(name) = obj.get("var") {
        only_keys(obj, &["var"], location)?;
        let name = name
            .as_str()
            .ok_or_else(|| schema(&format!("{location}/var"), "variable name must be a string"))?;
        let axis = Axis::from_name(name).ok_or_else(|| {
            schema(&format!("{location}/var"), format!("unknown variable `{name}`"))
        })?;
        return Ok(Expr::Var(axis));
    }
    if let Some(c) = obj.get("const") {
        only_keys(obj, &["const"], location)?;
        let c = c
            .as_f64()
            .ok_or_else(|| schema(&format!("{location}/const"), "constant must be a number"))?;
        return Ok(Expr::Const(c));
    }
    let op = obj
        .get("op")
        .ok_or_else(|| schema(location, "expected one of `var`, `const`, `op`"))?
        .as_str()
        .ok_or_else(|| schema(&format!("{location}/op"), "operator name must be a string"))?;
    let args_loc = format!("{location}/args");
    let args = obj
        .get("args")
        .ok_or_else(|| schema(location, format!("`{op}` needs `args`")))?
        .as_array()
        .ok_or_else(|| schema(&args_loc, "`args` must be an array"))?;
    let parsed = args
        .iter()
        .enumerate()
        .map(|(i, a)| expr_from_value(a, &format!("{args_loc}/{i}")))
        .collect::<Result<Vec<_>>>()?;
    let arity = |n: usize| -> Result<()> {
        if parsed.len() == n {
            Ok(())
        } else {
            Err(schema(
                &args_loc,
                format!("`{op}` takes {n} argument(s), got {}", parsed.len()),
            ))
        }
    };
    let mut it = parsed.clone().into_iter();
    let mut one = || Box::new(it.next().expect("arity checked"));
    let e = match op {
        "add" | "mul" => {
            only_keys(obj, &["op", "args"], location)?;
            if parsed.is_empty() {
                return Err(schema(&args_loc, format!("`{op}` needs at least one argument")));
            }
            if op == "add" {
                Expr::Add(parsed)
            } else {
                Expr::Mul(parsed)
            }
        }
        "neg" | "exp" | "log" | "sin" | "cos" => {
            only_keys(obj, &["op", "args"], location)?;
            arity(1)?;
            match op {
                "neg" => Expr::Neg(one()),
                "exp" => Expr::Exp(one()),
                "log" => Expr::Log(one()),
                "sin" => Expr::Sin(one()),
                _ => Expr::Cos(one()),
            }
        }
        "div" => {
            only_keys(obj, &["op", "args"], location)?;
            arity(2)?;
            let a = one();
            Expr::Div(a, one())
        }
        "powi" => {
            only_keys(obj, &["op", "args", "k"], location)?;
            arity(1)?;
            let k = obj
                .get("k")
                .and_then(Value::as_u64)
                .and_then(|k| u32::try_from(k).ok())
                .ok_or_else(|| schema(&format!("{location}/k"), "`powi` needs a nonnegative integer `k`"))?;
            Expr::PowInt(one(), k)
        }
        "partial" => {
            only_keys(obj, &["op", "args", "axis"], location)?;
            arity(1)?;
            let axis = obj
                .get("axis")
                .and_then(Value::as_str)
                .and_then(Axis::from_name)
                .ok_or_else(|| schema(&format!("{location}/axis"), "`partial` needs `axis` in x1, x2, t"))?;
            Expr::Partial(axis, one())
        }
        "dir" => {
            only_keys(obj, &["op", "args", "field"], location)?;
            arity(1)?;
            let floc = format!("{location}/field");
            let field = obj
                .get("field")
                .and_then(Value::as_array)
                .filter(|f| f.len() == 2)
                .ok_or_else(|| schema(&floc, "`dir` needs `field` with two expressions"))?;
            let w1 = expr_from_value(&field[0], &format!("{floc}/0"))?;
            let w2 = expr_from_value(&field[1], &format!("{floc}/1"))?;
            Expr::Dir(Box::new([w1, w2]), one())
        }
        other => {
            return Err(schema(&format!("{location}/op"), format!("unknown operator `{other}`")))
        }
    };
    Ok(e)
}

fn only_keys(obj: &Map<String, Value>, allowed: &[&str], location: &str) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(location, format!("unexpected field `{k}`"))),
        None => Ok(()),
    }
}

pub fn expr_to_value(e: &AnalyticExpr) -> Value {
    let op = |name: &str, args: Vec<Value>| json!({"op": name, "args": args});
    match e {
        Expr::Var(a) => json!({"var": a.name()}),
        Expr::Const(v) => json!({"const": v}),
        Expr::Add(v) => op("add", v.iter().map(expr_to_value).collect()),
        Expr::Mul(v) => op("mul", v.iter().map(expr_to_value).collect()),
        Expr::Neg(a) => op("neg", vec![expr_to_value(a)]),
        Expr::Div(a, b) => op("div", vec![expr_to_value(a), expr_to_value(b)]),
        Expr::PowInt(a, k) => json!({"op": "powi", "args": [expr_to_value(a)], "k": k}),
        Expr::Exp(a) => op("exp", vec![expr_to_value(a)]),
        Expr::Log(a) => op("log", vec![expr_to_value(a)]),
        Expr::Sin(a) => op("sin", vec![expr_to_value(a)]),
        Expr::Cos(a) => op("cos", vec![expr_to_value(a)]),
        Expr::Partial(axis, a) => {
            json!({"op": "partial", "args": [expr_to_value(a)], "axis": axis.name()})
        }
        Expr::Dir(w, a) => json!({
            "op": "dir",
            "args": [expr_to_value(a)],
            "field": [expr_to_value(&w[0]), expr_to_value(&w[1])],
        }),
    }
}

impl Serialize for AnalyticExpr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        expr_to_value(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for AnalyticExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        expr_from_value(&v, "").map_err(D::Error::custom)
    }
}
