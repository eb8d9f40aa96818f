//! Data model: triple and linear data on a planar domain, test functions,
//! and the JSON file formats.

mod domain;
mod testfn;

use serde::{Deserialize, Serialize};

use crate::analytic::{derivative, eval_point, value_grad, Axis, Expr};
use crate::error::{Error, Result};

pub use domain::{Domain, Shape, DEFAULT_MARGIN};
pub use testfn::{parse_test_functions, Oscillatory, Table, TableMode, TestFunction};

pub const DEFAULT_VALIDATION_GRID: usize = 50;
pub const DEFAULT_ZERO_TOL: f64 = 1e-8;

/// `(a, Phi)` on a planar domain: three coefficients and three mappings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleDatum {
    pub domain: Domain,
    pub a: [Expr; 3],
    pub phi: [Expr; 3],
}

/// n-term datum with linear mappings `phi_j = p x1 + q x2`, multiplicities
/// `N_j` and coefficients `a_{j,k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearDatum {
    pub n: usize,
    pub domain: Domain,
    pub phi: Vec<[f64; 2]>,
    #[serde(rename = "N")]
    pub multiplicity: Vec<usize>,
    pub a: Vec<Vec<Expr>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Datum {
    Triple(TripleDatum),
    Linear(LinearDatum),
}

/// Planar or space vector field given by component expressions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorField {
    pub components: Vec<Expr>,
}

impl VectorField {
    pub fn planar(w1: Expr, w2: Expr) -> Self {
        VectorField {
            components: vec![w1, w2],
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    /// Components at `(x1, x2, t)`; planar fields ignore `t`.
    pub fn eval(&self, p: [f64; 3]) -> Result<Vec<f64>> {
        self.components
            .iter()
            .enumerate()
            .map(|(i, c)| crate::analytic::eval3(c, p).map_err(|e| e.within(&format!("field[{i}]"))))
            .collect()
    }

    pub fn eval_planar(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let v = self.eval([x[0], x[1], 0.0])?;
        Ok([v[0], v[1]])
    }

    /// The expression `W(e)` for a planar field.
    pub fn apply(&self, e: Expr) -> Expr {
        e.dir(self.components[0].clone(), self.components[1].clone())
    }
}

/// `W = d_2 phi * d/dx1 - d_1 phi * d/dx2`, which annihilates `phi`.
pub fn annihilating_field_of(phi: &Expr) -> VectorField {
    VectorField::planar(derivative(phi, Axis::X2), -derivative(phi, Axis::X1))
        .simplified()
}

impl VectorField {
    fn simplified(self) -> Self {
        VectorField {
            components: self.components.iter().map(crate::analytic::simplify).collect(),
        }
    }
}

impl TripleDatum {
    pub fn new(domain: Domain, a: [Expr; 3], phi: [Expr; 3]) -> Self {
        TripleDatum { domain, a, phi }
    }

    /// `W_k` for `k` in `1..=3`.
    pub fn annihilating_field(&self, k: usize) -> VectorField {
        annihilating_field_of(&self.phi[k - 1])
    }

    /// `phi1 = x1` and `phi2 = x2` structurally.
    pub fn is_adapted(&self) -> bool {
        self.phi[0] == Expr::Var(Axis::X1) && self.phi[1] == Expr::Var(Axis::X2)
    }

    pub fn g_eval(&self, f: &[TestFunction], x: [f64; 2]) -> Result<f64> {
        g_eval(self, f, x)
    }
}

pub fn annihilating_field(d: &TripleDatum, k: usize) -> VectorField {
    d.annihilating_field(k)
}

/// `sum_j a_j(x) f_j(phi_j(x))`.
pub fn g_eval(d: &TripleDatum, f: &[TestFunction], x: [f64; 2]) -> Result<f64> {
    if f.len() != 3 {
        return Err(Error::Validation(format!("need 3 test functions, got {}", f.len())));
    }
    let mut acc = 0.0;
    for j in 0..3 {
        let a = eval_point(&d.a[j], x).map_err(|e| e.within(&format!("a{}", j + 1)))?;
        let y = eval_point(&d.phi[j], x).map_err(|e| e.within(&format!("phi{}", j + 1)))?;
        acc += a * f[j].eval(y).map_err(|e| e.within(&format!("f{}", j + 1)))?;
    }
    Ok(acc)
}

impl LinearDatum {
    pub fn phi_expr(&self, j: usize) -> Expr {
        let [p, q] = self.phi[j];
        crate::analytic::simplify(&(Expr::Const(p) * Expr::Var(Axis::X1) + Expr::Const(q) * Expr::Var(Axis::X2)))
    }

    pub fn phi_value(&self, j: usize, x: [f64; 2]) -> f64 {
        self.phi[j][0] * x[0] + self.phi[j][1] * x[1]
    }

    /// Pairwise independence of the distinct linear forms.
    pub fn forms_independent(&self) -> bool {
        for i in 0..self.n {
            for j in i + 1..self.n {
                let [p1, q1] = self.phi[i];
                let [p2, q2] = self.phi[j];
                if (p1 * q2 - p2 * q1).abs() <= 1e-12 * (p1.hypot(q1) * p2.hypot(q2)) {
                    return false;
                }
            }
        }
        true
    }

    pub fn check_shape(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Validation("linear datum needs n >= 1".into()));
        }
        if self.phi.len() != self.n || self.multiplicity.len() != self.n || self.a.len() != self.n {
            return Err(Error::Validation(format!(
                "linear datum with n = {} has {} forms, {} multiplicities, {} coefficient rows",
                self.n,
                self.phi.len(),
                self.multiplicity.len(),
                self.a.len()
            )));
        }
        for j in 0..self.n {
            let [p, q] = self.phi[j];
            if !(p.is_finite() && q.is_finite()) || (p == 0.0 && q == 0.0) {
                return Err(Error::Validation(format!("phi{} is a constant mapping", j + 1)));
            }
            if self.multiplicity[j] == 0 {
                return Err(Error::Validation(format!("N{} must be at least 1", j + 1)));
            }
            if self.a[j].len() != self.multiplicity[j] {
                return Err(Error::Validation(format!(
                    "a{} has {} entries but N{} = {}",
                    j + 1,
                    self.a[j].len(),
                    j + 1,
                    self.multiplicity[j]
                )));
            }
        }
        Ok(())
    }
}

/// `sum_j sum_k a_{j,k}(x) f_{j,k}(phi_j(x))`.
pub fn linear_g_eval(d: &LinearDatum, f: &[Vec<TestFunction>], x: [f64; 2]) -> Result<f64> {
    if f.len() != d.n || f.iter().zip(&d.multiplicity).any(|(r, &m)| r.len() != m) {
        return Err(Error::Validation("test function array does not match N".into()));
    }
    let mut acc = 0.0;
    for j in 0..d.n {
        let y = d.phi_value(j, x);
        for (k, (a, fk)) in d.a[j].iter().zip(&f[j]).enumerate() {
            let seg = format!("a{},{}", j + 1, k + 1);
            acc += eval_point(a, x).map_err(|e| e.within(&seg))? * fk.eval(y)?;
        }
    }
    Ok(acc)
}

/// Grid statistics of one coefficient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientScan {
    pub name: String,
    pub max_abs: f64,
    pub min_abs: f64,
    pub argmin: [f64; 2],
}

/// Grid statistics of one mapping's gradient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapScan {
    pub name: String,
    pub min_grad: f64,
    pub max_grad: f64,
    pub argmin: [f64; 2],
}

/// Degeneracy scan run at load time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyScan {
    pub grid: usize,
    pub tol: f64,
    pub coefficients: Vec<CoefficientScan>,
    pub maps: Vec<MapScan>,
    /// Web curvature verdict for adapted triple data.
    pub web_curvature_zero: Option<bool>,
    pub forms_independent: Option<bool>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadedDatum {
    pub datum: Datum,
    pub scan: DegeneracyScan,
}

#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    pub grid: usize,
    pub tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            grid: DEFAULT_VALIDATION_GRID,
            tol: DEFAULT_ZERO_TOL,
        }
    }
}

pub fn load_datum(text: &str) -> Result<LoadedDatum> {
    load_datum_with(text, ScanOptions::default())
}

pub fn load_datum_with(text: &str, opts: ScanOptions) -> Result<LoadedDatum> {
    let datum: Datum = serde_json::from_str(text)?;
    validate_datum(datum, opts)
}

/// Validate an in-memory datum and attach its degeneracy scan.
pub fn validate_datum(datum: Datum, opts: ScanOptions) -> Result<LoadedDatum> {
    let scan = match &datum {
        Datum::Triple(d) => scan_triple(d, opts)?,
        Datum::Linear(d) => scan_linear(d, opts)?,
    };
    Ok(LoadedDatum { datum, scan })
}

fn no_t(e: &Expr, name: &str) -> Result<()> {
    if e.free_axes().contains(&Axis::T) {
        Err(Error::Validation(format!("{name} must not depend on t")))
    } else {
        Ok(())
    }
}

fn scan_coefficient(name: &str, e: &Expr, domain: &Domain, opts: ScanOptions) -> Result<CoefficientScan> {
    no_t(e, name)?;
    for x in domain.margin_grid(opts.grid) {
        eval_point(e, x).map_err(|err| {
            Error::Validation(format!("{name} is not evaluable at {x:?}: {err}"))
        })?;
    }
    let mut s = CoefficientScan {
        name: name.to_string(),
        max_abs: 0.0,
        min_abs: f64::INFINITY,
        argmin: domain.center(),
    };
    for x in domain.grid(opts.grid) {
        let v = eval_point(e, x)?.abs();
        s.max_abs = s.max_abs.max(v);
        if v < s.min_abs {
            s.min_abs = v;
            s.argmin = x;
        }
    }
    if s.max_abs <= opts.tol {
        return Err(Error::Validation(format!(
            "{name} vanishes on the whole validation grid (max |{name}| = {:.3e} <= {:.1e})",
            s.max_abs, opts.tol
        )));
    }
    Ok(s)
}

fn scan_map(name: &str, e: &Expr, domain: &Domain, opts: ScanOptions) -> Result<MapScan> {
    no_t(e, name)?;
    let mut s = MapScan {
        name: name.to_string(),
        min_grad: f64::INFINITY,
        max_grad: 0.0,
        argmin: domain.center(),
    };
    for x in domain.margin_grid(opts.grid) {
        let (_, g) = value_grad(e, x).map_err(|err| {
            Error::Validation(format!("{name} is not evaluable at {x:?}: {err}"))
        })?;
        let n = g[0].hypot(g[1]);
        s.max_grad = s.max_grad.max(n);
        if domain.contains(x) && n < s.min_grad {
            s.min_grad = n;
            s.argmin = x;
        }
    }
    if s.max_grad <= opts.tol {
        return Err(Error::Validation(format!("{name} is a constant mapping")));
    }
    Ok(s)
}

fn scan_triple(d: &TripleDatum, opts: ScanOptions) -> Result<DegeneracyScan> {
    d.domain.validate()?;
    let mut maps = Vec::new();
    for (j, phi) in d.phi.iter().enumerate() {
        maps.push(scan_map(&format!("phi{}", j + 1), phi, &d.domain, opts)?);
    }
    let mut coefficients = Vec::new();
    for (j, a) in d.a.iter().enumerate() {
        coefficients.push(scan_coefficient(&format!("a{}", j + 1), a, &d.domain, opts)?);
    }
    let mut notes = Vec::new();
    for c in &coefficients {
        if c.min_abs <= opts.tol {
            notes.push(format!("{} vanishes near {:?}", c.name, c.argmin));
        }
    }
    for m in &maps {
        if m.min_grad <= opts.tol {
            notes.push(format!("{} has a critical point near {:?}", m.name, m.argmin));
        }
    }
    let web_curvature_zero = if d.is_adapted() {
        match crate::hypotheses::curvature_identically_zero(d, opts.grid.min(30), 1e-8) {
            Ok(r) => Some(r.zero),
            Err(e) => {
                notes.push(format!("web curvature not evaluated: {e}"));
                None
            }
        }
    } else {
        None
    };
    if web_curvature_zero == Some(true) {
        notes.push("web curvature vanishes identically at grid resolution".into());
    }
    Ok(DegeneracyScan {
        grid: opts.grid,
        tol: opts.tol,
        coefficients,
        maps,
        web_curvature_zero,
        forms_independent: None,
        notes,
    })
}

fn scan_linear(d: &LinearDatum, opts: ScanOptions) -> Result<DegeneracyScan> {
    d.domain.validate()?;
    d.check_shape()?;
    let mut coefficients = Vec::new();
    for (j, row) in d.a.iter().enumerate() {
        for (k, a) in row.iter().enumerate() {
            coefficients.push(scan_coefficient(&format!("a{},{}", j + 1, k + 1), a, &d.domain, opts)?);
        }
    }
    let maps = d
        .phi
        .iter()
        .enumerate()
        .map(|(j, [p, q])| {
            let g = p.hypot(*q);
            MapScan {
                name: format!("phi{}", j + 1),
                min_grad: g,
                max_grad: g,
                argmin: d.domain.center(),
            }
        })
        .collect();
    let independent = d.forms_independent();
    let mut notes = Vec::new();
    if !independent {
        notes.push("some linear forms are proportional".into());
    }
    Ok(DegeneracyScan {
        grid: opts.grid,
        tol: opts.tol,
        coefficients,
        maps,
        web_curvature_zero: None,
        forms_independent: Some(independent),
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{c, t, x1, x2};

    fn linear_web() -> TripleDatum {
        TripleDatum::new(
            Domain::rect([0.0, 1.0], [0.0, 1.0]),
            [c(1.0), c(1.0), c(1.0)],
            [x1(), x2(), x1() + x2()],
        )
    }

    #[test]
    fn annihilating_field_examples() {
        assert_eq!(annihilating_field_of(&x1()).components, vec![c(0.0), c(-1.0)]);
        assert_eq!(annihilating_field_of(&(x1() + x2())).components, vec![c(1.0), c(-1.0)]);
        let phi = x1().powi(2) + x2();
        let w = annihilating_field_of(&phi);
        assert_eq!(eval_point(&w.components[1], [3.0, 0.0]).unwrap(), -6.0);
        let d = Domain::rect([-1.0, 1.0], [-1.0, 1.0]);
        for x in d.grid(20) {
            assert!(eval_point(&w.apply(phi.clone()), x).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn g_eval_examples() {
        let d = linear_web();
        let tf = |e| TestFunction::expr(e).unwrap();
        let f = [tf(t()), tf(t()), tf(-t())];
        assert_eq!(g_eval(&d, &f, [0.3, 0.7]).unwrap(), 0.0);
        let ones = [tf(c(1.0)), tf(c(1.0)), tf(c(1.0))];
        assert_eq!(g_eval(&d, &ones, [0.3, 0.7]).unwrap(), 3.0);
    }

    #[test]
    fn load_examples() {
        let text = r#"{"kind":"triple","domain":{"kind":"rect","x1":[0,1],"x2":[0,1]},
            "a":[{"const":1},{"const":1},{"const":1}],
            "phi":[{"var":"x1"},{"var":"x2"},{"op":"add","args":[{"var":"x1"},{"var":"x2"}]}]}"#;
        let loaded = load_datum(text).unwrap();
        assert_eq!(loaded.scan.web_curvature_zero, Some(true));

        let lin = r#"{"kind":"linear","n":2,"domain":{"kind":"rect","x1":[0,1],"x2":[0,1]},
            "phi":[[1,0],[0,1]],"N":[1,1],"a":[[{"const":1}],[{"const":1}]]}"#;
        let loaded = load_datum(lin).unwrap();
        assert_eq!(loaded.scan.forms_independent, Some(true));

        let bad = text.replacen(r#"{"var":"x1"},{"var":"x2"}"#, r#"{"const":3},{"var":"x2"}"#, 1);
        match load_datum(&bad) {
            Err(Error::Validation(m)) => assert!(m.contains("constant mapping"), "{m}"),
            other => panic!("unexpected {other:?}"),
        }
        let zero_a = text.replacen(r#"{"const":1}"#, r#"{"const":0}"#, 1);
        assert!(matches!(load_datum(&zero_a), Err(Error::Validation(_))));
        assert!(matches!(load_datum("{\"kind\":\"triple\"}"), Err(Error::Schema { .. })));
    }

    #[test]
    fn linear_g_eval_examples() {
        let tf = |e| TestFunction::expr(e).unwrap();
        let d = LinearDatum {
            n: 1,
            domain: Domain::rect([0.0, 1.0], [0.0, 1.0]),
            phi: vec![[0.0, 1.0]],
            multiplicity: vec![1],
            a: vec![vec![c(1.0)]],
        };
        assert_eq!(linear_g_eval(&d, &[vec![tf(t())]], [0.2, 0.9]).unwrap(), 0.9);
        let d2 = LinearDatum {
            n: 2,
            phi: vec![[1.0, 0.0], [0.0, 1.0]],
            multiplicity: vec![1, 1],
            a: vec![vec![c(1.0)], vec![c(1.0)]],
            ..d
        };
        let f = [vec![tf(t())], vec![tf(-t())]];
        assert_eq!(linear_g_eval(&d2, &f, [0.4, 0.4]).unwrap(), 0.0);
    }
}
