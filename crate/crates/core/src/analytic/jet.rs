//! Truncated Taylor polynomials in one and two variables.
//!
//! A [`Jet2`] of order `M` at a center stores `d^a f(center) / a!` for every
//! multi-index `a = (a1, a2)` with `a1 + a2 <= M`, in graded lexicographic
//! order: total degree first, then x1-degree descending. The layout is fixed
//! so serialized jets compare bit-exactly.

use serde::{Deserialize, Serialize};

use super::scalar::Scalar;
use crate::error::{Error, Result};

/// Number of multi-indices of total degree at most `order`.
pub fn jet_len(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

/// Storage position of the multi-index `(i, j)` (x1-degree `i`, x2-degree `j`).
#[inline]
pub fn index_of(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

/// All multi-indices up to `order`, in storage order.
pub fn multi_indices(order: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(jet_len(order));
    for d in 0..=order {
        for j in 0..=d {
            out.push((d - j, j));
        }
    }
    out
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Serialize", deserialize = "S: Deserialize<'de>"))]
pub struct Jet1<S: Scalar = f64> {
    pub center: f64,
    pub coeffs: Vec<S>,
}

impl<S: Scalar> Jet1<S> {
    pub fn new(center: f64, coeffs: Vec<S>) -> Self {
        assert!(!coeffs.is_empty(), "a jet has at least its constant term");
        Jet1 { center, coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `f^(k)(center)` for `k <= order`.
    pub fn derivative(&self, k: usize) -> Result<f64> {
        let c = self
            .coeffs
            .get(k)
            .ok_or_else(|| Error::Order(format!("derivative {k} exceeds jet order {}", self.order())))?;
        Ok(c.to_f64() * factorial(k))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Serialize", deserialize = "S: Deserialize<'de>"))]
pub struct Jet2<S: Scalar = f64> {
    center: [f64; 2],
    order: usize,
    coeffs: Vec<S>,
}

impl<S: Scalar> Jet2<S> {
    pub fn from_coeffs(center: [f64; 2], order: usize, coeffs: Vec<S>) -> Result<Self> {
        if coeffs.len() != jet_len(order) {
            return Err(Error::Order(format!(
                "order {order} needs {} coefficients, got {}",
                jet_len(order),
                coeffs.len()
            )));
        }
        Ok(Jet2 {
            center,
            order,
            coeffs,
        })
    }

    pub fn constant(center: [f64; 2], order: usize, value: S) -> Self {
        let mut coeffs = vec![S::zero(); jet_len(order)];
        coeffs[0] = value;
        Jet2 {
            center,
            order,
            coeffs,
        }
    }

    /// The coordinate function `x_{axis+1}` expanded at `center`.
    pub fn variable(center: [f64; 2], order: usize, axis: usize, value: S) -> Self {
        let mut jet = Self::constant(center, order, value);
        if order >= 1 {
            let idx = if axis == 0 { index_of(1, 0) } else { index_of(0, 1) };
            jet.coeffs[idx] = S::one();
        }
        jet
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn value(&self) -> &S {
        &self.coeffs[0]
    }

    /// Stored coefficient `d^a f / a!` for the multi-index `(i, j)`.
    pub fn coeff(&self, i: usize, j: usize) -> Option<&S> {
        if i + j > self.order {
            None
        } else {
            Some(&self.coeffs[index_of(i, j)])
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.center != other.center {
            return Err(Error::CenterMismatch);
        }
        if self.order != other.order {
            return Err(Error::OrderMismatch(self.order, other.order));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.zip(other, |a, b| a.add(b)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.zip(other, |a, b| a.sub(b)))
    }

    fn zip(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        Jet2 {
            center: self.center,
            order: self.order,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(|a| a.neg())
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|a| a.mul(s))
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Jet2 {
            center: self.center,
            order: self.order,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let m = self.order;
        let idx = multi_indices(m);
        let mut out = vec![S::zero(); idx.len()];
        for (p, &(i1, j1)) in idx.iter().enumerate() {
            let a = &self.coeffs[p];
            if a.is_zero() {
                continue;
            }
            let budget = m - (i1 + j1);
            for (q, &(i2, j2)) in idx.iter().enumerate() {
                if i2 + j2 > budget {
                    break;
                }
                let b = &other.coeffs[q];
                if b.is_zero() {
                    continue;
                }
                let r = index_of(i1 + i2, j1 + j2);
                out[r] = out[r].add(&a.mul(b));
            }
        }
        Jet2 {
            center: self.center,
            order: m,
            coeffs: out,
        }
    }

    /// Series reciprocal; requires a nonzero constant term.
    pub fn recip(&self) -> Result<Self> {
        let v0 = &self.coeffs[0];
        if v0.is_zero() {
            return Err(Error::DivisionByZeroJet);
        }
        let idx = multi_indices(self.order);
        let inv0 = S::one().div(v0);
        let mut r = vec![S::zero(); idx.len()];
        r[0] = inv0.clone();
        for (g, &(gi, gj)) in idx.iter().enumerate().skip(1) {
            // sum over beta < gamma of v[gamma - beta] * r[beta]
            let mut acc = S::zero();
            for bi in 0..=gi {
                for bj in 0..=gj {
                    if bi == gi && bj == gj {
                        continue;
                    }
                    let vb = &self.coeffs[index_of(gi - bi, gj - bj)];
                    if vb.is_zero() {
                        continue;
                    }
                    acc = acc.add(&vb.mul(&r[index_of(bi, bj)]));
                }
            }
            r[g] = acc.mul(&inv0).neg();
        }
        Ok(Jet2 {
            center: self.center,
            order: self.order,
            coeffs: r,
        })
    }

    /// Series quotient; the constant term is exactly `u0 / v0`.
    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let v0 = &other.coeffs[0];
        if v0.is_zero() {
            return Err(Error::DivisionByZeroJet);
        }
        let idx = multi_indices(self.order);
        let mut q = vec![S::zero(); idx.len()];
        for (g, &(gi, gj)) in idx.iter().enumerate() {
            // u[gamma] - sum over beta < gamma of v[gamma - beta] * q[beta]
            let mut acc = self.coeffs[g].clone();
            for bi in 0..=gi {
                for bj in 0..=gj {
                    if bi == gi && bj == gj {
                        continue;
                    }
                    let vb = &other.coeffs[index_of(gi - bi, gj - bj)];
                    if !vb.is_zero() {
                        acc = acc.sub(&vb.mul(&q[index_of(bi, bj)]));
                    }
                }
            }
            q[g] = acc.div(v0);
        }
        Ok(Jet2 {
            center: self.center,
            order: self.order,
            coeffs: q,
        })
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut result = Self::constant(self.center, self.order, S::one());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul_unchecked(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_unchecked(&base);
            }
        }
        result
    }

    /// Substitute this jet into a univariate series `outer` expanded about
    /// this jet's constant term (Faa di Bruno via Horner on the nilpotent part).
    pub fn compose(&self, outer: &Jet1<S>) -> Result<Self> {
        let v0 = self.coeffs[0].to_f64();
        if outer.center != v0 && !(outer.center.is_nan() && v0.is_nan()) {
            return Err(Error::CenterMismatch);
        }
        Ok(self.compose_coeffs(&outer.coeffs))
    }

    pub(crate) fn compose_coeffs(&self, outer: &[S]) -> Self {
        let mut h = self.clone();
        h.coeffs[0] = S::zero();
        // only the first order+1 outer terms can contribute
        let top = outer.len().min(self.order + 1);
        let mut acc = Self::constant(self.center, self.order, outer[top - 1].clone());
        for k in (0..top - 1).rev() {
            acc = acc.mul_unchecked(&h);
            acc.coeffs[0] = acc.coeffs[0].add(&outer[k]);
        }
        acc
    }

    /// Partial derivative along jet variable `axis` (0 or 1); the result has order `order - 1`.
    pub fn differentiate(&self, axis: usize) -> Result<Self> {
        if self.order == 0 {
            return Err(Error::Order("cannot differentiate an order-0 jet".into()));
        }
        let m = self.order - 1;
        let coeffs = multi_indices(m)
            .into_iter()
            .map(|(i, j)| {
                let (si, sj, k) = if axis == 0 {
                    (i + 1, j, i + 1)
                } else {
                    (i, j + 1, j + 1)
                };
                self.coeffs[index_of(si, sj)].mul(&S::from_i64(k as i64))
            })
            .collect();
        Ok(Jet2 {
            center: self.center,
            order: m,
            coeffs,
        })
    }

    /// Drop all terms above `order`.
    pub fn truncate(&self, order: usize) -> Result<Self> {
        if order > self.order {
            return Err(Error::Order(format!(
                "cannot raise jet order from {} to {order}",
                self.order
            )));
        }
        Ok(Jet2 {
            center: self.center,
            order,
            coeffs: self.coeffs[..jet_len(order)].to_vec(),
        })
    }

    /// `d^a f(center)` for the multi-index `a = (i, j)`.
    pub fn partial(&self, i: usize, j: usize) -> Result<f64> {
        let c = self.coeff(i, j).ok_or_else(|| {
            Error::Order(format!(
                "multi-index ({i}, {j}) exceeds jet order {}",
                self.order
            ))
        })?;
        Ok(c.to_f64() * factorial(i) * factorial(j))
    }
}

impl Jet2<f64> {
    /// Value of the Taylor polynomial at `x`.
    pub fn eval_poly(&self, x: [f64; 2]) -> f64 {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        multi_indices(self.order)
            .into_iter()
            .zip(&self.coeffs)
            .map(|((i, j), c)| c * dx.powi(i as i32) * dy.powi(j as i32))
            .sum()
    }
}

/// Binary jet operations offered to callers that hold two jets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JetOp {
    Add,
    Mul,
    Div,
}

pub fn jet_combine<S: Scalar>(op: JetOp, u: &Jet2<S>, v: &Jet2<S>) -> Result<Jet2<S>> {
    match op {
        JetOp::Add => u.add(v),
        JetOp::Mul => u.mul(v),
        JetOp::Div => u.div(v),
    }
}

/// `d^a f(center)` read off a jet.
pub fn partial_extract<S: Scalar>(jet: &Jet2<S>, alpha: (usize, usize)) -> Result<f64> {
    jet.partial(alpha.0, alpha.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(center: [f64; 2], order: usize, terms: &[((usize, usize), f64)]) -> Jet2 {
        let mut coeffs = vec![0.0; jet_len(order)];
        for &((i, j), v) in terms {
            if i + j <= order {
                coeffs[index_of(i, j)] = v;
            }
        }
        Jet2::from_coeffs(center, order, coeffs).unwrap()
    }

    #[test]
    fn storage_order_is_graded_lex() {
        assert_eq!(
            multi_indices(2),
            vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
        );
        for (p, (i, j)) in multi_indices(6).into_iter().enumerate() {
            assert_eq!(index_of(i, j), p);
        }
        assert_eq!(jet_len(3), 10);
    }

    #[test]
    fn mul_truncates() {
        let c = [0.0, 0.0];
        let u = poly(c, 2, &[((0, 0), 1.0), ((1, 0), 1.0)]);
        let v = poly(c, 2, &[((0, 0), 1.0), ((1, 0), -1.0)]);
        let w = u.mul(&v).unwrap();
        assert_eq!(w, poly(c, 2, &[((0, 0), 1.0), ((2, 0), -1.0)]));

        let u1 = u.truncate(1).unwrap();
        let v1 = v.truncate(1).unwrap();
        assert_eq!(u1.mul(&v1).unwrap(), poly(c, 1, &[((0, 0), 1.0)]));
    }

    #[test]
    fn mismatches_are_reported() {
        let a = Jet2::constant([0.0, 0.0], 2, 1.0);
        let b = Jet2::constant([0.0, 1.0], 2, 1.0);
        let c = Jet2::constant([0.0, 0.0], 3, 1.0);
        assert_eq!(a.add(&b), Err(Error::CenterMismatch));
        assert_eq!(a.mul(&c), Err(Error::OrderMismatch(2, 3)));
        let z = Jet2::constant([0.0, 0.0], 2, 0.0);
        assert_eq!(a.div(&z), Err(Error::DivisionByZeroJet));
    }

    #[test]
    fn partial_extract_scales_by_factorials() {
        let j = poly([0.0, 0.0], 3, &[((1, 1), 1.0)]);
        assert_eq!(partial_extract(&j, (1, 1)).unwrap(), 1.0);
        assert_eq!(partial_extract(&j, (0, 0)).unwrap(), 0.0);
        assert!(matches!(partial_extract(&j, (3, 1)), Err(Error::Order(_))));
    }

    #[test]
    fn differentiate_lowers_order() {
        // x1^2 x2 at origin
        let j = poly([0.0, 0.0], 3, &[((2, 1), 1.0)]);
        let d = j.differentiate(0).unwrap();
        assert_eq!(d.order(), 2);
        assert_eq!(d.coeff(1, 1), Some(&2.0));
    }

    #[test]
    fn compose_exp_series() {
        let v = Jet2::variable([0.0, 0.0], 3, 0, 0.0);
        let outer = Jet1::new(0.0, f64::elementary(super::super::scalar::Elementary::Exp, &0.0, 3).unwrap());
        let e = v.compose(&outer).unwrap();
        let along: Vec<f64> = (0..=3).map(|k| *e.coeff(k, 0).unwrap()).collect();
        assert_eq!(along, vec![1.0, 1.0, 0.5, 1.0 / 6.0]);
        let off = Jet1::new(1.0, vec![1.0]);
        assert_eq!(v.compose(&off), Err(Error::CenterMismatch));
    }
}
