use std::fmt::Debug;

use num::rational::BigRational;
use num::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Elementary functions understood by the jet evaluator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Elementary {
    Exp,
    Log,
    Sin,
    Cos,
}

impl Elementary {
    pub fn name(self) -> &'static str {
        match self {
            Elementary::Exp => "exp",
            Elementary::Log => "log",
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
        }
    }
}

/// Field the jets are computed over: `f64` for the main build,
/// `BigRational` for exact checks on polynomial and rational data.
pub trait Scalar: Clone + Debug + PartialEq + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(x: f64) -> Result<Self>;
    fn from_i64(x: i64) -> Self;
    fn to_f64(&self) -> f64;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;

    /// Taylor coefficients `g^(k)(x0)/k!`, `k = 0..=order`, of an elementary function.
    fn elementary(func: Elementary, x0: &Self, order: usize) -> Result<Vec<Self>>;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(x: f64) -> Result<Self> {
        Ok(x)
    }
    fn from_i64(x: i64) -> Self {
        x as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }

    fn elementary(func: Elementary, x0: &f64, order: usize) -> Result<Vec<f64>> {
        let x0 = *x0;
        let mut out = Vec::with_capacity(order + 1);
        match func {
            Elementary::Exp => {
                let e = x0.exp();
                let mut fact = 1.0;
                for k in 0..=order {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    out.push(e / fact);
                }
            }
            Elementary::Log => {
                if x0 <= 0.0 || !x0.is_finite() {
                    return Err(Error::domain(format!("log of nonpositive value {x0}")));
                }
                out.push(x0.ln());
                // d^k/dx^k log x / k! = (-1)^(k+1) / (k x^k)
                let mut pow = 1.0;
                for k in 1..=order {
                    pow *= x0;
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    out.push(sign / (k as f64 * pow));
                }
            }
            Elementary::Sin | Elementary::Cos => {
                // kept apart so the pair is not fused into sincos, which rounds differently
                let (s, c) = (std::hint::black_box(x0).sin(), std::hint::black_box(x0).cos());
                // derivatives cycle through sin, cos, -sin, -cos
                let cycle = if func == Elementary::Sin {
                    [s, c, -s, -c]
                } else {
                    [c, -s, -c, s]
                };
                let mut fact = 1.0;
                for k in 0..=order {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    out.push(cycle[k % 4] / fact);
                }
            }
        }
        Ok(out)
    }
}

impl Scalar for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_f64(x: f64) -> Result<Self> {
        BigRational::from_float(x)
            .ok_or_else(|| Error::Validation(format!("non-finite constant {x} in exact mode")))
    }
    fn from_i64(x: i64) -> Self {
        BigRational::from_integer(x.into())
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn elementary(func: Elementary, _x0: &Self, _order: usize) -> Result<Vec<Self>> {
        Err(Error::NotPolynomial(func.name().to_string()))
    }
}

