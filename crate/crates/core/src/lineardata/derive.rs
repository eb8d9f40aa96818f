use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::{eval_point, serialize_expr, simplify, Expr};
use crate::datum::LinearDatum;
use crate::error::{Error, Result};

/// Which index plays the role of `n` and, within every index, the order of
/// its coefficients; the last coefficient of the pivot is the divisor.
/// Permutations are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationStep {
    pub outer: Vec<usize>,
    pub inner: Vec<Vec<usize>>,
}

impl DerivationStep {
    /// Pivot index `pivot` with divisor slot `slot` (both 1-based); every
    /// other index and coefficient keeps its order.
    pub fn pivot(d: &LinearDatum, pivot: usize, slot: usize) -> Result<Self> {
        if pivot == 0 || pivot > d.n {
            return Err(Error::Validation(format!("pivot {pivot} out of range 1..={}", d.n)));
        }
        let np = d.multiplicity[pivot - 1];
        if slot == 0 || slot > np {
            return Err(Error::Validation(format!("slot {slot} out of range 1..={np}")));
        }
        let mut outer: Vec<usize> = (1..=d.n).filter(|&j| j != pivot).collect();
        outer.push(pivot);
        let inner = (1..=d.n)
            .map(|j| {
                let nj = d.multiplicity[j - 1];
                if j == pivot {
                    let mut v: Vec<usize> = (1..=nj).filter(|&k| k != slot).collect();
                    v.push(slot);
                    v
                } else {
                    (1..=nj).collect()
                }
            })
            .collect();
        Ok(DerivationStep { outer, inner })
    }

    /// All canonical steps `(pivot, slot)` of a datum.
    pub fn all(d: &LinearDatum) -> Vec<Self> {
        (1..=d.n)
            .flat_map(|p| (1..=d.multiplicity[p - 1]).map(move |s| (p, s)))
            .map(|(p, s)| Self::pivot(d, p, s).expect("in range"))
            .collect()
    }

    pub fn pivot_index(&self) -> usize {
        *self.outer.last().expect("nonempty")
    }

    pub fn slot(&self) -> usize {
        let p = self.pivot_index();
        *self.inner[p - 1].last().expect("nonempty")
    }

    fn validate(&self, d: &LinearDatum) -> Result<()> {
        let is_perm = |v: &[usize], n: usize| {
            let mut s = v.to_vec();
            s.sort_unstable();
            s == (1..=n).collect::<Vec<_>>()
        };
        if !is_perm(&self.outer, d.n) {
            return Err(Error::Validation(format!("outer {:?} is not a permutation of 1..={}", self.outer, d.n)));
        }
        if self.inner.len() != d.n {
            return Err(Error::Validation("need one inner permutation per index".into()));
        }
        for (j, p) in self.inner.iter().enumerate() {
            if !is_perm(p, d.multiplicity[j]) {
                return Err(Error::Validation(format!(
                    "inner permutation {p:?} of index {} is not a permutation of 1..={}",
                    j + 1,
                    d.multiplicity[j]
                )));
            }
        }
        Ok(())
    }
}

/// `W = q d/dx1 - p d/dx2` for `phi = p x1 + q x2`.
pub fn linear_field(form: [f64; 2]) -> [Expr; 2] {
    [Expr::Const(form[1]), Expr::Const(-form[0])]
}

/// One association step. Indices appear in the order given by `step.outer`.
pub fn derive_datum(d: &LinearDatum, step: &DerivationStep) -> Result<LinearDatum> {
    d.check_shape()?;
    if d.n == 1 {
        return Err(Error::StopAtBase);
    }
    step.validate(d)?;
    let order: Vec<usize> = step.outer.iter().map(|j| j - 1).collect();
    let coeffs = |j: usize| -> Vec<Expr> { step.inner[j].iter().map(|&k| d.a[j][k - 1].clone()).collect() };
    let p = *order.last().expect("n >= 2");
    let pivot = coeffs(p);
    let np = pivot.len();
    let divisor = pivot[np - 1].clone();
    let [w1, w2] = linear_field(d.phi[p]);
    let mut phi = Vec::new();
    let mut mult = Vec::new();
    let mut a = Vec::new();
    for &j in &order[..order.len() - 1] {
        let ratios: Vec<Expr> = coeffs(j).into_iter().map(|c| simplify(&(c / divisor.clone()))).collect();
        let derived: Vec<Expr> = ratios
            .iter()
            .map(|r| simplify(&r.clone().dir(w1.clone(), w2.clone())))
            .collect();
        phi.push(d.phi[j]);
        mult.push(2 * ratios.len());
        a.push(ratios.into_iter().chain(derived).collect());
    }
    if np > 1 {
        phi.push(d.phi[p]);
        mult.push(np - 1);
        a.push(pivot[..np - 1].iter().map(|c| simplify(&(c.clone() / divisor.clone()))).collect());
    }
    Ok(LinearDatum {
        n: phi.len(),
        domain: d.domain.clone(),
        phi,
        multiplicity: mult,
        a,
    })
}

/// Structural signature: `n`, sorted multiplicities and a digest of the
/// forms and simplified coefficient trees, invariant under reordering.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Signature {
    pub n: usize,
    #[serde(rename = "N")]
    pub multiplicity: Vec<usize>,
    pub digest: String,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} N={:?} {}", self.n, self.multiplicity, &self.digest[..12])
    }
}

fn sha_hex(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

pub fn signature(d: &LinearDatum) -> Signature {
    let mut entries: Vec<String> = (0..d.n)
        .map(|j| {
            let mut hs: Vec<String> = d.a[j].iter().map(|e| sha_hex(&serialize_expr(&simplify(e)))).collect();
            hs.sort();
            format!("{:?}|{}|{}", d.phi[j], d.multiplicity[j], hs.join(","))
        })
        .collect();
    entries.sort();
    let mut mult = d.multiplicity.clone();
    mult.sort_unstable();
    Signature {
        n: d.n,
        multiplicity: mult,
        digest: sha_hex(&format!("{}#{}", d.n, entries.join(";"))),
    }
}

/// Points used to decide that a coefficient vanishes identically.
pub const ZERO_CHECK_GRID: usize = 6;

/// `(j, k)` (1-based) of coefficients that vanish at every check point, or
/// that cannot be evaluated at any of them.
pub fn zero_coefficients(d: &LinearDatum) -> Vec<[usize; 2]> {
    let pts = d.domain.grid(ZERO_CHECK_GRID);
    let mut out = Vec::new();
    for (j, row) in d.a.iter().enumerate() {
        for (k, e) in row.iter().enumerate() {
            let zero = match simplify(e) {
                Expr::Const(v) => v == 0.0 || !v.is_finite(),
                s => pts.iter().all(|&x| match eval_point(&s, x) {
                    Ok(v) => v.abs() <= 1e-12 || !v.is_finite(),
                    Err(_) => true,
                }),
            };
            if zero {
                out.push([j + 1, k + 1]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{c, x1, x2, Axis};
    use crate::datum::Domain;

    pub(crate) fn linear(n_mult: &[usize], a: Vec<Vec<Expr>>) -> LinearDatum {
        let forms = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0], [1.0, 2.0]];
        LinearDatum {
            n: n_mult.len(),
            domain: Domain::rect([0.5, 1.5], [0.5, 1.5]),
            phi: forms[..n_mult.len()].to_vec(),
            multiplicity: n_mult.to_vec(),
            a,
        }
    }

    #[test]
    fn two_index_rule_by_hand() {
        let (a11, a21) = (c(1.0) + x1() * x2(), c(2.0) + x1());
        let d = linear(&[1, 1], vec![vec![a11.clone()], vec![a21.clone()]]);
        let step = DerivationStep::pivot(&d, 2, 1).unwrap();
        assert_eq!(step.outer, vec![1, 2]);
        let s = derive_datum(&d, &step).unwrap();
        assert_eq!((s.n, s.multiplicity.clone()), (1, vec![2]));
        let r = a11 / a21;
        // phi2 = x2 gives W2 = (1, 0)
        let expect = [r.clone(), r.clone().partial(Axis::X1)];
        for x in d.domain.grid(5) {
            for k in 0..2 {
                let got = eval_point(&s.a[0][k], x).unwrap();
                let want = eval_point(&expect[k], x).unwrap();
                assert!((got - want).abs() < 1e-12);
            }
        }
        assert_eq!(derive_datum(&s, &DerivationStep::pivot(&s, 1, 1).unwrap()), Err(Error::StopAtBase));
    }

    #[test]
    fn multiplicity_rule() {
        let d = linear(&[2, 2], vec![vec![x1(), c(1.0)], vec![c(2.0), x2()]]);
        let s = derive_datum(&d, &DerivationStep::pivot(&d, 2, 2).unwrap()).unwrap();
        assert_eq!((s.n, s.multiplicity.clone()), (2, vec![4, 1]));
        let total: usize = s.multiplicity.iter().sum();
        assert_eq!(total, 2 * 4 - 2 - 1);
    }

    #[test]
    fn constant_divisor_flags_zero() {
        let d = linear(&[1, 1], vec![vec![c(1.0)], vec![c(1.0)]]);
        let s = derive_datum(&d, &DerivationStep::pivot(&d, 2, 1).unwrap()).unwrap();
        assert_eq!(s.a[0][1], c(0.0));
        assert_eq!(zero_coefficients(&s), vec![[1, 2]]);
    }

    #[test]
    fn signature_ignores_order() {
        let d = linear(&[1, 2], vec![vec![x1()], vec![x2(), c(3.0)]]);
        let e = LinearDatum {
            a: vec![vec![x1()], vec![c(3.0), x2()]],
            ..d.clone()
        };
        assert_eq!(signature(&d), signature(&e));
        let f = LinearDatum { a: vec![vec![x2()], vec![x2(), c(3.0)]], ..d.clone() };
        assert_ne!(signature(&d), signature(&f));
    }

    #[test]
    fn bad_permutation_is_rejected() {
        let d = linear(&[1, 1], vec![vec![x1()], vec![x2()]]);
        let step = DerivationStep { outer: vec![1, 1], inner: vec![vec![1], vec![1]] };
        assert!(derive_datum(&d, &step).unwrap_err().is_validation());
    }
}
