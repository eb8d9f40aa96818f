use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{eval_point, Expr};
use crate::datum::Domain;
use crate::error::{Error, Result};
use crate::hypotheses::Verdict;

/// `A = (a_k(x_j, y))_{j,k}` and `alpha = det A`, with `x` read from `x1` and `y` from `x2`.
pub fn n1_matrix_alpha(a: &[Expr], xs: &[f64], y: f64) -> Result<(Vec<Vec<f64>>, f64)> {
    if a.is_empty() || a.len() != xs.len() {
        return Err(Error::Validation(format!(
            "need as many points as coefficients, got {} and {}",
            xs.len(),
            a.len()
        )));
    }
    let n = a.len();
    let mut rows = vec![vec![0.0; n]; n];
    for (j, &x) in xs.iter().enumerate() {
        for (k, e) in a.iter().enumerate() {
            rows[j][k] = eval_point(e, [x, y]).map_err(|err| err.within(&format!("a{}", k + 1)))?;
        }
    }
    let m = DMatrix::from_fn(n, n, |r, c| rows[r][c]);
    let det = m.lu().determinant();
    Ok((rows, det))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct N1Report {
    /// `holds` when `alpha` is seen away from zero, consistent with the hypothesis.
    pub verdict: Verdict,
    pub max_abs_alpha: f64,
    pub argmax_x: Vec<f64>,
    pub argmax_y: f64,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

/// Sample `(x_1..x_N, y)` with every `(x_j, y)` in the domain and report the largest `|alpha|`.
pub fn n1_check(a: &[Expr], domain: &Domain, samples: usize, seed: u64, tol: f64) -> Result<N1Report> {
    if samples == 0 {
        return Err(Error::Validation("need at least one sample".into()));
    }
    let b = domain.bbox();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (f64::NEG_INFINITY, vec![], f64::NAN);
    for _ in 0..samples {
        let (xs, y) = loop {
            let y = rng.gen_range(b[1][0]..=b[1][1]);
            let xs: Vec<f64> = (0..a.len()).map(|_| rng.gen_range(b[0][0]..=b[0][1])).collect();
            if xs.iter().all(|&x| domain.contains([x, y])) {
                break (xs, y);
            }
        };
        let (_, alpha) = n1_matrix_alpha(a, &xs, y)?;
        if alpha.abs() > best.0 {
            best = (alpha.abs(), xs, y);
        }
    }
    Ok(N1Report {
        verdict: if best.0 > tol { Verdict::Holds } else { Verdict::Fails },
        max_abs_alpha: best.0,
        argmax_x: best.1,
        argmax_y: best.2,
        samples,
        seed,
        tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{c, x1, x2};

    #[test]
    fn two_by_two() {
        let (m, alpha) = n1_matrix_alpha(&[c(1.0), x1()], &[0.2, 0.7], 0.4).unwrap();
        assert_eq!(m, vec![vec![1.0, 0.2], vec![1.0, 0.7]]);
        assert!((alpha - 0.5).abs() < 1e-12);
        let (_, alpha) = n1_matrix_alpha(&[x1() * x2()], &[0.5], 0.3).unwrap();
        assert!((alpha - 0.15).abs() < 1e-15);
    }

    #[test]
    fn checks() {
        let dom = Domain::rect([0.0, 1.0], [0.0, 1.0]);
        let r = n1_check(&[c(1.0), x1()], &dom, 200, 1, 1e-9).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.max_abs_alpha > 0.1);
        let r = n1_check(&[c(1.0), c(2.0)], &dom, 200, 1, 1e-9).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        let r = n1_check(&[x1() + x2(), (x1() + x2()) * x2().exp()], &dom, 200, 1, 1e-9).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
    }
}
