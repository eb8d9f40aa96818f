//! Helpers shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use weblab::analytic::{eval_point, Expr};
use weblab::{Domain, LinearDatum};

/// Central-difference estimate of `d^(i,j) f` with three Richardson levels.
pub fn richardson(f: &Expr, p: [f64; 2], i: usize, j: usize) -> f64 {
    fn stencil(k: usize) -> &'static [(f64, f64)] {
        match k {
            0 => &[(0.0, 1.0)],
            1 => &[(-1.0, -0.5), (1.0, 0.5)],
            2 => &[(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)],
            _ => &[(-2.0, -0.5), (-1.0, 1.0), (1.0, -1.0), (2.0, 0.5)],
        }
    }
    let diff = |h: f64| -> f64 {
        let mut s = 0.0;
        for &(u, wu) in stencil(i) {
            for &(v, wv) in stencil(j) {
                s += wu * wv * eval_point(f, [p[0] + u * h, p[1] + v * h]).unwrap();
            }
        }
        s / h.powi((i + j) as i32)
    };
    let mut row: Vec<f64> = (0..4).map(|k| diff(0.08 / 2f64.powi(k))).collect();
    for level in 1..4 {
        let w = 4f64.powi(level);
        row = row.windows(2).map(|r| (w * r[1] - r[0]) / (w - 1.0)).collect();
    }
    row[0]
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub fn linear_datum(mult: &[usize], a: Vec<Vec<Expr>>) -> LinearDatum {
    let forms = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, -1.0]];
    LinearDatum { n: mult.len(), domain: Domain::rect([0.5, 1.5], [0.5, 1.5]), phi: forms[..mult.len()].to_vec(), multiplicity: mult.to_vec(), a }
}

/// Counts per depth obtained by trying every outer and inner permutation and
/// keeping the distinct (index, divisor) choices.
pub fn brute_force_counts(mult: Vec<usize>, depth: usize) -> Vec<usize> {
    fn perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n);
                out.push(q);
            }
        }
        out
    }
    fn children(mult: &[usize]) -> Vec<Vec<usize>> {
        if mult.len() < 2 {
            return vec![];
        }
        let mut seen = BTreeSet::new();
        for outer in perms(mult.len()) {
            let last = outer[outer.len() - 1] - 1;
            for inner in perms(mult[last]) {
                seen.insert((last, inner[inner.len() - 1]));
            }
        }
        seen.into_iter()
            .map(|(p, _)| {
                let mut next: Vec<usize> = (0..mult.len()).filter(|&j| j != p).map(|j| 2 * mult[j]).collect();
                if mult[p] > 1 {
                    next.push(mult[p] - 1);
                }
                next
            })
            .collect()
    }
    let mut level = vec![mult];
    let mut counts = vec![1];
    for _ in 0..depth {
        level = level.iter().flat_map(|m| children(m)).collect();
        counts.push(level.len());
    }
    counts
}
