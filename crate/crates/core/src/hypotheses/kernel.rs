use std::io::Write;

use nalgebra::DMatrix;
use num::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::Verdict;
use crate::analytic::{eval_jet_in, jet_len, value_grad, Frame, Jet2, Scalar, eval_point};
use crate::datum::TripleDatum;
use crate::error::{Error, Result};

/// Relative singular-value cutoff for the numerical rank.
pub const RANK_RTOL: f64 = 1e-9;
/// A singular value within this factor of the cutoff makes the rank ambiguous.
pub const RANK_GAP_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KernelMode {
    FloatSvd,
    ExactRational,
}

/// Kernel of the order-`N` jet system at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetKernelResult {
    pub center: [f64; 2],
    pub order: usize,
    pub mode: KernelMode,
    pub unknowns: usize,
    pub equations: usize,
    pub rank: usize,
    pub dim: usize,
    /// Singular values, descending (float mode only).
    pub singular_values: Vec<f64>,
    pub threshold: f64,
    /// Smallest kept singular value over largest discarded one (infinite when none is discarded).
    pub sv_gap: f64,
    /// Kernel basis; entry `[j][k]` is the coefficient of `f_j^(k) / k!`.
    pub basis: Vec<[Vec<f64>; 3]>,
}

/// Columns `(j, k)`: jet of `a_j (phi_j - phi_j(xbar))^k` through order `N`.
fn columns<S: Scalar>(d: &TripleDatum, center: [f64; 2], order: usize) -> Result<Vec<Vec<S>>> {
    let frame = Frame::planar(0.0);
    let headroom = order + crate::analytic::eval::DEFAULT_MAX_ORDER;
    let mut cols = Vec::with_capacity(3 * (order + 1));
    for j in 0..3 {
        let a: Jet2<S> = eval_jet_in(&d.a[j], &frame, center, order, headroom)
            .map_err(|e| e.within(&format!("a{}", j + 1)))?;
        let phi: Jet2<S> = eval_jet_in(&d.phi[j], &frame, center, order, headroom)
            .map_err(|e| e.within(&format!("phi{}", j + 1)))?;
        let base = phi.value().clone();
        let shifted = phi.sub(&Jet2::constant(center, order, base))?;
        let mut term = a;
        for _ in 0..=order {
            cols.push(term.coeffs().to_vec());
            term = term.mul(&shifted)?;
        }
    }
    Ok(cols)
}

fn split_basis(v: &[f64], order: usize) -> [Vec<f64>; 3] {
    let n = order + 1;
    [v[..n].to_vec(), v[n..2 * n].to_vec(), v[2 * n..].to_vec()]
}

pub fn jet_kernel_dim(d: &TripleDatum, center: [f64; 2], order: usize, mode: KernelMode) -> Result<JetKernelResult> {
    match mode {
        KernelMode::FloatSvd => kernel_float(d, center, order),
        KernelMode::ExactRational => kernel_exact(d, center, order),
    }
}

fn kernel_float(d: &TripleDatum, center: [f64; 2], order: usize) -> Result<JetKernelResult> {
    let cols = columns::<f64>(d, center, order)?;
    let m = jet_len(order);
    let n = cols.len();
    let norms: Vec<f64> = cols
        .iter()
        .map(|c| {
            let s = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            if s > 0.0 {
                s
            } else {
                1.0
            }
        })
        .collect();
    // pad with zero rows so V carries the full null space
    let rows = m.max(n);
    let mat = DMatrix::from_fn(rows, n, |r, c| if r < m { cols[c][r] / norms[c] } else { 0.0 });
    let svd = mat.svd(false, true);
    let v_t = svd.v_t.expect("requested V");
    let mut pairs: Vec<(f64, usize)> = svd.singular_values.iter().copied().zip(0..).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let smax = pairs.first().map_or(0.0, |p| p.0);
    let threshold = RANK_RTOL * smax;
    let rank = if smax == 0.0 {
        0
    } else {
        pairs.iter().filter(|p| p.0 >= threshold).count()
    };
    let kept_min = if rank > 0 { pairs[rank - 1].0 } else { f64::INFINITY };
    let dropped_max = pairs.get(rank).map_or(0.0, |p| p.0);
    let sv_gap = if dropped_max > 0.0 { kept_min / dropped_max } else { f64::INFINITY };
    if smax > 0.0 {
        if let Some(p) = pairs
            .iter()
            .find(|p| p.0 > threshold / RANK_GAP_FACTOR && p.0 < threshold * RANK_GAP_FACTOR)
        {
            return Err(Error::RankAmbiguous {
                order,
                gap_ratio: p.0 / threshold,
                threshold,
            });
        }
    }
    let basis = pairs[rank..]
        .iter()
        .map(|&(_, idx)| {
            let mut v: Vec<f64> = (0..n).map(|c| v_t[(idx, c)] / norms[c]).collect();
            let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= s);
            split_basis(&v, order)
        })
        .collect();
    Ok(JetKernelResult {
        center,
        order,
        mode: KernelMode::FloatSvd,
        unknowns: n,
        equations: m,
        rank,
        dim: n - rank,
        singular_values: pairs.iter().map(|p| p.0).collect(),
        threshold,
        sv_gap,
        basis,
    })
}

/// Reduced row echelon form in place; returns pivot columns.
pub(crate) fn rref(a: &mut [Vec<BigRational>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..a.len()).find(|&r| !Scalar::is_zero(&a[r][col])) else {
            continue;
        };
        a.swap(row, p);
        let inv = Scalar::div(&<BigRational as Scalar>::one(), &a[row][col]);
        for v in a[row].iter_mut() {
            *v = Scalar::mul(v, &inv);
        }
        for r in 0..a.len() {
            if r != row && !Scalar::is_zero(&a[r][col]) {
                let f = a[r][col].clone();
                for c in 0..ncols {
                    let delta = Scalar::mul(&f, &a[row][c]);
                    a[r][c] = Scalar::sub(&a[r][c], &delta);
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == a.len() {
            break;
        }
    }
    pivots
}

fn kernel_exact(d: &TripleDatum, center: [f64; 2], order: usize) -> Result<JetKernelResult> {
    let cols = columns::<BigRational>(d, center, order)?;
    let m = jet_len(order);
    let n = cols.len();
    let mut a: Vec<Vec<BigRational>> = (0..m).map(|r| (0..n).map(|c| cols[c][r].clone()).collect()).collect();
    let pivots = rref(&mut a, n);
    let rank = pivots.len();
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    let basis = free
        .iter()
        .map(|&f| {
            let mut v = vec![0.0; n];
            v[f] = 1.0;
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -a[r][f].to_f64();
            }
            split_basis(&v, order)
        })
        .collect();
    Ok(JetKernelResult {
        center,
        order,
        mode: KernelMode::ExactRational,
        unknowns: n,
        equations: m,
        rank,
        dim: n - rank,
        singular_values: Vec::new(),
        threshold: 0.0,
        sv_gap: f64::INFINITY,
        basis,
    })
}

/// Per-point outcome of a scan over `N = 0..=Nmax`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointScan {
    pub x: [f64; 2],
    /// `None` where the rank was ambiguous.
    pub dims: Vec<Option<usize>>,
    pub sv_gaps: Vec<f64>,
    pub verdict: Verdict,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainHypothesisScan {
    pub nmax: usize,
    pub mode: KernelMode,
    pub points: Vec<PointScan>,
    pub verdict: Verdict,
    pub summary: String,
}

/// Degeneracy at a single point, if any.
pub fn degeneracy_at(d: &TripleDatum, x: [f64; 2], tol: f64) -> Result<Option<String>> {
    let mut g = [[0.0; 2]; 3];
    for j in 0..3 {
        let a = eval_point(&d.a[j], x)?;
        if a.abs() < tol {
            return Ok(Some(format!("a{} vanishes at the point (|a{}| = {:.2e})", j + 1, j + 1, a.abs())));
        }
        g[j] = value_grad(&d.phi[j], x)?.1;
    }
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let det = g[i][0] * g[j][1] - g[i][1] * g[j][0];
        if det.abs() < tol {
            return Ok(Some(format!(
                "gradients of phi{} and phi{} are dependent at the point",
                i + 1,
                j + 1
            )));
        }
    }
    Ok(None)
}

fn scan_point(d: &TripleDatum, x: [f64; 2], nmax: usize, mode: KernelMode) -> Result<PointScan> {
    if let Some(reason) = degeneracy_at(d, x, 1e-8)? {
        return Ok(PointScan {
            x,
            dims: Vec::new(),
            sv_gaps: Vec::new(),
            verdict: Verdict::Inconclusive,
            status: "degenerate point".into(),
            reason: Some(reason),
        });
    }
    let mut dims = Vec::new();
    let mut gaps = Vec::new();
    let mut ambiguous = Vec::new();
    for n in 0..=nmax {
        match jet_kernel_dim(d, x, n, mode) {
            Ok(r) => {
                dims.push(Some(r.dim));
                gaps.push(r.sv_gap);
                if r.dim == 0 {
                    return Ok(PointScan {
                        x,
                        dims,
                        sv_gaps: gaps,
                        verdict: Verdict::Holds,
                        status: format!("holds to order {n}"),
                        reason: None,
                    });
                }
            }
            Err(Error::RankAmbiguous { gap_ratio, .. }) => {
                dims.push(None);
                gaps.push(gap_ratio);
                ambiguous.push(n);
            }
            Err(e) => return Err(e),
        }
    }
    let last = dims.iter().rev().take(2).collect::<Vec<_>>();
    let (verdict, status, reason) = match (last.first(), last.get(1)) {
        (Some(Some(a)), Some(Some(b))) if a == b && *a > 0 => (
            Verdict::Fails,
            format!("persistent kernel (dim {a})"),
            None,
        ),
        _ => (
            Verdict::Inconclusive,
            "kernel not stabilized".to_string(),
            Some(if ambiguous.is_empty() {
                format!("dimensions still decreasing at N = {nmax}")
            } else {
                format!("rank ambiguous at N = {ambiguous:?}; exact mode recommended")
            }),
        ),
    };
    Ok(PointScan {
        x,
        dims,
        sv_gaps: gaps,
        verdict,
        status,
        reason,
    })
}

/// Kernel dimensions `dim V_N`, `N = 0..=nmax`, at each point.
pub fn main_hypothesis_scan(
    d: &TripleDatum,
    points: &[[f64; 2]],
    nmax: usize,
    mode: KernelMode,
) -> Result<MainHypothesisScan> {
    let points: Vec<PointScan> = points
        .par_iter()
        .map(|&x| scan_point(d, x, nmax, mode))
        .collect::<Result<_>>()?;
    let holds = points.iter().filter(|p| p.verdict == Verdict::Holds).count();
    let fails = points.iter().filter(|p| p.verdict == Verdict::Fails).count();
    let verdict = if fails > 0 {
        Verdict::Fails
    } else if holds == points.len() && holds > 0 {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    let summary = format!(
        "{holds} of {} points hold to some order <= {nmax}; {fails} show a persistent kernel",
        points.len()
    );
    Ok(MainHypothesisScan {
        nmax,
        mode,
        points,
        verdict,
        summary,
    })
}

/// CSV with columns `x1, x2, N, dim, sv_gap`.
pub fn write_kernel_csv<W: Write>(scan: &MainHypothesisScan, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x1", "x2", "N", "dim", "sv_gap"])?;
    for p in &scan.points {
        for (n, (dim, gap)) in p.dims.iter().zip(&p.sv_gaps).enumerate() {
            w.write_record([
                p.x[0].to_string(),
                p.x[1].to_string(),
                n.to_string(),
                dim.map_or(String::new(), |d| d.to_string()),
                gap.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
