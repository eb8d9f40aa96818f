use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{eval_point, simplify, Expr};
use crate::datum::TripleDatum;
use crate::error::{Error, Result};
use crate::flows::{flow, FlowConfig};

/// Attempts per sample before the level sets are declared to leave `B`.
pub const DETB_MAX_TRIES: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetBPair {
    pub x: [f64; 2],
    pub x_prime: [f64; 2],
    pub flow_time: f64,
    pub det: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetBReport {
    pub samples: usize,
    pub seed: u64,
    pub max_abs: f64,
    pub argmax: DetBPair,
    pub pairs: Vec<DetBPair>,
}

/// Row expressions `(alpha W3 phi2, W3 alpha)` with `alpha = a2 / a3`.
pub fn det_b_rows(d: &TripleDatum) -> [Expr; 2] {
    let w3 = d.annihilating_field(3);
    let alpha = d.a[1].clone() / d.a[2].clone();
    [
        simplify(&(alpha.clone() * w3.apply(d.phi[1].clone()))),
        simplify(&w3.apply(alpha)),
    ]
}

pub fn det_b(rows: &[Expr; 2], x: [f64; 2], xp: [f64; 2]) -> Result<f64> {
    Ok(eval_point(&rows[0], x)? * eval_point(&rows[1], xp)? - eval_point(&rows[1], x)? * eval_point(&rows[0], xp)?)
}

/// Sample pairs on `{phi2(x) = phi2(x')}` by flowing `x` along `W2` for a
/// random time, and report the largest `|det B|`.
pub fn det_b_max(d: &TripleDatum, samples: usize, seed: u64) -> Result<DetBReport> {
    det_b_max_with(d, samples, seed, &FlowConfig::default())
}

pub fn det_b_max_with(d: &TripleDatum, samples: usize, seed: u64, cfg: &FlowConfig) -> Result<DetBReport> {
    if samples == 0 {
        return Err(Error::Validation("need at least one sample".into()));
    }
    cfg.validate()?;
    let rows = det_b_rows(d);
    let w2 = d.annihilating_field(2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = d.domain.bbox();
    let diam = ((b[0][1] - b[0][0]).powi(2) + (b[1][1] - b[1][0]).powi(2)).sqrt();
    let mut pairs = Vec::with_capacity(samples);
    for _ in 0..samples {
        let mut found = None;
        for _ in 0..DETB_MAX_TRIES {
            let x = [rng.gen_range(b[0][0]..b[0][1]), rng.gen_range(b[1][0]..b[1][1])];
            if !d.domain.contains(x) {
                continue;
            }
            let w = w2.eval_planar(x)?;
            let speed = w[0].hypot(w[1]);
            if speed == 0.0 {
                continue;
            }
            let reach = diam / speed;
            let tflow = rng.gen_range(-reach..reach);
            match flow(&w2, x, tflow, cfg, &d.domain) {
                Ok(xp) if d.domain.contains(xp) => {
                    found = Some(DetBPair { x, x_prime: xp, flow_time: tflow, det: det_b(&rows, x, xp)? });
                    break;
                }
                Ok(_) | Err(Error::DomainEscape { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
        match found {
            Some(p) => pairs.push(p),
            None => {
                return Err(Error::FlowEscape(format!(
                    "no pair on a phi2 level set stayed inside the region after {DETB_MAX_TRIES} draws"
                )))
            }
        }
    }
    let argmax = pairs
        .iter()
        .max_by(|p, q| p.det.abs().total_cmp(&q.det.abs()))
        .cloned()
        .expect("samples > 0");
    Ok(DetBReport { samples, seed, max_abs: argmax.det.abs(), argmax, pairs })
}
