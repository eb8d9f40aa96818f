use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monte Carlo draws handled by one worker; fixed so results do not depend on thread count.
pub const MC_BATCH: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Grid,
    MonteCarlo,
}

/// Where each grid cell is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CellSample {
    /// One seeded uniform point per cell: unbiased even when the set is thinner than a cell.
    #[default]
    Jittered,
    Center,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasureConfig {
    pub method: Method,
    /// Cells per axis (grid) or total samples (Monte Carlo).
    pub resolution: usize,
    pub seed: u64,
    #[serde(default)]
    pub cell_sample: CellSample,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            method: Method::Grid,
            resolution: 512,
            seed: 0,
            cell_sample: CellSample::Jittered,
        }
    }
}

impl MeasureConfig {
    pub fn grid(resolution: usize) -> Self {
        MeasureConfig { resolution, ..Self::default() }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        MeasureConfig {
            method: Method::MonteCarlo,
            resolution: samples,
            seed,
            cell_sample: CellSample::Jittered,
        }
    }

    pub fn with_cell_sample(mut self, s: CellSample) -> Self {
        self.cell_sample = s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.resolution == 0 {
            return Err(Error::Validation("resolution must be positive".into()));
        }
        Ok(())
    }

    fn uses_seed(&self) -> bool {
        self.method == Method::MonteCarlo || self.cell_sample == CellSample::Jittered
    }
}

/// Measure of a sublevel set with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub eps: f64,
    pub value: f64,
    pub method: Method,
    pub resolution: usize,
    /// Points evaluated: cells (grid) or draws (Monte Carlo).
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Measure of cells or draws where evaluation failed; not counted in `value`.
    pub excluded_mass: f64,
}

/// What a point contributes before thresholding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sample {
    /// Outside the region.
    Outside,
    /// Evaluation hit a domain error.
    Excluded,
    /// In the set for every `eps` exceeding this value (`INFINITY`: never).
    Level(f64),
}

/// Level values at every sample point of a region; thresholding them for
/// several `eps` uses the same points, so estimates nest exactly.
#[derive(Debug, Clone)]
pub struct Sampled {
    levels: Vec<f64>,
    excluded: usize,
    total: usize,
    /// Measure carried by each point.
    unit: f64,
    /// `|h| < eps` rather than `|h| <= eps`.
    strict: bool,
    cfg: MeasureConfig,
}

impl Sampled {
    /// Evaluate `f` at grid cells or random draws in the box `bbox`.
    pub fn collect<const D: usize>(
        bbox: [[f64; 2]; D],
        cfg: &MeasureConfig,
        strict: bool,
        f: impl Fn([f64; D]) -> Result<Sample> + Sync,
    ) -> Result<Self> {
        cfg.validate()?;
        let side: Vec<f64> = bbox.iter().map(|b| b[1] - b[0]).collect();
        let volume: f64 = side.iter().product();
        let (points, unit) = match cfg.method {
            Method::Grid => {
                let n = cfg.resolution;
                let total = n.checked_pow(D as u32).ok_or_else(|| Error::Validation("grid too large".into()))?;
                (total, volume / total as f64)
            }
            Method::MonteCarlo => (cfg.resolution, volume / cfg.resolution as f64),
        };
        let chunk = match cfg.method {
            Method::Grid => cfg.resolution,
            Method::MonteCarlo => MC_BATCH,
        };
        let chunks = points.div_ceil(chunk);
        let parts: Vec<Vec<Sample>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(c as u64);
                let lo = c * chunk;
                let hi = (lo + chunk).min(points);
                (lo..hi)
                    .map(|idx| {
                        let mut p = [0.0; D];
                        match cfg.method {
                            Method::Grid => {
                                let n = cfg.resolution;
                                let mut rest = idx;
                                for k in (0..D).rev() {
                                    let i = rest % n;
                                    rest /= n;
                                    let u = match cfg.cell_sample {
                                        CellSample::Center => 0.5,
                                        CellSample::Jittered => 0.0,
                                    };
                                    p[k] = bbox[k][0] + (i as f64 + u) * side[k] / n as f64;
                                }
                                if cfg.cell_sample == CellSample::Jittered {
                                    for k in 0..D {
                                        p[k] += rng.gen::<f64>() * side[k] / n as f64;
                                    }
                                }
                            }
                            Method::MonteCarlo => {
                                for k in 0..D {
                                    p[k] = bbox[k][0] + rng.gen::<f64>() * side[k];
                                }
                            }
                        }
                        f(p)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut levels = Vec::new();
        let mut excluded = 0;
        for s in parts.into_iter().flatten() {
            match s {
                Sample::Outside => {}
                Sample::Excluded => excluded += 1,
                Sample::Level(v) => levels.push(v),
            }
        }
        Ok(Sampled { levels, excluded, total: points, unit, strict, cfg: *cfg })
    }

    fn count(&self, eps: f64) -> usize {
        if self.strict {
            self.levels.iter().filter(|&&v| v < eps).count()
        } else {
            self.levels.iter().filter(|&&v| v <= eps).count()
        }
    }

    /// Membership of each in-region point, in sampling order.
    pub fn mask(&self, eps: f64) -> Vec<bool> {
        self.levels
            .iter()
            .map(|&v| if self.strict { v < eps } else { v <= eps })
            .collect()
    }

    pub fn estimate(&self, eps: f64) -> MeasureEstimate {
        let k = self.count(eps);
        let value = k as f64 * self.unit;
        let stderr = match self.cfg.method {
            Method::Grid => None,
            Method::MonteCarlo => {
                let n = self.total as f64;
                let p = k as f64 / n;
                Some((p * (1.0 - p) / n).sqrt() * self.unit * n)
            }
        };
        MeasureEstimate {
            eps,
            value,
            method: self.cfg.method,
            resolution: self.cfg.resolution,
            samples: self.total,
            stderr,
            seed: self.cfg.uses_seed().then_some(self.cfg.seed),
            excluded_mass: self.excluded as f64 * self.unit,
        }
    }
}

/// Map domain errors to an excluded sample and keep every other error.
pub(crate) fn excluding<T>(r: Result<T>) -> Result<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(Error::Domain { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}
