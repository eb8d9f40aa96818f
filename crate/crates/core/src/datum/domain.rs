use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_MARGIN: f64 = 1.25;

fn default_margin() -> f64 {
    DEFAULT_MARGIN
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    Rect { x1: [f64; 2], x2: [f64; 2] },
    Disk { center: [f64; 2], radius: f64 },
}

/// The working region `B` together with the margin factor defining the
/// enlarged neighborhood used for flows and validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    #[serde(flatten)]
    pub shape: Shape,
    #[serde(default = "default_margin")]
    pub margin: f64,
}

impl Domain {
    pub fn rect(x1: [f64; 2], x2: [f64; 2]) -> Self {
        Domain {
            shape: Shape::Rect { x1, x2 },
            margin: DEFAULT_MARGIN,
        }
    }

    pub fn disk(center: [f64; 2], radius: f64) -> Self {
        Domain {
            shape: Shape::Disk { center, radius },
            margin: DEFAULT_MARGIN,
        }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match &self.shape {
            Shape::Rect { x1, x2 } => {
                x1.iter().chain(x2).all(|v| v.is_finite()) && x1[1] > x1[0] && x2[1] > x2[0]
            }
            Shape::Disk { center, radius } => {
                center.iter().all(|v| v.is_finite()) && radius.is_finite() && *radius > 0.0
            }
        };
        if !ok {
            return Err(Error::Validation("domain must have positive area".into()));
        }
        if !(self.margin.is_finite() && self.margin > 1.0) {
            return Err(Error::Validation(format!(
                "margin factor must exceed 1, got {}",
                self.margin
            )));
        }
        Ok(())
    }

    pub fn center(&self) -> [f64; 2] {
        match &self.shape {
            Shape::Rect { x1, x2 } => [(x1[0] + x1[1]) / 2.0, (x2[0] + x2[1]) / 2.0],
            Shape::Disk { center, .. } => *center,
        }
    }

    /// Bounding box `[[x1min, x1max], [x2min, x2max]]` of `B`.
    pub fn bbox(&self) -> [[f64; 2]; 2] {
        match &self.shape {
            Shape::Rect { x1, x2 } => [*x1, *x2],
            Shape::Disk { center, radius } => [
                [center[0] - radius, center[0] + radius],
                [center[1] - radius, center[1] + radius],
            ],
        }
    }

    /// Bounding box of `B` scaled about its center by the margin factor.
    pub fn margin_bbox(&self) -> [[f64; 2]; 2] {
        let c = self.center();
        let b = self.bbox();
        let mut out = b;
        for i in 0..2 {
            let half = (b[i][1] - b[i][0]) / 2.0 * self.margin;
            out[i] = [c[i] - half, c[i] + half];
        }
        out
    }

    pub fn bbox_area(&self) -> f64 {
        let b = self.bbox();
        (b[0][1] - b[0][0]) * (b[1][1] - b[1][0])
    }

    pub fn area(&self) -> f64 {
        match &self.shape {
            Shape::Rect { .. } => self.bbox_area(),
            Shape::Disk { radius, .. } => std::f64::consts::PI * radius * radius,
        }
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        match &self.shape {
            Shape::Rect { x1, x2 } => {
                x[0] >= x1[0] && x[0] <= x1[1] && x[1] >= x2[0] && x[1] <= x2[1]
            }
            Shape::Disk { center, radius } => {
                (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2) <= radius * radius
            }
        }
    }

    pub fn in_margin(&self, x: [f64; 2]) -> bool {
        let b = self.margin_bbox();
        x[0] >= b[0][0] && x[0] <= b[0][1] && x[1] >= b[1][0] && x[1] <= b[1][1]
    }

    /// Cell centers of an `n x n` grid over the bounding box, restricted to `B`.
    pub fn grid(&self, n: usize) -> Vec<[f64; 2]> {
        grid_over(self.bbox(), n)
            .into_iter()
            .filter(|&x| self.contains(x))
            .collect()
    }

    /// Cell centers of an `n x n` grid over the margin box.
    pub fn margin_grid(&self, n: usize) -> Vec<[f64; 2]> {
        grid_over(self.margin_bbox(), n)
    }
}

pub(crate) fn grid_over(b: [[f64; 2]; 2], n: usize) -> Vec<[f64; 2]> {
    let hx = (b[0][1] - b[0][0]) / n as f64;
    let hy = (b[1][1] - b[1][0]) / n as f64;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push([
                b[0][0] + (i as f64 + 0.5) * hx,
                b[1][0] + (j as f64 + 0.5) * hy,
            ]);
        }
    }
    out
}
