use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Least-squares fit of `log measure = log C + tau log eps`. `tau_hat` is an
/// instance exponent for one choice of test functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub tau_hat: f64,
    #[serde(rename = "logC_hat")]
    pub log_c_hat: f64,
    pub r2: f64,
    /// The `eps` values that entered the fit (nonzero measures only).
    pub eps: Vec<f64>,
    pub measures: Vec<f64>,
}

pub fn fit_exponent(eps: &[f64], measures: &[f64]) -> Result<ExponentFit> {
    if eps.len() != measures.len() {
        return Err(Error::Validation(format!(
            "{} eps values but {} measures",
            eps.len(),
            measures.len()
        )));
    }
    let (e, m): (Vec<f64>, Vec<f64>) = eps
        .iter()
        .zip(measures)
        .filter(|(e, m)| **e > 0.0 && **m > 0.0)
        .map(|(e, m)| (*e, *m))
        .unzip();
    if e.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: e.len() });
    }
    let xs: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = m.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData { needed: 2, got: 1 });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy <= 1e-24 * (1.0 + my * my) {
        1.0
    } else {
        let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(ExponentFit {
        tau_hat: slope,
        log_c_hat: intercept,
        r2,
        eps: e,
        measures: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dyadic() -> Vec<f64> {
        (3..=12).map(|k| 2f64.powi(-k)).collect()
    }

    #[test]
    fn strip_areas_give_slope_one() {
        let e = dyadic();
        let m: Vec<f64> = e.iter().map(|e| 4.0 * e).collect();
        let f = fit_exponent(&e, &m).unwrap();
        assert!((f.tau_hat - 1.0).abs() < 1e-12);
        assert!((f.log_c_hat - 4f64.ln()).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_and_square_root() {
        let e = dyadic();
        let f = fit_exponent(&e, &vec![2.0; e.len()]).unwrap();
        assert!(f.tau_hat.abs() < 1e-12);
        let m: Vec<f64> = e.iter().map(|e| 3.0 * e.sqrt()).collect();
        assert!((fit_exponent(&e, &m).unwrap().tau_hat - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zeros_are_dropped() {
        let err = fit_exponent(&[0.1, 0.2, 0.4], &[0.0, 0.0, 1.0]).unwrap_err();
        assert_eq!(err, Error::InsufficientData { needed: 3, got: 1 });
        let f = fit_exponent(&[0.1, 0.2, 0.4, 0.8], &[0.0, 0.2, 0.4, 0.8]).unwrap();
        assert_eq!(f.eps.len(), 3);
    }
}
