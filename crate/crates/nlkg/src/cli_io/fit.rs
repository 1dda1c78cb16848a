use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Least-squares line y ≈ slope·x + intercept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

/// A [`LinearFit`] in (log x, log y).
pub type LogLogFit = LinearFit;

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(crate::Error::LengthMismatch { expected: xs.len(), got: ys.len() });
    }
    if xs.len() < 2 {
        return Err(invalid(format!("need at least 2 points for a fit, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(crate::Error::NonFinite("fit input".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if !(sxx > 1e-300) {
        return Err(invalid("degenerate abscissae: all x equal"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Ok(LinearFit { slope, intercept, r2, points: xs.len() })
}

/// Fit of log y against log x; at least 4 strictly positive points.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() < 4 {
        return Err(invalid(format!("log-log fit needs at least 4 points, got {}", xs.len())));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(invalid("log-log fit needs positive data"));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_power() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let f = loglog_fit(&xs, &xs).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-14);
        assert!((f.r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn inverse_square_root() {
        let xs: Vec<f64> = (0..7).map(|k| 4.0 * 2f64.powi(k)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 / x.sqrt()).collect();
        assert!((loglog_fit(&xs, &ys).unwrap().slope + 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(loglog_fit(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(loglog_fit(&[1.0, 2.0, 3.0, 0.0], &[1.0; 4]).is_err());
        assert!(loglog_fit(&[2.0; 4], &[1.0, 2.0, 3.0, 4.0]).is_err());
    }
}
