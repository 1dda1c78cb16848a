use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::grid_spectral::{lp_project_high, lp_project_low, spectral_derivative};
use crate::hyperbolic::HyperbolicSlice;

/// P_{≤ρ^σ}w and ∂ρ(P_{≤ρ^σ}w) on the y-grid of the middle slice.
#[derive(Debug, Clone, PartialEq)]
pub struct LowFreqProfile {
    pub rho: f64,
    pub pw: Vec<f64>,
    pub dpw: Vec<f64>,
}

fn check_triplet(prev: &HyperbolicSlice, mid: &HyperbolicSlice, next: &HyperbolicSlice) -> Result<f64> {
    let h = mid.rho - prev.rho;
    if !(h > 0.0) || ((next.rho - mid.rho) - h).abs() > 1e-9 * mid.rho.max(1.0) {
        return Err(invalid("slices must be increasing and equally spaced in rho"));
    }
    if prev.ygrid != mid.ygrid || next.ygrid != mid.ygrid {
        return Err(invalid("slices use different y-grids"));
    }
    Ok(h)
}

/// Projects each slice with its own cutoff (ρ ± h)^σ and differences the
/// projected fields, so ∂ρ also hits the ρ-dependent multiplier.
pub fn low_freq_profile(
    prev: &HyperbolicSlice,
    mid: &HyperbolicSlice,
    next: &HyperbolicSlice,
    sigma: f64,
) -> Result<LowFreqProfile> {
    let h = check_triplet(prev, mid, next)?;
    if !(sigma > 0.0) {
        return Err(invalid(format!("σ = {sigma} must be positive")));
    }
    let g = mid.ygrid;
    let p = |s: &HyperbolicSlice| lp_project_low(&g, &s.w, s.rho.powf(sigma));
    let (lo, pw, hi) = (p(prev)?, p(mid)?, p(next)?);
    let dpw = lo.iter().zip(&hi).map(|(a, b)| (b - a) / (2.0 * h)).collect();
    Ok(LowFreqProfile { rho: mid.rho, pw, dpw })
}

/// W₊ = e^{−iρ}(∂ρPw + i Pw).
pub fn w_plus(pw: &[f64], dpw: &[f64], rho: f64) -> Result<Vec<Complex64>> {
    if pw.len() != dpw.len() {
        return Err(crate::Error::LengthMismatch { expected: pw.len(), got: dpw.len() });
    }
    let e = Complex64::from_polar(1.0, -rho);
    Ok(pw.iter().zip(dpw).map(|(&p, &d)| e * Complex64::new(d, p)).collect())
}

/// W₋ = e^{iρ}(∂ρPw − i Pw), computed independently of W₊.
pub fn w_minus(pw: &[f64], dpw: &[f64], rho: f64) -> Result<Vec<Complex64>> {
    if pw.len() != dpw.len() {
        return Err(crate::Error::LengthMismatch { expected: pw.len(), got: dpw.len() });
    }
    let e = Complex64::from_polar(1.0, rho);
    Ok(pw.iter().zip(dpw).map(|(&p, &d)| e * Complex64::new(d, -p)).collect())
}

/// M = (Pw)² + (∂ρPw)².
pub fn m_quantity(pw: &[f64], dpw: &[f64]) -> Vec<f64> {
    pw.iter().zip(dpw).map(|(p, d)| p * p + d * d).collect()
}

/// ‖P_{>ρ^σ}w‖∞ on a slice together with the Bernstein bound ρ^{−σ/2}‖∂y w‖₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HighFrequency {
    pub sup: f64,
    pub bound: f64,
    pub w_sup: f64,
}

pub fn high_frequency(slice: &HyperbolicSlice, sigma: f64) -> Result<HighFrequency> {
    let g = slice.ygrid;
    let lambda = slice.rho.powf(sigma);
    let high = lp_project_high(&g, &slice.w, lambda)?;
    let wy = spectral_derivative(&g, &slice.w, 1)?;
    let l2 = (wy.iter().map(|v| v * v).sum::<f64>() * g.spacing()).sqrt();
    Ok(HighFrequency {
        sup: high.iter().fold(0.0, |m, v| m.max(v.abs())),
        bound: l2 / lambda.sqrt(),
        w_sup: slice.w.iter().fold(0.0, |m, v| m.max(v.abs())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_spectral::SpatialGrid;

    fn slice(rho: f64, g: SpatialGrid, w: impl Fn(f64, f64) -> f64) -> HyperbolicSlice {
        let n = g.n();
        let mut s = HyperbolicSlice::from_fields(rho, g, &vec![0.0; n], &vec![0.0; n], &vec![0.0; n]).unwrap();
        s.w = g.points().iter().map(|&y| w(rho, y)).collect();
        s
    }

    #[test]
    fn w_plus_of_pure_phase() {
        let th: f64 = 0.7;
        let rho: f64 = 12.3;
        let wp = w_plus(&[(rho + th).sin()], &[(rho + th).cos()], rho).unwrap();
        assert!((wp[0] - Complex64::from_polar(1.0, th)).norm() < 1e-14);
        let wm = w_minus(&[(rho + th).sin()], &[(rho + th).cos()], rho).unwrap();
        assert!((wm[0] - wp[0].conj()).norm() < 1e-14);
    }

    #[test]
    fn constant_profile_is_unprojected() {
        let g = SpatialGrid::symmetric(64, 3.0).unwrap();
        let h = 0.01;
        let f = |r: f64, _y: f64| r.sin();
        let p = low_freq_profile(&slice(10.0 - h, g, f), &slice(10.0, g, f), &slice(10.0 + h, g, f), 0.3).unwrap();
        for (a, b) in p.pw.iter().zip(&p.dpw) {
            assert!((a - 10f64.sin()).abs() < 1e-12);
            assert!((b - 10f64.cos()).abs() < h * h / 6.0);
        }
    }
}
