use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::SpatialGrid;
use crate::error::{Error, Result};

type Plan = Arc<dyn rustfft::Fft<f64>>;

fn cached_plans(n: usize) -> (Plan, Plan) {
    static PLANS: OnceLock<Mutex<HashMap<usize, (Plan, Plan)>>> = OnceLock::new();
    let mut map = PLANS.get_or_init(|| Mutex::new(HashMap::new())).lock().unwrap_or_else(|e| e.into_inner());
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

/// Raw in-place FFT pair with private scratch space.
///
/// `forward` is unnormalised, `inverse` divides by `n`, so `inverse∘forward`
/// is the identity. Plans are shared across instances; scratch is not.
pub struct Fft {
    n: usize,
    fwd: Plan,
    inv: Plan,
    scratch: Vec<Complex64>,
}

impl Clone for Fft {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            fwd: self.fwd.clone(),
            inv: self.inv.clone(),
            scratch: vec![Complex64::default(); self.scratch.len()],
        }
    }
}

impl Fft {
    pub fn new(n: usize) -> Self {
        let (fwd, inv) = cached_plans(n);
        let len = fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len());
        Self { n, fwd, inv, scratch: vec![Complex64::default(); len] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&mut self, buf: &mut [Complex64]) {
        self.fwd.process_with_scratch(buf, &mut self.scratch);
    }

    pub fn inverse(&mut self, buf: &mut [Complex64]) {
        self.inv.process_with_scratch(buf, &mut self.scratch);
        let s = 1.0 / self.n as f64;
        for c in buf.iter_mut() {
            *c *= s;
        }
    }

    /// Forward transform of a real signal.
    pub fn forward_real(&mut self, f: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    /// Inverse transform keeping the real part.
    pub fn inverse_real(&mut self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }
}

/// ⟨s⟩ = (1 + s²)^{1/2}.
pub fn japanese(s: f64) -> f64 {
    (1.0 + s * s).sqrt()
}

/// Discrete spectrum on a [`SpatialGrid`].
///
/// `coeffs[j]` approximates the continuous transform
/// `(2π)^{−1/2} ∫ e^{−ixξ} f(x) dx` at `ξ = grid.wavenumber(j)`, so that
/// `Σ|coeffs|²·(2π/L) = Σ|f|²·dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: SpatialGrid,
    pub coeffs: Vec<Complex64>,
}

impl Spectrum {
    /// `Σ|c_j|²·(2π/L)`, the discrete Plancherel side of ∫|f|².
    pub fn l2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * 2.0 * PI / self.grid.length()
    }
}

fn shift_factor(grid: &SpatialGrid, j: usize) -> Complex64 {
    // e^{−iξ_j x₀}
    Complex64::from_polar(1.0, -grid.wavenumber(j) * grid.origin())
}

fn forward_complex(grid: &SpatialGrid, mut buf: Vec<Complex64>) -> Spectrum {
    Fft::new(grid.n()).forward(&mut buf);
    let scale = grid.spacing() / (2.0 * PI).sqrt();
    for (j, c) in buf.iter_mut().enumerate() {
        *c *= shift_factor(grid, j) * scale;
    }
    Spectrum { grid: *grid, coeffs: buf }
}

/// Transform of real samples on `grid`.
pub fn forward_transform(grid: &SpatialGrid, f: &[f64]) -> Result<Spectrum> {
    grid.check_len(f.len())?;
    Ok(forward_complex(grid, f.iter().map(|&x| Complex64::new(x, 0.0)).collect()))
}

/// Exact inverse of [`forward_transform`], returning complex samples.
pub fn inverse_transform_complex(s: &Spectrum) -> Vec<Complex64> {
    let grid = &s.grid;
    let scale = (2.0 * PI).sqrt() / grid.spacing();
    let mut buf: Vec<Complex64> =
        s.coeffs.iter().enumerate().map(|(j, c)| c * shift_factor(grid, j).conj() * scale).collect();
    Fft::new(grid.n()).inverse(&mut buf);
    buf
}

/// Inverse transform keeping the real part.
pub fn inverse_transform(s: &Spectrum) -> Vec<f64> {
    inverse_transform_complex(s).into_iter().map(|c| c.re).collect()
}

/// Multiplies every coefficient by `m(ξ_j)`.
pub fn apply_multiplier<M>(s: &Spectrum, m: M) -> Result<Spectrum>
where
    M: Fn(f64) -> Complex64,
{
    let mut coeffs = Vec::with_capacity(s.coeffs.len());
    for (j, c) in s.coeffs.iter().enumerate() {
        let xi = s.grid.wavenumber(j);
        let mj = m(xi);
        if !(mj.re.is_finite() && mj.im.is_finite()) {
            return Err(Error::NonFinite(format!("multiplier at ξ = {xi}")));
        }
        coeffs.push(c * mj);
    }
    Ok(Spectrum { grid: s.grid, coeffs })
}

/// [`apply_multiplier`] for real-valued symbols.
pub fn apply_real_multiplier<M>(s: &Spectrum, m: M) -> Result<Spectrum>
where
    M: Fn(f64) -> f64,
{
    apply_multiplier(s, |xi| Complex64::new(m(xi), 0.0))
}

/// `∂x^order f` by the multiplier `(iξ)^order`.
pub fn spectral_derivative(grid: &SpatialGrid, f: &[f64], order: u32) -> Result<Vec<f64>> {
    let s = forward_transform(grid, f)?;
    let d = apply_multiplier(&s, |xi| Complex64::new(0.0, xi).powu(order))?;
    Ok(inverse_transform(&d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> SpatialGrid {
        SpatialGrid::new(256, 40.0).unwrap()
    }

    #[test]
    fn constant_is_dc() {
        let g = grid();
        let s = forward_transform(&g, &vec![1.0; g.n()]).unwrap();
        for (j, c) in s.coeffs.iter().enumerate() {
            if j != 0 {
                assert!(c.norm() < 1e-12, "slot {j}: {c}");
            }
        }
        assert!(s.coeffs[0].norm() > 1.0);
    }

    #[test]
    fn cosine_has_two_modes() {
        let g = grid();
        let k = 5;
        let xi = g.wavenumber(k);
        let f: Vec<f64> = g.points().iter().map(|x| (xi * x).cos()).collect();
        let s = forward_transform(&g, &f).unwrap();
        let big: Vec<usize> = (0..g.n()).filter(|&j| s.coeffs[j].norm() > 1e-12).collect();
        assert_eq!(big, vec![k, g.n() - k]);
    }

    #[test]
    fn gaussian_matches_quadrature() {
        let g = grid();
        let x = g.points();
        let f: Vec<f64> = x.iter().map(|x| (-x * x).exp()).collect();
        let s = forward_transform(&g, &f).unwrap();
        // trapezoid quadrature of (2π)^{-1/2} ∫ e^{-ixξ} e^{-x²} dx on a fine independent mesh
        let m = 20001;
        let h = 24.0 / (m - 1) as f64;
        for j in 0..g.n() {
            let xi = g.wavenumber(j);
            if xi.abs() > 8.0 {
                continue;
            }
            let mut acc = Complex64::default();
            for i in 0..m {
                let xx = -12.0 + i as f64 * h;
                let w = if i == 0 || i == m - 1 { 0.5 } else { 1.0 };
                acc += Complex64::from_polar(w * (-xx * xx).exp(), -xi * xx);
            }
            acc *= h / (2.0 * PI).sqrt();
            assert!((acc - s.coeffs[j]).norm() < 1e-8, "ξ={xi}");
        }
    }

    #[test]
    fn derivative_of_sine() {
        let g = grid();
        let xi = g.wavenumber(3);
        let f: Vec<f64> = g.points().iter().map(|x| (xi * x).sin()).collect();
        let d = spectral_derivative(&g, &f, 1).unwrap();
        for (x, v) in g.points().iter().zip(&d) {
            assert!((v - xi * (xi * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_multipliers() {
        let g = grid();
        let f: Vec<f64> = g.points().iter().map(|x| (-(x - 1.0).powi(2)).exp()).collect();
        let s = forward_transform(&g, &f).unwrap();
        assert_eq!(apply_real_multiplier(&s, |_| 1.0).unwrap(), s);
        let j = apply_real_multiplier(&s, japanese).unwrap();
        assert_eq!(j.coeffs[0], s.coeffs[0]);
    }

    #[test]
    fn non_finite_multiplier_rejected() {
        let g = grid();
        let s = forward_transform(&g, &vec![0.0; g.n()]).unwrap();
        assert!(apply_real_multiplier(&s, |xi| 1.0 / xi).is_err());
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(forward_transform(&grid(), &[1.0; 10]), Err(Error::LengthMismatch { .. })));
    }
}
