//! Space-time derivative jets of the solver fields.
//!
//! Time derivatives come from the equation itself: for a field u_ℓ with
//! source B_ℓ(x)u³ (u = Σ u_ℓ),
//!
//! ```text
//! ∂t^{a+2} u_ℓ = ∂x² ∂t^a u_ℓ − ∂t^a u_ℓ + B_ℓ ∂t^a(u³),
//! ∂t^m(u³) = Σ_{i+j+k=m} m!/(i! j! k!) ∂t^i u ∂t^j u ∂t^k u.
//! ```
//!
//! Spatial derivatives and off-grid values use the trigonometric interpolant.

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::grid_spectral::{Fft, SpatialGrid};

/// Coefficients below this fraction of the largest (⟨ξ⟩^b-weighted) one are
/// dropped from point evaluation.
const MODE_CUTOFF: f64 = 1e-14;
/// Reseed the phasor recurrence e^{iξ_j x} = z^j every this many modes.
const RESEED: usize = 64;

/// One field: samples of u_ℓ, ∂t u_ℓ and the source coefficient B_ℓ.
#[derive(Clone, Copy)]
pub struct JetField<'a> {
    pub u: &'a [f64],
    pub v: &'a [f64],
    pub source: &'a [f64],
}

/// Grid arrays ∂t^a u_ℓ for a = 0..=a_max, and their raw FFTs.
pub struct TimeStack {
    pub grid: SpatialGrid,
    /// `arrays[ℓ][a]`
    pub arrays: Vec<Vec<Vec<f64>>>,
    /// `spectra[ℓ][a]`, unnormalised FFT of `arrays[ℓ][a]`
    pub spectra: Vec<Vec<Vec<Complex64>>>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Builds ∂t^a u_ℓ on the grid for every field.
pub fn time_stack(grid: &SpatialGrid, fields: &[JetField], a_max: usize) -> Result<TimeStack> {
    let n = grid.n();
    if fields.is_empty() {
        return Err(invalid("no fields"));
    }
    for f in fields {
        grid.check_len(f.u.len())?;
        grid.check_len(f.v.len())?;
        grid.check_len(f.source.len())?;
    }
    let xi2: Vec<f64> = grid.wavenumbers().iter().map(|x| x * x).collect();
    let nonlinear = fields.iter().any(|f| f.source.iter().any(|&b| b != 0.0));
    let mut fft = Fft::new(n);
    let nf = fields.len();
    let mut arrays: Vec<Vec<Vec<f64>>> = fields.iter().map(|f| vec![f.u.to_vec(), f.v.to_vec()]).collect();
    let mut spectra: Vec<Vec<Vec<Complex64>>> = vec![Vec::new(); nf];
    // total ∂t^a u
    let mut total: Vec<Vec<f64>> = Vec::new();
    let add_total = |arrays: &Vec<Vec<Vec<f64>>>, a: usize| -> Vec<f64> {
        let mut s = arrays[0][a].clone();
        for arr in &arrays[1..] {
            for (o, v) in s.iter_mut().zip(&arr[a]) {
                *o += v;
            }
        }
        s
    };
    for a in 0..=a_max {
        if a >= 2 {
            let m = a - 2;
            let cube = if nonlinear {
                let mut c = vec![0.0; n];
                for i in 0..=m {
                    for j in 0..=(m - i) {
                        let k = m - i - j;
                        let coef = factorial(m) / (factorial(i) * factorial(j) * factorial(k));
                        for p in 0..n {
                            c[p] += coef * total[i][p] * total[j][p] * total[k][p];
                        }
                    }
                }
                Some(c)
            } else {
                None
            };
            for l in 0..nf {
                let mut buf = spectra[l][m].clone();
                for (c, x2) in buf.iter_mut().zip(&xi2) {
                    *c *= -x2;
                }
                fft.inverse(&mut buf);
                let prev = &arrays[l][m];
                let src = fields[l].source;
                let next: Vec<f64> = (0..n)
                    .map(|p| {
                        let s = cube.as_ref().map_or(0.0, |c| src[p] * c[p]);
                        buf[p].re - prev[p] + s
                    })
                    .collect();
                arrays[l].push(next);
            }
        }
        if a < arrays[0].len() {
            for l in 0..nf {
                spectra[l].push(fft.forward_real(&arrays[l][a]));
            }
            total.push(add_total(&arrays, a));
        }
    }
    for arr in arrays.iter_mut() {
        arr.truncate(a_max + 1);
    }
    for s in spectra.iter_mut() {
        s.truncate(a_max + 1);
    }
    Ok(TimeStack { grid: *grid, arrays, spectra })
}

impl TimeStack {
    /// ∂x^b ∂t^a u_ℓ on the grid.
    pub fn derivative(&self, l: usize, a: usize, b: u32) -> Vec<f64> {
        if b == 0 {
            return self.arrays[l][a].clone();
        }
        let mut buf = self.spectra[l][a].clone();
        for (j, c) in buf.iter_mut().enumerate() {
            let xi = self.grid.wavenumber(j);
            *c *= Complex64::new(0.0, xi).powu(b);
        }
        Fft::new(self.grid.n()).inverse_real(buf)
    }
}

/// Values ∂t^a ∂x^b u_ℓ at one point, for a ≤ `a_max`, b ≤ `b_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointJet {
    pub t: f64,
    pub x: f64,
    pub fields: usize,
    pub a_max: usize,
    pub b_max: usize,
    vals: Vec<f64>,
}

impl PointJet {
    fn new(t: f64, x: f64, fields: usize, a_max: usize, b_max: usize) -> Self {
        Self { t, x, fields, a_max, b_max, vals: vec![0.0; fields * (a_max + 1) * (b_max + 1)] }
    }

    fn idx(&self, l: usize, a: usize, b: usize) -> usize {
        (l * (self.a_max + 1) + a) * (self.b_max + 1) + b
    }

    /// ∂t^a ∂x^b u_ℓ
    pub fn get(&self, l: usize, a: usize, b: usize) -> f64 {
        self.vals[self.idx(l, a, b)]
    }

    /// ∂t^a ∂x^b of u = Σ u_ℓ
    pub fn total(&self, a: usize, b: usize) -> f64 {
        (0..self.fields).map(|l| self.get(l, a, b)).sum()
    }
}

/// Half-spectrum data at one node time for fast point evaluation.
pub struct NodeJets {
    pub t: f64,
    pub grid: SpatialGrid,
    pub a_max: usize,
    pub b_max: usize,
    fields: usize,
    kmax: usize,
    /// `coef[(ℓ·(a_max+1) + a)·(kmax+1) + j]`
    coef: Vec<Complex64>,
    xi: Vec<f64>,
}

impl NodeJets {
    pub fn from_stack(stack: &TimeStack, t: f64, b_max: usize) -> Self {
        let grid = stack.grid;
        let n = grid.n();
        let fields = stack.spectra.len();
        let a_max = stack.spectra[0].len() - 1;
        let half = n / 2;
        let weight = |j: usize| grid.wavenumber(j).abs().max(1.0).powi(b_max as i32);
        let mut peak = 0.0f64;
        for s in stack.spectra.iter().flatten() {
            for j in 0..half {
                let m = s[j].norm().max(if j > 0 { s[n - j].norm() } else { 0.0 }) * weight(j);
                peak = peak.max(m);
            }
        }
        let mut kmax = 0;
        for s in stack.spectra.iter().flatten() {
            for j in (kmax + 1..half).rev() {
                if s[j].norm().max(s[n - j].norm()) * weight(j) > MODE_CUTOFF * peak {
                    kmax = j;
                    break;
                }
            }
        }
        let x0 = grid.origin();
        let mut coef = Vec::with_capacity(fields * (a_max + 1) * (kmax + 1));
        for s in stack.spectra.iter().flatten() {
            for j in 0..=kmax {
                let w = if j == 0 { 1.0 } else { 2.0 } / n as f64;
                coef.push(s[j] * Complex64::from_polar(w, -grid.wavenumber(j) * x0));
            }
        }
        let xi = (0..=kmax).map(|j| grid.wavenumber(j)).collect();
        Self { t, grid, a_max, b_max, fields, kmax, coef, xi }
    }

    pub fn compute(grid: &SpatialGrid, t: f64, fields: &[JetField], a_max: usize, b_max: usize) -> Result<Self> {
        Ok(Self::from_stack(&time_stack(grid, fields, a_max)?, t, b_max))
    }

    pub fn modes(&self) -> usize {
        self.kmax + 1
    }

    /// Exact jet at the node time and position `x`.
    pub fn eval(&self, x: f64) -> PointJet {
        let na = self.a_max + 1;
        let nb = self.b_max + 1;
        let nk = self.kmax + 1;
        let mut out = PointJet::new(self.t, x, self.fields, self.a_max, self.b_max);
        let step = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * x / self.grid.length());
        let mut e = Complex64::new(1.0, 0.0);
        let mut xpow = vec![0.0; nb];
        for j in 0..nk {
            if j % RESEED == 0 {
                e = Complex64::from_polar(1.0, self.xi[j] * x);
            }
            let xi = self.xi[j];
            let mut p = 1.0;
            for xp in xpow.iter_mut() {
                *xp = p;
                p *= xi;
            }
            for fa in 0..self.fields * na {
                let c = self.coef[fa * nk + j] * e;
                let base = fa * nb;
                // Re[(iξ)^b c] cycles through Re c, −Im c, −Re c, Im c
                for b in 0..nb {
                    let r = match b % 4 {
                        0 => c.re,
                        1 => -c.im,
                        2 => -c.re,
                        _ => c.im,
                    };
                    out.vals[base + b] += r * xpow[b];
                }
            }
            e *= step;
        }
        out
    }
}

/// Hermite interpolation order in time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeInterp {
    /// Values and first time derivatives at both nodes.
    Cubic,
    /// Values, first and second time derivatives at both nodes.
    Quintic,
}

impl TimeInterp {
    pub fn extra(&self) -> usize {
        match self {
            TimeInterp::Cubic => 1,
            TimeInterp::Quintic => 2,
        }
    }

    /// Basis weights for (f0, h f0', [h² f0''], f1, h f1', [h² f1'']) at s ∈ [0, 1].
    fn weights(&self, s: f64) -> [f64; 6] {
        let s2 = s * s;
        let s3 = s2 * s;
        match self {
            TimeInterp::Cubic => {
                [1.0 - 3.0 * s2 + 2.0 * s3, s - 2.0 * s2 + s3, 0.0, 3.0 * s2 - 2.0 * s3, -s2 + s3, 0.0]
            }
            TimeInterp::Quintic => {
                let s4 = s3 * s;
                let s5 = s4 * s;
                [
                    1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5,
                    s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5,
                    0.5 * (s2 - 3.0 * s3 + 3.0 * s4 - s5),
                    10.0 * s3 - 15.0 * s4 + 6.0 * s5,
                    -4.0 * s3 + 7.0 * s4 - 3.0 * s5,
                    0.5 * (s3 - 2.0 * s4 + s5),
                ]
            }
        }
    }
}

/// Jet at (t, x) with t between the two node times, for a ≤ a_max − extra.
pub fn eval_between(n0: &NodeJets, n1: &NodeJets, t: f64, x: f64, interp: TimeInterp) -> Result<PointJet> {
    let h = n1.t - n0.t;
    if !(h > 0.0) || n0.a_max != n1.a_max || n0.b_max != n1.b_max {
        return Err(invalid("node jets are not compatible"));
    }
    let s = (t - n0.t) / h;
    if !(-1e-9..=1.0 + 1e-9).contains(&s) {
        return Err(invalid(format!("t = {t} outside [{}, {}]", n0.t, n1.t)));
    }
    let extra = interp.extra();
    if n0.a_max < extra {
        return Err(invalid("node jets lack the time derivatives needed for interpolation"));
    }
    let a_out = n0.a_max - extra;
    let j0 = n0.eval(x);
    let j1 = n1.eval(x);
    let w = interp.weights(s);
    let mut out = PointJet::new(t, x, j0.fields, a_out, j0.b_max);
    for l in 0..j0.fields {
        for a in 0..=a_out {
            for b in 0..=j0.b_max {
                let mut v = w[0] * j0.get(l, a, b)
                    + h * w[1] * j0.get(l, a + 1, b)
                    + w[3] * j1.get(l, a, b)
                    + h * w[4] * j1.get(l, a + 1, b);
                if extra == 2 {
                    v += h * h * (w[2] * j0.get(l, a + 2, b) + w[5] * j1.get(l, a + 2, b));
                }
                let i = out.idx(l, a, b);
                out.vals[i] = v;
            }
        }
    }
    Ok(out)
}

/// Restriction of a node jet to a ≤ a_out (for points that sit on a node).
pub fn truncate_jet(j: &PointJet, a_out: usize) -> PointJet {
    let mut out = PointJet::new(j.t, j.x, j.fields, a_out, j.b_max);
    for l in 0..j.fields {
        for a in 0..=a_out.min(j.a_max) {
            for b in 0..=j.b_max {
                let i = out.idx(l, a, b);
                out.vals[i] = j.get(l, a, b);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_spectral::japanese;

    #[test]
    fn single_mode_linear_jets() {
        // u = cos(ω t) cos(k x) solves the free equation with ω = ⟨k⟩
        let grid = SpatialGrid::new(64, 20.0).unwrap();
        let k = grid.wavenumber(3);
        let w = japanese(k);
        let t = 0.7;
        let x = grid.points();
        let u: Vec<f64> = x.iter().map(|x| (w * t).cos() * (k * x).cos()).collect();
        let v: Vec<f64> = x.iter().map(|x| -w * (w * t).sin() * (k * x).cos()).collect();
        let src = vec![0.0; 64];
        let nj = NodeJets::compute(&grid, t, &[JetField { u: &u, v: &v, source: &src }], 3, 2).unwrap();
        let xp = 0.123;
        let j = nj.eval(xp);
        // ∂t^a ∂x^b of cos(ωt)cos(kx)
        let dt = |a: usize| match a % 4 {
            0 => (w * t).cos(),
            1 => -(w * t).sin(),
            2 => -(w * t).cos(),
            _ => (w * t).sin(),
        } * w.powi(a as i32);
        let dx = |b: usize| match b % 4 {
            0 => (k * xp).cos(),
            1 => -(k * xp).sin(),
            2 => -(k * xp).cos(),
            _ => (k * xp).sin(),
        } * k.powi(b as i32);
        for a in 0..=3 {
            for b in 0..=2 {
                assert!((j.get(0, a, b) - dt(a) * dx(b)).abs() < 1e-12, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn cube_time_derivatives() {
        // spatially constant u: ∂t² u = −u + B u³ and ∂t³ u = −v + 3B u² v
        let grid = SpatialGrid::new(16, 10.0).unwrap();
        let (u0, v0, b) = (0.3, -0.2, 1.7);
        let u = vec![u0; 16];
        let v = vec![v0; 16];
        let s = vec![b; 16];
        let st = time_stack(&grid, &[JetField { u: &u, v: &v, source: &s }], 4).unwrap();
        let utt = -u0 + b * u0.powi(3);
        let uttt = -v0 + 3.0 * b * u0 * u0 * v0;
        let utttt = -utt + b * (6.0 * u0 * v0 * v0 + 3.0 * u0 * u0 * utt);
        assert!((st.arrays[0][2][5] - utt).abs() < 1e-15);
        assert!((st.arrays[0][3][5] - uttt).abs() < 1e-15);
        assert!((st.arrays[0][4][5] - utttt).abs() < 1e-14);
    }

    #[test]
    fn hermite_reproduces_polynomials() {
        let w = TimeInterp::Quintic.weights(0.3);
        // f(s) = s^5: f0 = 0, f0' = 0, f0'' = 0, f1 = 1, f1' = 5, f1'' = 20
        let v = w[3] + 5.0 * w[4] + 20.0 * w[5];
        assert!((v - 0.3f64.powi(5)).abs() < 1e-15);
        let c = TimeInterp::Cubic.weights(0.6);
        let v = c[3] + 3.0 * c[4];
        assert!((v - 0.6f64.powi(3)).abs() < 1e-15);
    }
}
