use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::profile::{high_frequency, low_freq_profile, m_quantity, w_plus};
use crate::cli_io::{linear_fit, loglog_fit};
use crate::error::{invalid, Error, Result};
use crate::hyperbolic::HyperbolicSlice;

/// Share of max b below which a probe is skipped by the phase fit.
pub const B_THRESHOLD: f64 = 0.1;
/// Last-dyad variation of |W₊| above which b is flagged as unconverged.
pub const B_VARIATION_LIMIT: f64 = 0.1;
/// Consecutive unwrapped phases further apart than this are flagged.
pub const UNWRAP_LIMIT: f64 = std::f64::consts::FRAC_PI_2;

/// W₊ on a ρ-sequence at a set of probe points y, plus the diagnostics
/// gathered while the slices were available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsRecord {
    pub sigma: f64,
    pub beta0: f64,
    /// Probe points, snapped to the y-grid.
    pub ylist: Vec<f64>,
    pub rholist: Vec<f64>,
    /// W₊(ρ_m, y_k), indexed [m][k].
    pub wplus: Vec<Vec<Complex64>>,
    /// e^{−iρ}(∂ρw + i w) without the frequency cutoff, [m][k].
    pub wplus_unprojected: Vec<Vec<Complex64>>,
    /// t at the probes, [m][k].
    pub t: Vec<Vec<f64>>,
    /// sup_y M(ρ_m, ·).
    pub m_sup: Vec<f64>,
    /// ‖P_{>ρ^σ}w‖∞, its Bernstein bound and ‖w‖∞, per ρ.
    pub high_freq: Vec<[f64; 3]>,
    /// Windowed ‖|W₊(ρ_m)| − |W₊(ρ_{m−1})|‖_{L²_y}, m ≥ 1.
    pub cauchy_l2: Vec<f64>,
    pub b: Vec<f64>,
    pub a: Vec<Complex64>,
    pub phase_coeff: Vec<Option<f64>>,
    pub nu_fit: Option<f64>,
}

/// Accumulates an [`AsymptoticsRecord`] one slice triplet at a time.
pub struct RecordBuilder {
    rec: AsymptoticsRecord,
    index: Vec<usize>,
    last_modulus: Option<Vec<f64>>,
}

impl RecordBuilder {
    pub fn new(probes: &[f64], sigma: f64, beta0: f64) -> Result<Self> {
        if probes.is_empty() || !(sigma > 0.0) {
            return Err(invalid("need at least one probe point and σ > 0"));
        }
        Ok(Self {
            rec: AsymptoticsRecord {
                sigma,
                beta0,
                ylist: probes.to_vec(),
                rholist: Vec::new(),
                wplus: Vec::new(),
                wplus_unprojected: Vec::new(),
                t: Vec::new(),
                m_sup: Vec::new(),
                high_freq: Vec::new(),
                cauchy_l2: Vec::new(),
                b: Vec::new(),
                a: Vec::new(),
                phase_coeff: Vec::new(),
                nu_fit: None,
            },
            index: Vec::new(),
            last_modulus: None,
        })
    }

    pub fn push(&mut self, prev: &HyperbolicSlice, mid: &HyperbolicSlice, next: &HyperbolicSlice) -> Result<()> {
        if self.rec.rholist.last().is_some_and(|&r| mid.rho <= r) {
            return Err(invalid("rho sequence must increase"));
        }
        let g = mid.ygrid;
        if self.index.is_empty() {
            for (k, &y) in self.rec.ylist.clone().iter().enumerate() {
                let i = ((y - g.origin()) / g.spacing()).round();
                if i < 0.0 || i as usize >= g.n() {
                    return Err(Error::OutOfRange(format!("probe y = {y} outside the y-grid")));
                }
                self.index.push(i as usize);
                self.rec.ylist[k] = g.x(i as usize);
            }
        }
        let p = low_freq_profile(prev, mid, next, self.rec.sigma)?;
        let wp = w_plus(&p.pw, &p.dpw, mid.rho)?;
        let wu = w_plus(&mid.w, &mid.wrho, mid.rho)?;
        let m = m_quantity(&p.pw, &p.dpw);
        let hf = high_frequency(mid, self.rec.sigma)?;
        let modulus: Vec<f64> = wp.iter().map(|z| z.norm()).collect();
        if let Some(last) = &self.last_modulus {
            let d: f64 = modulus.iter().zip(last).map(|(a, b)| (a - b) * (a - b)).sum();
            self.rec.cauchy_l2.push((d * g.spacing()).sqrt());
        }
        self.last_modulus = Some(modulus);
        let r = &mut self.rec;
        r.rholist.push(mid.rho);
        r.wplus.push(self.index.iter().map(|&i| wp[i]).collect());
        r.wplus_unprojected.push(self.index.iter().map(|&i| wu[i]).collect());
        r.t.push(self.index.iter().map(|&i| mid.t[i]).collect());
        r.m_sup.push(m.iter().cloned().fold(0.0, f64::max));
        r.high_freq.push([hf.sup, hf.bound, hf.w_sup]);
        Ok(())
    }

    pub fn finish(self) -> AsymptoticsRecord {
        self.rec
    }
}

impl AsymptoticsRecord {
    /// Builds a record from consecutive (ρ−h, ρ, ρ+h) triplets.
    pub fn build(slices: &[HyperbolicSlice], probes: &[f64], sigma: f64, beta0: f64) -> Result<Self> {
        if slices.is_empty() || !slices.len().is_multiple_of(3) {
            return Err(invalid("slices must come in (rho-h, rho, rho+h) triplets"));
        }
        let mut b = RecordBuilder::new(probes, sigma, beta0)?;
        for tr in slices.chunks(3) {
            b.push(&tr[0], &tr[1], &tr[2])?;
        }
        Ok(b.finish())
    }

    pub fn rho_max(&self) -> f64 {
        self.rholist.last().copied().unwrap_or(0.0)
    }

    /// Probe index nearest to y = 0.
    pub fn central(&self) -> usize {
        let mut best = 0;
        for (k, y) in self.ylist.iter().enumerate() {
            if y.abs() < self.ylist[best].abs() {
                best = k;
            }
        }
        best
    }

    /// Runs [`amplitude_b`], [`phase_fit`] and [`extract_a`] and stores b, c and a.
    pub fn analyze(&mut self, reference: Option<&AsymptoticsRecord>) -> Result<Analysis> {
        let amp = amplitude_b(self)?;
        self.b = amp.b.clone();
        let phase = phase_fit(self, reference)?;
        self.phase_coeff = phase.coeff.clone();
        let limit = extract_a(self)?;
        self.a = limit.a.clone();
        self.nu_fit = limit.nu;
        Ok(Analysis { amplitude: amp, phase, limit })
    }

    /// CSV rows rho, y, Re W₊, Im W₊, |W₊|, unwrapped arg W₊.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("rho,y,re_wplus,im_wplus,abs_wplus,phase\n");
        let phases: Vec<Vec<f64>> = (0..self.ylist.len()).map(|k| unwrap_phase(&self.column_arg(k)).0).collect();
        for (m, rho) in self.rholist.iter().enumerate() {
            for (k, y) in self.ylist.iter().enumerate() {
                let z = self.wplus[m][k];
                let _ = writeln!(
                    out,
                    "{rho:.17e},{y:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                    z.re,
                    z.im,
                    z.norm(),
                    phases[k][m]
                );
            }
        }
        out
    }

    fn column_arg(&self, k: usize) -> Vec<f64> {
        self.wplus.iter().map(|row| row[k].arg()).collect()
    }

    fn check_samples(&self) -> Result<()> {
        if self.rholist.len() < 8 || self.rho_max() < 2.0 * self.rholist[0] {
            return Err(invalid(format!(
                "need at least 8 rho samples spanning a dyad, got {} over [{}, {}]",
                self.rholist.len(),
                self.rholist.first().copied().unwrap_or(0.0),
                self.rho_max()
            )));
        }
        Ok(())
    }
}

/// Outputs of [`AsymptoticsRecord::analyze`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub amplitude: AmplitudeB,
    pub phase: PhaseFit,
    pub limit: LimitProfile,
}

/// b(y) = |W₊| at the largest ρ with convergence diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeB {
    pub b: Vec<f64>,
    /// (max − min)/b of |W₊| over the last dyad, per probe.
    pub variation: Vec<f64>,
    pub converged: bool,
    /// b from the unprojected (w, ∂ρw) at the central probe.
    pub b_unprojected: f64,
    /// |b − b_unprojected|/b_unprojected at the central probe.
    pub cutoff_difference: f64,
}

pub fn amplitude_b(rec: &AsymptoticsRecord) -> Result<AmplitudeB> {
    rec.check_samples()?;
    let last = rec.rholist.len() - 1;
    let from = rec.rholist.iter().position(|&r| r >= 0.5 * rec.rho_max() - 1e-9).unwrap_or(last);
    let b: Vec<f64> = rec.wplus[last].iter().map(|z| z.norm()).collect();
    let bmax = b.iter().cloned().fold(0.0, f64::max);
    let variation: Vec<f64> = (0..b.len())
        .map(|k| {
            let (lo, hi) = rec.wplus[from..]
                .iter()
                .map(|row| row[k].norm())
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
            if b[k] > 0.0 {
                (hi - lo) / b[k]
            } else {
                0.0
            }
        })
        .collect();
    let converged = variation.iter().zip(&b).all(|(v, bk)| *bk < B_THRESHOLD * bmax || *v <= B_VARIATION_LIMIT);
    let c = rec.central();
    let b_unprojected = rec.wplus_unprojected[last][c].norm();
    let cutoff_difference = if b_unprojected > 0.0 { (b[c] - b_unprojected).abs() / b_unprojected } else { 0.0 };
    Ok(AmplitudeB { b, variation, converged, b_unprojected, cutoff_difference })
}

/// Removes 2π jumps along a sequence; the flag is set when some step still
/// exceeds π/2 afterwards.
pub fn unwrap_phase(raw: &[f64]) -> (Vec<f64>, bool) {
    use std::f64::consts::PI;
    let mut out = Vec::with_capacity(raw.len());
    let mut ambiguous = false;
    for (i, &p) in raw.iter().enumerate() {
        if i == 0 {
            out.push(p);
            continue;
        }
        let prev = out[i - 1];
        let mut d = p - prev;
        d -= 2.0 * PI * (d / (2.0 * PI)).round();
        if d.abs() > UNWRAP_LIMIT {
            ambiguous = true;
        }
        out.push(prev + d);
    }
    (out, ambiguous)
}

/// Slope c(y) of unwrapped arg W₊ against log ρ over the last two dyads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseFit {
    /// None where b is below the threshold.
    pub coeff: Vec<Option<f64>>,
    pub r2: Vec<Option<f64>>,
    /// Theory: −(3β₀/8) b²/cosh y.
    pub predicted: Vec<f64>,
    pub ambiguous: Vec<bool>,
    /// Whether a linear-run reference phase was subtracted.
    pub referenced: bool,
}

/// With `reference` (a record of the linear run on the same ρ-sequence and
/// probes) the reference phase is subtracted before the fit, which removes the
/// slow phase drift of the free flow.
pub fn phase_fit(rec: &AsymptoticsRecord, reference: Option<&AsymptoticsRecord>) -> Result<PhaseFit> {
    rec.check_samples()?;
    if let Some(r) = reference {
        if r.rholist.len() != rec.rholist.len()
            || r.rholist.iter().zip(&rec.rholist).any(|(a, b)| (a - b).abs() > 1e-9)
            || r.ylist.len() != rec.ylist.len()
        {
            return Err(invalid("reference record uses a different rho sequence or probe set"));
        }
    }
    let last = rec.rholist.len() - 1;
    let b: Vec<f64> = rec.wplus[last].iter().map(|z| z.norm()).collect();
    let bmax = b.iter().cloned().fold(0.0, f64::max);
    let from = rec.rholist.iter().position(|&r| r >= 0.25 * rec.rho_max() - 1e-9).unwrap_or(0);
    let lr: Vec<f64> = rec.rholist[from..].iter().map(|r| r.ln()).collect();
    let mut out = PhaseFit {
        coeff: Vec::new(),
        r2: Vec::new(),
        predicted: Vec::new(),
        ambiguous: Vec::new(),
        referenced: reference.is_some(),
    };
    for k in 0..rec.ylist.len() {
        out.predicted.push(-0.375 * rec.beta0 * b[k] * b[k] / rec.ylist[k].cosh());
        let (mut ph, mut amb) = unwrap_phase(&rec.column_arg(k));
        if let Some(r) = reference {
            let (rp, ra) = unwrap_phase(&r.column_arg(k));
            amb |= ra;
            for (p, q) in ph.iter_mut().zip(&rp) {
                *p -= q;
            }
        }
        out.ambiguous.push(amb);
        if b[k] < B_THRESHOLD * bmax || bmax == 0.0 || lr.len() < 3 {
            out.coeff.push(None);
            out.r2.push(None);
            continue;
        }
        let fit = linear_fit(&lr, &ph[from..])?;
        out.coeff.push(Some(fit.slope));
        out.r2.push(Some(fit.r2));
    }
    Ok(out)
}

/// a(y) and the decay of |a − W₊ e^{i(3β₀/8)(b²/cosh y) log ρ}|.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitProfile {
    pub a: Vec<Complex64>,
    /// Residual at the central probe, per ρ.
    pub residual: Vec<f64>,
    /// Fitted ν at the central probe over ρ ≤ ρ_max/2.
    pub nu: Option<f64>,
    /// Set when the fitted ν is not positive.
    pub non_decay: bool,
}

fn correction(beta0: f64, b: f64, y: f64, rho: f64) -> Complex64 {
    Complex64::from_polar(1.0, 0.375 * beta0 * b * b / y.cosh() * rho.ln())
}

pub fn extract_a(rec: &AsymptoticsRecord) -> Result<LimitProfile> {
    rec.check_samples()?;
    let last = rec.rholist.len() - 1;
    let b: Vec<f64> = rec.wplus[last].iter().map(|z| z.norm()).collect();
    let a: Vec<Complex64> = (0..b.len())
        .map(|k| rec.wplus[last][k] * correction(rec.beta0, b[k], rec.ylist[k], rec.rholist[last]))
        .collect();
    let c = rec.central();
    let residual: Vec<f64> = rec
        .rholist
        .iter()
        .zip(&rec.wplus)
        .map(|(&rho, row)| (a[c] - row[c] * correction(rec.beta0, b[c], rec.ylist[c], rho)).norm())
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = rec
        .rholist
        .iter()
        .zip(&residual)
        .filter(|(r, e)| **r <= 0.5 * rec.rho_max() + 1e-9 && **e > 0.0)
        .map(|(r, e)| (*r, *e))
        .unzip();
    let nu = loglog_fit(&xs, &ys).ok().map(|f| -f.slope);
    Ok(LimitProfile { a, residual, nu, non_decay: nu.is_none_or(|v| v <= 0.0) })
}

/// Asymptotic-form prediction against the sampled solution at one probe and ρ-index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub rho: f64,
    pub y: f64,
    pub u_pred: f64,
    pub u_actual: f64,
    pub error: f64,
    /// |a e^{−iθ(ρ)} − W₊^unprojected|, the envelope of √t|u_pred − u|.
    pub envelope: f64,
}

/// u_pred = t^{−1/2} Im(e^{i(ρ − (3/8)β₀(|a|²/cosh y) log ρ)} a(y)).
pub fn asymptotic_reconstruction(rec: &AsymptoticsRecord, m: usize, k: usize) -> Result<Reconstruction> {
    if rec.a.len() != rec.ylist.len() {
        return Err(invalid("record has no limit profile; run analyze first"));
    }
    let (rho, y) = (*rec.rholist.get(m).ok_or_else(|| Error::OutOfRange(format!("rho index {m}")))?, rec.ylist[k]);
    let a = rec.a[k];
    let t = rec.t[m][k];
    let theta = rho - 0.375 * rec.beta0 * a.norm_sqr() / y.cosh() * rho.ln();
    let e = Complex64::from_polar(1.0, theta);
    let u_pred = (e * a).im / t.sqrt();
    let wu = rec.wplus_unprojected[m][k];
    let u_actual = (Complex64::from_polar(1.0, rho) * wu).im / t.sqrt();
    let envelope = (a * Complex64::from_polar(1.0, theta - rho) - wu).norm();
    Ok(Reconstruction { rho, y, u_pred, u_actual, error: (u_pred - u_actual).abs(), envelope })
}
