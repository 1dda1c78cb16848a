use serde::{Deserialize, Serialize};

use super::jets::{time_stack, JetField, NodeJets};
use super::slice::MAX_SAMPLING_CADENCE;
use crate::error::{invalid, Result};
use crate::grid_spectral::japanese;
use crate::nlkg_solver::{FieldState, StepObserver, StepView, Trajectory};
use crate::par::{map_range, Exec};

/// ω_j = (t + |x|)^{N−j} (|x| − t + 1)^j.
pub fn exterior_weight(t: f64, x: f64, n_reg: u32, j: u32) -> f64 {
    let ax = x.abs();
    (t + ax).powi(n_reg as i32 - j as i32) * (ax - t + 1.0).powi(j as i32)
}

/// E_ext,T split by derivative order j = |I|, plus the aggregate 𝓔_ext(T).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExteriorReport {
    pub t: f64,
    pub per_j: Vec<f64>,
    pub total: f64,
}

impl ExteriorReport {
    pub const CSV_HEADER: &'static str = "T,j,E_ext_j";

    pub fn csv_rows(&self) -> Vec<String> {
        self.per_j.iter().enumerate().map(|(j, e)| format!("{:.17e},{},{:.17e}", self.t, j, e)).collect()
    }
}

/// Σ over |I| = j of the integrands of ∂^I u and ∂^I Z u_ℓ, unweighted, one
/// entry per j. `d(ℓ, a, b)` returns ∂t^a ∂x^b u_ℓ at (t, x).
fn order_integrands(
    n_reg: u32,
    fields: usize,
    t: f64,
    x: f64,
    cone: bool,
    d: &dyn Fn(usize, usize, usize) -> f64,
) -> Vec<f64> {
    let e = |p: f64, pt: f64, px: f64| {
        let base = pt * pt + px * px + p * p;
        if cone {
            base + 2.0 * pt * px * (x / t)
        } else {
            base
        }
    };
    let total = |a: usize, b: usize| (0..fields).map(|l| d(l, a, b)).sum::<f64>();
    // ∂t^a ∂x^b (t ∂x + x ∂t) u_ℓ
    let z = |l: usize, a: usize, b: usize| {
        let mut v = t * d(l, a, b + 1) + x * d(l, a + 1, b);
        if a > 0 {
            v += a as f64 * d(l, a - 1, b + 1);
        }
        if b > 0 {
            v += b as f64 * d(l, a + 1, b - 1);
        }
        v
    };
    (0..=n_reg as usize)
        .map(|j| {
            let mut acc = 0.0;
            for a in 0..=j {
                let b = j - a;
                acc += e(total(a, b), total(a + 1, b), total(a, b + 1));
                for l in 0..fields {
                    acc += e(z(l, a, b), z(l, a + 1, b), z(l, a, b + 1));
                }
            }
            acc
        })
        .collect()
}

fn check_trajs(trajs: &[&Trajectory]) -> Result<()> {
    let first = trajs.first().ok_or_else(|| invalid("no trajectories"))?;
    if trajs.iter().any(|t| t.grid != first.grid || t.snapshots.len() != first.snapshots.len()) {
        return Err(invalid("trajectories do not share grid and cadence"));
    }
    if first.dt_snap > MAX_SAMPLING_CADENCE + 1e-12 {
        return Err(invalid(format!(
            "snapshot cadence {} too coarse for the cone integral (max {MAX_SAMPLING_CADENCE})",
            first.dt_snap
        )));
    }
    Ok(())
}

fn fields_of<'a>(snaps: &[&'a FieldState], sources: &'a [Vec<f64>]) -> Vec<JetField<'a>> {
    snaps.iter().zip(sources).map(|(s, src)| JetField { u: &s.u, v: &s.v, source: src }).collect()
}

/// 𝓔_ext(T) for every T in `times` (each a snapshot time).
///
/// The flat part is a grid sum over {⟨x⟩ ≥ T, t = T}. The cone part
/// {⟨x⟩ = t, 1 ≤ t ≤ T} is sampled at the snapshot times on both branches
/// x = ±(t² − 1)^{1/2} and integrated in x with the trapezoid rule.
pub fn exterior_energy_series(
    trajs: &[&Trajectory],
    times: &[f64],
    n_reg: u32,
    exec: Exec,
) -> Result<Vec<ExteriorReport>> {
    check_trajs(trajs)?;
    let first = trajs[0];
    let grid = first.grid;
    let sources: Vec<Vec<f64>> = trajs.iter().map(|t| t.source()).collect();
    let nf = trajs.len();
    let order = n_reg as usize + 2;
    let t_max = times.iter().cloned().fold(1.0, f64::max);
    let last = first.snapshot_at(t_max).map(|_| ((t_max - first.t_first()) / first.dt_snap).round() as usize)?;
    let nj = n_reg as usize + 1;
    // cone integrands per snapshot: (x, per-j values) for the + and − branch
    let cone: Vec<Result<(f64, Vec<f64>, Vec<f64>)>> = map_range(exec, last + 1, |i| {
        let snaps: Vec<&FieldState> = trajs.iter().map(|t| &t.snapshots[i]).collect();
        let t = snaps[0].t;
        let nodes = NodeJets::compute(&grid, t, &fields_of(&snaps, &sources), order, order)?;
        let x = (t * t - 1.0).max(0.0).sqrt();
        let branch = |xs: f64| {
            let jet = nodes.eval(xs);
            let vals = order_integrands(n_reg, nf, t, xs, true, &|l, a, b| jet.get(l, a, b));
            (0..nj).map(|j| vals[j] * exterior_weight(t, xs, n_reg, j as u32)).collect::<Vec<_>>()
        };
        Ok((x, branch(x), branch(-x)))
    });
    let cone = cone.into_iter().collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(times.len());
    for &tt in times {
        let snaps: Vec<&FieldState> = trajs.iter().map(|t| t.snapshot_at(tt)).collect::<Result<_>>()?;
        let stack = time_stack(&grid, &fields_of(&snaps, &sources), order)?;
        let mut d = vec![vec![Vec::new(); order + 1]; nf];
        for (l, dl) in d.iter_mut().enumerate() {
            for (a, da) in dl.iter_mut().enumerate() {
                *da = (0..=order - a).map(|b| stack.derivative(l, a, b as u32)).collect::<Vec<_>>();
            }
        }
        let mut per_j = vec![0.0; nj];
        for (i, x) in grid.points().into_iter().enumerate() {
            if japanese(x) < tt {
                continue;
            }
            let vals = order_integrands(n_reg, nf, tt, x, false, &|l, a, b| d[l][a][b][i]);
            for j in 0..nj {
                per_j[j] += vals[j] * exterior_weight(tt, x, n_reg, j as u32) * grid.spacing();
            }
        }
        let k_end = ((tt - first.t_first()) / first.dt_snap).round() as usize;
        for k in 0..k_end {
            let (x0, p0, m0) = &cone[k];
            let (x1, p1, m1) = &cone[k + 1];
            let h = x1 - x0;
            for j in 0..nj {
                per_j[j] += 0.5 * h * (p0[j] + p1[j] + m0[j] + m1[j]);
            }
        }
        let total = per_j.iter().sum();
        out.push(ExteriorReport { t: tt, per_j, total });
    }
    Ok(out)
}

/// 𝓔_ext(T) at one snapshot time.
pub fn exterior_energy(trajs: &[&Trajectory], t: f64, n_reg: u32, exec: Exec) -> Result<ExteriorReport> {
    Ok(exterior_energy_series(trajs, &[t], n_reg, exec)?.remove(0))
}

/// Largest ⟨x⟩^{N/2}|u|/ε over the exterior region 1 ≤ t ≤ ⟨x⟩, per dyadic
/// band 2^k ≤ ⟨x⟩ < 2^{k+1}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExteriorDecay {
    pub n_reg: u32,
    pub epsilon: f64,
    pub bands: Vec<(i32, f64)>,
}

impl ExteriorDecay {
    /// Largest ratio sup[k+1]/sup[k] between consecutive bands.
    pub fn max_growth(&self) -> f64 {
        self.bands
            .windows(2)
            .map(|w| {
                if w[0].1 > 0.0 {
                    w[1].1 / w[0].1
                } else if w[1].1 > 0.0 {
                    f64::INFINITY
                } else {
                    1.0
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn non_increasing(&self, ripple: f64) -> bool {
        self.max_growth() <= 1.0 + ripple
    }

    pub fn sup(&self) -> f64 {
        self.bands.iter().map(|b| b.1).fold(0.0, f64::max)
    }
}

/// Streaming tracker for [`ExteriorDecay`]; observes every step.
pub struct ExteriorSupTracker {
    n_reg: u32,
    epsilon: f64,
    k_min: i32,
    sups: Vec<f64>,
}

impl ExteriorSupTracker {
    pub fn new(n_reg: u32, epsilon: f64, k_min: i32, k_max: i32) -> Result<Self> {
        if !(epsilon > 0.0) || k_max < k_min {
            return Err(invalid("exterior tracker needs ε > 0 and k_min ≤ k_max"));
        }
        Ok(Self { n_reg, epsilon, k_min, sups: vec![0.0; (k_max - k_min + 1) as usize] })
    }

    pub fn update(&mut self, state_t: f64, x: &[f64], u: &[f64]) {
        let p = self.n_reg as f64 / 2.0;
        for (xi, ui) in x.iter().zip(u) {
            let jx = japanese(*xi);
            if jx < state_t {
                continue;
            }
            let k = jx.log2().floor() as i32 - self.k_min;
            if k < 0 || k as usize >= self.sups.len() {
                continue;
            }
            let v = jx.powf(p) * ui.abs() / self.epsilon;
            let s = &mut self.sups[k as usize];
            *s = s.max(v);
        }
    }

    pub fn finish(self) -> ExteriorDecay {
        ExteriorDecay {
            n_reg: self.n_reg,
            epsilon: self.epsilon,
            bands: self.sups.iter().enumerate().map(|(i, &s)| (i as i32 + self.k_min, s)).collect(),
        }
    }
}

impl StepObserver for ExteriorSupTracker {
    fn observe(&mut self, view: &StepView) -> Result<()> {
        let x = view.grid.points();
        self.update(view.t, &x, &view.total_u());
        Ok(())
    }
}

/// [`ExteriorDecay`] from the snapshots of a trajectory.
pub fn exterior_decay_check(
    traj: &Trajectory,
    n_reg: u32,
    epsilon: f64,
    k_min: i32,
    k_max: i32,
) -> Result<ExteriorDecay> {
    let mut tr = ExteriorSupTracker::new(n_reg, epsilon, k_min, k_max)?;
    let x = traj.grid.points();
    for s in &traj.snapshots {
        tr.update(s.t, &x, &s.u);
    }
    Ok(tr.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_values() {
        assert_eq!(exterior_weight(1.0, 0.0, 2, 1), 0.0);
        assert_eq!(exterior_weight(1.0, 0.0, 2, 0), 1.0);
        assert_eq!(exterior_weight(2.0, 3.0, 2, 2), 4.0);
    }
}
