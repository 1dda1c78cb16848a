use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::jets::{eval_between, truncate_jet, JetField, NodeJets, PointJet, TimeInterp};
use crate::error::{invalid, Error, Result};
use crate::grid_spectral::{spectral_derivative, SpatialGrid};
use crate::nlkg_solver::{FieldState, StepObserver, StepView, Trajectory};
use crate::par::{map_slice, Exec};

/// Maximum snapshot cadence for hyperboloid sampling.
pub const MAX_SAMPLING_CADENCE: f64 = 0.25;

/// Which derivatives a slice carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceFields {
    /// u, ∂t u, ∂x u.
    Basic,
    /// Additionally every per-field jet ∂t^a ∂x^b u_ℓ with a, b ≤ 2, as needed
    /// for energies of Z u_ℓ.
    Full,
}

impl SliceFields {
    fn a_out(&self) -> usize {
        match self {
            SliceFields::Basic => 1,
            SliceFields::Full => 2,
        }
    }

    fn b_max(&self) -> usize {
        match self {
            SliceFields::Basic => 1,
            SliceFields::Full => 2,
        }
    }
}

/// Fields on the hyperboloid H_ρ = {t² − x² = ρ²} over a uniform y-grid.
#[derive(Debug, Clone)]
pub struct HyperbolicSlice {
    pub rho: f64,
    pub ygrid: SpatialGrid,
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub ut: Vec<f64>,
    pub ux: Vec<f64>,
    /// w = t^{1/2} u
    pub w: Vec<f64>,
    /// ∂ρ w = ρ^{−1}(t ∂t w + x ∂x w)
    pub wrho: Vec<f64>,
    /// Per-point jets when sampled with [`SliceFields::Full`].
    pub jets: Option<Vec<PointJet>>,
}

impl HyperbolicSlice {
    pub fn from_jets(rho: f64, ygrid: SpatialGrid, jets: Vec<PointJet>, keep: bool) -> Result<Self> {
        ygrid.check_len(jets.len())?;
        let n = jets.len();
        let mut s = Self {
            rho,
            ygrid,
            t: Vec::with_capacity(n),
            x: Vec::with_capacity(n),
            u: Vec::with_capacity(n),
            ut: Vec::with_capacity(n),
            ux: Vec::with_capacity(n),
            w: Vec::with_capacity(n),
            wrho: Vec::with_capacity(n),
            jets: None,
        };
        for j in &jets {
            s.push(j.t, j.x, j.total(0, 0), j.total(1, 0), j.total(0, 1));
        }
        if keep {
            s.jets = Some(jets);
        }
        Ok(s)
    }

    fn push(&mut self, t: f64, x: f64, u: f64, ut: f64, ux: f64) {
        let st = t.sqrt();
        let w = st * u;
        let wt = 0.5 * u / st + st * ut;
        let wx = st * ux;
        self.t.push(t);
        self.x.push(x);
        self.u.push(u);
        self.ut.push(ut);
        self.ux.push(ux);
        self.w.push(w);
        self.wrho.push((t * wt + x * wx) / self.rho);
    }

    /// Rebuilds a slice from (u, ∂t u, ∂x u) samples.
    pub fn from_fields(rho: f64, ygrid: SpatialGrid, u: &[f64], ut: &[f64], ux: &[f64]) -> Result<Self> {
        for len in [u.len(), ut.len(), ux.len()] {
            ygrid.check_len(len)?;
        }
        let mut s = Self {
            rho,
            ygrid,
            t: vec![],
            x: vec![],
            u: vec![],
            ut: vec![],
            ux: vec![],
            w: vec![],
            wrho: vec![],
            jets: None,
        };
        for (i, y) in ygrid.points().into_iter().enumerate() {
            s.push(rho * y.cosh(), rho * y.sinh(), u[i], ut[i], ux[i]);
        }
        Ok(s)
    }

    /// CSV with a `# rho=` header and columns y, u, ut, ux, w, wrho.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut out = format!("# rho={:.17e}\ny,u,ut,ux,w,wrho\n", self.rho);
        for (i, y) in self.ygrid.points().iter().enumerate() {
            let _ = writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                y, self.u[i], self.ut[i], self.ux[i], self.w[i], self.wrho[i]
            );
        }
        out
    }
}

/// Points (t, x) of H_ρ over `ygrid`.
pub fn hyperboloid_points(rho: f64, ygrid: &SpatialGrid) -> Vec<(f64, f64)> {
    ygrid.points().into_iter().map(|y| (rho * y.cosh(), rho * y.sinh())).collect()
}

fn check_points(rho: f64, ygrid: &SpatialGrid, grid: &SpatialGrid, t_lo: f64, t_hi: f64) -> Result<()> {
    if !(rho >= 1.0) {
        return Err(invalid(format!("ρ = {rho} must be at least 1")));
    }
    let ymax = ygrid.x(0).abs().max(ygrid.x(ygrid.n() - 1).abs());
    let (t, x) = (rho * ymax.cosh(), rho * ymax.sinh());
    if t > t_hi + 1e-9 || rho < t_lo - 1e-9 {
        return Err(Error::OutOfRange(format!(
            "hyperboloid ρ = {rho} with |y| ≤ {ymax} needs t ∈ [{rho}, {t}], run covers [{t_lo}, {t_hi}]"
        )));
    }
    if x >= 0.5 * grid.length() {
        return Err(Error::OutOfRange(format!(
            "hyperboloid ρ = {rho} reaches |x| = {x}, beyond the box half-width {}",
            0.5 * grid.length()
        )));
    }
    Ok(())
}

fn fields_at<'a>(snaps: &[&'a FieldState], sources: &'a [Vec<f64>]) -> Vec<JetField<'a>> {
    snaps.iter().zip(sources).map(|(s, src)| JetField { u: &s.u, v: &s.v, source: src }).collect()
}

/// Samples the fields of `trajs` (one trajectory, or u₀ and u₁) on H_ρ.
///
/// Off-grid values come from trigonometric interpolation at the bracketing
/// snapshots and quintic Hermite interpolation in t, with ∂t u and ∂t² u as
/// node derivatives (∂t² u from the equation).
pub fn sample_hyperboloid(
    trajs: &[&Trajectory],
    rho: f64,
    ygrid: &SpatialGrid,
    fields: SliceFields,
    exec: Exec,
) -> Result<HyperbolicSlice> {
    let first = trajs.first().ok_or_else(|| invalid("no trajectories"))?;
    for tr in trajs {
        if tr.grid != first.grid || tr.snapshots.len() != first.snapshots.len() || tr.dt_snap != first.dt_snap {
            return Err(invalid("trajectories do not share grid and cadence"));
        }
    }
    if first.dt_snap > MAX_SAMPLING_CADENCE + 1e-12 {
        return Err(invalid(format!("snapshot cadence {} exceeds {MAX_SAMPLING_CADENCE}", first.dt_snap)));
    }
    check_points(rho, ygrid, &first.grid, first.t_first(), first.t_last())?;
    let pts = hyperboloid_points(rho, ygrid);
    let interp = TimeInterp::Quintic;
    let a_max = fields.a_out() + interp.extra();
    let sources: Vec<Vec<f64>> = trajs.iter().map(|t| t.source()).collect();
    let mut needed: Vec<usize> = Vec::new();
    let mut brackets = Vec::with_capacity(pts.len());
    for &(t, _) in &pts {
        let i = first.bracket(t)?;
        brackets.push(i);
        needed.push(i);
        needed.push(i + 1);
    }
    needed.sort_unstable();
    needed.dedup();
    let nodes: Vec<Result<NodeJets>> = map_slice(exec, &needed, |&i| {
        let snaps: Vec<&FieldState> = trajs.iter().map(|tr| &tr.snapshots[i]).collect();
        NodeJets::compute(&first.grid, snaps[0].t, &fields_at(&snaps, &sources), a_max, fields.b_max())
    });
    let mut cache: HashMap<usize, NodeJets> = HashMap::new();
    for (i, n) in needed.into_iter().zip(nodes) {
        cache.insert(i, n?);
    }
    let work: Vec<(usize, f64, f64)> = brackets.iter().zip(&pts).map(|(&i, &(t, x))| (i, t, x)).collect();
    let jets = map_slice(exec, &work, |&(i, t, x)| eval_between(&cache[&i], &cache[&(i + 1)], t, x, interp));
    let jets = jets.into_iter().collect::<Result<Vec<_>>>()?;
    HyperbolicSlice::from_jets(rho, *ygrid, jets, fields == SliceFields::Full)
}

/// A hyperboloid to be recorded during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SliceRequest {
    pub rho: f64,
    pub ygrid: SpatialGrid,
}

/// Samples hyperboloids while the solver runs, without storing snapshots.
///
/// Node jets are built on the run's snapshot cadence; each point is
/// interpolated once the node after it has been reached.
pub struct HyperboloidRecorder {
    requests: Vec<SliceRequest>,
    fields: SliceFields,
    interp: TimeInterp,
    cadence: f64,
    exec: Exec,
    /// (t, x, request, y-index), sorted by t
    points: Vec<(f64, f64, usize, usize)>,
    next: usize,
    prev: Option<NodeJets>,
    sources: Option<Vec<Vec<f64>>>,
    results: Vec<Vec<Option<PointJet>>>,
}

impl HyperboloidRecorder {
    /// `grid`, `t_end` and `cadence` must match the run this recorder observes.
    pub fn new(
        requests: Vec<SliceRequest>,
        fields: SliceFields,
        grid: &SpatialGrid,
        t_end: f64,
        cadence: f64,
        exec: Exec,
    ) -> Result<Self> {
        if cadence > MAX_SAMPLING_CADENCE + 1e-12 {
            return Err(invalid(format!("sampling cadence {cadence} exceeds {MAX_SAMPLING_CADENCE}")));
        }
        let mut points = Vec::new();
        for (r, req) in requests.iter().enumerate() {
            check_points(req.rho, &req.ygrid, grid, 1.0, t_end)?;
            for (k, (t, x)) in hyperboloid_points(req.rho, &req.ygrid).into_iter().enumerate() {
                points.push((t, x, r, k));
            }
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let results = requests.iter().map(|r| vec![None; r.ygrid.n()]).collect();
        Ok(Self {
            requests,
            fields,
            interp: TimeInterp::Quintic,
            cadence,
            exec,
            points,
            next: 0,
            prev: None,
            sources: None,
            results,
        })
    }

    pub fn pending(&self) -> usize {
        self.points.len() - self.next
    }

    /// Slices in request order.
    pub fn finish(self) -> Result<Vec<HyperbolicSlice>> {
        if self.pending() > 0 {
            return Err(Error::OutOfRange(format!(
                "{} hyperboloid points were never reached by the run",
                self.pending()
            )));
        }
        let keep = self.fields == SliceFields::Full;
        self.requests
            .iter()
            .zip(self.results)
            .map(|(req, res)| {
                let jets = res.into_iter().map(|j| j.expect("all points evaluated")).collect();
                HyperbolicSlice::from_jets(req.rho, req.ygrid, jets, keep)
            })
            .collect()
    }
}

impl StepObserver for HyperboloidRecorder {
    fn observe(&mut self, view: &StepView) -> Result<()> {
        if !view.on_cadence {
            return Ok(());
        }
        let tc = view.t;
        let tol = 1e-9 * tc.max(1.0);
        let upcoming = self.points.get(self.next).map(|p| p.0);
        let needed = match upcoming {
            Some(tp) => tp <= tc + self.cadence + tol,
            None => false,
        };
        if !needed {
            self.prev = None;
            return Ok(());
        }
        let sources = self.sources.get_or_insert_with(|| view.components.iter().map(|c| c.source.clone()).collect());
        let jf: Vec<JetField> =
            view.components.iter().zip(sources.iter()).map(|(c, s)| JetField { u: &c.u, v: &c.v, source: s }).collect();
        let a_out = self.fields.a_out();
        let node = NodeJets::compute(view.grid, tc, &jf, a_out + self.interp.extra(), self.fields.b_max())?;
        let start = self.next;
        while self.next < self.points.len() && self.points[self.next].0 <= tc + tol {
            self.next += 1;
        }
        let batch = &self.points[start..self.next];
        let prev = self.prev.as_ref();
        let interp = self.interp;
        let jets = map_slice(self.exec, batch, |&(t, x, _, _)| {
            if (t - tc).abs() <= tol {
                Ok(truncate_jet(&node.eval(x), a_out))
            } else {
                match prev {
                    Some(p) => eval_between(p, &node, t, x, interp),
                    None => Err(invalid(format!("no node before t = {t}"))),
                }
            }
        });
        for (&(_, _, r, k), j) in batch.iter().zip(jets) {
            self.results[r][k] = Some(j?);
        }
        self.prev = Some(node);
        Ok(())
    }
}

/// Zu = t ∂x u + x ∂t u.
pub fn lorentz_boost(state: &FieldState) -> Result<Vec<f64>> {
    let ux = spectral_derivative(&state.grid, &state.u, 1)?;
    Ok(state.grid.points().iter().enumerate().map(|(i, x)| state.t * ux[i] + x * state.v[i]).collect())
}
