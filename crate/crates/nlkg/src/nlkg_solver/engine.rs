use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::coefficients::CoefficientProfile;
use super::state::{FieldRole, FieldState, Trajectory};
use crate::error::{invalid, Error, Result};
use crate::grid_spectral::{japanese, Fft, SpatialGrid};

/// One field of a (possibly decomposed) run: samples of u_ℓ, ∂t u_ℓ and the
/// coefficient multiplying u³ in its equation, where u = Σ u_ℓ.
#[derive(Debug, Clone)]
pub struct Component {
    pub role: FieldRole,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub source: Vec<f64>,
}

/// Strang splitting N(dt/2)∘L(dt)∘N(dt/2) with tables for a fixed dt.
///
/// L is the exact linear flow through cos(dt⟨ξ⟩) and sin(dt⟨ξ⟩)/⟨ξ⟩, N the
/// exact kick v ← v + τ·B(x)u³ (u does not move under N).
#[derive(Clone)]
pub struct Stepper {
    grid: SpatialGrid,
    dt: f64,
    cos: Vec<f64>,
    sinc: Vec<f64>,
    msin: Vec<f64>,
    fft: Fft,
    buf: Vec<Complex64>,
    out: Vec<Complex64>,
    cube: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: SpatialGrid, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt != 0.0) {
            return Err(invalid(format!("time step dt = {dt} must be finite and nonzero")));
        }
        let n = grid.n();
        let mut cos = Vec::with_capacity(n);
        let mut sinc = Vec::with_capacity(n);
        let mut msin = Vec::with_capacity(n);
        for xi in grid.wavenumbers() {
            let w = japanese(xi);
            let (s, c) = (dt * w).sin_cos();
            cos.push(c);
            sinc.push(s / w);
            msin.push(-w * s);
        }
        Ok(Self {
            grid,
            dt,
            cos,
            sinc,
            msin,
            fft: Fft::new(n),
            buf: vec![Complex64::default(); n],
            out: vec![Complex64::default(); n],
            cube: vec![0.0; n],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    fn kick(&mut self, comps: &mut [Component], tau: f64) {
        let n = self.grid.n();
        for i in 0..n {
            let u: f64 = comps.iter().map(|c| c.u[i]).sum();
            self.cube[i] = u * u * u;
        }
        for c in comps.iter_mut() {
            for i in 0..n {
                c.v[i] += tau * c.source[i] * self.cube[i];
            }
        }
    }

    /// Exact linear flow over dt; u and v are packed into one complex FFT.
    fn linear(&mut self, u: &mut [f64], v: &mut [f64]) {
        let n = self.grid.n();
        for i in 0..n {
            self.buf[i] = Complex64::new(u[i], v[i]);
        }
        self.fft.forward(&mut self.buf);
        for j in 0..n {
            let z = self.buf[j];
            let zc = self.buf[(n - j) % n].conj();
            let uh = 0.5 * (z + zc);
            let vh = Complex64::new(0.0, -0.5) * (z - zc);
            let un = self.cos[j] * uh + self.sinc[j] * vh;
            let vn = self.msin[j] * uh + self.cos[j] * vh;
            self.out[j] = un + Complex64::new(0.0, 1.0) * vn;
        }
        self.fft.inverse(&mut self.out);
        for i in 0..n {
            u[i] = self.out[i].re;
            v[i] = self.out[i].im;
        }
    }

    /// Linear flow over dt only, on a single field.
    pub fn linear_step(&mut self, u: &mut [f64], v: &mut [f64]) {
        self.linear(u, v);
    }

    pub fn step(&mut self, comps: &mut [Component]) -> Result<()> {
        let half = 0.5 * self.dt;
        if comps.iter().any(|c| c.source.iter().any(|&b| b != 0.0)) {
            self.kick(comps, half);
            for c in comps.iter_mut() {
                self.linear(&mut c.u, &mut c.v);
            }
            self.kick(comps, half);
        } else {
            for c in comps.iter_mut() {
                self.linear(&mut c.u, &mut c.v);
            }
        }
        if comps.iter().any(|c| c.v.iter().any(|x| !x.is_finite())) {
            return Err(Error::NonFinite("solution blew up (NaN or infinity)".into()));
        }
        Ok(())
    }
}

/// One Strang step of the full equation. Negative dt runs backwards.
pub fn step_strang(state: &FieldState, dt: f64, c: &CoefficientProfile) -> Result<FieldState> {
    let mut stepper = Stepper::new(state.grid, dt)?;
    let mut comps =
        [Component { role: FieldRole::Full, u: state.u.clone(), v: state.v.clone(), source: c.total(&state.grid) }];
    stepper.step(&mut comps)?;
    let [c0] = comps;
    FieldState::new(state.grid, state.t + dt, c0.u, c0.v)
}

/// Time stepping parameters. `t_end − 1` and `dt_snap` must be multiples of `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolveParams {
    pub t_end: f64,
    pub dt: f64,
    pub dt_snap: f64,
}

impl EvolveParams {
    pub fn validate(&self) -> Result<()> {
        self.steps().map(|_| ())
    }

    fn steps(&self) -> Result<(usize, usize)> {
        if !(self.dt > 0.0 && self.t_end >= 1.0 && self.dt_snap > 0.0) {
            return Err(invalid(format!("bad run parameters {self:?}")));
        }
        let nsteps = ((self.t_end - 1.0) / self.dt).round();
        if (nsteps * self.dt - (self.t_end - 1.0)).abs() > 1e-9 * self.t_end {
            return Err(invalid(format!("T_end − 1 = {} is not a multiple of dt = {}", self.t_end - 1.0, self.dt)));
        }
        let stride = (self.dt_snap / self.dt).round();
        if stride < 1.0 || (stride * self.dt - self.dt_snap).abs() > 1e-9 * self.dt_snap {
            return Err(invalid(format!("snapshot cadence {} is not a multiple of dt = {}", self.dt_snap, self.dt)));
        }
        Ok((nsteps as usize, stride as usize))
    }
}

/// Fails when signals could wrap around the periodic box before `t_end`.
pub fn check_wrap(grid: &SpatialGrid, support: f64, t_end: f64) -> Result<()> {
    let required = 2.0 * (t_end - 1.0) + support + 8.0;
    if grid.length() < required {
        return Err(Error::WrapRisk { length: grid.length(), required });
    }
    Ok(())
}

/// Read-only view of the solver after a step.
pub struct StepView<'a> {
    pub t: f64,
    pub step: usize,
    pub grid: &'a SpatialGrid,
    pub components: &'a [Component],
    /// True on the snapshot cadence (and at t = 1).
    pub on_cadence: bool,
    pub last: bool,
}

impl StepView<'_> {
    /// u = Σ u_ℓ.
    pub fn total_u(&self) -> Vec<f64> {
        sum_fields(self.components, |c| &c.u)
    }

    pub fn total_v(&self) -> Vec<f64> {
        sum_fields(self.components, |c| &c.v)
    }
}

fn sum_fields<'a>(comps: &'a [Component], f: impl Fn(&'a Component) -> &'a Vec<f64>) -> Vec<f64> {
    let mut out = f(&comps[0]).clone();
    for c in &comps[1..] {
        for (o, x) in out.iter_mut().zip(f(c)) {
            *o += x;
        }
    }
    out
}

/// Callback invoked at t = 1 and after every step.
pub trait StepObserver {
    fn observe(&mut self, view: &StepView) -> Result<()>;
}

impl<F: FnMut(&StepView) -> Result<()>> StepObserver for F {
    fn observe(&mut self, view: &StepView) -> Result<()> {
        self(view)
    }
}

/// Solver state: one component for a plain run, two (u₀, u₁) for a decomposed one.
pub struct Simulation {
    pub grid: SpatialGrid,
    pub t: f64,
    pub coefficients: CoefficientProfile,
    pub components: Vec<Component>,
}

impl Simulation {
    pub fn new(data: &FieldState, c: &CoefficientProfile, decomposed: bool) -> Self {
        let grid = data.grid;
        let components = if decomposed {
            vec![
                Component {
                    role: FieldRole::Constant,
                    u: data.u.clone(),
                    v: data.v.clone(),
                    source: FieldRole::Constant.source(c, &grid),
                },
                Component {
                    role: FieldRole::Variable,
                    u: vec![0.0; grid.n()],
                    v: vec![0.0; grid.n()],
                    source: FieldRole::Variable.source(c, &grid),
                },
            ]
        } else {
            vec![Component {
                role: FieldRole::Full,
                u: data.u.clone(),
                v: data.v.clone(),
                source: FieldRole::Full.source(c, &grid),
            }]
        };
        Self { grid, t: data.t, coefficients: *c, components }
    }

    pub fn state(&self, i: usize) -> FieldState {
        let c = &self.components[i];
        FieldState { grid: self.grid, t: self.t, u: c.u.clone(), v: c.v.clone() }
    }

    pub fn total_state(&self) -> FieldState {
        FieldState {
            grid: self.grid,
            t: self.t,
            u: sum_fields(&self.components, |c| &c.u),
            v: sum_fields(&self.components, |c| &c.v),
        }
    }
}

/// Advances `sim` to `p.t_end`, calling `observer` at the start and after every step.
pub fn run(sim: &mut Simulation, p: &EvolveParams, observer: &mut dyn StepObserver) -> Result<()> {
    let (nsteps, stride) = p.steps()?;
    let t0 = sim.t;
    let mut stepper = Stepper::new(sim.grid, p.dt)?;
    observer.observe(&StepView {
        t: t0,
        step: 0,
        grid: &sim.grid,
        components: &sim.components,
        on_cadence: true,
        last: nsteps == 0,
    })?;
    for k in 1..=nsteps {
        stepper.step(&mut sim.components)?;
        sim.t = t0 + k as f64 * p.dt;
        observer.observe(&StepView {
            t: sim.t,
            step: k,
            grid: &sim.grid,
            components: &sim.components,
            on_cadence: k % stride == 0,
            last: k == nsteps,
        })?;
    }
    Ok(())
}

/// Observer that stores every component on the snapshot cadence.
pub struct TrajectoryRecorder {
    pub trajectories: Vec<Trajectory>,
}

impl TrajectoryRecorder {
    pub fn new(sim: &Simulation, p: &EvolveParams, epsilon: Option<f64>) -> Self {
        let trajectories = sim
            .components
            .iter()
            .map(|c| Trajectory {
                grid: sim.grid,
                dt: p.dt,
                dt_snap: p.dt_snap,
                coefficients: sim.coefficients,
                role: c.role,
                epsilon,
                snapshots: Vec::new(),
            })
            .collect();
        Self { trajectories }
    }
}

impl StepObserver for TrajectoryRecorder {
    fn observe(&mut self, view: &StepView) -> Result<()> {
        if view.on_cadence {
            for (traj, c) in self.trajectories.iter_mut().zip(view.components) {
                traj.snapshots.push(FieldState { grid: *view.grid, t: view.t, u: c.u.clone(), v: c.v.clone() });
            }
        }
        Ok(())
    }
}

fn measured_support(data: &FieldState) -> f64 {
    let peak = data.u.iter().chain(&data.v).fold(0.0f64, |m, x| m.max(x.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    let x = data.grid.points();
    let on: Vec<usize> = (0..x.len()).filter(|&i| data.u[i].abs().max(data.v[i].abs()) > 1e-10 * peak).collect();
    x[*on.last().unwrap()] - x[on[0]]
}

fn evolve_impl(
    data: &FieldState,
    c: &CoefficientProfile,
    p: &EvolveParams,
    decomposed: bool,
) -> Result<Vec<Trajectory>> {
    if (data.t - 1.0).abs() > 1e-12 {
        return Err(invalid(format!("data must be given at t = 1, got t = {}", data.t)));
    }
    check_wrap(&data.grid, measured_support(data), p.t_end)?;
    let mut sim = Simulation::new(data, c, decomposed);
    let mut rec = TrajectoryRecorder::new(&sim, p, None);
    run(&mut sim, p, &mut rec)?;
    Ok(rec.trajectories)
}

/// Full run from data at t = 1, storing snapshots every `p.dt_snap`.
pub fn evolve(data: &FieldState, c: &CoefficientProfile, p: &EvolveParams) -> Result<Trajectory> {
    Ok(evolve_impl(data, c, p, false)?.remove(0))
}

/// Co-evolves u₀ (source β₀u³, data (f, g)) and u₁ (source β(x)u³, zero data),
/// with u = u₀ + u₁ inside both cubic terms.
pub fn evolve_decomposed(
    data: &FieldState,
    c: &CoefficientProfile,
    p: &EvolveParams,
) -> Result<(Trajectory, Trajectory)> {
    let mut v = evolve_impl(data, c, p, true)?;
    let u1 = v.pop().unwrap();
    let u0 = v.pop().unwrap();
    Ok((u0, u1))
}
