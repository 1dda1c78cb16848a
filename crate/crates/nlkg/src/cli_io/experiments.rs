use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use super::config::{Experiment, ExperimentConfig};
use super::fit::loglog_fit;
use super::report::{Artifact, ExperimentOutput, ExperimentReport, Rule};
use crate::asymptotics::{asymptotic_reconstruction, AsymptoticsRecord, B_THRESHOLD};
use crate::error::{invalid, Result};
use crate::grid_spectral::{japanese, SpatialGrid};
use crate::hyperbolic::{
    energy_report, exterior_energy_series, hyperbolic_residual, EnergyReport, ExteriorReport, ExteriorSupTracker,
    HyperbolicSlice, HyperboloidRecorder, SliceFields, SliceRequest, TRUNCATION_TOL,
};
use crate::nlkg_solver::{
    bulk_growth_norms_state, hamiltonian, make_initial_data, run, weighted_u1_norms_state, BetaFamily,
    CoefficientProfile, EvolveParams, FieldState, InitialData, Simulation, StepObserver, StepView, TrajectoryRecorder,
};
use crate::propagator::{decay_table, DecayTable, Derivative, InputNorm, PowerIteration, Sign, WeightedOperatorSpec};

struct Outcome {
    rules: Vec<Rule>,
    values: BTreeMap<String, f64>,
    artifacts: Vec<Artifact>,
}

impl Outcome {
    fn new() -> Self {
        Self { rules: Vec::new(), values: BTreeMap::new(), artifacts: Vec::new() }
    }

    fn value(&mut self, k: &str, v: f64) {
        self.values.insert(k.to_string(), v);
    }

    fn table(&mut self, name: &str, header: &str, rows: impl IntoIterator<Item = String>) {
        let mut s = String::from(header);
        s.push('\n');
        for r in rows {
            s.push_str(&r);
            s.push('\n');
        }
        self.artifacts.push(Artifact { name: name.to_string(), contents: s });
    }
}

/// Runs the experiment named in `cfg` after validating it.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let start = Instant::now();
    let out = match cfg.experiment {
        Experiment::LocalDecay => local_decay(cfg)?,
        Experiment::InteriorDecay => interior_decay(cfg)?,
        Experiment::ExteriorDecay => exterior_decay(cfg)?,
        Experiment::EnergyGrowth => energy_growth(cfg)?,
        Experiment::WeightedU1 => weighted_u1(cfg)?,
        Experiment::ModifiedScattering => modified_scattering(cfg)?,
        Experiment::Convergence => convergence(cfg)?,
    };
    let passed = out.rules.iter().all(|r| r.pass);
    let tables = out.artifacts.iter().map(|a| a.name.clone()).collect();
    Ok(ExperimentOutput {
        report: ExperimentReport {
            experiment: cfg.experiment.name().to_string(),
            config: cfg.clone(),
            rules: out.rules,
            values: out.values,
            tables,
            wall_clock_seconds: start.elapsed().as_secs_f64(),
            passed,
        },
        artifacts: out.artifacts,
    })
}

fn initial(cfg: &ExperimentConfig, grid: &SpatialGrid, epsilon: f64) -> Result<InitialData> {
    make_initial_data(&cfg.data.spec_with_epsilon(epsilon), grid)
}

fn local_decay(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grid = cfg.grid()?;
    let s = &cfg.sweep;
    let opts = PowerIteration { tol: s.tol, max_iter: s.max_iter, seed: s.seed };
    let spec = |a: f64, derivative: Derivative, input_norm: InputNorm| WeightedOperatorSpec {
        a,
        b: 0.0,
        derivative,
        input_norm,
        t: 0.0,
        sign: Sign::Plus,
        band_limit: Some(s.band_limit),
    };
    let variants = [
        ("local_decay_slope", spec(1.0, Derivative::None, InputNorm::L2), -0.5, 0.1),
        ("local_decay_dx_over_japanese_slope", spec(2.0, Derivative::DxOverJapanese, InputNorm::L2), -1.5, 0.15),
        ("local_decay_dx_h1_slope", spec(2.0, Derivative::Dx, InputNorm::H1), -1.5, 0.15),
    ];
    let mut out = Outcome::new();
    let mut rows = Vec::new();
    for (name, sp, target, tol) in variants {
        let table = decay_table(&sp, &s.times, &grid, &opts, cfg.run.exec)?;
        out.rules.push(Rule::within(name, table.fit.slope, target, tol).with_r2(table.fit.r2));
        rows.extend(table.csv_rows());
    }
    out.table("local_decay.csv", DecayTable::CSV_HEADER, rows);
    Ok(out)
}

fn interior_decay(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grid = cfg.grid()?;
    let data = initial(cfg, &grid, cfg.data.epsilon)?;
    let c = cfg.coefficients.profile();
    let t_min = cfg.measure.t_min;
    let x = grid.points();
    let mut series: Vec<(f64, f64)> = Vec::new();
    let mut obs = |v: &StepView<'_>| -> Result<()> {
        if v.t >= t_min - 1e-9 {
            let u = v.total_u();
            let m = x.iter().zip(&u).filter(|(x, _)| japanese(**x) <= v.t).fold(0.0f64, |m, (_, u)| m.max(u.abs()));
            series.push((v.t, v.t.sqrt() * m));
        }
        Ok(())
    };
    let mut sim = Simulation::new(&data.state, &c, false);
    run(&mut sim, &cfg.evolve_params(), &mut obs)?;
    let first = series.first().ok_or_else(|| invalid("run ended before t_min"))?.1;
    let max = series.iter().map(|s| s.1).fold(0.0, f64::max);
    let min = series.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    let mut out = Outcome::new();
    out.rules.push(Rule::at_most("interior_flatness_max", max / first, 1.25));
    out.rules.push(Rule::at_most("interior_flatness_min", first / min, 1.25));
    out.value("epsilon", data.epsilon);
    out.value("sup_at_t_min", first);
    let stride = (cfg.run.dt_snap / cfg.run.dt).round().max(1.0) as usize;
    out.table(
        "interior_decay.csv",
        "t,sqrt_t_sup_abs_u",
        series.iter().step_by(stride).map(|(t, v)| format!("{t:.17e},{v:.17e}")),
    );
    Ok(out)
}

fn exterior_decay(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grid = cfg.grid()?;
    let data = initial(cfg, &grid, cfg.data.epsilon)?;
    let c = cfg.coefficients.profile();
    let m = &cfg.measure;
    let n_reg = cfg.data.regularity;
    let p = cfg.evolve_params();
    let mut sim = Simulation::new(&data.state, &c, true);
    let mut rec = TrajectoryRecorder::new(&sim, &p, Some(data.epsilon));
    let mut tracker = ExteriorSupTracker::new(n_reg, data.epsilon, m.k_min, m.k_max)?;
    {
        let mut obs = |v: &StepView<'_>| -> Result<()> {
            rec.observe(v)?;
            tracker.observe(v)
        };
        run(&mut sim, &p, &mut obs)?;
    }
    let bands = tracker.finish();
    let trajs: Vec<_> = rec.trajectories.iter().collect();
    let energies = exterior_energy_series(&trajs, &m.energy_times, n_reg, cfg.run.exec)?;
    drop(rec);

    let lin = CoefficientProfile::linear();
    let mut sim = Simulation::new(&data.state, &lin, false);
    let mut lin_tracker = ExteriorSupTracker::new(n_reg, data.epsilon, m.k_min, m.k_max)?;
    run(&mut sim, &p, &mut lin_tracker)?;
    let lin_bands = lin_tracker.finish();

    let mut out = Outcome::new();
    out.rules.push(Rule::at_most("exterior_band_growth", bands.max_growth(), 1.3));
    out.rules.push(Rule::at_most("exterior_band_growth_linear", lin_bands.max_growth(), 1.3));
    let e0 = energies[0].total;
    let emax = energies.iter().map(|e| e.total).fold(0.0, f64::max);
    out.rules.push(Rule::at_most("exterior_energy_bounded", emax / e0, 1.5));
    out.value("epsilon", data.epsilon);
    out.value("exterior_sup", bands.sup());
    out.value("exterior_energy_first", e0);
    out.table(
        "exterior_bands.csv",
        "k,sup_weighted_u_over_eps,sup_weighted_u_over_eps_linear",
        bands.bands.iter().zip(&lin_bands.bands).map(|(a, b)| format!("{},{:.17e},{:.17e}", a.0, a.1, b.1)),
    );
    out.table("exterior_energy.csv", ExteriorReport::CSV_HEADER, energies.iter().flat_map(|e| e.csv_rows()));
    Ok(out)
}

/// Streams a run through a hyperboloid recorder and returns the slices in request order.
fn sample_run(
    data: &FieldState,
    c: &CoefficientProfile,
    p: &EvolveParams,
    requests: Vec<SliceRequest>,
    fields: SliceFields,
    decomposed: bool,
    cfg: &ExperimentConfig,
) -> Result<Vec<HyperbolicSlice>> {
    let mut rec = HyperboloidRecorder::new(requests, fields, &data.grid, p.t_end, p.dt_snap, cfg.run.exec)?;
    let mut sim = Simulation::new(data, c, decomposed);
    run(&mut sim, p, &mut rec)?;
    rec.finish()
}

fn energy_growth(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grid = cfg.grid()?;
    let data = initial(cfg, &grid, cfg.data.epsilon)?;
    let c = cfg.coefficients.profile();
    let h = &cfg.hyperboloid;
    let rhos = h.rho_list();
    // slices need a bracketing snapshot on both sides of the last point
    let req = |rhos: &[f64], t_avail: f64| {
        rhos.iter().map(|&rho| Ok(SliceRequest { rho, ygrid: h.window(rho, t_avail)? })).collect::<Result<Vec<_>>>()
    };
    let energies = |slices: Vec<HyperbolicSlice>| {
        slices.iter().map(|s| energy_report(s, TRUNCATION_TOL)).collect::<Result<Vec<EnergyReport>>>()
    };
    let p = cfg.evolve_params();
    let t_avail = p.t_end - 2.0 * p.dt_snap;
    let nl = energies(sample_run(&data.state, &c, &p, req(&rhos, t_avail)?, SliceFields::Full, true, cfg)?)?;

    let ref_h = crate::cli_io::config::HyperboloidConfig {
        rho_min: cfg.measure.reference_rho_min,
        rho_max: cfg.measure.reference_rho_max,
        ..*h
    };
    let ref_req = req(&ref_h.rho_list(), t_avail)?;
    let t_ref = ref_req.iter().map(|r| r.rho * (r.ygrid.length() / 2.0).cosh()).fold(0.0, f64::max);
    // whole multiple of the snapshot cadence past the last sample point
    let t_ref = 1.0 + ((t_ref - 1.0) / p.dt_snap).ceil() * p.dt_snap + 2.0 * p.dt_snap;
    let p_ref = EvolveParams { t_end: t_ref.min(p.t_end), ..p };
    let lin = energies(sample_run(
        &data.state,
        &CoefficientProfile::linear(),
        &p_ref,
        ref_req,
        SliceFields::Full,
        true,
        cfg,
    )?)?;

    let fit = loglog_fit(&rhos, &nl.iter().map(|e| e.script_e).collect::<Vec<_>>())?;
    let lmax = lin.iter().map(|e| e.script_e).fold(0.0, f64::max);
    let lmin = lin.iter().map(|e| e.script_e).fold(f64::INFINITY, f64::min);
    let mut out = Outcome::new();
    out.rules.push(Rule::at_most("energy_growth_exponent", fit.slope, 0.1).with_r2(fit.r2));
    out.rules.push(Rule::at_most("free_energy_variation", lmax / lmin - 1.0, 0.02));
    out.value("epsilon", data.epsilon);
    out.table("energy_growth.csv", EnergyReport::CSV_HEADER, nl.iter().map(|e| e.csv_row()));
    out.table("energy_free.csv", EnergyReport::CSV_HEADER, lin.iter().map(|e| e.csv_row()));
    Ok(out)
}

fn weighted_u1(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grid = cfg.grid()?;
    let data = initial(cfg, &grid, cfg.data.epsilon)?;
    let c = cfg.coefficients.profile();
    let m = &cfg.measure;
    let times: Vec<f64> = (0..m.samples).map(|k| m.t_first * 2f64.powf(k as f64 / m.samples_per_dyad as f64)).collect();
    let window = 2.0 * PI;
    if times.last().is_some_and(|t| t + window > cfg.run.t_end + 1e-9) {
        return Err(invalid(format!(
            "run.t_end = {} ends before the last envelope window [{}, {}]",
            cfg.run.t_end,
            times.last().unwrap(),
            times.last().unwrap() + window
        )));
    }
    let radius = m.radius;
    // upper envelopes over [t_k, t_k + 2π]: four u₁ norms, ‖χ∂t u‖, ‖χZu‖
    let mut env = vec![[0.0f64; 6]; times.len()];
    let mut raw = vec![[0.0f64; 6]; times.len()];
    let mut obs = |v: &StepView<'_>| -> Result<()> {
        let hits: Vec<usize> =
            (0..times.len()).filter(|&k| v.t >= times[k] - 1e-9 && v.t <= times[k] + window).collect();
        if hits.is_empty() {
            return Ok(());
        }
        let c1 = &v.components[1];
        let u1 = FieldState { grid: *v.grid, t: v.t, u: c1.u.clone(), v: c1.v.clone() };
        let n = weighted_u1_norms_state(&u1, radius)?;
        let total = FieldState { grid: *v.grid, t: v.t, u: v.total_u(), v: v.total_v() };
        let (dtu, zu) = bulk_growth_norms_state(&total, radius)?;
        let vals = [n[0], n[1], n[2], n[3], dtu, zu];
        for k in hits {
            for (e, x) in env[k].iter_mut().zip(vals) {
                *e = e.max(x);
            }
            if (v.t - times[k]).abs() < 0.5 * v.grid.spacing().clamp(1e-9, 1e-6) + 1e-9 {
                raw[k] = vals;
            }
        }
        Ok(())
    };
    let mut sim = Simulation::new(&data.state, &c, true);
    run(&mut sim, &cfg.evolve_params(), &mut obs)?;
    let slope =
        |col: usize, series: &[[f64; 6]]| loglog_fit(&times, &series.iter().map(|r| r[col]).collect::<Vec<_>>());
    let mut out = Outcome::new();
    let f = [slope(0, &env)?, slope(1, &env)?, slope(2, &env)?, slope(3, &env)?, slope(4, &env)?, slope(5, &env)?];
    out.rules.push(Rule::within("u1_weighted_slope", f[0].slope, -0.5, 0.15).with_r2(f[0].r2));
    out.rules.push(Rule::within("u1_weighted_dx_slope", f[1].slope, -1.5, 0.2).with_r2(f[1].r2));
    out.rules.push(Rule::at_most("u1_weighted_dxx_slope", f[2].slope, -1.2).with_r2(f[2].r2));
    out.rules.push(Rule::at_most("u1_weighted_dxdt_slope", f[3].slope, -1.2).with_r2(f[3].r2));
    out.rules.push(Rule::at_most("bulk_dt_u_growth_exponent", f[4].slope, 0.05).with_r2(f[4].r2));
    out.rules.push(Rule::at_most("bulk_zu_growth_exponent", f[5].slope, 0.65).with_r2(f[5].r2));
    out.value("epsilon", data.epsilon);
    if raw.iter().all(|r| r.iter().all(|v| *v > 0.0)) {
        for (i, name) in ["u1", "dx_u1", "dxx_u1", "dxdt_u1", "dt_u", "zu"].iter().enumerate() {
            if let Ok(fr) = slope(i, &raw) {
                out.value(&format!("raw_slope_{name}"), fr.slope);
            }
        }
    }
    out.table(
        "weighted_u1.csv",
        "t,u1,dx_u1,dxx_u1,dxdt_u1,chi_dt_u,chi_zu",
        times.iter().zip(&env).map(|(t, e)| {
            format!("{t:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}", e[0], e[1], e[2], e[3], e[4], e[5])
        }),
    );
    Ok(out)
}

/// Slice requests (ρ − h, ρ, ρ + h) for every ρ of the sequence.
fn triplet_requests(rhos: &[f64], h: f64, ygrid: SpatialGrid) -> Vec<SliceRequest> {
    rhos.iter().flat_map(|&r| [r - h, r, r + h]).map(|rho| SliceRequest { rho, ygrid }).collect()
}

fn probes(ygrid: &SpatialGrid, y_max: f64, stride: usize) -> Vec<f64> {
    let mid = ygrid.n() / 2;
    let stride = stride.max(1);
    let mut out = vec![ygrid.x(mid)];
    let mut k = 1;
    while mid + k * stride < ygrid.n() && k * stride <= mid {
        let (a, b) = (ygrid.x(mid - k * stride), ygrid.x(mid + k * stride));
        if a.abs().max(b.abs()) > y_max + 1e-12 {
            break;
        }
        out.insert(0, a);
        out.push(b);
        k += 1;
    }
    out
}

fn modified_scattering(cfg: &ExperimentConfig) -> Result<Outcome> {
    let grid = cfg.grid()?;
    let a = &cfg.asymptotics;
    let h = &cfg.hyperboloid;
    let ygrid = h.ygrid()?;
    let rhos = h.rho_list();
    let probe_y = probes(&ygrid, a.probe_y_max, a.probe_stride);
    let p = cfg.evolve_params();
    let c = cfg.coefficients.profile();
    let c_var =
        CoefficientProfile::new(0.0, BetaFamily::Gaussian { amp: a.variable_beta_amp, width: a.variable_beta_width });
    let data = initial(cfg, &grid, cfg.data.epsilon)?;
    let data_alt = initial(cfg, &grid, a.epsilon_alt)?;
    let slices = |d: &InitialData, c: &CoefficientProfile| {
        sample_run(&d.state, c, &p, triplet_requests(&rhos, h.h, ygrid), SliceFields::Basic, false, cfg)
    };
    let record = |s: &[HyperbolicSlice], sigma: f64, beta0: f64| AsymptoticsRecord::build(s, &probe_y, sigma, beta0);

    let lin_slices = slices(&data, &CoefficientProfile::linear())?;
    let mut lin = record(&lin_slices, a.sigma, 0.0)?;
    drop(lin_slices);
    let lin_an = lin.analyze(None)?;

    let nl_slices = slices(&data, &c)?;
    let mut nl = record(&nl_slices, a.sigma, c.beta0)?;
    let lo = record(&nl_slices, a.sigma_low, c.beta0)?;
    let hi = record(&nl_slices, a.sigma_high, c.beta0)?;
    drop(nl_slices);
    let nl_an = nl.analyze(Some(&lin))?;

    let mut alt = record(&slices(&data_alt, &c)?, a.sigma, c.beta0)?;
    let alt_an = alt.analyze(Some(&lin))?;
    let mut var = record(&slices(&data, &c_var)?, a.sigma, 0.0)?;
    let var_an = var.analyze(Some(&lin))?;

    let k0 = nl.central();
    let b0 = nl.b[k0];
    let cb = |an: &crate::asymptotics::Analysis, rec: &AsymptoticsRecord| {
        let k = rec.central();
        an.phase.coeff[k].map(|c| c / (rec.b[k] * rec.b[k])).unwrap_or(f64::NAN)
    };
    let cb_nl = cb(&nl_an, &nl);
    let cb_alt = cb(&alt_an, &alt);
    let cb_var = cb(&var_an, &var);
    let bmax = nl.b.iter().cloned().fold(0.0, f64::max);
    let amp_err =
        nl.a.iter()
            .zip(&nl.b)
            .filter(|(_, b)| **b >= B_THRESHOLD * bmax)
            .map(|(a, b)| (a.norm() - b).abs() / b)
            .fold(0.0, f64::max);
    let var_max = nl_an
        .amplitude
        .variation
        .iter()
        .zip(&nl.b)
        .filter(|(_, b)| **b >= B_THRESHOLD * bmax)
        .map(|(v, _)| *v)
        .fold(0.0, f64::max);
    let ambiguous = nl_an.phase.ambiguous.iter().zip(&nl.b).filter(|(f, b)| **f && **b >= B_THRESHOLD * bmax).count();
    let b_lo = lo.wplus.last().map(|r| r[lo.central()].norm()).unwrap_or(f64::NAN);
    let b_hi = hi.wplus.last().map(|r| r[hi.central()].norm()).unwrap_or(f64::NAN);
    let eps2 = data.epsilon * data.epsilon;
    let m_sup = nl.m_sup.iter().cloned().fold(0.0, f64::max);
    let rmax = nl.rho_max();
    let dyad_max = |lo: f64, hi: f64| {
        nl.rholist
            .iter()
            .zip(&nl.m_sup)
            .filter(|(r, _)| **r >= lo - 1e-9 && **r <= hi + 1e-9)
            .map(|(_, m)| *m)
            .fold(0.0, f64::max)
    };
    let m_growth = dyad_max(rmax / 2.0, rmax) / dyad_max(rmax / 4.0, rmax / 2.0);
    let hf_last = nl.high_freq.last().copied().unwrap_or([f64::NAN; 3]);
    let bernstein = nl.high_freq.iter().map(|h| if h[1] > 0.0 { h[0] / h[1] } else { 0.0 }).fold(0.0, f64::max);
    let recon: Vec<_> =
        (0..nl.rholist.len()).map(|m| asymptotic_reconstruction(&nl, m, k0)).collect::<Result<Vec<_>>>()?;
    let (rx, ry): (Vec<f64>, Vec<f64>) =
        recon.iter().filter(|r| r.rho >= rmax / 4.0 - 1e-9 && r.envelope > 0.0).map(|r| (r.rho, r.envelope)).unzip();
    let recon_fit = loglog_fit(&rx, &ry)?;

    let mut out = Outcome::new();
    out.rules.push(
        Rule::within("phase_coefficient_beta0", cb_nl, -0.375, 0.0375).with_r2(nl_an.phase.r2[k0].unwrap_or(f64::NAN)),
    );
    out.rules.push(Rule::within("phase_coefficient_variable", cb_var, 0.0, 0.02));
    out.rules.push(Rule::at_most("amplitude_consistency", amp_err, 0.02));
    out.rules.push(Rule::at_most("amplitude_convergence", var_max, 0.1));
    out.rules.push(Rule::at_most("free_amplitude_convergence", lin_an.amplitude.variation[lin.central()], 0.03));
    out.rules.push(Rule::at_most("cutoff_independence", nl_an.amplitude.cutoff_difference, 0.02));
    out.rules.push(Rule::at_most("sigma_robustness", (b_lo - b_hi).abs() / b0, 0.03));
    out.rules.push(Rule::at_most("epsilon_invariance", ((cb_alt - cb_nl) / cb_nl).abs(), 0.15));
    out.rules.push(Rule::at_most("m_uniform_bound", m_sup / eps2, 30.0));
    out.rules.push(Rule::at_most("m_last_dyad_growth", m_growth, 1.05));
    out.rules.push(Rule::at_most("high_frequency_share", hf_last[0] / hf_last[2], 0.1));
    out.rules.push(Rule::at_most("bernstein_ratio", bernstein, 1.0));
    out.rules.push(Rule::at_most("phase_unwrap_ambiguities", ambiguous as f64, 0.0));
    out.rules.push(Rule::at_least("remainder_exponent_nu", nl_an.limit.nu.unwrap_or(f64::NAN), 0.0));
    out.rules.push(Rule::at_least("reconstruction_decay_exponent", -recon_fit.slope, 0.1).with_r2(recon_fit.r2));
    out.value("epsilon", data.epsilon);
    out.value("epsilon_alt", data_alt.epsilon);
    out.value("b0", b0);
    out.value("phase_coeff0", nl_an.phase.coeff[k0].unwrap_or(f64::NAN));
    out.value("phase_coeff0_over_b2_alt", cb_alt);
    out.value("phase_coeff0_over_b2_variable", cb_var);
    out.value("nu", nl_an.limit.nu.unwrap_or(f64::NAN));
    out.value("sigma", a.sigma);
    out.value("b0_sigma_low", b_lo);
    out.value("b0_sigma_high", b_hi);
    if let Some(cd) = nl.cauchy_l2.last() {
        out.value("b_cauchy_l2_last", *cd);
    }
    for (name, rec) in
        [("wplus.csv", &nl), ("wplus_free.csv", &lin), ("wplus_eps_alt.csv", &alt), ("wplus_variable.csv", &var)]
    {
        out.artifacts.push(Artifact { name: name.to_string(), contents: rec.to_csv() });
    }
    out.table(
        "reconstruction.csv",
        "rho,y,u_pred,u_actual,error,envelope",
        recon.iter().map(|r| {
            format!(
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                r.rho, r.y, r.u_pred, r.u_actual, r.error, r.envelope
            )
        }),
    );
    out.table(
        "amplitude.csv",
        "y,b,re_a,im_a,phase_coeff,variation",
        (0..nl.ylist.len()).map(|k| {
            format!(
                "{:.17e},{:.17e},{:.17e},{:.17e},{},{:.17e}",
                nl.ylist[k],
                nl.b[k],
                nl.a[k].re,
                nl.a[k].im,
                nl.phase_coeff[k].map(|c| format!("{c:.17e}")).unwrap_or_default(),
                nl_an.amplitude.variation[k]
            )
        }),
    );
    let summary = serde_json::json!({
        "sigma": a.sigma,
        "y": nl.ylist,
        "b": nl.b,
        "a": nl.a.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
        "c": nl.phase_coeff,
        "nu": nl.nu_fit,
    });
    out.artifacts.push(Artifact { name: "asymptotics.json".into(), contents: serde_json::to_string_pretty(&summary)? });
    Ok(out)
}

fn final_state(data: &FieldState, c: &CoefficientProfile, p: &EvolveParams) -> Result<FieldState> {
    let mut sim = Simulation::new(data, c, false);
    run(&mut sim, p, &mut |_: &StepView<'_>| Ok(()))?;
    Ok(sim.total_state())
}

fn convergence(cfg: &ExperimentConfig) -> Result<Outcome> {
    let cv = &cfg.convergence;
    let c = cfg.coefficients.profile();
    let mut out = Outcome::new();

    let sgrid = SpatialGrid::new(cv.strang_n, cv.strang_length)?;
    let sdata = initial(cfg, &sgrid, cfg.data.epsilon)?;
    crate::nlkg_solver::check_wrap(&sgrid, cfg.data.spec().support_width(), cv.strang_t_end)?;
    let h0 = hamiltonian(&sdata.state, &c)?;
    let mut finals = Vec::new();
    for k in 0..3 {
        let dt = cv.strang_dt / 2f64.powi(k);
        let p = EvolveParams { t_end: cv.strang_t_end, dt, dt_snap: dt };
        finals.push(final_state(&sdata.state, &c, &p)?);
    }
    let e1 = finals[0].max_abs_diff(&finals[1]);
    let e2 = finals[1].max_abs_diff(&finals[2]);
    let order = (e1 / e2).log2();
    let drift: Vec<f64> = finals.iter().map(|s| hamiltonian(s, &c).map(|h| (h - h0).abs())).collect::<Result<_>>()?;
    out.rules.push(Rule::within("strang_order", order, 2.0, 0.2));
    out.rules.push(Rule::within("hamiltonian_drift_ratio", drift[0] / drift[1], 4.0, 1.0));
    out.value("strang_error_coarse", e1);
    out.value("strang_error_fine", e2);

    let grid = cfg.grid()?;
    let data = initial(cfg, &grid, cfg.data.epsilon)?;
    let ygrid = cfg.hyperboloid.ygrid()?;
    let mut residuals = Vec::new();
    for k in 0..2 {
        let s = 2f64.powi(-k);
        let p = EvolveParams { t_end: cfg.run.t_end, dt: cfg.run.dt * s, dt_snap: cfg.run.dt_snap * s };
        let h = cfg.hyperboloid.h * s;
        let sl =
            sample_run(&data.state, &c, &p, triplet_requests(&[cv.rho], h, ygrid), SliceFields::Basic, false, cfg)?;
        residuals.push(hyperbolic_residual(&sl[0], &sl[1], &sl[2], &c, cv.y_window)?);
    }
    let ratio = residuals[0].max_abs / residuals[1].max_abs;
    out.rules.push(Rule::at_least("residual_refinement_ratio", ratio, 1.8));
    out.rules.push(Rule::at_most("residual_relative_fine", residuals[1].relative(), 1e-3));
    out.value("residual_coarse", residuals[0].max_abs);
    out.value("residual_fine", residuals[1].max_abs);
    out.table(
        "convergence.csv",
        "level,dt,error_vs_next,hamiltonian_drift",
        (0..3).map(|k| {
            let err = match k {
                0 => format!("{e1:.17e}"),
                1 => format!("{e2:.17e}"),
                _ => String::new(),
            };
            format!("{k},{:.17e},{err},{:.17e}", cv.strang_dt / 2f64.powi(k as i32), drift[k])
        }),
    );
    out.table(
        "residual.csv",
        "level,y,residual",
        residuals.iter().enumerate().flat_map(|(k, r)| {
            ygrid.points().into_iter().zip(r.field.clone()).map(move |(y, v)| format!("{k},{y:.17e},{v:.17e}"))
        }),
    );
    Ok(out)
}
