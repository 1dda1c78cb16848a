use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_spectral::SpatialGrid;
use crate::nlkg_solver::{check_wrap, BetaFamily, CoefficientProfile, EvolveParams, InitialDataSpec, Profile};
use crate::par::Exec;

/// Largest data size accepted for nonlinear experiments.
pub const SMALL_DATA_LIMIT: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    LocalDecay,
    InteriorDecay,
    ExteriorDecay,
    EnergyGrowth,
    WeightedU1,
    ModifiedScattering,
    Convergence,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::LocalDecay,
        Experiment::InteriorDecay,
        Experiment::ExteriorDecay,
        Experiment::EnergyGrowth,
        Experiment::WeightedU1,
        Experiment::ModifiedScattering,
        Experiment::Convergence,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::LocalDecay => "local-decay",
            Experiment::InteriorDecay => "interior-decay",
            Experiment::ExteriorDecay => "exterior-decay",
            Experiment::EnergyGrowth => "energy-growth",
            Experiment::WeightedU1 => "weighted-u1",
            Experiment::ModifiedScattering => "modified-scattering",
            Experiment::Convergence => "convergence",
        }
    }

    /// Whether the experiment time-steps the equation (and so needs the wrap check).
    pub fn evolves(&self) -> bool {
        !matches!(self, Experiment::LocalDecay)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dt: f64,
    pub t_end: f64,
    pub dt_snap: f64,
    pub exec: Exec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileFamily {
    Zero,
    Gaussian,
    Sech,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    pub f_family: ProfileFamily,
    pub f_amp: f64,
    pub f_width: f64,
    pub f_center: f64,
    pub g_family: ProfileFamily,
    pub g_amp: f64,
    pub g_width: f64,
    pub g_center: f64,
    /// Target weighted norm ε of the data.
    pub epsilon: f64,
    /// Regularity index N.
    pub regularity: u32,
}

fn profile(family: ProfileFamily, amp: f64, width: f64, center: f64) -> Profile {
    match family {
        ProfileFamily::Zero => Profile::Zero,
        ProfileFamily::Gaussian => Profile::Gaussian { amp, width, center },
        ProfileFamily::Sech => Profile::Sech { amp, width, center },
    }
}

impl DataConfig {
    pub fn spec(&self) -> InitialDataSpec {
        self.spec_with_epsilon(self.epsilon)
    }

    pub fn spec_with_epsilon(&self, epsilon: f64) -> InitialDataSpec {
        InitialDataSpec {
            f: profile(self.f_family, self.f_amp, self.f_width, self.f_center),
            g: profile(self.g_family, self.g_amp, self.g_width, self.g_center),
            regularity: self.regularity,
            epsilon: Some(epsilon),
        }
    }

    fn gaussian(width: f64, epsilon: f64) -> Self {
        Self {
            f_family: ProfileFamily::Gaussian,
            f_amp: 1.0,
            f_width: width,
            f_center: 0.0,
            g_family: ProfileFamily::Zero,
            g_amp: 0.0,
            g_width: 1.0,
            g_center: 0.0,
            epsilon,
            regularity: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaShape {
    Zero,
    Gaussian,
    Sech2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    pub beta0: f64,
    pub beta_family: BetaShape,
    pub beta_amp: f64,
    pub beta_width: f64,
}

impl CoefficientConfig {
    pub fn profile(&self) -> CoefficientProfile {
        let family = match self.beta_family {
            BetaShape::Zero => BetaFamily::Zero,
            BetaShape::Gaussian => BetaFamily::Gaussian { amp: self.beta_amp, width: self.beta_width },
            BetaShape::Sech2 => BetaFamily::Sech2 { amp: self.beta_amp, width: self.beta_width },
        };
        CoefficientProfile::new(self.beta0, family)
    }

    fn gaussian(beta0: f64, amp: f64, width: f64) -> Self {
        Self { beta0, beta_family: BetaShape::Gaussian, beta_amp: amp, beta_width: width }
    }
}

/// Operator-norm sweep (local-decay).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub times: Vec<f64>,
    /// Band filter cutoff as a fraction of the Nyquist wavenumber.
    pub band_limit: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

/// Parameters of the pointwise and norm measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    /// Interior decay: reference time.
    pub t_min: f64,
    /// Radius R of the sharp cut-off {t² − x² ≤ R²}.
    pub radius: f64,
    /// Weighted u₁ sample times t_k = t_first·2^{k/per_dyad}, k < samples.
    pub t_first: f64,
    pub samples_per_dyad: u32,
    pub samples: u32,
    /// Dyadic exterior bands 2^k ≤ ⟨x⟩ < 2^{k+1}.
    pub k_min: i32,
    pub k_max: i32,
    /// Times T of the exterior energy series.
    pub energy_times: Vec<f64>,
    /// ρ-range of the free-flow energy reference run.
    pub reference_rho_min: f64,
    pub reference_rho_max: f64,
}

/// Hyperboloid sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperboloidConfig {
    pub y_max: f64,
    pub y_count: usize,
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_per_dyad: u32,
    /// ρ-spacing of the slice triplets used for ∂ρ.
    pub h: f64,
}

impl HyperboloidConfig {
    pub fn ygrid(&self) -> Result<SpatialGrid> {
        SpatialGrid::symmetric(self.y_count, self.y_max)
    }

    /// y-grid on H_ρ with half-width min(y_max, acosh(t_avail/ρ)), so that
    /// early hyperboloids reach further out while late ones stay inside the run.
    pub fn window(&self, rho: f64, t_avail: f64) -> Result<SpatialGrid> {
        if !(t_avail > rho) {
            return Err(Error::OutOfRange(format!("H_ρ at ρ = {rho} does not fit below t = {t_avail}")));
        }
        SpatialGrid::symmetric(self.y_count, self.y_max.min((t_avail / rho).acosh()))
    }

    /// ρ_m = ρ_min·2^{m/per_dyad} up to ρ_max.
    pub fn rho_list(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut m = 0;
        loop {
            let r = self.rho_min * 2f64.powf(m as f64 / self.rho_per_dyad as f64);
            if r > self.rho_max * (1.0 + 1e-12) {
                break;
            }
            out.push(r);
            m += 1;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoticsConfig {
    pub sigma: f64,
    pub sigma_low: f64,
    pub sigma_high: f64,
    /// Second data size for the ε-invariance of c/b².
    pub epsilon_alt: f64,
    /// Gaussian β of the β₀ = 0 run.
    pub variable_beta_amp: f64,
    pub variable_beta_width: f64,
    /// Probe points: every `probe_stride`-th y-grid point with |y| ≤ probe_y_max.
    pub probe_y_max: f64,
    pub probe_stride: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    /// Splitting-order runs.
    pub strang_n: usize,
    pub strang_length: f64,
    pub strang_t_end: f64,
    pub strang_dt: f64,
    /// Hyperbolic residual at ρ on |y| ≤ y_window.
    pub rho: f64,
    pub y_window: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    pub grid: GridConfig,
    pub run: RunConfig,
    pub data: DataConfig,
    pub coefficients: CoefficientConfig,
    pub sweep: SweepConfig,
    pub measure: MeasureConfig,
    pub hyperboloid: HyperboloidConfig,
    pub asymptotics: AsymptoticsConfig,
    pub convergence: ConvergenceConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::defaults(Experiment::InteriorDecay)
    }
}

impl ExperimentConfig {
    /// Effective defaults of `experiment`.
    pub fn defaults(experiment: Experiment) -> Self {
        let mut c = Self {
            experiment,
            output_dir: None,
            grid: GridConfig { n: 8192, length: 512.0 },
            run: RunConfig { dt: 0.02, t_end: 201.0, dt_snap: 0.2, exec: Exec::default() },
            data: DataConfig::gaussian(1.0, 0.02),
            coefficients: CoefficientConfig::gaussian(1.0, 1.0, 1.0),
            sweep: SweepConfig {
                times: vec![4.0, 8.0, 16.0, 32.0, 64.0, 128.0, 256.0],
                band_limit: 1.0 / 3.0,
                tol: 1e-8,
                max_iter: 10_000,
                seed: 0x5eed,
            },
            measure: MeasureConfig {
                t_min: 10.0,
                radius: 71.0,
                t_first: 8.0,
                samples_per_dyad: 4,
                samples: 13,
                k_min: 3,
                k_max: 6,
                energy_times: (1..=32).map(|k| 2.0 * k as f64).collect(),
                reference_rho_min: 4.0,
                reference_rho_max: 64.0,
            },
            hyperboloid: HyperboloidConfig {
                y_max: 1.6,
                y_count: 1024,
                rho_min: 8.0,
                rho_max: 128.0,
                rho_per_dyad: 2,
                h: 0.05,
            },
            asymptotics: AsymptoticsConfig {
                sigma: 0.3,
                sigma_low: 0.25,
                sigma_high: 0.35,
                epsilon_alt: 0.03,
                variable_beta_amp: 1.0,
                variable_beta_width: 1.0,
                probe_y_max: 1.2,
                probe_stride: 16,
            },
            convergence: ConvergenceConfig {
                strang_n: 1024,
                strang_length: 64.0,
                strang_t_end: 5.0,
                strang_dt: 0.1,
                rho: 16.0,
                y_window: 2.0,
            },
        };
        match experiment {
            Experiment::LocalDecay => {
                c.grid = GridConfig { n: 4096, length: 576.0 };
                c.coefficients = CoefficientConfig::gaussian(0.0, 0.0, 1.0);
                c.coefficients.beta_family = BetaShape::Zero;
            }
            Experiment::InteriorDecay => {}
            Experiment::ExteriorDecay => {
                c.grid = GridConfig { n: 4096, length: 384.0 };
                c.run = RunConfig { t_end: 128.0, dt_snap: 0.2, ..c.run };
            }
            Experiment::EnergyGrowth => {
                c.grid = GridConfig { n: 8192, length: 768.0 };
                c.run = RunConfig { t_end: 361.0, ..c.run };
                c.data = DataConfig::gaussian(3.0, 0.02);
                c.hyperboloid.y_max = 4.0;
            }
            Experiment::WeightedU1 => {
                c.grid = GridConfig { n: 4096, length: 256.0 };
                c.run = RunConfig { dt: 0.01, t_end: 71.0, dt_snap: 0.1, ..c.run };
                c.coefficients = CoefficientConfig::gaussian(1.0, 1.0, 2.0);
            }
            Experiment::ModifiedScattering => {
                c.grid = GridConfig { n: 16384, length: 1024.0 };
                c.run = RunConfig { t_end: 302.0, ..c.run };
                c.data = DataConfig::gaussian(3.0, 0.05);
                c.coefficients =
                    CoefficientConfig { beta0: 1.0, beta_family: BetaShape::Zero, beta_amp: 0.0, beta_width: 1.0 };
                c.hyperboloid = HyperboloidConfig { y_max: 1.5, rho_min: 4.0, rho_per_dyad: 8, ..c.hyperboloid };
            }
            Experiment::Convergence => {
                c.grid = GridConfig { n: 4096, length: 512.0 };
                c.run = RunConfig { t_end: 163.0, ..c.run };
                c.data = DataConfig::gaussian(3.0, 0.05);
                c.hyperboloid = HyperboloidConfig { y_max: 3.0, y_count: 512, ..c.hyperboloid };
            }
        }
        c
    }

    pub fn grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.grid.n, self.grid.length)
    }

    pub fn evolve_params(&self) -> EvolveParams {
        EvolveParams { t_end: self.run.t_end, dt: self.run.dt, dt_snap: self.run.dt_snap }
    }

    fn nonlinear(&self) -> bool {
        !self.coefficients.profile().is_linear()
            || matches!(self.experiment, Experiment::ModifiedScattering) && self.asymptotics.variable_beta_amp != 0.0
    }

    /// Checks every invariant; the error names the violated rule.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        let bad = |msg: String| Err(Error::Config(msg));
        if self.experiment.evolves() {
            self.evolve_params().validate()?;
            let support = self.data.spec().support_width();
            check_wrap(&grid, support, self.run.t_end)?;
            if self.nonlinear() {
                for eps in [self.data.epsilon, self.asymptotics.epsilon_alt] {
                    if !(eps <= SMALL_DATA_LIMIT) {
                        return bad(format!(
                            "small-data gate: ε = {eps} exceeds {SMALL_DATA_LIMIT} for a nonlinear experiment"
                        ));
                    }
                }
            }
        }
        if self.data.epsilon < 0.0 {
            return bad(format!("data.epsilon = {} must be nonnegative", self.data.epsilon));
        }
        match self.experiment {
            Experiment::LocalDecay => {
                let t = &self.sweep.times;
                if t.len() < 4 || t.windows(2).any(|w| !(w[1] > w[0])) || t[0] <= 0.0 {
                    return bad("sweep.times needs at least 4 increasing positive times".into());
                }
                if !(self.sweep.band_limit > 0.0 && self.sweep.band_limit <= 0.5) {
                    return bad(format!("sweep.band_limit = {} must lie in (0, 0.5]", self.sweep.band_limit));
                }
            }
            Experiment::EnergyGrowth | Experiment::ModifiedScattering | Experiment::Convergence => {
                let h = &self.hyperboloid;
                if h.y_count < 16 || !h.y_count.is_power_of_two() || !(h.y_max > 0.0) || h.rho_per_dyad == 0 {
                    return bad(format!("bad hyperboloid settings {h:?}"));
                }
                if !(h.rho_min >= 1.0 && h.rho_max >= h.rho_min) {
                    return bad(format!(
                        "hyperboloid ρ-range [{}, {}] must satisfy 1 ≤ ρ_min ≤ ρ_max",
                        h.rho_min, h.rho_max
                    ));
                }
            }
            Experiment::ExteriorDecay => {
                if self.measure.k_max < self.measure.k_min {
                    return bad("measure.k_max must be at least measure.k_min".into());
                }
                if self.measure.energy_times.iter().any(|&t| t > self.run.t_end || t < 1.0) {
                    return bad("measure.energy_times must lie in [1, run.t_end]".into());
                }
            }
            Experiment::WeightedU1 => {
                if !(self.measure.radius >= 1.0) {
                    return bad(format!("measure.radius = {} must be at least 1", self.measure.radius));
                }
            }
            Experiment::InteriorDecay => {}
        }
        Ok(())
    }

    /// Effective configuration as TOML; parsing it back gives the same value.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn to_table(c: &ExperimentConfig) -> Result<toml::Table> {
    toml::Table::try_from(c).map_err(|e| Error::Config(e.to_string()))
}

fn from_table(t: toml::Table) -> Result<ExperimentConfig> {
    toml::Value::Table(t).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))
}

/// Parses one `KEY=VALUE` override with a dotted key. VALUE is read as a TOML
/// value, falling back to a bare string.
pub fn parse_override(s: &str) -> Result<(Vec<String>, toml::Value)> {
    let (k, v) = s.split_once('=').ok_or_else(|| Error::Config(format!("override '{s}' is not KEY=VALUE")))?;
    let path: Vec<String> = k.trim().split('.').map(str::to_string).collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override key '{k}'")));
    }
    let v = v.trim();
    let value = match toml::from_str::<toml::Table>(&format!("v = {v}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(v.to_string()),
    };
    Ok((path, value))
}

fn apply_override(t: &mut toml::Table, path: &[String], value: toml::Value) -> Result<()> {
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut cur = t;
    for p in parents {
        cur = match cur.get_mut(p) {
            Some(toml::Value::Table(sub)) => sub,
            _ => return Err(Error::Config(format!("unknown config section '{p}'"))),
        };
    }
    if !cur.contains_key(last) && last != "output_dir" {
        return Err(Error::Config(format!("unknown config key '{}'", path.join("."))));
    }
    cur.insert(last.clone(), value);
    Ok(())
}

/// Parses config text over the defaults of `experiment` (or of the
/// `experiment` key in the text, or of interior-decay), applies overrides and
/// validates. Unknown keys are errors.
pub fn parse_config_str(text: &str, experiment: Option<Experiment>, overrides: &[String]) -> Result<ExperimentConfig> {
    let user: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    let named = match user.get("experiment") {
        Some(toml::Value::String(s)) => Some(s.parse::<Experiment>()?),
        Some(v) => return Err(Error::Config(format!("experiment must be a string, got {v}"))),
        None => None,
    };
    let exp = match (experiment, named) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::Config(format!("config is for experiment '{b}' but '{a}' was requested")))
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => ExperimentConfig::default().experiment,
    };
    let mut table = to_table(&ExperimentConfig::defaults(exp))?;
    merge(&mut table, user);
    for o in overrides {
        let (path, value) = parse_override(o)?;
        if path.len() == 1 && path[0] == "experiment" {
            return Err(Error::Config("the experiment cannot be overridden".into()));
        }
        apply_override(&mut table, &path, value)?;
    }
    let cfg = from_table(table)?;
    cfg.validate()?;
    Ok(cfg)
}

/// [`parse_config_str`] on a file.
pub fn parse_config(path: &Path, experiment: Option<Experiment>, overrides: &[String]) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_str(&text, experiment, overrides)
}
