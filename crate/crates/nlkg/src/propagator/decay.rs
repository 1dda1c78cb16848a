use serde::{Deserialize, Serialize};

use super::opnorm::{weighted_operator_norm_with, PowerIteration, WeightedOperatorSpec};
use crate::cli_io::{loglog_fit, LogLogFit};
use crate::error::{invalid, Result};
use crate::grid_spectral::SpatialGrid;
use crate::par::{map_slice, Exec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub t: f64,
    pub norm: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTable {
    pub spec: WeightedOperatorSpec,
    pub grid: SpatialGrid,
    pub rows: Vec<DecayRow>,
    pub fit: LogLogFit,
}

impl DecayTable {
    /// Rows with columns t, norm, variant, a, b, grid_n, grid_L.
    pub fn csv_rows(&self) -> Vec<String> {
        let v = self.spec.variant();
        self.rows
            .iter()
            .map(|r| {
                format!(
                    "{:.17e},{:.17e},{},{},{},{},{}",
                    r.t,
                    r.norm,
                    v,
                    self.spec.a,
                    self.spec.b,
                    self.grid.n(),
                    self.grid.length()
                )
            })
            .collect()
    }

    pub const CSV_HEADER: &'static str = "t,norm,variant,a,b,grid_n,grid_L";
}

/// ‖K(t)‖ for every t in `times` (the `t` field of `template` is ignored)
/// and a log-log fit of norm against t.
pub fn decay_table(
    template: &WeightedOperatorSpec,
    times: &[f64],
    grid: &SpatialGrid,
    opts: &PowerIteration,
    exec: Exec,
) -> Result<DecayTable> {
    if times.len() < 4 {
        return Err(invalid(format!("need at least 4 times, got {}", times.len())));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(invalid("times must be strictly increasing (no duplicates)"));
    }
    template.validate()?;
    let results = map_slice(exec, times, |&t| {
        let spec = WeightedOperatorSpec { t, ..*template };
        weighted_operator_norm_with(&spec, grid, opts).map(|n| DecayRow { t, norm: n.value, iterations: n.iterations })
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.t).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.norm).collect();
    let fit = loglog_fit(&xs, &ys)?;
    Ok(DecayTable { spec: *template, grid: *grid, rows, fit })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_times() {
        let grid = SpatialGrid::new(64, 64.0).unwrap();
        let s = WeightedOperatorSpec::plain(1.0, 0.0, 0.0);
        let o = PowerIteration::default();
        assert!(decay_table(&s, &[1.0, 2.0, 2.0, 4.0], &grid, &o, Exec::Sequential).is_err());
        assert!(decay_table(&s, &[1.0, 2.0, 3.0], &grid, &o, Exec::Sequential).is_err());
    }
}
