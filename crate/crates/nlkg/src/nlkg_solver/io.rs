//! Snapshot files: one CSV per snapshot with a `#`-prefixed header, plus a
//! JSON manifest describing the run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::state::{FieldState, Trajectory};
use crate::cli_io::write_atomic;
use crate::error::{invalid, Result};
use crate::grid_spectral::SpatialGrid;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SnapshotManifest {
    pub field: String,
    pub n: usize,
    pub length: f64,
    pub dt: f64,
    pub dt_snap: f64,
    pub beta0: f64,
    pub beta_family: String,
    pub epsilon: Option<f64>,
    pub files: Vec<String>,
    pub times: Vec<f64>,
}

fn snapshot_csv(traj: &Trajectory, s: &FieldState) -> String {
    let mut out = String::new();
    let eps = traj.epsilon.map_or("nan".to_string(), |e| format!("{e:e}"));
    let _ = writeln!(out, "# t={:.17e}", s.t);
    let _ = writeln!(out, "# n={}", s.grid.n());
    let _ = writeln!(out, "# L={:.17e}", s.grid.length());
    let _ = writeln!(out, "# dt={:.17e}", traj.dt);
    let _ = writeln!(out, "# beta0={:.17e}", traj.coefficients.beta0);
    let _ = writeln!(out, "# beta_family={}", traj.coefficients.family.name());
    let _ = writeln!(out, "# epsilon={eps}");
    out.push_str("x,u,v\n");
    for (i, x) in s.grid.points().iter().enumerate() {
        let _ = writeln!(out, "{:.17e},{:.17e},{:.17e}", x, s.u[i], s.v[i]);
    }
    out
}

/// Writes every snapshot of `traj` under `dir` and returns the manifest path.
pub fn write_trajectory(traj: &Trajectory, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let field = traj.role.name();
    let mut files = Vec::with_capacity(traj.snapshots.len());
    for (k, s) in traj.snapshots.iter().enumerate() {
        let name = format!("{field}_{k:05}.csv");
        write_atomic(&dir.join(&name), snapshot_csv(traj, s).as_bytes())?;
        files.push(name);
    }
    let manifest = SnapshotManifest {
        field: field.to_string(),
        n: traj.grid.n(),
        length: traj.grid.length(),
        dt: traj.dt,
        dt_snap: traj.dt_snap,
        beta0: traj.coefficients.beta0,
        beta_family: traj.coefficients.family.name().to_string(),
        epsilon: traj.epsilon,
        files,
        times: traj.snapshots.iter().map(|s| s.t).collect(),
    };
    let path = dir.join(format!("{field}_manifest.json"));
    write_atomic(&path, serde_json::to_string_pretty(&manifest)?.as_bytes())?;
    Ok(path)
}

/// Reads one snapshot file back.
pub fn read_snapshot_csv(path: &Path) -> Result<FieldState> {
    let text = fs::read_to_string(path)?;
    let (mut t, mut n, mut len) = (None, None, None);
    for h in text.lines().filter_map(|l| l.strip_prefix("# ")) {
        if let Some((k, val)) = h.split_once('=') {
            let parse = |s: &str| s.parse::<f64>().map_err(|e| invalid(format!("{k}: {e}")));
            match k {
                "t" => t = Some(parse(val)?),
                "n" => n = Some(val.parse::<usize>().map_err(|e| invalid(e.to_string()))?),
                "L" => len = Some(parse(val)?),
                _ => {}
            }
        }
    }
    let mut rows = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let (mut u, mut v) = (Vec::new(), Vec::new());
    for row in rows.deserialize::<(f64, f64, f64)>() {
        let (_, ui, vi) = row.map_err(|e| invalid(format!("bad snapshot row: {e}")))?;
        u.push(ui);
        v.push(vi);
    }
    let (t, n, len) = match (t, n, len) {
        (Some(t), Some(n), Some(l)) => (t, n, l),
        _ => return Err(invalid("snapshot header is missing t, n or L")),
    };
    FieldState::new(SpatialGrid::new(n, len)?, t, u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nlkg_solver::{evolve, CoefficientProfile, EvolveParams};

    #[test]
    fn round_trip() {
        let grid = SpatialGrid::new(64, 64.0).unwrap();
        let u = grid.points().iter().map(|x| 0.1 * (-x * x / 4.0).exp()).collect();
        let data = FieldState::new(grid, 1.0, u, vec![0.0; 64]).unwrap();
        let p = EvolveParams { t_end: 2.0, dt: 0.25, dt_snap: 0.5 };
        let traj = evolve(&data, &CoefficientProfile::linear(), &p).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let m = write_trajectory(&traj, dir.path()).unwrap();
        let manifest: SnapshotManifest = serde_json::from_str(&std::fs::read_to_string(m).unwrap()).unwrap();
        assert_eq!(manifest.files.len(), 3);
        let back = read_snapshot_csv(&dir.path().join(&manifest.files[2])).unwrap();
        assert_eq!(back, traj.snapshots[2]);
    }
}
