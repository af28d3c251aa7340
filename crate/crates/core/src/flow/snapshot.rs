//! Snapshot files: one CSV `t,r,theta,u,W` per state and a JSON manifest.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::flow::grid::Grid;
use crate::flow::stepper::{FlowState, StepControl, Trajectory};
use crate::geometry::{ModelGeometry, ModelSpec};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub t: f64,
    pub r: f64,
    pub theta: f64,
    pub u: f64,
    #[serde(rename = "W")]
    pub w: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub t: f64,
    pub step: usize,
    pub file: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub model: ModelSpec,
    pub model_hash: String,
    pub grid: Grid,
    pub control: StepControl,
    pub snapshots: Vec<SnapshotEntry>,
}

/// SHA-256 of the canonical JSON of the model spec, as lowercase hex.
pub fn model_hash(spec: &ModelSpec) -> Result<String> {
    let bytes = serde_json::to_vec(spec)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

pub fn snapshot_rows(grid: &Grid, state: &FlowState) -> Vec<SnapshotRow> {
    (0..grid.len())
        .map(|k| {
            let (i, j) = grid.position(k);
            SnapshotRow {
                t: state.t,
                r: grid.r(i),
                theta: if k == 0 { 0.0 } else { grid.theta(j) },
                u: state.u[k],
                w: state.w[k],
            }
        })
        .collect()
}

pub fn write_snapshot_csv(path: impl AsRef<Path>, grid: &Grid, state: &FlowState) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    for row in snapshot_rows(grid, state) {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot_csv(path: impl AsRef<Path>) -> Result<Vec<SnapshotRow>> {
    let mut r = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Writes every snapshot of `traj` into `dir` plus `manifest.json`.
pub fn write_run(dir: impl AsRef<Path>, model: &ModelGeometry, control: &StepControl, traj: &Trajectory) -> Result<RunManifest> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    let spec = model.spec();
    let mut entries = Vec::with_capacity(traj.snapshots.len());
    for (k, state) in traj.snapshots.iter().enumerate() {
        let file = format!("snapshot_{k:05}.csv");
        write_snapshot_csv(dir.join(&file), &traj.grid, state)?;
        entries.push(SnapshotEntry {
            t: state.t,
            step: state.step_count,
            file,
        });
    }
    let manifest = RunManifest {
        model_hash: model_hash(&spec)?,
        model: spec,
        grid: traj.grid,
        control: *control,
        snapshots: entries,
    };
    write_manifest(dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

pub fn write_manifest(path: impl AsRef<Path>, manifest: &RunManifest) -> Result<()> {
    serde_json::to_writer_pretty(BufWriter::new(File::create(path)?), manifest)?;
    Ok(())
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<RunManifest> {
    Ok(serde_json::from_reader(BufReader::new(File::open(path)?))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::stepper::{solve_ball, BallProblem};
    use crate::geometry::make_model;
    use crate::profile::ProfileSpec;
    use std::sync::Arc;

    #[test]
    fn manifest_round_trips_exactly() {
        let m = make_model(
            ProfileSpec::hyperbolic(1.0),
            ProfileSpec::hyperbolic(1.0),
            ProfileSpec::cosh(1.0),
            2,
            1e-10,
        )
        .unwrap();
        let p = BallProblem::new(
            &m,
            1.0,
            Some(0.03),
            Arc::new(|t: f64| 0.1 * t.sin()),
            Arc::new(|r, t: f64| 0.1 * r * t.sin()),
        )
        .unwrap();
        let grid = Grid::new(1.0, 8, 8).unwrap();
        let control = StepControl::default();
        let traj = solve_ball(&p, &grid, &control, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let manifest = write_run(dir.path(), &m, &control, &traj).unwrap();
        let back = read_manifest(dir.path().join("manifest.json")).unwrap();
        assert_eq!(back, manifest);
        assert_eq!(manifest.model_hash.len(), 64);
        let rows = read_snapshot_csv(dir.path().join(&manifest.snapshots[2].file)).unwrap();
        assert_eq!(rows, snapshot_rows(&grid, &traj.snapshots[2]));
    }

    #[test]
    fn hash_depends_on_model() {
        let a = make_model(ProfileSpec::Euclidean, ProfileSpec::Euclidean, ProfileSpec::constant(1.0), 2, 1e-10).unwrap();
        let b = make_model(ProfileSpec::Euclidean, ProfileSpec::Euclidean, ProfileSpec::constant(1.0), 3, 1e-10).unwrap();
        assert_ne!(model_hash(&a.spec()).unwrap(), model_hash(&b.spec()).unwrap());
        assert_eq!(model_hash(&a.spec()).unwrap(), model_hash(&a.spec()).unwrap());
    }
}
