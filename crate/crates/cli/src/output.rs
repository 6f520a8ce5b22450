//! Experiment directory layout: `metrics.csv`, `summary.json` and
//! `trajectories/*.csv` under `<root>/<experiment>/`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use pidcert::metrics::Trajectory;
use serde::Serialize;

use crate::error::{CliError, CliResult};

pub struct ExperimentDir {
    root: PathBuf,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Serialize)]
struct TrajectoryRow {
    t: f64,
    r: f64,
    y: f64,
    y_meas: f64,
    u_cmd: f64,
    u_sat: f64,
    #[serde(rename = "I")]
    integral: f64,
}

impl ExperimentDir {
    pub fn create(root: PathBuf) -> CliResult<Self> {
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        Ok(Self { root })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_csv<T: Serialize>(&self, name: &str, rows: &[T]) -> CliResult<()> {
        let path = self.file(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        let csv_err = |source| CliError::Csv {
            path: path.clone(),
            source,
        };
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)
            .map_err(csv_err)?;
        for row in rows {
            w.serialize(row).map_err(csv_err)?;
        }
        w.flush().map_err(io_err(&path))
    }

    pub fn write_trajectory(&self, name: &str, traj: &Trajectory) -> CliResult<()> {
        let rows: Vec<TrajectoryRow> = (0..traj.len())
            .map(|k| TrajectoryRow {
                t: traj.time(k),
                r: traj.reference[k],
                y: traj.output[k],
                y_meas: traj.measured[k],
                u_cmd: traj.u_cmd[k],
                u_sat: traj.u_sat[k],
                integral: traj.integrator[k],
            })
            .collect();
        self.write_csv(&format!("trajectories/{name}.csv"), &rows)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<()> {
        let path = self.file(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).map_err(io_err(&path))
    }

    pub fn write_jsonl<T: Serialize>(&self, name: &str, items: &[T]) -> CliResult<()> {
        let path = self.file(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(io_err(parent))?;
        }
        let mut f = fs::File::create(&path).map_err(io_err(&path))?;
        for item in items {
            serde_json::to_writer(&mut f, item)?;
            f.write_all(b"\n").map_err(io_err(&path))?;
        }
        Ok(())
    }
}
