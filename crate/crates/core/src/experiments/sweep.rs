//! Phase-transition sweeps over a grid of `(n, m, c, shape)` cells.

use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{parse_shape, ShapeParams};
use super::stats::mean_std;
use crate::analysis::solve_zeta;
use crate::error::{Result, RigError};
use crate::genbip::sample_incidence;
use crate::graph::{
    build_intersection_with_budget, component_size_per_node, components, explore_faithful,
    DEFAULT_WORK_BUDGET,
};
use crate::model::{make_weighted_profile, AttributeProfile, ProfileShape, RigConfig};
use crate::rng::{derive_seed, stream};

pub const SWEEP_SCHEMA: &str = "schema=rigsweep.v1";
pub const SWEEP_COLUMNS: [&str; 13] = [
    "n",
    "m",
    "c",
    "shape",
    "s",
    "reps",
    "mean_largest_frac",
    "std_largest_frac",
    "mean_second",
    "zeta_pred",
    "seed",
    "wall_time",
    "status",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub n: usize,
    pub m: usize,
    pub c: f64,
    #[serde(default = "uniform")]
    pub shape: String,
    #[serde(default)]
    pub shape_params: ShapeParams,
}

fn uniform() -> String {
    "uniform".into()
}

impl SweepCell {
    pub fn uniform(n: usize, m: usize, c: f64) -> Self {
        Self {
            n,
            m,
            c,
            shape: uniform(),
            shape_params: ShapeParams::default(),
        }
    }

    pub fn shape(&self) -> Result<ProfileShape> {
        parse_shape(&self.shape, &self.shape_params)
    }

    pub fn profile(&self) -> Result<AttributeProfile> {
        make_weighted_profile(self.n, self.m, self.c, self.shape()?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub cells: Vec<SweepCell>,
    pub reps: usize,
    pub seed: u64,
    #[serde(default = "one")]
    pub s: usize,
    #[serde(default = "default_budget")]
    pub work_budget: u128,
    /// Faithful explorations per replicate whose trace identities and stopping
    /// times are checked against the component structure.
    #[serde(default)]
    pub trace_checks: usize,
}

fn one() -> usize {
    1
}

fn default_budget() -> u128 {
    DEFAULT_WORK_BUDGET
}

impl SweepSpec {
    pub fn new(cells: Vec<SweepCell>, reps: usize, seed: u64) -> Self {
        Self {
            cells,
            reps,
            seed,
            s: 1,
            work_budget: DEFAULT_WORK_BUDGET,
            trace_checks: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < 1 {
            return Err(RigError::Input("reps must be at least 1".into()));
        }
        if self.s < 1 {
            return Err(RigError::Size("s must be at least 1".into()));
        }
        for cell in &self.cells {
            cell.profile()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepOutcome {
    pub largest: usize,
    pub largest_fraction: f64,
    pub second_size: usize,
    pub traces_checked: usize,
    pub trace_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub m: usize,
    pub c: f64,
    pub shape: String,
    pub s: usize,
    pub reps: usize,
    pub mean_largest_frac: f64,
    pub std_largest_frac: f64,
    pub mean_second: f64,
    pub zeta_pred: f64,
    pub seed: u64,
    pub wall_time: f64,
    /// `ok`, or `failed: <reason>`.
    pub status: String,
    pub outcomes: Vec<RepOutcome>,
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        self.status != "ok"
    }

    pub fn max_largest(&self) -> usize {
        self.outcomes.iter().map(|o| o.largest).max().unwrap_or(0)
    }

    pub fn max_second(&self) -> usize {
        self.outcomes
            .iter()
            .map(|o| o.second_size)
            .max()
            .unwrap_or(0)
    }

    pub fn trace_violations(&self) -> usize {
        self.outcomes.iter().map(|o| o.trace_violations).sum()
    }

    pub fn traces_checked(&self) -> usize {
        self.outcomes.iter().map(|o| o.traces_checked).sum()
    }
}

fn run_rep(
    spec: &SweepSpec,
    profile: &AttributeProfile,
    n: usize,
    cell: usize,
    rep: usize,
) -> Result<RepOutcome> {
    let seed = derive_seed(spec.seed, "sweep", &[cell as u64, rep as u64]);
    let config = RigConfig::new(n, profile.clone(), spec.s, seed)?;
    let inc = sample_incidence(&config)?;
    let g = build_intersection_with_budget(&inc, spec.s, spec.work_budget)?;
    let summary = components(&g);
    let mut outcome = RepOutcome {
        largest: summary.largest(),
        largest_fraction: summary.largest_fraction,
        second_size: summary.second_size,
        traces_checked: 0,
        trace_violations: 0,
    };
    if spec.trace_checks > 0 && spec.s == 1 {
        let sizes = component_size_per_node(&g);
        let mut pick = stream(seed, "trace-check", &[]);
        for _ in 0..spec.trace_checks {
            let v0 = pick.random_range(0..n);
            let trace = explore_faithful(&inc, profile, v0, seed)?;
            outcome.traces_checked += 1;
            let ok = trace.check_identities().is_ok()
                && trace.stop_time == sizes[v0]
                && trace.phi_recompute_error(profile) < 1e-9;
            if !ok {
                outcome.trace_violations += 1;
            }
        }
    }
    Ok(outcome)
}

/// Runs every `(cell, rep)` pair in parallel. Replicate `rep` of cell `i` draws
/// its graph from the stream `(seed, "sweep", i, rep)`, and results are reduced
/// in index order, so output does not depend on scheduling. A cell whose
/// generation fails (for instance on the work budget) is reported with a
/// `failed` status and the sweep continues.
pub fn sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.reps < 1 {
        return Err(RigError::Input("reps must be at least 1".into()));
    }
    let profiles: Vec<Result<AttributeProfile>> =
        spec.cells.iter().map(SweepCell::profile).collect();
    let jobs: Vec<(usize, usize)> = (0..spec.cells.len())
        .flat_map(|i| (0..spec.reps).map(move |r| (i, r)))
        .collect();
    let results: Vec<(Result<RepOutcome>, f64)> = jobs
        .par_iter()
        .map(|&(i, r)| {
            let started = Instant::now();
            let out = match &profiles[i] {
                Ok(p) => run_rep(spec, p, spec.cells[i].n, i, r),
                Err(e) => Err(e.clone()),
            };
            (out, started.elapsed().as_secs_f64())
        })
        .collect();

    let mut rows = Vec::with_capacity(spec.cells.len());
    for (i, cell) in spec.cells.iter().enumerate() {
        let slice = &results[i * spec.reps..(i + 1) * spec.reps];
        let wall_time: f64 = slice.iter().map(|(_, t)| t).sum();
        let mut outcomes = Vec::with_capacity(spec.reps);
        let mut status = "ok".to_string();
        for (out, _) in slice {
            match out {
                Ok(o) => outcomes.push(*o),
                Err(e) => {
                    status = format!("failed: {e}");
                    outcomes.clear();
                    break;
                }
            }
        }
        let fractions: Vec<f64> = outcomes.iter().map(|o| o.largest_fraction).collect();
        let seconds: Vec<f64> = outcomes.iter().map(|o| o.second_size as f64).collect();
        let (mean_lf, std_lf) = mean_std(&fractions);
        let zeta_pred = solve_zeta(cell.c).map(|g| g.zeta).unwrap_or(f64::NAN);
        let shape = cell
            .shape()
            .map(|s| s.name())
            .unwrap_or_else(|_| cell.shape.clone());
        rows.push(SweepRow {
            n: cell.n,
            m: cell.m,
            c: cell.c,
            shape,
            s: spec.s,
            reps: outcomes.len(),
            mean_largest_frac: mean_lf,
            std_largest_frac: std_lf,
            mean_second: mean_std(&seconds).0,
            zeta_pred,
            seed: spec.seed,
            wall_time,
            status,
            outcomes,
        });
    }
    Ok(rows)
}

/// Sweep CSV: a schema line, the column header, one row per cell.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_writer(Vec::new());
    w.write_record([SWEEP_SCHEMA]).expect("in-memory write");
    w.write_record(SWEEP_COLUMNS).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.m.to_string(),
            r.c.to_string(),
            r.shape.clone(),
            r.s.to_string(),
            r.reps.to_string(),
            r.mean_largest_frac.to_string(),
            r.std_largest_frac.to_string(),
            r.mean_second.to_string(),
            r.zeta_pred.to_string(),
            r.seed.to_string(),
            format!("{:.6}", r.wall_time),
            r.status.clone(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush to Vec")).expect("utf-8 fields")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_small_cell() {
        let spec = SweepSpec::new(vec![SweepCell::uniform(10, 10, 1.5)], 1, 3);
        let rows = sweep(&spec).unwrap();
        assert_eq!(rows.len(), 1);
        let lf = rows[0].mean_largest_frac;
        assert!((1..=10).any(|k| (lf - k as f64 / 10.0).abs() < 1e-12));
        assert_eq!(rows[0].std_largest_frac, 0.0);
    }

    #[test]
    fn failed_cells_do_not_stop_the_sweep() {
        let mut spec = SweepSpec::new(
            vec![
                SweepCell::uniform(200, 2, 50.0),
                SweepCell::uniform(10, 1, 10.0), // p = 1: invalid
                SweepCell::uniform(50, 50, 0.5),
            ],
            2,
            1,
        );
        spec.work_budget = 1000;
        let rows = sweep(&spec).unwrap();
        assert!(rows[0].status.contains("work budget"), "{}", rows[0].status);
        assert!(rows[1].failed());
        assert!(!rows[2].failed());
        assert_eq!(rows[2].reps, 2);
        let csv = sweep_csv(&rows);
        assert_eq!(csv.lines().count(), 5);
    }

    #[test]
    fn csv_layout() {
        let spec = SweepSpec::new(vec![SweepCell::uniform(20, 20, 1.2)], 2, 9);
        let csv = sweep_csv(&sweep(&spec).unwrap());
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("schema=rigsweep.v1"));
        assert_eq!(
            lines.next(),
            Some("n,m,c,shape,s,reps,mean_largest_frac,std_largest_frac,mean_second,zeta_pred,seed,wall_time,status")
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(&row[..6], &["20", "20", "1.2", "uniform", "1", "2"]);
        assert_eq!(row[10], "9");
        assert_eq!(row[12], "ok");
    }

    #[test]
    fn trace_checks_run() {
        let mut spec = SweepSpec::new(vec![SweepCell::uniform(100, 80, 1.5)], 3, 4);
        spec.trace_checks = 5;
        let rows = sweep(&spec).unwrap();
        assert_eq!(rows[0].traces_checked(), 15);
        assert_eq!(rows[0].trace_violations(), 0);
    }
}
