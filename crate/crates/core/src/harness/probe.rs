use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::Path;

use super::run::{mask, thread_pool, Experiment};
use super::spec::{Algorithm, ExperimentSpec};
use crate::error::{JuiceError, Result};
use crate::metrics::to_db;
use crate::sim::ScenarioInstance;
use crate::solver::solve_observed;

pub const PROBE_CSV_HEADER: &str = "algorithm,snr_db,iteration,nase,nase_db";

/// NASE of the detection-masked iterate after `iteration` cumulative inner
/// iterations.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub algorithm: Algorithm,
    pub snr_db: f64,
    pub iteration: usize,
    pub nase: f64,
    pub nase_db: f64,
}

/// Per-iteration NASE curves of the solver-based algorithms in `spec`.
///
/// Trials use the same scenarios as [`super::run`] when `snr_db` is on the
/// spec grid; otherwise they draw from stream index `snr_grid_db.len()`.
/// Trials that stop early keep contributing their final iterate.
pub fn run_convergence_probe(spec: &ExperimentSpec, snr_db: f64, trials: usize) -> Result<Vec<ProbeRow>> {
    if trials == 0 {
        return Err(JuiceError::InvalidConfig("convergence probe needs at least one trial".into()));
    }
    let algorithms: Vec<Algorithm> = spec
        .algorithms
        .iter()
        .copied()
        .filter(|a| matches!(a, Algorithm::Admm | Algorithm::IrwAdmm | Algorithm::CovAdmm))
        .collect();
    if algorithms.is_empty() {
        return Err(JuiceError::InvalidConfig("convergence probe needs ADMM, IRW_ADMM or COV_ADMM".into()));
    }
    let exp = Experiment::new(spec)?;
    let snr_index = spec.snr_grid_db.iter().position(|&v| v == snr_db).unwrap_or(spec.snr_grid_db.len());
    let pool = thread_pool(spec.parallelism)?;

    let scenarios: Vec<ScenarioInstance> =
        (0..trials).map(|t| exp.scenario(snr_index, snr_db, t)).collect::<Result<_>>()?;
    let den: f64 = scenarios.iter().map(|s| s.x_true.norm_squared()).sum();
    if den <= 0.0 {
        return Err(JuiceError::Metric("NASE with zero channel energy"));
    }

    let mut rows = Vec::new();
    for alg in algorithms {
        let curves: Result<Vec<Vec<f64>>> = pool.install(|| {
            scenarios
                .par_iter()
                .map(|sc| {
                    let cfg = spec.solver_config(alg, sc.noise_var).expect("solver algorithm");
                    let cov = (alg == Algorithm::CovAdmm).then_some(&exp.covariances);
                    let mut curve = Vec::new();
                    solve_observed(&sc.y, &sc.phi, cov, &cfg, |_, x| {
                        let s = exp.detect(x);
                        curve.push((&sc.x_true - mask(x, &s)).norm_squared());
                    })?;
                    Ok(curve)
                })
                .collect()
        });
        let curves = curves?;
        let len = curves.iter().map(Vec::len).max().unwrap_or(0);
        for k in 0..len {
            let num: f64 = curves.iter().map(|c| c[k.min(c.len() - 1)]).sum();
            let v = num / den;
            rows.push(ProbeRow { algorithm: alg, snr_db, iteration: k, nase: v, nase_db: to_db(v) });
        }
    }
    Ok(rows)
}

pub fn probe_csv(rows: &[ProbeRow]) -> String {
    let mut s = String::new();
    writeln!(s, "{PROBE_CSV_HEADER}").unwrap();
    for r in rows {
        writeln!(s, "{},{},{},{},{}", r.algorithm.name(), r.snr_db, r.iteration, r.nase, r.nase_db).unwrap();
    }
    s
}

pub fn write_probe_csv(rows: &[ProbeRow], path: &Path) -> Result<()> {
    std::fs::write(path, probe_csv(rows))?;
    Ok(())
}
