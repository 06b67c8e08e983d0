use rayon::prelude::*;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use super::spec::{effective_parallelism, Algorithm, ExperimentSpec};
use crate::error::{JuiceError, Result};
use crate::estimator::{genie_ls, genie_mmse, mmse_estimate, RefinedEstimate, SupportEstimate};
use crate::linalg::CMat;
use crate::metrics::{detect_support, nase, srr, srr_symmetric, to_db, TrialOutcome};
use crate::rng::{rng_from_seed, stream_seed, EXPERIMENT_STREAM};
use crate::sim::{generate_pilots, make_scenario, CovarianceSet, ScenarioInstance, UEGeometry};
use crate::solver::{solve, RecoveryResult};

pub const CSV_HEADER: &str =
    "algorithm,snr_db,trials,nase,nase_db,srr,srr_alt,mean_inner_iters,mean_outer_iters,mean_wall_ms,seed,scenario_hash";

/// Smallest noise variance handed to the MMSE stage; keeps the observation
/// covariance invertible in noiseless runs.
const MMSE_NOISE_FLOOR: f64 = 1e-12;

/// Outcomes of one trial, keyed by algorithm, with its scenario digest.
pub type TrialRecord = (BTreeMap<Algorithm, TrialOutcome>, [u8; 32]);

/// Per-experiment fixtures: geometry, covariances and the pilot codebook.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub spec: ExperimentSpec,
    pub geometry: UEGeometry,
    pub covariances: CovarianceSet,
    pub pilots: CMat,
}

impl Experiment {
    pub fn new(spec: &ExperimentSpec) -> Result<Self> {
        spec.check().map_err(|(_, msg)| JuiceError::InvalidConfig(msg))?;
        let sys = &spec.system;
        let mut rng = rng_from_seed(stream_seed(sys.seed, EXPERIMENT_STREAM, 0));
        let geometry = UEGeometry::draw(&mut rng, sys);
        let pilots = generate_pilots(&mut rng, sys.tau_p, sys.n_users);
        let covariances = CovarianceSet::build(&geometry, sys);
        Ok(Self { spec: spec.clone(), geometry, covariances, pilots })
    }

    /// Scenario for grid point `snr_index` (at `snr_db`) and trial `trial`.
    pub fn scenario(&self, snr_index: usize, snr_db: f64, trial: usize) -> Result<ScenarioInstance> {
        let sys = self.spec.system.with_snr_db(snr_db);
        let mut rng = rng_from_seed(stream_seed(sys.seed, snr_index as u64, trial as u64));
        make_scenario(&mut rng, &sys, &self.pilots, &self.geometry)
    }

    pub fn recover(&self, algorithm: Algorithm, sc: &ScenarioInstance) -> Result<RecoveryResult> {
        let cfg = self
            .spec
            .solver_config(algorithm, sc.noise_var)
            .ok_or(JuiceError::InvalidConfig(format!("{} does not run the solver", algorithm.name())))?;
        let cov = (algorithm.solver_mode() == Some(crate::solver::Mode::CovAdmm)).then_some(&self.covariances);
        solve(&sc.y, &sc.phi, cov, &cfg)
    }

    pub fn detect(&self, x_hat: &CMat) -> SupportEstimate {
        detect_support(x_hat, self.spec.detection.mode, self.spec.detection.value)
    }

    /// Per-trial outcomes of every configured algorithm at one grid point,
    /// with the scenario digests, in trial order.
    pub fn cell(&self, snr_index: usize, snr_db: f64) -> Result<Vec<TrialRecord>> {
        (0..self.spec.trials)
            .into_par_iter()
            .map(|t| {
                let sc = self.scenario(snr_index, snr_db, t)?;
                Ok((self.trial(&sc)?, sc.digest()))
            })
            .collect()
    }

    /// Run every configured algorithm on one scenario.
    fn trial(&self, sc: &ScenarioInstance) -> Result<BTreeMap<Algorithm, TrialOutcome>> {
        let n = self.spec.system.n_users;
        let truth = SupportEstimate::new(sc.active_set.clone());
        let mut out = BTreeMap::new();
        let mut cov_run: Option<(RecoveryResult, SupportEstimate, f64)> = None;

        for &alg in &self.spec.algorithms {
            let start = Instant::now();
            let (x_hat, s_hat, inner, outer) = match alg {
                Algorithm::Admm | Algorithm::IrwAdmm | Algorithm::CovAdmm => {
                    let res = self.recover(alg, sc)?;
                    let s = self.detect(&res.x_hat);
                    let masked = mask(&res.x_hat, &s);
                    let (i, o) = (res.iterations_inner_total, res.iterations_outer);
                    if alg == Algorithm::CovAdmm {
                        cov_run = Some((res, s.clone(), start.elapsed().as_secs_f64()));
                    }
                    (masked, s, i, o)
                }
                Algorithm::CovAdmmMmse => {
                    let (res, detected, _) = match cov_run.take() {
                        Some(r) => r,
                        None => {
                            let res = self.recover(Algorithm::CovAdmm, sc)?;
                            let s = self.detect(&res.x_hat);
                            (res, s, 0.0)
                        }
                    };
                    let support = if self.spec.mmse_oracle_support { truth.clone() } else { detected.clone() };
                    let est = if support.is_empty() {
                        RefinedEstimate::empty(sc.x_true.nrows())
                    } else {
                        mmse_estimate(&sc.y, &sc.phi, &support, &self.covariances, sc.noise_var.max(MMSE_NOISE_FLOOR))?
                    };
                    let (i, o) = (res.iterations_inner_total, res.iterations_outer);
                    cov_run = Some((res, detected, 0.0));
                    (est.embed(n), support, i, o)
                }
                Algorithm::GenieLs => (genie_ls(&sc.y, &sc.phi, &truth)?.embed(n), truth.clone(), 0, 0),
                Algorithm::GenieMmse => {
                    let est = genie_mmse(&sc.y, &sc.phi, &truth, &self.covariances, sc.noise_var.max(MMSE_NOISE_FLOOR))?;
                    (est.embed(n), truth.clone(), 0, 0)
                }
            };
            let mut o = TrialOutcome::new(&sc.x_true, &x_hat, &sc.active_set, &s_hat.indices);
            o.iterations = inner;
            o.outer_iterations = outer;
            o.wall_time = start.elapsed().as_secs_f64();
            out.insert(alg, o);
        }
        Ok(out)
    }
}


/// Zero every column outside `support`.
pub(crate) fn mask(x: &CMat, support: &SupportEstimate) -> CMat {
    let mut out = CMat::zeros(x.nrows(), x.ncols());
    for &i in &support.indices {
        out.set_column(i, &x.column(i));
    }
    out
}

/// Aggregated results of one (algorithm, SNR) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub algorithm: Algorithm,
    pub snr_db: f64,
    pub trials: usize,
    pub nase: f64,
    pub nase_db: f64,
    pub srr: f64,
    pub srr_alt: f64,
    pub mean_inner_iterations: f64,
    pub mean_outer_iterations: f64,
    pub mean_wall_ms: f64,
    pub seed: u64,
    pub scenario_hash: String,
}

impl ResultRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.algorithm.name(),
            self.snr_db,
            self.trials,
            self.nase,
            self.nase_db,
            self.srr,
            self.srr_alt,
            self.mean_inner_iterations,
            self.mean_outer_iterations,
            self.mean_wall_ms,
            self.seed,
            self.scenario_hash
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    /// Set when a failure cut the sweep short; `rows` holds what completed.
    pub error: Option<String>,
}

impl RunOutput {
    pub fn is_partial(&self) -> bool {
        self.error.is_some()
    }

    pub fn row(&self, algorithm: Algorithm, snr_db: f64) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm && r.snr_db == snr_db)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        writeln!(s, "{CSV_HEADER}").unwrap();
        for r in &self.rows {
            writeln!(s, "{}", r.csv_line()).unwrap();
        }
        if let Some(e) = &self.error {
            writeln!(s, "# partial: {}", e.replace('\n', " ")).unwrap();
        }
        s
    }
}

pub fn write_csv(out: &RunOutput, path: &Path) -> Result<()> {
    std::fs::write(path, out.to_csv())?;
    Ok(())
}

pub(crate) fn thread_pool(requested: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(effective_parallelism(requested))
        .build()
        .map_err(|e| JuiceError::InvalidConfig(format!("thread pool: {e}")))
}

fn aggregate(
    spec: &ExperimentSpec,
    alg: Algorithm,
    snr_db: f64,
    outcomes: &[TrialOutcome],
    hash: &str,
) -> Result<ResultRow> {
    let t = outcomes.len() as f64;
    let k = spec.system.n_active;
    let nase_v = nase(outcomes)?;
    Ok(ResultRow {
        algorithm: alg,
        snr_db,
        trials: outcomes.len(),
        nase: nase_v,
        nase_db: to_db(nase_v),
        srr: outcomes.iter().map(|o| srr(&o.s_true, &o.s_hat, k)).sum::<f64>() / t,
        srr_alt: outcomes.iter().map(|o| srr_symmetric(&o.s_true, &o.s_hat, k)).sum::<f64>() / t,
        mean_inner_iterations: outcomes.iter().map(|o| o.iterations as f64).sum::<f64>() / t,
        mean_outer_iterations: outcomes.iter().map(|o| o.outer_iterations as f64).sum::<f64>() / t,
        mean_wall_ms: if spec.record_timing {
            outcomes.iter().map(|o| o.wall_time * 1e3).sum::<f64>() / t
        } else {
            0.0
        },
        seed: spec.system.seed,
        scenario_hash: hash.to_string(),
    })
}

/// Full SNR sweep. Failures stop the sweep and are reported through
/// [`RunOutput::error`] together with the rows finished so far.
pub fn run(spec: &ExperimentSpec) -> Result<RunOutput> {
    let exp = Experiment::new(spec)?;
    let pool = thread_pool(spec.parallelism)?;
    let mut output = RunOutput::default();

    for (snr_index, &snr_db) in spec.snr_grid_db.iter().enumerate() {
        let cell = match pool.install(|| exp.cell(snr_index, snr_db)) {
            Ok(c) => c,
            Err(e) => {
                output.error = Some(format!("SNR {snr_db} dB: {e}"));
                return Ok(output);
            }
        };
        let mut h = Sha256::new();
        for (_, d) in &cell {
            h.update(d);
        }
        let digest: [u8; 32] = h.finalize().into();
        let hash: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();

        for &alg in &spec.algorithms {
            let outcomes: Vec<TrialOutcome> = cell.iter().map(|(m, _)| m[&alg].clone()).collect();
            match aggregate(spec, alg, snr_db, &outcomes, &hash) {
                Ok(row) => output.rows.push(row),
                Err(e) => {
                    output.error = Some(format!("{} at {snr_db} dB: {e}", alg.name()));
                    return Ok(output);
                }
            }
        }
    }
    Ok(output)
}
