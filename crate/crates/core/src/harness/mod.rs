//! Monte-Carlo experiment runner.
//!
//! Pilots, UE geometry and covariances are drawn once per experiment from the
//! master seed. For every (SNR, trial) index a scenario is drawn from its own
//! stream and handed to every configured algorithm, so all algorithms are
//! compared on identical data.

mod probe;
mod run;
mod spec;

pub use probe::{probe_csv, run_convergence_probe, write_probe_csv, ProbeRow, PROBE_CSV_HEADER};
pub use run::{run, write_csv, Experiment, ResultRow, RunOutput, TrialRecord, CSV_HEADER};
pub use spec::{
    effective_parallelism, parse_spec, tuned_overrides, validate_spec, Algorithm, DetectionSpec, ExperimentSpec, SolverOverrides,
};
