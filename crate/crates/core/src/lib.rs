//! Joint user identification and channel estimation for grant-free massive
//! MIMO access.
//!
//! The crate is split along the processing chain:
//!
//! * [`sim`] draws spatially correlated ULA channels, their covariances,
//!   QPSK pilots and noisy pilot observations.
//! * [`solver`] recovers the row-sparse effective channel matrix with a
//!   single ADMM engine run in one of three modes (plain l2,1, iteratively
//!   reweighted, covariance aided).
//! * [`estimator`] re-estimates channels on a detected support with the
//!   linear MMSE estimator, plus the genie-aided LS/MMSE baselines.
//! * [`metrics`] extracts supports from estimates and scores them (NASE, SRR).
//! * [`harness`] runs Monte-Carlo experiments over an SNR grid and writes CSV.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimator;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod rng;
pub mod sim;
pub mod solver;

pub use error::{JuiceError, Result};
pub use estimator::{genie_ls, genie_mmse, mmse_estimate, RefinedEstimate, SupportEstimate};
pub use linalg::{CMat, CVec, C64};
pub use metrics::{detect_support, nase, srr, srr_symmetric, ThresholdMode, TrialOutcome};
pub use sim::{
    compute_covariance, draw_channel, generate_pilots, make_scenario, ula_response, CovarianceSet,
    ScenarioInstance, SystemConfig, UEGeometry,
};
pub use solver::{solve, Mode, RecoveryResult, SolverConfig, SolverState};
