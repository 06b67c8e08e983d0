//! Row-sparse MMV recovery with one ADMM engine.
//!
//! The engine splits the reweighted problem with two copies of `X`:
//! `Z` carries the data fit and `V` the covariance-deviation coupling. An
//! outer majorization-minimization loop refreshes the per-row weights `g`
//! (log-sum penalty) and `q` (indicator surrogate) from the current iterate.
//!
//! | mode       | weights `g`, `q`  | `beta2` | outer iterations |
//! |------------|-------------------|---------|------------------|
//! | `ADMM`     | fixed to 1        | 0       | 1                |
//! | `IRW_ADMM` | reweighted        | 0       | `l_max`          |
//! | `COV_ADMM` | reweighted        | > 0     | `l_max`          |

mod objective;
mod prox;
mod updates;
mod weights;

use serde::{Deserialize, Serialize};

use crate::error::{JuiceError, Result};
use crate::linalg::{column_norms, is_finite, CMat};
use crate::sim::CovarianceSet;

pub use objective::{objective_cov, objective_l21};
pub use prox::{group_shrink, x_update, x_update_single};
pub use updates::{cov_system, dual_update, v_update, z_update_cov, z_update_plain, PilotSystem};
pub use weights::{relax_indicator, weight_g, weight_q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "ADMM")]
    Admm,
    #[serde(rename = "IRW_ADMM")]
    IrwAdmm,
    #[serde(rename = "COV_ADMM")]
    CovAdmm,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Admm => "ADMM",
            Mode::IrwAdmm => "IRW_ADMM",
            Mode::CovAdmm => "COV_ADMM",
        }
    }
}

/// How the data-fit and penalty blocks are split.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    /// `X = Z`, `X = V` with duals for both; required for `COV_ADMM`.
    #[default]
    Paired,
    /// `X = Z` only. Valid when `beta2 = 0`.
    Single,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub rho: f64,
    pub eps0: f64,
    pub kappa: f64,
    pub l_max: usize,
    pub k_max: usize,
    pub eps_tol: f64,
    pub mode: Mode,
    #[serde(default)]
    pub splitting: Splitting,
}

impl SolverConfig {
    /// Default hyperparameters for a problem with `n` UEs, `m` antennas and
    /// noise variance `noise_var`.
    pub fn defaults(mode: Mode, noise_var: f64, n: usize, m: usize) -> Self {
        Self {
            beta1: default_beta1(noise_var, n),
            beta2: if mode == Mode::CovAdmm { 0.08 / (m * m) as f64 } else { 0.0 },
            rho: 1.0,
            eps0: 0.1 * (m as f64).sqrt(),
            kappa: 10.0,
            l_max: if mode == Mode::Admm { 1 } else { 10 },
            k_max: 100,
            eps_tol: 1e-4,
            mode,
            splitting: Splitting::Paired,
        }
    }

    /// The configuration actually run: `ADMM` forces a single outer pass and
    /// `beta2 = 0`, `IRW_ADMM` forces `beta2 = 0`.
    pub fn effective(&self) -> Self {
        let mut c = self.clone();
        match c.mode {
            Mode::Admm => {
                c.beta2 = 0.0;
                c.l_max = 1;
            }
            Mode::IrwAdmm => c.beta2 = 0.0,
            Mode::CovAdmm => c.splitting = Splitting::Paired,
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(JuiceError::InvalidConfig(m));
        if !(self.beta1 >= 0.0 && self.beta1.is_finite()) {
            return bad(format!("beta1 must be >= 0 (got {})", self.beta1));
        }
        if !(self.beta2 >= 0.0 && self.beta2.is_finite()) {
            return bad(format!("beta2 must be >= 0 (got {})", self.beta2));
        }
        if self.mode == Mode::CovAdmm && self.beta2 <= 0.0 {
            return bad("COV_ADMM requires beta2 > 0".into());
        }
        for (name, v) in [("rho", self.rho), ("eps0", self.eps0), ("kappa", self.kappa), ("eps_tol", self.eps_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be > 0 (got {v})"));
            }
        }
        if self.l_max == 0 || self.k_max == 0 {
            return bad("l_max and k_max must be at least 1".into());
        }
        Ok(())
    }
}

/// `sigma sqrt(2 log N)`; sigma is floored at 1e-6 so noiseless runs keep a
/// strictly positive penalty.
pub fn default_beta1(noise_var: f64, n: usize) -> f64 {
    noise_var.sqrt().max(1e-6) * (2.0 * (n.max(2) as f64).ln()).sqrt()
}

/// Borrowed covariances with their cached squared Frobenius norms.
#[derive(Debug, Clone)]
pub struct CovPrior<'a> {
    pub r: &'a [CMat],
    pub fro_sq: Vec<f64>,
}

impl<'a> CovPrior<'a> {
    pub fn new(cov: &'a CovarianceSet) -> Self {
        Self::from_slices(&cov.r_tilde)
    }

    pub fn from_slices(r: &'a [CMat]) -> Self {
        Self { r, fro_sq: r.iter().map(|m| m.norm_squared()).collect() }
    }
}

/// Diagnostics of one inner iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord {
    pub outer: usize,
    pub inner: usize,
    /// `||X - Z||_F`
    pub primal_z: f64,
    /// `||X - V||_F`
    pub primal_v: f64,
    /// `||X^(k) - X^(k-1)||_F`
    pub delta_x: f64,
    pub objective: f64,
}

/// ADMM iterates and reweighting state.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub x: CMat,
    pub z: CMat,
    pub v: CMat,
    pub lambda_z: CMat,
    pub lambda_v: CMat,
    pub g: Vec<f64>,
    pub q: Vec<f64>,
    /// Inner iterations run so far, across all outer passes.
    pub k: usize,
    /// Outer passes completed.
    pub l: usize,
    pub history: Vec<IterRecord>,
}

impl SolverState {
    /// All-zero iterates and unit weights.
    pub fn zeros(m: usize, n: usize) -> Self {
        let zero = CMat::zeros(m, n);
        Self {
            x: zero.clone(),
            z: zero.clone(),
            v: zero.clone(),
            lambda_z: zero.clone(),
            lambda_v: zero,
            g: vec![1.0; n],
            q: vec![1.0; n],
            k: 0,
            l: 0,
            history: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub x_hat: CMat,
    pub iterations_inner_total: usize,
    pub iterations_outer: usize,
    /// Whether the last inner loop met the tolerance before `k_max`.
    pub converged: bool,
    pub history: Vec<IterRecord>,
}

/// Problem data bound to a configuration; drives [`SolverState`] one inner
/// iteration at a time.
pub struct AdmmEngine<'a> {
    y: &'a CMat,
    phi: &'a CMat,
    system: PilotSystem,
    yt_phi_conj: CMat,
    prior: Option<CovPrior<'a>>,
    cfg: SolverConfig,
}

impl<'a> AdmmEngine<'a> {
    pub fn new(y: &'a CMat, phi: &'a CMat, cov: Option<&'a CovarianceSet>, cfg: &SolverConfig) -> Result<Self> {
        let cfg = cfg.effective();
        cfg.validate()?;
        let (tau, m) = y.shape();
        let n = phi.ncols();
        if phi.nrows() != tau {
            return Err(JuiceError::Dimension(format!("Y has {tau} rows but Phi has {}", phi.nrows())));
        }
        let prior = match (cfg.mode, cov) {
            (Mode::CovAdmm, None) => return Err(JuiceError::MissingCovariance("COV_ADMM")),
            (Mode::CovAdmm, Some(c)) => {
                if c.len() != n || c.dim() != m {
                    return Err(JuiceError::Dimension(format!(
                        "covariance set holds {} matrices of size {}, expected {n} of size {m}",
                        c.len(),
                        c.dim()
                    )));
                }
                Some(CovPrior::new(c))
            }
            _ => None,
        };
        let system = PilotSystem::new(phi).with_rho(cfg.rho)?;
        let yt_phi_conj = system.yt_phi_conj(y);
        Ok(Self { y, phi, system, yt_phi_conj, prior, cfg })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn init_state(&self) -> SolverState {
        SolverState::zeros(self.y.ncols(), self.phi.ncols())
    }

    /// Recompute `g` and `q` from the current `X` (unit weights in `ADMM` mode).
    pub fn refresh_weights(&self, state: &mut SolverState) {
        if self.cfg.mode == Mode::Admm {
            state.g.fill(1.0);
            state.q.fill(1.0);
            return;
        }
        let norms = column_norms(&state.x);
        state.g = weight_g(&norms, self.cfg.eps0);
        state.q = weight_q(&norms, self.cfg.kappa);
        debug_assert!(state.g.iter().all(|&g| g > 0.0 && g <= 1.0 / self.cfg.eps0));
    }

    /// One inner iteration: Z, V, X, then both duals.
    pub fn step(&self, state: &mut SolverState) -> Result<IterRecord> {
        let c = &self.cfg;
        let prior = self.prior.as_ref();
        let x_prev = state.x.clone();
        match c.splitting {
            Splitting::Paired => {
                state.z = match prior {
                    Some(p) => self.system.z_cov(
                        &state.x,
                        &state.v,
                        &state.lambda_z,
                        &self.yt_phi_conj,
                        p,
                        &state.q,
                        c.beta2,
                        c.rho,
                    )?,
                    None => self.system.z_plain(&state.x, &state.lambda_z, &self.yt_phi_conj, c.rho)?,
                };
                state.v = v_update(&state.x, &state.z, &state.lambda_v, prior, &state.q, c.beta2, c.rho);
                state.x = x_update(
                    &state.z,
                    &state.v,
                    &state.lambda_z,
                    &state.lambda_v,
                    &state.g,
                    &state.q,
                    prior,
                    c.beta1,
                    c.beta2,
                    c.rho,
                );
                dual_update(&mut state.lambda_z, &state.x, &state.z, c.rho);
                dual_update(&mut state.lambda_v, &state.x, &state.v, c.rho);
            }
            Splitting::Single => {
                state.z = self.system.z_plain(&state.x, &state.lambda_z, &self.yt_phi_conj, c.rho)?;
                state.x = x_update_single(&state.z, &state.lambda_z, &state.g, c.beta1, c.rho);
                dual_update(&mut state.lambda_z, &state.x, &state.z, c.rho);
                state.v.copy_from(&state.z);
                state.lambda_v.copy_from(&state.lambda_z);
            }
        }
        if !is_finite(&state.x) || !is_finite(&state.lambda_z) || !is_finite(&state.lambda_v) {
            return Err(JuiceError::NonFinite { outer: state.l, inner: state.k });
        }
        let objective = match prior {
            Some(p) => objective_cov(&state.x, self.y, self.phi, p, c.beta1, c.beta2, &state.g, &state.q),
            None => objective_l21(&state.x, self.y, self.phi, c.beta1, &state.g),
        };
        let rec = IterRecord {
            outer: state.l,
            inner: state.k,
            primal_z: (&state.x - &state.z).norm(),
            primal_v: (&state.x - &state.v).norm(),
            delta_x: (&state.x - x_prev).norm(),
            objective,
        };
        state.k += 1;
        state.history.push(rec);
        Ok(rec)
    }

    /// Inner loop stops once the iterate change and both primal residuals
    /// are below `eps_tol`, or after `k_max` iterations.
    pub fn is_settled(&self, rec: &IterRecord) -> bool {
        let tol = self.cfg.eps_tol;
        rec.delta_x < tol && rec.primal_z < tol && rec.primal_v < tol
    }

    /// Full outer/inner schedule. `observer` sees the cumulative inner
    /// iteration count and the iterate, starting with `(0, X^(0))`.
    pub fn run<F: FnMut(usize, &CMat)>(&self, state: &mut SolverState, mut observer: F) -> Result<RecoveryResult> {
        observer(state.k, &state.x);
        let mut converged = false;
        while state.l < self.cfg.l_max {
            self.refresh_weights(state);
            converged = false;
            for _ in 0..self.cfg.k_max {
                let rec = self.step(state)?;
                observer(state.k, &state.x);
                if self.is_settled(&rec) {
                    converged = true;
                    break;
                }
            }
            state.l += 1;
        }
        Ok(RecoveryResult {
            x_hat: state.x.clone(),
            iterations_inner_total: state.k,
            iterations_outer: state.l,
            converged,
            history: state.history.clone(),
        })
    }
}

/// Recover `X` from `Y = Phi X^T + W`. `cov` is required for `COV_ADMM`.
pub fn solve(y: &CMat, phi: &CMat, cov: Option<&CovarianceSet>, cfg: &SolverConfig) -> Result<RecoveryResult> {
    solve_observed(y, phi, cov, cfg, |_, _| {})
}

/// [`solve`] with a per-iteration observer.
pub fn solve_observed<F: FnMut(usize, &CMat)>(
    y: &CMat,
    phi: &CMat,
    cov: Option<&CovarianceSet>,
    cfg: &SolverConfig,
    observer: F,
) -> Result<RecoveryResult> {
    let engine = AdmmEngine::new(y, phi, cov, cfg)?;
    let mut state = engine.init_state();
    engine.run(&mut state, observer)
}
