use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{JuiceError, Result};
use crate::metrics::ThresholdMode;
use crate::sim::SystemConfig;
use crate::solver::{default_beta1, Mode, SolverConfig, Splitting};

/// Everything a sweep can report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "ADMM")]
    Admm,
    #[serde(rename = "IRW_ADMM")]
    IrwAdmm,
    #[serde(rename = "COV_ADMM")]
    CovAdmm,
    /// Covariance-aided detection followed by MMSE re-estimation.
    #[serde(rename = "COV_ADMM_MMSE")]
    CovAdmmMmse,
    #[serde(rename = "GENIE_LS")]
    GenieLs,
    #[serde(rename = "GENIE_MMSE")]
    GenieMmse,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Admm,
        Algorithm::IrwAdmm,
        Algorithm::CovAdmm,
        Algorithm::CovAdmmMmse,
        Algorithm::GenieLs,
        Algorithm::GenieMmse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Admm => "ADMM",
            Algorithm::IrwAdmm => "IRW_ADMM",
            Algorithm::CovAdmm => "COV_ADMM",
            Algorithm::CovAdmmMmse => "COV_ADMM_MMSE",
            Algorithm::GenieLs => "GENIE_LS",
            Algorithm::GenieMmse => "GENIE_MMSE",
        }
    }

    /// Solver mode behind the algorithm, if it runs the ADMM engine.
    pub fn solver_mode(self) -> Option<Mode> {
        match self {
            Algorithm::Admm => Some(Mode::Admm),
            Algorithm::IrwAdmm => Some(Mode::IrwAdmm),
            Algorithm::CovAdmm | Algorithm::CovAdmmMmse => Some(Mode::CovAdmm),
            Algorithm::GenieLs | Algorithm::GenieMmse => None,
        }
    }
}

/// Per-algorithm hyperparameter overrides. Unset fields keep the defaults of
/// [`SolverConfig::defaults`]; `beta1` wins over `beta1_scale`, which
/// multiplies the SNR-dependent default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta1_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub splitting: Option<Splitting>,
}

impl SolverOverrides {
    /// Field-wise merge: values set in `self` win over `fallback`.
    pub fn or(&self, fallback: &SolverOverrides) -> SolverOverrides {
        macro_rules! pick {
            ($($f:ident),*) => { SolverOverrides { $($f: self.$f.or(fallback.$f)),* } };
        }
        pick!(beta1, beta1_scale, beta2, rho, eps0, kappa, l_max, k_max, eps_tol, splitting)
    }

    pub fn apply(&self, base: &mut SolverConfig, noise_var: f64, n: usize) {
        if let Some(s) = self.beta1_scale {
            base.beta1 = s * default_beta1(noise_var, n);
        }
        macro_rules! take {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { base.$f = v; })* };
        }
        take!(beta1, beta2, rho, eps0, kappa, l_max, k_max, eps_tol, splitting);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSpec {
    pub mode: ThresholdMode,
    pub value: f64,
}

impl Default for DetectionSpec {
    fn default() -> Self {
        Self { mode: ThresholdMode::Relative, value: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub trials: usize,
    pub snr_grid_db: Vec<f64>,
    pub algorithms: Vec<Algorithm>,
    pub output_path: String,
    /// Worker threads; 0 uses every available core.
    pub parallelism: usize,
    /// Feed the true support to the MMSE stage of `COV_ADMM_MMSE`.
    pub mmse_oracle_support: bool,
    /// Fill `mean_wall_ms`; off by default so that output is reproducible.
    pub record_timing: bool,
    pub system: SystemConfig,
    pub detection: DetectionSpec,
    pub solver_overrides: BTreeMap<Algorithm, SolverOverrides>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            trials: 500,
            snr_grid_db: (0..=10).map(|i| 2.0 * i as f64).collect(),
            algorithms: Algorithm::ALL.to_vec(),
            output_path: "results.csv".into(),
            parallelism: 0,
            mmse_oracle_support: false,
            record_timing: false,
            system: SystemConfig::default(),
            detection: DetectionSpec::default(),
            solver_overrides: tuned_overrides(),
        }
    }
}

/// Hyperparameters tuned on the default geometry (N=200, M=20, K=10, tau_p=20).
pub fn tuned_overrides() -> BTreeMap<Algorithm, SolverOverrides> {
    let single = Some(Splitting::Single);
    BTreeMap::from([
        (Algorithm::Admm, SolverOverrides { splitting: single, ..Default::default() }),
        (
            Algorithm::IrwAdmm,
            SolverOverrides { eps0: Some(1.0), k_max: Some(10), splitting: single, ..Default::default() },
        ),
        (
            Algorithm::CovAdmm,
            SolverOverrides {
                beta1_scale: Some(1.5),
                eps0: Some(1.0),
                k_max: Some(10),
                ..Default::default()
            },
        ),
    ])
}

impl ExperimentSpec {
    /// CI-sized profile: N=50, M=8, K=4, tau_p=12, 50 trials.
    pub fn quick(mut self) -> Self {
        let q = SystemConfig::quick();
        self.system.n_users = q.n_users;
        self.system.n_antennas = q.n_antennas;
        self.system.n_active = q.n_active;
        self.system.tau_p = q.tau_p;
        self.trials = 50;
        self
    }

    /// Solver configuration for `mode` at noise variance `noise_var`.
    pub fn solver_config(&self, algorithm: Algorithm, noise_var: f64) -> Option<SolverConfig> {
        let mode = algorithm.solver_mode()?;
        let (n, m) = (self.system.n_users, self.system.n_antennas);
        let mut cfg = SolverConfig::defaults(mode, noise_var, n, m);
        // COV_ADMM_MMSE shares the detection stage of COV_ADMM
        let key = if algorithm == Algorithm::CovAdmmMmse { Algorithm::CovAdmm } else { algorithm };
        if let Some(o) = self.solver_overrides.get(&key) {
            o.apply(&mut cfg, noise_var, n);
        }
        Some(cfg)
    }

    /// Checks every cross-field constraint. Errors carry the offending key.
    pub fn check(&self) -> std::result::Result<(), (&'static str, String)> {
        self.system.validate().map_err(|e| (system_key(&e.to_string()), e.to_string()))?;
        if self.trials == 0 {
            return Err(("trials", "trials must be at least 1".into()));
        }
        if self.snr_grid_db.is_empty() {
            return Err(("snr_grid_db", "snr_grid_db must not be empty".into()));
        }
        if self.snr_grid_db.iter().any(|v| v.is_nan()) {
            return Err(("snr_grid_db", "snr_grid_db contains NaN".into()));
        }
        if self.algorithms.is_empty() {
            return Err(("algorithms", "algorithms must not be empty".into()));
        }
        if !(self.detection.value >= 0.0) {
            return Err(("value", "detection value must be >= 0".into()));
        }
        for &alg in &self.algorithms {
            if matches!(alg, Algorithm::GenieLs) && self.system.n_active > self.system.tau_p {
                return Err(("K", format!("GENIE_LS needs K <= tau_p (K={}, tau_p={})", self.system.n_active, self.system.tau_p)));
            }
            for &snr in &self.snr_grid_db {
                if let Some(cfg) = self.solver_config(alg, self.system.with_snr_db(snr).noise_var()) {
                    cfg.effective().validate().map_err(|e| ("solver_overrides", format!("{}: {e}", alg.name())))?;
                }
            }
        }
        Ok(())
    }

    /// TOML rendering of the full, normalized spec.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("experiment spec is always representable in TOML")
    }
}

fn system_key(msg: &str) -> &'static str {
    for (needle, key) in [
        ("K must", "K"),
        ("N must", "N"),
        ("M must", "M"),
        ("tau_p", "tau_p"),
        ("P must", "P"),
        ("delta_r", "delta_r"),
        ("angular_spread", "angular_spread"),
        ("aoa_mean_range", "aoa_mean_range"),
        ("snr_db", "snr_db"),
    ] {
        if msg.contains(needle) {
            return key;
        }
    }
    "system"
}

/// Line (1-based) of the first `key = ...` assignment in `text`, or 1.
fn line_of_key(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map_or(1, |p| p + 1)
}

/// Parse and normalize a spec document; `origin` labels diagnostics.
pub fn parse_spec(text: &str, origin: &str) -> Result<ExperimentSpec> {
    let mut spec: ExperimentSpec = toml::from_str(text).map_err(|e| {
        let line = e.span().map_or(1, |s| text[..s.start.min(text.len())].lines().count().max(1));
        let line = if e.span().is_some_and(|s| text[..s.start.min(text.len())].ends_with('\n')) { line + 1 } else { line };
        JuiceError::Spec { path: origin.into(), line, msg: e.message().to_string() }
    })?;
    // tables given in the file refine the tuned defaults instead of replacing them
    for (alg, tuned) in tuned_overrides() {
        let merged = spec.solver_overrides.get(&alg).map_or(tuned.clone(), |o| o.or(&tuned));
        spec.solver_overrides.insert(alg, merged);
    }
    spec.check().map_err(|(key, msg)| JuiceError::Spec { path: origin.into(), line: line_of_key(text, key), msg })?;
    Ok(spec)
}

/// Read, parse and normalize the spec at `path`.
pub fn validate_spec(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_spec(&text, &path.display().to_string())
}

/// `JUICE_THREADS` wins over `requested`; 0 means all cores.
pub fn effective_parallelism(requested: usize) -> usize {
    std::env::var("JUICE_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(requested)
}
