//! Synthetic system model: ULA channels with limited angular spread, their
//! spatial covariances, QPSK pilots and noisy pilot observations.

mod channel;
mod covariance;
mod quadrature;
mod scenario;

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{JuiceError, Result};

pub use channel::{draw_channel, ula_response};
pub use covariance::{compute_covariance, compute_covariance_with, CovarianceSet, DEFAULT_QUADRATURE_NODES};
pub use quadrature::GaussLegendre;
pub use scenario::{generate_pilots, make_scenario, ScenarioInstance, UEGeometry};

/// Dimensions, channel geometry and noise level of one experiment.
///
/// Serialized field names follow the usual notation (`N`, `M`, `K`, `tau_p`,
/// `P`); angles are in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Total number of UEs.
    #[serde(rename = "N")]
    pub n_users: usize,
    /// BS antenna count.
    #[serde(rename = "M")]
    pub n_antennas: usize,
    /// Active UEs per coherence block.
    #[serde(rename = "K")]
    pub n_active: usize,
    pub tau_p: usize,
    /// Physical paths per UE.
    #[serde(rename = "P")]
    pub n_paths: usize,
    /// Antenna spacing in wavelengths.
    pub delta_r: f64,
    pub aoa_mean_range: [f64; 2],
    /// Half-width of the uniform per-path deviation around the mean AoA.
    pub angular_spread: f64,
    pub snr_db: f64,
    pub seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            n_users: 200,
            n_antennas: 20,
            n_active: 10,
            tau_p: 20,
            n_paths: 200,
            delta_r: 0.5,
            aoa_mean_range: [PI / 3.0, 2.0 * PI / 3.0],
            angular_spread: 10f64.to_radians(),
            snr_db: 20.0,
            seed: 0,
        }
    }
}

impl SystemConfig {
    /// Reduced profile used for CI-sized runs.
    pub fn quick() -> Self {
        Self {
            n_users: 50,
            n_antennas: 8,
            n_active: 4,
            tau_p: 12,
            ..Self::default()
        }
    }

    /// Per-entry noise variance, `10^(-snr_db/10)`; zero for `snr_db = +inf`.
    pub fn noise_var(&self) -> f64 {
        if self.snr_db == f64::INFINITY {
            0.0
        } else {
            10f64.powf(-self.snr_db / 10.0)
        }
    }

    pub fn with_snr_db(&self, snr_db: f64) -> Self {
        Self { snr_db, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(JuiceError::InvalidConfig(msg));
        if self.n_users == 0 {
            return bad("N must be at least 1".into());
        }
        if self.n_active == 0 || self.n_active > self.n_users {
            return bad(format!("K must satisfy 1 <= K <= N (K={}, N={})", self.n_active, self.n_users));
        }
        if self.n_antennas == 0 {
            return bad("M must be at least 1".into());
        }
        if self.tau_p == 0 {
            return bad("tau_p must be at least 1".into());
        }
        if self.n_paths == 0 {
            return bad("P must be at least 1".into());
        }
        if !(self.delta_r > 0.0) || !self.delta_r.is_finite() {
            return bad(format!("delta_r must be positive (got {})", self.delta_r));
        }
        if !(self.angular_spread >= 0.0) || !self.angular_spread.is_finite() {
            return bad(format!("angular_spread must be >= 0 (got {})", self.angular_spread));
        }
        let [lo, hi] = self.aoa_mean_range;
        if !(lo > 0.0 && hi < PI && lo <= hi) {
            return bad(format!("aoa_mean_range must be a sub-interval of (0, pi) (got [{lo}, {hi}])"));
        }
        if self.snr_db.is_nan() {
            return bad("snr_db is NaN".into());
        }
        Ok(())
    }
}
