use std::f64::consts::PI;

use super::{GaussLegendre, SystemConfig, UEGeometry};
use crate::linalg::{CMat, C64};

pub const DEFAULT_QUADRATURE_NODES: usize = 257;

/// Spatial covariance `E[a(psi) a(psi)^H]` for `psi` uniform on
/// `[mean_aoa - spread, mean_aoa + spread]`, with the default 257-node rule.
pub fn compute_covariance(mean_aoa: f64, cfg: &SystemConfig) -> CMat {
    compute_covariance_with(&GaussLegendre::new(DEFAULT_QUADRATURE_NODES), mean_aoa, cfg)
}

/// Same as [`compute_covariance`] with a caller-supplied rule.
///
/// The result is Toeplitz and exactly Hermitian with a unit diagonal.
pub fn compute_covariance_with(rule: &GaussLegendre, mean_aoa: f64, cfg: &SystemConfig) -> CMat {
    let m = cfg.n_antennas;
    let spread = cfg.angular_spread;
    let k0 = -2.0 * PI * cfg.delta_r;
    let lag_value = |lag: usize| -> C64 {
        let lag = lag as f64;
        if spread == 0.0 {
            return C64::from_polar(1.0, k0 * lag * mean_aoa.cos());
        }
        let sum: C64 = rule.integrate(|t| C64::from_polar(1.0, k0 * lag * (mean_aoa + spread * t).cos()));
        sum * 0.5
    };
    let mut lags = Vec::with_capacity(m);
    lags.push(C64::new(1.0, 0.0));
    lags.extend((1..m).map(lag_value));
    CMat::from_fn(m, m, |r, c| if r >= c { lags[r - c] } else { lags[c - r].conj() })
}

/// Scaled covariances `R~_i = rho_i R_i`, one per UE.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceSet {
    pub r_tilde: Vec<CMat>,
}

impl CovarianceSet {
    pub fn build(geom: &UEGeometry, cfg: &SystemConfig) -> Self {
        let rule = GaussLegendre::new(DEFAULT_QUADRATURE_NODES);
        let r_tilde = geom
            .mean_aoa
            .iter()
            .zip(&geom.tx_power)
            .map(|(&theta, &rho)| compute_covariance_with(&rule, theta, cfg) * C64::from(rho))
            .collect();
        Self { r_tilde }
    }

    pub fn len(&self) -> usize {
        self.r_tilde.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_tilde.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.r_tilde.first().map_or(0, |r| r.nrows())
    }

    /// `||R~_i||_F^2` for every UE.
    pub fn fro_sq(&self) -> Vec<f64> {
        self.r_tilde.iter().map(|r| r.norm_squared()).collect()
    }
}
