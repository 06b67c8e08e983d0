use rand::seq::index::sample;
use rand::Rng;
use sha2::{Digest, Sha256};

use super::{draw_channel, CovarianceSet, SystemConfig};
use crate::error::{JuiceError, Result};
use crate::linalg::{CMat, C64};
use crate::rng::complex_gaussian;

/// Per-UE mean angle of arrival and transmit power.
#[derive(Debug, Clone, PartialEq)]
pub struct UEGeometry {
    pub mean_aoa: Vec<f64>,
    pub tx_power: Vec<f64>,
}

impl UEGeometry {
    /// Mean AoAs uniform over `cfg.aoa_mean_range`; powers from
    /// [`UEGeometry::power_control`].
    pub fn draw<R: Rng + ?Sized>(rng: &mut R, cfg: &SystemConfig) -> Self {
        let [lo, hi] = cfg.aoa_mean_range;
        let mean_aoa: Vec<f64> = (0..cfg.n_users)
            .map(|_| if hi > lo { rng.random_range(lo..=hi) } else { lo })
            .collect();
        let tx_power = Self::power_control(&mean_aoa, cfg);
        Self { mean_aoa, tx_power }
    }

    /// Transmit powers inversely proportional to the average channel gain
    /// `tr(R_i) / M`. Every covariance built here has unit diagonal, so this
    /// is 1 for all UEs.
    pub fn power_control(mean_aoa: &[f64], cfg: &SystemConfig) -> Vec<f64> {
        let unit = UEGeometry { mean_aoa: mean_aoa.to_vec(), tx_power: vec![1.0; mean_aoa.len()] };
        CovarianceSet::build(&unit, cfg)
            .r_tilde
            .iter()
            .map(|r| cfg.n_antennas as f64 / r.trace().re)
            .collect()
    }
}

/// One coherence block.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioInstance {
    /// `tau_p x N` pilot matrix, unit-norm columns.
    pub phi: CMat,
    /// `M x N` effective channels; inactive columns are exactly zero.
    pub x_true: CMat,
    /// Sorted active UE indices (0-based).
    pub active_set: Vec<usize>,
    /// `tau_p x M` received pilot signal.
    pub y: CMat,
    pub noise_var: f64,
}

impl ScenarioInstance {
    /// SHA-256 over the observation, true channels and active set; used to
    /// check that algorithms compared at one (SNR, trial) index saw the same
    /// data.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        for m in [&self.phi, &self.x_true, &self.y] {
            for v in m.iter() {
                h.update(v.re.to_le_bytes());
                h.update(v.im.to_le_bytes());
            }
        }
        for &i in &self.active_set {
            h.update((i as u64).to_le_bytes());
        }
        h.update(self.noise_var.to_le_bytes());
        h.finalize().into()
    }
}

/// QPSK pilots `(±1 ± j)/sqrt(2)`, each column then scaled to unit norm.
pub fn generate_pilots<R: Rng + ?Sized>(rng: &mut R, tau_p: usize, n: usize) -> CMat {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut phi = CMat::from_fn(tau_p, n, |_, _| {
        let re = if rng.random::<bool>() { s } else { -s };
        let im = if rng.random::<bool>() { s } else { -s };
        C64::new(re, im)
    });
    for mut col in phi.column_iter_mut() {
        let norm = col.norm();
        col /= C64::from(norm);
    }
    phi
}

/// Draws the active set, channels of active UEs and noise, and forms
/// `Y = Phi X^T + W`.
pub fn make_scenario<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &SystemConfig,
    phi: &CMat,
    geom: &UEGeometry,
) -> Result<ScenarioInstance> {
    let (n, m, k, tau) = (cfg.n_users, cfg.n_antennas, cfg.n_active, cfg.tau_p);
    if k > n {
        return Err(JuiceError::InvalidConfig(format!("K={k} exceeds N={n}")));
    }
    if phi.shape() != (tau, n) {
        return Err(JuiceError::Dimension(format!("pilot matrix is {:?}, expected ({tau}, {n})", phi.shape())));
    }
    if geom.mean_aoa.len() != n || geom.tx_power.len() != n {
        return Err(JuiceError::Dimension(format!("geometry has {} UEs, expected {n}", geom.mean_aoa.len())));
    }

    let mut active_set = sample(rng, n, k).into_vec();
    active_set.sort_unstable();

    let mut x_true = CMat::zeros(m, n);
    for &i in &active_set {
        let h = draw_channel(rng, geom.mean_aoa[i], cfg);
        x_true.set_column(i, &(h * C64::from(geom.tx_power[i].sqrt())));
    }

    let noise_var = cfg.noise_var();
    let mut y = CMat::zeros(tau, m);
    for &i in &active_set {
        let p = phi.column(i);
        let x = x_true.column(i);
        y += p * x.transpose();
    }
    if noise_var > 0.0 {
        let sd = noise_var.sqrt();
        for v in y.iter_mut() {
            *v += complex_gaussian(rng) * sd;
        }
    }
    Ok(ScenarioInstance { phi: phi.clone(), x_true, active_set, y, noise_var })
}
