use rand::Rng;
use std::f64::consts::PI;

use super::SystemConfig;
use crate::linalg::{CVec, C64};
use crate::rng::complex_gaussian;

/// ULA steering vector, `[a(psi)]_m = exp(-j (m-1) 2 pi delta_r cos psi)`.
pub fn ula_response(psi: f64, m: usize, delta_r: f64) -> CVec {
    let phase = -2.0 * PI * delta_r * psi.cos();
    CVec::from_iterator(m, (0..m).map(|k| C64::from_polar(1.0, phase * k as f64)))
}

/// One channel realization `h = P^{-1/2} sum_p w_p a(psi_p)`.
///
/// Per path the generator is consumed in the order: angle deviation, then
/// path gain.
pub fn draw_channel<R: Rng + ?Sized>(rng: &mut R, mean_aoa: f64, cfg: &SystemConfig) -> CVec {
    let m = cfg.n_antennas;
    let spread = cfg.angular_spread;
    let mut h = CVec::zeros(m);
    for _ in 0..cfg.n_paths {
        let delta = if spread > 0.0 { rng.random_range(-spread..=spread) } else { 0.0 };
        let gain = complex_gaussian(rng);
        let phase = -2.0 * PI * cfg.delta_r * (mean_aoa + delta).cos();
        for (k, hk) in h.iter_mut().enumerate() {
            *hk += gain * C64::from_polar(1.0, phase * k as f64);
        }
    }
    h / C64::from((cfg.n_paths as f64).sqrt())
}
