//! Objective values of the reweighted problems, for diagnostics and tests.

use super::CovPrior;
use crate::linalg::CMat;

/// `1/2 ||Phi X^T - Y||_F^2 + beta1 sum_i g_i ||x_i||`.
pub fn objective_l21(x: &CMat, y: &CMat, phi: &CMat, beta1: f64, g: &[f64]) -> f64 {
    let fit = 0.5 * (phi * x.transpose() - y).norm_squared();
    let pen: f64 = x.column_iter().zip(g).map(|(c, w)| w * c.norm()).sum();
    fit + beta1 * pen
}

/// [`objective_l21`] plus `beta2 sum_i q_i ||x_i|| ||x_i x_i^H - R~_i||_F^2`.
#[allow(clippy::too_many_arguments)]
pub fn objective_cov(
    x: &CMat,
    y: &CMat,
    phi: &CMat,
    prior: &CovPrior<'_>,
    beta1: f64,
    beta2: f64,
    g: &[f64],
    q: &[f64],
) -> f64 {
    let mut val = objective_l21(x, y, phi, beta1, g);
    if beta2 != 0.0 {
        for (i, c) in x.column_iter().enumerate() {
            let xn = c.norm();
            if xn > 0.0 {
                let dev = crate::linalg::outer_deviation_sq(c, c, &prior.r[i], prior.fro_sq[i]);
                val += beta2 * q[i] * xn * dev;
            }
        }
    }
    val
}
