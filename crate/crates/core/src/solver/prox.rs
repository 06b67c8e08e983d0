//! Group soft-thresholding and the closed-form X-update.

use nalgebra::DVectorView;

use super::CovPrior;
use crate::linalg::{outer_deviation_sq, CMat, CVec, C64};

/// Proximal operator of `t ||.||_2`: scales `c` by `max(0, ||c|| - t) / ||c||`.
///
/// Returns zero whenever `||c|| <= t`, which includes `c = 0`.
pub fn group_shrink(c: &CVec, t: f64) -> CVec {
    let mut out = c.clone();
    shrink_in_place(&mut out, t);
    out
}

pub(crate) fn shrink_in_place(c: &mut CVec, t: f64) {
    let norm = c.norm();
    if norm <= t {
        c.fill(C64::new(0.0, 0.0));
    } else if t > 0.0 {
        *c *= C64::from((norm - t) / norm);
    }
}

/// Threshold weight `alpha_i = beta1 g_i + beta2 q_i ||z_i v_i^H - R~_i||_F^2`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn alpha(
    i: usize,
    z: DVectorView<'_, C64>,
    v: DVectorView<'_, C64>,
    g: &[f64],
    q: &[f64],
    prior: Option<&CovPrior<'_>>,
    beta1: f64,
    beta2: f64,
) -> f64 {
    let mut a = beta1 * g[i];
    if let Some(p) = prior {
        if beta2 != 0.0 {
            a += beta2 * q[i] * outer_deviation_sq(z, v, &p.r[i], p.fro_sq[i]);
        }
    }
    a
}

/// X-update of the paired splitting.
///
/// Minimizes `sum_i alpha_i ||x_i|| + rho ||X - S||_F^2` with
/// `S = (Z + V - (Lz + Lv)/rho) / 2`, i.e. `x_i = shrink(s_i, alpha_i / (2 rho))`.
#[allow(clippy::too_many_arguments)]
pub fn x_update(
    z: &CMat,
    v: &CMat,
    lambda_z: &CMat,
    lambda_v: &CMat,
    g: &[f64],
    q: &[f64],
    prior: Option<&CovPrior<'_>>,
    beta1: f64,
    beta2: f64,
    rho: f64,
) -> CMat {
    let (m, n) = z.shape();
    let mut x = CMat::zeros(m, n);
    let inv_rho = 1.0 / rho;
    for i in 0..n {
        let mut s: CVec = (z.column(i) + v.column(i) - (lambda_z.column(i) + lambda_v.column(i)) * C64::from(inv_rho))
            * C64::from(0.5);
        let a = alpha(i, z.column(i), v.column(i), g, q, prior, beta1, beta2);
        shrink_in_place(&mut s, a / (2.0 * rho));
        x.set_column(i, &s);
    }
    x
}

/// X-update of the single splitting: `x_i = shrink(z_i - lambda_i / rho, beta1 g_i / rho)`.
pub fn x_update_single(z: &CMat, lambda: &CMat, g: &[f64], beta1: f64, rho: f64) -> CMat {
    let (m, n) = z.shape();
    let mut x = CMat::zeros(m, n);
    for (i, gi) in g.iter().enumerate().take(n) {
        let mut c: CVec = z.column(i) - lambda.column(i) * C64::from(1.0 / rho);
        shrink_in_place(&mut c, beta1 * gi / rho);
        x.set_column(i, &c);
    }
    x
}
