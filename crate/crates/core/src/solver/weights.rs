//! Majorization weights of the outer reweighting loop.

/// `g_i = 1 / (eps0 + ||x_i||)`, the slope of the log-sum penalty.
pub fn weight_g(row_norms: &[f64], eps0: f64) -> Vec<f64> {
    row_norms.iter().map(|&u| 1.0 / (eps0 + u)).collect()
}

/// `q_i = kappa / (log(1 + kappa) (1 + kappa ||x_i||))`, the slope of
/// [`relax_indicator`].
pub fn weight_q(row_norms: &[f64], kappa: f64) -> Vec<f64> {
    let scale = kappa / kappa.ln_1p();
    row_norms.iter().map(|&u| scale / (1.0 + kappa * u)).collect()
}

/// Smooth surrogate of the activity indicator, `log(1 + kappa v) / log(1 + kappa)`.
pub fn relax_indicator(v: f64, kappa: f64) -> f64 {
    (kappa * v).ln_1p() / kappa.ln_1p()
}
