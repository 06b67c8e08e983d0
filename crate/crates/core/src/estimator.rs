//! Channel re-estimation on a known or detected support.
//!
//! With `y = vec(Y^T)` and `Theta = Phi_S ⊗ I_M`, the linear MMSE estimate of
//! the zero-mean stacked channels is `x = R_diag Theta^H (Theta R_diag Theta^H + sigma^2 I)^{-1} y`.
//! The `tau_p M` square observation covariance is assembled block by block
//! from `sum_{i in S} (phi_i phi_i^H) ⊗ R~_i` and never materializes `Theta`.

use nalgebra::Cholesky;

use crate::error::{JuiceError, Result};
use crate::linalg::{min_eigenvalue, CMat, CVec, C64};
use crate::sim::CovarianceSet;

/// Detected-active UE indices, sorted and duplicate free.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SupportEstimate {
    pub indices: Vec<usize>,
}

impl SupportEstimate {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self { indices }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.indices.is_empty() {
            return Err(JuiceError::EmptySupport);
        }
        if let Some(&i) = self.indices.iter().find(|&&i| i >= n) {
            return Err(JuiceError::Dimension(format!("support index {i} out of range for N={n}")));
        }
        Ok(())
    }
}

/// Re-estimated channels of the UEs in `indices`, one column each.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedEstimate {
    pub x_hat_s: CMat,
    pub indices: Vec<usize>,
}

impl RefinedEstimate {
    pub fn empty(m: usize) -> Self {
        Self { x_hat_s: CMat::zeros(m, 0), indices: Vec::new() }
    }

    /// Full `M x N` matrix, zero outside the support.
    pub fn embed(&self, n: usize) -> CMat {
        let mut x = CMat::zeros(self.x_hat_s.nrows(), n);
        for (col, &i) in self.indices.iter().enumerate() {
            x.set_column(i, &self.x_hat_s.column(col));
        }
        x
    }
}

fn support_columns(phi: &CMat, support: &SupportEstimate) -> CMat {
    phi.select_columns(&support.indices)
}

/// `Theta R_diag Theta^H + noise_var I` via the Kronecker block structure.
pub fn observation_covariance(phi: &CMat, support: &SupportEstimate, cov: &CovarianceSet, noise_var: f64) -> CMat {
    let tau = phi.nrows();
    let m = cov.dim();
    let mut q = CMat::zeros(tau * m, tau * m);
    for &i in &support.indices {
        let r = &cov.r_tilde[i];
        for t in 0..tau {
            for s in 0..=t {
                let w = phi[(t, i)] * phi[(s, i)].conj();
                if w == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut blk = q.view_mut((t * m, s * m), (m, m));
                blk += r * w;
            }
        }
    }
    // fill the strictly upper block triangle from the lower one
    for t in 0..tau {
        for s in 0..t {
            let lower = q.view((t * m, s * m), (m, m)).adjoint();
            q.view_mut((s * m, t * m), (m, m)).copy_from(&lower);
        }
    }
    for d in 0..tau * m {
        q[(d, d)] += noise_var;
    }
    q
}

/// Linear MMSE channel estimate on `support` with zero prior mean.
pub fn mmse_estimate(
    y: &CMat,
    phi: &CMat,
    support: &SupportEstimate,
    cov: &CovarianceSet,
    noise_var: f64,
) -> Result<RefinedEstimate> {
    let (tau, m) = y.shape();
    let n = phi.ncols();
    if !(noise_var > 0.0) {
        return Err(JuiceError::InvalidConfig(format!("MMSE needs noise_var > 0 (got {noise_var})")));
    }
    support.check(n)?;
    if phi.nrows() != tau || cov.len() != n || cov.dim() != m {
        return Err(JuiceError::Dimension("Y, Phi and covariance set disagree".into()));
    }
    for &i in &support.indices {
        let r = &cov.r_tilde[i];
        let scale = r.norm().max(1.0);
        if min_eigenvalue(r) < -1e-10 * scale {
            return Err(JuiceError::NotPsd(i));
        }
    }

    let q = observation_covariance(phi, support, cov, noise_var);
    let chol = Cholesky::new(q).ok_or(JuiceError::Singular("MMSE observation covariance"))?;
    // y = vec(Y^T): block t is row t of Y
    let yv = CVec::from_iterator(tau * m, (0..tau).flat_map(|t| (0..m).map(move |a| y[(t, a)])));
    let u = chol.solve(&yv);

    let mut x_hat_s = CMat::zeros(m, support.len());
    for (col, &i) in support.indices.iter().enumerate() {
        let mut back = CVec::zeros(m);
        for t in 0..tau {
            back += u.rows(t * m, m) * phi[(t, i)].conj();
        }
        x_hat_s.set_column(col, &(&cov.r_tilde[i] * back));
    }
    Ok(RefinedEstimate { x_hat_s, indices: support.indices.clone() })
}

/// Least squares on the true support: `X_S^T = (Phi_S^H Phi_S)^{-1} Phi_S^H Y`.
pub fn genie_ls(y: &CMat, phi: &CMat, support: &SupportEstimate) -> Result<RefinedEstimate> {
    let tau = y.nrows();
    support.check(phi.ncols())?;
    if phi.nrows() != tau {
        return Err(JuiceError::Dimension(format!("Y has {tau} rows but Phi has {}", phi.nrows())));
    }
    if support.len() > tau {
        return Err(JuiceError::Singular("genie LS needs |S| <= tau_p"));
    }
    let phi_s = support_columns(phi, support);
    let gram = phi_s.adjoint() * &phi_s;
    // reject numerically rank-deficient pilots before trusting the factor
    let eig_min = gram.clone().symmetric_eigenvalues().min();
    let eig_max = gram.clone().symmetric_eigenvalues().max();
    if !(eig_min > 1e-12 * eig_max) {
        return Err(JuiceError::Singular("genie LS pilot Gram matrix"));
    }
    let chol = Cholesky::new(gram).ok_or(JuiceError::Singular("genie LS pilot Gram matrix"))?;
    let xt = chol.solve(&(phi_s.adjoint() * y));
    Ok(RefinedEstimate { x_hat_s: xt.transpose(), indices: support.indices.clone() })
}

/// [`mmse_estimate`] fed with the true support.
pub fn genie_mmse(
    y: &CMat,
    phi: &CMat,
    true_support: &SupportEstimate,
    cov: &CovarianceSet,
    noise_var: f64,
) -> Result<RefinedEstimate> {
    mmse_estimate(y, phi, true_support, cov, noise_var)
}
