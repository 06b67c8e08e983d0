//! Z-, V- and dual updates.
//!
//! Both Z-updates solve `Z (Phi^T Phi* + D) = RHS` for a positive diagonal
//! `D`. The Gram part `Phi^T Phi* = U U^H` with `U = Phi^T` has rank at most
//! `tau_p`, so the solve goes through the Woodbury identity and only ever
//! factors a `tau_p x tau_p` Hermitian matrix.

use nalgebra::Cholesky;
use nalgebra::Dyn;

use super::CovPrior;
use crate::error::{JuiceError, Result};
use crate::linalg::{CMat, C64};

/// Pilot-dependent pieces of the Z-update, shared across iterations.
#[derive(Debug, Clone)]
pub struct PilotSystem {
    phi_t: CMat,
    phi_conj: CMat,
    /// Cached factor of `I + Phi* Phi^T / rho` for the constant-diagonal case.
    plain: Option<(f64, Cholesky<C64, Dyn>)>,
}

impl PilotSystem {
    pub fn new(phi: &CMat) -> Self {
        Self { phi_t: phi.transpose(), phi_conj: phi.conjugate(), plain: None }
    }

    /// Factor the constant system `Phi^T Phi* + rho I` once.
    pub fn with_rho(mut self, rho: f64) -> Result<Self> {
        let chol = self.capacitance(&vec![rho; self.phi_t.nrows()])?;
        self.plain = Some((rho, chol));
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.phi_t.nrows()
    }

    /// `Y^T Phi*`.
    pub fn yt_phi_conj(&self, y: &CMat) -> CMat {
        y.transpose() * &self.phi_conj
    }

    fn capacitance(&self, d: &[f64]) -> Result<Cholesky<C64, Dyn>> {
        let tau = self.phi_conj.nrows();
        let mut scaled = self.phi_t.clone();
        for (i, mut row) in scaled.row_iter_mut().enumerate() {
            row /= C64::from(d[i]);
        }
        let cap = CMat::identity(tau, tau) + &self.phi_conj * scaled;
        Cholesky::new(cap).ok_or(JuiceError::Singular("Z-update capacitance matrix"))
    }

    fn apply(&self, rhs: &CMat, d: &[f64], chol: &Cholesky<C64, Dyn>) -> CMat {
        // Z = P - (P U) C^{-1} U^H D^{-1},  P = RHS D^{-1}
        let mut p = rhs.clone();
        for (i, mut col) in p.column_iter_mut().enumerate() {
            col /= C64::from(d[i]);
        }
        let t = &p * &self.phi_t;
        let w = chol.solve(&t.adjoint()).adjoint();
        let mut corr = w * &self.phi_conj;
        for (i, mut col) in corr.column_iter_mut().enumerate() {
            col /= C64::from(d[i]);
        }
        p - corr
    }

    /// `RHS (Phi^T Phi* + diag(d))^{-1}`.
    pub fn solve_right(&self, rhs: &CMat, d: &[f64]) -> Result<CMat> {
        if let Some((rho, chol)) = &self.plain {
            if d.iter().all(|v| v == rho) {
                return Ok(self.apply(rhs, d, chol));
            }
        }
        let chol = self.capacitance(d)?;
        Ok(self.apply(rhs, d, &chol))
    }

    /// Z-update for the data-fit block without covariance coupling.
    pub fn z_plain(&self, x: &CMat, lambda: &CMat, yt_phi_conj: &CMat, rho: f64) -> Result<CMat> {
        let rhs = x * C64::from(rho) + lambda + yt_phi_conj;
        self.solve_right(&rhs, &vec![rho; x.ncols()])
    }

    /// Z-update with the covariance-deviation term; reduces to
    /// [`PilotSystem::z_plain`] when `beta2 = 0`.
    #[allow(clippy::too_many_arguments)]
    pub fn z_cov(
        &self,
        x: &CMat,
        v: &CMat,
        lambda_z: &CMat,
        yt_phi_conj: &CMat,
        prior: &CovPrior<'_>,
        q: &[f64],
        beta2: f64,
        rho: f64,
    ) -> Result<CMat> {
        let (rhs, d) = cov_system(x, v, lambda_z, yt_phi_conj, prior, q, beta2, rho);
        self.solve_right(&rhs, &d)
    }
}

/// Right-hand side `Y^T Phi* + B` and diagonal `D` of the covariance-aided
/// Z-update.
#[allow(clippy::too_many_arguments)]
pub fn cov_system(
    x: &CMat,
    v: &CMat,
    lambda_z: &CMat,
    yt_phi_conj: &CMat,
    prior: &CovPrior<'_>,
    q: &[f64],
    beta2: f64,
    rho: f64,
) -> (CMat, Vec<f64>) {
    let n = x.ncols();
    let mut rhs = x * C64::from(rho) + lambda_z + yt_phi_conj;
    let mut d = vec![rho; n];
    if beta2 != 0.0 {
        for i in 0..n {
            let xn = x.column(i).norm();
            if xn == 0.0 {
                continue;
            }
            let c = 2.0 * beta2 * q[i] * xn;
            let rv = &prior.r[i] * v.column(i);
            let mut col = rhs.column_mut(i);
            col += rv * C64::from(c);
            d[i] += c * v.column(i).norm_squared();
        }
    }
    (rhs, d)
}

/// `Z = (rho X + Lambda + Y^T Phi*)(Phi^T Phi* + rho I)^{-1}`.
pub fn z_update_plain(x: &CMat, lambda: &CMat, y: &CMat, phi: &CMat, rho: f64) -> Result<CMat> {
    check_shapes(x, y, phi)?;
    let sys = PilotSystem::new(phi).with_rho(rho)?;
    sys.z_plain(x, lambda, &sys.yt_phi_conj(y), rho)
}

/// `Z = (Y^T Phi* + B)(Phi^T Phi* + D)^{-1}` with
/// `b_i = 2 beta2 q_i ||x_i|| R~_i v_i + rho x_i + lambda_i` and
/// `d_i = 2 beta2 q_i ||x_i|| ||v_i||^2 + rho`.
#[allow(clippy::too_many_arguments)]
pub fn z_update_cov(
    x: &CMat,
    v: &CMat,
    lambda_z: &CMat,
    y: &CMat,
    phi: &CMat,
    prior: &CovPrior<'_>,
    q: &[f64],
    beta2: f64,
    rho: f64,
) -> Result<CMat> {
    check_shapes(x, y, phi)?;
    let sys = PilotSystem::new(phi);
    sys.z_cov(x, v, lambda_z, &sys.yt_phi_conj(y), prior, q, beta2, rho)
}

/// Columnwise V-update,
/// `v_i = (2 beta2 q_i ||x_i|| R~_i z_i + rho x_i + lambda_i) / (2 beta2 q_i ||x_i|| ||z_i||^2 + rho)`.
pub fn v_update(
    x: &CMat,
    z: &CMat,
    lambda_v: &CMat,
    prior: Option<&CovPrior<'_>>,
    q: &[f64],
    beta2: f64,
    rho: f64,
) -> CMat {
    let mut v = x * C64::from(rho) + lambda_v;
    let active = prior.filter(|_| beta2 != 0.0);
    for (i, qi) in q.iter().enumerate().take(x.ncols()) {
        let mut denom = rho;
        if let Some(p) = active {
            let xn = x.column(i).norm();
            if xn > 0.0 {
                let c = 2.0 * beta2 * qi * xn;
                let rz = &p.r[i] * z.column(i);
                let mut col = v.column_mut(i);
                col += rz * C64::from(c);
                denom += c * z.column(i).norm_squared();
            }
        }
        let mut col = v.column_mut(i);
        col /= C64::from(denom);
    }
    v
}

/// `Lambda + rho (X - other)`, in place.
pub fn dual_update(lambda: &mut CMat, x: &CMat, other: &CMat, rho: f64) {
    lambda.zip_zip_apply(x, other, |l, a, b| *l += (a - b) * rho);
}

fn check_shapes(x: &CMat, y: &CMat, phi: &CMat) -> Result<()> {
    let (m, n) = x.shape();
    let (tau, m_y) = y.shape();
    if phi.shape() != (tau, n) || m_y != m {
        return Err(JuiceError::Dimension(format!(
            "X is {m}x{n}, Y is {tau}x{m_y}, Phi is {}x{}",
            phi.nrows(),
            phi.ncols()
        )));
    }
    Ok(())
}
