//! Gaussian states as mean vector plus covariance matrix.

use nalgebra::{DMatrix, DVector};

use crate::constants::VACUUM_VARIANCE;
use crate::error::{CoreError, Result};
use crate::gaussian::gates::{symplectic_form, SymplecticGate};

/// Zero-mean-field Gaussian state over N modes in the (q..., p...) ordering,
/// with vacuum quadrature variance 1/2.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != cov.ncols() || cov.nrows() % 2 != 0 || mean.len() != cov.nrows() {
            return Err(CoreError::InvalidParameter(
                "covariance must be 2N x 2N with a matching mean".into(),
            ));
        }
        let asym = (&cov - cov.transpose()).amax();
        if asym > 1e-9 * cov.amax().max(1.0) {
            return Err(CoreError::InvalidParameter(format!(
                "covariance is not symmetric (deviation {asym:.3e})"
            )));
        }
        Ok(GaussianState { mean, cov })
    }

    pub fn vacuum(n: usize) -> Self {
        GaussianState {
            mean: DVector::zeros(2 * n),
            cov: DMatrix::identity(2 * n, 2 * n) * VACUUM_VARIANCE,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.cov.nrows() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn with_mean(&self, mean: DVector<f64>) -> Self {
        assert_eq!(mean.len(), self.cov.nrows());
        GaussianState { mean, cov: self.cov.clone() }
    }

    /// Apply a Gaussian unitary: mean -> S mean + d, cov -> S cov S^T.
    pub fn apply(&self, gate: &SymplecticGate) -> Self {
        assert_eq!(gate.n_modes(), self.n_modes(), "gate size mismatch");
        GaussianState {
            mean: gate.s() * &self.mean + gate.d(),
            cov: gate.s() * &self.cov * gate.s().transpose(),
        }
    }

    /// Tensor product with another state, its modes appended after ours.
    pub fn tensor(&self, other: &GaussianState) -> Self {
        let na = self.n_modes();
        let nb = other.n_modes();
        let n = na + nb;
        let mut mean = DVector::<f64>::zeros(2 * n);
        let mut cov = DMatrix::<f64>::zeros(2 * n, 2 * n);
        let put = |dst: &mut DMatrix<f64>, src: &DMatrix<f64>, off: usize, m: usize, total: usize| {
            for i in 0..m {
                for j in 0..m {
                    dst[(off + i, off + j)] += src[(i, j)];
                    dst[(off + i, total + off + j)] += src[(i, m + j)];
                    dst[(total + off + i, off + j)] += src[(m + i, j)];
                    dst[(total + off + i, total + off + j)] += src[(m + i, m + j)];
                }
            }
        };
        put(&mut cov, &self.cov, 0, na, n);
        put(&mut cov, &other.cov, na, nb, n);
        for i in 0..na {
            mean[i] = self.mean[i];
            mean[n + i] = self.mean[na + i];
        }
        for i in 0..nb {
            mean[na + i] = other.mean[i];
            mean[n + na + i] = other.mean[nb + i];
        }
        GaussianState { mean, cov }
    }

    /// Variance of the linear combination c . x of quadratures.
    pub fn quadratic_form(&self, coeffs: &DVector<f64>) -> f64 {
        (coeffs.transpose() * &self.cov * coeffs)[(0, 0)]
    }

    /// Check cov + (i/2) Omega >= -tol via the real embedding
    /// [[cov, -Omega/2], [Omega/2, cov]].
    pub fn check_uncertainty(&self, tol: f64) -> Result<()> {
        let n2 = self.cov.nrows();
        let omega = symplectic_form(self.n_modes());
        let mut m = DMatrix::<f64>::zeros(2 * n2, 2 * n2);
        for i in 0..n2 {
            for j in 0..n2 {
                m[(i, j)] = self.cov[(i, j)];
                m[(n2 + i, n2 + j)] = self.cov[(i, j)];
                m[(i, n2 + j)] = -0.5 * omega[(i, j)];
                m[(n2 + i, j)] = 0.5 * omega[(i, j)];
            }
        }
        let eig = m.symmetric_eigen();
        let min = eig.eigenvalues.min();
        if min < -tol {
            return Err(CoreError::Verification(format!(
                "uncertainty relation violated: min eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    /// Condition on a homodyne measurement of p(theta) = cos(theta) p + sin(theta) q
    /// of one mode, removing that mode from the state.
    pub fn homodyne_condition(&self, mode: usize, theta: f64, outcome: f64) -> Result<GaussianState> {
        let n = self.n_modes();
        if mode >= n {
            return Err(CoreError::InvalidMode(format!("mode {mode} of {n}")));
        }
        let n2 = 2 * n;
        let mut c = DVector::<f64>::zeros(n2);
        c[mode] = theta.sin();
        c[n + mode] = theta.cos();

        let sigma_c = &self.cov * &c;
        let var = (c.transpose() * &sigma_c)[(0, 0)];
        let scale = self.cov.amax().max(1.0);

        let (cov_new, mean_new) = if var > 1e-12 * scale {
            let gain = (outcome - (c.transpose() * &self.mean)[(0, 0)]) / var;
            let cov = &self.cov - &sigma_c * sigma_c.transpose() / var;
            let mean = &self.mean + &sigma_c * gain;
            (cov, mean)
        } else {
            // Deterministic quadrature: conditioning changes nothing.
            (self.cov.clone(), self.mean.clone())
        };

        // Drop the measured mode.
        let keep: Vec<usize> = (0..n).filter(|&i| i != mode).collect();
        let mut idx = Vec::with_capacity(2 * keep.len());
        for &i in &keep {
            idx.push(i);
        }
        for &i in &keep {
            idx.push(n + i);
        }
        let m = idx.len();
        let mut cov = DMatrix::<f64>::zeros(m, m);
        let mut mean = DVector::<f64>::zeros(m);
        for (r, &ir) in idx.iter().enumerate() {
            mean[r] = mean_new[ir];
            for (s, &is) in idx.iter().enumerate() {
                cov[(r, s)] = cov_new[(ir, is)];
            }
        }
        // Enforce exact symmetry against accumulated round-off.
        let cov = (&cov + cov.transpose()) * 0.5;
        Ok(GaussianState { mean, cov })
    }
}

/// Variance c^T cov c of a real quadrature combination. The shot-noise
/// reference for weights w on single-mode quadratures is sum(w^2) / 2.
pub fn nullifier_variance(state: &GaussianState, coeffs: &[f64]) -> f64 {
    assert_eq!(coeffs.len(), state.cov().nrows(), "need one coefficient per quadrature");
    let c = DVector::from_column_slice(coeffs);
    state.quadratic_form(&c)
}

/// Free-function form of homodyne conditioning.
pub fn homodyne_condition(
    state: &GaussianState,
    mode: usize,
    theta: f64,
    outcome: f64,
) -> Result<GaussianState> {
    state.homodyne_condition(mode, theta, outcome)
}
