//! Symplectic gates in the (q_1..q_N, p_1..p_N) quadrature ordering.
//!
//! A gate stores the Heisenberg-picture matrix S and displacement d of a
//! Gaussian unitary U, defined by U^dag x U = S x + d. For a product U_1 U_2
//! (U_2 acting first on the state) the matrices compose as S_1 S_2, i.e.
//! `earlier.then(&later)` multiplies the later matrix on the left.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// Real symplectic matrix plus displacement acting on N modes.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticGate {
    s: DMatrix<f64>,
    d: DVector<f64>,
}

/// Standard symplectic form for the (q..., p...) ordering.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        omega[(i, n + i)] = 1.0;
        omega[(n + i, i)] = -1.0;
    }
    omega
}

impl SymplecticGate {
    pub fn new(s: DMatrix<f64>, d: DVector<f64>) -> Result<Self> {
        if s.nrows() != s.ncols() || s.nrows() % 2 != 0 || d.len() != s.nrows() {
            return Err(CoreError::InvalidParameter(
                "symplectic matrix must be square 2N x 2N with a matching displacement".into(),
            ));
        }
        Ok(SymplecticGate { s, d })
    }

    pub fn identity(n: usize) -> Self {
        SymplecticGate { s: DMatrix::identity(2 * n, 2 * n), d: DVector::zeros(2 * n) }
    }

    pub fn n_modes(&self) -> usize {
        self.s.nrows() / 2
    }

    pub fn s(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn d(&self) -> &DVector<f64> {
        &self.d
    }

    /// Build from a real annihilation-basis matrix O (quadrature-non-mixing
    /// network): the quadrature representation is diag(O, O).
    pub fn from_annihilation_orthogonal(o: &DMatrix<f64>) -> Self {
        let n = o.nrows();
        let mut s = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] = o[(i, j)];
                s[(n + i, n + j)] = o[(i, j)];
            }
        }
        SymplecticGate { s, d: DVector::zeros(2 * n) }
    }

    /// Compose with a gate applied after this one: result = later o self.
    pub fn then(&self, later: &SymplecticGate) -> SymplecticGate {
        assert_eq!(self.n_modes(), later.n_modes(), "gate sizes must match");
        SymplecticGate { s: &later.s * &self.s, d: &later.s * &self.d + &later.d }
    }

    /// Embed this gate into an N-mode system, acting on the listed modes.
    /// `modes[i]` is the global index of the gate's local mode i.
    pub fn embed(&self, modes: &[usize], n: usize) -> SymplecticGate {
        let g = self.n_modes();
        assert_eq!(modes.len(), g, "one global index per local mode");
        let mut s = DMatrix::<f64>::identity(2 * n, 2 * n);
        let mut d = DVector::<f64>::zeros(2 * n);
        for &gi in modes {
            assert!(gi < n, "mode index out of range");
            s[(gi, gi)] = 0.0;
            s[(n + gi, n + gi)] = 0.0;
        }
        for (li, &gi) in modes.iter().enumerate() {
            d[gi] = self.d[li];
            d[n + gi] = self.d[g + li];
            for (lj, &gj) in modes.iter().enumerate() {
                s[(gi, gj)] = self.s[(li, lj)];
                s[(gi, n + gj)] = self.s[(li, g + lj)];
                s[(n + gi, gj)] = self.s[(g + li, lj)];
                s[(n + gi, n + gj)] = self.s[(g + li, g + lj)];
            }
        }
        SymplecticGate { s, d }
    }

    /// Frobenius norm of S Omega S^T - Omega.
    pub fn symplectic_defect(&self) -> f64 {
        let omega = symplectic_form(self.n_modes());
        (&self.s * &omega * self.s.transpose() - omega).norm()
    }

    /// Inverse gate: x -> S^-1 (x - d), using the symplectic inverse
    /// S^-1 = Omega^T S^T Omega.
    pub fn inverse(&self) -> SymplecticGate {
        let omega = symplectic_form(self.n_modes());
        let sinv = omega.transpose() * self.s.transpose() * &omega;
        let d = -(&sinv * &self.d);
        SymplecticGate { s: sinv, d }
    }
}

/// Balanced beamsplitter between modes j and k of an n-mode system:
/// a_j -> (a_j - a_k)/sqrt(2), a_k -> (a_j + a_k)/sqrt(2).
pub fn bsg_matrix(j: usize, k: usize, n: usize) -> SymplecticGate {
    assert!(j != k && j < n && k < n, "beamsplitter needs two distinct modes");
    let rt2inv = 1.0 / std::f64::consts::SQRT_2;
    let mut o = DMatrix::<f64>::identity(n, n);
    o[(j, j)] = rt2inv;
    o[(j, k)] = -rt2inv;
    o[(k, j)] = rt2inv;
    o[(k, k)] = rt2inv;
    SymplecticGate::from_annihilation_orthogonal(&o)
}

/// Balanced four-mode mixing gate, the product of four beamsplitters
/// B_jk B_lm B_jl B_km with the rightmost acting first.
pub fn foursplitter_matrix(j: usize, k: usize, l: usize, m: usize, n: usize) -> SymplecticGate {
    let modes = [j, k, l, m];
    for (x, &a) in modes.iter().enumerate() {
        assert!(a < n, "mode index out of range");
        for &b in &modes[x + 1..] {
            assert!(a != b, "foursplitter needs four distinct modes");
        }
    }
    let a = DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0, -1.0, -1.0, 1.0, //
            1.0, 1.0, -1.0, -1.0, //
            1.0, -1.0, 1.0, -1.0, //
            1.0, 1.0, 1.0, 1.0,
        ],
    ) / 2.0;
    SymplecticGate::from_annihilation_orthogonal(&a).embed(&modes, n)
}

/// Phase rotation R(theta): a -> e^{i theta} a, single mode.
pub fn rotation(theta: f64) -> SymplecticGate {
    let s = DMatrix::from_row_slice(
        2,
        2,
        &[theta.cos(), -theta.sin(), theta.sin(), theta.cos()],
    );
    SymplecticGate { s, d: DVector::zeros(2) }
}

/// Single-mode squeezer with quadrature action q -> s q, p -> p/s.
/// Negative s folds in a half turn; s = 0 is rejected.
pub fn squeezer(s: f64) -> Result<SymplecticGate> {
    if s == 0.0 || !s.is_finite() {
        return Err(CoreError::SingularGate(format!("squeeze factor {s}")));
    }
    let m = DMatrix::from_row_slice(2, 2, &[s, 0.0, 0.0, 1.0 / s]);
    Ok(SymplecticGate { s: m, d: DVector::zeros(2) })
}

/// Displacement D(alpha): a -> a + alpha, single mode.
pub fn displacement(alpha: Complex64) -> SymplecticGate {
    let rt2 = std::f64::consts::SQRT_2;
    SymplecticGate {
        s: DMatrix::identity(2, 2),
        d: DVector::from_vec(vec![rt2 * alpha.re, rt2 * alpha.im]),
    }
}

/// Single-mode gate V(theta_1, theta_2) =
/// R((theta_1 + theta_2)/2) S(tan((theta_1 - theta_2)/2)) R((theta_1 + theta_2)/2).
pub fn v_gate(theta1: f64, theta2: f64) -> Result<SymplecticGate> {
    let half_diff = (theta1 - theta2) / 2.0;
    let t = half_diff.tan();
    if t == 0.0 || !t.is_finite() || t.abs() > 1e12 || t.abs() < 1e-12 {
        return Err(CoreError::SingularGate(format!(
            "v_gate angles {theta1}, {theta2} give squeeze factor tan({half_diff}) = {t}"
        )));
    }
    let half_sum = (theta1 + theta2) / 2.0;
    let r = rotation(half_sum);
    Ok(r.then(&squeezer(t)?).then(&r))
}
