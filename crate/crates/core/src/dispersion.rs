//! Cavity dispersion: waveguide beta coefficients to per-mode resonance
//! shifts, free spectral range, photon-level Kerr coupling, and pair
//! phase mismatch.
//!
//! Conventions: the wavevector around the pump is beta(omega) = sum_s
//! beta_s (omega - omega0)^s / s! with beta[0] = beta_1 the group delay per
//! meter. Resonances satisfy beta(omega_l) L = 2 pi l; expanding the root
//! gives omega_l = omega0 + l d_omega + sum_{s>=2} zeta_s l^s / s! with
//! d_omega = 2 pi / (beta_1 L). All frequencies are handled as offsets from
//! omega0 so optical-scale magnitudes never meet kHz-scale shifts.

use nalgebra::{DMatrix, DVector};

use crate::constants::{C_LIGHT, HBAR};
use crate::error::{CoreError, Result};

/// Waveguide dispersion series plus the indices of the guided mode.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionProfile {
    beta: Vec<f64>,
    lambda0: f64,
    n0: f64,
    ng: f64,
}

impl DispersionProfile {
    /// `beta[s-1]` holds beta_s in s^s/m, starting at the group delay
    /// beta_1 which must be positive.
    pub fn new(beta: Vec<f64>, lambda0: f64, n0: f64, ng: f64) -> Result<Self> {
        if beta.is_empty() || !beta.iter().all(|b| b.is_finite()) {
            return Err(CoreError::InvalidParameter(
                "dispersion series must be non-empty and finite".into(),
            ));
        }
        if beta[0] <= 0.0 {
            return Err(CoreError::InvalidParameter(format!(
                "group delay beta1 = {} must be positive",
                beta[0]
            )));
        }
        if !(lambda0 > 0.0 && n0 > 0.0 && ng > 0.0) {
            return Err(CoreError::InvalidParameter(
                "wavelength and refractive indices must be positive".into(),
            ));
        }
        Ok(DispersionProfile { beta, lambda0, n0, ng })
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// beta_s by order (1-based); zero beyond the stored series.
    pub fn beta_order(&self, s: usize) -> f64 {
        if s == 0 {
            0.0
        } else {
            self.beta.get(s - 1).copied().unwrap_or(0.0)
        }
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn ng(&self) -> f64 {
        self.ng
    }

    /// Pump carrier frequency 2 pi c / lambda0 in rad/s.
    pub fn omega0(&self) -> f64 {
        std::f64::consts::TAU * C_LIGHT / self.lambda0
    }
}

/// Ring geometry and coupling budget. Loss rates derive from the quality
/// factors: kappa = omega0/Q_loaded splits into intrinsic omega0/Q_intrinsic
/// and out-coupling remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct CavitySpec {
    pub circumference: f64,
    pub q_loaded: f64,
    pub q_intrinsic: f64,
    pub n2: f64,
    pub mode_volume: f64,
    pub width: f64,
    pub height: f64,
}

impl CavitySpec {
    pub fn new(
        circumference: f64,
        q_loaded: f64,
        q_intrinsic: f64,
        n2: f64,
        mode_volume: f64,
        width: f64,
        height: f64,
    ) -> Result<Self> {
        if !(circumference > 0.0 && mode_volume > 0.0) {
            return Err(CoreError::InvalidParameter(
                "circumference and mode volume must be positive".into(),
            ));
        }
        if !(q_loaded > 0.0 && q_intrinsic >= q_loaded) {
            return Err(CoreError::InvalidParameter(format!(
                "need Q_intrinsic >= Q_loaded > 0, got {q_intrinsic} and {q_loaded}"
            )));
        }
        Ok(CavitySpec {
            circumference,
            q_loaded,
            q_intrinsic,
            n2,
            mode_volume,
            width,
            height,
        })
    }

    /// Rectangular-core approximation: mode volume = width x height x
    /// circumference.
    pub fn rectangular(
        circumference: f64,
        q_loaded: f64,
        q_intrinsic: f64,
        n2: f64,
        width: f64,
        height: f64,
    ) -> Result<Self> {
        CavitySpec::new(
            circumference,
            q_loaded,
            q_intrinsic,
            n2,
            width * height * circumference,
            width,
            height,
        )
    }

    /// Total linewidth (rad/s).
    pub fn kappa(&self, omega0: f64) -> f64 {
        omega0 / self.q_loaded
    }

    /// Intrinsic-loss part of the linewidth (rad/s).
    pub fn kappa_intrinsic(&self, omega0: f64) -> f64 {
        omega0 / self.q_intrinsic
    }

    /// Out-coupling part of the linewidth (rad/s).
    pub fn kappa_out(&self, omega0: f64) -> f64 {
        self.kappa(omega0) - self.kappa_intrinsic(omega0)
    }

    /// Fraction of intracavity photons leaving through the bus waveguide.
    pub fn escape_efficiency(&self) -> f64 {
        1.0 - self.q_loaded / self.q_intrinsic
    }
}

/// Quantum-ring waveguide cross-section candidates as
/// (width m, height m, beta1 s/m, beta2 s^2/m, beta3 s^3/m), ordered from
/// flattest to steepest group-velocity dispersion. Each pairs with a
/// circumference chosen for a 9.32 GHz mode spacing.
pub const GEOMETRY_CANDIDATES: [(f64, f64, f64, f64, f64); 4] = [
    (2.7e-6, 0.81e-6, 6.834e-9, -0.133e-26, 0.335e-39),
    (2.7e-6, 0.79e-6, 6.837e-9, -0.988e-26, -1.090e-39),
    (2.4e-6, 0.79e-6, 6.850e-9, -2.359e-26, -0.383e-39),
    (2.1e-6, 0.83e-6, 6.865e-9, -13.27e-26, 1.226e-39),
];

/// Closed-form quadratic and cubic resonance-shift coefficients:
///
/// zeta_2 = -4 pi^2 beta_2 / (L^2 beta_1^3)
/// zeta_3 = 8 pi^3 (3 beta_2^2 - beta_1 beta_3) / (L^3 beta_1^5)
pub fn zeta_from_beta(profile: &DispersionProfile, circumference: f64) -> Result<(f64, f64)> {
    if circumference <= 0.0 {
        return Err(CoreError::InvalidParameter(
            "circumference must be positive".into(),
        ));
    }
    let b1 = profile.beta_order(1);
    if b1 == 0.0 {
        return Err(CoreError::InvalidParameter("beta1 must be nonzero".into()));
    }
    let b2 = profile.beta_order(2);
    let b3 = profile.beta_order(3);
    let pi = std::f64::consts::PI;
    let l2 = circumference * circumference;
    let l3 = l2 * circumference;
    let z2 = -4.0 * pi * pi * b2 / (l2 * b1.powi(3));
    let z3 = 8.0 * pi.powi(3) * (3.0 * b2 * b2 - b1 * b3) / (l3 * b1.powi(5));
    Ok((z2, z3))
}

/// Resonance-shift coefficients zeta_2..zeta_max_order obtained numerically:
/// Newton-solve the resonance condition for l in [-50, 50] and least-squares
/// fit the residuals against l^s/s!. Covers orders the closed forms do not.
pub fn zeta_numeric(
    profile: &DispersionProfile,
    circumference: f64,
    max_order: usize,
) -> Result<Vec<f64>> {
    if !(2..=8).contains(&max_order) {
        return Err(CoreError::InvalidParameter(format!(
            "shift orders {max_order} outside 2..=8"
        )));
    }
    if circumference <= 0.0 {
        return Err(CoreError::InvalidParameter(
            "circumference must be positive".into(),
        ));
    }
    let beta = profile.beta();
    let b1 = beta[0];
    let d_omega = std::f64::consts::TAU / (b1 * circumference);

    let detuning = |x: f64| -> f64 {
        let mut sum = 0.0;
        let mut fact = 1.0;
        let mut pow = 1.0;
        for (i, &b) in beta.iter().enumerate() {
            fact *= (i + 1) as f64;
            pow *= x;
            sum += b * pow / fact;
        }
        sum
    };
    let slope = |x: f64| -> f64 {
        let mut sum = 0.0;
        let mut fact = 1.0;
        let mut pow = 1.0;
        for (i, &b) in beta.iter().enumerate() {
            if i > 0 {
                fact *= i as f64;
                pow *= x;
            }
            sum += b * pow / fact;
        }
        sum
    };

    let span: Vec<i64> = (-50..=50).collect();
    let n_orders = max_order - 1;
    let mut design = DMatrix::<f64>::zeros(span.len(), n_orders);
    let mut rhs = DVector::<f64>::zeros(span.len());
    for (row, &l) in span.iter().enumerate() {
        let target = std::f64::consts::TAU * l as f64;
        let mut x = l as f64 * d_omega;
        for _ in 0..40 {
            let err = detuning(x) * circumference - target;
            let dx = err / (slope(x) * circumference);
            x -= dx;
            if dx.abs() < 1e-9 {
                break;
            }
        }
        rhs[row] = x - l as f64 * d_omega;
        let lf = l as f64;
        for (col, s) in (2..=max_order).enumerate() {
            let fact: f64 = (1..=s).map(|v| v as f64).product();
            design[(row, col)] = lf.powi(s as i32) / fact;
        }
    }

    // Column scaling keeps the normal system well conditioned across the
    // wide dynamic range of l^s.
    let mut scales = vec![0.0f64; n_orders];
    for (col, scale) in scales.iter_mut().enumerate() {
        *scale = design.column(col).norm().max(f64::MIN_POSITIVE);
        for row in 0..span.len() {
            design[(row, col)] /= *scale;
        }
    }
    let svd = design.svd(true, true);
    let sol = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| CoreError::InvalidParameter(format!("shift fit failed: {e}")))?;
    Ok(sol
        .iter()
        .zip(scales.iter())
        .map(|(v, s)| v / s)
        .collect())
}

/// Offset of resonance l from the carrier: l d_omega + sum zeta_s l^s / s!,
/// with zetas[i] = zeta_{i+2}. Compensated summation keeps the evaluation
/// deterministic and stable for large mode indices.
pub fn resonance_offset(l: i64, delta_omega: f64, zetas: &[f64]) -> f64 {
    let lf = l as f64;
    let mut sum = lf * delta_omega;
    let mut comp = 0.0f64;
    let mut fact = 1.0f64;
    let mut pow = lf;
    for (i, &z) in zetas.iter().enumerate() {
        let s = i + 2;
        fact *= s as f64;
        pow *= lf;
        let term = z * pow / fact;
        let new = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - new) + term;
        } else {
            comp += (term - new) + sum;
        }
        sum = new;
    }
    sum + comp
}

/// Absolute resonance frequency omega0 + resonance_offset.
pub fn resonant_frequency(omega0: f64, l: i64, delta_omega: f64, zetas: &[f64]) -> f64 {
    omega0 + resonance_offset(l, delta_omega, zetas)
}

/// Mode spacing in Hz: c / (n_g L).
pub fn fsr(ng: f64, circumference: f64) -> Result<f64> {
    if !(ng > 0.0 && circumference > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "group index {ng} and circumference {circumference} must be positive"
        )));
    }
    Ok(C_LIGHT / (ng * circumference))
}

/// Kerr frequency shift per intracavity photon (rad/s):
/// g0 = hbar omega0^2 n2 c / (n0^2 V0).
pub fn g0(spec: &CavitySpec, profile: &DispersionProfile) -> Result<f64> {
    if spec.mode_volume <= 0.0 {
        return Err(CoreError::InvalidParameter(
            "mode volume must be positive".into(),
        ));
    }
    let w0 = profile.omega0();
    Ok(HBAR * w0 * w0 * spec.n2 * C_LIGHT / (profile.n0() * profile.n0() * spec.mode_volume))
}

/// Classical effective nonlinearity gamma = n2 omega0 L / (c V0) in
/// 1/(W m); equals n2 omega0 / (c A_eff) for a rectangular core.
pub fn effective_nonlinearity(spec: &CavitySpec, profile: &DispersionProfile) -> f64 {
    spec.n2 * profile.omega0() * spec.circumference / (C_LIGHT * spec.mode_volume)
}

/// Wavevector mismatch (1/m) of the pair (l, -l) around a pump with
/// |A0|^2 = pump_photons: (zeta_2 l^2 - 2 g0 |A0|^2) / c.
pub fn phase_mismatch(l: i64, zeta2: f64, g0: f64, pump_photons: f64) -> f64 {
    let lf = l as f64;
    (zeta2 * lf * lf - 2.0 * g0 * pump_photons) / C_LIGHT
}
