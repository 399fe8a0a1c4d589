//! Below-threshold squeezing spectra of pumped Kerr rings.
//!
//! A pump held below the optical parametric oscillation threshold couples
//! every sideband pair (l, -l) around it. Demodulating the two output
//! carriers with mirrored frequency offsets turns each pair into a two-mode
//! Gaussian state whose rotated-quadrature nullifiers dip below shot noise.
//! This module solves the classical pump steady state, builds the complex
//! pair transfer functions, assembles output covariances under propagation
//! loss, reports rotated-nullifier spectra for the lattice layouts of
//! increasing dimension, and scans waveguide geometries for the number of
//! sideband pairs that clear 3 dB of squeezing.
//!
//! Conventions: all rates and detunings are angular (rad/s), the intracavity
//! pump amplitude is real and nonnegative, vacuum quadrature variance is 1/2,
//! and nullifier variances are normalized so shot noise sits at 1 (0 dB).

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::constants::HBAR;
use crate::dispersion::{resonance_offset, CavitySpec, GEOMETRY_CANDIDATES};
use crate::error::{CoreError, Result};

const PI: f64 = std::f64::consts::PI;
const TAU: f64 = std::f64::consts::TAU;

/// Operating point of a pumped ring: cavity, pump detuning, drive power, the
/// solved intracavity amplitude, the Kerr shift per photon, and the
/// integrated-dispersion coefficients that place the sideband resonances.
///
/// The invariant tying the fields together is the classical steady state
/// n [ (kappa/2)^2 + (sigma + g0 n)^2 ] = kappa_out P_in / (hbar omega0)
/// with n = a0^2, together with a pump parameter g0 n / (kappa/2) below 1.
#[derive(Debug, Clone)]
pub struct QuantumRingConfig {
    pub cavity: CavitySpec,
    /// Pump carrier frequency in rad/s.
    pub omega0: f64,
    /// Pump detuning from the cold resonance in rad/s.
    pub sigma: f64,
    /// Drive power in W for which (sigma, a0) solves the steady state.
    pub p_in: f64,
    /// Intracavity pump amplitude, real and nonnegative; a0^2 is the photon
    /// number.
    pub a0: f64,
    /// Kerr frequency shift per intracavity photon in rad/s.
    pub g0: f64,
    /// Integrated dispersion [zeta2, zeta3, ...] in rad/s.
    pub zeta: Vec<f64>,
}

impl QuantumRingConfig {
    /// Solve the steady state for the given drive and detuning and return the
    /// assembled operating point. Fails if the response is bistable or the
    /// drive puts the pump at or beyond the oscillation threshold.
    pub fn from_pump(
        cavity: CavitySpec,
        omega0: f64,
        sigma: f64,
        p_in: f64,
        g0: f64,
        zeta: Vec<f64>,
    ) -> Result<Self> {
        check_pump_inputs(omega0, sigma, p_in, g0, &zeta)?;
        let n = solve_steady_photons(&cavity, omega0, sigma, p_in, g0)?;
        let cfg = Self { cavity, omega0, sigma, p_in, a0: n.sqrt(), g0, zeta };
        cfg.reject_above_threshold()?;
        Ok(cfg)
    }

    /// Operating point with the detuning servoed so the hot resonance sits
    /// exactly on the pump: sigma = -2 g0 n cancels the self- and cross-Kerr
    /// shift of the sidebands, and the photon number takes the peak resonant
    /// value n = kappa_out P / (hbar omega0 (kappa/2)^2) for the requested
    /// drive P. The stored drive is the equivalent power for which the stored
    /// detuning and amplitude satisfy the steady-state relation exactly, so
    /// the configuration round-trips through the solver.
    pub fn resonantly_locked(
        cavity: CavitySpec,
        omega0: f64,
        p_requested: f64,
        g0: f64,
        zeta: Vec<f64>,
    ) -> Result<Self> {
        check_pump_inputs(omega0, 0.0, p_requested, g0, &zeta)?;
        let kappa = cavity.kappa(omega0);
        let kappa_o = cavity.kappa_out(omega0);
        let half = 0.5 * kappa;
        let n = kappa_o * p_requested / (HBAR * omega0) / (half * half);
        let sigma = -2.0 * g0 * n;
        let p_eff = n * (half * half + (sigma + g0 * n).powi(2)) * HBAR * omega0 / kappa_o;
        let cfg = Self { cavity, omega0, sigma, p_in: p_eff, a0: n.sqrt(), g0, zeta };
        cfg.reject_above_threshold()?;
        Ok(cfg)
    }

    /// Check the steady-state residual and the below-threshold condition.
    pub fn validate(&self) -> Result<()> {
        check_pump_inputs(self.omega0, self.sigma, self.p_in, self.g0, &self.zeta)?;
        if !(self.a0.is_finite() && self.a0 >= 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "pump amplitude must be finite and nonnegative, got {}",
                self.a0
            )));
        }
        let n = self.photon_number();
        let half = 0.5 * self.cavity.kappa(self.omega0);
        let drive = self.cavity.kappa_out(self.omega0) * self.p_in / (HBAR * self.omega0);
        let residual = n * (half * half + (self.sigma + self.g0 * n).powi(2)) - drive;
        if residual.abs() > 1e-9 * drive.max(1.0) {
            return Err(CoreError::InvalidParameter(format!(
                "stored amplitude violates the pump steady state: relative residual {:.3e}",
                residual / drive.max(1.0)
            )));
        }
        self.reject_above_threshold()
    }

    /// Intracavity pump photon number a0^2.
    pub fn photon_number(&self) -> f64 {
        self.a0 * self.a0
    }

    /// Parametric gain over decay, g0 a0^2 / (kappa/2); squeezing exists for
    /// values in (0, 1) and oscillation starts at 1.
    pub fn pump_parameter(&self) -> f64 {
        self.g0 * self.photon_number() / (0.5 * self.cavity.kappa(self.omega0))
    }

    /// Effective detuning of the relative sideband m: the common pump shift
    /// plus twice the Kerr shift, minus the integrated-dispersion walk-off of
    /// that resonance.
    pub fn sideband_detuning(&self, m: i64) -> f64 {
        self.sigma + 2.0 * self.g0 * self.photon_number()
            - resonance_offset(m, 0.0, &self.zeta)
    }

    fn reject_above_threshold(&self) -> Result<()> {
        let mu = self.pump_parameter();
        if mu >= 1.0 {
            return Err(CoreError::AboveThreshold(format!(
                "pump parameter {mu:.6} >= 1; the drive reaches the oscillation threshold"
            )));
        }
        Ok(())
    }
}

fn check_pump_inputs(omega0: f64, sigma: f64, p_in: f64, g0: f64, zeta: &[f64]) -> Result<()> {
    if !(omega0.is_finite() && omega0 > 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "carrier frequency must be positive and finite, got {omega0}"
        )));
    }
    if !sigma.is_finite() {
        return Err(CoreError::InvalidParameter("detuning must be finite".into()));
    }
    if !(p_in.is_finite() && p_in >= 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "drive power must be finite and nonnegative, got {p_in}"
        )));
    }
    if !(g0.is_finite() && g0 >= 0.0) {
        return Err(CoreError::InvalidParameter(format!(
            "Kerr shift per photon must be finite and nonnegative, got {g0}"
        )));
    }
    if zeta.iter().any(|z| !z.is_finite()) {
        return Err(CoreError::InvalidParameter(
            "integrated dispersion coefficients must be finite".into(),
        ));
    }
    Ok(())
}

/// Solve the classical pump steady state and return the photon number of the
/// unique stable branch. A drive sitting on a bistable fold is rejected with
/// the branch count; use a detuning magnitude below sqrt(3) kappa / 2 to stay
/// single valued at every power.
pub fn steady_pump_amplitude(config: &QuantumRingConfig) -> Result<f64> {
    check_pump_inputs(config.omega0, config.sigma, config.p_in, config.g0, &config.zeta)?;
    let n = solve_steady_photons(
        &config.cavity,
        config.omega0,
        config.sigma,
        config.p_in,
        config.g0,
    )?;
    let mu = config.g0 * n / (0.5 * config.cavity.kappa(config.omega0));
    if mu >= 1.0 {
        return Err(CoreError::AboveThreshold(format!(
            "pump parameter {mu:.6} >= 1; the drive reaches the oscillation threshold"
        )));
    }
    Ok(n.sqrt())
}

fn solve_steady_photons(
    cavity: &CavitySpec,
    omega0: f64,
    sigma: f64,
    p_in: f64,
    g0: f64,
) -> Result<f64> {
    let kappa = cavity.kappa(omega0);
    let half = 0.5 * kappa;
    let drive = cavity.kappa_out(omega0) * p_in / (HBAR * omega0);
    if drive == 0.0 {
        return Ok(0.0);
    }
    if g0 == 0.0 {
        return Ok(drive / (half * half + sigma * sigma));
    }

    // Cubic in the photon number: g^2 n^3 + 2 sigma g n^2 + (sigma^2 +
    // kappa^2/4) n - drive = 0. Three distinct real roots are always all
    // positive here, so a positive discriminant of the depressed cubic is
    // exactly the bistable fold.
    let p = 2.0 * sigma / g0;
    let q = (half * half + sigma * sigma) / (g0 * g0);
    let r = -drive / (g0 * g0);
    let a = q - p * p / 3.0;
    let b = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r;
    let disc = -4.0 * a * a * a - 27.0 * b * b;
    if disc > 0.0 {
        return Err(CoreError::InvalidParameter(
            "bistable pump response: 3 positive steady-state branches; keep |sigma| below \
             sqrt(3) kappa / 2 or move the drive off the fold"
                .into(),
        ));
    }

    // Unique positive root: bracket and bisect the monotone crossing.
    let f = |n: f64| n * (half * half + (sigma + g0 * n).powi(2));
    let mut hi = 2.0 * (drive / (half * half)).max((drive / (g0 * g0)).cbrt()) + 1.0;
    let mut guard = 0;
    while f(hi) < drive {
        hi *= 2.0;
        guard += 1;
        if guard > 200 {
            return Err(CoreError::InvalidParameter(
                "pump steady state failed to bracket; drive out of range".into(),
            ));
        }
    }
    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < drive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Frequency-resolved demodulation transfer of the sideband pair (l, -l).
///
/// At each grid point the complex matrix couples the pair annihilation
/// operator of mode l, read at demodulation offset +omega, to the creation
/// operator of mode -l read at -omega. The matrix stays invertible at every
/// real frequency whenever the pair is below its parametric instability,
/// which construction enforces.
#[derive(Debug, Clone)]
pub struct PairTransfer {
    pub l: i64,
    pub omega_grid: Vec<f64>,
    /// Diagonal drift of the +l member, i Delta_+ - kappa/2.
    pub j_plus: Complex64,
    /// Diagonal drift of the -l member, i Delta_- - kappa/2.
    pub j_minus: Complex64,
    /// Demodulation matrix at each grid frequency.
    pub matrices: Vec<Matrix2<Complex64>>,
    kappa_intrinsic: f64,
    kappa_out: f64,
    coupling: f64,
}

impl PairTransfer {
    pub fn new(config: &QuantumRingConfig, l: i64, omega_grid: Vec<f64>) -> Result<Self> {
        if l == 0 {
            return Err(CoreError::InvalidParameter(
                "sideband pair index 0 is the pump mode itself".into(),
            ));
        }
        let kappa = config.cavity.kappa(config.omega0);
        let delta_p = config.sideband_detuning(l);
        let delta_m = config.sideband_detuning(-l);
        let eps = config.g0 * config.photon_number();
        pair_stability(kappa, eps, delta_p, delta_m, l)?;
        let j_plus = Complex64::new(-0.5 * kappa, delta_p);
        let j_minus = Complex64::new(-0.5 * kappa, delta_m);
        let matrices = omega_grid
            .iter()
            .map(|&w| demodulation_matrix(j_plus, j_minus, eps, w))
            .collect();
        Ok(Self {
            l,
            omega_grid,
            j_plus,
            j_minus,
            matrices,
            kappa_intrinsic: config.cavity.kappa_intrinsic(config.omega0),
            kappa_out: config.cavity.kappa_out(config.omega0),
            coupling: eps,
        })
    }

    /// Input and output transfer blocks at grid point idx: the pair response
    /// to the intrinsic-loss bath and to the reflected out-coupler field.
    pub fn transfer(&self, idx: usize) -> Result<(Matrix2<Complex64>, Matrix2<Complex64>)> {
        let m = self.matrices.get(idx).ok_or_else(|| {
            CoreError::InvalidParameter(format!(
                "frequency index {idx} out of range for a grid of {}",
                self.omega_grid.len()
            ))
        })?;
        transfer_blocks(m, self.kappa_intrinsic, self.kappa_out, self.l)
    }

    /// Parametric coupling strength g0 a0^2 in rad/s.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }
}

fn pair_stability(kappa: f64, eps: f64, delta_p: f64, delta_m: f64, l: i64) -> Result<()> {
    let half = 0.5 * kappa;
    let delta_sym = 0.5 * (delta_p + delta_m);
    if eps * eps >= half * half + delta_sym * delta_sym {
        return Err(CoreError::AboveThreshold(format!(
            "threshold crossed at sideband pair ({l}, {}): parametric gain exceeds the pair \
             linewidth",
            -l
        )));
    }
    Ok(())
}

fn demodulation_matrix(
    j_plus: Complex64,
    j_minus: Complex64,
    eps: f64,
    omega: f64,
) -> Matrix2<Complex64> {
    let iw = Complex64::new(0.0, omega);
    Matrix2::new(
        j_plus + iw,
        Complex64::new(0.0, eps),
        Complex64::new(0.0, -eps),
        j_minus.conj() + iw,
    )
}

fn transfer_blocks(
    m: &Matrix2<Complex64>,
    kappa_i: f64,
    kappa_o: f64,
    l: i64,
) -> Result<(Matrix2<Complex64>, Matrix2<Complex64>)> {
    let inv = m.try_inverse().ok_or_else(|| {
        CoreError::AboveThreshold(format!(
            "threshold crossed at sideband pair ({l}, {}): demodulation matrix is singular",
            -l
        ))
    })?;
    let t_in = inv * Complex64::new(-(kappa_i * kappa_o).sqrt(), 0.0);
    let mut t_out = inv * Complex64::new(-kappa_o, 0.0);
    t_out[(0, 0)] -= Complex64::new(1.0, 0.0);
    t_out[(1, 1)] -= Complex64::new(1.0, 0.0);
    Ok((t_in, t_out))
}

/// Second moments of a demodulated pair: thermal occupations of the two
/// members and the anomalous correlation between them.
#[derive(Debug, Clone, Copy)]
struct PairMoments {
    n_plus: f64,
    n_minus: f64,
    corr: Complex64,
}

impl PairMoments {
    /// Rotated-nullifier variance normalized to shot noise at 1, identical
    /// for the rotated-quadrature difference and sum combinations.
    fn variance(&self, theta: f64) -> f64 {
        1.0 + self.n_plus + self.n_minus - 2.0 * self.corr.re * (2.0 * theta).cos()
            + 2.0 * self.corr.im * (2.0 * theta).sin()
    }
}

fn pair_moments(config: &QuantumRingConfig, m_rel: i64, omega: f64) -> Result<PairMoments> {
    let kappa = config.cavity.kappa(config.omega0);
    let delta_p = config.sideband_detuning(m_rel);
    let delta_m = config.sideband_detuning(-m_rel);
    let eps = config.g0 * config.photon_number();
    pair_stability(kappa, eps, delta_p, delta_m, m_rel)?;
    let j_plus = Complex64::new(-0.5 * kappa, delta_p);
    let j_minus = Complex64::new(-0.5 * kappa, delta_m);
    let m = demodulation_matrix(j_plus, j_minus, eps, omega);
    let (t_in, t_out) = transfer_blocks(
        &m,
        config.cavity.kappa_intrinsic(config.omega0),
        config.cavity.kappa_out(config.omega0),
        m_rel,
    )?;
    let mut n_plus = 0.0;
    let mut n_minus = 0.0;
    let mut corr = Complex64::new(0.0, 0.0);
    for t in [&t_in, &t_out] {
        n_plus += t[(0, 1)].norm_sqr();
        n_minus += t[(1, 0)].norm_sqr();
        corr += t[(0, 0)] * t[(1, 0)].conj();
    }
    Ok(PairMoments { n_plus, n_minus, corr })
}

/// Apply a beam-splitter loss channel of transmissivity eta to a two-mode
/// quadrature covariance with vacuum variance 1/2 on both modes.
pub fn attenuate(sigma: &Matrix4<f64>, eta: f64) -> Matrix4<f64> {
    sigma * eta + Matrix4::identity() * (0.5 * (1.0 - eta))
}

/// Output covariance of the demodulated pair (l, -l) at demodulation offset
/// omega, in the quadrature order (q_l, q_-l, p_l, p_-l) with vacuum variance
/// 1/2, after a loss channel of transmissivity eta on both members.
pub fn pair_output_covariance(
    config: &QuantumRingConfig,
    l: i64,
    omega: f64,
    eta: f64,
) -> Result<Matrix4<f64>> {
    if l == 0 {
        return Err(CoreError::InvalidParameter(
            "sideband pair index 0 is the pump mode itself".into(),
        ));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(CoreError::InvalidParameter(format!(
            "transmissivity must lie in [0, 1], got {eta}"
        )));
    }
    let mom = pair_moments(config, l, omega)?;
    Ok(attenuate(&pair_covariance_from_moments(&mom), eta))
}

fn pair_covariance_from_moments(mom: &PairMoments) -> Matrix4<f64> {
    let a = mom.n_plus + 0.5;
    let b = mom.n_minus + 0.5;
    let re = mom.corr.re;
    let im = mom.corr.im;
    Matrix4::new(
        a, re, 0.0, im, re, b, im, 0.0, 0.0, im, a, -re, im, 0.0, -re, b,
    )
}

/// Photonic elements traversed by one lattice path of the nullifier modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PathElements {
    /// Interferometric beam-splitter stages, folded couplers included.
    pub ibs: u32,
    /// Chip-length delay lines.
    pub delay_lines: u32,
    /// Waveguide crossings.
    pub crossings: u32,
}

/// Insertion-loss budget of the lattice chip, per path dimension.
///
/// Total path loss in dB composes additively; the transmissivity applied to
/// the covariance is 10^(-dB/10).
#[derive(Debug, Clone)]
pub struct LossBudget {
    pub ibs_insertion_db: f64,
    pub dl_per_meter_db: f64,
    pub crossing_db: f64,
    pub dl_length_m: f64,
    /// Element counts for the nullifier path of each lattice dimension.
    pub paths: [PathElements; 4],
}

impl Default for LossBudget {
    fn default() -> Self {
        // Design ring: 1549.6 nm carrier, loaded quality factor 2e6, group
        // delay 6.834 ns/m; one memory time of delay per chip-length line.
        let kappa = TAU * crate::constants::C_LIGHT / 1549.6e-9 / 2.0e6;
        Self {
            ibs_insertion_db: 0.28,
            dl_per_meter_db: 0.1,
            crossing_db: 0.015,
            dl_length_m: delay_line_length(kappa, 6.834e-9),
            paths: [
                PathElements { ibs: 0, delay_lines: 0, crossings: 0 },
                PathElements { ibs: 1, delay_lines: 0, crossings: 0 },
                PathElements { ibs: 2, delay_lines: 1, crossings: 2 },
                PathElements { ibs: 3, delay_lines: 1, crossings: 50 },
            ],
        }
    }
}

impl LossBudget {
    /// Default element rates and counts with an explicit delay-line length.
    pub fn with_delay_length(dl_length_m: f64) -> Self {
        Self { dl_length_m, ..Self::default() }
    }

    /// Total insertion loss of the path for the given lattice dimension.
    pub fn path_db(&self, dimension: usize) -> Result<f64> {
        let els = self.paths.get(dimension).ok_or_else(|| {
            CoreError::InvalidParameter(format!(
                "lattice dimension must be 0..=3, got {dimension}"
            ))
        })?;
        Ok(f64::from(els.ibs) * self.ibs_insertion_db
            + f64::from(els.delay_lines) * self.dl_per_meter_db * self.dl_length_m
            + f64::from(els.crossings) * self.crossing_db)
    }

    /// Power transmissivity of the path for the given lattice dimension.
    pub fn transmissivity(&self, dimension: usize) -> Result<f64> {
        Ok(10.0f64.powf(-self.path_db(dimension)? / 10.0))
    }
}

/// Delay-line length storing one cavity memory time 2 pi / kappa at group
/// delay beta1 seconds per meter.
pub fn delay_line_length(kappa: f64, beta1: f64) -> f64 {
    TAU / (kappa * beta1)
}

/// Rotated-nullifier spectrum on a symmetric demodulation grid: the optimal
/// (most squeezed) variance, the antisqueezed variance a quarter turn away,
/// and the optimizing angle, all per grid frequency.
#[derive(Debug, Clone)]
pub struct SqueezingSpectrum {
    /// Demodulation offsets in rad/s.
    pub omega: Vec<f64>,
    /// 10 log10 of the minimal nullifier variance; at most 0 for a squeezed
    /// pair.
    pub squeezed_db: Vec<f64>,
    /// 10 log10 of the variance at the orthogonal angle; at least 0.
    pub antisqueezed_db: Vec<f64>,
    /// Optimizing quadrature angle in [0, pi).
    pub theta_opt: Vec<f64>,
}

impl SqueezingSpectrum {
    /// Largest squeezing across the grid as a positive dB value.
    pub fn max_squeezing_db(&self) -> f64 {
        -self.squeezed_db.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Symmetric 2001-point demodulation grid spanning +-5 kappa with an exact
/// zero at the center.
pub fn default_omega_grid(kappa: f64) -> Vec<f64> {
    let step = 5.0 * kappa / 1000.0;
    (0..2001).map(|i| (i as f64 - 1000.0) * step).collect()
}

/// Odd wrap offset of the third lattice axis; the extra ring pair is pumped
/// at spectral indices 1 +- this offset.
const WRAP_OFFSET: i64 = 45;

const PUMPS_0D: [i64; 1] = [0];
const PUMPS_1D: [i64; 2] = [0, 2];
const PUMPS_3D: [i64; 4] = [0, 2, 1 + WRAP_OFFSET, 1 - WRAP_OFFSET];

fn ring_pump_indices(dimension: usize) -> Result<&'static [i64]> {
    match dimension {
        0 => Ok(&PUMPS_0D),
        1 | 2 => Ok(&PUMPS_1D),
        3 => Ok(&PUMPS_3D),
        _ => Err(CoreError::InvalidParameter(format!(
            "lattice dimension must be 0..=3, got {dimension}"
        ))),
    }
}

/// Nullifier squeezing spectrum of spectral mode l for the lattice of the
/// given dimension.
///
/// Every lattice nullifier is the balanced-splitter image of one source
/// ring's own pair nullifier, so the spectrum reports, per demodulation
/// frequency, the worst member of the ring family for that dimension after
/// the path loss of the corresponding loss-budget entry. Multi-ring layouts
/// reserve even spectral indices for pump carriers, so data modes must sit on
/// odd l.
pub fn nullifier_spectrum(
    dimension: usize,
    config: &QuantumRingConfig,
    loss: &LossBudget,
    l: i64,
) -> Result<SqueezingSpectrum> {
    let pumps = ring_pump_indices(dimension)?;
    if dimension == 0 && l == 0 {
        return Err(CoreError::InvalidParameter(
            "sideband pair index 0 is the pump mode itself".into(),
        ));
    }
    if dimension >= 1 && l.rem_euclid(2) == 0 {
        return Err(CoreError::InvalidParameter(format!(
            "spectral index {l} is even; multi-ring layouts keep pump carriers on even \
             indices and data modes on odd ones"
        )));
    }
    let eta = loss.transmissivity(dimension)?;
    let kappa = config.cavity.kappa(config.omega0);
    let grid = default_omega_grid(kappa);

    let mut squeezed_db = Vec::with_capacity(grid.len());
    let mut antisqueezed_db = Vec::with_capacity(grid.len());
    let mut theta_opt = Vec::with_capacity(grid.len());
    let mut members = Vec::with_capacity(pumps.len());
    for &omega in &grid {
        members.clear();
        for &p in pumps {
            members.push(pair_moments(config, l - p, omega)?);
        }
        let family = |theta: f64| -> f64 {
            let worst = members
                .iter()
                .map(|m| m.variance(theta))
                .fold(f64::NEG_INFINITY, f64::max);
            eta * worst + (1.0 - eta)
        };
        let (theta, v_min) = minimize_on_circle(&family);
        let v_anti = family(theta + 0.5 * PI);
        squeezed_db.push(10.0 * v_min.log10());
        antisqueezed_db.push(10.0 * v_anti.log10());
        theta_opt.push(theta);
    }
    Ok(SqueezingSpectrum { omega: grid, squeezed_db, antisqueezed_db, theta_opt })
}

/// Minimize a pi-periodic variance over the quadrature angle: coarse scan to
/// isolate the global basin, then golden-section refinement.
fn minimize_on_circle(f: &dyn Fn(f64) -> f64) -> (f64, f64) {
    const COARSE: usize = 64;
    let step = PI / COARSE as f64;
    let mut best_k = 0;
    let mut best_v = f64::INFINITY;
    for k in 0..COARSE {
        let v = f(step * k as f64);
        if v < best_v {
            best_v = v;
            best_k = k;
        }
    }
    let center = step * best_k as f64;
    let (mut theta, v) = golden_section(f, center - step, center + step, 1e-10);
    theta = theta.rem_euclid(PI);
    if theta >= PI {
        theta -= PI;
    }
    (theta, v)
}

fn golden_section(f: &dyn Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = hi - INV_PHI * (hi - lo);
    let mut d = lo + INV_PHI * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - INV_PHI * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + INV_PHI * (hi - lo);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Candidate waveguide cross section with its fitted propagation parameters.
#[derive(Debug, Clone)]
pub struct RingGeometry {
    /// Waveguide width in m.
    pub width: f64,
    /// Waveguide height in m.
    pub height: f64,
    /// Group delay in s/m.
    pub beta1: f64,
    /// Group-velocity dispersion in s^2/m.
    pub beta2: f64,
    /// Third-order dispersion in s^3/m.
    pub beta3: f64,
    /// Ring circumference in m.
    pub circumference: f64,
}

impl RingGeometry {
    /// Geometry with the circumference chosen to hold the mode spacing fixed
    /// at the given free spectral range in Hz.
    pub fn with_constant_fsr(
        width: f64,
        height: f64,
        beta1: f64,
        beta2: f64,
        beta3: f64,
        fsr: f64,
    ) -> Result<Self> {
        if !(fsr.is_finite() && fsr > 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "mode spacing must be positive and finite, got {fsr}"
            )));
        }
        if !(beta1.is_finite() && beta1 > 0.0) {
            return Err(CoreError::InvalidParameter(format!(
                "group delay must be positive and finite, got {beta1}"
            )));
        }
        Ok(Self { width, height, beta1, beta2, beta3, circumference: 1.0 / (beta1 * fsr) })
    }

    /// The four tabulated cross sections, each sized to the given mode
    /// spacing in Hz.
    pub fn candidates(fsr: f64) -> Vec<RingGeometry> {
        GEOMETRY_CANDIDATES
            .iter()
            .map(|&(w, h, b1, b2, b3)| {
                Self::with_constant_fsr(w, h, b1, b2, b3, fsr)
                    .expect("tabulated geometries are valid for a positive mode spacing")
            })
            .collect()
    }

    /// Integrated dispersion (zeta2, zeta3) of this geometry in rad/s.
    pub fn zetas(&self) -> (f64, f64) {
        let circ = self.circumference;
        let z2 = -4.0 * PI * PI * self.beta2 / (circ * circ * self.beta1.powi(3));
        let z3 = 8.0 * PI * PI * PI * (3.0 * self.beta2 * self.beta2 - self.beta1 * self.beta3)
            / (circ.powi(3) * self.beta1.powi(5));
        (z2, z3)
    }
}

/// Largest odd spectral index whose sideband pair still reaches 3 dB of
/// squeezing when the ring is rebuilt on the candidate geometry.
///
/// The pump photon number carries over from the reference configuration; the
/// Kerr shift rescales with the inverse mode volume and the resonance
/// walk-off follows the candidate's integrated dispersion. Each pair is
/// scored by its optimal-angle variance at the recentered demodulation
/// carrier of that pair, with no off-chip loss. The scan walks odd indices
/// downward from a detuning-dominated upper bound and returns at the first
/// pair meeting the target.
pub fn l3db(config: &QuantumRingConfig, geometry: &RingGeometry) -> Result<i64> {
    let kappa = config.cavity.kappa(config.omega0);
    let half = 0.5 * kappa;
    let volume = geometry.width * geometry.height * geometry.circumference;
    if !(volume.is_finite() && volume > 0.0) {
        return Err(CoreError::InvalidParameter(
            "candidate geometry must enclose a positive mode volume".into(),
        ));
    }
    let g = config.g0 * config.cavity.mode_volume / volume;
    let n = config.photon_number();
    let eps = g * n;
    let sigma_eff = config.sigma + 2.0 * config.g0 * n;
    let (z2, z3) = geometry.zetas();
    if z2 == 0.0 {
        return Err(CoreError::InvalidParameter(
            "candidate geometry has no quadratic dispersion; the pair scan does not terminate"
                .into(),
        ));
    }

    let kappa_i = config.cavity.kappa_intrinsic(config.omega0);
    let kappa_o = config.cavity.kappa_out(config.omega0);
    let target = 10.0f64.powf(-0.3);
    let score = |l: i64| -> Result<f64> {
        let zetas = [z2, z3];
        let delta_p = sigma_eff - resonance_offset(l, 0.0, &zetas);
        let delta_m = sigma_eff - resonance_offset(-l, 0.0, &zetas);
        pair_stability(kappa, eps, delta_p, delta_m, l)?;
        let carrier = 0.5 * (delta_m - delta_p);
        let j_plus = Complex64::new(-half, delta_p);
        let j_minus = Complex64::new(-half, delta_m);
        let m = demodulation_matrix(j_plus, j_minus, eps, carrier);
        let (t_in, t_out) = transfer_blocks(&m, kappa_i, kappa_o, l)?;
        let mut mom = PairMoments { n_plus: 0.0, n_minus: 0.0, corr: Complex64::new(0.0, 0.0) };
        for t in [&t_in, &t_out] {
            mom.n_plus += t[(0, 1)].norm_sqr();
            mom.n_minus += t[(1, 0)].norm_sqr();
            mom.corr += t[(0, 0)] * t[(1, 0)].conj();
        }
        let (_, v) = minimize_on_circle(&|theta| mom.variance(theta));
        Ok(v)
    };

    // Upper bound where quadratic walk-off alone has killed the squeezing.
    let mut l_hi = (18.0 * kappa / z2.abs()).sqrt().ceil() as i64;
    if l_hi % 2 == 0 {
        l_hi += 1;
    }
    let mut guard = 0;
    while score(l_hi)? <= target {
        l_hi = 2 * l_hi + 1;
        guard += 1;
        if guard > 8 {
            return Err(CoreError::InvalidParameter(
                "pair scan upper bound did not clear the 3 dB target".into(),
            ));
        }
    }
    let mut l = l_hi;
    while l >= 1 {
        if score(l)? <= target {
            return Ok(l);
        }
        l -= 2;
    }
    Err(CoreError::InvalidParameter(
        "no sideband pair reaches 3 dB of squeezing on this geometry".into(),
    ))
}
