//! Programmable-chip cluster-state factory.
//!
//! Models the photonic chip that turns two-mode squeezed comb pairs into
//! 0D/1D/2D/3D cluster-state lattices: four squeezer rings feeding spatial
//! rails, programmable balanced-MZI couplers (E1, E2, E3), an unbalanced-MZI
//! spectral router that splits the odd comb lines by index class, and a
//! one-step optical delay on half of the routed arms.
//!
//! # Mode space and finite-window semantics
//!
//! Modes are labeled by (rail, spectral index l, time slot t) and ordered
//! slot-major, then by ascending l, then by rail. The tracked window is the
//! full rectangle {rails for the dimension} x {odd |l| <= l_max} x
//! {0 <= t < t_max}:
//!
//! * A ring pair becomes a source edge only when both members fall inside the
//!   window. A mode whose partner lands outside stays in the register as an
//!   uncorrelated placeholder under the shared-r calculus (its true marginal
//!   is thermal; the placeholder carries no graph edges and is excluded from
//!   nullifier reporting).
//! * Every interferometer stage acts at every in-window coordinate, because
//!   the couplers are spatial devices that do not resolve frequency. This
//!   keeps all surviving edge magnitudes at the uniform stage value, so the
//!   single rescaling parameter (and the serialized form built on it) stays
//!   well defined; the window edge shows up as reduced degree, not as mixed
//!   magnitudes.
//! * The delay line advances the slot label cyclically, t -> t + 1 mod t_max,
//!   closing the finite time window so every final-coupler application finds
//!   its partner. Delayed constructions therefore need t_max >= 2.
//!
//! # Sign conventions
//!
//! Source edges carry weight -1 (q differences and p sums contract). Each
//! 50:50 coupler maps its first listed mode j to (a_j - a_k)/sqrt(2); the
//! orientation table is fixed as E1: (a, b), (c, d); E2: (a, c), (b, d);
//! E3: (a, b), (c, d), always with the alphabetically first rail on the
//! minus port.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{CoreError, Result};
use crate::gaussian::{
    apply_beamsplitter_graph, ExactWeight, GaussianState, GraphForm, SimplifiedGraph,
    SymplecticGate, MAX_DENSE_MODES,
};

/// Spatial rail of the chip, one per squeezer ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rail {
    A,
    B,
    C,
    D,
}

impl Rail {
    pub const ALL: [Rail; 4] = [Rail::A, Rail::B, Rail::C, Rail::D];

    pub fn letter(self) -> char {
        match self {
            Rail::A => 'a',
            Rail::B => 'b',
            Rail::C => 'c',
            Rail::D => 'd',
        }
    }

    pub fn from_letter(ch: char) -> Result<Rail> {
        match ch {
            'a' => Ok(Rail::A),
            'b' => Ok(Rail::B),
            'c' => Ok(Rail::C),
            'd' => Ok(Rail::D),
            other => Err(CoreError::InvalidMode(format!(
                "unknown rail '{other}' (expected a, b, c, or d)"
            ))),
        }
    }

    /// Spectral index of the pump driving this rail's ring. Pair sources sit
    /// symmetrically about it: the partner of line l is 2 * pump - l.
    pub fn pump(self, delta: i64) -> i64 {
        match self {
            Rail::A => 0,
            Rail::B => 2,
            Rail::C => 1 + delta,
            Rail::D => 1 - delta,
        }
    }
}

impl fmt::Display for Rail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Full address of one detected mode: rail, odd spectral index, time slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeLabel {
    pub rail: Rail,
    pub l: i64,
    pub t: u32,
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.rail, self.l, self.t)
    }
}

impl FromStr for ModeLabel {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<ModeLabel> {
        let bad = || CoreError::InvalidMode(format!("mode label '{s}' is not rail:l:t"));
        let mut parts = s.split(':');
        let rail_part = parts.next().ok_or_else(bad)?;
        let l_part = parts.next().ok_or_else(bad)?;
        let t_part = parts.next().ok_or_else(bad)?;
        if parts.next().is_some() || rail_part.chars().count() != 1 {
            return Err(bad());
        }
        let rail = Rail::from_letter(rail_part.chars().next().unwrap())?;
        let l: i64 = l_part.parse().map_err(|_| bad())?;
        if l.rem_euclid(2) != 1 {
            return Err(CoreError::InvalidMode(format!(
                "spectral index {l} is even; detected modes sit at odd lines"
            )));
        }
        let t: u32 = t_part.parse().map_err(|_| bad())?;
        Ok(ModeLabel { rail, l, t })
    }
}

/// Output arm of the unbalanced-MZI spectral router.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UmziArm {
    Plus,
    Minus,
}

/// Router arm for an odd spectral index: lines l = 4n + 1 exit the "+" arm,
/// lines l = 4n - 1 the "-" arm. Together the two classes partition the odd
/// integers, and every source pair straddles them.
pub fn umzi_arm(l: i64) -> Result<UmziArm> {
    match l.rem_euclid(4) {
        1 => Ok(UmziArm::Plus),
        3 => Ok(UmziArm::Minus),
        _ => Err(CoreError::InvalidMode(format!(
            "spectral index {l} is even; the router only sees odd lines"
        ))),
    }
}

/// Electrode settings and window geometry for one chip run.
///
/// Splitting ratios are transmissivities: 0.5 is a balanced 50:50 coupler,
/// 1.0 passes straight through (100:0).
#[derive(Debug, Clone, PartialEq)]
pub struct ChipProgram {
    pub bmzi_e1: f64,
    pub bmzi_e2: f64,
    pub bmzi_e3: f64,
    /// Odd pump offset for the third and fourth rings (pumps at 1 +- delta).
    pub delta: i64,
    /// Lattice dimension to assemble, 0 through 3.
    pub dimensions: usize,
    /// Spectral window half-width: odd lines with |l| <= l_max are tracked.
    pub l_max: i64,
    /// Number of time slots in the tracked window.
    pub t_max: u32,
}

impl ChipProgram {
    /// Narrowest spectral window that fits at least one source pair on every
    /// active ring for the requested dimension.
    pub fn min_l_max(dimensions: usize, delta: i64) -> i64 {
        match dimensions {
            0 => 1,
            1 | 2 => 3,
            _ => delta + 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimensions > 3 {
            return Err(CoreError::InvalidParameter(format!(
                "dimensions = {} (the chip assembles 0 through 3)",
                self.dimensions
            )));
        }
        for (name, rho) in [
            ("E1", self.bmzi_e1),
            ("E2", self.bmzi_e2),
            ("E3", self.bmzi_e3),
        ] {
            if !(0.0..=1.0).contains(&rho) || !rho.is_finite() {
                return Err(CoreError::InvalidParameter(format!(
                    "splitting ratio {rho} at {name} outside [0, 1]"
                )));
            }
        }
        if self.delta <= 0 || self.delta % 2 == 0 {
            return Err(CoreError::InvalidParameter(format!(
                "pump offset delta = {} must be an odd positive integer",
                self.delta
            )));
        }
        if self.dimensions == 3 && self.delta == 1 {
            return Err(CoreError::InvalidParameter(
                "delta = 1 collides the pump placement (1 - delta = 0 and 1 + delta = 2 \
                 repeat the first two pumps)"
                    .into(),
            ));
        }
        if self.l_max <= 0 || self.l_max % 2 == 0 {
            return Err(CoreError::InvalidParameter(format!(
                "l_max = {} must be an odd positive integer",
                self.l_max
            )));
        }
        let min = Self::min_l_max(self.dimensions, self.delta);
        if self.l_max < min {
            return Err(CoreError::InvalidParameter(format!(
                "l_max = {} below the minimum {} for a {}-dimensional build",
                self.l_max, min, self.dimensions
            )));
        }
        if self.t_max == 0 {
            return Err(CoreError::InvalidParameter("t_max must be positive".into()));
        }
        if self.dimensions >= 2 && self.t_max < 2 {
            return Err(CoreError::InvalidParameter(
                "delayed constructions need t_max >= 2 (a one-slot cyclic delay is degenerate)"
                    .into(),
            ));
        }
        Ok(())
    }

    fn rails(&self) -> &'static [Rail] {
        match self.dimensions {
            0 => &Rail::ALL[..1],
            1 | 2 => &Rail::ALL[..2],
            _ => &Rail::ALL[..],
        }
    }

    fn delayed_rails(&self) -> &'static [Rail] {
        if self.dimensions == 3 {
            &[Rail::A, Rail::C]
        } else {
            &[Rail::A]
        }
    }

    fn window(&self) -> Vec<i64> {
        (-self.l_max..=self.l_max)
            .filter(|l| l.rem_euclid(2) == 1)
            .collect()
    }

    fn mode_labels(&self) -> Vec<ModeLabel> {
        let rails = self.rails();
        let window = self.window();
        let mut labels = Vec::with_capacity(rails.len() * window.len() * self.t_max as usize);
        for t in 0..self.t_max {
            for &l in &window {
                for &rail in rails {
                    labels.push(ModeLabel { rail, l, t });
                }
            }
        }
        labels
    }

    /// Electrode stages that actually run for this dimension, with their
    /// splitting ratios.
    fn active_ratios(&self) -> Vec<(&'static str, f64)> {
        let mut out = Vec::new();
        if self.dimensions >= 1 {
            out.push(("E1", self.bmzi_e1));
        }
        if self.dimensions == 3 {
            out.push(("E2", self.bmzi_e2));
        }
        if self.dimensions >= 2 {
            out.push(("E3", self.bmzi_e3));
        }
        out
    }
}

/// Names of the shipped electrode programs, in documentation order.
pub const PRESET_NAMES: [&str; 6] = [
    "pairs",
    "wires",
    "2d_pairs_of_sheets",
    "bilayer_square",
    "quad_rail_train",
    "full_3d",
];

/// Electrode program for a named target state, together with the edge
/// magnitude the finished lattice carries.
///
/// The sheet-train and rail-train settings coincide on this chip: with the
/// final couplers idle the delay is pure relabeling, so the same electrode
/// program realizes both descriptions.
pub fn preset(name: &str) -> Result<(ChipProgram, ExactWeight)> {
    let base = ChipProgram {
        bmzi_e1: 1.0,
        bmzi_e2: 1.0,
        bmzi_e3: 1.0,
        delta: 3,
        dimensions: 3,
        l_max: 13,
        t_max: 8,
    };
    let (program, half_exp) = match name {
        "pairs" => (base, 0),
        "wires" => (ChipProgram { bmzi_e1: 0.5, ..base }, 2),
        "2d_pairs_of_sheets" | "quad_rail_train" => (
            ChipProgram {
                bmzi_e1: 0.5,
                bmzi_e2: 0.5,
                ..base
            },
            4,
        ),
        "bilayer_square" => (
            ChipProgram {
                bmzi_e1: 0.5,
                bmzi_e3: 0.5,
                dimensions: 2,
                ..base
            },
            3,
        ),
        "full_3d" => (
            ChipProgram {
                bmzi_e1: 0.5,
                bmzi_e2: 0.5,
                bmzi_e3: 0.5,
                ..base
            },
            5,
        ),
        other => {
            return Err(CoreError::InvalidParameter(format!(
                "unknown chip preset '{other}'"
            )))
        }
    };
    Ok((program, ExactWeight::inv_sqrt2_pow(half_exp)))
}

/// Ordered list of construction stages for a dimension.
fn stage_names(dimensions: usize) -> &'static [&'static str] {
    match dimensions {
        0 => &["sources"],
        1 => &["sources", "e1"],
        2 => &["sources", "e1", "umzi_delay", "e3"],
        _ => &["sources", "e1", "e2", "umzi_delay", "e3"],
    }
}

/// Tracks the graph and the label-to-index map while stages are applied.
/// Mode positions never change; the delay stage only rewrites label values.
struct Assembler {
    labels: Vec<ModeLabel>,
    positions: BTreeMap<ModeLabel, usize>,
    graph: SimplifiedGraph,
}

impl Assembler {
    fn new(program: &ChipProgram, r: f64) -> Result<Assembler> {
        let labels = program.mode_labels();
        let positions: BTreeMap<ModeLabel, usize> =
            labels.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let mut edges = BTreeMap::new();
        for (i, m) in labels.iter().enumerate() {
            let partner = 2 * m.rail.pump(program.delta) - m.l;
            if partner > m.l && partner.abs() <= program.l_max {
                let j = positions[&ModeLabel {
                    rail: m.rail,
                    l: partner,
                    t: m.t,
                }];
                edges.insert((i, j), ExactWeight::integer(-1));
            }
        }
        let strings = labels.iter().map(|m| m.to_string()).collect();
        let graph = SimplifiedGraph::from_parts(strings, edges, r, GraphForm::Squeezed)?;
        Ok(Assembler {
            labels,
            positions,
            graph,
        })
    }

    /// Applies one 50:50 coupler, minus port first, unless the electrode is
    /// set to pass through.
    fn mix(&mut self, minus: ModeLabel, plus: ModeLabel, ratio: f64) -> Result<()> {
        if ratio == 1.0 {
            return Ok(());
        }
        let j = self.positions[&minus];
        let k = self.positions[&plus];
        self.graph = apply_beamsplitter_graph(&self.graph, j, k)?;
        Ok(())
    }

    /// Advances the slot label cyclically on the routed minus-class arms.
    fn delay(&mut self, program: &ChipProgram) -> Result<()> {
        for m in self.labels.iter_mut() {
            if program.delayed_rails().contains(&m.rail) && m.l.rem_euclid(4) == 3 {
                m.t = (m.t + 1) % program.t_max;
            }
        }
        self.positions = self
            .labels
            .iter()
            .enumerate()
            .map(|(i, &m)| (m, i))
            .collect();
        let strings = self.labels.iter().map(|m| m.to_string()).collect();
        self.graph = self.graph.clone().with_labels(strings)?;
        Ok(())
    }
}

fn check_exact_ratios(program: &ChipProgram) -> Result<()> {
    for (name, rho) in program.active_ratios() {
        if rho != 0.5 && rho != 1.0 {
            return Err(CoreError::InvalidParameter(format!(
                "splitting ratio {rho} at {name} leaves the exact edge calculus \
                 (only 50:50 and 100:0 are representable); use the covariance route"
            )));
        }
    }
    Ok(())
}

/// Assembles the cluster-state graph for a program, returning every
/// intermediate stage alongside its name.
pub fn build_stages(
    program: &ChipProgram,
    r: f64,
) -> Result<Vec<(&'static str, SimplifiedGraph)>> {
    program.validate()?;
    check_exact_ratios(program)?;
    let mut asm = Assembler::new(program, r)?;
    let mut out = vec![("sources", asm.graph.clone())];
    let window = program.window();

    if program.dimensions >= 1 {
        for t in 0..program.t_max {
            for &l in &window {
                asm.mix(
                    ModeLabel { rail: Rail::A, l, t },
                    ModeLabel { rail: Rail::B, l, t },
                    program.bmzi_e1,
                )?;
                if program.dimensions == 3 {
                    asm.mix(
                        ModeLabel { rail: Rail::C, l, t },
                        ModeLabel { rail: Rail::D, l, t },
                        program.bmzi_e1,
                    )?;
                }
            }
        }
        out.push(("e1", asm.graph.clone()));
    }

    if program.dimensions == 3 {
        for t in 0..program.t_max {
            for &l in &window {
                asm.mix(
                    ModeLabel { rail: Rail::A, l, t },
                    ModeLabel { rail: Rail::C, l, t },
                    program.bmzi_e2,
                )?;
                asm.mix(
                    ModeLabel { rail: Rail::B, l, t },
                    ModeLabel { rail: Rail::D, l, t },
                    program.bmzi_e2,
                )?;
            }
        }
        out.push(("e2", asm.graph.clone()));
    }

    if program.dimensions >= 2 {
        asm.delay(program)?;
        out.push(("umzi_delay", asm.graph.clone()));
        for t in 0..program.t_max {
            for &l in &window {
                if l.rem_euclid(4) != 3 {
                    continue;
                }
                asm.mix(
                    ModeLabel { rail: Rail::A, l, t },
                    ModeLabel { rail: Rail::B, l, t },
                    program.bmzi_e3,
                )?;
                if program.dimensions == 3 {
                    asm.mix(
                        ModeLabel { rail: Rail::C, l, t },
                        ModeLabel { rail: Rail::D, l, t },
                        program.bmzi_e3,
                    )?;
                }
            }
        }
        out.push(("e3", asm.graph.clone()));
    }

    debug_assert_eq!(
        out.iter().map(|(name, _)| *name).collect::<Vec<_>>(),
        stage_names(program.dimensions)
    );
    Ok(out)
}

/// Assembles the finished cluster-state graph for a program.
pub fn build(program: &ChipProgram, r: f64) -> Result<SimplifiedGraph> {
    Ok(build_stages(program, r)?.pop().expect("at least one stage").1)
}

/// Runs the same pipeline at the covariance level, supporting any splitting
/// ratio in [0, 1]. Returns the mode labels in register order and the output
/// Gaussian state.
pub fn build_covariance(program: &ChipProgram, r: f64) -> Result<(Vec<ModeLabel>, GaussianState)> {
    program.validate()?;
    if !(r.is_finite() && r >= 0.0) {
        return Err(CoreError::NegativeSqueezing(r));
    }
    let mut labels = program.mode_labels();
    let n = labels.len();
    if n > MAX_DENSE_MODES {
        return Err(CoreError::InvalidParameter(format!(
            "{n} modes exceed the dense covariance limit of {MAX_DENSE_MODES}"
        )));
    }
    let position = |labels: &[ModeLabel], m: ModeLabel| -> usize {
        labels
            .iter()
            .position(|&x| x == m)
            .expect("rectangular window contains every staged coordinate")
    };

    let c2 = (2.0 * r).cosh();
    let s2 = (2.0 * r).sinh();
    let mut cov = DMatrix::zeros(2 * n, 2 * n);
    for (i, m) in labels.iter().enumerate() {
        let partner = 2 * m.rail.pump(program.delta) - m.l;
        if partner.abs() <= program.l_max {
            cov[(i, i)] = c2 / 2.0;
            cov[(n + i, n + i)] = c2 / 2.0;
            let j = position(
                &labels,
                ModeLabel {
                    rail: m.rail,
                    l: partner,
                    t: m.t,
                },
            );
            cov[(i, j)] = s2 / 2.0;
            cov[(n + i, n + j)] = -s2 / 2.0;
        } else {
            // Placeholder convention shared with the graph calculus.
            cov[(i, i)] = 1.0 / (2.0 * c2);
            cov[(n + i, n + i)] = c2 / 2.0;
        }
    }
    let mut state = GaussianState::new(DVector::zeros(2 * n), cov)?;

    let mix = |state: &mut GaussianState,
                   labels: &[ModeLabel],
                   minus: ModeLabel,
                   plus: ModeLabel,
                   rho: f64| {
        if rho == 1.0 {
            return;
        }
        let t = rho.sqrt();
        let q = (1.0 - rho).sqrt();
        let o = DMatrix::from_row_slice(2, 2, &[t, -q, q, t]);
        let gate = SymplecticGate::from_annihilation_orthogonal(&o)
            .embed(&[position(labels, minus), position(labels, plus)], n);
        *state = state.apply(&gate);
    };

    let window = program.window();
    if program.dimensions >= 1 {
        for t in 0..program.t_max {
            for &l in &window {
                mix(
                    &mut state,
                    &labels,
                    ModeLabel { rail: Rail::A, l, t },
                    ModeLabel { rail: Rail::B, l, t },
                    program.bmzi_e1,
                );
                if program.dimensions == 3 {
                    mix(
                        &mut state,
                        &labels,
                        ModeLabel { rail: Rail::C, l, t },
                        ModeLabel { rail: Rail::D, l, t },
                        program.bmzi_e1,
                    );
                }
            }
        }
    }
    if program.dimensions == 3 {
        for t in 0..program.t_max {
            for &l in &window {
                mix(
                    &mut state,
                    &labels,
                    ModeLabel { rail: Rail::A, l, t },
                    ModeLabel { rail: Rail::C, l, t },
                    program.bmzi_e2,
                );
                mix(
                    &mut state,
                    &labels,
                    ModeLabel { rail: Rail::B, l, t },
                    ModeLabel { rail: Rail::D, l, t },
                    program.bmzi_e2,
                );
            }
        }
    }
    if program.dimensions >= 2 {
        for m in labels.iter_mut() {
            if program.delayed_rails().contains(&m.rail) && m.l.rem_euclid(4) == 3 {
                m.t = (m.t + 1) % program.t_max;
            }
        }
        for t in 0..program.t_max {
            for &l in &window {
                if l.rem_euclid(4) != 3 {
                    continue;
                }
                mix(
                    &mut state,
                    &labels,
                    ModeLabel { rail: Rail::A, l, t },
                    ModeLabel { rail: Rail::B, l, t },
                    program.bmzi_e3,
                );
                if program.dimensions == 3 {
                    mix(
                        &mut state,
                        &labels,
                        ModeLabel { rail: Rail::C, l, t },
                        ModeLabel { rail: Rail::D, l, t },
                        program.bmzi_e3,
                    );
                }
            }
        }
    }
    Ok((labels, state))
}

/// One reported stabilizer row, as coefficient vectors over the q and p
/// blocks of the register.
#[derive(Debug, Clone)]
pub struct Nullifier {
    /// Index of the mode whose identity coefficient anchors the row.
    pub anchor: usize,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl Nullifier {
    /// Stacked (q, p) coefficient vector, ready for variance evaluation.
    pub fn stacked(&self) -> Vec<f64> {
        let mut out = self.q.clone();
        out.extend_from_slice(&self.p);
        out
    }
}

/// Stabilizer rows of a built graph.
///
/// For a squeezed-form graph these are the rows of (I + V) over the q
/// quadratures followed by the rows of (I - V) over the p quadratures, with V
/// the infinite-squeezing edge matrix (entries +-C). After conversion to
/// cluster form the single family p - Vq is returned instead. Rows whose
/// correlation support is cut by the spectral window (squared edge weights
/// not summing to one exactly) describe no lattice stabilizer and are
/// omitted, as are rows of uncorrelated placeholder modes.
pub fn nullifiers(graph: &SimplifiedGraph) -> Result<Vec<Nullifier>> {
    let n = graph.n_modes();
    let mut rows: Vec<Vec<(usize, ExactWeight)>> = vec![Vec::new(); n];
    for (i, j, w) in graph.edges() {
        rows[i].push((j, w));
        rows[j].push((i, w));
    }
    let complete: Vec<bool> = rows
        .iter()
        .map(|row| {
            let mut acc = ExactWeight::ZERO;
            for (_, w) in row {
                acc = acc + *w * *w;
            }
            acc == ExactWeight::ONE
        })
        .collect();

    let mut out = Vec::new();
    match graph.form() {
        GraphForm::Squeezed => {
            for i in 0..n {
                if !complete[i] {
                    continue;
                }
                let mut q = vec![0.0; n];
                q[i] = 1.0;
                for (j, w) in &rows[i] {
                    q[*j] += w.value();
                }
                out.push(Nullifier {
                    anchor: i,
                    q,
                    p: vec![0.0; n],
                });
            }
            for i in 0..n {
                if !complete[i] {
                    continue;
                }
                let mut p = vec![0.0; n];
                p[i] = 1.0;
                for (j, w) in &rows[i] {
                    p[*j] -= w.value();
                }
                out.push(Nullifier {
                    anchor: i,
                    q: vec![0.0; n],
                    p,
                });
            }
        }
        GraphForm::Cluster => {
            for i in 0..n {
                if !complete[i] {
                    continue;
                }
                let mut q = vec![0.0; n];
                let mut p = vec![0.0; n];
                p[i] = 1.0;
                for (j, w) in &rows[i] {
                    q[*j] -= w.value();
                }
                out.push(Nullifier { anchor: i, q, p });
            }
        }
    }
    Ok(out)
}

/// Mode-count factorization of a target cluster state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSize {
    pub spatial: u64,
    pub spectral: Vec<u64>,
    pub temporal: Option<u64>,
}

impl StateSize {
    pub fn total(&self) -> u64 {
        let spectral: u64 = self.spectral.iter().product();
        self.spatial * spectral * self.temporal.unwrap_or(1)
    }
}

impl fmt::Display for StateSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.spatial)?;
        for s in &self.spectral {
            write!(f, "x{s}")?;
        }
        if let Some(tau) = self.temporal {
            write!(f, "x{tau}")?;
        }
        Ok(())
    }
}

/// Achievable state size for a lattice dimension, given the number of usable
/// comb line pairs on each ring and the temporal depth tau.
///
/// Both sidebands of every usable pair are modes, so the spectral extent is
/// 2 * pairs. The 3D lattice splits its frequency axis into (pump offset) x
/// (position): the offset is the odd integer nearest sqrt(2 * pairs) and the
/// position count is what fits underneath.
pub fn size(dimension: usize, pairs: u64, tau: u64) -> Result<StateSize> {
    if pairs == 0 {
        return Err(CoreError::InvalidParameter(
            "the usable line-pair count must be positive".into(),
        ));
    }
    let modes = 2 * pairs;
    match dimension {
        0 => Ok(StateSize {
            spatial: 1,
            spectral: vec![modes],
            temporal: None,
        }),
        1 => Ok(StateSize {
            spatial: 2,
            spectral: vec![modes],
            temporal: None,
        }),
        2 => Ok(StateSize {
            spatial: 2,
            spectral: vec![modes],
            temporal: Some(tau),
        }),
        3 => {
            let target = (modes as f64).sqrt();
            let rounded = target.round() as u64;
            let delta = if rounded % 2 == 1 {
                rounded
            } else {
                let below = rounded.saturating_sub(1).max(1);
                let above = rounded + 1;
                if (target - below as f64).abs() <= (above as f64 - target).abs() {
                    below
                } else {
                    above
                }
            };
            let per_offset = modes / delta;
            Ok(StateSize {
                spatial: 4,
                spectral: vec![delta, per_offset],
                temporal: Some(tau),
            })
        }
        other => Err(CoreError::InvalidParameter(format!(
            "dimension {other} outside 0..=3"
        ))),
    }
}

/// Four co-located modes of the 3D unit cell.
#[derive(Debug, Clone)]
pub struct Macronode {
    pub l: i64,
    pub t: u32,
    /// Mode indices into the underlying graph, one per rail.
    pub modes: Vec<usize>,
}

/// Aggregated coupling between two macronodes: which ring's pair generated
/// it and the cyclic time offset it spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MacronodeEdge {
    pub a: usize,
    pub b: usize,
    pub pump: Rail,
    pub dt: u32,
}

/// Coarse-grained view of a four-rail lattice: modes grouped by (l, t).
#[derive(Debug, Clone)]
pub struct MacronodeView {
    pub macronodes: Vec<Macronode>,
    pub edges: Vec<MacronodeEdge>,
}

impl MacronodeView {
    pub fn degree(&self, i: usize) -> usize {
        self.edges.iter().filter(|e| e.a == i || e.b == i).count()
    }

    /// Histogram of macronode degrees: degree -> count.
    pub fn degree_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for i in 0..self.macronodes.len() {
            *hist.entry(self.degree(i)).or_insert(0) += 1;
        }
        hist
    }
}

/// Groups the modes of a four-rail build into macronodes at equal (l, t) and
/// aggregates the mode edges between them.
pub fn macronode_coarse_grain(graph: &SimplifiedGraph) -> Result<MacronodeView> {
    let labels: Vec<ModeLabel> = graph
        .labels()
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_>>()?;
    let rails: BTreeSet<Rail> = labels.iter().map(|m| m.rail).collect();
    if rails.len() != 4 {
        return Err(CoreError::InvalidParameter(format!(
            "macronode view needs the four-rail lattice; this graph uses {} rail(s)",
            rails.len()
        )));
    }
    let t_span = labels.iter().map(|m| m.t).max().unwrap_or(0) as i64 + 1;

    let mut groups: BTreeMap<(u32, i64), Vec<usize>> = BTreeMap::new();
    for (i, m) in labels.iter().enumerate() {
        groups.entry((m.t, m.l)).or_default().push(i);
    }
    let macronodes: Vec<Macronode> = groups
        .into_iter()
        .map(|((t, l), modes)| Macronode { l, t, modes })
        .collect();
    let mut node_of = vec![0usize; labels.len()];
    for (k, m) in macronodes.iter().enumerate() {
        for &i in &m.modes {
            node_of[i] = k;
        }
    }

    // Infer the pump offset from the frequency sums present; pair sums are
    // 0 and 4 for the first two rings and 2 +- 2 delta for the others.
    let mut delta: Option<i64> = None;
    let mut tagged: BTreeMap<(usize, usize), (Rail, u32)> = BTreeMap::new();
    for (i, j, _) in graph.edges() {
        let (ma, mb) = (node_of[i], node_of[j]);
        if ma == mb {
            return Err(CoreError::DegenerateGraph(format!(
                "edge between {} and {} stays inside one macronode",
                labels[i], labels[j]
            )));
        }
        let sum = labels[i].l + labels[j].l;
        let pump = match sum {
            0 => Rail::A,
            4 => Rail::B,
            s => {
                let d = (s - 2) / 2;
                let inferred = d.abs();
                if (s - 2) % 2 != 0 || inferred < 3 {
                    return Err(CoreError::DegenerateGraph(format!(
                        "frequency sum {s} matches no pump placement"
                    )));
                }
                match delta {
                    None => delta = Some(inferred),
                    Some(prev) if prev != inferred => {
                        return Err(CoreError::DegenerateGraph(format!(
                            "inconsistent pump offsets {prev} and {inferred}"
                        )))
                    }
                    _ => {}
                }
                if d > 0 {
                    Rail::C
                } else {
                    Rail::D
                }
            }
        };
        let raw = (labels[i].t as i64 - labels[j].t as i64).rem_euclid(t_span);
        let dt = raw.min(t_span - raw) as u32;
        let key = (ma.min(mb), ma.max(mb));
        match tagged.get(&key) {
            None => {
                tagged.insert(key, (pump, dt));
            }
            Some(&(p, d)) => {
                if p != pump || d != dt {
                    return Err(CoreError::DegenerateGraph(format!(
                        "macronode pair ({}, {}) carries conflicting tags",
                        key.0, key.1
                    )));
                }
            }
        }
    }
    let edges = tagged
        .into_iter()
        .map(|((a, b), (pump, dt))| MacronodeEdge { a, b, pump, dt })
        .collect();
    Ok(MacronodeView { macronodes, edges })
}
