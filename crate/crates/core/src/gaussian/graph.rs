//! Graph descriptions of the multimode Gaussian states produced by pair
//! sources and balanced beamsplitters.
//!
//! Two levels of description coexist:
//!
//! * [`SimplifiedGraph`] tracks only the signed edge-weight matrix W (exact
//!   ring arithmetic), the shared squeezing parameter r, and whether the
//!   quarter-wave conversion to cluster form has been applied. Beamsplitters
//!   act on W alone, so arbitrarily large networks stay cheap and exact.
//! * [`ComplexGraph`] is the dense adjacency matrix Z = V + iU of an N-mode
//!   pure Gaussian state, from which the covariance matrix follows.
//!
//! Expansion rules, with c2 = cosh 2r, s2 = sinh 2r:
//! squeezed form  U = c2 I + s2 W, V = 0;
//! cluster form   U = I/c2,        V = tanh(2r) W.
//! The cluster conversion itself is a -pi/4 phase rotation of every mode and
//! leaves W and r untouched.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::gaussian::state::GaussianState;
use crate::gaussian::weight::ExactWeight;

/// Dense expansion is quadratic in memory and cubic in time; refuse sizes
/// where that stops being interactive.
pub const MAX_DENSE_MODES: usize = 512;

/// Which expansion rule applies to the stored edge matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphForm {
    /// Direct output of the pair sources and beamsplitter network.
    Squeezed,
    /// After the quarter-wave phase delay on every mode.
    Cluster,
}

/// Sparse exact description: labels, signed edge weights W (upper triangle
/// plus diagonal), squeezing parameter, and form.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplifiedGraph {
    labels: Vec<String>,
    edges: BTreeMap<(usize, usize), ExactWeight>,
    r: f64,
    form: GraphForm,
}

#[derive(Serialize, Deserialize)]
struct GraphOnDisk {
    modes: Vec<String>,
    edges: Vec<(usize, usize, i32)>,
    #[serde(rename = "C")]
    c: f64,
    r: f64,
    form: GraphForm,
}

impl SimplifiedGraph {
    /// Build a graph from explicit parts. Edge keys are normalized to the
    /// upper triangle; zero weights are dropped.
    pub fn from_parts(
        labels: Vec<String>,
        edges: impl IntoIterator<Item = ((usize, usize), ExactWeight)>,
        r: f64,
        form: GraphForm,
    ) -> Result<Self> {
        let n = labels.len();
        let mut map = BTreeMap::new();
        for ((i, j), w) in edges {
            if i >= n || j >= n {
                return Err(CoreError::InvalidMode(format!(
                    "edge ({i}, {j}) outside {n} modes"
                )));
            }
            if w.is_zero() {
                continue;
            }
            let key = if i <= j { (i, j) } else { (j, i) };
            if map.insert(key, w).is_some() {
                return Err(CoreError::InvalidParameter(format!(
                    "duplicate edge ({}, {})",
                    key.0, key.1
                )));
            }
        }
        if !(r.is_finite() && r >= 0.0) {
            return Err(CoreError::NegativeSqueezing(r));
        }
        Ok(SimplifiedGraph { labels, edges: map, r, form })
    }

    /// A register of modes with no pair correlations, at the shared
    /// squeezing parameter of the network it will be joined with.
    pub fn uncorrelated(n: usize, r: f64) -> Self {
        SimplifiedGraph {
            labels: (0..n).map(|i| i.to_string()).collect(),
            edges: BTreeMap::new(),
            r,
            form: GraphForm::Squeezed,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.labels.len()
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn form(&self) -> GraphForm {
        self.form
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Replace the mode labels (length must match).
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.labels.len() {
            return Err(CoreError::InvalidParameter(format!(
                "{} labels for {} modes",
                labels.len(),
                self.labels.len()
            )));
        }
        self.labels = labels;
        Ok(self)
    }

    /// Iterate over stored edges as (i, j, weight) with i <= j.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, ExactWeight)> + '_ {
        self.edges.iter().map(|(&(i, j), &w)| (i, j, w))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Exact weight of the (i, j) entry of W, zero if absent.
    pub fn weight(&self, i: usize, j: usize) -> ExactWeight {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.edges.get(&key).copied().unwrap_or(ExactWeight::ZERO)
    }

    /// Common magnitude C shared by every edge, if the graph has edges and
    /// they all agree. Freshly built pair sources give C = 1 and each
    /// balanced beamsplitter pass divides C by sqrt(2).
    pub fn rescaling_parameter(&self) -> Option<ExactWeight> {
        let mut iter = self.edges.values();
        let first = iter.next()?.abs();
        for w in iter {
            if !w.same_magnitude(&first) {
                return None;
            }
        }
        Some(first)
    }

    /// The full symmetric edge matrix W as floating point.
    pub fn edge_matrix(&self) -> DMatrix<f64> {
        let n = self.n_modes();
        let mut w = DMatrix::<f64>::zeros(n, n);
        for (&(i, j), weight) in &self.edges {
            let v = weight.value();
            w[(i, j)] = v;
            if i != j {
                w[(j, i)] = v;
            }
        }
        w
    }

    /// Disjoint union: other's modes are appended after ours. Both graphs
    /// must share the squeezing parameter and form.
    pub fn union(&self, other: &SimplifiedGraph) -> Result<SimplifiedGraph> {
        if (self.r - other.r).abs() > 1e-12 {
            return Err(CoreError::InvalidParameter(format!(
                "cannot join graphs with different squeezing ({} vs {})",
                self.r, other.r
            )));
        }
        if self.form != other.form {
            return Err(CoreError::InvalidParameter(
                "cannot join graphs in different forms".into(),
            ));
        }
        let off = self.n_modes();
        let mut labels = self.labels.clone();
        labels.extend(other.labels.iter().cloned());
        let mut edges = self.edges.clone();
        for (&(i, j), &w) in &other.edges {
            edges.insert((i + off, j + off), w);
        }
        Ok(SimplifiedGraph { labels, edges, r: self.r, form: self.form })
    }

    /// Dense adjacency matrix Z = V + iU of the state this graph describes.
    pub fn expand(&self) -> Result<ComplexGraph> {
        let n = self.n_modes();
        if n > MAX_DENSE_MODES {
            return Err(CoreError::InvalidParameter(format!(
                "dense expansion of {n} modes exceeds the {MAX_DENSE_MODES}-mode limit"
            )));
        }
        let w = self.edge_matrix();
        let c2 = (2.0 * self.r).cosh();
        let s2 = (2.0 * self.r).sinh();
        let (u, v) = match self.form {
            GraphForm::Squeezed => {
                (DMatrix::identity(n, n) * c2 + &w * s2, DMatrix::zeros(n, n))
            }
            GraphForm::Cluster => {
                (DMatrix::identity(n, n) / c2, &w * (2.0 * self.r).tanh())
            }
        };
        ComplexGraph::new(v, u)
    }

    /// Serialize as JSON with per-edge signs and the shared magnitude C.
    pub fn to_json(&self) -> Result<String> {
        let c = if self.edges.is_empty() {
            1.0
        } else {
            self.rescaling_parameter()
                .ok_or(CoreError::MixedMagnitudes)?
                .value()
        };
        let disk = GraphOnDisk {
            modes: self.labels.clone(),
            edges: self.edges().map(|(i, j, w)| (i, j, w.signum())).collect(),
            c,
            r: self.r,
            form: self.form,
        };
        serde_json::to_string_pretty(&disk)
            .map_err(|e| CoreError::Serialization(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<SimplifiedGraph> {
        let disk: GraphOnDisk =
            serde_json::from_str(text).map_err(|e| CoreError::Serialization(e.to_string()))?;
        // Recover the exact magnitude: every C the calculus produces is an
        // integer power of 1/sqrt(2).
        let magnitude = if disk.edges.is_empty() {
            ExactWeight::ONE
        } else {
            if !(disk.c.is_finite() && disk.c > 0.0) {
                return Err(CoreError::Serialization(format!(
                    "rescaling parameter C = {} is not positive",
                    disk.c
                )));
            }
            let m = (-2.0 * disk.c.log2()).round();
            let target = f64::powf(0.5, m / 2.0);
            if !((disk.c - target).abs() <= 1e-9 * target && m.abs() < 120.0) {
                return Err(CoreError::Serialization(format!(
                    "rescaling parameter C = {} is not a power of 1/sqrt(2)",
                    disk.c
                )));
            }
            exact_inv_sqrt2_signed(m as i32)
        };
        let edges = disk.edges.into_iter().map(|(i, j, sign)| {
            let w = match sign {
                1 => magnitude,
                -1 => -magnitude,
                _ => ExactWeight::ZERO,
            };
            ((i, j), w)
        });
        SimplifiedGraph::from_parts(disk.modes, edges, disk.r, disk.form)
    }

    /// Graphviz rendering: solid for positive edges, dashed for negative.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        out.push_str(&format!("graph \"{name}\" {{\n"));
        out.push_str("  node [shape=circle fontsize=10];\n");
        for (i, label) in self.labels.iter().enumerate() {
            out.push_str(&format!("  n{i} [label=\"{label}\"];\n"));
        }
        for (i, j, w) in self.edges() {
            let style = if w.signum() >= 0 { "solid" } else { "dashed" };
            out.push_str(&format!(
                "  n{i} -- n{j} [style={style} label=\"{:+.4}\"];\n",
                w.value()
            ));
        }
        out.push_str("}\n");
        out
    }
}

/// Two-mode squeezed pair: one edge of weight -1 between the modes, so the
/// joint quadratures (q1 - q2) and (p1 + p2) are squeezed to e^{-2r}.
pub fn tmss_graph(r: f64) -> Result<SimplifiedGraph> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(CoreError::NegativeSqueezing(r));
    }
    SimplifiedGraph::from_parts(
        vec!["0".into(), "1".into()],
        [((0, 1), -ExactWeight::ONE)],
        r,
        GraphForm::Squeezed,
    )
}

/// Balanced beamsplitter a_j -> (a_j - a_k)/sqrt(2), a_k -> (a_j + a_k)/sqrt(2)
/// applied to the graph: W -> O W O^T carried out in exact arithmetic.
pub fn apply_beamsplitter_graph(
    g: &SimplifiedGraph,
    j: usize,
    k: usize,
) -> Result<SimplifiedGraph> {
    let n = g.n_modes();
    if j >= n || k >= n {
        return Err(CoreError::InvalidMode(format!(
            "beamsplitter modes ({j}, {k}) outside {n} modes"
        )));
    }
    if j == k {
        return Err(CoreError::InvalidMode(format!(
            "beamsplitter needs two distinct modes, got ({j}, {j})"
        )));
    }

    let mut out = g.clone();
    let wjj = g.weight(j, j);
    let wkk = g.weight(k, k);
    let wjk = g.weight(j, k);

    // Drop every entry touching j or k, then rebuild them.
    out.edges.retain(|&(a, b), _| a != j && a != k && b != j && b != k);

    let mut put = |i: usize, l: usize, w: ExactWeight| {
        if !w.is_zero() {
            let key = if i <= l { (i, l) } else { (l, i) };
            out.edges.insert(key, w);
        }
    };

    for c in 0..n {
        if c == j || c == k {
            continue;
        }
        let wjc = g.weight(j, c);
        let wkc = g.weight(k, c);
        put(j, c, (wjc - wkc).div_sqrt2());
        put(k, c, (wjc + wkc).div_sqrt2());
    }
    put(j, j, (wjj - wjk - wjk + wkk).half());
    put(k, k, (wjj + wjk + wjk + wkk).half());
    put(j, k, (wjj - wkk).half());

    Ok(out)
}

/// Quarter-wave phase delay on every mode: switches the expansion rule from
/// squeezed to cluster form. Idempotent.
pub fn to_cluster_state(g: &SimplifiedGraph) -> SimplifiedGraph {
    let mut out = g.clone();
    out.form = GraphForm::Cluster;
    out
}

/// Dense adjacency matrix Z = V + iU of an N-mode pure Gaussian state.
/// U must be symmetric positive definite and V symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGraph {
    v: DMatrix<f64>,
    u: DMatrix<f64>,
}

impl ComplexGraph {
    pub fn new(v: DMatrix<f64>, u: DMatrix<f64>) -> Result<Self> {
        let n = u.nrows();
        if u.ncols() != n || v.nrows() != n || v.ncols() != n {
            return Err(CoreError::DegenerateGraph(
                "U and V must be square matrices of equal size".into(),
            ));
        }
        let scale_u = u.amax().max(1.0);
        let scale_v = v.amax().max(1.0);
        if (&u - u.transpose()).amax() > 1e-9 * scale_u
            || (&v - v.transpose()).amax() > 1e-9 * scale_v
        {
            return Err(CoreError::DegenerateGraph(
                "U and V must be symmetric".into(),
            ));
        }
        if u.clone().cholesky().is_none() {
            return Err(CoreError::DegenerateGraph(
                "U is not positive definite".into(),
            ));
        }
        Ok(ComplexGraph { v, u })
    }

    pub fn n_modes(&self) -> usize {
        self.u.nrows()
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }
}

/// Covariance matrix of the state with adjacency Z = V + iU:
///
/// sigma = 1/2 [ U^-1          U^-1 V          ]
///             [ V U^-1        U + V U^-1 V    ]
///
/// in the (q..., p...) quadrature ordering, with zero mean.
pub fn graph_to_covariance(z: &ComplexGraph) -> Result<GaussianState> {
    let n = z.n_modes();
    if n > MAX_DENSE_MODES {
        return Err(CoreError::InvalidParameter(format!(
            "dense covariance of {n} modes exceeds the {MAX_DENSE_MODES}-mode limit"
        )));
    }
    let chol = z
        .u
        .clone()
        .cholesky()
        .ok_or_else(|| CoreError::DegenerateGraph("U is not positive definite".into()))?;
    let u_inv = chol.inverse();
    let u_inv_v = &u_inv * &z.v;
    let v_u_inv = &z.v * &u_inv;

    let mut cov = DMatrix::<f64>::zeros(2 * n, 2 * n);
    let pp = &z.u + &z.v * &u_inv_v;
    for i in 0..n {
        for j in 0..n {
            cov[(i, j)] = 0.5 * u_inv[(i, j)];
            cov[(i, n + j)] = 0.5 * u_inv_v[(i, j)];
            cov[(n + i, j)] = 0.5 * v_u_inv[(i, j)];
            cov[(n + i, n + j)] = 0.5 * pp[(i, j)];
        }
    }
    let cov = (&cov + cov.transpose()) * 0.5;
    GaussianState::new(nalgebra::DVector::zeros(2 * n), cov)
}

/// Exact (1/sqrt(2))^m, allowing negative m.
fn exact_inv_sqrt2_signed(m: i32) -> ExactWeight {
    if m >= 0 {
        ExactWeight::inv_sqrt2_pow(m as u32)
    } else {
        let whole = (-m) as u32 / 2;
        let base = ExactWeight::integer(1i64 << whole);
        if (-m) % 2 == 1 {
            // One leftover factor of sqrt(2) = 2 / sqrt(2).
            base * ExactWeight::integer(2).div_sqrt2()
        } else {
            base
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signed_inverse_powers_match_values() {
        for m in -6..=6 {
            let w = exact_inv_sqrt2_signed(m);
            let expected = f64::powf(0.5, m as f64 / 2.0);
            assert!((w.value() - expected).abs() < 1e-12 * expected.max(1.0));
        }
    }

    #[test]
    fn beamsplitter_preserves_involution() {
        let pair = tmss_graph(0.9).unwrap();
        let mut g = pair.union(&tmss_graph(0.9).unwrap()).unwrap();
        // A chain of mixes, including one straddling an existing edge so the
        // diagonal of W gets populated.
        for &(a, b) in &[(1, 2), (0, 1), (2, 3), (0, 3)] {
            g = apply_beamsplitter_graph(&g, a, b).unwrap();
        }
        let w = g.edge_matrix();
        let n = g.n_modes();
        let defect = (&w * &w - DMatrix::<f64>::identity(n, n)).amax();
        assert!(defect < 1e-12, "W^2 = I must survive any mix sequence");
    }

    #[test]
    fn union_rejects_mismatched_parameters() {
        let a = tmss_graph(0.5).unwrap();
        let b = tmss_graph(0.6).unwrap();
        assert!(a.union(&b).is_err());
        let c = to_cluster_state(&a);
        assert!(a.union(&c).is_err());
    }

    #[test]
    fn json_rejects_corrupt_magnitude() {
        let g = apply_beamsplitter_graph(
            &tmss_graph(0.5).unwrap().union(&tmss_graph(0.5).unwrap()).unwrap(),
            1,
            2,
        )
        .unwrap();
        let json = g.to_json().unwrap();
        let bad = json.replace("0.7071067811865476", "0.62");
        assert!(SimplifiedGraph::from_json(&bad).is_err());
    }
}
