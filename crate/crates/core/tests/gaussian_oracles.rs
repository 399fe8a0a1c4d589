//! Oracle tests for the Gaussian graph calculus.
//!
//! Every expected value here is produced by an independent route: direct
//! symplectic conjugation with hand-written matrices, or closed forms for
//! two-mode squeezed states. The production code under test never supplies
//! its own expectations.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use cvcluster_core::gaussian::{
    apply_beamsplitter_graph, bsg_matrix, foursplitter_matrix, graph_to_covariance,
    homodyne_condition, nullifier_variance, rotation, squeezer, tmss_graph, to_cluster_state,
    v_gate, ComplexGraph, GaussianState, SimplifiedGraph, SymplecticGate,
};

const TOL: f64 = 1e-10;
const TIGHT: f64 = 1e-12;

/// Embed a real n-mode annihilation-basis matrix O into the 2n-dimensional
/// quadrature representation (q..., p...) as diag(O, O), acting on the listed
/// global modes of an N-mode system. Written from scratch so the tests do not
/// depend on the production embedding.
fn embed_orthogonal(o: &DMatrix<f64>, modes: &[usize], n: usize) -> DMatrix<f64> {
    assert_eq!(o.nrows(), modes.len());
    let mut h = DMatrix::<f64>::identity(2 * n, 2 * n);
    for &gi in modes {
        h[(gi, gi)] = 0.0;
        h[(n + gi, n + gi)] = 0.0;
    }
    for (bi, &gi) in modes.iter().enumerate() {
        for (bj, &gj) in modes.iter().enumerate() {
            h[(gi, gj)] = o[(bi, bj)];
            h[(n + gi, n + gj)] = o[(bi, bj)];
        }
    }
    h
}

/// Independent two-mode squeezer: S in the (q1, q2, p1, p2) ordering with
/// gain cosh r, correlating q1 with q2 and anti-correlating p1 with p2.
fn two_mode_squeezer(r: f64) -> DMatrix<f64> {
    let ch = r.cosh();
    let sh = r.sinh();
    DMatrix::from_row_slice(
        4,
        4,
        &[
            ch, sh, 0.0, 0.0, //
            sh, ch, 0.0, 0.0, //
            0.0, 0.0, ch, -sh, //
            0.0, 0.0, -sh, ch,
        ],
    )
}

/// Covariance of the two-mode squeezed vacuum from the independent squeezer.
fn tmss_covariance_oracle(r: f64) -> DMatrix<f64> {
    let s = two_mode_squeezer(r);
    let vac = DMatrix::<f64>::identity(4, 4) * 0.5;
    &s * vac * s.transpose()
}

/// Single-mode phase rotation in the (q, p) quadrature plane: a -> e^{i t} a.
fn rotation_block(t: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()])
}

/// Phase rotation of every mode by the same angle, quadrature representation.
fn rotate_all(theta: f64, n: usize) -> DMatrix<f64> {
    let mut h = DMatrix::<f64>::zeros(2 * n, 2 * n);
    let b = rotation_block(theta);
    for m in 0..n {
        h[(m, m)] = b[(0, 0)];
        h[(m, n + m)] = b[(0, 1)];
        h[(n + m, m)] = b[(1, 0)];
        h[(n + m, n + m)] = b[(1, 1)];
    }
    h
}

fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax()
}

/// Two disjoint two-mode squeezed pairs (0,1) and (2,3) as one graph.
fn two_pairs(r: f64) -> SimplifiedGraph {
    let p1 = tmss_graph(r).unwrap();
    let p2 = tmss_graph(r).unwrap();
    p1.union(&p2).unwrap()
}

#[test]
fn tmss_matches_independent_squeezer_oracle() {
    for &r in &[0.0, 0.3, 1.0, 2.0] {
        let g = tmss_graph(r).unwrap();
        let state = graph_to_covariance(&g.expand().unwrap()).unwrap();
        let expected = tmss_covariance_oracle(r);
        assert!(
            max_abs_diff(state.cov(), &expected) < TOL,
            "r = {r}: covariance deviates from squeezer oracle"
        );
    }
    // Spot value: <q1 q2> = sinh(2r)/2 at r = 1.
    let g = tmss_graph(1.0).unwrap();
    let state = graph_to_covariance(&g.expand().unwrap()).unwrap();
    let expected = (2.0f64).sinh() / 2.0;
    assert!((state.cov()[(0, 1)] - expected).abs() < TOL);
}

#[test]
fn tmss_structure_and_rescaling() {
    let r = 0.8;
    let g = tmss_graph(r).unwrap();
    assert_eq!(g.n_modes(), 2);
    let edges: Vec<_> = g.edges().collect();
    assert_eq!(edges.len(), 1);
    let (i, j, w) = edges[0];
    assert_eq!((i, j), (0, 1));
    assert!((w.value() + 1.0).abs() < TIGHT, "edge weight is -1");
    let c = g.rescaling_parameter().unwrap();
    assert!((c.value() - 1.0).abs() < TIGHT);
    assert_eq!(c.half_exponent(), Some(0));

    let z = g.expand().unwrap();
    let ch2 = (2.0 * r).cosh();
    let sh2 = (2.0 * r).sinh();
    assert!((z.u()[(0, 0)] - ch2).abs() < TOL);
    assert!((z.u()[(1, 1)] - ch2).abs() < TOL);
    assert!((z.u()[(0, 1)] + sh2).abs() < TOL, "off-diagonal of U is -sinh 2r");
    assert!(z.v().amax() < TIGHT, "V vanishes before the cluster conversion");
}

#[test]
fn tmss_zero_squeezing_is_vacuum() {
    let g = tmss_graph(0.0).unwrap();
    let state = graph_to_covariance(&g.expand().unwrap()).unwrap();
    let vac = DMatrix::<f64>::identity(4, 4) * 0.5;
    assert!(max_abs_diff(state.cov(), &vac) < TIGHT);
}

#[test]
fn tmss_rejects_negative_r() {
    assert!(tmss_graph(-0.1).is_err());
}

#[test]
fn identity_graph_is_vacuum() {
    let n = 3;
    let z = ComplexGraph::new(DMatrix::zeros(n, n), DMatrix::identity(n, n)).unwrap();
    let state = graph_to_covariance(&z).unwrap();
    let vac = DMatrix::<f64>::identity(2 * n, 2 * n) * 0.5;
    assert!(max_abs_diff(state.cov(), &vac) < TIGHT);
    assert!(state.mean().amax() < TIGHT);
}

#[test]
fn singular_u_is_rejected() {
    let n = 2;
    let mut u = DMatrix::<f64>::zeros(n, n);
    u[(0, 0)] = 1.0;
    assert!(ComplexGraph::new(DMatrix::zeros(n, n), u).is_err());
}

#[test]
fn beamsplitter_rule_matches_covariance_conjugation() {
    let r = 0.6;
    let g0 = two_pairs(r);
    // Mix the second mode of the first pair with the first mode of the
    // second pair, producing the four-mode square precursor.
    let g1 = apply_beamsplitter_graph(&g0, 1, 2).unwrap();

    let cov0 = graph_to_covariance(&g0.expand().unwrap()).unwrap();
    let b = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, 1.0]) / (2.0f64).sqrt();
    let h = embed_orthogonal(&b, &[1, 2], 4);
    let expected = &h * cov0.cov() * h.transpose();

    let cov1 = graph_to_covariance(&g1.expand().unwrap()).unwrap();
    assert!(max_abs_diff(cov1.cov(), &expected) < TOL);
}

#[test]
fn beamsplitter_square_precursor_edges_and_rescaling() {
    let g = apply_beamsplitter_graph(&two_pairs(0.5), 1, 2).unwrap();
    let c = g.rescaling_parameter().unwrap();
    assert_eq!(c.half_exponent(), Some(1), "C = 1/sqrt(2) exactly");

    let mut signed: Vec<(usize, usize, i32)> = g
        .edges()
        .map(|(i, j, w)| (i, j, if w.value() > 0.0 { 1 } else { -1 }))
        .collect();
    signed.sort();
    assert_eq!(
        signed,
        vec![(0, 1, -1), (0, 2, -1), (1, 3, 1), (2, 3, -1)],
        "square precursor edge set with one positive link"
    );
    // All magnitudes agree with C exactly.
    for (_, _, w) in g.edges() {
        assert!((w.value().abs() - c.value()).abs() < TIGHT);
    }
}

#[test]
fn beamsplitter_on_uncorrelated_modes_is_passthrough() {
    let r = 0.4;
    let pair = tmss_graph(r).unwrap();
    let vac = SimplifiedGraph::uncorrelated(2, r);
    let g = pair.union(&vac).unwrap();
    let out = apply_beamsplitter_graph(&g, 2, 3).unwrap();
    let edges: Vec<_> = out.edges().collect();
    assert_eq!(edges.len(), 1);
    let (i, j, w) = edges[0];
    assert_eq!((i, j), (0, 1));
    assert!((w.value() + 1.0).abs() < TIGHT, "untouched edge keeps magnitude 1");
}

#[test]
fn beamsplitter_rejects_equal_modes() {
    let g = two_pairs(0.5);
    assert!(apply_beamsplitter_graph(&g, 1, 1).is_err());
}

#[test]
fn cluster_conversion_is_quarter_wave_rotation() {
    let r = 0.7;
    let g = apply_beamsplitter_graph(&two_pairs(r), 1, 2).unwrap();
    let before = graph_to_covariance(&g.expand().unwrap()).unwrap();
    let after = graph_to_covariance(&to_cluster_state(&g).expand().unwrap()).unwrap();

    let h = rotate_all(-std::f64::consts::FRAC_PI_4, 4);
    let expected = &h * before.cov() * h.transpose();
    assert!(max_abs_diff(after.cov(), &expected) < TOL);
}

#[test]
fn cluster_form_self_loops_and_edge_weights() {
    let r = 0.5;
    let g = to_cluster_state(&tmss_graph(r).unwrap());
    let z = g.expand().unwrap();
    let sech2 = 1.0 / (2.0 * r).cosh();
    let tanh2 = (2.0 * r).tanh();
    assert!((z.u()[(0, 0)] - sech2).abs() < TOL, "self loop becomes i sech 2r");
    assert!(z.u()[(0, 1)].abs() < TIGHT);
    assert!(
        (z.v()[(0, 1)] + tanh2).abs() < TOL,
        "edge weight becomes -C tanh 2r = -tanh(1) here"
    );
    assert!((z.v()[(0, 1)].abs() - 0.7615941559557649).abs() < 1e-12);
}

#[test]
fn homodyne_conditioning_matches_closed_form() {
    let r = 0.8;
    let g = tmss_graph(r).unwrap();
    let state = graph_to_covariance(&g.expand().unwrap()).unwrap();

    // Measure p on mode 1 (theta = 0) with a nonzero outcome.
    let outcome = 0.37;
    let cond = homodyne_condition(&state, 1, 0.0, outcome).unwrap();
    assert_eq!(cond.n_modes(), 1);

    let ch2 = (2.0 * r).cosh();
    let th2 = (2.0 * r).tanh();
    // var(p0 | p1) = 1 / (2 cosh 2r); mean shifts by -tanh(2r) * outcome.
    assert!((cond.cov()[(1, 1)] - 1.0 / (2.0 * ch2)).abs() < TOL);
    assert!((cond.mean()[1] + th2 * outcome).abs() < TOL);
    // The unmeasured quadrature keeps its marginal variance.
    assert!((cond.cov()[(0, 0)] - ch2 / 2.0).abs() < TOL);

    // Measuring q instead (theta = pi/2) conditions the partner q the same way.
    let cond_q = homodyne_condition(&state, 1, std::f64::consts::FRAC_PI_2, 0.0).unwrap();
    assert!((cond_q.cov()[(0, 0)] - 1.0 / (2.0 * ch2)).abs() < TOL);
}

#[test]
fn homodyne_conditioning_on_vacuum_is_passthrough() {
    let state = GaussianState::vacuum(3);
    let cond = homodyne_condition(&state, 1, 0.9, 0.0).unwrap();
    assert_eq!(cond.n_modes(), 2);
    let vac = DMatrix::<f64>::identity(4, 4) * 0.5;
    assert!(max_abs_diff(cond.cov(), &vac) < TIGHT);
    assert!(cond.mean().amax() < TIGHT);
}

#[test]
fn conditioned_covariance_is_outcome_independent() {
    let r = 0.9;
    let state = graph_to_covariance(&tmss_graph(r).unwrap().expand().unwrap()).unwrap();
    let a = homodyne_condition(&state, 0, 0.3, 0.0).unwrap();
    let b = homodyne_condition(&state, 0, 0.3, 2.3).unwrap();
    assert!(max_abs_diff(a.cov(), b.cov()) < TIGHT);
    assert!((a.mean() - b.mean()).amax() > 1e-3, "means differ with the outcome");
}

#[test]
fn symplectic_constructors_satisfy_invariant() {
    let gates = vec![
        bsg_matrix(0, 1, 4),
        bsg_matrix(3, 1, 4),
        foursplitter_matrix(0, 1, 2, 3, 4),
        rotation(0.3).embed(&[2], 4),
        squeezer(-1.7).unwrap().embed(&[0], 4),
        v_gate(0.9, -0.4).unwrap().embed(&[3], 4),
    ];
    let mut composite = SymplecticGate::identity(4);
    for g in &gates {
        assert!(g.symplectic_defect() < TIGHT);
        composite = composite.then(g);
    }
    assert!(composite.symplectic_defect() < TIGHT);
}

#[test]
fn foursplitter_equals_printed_matrix_and_beamsplitter_product() {
    // Annihilation-basis matrix with rows (a_j - a_k - a_l + a_m)/2 etc.
    let a_lit = DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0, -1.0, -1.0, 1.0, //
            1.0, 1.0, -1.0, -1.0, //
            1.0, -1.0, 1.0, -1.0, //
            1.0, 1.0, 1.0, 1.0,
        ],
    ) / 2.0;
    let expected = embed_orthogonal(&a_lit, &[0, 1, 2, 3], 4);

    let four = foursplitter_matrix(0, 1, 2, 3, 4);
    assert!(max_abs_diff(four.s(), &expected) < TIGHT);

    // Product of the four balanced beamsplitters, rightmost acting first.
    let prod = bsg_matrix(0, 1, 4).s()
        * bsg_matrix(2, 3, 4).s()
        * bsg_matrix(0, 2, 4).s()
        * bsg_matrix(1, 3, 4).s();
    assert!(max_abs_diff(four.s(), &prod) < TIGHT);
}

#[test]
fn double_beamsplitter_is_plane_rotation() {
    let b = bsg_matrix(0, 1, 2);
    let bb = b.s() * b.s();
    let quarter = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    let expected = embed_orthogonal(&quarter, &[0, 1], 2);
    assert!(max_abs_diff(&bb, &expected) < TIGHT);
}

#[test]
fn v_gate_identity_and_singularities() {
    let id = v_gate(std::f64::consts::FRAC_PI_4, -std::f64::consts::FRAC_PI_4).unwrap();
    assert!(max_abs_diff(id.s(), &DMatrix::identity(2, 2)) < TIGHT);

    assert!(v_gate(0.3, 0.3).is_err(), "zero squeeze factor");
    assert!(v_gate(0.3, 0.3 - std::f64::consts::PI).is_err(), "infinite squeeze factor");
    assert!(squeezer(0.0).is_err());
}

#[test]
fn squeezer_negative_argument_includes_half_turn() {
    let s = squeezer(-2.0).unwrap();
    let expected = DMatrix::from_row_slice(2, 2, &[-2.0, 0.0, 0.0, -0.5]);
    assert!(max_abs_diff(s.s(), &expected) < TIGHT);

    let with_turn = squeezer(2.0).unwrap().then(&rotation(std::f64::consts::PI));
    assert!(max_abs_diff(s.s(), with_turn.s()) < 1e-12);
}

#[test]
fn displacement_shifts_mean_only() {
    let alpha = Complex64::new(0.4, -1.1);
    let d = cvcluster_core::gaussian::displacement(alpha).embed(&[1], 3);
    let state = GaussianState::vacuum(3).apply(&d);
    let rt2 = (2.0f64).sqrt();
    assert!((state.mean()[1] - rt2 * 0.4).abs() < TIGHT);
    assert!((state.mean()[4] + rt2 * 1.1).abs() < TIGHT);
    let vac = DMatrix::<f64>::identity(6, 6) * 0.5;
    assert!(max_abs_diff(state.cov(), &vac) < TIGHT);
}

#[test]
fn nullifier_rows_have_exact_squeezed_variance() {
    for &r in &[0.5, 1.0, 2.0] {
        let g = apply_beamsplitter_graph(&two_pairs(r), 1, 2).unwrap();
        let n = g.n_modes();
        let w = g.edge_matrix();

        // The edge matrix of any state built from pairs and beamsplitters
        // squares to the identity.
        let ww = &w * &w;
        assert!(max_abs_diff(&ww, &DMatrix::identity(n, n)) < TIGHT);

        let state = graph_to_covariance(&g.expand().unwrap()).unwrap();
        let e2r = (-2.0 * r).exp();
        for row in 0..n {
            // (I - W) acting on p quadratures.
            let mut cp = vec![0.0; 2 * n];
            // (I + W) acting on q quadratures.
            let mut cq = vec![0.0; 2 * n];
            for col in 0..n {
                let delta = if row == col { 1.0 } else { 0.0 };
                cp[n + col] = delta - w[(row, col)];
                cq[col] = delta + w[(row, col)];
            }
            let vp = nullifier_variance(&state, &cp);
            let vq = nullifier_variance(&state, &cq);
            assert!(
                (vp - e2r).abs() < 1e-12 * e2r.max(1.0),
                "p nullifier row {row} at r = {r}: {vp} vs {e2r}"
            );
            assert!(
                (vq - e2r).abs() < 1e-12 * e2r.max(1.0),
                "q nullifier row {row} at r = {r}: {vq} vs {e2r}"
            );
        }
    }
}

#[test]
fn tmss_nullifier_spot_values() {
    let r = 0.65;
    let state = graph_to_covariance(&tmss_graph(r).unwrap().expand().unwrap()).unwrap();
    let rt2 = (2.0f64).sqrt();
    // (q1 - q2)/sqrt(2) is squeezed to e^{-2r}/2.
    let c = [1.0 / rt2, -1.0 / rt2, 0.0, 0.0];
    let v = nullifier_variance(&state, &c);
    assert!((v - (-2.0 * r).exp() / 2.0).abs() < TOL);
    // Vacuum reference for a single unit-weight quadrature.
    let vac = GaussianState::vacuum(1);
    assert!((nullifier_variance(&vac, &[1.0, 0.0]) - 0.5).abs() < TIGHT);
}

#[test]
fn uncertainty_relation_holds_for_constructed_states() {
    let g = apply_beamsplitter_graph(&two_pairs(1.2), 1, 2).unwrap();
    let state = graph_to_covariance(&g.expand().unwrap()).unwrap();
    assert!(state.check_uncertainty(1e-10).is_ok());

    let cluster = graph_to_covariance(&to_cluster_state(&g).expand().unwrap()).unwrap();
    assert!(cluster.check_uncertainty(1e-10).is_ok());
}

#[test]
fn graph_serialization_roundtrip() {
    let g = apply_beamsplitter_graph(&two_pairs(0.75), 1, 2).unwrap();
    let json = g.to_json().unwrap();
    let back = SimplifiedGraph::from_json(&json).unwrap();
    assert_eq!(g.n_modes(), back.n_modes());
    assert_eq!(g.labels(), back.labels());
    assert!((g.r() - back.r()).abs() < TIGHT);
    let ea: Vec<_> = g.edges().collect();
    let eb: Vec<_> = back.edges().collect();
    assert_eq!(ea.len(), eb.len());
    for ((i, j, wa), (k, l, wb)) in ea.iter().zip(eb.iter()) {
        assert_eq!((i, j), (k, l));
        assert!((wa.value() - wb.value()).abs() < TIGHT);
    }
    // The schema carries the common magnitude and per-edge signs.
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(parsed.get("modes").is_some());
    assert!(parsed.get("edges").is_some());
    assert!(parsed.get("C").is_some());
    assert!(parsed.get("r").is_some());
}

#[test]
fn gate_application_conjugates_covariance() {
    let state = graph_to_covariance(&tmss_graph(0.9).unwrap().expand().unwrap()).unwrap();
    let gate = bsg_matrix(0, 1, 2);
    let out = state.apply(&gate);
    let expected = gate.s() * state.cov() * gate.s().transpose();
    assert!(max_abs_diff(out.cov(), &expected) < TIGHT);

    let mean_in = DVector::from_vec(vec![0.1, -0.2, 0.3, 0.4]);
    let shifted = state.with_mean(mean_in.clone());
    let out2 = shifted.apply(&gate);
    let expected_mean = gate.s() * mean_in;
    assert!((out2.mean() - expected_mean).amax() < TIGHT);
}
