//! Gaussian-state engine: exact graph calculus, symplectic gates, covariance
//! matrices, and homodyne conditioning.

pub mod gates;
pub mod graph;
pub mod state;
pub mod weight;

pub use gates::{
    bsg_matrix, displacement, foursplitter_matrix, rotation, squeezer, symplectic_form, v_gate,
    SymplecticGate,
};
pub use graph::{
    apply_beamsplitter_graph, graph_to_covariance, tmss_graph, to_cluster_state, ComplexGraph,
    GraphForm, SimplifiedGraph, MAX_DENSE_MODES,
};
pub use state::{homodyne_condition, nullifier_variance, GaussianState};
pub use weight::ExactWeight;
