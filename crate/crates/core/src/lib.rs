//! Analysis of neural-network weight stacks as weighted graphs.
//!
//! The crate computes neural persistence of single layers (maximum spanning
//! trees of complete bipartite graphs, plus closed-form bounds), deep graph
//! persistence of whole networks via max-min path summary matrices, and the
//! statistics, synthetic-matrix machinery, training loop, and detection
//! protocol needed to run weight-analysis and covariate-shift experiments
//! end to end at desk scale.
//!
//! Modules:
//!
//! - [`model`]: weight matrices, networks, normalisation, forward passes,
//!   activation graphs.
//! - [`persistence`]: per-layer neural persistence and its bounds.
//! - [`graph`]: summary matrices, deep graph persistence, and the feature
//!   extractors used for shift detection.
//! - [`stats`]: KS test, Kendall tau, Nelder-Mead, special functions, and
//!   distribution fitting.
//! - [`synth`]: synthetic matrix generators, noisy sorting, sortedness, and
//!   the ensemble studies.
//! - [`shift`]: image corruptions, class prototypes, and the detection
//!   experiment.
//! - [`train`]: a small deterministic Adam trainer plus early stopping.
//! - [`io`]: file formats for networks and datasets.

pub mod data;
pub mod error;
pub mod graph;
pub mod io;
pub mod model;
pub mod persistence;
pub mod rng;
pub mod shift;
pub mod stats;
pub mod synth;
pub mod train;

pub use error::{Error, Result};
pub use graph::{dgp, summary_matrix, DgpValue, FeatureKind, FeatureVector, SummaryMatrix};
pub use model::{
    activation_graph, forward, normalise, softmax_features, Activation, ActivationGraph, Network,
    NormalisedNetwork, WeightMatrix,
};
pub use persistence::{
    max_spanning_tree, neural_persistence, np_bounds, shuffle_entries, BoundsReport,
    PersistenceDiagram,
};
