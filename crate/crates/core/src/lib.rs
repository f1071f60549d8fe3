//! Topological measurement of feed-forward networks.
//!
//! The pipeline turns a weights file into a persistence diagram:
//!
//! 1. [`weightnet`] parses the weights and numbers neurons from the output
//!    layer back toward the input.
//! 2. [`relevance`] normalizes positive weights per destination neuron and
//!    extends them to indirect pairs by the best (max-product) path.
//! 3. [`complexes`] thresholds the extended relevance at 64 fixed levels and
//!    builds the filtered clique complex, capped at dimension 2.
//! 4. [`persistence`] reduces the Z/2 boundary matrix into birth/death pairs
//!    with representative cycles.
//! 5. [`metrics`] and [`render`] summarize and draw the diagrams.
//!
//! ```
//! use topoprobe::{complexes, persistence, relevance, weightnet};
//!
//! let json = br#"{"format_version":1,"name":"toy","output_size":1,"used_outputs":[0],
//!   "layers":[{"rows":2,"cols":2,"weights":[[1.0,0.5],[0.5,1.0]]},
//!             {"rows":2,"cols":1,"weights":[[1.0],[1.0]]}]}"#;
//! let model = weightnet::parse_weights_file(json).unwrap();
//! let graph = weightnet::assign_global_indices(&model);
//! let direct = relevance::direct_relevance(&graph);
//! let extended = relevance::extended_relevance(&direct, &graph).unwrap();
//! let fc = complexes::build_filtered_complex(&extended, 2).unwrap();
//! let pd = persistence::compute(&fc).unwrap();
//! assert_eq!(persistence::betti_curve(&pd, 0)[63], 1);
//! ```

pub mod artifacts;
pub mod complexes;
pub mod metrics;
pub mod persistence;
pub mod relevance;
pub mod render;
pub mod weightnet;

pub use complexes::{FilteredComplex, FiltrationSchedule, Simplex};
pub use metrics::DiagramMetrics;
pub use persistence::{PersistenceDiagram, PersistencePair, RepresentativeCycle};
pub use relevance::{RelevanceKind, RelevanceMatrix};
pub use weightnet::{LayerMatrix, NetworkGraph, NetworkModel, NeuronId};

/// Index into the 64-step threshold schedule, starting at 1.
pub type FiltIndex = u32;

/// Number of thresholds in the schedule.
pub const NUM_THRESHOLDS: usize = 64;
