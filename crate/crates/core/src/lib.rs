//! Schelling segregation on dense random social networks, with polarisation
//! measured as the embedded dimension of the final network's random dot
//! product graph representation.
//!
//! The pieces, bottom up:
//!
//! * [`graph`]: mutable simple graph with O(1) edge lookup.
//! * [`model`]: the tolerance rule, step loop and single runs.
//! * [`metrics`]: similarity and happiness summaries.
//! * [`spectral`]: adjacency singular values, profile-likelihood elbow and
//!   spectral embedding.
//! * [`experiments`]: built-in sweeps, the repetition runner and aggregation.
//! * [`plot`] and [`cli`]: SVG charts and the command-line front end.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod metrics;
pub mod model;
pub mod plot;
pub mod spectral;

pub use error::{ExperimentError, GraphError, ModelError, SpectralError};
pub use experiments::{
    aggregate, builtin_sweep, run_sweep, AggregateRow, RunRecord, SweepOptions, SweepOutcome,
    SweepSpec,
};
pub use graph::{AgentId, Group, GroupAssignment, Network};
pub use metrics::{similarity_report, SimilarityReport};
pub use model::{
    is_happy, run, run_observed, ModelParams, ModelState, RunResult, StepReport, Tolerance, Wiring,
};
pub use spectral::{ase_embed, singular_values, zhu_ghodsi_dim, DimEstimate, SingularProfile};
