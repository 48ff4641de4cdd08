//! Explicit-state model checking of single-decree Paxos under two state
//! encodings: a graph encoding whose visited set is keyed by canonical
//! isomorphism certificates (symmetry reduction for free), and a vector
//! encoding with canonically ordered message multisets and exact-state
//! deduplication. The explorer verifies the safety property (every chosen
//! value was proposed, no two distinct values chosen) and reports the
//! state-space reduction the graph encoding achieves.

pub mod explore;
pub mod graph;
pub mod protocol;
pub mod vector;

pub use explore::{
    compare_encodings, explore, Comparison, ExplorationConfig, ExplorationReport, ExploreError,
    GraphModel, Keying, Model, ReportVerdict, Strategy, VectorModel,
};
pub use protocol::{majority_bound, ConfigError, ProtocolConfig, RoundId, Verdict, Violation};
