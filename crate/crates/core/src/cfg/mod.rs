//! Transition graphs, cut-sets and verification paths.

mod cutset;
mod dot;
mod graph;
mod paths;

pub use cutset::{compute_cutset, has_uncut_cycle, mandatory_cutpoints, validate_cutset, CutSet};
pub use dot::to_dot;
pub use graph::{
    build_transition_graph, CfgError, Edge, EdgeId, EdgeKind, Node, NodeId, NodeKind, NodeStmt,
    ProcGraph, TransitionGraph,
};
pub use paths::{enumerate_verification_paths, VerificationPath, DEFAULT_PATH_CAP};
