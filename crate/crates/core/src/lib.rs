//! Conditional-independence engine for causal DAG models.
//!
//! The crate answers separation queries over directed acyclic graphs
//! (plain and deterministic-aware), closes statement sets under the
//! semi-graphoid axioms, reconstructs graphs from causal input lists, and
//! builds exact counterexample distributions — Gaussian and discrete — that
//! realize precisely the independencies a graph verifies.

pub mod causal;
pub mod discrete;
pub mod error;
pub mod gaussian;
pub mod graph;
mod linalg;
pub mod node;
pub mod semigraphoid;
pub mod separation;
pub mod statement;
pub mod verify;

pub use causal::{causal_list_of, minimal_imap, CausalInputList, IndependenceOracle};
pub use discrete::{
    armstrong_combine, armstrong_product, ci_holds, perfect_map_distribution,
    perfect_map_distribution_limited, random_dag_distribution, DiscreteDistribution,
    PERFECT_MAP_NODE_LIMIT, REPAIR_SEED_BUDGET,
};
pub use error::{Error, Result};
pub use gaussian::{
    construct_witness, construction_claims, dependency_determinant, gaussian_ci,
    render_witness_report, rho_power_exponent, verify_witness, ConstructionClaims,
    CovarianceMatrix, WitnessConstruction, WitnessReport,
};
pub use graph::{Dag, UndirectedPath, PATH_ENUMERATION_NODE_LIMIT};
pub use node::{node_set, NodeId, NodeSet};
pub use semigraphoid::{
    closure, closure_limited, derives, derives_limited, StatementSet, CLOSURE_UNIVERSE_LIMIT,
};
pub use separation::{
    d_separated, determined_closure, id_separated, list_verified_statements,
    list_verified_statements_limited, minimal_collider_active_path, path_active_in_mode,
    path_is_active, requisite_nodes, SeparationMode, SeparationVerdict,
    VERIFIED_STATEMENTS_NODE_LIMIT,
};
pub use statement::CiStatement;
pub use verify::{
    all_dags, armstrong_sweep, completeness_sweep, completeness_sweep_dags, perfectmap_sweep,
    perfectmap_sweep_dags, soundness_sweep, theorem2_sweep, SweepOutcome, SWEEP_NODE_LIMIT,
};
