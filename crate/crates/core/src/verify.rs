//! End-to-end verification sweeps.
//!
//! Each sweep drives one family of exhaustive or randomized checks end to
//! end and records every failing case. The acceptance tests and the `verify`
//! command-line subcommands share these entry points, so a sweep that passes
//! here is exactly the sweep a release is gated on.

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::causal::causal_list_of;
use crate::discrete::{
    armstrong_product, ci_holds, perfect_map_distribution, random_dag_distribution,
    DiscreteDistribution, PERFECT_MAP_NODE_LIMIT,
};
use crate::error::{Error, Result};
use crate::gaussian::{construct_witness, construction_claims, verify_witness};
use crate::graph::Dag;
use crate::node::NodeId;
use crate::semigraphoid::{closure, StatementSet};
use crate::separation::{list_verified_statements, SeparationMode};
use crate::statement::{canonical_triples, CiStatement};

/// Exhaustive graph sweeps enumerate every edge subset; this caps the
/// exponent so a sweep stays desk-scale (6 nodes → 2^15 graphs).
pub const SWEEP_NODE_LIMIT: usize = 6;

/// Result of one verification sweep: how many cases ran and a description of
/// every case that failed. An empty failure list means the sweep passed.
#[derive(Clone, Debug)]
pub struct SweepOutcome {
    label: String,
    cases: usize,
    failures: Vec<String>,
}

impl SweepOutcome {
    fn new(label: impl Into<String>) -> SweepOutcome {
        SweepOutcome {
            label: label.into(),
            cases: 0,
            failures: Vec::new(),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn cases(&self) -> usize {
        self.cases
    }

    pub fn failures(&self) -> &[String] {
        &self.failures
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    /// One-line form: `<label>: <n> cases, <k> failures`.
    pub fn summary(&self) -> String {
        format!(
            "{}: {} cases, {} failures",
            self.label,
            self.cases,
            self.failures.len()
        )
    }
}

/// Every DAG over nodes `"1".."n"` whose edges point from smaller to larger
/// identifier: one graph per subset of the n(n-1)/2 ascending pairs. Smaller
/// graphs all appear with isolated extra nodes, so sweeping this family
/// covers every node count up to `n`.
pub fn all_dags(n: usize) -> Result<Vec<Dag>> {
    if n > SWEEP_NODE_LIMIT {
        return Err(Error::Resource(format!(
            "graph sweeps are limited to {SWEEP_NODE_LIMIT} nodes, requested {n}"
        )));
    }
    let pair_count = n * n.saturating_sub(1) / 2;
    (0..(1u64 << pair_count))
        .map(|mask| dag_from_mask(n, mask))
        .collect()
}

fn ascending_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 1..=n {
        for j in (i + 1)..=n {
            pairs.push((i, j));
        }
    }
    pairs
}

fn dag_from_mask(n: usize, mask: u64) -> Result<Dag> {
    let nodes: Vec<NodeId> = (1..=n).map(|i| NodeId::from(i.to_string())).collect();
    let edges = ascending_pairs(n)
        .iter()
        .enumerate()
        .filter(|(bit, _)| mask >> bit & 1 == 1)
        .map(|(_, &(i, j))| (NodeId::from(i.to_string()), NodeId::from(j.to_string())))
        .collect::<Vec<_>>();
    Dag::new(nodes, edges, [])
}

fn random_dag(rng: &mut ChaCha8Rng, n: usize) -> Result<Dag> {
    let pair_count = n * n.saturating_sub(1) / 2;
    let mask = rng.random_range(0..(1u64 << pair_count));
    dag_from_mask(n, mask)
}

/// Single-line graph description for failure messages.
fn dag_signature(dag: &Dag) -> String {
    if dag.edge_count() == 0 {
        return format!("{} nodes, no edges", dag.node_count());
    }
    dag.edges()
        .iter()
        .map(|(u, v)| format!("{u}->{v}"))
        .collect::<Vec<_>>()
        .join(",")
}

fn holds(p: &DiscreteDistribution, t: &CiStatement) -> Result<bool> {
    ci_holds(p, t.x(), t.z(), t.y())
}

/// Soundness sweep: for `cases` random (graph, seed) pairs, every
/// graphically verified statement must hold exactly in a random distribution
/// that factorizes along the graph.
pub fn soundness_sweep(cases: usize, max_nodes: usize, seed: u64) -> Result<SweepOutcome> {
    if max_nodes > SWEEP_NODE_LIMIT {
        return Err(Error::Resource(format!(
            "graph sweeps are limited to {SWEEP_NODE_LIMIT} nodes, requested {max_nodes}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcome = SweepOutcome::new("soundness");
    for case in 0..cases {
        let dag = random_dag(&mut rng, max_nodes)?;
        let table_seed: u64 = rng.random();
        let p = random_dag_distribution(&dag, table_seed, 2)?;
        let verified = list_verified_statements(&dag, SeparationMode::D)?;
        outcome.cases += 1;
        for statement in &verified {
            if !holds(&p, statement)? {
                outcome.failures.push(format!(
                    "case {case} [{}] seed {table_seed}: verified statement {statement} fails the exact test",
                    dag_signature(&dag)
                ));
            }
        }
    }
    Ok(outcome)
}

/// Closure sweep: for `cases` random graphs, the semi-graphoid closure of a
/// causal input list's statements must equal the graphically verified set.
pub fn theorem2_sweep(cases: usize, max_nodes: usize, seed: u64) -> Result<SweepOutcome> {
    if max_nodes > SWEEP_NODE_LIMIT {
        return Err(Error::Resource(format!(
            "graph sweeps are limited to {SWEEP_NODE_LIMIT} nodes, requested {max_nodes}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcome = SweepOutcome::new("theorem2");
    for case in 0..cases {
        let dag = random_dag(&mut rng, max_nodes)?;
        let order = dag.topological_order();
        let list = causal_list_of(&dag, &order)?;
        let closed = closure(&StatementSet::new(dag.node_set(), list.statements_of())?)?;
        let verified = list_verified_statements(&dag, SeparationMode::D)?;
        outcome.cases += 1;
        if closed.statements() != &verified {
            let missing = verified.difference(closed.statements()).count();
            let extra = closed.statements().difference(&verified).count();
            outcome.failures.push(format!(
                "case {case} [{}]: closure misses {missing} and adds {extra} statements",
                dag_signature(&dag)
            ));
        }
    }
    Ok(outcome)
}

/// Product sweep: for `pairs` random distribution pairs over binary
/// variables, the product must satisfy a statement exactly when both factors
/// do, over every disjoint triple.
pub fn armstrong_sweep(pairs: usize, variables: usize, seed: u64) -> Result<SweepOutcome> {
    if variables == 0 || variables > SWEEP_NODE_LIMIT {
        return Err(Error::Input(format!(
            "variable count must be between 1 and {SWEEP_NODE_LIMIT}, got {variables}"
        )));
    }
    let names: Vec<NodeId> = (1..=variables)
        .map(|i| NodeId::from(i.to_string()))
        .collect();
    let triples = canonical_triples(&names);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcome = SweepOutcome::new("armstrong");
    for case in 0..pairs {
        let p1 = random_table(&mut rng, &names)?;
        let p2 = random_table(&mut rng, &names)?;
        let product = armstrong_product(&p1, &p2)?;
        outcome.cases += 1;
        for triple in &triples {
            let combined = holds(&product, triple)?;
            let separate = holds(&p1, triple)? && holds(&p2, triple)?;
            if combined != separate {
                outcome.failures.push(format!(
                    "case {case}: product {} conjunction on {triple}",
                    if combined {
                        "satisfies, factors fail"
                    } else {
                        "fails, factors satisfy"
                    }
                ));
            }
        }
    }
    Ok(outcome)
}

/// A random joint table over binary variables: each cell weight is drawn
/// uniformly (zeros allowed) and the table is normalized exactly.
fn random_table(rng: &mut ChaCha8Rng, names: &[NodeId]) -> Result<DiscreteDistribution> {
    let cells = 1usize << names.len();
    let weights: Vec<u32> = loop {
        let ws: Vec<u32> = (0..cells).map(|_| rng.random_range(0..=20)).collect();
        if ws.iter().any(|&w| w > 0) {
            break ws;
        }
    };
    let total: u32 = weights.iter().sum();
    let mass = weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0)
        .map(|(cell, &w)| {
            let key: Vec<u32> = (0..names.len())
                .map(|j| (cell >> (names.len() - 1 - j)) as u32 & 1)
                .collect();
            (key, BigRational::new(w.into(), total.into()))
        })
        .collect();
    let domains = vec![vec!["0".to_string(), "1".to_string()]; names.len()];
    DiscreteDistribution::new(names.to_vec(), domains, mass)
}

/// Witness sweep: for every graph over `max_nodes` nodes and every
/// graphically unverified triple, construct the covariance witness at `rho`
/// and check the full report (positive definite, dependency violated with a
/// positive power of rho, every verified statement satisfied) plus the
/// structural claims (disjoint descendant paths meeting the active path only
/// at their colliders, singly connected reduced graph).
///
/// Failure lines are prefixed `construct:`, `report:`, or `claims:` by which
/// stage misbehaved.
pub fn completeness_sweep(max_nodes: usize, rho: &BigRational) -> Result<SweepOutcome> {
    completeness_sweep_dags(&all_dags(max_nodes)?, rho)
}

/// [`completeness_sweep`] over an explicit graph list instead of the
/// exhaustive family.
pub fn completeness_sweep_dags(dags: &[Dag], rho: &BigRational) -> Result<SweepOutcome> {
    let mut outcome = SweepOutcome::new("completeness");
    for dag in dags {
        let verified = list_verified_statements(dag, SeparationMode::D)?;
        for triple in canonical_triples(dag.nodes()) {
            if verified.contains(&triple) {
                continue;
            }
            outcome.cases += 1;
            let witness = match construct_witness(dag, &triple, rho.clone()) {
                Ok(w) => w,
                Err(e) => {
                    outcome.failures.push(format!(
                        "construct: [{}] {triple}: {e}",
                        dag_signature(dag)
                    ));
                    continue;
                }
            };
            match verify_witness(dag, &witness) {
                Ok(report) if report.passed() => {}
                Ok(report) => {
                    outcome.failures.push(format!(
                        "report: [{}] {triple}: positive-definite={} dependency-violated={} exponent={:?} failing-statements={}",
                        dag_signature(dag),
                        report.positive_definite,
                        report.dependency_violated,
                        report.determinant_exponent,
                        report.failing_statements.len()
                    ));
                }
                Err(e) => {
                    outcome
                        .failures
                        .push(format!("report: [{}] {triple}: {e}", dag_signature(dag)));
                }
            }
            let claims = construction_claims(&witness);
            if !claims.all_hold() {
                outcome.failures.push(format!(
                    "claims: [{}] {triple}: disjoint-paths={} meet-at-collider={} forest={}",
                    dag_signature(dag),
                    claims.descendant_paths_disjoint,
                    claims.paths_meet_q_only_at_collider,
                    claims.reduced_graph_is_forest
                ));
            }
        }
    }
    Ok(outcome)
}

/// Perfect-map sweep: for every graph over `max_nodes` nodes, build the
/// perfect-map distribution and re-derive its full conditional-independence
/// set externally; it must match the d-separation set triple for triple.
pub fn perfectmap_sweep(max_nodes: usize, seed: u64) -> Result<SweepOutcome> {
    if max_nodes > PERFECT_MAP_NODE_LIMIT {
        return Err(Error::Resource(format!(
            "perfect-map sweeps are limited to {PERFECT_MAP_NODE_LIMIT} nodes, requested {max_nodes}"
        )));
    }
    perfectmap_sweep_dags(&all_dags(max_nodes)?, seed)
}

/// [`perfectmap_sweep`] over an explicit graph list instead of the
/// exhaustive family.
pub fn perfectmap_sweep_dags(dags: &[Dag], seed: u64) -> Result<SweepOutcome> {
    let mut outcome = SweepOutcome::new("perfectmap");
    for dag in dags {
        outcome.cases += 1;
        let p = match perfect_map_distribution(dag, seed) {
            Ok(p) => p,
            Err(e) => {
                outcome
                    .failures
                    .push(format!("[{}]: {e}", dag_signature(dag)));
                continue;
            }
        };
        let verified = list_verified_statements(dag, SeparationMode::D)?;
        for triple in canonical_triples(dag.nodes()) {
            if holds(&p, &triple)? != verified.contains(&triple) {
                outcome.failures.push(format!(
                    "[{}]: exact test and d-separation disagree on {triple}",
                    dag_signature(dag)
                ));
            }
        }
    }
    Ok(outcome)
}
