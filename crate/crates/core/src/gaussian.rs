//! Exact Gaussian counterexamples for graphically-unverified statements.
//!
//! Given a DAG and a dependency σ the graph does not verify, the
//! construction picks connected endpoints α, β, takes a collider-minimal
//! active path q, hangs each collider's shortest descendant path to the
//! conditioning set off it, and assigns correlations ρ^l along regular
//! (collider-free) paths of the reduced graph. The resulting covariance
//! matrix realizes every statement the graph verifies while violating σ,
//! and all checks run in exact rational arithmetic.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::causal::{causal_list_of, IndependenceOracle};
use crate::error::{Error, Result};
use crate::graph::{Dag, UndirectedPath};
use crate::linalg;
use crate::node::{NodeId, NodeSet};
use crate::separation::{minimal_collider_active_path, separated_bool, SeparationMode};
use crate::statement::CiStatement;

/// A symmetric positive-definite matrix of exact rational correlations with
/// unit diagonal, indexed by named variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CovarianceMatrix {
    variables: Vec<NodeId>,
    entries: Vec<Vec<BigRational>>,
}

impl CovarianceMatrix {
    /// Validates shape, symmetry, unit diagonal, and positive definiteness
    /// (all leading principal minors positive, exactly).
    pub fn new(variables: Vec<NodeId>, entries: Vec<Vec<BigRational>>) -> Result<Self> {
        let n = variables.len();
        if variables.iter().collect::<BTreeSet<_>>().len() != n {
            return Err(Error::Input("covariance variables must be distinct".into()));
        }
        if entries.len() != n || entries.iter().any(|row| row.len() != n) {
            return Err(Error::Input(format!(
                "covariance matrix must be {n}x{n} to match its variables"
            )));
        }
        for i in 0..n {
            if !entries[i][i].is_one() {
                return Err(Error::Input(format!(
                    "variance of '{}' must be 1",
                    variables[i]
                )));
            }
            for j in 0..i {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::Input(format!(
                        "matrix is not symmetric at ('{}', '{}')",
                        variables[i], variables[j]
                    )));
                }
            }
        }
        for (k, minor) in linalg::leading_principal_minors(&entries)
            .iter()
            .enumerate()
        {
            if *minor <= BigRational::zero() {
                return Err(Error::Numeric(format!(
                    "matrix is not positive definite: leading minor {} is {minor}",
                    k + 1
                )));
            }
        }
        Ok(CovarianceMatrix { variables, entries })
    }

    pub fn variables(&self) -> &[NodeId] {
        &self.variables
    }

    pub fn rows(&self) -> &[Vec<BigRational>] {
        &self.entries
    }

    fn position(&self, v: &NodeId) -> Result<usize> {
        self.variables
            .iter()
            .position(|u| u == v)
            .ok_or_else(|| Error::Input(format!("unknown variable '{v}'")))
    }

    pub fn entry(&self, a: &NodeId, b: &NodeId) -> Result<&BigRational> {
        Ok(&self.entries[self.position(a)?][self.position(b)?])
    }

    /// Positions of a node set in variable order.
    fn positions(&self, set: &NodeSet) -> Result<Vec<usize>> {
        set.iter().map(|v| self.position(v)).collect()
    }
}

impl IndependenceOracle for CovarianceMatrix {
    fn is_independent(&self, x: &NodeSet, z: &NodeSet, y: &NodeSet) -> Result<bool> {
        gaussian_ci(self, x, z, y)
    }
}

/// Does the Gaussian distribution with this covariance satisfy I(x, z, y)?
///
/// Computed pairwise: for every a ∈ x, b ∈ y the conditional cross-covariance
/// σ_ab − Σ_aZ Σ_ZZ⁻¹ Σ_Zb must vanish exactly. Set-level independence is
/// the conjunction of the pairwise instances for Gaussians.
pub fn gaussian_ci(
    gamma: &CovarianceMatrix,
    x: &NodeSet,
    z: &NodeSet,
    y: &NodeSet,
) -> Result<bool> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Input("x and y must be nonempty".into()));
    }
    let overlap = |a: &NodeSet, b: &NodeSet| a.intersection(b).next().is_some();
    if overlap(x, z) || overlap(x, y) || overlap(z, y) {
        return Err(Error::Input("x, z, y must be pairwise disjoint".into()));
    }
    let x_pos = gamma.positions(x)?;
    let z_pos = gamma.positions(z)?;
    let y_pos = gamma.positions(y)?;
    for &a in &x_pos {
        for &b in &y_pos {
            if !conditional_cross_covariance(gamma, a, &z_pos, b)?.is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// σ_ab − Σ_aZ Σ_ZZ⁻¹ Σ_Zb by an exact linear solve (no determinants).
fn conditional_cross_covariance(
    gamma: &CovarianceMatrix,
    a: usize,
    z_pos: &[usize],
    b: usize,
) -> Result<BigRational> {
    let direct = gamma.entries[a][b].clone();
    if z_pos.is_empty() {
        return Ok(direct);
    }
    let zz: Vec<Vec<BigRational>> = z_pos
        .iter()
        .map(|&i| z_pos.iter().map(|&j| gamma.entries[i][j].clone()).collect())
        .collect();
    let zb: Vec<BigRational> = z_pos.iter().map(|&i| gamma.entries[i][b].clone()).collect();
    let w = linalg::solve(&zz, &zb)
        .ok_or_else(|| Error::Numeric("conditioning submatrix is singular".into()))?;
    let correction: BigRational = z_pos
        .iter()
        .zip(&w)
        .map(|(&i, wi)| &gamma.entries[a][i] * wi)
        .sum();
    Ok(direct - correction)
}

/// The determinant criterion for a single pair: the submatrix over
/// {a} ∪ z ∪ {b} in the matrix's own variable order, with a's row and b's
/// column deleted. Zero exactly when a and b are conditionally uncorrelated
/// given z — an independent route to the same answer as [`gaussian_ci`].
///
/// The signed value depends on the variable order; witness matrices lay
/// their variables out as (α, z_1..z_k, β, rest), for which the violated
/// statement's determinant is a positive power of ρ.
pub fn dependency_determinant(
    gamma: &CovarianceMatrix,
    a: &NodeId,
    z: &NodeSet,
    b: &NodeId,
) -> Result<BigRational> {
    if a == b || z.contains(a) || z.contains(b) {
        return Err(Error::Input(
            "endpoints must be distinct and outside z".into(),
        ));
    }
    let a_pos = gamma.position(a)?;
    let b_pos = gamma.position(b)?;
    let mut order = gamma.positions(z)?;
    order.push(a_pos);
    order.push(b_pos);
    order.sort_unstable();
    let rows: Vec<usize> = order.iter().copied().filter(|&r| r != a_pos).collect();
    let cols: Vec<usize> = order.iter().copied().filter(|&c| c != b_pos).collect();
    let minor: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|&r| cols.iter().map(|&c| gamma.entries[r][c].clone()).collect())
        .collect();
    Ok(linalg::determinant(&minor))
}

/// The exponent e ≥ 1 with value = rho^e, if one exists.
pub fn rho_power_exponent(value: &BigRational, rho: &BigRational) -> Option<u32> {
    if *value <= BigRational::zero() || rho.is_zero() {
        return None;
    }
    let mut acc = BigRational::one();
    for e in 1..=512u32 {
        acc *= rho;
        if acc == *value {
            return Some(e);
        }
        // For 0 < rho < 1 powers only shrink; stop once below the target.
        if *rho < BigRational::one() && acc < *value {
            return None;
        }
    }
    None
}

/// The full witness for one graphically-unverified statement: endpoints,
/// the collider-minimal active path, descendant paths, the reduced graph,
/// and its ρ-power covariance matrix.
#[derive(Clone, Debug)]
pub struct WitnessConstruction {
    sigma: CiStatement,
    alpha: NodeId,
    beta: NodeId,
    rho: BigRational,
    active_path: UndirectedPath,
    colliders: Vec<NodeId>,
    descendant_paths: Vec<Vec<NodeId>>,
    reduced_dag: Dag,
    gamma: CovarianceMatrix,
}

impl WitnessConstruction {
    pub fn sigma(&self) -> &CiStatement {
        &self.sigma
    }

    pub fn alpha(&self) -> &NodeId {
        &self.alpha
    }

    pub fn beta(&self) -> &NodeId {
        &self.beta
    }

    pub fn rho(&self) -> &BigRational {
        &self.rho
    }

    /// The collider-minimal active path q from alpha to beta.
    pub fn active_path(&self) -> &UndirectedPath {
        &self.active_path
    }

    /// Colliders h_1..h_k of the active path, left to right.
    pub fn colliders(&self) -> &[NodeId] {
        &self.colliders
    }

    /// For each collider, the shortest directed path [h_i, ..., z_i] to its
    /// closest descendant in the conditioning set; just [h_i] when h_i is
    /// itself conditioned on.
    pub fn descendant_paths(&self) -> &[Vec<NodeId>] {
        &self.descendant_paths
    }

    /// The z_i each descendant path ends at.
    pub fn descendant_targets(&self) -> Vec<&NodeId> {
        self.descendant_paths
            .iter()
            .map(|p| p.last().expect("paths contain at least the collider"))
            .collect()
    }

    /// The reduced graph: exactly the edges of q and the descendant paths,
    /// over all nodes of the original graph.
    pub fn reduced_dag(&self) -> &Dag {
        &self.reduced_dag
    }

    pub fn gamma(&self) -> &CovarianceMatrix {
        &self.gamma
    }
}

/// Outcome of the structural claims about a construction: the descendant
/// paths are pairwise node-disjoint, each meets the active path only at its
/// own collider, and the reduced graph has no undirected cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstructionClaims {
    pub descendant_paths_disjoint: bool,
    pub paths_meet_q_only_at_collider: bool,
    pub reduced_graph_is_forest: bool,
}

impl ConstructionClaims {
    pub fn all_hold(&self) -> bool {
        self.descendant_paths_disjoint
            && self.paths_meet_q_only_at_collider
            && self.reduced_graph_is_forest
    }
}

/// Checks the structural claims on a constructed witness.
pub fn construction_claims(w: &WitnessConstruction) -> ConstructionClaims {
    let path_sets: Vec<NodeSet> = w
        .descendant_paths
        .iter()
        .map(|p| p.iter().cloned().collect())
        .collect();
    let mut disjoint = true;
    for i in 0..path_sets.len() {
        for j in 0..i {
            if path_sets[i].intersection(&path_sets[j]).next().is_some() {
                disjoint = false;
            }
        }
    }
    let q_nodes: NodeSet = w.active_path.nodes().iter().cloned().collect();
    let mut only_at_collider = true;
    for (set, h) in path_sets.iter().zip(&w.colliders) {
        let meet: NodeSet = set.intersection(&q_nodes).cloned().collect();
        let expected: NodeSet = [h.clone()].into_iter().collect();
        if meet != expected {
            only_at_collider = false;
        }
    }
    ConstructionClaims {
        descendant_paths_disjoint: disjoint,
        paths_meet_q_only_at_collider: only_at_collider,
        reduced_graph_is_forest: underlying_is_forest(&w.reduced_dag),
    }
}

/// Union-find acyclicity test on the underlying undirected graph.
fn underlying_is_forest(dag: &Dag) -> bool {
    let n = dag.node_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }
    for (p, c) in dag.edges() {
        let a = root(&mut parent, dag.index_of(p).expect("edge endpoints exist"));
        let b = root(&mut parent, dag.index_of(c).expect("edge endpoints exist"));
        if a == b {
            return false;
        }
        parent[a] = b;
    }
    true
}

/// Builds the witness for a statement the graph does not verify.
///
/// Requires 0 < rho < 1. Note that rho values at or above 1/√2 can make the
/// covariance matrix indefinite when the active path contains a collider
/// (two parents each correlated ρ with a child bound the determinant by
/// 1 − 2ρ²); such values surface as a numeric error. The default choice of
/// 1/2 is always safe.
pub fn construct_witness(
    dag: &Dag,
    sigma: &CiStatement,
    rho: BigRational,
) -> Result<WitnessConstruction> {
    if rho <= BigRational::zero() || rho >= BigRational::one() {
        return Err(Error::Input("rho must satisfy 0 < rho < 1".into()));
    }
    if separated_bool(dag, sigma.x(), sigma.z(), sigma.y(), SeparationMode::D)? {
        return Err(Error::Logic(format!(
            "{sigma} is graphically verified; a witness exists only for dependencies"
        )));
    }
    let mut pair = None;
    'outer: for a in sigma.x() {
        for b in sigma.y() {
            let single_a: NodeSet = [a.clone()].into_iter().collect();
            let single_b: NodeSet = [b.clone()].into_iter().collect();
            if !separated_bool(dag, &single_a, sigma.z(), &single_b, SeparationMode::D)? {
                pair = Some((a.clone(), b.clone()));
                break 'outer;
            }
        }
    }
    let (alpha, beta) =
        pair.ok_or_else(|| Error::Logic("sets are connected but no endpoint pair is".into()))?;
    let (active_path, colliders) = minimal_collider_active_path(dag, &alpha, &beta, sigma.z())?;

    let z_ix = dag.index_set(sigma.z())?;
    let mut z_mask = vec![false; dag.node_count()];
    for &i in &z_ix {
        z_mask[i] = true;
    }
    let mut descendant_paths: Vec<Vec<NodeId>> = Vec::new();
    for h in &colliders {
        let h_ix = dag.index_of(h)?;
        let path_ix = shortest_path_into_set(dag, h_ix, &z_mask).ok_or_else(|| {
            Error::Logic(format!(
                "collider '{h}' has no descendant in the conditioning set"
            ))
        })?;
        descendant_paths.push(path_ix.iter().map(|&i| dag.node_at(i).clone()).collect());
    }

    let mut edges: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    for pair in active_path.nodes().windows(2) {
        let (u, v) = (&pair[0], &pair[1]);
        if dag.has_edge(u, v) {
            edges.insert((u.clone(), v.clone()));
        } else {
            edges.insert((v.clone(), u.clone()));
        }
    }
    for p in &descendant_paths {
        for pair in p.windows(2) {
            edges.insert((pair[0].clone(), pair[1].clone()));
        }
    }
    let reduced_dag = Dag::new(dag.nodes().to_vec(), edges, [])
        .expect("witness edges come from the graph and stay acyclic");

    let order = gamma_variable_order(dag, &alpha, &beta, &descendant_paths);
    let gamma = rho_power_covariance(&reduced_dag, order, &rho)?;

    Ok(WitnessConstruction {
        sigma: sigma.clone(),
        alpha,
        beta,
        rho,
        active_path,
        colliders,
        descendant_paths,
        reduced_dag,
        gamma,
    })
}

/// Shortest directed path from `h` into the masked set, ties broken by
/// lexicographic node sequence; `[h]` if `h` is already in the set.
fn shortest_path_into_set(dag: &Dag, h: usize, mask: &[bool]) -> Option<Vec<usize>> {
    fn dfs(dag: &Dag, mask: &[bool], path: &mut Vec<usize>, best: &mut Option<Vec<usize>>) {
        let v = *path.last().expect("path starts nonempty");
        if mask[v] {
            let better = match best {
                None => true,
                Some(b) => (path.len(), &*path) < (b.len(), b),
            };
            if better {
                *best = Some(path.clone());
            }
            return;
        }
        for &c in dag.child_indices(v) {
            path.push(c);
            dfs(dag, mask, path, best);
            path.pop();
        }
    }
    let mut best = None;
    dfs(dag, mask, &mut vec![h], &mut best);
    best
}

/// Appendix layout for the covariance variables: alpha, the descendant-path
/// targets z_1..z_k in collider order, beta, then all remaining nodes
/// sorted.
fn gamma_variable_order(
    dag: &Dag,
    alpha: &NodeId,
    beta: &NodeId,
    descendant_paths: &[Vec<NodeId>],
) -> Vec<NodeId> {
    let mut order = vec![alpha.clone()];
    let mut seen: NodeSet = [alpha.clone(), beta.clone()].into_iter().collect();
    for p in descendant_paths {
        let z_i = p.last().expect("paths contain at least the collider");
        if seen.insert(z_i.clone()) {
            order.push(z_i.clone());
        }
    }
    order.push(beta.clone());
    for n in dag.nodes() {
        if seen.insert(n.clone()) {
            order.push(n.clone());
        }
    }
    order
}

/// Covariance per the ρ-power rule: entry ρ^l when the reduced graph joins
/// two nodes by regular (collider-free) paths all of length l, 0 when no
/// regular path exists; unit diagonal. Regular paths of differing lengths
/// would make the entry ill-defined and are a logic error.
fn rho_power_covariance(
    reduced: &Dag,
    order: Vec<NodeId>,
    rho: &BigRational,
) -> Result<CovarianceMatrix> {
    let n = order.len();
    let mut entries = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        entries[i][i] = BigRational::one();
        for j in 0..i {
            let mut lengths: BTreeSet<usize> = BTreeSet::new();
            for path in
                reduced.enumerate_paths_limited(&order[i], &order[j], reduced.node_count())?
            {
                if path.collider_count() == 0 {
                    lengths.insert(path.edge_len());
                }
            }
            let value = match lengths.len() {
                0 => BigRational::zero(),
                1 => {
                    let l = *lengths.iter().next().expect("one length");
                    rho_pow(rho, l)
                }
                _ => {
                    return Err(Error::Logic(format!(
                        "regular paths of differing lengths join '{}' and '{}'; \
                         the covariance entry is ill-defined",
                        order[i], order[j]
                    )))
                }
            };
            entries[i][j] = value.clone();
            entries[j][i] = value;
        }
    }
    CovarianceMatrix::new(order, entries)
}

fn rho_pow(rho: &BigRational, l: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..l {
        acc *= rho;
    }
    acc
}

/// Verification outcome for a witness: positive definiteness, violation of
/// the target dependency (with the determinant-criterion value and its ρ
/// exponent), and satisfaction of every statement of the graph's causal
/// input list.
#[derive(Clone, Debug)]
pub struct WitnessReport {
    pub positive_definite: bool,
    pub dependency_violated: bool,
    pub dependency_determinant: BigRational,
    pub determinant_exponent: Option<u32>,
    pub failing_statements: Vec<CiStatement>,
}

impl WitnessReport {
    pub fn statements_satisfied(&self) -> bool {
        self.failing_statements.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.positive_definite
            && self.dependency_violated
            && self.determinant_exponent.is_some()
            && self.statements_satisfied()
    }
}

/// Runs the three checks on a witness built from this graph.
///
/// All three necessarily pass for a faithfully constructed witness: the
/// construction validates positive definiteness, the reduced graph keeps an
/// active path between the endpoints, and every path active in the reduced
/// graph is active in the original, so statements the original graph
/// verifies stay satisfied. The report recomputes each fact from the matrix
/// alone rather than trusting the construction.
pub fn verify_witness(dag: &Dag, w: &WitnessConstruction) -> Result<WitnessReport> {
    let positive_definite = linalg::leading_principal_minors(w.gamma.rows())
        .iter()
        .all(|m| *m > BigRational::zero());

    let alpha_set: NodeSet = [w.alpha.clone()].into_iter().collect();
    let beta_set: NodeSet = [w.beta.clone()].into_iter().collect();
    let dependency_violated = !gaussian_ci(&w.gamma, &alpha_set, w.sigma.z(), &beta_set)?;
    let dependency_determinant =
        self::dependency_determinant(&w.gamma, &w.alpha, w.sigma.z(), &w.beta)?;
    let determinant_exponent = rho_power_exponent(&dependency_determinant, &w.rho);

    let list = causal_list_of(dag, &dag.topological_order())?;
    let mut failing_statements = Vec::new();
    for stmt in list.statements_of() {
        if !gaussian_ci(&w.gamma, stmt.x(), stmt.z(), stmt.y())? {
            failing_statements.push(stmt);
        }
    }

    Ok(WitnessReport {
        positive_definite,
        dependency_violated,
        dependency_determinant,
        determinant_exponent,
        failing_statements,
    })
}

/// Serializes a witness and its verification as structured text. The output
/// is deterministic byte-for-byte for identical inputs: statement, chosen
/// endpoints, ρ, the active path, each collider with its descendant path,
/// the reduced graph in DAG text form, the covariance in row-major exact
/// fractions, and the check outcomes.
pub fn render_witness_report(w: &WitnessConstruction, r: &WitnessReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "sigma {}", w.sigma);
    let _ = writeln!(out, "alpha {}", w.alpha);
    let _ = writeln!(out, "beta {}", w.beta);
    let _ = writeln!(out, "rho {}", w.rho);
    let _ = writeln!(out, "path {}", w.active_path);
    for (h, p) in w.colliders.iter().zip(&w.descendant_paths) {
        let rendered: Vec<&str> = p.iter().map(NodeId::as_str).collect();
        let _ = writeln!(out, "collider {h} : {}", rendered.join(" "));
    }
    out.push_str("reduced-dag\n");
    out.push_str(&w.reduced_dag.to_text());
    out.push_str("end\n");
    let vars: Vec<&str> = w.gamma.variables().iter().map(NodeId::as_str).collect();
    let _ = writeln!(out, "gamma-vars {}", vars.join(" "));
    for (v, row) in w.gamma.variables().iter().zip(w.gamma.rows()) {
        let rendered: Vec<String> = row.iter().map(|e| e.to_string()).collect();
        let _ = writeln!(out, "gamma-row {v} : {}", rendered.join(" "));
    }
    let _ = writeln!(
        out,
        "check positive-definite {}",
        pass_fail(r.positive_definite)
    );
    let exponent = match r.determinant_exponent {
        Some(e) => e.to_string(),
        None => "none".into(),
    };
    let _ = writeln!(
        out,
        "check dependency-violated {} det {} exponent {}",
        pass_fail(r.dependency_violated && r.determinant_exponent.is_some()),
        r.dependency_determinant,
        exponent
    );
    let _ = writeln!(
        out,
        "check statements-satisfied {}",
        pass_fail(r.statements_satisfied())
    );
    for s in &r.failing_statements {
        let _ = writeln!(out, "failing {s}");
    }
    let _ = writeln!(out, "verdict {}", pass_fail(r.passed()));
    out
}

fn pass_fail(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node::node_set;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn half() -> BigRational {
        rat(1, 2)
    }

    fn diamond_tail() -> Dag {
        Dag::from_parts(
            ["1", "2", "3", "4", "5"],
            [("1", "2"), ("1", "3"), ("2", "4"), ("3", "4"), ("4", "5")],
            [],
        )
        .unwrap()
    }

    fn ids(names: &[&str]) -> Vec<NodeId> {
        names.iter().map(|&s| NodeId::from(s)).collect()
    }

    fn chain_matrix() -> CovarianceMatrix {
        CovarianceMatrix::new(
            ids(&["1", "2", "3"]),
            vec![
                vec![rat(1, 1), rat(1, 2), rat(1, 4)],
                vec![rat(1, 2), rat(1, 1), rat(1, 2)],
                vec![rat(1, 4), rat(1, 2), rat(1, 1)],
            ],
        )
        .unwrap()
    }

    fn identity(vars: &[&str]) -> CovarianceMatrix {
        let n = vars.len();
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { rat(1, 1) } else { rat(0, 1) })
                    .collect()
            })
            .collect();
        CovarianceMatrix::new(ids(vars), entries).unwrap()
    }

    #[test]
    fn matrix_validation() {
        // Asymmetric.
        assert!(matches!(
            CovarianceMatrix::new(
                ids(&["a", "b"]),
                vec![vec![rat(1, 1), rat(1, 2)], vec![rat(1, 3), rat(1, 1)]],
            ),
            Err(Error::Input(_))
        ));
        // Bad diagonal.
        assert!(matches!(
            CovarianceMatrix::new(
                ids(&["a", "b"]),
                vec![vec![rat(2, 1), rat(0, 1)], vec![rat(0, 1), rat(1, 1)]],
            ),
            Err(Error::Input(_))
        ));
        // Not positive definite (perfect correlation).
        assert!(matches!(
            CovarianceMatrix::new(
                ids(&["a", "b"]),
                vec![vec![rat(1, 1), rat(1, 1)], vec![rat(1, 1), rat(1, 1)]],
            ),
            Err(Error::Numeric(_))
        ));
        // Duplicate variables.
        assert!(matches!(
            CovarianceMatrix::new(ids(&["a", "a"]), vec![vec![rat(1, 1); 2]; 2]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn identity_matrix_satisfies_everything() {
        let gamma = identity(&["1", "2", "3"]);
        assert!(gaussian_ci(&gamma, &node_set(["1"]), &NodeSet::new(), &node_set(["2"])).unwrap());
        assert!(gaussian_ci(&gamma, &node_set(["1"]), &node_set(["3"]), &node_set(["2"])).unwrap());
        assert!(gaussian_ci(
            &gamma,
            &node_set(["1", "3"]),
            &NodeSet::new(),
            &node_set(["2"])
        )
        .unwrap());
    }

    #[test]
    fn chain_matrix_screens_off_through_middle() {
        let gamma = chain_matrix();
        assert!(gaussian_ci(&gamma, &node_set(["1"]), &node_set(["2"]), &node_set(["3"])).unwrap());
        assert!(!gaussian_ci(&gamma, &node_set(["1"]), &NodeSet::new(), &node_set(["3"])).unwrap());
    }

    #[test]
    fn ci_rejects_bad_triples() {
        let gamma = chain_matrix();
        assert!(matches!(
            gaussian_ci(&gamma, &node_set(["1"]), &node_set(["1"]), &node_set(["3"])),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            gaussian_ci(&gamma, &node_set(["9"]), &NodeSet::new(), &node_set(["3"])),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn determinant_route_agrees_with_regression_route() {
        let gamma = chain_matrix();
        let d = dependency_determinant(
            &gamma,
            &NodeId::from("1"),
            &node_set(["2"]),
            &NodeId::from("3"),
        )
        .unwrap();
        assert!(d.is_zero());
        let d = dependency_determinant(
            &gamma,
            &NodeId::from("1"),
            &NodeSet::new(),
            &NodeId::from("3"),
        )
        .unwrap();
        assert_eq!(d, rat(1, 4));
    }

    #[test]
    fn rho_exponent_detection() {
        assert_eq!(rho_power_exponent(&rat(1, 16), &half()), Some(4));
        assert_eq!(rho_power_exponent(&rat(1, 2), &half()), Some(1));
        assert_eq!(rho_power_exponent(&rat(1, 1), &half()), None);
        assert_eq!(rho_power_exponent(&rat(0, 1), &half()), None);
        assert_eq!(rho_power_exponent(&rat(3, 16), &half()), None);
        assert_eq!(rho_power_exponent(&rat(4, 9), &rat(2, 3)), Some(2));
    }

    #[test]
    fn diamond_witness_with_reopened_collider() {
        let dag = diamond_tail();
        let sigma = CiStatement::parse("I(2 ; 1,5 ; 3)").unwrap();
        let w = construct_witness(&dag, &sigma, half()).unwrap();
        assert_eq!(w.alpha(), &NodeId::from("2"));
        assert_eq!(w.beta(), &NodeId::from("3"));
        assert_eq!(w.active_path().to_string(), "2 4 3");
        assert_eq!(w.colliders(), &ids(&["4"]));
        assert_eq!(w.descendant_paths(), &[ids(&["4", "5"])]);
        assert_eq!(w.descendant_targets(), vec![&NodeId::from("5")]);
        let expected_edges: Vec<(NodeId, NodeId)> = [("2", "4"), ("3", "4"), ("4", "5")]
            .iter()
            .map(|(a, b)| (NodeId::from(*a), NodeId::from(*b)))
            .collect();
        assert_eq!(
            w.reduced_dag().edges().iter().cloned().collect::<Vec<_>>(),
            expected_edges
        );

        let gamma = w.gamma();
        assert_eq!(
            gamma.variables(),
            ids(&["2", "5", "3", "1", "4"]).as_slice()
        );
        let e = |a: &str, b: &str| {
            gamma
                .entry(&NodeId::from(a), &NodeId::from(b))
                .unwrap()
                .clone()
        };
        assert_eq!(e("2", "5"), rat(1, 4));
        assert_eq!(e("3", "5"), rat(1, 4));
        assert_eq!(e("2", "3"), rat(0, 1));
        assert_eq!(e("2", "4"), rat(1, 2));
        assert_eq!(e("3", "4"), rat(1, 2));
        assert_eq!(e("4", "5"), rat(1, 2));
        for other in ["2", "3", "4", "5"] {
            assert_eq!(e("1", other), rat(0, 1));
        }

        let report = verify_witness(&dag, &w).unwrap();
        assert!(report.passed());
        assert_eq!(report.dependency_determinant, rat(1, 16));
        assert_eq!(report.determinant_exponent, Some(4));
        assert!(construction_claims(&w).all_hold());
    }

    #[test]
    fn diamond_witness_through_common_cause() {
        let dag = diamond_tail();
        let sigma = CiStatement::parse("I(2 ; ; 3)").unwrap();
        let w = construct_witness(&dag, &sigma, half()).unwrap();
        assert_eq!(w.active_path().to_string(), "2 1 3");
        assert!(w.colliders().is_empty());
        assert!(w.descendant_paths().is_empty());
        let expected_edges: Vec<(NodeId, NodeId)> = [("1", "2"), ("1", "3")]
            .iter()
            .map(|(a, b)| (NodeId::from(*a), NodeId::from(*b)))
            .collect();
        assert_eq!(
            w.reduced_dag().edges().iter().cloned().collect::<Vec<_>>(),
            expected_edges
        );
        assert_eq!(
            w.gamma()
                .entry(&NodeId::from("2"), &NodeId::from("3"))
                .unwrap(),
            &rat(1, 4)
        );
        let report = verify_witness(&dag, &w).unwrap();
        assert!(report.passed());
        assert_eq!(report.dependency_determinant, rat(1, 4));
        assert_eq!(report.determinant_exponent, Some(2));
    }

    #[test]
    fn single_edge_witness() {
        let dag = Dag::from_parts(["a", "b"], [("a", "b")], []).unwrap();
        let sigma = CiStatement::parse("I(a ; ; b)").unwrap();
        let w = construct_witness(&dag, &sigma, half()).unwrap();
        assert_eq!(
            w.gamma()
                .entry(&NodeId::from("a"), &NodeId::from("b"))
                .unwrap(),
            &half()
        );
        let report = verify_witness(&dag, &w).unwrap();
        assert!(report.passed());
        assert_eq!(report.dependency_determinant, half());
        assert_eq!(report.determinant_exponent, Some(1));
    }

    #[test]
    fn witness_requires_a_dependency() {
        let dag = diamond_tail();
        let sigma = CiStatement::parse("I(2 ; 1 ; 3)").unwrap();
        assert!(matches!(
            construct_witness(&dag, &sigma, half()),
            Err(Error::Logic(_))
        ));
    }

    #[test]
    fn witness_rejects_out_of_range_rho() {
        let dag = diamond_tail();
        let sigma = CiStatement::parse("I(2 ; ; 3)").unwrap();
        for bad in [rat(0, 1), rat(1, 1), rat(3, 2), rat(-1, 2)] {
            assert!(matches!(
                construct_witness(&dag, &sigma, bad),
                Err(Error::Input(_))
            ));
        }
    }

    #[test]
    fn large_rho_with_collider_is_indefinite() {
        // With a collider on the active path, both parents correlate ρ with
        // it while staying uncorrelated with each other, so the 3x3 minor
        // determinant is 1 − 2ρ², negative for ρ ≥ 1/√2.
        let dag = diamond_tail();
        let sigma = CiStatement::parse("I(2 ; 1,5 ; 3)").unwrap();
        assert!(matches!(
            construct_witness(&dag, &sigma, rat(9, 10)),
            Err(Error::Numeric(_))
        ));
        // Without a collider the same ρ is fine.
        let marginal = CiStatement::parse("I(2 ; ; 3)").unwrap();
        assert!(construct_witness(&dag, &marginal, rat(9, 10)).is_ok());
    }

    #[test]
    fn report_rendering_is_stable() {
        let dag = Dag::from_parts(["a", "b"], [("a", "b")], []).unwrap();
        let sigma = CiStatement::parse("I(a ; ; b)").unwrap();
        let w = construct_witness(&dag, &sigma, half()).unwrap();
        let r = verify_witness(&dag, &w).unwrap();
        let text = render_witness_report(&w, &r);
        let expect = "\
sigma I(a ; ; b)
alpha a
beta b
rho 1/2
path a b
reduced-dag
node a
node b
edge a b
end
gamma-vars a b
gamma-row a : 1 1/2
gamma-row b : 1/2 1
check positive-definite pass
check dependency-violated pass det 1/2 exponent 1
check statements-satisfied pass
verdict pass
";
        assert_eq!(text, expect);
        // Byte-identical on recomputation.
        let again = render_witness_report(
            &construct_witness(&dag, &sigma, half()).unwrap(),
            &verify_witness(&dag, &w).unwrap(),
        );
        assert_eq!(text, again);
    }

    /// In the reduced graph, a node with a single parent factorizes against
    /// every non-descendant, and a two-parent collider satisfies the summed
    /// identity.
    fn check_parent_identities(w: &WitnessConstruction) {
        let reduced = w.reduced_dag();
        let gamma = w.gamma();
        let rho = w.rho();
        for i in reduced.nodes() {
            let parents = reduced.parents_of(i).unwrap();
            let below: NodeSet = reduced
                .nodes()
                .iter()
                .filter(|v| {
                    let vs: NodeSet = [(*v).clone()].into_iter().collect();
                    reduced.ancestors(&vs).unwrap().contains(i)
                })
                .cloned()
                .collect();
            for j in reduced.nodes() {
                if below.contains(j) {
                    continue;
                }
                let e = |a: &NodeId, b: &NodeId| gamma.entry(a, b).unwrap().clone();
                match parents.as_slice() {
                    [h] => assert_eq!(e(i, j), e(i, h) * e(h, j), "single parent at {i}"),
                    [g, h] => {
                        assert_eq!(e(i, j), (e(h, j) + e(g, j)) * rho, "two parents at {i}")
                    }
                    _ => {}
                }
            }
        }
    }

    #[test]
    fn parent_identities_hold_on_diamond_witnesses() {
        let dag = diamond_tail();
        for text in ["I(2 ; 1,5 ; 3)", "I(2 ; ; 3)", "I(4 ; ; 5)", "I(1 ; ; 5)"] {
            let sigma = CiStatement::parse(text).unwrap();
            let w = construct_witness(&dag, &sigma, half()).unwrap();
            check_parent_identities(&w);
        }
    }

    #[test]
    fn forest_detection() {
        let tree = Dag::from_parts(["a", "b", "c"], [("a", "b"), ("a", "c")], []).unwrap();
        assert!(underlying_is_forest(&tree));
        let diamondish =
            Dag::from_parts(["a", "b", "c"], [("a", "b"), ("a", "c"), ("b", "c")], []).unwrap();
        assert!(!underlying_is_forest(&diamondish));
    }

    // -- properties -------------------------------------------------------

    fn arb_triple(n: usize) -> impl Strategy<Value = Vec<u8>> {
        proptest::collection::vec(0u8..4, n)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        /// Every witness for a random unverified statement verifies and
        /// satisfies the structural claims, and the two dependency routes
        /// (regression residual vs determinant) agree on all pairs.
        #[test]
        fn random_witnesses_verify(
            dag in crate::graph::strategies::arb_dag(4),
            tags in arb_triple(4),
        ) {
            let tags = &tags[..dag.node_count()];
            let mut x = NodeSet::new();
            let mut z = NodeSet::new();
            let mut y = NodeSet::new();
            for (node, &t) in dag.nodes().iter().zip(tags) {
                match t {
                    1 => { x.insert(node.clone()); }
                    2 => { z.insert(node.clone()); }
                    3 => { y.insert(node.clone()); }
                    _ => {}
                }
            }
            prop_assume!(!x.is_empty() && !y.is_empty());
            let sigma = CiStatement::new(x, z, y).unwrap();
            prop_assume!(
                !separated_bool(&dag, sigma.x(), sigma.z(), sigma.y(), SeparationMode::D).unwrap()
            );
            let w = construct_witness(&dag, &sigma, half()).unwrap();
            let report = verify_witness(&dag, &w).unwrap();
            prop_assert!(report.passed());
            prop_assert!(construction_claims(&w).all_hold());

            let gamma = w.gamma();
            let vars: Vec<NodeId> = gamma.variables().to_vec();
            for a in &vars {
                for b in &vars {
                    if a >= b || sigma.z().contains(a) || sigma.z().contains(b) {
                        continue;
                    }
                    let sa: NodeSet = [a.clone()].into_iter().collect();
                    let sb: NodeSet = [b.clone()].into_iter().collect();
                    let via_regression = gaussian_ci(gamma, &sa, sigma.z(), &sb).unwrap();
                    let via_det =
                        dependency_determinant(gamma, a, sigma.z(), b).unwrap().is_zero();
                    prop_assert_eq!(via_regression, via_det);
                }
            }
        }
    }
}
