//! Separation queries over DAGs.
//!
//! Production queries run in time linear in the edge count by breadth-first
//! search over (node, arrival-direction) states; the path-by-path definition
//! ([`path_is_active`] over [`Dag::enumerate_paths`]) stays available as a
//! small-instance oracle and the two are checked against each other
//! exhaustively in the test suite.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{Dag, UndirectedPath};
use crate::node::{NodeId, NodeSet};
use crate::statement::CiStatement;

/// Statement enumeration is exhaustive over ~4^n triples; graphs larger than
/// this are refused unless the caller raises the limit.
pub const VERIFIED_STATEMENTS_NODE_LIMIT: usize = 7;

/// Which separation criterion a query uses.
///
/// `D` is plain d-separation. `Id` additionally blocks paths through interior
/// non-collider nodes that are functionally determined by the conditioning
/// set (see [`determined_closure`]); collider activation is unchanged.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeparationMode {
    D,
    Id,
}

/// Outcome of a separation query. When the sets are not separated, `witness`
/// holds one active path demonstrating the connection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparationVerdict {
    separated: bool,
    witness: Option<UndirectedPath>,
}

impl SeparationVerdict {
    pub fn separated(&self) -> bool {
        self.separated
    }

    pub fn witness(&self) -> Option<&UndirectedPath> {
        self.witness.as_ref()
    }
}

/// Query context on node indices: membership masks plus the two rule masks.
struct Query {
    x_ix: Vec<usize>,
    y_mask: Vec<bool>,
    /// Interior non-collider nodes in this mask block a path.
    blocked: Vec<bool>,
    /// Interior colliders must be in this mask (in z or ancestor of z).
    collider_ok: Vec<bool>,
}

fn prepare(
    dag: &Dag,
    x: &NodeSet,
    z: &NodeSet,
    y: &NodeSet,
    mode: SeparationMode,
) -> Result<Query> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Input("x and y must be nonempty".into()));
    }
    let x_ix = dag.index_set(x)?;
    let z_ix = dag.index_set(z)?;
    let y_ix = dag.index_set(y)?;
    let n = dag.node_count();
    let mut owner = vec![0u8; n];
    for (&ix, tag) in x_ix
        .iter()
        .map(|i| (i, 1u8))
        .chain(z_ix.iter().map(|i| (i, 2)))
        .chain(y_ix.iter().map(|i| (i, 3)))
    {
        if owner[ix] != 0 {
            return Err(Error::Input(format!(
                "sets overlap on node '{}'",
                dag.node_at(ix)
            )));
        }
        owner[ix] = tag;
    }
    let mut y_mask = vec![false; n];
    for &i in &y_ix {
        y_mask[i] = true;
    }
    let (blocked, collider_ok) = rule_masks(dag, &z_ix, mode);
    Ok(Query {
        x_ix,
        y_mask,
        blocked,
        collider_ok,
    })
}

/// Blocking mask (z, or its determined closure under `Id`) and collider
/// activation mask (reflexive ancestors of z) for a conditioning set.
fn rule_masks(dag: &Dag, z_ix: &[usize], mode: SeparationMode) -> (Vec<bool>, Vec<bool>) {
    let collider_ok = dag.ancestor_mask(z_ix);
    let blocked = match mode {
        SeparationMode::D => {
            let mut m = vec![false; dag.node_count()];
            for &i in z_ix {
                m[i] = true;
            }
            m
        }
        SeparationMode::Id => determined_mask(dag, z_ix),
    };
    (blocked, collider_ok)
}

/// Least fixpoint mask: z itself, plus every deterministic node whose parents
/// are all already in the mask.
fn determined_mask(dag: &Dag, z_ix: &[usize]) -> Vec<bool> {
    let n = dag.node_count();
    let mut mask = vec![false; n];
    for &i in z_ix {
        mask[i] = true;
    }
    loop {
        let mut changed = false;
        for v in 0..n {
            if mask[v] || !dag.is_deterministic_ix(v) {
                continue;
            }
            if dag.parent_indices(v).iter().all(|&p| mask[p]) {
                mask[v] = true;
                changed = true;
            }
        }
        if !changed {
            return mask;
        }
    }
}

/// Breadth-first reachability over (node, arrival-direction) states.
/// Arrival `Inbound` means the connecting edge points into the node.
fn connected(dag: &Dag, q: &Query) -> bool {
    const INBOUND: usize = 0;
    const OUTBOUND: usize = 1;
    let n = dag.node_count();
    let mut visited = vec![false; 2 * n];
    let mut queue: Vec<(usize, usize)> = Vec::new();
    let push = |v: usize, dir: usize, queue: &mut Vec<(usize, usize)>, visited: &mut Vec<bool>| {
        if !visited[2 * v + dir] {
            visited[2 * v + dir] = true;
            queue.push((v, dir));
        }
    };
    for &a in &q.x_ix {
        for &w in dag.child_indices(a) {
            push(w, INBOUND, &mut queue, &mut visited);
        }
        for &w in dag.parent_indices(a) {
            push(w, OUTBOUND, &mut queue, &mut visited);
        }
    }
    let mut head = 0;
    while head < queue.len() {
        let (v, dir) = queue[head];
        head += 1;
        if q.y_mask[v] {
            return true;
        }
        // Extending through v makes it an interior node; its role depends on
        // the arrival direction and the direction of the next edge.
        for &w in dag.child_indices(v) {
            // v -> w: v delivers an arrow, so v is a non-collider.
            if !q.blocked[v] {
                push(w, INBOUND, &mut queue, &mut visited);
            }
        }
        for &w in dag.parent_indices(v) {
            // w -> v: this edge points into v.
            let ok = if dir == INBOUND {
                // Both edges point into v: collider.
                q.collider_ok[v]
            } else {
                !q.blocked[v]
            };
            if ok {
                push(w, OUTBOUND, &mut queue, &mut visited);
            }
        }
    }
    false
}

/// Depth-first search for the lexicographically first simple active path
/// from x to y. Exponential in the worst case; used only to report witnesses
/// after [`connected`] has already answered the boolean query.
fn find_active_path(dag: &Dag, q: &Query) -> Option<Vec<usize>> {
    fn dfs(
        dag: &Dag,
        q: &Query,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        arrived_inbound: bool,
    ) -> bool {
        let v = *path.last().unwrap();
        for &w in dag.adjacent_indices(v) {
            if on_path[w] {
                continue;
            }
            let edge_into_v = dag.has_edge_ix(w, v);
            if path.len() >= 2 {
                // v becomes interior; check its role.
                let ok = if arrived_inbound && edge_into_v {
                    q.collider_ok[v]
                } else {
                    !q.blocked[v]
                };
                if !ok {
                    continue;
                }
            }
            path.push(w);
            if q.y_mask[w] {
                return true;
            }
            on_path[w] = true;
            if dfs(dag, q, path, on_path, !edge_into_v) {
                return true;
            }
            on_path[w] = false;
            path.pop();
        }
        false
    }

    let mut on_path = vec![false; dag.node_count()];
    for &a in &q.x_ix {
        let mut path = vec![a];
        on_path[a] = true;
        // The initial arrival direction is irrelevant: with path length 1 no
        // interior check fires before the first extension.
        if dfs(dag, q, &mut path, &mut on_path, false) {
            return Some(path);
        }
        on_path[a] = false;
    }
    None
}

fn verdict(
    dag: &Dag,
    x: &NodeSet,
    z: &NodeSet,
    y: &NodeSet,
    mode: SeparationMode,
) -> Result<SeparationVerdict> {
    let q = prepare(dag, x, z, y, mode)?;
    if !connected(dag, &q) {
        return Ok(SeparationVerdict {
            separated: true,
            witness: None,
        });
    }
    let ixs = find_active_path(dag, &q).ok_or_else(|| {
        Error::Logic("reachability reported a connection but no active path was found".into())
    })?;
    Ok(SeparationVerdict {
        separated: false,
        witness: Some(dag.path_from_indices(&ixs)),
    })
}

/// Boolean-only query, skipping witness extraction.
pub(crate) fn separated_bool(
    dag: &Dag,
    x: &NodeSet,
    z: &NodeSet,
    y: &NodeSet,
    mode: SeparationMode,
) -> Result<bool> {
    let q = prepare(dag, x, z, y, mode)?;
    Ok(!connected(dag, &q))
}

/// Does z d-separate x from y? Not separated comes with a witness path.
pub fn d_separated(dag: &Dag, x: &NodeSet, z: &NodeSet, y: &NodeSet) -> Result<SeparationVerdict> {
    verdict(dag, x, z, y, SeparationMode::D)
}

/// Like [`d_separated`], but paths are additionally blocked at interior
/// non-collider nodes functionally determined by z.
pub fn id_separated(dag: &Dag, x: &NodeSet, z: &NodeSet, y: &NodeSet) -> Result<SeparationVerdict> {
    verdict(dag, x, z, y, SeparationMode::Id)
}

/// Is this path active given z under plain d-separation rules?
///
/// Active means: every interior non-collider lies outside z, and every
/// interior collider is in z or has a descendant in z.
pub fn path_is_active(dag: &Dag, path: &UndirectedPath, z: &NodeSet) -> Result<bool> {
    path_active_in_mode(dag, path, z, SeparationMode::D)
}

/// Mode-parameterized path activity; `Id` blocks interior non-colliders in
/// the determined closure of z.
pub fn path_active_in_mode(
    dag: &Dag,
    path: &UndirectedPath,
    z: &NodeSet,
    mode: SeparationMode,
) -> Result<bool> {
    // Re-derive indices and flags against this dag instead of trusting the
    // path's own flags, so a path built from a different graph is caught.
    let checked = UndirectedPath::from_nodes(dag, path.nodes().to_vec())?;
    let z_ix = dag.index_set(z)?;
    let (a, b) = checked.endpoints();
    if z.contains(a) || z.contains(b) {
        return Err(Error::Input(
            "path endpoint lies in the conditioning set".into(),
        ));
    }
    let (blocked, collider_ok) = rule_masks(dag, &z_ix, mode);
    for j in 1..checked.len() - 1 {
        let v = dag.index_of(&checked.nodes()[j]).expect("validated above");
        let ok = if checked.is_collider(j) {
            collider_ok[v]
        } else {
            !blocked[v]
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Nodes functionally determined by z: the least fixpoint containing z and
/// every deterministic node whose parents are all determined. A
/// deterministic node with no parents is a constant and is therefore
/// determined by any set, including the empty one.
pub fn determined_closure(dag: &Dag, z: &NodeSet) -> Result<NodeSet> {
    let z_ix = dag.index_set(z)?;
    let mask = determined_mask(dag, &z_ix);
    Ok(mask
        .iter()
        .enumerate()
        .filter(|(_, &m)| m)
        .map(|(i, _)| dag.node_at(i).clone())
        .collect())
}

/// Every canonical statement over the dag's nodes whose verdict is
/// separated, by exhaustion over all disjoint triples. Uses the default
/// node-count limit [`VERIFIED_STATEMENTS_NODE_LIMIT`].
pub fn list_verified_statements(dag: &Dag, mode: SeparationMode) -> Result<BTreeSet<CiStatement>> {
    list_verified_statements_limited(dag, mode, VERIFIED_STATEMENTS_NODE_LIMIT)
}

/// As [`list_verified_statements`] with an explicit node-count limit.
pub fn list_verified_statements_limited(
    dag: &Dag,
    mode: SeparationMode,
    limit: usize,
) -> Result<BTreeSet<CiStatement>> {
    let n = dag.node_count();
    if n > limit {
        return Err(Error::Resource(format!(
            "statement enumeration limited to {limit} nodes, graph has {n}"
        )));
    }
    let mut out = BTreeSet::new();
    // Assign each node one of: 0 = unused, 1 = x, 2 = z, 3 = y.
    let mut assignment = vec![0u8; n];
    loop {
        let mut x_ix = Vec::new();
        let mut z_ix = Vec::new();
        let mut y_ix = Vec::new();
        for (i, &tag) in assignment.iter().enumerate() {
            match tag {
                1 => x_ix.push(i),
                2 => z_ix.push(i),
                3 => y_ix.push(i),
                _ => {}
            }
        }
        // Skip the mirror image of each pair: index order equals identifier
        // order, so comparing index sequences picks the canonical side.
        if !x_ix.is_empty() && !y_ix.is_empty() && x_ix < y_ix {
            let (blocked, collider_ok) = rule_masks(dag, &z_ix, mode);
            let mut y_mask = vec![false; n];
            for &i in &y_ix {
                y_mask[i] = true;
            }
            let q = Query {
                x_ix,
                y_mask,
                blocked,
                collider_ok,
            };
            if !connected(dag, &q) {
                let to_set = |ixs: &[usize]| -> NodeSet {
                    ixs.iter().map(|&i| dag.node_at(i).clone()).collect()
                };
                out.insert(CiStatement::new(
                    to_set(&q.x_ix),
                    to_set(&z_ix),
                    to_set(&y_ix),
                )?);
            }
        }
        // Next assignment in base-4 counting order.
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(out);
            }
            if assignment[pos] < 3 {
                assignment[pos] += 1;
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}

/// Among all active paths from `a` to `b` given z, returns one minimizing
/// the collider count, with ties broken by path length and then by
/// lexicographic node sequence. Also returns the colliders left to right.
pub fn minimal_collider_active_path(
    dag: &Dag,
    a: &NodeId,
    b: &NodeId,
    z: &NodeSet,
) -> Result<(UndirectedPath, Vec<NodeId>)> {
    if z.contains(a) || z.contains(b) {
        return Err(Error::Input(
            "path endpoint lies in the conditioning set".into(),
        ));
    }
    let mut best: Option<UndirectedPath> = None;
    for path in dag.enumerate_paths(a, b)? {
        if !path_is_active(dag, &path, z)? {
            continue;
        }
        let better = match &best {
            None => true,
            Some(cur) => {
                let new_key = (
                    path.collider_count(),
                    path.edge_len(),
                    path.nodes().to_vec(),
                );
                let cur_key = (cur.collider_count(), cur.edge_len(), cur.nodes().to_vec());
                new_key < cur_key
            }
        };
        if better {
            best = Some(path);
        }
    }
    match best {
        Some(path) => {
            let colliders = path.colliders();
            Ok((path, colliders))
        }
        None => Err(Error::Logic(format!(
            "no active path exists from '{a}' to '{b}' given the conditioning set"
        ))),
    }
}

/// Nodes whose parameters can influence a query for x given y: x and y
/// themselves, plus every other ancestor of x ∪ y not ID-separated from x
/// conditioned on y.
pub fn requisite_nodes(dag: &Dag, x: &NodeSet, y: &NodeSet) -> Result<NodeSet> {
    if x.is_empty() {
        return Err(Error::Input("x must be nonempty".into()));
    }
    if x.intersection(y).next().is_some() {
        return Err(Error::Input("x and y overlap".into()));
    }
    let mut union: NodeSet = x.union(y).cloned().collect();
    let candidates = dag.ancestors(&union)?;
    for a in candidates {
        if union.contains(&a) {
            continue;
        }
        let singleton: NodeSet = [a.clone()].into_iter().collect();
        if !separated_bool(dag, &singleton, y, x, SeparationMode::Id)? {
            union.insert(a);
        }
    }
    Ok(union)
}
