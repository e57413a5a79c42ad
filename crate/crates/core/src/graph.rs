//! DAG representation, validation, and the graph primitives every other
//! module builds on.
//!
//! A [`Dag`] is immutable after construction: validation (membership,
//! self-loops, acyclicity) happens once in the constructor, and adjacency
//! indices are precomputed so queries never re-derive them.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::node::{NodeId, NodeSet};

/// Path enumeration is exponential; it exists as a small-instance oracle and
/// refuses graphs larger than this unless a caller raises the limit.
pub const PATH_ENUMERATION_NODE_LIMIT: usize = 12;

/// A directed acyclic graph over string-identified nodes, with an optional
/// subset of nodes flagged as functionally determined by their parents.
#[derive(Clone, Debug)]
pub struct Dag {
    nodes: Vec<NodeId>, // sorted, unique
    edges: BTreeSet<(NodeId, NodeId)>,
    deterministic: NodeSet,
    // Derived adjacency, by node index. Index order equals identifier order.
    parents_ix: Vec<Vec<usize>>,
    children_ix: Vec<Vec<usize>>,
    adjacent_ix: Vec<Vec<usize>>, // parents ∪ children, sorted
    deterministic_ix: Vec<bool>,
}

impl PartialEq for Dag {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
            && self.edges == other.edges
            && self.deterministic == other.deterministic
    }
}

impl Eq for Dag {}

impl Dag {
    /// Builds a DAG, validating edge endpoints, self-loops, the deterministic
    /// subset, and acyclicity. Duplicate nodes and edges collapse silently
    /// (set semantics).
    pub fn new(
        nodes: impl IntoIterator<Item = NodeId>,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
        deterministic: impl IntoIterator<Item = NodeId>,
    ) -> Result<Dag> {
        let node_set: NodeSet = nodes.into_iter().collect();
        let nodes: Vec<NodeId> = node_set.iter().cloned().collect();
        let edges: BTreeSet<(NodeId, NodeId)> = edges.into_iter().collect();
        let deterministic: NodeSet = deterministic.into_iter().collect();

        for (u, v) in &edges {
            if u == v {
                return Err(Error::Input(format!("self-loop on node '{u}'")));
            }
            for end in [u, v] {
                if !node_set.contains(end) {
                    return Err(Error::Input(format!(
                        "edge {u} -> {v} references unknown node '{end}'"
                    )));
                }
            }
        }
        for d in &deterministic {
            if !node_set.contains(d) {
                return Err(Error::Input(format!(
                    "deterministic flag on unknown node '{d}'"
                )));
            }
        }

        let index_of = |id: &NodeId| nodes.binary_search(id).expect("validated membership");
        let n = nodes.len();
        let mut parents_ix = vec![Vec::new(); n];
        let mut children_ix = vec![Vec::new(); n];
        for (u, v) in &edges {
            let (ui, vi) = (index_of(u), index_of(v));
            parents_ix[vi].push(ui);
            children_ix[ui].push(vi);
        }
        for list in parents_ix.iter_mut().chain(children_ix.iter_mut()) {
            list.sort_unstable();
        }
        let adjacent_ix = (0..n)
            .map(|i| {
                let mut adj: Vec<usize> = parents_ix[i]
                    .iter()
                    .chain(children_ix[i].iter())
                    .copied()
                    .collect();
                adj.sort_unstable();
                adj
            })
            .collect();
        let mut deterministic_ix = vec![false; n];
        for d in &deterministic {
            deterministic_ix[index_of(d)] = true;
        }

        let dag = Dag {
            nodes,
            edges,
            deterministic,
            parents_ix,
            children_ix,
            adjacent_ix,
            deterministic_ix,
        };
        if let Some(cycle) = dag.find_cycle() {
            let rendered: Vec<&str> = cycle.iter().map(|&i| dag.nodes[i].as_str()).collect();
            return Err(Error::Structure(format!(
                "directed cycle: {}",
                rendered.join(" -> ")
            )));
        }
        Ok(dag)
    }

    /// Test-friendly constructor from string slices.
    pub fn from_parts<'a>(
        nodes: impl IntoIterator<Item = &'a str>,
        edges: impl IntoIterator<Item = (&'a str, &'a str)>,
        deterministic: impl IntoIterator<Item = &'a str>,
    ) -> Result<Dag> {
        Dag::new(
            nodes.into_iter().map(NodeId::from),
            edges
                .into_iter()
                .map(|(u, v)| (NodeId::from(u), NodeId::from(v))),
            deterministic.into_iter().map(NodeId::from),
        )
    }

    /// Returns one directed cycle as a closed index sequence (first == last),
    /// or `None` if the graph is acyclic.
    fn find_cycle(&self) -> Option<Vec<usize>> {
        // Iterative DFS with an explicit stack; color 0 = unseen, 1 = on
        // stack, 2 = done.
        let n = self.nodes.len();
        let mut color = vec![0u8; n];
        let mut stack_path: Vec<usize> = Vec::new();
        for start in 0..n {
            if color[start] != 0 {
                continue;
            }
            // (node, next child position)
            let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
            color[start] = 1;
            stack_path.push(start);
            while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
                if *pos < self.children_ix[v].len() {
                    let w = self.children_ix[v][*pos];
                    *pos += 1;
                    match color[w] {
                        0 => {
                            color[w] = 1;
                            stack_path.push(w);
                            stack.push((w, 0));
                        }
                        1 => {
                            let at = stack_path.iter().position(|&x| x == w).unwrap();
                            let mut cycle: Vec<usize> = stack_path[at..].to_vec();
                            cycle.push(w);
                            return Some(cycle);
                        }
                        _ => {}
                    }
                } else {
                    color[v] = 2;
                    stack_path.pop();
                    stack.pop();
                }
            }
        }
        None
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn node_set(&self) -> NodeSet {
        self.nodes.iter().cloned().collect()
    }

    pub fn edges(&self) -> &BTreeSet<(NodeId, NodeId)> {
        &self.edges
    }

    pub fn deterministic(&self) -> &NodeSet {
        &self.deterministic
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, id: &NodeId) -> bool {
        self.nodes.binary_search(id).is_ok()
    }

    pub fn has_edge(&self, parent: &NodeId, child: &NodeId) -> bool {
        self.edges.contains(&(parent.clone(), child.clone()))
    }

    /// Parents of a node, in identifier order.
    pub fn parents_of(&self, id: &NodeId) -> Result<Vec<NodeId>> {
        let i = self.index_of(id)?;
        Ok(self.parents_ix[i]
            .iter()
            .map(|&p| self.nodes[p].clone())
            .collect())
    }

    pub(crate) fn index_of(&self, id: &NodeId) -> Result<usize> {
        self.nodes
            .binary_search(id)
            .map_err(|_| Error::Input(format!("unknown node '{id}'")))
    }

    pub(crate) fn node_at(&self, i: usize) -> &NodeId {
        &self.nodes[i]
    }

    pub(crate) fn parent_indices(&self, i: usize) -> &[usize] {
        &self.parents_ix[i]
    }

    pub(crate) fn child_indices(&self, i: usize) -> &[usize] {
        &self.children_ix[i]
    }

    pub(crate) fn adjacent_indices(&self, i: usize) -> &[usize] {
        &self.adjacent_ix[i]
    }

    pub(crate) fn is_deterministic_ix(&self, i: usize) -> bool {
        self.deterministic_ix[i]
    }

    pub(crate) fn has_edge_ix(&self, parent: usize, child: usize) -> bool {
        self.children_ix[parent].binary_search(&child).is_ok()
    }

    /// Converts a node set to validated indices.
    pub(crate) fn index_set(&self, s: &NodeSet) -> Result<Vec<usize>> {
        s.iter().map(|id| self.index_of(id)).collect()
    }

    /// Membership mask for the reflexive ancestor closure of the seed
    /// indices: `mask[v]` is true iff v reaches some seed along edges.
    pub(crate) fn ancestor_mask(&self, seeds: &[usize]) -> Vec<bool> {
        let mut mask = vec![false; self.nodes.len()];
        let mut queue: Vec<usize> = Vec::new();
        for &s in seeds {
            if !mask[s] {
                mask[s] = true;
                queue.push(s);
            }
        }
        while let Some(v) = queue.pop() {
            for &p in &self.parents_ix[v] {
                if !mask[p] {
                    mask[p] = true;
                    queue.push(p);
                }
            }
        }
        mask
    }

    /// A topological order with ties broken by identifier order, so the
    /// result is unique for a given graph.
    pub fn topological_order(&self) -> Vec<NodeId> {
        let n = self.nodes.len();
        let mut indegree: Vec<usize> = (0..n).map(|i| self.parents_ix[i].len()).collect();
        // Index order equals identifier order, so a BTreeSet of indices pops
        // the lexicographically smallest ready node first.
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(&v) = ready.iter().next() {
            ready.remove(&v);
            order.push(self.nodes[v].clone());
            for &w in &self.children_ix[v] {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    ready.insert(w);
                }
            }
        }
        debug_assert_eq!(order.len(), n, "acyclicity is a construction invariant");
        order
    }

    /// Every node with a directed path into `s`, including `s` itself
    /// (a node counts as its own ancestor).
    pub fn ancestors(&self, s: &NodeSet) -> Result<NodeSet> {
        let seeds = self.index_set(s)?;
        let mask = self.ancestor_mask(&seeds);
        Ok(mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(|(i, _)| self.nodes[i].clone())
            .collect())
    }

    /// All simple undirected paths from `a` to `b`, in lexicographic order of
    /// their node sequences. Exponential; guarded by
    /// [`PATH_ENUMERATION_NODE_LIMIT`].
    pub fn enumerate_paths(&self, a: &NodeId, b: &NodeId) -> Result<Vec<UndirectedPath>> {
        self.enumerate_paths_limited(a, b, PATH_ENUMERATION_NODE_LIMIT)
    }

    /// As [`Dag::enumerate_paths`] with an explicit node-count limit.
    pub fn enumerate_paths_limited(
        &self,
        a: &NodeId,
        b: &NodeId,
        limit: usize,
    ) -> Result<Vec<UndirectedPath>> {
        if self.nodes.len() > limit {
            return Err(Error::Resource(format!(
                "path enumeration limited to {limit} nodes, graph has {}",
                self.nodes.len()
            )));
        }
        let ai = self.index_of(a)?;
        let bi = self.index_of(b)?;
        if ai == bi {
            return Err(Error::Input(format!(
                "path endpoints must differ, got '{a}'"
            )));
        }
        let mut found: Vec<Vec<usize>> = Vec::new();
        let mut on_path = vec![false; self.nodes.len()];
        let mut current = vec![ai];
        on_path[ai] = true;
        self.path_dfs(bi, &mut current, &mut on_path, &mut found);
        let mut paths: Vec<UndirectedPath> = found
            .into_iter()
            .map(|ixs| self.path_from_indices(&ixs))
            .collect();
        paths.sort_by(|p, q| p.nodes.cmp(&q.nodes));
        Ok(paths)
    }

    fn path_dfs(
        &self,
        target: usize,
        current: &mut Vec<usize>,
        on_path: &mut [bool],
        found: &mut Vec<Vec<usize>>,
    ) {
        let v = *current.last().unwrap();
        if v == target {
            found.push(current.clone());
            return;
        }
        for &w in &self.adjacent_ix[v] {
            if on_path[w] {
                continue;
            }
            on_path[w] = true;
            current.push(w);
            self.path_dfs(target, current, on_path, found);
            current.pop();
            on_path[w] = false;
        }
    }

    pub(crate) fn path_from_indices(&self, ixs: &[usize]) -> UndirectedPath {
        let nodes: Vec<NodeId> = ixs.iter().map(|&i| self.nodes[i].clone()).collect();
        let mut colliders = vec![false; nodes.len()];
        for j in 1..ixs.len().saturating_sub(1) {
            colliders[j] =
                self.has_edge_ix(ixs[j - 1], ixs[j]) && self.has_edge_ix(ixs[j + 1], ixs[j]);
        }
        UndirectedPath { nodes, colliders }
    }

    /// Parses the DAG text format: one directive per line, `#` starts a
    /// comment, directives are `node <id>`, `edge <parent> <child>`,
    /// `deterministic <id>`. Edges and flags may only reference declared
    /// nodes.
    pub fn parse_text(input: &str) -> Result<Dag> {
        let mut nodes: NodeSet = NodeSet::new();
        let mut edges: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
        let mut deterministic: NodeSet = NodeSet::new();
        for (line_no, raw) in input.lines().enumerate() {
            let line_no = line_no + 1;
            let line = strip_comment(raw);
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            let col = |k: usize| token_column(raw, k);
            match tokens[0] {
                "node" => {
                    if tokens.len() != 2 {
                        return Err(Error::parse(line_no, col(0), "expected: node <id>"));
                    }
                    nodes.insert(NodeId::from(tokens[1]));
                }
                "edge" => {
                    if tokens.len() != 3 {
                        return Err(Error::parse(
                            line_no,
                            col(0),
                            "expected: edge <parent> <child>",
                        ));
                    }
                    let (u, v) = (NodeId::from(tokens[1]), NodeId::from(tokens[2]));
                    if u == v {
                        return Err(Error::parse(
                            line_no,
                            col(2),
                            format!("self-loop on node '{u}'"),
                        ));
                    }
                    if !nodes.contains(&u) {
                        return Err(Error::parse(
                            line_no,
                            col(1),
                            format!("edge references undeclared node '{u}'"),
                        ));
                    }
                    if !nodes.contains(&v) {
                        return Err(Error::parse(
                            line_no,
                            col(2),
                            format!("edge references undeclared node '{v}'"),
                        ));
                    }
                    edges.insert((u, v));
                }
                "deterministic" => {
                    if tokens.len() != 2 {
                        return Err(Error::parse(
                            line_no,
                            col(0),
                            "expected: deterministic <id>",
                        ));
                    }
                    let d = NodeId::from(tokens[1]);
                    if !nodes.contains(&d) {
                        return Err(Error::parse(
                            line_no,
                            col(1),
                            format!("deterministic flag on undeclared node '{d}'"),
                        ));
                    }
                    deterministic.insert(d);
                }
                other => {
                    return Err(Error::parse(
                        line_no,
                        col(0),
                        format!("unknown directive '{other}'"),
                    ));
                }
            }
        }
        Dag::new(nodes, edges, deterministic)
    }

    /// Canonical serialization: nodes, then edges, then deterministic flags,
    /// each in identifier order. `parse_text` round-trips this exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            out.push_str("node ");
            out.push_str(n.as_str());
            out.push('\n');
        }
        for (u, v) in &self.edges {
            out.push_str("edge ");
            out.push_str(u.as_str());
            out.push(' ');
            out.push_str(v.as_str());
            out.push('\n');
        }
        for d in &self.deterministic {
            out.push_str("deterministic ");
            out.push_str(d.as_str());
            out.push('\n');
        }
        out
    }
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

/// 1-based byte column of the k-th whitespace-separated token.
pub(crate) fn token_column(line: &str, k: usize) -> usize {
    let mut token_index = 0;
    let mut in_token = false;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            in_token = false;
        } else if !in_token {
            if token_index == k {
                return i + 1;
            }
            token_index += 1;
            in_token = true;
        }
    }
    1
}

/// A simple path in the underlying undirected graph, with a collider flag for
/// each position (true only possible at interior positions).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UndirectedPath {
    nodes: Vec<NodeId>,
    colliders: Vec<bool>,
}

impl UndirectedPath {
    /// Validates that `nodes` is a simple path in `dag` (consecutive nodes
    /// adjacent ignoring direction) and derives collider flags from the edge
    /// directions.
    pub fn from_nodes(dag: &Dag, nodes: Vec<NodeId>) -> Result<UndirectedPath> {
        if nodes.len() < 2 {
            return Err(Error::Input("a path needs at least two nodes".into()));
        }
        let mut ixs = Vec::with_capacity(nodes.len());
        for id in &nodes {
            ixs.push(dag.index_of(id)?);
        }
        let mut seen = vec![false; dag.node_count()];
        for &i in &ixs {
            if seen[i] {
                return Err(Error::Input(format!(
                    "path repeats node '{}'",
                    dag.node_at(i)
                )));
            }
            seen[i] = true;
        }
        for w in ixs.windows(2) {
            if !dag.has_edge_ix(w[0], w[1]) && !dag.has_edge_ix(w[1], w[0]) {
                return Err(Error::Input(format!(
                    "nodes '{}' and '{}' are not adjacent",
                    dag.node_at(w[0]),
                    dag.node_at(w[1])
                )));
            }
        }
        Ok(dag.path_from_indices(&ixs))
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Edge count of the path.
    pub fn edge_len(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn endpoints(&self) -> (&NodeId, &NodeId) {
        (self.nodes.first().unwrap(), self.nodes.last().unwrap())
    }

    pub fn is_collider(&self, position: usize) -> bool {
        self.colliders[position]
    }

    /// Interior collider nodes, left to right.
    pub fn colliders(&self) -> Vec<NodeId> {
        self.nodes
            .iter()
            .zip(&self.colliders)
            .filter(|(_, &c)| c)
            .map(|(n, _)| n.clone())
            .collect()
    }

    /// Count of interior colliders.
    pub fn collider_count(&self) -> usize {
        self.colliders.iter().filter(|&&c| c).count()
    }
}

impl fmt::Display for UndirectedPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, n) in self.nodes.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(n.as_str())?;
        }
        Ok(())
    }
}

/// Proptest strategies shared across the crate's module test suites.
#[cfg(test)]
pub(crate) mod strategies {
    use super::Dag;
    use proptest::prelude::*;

    /// Random DAG over up to `max_n` nodes; edges only point from smaller to
    /// larger identifier, which makes any edge subset acyclic.
    pub(crate) fn arb_dag(max_n: usize) -> impl Strategy<Value = Dag> {
        (2..=max_n).prop_flat_map(|n| {
            let pairs = n * (n - 1) / 2;
            proptest::collection::vec(proptest::bool::ANY, pairs).prop_map(move |bits| {
                let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
                let mut edges = Vec::new();
                let mut k = 0;
                for i in 0..n {
                    for j in (i + 1)..n {
                        if bits[k] {
                            edges.push((names[i].as_str(), names[j].as_str()));
                        }
                        k += 1;
                    }
                }
                Dag::from_parts(names.iter().map(String::as_str), edges, []).unwrap()
            })
        })
    }
}
