//! Causal input lists: an ordered sequence of variables, each with a parent
//! set drawn from its predecessors, together with the DAG such a list
//! defines and the construction of minimal I-maps from an independence
//! oracle.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::node::{render_set, NodeId, NodeSet};
use crate::separation::{separated_bool, SeparationMode};
use crate::statement::CiStatement;

/// An abstract conditional-independence query interface.
///
/// Implementations must answer deterministically for fixed inputs. The two
/// shipped implementations are a [`Dag`] (d-separation) and a discrete
/// distribution (exact rational arithmetic over its mass function).
pub trait IndependenceOracle {
    /// Does I(x, z, y) hold? The sets must be pairwise disjoint and x and y
    /// nonempty.
    fn is_independent(&self, x: &NodeSet, z: &NodeSet, y: &NodeSet) -> Result<bool>;
}

impl IndependenceOracle for Dag {
    fn is_independent(&self, x: &NodeSet, z: &NodeSet, y: &NodeSet) -> Result<bool> {
        separated_bool(self, x, z, y, SeparationMode::D)
    }
}

/// A total order over variables with, for each variable, a parent set
/// contained in its strict predecessors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CausalInputList {
    order: Vec<NodeId>,
    parents: Vec<NodeSet>,
}

impl CausalInputList {
    /// Builds a list from `(node, parents)` entries given in order.
    ///
    /// Fails if a node repeats or a parent set reaches outside the node's
    /// strict predecessors.
    pub fn new(entries: impl IntoIterator<Item = (NodeId, NodeSet)>) -> Result<Self> {
        let mut order = Vec::new();
        let mut parents = Vec::new();
        let mut seen = NodeSet::new();
        for (node, set) in entries {
            if !seen.insert(node.clone()) {
                return Err(Error::Input(format!(
                    "node '{node}' appears twice in the order"
                )));
            }
            for p in &set {
                if p == &node || !seen.contains(p) {
                    return Err(Error::Input(format!(
                        "parent '{p}' of '{node}' does not strictly precede it"
                    )));
                }
            }
            order.push(node);
            parents.push(set);
        }
        Ok(CausalInputList { order, parents })
    }

    pub fn order(&self) -> &[NodeId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// The parent set of `node`, or an input error for unknown nodes.
    pub fn parents_of(&self, node: &NodeId) -> Result<&NodeSet> {
        self.order
            .iter()
            .position(|n| n == node)
            .map(|i| &self.parents[i])
            .ok_or_else(|| Error::Input(format!("unknown node '{node}'")))
    }

    /// The independence statements the list asserts: for each variable i
    /// with predecessors U and parents S, the statement I({i}, S, U − S).
    /// Entries whose remainder U − S is empty are vacuous and omitted.
    pub fn statements_of(&self) -> BTreeSet<CiStatement> {
        let mut out = BTreeSet::new();
        let mut predecessors = NodeSet::new();
        for (node, parents) in self.order.iter().zip(&self.parents) {
            let remainder: NodeSet = predecessors.difference(parents).cloned().collect();
            if !remainder.is_empty() {
                let x: NodeSet = [node.clone()].into_iter().collect();
                out.insert(
                    CiStatement::new(x, parents.clone(), remainder)
                        .expect("list invariants keep the sets disjoint"),
                );
            }
            predecessors.insert(node.clone());
        }
        out
    }

    /// The DAG the list defines: an edge p → i for every parent p of i.
    /// Acyclic by construction since parents strictly precede children.
    pub fn build_dag(&self) -> Dag {
        let edges: BTreeSet<(NodeId, NodeId)> = self
            .order
            .iter()
            .zip(&self.parents)
            .flat_map(|(node, parents)| parents.iter().map(move |p| (p.clone(), node.clone())))
            .collect();
        Dag::new(self.order.clone(), edges, [])
            .expect("parents precede children, so the graph is acyclic")
    }

    /// Parses the text form: an `order` line followed by optional
    /// `parents <id> : <id> ...` lines (one per node, empty right side
    /// allowed; nodes without a line have no parents).
    pub fn parse_text(text: &str) -> Result<CausalInputList> {
        let mut order: Option<Vec<NodeId>> = None;
        let mut parent_lines: Vec<(usize, NodeId, NodeSet)> = Vec::new();
        for (ix, raw) in text.lines().enumerate() {
            let line_no = ix + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let directive = tokens.next().expect("nonempty line has a token");
            match directive {
                "order" => {
                    if order.is_some() {
                        return Err(Error::parse(line_no, 1, "duplicate order line"));
                    }
                    let mut nodes = Vec::new();
                    let mut seen = NodeSet::new();
                    for tok in tokens {
                        let id = NodeId::from(tok);
                        if !seen.insert(id.clone()) {
                            return Err(Error::parse(
                                line_no,
                                1,
                                format!("node '{id}' repeats in the order"),
                            ));
                        }
                        nodes.push(id);
                    }
                    order = Some(nodes);
                }
                "parents" => {
                    let node = tokens
                        .next()
                        .filter(|t| *t != ":")
                        .map(NodeId::from)
                        .ok_or_else(|| {
                            Error::parse(line_no, 1, "parents line needs a node before ':'")
                        })?;
                    match tokens.next() {
                        Some(":") => {}
                        _ => {
                            return Err(Error::parse(
                                line_no,
                                1,
                                "parents line needs ':' after the node",
                            ))
                        }
                    }
                    let set: NodeSet = tokens.map(NodeId::from).collect();
                    parent_lines.push((line_no, node, set));
                }
                other => {
                    return Err(Error::parse(
                        line_no,
                        1,
                        format!("unknown directive '{other}'"),
                    ));
                }
            }
        }
        let order = order.ok_or_else(|| Error::parse(1, 1, "missing order line"))?;
        let mut parents: Vec<NodeSet> = vec![NodeSet::new(); order.len()];
        let mut assigned = NodeSet::new();
        for (line_no, node, set) in parent_lines {
            let pos = order.iter().position(|n| n == &node).ok_or_else(|| {
                Error::parse(line_no, 1, format!("node '{node}' is not in the order"))
            })?;
            if !assigned.insert(node.clone()) {
                return Err(Error::parse(
                    line_no,
                    1,
                    format!("duplicate parents line for '{node}'"),
                ));
            }
            for p in &set {
                if !order[..pos].contains(p) {
                    return Err(Error::parse(
                        line_no,
                        1,
                        format!("parent '{p}' of '{node}' does not strictly precede it"),
                    ));
                }
            }
            parents[pos] = set;
        }
        Ok(CausalInputList { order, parents })
    }

    /// Canonical text form; parsing it back reproduces the list.
    pub fn to_text(&self) -> String {
        let mut out = String::from("order");
        for node in &self.order {
            out.push(' ');
            out.push_str(node.as_str());
        }
        out.push('\n');
        for (node, parents) in self.order.iter().zip(&self.parents) {
            if !parents.is_empty() {
                let rendered: Vec<&str> = parents.iter().map(NodeId::as_str).collect();
                out.push_str(&format!("parents {node} : {}\n", rendered.join(" ")));
            }
        }
        out
    }
}

impl fmt::Display for CausalInputList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Reads a causal input list off a DAG along a topological order of it:
/// each node's parent set is its graph parents. Building the result's DAG
/// reproduces the input exactly (deterministic markers aside).
pub fn causal_list_of(dag: &Dag, order: &[NodeId]) -> Result<CausalInputList> {
    if order.len() != dag.node_count()
        || !order.iter().all(|n| dag.contains(n))
        || order.iter().collect::<BTreeSet<_>>().len() != order.len()
    {
        return Err(Error::Input(
            "order must list each node of the graph exactly once".into(),
        ));
    }
    let position: std::collections::BTreeMap<&NodeId, usize> =
        order.iter().enumerate().map(|(i, n)| (n, i)).collect();
    for (p, c) in dag.edges() {
        if position[p] >= position[c] {
            return Err(Error::Input(format!(
                "order is not topological: edge {p} -> {c} points backwards"
            )));
        }
    }
    let entries = order.iter().map(|n| {
        let parents: NodeSet = dag
            .parents_of(n)
            .expect("node checked above")
            .into_iter()
            .collect();
        (n.clone(), parents)
    });
    CausalInputList::new(entries)
}

/// Constructs a minimal I-map of the oracle's independence relation along
/// the given variable order: for each variable, the parent set is the first
/// subset of its predecessors — by cardinality, then lexicographically —
/// that the oracle declares independent of the remaining predecessors (an
/// empty remainder counts vacuously).
///
/// Inclusion-minimality of each accepted set is verified by checking that
/// every single-element deletion loses independence; a deletion that
/// succeeds means the oracle contradicted itself and is a logic error.
pub fn minimal_imap<O>(oracle: &O, order: &[NodeId]) -> Result<Dag>
where
    O: IndependenceOracle + ?Sized,
{
    let mut seen = NodeSet::new();
    for n in order {
        if !seen.insert(n.clone()) {
            return Err(Error::Input(format!(
                "node '{n}' appears twice in the order"
            )));
        }
    }
    let mut edges: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    for (i, node) in order.iter().enumerate() {
        let mut predecessors: Vec<NodeId> = order[..i].to_vec();
        predecessors.sort();
        let all: NodeSet = predecessors.iter().cloned().collect();
        let x: NodeSet = [node.clone()].into_iter().collect();
        let mut chosen: Option<NodeSet> = None;
        'search: for k in 0..=predecessors.len() {
            for combo in predecessors.iter().combinations(k) {
                let s: NodeSet = combo.into_iter().cloned().collect();
                let remainder: NodeSet = all.difference(&s).cloned().collect();
                if remainder.is_empty() || oracle.is_independent(&x, &s, &remainder)? {
                    chosen = Some(s);
                    break 'search;
                }
            }
        }
        let s = chosen.ok_or_else(|| {
            Error::Logic(format!(
                "no predecessor subset renders '{node}' independent; \
                 the full set must always work"
            ))
        })?;
        for removed in &s {
            let mut smaller = s.clone();
            smaller.remove(removed);
            let remainder: NodeSet = all.difference(&smaller).cloned().collect();
            if oracle.is_independent(&x, &smaller, &remainder)? {
                return Err(Error::Logic(format!(
                    "oracle inconsistency: parent set for '{node}' stayed independent \
                     after dropping '{removed}' (z = {{{}}})",
                    render_set(&smaller)
                )));
            }
        }
        for p in &s {
            edges.insert((p.clone(), node.clone()));
        }
    }
    Ok(Dag::new(order.to_vec(), edges, [])
        .expect("parents precede children, so the graph is acyclic"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::node::node_set;
    use proptest::prelude::*;

    fn ids(names: &[&str]) -> Vec<NodeId> {
        names.iter().map(|&s| NodeId::from(s)).collect()
    }

    /// The worked five-variable list: order 1..5 with parent sets
    /// 2:{1}, 3:{1}, 4:{2,3}, 5:{4}.
    fn diamond_list() -> CausalInputList {
        CausalInputList::new([
            (NodeId::from("1"), NodeSet::new()),
            (NodeId::from("2"), node_set(["1"])),
            (NodeId::from("3"), node_set(["1"])),
            (NodeId::from("4"), node_set(["2", "3"])),
            (NodeId::from("5"), node_set(["4"])),
        ])
        .unwrap()
    }

    fn diamond_dag() -> Dag {
        Dag::from_parts(
            ["1", "2", "3", "4", "5"],
            [("1", "2"), ("1", "3"), ("2", "4"), ("3", "4"), ("4", "5")],
            [],
        )
        .unwrap()
    }

    #[test]
    fn new_rejects_bad_entries() {
        assert!(matches!(
            CausalInputList::new([
                (NodeId::from("a"), NodeSet::new()),
                (NodeId::from("a"), NodeSet::new()),
            ]),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            CausalInputList::new([(NodeId::from("a"), node_set(["b"]))]),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            CausalInputList::new([(NodeId::from("a"), node_set(["a"]))]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn statements_drop_vacuous_entries() {
        let stmts = diamond_list().statements_of();
        let expect: BTreeSet<CiStatement> = [
            CiStatement::new(node_set(["3"]), node_set(["1"]), node_set(["2"])).unwrap(),
            CiStatement::new(node_set(["4"]), node_set(["2", "3"]), node_set(["1"])).unwrap(),
            CiStatement::new(node_set(["5"]), node_set(["4"]), node_set(["1", "2", "3"])).unwrap(),
        ]
        .into_iter()
        .collect();
        assert_eq!(stmts, expect);
    }

    #[test]
    fn statements_of_chain_and_singleton() {
        let chain = CausalInputList::new([
            (NodeId::from("a"), NodeSet::new()),
            (NodeId::from("b"), node_set(["a"])),
            (NodeId::from("c"), node_set(["b"])),
        ])
        .unwrap();
        let stmts = chain.statements_of();
        assert_eq!(stmts.len(), 1);
        assert!(stmts.contains(
            &CiStatement::new(node_set(["c"]), node_set(["b"]), node_set(["a"])).unwrap()
        ));

        let single = CausalInputList::new([(NodeId::from("a"), NodeSet::new())]).unwrap();
        assert!(single.statements_of().is_empty());
    }

    #[test]
    fn build_dag_transcribes_parent_sets() {
        assert_eq!(diamond_list().build_dag(), diamond_dag());

        let loose = CausalInputList::new([
            (NodeId::from("a"), NodeSet::new()),
            (NodeId::from("b"), NodeSet::new()),
        ])
        .unwrap();
        assert_eq!(loose.build_dag().edge_count(), 0);
    }

    #[test]
    fn causal_list_of_reads_parents_along_order() {
        let dag = diamond_dag();
        let list = causal_list_of(&dag, &ids(&["1", "2", "3", "4", "5"])).unwrap();
        assert_eq!(list, diamond_list());
        assert_eq!(list.build_dag(), dag);
    }

    #[test]
    fn causal_list_of_rejects_non_topological_orders() {
        let dag = diamond_dag();
        assert!(matches!(
            causal_list_of(&dag, &ids(&["2", "1", "3", "4", "5"])),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            causal_list_of(&dag, &ids(&["1", "2", "3", "4"])),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            causal_list_of(&dag, &ids(&["1", "2", "3", "4", "4"])),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn text_round_trip() {
        let list = diamond_list();
        let text = list.to_text();
        assert_eq!(CausalInputList::parse_text(&text).unwrap(), list);
        // Spacing, comments, and an explicitly empty right side all parse.
        let spaced = "# five variables\norder 1 2 3 4 5\nparents 2 : 1\nparents 3 : 1\n\nparents 4 : 2 3\nparents 5 : 4\n";
        assert_eq!(CausalInputList::parse_text(spaced).unwrap(), list);
    }

    #[test]
    fn parse_accepts_empty_parent_list() {
        let list = CausalInputList::parse_text("order a b\nparents b :\n").unwrap();
        assert!(list.parents_of(&NodeId::from("b")).unwrap().is_empty());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = CausalInputList::parse_text("order a b\nparents c : a\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = CausalInputList::parse_text("order a b\nparents a : b\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = CausalInputList::parse_text("parents a : b\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = CausalInputList::parse_text("order a\nparents a\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn minimal_imap_recovers_diamond_from_its_oracle() {
        let dag = diamond_dag();
        let rebuilt = minimal_imap(&dag, &ids(&["1", "2", "3", "4", "5"])).unwrap();
        assert_eq!(rebuilt, dag);
    }

    struct Always;
    impl IndependenceOracle for Always {
        fn is_independent(&self, _: &NodeSet, _: &NodeSet, _: &NodeSet) -> Result<bool> {
            Ok(true)
        }
    }

    struct Never;
    impl IndependenceOracle for Never {
        fn is_independent(&self, _: &NodeSet, _: &NodeSet, _: &NodeSet) -> Result<bool> {
            Ok(false)
        }
    }

    #[test]
    fn minimal_imap_extremes() {
        let order = ids(&["b", "a", "c"]);
        let edgeless = minimal_imap(&Always, &order).unwrap();
        assert_eq!(edgeless.edge_count(), 0);

        let complete = minimal_imap(&Never, &order).unwrap();
        assert_eq!(complete.edge_count(), 3);
        assert!(complete.has_edge(&NodeId::from("b"), &NodeId::from("a")));
        assert!(complete.has_edge(&NodeId::from("b"), &NodeId::from("c")));
        assert!(complete.has_edge(&NodeId::from("a"), &NodeId::from("c")));
    }

    /// Answers differently on repeated identical queries, which the trait
    /// forbids; the minimality verification must surface this as a logic
    /// error rather than return a graph built on contradictory answers.
    struct FlipFlop(std::cell::Cell<usize>);
    impl IndependenceOracle for FlipFlop {
        fn is_independent(&self, _: &NodeSet, _: &NodeSet, _: &NodeSet) -> Result<bool> {
            let n = self.0.get();
            self.0.set(n + 1);
            Ok(n == 1)
        }
    }

    #[test]
    fn minimal_imap_flags_inconsistent_oracles() {
        let err = minimal_imap(&FlipFlop(Default::default()), &ids(&["a", "b"])).unwrap_err();
        assert!(matches!(err, Error::Logic(_)));
    }

    #[test]
    fn minimal_imap_rejects_duplicate_order() {
        assert!(matches!(
            minimal_imap(&Always, &ids(&["a", "a"])),
            Err(Error::Input(_))
        ));
    }

    // -- properties -------------------------------------------------------

    fn arb_list(max_n: usize) -> impl Strategy<Value = CausalInputList> {
        (2..=max_n).prop_flat_map(|n| {
            let names: Vec<NodeId> = (0..n).map(|i| NodeId::from(format!("v{i}"))).collect();
            let pairs = n * (n - 1) / 2;
            (
                Just(names).prop_shuffle(),
                proptest::collection::vec(proptest::bool::ANY, pairs),
            )
                .prop_map(|(order, bits)| {
                    let mut k = 0;
                    let mut entries = Vec::new();
                    for i in 0..order.len() {
                        let mut set = NodeSet::new();
                        for earlier in order.iter().take(i) {
                            if bits[k] {
                                set.insert(earlier.clone());
                            }
                            k += 1;
                        }
                        entries.push((order[i].clone(), set));
                    }
                    CausalInputList::new(entries).unwrap()
                })
        })
    }

    proptest! {
        /// Reading the built DAG back along the same order reproduces the
        /// list exactly.
        #[test]
        fn round_trip_through_dag(list in arb_list(6)) {
            let dag = list.build_dag();
            let back = causal_list_of(&dag, list.order()).unwrap();
            prop_assert_eq!(back, list);
        }

        /// The built DAG graphically verifies every statement the list
        /// asserts.
        #[test]
        fn built_dag_verifies_list_statements(list in arb_list(5)) {
            let dag = list.build_dag();
            for stmt in list.statements_of() {
                prop_assert!(dag.is_independent(stmt.x(), stmt.z(), stmt.y()).unwrap());
            }
        }

        /// A DAG's own d-separation oracle reconstructs the DAG along any of
        /// its topological orders (here: the canonical one).
        #[test]
        fn minimal_imap_is_inverse_of_d_separation(dag in crate::graph::strategies::arb_dag(5)) {
            let order = dag.topological_order();
            let rebuilt = minimal_imap(&dag, &order).unwrap();
            prop_assert_eq!(rebuilt, dag);
        }

        /// Text round trip.
        #[test]
        fn text_round_trip_random(list in arb_list(6)) {
            let parsed = CausalInputList::parse_text(&list.to_text()).unwrap();
            prop_assert_eq!(parsed, list);
        }
    }
}
