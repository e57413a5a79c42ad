//! Node identifiers and node sets.
//!
//! Identifiers are opaque strings; every deterministic-order contract in the
//! crate (canonical serialization, tie-breaking, statement normal form) uses
//! their lexicographic byte order.

use std::borrow::Borrow;
use std::collections::BTreeSet;
use std::fmt;

/// An opaque node identifier. Ordering is lexicographic on the underlying
/// string, which is the canonical order everywhere in this crate.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(id: impl Into<String>) -> Self {
        NodeId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

impl From<String> for NodeId {
    fn from(s: String) -> Self {
        NodeId(s)
    }
}

impl Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// A set of nodes in canonical (lexicographic) order.
pub type NodeSet = BTreeSet<NodeId>;

/// Builds a `NodeSet` from string-like identifiers.
pub fn node_set<I>(ids: I) -> NodeSet
where
    I: IntoIterator,
    I::Item: Into<NodeId>,
{
    ids.into_iter().map(Into::into).collect()
}

/// Renders a node set as comma-separated identifiers in canonical order.
pub(crate) fn render_set(set: &NodeSet) -> String {
    let mut out = String::new();
    for (i, id) in set.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(id.as_str());
    }
    out
}
