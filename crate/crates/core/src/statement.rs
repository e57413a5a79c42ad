//! Conditional-independence statements and their text syntax.

use std::fmt;

use crate::error::{Error, Result};
use crate::node::{render_set, NodeId, NodeSet};

/// The statement "x is independent of y given z", written `I(x ; z ; y)`.
///
/// Stored in canonical form: of the two interchangeable outer sets, the
/// lexicographically smaller one is kept first, so a statement and its
/// mirror image compare equal. `x` and `y` are nonempty and all three sets
/// are pairwise disjoint; `z` may be empty.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CiStatement {
    x: NodeSet,
    z: NodeSet,
    y: NodeSet,
}

impl CiStatement {
    pub fn new(x: NodeSet, z: NodeSet, y: NodeSet) -> Result<CiStatement> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::Input(
                "statement requires nonempty outer sets".into(),
            ));
        }
        for (a, b, what) in [
            (&x, &z, "x and z"),
            (&x, &y, "x and y"),
            (&z, &y, "z and y"),
        ] {
            if a.intersection(b).next().is_some() {
                return Err(Error::Input(format!("statement sets overlap: {what}")));
            }
        }
        let (x, y) = if x <= y { (x, y) } else { (y, x) };
        Ok(CiStatement { x, z, y })
    }

    pub fn x(&self) -> &NodeSet {
        &self.x
    }

    pub fn z(&self) -> &NodeSet {
        &self.z
    }

    pub fn y(&self) -> &NodeSet {
        &self.y
    }

    /// All nodes mentioned by the statement.
    pub fn support(&self) -> NodeSet {
        self.x
            .iter()
            .chain(self.z.iter())
            .chain(self.y.iter())
            .cloned()
            .collect()
    }

    /// Parses `I(X ; Z ; Y)` with comma-separated node lists; Z may be
    /// empty, e.g. `I(2 ; ; 3)`. Whitespace is ignored throughout.
    pub fn parse(text: &str) -> Result<CiStatement> {
        let bad = |column: usize, message: &str| Error::parse(1, column, message);
        let trimmed = text.trim();
        let start = text.len() - text.trim_start().len() + 1;
        let inner = trimmed
            .strip_prefix('I')
            .and_then(|rest| rest.trim_start().strip_prefix('('))
            .ok_or_else(|| bad(start, "statement must start with 'I('"))?;
        let inner = inner
            .strip_suffix(')')
            .ok_or_else(|| bad(text.trim_end().len().max(1), "statement must end with ')'"))?;
        let parts: Vec<&str> = inner.split(';').collect();
        if parts.len() != 3 {
            return Err(bad(
                start,
                "statement needs three ';'-separated parts: I(X ; Z ; Y)",
            ));
        }
        let mut sets = Vec::with_capacity(3);
        for part in &parts {
            let mut set = NodeSet::new();
            for token in part.split(',') {
                let token = token.trim();
                if !token.is_empty() {
                    set.insert(token.into());
                }
            }
            sets.push(set);
        }
        let y = sets.pop().unwrap();
        let z = sets.pop().unwrap();
        let x = sets.pop().unwrap();
        if x.is_empty() || y.is_empty() {
            return Err(bad(start, "outer sets of a statement must be nonempty"));
        }
        CiStatement::new(x, z, y).map_err(|e| match e {
            Error::Input(msg) => bad(start, &msg),
            other => other,
        })
    }
}

/// Enumerates every disjoint triple over `nodes` with nonempty outer sets,
/// one statement per unordered {x, y} pair, in ascending statement order.
///
/// Each node is assigned one of four roles (unused, x, z, y); mirror-image
/// assignments are skipped so each canonical statement appears exactly once.
pub(crate) fn canonical_triples(nodes: &[NodeId]) -> Vec<CiStatement> {
    let n = nodes.len();
    let mut out = Vec::new();
    let mut assignment = vec![0u8; n];
    loop {
        let mut x_ix = Vec::new();
        let mut z = NodeSet::new();
        let mut y_ix = Vec::new();
        for (i, &tag) in assignment.iter().enumerate() {
            match tag {
                1 => x_ix.push(i),
                2 => {
                    z.insert(nodes[i].clone());
                }
                3 => y_ix.push(i),
                _ => {}
            }
        }
        if !x_ix.is_empty() && !y_ix.is_empty() && x_ix < y_ix {
            let collect = |ixs: &[usize]| ixs.iter().map(|&i| nodes[i].clone()).collect();
            let statement = CiStatement::new(collect(&x_ix), z, collect(&y_ix))
                .expect("role assignment yields disjoint nonempty outer sets");
            out.push(statement);
        }
        let mut pos = 0;
        loop {
            if pos == n {
                out.sort();
                return out;
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

impl fmt::Display for CiStatement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.z.is_empty() {
            write!(f, "I({} ; ; {})", render_set(&self.x), render_set(&self.y))
        } else {
            write!(
                f,
                "I({} ; {} ; {})",
                render_set(&self.x),
                render_set(&self.z),
                render_set(&self.y)
            )
        }
    }
}
