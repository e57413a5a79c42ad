//! Closure of conditional-independence statement sets under the
//! semi-graphoid axioms — symmetry, decomposition, weak union, and
//! contraction — and the derivability decision built on it.
//!
//! Symmetry never needs a rule application: statements are stored in
//! canonical form, which identifies I(X, Z, Y) with I(Y, Z, X).

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::node::{NodeId, NodeSet};
use crate::statement::CiStatement;

/// Closure enumerates up to ~4^n statements; universes larger than this are
/// refused unless the caller raises the limit explicitly.
pub const CLOSURE_UNIVERSE_LIMIT: usize = 6;

/// A finite universe of nodes together with canonical independence
/// statements over it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatementSet {
    universe: NodeSet,
    statements: BTreeSet<CiStatement>,
}

impl StatementSet {
    /// Builds a set over an explicit universe; every statement must range
    /// over the universe.
    pub fn new(
        universe: NodeSet,
        statements: impl IntoIterator<Item = CiStatement>,
    ) -> Result<Self> {
        let statements: BTreeSet<CiStatement> = statements.into_iter().collect();
        for s in &statements {
            if !s.support().is_subset(&universe) {
                return Err(Error::Input(format!(
                    "statement {s} mentions nodes outside the universe"
                )));
            }
        }
        Ok(StatementSet {
            universe,
            statements,
        })
    }

    /// Builds a set whose universe is the union of the statements' supports.
    pub fn from_statements(statements: impl IntoIterator<Item = CiStatement>) -> Self {
        let statements: BTreeSet<CiStatement> = statements.into_iter().collect();
        let universe = statements
            .iter()
            .flat_map(|s| s.support().into_iter())
            .collect();
        StatementSet {
            universe,
            statements,
        }
    }

    pub fn universe(&self) -> &NodeSet {
        &self.universe
    }

    pub fn statements(&self) -> &BTreeSet<CiStatement> {
        &self.statements
    }

    pub fn contains(&self, statement: &CiStatement) -> bool {
        self.statements.contains(statement)
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    /// Parses the text form: an optional leading `universe <id> ...` line,
    /// then one `I(X ; Z ; Y)` statement per line. Without a universe line
    /// the universe is the union of the statements' supports. `#` starts a
    /// comment.
    pub fn parse_text(text: &str) -> Result<StatementSet> {
        let mut universe: Option<NodeSet> = None;
        let mut statements = BTreeSet::new();
        let mut first_meaningful = true;
        for (ix, raw) in text.lines().enumerate() {
            let line_no = ix + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if first_meaningful && line.starts_with("universe") {
                let rest = &line["universe".len()..];
                if !rest.is_empty() && !rest.starts_with(char::is_whitespace) {
                    return Err(Error::parse(line_no, 1, "malformed universe line"));
                }
                universe = Some(rest.split_whitespace().map(NodeId::from).collect());
                first_meaningful = false;
                continue;
            }
            first_meaningful = false;
            let statement = CiStatement::parse(line).map_err(|e| e.at_line(line_no))?;
            if let Some(u) = &universe {
                if !statement.support().is_subset(u) {
                    return Err(Error::parse(
                        line_no,
                        1,
                        format!("statement {statement} mentions nodes outside the universe"),
                    ));
                }
            }
            statements.insert(statement);
        }
        match universe {
            Some(universe) => Ok(StatementSet {
                universe,
                statements,
            }),
            None => Ok(StatementSet::from_statements(statements)),
        }
    }

    /// Canonical text form; parsing it back reproduces the set.
    pub fn to_text(&self) -> String {
        let mut out = String::from("universe");
        for n in &self.universe {
            out.push(' ');
            out.push_str(n.as_str());
        }
        out.push('\n');
        for s in &self.statements {
            out.push_str(&s.to_string());
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for StatementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Least fixpoint of the input under decomposition, weak union, and
/// contraction (symmetry is the canonical form). Uses the default universe
/// limit [`CLOSURE_UNIVERSE_LIMIT`].
pub fn closure(set: &StatementSet) -> Result<StatementSet> {
    closure_limited(set, CLOSURE_UNIVERSE_LIMIT)
}

/// As [`closure`] with an explicit universe-size limit.
pub fn closure_limited(set: &StatementSet, limit: usize) -> Result<StatementSet> {
    let n = set.universe.len();
    if n > limit {
        return Err(Error::Resource(format!(
            "closure limited to universes of {limit} nodes, this one has {n}"
        )));
    }
    let index: Vec<&NodeId> = set.universe.iter().collect();
    let to_mask = |s: &NodeSet| -> u32 {
        s.iter()
            .map(|n| {
                1 << index
                    .binary_search(&n)
                    .expect("statement support validated against universe")
            })
            .fold(0, |a, b| a | b)
    };
    let start: BTreeSet<Triple> = set
        .statements
        .iter()
        .map(|s| canonical(to_mask(s.x()), to_mask(s.z()), to_mask(s.y())))
        .collect();
    let closed = close_masks(start);
    let to_set = |mask: u32| -> NodeSet {
        (0..index.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| index[i].clone())
            .collect()
    };
    let statements = closed
        .into_iter()
        .map(|(x, z, y)| {
            CiStatement::new(to_set(x), to_set(z), to_set(y))
                .expect("axioms preserve disjointness and nonempty outer sets")
        })
        .collect::<BTreeSet<_>>();
    Ok(StatementSet {
        universe: set.universe.clone(),
        statements,
    })
}

/// Is the goal derivable from the set under the axioms? Equivalent to
/// membership in [`closure`].
pub fn derives(set: &StatementSet, goal: &CiStatement) -> Result<bool> {
    derives_limited(set, goal, CLOSURE_UNIVERSE_LIMIT)
}

/// As [`derives`] with an explicit universe-size limit.
pub fn derives_limited(set: &StatementSet, goal: &CiStatement, limit: usize) -> Result<bool> {
    if !goal.support().is_subset(&set.universe) {
        return Err(Error::Input(format!(
            "goal {goal} mentions nodes outside the universe"
        )));
    }
    Ok(closure_limited(set, limit)?.contains(goal))
}

/// Statement over bit-indexed nodes: (x, z, y) masks, canonical (x ≤ y in
/// index-sequence order).
type Triple = (u32, u32, u32);

/// Lexicographic comparison of the ascending index sequences two masks
/// denote; mirrors the ordering of node sets.
fn seq_cmp(a: u32, b: u32) -> Ordering {
    (0..32)
        .filter(|i| a & (1 << i) != 0)
        .cmp((0..32).filter(|i| b & (1 << i) != 0))
}

fn canonical(x: u32, z: u32, y: u32) -> Triple {
    if seq_cmp(x, y) != Ordering::Greater {
        (x, z, y)
    } else {
        (y, z, x)
    }
}

/// Nonempty proper submasks of `mask`, descending.
fn submasks_proper(mask: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut s = mask.wrapping_sub(1) & mask;
    while s != 0 {
        out.push(s);
        s = (s - 1) & mask;
    }
    out
}

/// Pass-based fixpoint: each pass applies decomposition and weak union to
/// every statement and contraction to every ordered pair, in both
/// orientations, until nothing new appears.
fn close_masks(start: BTreeSet<Triple>) -> BTreeSet<Triple> {
    let mut set = start;
    loop {
        let oriented: Vec<Triple> = set
            .iter()
            .flat_map(|&(x, z, y)| [(x, z, y), (y, z, x)])
            .collect();
        let mut fresh: Vec<Triple> = Vec::new();
        for &(x, z, y) in &oriented {
            for w in submasks_proper(y) {
                let rest = y & !w;
                // Decomposition: I(X, Z, Y ∪ W) gives I(X, Z, Y).
                fresh.push(canonical(x, z, rest));
                // Weak union: I(X, Z, Y ∪ W) gives I(X, Z ∪ W, Y).
                fresh.push(canonical(x, z | w, rest));
            }
        }
        // Contraction: I(X, Z, Y) and I(X, Z ∪ Y, W) give I(X, Z, Y ∪ W).
        for &(x1, z1, w1) in &oriented {
            for &(x2, z2, y2) in &oriented {
                if x1 == x2 && z1 == (z2 | y2) {
                    fresh.push(canonical(x2, z2, y2 | w1));
                }
            }
        }
        let before = set.len();
        set.extend(fresh);
        if set.len() == before {
            return set;
        }
    }
}
