//! Exact finite discrete distributions.
//!
//! A [`DiscreteDistribution`] is a joint probability table with rational
//! masses. The module tests conditional independence by cross-multiplication
//! (no division, no tolerances), combines distributions with an
//! independence-preserving product, draws DAG-factorized random tables, and
//! repairs such tables into exact perfect maps at desk scale.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::causal::IndependenceOracle;
use crate::error::{Error, Result};
use crate::graph::{strip_comment, token_column, Dag};
use crate::node::{NodeId, NodeSet};
use crate::separation::{list_verified_statements, SeparationMode};
use crate::statement::{canonical_triples, CiStatement};

/// Node-count ceiling for [`perfect_map_distribution`]: the repair loop
/// sweeps every disjoint triple, which grows as 4^n.
pub const PERFECT_MAP_NODE_LIMIT: usize = 5;

/// How many candidate seeds the perfect-map repair loop tries per
/// still-unrepaired dependency before giving up.
pub const REPAIR_SEED_BUDGET: u64 = 64;

/// Largest joint table [`random_dag_distribution`] will enumerate.
const JOINT_TABLE_LIMIT: u128 = 1 << 20;

/// A joint probability distribution over finitely many variables, each with
/// a finite domain of value labels, with exact rational masses.
///
/// Only positive masses are stored; an absent instantiation has mass zero.
/// Masses always sum to exactly one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiscreteDistribution {
    variables: Vec<NodeId>,
    domains: Vec<Vec<String>>,
    mass: BTreeMap<Vec<u32>, BigRational>,
}

impl DiscreteDistribution {
    /// Builds a distribution and checks every invariant: distinct variables,
    /// one nonempty domain of distinct plain-token labels per variable, keys
    /// of the right arity and range, nonnegative masses summing to one.
    /// Zero-mass entries are dropped.
    ///
    /// Labels and identifiers must be plain tokens (no whitespace and none
    /// of `,`, `:`, `#`) so the text serialization can round-trip.
    pub fn new(
        variables: Vec<NodeId>,
        domains: Vec<Vec<String>>,
        mass: BTreeMap<Vec<u32>, BigRational>,
    ) -> Result<DiscreteDistribution> {
        if variables.is_empty() {
            return Err(Error::Input(
                "a distribution needs at least one variable".into(),
            ));
        }
        let distinct: BTreeSet<&NodeId> = variables.iter().collect();
        if distinct.len() != variables.len() {
            return Err(Error::Input("duplicate variable in distribution".into()));
        }
        if domains.len() != variables.len() {
            return Err(Error::Input(format!(
                "{} variables but {} domains",
                variables.len(),
                domains.len()
            )));
        }
        for (v, dom) in variables.iter().zip(&domains) {
            if !is_plain_token(v.as_str()) {
                return Err(Error::Input(format!(
                    "variable identifier '{v}' is not a plain token"
                )));
            }
            if dom.is_empty() {
                return Err(Error::Input(format!("variable '{v}' has an empty domain")));
            }
            let distinct: BTreeSet<&String> = dom.iter().collect();
            if distinct.len() != dom.len() {
                return Err(Error::Input(format!(
                    "variable '{v}' has duplicate domain values"
                )));
            }
            for value in dom {
                if !is_plain_token(value) {
                    return Err(Error::Input(format!(
                        "domain value '{value}' of variable '{v}' is not a plain token"
                    )));
                }
            }
        }
        let mut kept = BTreeMap::new();
        let mut total = BigRational::zero();
        for (key, value) in mass {
            if key.len() != variables.len() {
                return Err(Error::Input(format!(
                    "instantiation of arity {} over {} variables",
                    key.len(),
                    variables.len()
                )));
            }
            for (i, (&k, dom)) in key.iter().zip(&domains).enumerate() {
                if k as usize >= dom.len() {
                    return Err(Error::Input(format!(
                        "value index {k} out of range for variable '{}'",
                        variables[i]
                    )));
                }
            }
            if value.is_negative() {
                return Err(Error::Input("negative probability mass".into()));
            }
            if value.is_zero() {
                continue;
            }
            total += &value;
            kept.insert(key, value);
        }
        if !total.is_one() {
            return Err(Error::Input(format!(
                "probability masses sum to {total}, not 1"
            )));
        }
        Ok(DiscreteDistribution {
            variables,
            domains,
            mass: kept,
        })
    }

    /// The variable sequence. Its order fixes key layout and serialization.
    pub fn variables(&self) -> &[NodeId] {
        &self.variables
    }

    /// Per-variable domains, parallel to [`variables`](Self::variables).
    pub fn domains(&self) -> &[Vec<String>] {
        &self.domains
    }

    /// The domain of one variable.
    pub fn domain_of(&self, variable: &NodeId) -> Result<&[String]> {
        Ok(&self.domains[self.position(variable)?])
    }

    /// Mass of one full instantiation, zero when off the support.
    pub fn mass_of(&self, key: &[u32]) -> Result<BigRational> {
        if key.len() != self.variables.len() {
            return Err(Error::Input(format!(
                "instantiation of arity {} over {} variables",
                key.len(),
                self.variables.len()
            )));
        }
        for (i, (&k, dom)) in key.iter().zip(&self.domains).enumerate() {
            if k as usize >= dom.len() {
                return Err(Error::Input(format!(
                    "value index {k} out of range for variable '{}'",
                    self.variables[i]
                )));
            }
        }
        Ok(self
            .mass
            .get(key)
            .cloned()
            .unwrap_or_else(BigRational::zero))
    }

    /// Iterates the positive-mass instantiations in key order.
    pub fn support(&self) -> impl Iterator<Item = (&[u32], &BigRational)> {
        self.mass.iter().map(|(k, v)| (k.as_slice(), v))
    }

    /// True when every instantiation of the full domain has positive mass.
    pub fn strictly_positive(&self) -> bool {
        let mut full: u128 = 1;
        for dom in &self.domains {
            full = match full.checked_mul(dom.len() as u128) {
                Some(f) => f,
                None => return false,
            };
        }
        self.mass.len() as u128 == full
    }

    fn position(&self, variable: &NodeId) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v == variable)
            .ok_or_else(|| Error::Input(format!("unknown variable '{variable}'")))
    }

    fn index_set(&self, s: &NodeSet) -> Result<Vec<usize>> {
        s.iter().map(|v| self.position(v)).collect()
    }

    /// Sums masses over everything outside the projected positions.
    fn marginal(&self, positions: &[usize]) -> BTreeMap<Vec<u32>, BigRational> {
        let mut out: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        for (key, mass) in &self.mass {
            let slot = out
                .entry(project(key, positions))
                .or_insert_with(BigRational::zero);
            *slot += mass;
        }
        out
    }

    /// Parses the text form produced by [`to_text`](Self::to_text): a header
    /// `vars <id>:<v1>,<v2>,... ...`, then one `<value>... : <mass>` line per
    /// positive-mass instantiation. Omitted instantiations have mass zero;
    /// `#` starts a comment.
    pub fn parse_text(text: &str) -> Result<DiscreteDistribution> {
        let mut header: Option<(Vec<NodeId>, Vec<Vec<String>>)> = None;
        let mut mass: BTreeMap<Vec<u32>, BigRational> = BTreeMap::new();
        for (ix, raw) in text.lines().enumerate() {
            let line_no = ix + 1;
            let line = strip_comment(raw);
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            let Some((variables, domains)) = &header else {
                if tokens[0] != "vars" {
                    return Err(Error::parse(
                        line_no,
                        token_column(raw, 0),
                        "distribution must start with a 'vars' line",
                    ));
                }
                if tokens.len() == 1 {
                    return Err(Error::parse(
                        line_no,
                        token_column(raw, 0),
                        "'vars' line declares no variables",
                    ));
                }
                let mut variables = Vec::new();
                let mut domains = Vec::new();
                for (k, spec) in tokens[1..].iter().enumerate() {
                    let col = token_column(raw, k + 1);
                    let Some((id, values)) = spec.split_once(':') else {
                        return Err(Error::parse(
                            line_no,
                            col,
                            format!("expected <id>:<v1>,<v2>,... got '{spec}'"),
                        ));
                    };
                    if id.is_empty() {
                        return Err(Error::parse(line_no, col, "empty variable identifier"));
                    }
                    let dom: Vec<String> = values.split(',').map(str::to_owned).collect();
                    if dom.iter().any(String::is_empty) {
                        return Err(Error::parse(
                            line_no,
                            col,
                            format!("empty domain value for variable '{id}'"),
                        ));
                    }
                    variables.push(NodeId::from(id));
                    domains.push(dom);
                }
                header = Some((variables, domains));
                continue;
            };
            let n = variables.len();
            if tokens.len() != n + 2 || tokens[n] != ":" {
                return Err(Error::parse(
                    line_no,
                    token_column(raw, 0),
                    format!("expected {n} domain values, ':', and a probability"),
                ));
            }
            let mut key = Vec::with_capacity(n);
            for (i, label) in tokens[..n].iter().enumerate() {
                let Some(pos) = domains[i].iter().position(|v| v == label) else {
                    return Err(Error::parse(
                        line_no,
                        token_column(raw, i),
                        format!(
                            "'{label}' is not a domain value of variable '{}'",
                            variables[i]
                        ),
                    ));
                };
                key.push(pos as u32);
            }
            let value: BigRational = tokens[n + 1].parse().map_err(|_| {
                Error::parse(
                    line_no,
                    token_column(raw, n + 1),
                    format!("malformed probability '{}'", tokens[n + 1]),
                )
            })?;
            if mass.insert(key, value).is_some() {
                return Err(Error::parse(
                    line_no,
                    token_column(raw, 0),
                    "duplicate instantiation",
                ));
            }
        }
        let Some((variables, domains)) = header else {
            return Err(Error::parse(1, 1, "missing 'vars' line"));
        };
        DiscreteDistribution::new(variables, domains, mass)
    }

    /// Canonical text form; [`parse_text`](Self::parse_text) round-trips it.
    pub fn to_text(&self) -> String {
        let mut out = String::from("vars");
        for (v, dom) in self.variables.iter().zip(&self.domains) {
            out.push(' ');
            out.push_str(v.as_str());
            out.push(':');
            out.push_str(&dom.join(","));
        }
        out.push('\n');
        for (key, mass) in &self.mass {
            for (i, (&k, dom)) in key.iter().zip(&self.domains).enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(&dom[k as usize]);
            }
            out.push_str(" : ");
            out.push_str(&mass.to_string());
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for DiscreteDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl IndependenceOracle for DiscreteDistribution {
    fn is_independent(&self, x: &NodeSet, z: &NodeSet, y: &NodeSet) -> Result<bool> {
        ci_holds(self, x, z, y)
    }
}

fn is_plain_token(s: &str) -> bool {
    !s.is_empty()
        && !s
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, ',' | ':' | '#'))
}

fn project(key: &[u32], positions: &[usize]) -> Vec<u32> {
    positions.iter().map(|&i| key[i]).collect()
}

fn concat(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().chain(b).copied().collect()
}

/// Does `I(x ; z ; y)` hold in `p`? Exact test of the factorization
/// `P(x,y,z) * P(z) == P(x,z) * P(y,z)` at every instantiation with
/// `P(z) > 0`, by cross-multiplication in rational arithmetic.
///
/// Only the support is visited: the equation is checked on every jointly
/// supported instantiation, and a per-`z` support count detects the
/// remaining possible violation, a zero joint mass where both pair
/// marginals are positive.
pub fn ci_holds(p: &DiscreteDistribution, x: &NodeSet, z: &NodeSet, y: &NodeSet) -> Result<bool> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Input(
            "outer sets of a query must be nonempty".into(),
        ));
    }
    for (a, b, what) in [(x, z, "x and z"), (x, y, "x and y"), (z, y, "z and y")] {
        if a.intersection(b).next().is_some() {
            return Err(Error::Input(format!("query sets overlap: {what}")));
        }
    }
    let xi = p.index_set(x)?;
    let zi = p.index_set(z)?;
    let yi = p.index_set(y)?;
    let nx = xi.len();
    let ny = yi.len();
    let xz: Vec<usize> = xi.iter().chain(&zi).copied().collect();
    let yz: Vec<usize> = yi.iter().chain(&zi).copied().collect();
    let xyz: Vec<usize> = xi.iter().chain(&yi).chain(&zi).copied().collect();
    let m_z = p.marginal(&zi);
    let m_xz = p.marginal(&xz);
    let m_yz = p.marginal(&yz);
    let m_xyz = p.marginal(&xyz);

    for (key, p_xyz) in &m_xyz {
        let xk = &key[..nx];
        let yk = &key[nx..nx + ny];
        let zk = &key[nx + ny..];
        let p_z = &m_z[zk];
        let p_xz = &m_xz[&concat(xk, zk)];
        let p_yz = &m_yz[&concat(yk, zk)];
        if p_xyz * p_z != p_xz * p_yz {
            return Ok(false);
        }
    }

    let count_by_z = |m: &BTreeMap<Vec<u32>, BigRational>, prefix: usize| {
        let mut counts: BTreeMap<Vec<u32>, u64> = BTreeMap::new();
        for key in m.keys() {
            *counts.entry(key[prefix..].to_vec()).or_insert(0) += 1;
        }
        counts
    };
    let n_xz = count_by_z(&m_xz, nx);
    let n_yz = count_by_z(&m_yz, ny);
    for (zk, &n_joint) in &count_by_z(&m_xyz, nx + ny) {
        if n_xz[zk] * n_yz[zk] != n_joint {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The independence-preserving product of two distributions over the same
/// variable sequence: variable `i`'s domain becomes the Cartesian product of
/// the two component domains (labels joined with `.`), and the mass of a
/// pair-instantiation is the product of the component masses.
///
/// A statement holds in the product exactly when it holds in both factors.
/// The product is strictly positive iff both factors are.
pub fn armstrong_product(
    p1: &DiscreteDistribution,
    p2: &DiscreteDistribution,
) -> Result<DiscreteDistribution> {
    if p1.variables != p2.variables {
        return Err(Error::Input(
            "product requires the same variable sequence in both distributions".into(),
        ));
    }
    let domains: Vec<Vec<String>> = p1
        .domains
        .iter()
        .zip(&p2.domains)
        .map(|(da, db)| {
            let mut dom = Vec::with_capacity(da.len() * db.len());
            for a in da {
                for b in db {
                    dom.push(format!("{a}.{b}"));
                }
            }
            dom
        })
        .collect();
    let widths: Vec<u32> = p2.domains.iter().map(|d| d.len() as u32).collect();
    let mut mass = BTreeMap::new();
    for (k1, m1) in &p1.mass {
        for (k2, m2) in &p2.mass {
            let key: Vec<u32> = k1
                .iter()
                .zip(k2)
                .zip(&widths)
                .map(|((a, b), w)| a * w + b)
                .collect();
            mass.insert(key, m1 * m2);
        }
    }
    DiscreteDistribution::new(p1.variables.clone(), domains, mass)
}

/// Left fold of [`armstrong_product`] over a nonempty sequence. The result
/// satisfies a statement exactly when every input does.
pub fn armstrong_combine(ps: &[DiscreteDistribution]) -> Result<DiscreteDistribution> {
    let (first, rest) = ps
        .split_first()
        .ok_or_else(|| Error::Input("product of an empty distribution sequence".into()))?;
    rest.iter()
        .try_fold(first.clone(), |acc, p| armstrong_product(&acc, p))
}

/// A random distribution that factorizes along `dag`: every node gets a
/// conditional probability table over its parents, with each row drawn as a
/// random point of the simplex at resolution 1/1000, so entries are positive
/// rationals with denominator 1000 and every row sums to exactly one.
///
/// The result is strictly positive, is seeded deterministically (two calls
/// with equal arguments are identical), and by construction satisfies every
/// graphically verified statement of `dag`. Deterministic-node flags are
/// ignored: the tables are strictly positive, never functional.
pub fn random_dag_distribution(
    dag: &Dag,
    seed: u64,
    domain_size: usize,
) -> Result<DiscreteDistribution> {
    if domain_size < 2 {
        return Err(Error::Input(format!(
            "domain size must be at least 2, got {domain_size}"
        )));
    }
    if domain_size > 1000 {
        return Err(Error::Input(format!(
            "domain size is limited to 1000 values, got {domain_size}"
        )));
    }
    let n = dag.node_count();
    let mut joint_size: u128 = 1;
    for _ in 0..n {
        joint_size = joint_size.saturating_mul(domain_size as u128);
        if joint_size > JOINT_TABLE_LIMIT {
            return Err(Error::Resource(format!(
                "joint table over {n} variables of {domain_size} values exceeds {JOINT_TABLE_LIMIT} entries"
            )));
        }
    }
    let d = domain_size;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tables: Vec<Vec<Vec<BigRational>>> = (0..n)
        .map(|i| {
            let rows = d.pow(dag.parent_indices(i).len() as u32);
            (0..rows).map(|_| random_row(&mut rng, d)).collect()
        })
        .collect();

    let mut mass = BTreeMap::new();
    let mut key = vec![0u32; n];
    'all: loop {
        let mut m = BigRational::one();
        for i in 0..n {
            let mut config = 0usize;
            for &p in dag.parent_indices(i) {
                config = config * d + key[p] as usize;
            }
            m *= &tables[i][config][key[i] as usize];
        }
        mass.insert(key.clone(), m);
        let mut pos = 0;
        loop {
            if pos == n {
                break 'all;
            }
            if (key[pos] as usize) < d - 1 {
                key[pos] += 1;
                break;
            }
            key[pos] = 0;
            pos += 1;
        }
    }
    let domains = vec![(0..d).map(|v| v.to_string()).collect::<Vec<String>>(); n];
    DiscreteDistribution::new(dag.nodes().to_vec(), domains, mass)
}

/// One conditional probability row: `d - 1` distinct cut points split 1000
/// mass ticks into `d` positive parts.
fn random_row(rng: &mut ChaCha8Rng, d: usize) -> Vec<BigRational> {
    let mut cuts: Vec<u32> = Vec::with_capacity(d - 1);
    while cuts.len() < d - 1 {
        let c = rng.random_range(1..=999u32);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    let mut parts = Vec::with_capacity(d);
    let mut prev = 0u32;
    for &c in &cuts {
        parts.push(c - prev);
        prev = c;
    }
    parts.push(1000 - prev);
    parts
        .into_iter()
        .map(|p| BigRational::new(BigInt::from(p), BigInt::from(1000u32)))
        .collect()
}

/// A distribution whose exact conditional-independence set equals the
/// d-separation set of `dag` over all disjoint triples — a perfect map.
///
/// Starts from [`random_dag_distribution`] with binary domains and repairs:
/// while some graphically-unverified triple is still satisfied as an
/// independence, search seeds for a factorized distribution violating it and
/// fold that in with [`armstrong_product`]. Every factor satisfies all
/// verified statements, each accepted factor breaks the targeted dependency,
/// and the product's independencies are the intersection of its factors', so
/// the excess shrinks every round.
pub fn perfect_map_distribution(dag: &Dag, seed: u64) -> Result<DiscreteDistribution> {
    perfect_map_distribution_limited(dag, seed, PERFECT_MAP_NODE_LIMIT)
}

/// As [`perfect_map_distribution`] with an explicit node-count limit.
pub fn perfect_map_distribution_limited(
    dag: &Dag,
    seed: u64,
    node_limit: usize,
) -> Result<DiscreteDistribution> {
    let n = dag.node_count();
    if n > node_limit {
        return Err(Error::Resource(format!(
            "perfect-map construction is limited to {node_limit} nodes, graph has {n}"
        )));
    }
    repair_to_perfect_map(dag, seed, REPAIR_SEED_BUDGET)
}

fn repair_to_perfect_map(
    dag: &Dag,
    seed: u64,
    attempt_budget: u64,
) -> Result<DiscreteDistribution> {
    let verified = list_verified_statements(dag, SeparationMode::D)?;
    let dependencies: Vec<CiStatement> = canonical_triples(dag.nodes())
        .into_iter()
        .filter(|t| !verified.contains(t))
        .collect();
    let mut current = random_dag_distribution(dag, seed, 2)?;
    // The product's independencies are the intersection of its factors', so
    // a dependency once violated stays violated; only the shrinking excess
    // needs rechecking after each fold.
    let mut excess = satisfied_statements(&current, &dependencies)?;
    while let Some(target) = excess.first() {
        let index = dependencies
            .iter()
            .position(|t| t == target)
            .expect("excess statements come from the dependency list") as u64;
        let mut repaired = false;
        for attempt in 0..attempt_budget {
            let candidate = random_dag_distribution(dag, derive_seed(seed, index, attempt), 2)?;
            if !ci_holds(&candidate, target.x(), target.z(), target.y())? {
                current = armstrong_product(&current, &candidate)?;
                repaired = true;
                break;
            }
        }
        if !repaired {
            let listing = excess
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(", ");
            return Err(Error::Resource(format!(
                "repair budget of {attempt_budget} seeds exhausted; unrepaired dependencies: {listing}"
            )));
        }
        excess = satisfied_statements(&current, &excess)?;
    }
    for statement in &verified {
        if !ci_holds(&current, statement.x(), statement.z(), statement.y())? {
            return Err(Error::Logic(format!(
                "factorized construction violated the graphically verified statement {statement}"
            )));
        }
    }
    Ok(current)
}

fn satisfied_statements(
    p: &DiscreteDistribution,
    statements: &[CiStatement],
) -> Result<Vec<CiStatement>> {
    let mut out = Vec::new();
    for t in statements {
        if ci_holds(p, t.x(), t.z(), t.y())? {
            out.push(t.clone());
        }
    }
    Ok(out)
}

/// Candidate seed for one repair attempt. A splitmix-style finalizer
/// decorrelates nearby (index, attempt) pairs.
fn derive_seed(base: u64, dependency_index: u64, attempt: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(base ^ mix(dependency_index.wrapping_add(1))) ^ attempt.wrapping_add(1))
}
