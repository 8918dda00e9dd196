//! Tuple encoding of ordered rooted trees and its bijections to ordered trees
//! and to monotone lattice paths.
//!
//! A tuple `t = (t_1, ..., t_n)` lists the number of children of every node of
//! an ordered tree in preorder. Read as relative column heights it also
//! describes a lattice path from `(0, 0)` to `(n-1, n-1)` that never drops
//! below the diagonal.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Upper bound on `n` accepted by [`enumerate_tuples`].
pub const MAX_ENUMERATION_NODES: usize = 15;

/// Which side of the diagonal a path lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    #[default]
    Above,
    Below,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Above => "above",
            Side::Below => "below",
        }
    }

    /// Maps above-diagonal coordinates onto this side.
    #[inline]
    pub fn orient(self, x: usize, y: usize) -> (usize, usize) {
        match self {
            Side::Above => (x, y),
            Side::Below => (y, x),
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "above" => Ok(Side::Above),
            "below" => Ok(Side::Below),
            other => Err(format!("unknown side `{other}` (expected above|below)")),
        }
    }
}

/// The first invariant a candidate tuple breaks. Indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TupleViolation {
    #[error("tuple is empty")]
    Empty,
    #[error("entry t_{index} = {value} lies outside [0, {max}]")]
    EntryOutOfRange { index: usize, value: usize, max: usize },
    #[error("last entry must be 0, found {0}")]
    NonZeroTerminal(usize),
    #[error("entries sum to {sum}, expected {expected}")]
    WrongSum { sum: usize, expected: usize },
    #[error("prefix sum {sum} at position {index} is below {index}")]
    PrefixBelowDiagonal { index: usize, sum: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("invalid tuple: {0}")]
    InvalidTuple(#[from] TupleViolation),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid tree: {0}")]
    InvalidTree(String),
    #[error("enumeration supports 2 <= n <= {MAX_ENUMERATION_NODES}, got {0}")]
    EnumerationRange(usize),
    #[error("cannot parse tuple: {0}")]
    Parse(String),
}

/// Checks the three tuple invariants in order: entry range with terminal zero,
/// total edge count, then the prefix (above-diagonal) condition.
pub fn validate_tuple(entries: &[usize]) -> Result<(), TupleViolation> {
    let n = entries.len();
    if n == 0 {
        return Err(TupleViolation::Empty);
    }
    for (i, &t) in entries.iter().enumerate() {
        if t > n - 1 {
            return Err(TupleViolation::EntryOutOfRange { index: i + 1, value: t, max: n - 1 });
        }
    }
    if entries[n - 1] != 0 {
        return Err(TupleViolation::NonZeroTerminal(entries[n - 1]));
    }
    let sum: usize = entries.iter().sum();
    if sum != n - 1 {
        return Err(TupleViolation::WrongSum { sum, expected: n - 1 });
    }
    let mut prefix = 0;
    for (i, &t) in entries.iter().enumerate().take(n - 1) {
        prefix += t;
        if prefix < i + 1 {
            return Err(TupleViolation::PrefixBelowDiagonal { index: i + 1, sum: prefix });
        }
    }
    Ok(())
}

/// A validated preorder child-count sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct TreeTuple(Vec<usize>);

impl TreeTuple {
    pub fn new(entries: Vec<usize>) -> Result<Self, TupleViolation> {
        validate_tuple(&entries)?;
        Ok(Self(entries))
    }

    /// Skips validation; callers must already hold a valid sequence.
    pub(crate) fn from_trusted(entries: Vec<usize>) -> Self {
        debug_assert!(validate_tuple(&entries).is_ok(), "{entries:?}");
        Self(entries)
    }

    /// The staircase `(1, 1, ..., 1, 0)` hugging the diagonal.
    pub fn staircase(n: usize) -> Self {
        assert!(n >= 1);
        let mut v = vec![1; n];
        v[n - 1] = 0;
        Self(v)
    }

    /// The L-shape `(n-1, 0, ..., 0)`.
    pub fn l_shape(n: usize) -> Self {
        assert!(n >= 1);
        let mut v = vec![0; n];
        v[0] = n - 1;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<usize> {
        self.0
    }

    /// Comma-separated form used in tuple listings, e.g. `1,1,0`.
    pub fn to_line(&self) -> String {
        let parts: Vec<String> = self.0.iter().map(|t| t.to_string()).collect();
        parts.join(",")
    }

    pub fn parse_line(line: &str) -> Result<Self, CodecError> {
        let entries = line
            .trim()
            .split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|e| CodecError::Parse(format!("`{s}`: {e}"))))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::new(entries)?)
    }
}

impl TryFrom<Vec<usize>> for TreeTuple {
    type Error = TupleViolation;

    fn try_from(v: Vec<usize>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<TreeTuple> for Vec<usize> {
    fn from(t: TreeTuple) -> Self {
        t.0
    }
}

impl fmt::Display for TreeTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_line())
    }
}

/// Node coordinates of a monotone lattice path.
///
/// The polyline starts at the origin and then visits the top of every column:
/// `(0, 0), (0, Y_1), (1, Y_2), ..., (n-1, Y_n)` with `Y_i` the prefix sums of
/// the tuple. Below-diagonal paths store the same nodes with `x` and `y`
/// swapped.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticePath {
    nodes: Vec<(usize, usize)>,
    side: Side,
}

impl LatticePath {
    /// Validates node geometry; see [`path_to_tuple`] for the rules.
    pub fn new(nodes: Vec<(usize, usize)>, side: Side) -> Result<Self, CodecError> {
        let path = Self { nodes, side };
        path_to_tuple(&path)?;
        Ok(path)
    }

    pub fn nodes(&self) -> &[(usize, usize)] {
        &self.nodes
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Number of tree nodes `n` encoded by the path (one less than the
    /// polyline's node count).
    pub fn tree_size(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn endpoint(&self) -> (usize, usize) {
        *self.nodes.last().expect("paths always hold the origin")
    }

    /// JSON array of `[x, y]` pairs.
    pub fn to_json(&self) -> String {
        let pairs: Vec<[usize; 2]> = self.nodes.iter().map(|&(x, y)| [x, y]).collect();
        serde_json::to_string(&pairs).expect("integer pairs always serialize")
    }

    /// Parses a JSON array of `[x, y]` pairs; the side is inferred from the
    /// first column-top node.
    pub fn from_json(text: &str) -> Result<Self, CodecError> {
        let pairs: Vec<[usize; 2]> =
            serde_json::from_str(text).map_err(|e| CodecError::Parse(e.to_string()))?;
        let nodes: Vec<(usize, usize)> = pairs.into_iter().map(|[x, y]| (x, y)).collect();
        let side = match nodes.get(1) {
            Some(&(x, y)) if x > y => Side::Below,
            _ => Side::Above,
        };
        Self::new(nodes, side)
    }
}

/// Builds the lattice path of a valid tuple.
pub fn tuple_to_path(t: &TreeTuple, side: Side) -> LatticePath {
    let mut nodes = Vec::with_capacity(t.len() + 1);
    nodes.push((0, 0));
    let mut height = 0;
    for (i, &step) in t.entries().iter().enumerate() {
        height += step;
        nodes.push(side.orient(i, height));
    }
    LatticePath { nodes, side }
}

/// Recovers the tuple from a path, rejecting any geometry that is not the
/// image of a valid tuple on the path's side.
pub fn path_to_tuple(p: &LatticePath) -> Result<TreeTuple, CodecError> {
    let bad = |msg: String| CodecError::InvalidPath(msg);
    if p.nodes.len() < 2 {
        return Err(bad("a path needs the origin and at least one column".into()));
    }
    if p.nodes[0] != (0, 0) {
        return Err(bad(format!("path starts at {:?}, not the origin", p.nodes[0])));
    }
    let n = p.nodes.len() - 1;
    let mut entries = Vec::with_capacity(n);
    let mut prev_height = 0;
    for (i, &node) in p.nodes[1..].iter().enumerate() {
        // Back to above-diagonal orientation; `orient` is its own inverse.
        let (x, y) = p.side.orient(node.0, node.1);
        if x != i {
            return Err(bad(format!("node {} has column {x}, expected {i}", i + 1)));
        }
        if y < prev_height {
            return Err(bad(format!("node {} descends from {prev_height} to {y}", i + 1)));
        }
        if y < x {
            return Err(bad(format!("node {:?} lies on the wrong side of the diagonal", node)));
        }
        entries.push(y - prev_height);
        prev_height = y;
    }
    if p.side.orient(n - 1, prev_height) != p.endpoint() || prev_height != n - 1 {
        let last = n - 1;
        return Err(bad(format!("path ends at {:?}, expected ({last}, {last})", p.endpoint())));
    }
    Ok(TreeTuple::new(entries)?)
}

/// One node of an ordered tree, stored in preorder.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeNode {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// An ordered rooted tree with nodes indexed in preorder; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OrderedTree {
    nodes: Vec<TreeNode>,
}

impl OrderedTree {
    /// Builds a tree from parent links (`None` for the root). Children are
    /// ordered by index. Nodes must already be numbered in preorder.
    pub fn from_parents(parents: &[Option<usize>]) -> Result<Self, CodecError> {
        let bad = |msg: String| CodecError::InvalidTree(msg);
        if parents.is_empty() {
            return Err(bad("tree has no nodes".into()));
        }
        if parents[0].is_some() {
            return Err(bad("node 0 must be the root".into()));
        }
        let mut nodes: Vec<TreeNode> =
            parents.iter().map(|&p| TreeNode { parent: p, children: Vec::new() }).collect();
        for (i, &p) in parents.iter().enumerate().skip(1) {
            match p {
                None => return Err(bad(format!("node {i} is a second root"))),
                Some(p) if p >= i => {
                    return Err(bad(format!("node {i} has parent {p}, not earlier in preorder")))
                }
                Some(p) => nodes[p].children.push(i),
            }
        }
        let tree = Self { nodes };
        if tree.preorder() != (0..tree.len()).collect::<Vec<_>>() {
            return Err(bad("node numbering is not a preorder".into()));
        }
        Ok(tree)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.iter().map(|n| n.children.len()).sum()
    }

    pub fn parents(&self) -> Vec<Option<usize>> {
        self.nodes.iter().map(|n| n.parent).collect()
    }

    /// Preorder traversal by explicit stack.
    pub fn preorder(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(self.nodes[v].children.iter().rev());
        }
        order
    }
}

/// Stack construction: each node attaches to the nearest open ancestor and,
/// if it expects children, becomes the new stack top.
pub fn tuple_to_tree(t: &TreeTuple) -> OrderedTree {
    let n = t.len();
    let mut nodes: Vec<TreeNode> = Vec::with_capacity(n);
    // (node index, children still to attach)
    let mut open: Vec<(usize, usize)> = Vec::new();
    for (i, &count) in t.entries().iter().enumerate() {
        let parent = open.last_mut().map(|(p, remaining)| {
            *remaining -= 1;
            *p
        });
        if let Some(p) = parent {
            nodes[p].children.push(i);
        }
        nodes.push(TreeNode { parent, children: Vec::with_capacity(count) });
        while matches!(open.last(), Some(&(_, 0))) {
            open.pop();
        }
        if count > 0 {
            open.push((i, count));
        }
    }
    debug_assert!(open.is_empty());
    OrderedTree { nodes }
}

/// Child counts in preorder.
pub fn tree_to_tuple(tree: &OrderedTree) -> TreeTuple {
    let entries = tree.preorder().into_iter().map(|v| tree.nodes[v].children.len()).collect();
    TreeTuple::from_trusted(entries)
}

/// Every valid tuple of length `n`, in lexicographic order.
pub fn enumerate_tuples(n: usize) -> Result<Vec<TreeTuple>, CodecError> {
    if !(2..=MAX_ENUMERATION_NODES).contains(&n) {
        return Err(CodecError::EnumerationRange(n));
    }
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(n);
    extend_tuples(n, 0, &mut prefix, &mut out);
    Ok(out)
}

fn extend_tuples(n: usize, sum: usize, prefix: &mut Vec<usize>, out: &mut Vec<TreeTuple>) {
    let i = prefix.len() + 1;
    if i == n {
        prefix.push(0);
        out.push(TreeTuple::from_trusted(prefix.clone()));
        prefix.pop();
        return;
    }
    // The prefix through position i must reach i without exceeding n - 1.
    let lo = i.saturating_sub(sum);
    for t in lo..=(n - 1 - sum) {
        prefix.push(t);
        extend_tuples(n, sum + t, prefix, out);
        prefix.pop();
    }
}

/// Catalan number `C_k` computed exactly in `u128`.
pub fn catalan(k: u32) -> u128 {
    let mut c: u128 = 1;
    for i in 0..k as u128 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}
