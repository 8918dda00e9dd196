#![allow(dead_code)]

use proptest::prelude::*;

/// Parent links of a random ordered tree in preorder. Node `i` attaches to a
/// node on the current rightmost branch chosen by `choices[i - 1]`; every
/// ordered tree arises this way.
pub fn parents_from_choices(choices: &[usize]) -> Vec<Option<usize>> {
    let mut parents = vec![None];
    let mut branch = vec![0usize];
    for (k, &c) in choices.iter().enumerate() {
        let node = k + 1;
        let depth = c % branch.len();
        parents.push(Some(branch[depth]));
        branch.truncate(depth + 1);
        branch.push(node);
    }
    parents
}

/// Child counts in index order.
pub fn child_counts(parents: &[Option<usize>]) -> Vec<usize> {
    let mut counts = vec![0; parents.len()];
    for p in parents.iter().flatten() {
        counts[*p] += 1;
    }
    counts
}

/// Random valid tuple with `2..=max_n` entries.
pub fn tuple_strategy(max_n: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(any::<usize>(), 1..max_n).prop_map(|c| child_counts(&parents_from_choices(&c)))
}

/// Column-top polyline computed from scratch.
pub fn polyline(tuple: &[usize]) -> Vec<(usize, usize)> {
    let mut nodes = vec![(0, 0)];
    let mut y = 0;
    for (i, t) in tuple.iter().enumerate() {
        y += t;
        nodes.push((i, y));
    }
    nodes
}

/// Every lattice node walked by the path: vertical rise in each column,
/// then the unit step to the next column.
pub fn walked_nodes(tuple: &[usize]) -> Vec<(usize, usize)> {
    let mut nodes = Vec::new();
    let mut y = 0;
    for (x, t) in tuple.iter().enumerate() {
        for h in y..=y + t {
            nodes.push((x, h));
        }
        y += t;
    }
    nodes
}
