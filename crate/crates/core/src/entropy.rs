//! Structural entropy of a graph on a coding tree, in bits, and the closed
//! forms for how a merge or a delete changes it.
//!
//! Each non-root node `x` contributes `-(g_x / vol(V)) * log2(vol_x / vol_parent(x))`.

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::tree::CodingTree;

/// Per-node contributions and their total, in bits.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyTerms {
    /// Indexed by tree node id; the root entry is 0.
    pub per_node: Vec<f64>,
    pub total: f64,
}

/// Contribution of one node with cut `g` and volume `vol` under a parent of
/// volume `parent_vol`.
#[inline]
pub fn node_term(g: u64, vol: u64, parent_vol: u64, total_vol: u64) -> f64 {
    if g == 0 || vol == parent_vol {
        return 0.0;
    }
    -(g as f64 / total_vol as f64) * (vol as f64 / parent_vol as f64).log2()
}

pub fn entropy_terms(graph: &Graph, tree: &CodingTree) -> Result<EntropyTerms> {
    if tree.leaf_count() != graph.node_count() {
        return Err(Error::InvalidTree(format!(
            "{} leaves for {} graph vertices",
            tree.leaf_count(),
            graph.node_count()
        )));
    }
    #[cfg(debug_assertions)]
    tree.validate(graph)?;

    let total_vol = graph.volume();
    let mut per_node = vec![0.0; tree.len()];
    if total_vol == 0 {
        // a single isolated vertex: every cut is empty
        return Ok(EntropyTerms { per_node, total: 0.0 });
    }
    for (id, node) in tree.nodes().iter().enumerate() {
        let Some(p) = node.parent else { continue };
        if node.vol == 0 {
            return Err(Error::InvalidTree(format!("node {id} has zero volume (isolated vertex)")));
        }
        per_node[id] = node_term(node.g, node.vol, tree.node(p).vol, total_vol);
    }
    let total = per_node.iter().sum();
    Ok(EntropyTerms { per_node, total })
}

pub fn entropy_of_tree(graph: &Graph, tree: &CodingTree) -> Result<f64> {
    entropy_terms(graph, tree).map(|t| t.total)
}

/// Change in entropy when two root children `i`, `j` get a new common parent
/// `w` under the root.
///
/// The terms of `i` and `j` under the root are replaced by `w`'s term and
/// their terms under `w`; with `g_w = g_i + g_j - 2 cut` this telescopes to
/// `(2 cut / vol(V)) * log2(vol_w / vol(V))`, which is never positive and is
/// exactly zero for `cut == 0`.
#[inline]
pub fn merge_delta(vol_i: u64, vol_j: u64, cut: u64, total_vol: u64) -> f64 {
    if cut == 0 {
        return 0.0;
    }
    let vol_w = vol_i + vol_j;
    (2 * cut) as f64 / total_vol as f64 * (vol_w as f64 / total_vol as f64).log2()
}

/// Change in entropy when `child` (volume `vol_child`, cut `g_child`) is
/// removed and its children, whose cuts sum to `children_g`, are attached to
/// its parent of volume `vol_parent`.
///
/// The child's own term disappears and every grandchild's parent volume goes
/// from `vol_child` to `vol_parent`, which gives
/// `((children_g - g_child) / vol(V)) * log2(vol_parent / vol_child) >= 0`.
#[inline]
pub fn delete_delta(g_child: u64, vol_child: u64, children_g: u64, vol_parent: u64, total_vol: u64) -> f64 {
    debug_assert!(children_g >= g_child);
    if vol_child == vol_parent || children_g == g_child {
        return 0.0;
    }
    (children_g - g_child) as f64 / total_vol as f64 * (vol_parent as f64 / vol_child as f64).log2()
}

/// [`delete_delta`] for a node of a finished tree.
pub fn tree_delete_delta(tree: &CodingTree, parent: u32, child: u32) -> Result<f64> {
    let c = tree.node(child);
    if c.is_leaf() {
        return Err(Error::InvalidMove(format!("node {child} is a leaf")));
    }
    if c.parent != Some(parent) {
        return Err(Error::InvalidMove(format!("node {parent} is not the parent of {child}")));
    }
    let children_g = c.children.iter().map(|&u| tree.node(u).g).sum();
    let total = tree.node(tree.root()).vol;
    Ok(delete_delta(c.g, c.vol, children_g, tree.node(parent).vol, total))
}
