use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;

use super::{CodingTree, TreeNode};
use crate::entropy;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// An internal non-root node and the entropy increase of removing it. Heap
/// order puts the smallest delta first, then the smaller id.
#[derive(Debug, Clone, Copy)]
pub struct DeleteCandidate {
    pub delta: f64,
    pub node: u32,
}

impl PartialEq for DeleteCandidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for DeleteCandidate {}

impl PartialOrd for DeleteCandidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DeleteCandidate {
    fn cmp(&self, other: &Self) -> Ordering {
        other.delta.total_cmp(&self.delta).then(other.node.cmp(&self.node))
    }
}

/// Range add, global max.
struct MaxTree {
    size: usize,
    max: Vec<i64>,
    add: Vec<i64>,
}

impl MaxTree {
    fn new(values: &[i64]) -> Self {
        let size = values.len().next_power_of_two().max(1);
        let mut max = vec![i64::MIN / 2; 2 * size];
        max[size..size + values.len()].copy_from_slice(values);
        for i in (1..size).rev() {
            max[i] = max[2 * i].max(max[2 * i + 1]);
        }
        MaxTree { size, max, add: vec![0; 2 * size] }
    }

    fn top(&self) -> i64 {
        self.max[1]
    }

    fn range_add(&mut self, lo: usize, hi: usize, v: i64) {
        self.apply(1, 0, self.size, lo, hi, v);
    }

    fn apply(&mut self, node: usize, l: usize, r: usize, lo: usize, hi: usize, v: i64) {
        if hi <= l || r <= lo {
            return;
        }
        if lo <= l && r <= hi {
            self.max[node] += v;
            self.add[node] += v;
            return;
        }
        let mid = (l + r) / 2;
        self.apply(2 * node, l, mid, lo, hi, v);
        self.apply(2 * node + 1, mid, r, lo, hi, v);
        self.max[node] = self.max[2 * node].max(self.max[2 * node + 1]) + self.add[node];
    }
}

/// Working arena for node deletions.
///
/// Deleted nodes are never unlinked eagerly. A node's current parent is its
/// nearest live ancestor, found by path-compressed jumps. Leaf depths sit in
/// preorder in a range-add max tree, so a delete lowers the removed node's
/// subtree interval by one and the height is the maximum.
pub(crate) struct Compressor {
    nodes: Vec<TreeNode>,
    alive: Vec<bool>,
    up: Vec<u32>,
    span: Vec<(u32, u32)>,
    depths: MaxTree,
    child_g: Vec<u64>,
    total_vol: u64,
    root: u32,
}

impl Compressor {
    pub(crate) fn new(nodes: Vec<TreeNode>, root: u32, total_vol: u64) -> Self {
        let len = nodes.len();
        let mut child_g = vec![0u64; len];
        let mut alive = vec![false; len];
        let mut up = vec![u32::MAX; len];
        let mut span = vec![(0u32, 0u32); len];
        let mut leaf_depth = Vec::new();
        // (node, depth, exiting)
        let mut stack = vec![(root, 0i64, false)];
        while let Some((id, d, exiting)) = stack.pop() {
            let i = id as usize;
            if exiting {
                span[i].1 = leaf_depth.len() as u32;
                continue;
            }
            alive[i] = true;
            span[i].0 = leaf_depth.len() as u32;
            if nodes[i].is_leaf() {
                leaf_depth.push(d);
            }
            stack.push((id, d, true));
            for &c in &nodes[i].children {
                up[c as usize] = id;
                child_g[i] += nodes[c as usize].g;
                stack.push((c, d + 1, false));
            }
        }
        Compressor {
            nodes,
            alive,
            up,
            span,
            depths: MaxTree::new(&leaf_depth),
            child_g,
            total_vol,
            root,
        }
    }

    pub(crate) fn height(&self) -> u32 {
        self.depths.top().max(0) as u32
    }

    fn is_deletable(&self, id: u32) -> bool {
        self.alive[id as usize] && id != self.root && !self.nodes[id as usize].is_leaf()
    }

    pub(crate) fn deletable(&self) -> Vec<u32> {
        (0..self.nodes.len() as u32).filter(|&id| self.is_deletable(id)).collect()
    }

    fn parent(&mut self, id: u32) -> u32 {
        let mut p = self.up[id as usize];
        while !self.alive[p as usize] {
            p = self.up[p as usize];
        }
        let mut x = self.up[id as usize];
        while x != p {
            let next = self.up[x as usize];
            self.up[x as usize] = p;
            x = next;
        }
        self.up[id as usize] = p;
        p
    }

    pub(crate) fn delta(&mut self, id: u32) -> f64 {
        let p = self.parent(id);
        let c = &self.nodes[id as usize];
        entropy::delete_delta(c.g, c.vol, self.child_g[id as usize], self.nodes[p as usize].vol, self.total_vol)
    }

    /// Removes `id`, hanging its children on its parent. Returns the parent.
    pub(crate) fn delete(&mut self, id: u32) -> Result<u32> {
        if !self.is_deletable(id) {
            return Err(Error::InvalidMove(format!("node {id} is not an internal non-root node")));
        }
        let i = id as usize;
        let p = self.parent(id);
        self.child_g[p as usize] = self.child_g[p as usize] + self.child_g[i] - self.nodes[i].g;
        self.alive[i] = false;
        let (lo, hi) = self.span[i];
        self.depths.range_add(lo as usize, hi as usize, -1);
        Ok(p)
    }

    /// Live nodes with parent and child links rewired past deleted ones.
    pub(crate) fn arena(&mut self) -> Vec<TreeNode> {
        let mut nodes = self.nodes.clone();
        for n in &mut nodes {
            n.children.clear();
            n.parent = None;
        }
        for id in 0..nodes.len() as u32 {
            if self.alive[id as usize] && id != self.root {
                let p = self.parent(id);
                nodes[id as usize].parent = Some(p);
                nodes[p as usize].children.push(id);
            }
        }
        nodes
    }

    pub(crate) fn into_tree(mut self, vertex_count: usize) -> CodingTree {
        let nodes = self.arena();
        CodingTree::compact(&nodes, &self.alive, self.root, vertex_count)
    }
}

/// Removes the cheapest node until the height is at most `k`.
///
/// A node's delete delta never decreases while others are removed: its
/// parent only gets larger and removing one of its children only adds cut
/// to its children's total. Heap entries are therefore lower bounds and are
/// re-priced on pop.
pub(crate) fn compress_greedy(arena: Vec<TreeNode>, root: u32, graph: &Graph, k: u32) -> CodingTree {
    let mut c = Compressor::new(arena, root, graph.volume());
    let merge_height = c.height();
    let mut heap: BinaryHeap<DeleteCandidate> = c
        .deletable()
        .into_iter()
        .map(|node| DeleteCandidate { delta: c.delta(node), node })
        .collect();
    while c.height() > k {
        let best = heap.pop().expect("an internal non-root node exists while height > k");
        if !c.alive[best.node as usize] {
            continue;
        }
        let fresh = DeleteCandidate { delta: c.delta(best.node), node: best.node };
        if fresh != best {
            debug_assert!(fresh < best, "delete deltas only grow");
            heap.push(fresh);
            continue;
        }
        c.delete(best.node).expect("candidate is deletable");
    }
    c.into_tree(graph.node_count()).with_heights(k, merge_height)
}

/// Removes uniformly random internal non-root nodes until the height is at
/// most `k`.
pub(crate) fn compress_random<R: Rng>(arena: Vec<TreeNode>, root: u32, graph: &Graph, k: u32, rng: &mut R) -> CodingTree {
    let mut c = Compressor::new(arena, root, graph.volume());
    let merge_height = c.height();
    let mut pool = c.deletable();
    while c.height() > k {
        let node = pool.swap_remove(rng.gen_range(0..pool.len()));
        c.delete(node).expect("pool holds deletable nodes");
    }
    c.into_tree(graph.node_count()).with_heights(k, merge_height)
}

/// Removes internal node `child` from `tree`, attaching its children to
/// `parent`.
///
/// The returned tree is re-compacted, so internal node ids may change.
pub fn delete(tree: &CodingTree, parent: u32, child: u32) -> Result<CodingTree> {
    if child as usize >= tree.len() || parent as usize >= tree.len() {
        return Err(Error::InvalidMove(format!("node {child} or {parent} is out of range")));
    }
    if tree.node(child).parent != Some(parent) {
        return Err(Error::InvalidMove(format!("node {parent} is not the parent of {child}")));
    }
    let total_vol = tree.node(tree.root()).vol;
    let mut c = Compressor::new(tree.nodes().to_vec(), tree.root(), total_vol);
    c.delete(child)?;
    Ok(c.into_tree(tree.leaf_count()).with_heights(tree.target_height(), tree.merge_height()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{entropy_of_tree, tree_delete_delta};
    use crate::tree::build_coding_tree;

    fn ladder() -> Graph {
        // 2 x 5 grid
        let mut e = Vec::new();
        for i in 0..5u32 {
            e.push((i, i + 5));
            if i < 4 {
                e.push((i, i + 1));
                e.push((i + 5, i + 6));
            }
        }
        Graph::new(10, e, None).unwrap()
    }

    #[test]
    fn deleting_every_internal_node_gives_star() {
        let g = ladder();
        let mut t = build_coding_tree(&g, 9, 1).unwrap();
        while t.internal_count() > 1 {
            let before = entropy_of_tree(&g, &t).unwrap();
            let internal = t.internal_count();
            let id = t.nodes().iter().position(|n| !n.is_leaf() && n.parent.is_some()).unwrap() as u32;
            let p = t.node(id).parent.unwrap();
            let d = tree_delete_delta(&t, p, id).unwrap();
            t = delete(&t, p, id).unwrap();
            t.validate(&g).unwrap();
            assert_eq!(t.internal_count(), internal - 1);
            let after = entropy_of_tree(&g, &t).unwrap();
            assert!((after - before - d).abs() < 1e-12);
        }
        let star = CodingTree::star(&g);
        assert_eq!(t.height(), 1);
        assert_eq!(t.nodes(), star.nodes());
    }

    #[test]
    fn delete_rejects_bad_moves() {
        let g = ladder();
        let t = build_coding_tree(&g, 3, 0).unwrap();
        assert!(delete(&t, t.node(0).parent.unwrap(), 0).is_err());
        assert!(delete(&t, 0, t.root()).is_err());
    }

    #[test]
    fn height_tracking_matches_recompute() {
        let g = ladder();
        let t = build_coding_tree(&g, 20, 3).unwrap();
        let mut c = Compressor::new(t.nodes().to_vec(), t.root(), g.volume());
        let mut pool = c.deletable();
        while let Some(id) = pool.pop() {
            c.delete(id).unwrap();
            let mut fresh = Compressor::new(c.arena(), c.root, g.volume());
            assert_eq!(c.height(), fresh.height());
            for id in 0..c.nodes.len() as u32 {
                if c.is_deletable(id) {
                    assert_eq!(c.child_g[id as usize], fresh.child_g[id as usize]);
                    assert_eq!(c.delta(id), fresh.delta(id));
                }
            }
        }
        assert_eq!(c.height(), 1);
    }

    #[test]
    fn max_tree_range_updates() {
        let mut m = MaxTree::new(&[3, 1, 4, 1, 5]);
        assert_eq!(m.top(), 5);
        m.range_add(3, 5, -2);
        assert_eq!(m.top(), 4);
        m.range_add(0, 3, -1);
        assert_eq!(m.top(), 3);
        m.range_add(4, 5, 10);
        assert_eq!(m.top(), 13);
    }
}
