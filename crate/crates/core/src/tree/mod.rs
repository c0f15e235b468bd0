//! Coding trees: construction by greedy structural entropy minimization,
//! height compression, the random balanced baseline and depth
//! canonicalization.

mod build;
mod canon;
mod compress;
mod rbbt;

pub use build::{build_coding_tree, vertex_ranks, MergeCandidate, PartitionState};
pub(crate) use build::mix64;
pub use canon::canonicalize_depth;
pub use compress::{delete, DeleteCandidate};
pub use rbbt::build_rbbt;

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// One node of a coding tree. A node stands for the set of graph vertices
/// under it and caches that set's volume and cut size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub parent: Option<u32>,
    pub children: Vec<u32>,
    /// Sum of degrees of the vertices below.
    pub vol: u64,
    /// Number of graph edges with exactly one endpoint below.
    pub g: u64,
    /// Height above the leaves (0 for leaves).
    pub level: u32,
    /// Graph vertex, for leaves only.
    pub vertex: Option<u32>,
}

impl TreeNode {
    pub(crate) fn leaf(vertex: u32, degree: u64) -> Self {
        TreeNode {
            parent: None,
            children: Vec::new(),
            vol: degree,
            g: degree,
            level: 0,
            vertex: Some(vertex),
        }
    }

    pub(crate) fn internal(children: Vec<u32>, vol: u64, g: u64) -> Self {
        TreeNode {
            parent: None,
            children,
            vol,
            g,
            level: 0,
            vertex: None,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// A rooted tree whose leaves are exactly the vertices of a graph.
///
/// Nodes live in a compact arena in a fixed order: leaves first by vertex
/// id, then internal nodes by ascending level, the root last. Children are
/// always listed in ascending id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingTree {
    nodes: Vec<TreeNode>,
    root: u32,
    height: u32,
    target_height: u32,
    merge_height: u32,
}

impl CodingTree {
    /// Root with every vertex as a direct child.
    pub fn star(graph: &Graph) -> Self {
        let n = graph.node_count();
        let mut nodes: Vec<TreeNode> = (0..n)
            .map(|v| TreeNode::leaf(v as u32, graph.degree(v) as u64))
            .collect();
        let root = n as u32;
        for node in &mut nodes {
            node.parent = Some(root);
        }
        let mut r = TreeNode::internal((0..n as u32).collect(), graph.volume(), 0);
        r.level = 1;
        nodes.push(r);
        CodingTree {
            nodes,
            root,
            height: 1,
            target_height: 1,
            merge_height: 1,
        }
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: u32) -> &TreeNode {
        &self.nodes[id as usize]
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// The `k` the tree was built for.
    pub fn target_height(&self) -> u32 {
        self.target_height
    }

    /// Height of the full binary tree reached before compression.
    pub fn merge_height(&self) -> u32 {
        self.merge_height
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn internal_count(&self) -> usize {
        self.nodes.len() - self.leaf_count()
    }

    /// Leaves are stored first, so vertex `v` is node `v`.
    pub fn leaf_of_vertex(&self, v: u32) -> u32 {
        v
    }

    pub fn depths(&self) -> Vec<u32> {
        // parents always have larger ids than their children
        let mut depth = vec![0u32; self.nodes.len()];
        for id in (0..self.nodes.len()).rev() {
            if let Some(p) = self.nodes[id].parent {
                depth[id] = depth[p as usize] + 1;
            }
        }
        depth
    }

    /// Every leaf sits at depth `height`.
    pub fn is_canonical(&self) -> bool {
        let depth = self.depths();
        self.nodes
            .iter()
            .zip(&depth)
            .all(|(n, &d)| !n.is_leaf() || d == self.height)
    }

    /// Node count at each level `0..=height`.
    pub fn level_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.height as usize + 1];
        for n in &self.nodes {
            sizes[n.level as usize] += 1;
        }
        sizes
    }

    /// Checks structure, the leaf/vertex bijection and the cached vol/g
    /// values against a recount from `graph`.
    pub fn validate(&self, graph: &Graph) -> Result<()> {
        let n = graph.node_count();
        if self.leaf_count() != n {
            return Err(Error::InvalidTree(format!(
                "{} leaves for {} graph vertices",
                self.leaf_count(),
                n
            )));
        }
        for (id, node) in self.nodes.iter().enumerate() {
            if id < n {
                if node.vertex != Some(id as u32) || !node.is_leaf() {
                    return Err(Error::InvalidTree(format!("node {id} is not the leaf of vertex {id}")));
                }
            } else if node.vertex.is_some() || node.is_leaf() {
                return Err(Error::InvalidTree(format!("node {id} should be internal")));
            }
            for &c in &node.children {
                if self.nodes[c as usize].parent != Some(id as u32) {
                    return Err(Error::InvalidTree(format!("child {c} of {id} has another parent")));
                }
            }
        }
        let (vol, g) = recount_caches(&self.nodes, self.root, graph);
        for (id, node) in self.nodes.iter().enumerate() {
            if node.vol != vol[id] || node.g != g[id] {
                return Err(Error::InvalidTree(format!(
                    "node {id} caches vol={} g={}, recount gives vol={} g={}",
                    node.vol, node.g, vol[id], g[id]
                )));
            }
        }
        Ok(())
    }

    /// Line-oriented export: a header `n k entropy`, then one line per node
    /// `id parent level vol g [vertex]`, with parent `-1` for the root.
    pub fn to_text(&self, entropy: f64) -> String {
        let mut out = String::new();
        writeln!(out, "{} {} {:?}", self.leaf_count(), self.target_height, entropy).unwrap();
        for (id, node) in self.nodes.iter().enumerate() {
            let parent = node.parent.map_or(-1, |p| p as i64);
            write!(out, "{id} {parent} {} {} {}", node.level, node.vol, node.g).unwrap();
            if let Some(v) = node.vertex {
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Inverse of [`CodingTree::to_text`]; returns the tree and the entropy
    /// stored in the header.
    pub fn from_text(text: &str) -> Result<(CodingTree, f64)> {
        let bad = |line: usize, msg: String| Error::InvalidTree(format!("line {line}: {msg}"));
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty tree file".into()))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 3 {
            return Err(bad(1, format!("expected header \"n k entropy\", found {header:?}")));
        }
        let n: usize = head[0].parse().map_err(|_| bad(1, "bad leaf count".into()))?;
        let k: u32 = head[1].parse().map_err(|_| bad(1, "bad k".into()))?;
        let entropy: f64 = head[2].parse().map_err(|_| bad(1, "bad entropy".into()))?;

        let mut nodes = Vec::new();
        for (i, line) in lines {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 5 && f.len() != 6 {
                return Err(bad(i + 1, format!("expected 5 or 6 fields, found {}", f.len())));
            }
            let num = |s: &str| -> Result<i64> { s.parse().map_err(|_| bad(i + 1, format!("bad number {s:?}"))) };
            let id = num(f[0])?;
            if id != nodes.len() as i64 {
                return Err(bad(i + 1, format!("expected node id {}, found {id}", nodes.len())));
            }
            let parent = num(f[1])?;
            let (level, vol, g) = (num(f[2])?, num(f[3])?, num(f[4])?);
            if level < 0 || vol < 0 || g < 0 || parent < -1 {
                return Err(bad(i + 1, "negative field".into()));
            }
            let vertex = if f.len() == 6 { Some(num(f[5])? as u32) } else { None };
            nodes.push(TreeNode {
                parent: (parent >= 0).then_some(parent as u32),
                children: Vec::new(),
                vol: vol as u64,
                g: g as u64,
                level: level as u32,
                vertex,
            });
        }
        let total = nodes.len();
        let mut root = None;
        for id in 0..total {
            match nodes[id].parent {
                None if root.is_some() => return Err(Error::InvalidTree("more than one root".into())),
                None => root = Some(id as u32),
                Some(p) if p as usize >= total || p as usize <= id => {
                    return Err(Error::InvalidTree(format!("node {id} has invalid parent {p}")))
                }
                Some(p) => nodes[p as usize].children.push(id as u32),
            }
        }
        let root = root.ok_or_else(|| Error::InvalidTree("no root".into()))?;
        for (id, node) in nodes.iter().enumerate() {
            let leaf = node.is_leaf();
            if leaf != (id < n) || leaf != (node.vertex == Some(id as u32)) {
                return Err(Error::InvalidTree(format!("node {id}: leaves must be nodes 0..{n} in vertex order")));
            }
            let expected = node
                .children
                .iter()
                .map(|&c| nodes[c as usize].level + 1)
                .max()
                .unwrap_or(0);
            if node.level != expected {
                return Err(Error::InvalidTree(format!("node {id}: level {} should be {expected}", node.level)));
            }
        }
        if nodes.len() > 1 && nodes[root as usize].is_leaf() {
            return Err(Error::InvalidTree("root is a leaf".into()));
        }
        let height = nodes[root as usize].level;
        Ok((
            CodingTree {
                nodes,
                root,
                height,
                target_height: k,
                merge_height: height,
            },
            entropy,
        ))
    }

    pub(crate) fn with_heights(mut self, target: u32, merge_height: u32) -> Self {
        self.target_height = target;
        self.merge_height = merge_height;
        self
    }

    /// Rebuilds the compact, ordered form from a working arena where some
    /// nodes may be dead.
    pub(crate) fn compact(arena: &[TreeNode], alive: &[bool], root: u32, vertex_count: usize) -> CodingTree {
        let order = postorder(arena, root);
        let mut sub_height = vec![0u32; arena.len()];
        for &id in &order {
            sub_height[id as usize] = arena[id as usize]
                .children
                .iter()
                .map(|&c| sub_height[c as usize] + 1)
                .max()
                .unwrap_or(0);
        }
        let mut internal: Vec<u32> = order
            .iter()
            .copied()
            .filter(|&id| alive[id as usize] && !arena[id as usize].is_leaf())
            .collect();
        internal.sort_by_key(|&id| (sub_height[id as usize], id));

        let mut new_id = vec![u32::MAX; arena.len()];
        let mut old_of_new = vec![0u32; vertex_count];
        for &id in &order {
            if let Some(v) = arena[id as usize].vertex {
                new_id[id as usize] = v;
                old_of_new[v as usize] = id;
            }
        }
        for (i, &id) in internal.iter().enumerate() {
            new_id[id as usize] = (vertex_count + i) as u32;
        }
        old_of_new.extend_from_slice(&internal);

        let nodes = old_of_new
            .iter()
            .map(|&old| {
                let src = &arena[old as usize];
                let mut children: Vec<u32> = src.children.iter().map(|&c| new_id[c as usize]).collect();
                children.sort_unstable();
                TreeNode {
                    parent: src.parent.map(|p| new_id[p as usize]),
                    children,
                    vol: src.vol,
                    g: src.g,
                    level: sub_height[old as usize],
                    vertex: src.vertex,
                }
            })
            .collect::<Vec<_>>();
        let height = sub_height[root as usize];
        CodingTree {
            root: new_id[root as usize],
            nodes,
            height,
            target_height: height,
            merge_height: height,
        }
    }
}

/// Children before parents.
pub(crate) fn postorder(arena: &[TreeNode], root: u32) -> Vec<u32> {
    let mut pre = Vec::with_capacity(arena.len());
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        pre.push(id);
        stack.extend(arena[id as usize].children.iter().rev());
    }
    pre.reverse();
    pre
}

/// Recomputes vol and g for every node reachable from `root`. An edge
/// crosses exactly the nodes strictly below the lowest common ancestor of
/// its endpoints' leaves.
pub(crate) fn recount_caches(arena: &[TreeNode], root: u32, graph: &Graph) -> (Vec<u64>, Vec<u64>) {
    let len = arena.len();
    let mut leaf = vec![u32::MAX; graph.node_count()];
    let mut depth = vec![0u32; len];
    let mut vol = vec![0u64; len];
    let mut g = vec![0u64; len];
    let mut stack = vec![root];
    while let Some(id) = stack.pop() {
        let node = &arena[id as usize];
        if let Some(v) = node.vertex {
            leaf[v as usize] = id;
        }
        for &c in &node.children {
            depth[c as usize] = depth[id as usize] + 1;
            stack.push(c);
        }
    }
    for id in postorder(arena, root) {
        let node = &arena[id as usize];
        vol[id as usize] = match node.vertex {
            Some(v) => graph.degree(v as usize) as u64,
            None => node.children.iter().map(|&c| vol[c as usize]).sum(),
        };
    }
    for &(u, v) in graph.edges() {
        let (mut a, mut b) = (leaf[u as usize], leaf[v as usize]);
        while a != b {
            if depth[a as usize] >= depth[b as usize] {
                g[a as usize] += 1;
                a = arena[a as usize].parent.unwrap();
            } else {
                g[b as usize] += 1;
                b = arena[b as usize].parent.unwrap();
            }
        }
    }
    (vol, g)
}
