use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::compress::compress_random;
use super::{recount_caches, CodingTree, TreeNode};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Random baseline tree: a balanced binary tree over a shuffled vertex
/// order, then random internal-node deletions until the height is at most
/// `k`. Entropy plays no part.
pub fn build_rbbt(graph: &Graph, k: u32, seed: u64) -> Result<CodingTree> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("tree height k must be at least 2, got {k}")));
    }
    let n = graph.node_count();
    if n <= 2 {
        return Ok(CodingTree::star(graph).with_heights(k, 1));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(&mut rng);

    let mut arena: Vec<TreeNode> = (0..n as u32).map(|v| TreeNode::leaf(v, 0)).collect();
    let root = balanced(&mut arena, &order);
    let (vol, g) = recount_caches(&arena, root, graph);
    for (node, (vol, g)) in arena.iter_mut().zip(vol.into_iter().zip(g)) {
        node.vol = vol;
        node.g = g;
    }
    Ok(compress_random(arena, root, graph, k, &mut rng))
}

fn balanced(arena: &mut Vec<TreeNode>, leaves: &[u32]) -> u32 {
    if let [v] = leaves {
        return *v;
    }
    let mid = leaves.len().div_ceil(2);
    let a = balanced(arena, &leaves[..mid]);
    let b = balanced(arena, &leaves[mid..]);
    let id = arena.len() as u32;
    arena.push(TreeNode::internal(vec![a, b], 0, 0));
    arena[a as usize].parent = Some(id);
    arena[b as usize].parent = Some(id);
    id
}
