use super::{CodingTree, TreeNode};
use crate::error::{Error, Result};

/// Pads the tree with single-child nodes above shallow leaves so that every
/// leaf sits at depth `k`. A padding node has the same vertex set as its
/// child, so vol and g are copied and the entropy does not change.
pub fn canonicalize_depth(tree: &CodingTree, k: u32) -> Result<CodingTree> {
    if tree.height() > k {
        return Err(Error::InvalidArgument(format!(
            "tree of height {} cannot be padded to depth {k}",
            tree.height()
        )));
    }
    let depth = tree.depths();
    let n = tree.leaf_count();
    let mut arena = tree.nodes().to_vec();
    let mut slot = vec![0usize; n];
    for node in &arena {
        for (i, &c) in node.children.iter().enumerate() {
            if (c as usize) < n {
                slot[c as usize] = i;
            }
        }
    }
    for leaf in 0..n {
        let at = slot[leaf];
        let mut below = leaf as u32;
        for _ in depth[leaf]..k {
            let parent = arena[below as usize].parent.expect("leaf below a root");
            let id = arena.len() as u32;
            let mut pad = TreeNode::internal(vec![below], arena[below as usize].vol, arena[below as usize].g);
            pad.parent = Some(parent);
            arena[parent as usize].children[at] = id;
            arena[below as usize].parent = Some(id);
            arena.push(pad);
            below = id;
        }
    }
    let alive = vec![true; arena.len()];
    Ok(CodingTree::compact(&arena, &alive, tree.root(), n).with_heights(k, tree.merge_height()))
}
