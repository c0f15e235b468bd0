use ndarray::{s, Array2};

use crate::error::{Error, Result};
use crate::tree::CodingTree;

/// Several depth-canonical trees flattened level by level.
///
/// Within every level the nodes of tree 0 come first, then tree 1, and so
/// on, so a tree's nodes on a level form one contiguous range.
#[derive(Debug, Clone)]
pub struct TreeBatch {
    pub(crate) features: Array2<f64>,
    /// `parent[i][u]`: index on level `i + 1` of node `u` on level `i`.
    pub(crate) parent: Vec<Vec<u32>>,
    pub(crate) counts: Vec<usize>,
    /// `ranges[i][t]`: node range of tree `t` on level `i`.
    pub(crate) ranges: Vec<Vec<(usize, usize)>>,
}

impl TreeBatch {
    /// `features[t]` has one row per vertex of tree `t`'s graph.
    pub fn new(trees: &[&CodingTree], features: &[&Array2<f64>]) -> Result<Self> {
        if trees.is_empty() || trees.len() != features.len() {
            return Err(Error::Dimension(format!("{} trees with {} feature matrices", trees.len(), features.len())));
        }
        let k = trees[0].height() as usize;
        let dim = features[0].ncols();
        let mut counts = vec![0usize; k + 1];
        let mut starts = Vec::with_capacity(trees.len());
        for (t, (tree, x)) in trees.iter().zip(features).enumerate() {
            if tree.height() as usize != k {
                return Err(Error::NotCanonical(format!("tree {t} has height {}, expected {k}", tree.height())));
            }
            if x.nrows() != tree.leaf_count() || x.ncols() != dim {
                return Err(Error::Dimension(format!(
                    "tree {t}: features are {}x{}, expected {}x{dim}",
                    x.nrows(),
                    x.ncols(),
                    tree.leaf_count()
                )));
            }
            let mut start = vec![0usize; k + 2];
            for (id, node) in tree.nodes().iter().enumerate() {
                let level = node.level as usize;
                if let Some(p) = node.parent {
                    if tree.node(p).level as usize != level + 1 {
                        return Err(Error::NotCanonical(format!("tree {t}: node {id} is not one level below its parent")));
                    }
                }
                start[level + 1] = id + 1;
            }
            for i in 0..=k {
                counts[i] += start[i + 1] - start[i];
            }
            starts.push(start);
        }

        let mut x = Array2::zeros((counts[0], dim));
        let mut parent: Vec<Vec<u32>> = counts[..k].iter().map(|&c| vec![0; c]).collect();
        let mut ranges = vec![Vec::with_capacity(trees.len()); k + 1];
        let mut base = vec![0usize; k + 1];
        for ((tree, feats), start) in trees.iter().zip(features).zip(&starts) {
            for i in 0..=k {
                ranges[i].push((base[i], base[i] + start[i + 1] - start[i]));
            }
            x.slice_mut(s![base[0]..base[0] + tree.leaf_count(), ..]).assign(feats);
            for (id, node) in tree.nodes().iter().enumerate() {
                let Some(p) = node.parent else { continue };
                let i = node.level as usize;
                let local = id - start[i];
                let parent_local = p as usize - start[i + 1];
                parent[i][base[i] + local] = (base[i + 1] + parent_local) as u32;
            }
            for i in 0..=k {
                base[i] += start[i + 1] - start[i];
            }
        }
        Ok(TreeBatch {
            features: x,
            parent,
            counts,
            ranges,
        })
    }

    pub fn tree_count(&self) -> usize {
        self.ranges[0].len()
    }

    pub fn height(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.features.ncols()
    }

    /// Node count per level over the whole batch.
    pub fn level_counts(&self) -> &[usize] {
        &self.counts
    }
}
