//! Cross-validation protocols, the linear classifier for WL-CT features,
//! scaling benchmarks and FLOP comparisons.

mod bench;
mod flops;
mod folds;
mod hrn_cv;
mod svm;
mod wlct;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bench::{bench_scaling, loglog_slope, synthetic_graph, BenchReport, BenchRow};
pub use flops::{flop_comparison, reference_benchmarks, BenchmarkStats};
pub use folds::{stratified_folds, Fold, FoldSpec};
pub use hrn_cv::{hrn_samples, run_hrn_cv, HrnCell, HrnCvConfig, HrnReport};
pub use svm::{LinearSvm, SparseVec};
pub use wlct::{run_wlct_cv, wlct_features, Selection, SweepRow, WlctConfig, WlctReport};

use crate::error::{Error, Result};
use crate::graph::Dataset;
use crate::tree::{build_coding_tree, build_rbbt, canonicalize_depth, CodingTree};

/// Which tree builder an experiment uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TreeKind {
    /// Greedy structural entropy minimization.
    Entropy,
    /// Random balanced binary tree, randomly compressed.
    Rbbt,
}

impl fmt::Display for TreeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TreeKind::Entropy => "entropy",
            TreeKind::Rbbt => "rbbt",
        })
    }
}

impl FromStr for TreeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "entropy" => Ok(TreeKind::Entropy),
            "rbbt" => Ok(TreeKind::Rbbt),
            _ => Err(Error::InvalidArgument(format!("unknown tree kind {s:?} (expected entropy or rbbt)"))),
        }
    }
}

/// Per-fold accuracies in percent with their mean and population standard
/// deviation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

impl RunResult {
    pub fn from_folds(fold_accuracies: Vec<f64>) -> Self {
        let (mean, std) = mean_std(&fold_accuracies);
        RunResult { fold_accuracies, mean, std }
    }
}

impl fmt::Display for RunResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1} ± {:.1}", self.mean, self.std)
    }
}

pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub(crate) fn graph_seed(seed: u64, index: usize) -> u64 {
    crate::tree::mix64(seed ^ crate::tree::mix64(index as u64))
}

/// Depth-canonical trees of height `k` for every graph, built in parallel.
pub fn build_trees(dataset: &Dataset, k: u32, kind: TreeKind, seed: u64) -> Result<Vec<CodingTree>> {
    dataset
        .graphs
        .par_iter()
        .enumerate()
        .map(|(i, g)| {
            if !g.is_connected() {
                return Err(Error::Disconnected { dataset: dataset.name.clone(), graph: i });
            }
            let tree = match kind {
                TreeKind::Entropy => build_coding_tree(g, k, seed)?,
                TreeKind::Rbbt => build_rbbt(g, k, graph_seed(seed, i))?,
            };
            canonicalize_depth(&tree, k)
        })
        .collect()
}
