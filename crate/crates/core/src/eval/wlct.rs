use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_trees, stratified_folds, FoldSpec, LinearSvm, RunResult, SparseVec, TreeKind};
use crate::error::{Error, Result};
use crate::graph::{Dataset, FeatureMode, NodeFeatureInit};
use crate::kernel::fit_features;

/// How the reported configuration is chosen from the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// The cell with the best mean over the outer folds.
    BestMean,
    /// Per outer fold, the cell with the best inner cross-validation
    /// accuracy on the training part.
    Nested,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WlctConfig {
    pub ks: Vec<u32>,
    pub cs: Vec<f64>,
    pub folds: usize,
    pub inner_folds: usize,
    pub seed: u64,
    pub normalize: bool,
    pub feature_mode: FeatureMode,
    pub tree_kind: TreeKind,
    pub selection: Selection,
}

impl Default for WlctConfig {
    fn default() -> Self {
        WlctConfig {
            ks: vec![2, 3, 4, 5],
            cs: vec![0.01, 0.1, 1.0, 10.0, 100.0],
            folds: 10,
            inner_folds: 5,
            seed: 0,
            normalize: true,
            feature_mode: FeatureMode::Degree,
            tree_kind: TreeKind::Entropy,
            selection: Selection::BestMean,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: u32,
    pub c: f64,
    pub result: RunResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WlctReport {
    /// The reported accuracies.
    pub result: RunResult,
    /// `(k, C)` used for each outer fold.
    pub chosen: Vec<(u32, f64)>,
    pub sweep: Vec<SweepRow>,
    pub folds: FoldSpec,
}

/// Explicit WL-CT feature rows for every graph at height `k`, plus the
/// feature dimension.
pub fn wlct_features(dataset: &Dataset, k: u32, cfg: &WlctConfig) -> Result<(Vec<SparseVec>, usize)> {
    let trees = build_trees(dataset, k, cfg.tree_kind, cfg.seed)?;
    let init = NodeFeatureInit::fit(&dataset.graphs, cfg.feature_mode)?;
    let labels = dataset
        .graphs
        .iter()
        .map(|g| init.initial_labels(g))
        .collect::<Result<Vec<_>>>()?;
    let (alphabets, features) = fit_features(&trees, &labels)?;
    let mut offset = vec![0usize];
    for s in alphabets.sizes() {
        offset.push(offset.last().unwrap() + s);
    }
    let rows = features
        .iter()
        .map(|f| {
            let scale = if cfg.normalize { 1.0 / f.squared_norm().sqrt() } else { 1.0 };
            f.entries()
                .iter()
                .map(|&((layer, label), c)| ((offset[layer as usize] + label as usize) as u32, c as f64 * scale))
                .collect()
        })
        .collect();
    Ok((rows, alphabets.len()))
}

fn pick<T: Clone>(xs: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| xs[i].clone()).collect()
}

#[allow(clippy::too_many_arguments)]
fn fold_accuracy(rows: &[SparseVec], dim: usize, labels: &[usize], classes: usize, train: &[usize], test: &[usize], c: f64, seed: u64) -> Result<f64> {
    let svm = LinearSvm::train(&pick(rows, train), &pick(labels, train), classes, dim, c, seed)?;
    Ok(100.0 * svm.accuracy(&pick(rows, test), &pick(labels, test)))
}

/// Cross-validated WL-CT classification over a `(k, C)` grid.
pub fn run_wlct_cv(dataset: &Dataset, cfg: &WlctConfig) -> Result<WlctReport> {
    if cfg.ks.is_empty() || cfg.cs.is_empty() {
        return Err(Error::InvalidArgument("empty k or C grid".into()));
    }
    let spec = stratified_folds(&dataset.labels, cfg.folds, cfg.seed)?;
    let classes = dataset.class_count();
    let labels = &dataset.labels;
    let features: Vec<(u32, Vec<SparseVec>, usize)> = cfg
        .ks
        .iter()
        .map(|&k| wlct_features(dataset, k, cfg).map(|(rows, dim)| (k, rows, dim)))
        .collect::<Result<_>>()?;

    let cells: Vec<(usize, usize)> = (0..features.len()).flat_map(|a| (0..cfg.cs.len()).map(move |b| (a, b))).collect();
    let per_cell: Vec<Vec<f64>> = cells
        .par_iter()
        .map(|&(a, b)| {
            let (_, rows, dim) = &features[a];
            spec.folds
                .iter()
                .map(|f| fold_accuracy(rows, *dim, labels, classes, &f.train, &f.test, cfg.cs[b], cfg.seed))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let sweep: Vec<SweepRow> = cells
        .iter()
        .zip(per_cell)
        .map(|(&(a, b), accs)| SweepRow { k: features[a].0, c: cfg.cs[b], result: RunResult::from_folds(accs) })
        .collect();

    let (result, chosen) = match cfg.selection {
        Selection::BestMean => {
            let best = sweep
                .iter()
                .fold(&sweep[0], |best, row| if row.result.mean > best.result.mean { row } else { best });
            (best.result.clone(), vec![(best.k, best.c); cfg.folds])
        }
        Selection::Nested => {
            let outcomes = spec
                .folds
                .par_iter()
                .map(|f| {
                    let inner_labels = pick(labels, &f.train);
                    let inner = stratified_folds(&inner_labels, cfg.inner_folds, cfg.seed)?;
                    let mut best: Option<(f64, usize, usize)> = None;
                    for &(a, b) in &cells {
                        let (_, rows, dim) = &features[a];
                        let sub = pick(rows, &f.train);
                        let mut total = 0.0;
                        for g in &inner.folds {
                            total += fold_accuracy(&sub, *dim, &inner_labels, classes, &g.train, &g.test, cfg.cs[b], cfg.seed)
                                .unwrap_or(0.0);
                        }
                        if best.is_none_or(|(s, _, _)| total > s) {
                            best = Some((total, a, b));
                        }
                    }
                    let (_, a, b) = best.unwrap();
                    let (k, rows, dim) = &features[a];
                    let acc = fold_accuracy(rows, *dim, labels, classes, &f.train, &f.test, cfg.cs[b], cfg.seed)?;
                    Ok((acc, (*k, cfg.cs[b])))
                })
                .collect::<Result<Vec<_>>>()?;
            let (accs, chosen): (Vec<f64>, Vec<(u32, f64)>) = outcomes.into_iter().unzip();
            (RunResult::from_folds(accs), chosen)
        }
    };
    Ok(WlctReport { result, chosen, sweep, folds: spec })
}
