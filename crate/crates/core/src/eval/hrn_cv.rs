use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_trees, graph_seed, stratified_folds, FoldSpec, RunResult, TreeKind};
use crate::error::{Error, Result};
use crate::graph::{Dataset, FeatureMode, NodeFeatureInit};
use crate::hrn::{self, EpochMetrics, HrnConfig, HrnModel, PoolMode, Sample, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrnCvConfig {
    pub ks: Vec<u32>,
    pub pools: Vec<PoolMode>,
    pub hidden: Vec<usize>,
    pub batch_sizes: Vec<usize>,
    pub dropouts: Vec<f64>,
    pub epochs: usize,
    pub folds: usize,
    pub seed: u64,
    pub feature_mode: FeatureMode,
    pub tree_kind: TreeKind,
    pub batch_norm: bool,
}

impl Default for HrnCvConfig {
    fn default() -> Self {
        HrnCvConfig {
            ks: vec![2],
            pools: vec![PoolMode::Sum],
            hidden: vec![32],
            batch_sizes: vec![32],
            dropouts: vec![0.0],
            epochs: 350,
            folds: 10,
            seed: 0,
            feature_mode: FeatureMode::Degree,
            tree_kind: TreeKind::Entropy,
            batch_norm: true,
        }
    }
}

/// One grid cell: the epoch with the best mean test accuracy over folds and
/// the per-fold accuracies at that epoch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HrnCell {
    pub k: u32,
    pub pool: PoolMode,
    pub hidden: usize,
    pub batch_size: usize,
    pub dropout: f64,
    pub best_epoch: usize,
    pub result: RunResult,
    /// Mean test accuracy per epoch.
    pub curve: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HrnReport {
    pub cells: Vec<HrnCell>,
    /// Index into `cells` of the best mean.
    pub best: usize,
    pub folds: FoldSpec,
}

impl HrnReport {
    /// Best cell for each `(pool, k)` pair, in grid order.
    pub fn table(&self) -> Vec<&HrnCell> {
        let mut out: Vec<&HrnCell> = Vec::new();
        for cell in &self.cells {
            match out.iter_mut().find(|c| c.pool == cell.pool && c.k == cell.k) {
                Some(slot) if cell.result.mean > slot.result.mean => *slot = cell,
                Some(_) => {}
                None => out.push(cell),
            }
        }
        out
    }

    pub fn best(&self) -> &HrnCell {
        &self.cells[self.best]
    }
}

/// Samples for every graph at height `k`, with one-hot input rows.
pub fn hrn_samples(dataset: &Dataset, k: u32, mode: FeatureMode, kind: TreeKind, seed: u64) -> Result<(Vec<Sample>, usize)> {
    let trees = build_trees(dataset, k, kind, seed)?;
    let init = NodeFeatureInit::fit(&dataset.graphs, mode)?;
    let samples = trees
        .into_iter()
        .zip(&dataset.graphs)
        .zip(&dataset.labels)
        .map(|((tree, g), &label)| Ok(Sample { tree, features: init.initial_features(g)?, label }))
        .collect::<Result<Vec<_>>>()?;
    Ok((samples, init.dimension()))
}

/// Cross-validated HRN training over the configuration grid.
pub fn run_hrn_cv(dataset: &Dataset, cfg: &HrnCvConfig) -> Result<HrnReport> {
    if cfg.ks.is_empty() || cfg.pools.is_empty() || cfg.hidden.is_empty() || cfg.batch_sizes.is_empty() || cfg.dropouts.is_empty() {
        return Err(Error::InvalidArgument("every grid list needs at least one value".into()));
    }
    if cfg.epochs == 0 {
        return Err(Error::InvalidArgument("epochs must be positive".into()));
    }
    let spec = stratified_folds(&dataset.labels, cfg.folds, cfg.seed)?;
    let mut cells = Vec::new();
    for &k in &cfg.ks {
        let (samples, input_dim) = hrn_samples(dataset, k, cfg.feature_mode, cfg.tree_kind, cfg.seed)?;
        for &pool in &cfg.pools {
            for &hidden in &cfg.hidden {
                for &batch_size in &cfg.batch_sizes {
                    for &dropout in &cfg.dropouts {
                        let model_cfg = HrnConfig {
                            input_dim,
                            hidden,
                            height: k as usize,
                            classes: dataset.class_count(),
                            pool,
                            dropout,
                            batch_norm: cfg.batch_norm,
                        };
                        let histories = spec
                            .folds
                            .par_iter()
                            .enumerate()
                            .map(|(f, fold)| -> Result<Vec<EpochMetrics>> {
                                let seed = graph_seed(cfg.seed, f);
                                let mut model = HrnModel::new(model_cfg.clone(), seed)?;
                                let tc = TrainConfig { epochs: cfg.epochs, batch_size, seed, ..TrainConfig::default() };
                                hrn::train(&mut model, &samples, &fold.train, &fold.test, &tc)
                            })
                            .collect::<Result<Vec<_>>>()?;
                        let curve: Vec<f64> = (0..cfg.epochs)
                            .map(|e| {
                                histories.iter().map(|h| h[e].test_accuracy.unwrap_or(0.0)).sum::<f64>() * 100.0 / histories.len() as f64
                            })
                            .collect();
                        let best_epoch = (0..cfg.epochs).fold(0, |b, e| if curve[e] > curve[b] { e } else { b });
                        let accs = histories.iter().map(|h| 100.0 * h[best_epoch].test_accuracy.unwrap_or(0.0)).collect();
                        log::info!("hrn k={k} pool={pool} hidden={hidden} batch={batch_size} dropout={dropout}: {:.1} at epoch {best_epoch}", curve[best_epoch]);
                        cells.push(HrnCell {
                            k,
                            pool,
                            hidden,
                            batch_size,
                            dropout,
                            best_epoch,
                            result: RunResult::from_folds(accs),
                            curve,
                        });
                    }
                }
            }
        }
    }
    let best = (0..cells.len()).fold(0, |b, i| if cells[i].result.mean > cells[b].result.mean { i } else { b });
    Ok(HrnReport { cells, best, folds: spec })
}
