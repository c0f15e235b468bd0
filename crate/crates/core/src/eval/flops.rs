use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{graph_seed, synthetic_graph};
use crate::error::Result;
use crate::graph::{FeatureMode, Graph, NodeFeatureInit};
use crate::hrn::{gin_flops, hrn_flops, FlopReport, HrnConfig, PoolMode};
use crate::tree::{build_coding_tree, canonicalize_depth};

/// Size statistics of a public graph classification benchmark.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkStats {
    pub name: &'static str,
    pub graphs: usize,
    pub mean_nodes: f64,
    pub mean_edges: f64,
    pub classes: usize,
    /// Molecule datasets carry node categories and use sum pooling.
    pub bio: bool,
}

/// Published statistics of the five benchmarks used throughout.
pub fn reference_benchmarks() -> Vec<BenchmarkStats> {
    let b = |name, graphs, mean_nodes, mean_edges, classes, bio| BenchmarkStats { name, graphs, mean_nodes, mean_edges, classes, bio };
    vec![
        b("IMDB-BINARY", 1000, 19.77, 96.53, 2, false),
        b("IMDB-MULTI", 1500, 13.00, 65.94, 3, false),
        b("COLLAB", 5000, 74.49, 2457.78, 3, false),
        b("MUTAG", 188, 17.93, 19.79, 2, true),
        b("PTC_MR", 344, 14.29, 14.69, 2, true),
    ]
}

impl BenchmarkStats {
    /// `count` connected graphs whose sizes scatter uniformly within ±50%
    /// of the mean vertex count, at the benchmark's mean edges per vertex.
    pub fn synthetic(&self, count: usize, seed: u64) -> Vec<Graph> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let factor = self.mean_edges / self.mean_nodes;
        (0..count)
            .map(|i| {
                let n = (self.mean_nodes * rng.gen_range(0.5..1.5)).round().max(2.0) as usize;
                synthetic_graph(n, factor, graph_seed(seed, i))
            })
            .collect()
    }
}

/// Forward-pass FLOPs of an HRN on height-`k` coding trees against an
/// analytic GIN-0 with `k` layers, both `hidden` wide on the same one-hot
/// inputs.
pub fn flop_comparison(name: &str, graphs: &[Graph], mode: FeatureMode, classes: usize, pool: PoolMode, k: u32, hidden: usize) -> Result<FlopReport> {
    let input_dim = NodeFeatureInit::fit(graphs, mode)?.dimension();
    let cfg = HrnConfig { input_dim, hidden, height: k as usize, classes, pool, dropout: 0.0, batch_norm: true };
    let mut hrn = 0.0;
    let mut gin = 0.0;
    for g in graphs {
        let tree = canonicalize_depth(&build_coding_tree(g, k, 0)?, k)?;
        hrn += hrn_flops(&cfg, &tree.level_sizes()) as f64;
        gin += gin_flops(g.node_count() as f64, g.edge_count() as f64, input_dim, hidden, k as usize, classes);
    }
    Ok(FlopReport {
        dataset: name.to_string(),
        graphs: graphs.len(),
        hrn,
        gin,
        ratio: hrn / gin,
    })
}
