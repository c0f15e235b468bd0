use std::collections::{BinaryHeap, HashSet};
use std::cmp::Reverse;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::graph::{FeatureMode, Graph, NodeFeatureInit};
use crate::kernel::{featurize, hierarchical_reporting, LayerAlphabets};
use crate::tree::{build_coding_tree, canonicalize_depth};

/// Connected random graph: a uniform random labelled tree (decoded from a
/// random Prüfer sequence) plus random extra edges up to
/// `round(edge_factor * n)` edges in total.
pub fn synthetic_graph(n: usize, edge_factor: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: HashSet<(u32, u32)> = HashSet::new();
    if n == 2 {
        edges.insert((0, 1));
    } else if n > 2 {
        let code: Vec<usize> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
        let mut degree = vec![1usize; n];
        for &c in &code {
            degree[c] += 1;
        }
        let mut leaves: BinaryHeap<Reverse<usize>> = (0..n).filter(|&v| degree[v] == 1).map(Reverse).collect();
        for &c in &code {
            let Reverse(leaf) = leaves.pop().unwrap();
            edges.insert((leaf.min(c) as u32, leaf.max(c) as u32));
            degree[c] -= 1;
            if degree[c] == 1 {
                leaves.push(Reverse(c));
            }
        }
        let Reverse(a) = leaves.pop().unwrap();
        let Reverse(b) = leaves.pop().unwrap();
        edges.insert((a.min(b) as u32, a.max(b) as u32));
    }
    let max_edges = n * n.saturating_sub(1) / 2;
    let target = ((edge_factor * n as f64).round() as usize).clamp(n.saturating_sub(1), max_edges);
    while edges.len() < target {
        let u = rng.gen_range(0..n as u32);
        let v = rng.gen_range(0..n as u32);
        if u != v {
            edges.insert((u.min(v), u.max(v)));
        }
    }
    let mut edges: Vec<(u32, u32)> = edges.into_iter().collect();
    edges.sort_unstable();
    Graph::new(n.max(1), edges, None).expect("generated edges are simple")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub m: usize,
    /// Node count of the tree before canonicalization.
    pub tree_nodes: usize,
    pub build_secs: f64,
    pub featurize_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// Log-log slope of build time against edge count.
    pub build_slope: Option<f64>,
    /// Log-log slope of featurization time against vertex count.
    pub featurize_slope: Option<f64>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn best_of<T>(repeats: usize, mut f: impl FnMut() -> Result<T>) -> Result<(T, f64)> {
    let mut best = f64::INFINITY;
    let mut out = None;
    for _ in 0..repeats {
        let start = Instant::now();
        let v = f()?;
        best = best.min(start.elapsed().as_secs_f64());
        out = Some(v);
    }
    Ok((out.unwrap(), best))
}

/// Times tree construction and featurization on synthetic graphs of the
/// given sizes. Small sizes are repeated and the fastest run kept.
pub fn bench_scaling(sizes: &[usize], edge_factor: f64, k: u32, seed: u64) -> Result<BenchReport> {
    let mut rows = Vec::with_capacity(sizes.len());
    for (i, &n) in sizes.iter().enumerate() {
        let g = synthetic_graph(n, edge_factor, super::graph_seed(seed, i));
        let repeats = (65_536 / n.max(1)).clamp(3, 16);
        let (tree, build_secs) = best_of(repeats, || build_coding_tree(&g, k, seed))?;
        let labels = NodeFeatureInit::fit([&g], FeatureMode::Degree)?.initial_labels(&g)?;
        let (_, featurize_secs) = best_of(repeats, || {
            let t = canonicalize_depth(&tree, k)?;
            let mut alphabets = LayerAlphabets::new(k);
            hierarchical_reporting(&t, &labels, &mut alphabets)?;
            featurize(&t, &labels, &alphabets)
        })?;
        log::info!("bench n={n} m={}: build {build_secs:.4}s, featurize {featurize_secs:.4}s", g.edge_count());
        rows.push(BenchRow {
            n,
            m: g.edge_count(),
            tree_nodes: tree.len(),
            build_secs,
            featurize_secs,
        });
    }
    let m: Vec<f64> = rows.iter().map(|r| r.m as f64).collect();
    let n: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let build: Vec<f64> = rows.iter().map(|r| r.build_secs.max(1e-9)).collect();
    let feat: Vec<f64> = rows.iter().map(|r| r.featurize_secs.max(1e-9)).collect();
    Ok(BenchReport {
        build_slope: loglog_slope(&m, &build),
        featurize_slope: loglog_slope(&n, &feat),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_graphs_are_connected() {
        for (n, ef) in [(1, 1.0), (2, 1.0), (3, 1.0), (50, 1.0), (50, 3.0), (10, 100.0)] {
            let g = synthetic_graph(n, ef, 5);
            assert!(g.is_connected());
            let expect = ((ef * n as f64).round() as usize).clamp(n.saturating_sub(1), n * n.saturating_sub(1) / 2);
            assert_eq!(g.edge_count(), expect, "n={n}");
        }
        assert_eq!(synthetic_graph(40, 2.0, 1), synthetic_graph(40, 2.0, 1));
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(loglog_slope(&[1.0], &[1.0]), None);
    }

    #[test]
    fn empty_sizes_give_empty_table() {
        let r = bench_scaling(&[], 2.0, 2, 0).unwrap();
        assert!(r.rows.is_empty());
        assert_eq!(r.build_slope, None);
    }
}
