//! Floating-point operation counts for one forward pass.
//!
//! A dense layer on `N` rows from width `a` to `b` costs `2 N a b`; summing
//! `N` vectors of width `d` costs `(N - 1) d`. Bias adds, batch norm and
//! activations are not counted, on either side of the comparison.

use serde::Serialize;

use super::{HrnConfig, PoolMode};

/// Forward cost of an HRN on one tree with `counts[i]` nodes on level `i`.
pub fn hrn_flops(config: &HrnConfig, counts: &[usize]) -> u64 {
    let d = config.hidden as u64;
    let d_in = config.input_dim as u64;
    let c = config.classes as u64;
    let n: Vec<u64> = counts.iter().map(|&x| x as u64).collect();
    let mut total = 0u64;
    for i in 1..n.len() {
        let below = if i == 1 { d_in } else { d };
        total += (n[i - 1] - n[i]) * below;
        total += 2 * n[i] * below * d + 2 * n[i] * d * d;
    }
    match config.pool {
        PoolMode::Root => {}
        PoolMode::Sum | PoolMode::Average => {
            for (i, &ni) in n.iter().enumerate() {
                let width = if i == 0 { d_in } else { d };
                total += (ni - 1) * width;
                if config.pool == PoolMode::Average {
                    total += width;
                }
            }
            total += 2 * d_in * d;
        }
    }
    total + 2 * config.readout_dim() as u64 * c
}

/// Forward cost of a GIN-0 with `layers` message-passing layers of width
/// `hidden` on a graph with `nodes` vertices and `edges` edges, with sum
/// readout and one linear prediction per layer including the input layer.
pub fn gin_flops(nodes: f64, edges: f64, input_dim: usize, hidden: usize, layers: usize, classes: usize) -> f64 {
    let d = hidden as f64;
    let c = classes as f64;
    let width = |l: usize| if l == 0 { input_dim as f64 } else { d };
    let mut total = 0.0;
    for l in 1..=layers {
        let prev = width(l - 1);
        total += 2.0 * edges * prev + nodes * prev + 2.0 * nodes * (prev * d + d * d);
    }
    for l in 0..=layers {
        total += (nodes - 1.0) * width(l) + 2.0 * width(l) * c;
    }
    total
}

/// Dataset-level comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlopReport {
    pub dataset: String,
    pub graphs: usize,
    pub hrn: f64,
    pub gin: f64,
    pub ratio: f64,
}
