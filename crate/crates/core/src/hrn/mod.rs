//! Hierarchical Reporting Network: a small neural network that runs
//! bottom-up over depth-canonical coding trees.
//!
//! Level `i` sums the level `i - 1` vectors of each node's children and
//! applies a two-layer MLP (linear, batch norm, ReLU, twice). The tree
//! readout concatenates a pooled vector per level and feeds one linear
//! classifier layer. Gradients are derived by hand; parameters are `f64`.

mod batch;
mod checkpoint;
mod flops;
mod model;
mod train;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use batch::TreeBatch;
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use flops::{gin_flops, hrn_flops, FlopReport};
pub use model::{HrnModel, Mode};
pub use train::{learning_rate, predict, train, Adam, EpochMetrics, Sample, TrainConfig};

use crate::error::{Error, Result};

/// How the nodes of one level are pooled into a tree-level vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolMode {
    /// Sum of every level's node vectors, concatenated over levels.
    Sum,
    /// Mean of every level's node vectors, concatenated over levels.
    Average,
    /// The root's vector alone.
    Root,
}

impl PoolMode {
    pub const ALL: [PoolMode; 3] = [PoolMode::Sum, PoolMode::Average, PoolMode::Root];
}

impl fmt::Display for PoolMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PoolMode::Sum => "sum",
            PoolMode::Average => "average",
            PoolMode::Root => "root",
        })
    }
}

impl FromStr for PoolMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sum" => Ok(PoolMode::Sum),
            "average" | "avg" | "mean" => Ok(PoolMode::Average),
            "root" => Ok(PoolMode::Root),
            _ => Err(Error::InvalidArgument(format!("unknown pool mode {s:?} (expected sum, average or root)"))),
        }
    }
}

/// Architecture of an [`HrnModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HrnConfig {
    pub input_dim: usize,
    pub hidden: usize,
    /// Tree height, which is also the number of MLP levels.
    pub height: usize,
    pub classes: usize,
    pub pool: PoolMode,
    pub dropout: f64,
    pub batch_norm: bool,
}

impl HrnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden == 0 || self.height == 0 || self.classes < 2 {
            return Err(Error::InvalidArgument(format!(
                "bad network shape: input {}, hidden {}, height {}, classes {}",
                self.input_dim, self.hidden, self.height, self.classes
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidArgument(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        Ok(())
    }

    /// Width of the concatenated readout.
    pub fn readout_dim(&self) -> usize {
        match self.pool {
            PoolMode::Root => self.hidden,
            PoolMode::Sum | PoolMode::Average => (self.height + 1) * self.hidden,
        }
    }
}
