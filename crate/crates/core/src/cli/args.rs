use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

const AFTER_HELP: &str = "\
Settings come from flags, then the --config TOML file, then the defaults shown.
Top-level keys of the file set global options; a [command] table sets that
command's options, e.g.

    threads = 4
    [cv-wlct]
    dataset = \"MUTAG\"
    ks = [2, 3]

Datasets are TU-format directories (NAME_A.txt, NAME_graph_indicator.txt,
NAME_graph_labels.txt, optional NAME_node_labels.txt). A bare name is looked
up under $COTREE_DATA, then ./data. Every run writes manifest.json next to
its outputs and never overwrites files without --force.";

#[derive(Debug, Parser)]
#[command(name = "cotree", version, about = "Coding trees for graph classification", after_help = AFTER_HELP)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[command(next_help_heading = "Global options")]
pub struct Global {
    /// Worker threads [default: available cores]
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    /// TOML file of settings
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Output directory [default: cotree-out/<command>]
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Overwrite existing output files
    #[arg(long, global = true)]
    pub force: bool,

    /// Progress logging on stderr
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Structural entropy of a graph under a coding tree, or its star tree
    Entropy(EntropyArgs),
    /// Build a coding tree and write it as text
    BuildTree(BuildTreeArgs),
    /// WL-CT feature vectors and Gram matrix of a dataset
    Kernel(KernelArgs),
    /// Cross-validated WL-CT classification
    CvWlct(CvWlctArgs),
    /// Cross-validated HRN classification
    CvHrn(CvHrnArgs),
    /// Build and featurization timings on synthetic graphs
    Bench(BenchArgs),
    /// HRN against GIN-0 forward FLOPs on benchmark-shaped graphs
    Flops(FlopsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Features {
    /// Degree plus node category when the dataset has categories
    Auto,
    Degree,
    DegreeCategory,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pool {
    Sum,
    Average,
    Root,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionArg {
    /// Report the grid cell with the best mean over outer folds
    BestMean,
    /// Choose per outer fold by inner cross-validation
    Nested,
}

/// One graph, from an edge list or from a dataset.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct GraphInput {
    /// Edge-list file, one `u v` pair of 0-based ids per line
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,

    /// Dataset directory or name
    #[arg(long, value_name = "DIR")]
    pub dataset: Option<String>,

    /// File prefix inside the dataset directory [default: directory name]
    #[arg(long)]
    pub name: Option<String>,

    /// Graph position within the dataset
    #[arg(long, default_value_t = 0)]
    pub index: usize,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DatasetInput {
    /// Dataset directory or name (required)
    #[arg(long, value_name = "DIR")]
    pub dataset: Option<String>,

    /// File prefix inside the dataset directory [default: directory name]
    #[arg(long)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EntropyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: GraphInput,

    /// Coding tree file from build-tree; the star tree when absent
    #[arg(long, value_name = "FILE")]
    pub tree: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BuildTreeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: GraphInput,

    /// Tree height bound
    #[arg(long, default_value_t = 2)]
    pub k: u32,

    /// Seed for merge tie-breaking and random trees
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Random balanced binary tree, randomly compressed
    #[arg(long)]
    pub rbbt: bool,

    /// Pad leaves so that every leaf sits at depth k
    #[arg(long)]
    pub canonical: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct KernelArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: DatasetInput,

    /// Tree height
    #[arg(long, default_value_t = 2)]
    pub k: u32,

    /// Cosine-normalize kernel values
    #[arg(long, default_value_t = true, action = ArgAction::Set, value_name = "BOOL")]
    pub normalize: bool,

    /// Initial node labels
    #[arg(long, value_enum, default_value_t = Features::Auto)]
    pub features: Features,

    /// Random balanced binary trees instead of entropy trees
    #[arg(long)]
    pub rbbt: bool,

    /// Seed for folds, trees and initialization
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Also write gram.bin (little-endian f64 with a small header)
    #[arg(long)]
    pub binary: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CvWlctArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: DatasetInput,

    /// Tree heights to sweep
    #[arg(long, value_delimiter = ',', default_values_t = [2u32, 3, 4, 5])]
    pub ks: Vec<u32>,

    /// SVM C values to sweep
    #[arg(long, value_delimiter = ',', default_values_t = [0.01f64, 0.1, 1.0, 10.0, 100.0])]
    pub cs: Vec<f64>,

    /// Outer cross-validation folds
    #[arg(long, default_value_t = 10)]
    pub folds: usize,

    /// Inner folds for nested selection
    #[arg(long, default_value_t = 5)]
    pub inner_folds: usize,

    /// Seed for folds, trees and initialization
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Cosine-normalize feature rows
    #[arg(long, default_value_t = true, action = ArgAction::Set, value_name = "BOOL")]
    pub normalize: bool,

    /// Initial node labels
    #[arg(long, value_enum, default_value_t = Features::Auto)]
    pub features: Features,

    /// Random balanced binary trees instead of entropy trees
    #[arg(long)]
    pub rbbt: bool,

    /// How the reported grid cell is chosen
    #[arg(long, value_enum, default_value_t = SelectionArg::BestMean)]
    pub selection: SelectionArg,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CvHrnArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub input: DatasetInput,

    /// Tree heights to sweep
    #[arg(long, value_delimiter = ',', default_values_t = [2u32])]
    pub ks: Vec<u32>,

    /// Readout pooling modes to sweep
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Pool::Sum])]
    pub pools: Vec<Pool>,

    /// Hidden widths to sweep
    #[arg(long, value_delimiter = ',', default_values_t = [32usize])]
    pub hidden: Vec<usize>,

    /// Batch sizes to sweep
    #[arg(long, value_delimiter = ',', default_values_t = [32usize])]
    pub batch_sizes: Vec<usize>,

    /// Dropout rates to sweep
    #[arg(long, value_delimiter = ',', default_values_t = [0.0f64])]
    pub dropouts: Vec<f64>,

    /// Training epochs per fold
    #[arg(long, default_value_t = 350)]
    pub epochs: usize,

    /// Outer cross-validation folds
    #[arg(long, default_value_t = 10)]
    pub folds: usize,

    /// Seed for folds, trees and initialization
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// Initial node labels
    #[arg(long, value_enum, default_value_t = Features::Auto)]
    pub features: Features,

    /// Random balanced binary trees instead of entropy trees
    #[arg(long)]
    pub rbbt: bool,

    /// Batch normalization after each level
    #[arg(long, default_value_t = true, action = ArgAction::Set, value_name = "BOOL")]
    pub batch_norm: bool,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct BenchArgs {
    /// Smallest size as a power of two
    #[arg(long, default_value_t = 10)]
    pub min_exp: u32,

    /// Largest size as a power of two
    #[arg(long, default_value_t = 17)]
    pub max_exp: u32,

    /// Edges per vertex
    #[arg(long, default_value_t = 4.0)]
    pub edge_factor: f64,

    /// Tree height
    #[arg(long, default_value_t = 2)]
    pub k: u32,

    /// Seed for folds, trees and initialization
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct FlopsArgs {
    /// Tree height, also the GIN layer count
    #[arg(long, default_value_t = 4)]
    pub k: u32,

    /// Hidden width
    #[arg(long, default_value_t = 32)]
    pub hidden: usize,

    /// Synthetic graphs per benchmark
    #[arg(long, default_value_t = 100)]
    pub graphs: usize,

    /// Seed for folds, trees and initialization
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}
