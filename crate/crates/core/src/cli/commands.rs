use std::fmt::{Display, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use cotree::entropy::entropy_of_tree;
use cotree::eval::{
    bench_scaling, build_trees, flop_comparison, reference_benchmarks, run_hrn_cv, run_wlct_cv, HrnCvConfig, Selection,
    TreeKind, WlctConfig,
};
use cotree::graph::{load_edge_list, load_tudataset, Dataset, FeatureMode, Graph, NodeFeatureInit};
use cotree::hrn::PoolMode;
use cotree::kernel::{fit_features, GramMatrix};
use cotree::tree::{build_coding_tree, build_rbbt, canonicalize_depth, CodingTree};

use super::args::*;
use super::output::{InputFile, Manifest, OutDir};
use super::{CliError, Result};

const CV_NOTE: &str = "folds are stratified and shuffled by the seed; best-mean selection reports the grid cell \
with the highest mean over the outer folds, which is optimistic next to nested selection and may differ from \
other published protocols";

/// What a subcommand needs besides its own arguments.
pub struct Run {
    out: OutDir,
    inputs: Vec<InputFile>,
    notes: Vec<String>,
}

pub trait CommandArgs: Serialize {
    /// Checks values before any work, naming the offending flag.
    fn validate(&self) -> Result<()>;
    /// Files the command will write.
    fn outputs(&self) -> Vec<&'static str>;
}

fn invalid(flag: &str, value: impl Display, why: &str) -> CliError {
    CliError::Usage(format!("invalid value '{value}' for '--{flag}': {why}"))
}

fn check_k(flag: &str, k: u32) -> Result<()> {
    if k < 2 {
        return Err(invalid(flag, k, "tree height must be at least 2"));
    }
    Ok(())
}

fn check_nonempty<T>(flag: &str, xs: &[T]) -> Result<()> {
    if xs.is_empty() {
        return Err(CliError::Usage(format!("'--{flag}' needs at least one value")));
    }
    Ok(())
}

fn check_positive(flag: &str, x: usize) -> Result<()> {
    if x == 0 {
        return Err(invalid(flag, x, "must be positive"));
    }
    Ok(())
}

fn check_folds(flag: &str, x: usize) -> Result<()> {
    if x < 2 {
        return Err(invalid(flag, x, "need at least 2 folds"));
    }
    Ok(())
}

pub fn execute<T: CommandArgs>(name: &str, global: &Global, args: T, body: fn(&T, &mut Run) -> Result<()>) -> Result<()> {
    let level = if global.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn };
    let _ = env_logger::Builder::new().filter_level(level).try_init();

    let threads = match global.threads {
        Some(0) => return Err(invalid("threads", 0, "must be positive")),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    args.validate()?;
    let out = global.out.clone().unwrap_or_else(|| Path::new("cotree-out").join(name));
    let config = json!({
        "out": out.display().to_string(),
        "threads": threads,
        "args": serde_json::to_value(&args)?,
    });

    eprintln!("cotree {name}");
    eprintln!("  out = {}", out.display());
    eprintln!("  threads = {threads}");
    if let Some(obj) = config["args"].as_object() {
        for (k, v) in obj {
            eprintln!("  {k} = {v}");
        }
    }

    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();

    let mut run = Run {
        out: OutDir::claim(out, global.force, &args.outputs())?,
        inputs: Vec::new(),
        notes: Vec::new(),
    };
    body(&args, &mut run)?;
    let manifest = Manifest {
        tool: "cotree",
        version: env!("CARGO_PKG_VERSION"),
        command: name.to_string(),
        threads,
        config,
        inputs: std::mem::take(&mut run.inputs),
        outputs: run.out.written().to_vec(),
        notes: std::mem::take(&mut run.notes),
    };
    run.out.write_json("manifest.json", &manifest)
}

/// Directory of a dataset given as a path or as a bare name.
fn locate_dataset(dataset_arg: &str) -> Result<PathBuf> {
    let direct = PathBuf::from(dataset_arg);
    if direct.is_dir() {
        return Ok(direct);
    }
    let mut roots: Vec<PathBuf> = std::env::var_os("COTREE_DATA").map(PathBuf::from).into_iter().collect();
    roots.push(PathBuf::from("data"));
    roots
        .into_iter()
        .map(|r| r.join(dataset_arg))
        .find(|p| p.is_dir())
        .ok_or_else(|| invalid("dataset", dataset_arg, "no such directory here, under $COTREE_DATA or under ./data"))
}

fn load_dataset(dataset_arg: Option<&str>, name: Option<&str>, run: &mut Run) -> Result<Dataset> {
    let dataset_arg = dataset_arg.ok_or_else(|| CliError::Usage("'--dataset' is required".into()))?;
    let dir = locate_dataset(dataset_arg)?;
    let name = match name {
        Some(n) => n.to_string(),
        None => dir
            .canonicalize()
            .ok()
            .and_then(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .ok_or_else(|| invalid("dataset", dataset_arg, "cannot infer the file prefix; pass --name"))?,
    };
    let prefix = format!("{name}_");
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(|e| CliError::io(&dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            let f = p.file_name().unwrap_or_default().to_string_lossy();
            f.starts_with(&prefix) && f.ends_with(".txt")
        })
        .collect();
    files.sort();
    let dataset = load_tudataset(&dir, &name)?;
    for f in files {
        run.inputs.push(InputFile::read(&f)?);
    }
    log::info!("loaded {name}: {} graphs", dataset.len());
    Ok(dataset)
}

fn load_graph(input: &GraphInput, run: &mut Run) -> Result<Graph> {
    match (&input.graph, &input.dataset) {
        (Some(_), Some(_)) => Err(CliError::Usage("'--graph' and '--dataset' cannot be used together".into())),
        (None, None) => Err(CliError::Usage("one of '--graph' or '--dataset' is required".into())),
        (Some(path), None) => {
            run.inputs.push(InputFile::read(path)?);
            Ok(load_edge_list(path)?)
        }
        (None, Some(dataset_arg)) => {
            let ds = load_dataset(Some(dataset_arg), input.name.as_deref(), run)?;
            let count = ds.len();
            ds.graphs
                .into_iter()
                .nth(input.index)
                .ok_or_else(|| invalid("index", input.index, &format!("the dataset has {count} graphs")))
        }
    }
}

fn feature_mode(f: Features, ds: &Dataset) -> FeatureMode {
    match f {
        Features::Degree => FeatureMode::Degree,
        Features::DegreeCategory => FeatureMode::DegreeCategory,
        Features::Auto if ds.has_categories() => FeatureMode::DegreeCategory,
        Features::Auto => FeatureMode::Degree,
    }
}

fn tree_kind(rbbt: bool) -> TreeKind {
    if rbbt {
        TreeKind::Rbbt
    } else {
        TreeKind::Entropy
    }
}

impl CommandArgs for EntropyArgs {
    fn validate(&self) -> Result<()> {
        Ok(())
    }

    fn outputs(&self) -> Vec<&'static str> {
        vec!["entropy.txt"]
    }
}

pub fn entropy(a: &EntropyArgs, run: &mut Run) -> Result<()> {
    let graph = load_graph(&a.input, run)?;
    let tree = match &a.tree {
        Some(path) => {
            run.inputs.push(InputFile::read(path)?);
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            CodingTree::from_text(&text)?.0
        }
        None => CodingTree::star(&graph),
    };
    let h = entropy_of_tree(&graph, &tree)?;
    println!("{h:?}");
    run.out.write("entropy.txt", format!("{h:?}\n"))
}

impl CommandArgs for BuildTreeArgs {
    fn validate(&self) -> Result<()> {
        check_k("k", self.k)
    }

    fn outputs(&self) -> Vec<&'static str> {
        vec!["tree.txt"]
    }
}

pub fn build_tree(a: &BuildTreeArgs, run: &mut Run) -> Result<()> {
    let graph = load_graph(&a.input, run)?;
    let mut tree = if a.rbbt {
        build_rbbt(&graph, a.k, a.seed)?
    } else {
        build_coding_tree(&graph, a.k, a.seed)?
    };
    if a.canonical {
        tree = canonicalize_depth(&tree, a.k)?;
    }
    let h = entropy_of_tree(&graph, &tree)?;
    println!("entropy {h:?}, {} nodes, height {}", tree.len(), tree.height());
    run.out.write("tree.txt", tree.to_text(h))
}

impl CommandArgs for KernelArgs {
    fn validate(&self) -> Result<()> {
        check_k("k", self.k)
    }

    fn outputs(&self) -> Vec<&'static str> {
        let mut v = vec!["features.txt", "gram.csv"];
        if self.binary {
            v.push("gram.bin");
        }
        v
    }
}

pub fn kernel(a: &KernelArgs, run: &mut Run) -> Result<()> {
    let ds = load_dataset(a.input.dataset.as_deref(), a.input.name.as_deref(), run)?;
    let trees = build_trees(&ds, a.k, tree_kind(a.rbbt), a.seed)?;
    let init = NodeFeatureInit::fit(&ds.graphs, feature_mode(a.features, &ds))?;
    let labels = ds.graphs.iter().map(|g| init.initial_labels(g)).collect::<cotree::Result<Vec<_>>>()?;
    let (alphabets, features) = fit_features(&trees, &labels)?;
    let gram = GramMatrix::from_features(&features, a.normalize)?;

    // one line per graph: index, raw class label, layer:label:count triples
    let mut text = String::new();
    for (i, f) in features.iter().enumerate() {
        writeln!(text, "{i} {} {}", ds.label_values[ds.labels[i]], f.to_text()).unwrap();
    }
    run.out.write("features.txt", text)?;
    run.out.write("gram.csv", gram.to_csv())?;
    if a.binary {
        let path = run.out.path("gram.bin")?;
        gram.write_binary(&path)?;
    }
    println!("{}: {} graphs, {} feature columns, Gram {}x{}", ds.name, ds.len(), alphabets.len(), gram.len(), gram.len());
    Ok(())
}

impl CommandArgs for CvWlctArgs {
    fn validate(&self) -> Result<()> {
        check_nonempty("ks", &self.ks)?;
        check_nonempty("cs", &self.cs)?;
        for &k in &self.ks {
            check_k("ks", k)?;
        }
        if let Some(c) = self.cs.iter().find(|c| !(c.is_finite() && **c > 0.0)) {
            return Err(invalid("cs", c, "C must be positive"));
        }
        check_folds("folds", self.folds)?;
        check_folds("inner-folds", self.inner_folds)
    }

    fn outputs(&self) -> Vec<&'static str> {
        vec!["report.json", "table.txt"]
    }
}

pub fn cv_wlct(a: &CvWlctArgs, run: &mut Run) -> Result<()> {
    let ds = load_dataset(a.input.dataset.as_deref(), a.input.name.as_deref(), run)?;
    let cfg = WlctConfig {
        ks: a.ks.clone(),
        cs: a.cs.clone(),
        folds: a.folds,
        inner_folds: a.inner_folds,
        seed: a.seed,
        normalize: a.normalize,
        feature_mode: feature_mode(a.features, &ds),
        tree_kind: tree_kind(a.rbbt),
        selection: match a.selection {
            SelectionArg::BestMean => Selection::BestMean,
            SelectionArg::Nested => Selection::Nested,
        },
    };
    let report = run_wlct_cv(&ds, &cfg)?;
    let method = if a.rbbt { "WL-CT (RBBT)" } else { "WL-CT" };
    let mut table = format!("{:<16} {:<14} {}\n", "method", "dataset", "accuracy");
    writeln!(table, "{method:<16} {:<14} {}", ds.name, report.result).unwrap();
    print!("{table}");
    run.notes.push(CV_NOTE.into());
    run.out.write_json("report.json", &report)?;
    run.out.write("table.txt", table)
}

impl CommandArgs for CvHrnArgs {
    fn validate(&self) -> Result<()> {
        check_nonempty("ks", &self.ks)?;
        check_nonempty("pools", &self.pools)?;
        check_nonempty("hidden", &self.hidden)?;
        check_nonempty("batch-sizes", &self.batch_sizes)?;
        check_nonempty("dropouts", &self.dropouts)?;
        for &k in &self.ks {
            check_k("ks", k)?;
        }
        for &h in &self.hidden {
            check_positive("hidden", h)?;
        }
        for &b in &self.batch_sizes {
            check_positive("batch-sizes", b)?;
        }
        if let Some(d) = self.dropouts.iter().find(|d| !(0.0..1.0).contains(*d)) {
            return Err(invalid("dropouts", d, "must lie in [0, 1)"));
        }
        check_positive("epochs", self.epochs)?;
        check_folds("folds", self.folds)
    }

    fn outputs(&self) -> Vec<&'static str> {
        vec!["report.json", "table.txt"]
    }
}

pub fn cv_hrn(a: &CvHrnArgs, run: &mut Run) -> Result<()> {
    let ds = load_dataset(a.input.dataset.as_deref(), a.input.name.as_deref(), run)?;
    let cfg = HrnCvConfig {
        ks: a.ks.clone(),
        pools: a
            .pools
            .iter()
            .map(|p| match p {
                Pool::Sum => PoolMode::Sum,
                Pool::Average => PoolMode::Average,
                Pool::Root => PoolMode::Root,
            })
            .collect(),
        hidden: a.hidden.clone(),
        batch_sizes: a.batch_sizes.clone(),
        dropouts: a.dropouts.clone(),
        epochs: a.epochs,
        folds: a.folds,
        seed: a.seed,
        feature_mode: feature_mode(a.features, &ds),
        tree_kind: tree_kind(a.rbbt),
        batch_norm: a.batch_norm,
    };
    let report = run_hrn_cv(&ds, &cfg)?;
    let mut table = format!("{:<22} {:<14} {:<14} {}\n", "method", "dataset", "accuracy", "epoch");
    for cell in report.table() {
        let method = format!("HRN-{} k={}{}", cell.pool.to_string().to_uppercase(), cell.k, if a.rbbt { " RBBT" } else { "" });
        writeln!(table, "{method:<22} {:<14} {:<14} {}", ds.name, cell.result.to_string(), cell.best_epoch + 1).unwrap();
    }
    print!("{table}");
    run.notes.push(CV_NOTE.into());
    run.notes.push("each grid cell reports the epoch with the best mean test accuracy over folds".into());
    run.out.write_json("report.json", &report)?;
    run.out.write("table.txt", table)
}

impl CommandArgs for BenchArgs {
    fn validate(&self) -> Result<()> {
        if self.min_exp < 2 {
            return Err(invalid("min-exp", self.min_exp, "must be at least 2"));
        }
        if self.max_exp > 24 {
            return Err(invalid("max-exp", self.max_exp, "must be at most 24"));
        }
        if self.max_exp < self.min_exp {
            return Err(invalid("max-exp", self.max_exp, "must not be below --min-exp"));
        }
        if !(self.edge_factor.is_finite() && self.edge_factor > 0.0) {
            return Err(invalid("edge-factor", self.edge_factor, "must be positive"));
        }
        check_k("k", self.k)
    }

    fn outputs(&self) -> Vec<&'static str> {
        vec!["bench.json", "timings.json"]
    }
}

#[derive(Serialize)]
struct SizeRow {
    n: usize,
    m: usize,
    tree_nodes: usize,
}

pub fn bench(a: &BenchArgs, run: &mut Run) -> Result<()> {
    let sizes: Vec<usize> = (a.min_exp..=a.max_exp).map(|e| 1usize << e).collect();
    let report = bench_scaling(&sizes, a.edge_factor, a.k, a.seed)?;
    println!("{:>9} {:>10} {:>11} {:>12} {:>14}", "n", "m", "tree nodes", "build s", "featurize s");
    for r in &report.rows {
        println!("{:>9} {:>10} {:>11} {:>12.5} {:>14.5}", r.n, r.m, r.tree_nodes, r.build_secs, r.featurize_secs);
    }
    let slope = |s: Option<f64>| s.map_or("n/a".to_string(), |v| format!("{v:.3}"));
    println!("log-log slope: build vs m {}, featurize vs n {}", slope(report.build_slope), slope(report.featurize_slope));
    let sizes: Vec<SizeRow> = report.rows.iter().map(|r| SizeRow { n: r.n, m: r.m, tree_nodes: r.tree_nodes }).collect();
    run.notes.push("timings.json holds wall-clock measurements and differs between runs".into());
    run.out.write_json("bench.json", &sizes)?;
    run.out.write_json("timings.json", &report)
}

impl CommandArgs for FlopsArgs {
    fn validate(&self) -> Result<()> {
        check_k("k", self.k)?;
        check_positive("hidden", self.hidden)?;
        check_positive("graphs", self.graphs)
    }

    fn outputs(&self) -> Vec<&'static str> {
        vec!["flops.json"]
    }
}

pub fn flops(a: &FlopsArgs, run: &mut Run) -> Result<()> {
    let mut reports = Vec::new();
    println!("{:<12} {:>14} {:>14} {:>8}", "benchmark", "HRN FLOPs", "GIN-0 FLOPs", "ratio");
    for stats in reference_benchmarks() {
        let graphs = stats.synthetic(a.graphs, a.seed);
        let pool = if stats.bio { PoolMode::Sum } else { PoolMode::Average };
        let r = flop_comparison(stats.name, &graphs, FeatureMode::Degree, stats.classes, pool, a.k, a.hidden)?;
        println!("{:<12} {:>14.4e} {:>14.4e} {:>8.3}", r.dataset, r.hrn, r.gin, r.ratio);
        reports.push(r);
    }
    run.notes.push("graphs are synthetic, sized after each benchmark's published statistics; GIN-0 cost is analytic".into());
    run.out.write_json("flops.json", &reports)
}
