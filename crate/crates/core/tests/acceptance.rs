//! Acceptance run: one PASS or FAIL line per criterion and a summary line.
//! Failures exit nonzero only with COTREE_ACCEPTANCE_STRICT=1, so that a
//! workspace test run still reaches the suites after this one. Datasets are
//! looked up under $COTREE_DATA, then the workspace `data/` directory; a
//! missing dataset fails its criterion with the reason given.

mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::{entropy_of, exhaustive_min, random_deletes, random_merges};
use cotree::eval::{
    bench_scaling, flop_comparison, reference_benchmarks, run_hrn_cv, run_wlct_cv, synthetic_graph, HrnCvConfig, TreeKind,
    WlctConfig,
};
use cotree::graph::{load_tudataset, Dataset, FeatureMode, Graph, NodeFeatureInit};
use cotree::hrn::{HrnConfig, HrnModel, Mode, PoolMode, TreeBatch};
use cotree::kernel::{fit_features, GramMatrix};
use cotree::tree::{build_coding_tree, canonicalize_depth, CodingTree};
use nalgebra::DMatrix;
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// criterion 1
const ORACLE_GRAPHS: u64 = 50;
const ORACLE_SLACK: f64 = 1e-9;
const ORACLE_LIMIT: Duration = Duration::from_secs(60);
// criterion 2
const MOVES: usize = 1000;
const MOVE_LIMIT: Duration = Duration::from_secs(10);
// criterion 3
const BENCH_EXPS: std::ops::RangeInclusive<u32> = 10..=17;
const BENCH_EDGE_FACTOR: f64 = 4.0;
const BUILD_SLOPE_MAX: f64 = 1.3;
const FEATURIZE_SLOPE_MAX: f64 = 1.2;
const SCALING_LIMIT: Duration = Duration::from_secs(600);
// criterion 4
const EIGEN_REL_TOL: f64 = 1e-8;
// criterion 5
const GRAD_REL_MAX: f64 = 1e-4;
const GRAD_STEP: f64 = 1e-5;
const GRAD_LIMIT: Duration = Duration::from_secs(10);
// criterion 6
const WLCT_MUTAG_MIN: f64 = 83.4;
const WLCT_PTC_MIN: f64 = 57.0;
const HRN_MUTAG_MIN: f64 = 85.0;
const CV_LIMIT: Duration = Duration::from_secs(1800);
// criterion 7
const ABLATION_SEEDS: [u64; 3] = [0, 1, 2];
// criterion 8
const FLOP_RATIO_MAX: f64 = 0.5;
const FLOP_K: u32 = 4;
const FLOP_HIDDEN: usize = 32;
const FLOP_GRAPHS: usize = 100;

const MUTAG: &str = "MUTAG";
const PTC: &str = "PTC_MR";
const IMDB: &str = "IMDB-BINARY";

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn data_dir(name: &str) -> Option<PathBuf> {
    let mut roots = Vec::new();
    if let Some(d) = std::env::var_os("COTREE_DATA") {
        roots.push(PathBuf::from(d));
    }
    roots.push(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data"));
    roots.into_iter().map(|r| r.join(name)).find(|d| d.join(format!("{name}_A.txt")).exists())
}

fn dataset(name: &str) -> Result<Dataset, String> {
    let dir = data_dir(name).ok_or_else(|| format!("blocked: dataset {name} not found"))?;
    load_tudataset(&dir, name).map_err(|e| e.to_string())
}

fn features_for(ds: &Dataset) -> FeatureMode {
    if ds.has_categories() {
        FeatureMode::DegreeCategory
    } else {
        FeatureMode::Degree
    }
}

fn oracle_optimality() -> Verdict {
    let start = Instant::now();
    let mut worst = Vec::new();
    for seed in 0..ORACLE_GRAPHS {
        let n = 3 + seed as usize % 4;
        let ef = [1.0, 1.3, 1.7, 2.5][seed as usize / 4 % 4];
        let g = synthetic_graph(n, ef, 1000 + seed);
        let star = entropy_of(&g, &CodingTree::star(&g));
        for k in [2, 3] {
            let h = match build_coding_tree(&g, k, seed) {
                Ok(t) if t.height() <= k => entropy_of(&g, &t),
                _ => return verdict(false, format!("graph {seed}: no valid tree for k={k}")),
            };
            let best = exhaustive_min(&g, k);
            if h < best - ORACLE_SLACK || h > star + ORACLE_SLACK {
                worst.push(format!("graph {seed} k={k}: optimum {best:.6} greedy {h:.6} star {star:.6}"));
            }
        }
    }
    let t = start.elapsed();
    let pass = worst.is_empty() && t < ORACLE_LIMIT;
    verdict(pass, format!("{ORACLE_GRAPHS} graphs x k in {{2,3}}, {} violations, {:.2?}", worst.len(), t))
}

fn incremental_deltas() -> Verdict {
    let start = Instant::now();
    // the move functions assert agreement within their tolerance
    let outcome = std::panic::catch_unwind(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (mut merges, mut deletes) = (0, 0);
        let mut i = 0u64;
        while merges + deletes < MOVES || merges < MOVES / 2 || deletes < MOVES / 2 {
            let g = synthetic_graph(rng.gen_range(4..40), [1.0, 1.5, 3.0][i as usize % 3], i);
            merges += random_merges(&g, &mut rng);
            deletes += random_deletes(&g, &mut rng);
            i += 1;
        }
        (merges, deletes)
    });
    let t = start.elapsed();
    match outcome {
        Ok((m, d)) => verdict(t < MOVE_LIMIT, format!("{m} merges + {d} deletes within {:e}, {t:.2?}", common::TOL)),
        Err(_) => verdict(false, "a delta disagreed with recomputation"),
    }
}

fn scaling(datasets: &[(&str, Result<Dataset, String>)]) -> Verdict {
    let start = Instant::now();
    let mut oversize = 0;
    let mut graphs = 0;
    let mut notes = Vec::new();
    for (name, ds) in datasets {
        let Ok(ds) = ds else {
            notes.push(format!("{name} absent"));
            continue;
        };
        for g in &ds.graphs {
            for k in 2..=5 {
                let t = build_coding_tree(g, k, 0).expect("benchmark graphs are connected");
                graphs += 1;
                if t.len() > 2 * g.node_count() - 1 {
                    oversize += 1;
                }
            }
        }
    }
    let sizes: Vec<usize> = BENCH_EXPS.map(|e| 1usize << e).collect();
    let report = bench_scaling(&sizes, BENCH_EDGE_FACTOR, 2, 0).expect("synthetic graphs are valid");
    oversize += report.rows.iter().filter(|r| r.tree_nodes > 2 * r.n - 1).count();
    let build = report.build_slope.unwrap_or(f64::NAN);
    let feat = report.featurize_slope.unwrap_or(f64::NAN);
    let t = start.elapsed();
    let pass = oversize == 0 && build <= BUILD_SLOPE_MAX && feat <= FEATURIZE_SLOPE_MAX && t < SCALING_LIMIT;
    let largest = report.rows.last().map_or(0.0, |r| r.build_secs);
    let profile = if cfg!(debug_assertions) { "debug assertions on" } else { "debug assertions off" };
    let mut detail = format!(
        "{oversize} trees over 2n-1 ({graphs} benchmark trees + {} synthetic); build slope {build:.3} (max {BUILD_SLOPE_MAX}), \
         featurize slope {feat:.3} (max {FEATURIZE_SLOPE_MAX}); build at n=2^{} {largest:.2}s ({profile}); {t:.1?}",
        report.rows.len(),
        BENCH_EXPS.end()
    );
    if !notes.is_empty() {
        detail.push_str(&format!("; {}", notes.join(", ")));
    }
    verdict(pass, detail)
}

fn kernel_validity(mutag: &Result<Dataset, String>, imdb: &Result<Dataset, String>) -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, ds) in [(MUTAG, mutag), (IMDB, imdb)] {
        let ds = match ds {
            Ok(ds) => ds,
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: {e}"));
                continue;
            }
        };
        let k = 2;
        let trees: Vec<CodingTree> = ds
            .graphs
            .iter()
            .map(|g| canonicalize_depth(&build_coding_tree(g, k, 0).unwrap(), k).unwrap())
            .collect();
        let init = NodeFeatureInit::fit(ds.graphs.iter(), features_for(ds)).unwrap();
        let labels: Vec<Vec<u32>> = ds.graphs.iter().map(|g| init.initial_labels(g).unwrap()).collect();
        let (_, features) = fit_features(&trees, &labels).unwrap();
        let totals_ok = trees
            .iter()
            .zip(&features)
            .all(|(t, f)| f.layer_totals().iter().map(|&c| c as usize).eq(t.level_sizes()));
        let mut worst: f64 = f64::INFINITY;
        for normalize in [false, true] {
            let gram = GramMatrix::from_features(&features, normalize).unwrap();
            let n = gram.len();
            let m = DMatrix::from_fn(n, n, |i, j| gram.get(i, j));
            let trace = m.trace();
            let min = m.symmetric_eigen().eigenvalues.min();
            worst = worst.min(min / trace);
        }
        pass &= totals_ok && worst >= -EIGEN_REL_TOL;
        parts.push(format!("{name}: min eigenvalue/trace {worst:.2e}, layer totals {}", if totals_ok { "match" } else { "MISMATCH" }));
    }
    verdict(pass, parts.join("; "))
}

fn gradient_check() -> Verdict {
    let start = Instant::now();
    let graphs = [
        Graph::new(4, [(0, 1), (1, 2), (2, 3)], None).unwrap(),
        Graph::new(5, [(0, 1), (0, 2), (0, 3), (3, 4)], None).unwrap(),
        Graph::new(6, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (3, 5)], None).unwrap(),
    ];
    let items: Vec<(CodingTree, Array2<f64>)> = graphs
        .iter()
        .map(|g| {
            let t = canonicalize_depth(&build_coding_tree(g, 3, 0).unwrap(), 3).unwrap();
            let x = Array2::from_shape_fn((g.node_count(), 3), |(v, j)| ((v * 7 + j * 3) % 5) as f64 / 4.0 - 0.3);
            (t, x)
        })
        .collect();
    let trees: Vec<&CodingTree> = items.iter().map(|(t, _)| t).collect();
    let xs: Vec<&Array2<f64>> = items.iter().map(|(_, x)| x).collect();
    let batch = TreeBatch::new(&trees, &xs).unwrap();
    let labels = [0, 2, 1];
    let mut worst: f64 = 0.0;
    let mut params = 0;
    for pool in [PoolMode::Sum, PoolMode::Average, PoolMode::Root] {
        let cfg = HrnConfig { input_dim: 3, hidden: 5, height: 3, classes: 3, pool, dropout: 0.0, batch_norm: false };
        let mut model = HrnModel::new(cfg, 11).unwrap();
        let (_, grads, _) = model.loss_and_gradients(&batch, &labels, None).unwrap();
        for i in 0..model.param_count() {
            let orig = model.params()[i];
            model.params_mut()[i] = orig + GRAD_STEP;
            let up = model.loss(&batch, &labels, Mode::Train).unwrap();
            model.params_mut()[i] = orig - GRAD_STEP;
            let down = model.loss(&batch, &labels, Mode::Train).unwrap();
            model.params_mut()[i] = orig;
            let numeric = (up - down) / (2.0 * GRAD_STEP);
            let scale = numeric.abs().max(grads[i].abs());
            if scale > 1e-8 {
                worst = worst.max((numeric - grads[i]).abs() / scale);
            }
        }
        params += model.param_count();
    }
    let t = start.elapsed();
    verdict(worst < GRAD_REL_MAX && t < GRAD_LIMIT, format!("max relative error {worst:.2e} over {params} parameters, {t:.2?}"))
}

fn wlct(ds: &Dataset) -> f64 {
    let cfg = WlctConfig { feature_mode: features_for(ds), ..WlctConfig::default() };
    run_wlct_cv(ds, &cfg).unwrap().result.mean
}

fn hrn(ds: &Dataset, kind: TreeKind, seed: u64) -> f64 {
    let cfg = HrnCvConfig {
        pools: vec![PoolMode::Average],
        feature_mode: features_for(ds),
        tree_kind: kind,
        seed,
        ..HrnCvConfig::default()
    };
    run_hrn_cv(ds, &cfg).unwrap().best().result.mean
}

fn accuracy(mutag: &Result<Dataset, String>, ptc: &Result<Dataset, String>, hrn_mutag: Option<(f64, Duration)>) -> Verdict {
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, ds, min) in [(MUTAG, mutag, WLCT_MUTAG_MIN), (PTC, ptc, WLCT_PTC_MIN)] {
        match ds {
            Ok(ds) => {
                let acc = wlct(ds);
                pass &= acc >= min;
                parts.push(format!("WL-CT {name} {acc:.1} (min {min})"));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("WL-CT {name}: {e}"));
            }
        }
    }
    match hrn_mutag {
        Some((acc, hrn_time)) => {
            pass &= acc >= HRN_MUTAG_MIN;
            parts.push(format!("HRN {MUTAG} average k=2 {acc:.1} (min {HRN_MUTAG_MIN}) in {hrn_time:.1?}"));
        }
        None => {
            pass = false;
            parts.push(format!("HRN {MUTAG}: dataset missing"));
        }
    }
    let t = start.elapsed() + hrn_mutag.map_or(Duration::ZERO, |(_, d)| d);
    pass &= t < CV_LIMIT;
    verdict(pass, format!("{}; total {t:.1?}", parts.join("; ")))
}

fn ablation(mutag: &Result<Dataset, String>, imdb: &Result<Dataset, String>) -> (Verdict, Option<(f64, Duration)>) {
    let mut parts = Vec::new();
    let mut pass = true;
    let mut mutag_seed0 = None;
    for (name, ds) in [(MUTAG, mutag), (IMDB, imdb)] {
        let ds = match ds {
            Ok(ds) => ds,
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: {e}"));
                continue;
            }
        };
        let mut se = Vec::new();
        let mut rb = Vec::new();
        for seed in ABLATION_SEEDS {
            let start = Instant::now();
            se.push(hrn(ds, TreeKind::Entropy, seed));
            if name == MUTAG && mutag_seed0.is_none() {
                mutag_seed0 = Some((se[0], start.elapsed()));
            }
            rb.push(hrn(ds, TreeKind::Rbbt, seed));
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let (a, b) = (mean(&se), mean(&rb));
        pass &= a >= b;
        parts.push(format!("{name}: entropy trees {a:.2} vs RBBT {b:.2}"));
    }
    (verdict(pass, format!("HRN average k=2 over seeds {ABLATION_SEEDS:?}; {}", parts.join("; "))), mutag_seed0)
}

fn flop_ratio() -> Verdict {
    let mut parts = Vec::new();
    let mut pass = true;
    for stats in reference_benchmarks() {
        let graphs = stats.synthetic(FLOP_GRAPHS, 0);
        let pool = if stats.bio { PoolMode::Sum } else { PoolMode::Average };
        let r = flop_comparison(stats.name, &graphs, FeatureMode::Degree, stats.classes, pool, FLOP_K, FLOP_HIDDEN).unwrap();
        pass &= r.ratio < FLOP_RATIO_MAX;
        parts.push(format!("{} {:.3}", r.dataset, r.ratio));
    }
    verdict(pass, format!("HRN/GIN-0 ratios (max {FLOP_RATIO_MAX}): {}", parts.join(", ")))
}

fn cli_determinism(mutag: &Result<Dataset, String>) -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    std::fs::write(dir.join("g.txt"), "0 1\n1 2\n2 0\n2 3\n3 4\n4 5\n5 3\n").unwrap();
    let data = match (mutag, data_dir(MUTAG)) {
        (Ok(_), Some(d)) => d.to_string_lossy().into_owned(),
        _ => return verdict(false, format!("blocked: dataset {MUTAG} not found")),
    };
    let runs: Vec<Vec<&str>> = vec![
        vec!["entropy", "--graph", "g.txt"],
        vec!["build-tree", "--graph", "g.txt", "--k", "3", "--seed", "4"],
        vec!["build-tree", "--dataset", &data, "--index", "7", "--rbbt", "--canonical"],
        vec!["kernel", "--dataset", &data, "--k", "3", "--binary"],
        vec!["cv-wlct", "--dataset", &data, "--ks", "2,3", "--cs", "0.1,10"],
        vec!["cv-hrn", "--dataset", &data, "--epochs", "15", "--pools", "sum,root"],
        vec!["bench", "--min-exp", "6", "--max-exp", "9"],
        vec!["flops", "--graphs", "20"],
    ];
    let mut differing = Vec::new();
    let mut files = 0;
    for args in &runs {
        let mut outputs = Vec::new();
        let out = dir.join("out");
        for _ in 0..2 {
            let status = Command::new(env!("CARGO_BIN_EXE_cotree"))
                .args(args)
                .arg("--out")
                .arg(&out)
                .arg("--force")
                .current_dir(dir)
                .env_remove("COTREE_DATA")
                .output()
                .unwrap();
            if !status.status.success() {
                return verdict(false, format!("{} failed: {}", args[0], String::from_utf8_lossy(&status.stderr).trim()));
            }
            let mut listing: Vec<(String, Vec<u8>)> = std::fs::read_dir(&out)
                .unwrap()
                .map(|e| e.unwrap().path())
                // wall-clock measurements are kept apart from the results
                .filter(|p| p.file_name().unwrap() != "timings.json")
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
                .collect();
            listing.sort();
            outputs.push(listing);
        }
        files += outputs[0].len();
        if outputs[0] != outputs[1] {
            differing.push(args[0]);
        }
    }
    verdict(
        differing.is_empty(),
        format!("{} subcommand runs, {files} files compared, differing: {differing:?} (bench timings.json excluded)", runs.len()),
    )
}

fn main() -> ExitCode {
    let mut failed = Vec::new();
    let mut report = |n: usize, name: &str, v: Verdict| {
        println!("criterion {n} {name}: {} - {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        if !v.pass {
            failed.push(n);
        }
    };
    let mutag = dataset(MUTAG);
    let ptc = dataset(PTC);
    let imdb = dataset(IMDB);

    report(1, "oracle optimality", oracle_optimality());
    report(2, "incremental deltas", incremental_deltas());
    report(3, "size and scaling", scaling(&[(MUTAG, mutag.clone()), (PTC, ptc.clone()), (IMDB, imdb.clone())]));
    report(4, "kernel validity", kernel_validity(&mutag, &imdb));
    report(5, "gradient check", gradient_check());
    // the ablation's seed-0 entropy run is the HRN accuracy run
    let (ablation, hrn_mutag) = ablation(&mutag, &imdb);
    report(6, "accuracy", accuracy(&mutag, &ptc, hrn_mutag));
    report(7, "tree ablation", ablation);
    report(8, "flop ratio", flop_ratio());
    report(9, "cli determinism", cli_determinism(&mutag));

    if failed.is_empty() {
        println!("acceptance: all criteria pass");
        return ExitCode::SUCCESS;
    }
    println!("acceptance: FAILED criteria {failed:?}");
    if std::env::var_os("COTREE_ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
