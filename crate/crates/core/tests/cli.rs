use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use cotree::graph::{write_tudataset, Dataset, Graph};

fn cotree(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cotree"))
        .args(args)
        .current_dir(dir)
        .env_remove("COTREE_DATA")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(o: Output) -> Output {
    assert!(o.status.success(), "stderr: {}", stderr(&o));
    o
}

/// Paths against stars, with two node categories.
fn toy_dataset(dir: &Path) {
    let mut graphs = Vec::new();
    let mut labels = Vec::new();
    for i in 0..12usize {
        let n = 5 + i % 4;
        let cats = Some((0..n as i64).map(|v| v % 2).collect());
        graphs.push(Graph::new(n, (0..n as u32 - 1).map(|v| (v, v + 1)), cats.clone()).unwrap());
        graphs.push(Graph::new(n, (1..n as u32).map(|v| (0, v)), cats).unwrap());
        labels.extend([0i64, 1]);
    }
    let ds = Dataset::new("TOY", graphs, &labels).unwrap();
    let data = dir.join("data").join("TOY");
    fs::create_dir_all(&data).unwrap();
    write_tudataset(&ds, &data).unwrap();
}

#[test]
fn entropy_of_an_edge_is_one_bit() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("k2.txt"), "0 1\n").unwrap();
    let o = ok(cotree(tmp.path(), &["entropy", "--graph", "k2.txt"]));
    assert_eq!(stdout(&o), "1.0\n");
    assert!(stderr(&o).contains("graph = \"k2.txt\""), "config is echoed");
    let written = fs::read_to_string(tmp.path().join("cotree-out/entropy/entropy.txt")).unwrap();
    assert_eq!(written, "1.0\n");
}

#[test]
fn build_tree_header_carries_entropy() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("p3.txt"), "0 1\n1 2\n").unwrap();
    ok(cotree(tmp.path(), &["build-tree", "--graph", "p3.txt", "--k", "2", "--out", "t"]));
    let text = fs::read_to_string(tmp.path().join("t/tree.txt")).unwrap();
    let h: f64 = text.lines().next().unwrap().split_whitespace().nth(2).unwrap().parse().unwrap();
    assert!((h - 1.2925).abs() < 1e-4, "{h}");

    // the written tree reads back and prices the same
    let o = ok(cotree(tmp.path(), &["entropy", "--graph", "p3.txt", "--tree", "t/tree.txt", "--out", "e"]));
    let again: f64 = stdout(&o).trim().parse().unwrap();
    assert_eq!(again, h);
}

#[test]
fn outputs_are_not_overwritten_without_force() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("k2.txt"), "0 1\n").unwrap();
    ok(cotree(tmp.path(), &["entropy", "--graph", "k2.txt", "--out", "o"]));
    let o = cotree(tmp.path(), &["entropy", "--graph", "k2.txt", "--out", "o"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("--force"));
    ok(cotree(tmp.path(), &["entropy", "--graph", "k2.txt", "--out", "o", "--force"]));
}

#[test]
fn failures_are_one_line_and_name_the_token() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("k2.txt"), "0 1\n").unwrap();
    let cases: [(&[&str], &str); 6] = [
        (&["entropy", "--graph", "k2.txt", "--bogus"], "--bogus"),
        (&["frobnicate"], "frobnicate"),
        (&["build-tree", "--graph", "k2.txt", "--k", "1"], "--k"),
        (&["cv-wlct", "--dataset", "nowhere"], "nowhere"),
        (&["cv-wlct", "--dataset", "x", "--cs", "0.1,-1"], "-1"),
        (&["entropy", "--graph", "missing.txt"], "missing.txt"),
    ];
    for (args, token) in cases {
        let o = cotree(tmp.path(), args);
        assert!(!o.status.success(), "{args:?}");
        let err = stderr(&o);
        let last = err.lines().last().unwrap_or_default();
        assert!(last.starts_with("cotree: error: ") && last.contains(token), "{args:?}: {err}");
        assert!(!err.lines().any(|l| l.starts_with("Usage")), "{err}");
    }
}

#[test]
fn flags_beat_config_which_beats_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("p3.txt"), "0 1\n1 2\n").unwrap();
    fs::write(tmp.path().join("c.toml"), "threads = 1\n[build-tree]\ngraph = \"p3.txt\"\nk = 3\nseed = 5\n").unwrap();
    ok(cotree(tmp.path(), &["build-tree", "--config", "c.toml", "--seed", "7", "--out", "t"]));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("t/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["args"]["k"], 3);
    assert_eq!(manifest["config"]["args"]["seed"], 7);
    assert_eq!(manifest["config"]["args"]["rbbt"], false);
    assert_eq!(manifest["threads"], 1);

    fs::write(tmp.path().join("bad.toml"), "[build-tree]\nkk = 3\n").unwrap();
    let o = cotree(tmp.path(), &["build-tree", "--config", "bad.toml", "--graph", "p3.txt"]);
    assert!(!o.status.success() && stderr(&o).contains("\"kk\""));
}

#[test]
fn help_lists_every_flag_with_its_default() {
    let tmp = tempfile::tempdir().unwrap();
    let o = ok(cotree(tmp.path(), &["cv-hrn", "--help"]));
    let help = stdout(&o);
    for flag in ["--ks", "--pools", "--hidden", "--batch-sizes", "--dropouts", "--epochs", "--folds", "--seed", "--threads", "--force"] {
        assert!(help.contains(flag), "{flag}");
    }
    for default in ["[default: 350]", "[default: 10]", "[default: sum]", "[default: auto]", "[default: available cores]"] {
        assert!(help.contains(default), "{default}");
    }
}

#[test]
fn dataset_commands_are_byte_for_byte_repeatable() {
    let tmp = tempfile::tempdir().unwrap();
    toy_dataset(tmp.path());
    let runs: [&[&str]; 5] = [
        &["kernel", "--dataset", "TOY", "--binary"],
        &["cv-wlct", "--dataset", "TOY", "--ks", "2,3", "--cs", "1", "--folds", "4"],
        &["cv-hrn", "--dataset", "TOY", "--epochs", "3", "--folds", "3", "--hidden", "4"],
        &["build-tree", "--dataset", "TOY", "--index", "3", "--rbbt", "--seed", "9"],
        &["flops", "--graphs", "3"],
    ];
    for args in runs {
        let mut first = Vec::new();
        for pass in 0..2 {
            let mut full = args.to_vec();
            full.extend(["--out", "o", "--force", "--threads", "2"]);
            ok(cotree(tmp.path(), &full));
            let mut files: Vec<_> = fs::read_dir(tmp.path().join("o")).unwrap().map(|e| e.unwrap().path()).collect();
            files.sort();
            let contents: Vec<(String, Vec<u8>)> = files
                .iter()
                .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(p).unwrap()))
                .collect();
            if pass == 0 {
                first = contents;
            } else {
                assert_eq!(first, contents, "{args:?}");
            }
        }
        fs::remove_dir_all(tmp.path().join("o")).unwrap();
    }
}

#[test]
fn bench_sizes_repeat_and_timings_are_separate() {
    let tmp = tempfile::tempdir().unwrap();
    let args = ["bench", "--min-exp", "5", "--max-exp", "7", "--out", "b", "--force"];
    ok(cotree(tmp.path(), &args));
    let first = fs::read(tmp.path().join("b/bench.json")).unwrap();
    ok(cotree(tmp.path(), &args));
    assert_eq!(first, fs::read(tmp.path().join("b/bench.json")).unwrap());
    let timings: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("b/timings.json")).unwrap()).unwrap();
    assert_eq!(timings["rows"].as_array().unwrap().len(), 3);
}
