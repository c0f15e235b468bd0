use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::Graph;
use crate::error::{Error, Result};

/// A labelled collection of graphs.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub graphs: Vec<Graph>,
    /// Class id per graph, contiguous from 0.
    pub labels: Vec<usize>,
    /// Original label value for each class id, ascending.
    pub label_values: Vec<i64>,
}

impl Dataset {
    /// Remaps raw labels onto `0..C` in ascending order of their values.
    pub fn new(name: impl Into<String>, graphs: Vec<Graph>, raw_labels: &[i64]) -> Result<Self> {
        if graphs.len() != raw_labels.len() {
            return Err(Error::InvalidArgument(format!(
                "{} graphs but {} labels",
                graphs.len(),
                raw_labels.len()
            )));
        }
        let label_values: Vec<i64> = raw_labels
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let labels = raw_labels
            .iter()
            .map(|l| label_values.binary_search(l).unwrap())
            .collect();
        Ok(Dataset {
            name: name.into(),
            graphs,
            labels,
            label_values,
        })
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.label_values.len()
    }

    pub fn has_categories(&self) -> bool {
        !self.graphs.is_empty() && self.graphs.iter().all(|g| g.node_category().is_some())
    }

    pub fn mean_node_count(&self) -> f64 {
        let total: usize = self.graphs.iter().map(Graph::node_count).sum();
        total as f64 / self.graphs.len().max(1) as f64
    }

    pub fn mean_edge_count(&self) -> f64 {
        let total: usize = self.graphs.iter().map(Graph::edge_count).sum();
        total as f64 / self.graphs.len().max(1) as f64
    }

    /// Restricts the dataset to the given graph indices, keeping the class map.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            graphs: indices.iter().map(|&i| self.graphs[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            label_values: self.label_values.clone(),
        }
    }
}

fn read_lines(path: &Path, what: &'static str, required: bool) -> Result<Option<Vec<String>>> {
    if !path.exists() {
        if required {
            return Err(Error::MissingFile {
                what,
                path: path.to_path_buf(),
            });
        }
        return Ok(None);
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let trimmed = text.trim_end();
    if trimmed.is_empty() {
        return Ok(Some(Vec::new()));
    }
    Ok(Some(trimmed.lines().map(|l| l.trim().to_string()).collect()))
}

fn parse_int(path: &Path, line: usize, field: &str) -> Result<i64> {
    field.trim().parse::<i64>().map_err(|_| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: format!("expected an integer, found {field:?}"),
    })
}

fn parse_column(path: &Path, lines: &[String]) -> Result<Vec<i64>> {
    lines
        .iter()
        .enumerate()
        .map(|(i, l)| parse_int(path, i + 1, l))
        .collect()
}

/// Reads a single graph from a whitespace-separated edge list with 0-based
/// vertex ids, one `u v` pair per line. Blank lines and lines starting with
/// `#` are skipped. Both orientations of an edge may appear; they are merged.
/// The vertex count is one more than the largest id.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut edges = Vec::new();
    let mut n = 0usize;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 2 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: format!("expected two vertex ids, found {line:?}"),
            });
        }
        let mut id = |s: &str| -> Result<u32> {
            let v = parse_int(path, i + 1, s)?;
            let v = u32::try_from(v).map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: format!("vertex id {v} out of range"),
            })?;
            n = n.max(v as usize + 1);
            Ok(v)
        };
        let (a, b) = (id(f[0])?, id(f[1])?);
        edges.push((a, b));
    }
    if edges.is_empty() {
        return Err(Error::InvalidGraph(format!("{}: no edges", path.display())));
    }
    Graph::from_edges_dedup(n, edges, None)
}

/// Loads `NAME_A.txt`, `NAME_graph_indicator.txt`, `NAME_graph_labels.txt`
/// and, when present, `NAME_node_labels.txt` from `dir`.
///
/// Node and graph ids in the files are 1-based; the result is 0-based with
/// each undirected edge stored once. Disconnected graphs are rejected.
pub fn load_tudataset(dir: impl AsRef<Path>, name: &str) -> Result<Dataset> {
    let dir = dir.as_ref();
    let file = |suffix: &str| -> PathBuf { dir.join(format!("{name}_{suffix}.txt")) };

    let a_path = file("A");
    let ind_path = file("graph_indicator");
    let gl_path = file("graph_labels");
    let nl_path = file("node_labels");

    let a_lines = read_lines(&a_path, "adjacency", true)?.unwrap();
    let ind_lines = read_lines(&ind_path, "graph indicator", true)?.unwrap();
    let gl_lines = read_lines(&gl_path, "graph labels", true)?.unwrap();
    let nl_lines = read_lines(&nl_path, "node labels", false)?;

    let indicator = parse_column(&ind_path, &ind_lines)?;
    let graph_labels = parse_column(&gl_path, &gl_lines)?;
    let graph_count = graph_labels.len();
    let total_nodes = indicator.len();

    // Nodes of graph g must occupy one contiguous run, graphs in order 1..=G.
    let mut starts = Vec::with_capacity(graph_count + 1);
    let mut expected = 1i64;
    for (t, &gid) in indicator.iter().enumerate() {
        if gid == expected {
            starts.push(t);
            expected += 1;
        } else if gid != expected - 1 {
            return Err(Error::Parse {
                path: ind_path.clone(),
                line: t + 1,
                msg: format!(
                    "node-index gap: node {} belongs to graph {gid}, expected graph {} or {}",
                    t + 1,
                    expected - 1,
                    expected
                ),
            });
        }
    }
    starts.push(total_nodes);
    if starts.len() != graph_count + 1 {
        return Err(Error::Parse {
            path: ind_path.clone(),
            line: total_nodes,
            msg: format!(
                "indicator covers {} graphs but {} graph labels were given",
                starts.len() - 1,
                graph_count
            ),
        });
    }

    let categories = match &nl_lines {
        Some(lines) => {
            let col = parse_column(&nl_path, lines)?;
            if col.len() != total_nodes {
                return Err(Error::Parse {
                    path: nl_path.clone(),
                    line: col.len(),
                    msg: format!("{} node labels for {total_nodes} nodes", col.len()),
                });
            }
            Some(col)
        }
        None => None,
    };

    let mut edges: Vec<Vec<(u32, u32)>> = vec![Vec::new(); graph_count];
    for (i, line) in a_lines.iter().enumerate() {
        let lineno = i + 1;
        let mut parts = line.split(',');
        let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Parse {
                path: a_path.clone(),
                line: lineno,
                msg: format!("expected \"i, j\", found {line:?}"),
            });
        };
        let (a, b) = (parse_int(&a_path, lineno, a)?, parse_int(&a_path, lineno, b)?);
        for x in [a, b] {
            if x < 1 || x as usize > total_nodes {
                return Err(Error::Parse {
                    path: a_path.clone(),
                    line: lineno,
                    msg: format!("edge references unknown node {x}"),
                });
            }
        }
        let (a, b) = (a as usize - 1, b as usize - 1);
        let (ga, gb) = (indicator[a] as usize - 1, indicator[b] as usize - 1);
        if ga != gb {
            return Err(Error::Parse {
                path: a_path.clone(),
                line: lineno,
                msg: format!("edge joins graphs {} and {}", ga + 1, gb + 1),
            });
        }
        if a == b {
            return Err(Error::Parse {
                path: a_path.clone(),
                line: lineno,
                msg: format!("self-loop on node {}", a + 1),
            });
        }
        let base = starts[ga];
        edges[ga].push(((a - base) as u32, (b - base) as u32));
    }

    let mut graphs = Vec::with_capacity(graph_count);
    for (gi, list) in edges.into_iter().enumerate() {
        let (lo, hi) = (starts[gi], starts[gi + 1]);
        let cats = categories.as_ref().map(|c| c[lo..hi].to_vec());
        let g = Graph::from_edges_dedup(hi - lo, list, cats)?;
        if !g.is_connected() {
            return Err(Error::Disconnected {
                dataset: name.to_string(),
                graph: gi,
            });
        }
        graphs.push(g);
    }
    Dataset::new(name, graphs, &graph_labels)
}

/// Writes `dataset` in the benchmark text format. Each undirected edge is
/// written in both directions, as in the published files.
pub fn write_tudataset(dataset: &Dataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = &dataset.name;
    let mut a = String::new();
    let mut ind = String::new();
    let mut gl = String::new();
    let mut nl = String::new();
    let with_categories = dataset.has_categories();
    let mut base = 0usize;
    for (gi, g) in dataset.graphs.iter().enumerate() {
        for v in 0..g.node_count() {
            for &u in g.neighbors(v) {
                writeln!(a, "{}, {}", base + v + 1, base + u as usize + 1).unwrap();
            }
            writeln!(ind, "{}", gi + 1).unwrap();
            if with_categories {
                writeln!(nl, "{}", g.node_category().unwrap()[v]).unwrap();
            }
        }
        writeln!(gl, "{}", dataset.label_values[dataset.labels[gi]]).unwrap();
        base += g.node_count();
    }
    let write = |suffix: &str, body: &str| -> Result<()> {
        let path = dir.join(format!("{name}_{suffix}.txt"));
        fs::write(&path, body).map_err(|e| Error::io(path, e))
    };
    write("A", &a)?;
    write("graph_indicator", &ind)?;
    write("graph_labels", &gl)?;
    if with_categories {
        write("node_labels", &nl)?;
    }
    Ok(())
}
