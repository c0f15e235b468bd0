//! Label propagation up a coding tree and the WL-CT kernel: each node's
//! label is the interned sorted multiset of its children's labels, and a
//! tree's feature vector counts labels per layer.

use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tree::CodingTree;

static GENERATION: AtomicU64 = AtomicU64::new(1);

/// One exact interner per layer. Layer 0 interns leaf labels, layer `i > 0`
/// interns sorted lists of layer `i - 1` labels. Ids are dense per layer and
/// the layer index is part of every feature key, so layers never share a
/// letter.
#[derive(Debug, Clone)]
pub struct LayerAlphabets {
    generation: u64,
    layers: Vec<HashMap<Vec<u32>, u32>>,
}

impl LayerAlphabets {
    /// Empty alphabets for layers `0..=k`.
    pub fn new(k: u32) -> Self {
        LayerAlphabets {
            generation: GENERATION.fetch_add(1, Ordering::Relaxed),
            layers: vec![HashMap::new(); k as usize + 1],
        }
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn height(&self) -> u32 {
        self.layers.len() as u32 - 1
    }

    /// Number of letters in each layer.
    pub fn sizes(&self) -> Vec<usize> {
        self.layers.iter().map(HashMap::len).collect()
    }

    /// Total number of letters, i.e. the feature dimension.
    pub fn len(&self) -> usize {
        self.layers.iter().map(HashMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Column of `(layer, label)` in a dense feature layout.
    pub fn column(&self, layer: u32, label: u32) -> usize {
        self.layers[..layer as usize].iter().map(HashMap::len).sum::<usize>() + label as usize
    }

    fn intern(&mut self, layer: usize, key: Vec<u32>) -> u32 {
        let table = &mut self.layers[layer];
        let next = table.len() as u32;
        *table.entry(key).or_insert(next)
    }

    fn lookup(&self, layer: usize, key: &[u32]) -> Result<u32> {
        self.layers[layer]
            .get(key)
            .copied()
            .ok_or_else(|| Error::Vocabulary(format!("layer {layer}: child labels {key:?} were never interned")))
    }
}

fn check_shape(tree: &CodingTree, leaf_labels: &[u32], alphabets: &LayerAlphabets) -> Result<()> {
    if leaf_labels.len() != tree.leaf_count() {
        return Err(Error::Dimension(format!(
            "{} leaf labels for {} leaves",
            leaf_labels.len(),
            tree.leaf_count()
        )));
    }
    if tree.height() != alphabets.height() {
        return Err(Error::NotCanonical(format!(
            "tree height {} differs from alphabet height {}",
            tree.height(),
            alphabets.height()
        )));
    }
    for (id, node) in tree.nodes().iter().enumerate() {
        for &c in &node.children {
            if tree.node(c).level + 1 != node.level {
                return Err(Error::NotCanonical(format!(
                    "node {id} at level {} has child {c} at level {}",
                    node.level,
                    tree.node(c).level
                )));
            }
        }
    }
    Ok(())
}

// Nodes are stored by ascending level, so one forward pass sees every child
// before its parent.
fn propagate(
    tree: &CodingTree,
    leaf_labels: &[u32],
    mut letter: impl FnMut(usize, Vec<u32>) -> Result<u32>,
) -> Result<Vec<u32>> {
    let mut labels = vec![0u32; tree.len()];
    for (id, node) in tree.nodes().iter().enumerate() {
        let key = match node.vertex {
            Some(v) => vec![leaf_labels[v as usize]],
            None => {
                let mut key: Vec<u32> = node.children.iter().map(|&c| labels[c as usize]).collect();
                key.sort_unstable();
                key
            }
        };
        labels[id] = letter(node.level as usize, key)?;
    }
    Ok(labels)
}

/// Labels every node of a depth-canonical tree, interning new letters.
pub fn hierarchical_reporting(tree: &CodingTree, leaf_labels: &[u32], alphabets: &mut LayerAlphabets) -> Result<Vec<u32>> {
    check_shape(tree, leaf_labels, alphabets)?;
    propagate(tree, leaf_labels, |layer, key| Ok(alphabets.intern(layer, key)))
}

/// Read-only variant of [`hierarchical_reporting`]; fails on unseen letters.
pub fn lookup_labels(tree: &CodingTree, leaf_labels: &[u32], alphabets: &LayerAlphabets) -> Result<Vec<u32>> {
    check_shape(tree, leaf_labels, alphabets)?;
    propagate(tree, leaf_labels, |layer, key| alphabets.lookup(layer, &key))
}

/// Sparse per-layer label counts of one tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector {
    generation: u64,
    /// `(layer, label) -> count`, sorted by key.
    entries: Vec<((u32, u32), u64)>,
    layer_totals: Vec<u64>,
}

impl FeatureVector {
    /// Builds a vector from explicit counts. Zero counts are dropped.
    pub fn from_counts(generation: u64, counts: impl IntoIterator<Item = ((u32, u32), u64)>) -> Self {
        let mut merged: HashMap<(u32, u32), u64> = HashMap::new();
        for (key, c) in counts {
            *merged.entry(key).or_insert(0) += c;
        }
        let mut entries: Vec<_> = merged.into_iter().filter(|&(_, c)| c > 0).collect();
        entries.sort_unstable();
        let layers = entries.last().map_or(0, |((l, _), _)| *l as usize + 1);
        let mut layer_totals = vec![0u64; layers];
        for &((l, _), c) in &entries {
            layer_totals[l as usize] += c;
        }
        FeatureVector {
            generation,
            entries,
            layer_totals,
        }
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn entries(&self) -> &[((u32, u32), u64)] {
        &self.entries
    }

    /// Node count per layer.
    pub fn layer_totals(&self) -> &[u64] {
        &self.layer_totals
    }

    pub fn count(&self, layer: u32, label: u32) -> u64 {
        self.entries
            .binary_search_by_key(&(layer, label), |&(k, _)| k)
            .map_or(0, |i| self.entries[i].1)
    }

    pub fn squared_norm(&self) -> f64 {
        self.entries.iter().map(|&(_, c)| (c as f64) * (c as f64)).sum()
    }

    /// Space-separated `layer:label:count` triples.
    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|((l, a), c)| format!("{l}:{a}:{c}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Feature vector of a tree whose letters are all in `alphabets`.
pub fn featurize(tree: &CodingTree, leaf_labels: &[u32], alphabets: &LayerAlphabets) -> Result<FeatureVector> {
    let labels = lookup_labels(tree, leaf_labels, alphabets)?;
    let counts = tree
        .nodes()
        .iter()
        .zip(labels)
        .map(|(node, label)| ((node.level, label), 1));
    Ok(FeatureVector::from_counts(alphabets.generation, counts))
}

/// Inner product of two feature vectors.
pub fn kernel(a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    if a.generation != b.generation {
        return Err(Error::AlphabetMismatch(a.generation, b.generation));
    }
    let (x, y) = (&a.entries, &b.entries);
    let (mut i, mut j, mut dot) = (0, 0, 0u64);
    while i < x.len() && j < y.len() {
        match x[i].0.cmp(&y[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                dot += x[i].1 * y[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    Ok(dot as f64)
}

/// Cosine-normalized kernel.
pub fn normalized_kernel(a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    let k = kernel(a, b)?;
    let d = (a.squared_norm() * b.squared_norm()).sqrt();
    Ok(if d > 0.0 { k / d } else { 0.0 })
}

/// Interns every tree in order, then featurizes all of them in parallel.
pub fn fit_features(trees: &[CodingTree], leaf_labels: &[Vec<u32>]) -> Result<(LayerAlphabets, Vec<FeatureVector>)> {
    if trees.len() != leaf_labels.len() {
        return Err(Error::Dimension(format!("{} trees but {} label lists", trees.len(), leaf_labels.len())));
    }
    let k = trees.first().map_or(0, CodingTree::height);
    if let Some(t) = trees.iter().find(|t| t.height() != k) {
        return Err(Error::NotCanonical(format!("mixed tree heights {k} and {}", t.height())));
    }
    let mut alphabets = LayerAlphabets::new(k);
    for (t, l) in trees.iter().zip(leaf_labels) {
        hierarchical_reporting(t, l, &mut alphabets)?;
    }
    let features = trees
        .par_iter()
        .zip(leaf_labels.par_iter())
        .map(|(t, l)| featurize(t, l, &alphabets))
        .collect::<Result<Vec<_>>>()?;
    Ok((alphabets, features))
}

/// Symmetric matrix of pairwise kernel values, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    values: Array2<f64>,
}

const GRAM_MAGIC: &[u8; 8] = b"CTGRAM\0\x01";
const GRAM_DTYPE_F64: u32 = 8;

impl GramMatrix {
    pub fn from_features(features: &[FeatureVector], normalize: bool) -> Result<Self> {
        let n = features.len();
        if let Some(f) = features.iter().find(|f| f.generation != features[0].generation) {
            return Err(Error::AlphabetMismatch(features[0].generation, f.generation));
        }
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                (i..n)
                    .map(|j| {
                        if normalize {
                            normalized_kernel(&features[i], &features[j])
                        } else {
                            kernel(&features[i], &features[j])
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let mut values = Array2::zeros((n, n));
        for (i, row) in rows.into_iter().enumerate() {
            for (off, v) in row.into_iter().enumerate() {
                values[[i, i + off]] = v;
                values[[i + off, i]] = v;
            }
        }
        Ok(GramMatrix { values })
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[[i, j]]
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in self.values.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    /// Binary layout: 8-byte magic, `n` as u64 LE, dtype tag as u32 LE, then
    /// `n * n` little-endian f64 in row-major order.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| Error::io(path, e));
        put(GRAM_MAGIC)?;
        put(&(self.len() as u64).to_le_bytes())?;
        put(&GRAM_DTYPE_F64.to_le_bytes())?;
        for v in self.values.iter() {
            put(&v.to_le_bytes())?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)
            .and_then(|mut f| f.read_to_end(&mut bytes))
            .map_err(|e| Error::io(path, e))?;
        let bad = |msg: &str| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg: msg.to_string(),
        };
        if bytes.len() < 20 || &bytes[..8] != GRAM_MAGIC {
            return Err(bad("not a Gram matrix file"));
        }
        let n = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let dtype = u32::from_le_bytes(bytes[16..20].try_into().unwrap());
        if dtype != GRAM_DTYPE_F64 || bytes.len() != 20 + 8 * n * n {
            return Err(bad("unexpected dtype or length"));
        }
        let data = bytes[20..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let values = Array2::from_shape_vec((n, n), data).map_err(|e| bad(&e.to_string()))?;
        Ok(GramMatrix { values })
    }
}

/// Gram matrix over depth-canonical trees of a common height.
pub fn gram(trees: &[CodingTree], leaf_labels: &[Vec<u32>], normalize: bool) -> Result<GramMatrix> {
    let (_, features) = fit_features(trees, leaf_labels)?;
    GramMatrix::from_features(&features, normalize)
}
