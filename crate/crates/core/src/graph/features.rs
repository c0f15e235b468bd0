use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::Graph;
use crate::error::{Error, Result};

/// How initial node labels and one-hot features are derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureMode {
    /// Social networks: the node degree.
    Degree,
    /// Bioinformatics: the node degree together with the node category.
    DegreeCategory,
}

/// Dataset-global vocabularies for node labels and one-hot features.
///
/// Degree features and category features are concatenated in
/// `DegreeCategory` mode, so every row carries exactly two ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeFeatureInit {
    mode: FeatureMode,
    degrees: Vec<usize>,
    categories: Vec<i64>,
    pairs: Vec<(usize, i64)>,
}

impl NodeFeatureInit {
    pub fn fit<'a>(graphs: impl IntoIterator<Item = &'a Graph>, mode: FeatureMode) -> Result<Self> {
        let mut degrees = Vec::new();
        let mut categories = Vec::new();
        let mut pairs = Vec::new();
        for g in graphs {
            degrees.extend(g.degrees());
            if mode == FeatureMode::DegreeCategory {
                let cats = g.node_category().ok_or_else(|| {
                    Error::Vocabulary("degree+category mode needs node categories".into())
                })?;
                categories.extend_from_slice(cats);
                pairs.extend(g.degrees().zip(cats.iter().copied()));
            }
        }
        degrees.sort_unstable();
        degrees.dedup();
        categories.sort_unstable();
        categories.dedup();
        pairs.sort_unstable();
        pairs.dedup();
        Ok(NodeFeatureInit {
            mode,
            degrees,
            categories,
            pairs,
        })
    }

    pub fn mode(&self) -> FeatureMode {
        self.mode
    }

    /// Width of a feature row.
    pub fn dimension(&self) -> usize {
        match self.mode {
            FeatureMode::Degree => self.degrees.len(),
            FeatureMode::DegreeCategory => self.degrees.len() + self.categories.len(),
        }
    }

    /// Number of distinct initial labels.
    pub fn label_count(&self) -> usize {
        match self.mode {
            FeatureMode::Degree => self.degrees.len(),
            FeatureMode::DegreeCategory => self.pairs.len(),
        }
    }

    pub fn degree_vocabulary(&self) -> &[usize] {
        &self.degrees
    }

    pub fn category_vocabulary(&self) -> &[i64] {
        &self.categories
    }

    fn degree_index(&self, d: usize) -> Result<usize> {
        self.degrees
            .binary_search(&d)
            .map_err(|_| Error::Vocabulary(format!("degree {d} is outside the vocabulary")))
    }

    fn categories_of<'g>(&self, graph: &'g Graph) -> Result<&'g [i64]> {
        graph
            .node_category()
            .ok_or_else(|| Error::Vocabulary("degree+category mode needs node categories".into()))
    }

    /// One label id per node: the interned degree, or the interned
    /// (degree, category) pair.
    pub fn initial_labels(&self, graph: &Graph) -> Result<Vec<u32>> {
        match self.mode {
            FeatureMode::Degree => graph
                .degrees()
                .map(|d| self.degree_index(d).map(|i| i as u32))
                .collect(),
            FeatureMode::DegreeCategory => {
                let cats = self.categories_of(graph)?;
                graph
                    .degrees()
                    .zip(cats)
                    .map(|(d, &c)| {
                        self.pairs.binary_search(&(d, c)).map(|i| i as u32).map_err(|_| {
                            Error::Vocabulary(format!("(degree {d}, category {c}) is outside the vocabulary"))
                        })
                    })
                    .collect()
            }
        }
    }

    /// One-hot rows, `node_count x dimension`.
    pub fn initial_features(&self, graph: &Graph) -> Result<Array2<f64>> {
        let mut x = Array2::zeros((graph.node_count(), self.dimension()));
        for (v, d) in graph.degrees().enumerate() {
            x[[v, self.degree_index(d)?]] = 1.0;
        }
        if self.mode == FeatureMode::DegreeCategory {
            let cats = self.categories_of(graph)?;
            let off = self.degrees.len();
            for (v, c) in cats.iter().enumerate() {
                let j = self.categories.binary_search(c).map_err(|_| {
                    Error::Vocabulary(format!("category {c} is outside the vocabulary"))
                })?;
                x[[v, off + j]] = 1.0;
            }
        }
        Ok(x)
    }
}
