use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Sparse row: `(column, value)` pairs with distinct columns.
pub type SparseVec = Vec<(u32, f64)>;

const MAX_ITER: usize = 1000;
const TOLERANCE: f64 = 1e-3;

/// One-vs-rest linear SVM with L2 regularization and hinge loss,
///
/// `min_w 1/2 |w|^2 + C sum_i max(0, 1 - y_i w.x_i)`,
///
/// with a constant bias feature appended to every row. Each binary problem
/// is solved by coordinate descent on the dual, visiting coordinates in a
/// seeded random order.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSvm {
    dim: usize,
    weights: Vec<Vec<f64>>,
}

fn dot(w: &[f64], x: &[(u32, f64)]) -> f64 {
    x.iter().map(|&(j, v)| w[j as usize] * v).sum::<f64>() + w[w.len() - 1]
}

fn binary(xs: &[SparseVec], y: &[f64], dim: usize, c: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut w = vec![0.0; dim + 1];
    let mut alpha = vec![0.0; xs.len()];
    let qii: Vec<f64> = xs.iter().map(|x| x.iter().map(|(_, v)| v * v).sum::<f64>() + 1.0).collect();
    let mut order: Vec<usize> = (0..xs.len()).collect();
    for _ in 0..MAX_ITER {
        order.shuffle(rng);
        let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
        for &i in &order {
            let g = y[i] * dot(&w, &xs[i]) - 1.0;
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == c {
                g.max(0.0)
            } else {
                g
            };
            hi = hi.max(pg);
            lo = lo.min(pg);
            if pg.abs() > 1e-12 {
                let old = alpha[i];
                alpha[i] = (old - g / qii[i]).clamp(0.0, c);
                let step = (alpha[i] - old) * y[i];
                for &(j, v) in &xs[i] {
                    w[j as usize] += step * v;
                }
                w[dim] += step;
            }
        }
        if hi - lo < TOLERANCE {
            break;
        }
    }
    w
}

impl LinearSvm {
    /// Rows must have columns below `dim`; labels are `0..classes`.
    pub fn train(xs: &[SparseVec], labels: &[usize], classes: usize, dim: usize, c: f64, seed: u64) -> Result<Self> {
        if xs.len() != labels.len() || xs.is_empty() {
            return Err(Error::Dimension(format!("{} rows with {} labels", xs.len(), labels.len())));
        }
        if c <= 0.0 || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("C must be positive, got {c}")));
        }
        if let Some(&(j, _)) = xs.iter().flatten().find(|(j, _)| *j as usize >= dim) {
            return Err(Error::Dimension(format!("column {j} outside dimension {dim}")));
        }
        let mut present = vec![false; classes];
        for &l in labels {
            *present.get_mut(l).ok_or_else(|| Error::InvalidArgument(format!("label {l} outside {classes} classes")))? = true;
        }
        if present.iter().filter(|&&p| p).count() < 2 {
            return Err(Error::InvalidArgument("training data holds a single class".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = (0..classes)
            .map(|cls| {
                let y: Vec<f64> = labels.iter().map(|&l| if l == cls { 1.0 } else { -1.0 }).collect();
                binary(xs, &y, dim, c, &mut rng)
            })
            .collect();
        Ok(LinearSvm { dim, weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn decision(&self, x: &[(u32, f64)]) -> Vec<f64> {
        self.weights.iter().map(|w| dot(w, x)).collect()
    }

    /// Highest-scoring class, the smaller index on ties.
    pub fn predict(&self, x: &[(u32, f64)]) -> usize {
        self.decision(x)
            .into_iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (j, s)| if s > best.1 { (j, s) } else { best })
            .0
    }

    pub fn accuracy(&self, xs: &[SparseVec], labels: &[usize]) -> f64 {
        let hits = xs.iter().zip(labels).filter(|(x, &l)| self.predict(x) == l).count();
        hits as f64 / xs.len() as f64
    }
}
