use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, ArrayViewMut1, ArrayViewMut2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{HrnConfig, PoolMode, TreeBatch};
use crate::error::{Error, Result};

const BN_EPS: f64 = 1e-5;
const BN_MOMENTUM: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Batch statistics for batch norm, dropout active.
    Train,
    /// Running statistics, no dropout.
    Eval,
}

#[derive(Debug, Clone, Copy)]
struct Dense {
    w: usize,
    b: usize,
    rows: usize,
    cols: usize,
}

#[derive(Debug, Clone, Copy)]
struct Norm {
    gamma: usize,
    beta: usize,
    dim: usize,
    stats: usize,
}

#[derive(Debug, Clone, Copy)]
struct Block {
    dense: Dense,
    norm: Option<Norm>,
}

#[derive(Debug, Clone)]
struct Layout {
    blocks: Vec<[Block; 2]>,
    proj: Option<Dense>,
    head: Dense,
    len: usize,
    norms: usize,
}

impl Layout {
    fn new(c: &HrnConfig) -> Self {
        let mut len = 0;
        let mut norms = 0;
        let dense = |rows: usize, cols: usize, len: &mut usize| {
            let d = Dense { w: *len, b: *len + rows * cols, rows, cols };
            *len += rows * cols + cols;
            d
        };
        let mut blocks = Vec::with_capacity(c.height);
        for i in 0..c.height {
            let d_in = if i == 0 { c.input_dim } else { c.hidden };
            let block = |rows: usize, len: &mut usize, norms: &mut usize| {
                let dense = dense(rows, c.hidden, len);
                let norm = c.batch_norm.then(|| {
                    let n = Norm { gamma: *len, beta: *len + c.hidden, dim: c.hidden, stats: *norms };
                    *len += 2 * c.hidden;
                    *norms += 1;
                    n
                });
                Block { dense, norm }
            };
            let first = block(d_in, &mut len, &mut norms);
            let second = block(c.hidden, &mut len, &mut norms);
            blocks.push([first, second]);
        }
        let proj = (c.pool != PoolMode::Root).then(|| dense(c.input_dim, c.hidden, &mut len));
        let head = dense(c.readout_dim(), c.classes, &mut len);
        Layout { blocks, proj, head, len, norms }
    }
}

fn mat(p: &[f64], d: Dense) -> ArrayView2<'_, f64> {
    ArrayView2::from_shape((d.rows, d.cols), &p[d.w..d.w + d.rows * d.cols]).unwrap()
}

fn vec_at(p: &[f64], at: usize, n: usize) -> ArrayView1<'_, f64> {
    ArrayView1::from(&p[at..at + n])
}

fn mat_mut(p: &mut [f64], d: Dense) -> ArrayViewMut2<'_, f64> {
    ArrayViewMut2::from_shape((d.rows, d.cols), &mut p[d.w..d.w + d.rows * d.cols]).unwrap()
}

fn vec_mut(p: &mut [f64], at: usize, n: usize) -> ArrayViewMut1<'_, f64> {
    ArrayViewMut1::from(&mut p[at..at + n])
}

#[derive(Debug, Clone)]
struct RunningStats {
    mean: Array1<f64>,
    var: Array1<f64>,
}

struct NormCache {
    xhat: Array2<f64>,
    inv_std: Array1<f64>,
    mean: Array1<f64>,
    var: Array1<f64>,
}

struct BlockCache {
    input: Array2<f64>,
    norm: Option<NormCache>,
    output: Array2<f64>,
}

struct Tape {
    levels: Vec<[BlockCache; 2]>,
    /// Node vectors per level, level 0 being the raw features.
    reps: Vec<Array2<f64>>,
    pooled_raw: Option<Array2<f64>>,
    readout: Array2<f64>,
    mask: Option<Array2<f64>>,
}

/// Network parameters in one flat vector plus batch-norm running
/// statistics.
#[derive(Debug, Clone)]
pub struct HrnModel {
    config: HrnConfig,
    layout: Layout,
    params: Vec<f64>,
    running: Vec<RunningStats>,
}

impl HrnModel {
    /// Weights and biases uniform in `±1/sqrt(fan_in)`; batch-norm scale 1
    /// and shift 0.
    pub fn new(config: HrnConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![0.0; layout.len];
        let mut init = |d: Dense, params: &mut [f64]| {
            let bound = 1.0 / (d.rows as f64).sqrt();
            for x in &mut params[d.w..d.b + d.cols] {
                *x = rng.gen_range(-bound..bound);
            }
        };
        for block in layout.blocks.iter().flatten() {
            init(block.dense, &mut params);
            if let Some(n) = block.norm {
                params[n.gamma..n.gamma + n.dim].fill(1.0);
            }
        }
        if let Some(p) = layout.proj {
            init(p, &mut params);
        }
        init(layout.head, &mut params);
        let running = (0..layout.norms)
            .map(|_| RunningStats {
                mean: Array1::zeros(config.hidden),
                var: Array1::ones(config.hidden),
            })
            .collect();
        Ok(HrnModel { config, layout, params, running })
    }

    pub fn config(&self) -> &HrnConfig {
        &self.config
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    pub(crate) fn running_stats(&self) -> Vec<(&[f64], &[f64])> {
        self.running
            .iter()
            .map(|r| (r.mean.as_slice().unwrap(), r.var.as_slice().unwrap()))
            .collect()
    }

    pub(crate) fn set_running_stats(&mut self, stats: Vec<(Vec<f64>, Vec<f64>)>) -> Result<()> {
        if stats.len() != self.running.len() || stats.iter().any(|(m, v)| m.len() != self.config.hidden || v.len() != self.config.hidden) {
            return Err(Error::Checkpoint("batch-norm statistics do not match the architecture".into()));
        }
        self.running = stats
            .into_iter()
            .map(|(m, v)| RunningStats { mean: Array1::from(m), var: Array1::from(v) })
            .collect();
        Ok(())
    }

    fn check(&self, batch: &TreeBatch) -> Result<()> {
        if batch.height() != self.config.height {
            return Err(Error::Dimension(format!(
                "batch trees have height {}, model expects {}",
                batch.height(),
                self.config.height
            )));
        }
        if batch.input_dim() != self.config.input_dim {
            return Err(Error::Dimension(format!(
                "batch features have width {}, model expects {}",
                batch.input_dim(),
                self.config.input_dim
            )));
        }
        Ok(())
    }

    fn block_forward(&self, block: &Block, input: Array2<f64>, mode: Mode) -> BlockCache {
        let p = &self.params;
        let mut z = input.dot(&mat(p, block.dense)) + vec_at(p, block.dense.b, block.dense.cols);
        let norm = block.norm.map(|n| {
            let gamma = vec_at(p, n.gamma, n.dim);
            let beta = vec_at(p, n.beta, n.dim);
            let (mean, var) = match mode {
                Mode::Train => {
                    let mean = z.mean_axis(Axis(0)).unwrap();
                    let var = z.var_axis(Axis(0), 0.0);
                    (mean, var)
                }
                Mode::Eval => (self.running[n.stats].mean.clone(), self.running[n.stats].var.clone()),
            };
            let inv_std = var.mapv(|v| 1.0 / (v + BN_EPS).sqrt());
            let xhat = (&z - &mean) * &inv_std;
            z = &xhat * &gamma + beta;
            NormCache { xhat, inv_std, mean, var }
        });
        z.mapv_inplace(|v| v.max(0.0));
        BlockCache { input, norm, output: z }
    }

    fn run(&self, batch: &TreeBatch, mode: Mode, rng: Option<&mut ChaCha8Rng>) -> Result<(Array2<f64>, Tape)> {
        self.check(batch)?;
        let c = &self.config;
        let p = &self.params;
        let mut reps = vec![batch.features.clone()];
        let mut levels = Vec::with_capacity(c.height);
        for (i, blocks) in self.layout.blocks.iter().enumerate() {
            let below = &reps[i];
            let mut agg = Array2::zeros((batch.counts[i + 1], below.ncols()));
            for (u, &par) in batch.parent[i].iter().enumerate() {
                let mut row = agg.row_mut(par as usize);
                row += &below.row(u);
            }
            let first = self.block_forward(&blocks[0], agg, mode);
            let second = self.block_forward(&blocks[1], first.output.clone(), mode);
            reps.push(second.output.clone());
            levels.push([first, second]);
        }

        let trees = batch.tree_count();
        let d = c.hidden;
        let mut readout = Array2::zeros((trees, c.readout_dim()));
        let mut pooled_raw = None;
        match c.pool {
            PoolMode::Root => readout.assign(&reps[c.height]),
            PoolMode::Sum | PoolMode::Average => {
                for (i, rep) in reps.iter().enumerate() {
                    let mut pooled = Array2::zeros((trees, rep.ncols()));
                    for (t, &(a, b)) in batch.ranges[i].iter().enumerate() {
                        let mut row = pooled.row_mut(t);
                        row.assign(&rep.slice(s![a..b, ..]).sum_axis(Axis(0)));
                        if c.pool == PoolMode::Average {
                            row /= (b - a) as f64;
                        }
                    }
                    if i == 0 {
                        let proj = self.layout.proj.unwrap();
                        let projected = pooled.dot(&mat(p, proj)) + vec_at(p, proj.b, proj.cols);
                        readout.slice_mut(s![.., 0..d]).assign(&projected);
                        pooled_raw = Some(pooled);
                    } else {
                        readout.slice_mut(s![.., i * d..(i + 1) * d]).assign(&pooled);
                    }
                }
            }
        }

        let mask = match (mode, rng) {
            (Mode::Train, Some(rng)) if c.dropout > 0.0 => {
                let keep = 1.0 - c.dropout;
                let m = Array2::from_shape_simple_fn(readout.raw_dim(), || if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 });
                readout *= &m;
                Some(m)
            }
            _ => None,
        };
        let head = self.layout.head;
        let logits = readout.dot(&mat(p, head)) + vec_at(p, head.b, head.cols);
        Ok((logits, Tape { levels, reps, pooled_raw, readout, mask }))
    }

    fn update_running(&mut self, tape: &Tape) {
        for (block, cache) in self.layout.blocks.iter().flatten().zip(tape.levels.iter().flatten()) {
            let (Some(n), Some(nc)) = (block.norm, &cache.norm) else { continue };
            let rows = cache.output.nrows() as f64;
            let unbiased = if rows > 1.0 { rows / (rows - 1.0) } else { 1.0 };
            let r = &mut self.running[n.stats];
            r.mean = &r.mean * (1.0 - BN_MOMENTUM) + &nc.mean * BN_MOMENTUM;
            r.var = &r.var * (1.0 - BN_MOMENTUM) + &nc.var * (BN_MOMENTUM * unbiased);
        }
    }

    /// Logits, one row per tree. In training mode batch-norm running
    /// statistics are updated and `rng` drives dropout.
    pub fn forward(&mut self, batch: &TreeBatch, mode: Mode, rng: Option<&mut ChaCha8Rng>) -> Result<Array2<f64>> {
        let (logits, tape) = self.run(batch, mode, rng)?;
        if mode == Mode::Train {
            self.update_running(&tape);
        }
        Ok(logits)
    }

    /// Eval-mode logits.
    pub fn logits(&self, batch: &TreeBatch) -> Result<Array2<f64>> {
        self.run(batch, Mode::Eval, None).map(|(l, _)| l)
    }

    /// Eval-mode node vectors per level; level 0 is the raw input.
    pub fn level_representations(&self, batch: &TreeBatch) -> Result<Vec<Array2<f64>>> {
        self.run(batch, Mode::Eval, None).map(|(_, t)| t.reps)
    }

    pub fn predict(&self, batch: &TreeBatch) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.logits(batch)?))
    }

    /// Mean softmax cross-entropy without touching running statistics.
    pub fn loss(&self, batch: &TreeBatch, labels: &[usize], mode: Mode) -> Result<f64> {
        let (logits, _) = self.run(batch, mode, None)?;
        cross_entropy(&logits, labels).map(|(l, _)| l)
    }

    /// Training-mode loss and its gradient with respect to every parameter,
    /// in the layout of [`HrnModel::params`]. Updates batch-norm running
    /// statistics.
    pub fn loss_and_gradients(
        &mut self,
        batch: &TreeBatch,
        labels: &[usize],
        rng: Option<&mut ChaCha8Rng>,
    ) -> Result<(f64, Vec<f64>, Array2<f64>)> {
        let (logits, tape) = self.run(batch, Mode::Train, rng)?;
        let (loss, dlogits) = cross_entropy(&logits, labels)?;
        let grads = self.backward(batch, &tape, dlogits);
        self.update_running(&tape);
        Ok((loss, grads, logits))
    }

    fn block_backward(&self, block: &Block, cache: &BlockCache, mut dout: Array2<f64>, grads: &mut [f64]) -> Array2<f64> {
        let p = &self.params;
        dout.zip_mut_with(&cache.output, |g, &y| {
            if y <= 0.0 {
                *g = 0.0
            }
        });
        if let (Some(n), Some(nc)) = (block.norm, &cache.norm) {
            let gamma = vec_at(p, n.gamma, n.dim);
            vec_mut(grads, n.gamma, n.dim).assign(&(&dout * &nc.xhat).sum_axis(Axis(0)));
            vec_mut(grads, n.beta, n.dim).assign(&dout.sum_axis(Axis(0)));
            let dxhat = &dout * &gamma;
            let rows = dxhat.nrows() as f64;
            let sum = dxhat.sum_axis(Axis(0));
            let dot = (&dxhat * &nc.xhat).sum_axis(Axis(0));
            dout = (dxhat * rows - &sum - &nc.xhat * &dot) * &(&nc.inv_std / rows);
        }
        mat_mut(grads, block.dense).assign(&cache.input.t().dot(&dout));
        vec_mut(grads, block.dense.b, block.dense.cols).assign(&dout.sum_axis(Axis(0)));
        dout.dot(&mat(p, block.dense).t())
    }

    fn backward(&self, batch: &TreeBatch, tape: &Tape, dlogits: Array2<f64>) -> Vec<f64> {
        let c = &self.config;
        let p = &self.params;
        let d = c.hidden;
        let mut grads = vec![0.0; self.params.len()];
        let head = self.layout.head;
        mat_mut(&mut grads, head).assign(&tape.readout.t().dot(&dlogits));
        vec_mut(&mut grads, head.b, head.cols).assign(&dlogits.sum_axis(Axis(0)));
        let mut dread = dlogits.dot(&mat(p, head).t());
        if let Some(m) = &tape.mask {
            dread *= m;
        }

        let mut dreps: Vec<Array2<f64>> = tape.reps.iter().map(|r| Array2::zeros(r.raw_dim())).collect();
        match c.pool {
            PoolMode::Root => dreps[c.height].assign(&dread),
            PoolMode::Sum | PoolMode::Average => {
                let proj = self.layout.proj.unwrap();
                let d0 = dread.slice(s![.., 0..d]);
                let raw = tape.pooled_raw.as_ref().unwrap();
                mat_mut(&mut grads, proj).assign(&raw.t().dot(&d0));
                vec_mut(&mut grads, proj.b, proj.cols).assign(&d0.sum_axis(Axis(0)));
                for i in 1..=c.height {
                    let block = dread.slice(s![.., i * d..(i + 1) * d]);
                    for (t, &(a, b)) in batch.ranges[i].iter().enumerate() {
                        let scale = if c.pool == PoolMode::Average { 1.0 / (b - a) as f64 } else { 1.0 };
                        let g = &block.row(t) * scale;
                        for mut row in dreps[i].slice_mut(s![a..b, ..]).rows_mut() {
                            row += &g;
                        }
                    }
                }
            }
        }

        for i in (1..=c.height).rev() {
            let blocks = &self.layout.blocks[i - 1];
            let caches = &tape.levels[i - 1];
            let dout = std::mem::replace(&mut dreps[i], Array2::zeros((0, 0)));
            let dmid = self.block_backward(&blocks[1], &caches[1], dout, &mut grads);
            let dagg = self.block_backward(&blocks[0], &caches[0], dmid, &mut grads);
            if i > 1 {
                for (u, &par) in batch.parent[i - 1].iter().enumerate() {
                    let mut row = dreps[i - 1].row_mut(u);
                    row += &dagg.row(par as usize);
                }
            }
        }
        grads
    }
}

/// Mean cross-entropy and its gradient with respect to the logits.
pub(crate) fn cross_entropy(logits: &Array2<f64>, labels: &[usize]) -> Result<(f64, Array2<f64>)> {
    let (n, classes) = logits.dim();
    if labels.len() != n {
        return Err(Error::Dimension(format!("{} labels for {n} logit rows", labels.len())));
    }
    let mut grad = Array2::zeros((n, classes));
    let mut loss = 0.0;
    for (i, (row, &y)) in logits.rows().into_iter().zip(labels).enumerate() {
        if y >= classes {
            return Err(Error::InvalidArgument(format!("label {y} outside {classes} classes")));
        }
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        let sum: f64 = row.iter().map(|&v| (v - max).exp()).sum();
        let log_z = max + sum.ln();
        loss += log_z - row[y];
        for (j, &v) in row.iter().enumerate() {
            grad[[i, j]] = (v - log_z).exp() / n as f64;
        }
        grad[[i, y]] -= 1.0 / n as f64;
    }
    Ok((loss / n as f64, grad))
}

pub(crate) fn argmax_rows(m: &Array2<f64>) -> Vec<usize> {
    m.rows()
        .into_iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (j, &v)| if v > best.1 { (j, v) } else { best })
                .0
        })
        .collect()
}
