//! Binary checkpoints: an 8-byte magic with a format version, a
//! length-prefixed JSON header, then little-endian `f64` blocks for the
//! parameters, the batch-norm statistics and optionally the Adam moments.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Adam, HrnConfig, HrnModel};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"CTHRN\0\0\x01";

#[derive(Serialize, Deserialize)]
struct Header {
    config: HrnConfig,
    params: usize,
    norms: usize,
    adam_steps: Option<i32>,
}

fn put(out: &mut Vec<u8>, xs: &[f64]) {
    for x in xs {
        out.extend_from_slice(&x.to_le_bytes());
    }
}

pub fn save_checkpoint(path: &Path, model: &HrnModel, optimizer: Option<&Adam>) -> Result<()> {
    let stats = model.running_stats();
    let header = Header {
        config: model.config().clone(),
        params: model.param_count(),
        norms: stats.len(),
        adam_steps: optimizer.map(Adam::steps),
    };
    let json = serde_json::to_vec(&header).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let mut out = Vec::with_capacity(16 + json.len() + 8 * model.param_count() * 3);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(json.len() as u32).to_le_bytes());
    out.extend_from_slice(&json);
    put(&mut out, model.params());
    for (mean, var) in stats {
        put(&mut out, mean);
        put(&mut out, var);
    }
    if let Some(adam) = optimizer {
        let (m, v) = adam.moments();
        put(&mut out, m);
        put(&mut out, v);
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<(HrnModel, Option<Adam>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bad = |msg: &str| Error::Checkpoint(format!("{}: {msg}", path.display()));
    if bytes.len() < 12 || bytes[..5] != MAGIC[..5] {
        return Err(bad("not a checkpoint"));
    }
    if bytes[..8] != MAGIC[..] {
        return Err(bad("unsupported checkpoint version"));
    }
    let len = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let json = bytes.get(12..12 + len).ok_or_else(|| bad("truncated header"))?;
    let header: Header = serde_json::from_slice(json).map_err(|e| bad(&e.to_string()))?;
    let mut floats = bytes[12 + len..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let hidden = header.config.hidden;
    let expected = header.params
        + 2 * header.norms * hidden
        + if header.adam_steps.is_some() { 2 * header.params } else { 0 };
    if (bytes.len() - 12 - len) != 8 * expected {
        return Err(bad("payload length does not match the header"));
    }
    let mut model = HrnModel::new(header.config, 0)?;
    if model.param_count() != header.params {
        return Err(bad("parameter count does not match the architecture"));
    }
    let mut take = |n: usize| floats.by_ref().take(n).collect::<Vec<f64>>();
    let params = take(header.params);
    model.params_mut().copy_from_slice(&params);
    let stats = (0..header.norms).map(|_| (take(hidden), take(hidden))).collect();
    model.set_running_stats(stats)?;
    let adam = header
        .adam_steps
        .map(|t| Adam::from_parts(take(header.params), take(header.params), t));
    Ok((model, adam))
}
