use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FoldSpec {
    pub seed: u64,
    pub folds: Vec<Fold>,
}

/// Stratified `k`-fold split of `0..labels.len()`.
///
/// Each class is shuffled and dealt round-robin over the folds, the dealer
/// position carrying over from one class to the next so fold sizes differ
/// by at most one. Classes smaller than `k` leave some folds without that
/// class; a warning is logged.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Result<FoldSpec> {
    if k < 2 || labels.len() < k {
        return Err(Error::InvalidArgument(format!("cannot split {} samples into {k} folds", labels.len())));
    }
    let classes = labels.iter().max().map_or(0, |&c| c + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test = vec![Vec::new(); k];
    let mut next = 0;
    for c in 0..classes {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        if !members.is_empty() && members.len() < k {
            log::warn!("class {c} has {} samples, fewer than {k} folds", members.len());
        }
        members.shuffle(&mut rng);
        for i in members {
            test[next].push(i);
            next = (next + 1) % k;
        }
    }
    let folds = test
        .into_iter()
        .map(|mut t| {
            t.sort_unstable();
            let mut in_test = vec![false; labels.len()];
            t.iter().for_each(|&i| in_test[i] = true);
            let train = (0..labels.len()).filter(|&i| !in_test[i]).collect();
            Fold { train, test: t }
        })
        .collect();
    Ok(FoldSpec { seed, folds })
}
