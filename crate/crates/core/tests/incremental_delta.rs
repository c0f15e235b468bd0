//! Incremental merge and delete deltas against full recomputation of the
//! entropy from vertex sets after every move.

mod common;

use common::{random_deletes, random_merges};
use cotree::eval::synthetic_graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn a_thousand_random_moves_match_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut merges, mut deletes) = (0, 0);
    let mut i = 0u64;
    while merges < 500 || deletes < 500 {
        let n = rng.gen_range(4..40);
        let ef = [1.0, 1.5, 3.0][i as usize % 3];
        let g = synthetic_graph(n, ef, i);
        merges += random_merges(&g, &mut rng);
        deletes += random_deletes(&g, &mut rng);
        i += 1;
    }
    assert!(merges + deletes >= 1000);
}
