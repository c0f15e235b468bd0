//! Oracles shared by the integration tests. Everything here recounts
//! volumes and cuts from vertex sets and never calls the library's
//! entropy code.
#![allow(dead_code)]

use std::collections::HashMap;

use cotree::entropy::tree_delete_delta;
use cotree::graph::Graph;
use cotree::tree::{build_coding_tree, delete, CodingTree, PartitionState};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Volume and cut size of a vertex bitmask (n <= 64).
pub fn vol_cut(g: &Graph, mask: u64) -> (u64, u64) {
    let vol = (0..g.node_count()).filter(|&v| mask >> v & 1 == 1).map(|v| g.degree(v) as u64).sum();
    let cut = g.edges().iter().filter(|&&(u, v)| (mask >> u & 1) != (mask >> v & 1)).count() as u64;
    (vol, cut)
}

/// Entropy contribution of a node with cut `g` and volume `vol` below a
/// parent of volume `pvol`.
pub fn term(cut: u64, vol: u64, pvol: u64, total: u64) -> f64 {
    if cut == 0 {
        return 0.0;
    }
    -(cut as f64 / total as f64) * (vol as f64 / pvol as f64).log2()
}

/// Entropy of a tree given as `(vertex set, parent index)` pairs, the root
/// being the entry whose parent is `None`. Vertex sets are `Vec<u32>`, so
/// this works for graphs of any size.
pub fn entropy_of_sets(g: &Graph, nodes: &[(Vec<u32>, Option<usize>)]) -> f64 {
    let total = g.volume();
    let mut side = vec![0usize; g.node_count()];
    let stats: Vec<(u64, u64)> = nodes
        .iter()
        .enumerate()
        .map(|(id, (set, _))| {
            for &v in set {
                side[v as usize] = id + 1;
            }
            let vol = set.iter().map(|&v| g.degree(v as usize) as u64).sum();
            let cut = g
                .edges()
                .iter()
                .filter(|&&(u, v)| (side[u as usize] == id + 1) != (side[v as usize] == id + 1))
                .count() as u64;
            (vol, cut)
        })
        .collect();
    nodes
        .iter()
        .enumerate()
        .filter_map(|(id, (_, p))| p.map(|p| term(stats[id].1, stats[id].0, stats[p].0, total)))
        .sum()
}

/// Vertex sets of every node of a library tree, recovered from its leaves.
pub fn sets_of(tree: &CodingTree) -> Vec<(Vec<u32>, Option<usize>)> {
    let mut sets: Vec<Vec<u32>> = vec![Vec::new(); tree.len()];
    for (id, node) in tree.nodes().iter().enumerate() {
        if let Some(v) = node.vertex {
            let mut at = Some(id as u32);
            while let Some(a) = at {
                sets[a as usize].push(v);
                at = tree.node(a).parent;
            }
        }
    }
    sets.into_iter().zip(tree.nodes()).map(|(s, n)| (s, n.parent.map(|p| p as usize))).collect()
}

pub fn entropy_of(g: &Graph, tree: &CodingTree) -> f64 {
    entropy_of_sets(g, &sets_of(tree))
}

/// Minimum entropy over every coding tree of height at most `k`, by
/// exhaustive recursion over set partitions. Unary nodes never change the
/// entropy, so only partitions into two or more blocks are enumerated.
pub fn exhaustive_min(g: &Graph, k: u32) -> f64 {
    let n = g.node_count();
    assert!(n <= 12);
    let full = (1u64 << n) - 1;
    let total = g.volume();
    let mut memo = HashMap::new();
    best_tree(g, total, full, k, &mut memo)
}

fn best_tree(g: &Graph, total: u64, set: u64, h: u32, memo: &mut HashMap<(u64, u32), f64>) -> f64 {
    if set.count_ones() == 1 {
        return 0.0;
    }
    if h == 0 {
        return f64::INFINITY;
    }
    if let Some(&v) = memo.get(&(set, h)) {
        return v;
    }
    let pvol = vol_cut(g, set).0;
    let v = best_partition(g, total, set, set, pvol, h, memo);
    memo.insert((set, h), v);
    v
}

/// Cheapest split of `rest` into blocks, each a subtree of height below
/// `h`, where no block may equal `whole`.
fn best_partition(g: &Graph, total: u64, whole: u64, rest: u64, pvol: u64, h: u32, memo: &mut HashMap<(u64, u32), f64>) -> f64 {
    if rest == 0 {
        return 0.0;
    }
    let low = rest & rest.wrapping_neg();
    let others = rest & !low;
    let mut best = f64::INFINITY;
    // every subset of `others`, joined with the lowest vertex
    let mut sub = others;
    loop {
        let block = sub | low;
        if block != whole {
            let (vol, cut) = vol_cut(g, block);
            let here = term(cut, vol, pvol, total) + best_tree(g, total, block, h - 1, memo);
            if here < best {
                let tail = best_partition(g, total, whole, rest & !block, pvol, h, memo);
                best = best.min(here + tail);
            }
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & others;
    }
    best
}

/// Brute-force count of coding trees with height at most `k` on `n`
/// labelled leaves, for checking the enumeration itself.
pub fn count_trees(n: u32, k: u32) -> u64 {
    fn trees(set: u64, h: u32) -> u64 {
        if set.count_ones() == 1 {
            return 1;
        }
        if h == 0 {
            return 0;
        }
        parts(set, set, h)
    }
    fn parts(whole: u64, rest: u64, h: u32) -> u64 {
        if rest == 0 {
            return 1;
        }
        let low = rest & rest.wrapping_neg();
        let others = rest & !low;
        let mut total = 0;
        let mut sub = others;
        loop {
            let block = sub | low;
            if block != whole {
                total += trees(block, h - 1) * parts(whole, rest & !block, h);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & others;
        }
        total
    }
    trees((1u64 << n) - 1, k)
}

pub const TOL: f64 = 1e-9;

/// Random adjacent merges until two communities remain. Returns the number
/// of moves checked.
pub fn random_merges(g: &Graph, rng: &mut ChaCha8Rng) -> usize {
    let n = g.node_count();
    let mut state = PartitionState::new(g, rng.gen());
    // our own copy of the tree: vertex sets with parent indices, root first
    let mut nodes: Vec<(Vec<u32>, Option<usize>)> = vec![((0..n as u32).collect(), None)];
    let mut index: HashMap<u32, usize> = HashMap::new();
    for v in 0..n as u32 {
        index.insert(v, nodes.len());
        nodes.push((vec![v], Some(0)));
    }
    let mut before = entropy_of_sets(g, &nodes);
    let mut moves = 0;
    while state.active_count() > 2 {
        let comms = state.communities();
        let pairs: Vec<(u32, u32)> = comms
            .iter()
            .flat_map(|&a| comms.iter().map(move |&b| (a, b)))
            .filter(|&(a, b)| a < b && state.cut(a, b) > 0)
            .collect();
        let &(a, b) = pairs.choose(rng).expect("connected graph");
        let delta = state.merge_delta(a, b).unwrap();
        let w = state.merge(a, b).unwrap();

        let (ia, ib) = (index[&a], index[&b]);
        let mut set = nodes[ia].0.clone();
        set.extend(&nodes[ib].0);
        index.insert(w, nodes.len());
        nodes.push((set, Some(0)));
        nodes[ia].1 = Some(nodes.len() - 1);
        nodes[ib].1 = Some(nodes.len() - 1);

        let after = entropy_of_sets(g, &nodes);
        assert!((after - before - delta).abs() < TOL, "merge {a}+{b}: delta {delta}, recomputed {}", after - before);
        before = after;
        moves += 1;
    }
    moves
}

/// Random deletions of internal nodes from an uncompressed greedy tree until
/// the root's children are all leaves.
pub fn random_deletes(g: &Graph, rng: &mut ChaCha8Rng) -> usize {
    let mut tree = build_coding_tree(g, g.node_count() as u32, rng.gen()).unwrap();
    let mut before = entropy_of(g, &tree);
    let mut moves = 0;
    loop {
        let root = tree.root();
        let candidates: Vec<u32> = (0..tree.len() as u32)
            .filter(|&i| i != root && !tree.node(i).is_leaf())
            .collect();
        let Some(&child) = candidates.choose(rng) else { break };
        let parent = tree.node(child).parent.unwrap();
        let delta = tree_delete_delta(&tree, parent, child).unwrap();
        assert!(delta >= -TOL, "deletion never lowers entropy");
        tree = delete(&tree, parent, child).unwrap();
        tree.validate(g).unwrap();
        let after = entropy_of(g, &tree);
        assert!((after - before - delta).abs() < TOL, "delete {child}: delta {delta}, recomputed {}", after - before);
        before = after;
        moves += 1;
    }
    moves
}
