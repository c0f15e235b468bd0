//! The incremental merge phase against a brute-force greedy that recounts
//! every cut from vertex sets.

use cotree::entropy::merge_delta;
use cotree::eval::synthetic_graph;
use cotree::graph::Graph;
use cotree::tree::{vertex_ranks, PartitionState};

/// Merge sequence `(lo, hi, delta)` of the naive greedy.
fn naive_merges(g: &Graph, seed: u64) -> Vec<(u32, u32, f64)> {
    let n = g.node_count();
    let mut rank: Vec<u32> = vertex_ranks(n, seed);
    let mut comms: Vec<(u32, Vec<u32>)> = (0..n as u32).map(|v| (v, vec![v])).collect();
    let mut next = n as u32;
    let total = g.volume();
    let mut out = Vec::new();
    while comms.len() > 2 {
        let mut side = vec![usize::MAX; n];
        for (c, (_, vs)) in comms.iter().enumerate() {
            for &v in vs {
                side[v as usize] = c;
            }
        }
        let mut best: Option<(f64, u32, u32, usize, usize)> = None;
        for a in 0..comms.len() {
            for b in a + 1..comms.len() {
                let cut = g
                    .edges()
                    .iter()
                    .filter(|&&(u, v)| {
                        let (su, sv) = (side[u as usize], side[v as usize]);
                        (su, sv) == (a, b) || (su, sv) == (b, a)
                    })
                    .count() as u64;
                if cut == 0 {
                    continue;
                }
                let vol = |c: usize| comms[c].1.iter().map(|&v| g.degree(v as usize) as u64).sum::<u64>();
                let d = merge_delta(vol(a), vol(b), cut, total);
                let (ra, rb) = (rank[comms[a].0 as usize], rank[comms[b].0 as usize]);
                let key = (d, ra.min(rb), ra.max(rb), a, b);
                let better = match best {
                    None => true,
                    Some(bk) => key.0.total_cmp(&bk.0).then((key.1, key.2).cmp(&(bk.1, bk.2))).is_lt(),
                };
                if better {
                    best = Some(key);
                }
            }
        }
        let (d, _, _, a, b) = best.expect("connected");
        let (ia, ib) = (comms[a].0, comms[b].0);
        out.push((ia.min(ib), ia.max(ib), d));
        let mut merged = comms[a].1.clone();
        merged.extend(&comms[b].1);
        comms.remove(b);
        comms.remove(a);
        comms.push((next, merged));
        rank.push(next);
        next += 1;
    }
    out
}

fn fast_merges(g: &Graph, seed: u64) -> Vec<(u32, u32, f64)> {
    let mut s = PartitionState::new(g, seed);
    let mut out = Vec::new();
    while s.active_count() > 2 {
        let c = s.pop_best().expect("connected");
        assert_eq!(c.delta, s.merge_delta(c.lo, c.hi).unwrap());
        out.push((c.lo, c.hi, c.delta));
        s.merge(c.lo, c.hi).unwrap();
    }
    out
}

fn tie_heavy() -> Vec<Graph> {
    let cycle = |n: u32| Graph::new(n as usize, (0..n).map(|i| (i, (i + 1) % n)), None).unwrap();
    let complete = |n: u32| Graph::new(n as usize, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))), None).unwrap();
    let grid = |w: u32, h: u32| {
        let mut e = Vec::new();
        for y in 0..h {
            for x in 0..w {
                let v = y * w + x;
                if x + 1 < w {
                    e.push((v, v + 1));
                }
                if y + 1 < h {
                    e.push((v, v + w));
                }
            }
        }
        Graph::new((w * h) as usize, e, None).unwrap()
    };
    vec![cycle(3), cycle(12), cycle(17), complete(4), complete(7), grid(4, 4), grid(3, 7), grid(6, 5)]
}

#[test]
fn matches_naive_greedy_on_tie_heavy_graphs() {
    for g in tie_heavy() {
        for seed in 0..4 {
            assert_eq!(fast_merges(&g, seed), naive_merges(&g, seed), "n={} seed={seed}", g.node_count());
        }
    }
}

#[test]
fn matches_naive_greedy_on_random_graphs() {
    for i in 0..60u64 {
        let n = 3 + (i as usize * 7) % 38;
        let ef = [1.0, 1.3, 2.0, 4.0][i as usize % 4];
        let g = synthetic_graph(n, ef, i);
        assert_eq!(fast_merges(&g, i), naive_merges(&g, i), "graph {i}");
    }
}
