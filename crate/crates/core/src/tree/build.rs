use std::cmp::Ordering;
use std::collections::binary_heap::PeekMut;
use std::collections::hash_map::Entry as MapEntry;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rustc_hash::FxHashMap;

use super::compress::compress_greedy;
use super::{CodingTree, TreeNode};
use crate::entropy;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// A candidate pair of root children, by arena node id with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeCandidate {
    pub delta: f64,
    pub lo: u32,
    pub hi: u32,
}

pub(crate) fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Tie-break ranks of the `n` vertices: their positions when sorted by
/// `(mix64(seed ^ mix64(v)), v)`. Internal nodes rank by their arena id,
/// after every vertex.
pub fn vertex_ranks(n: usize, seed: u64) -> Vec<u32> {
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by_key(|&v| (mix64(seed ^ mix64(v as u64)), v));
    let mut rank = vec![0u32; n];
    for (r, &v) in order.iter().enumerate() {
        rank[v as usize] = r as u32;
    }
    rank
}

/// Lower bound on the best merge in one group. Heap order puts the most negative delta first,
/// then the smaller rank, then the larger rank. Only the entry carrying the
/// group's current stamp is live.
#[derive(Debug, Clone, Copy)]
struct Entry {
    delta: f64,
    lo: u32,
    hi: u32,
    group: u32,
    stamp: u64,
}

impl Entry {
    fn key(&self) -> (f64, u32, u32) {
        (self.delta, self.lo, self.hi)
    }

    fn below(&self, key: (f64, u32, u32)) -> bool {
        self.delta.total_cmp(&key.0).then((self.lo, self.hi).cmp(&(key.1, key.2))).is_lt()
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // reversed: BinaryHeap pops the maximum
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .delta
            .total_cmp(&self.delta)
            .then(other.lo.cmp(&self.lo))
            .then(other.hi.cmp(&self.hi))
            .then(other.group.cmp(&self.group))
            .then(other.stamp.cmp(&self.stamp))
    }
}

/// Pairs of one owner sharing a cut value, as a min-heap of the members'
/// last seen `(volume, rank, slot)`, and the key of the group's live entry
/// in the main heap. Member entries are dropped lazily: one is current only
/// while the owner's link to that member still records the same cut,
/// volume and rank.
#[derive(Debug, Clone)]
struct Group {
    owner: u32,
    cut: u32,
    members: BinaryHeap<Reverse<(u64, u32, u32)>>,
    bound: (f64, u32, u32),
    stamp: u64,
}

/// An adjacent pair: its cut, the owning slot and the other side's volume
/// and rank as last seen, which key it in the owner's group.
#[derive(Debug, Clone, Copy)]
struct Link {
    vol: u64,
    cut: u32,
    rank: u32,
    owner: u32,
}

/// Volume, rank and node of the community living in a slot, kept together
/// so that pricing a pair touches one line per side.
#[derive(Debug, Clone, Copy)]
struct Slot {
    vol: u64,
    rank: u32,
    node: u32,
}

const NO_SLOT: u32 = u32::MAX;

fn group_key(owner: u32, cut: u32) -> u64 {
    (owner as u64) << 32 | cut as u64
}

fn pair_key(a: u32, b: u32) -> u64 {
    (a.min(b) as u64) << 32 | a.max(b) as u64
}

/// The communities currently hanging off the root during the merge phase,
/// with their volumes, cuts and pairwise cross-edge counts.
///
/// Community ids are arena node ids and are never reused. Adjacency lives in
/// slots: a merge keeps the slot with more neighbours and folds the other
/// into it, so only the smaller side's pairs are touched. A node remembers
/// its slot after it is merged away; the slot is then either live under the
/// new node or dead.
///
/// Each pair is owned by one side and filed in the owner's group for its cut
/// value. The merge delta depends only on the cut and the summed volume, so
/// within a group the best pair is the member of least volume, then least
/// rank, whatever the owner's volume. The heap holds one lower bound per
/// group. Volumes only grow, so a bound computed earlier stays valid and is
/// re-priced when it surfaces.
#[derive(Debug, Clone)]
pub struct PartitionState {
    total_vol: u64,
    arena: Vec<TreeNode>,
    rank: Vec<u32>,
    slot_of: Vec<u32>,
    slots: Vec<Slot>,
    links: FxHashMap<u64, Link>,
    /// Neighbour slots, possibly stale or repeated; `links` is authoritative.
    adj: Vec<Vec<u32>>,
    /// Slab of groups; freed ids are reused under fresh stamps.
    groups: Vec<Group>,
    free_groups: Vec<u32>,
    group_of: FxHashMap<u64, u32>,
    heap: BinaryHeap<Entry>,
    stamps: u64,
    active_count: usize,
}

impl PartitionState {
    /// Star-tree state: every vertex is its own community.
    pub fn new(graph: &Graph, seed: u64) -> Self {
        let n = graph.node_count();
        let arena: Vec<TreeNode> = (0..n)
            .map(|v| TreeNode::leaf(v as u32, graph.degree(v) as u64))
            .collect();
        let rank = vertex_ranks(n, seed);
        let slots = (0..n).map(|v| Slot { vol: arena[v].vol, rank: rank[v], node: v as u32 }).collect();
        let mut state = PartitionState {
            slots,
            total_vol: graph.volume(),
            arena,
            rank,
            slot_of: (0..n as u32).collect(),
            links: FxHashMap::with_capacity_and_hasher(graph.edge_count(), Default::default()),
            adj: (0..n).map(|v| Vec::with_capacity(graph.degree(v))).collect(),
            groups: Vec::with_capacity(n),
            free_groups: Vec::new(),
            group_of: FxHashMap::with_capacity_and_hasher(n, Default::default()),
            heap: BinaryHeap::with_capacity(graph.edge_count()),
            stamps: 0,
            active_count: n,
        };
        for &(u, v) in graph.edges() {
            state.link(u, v, 1);
        }
        state
    }

    fn slot_vol(&self, s: u32) -> u64 {
        self.slots[s as usize].vol
    }

    fn slot_rank(&self, s: u32) -> u32 {
        self.slots[s as usize].rank
    }

    /// Key of pairing `owner` with a member of the given volume and rank.
    fn entry(&self, owner: u32, (vol, rank): (u64, u32), cut: u32, group: u32, stamp: u64) -> Entry {
        let delta = entropy::merge_delta(self.slot_vol(owner), vol, cut as u64, self.total_vol);
        let a = self.slot_rank(owner);
        Entry { delta, lo: a.min(rank), hi: a.max(rank), group, stamp }
    }

    fn link(&mut self, a: u32, b: u32, cut: u64) {
        let cut32 = u32::try_from(cut).expect("cut fits in u32");
        let (owner, member) = if (self.slot_vol(a), self.slot_rank(a)) >= (self.slot_vol(b), self.slot_rank(b)) {
            (a, b)
        } else {
            (b, a)
        };
        let (vol, rank) = (self.slot_vol(member), self.slot_rank(member));
        self.links.insert(pair_key(a, b), Link { cut: cut32, owner, vol, rank });
        self.adj[a as usize].push(b);
        self.adj[b as usize].push(a);
        let stamp = self.stamps;
        let mut e = self.entry(owner, (vol, rank), cut32, 0, stamp);
        match self.group_of.entry(group_key(owner, cut32)) {
            MapEntry::Occupied(o) => {
                e.group = *o.get();
                let group = &mut self.groups[e.group as usize];
                group.members.push(Reverse((vol, rank, member)));
                if !e.below(group.bound) {
                    return;
                }
                group.bound = e.key();
                group.stamp = stamp;
            }
            MapEntry::Vacant(v) => {
                let members = BinaryHeap::from(vec![Reverse((vol, rank, member))]);
                let group = Group { owner, cut: cut32, members, bound: e.key(), stamp };
                e.group = match self.free_groups.pop() {
                    Some(gid) => {
                        self.groups[gid as usize] = group;
                        gid
                    }
                    None => {
                        self.groups.push(group);
                        self.groups.len() as u32 - 1
                    }
                };
                v.insert(e.group);
            }
        }
        self.stamps += 1;
        self.heap.push(e);
    }

    /// Drops the pair `a`, `b` if adjacent; returns its cut.
    fn unlink(&mut self, a: u32, b: u32) -> u64 {
        let Some(la) = self.links.remove(&pair_key(a, b)) else {
            return 0;
        };
        la.cut as u64
    }

    fn slot(&self, i: u32) -> u32 {
        match self.slot_of.get(i as usize) {
            Some(&s) if self.slots[s as usize].node == i => s,
            _ => NO_SLOT,
        }
    }

    pub fn active_count(&self) -> usize {
        self.active_count
    }

    pub fn is_active(&self, i: u32) -> bool {
        self.slot(i) != NO_SLOT
    }

    /// Current root children, ascending.
    pub fn communities(&self) -> Vec<u32> {
        let mut out: Vec<u32> = self.slots.iter().map(|s| s.node).filter(|&i| i != NO_SLOT).collect();
        out.sort_unstable();
        out
    }

    pub fn vol(&self, i: u32) -> u64 {
        self.arena[i as usize].vol
    }

    pub fn g(&self, i: u32) -> u64 {
        self.arena[i as usize].g
    }

    /// Tie-break rank of node `i`.
    pub fn rank(&self, i: u32) -> u32 {
        self.rank[i as usize]
    }

    pub fn cut(&self, i: u32, j: u32) -> u64 {
        let (a, b) = (self.slot(i), self.slot(j));
        if a == NO_SLOT || b == NO_SLOT {
            return 0;
        }
        self.links.get(&pair_key(a, b)).map_or(0, |l| l.cut as u64)
    }

    pub fn total_vol(&self) -> u64 {
        self.total_vol
    }

    pub fn node(&self, i: u32) -> &TreeNode {
        &self.arena[i as usize]
    }

    fn check_pair(&self, i: u32, j: u32) -> Result<()> {
        if i == j {
            return Err(Error::InvalidMove(format!("cannot merge community {i} with itself")));
        }
        for x in [i, j] {
            if !self.is_active(x) {
                return Err(Error::InvalidMove(format!("community {x} is not a root child")));
            }
        }
        Ok(())
    }

    /// Entropy change of merging `i` and `j` under a new node.
    pub fn merge_delta(&self, i: u32, j: u32) -> Result<f64> {
        self.check_pair(i, j)?;
        Ok(entropy::merge_delta(self.vol(i), self.vol(j), self.cut(i, j), self.total_vol))
    }

    /// The adjacent pair with the most negative delta, ties going to the
    /// smaller rank and then the larger rank. Repeated calls without a merge
    /// return the same pair.
    pub fn pop_best(&mut self) -> Option<MergeCandidate> {
        let mut heap = std::mem::take(&mut self.heap);
        let mut found = None;
        while let Some(mut top) = heap.peek_mut() {
            let (gid, stamp) = (top.group, top.stamp);
            let Some(first) = self.group_head(gid, stamp) else {
                PeekMut::pop(top);
                continue;
            };
            let (vol, rank, member) = first;
            let (owner, cut) = (self.groups[gid as usize].owner, self.groups[gid as usize].cut);
            let current = (self.slot_vol(member), self.slot_rank(member));
            let bound = if (vol, rank) != current {
                let l = self.links.get_mut(&pair_key(owner, member)).unwrap();
                (l.vol, l.rank) = current;
                let members = &mut self.groups[gid as usize].members;
                members.pop();
                members.push(Reverse((current.0, current.1, member)));
                let Some(first) = self.group_head(gid, stamp) else {
                    PeekMut::pop(top);
                    continue;
                };
                self.entry(owner, (first.0, first.1), cut, gid, stamp)
            } else {
                let exact = self.entry(owner, current, cut, gid, stamp);
                if exact.key() == top.key() {
                    // stays queued: still a lower bound for the group once
                    // this pair is merged
                    let (i, j) = (self.slots[owner as usize].node, self.slots[member as usize].node);
                    found = Some(MergeCandidate { delta: exact.delta, lo: i.min(j), hi: i.max(j) });
                    break;
                }
                exact
            };
            self.groups[gid as usize].bound = bound.key();
            *top = bound;
        }
        self.heap = heap;
        found
    }

    /// Least current member of a group whose live entry carries `stamp`,
    /// after dropping members whose links have changed. Empty groups are
    /// freed.
    fn group_head(&mut self, gid: u32, stamp: u64) -> Option<(u64, u32, u32)> {
        let group = &mut self.groups[gid as usize];
        if group.stamp != stamp {
            return None;
        }
        let (owner, cut) = (group.owner, group.cut);
        let links = &self.links;
        while let Some(&Reverse(head)) = group.members.peek() {
            let (vol, rank, member) = head;
            match links.get(&pair_key(owner, member)) {
                Some(l) if l.owner == owner && l.cut == cut && l.vol == vol && l.rank == rank => return Some(head),
                _ => {
                    group.members.pop();
                }
            }
        }
        group.stamp = u64::MAX;
        group.members = BinaryHeap::new();
        self.group_of.remove(&group_key(owner, cut));
        self.free_groups.push(gid);
        None
    }

    /// Inserts a new node above `i` and `j`; returns its id.
    pub fn merge(&mut self, i: u32, j: u32) -> Result<u32> {
        self.check_pair(i, j)?;
        let (i, j) = (i.min(j), i.max(j));
        let w = self.arena.len() as u32;
        let cut_ij = self.cut(i, j);
        let vol = self.vol(i) + self.vol(j);
        let g = self.g(i) + self.g(j) - 2 * cut_ij;

        let (mut keep, mut gone) = (self.slot(i), self.slot(j));
        if self.adj[keep as usize].len() < self.adj[gone as usize].len() {
            std::mem::swap(&mut keep, &mut gone);
        }
        self.unlink(keep, gone);
        let mut near = std::mem::take(&mut self.adj[gone as usize]);
        near.sort_unstable();
        near.dedup();
        let mut moved: Vec<(u32, u64)> = Vec::with_capacity(near.len());
        for x in near {
            let c = self.unlink(gone, x);
            if c > 0 {
                moved.push((x, c + self.unlink(keep, x)));
            }
        }

        let mut node = TreeNode::internal(vec![i, j], vol, g);
        node.level = self.arena[i as usize].level.max(self.arena[j as usize].level) + 1;
        self.arena.push(node);
        self.arena[i as usize].parent = Some(w);
        self.arena[j as usize].parent = Some(w);
        self.rank.push(w);
        self.slot_of.push(keep);
        self.slots[keep as usize] = Slot { vol, rank: w, node: w };
        self.slots[gone as usize].node = NO_SLOT;
        self.active_count -= 1;
        for (x, c) in moved {
            self.link(keep, x, c);
        }
        Ok(w)
    }

    /// Attaches the remaining communities to a new root; returns the working
    /// arena and the root id.
    pub(crate) fn finish(mut self) -> (Vec<TreeNode>, u32) {
        let root = self.arena.len() as u32;
        let children = self.communities();
        for &c in &children {
            self.arena[c as usize].parent = Some(root);
        }
        let level = children.iter().map(|&c| self.arena[c as usize].level).max().unwrap_or(0) + 1;
        let mut node = TreeNode::internal(children, self.total_vol, 0);
        node.level = level;
        self.arena.push(node);
        (self.arena, root)
    }
}

/// Greedy coding tree of height at most `k`.
///
/// Starting from the star tree, the pair of root children whose merge lowers
/// the entropy most is merged until the root has two children. If the
/// resulting binary tree is taller than `k`, the internal node whose removal
/// raises the entropy least is removed until the height is at most `k`.
/// Merge ties go to the pair with the smaller, then larger, rank (see
/// [`vertex_ranks`]); delete ties to the smaller node id.
pub fn build_coding_tree(graph: &Graph, k: u32, seed: u64) -> Result<CodingTree> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("tree height k must be at least 2, got {k}")));
    }
    if !graph.is_connected() {
        return Err(Error::InvalidGraph("graph is disconnected".into()));
    }
    let n = graph.node_count();
    if n <= 2 {
        return Ok(CodingTree::star(graph).with_heights(k, 1));
    }
    let mut state = PartitionState::new(graph, seed);
    while state.active_count() > 2 {
        let best = state.pop_best().ok_or_else(|| {
            Error::InvalidGraph("merge phase stalled: remaining communities share no edges".into())
        })?;
        debug_assert_eq!(best.delta, state.merge_delta(best.lo, best.hi)?);
        state.merge(best.lo, best.hi)?;
    }
    let (arena, root) = state.finish();
    Ok(compress_greedy(arena, root, graph, k))
}
