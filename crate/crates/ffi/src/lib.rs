//! C ABI over the coding-tree toolkit.
//!
//! Graphs and trees cross the boundary as opaque handles owned by the
//! caller, who releases them with the matching `_free` function. Every
//! fallible call returns a [`CotreeStatus`]; on failure the message is
//! available from [`cotree_last_error`] on the same thread. Panics never
//! unwind into C: they are caught and reported as `COTREE_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use cotree::entropy::entropy_of_tree;
use cotree::graph::{load_edge_list, FeatureMode, Graph, NodeFeatureInit};
use cotree::kernel::gram;
use cotree::tree::{build_coding_tree, build_rbbt, canonicalize_depth, CodingTree};
use cotree::Error;

/// An undirected simple graph.
pub struct CotreeGraph(Graph);

/// A coding tree over the vertices of a graph.
pub struct CotreeTree(CodingTree);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CotreeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidGraph = 3,
    InvalidTree = 4,
    Io = 5,
    Parse = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Failure(CotreeStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::MissingFile { .. } | Error::Io { .. } | Error::Checkpoint(_) => CotreeStatus::Io,
            Error::Parse { .. } => CotreeStatus::Parse,
            Error::InvalidGraph(_) | Error::Disconnected { .. } => CotreeStatus::InvalidGraph,
            Error::InvalidTree(_) | Error::NotCanonical(_) => CotreeStatus::InvalidTree,
            _ => CotreeStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(CotreeStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, recording any failure or panic for [`cotree_last_error`].
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CotreeStatus {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|payload| {
        let msg = payload
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| payload.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "unknown panic".into());
        Err(Failure(CotreeStatus::Panic, format!("panic: {msg}")))
    });
    match outcome {
        Ok(()) => CotreeStatus::Ok,
        Err(Failure(status, msg)) => {
            set_error(msg);
            status
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the last failed call on this thread, or null if none. The
/// pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn cotree_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn cotree_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a graph on `node_count` vertices from `edge_count` pairs stored
/// flat in `edges` (`u0, v0, u1, v1, ...`). Self-loops and repeated edges
/// are rejected.
///
/// # Safety
/// `edges` must point to `2 * edge_count` readable `u32` values (it may be
/// null when `edge_count` is 0) and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cotree_graph_new(
    node_count: usize,
    edges: *const u32,
    edge_count: usize,
    out: *mut *mut CotreeGraph,
) -> CotreeStatus {
    guard(|| {
        let flat: &[u32] = if edge_count == 0 {
            &[]
        } else if edges.is_null() {
            return Err(null("edges"));
        } else {
            std::slice::from_raw_parts(edges, 2 * edge_count)
        };
        let pairs = flat.chunks_exact(2).map(|p| (p[0], p[1]));
        put(out, CotreeGraph(Graph::new(node_count, pairs, None)?))
    })
}

/// Reads a graph from an edge-list file of 0-based `u v` lines.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cotree_graph_from_edge_list(path: *const c_char, out: *mut *mut CotreeGraph) -> CotreeStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| Failure(CotreeStatus::InvalidArgument, "path is not UTF-8".into()))?;
        put(out, CotreeGraph(load_edge_list(path)?))
    })
}

/// # Safety
/// `graph` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cotree_graph_free(graph: *mut CotreeGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Vertex count, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cotree_graph_node_count(graph: *const CotreeGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.node_count())
}

/// Edge count, or 0 for a null handle.
///
/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cotree_graph_edge_count(graph: *const CotreeGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.edge_count())
}

/// Greedy coding tree of height at most `k` (at least 2). `seed` only
/// breaks ties between equally good merges.
///
/// # Safety
/// `graph` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cotree_build_tree(graph: *const CotreeGraph, k: u32, seed: u64, out: *mut *mut CotreeTree) -> CotreeStatus {
    guard(|| {
        let g = borrow(graph, "graph")?;
        put(out, CotreeTree(build_coding_tree(&g.0, k, seed)?))
    })
}

/// Random balanced binary tree compressed at random to height `k`.
///
/// # Safety
/// `graph` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cotree_build_rbbt(graph: *const CotreeGraph, k: u32, seed: u64, out: *mut *mut CotreeTree) -> CotreeStatus {
    guard(|| {
        let g = borrow(graph, "graph")?;
        put(out, CotreeTree(build_rbbt(&g.0, k, seed)?))
    })
}

/// Copy of `tree` padded so that every leaf sits at depth `k`.
///
/// # Safety
/// `tree` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cotree_tree_canonicalize(tree: *const CotreeTree, k: u32, out: *mut *mut CotreeTree) -> CotreeStatus {
    guard(|| {
        let t = borrow(tree, "tree")?;
        put(out, CotreeTree(canonicalize_depth(&t.0, k)?))
    })
}

/// # Safety
/// `tree` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cotree_tree_free(tree: *mut CotreeTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// Node count including leaves and root, or 0 for a null handle.
///
/// # Safety
/// `tree` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cotree_tree_node_count(tree: *const CotreeTree) -> usize {
    tree.as_ref().map_or(0, |t| t.0.len())
}

/// Height (root depth 0), or 0 for a null handle.
///
/// # Safety
/// `tree` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn cotree_tree_height(tree: *const CotreeTree) -> u32 {
    tree.as_ref().map_or(0, |t| t.0.height())
}

/// Writes the parent of every node into `parents` (`-1` for the root).
/// Nodes `0..n` are the leaves of vertices `0..n`.
///
/// # Safety
/// `tree` must be a live handle and `parents` must hold `len` writable
/// values; `len` must equal the node count.
#[no_mangle]
pub unsafe extern "C" fn cotree_tree_parents(tree: *const CotreeTree, parents: *mut i64, len: usize) -> CotreeStatus {
    guard(|| {
        let t = borrow(tree, "tree")?;
        if parents.is_null() {
            return Err(null("parents"));
        }
        if len != t.0.len() {
            return Err(Failure(CotreeStatus::InvalidArgument, format!("buffer holds {len} values, tree has {} nodes", t.0.len())));
        }
        let out = std::slice::from_raw_parts_mut(parents, len);
        for (slot, node) in out.iter_mut().zip(t.0.nodes()) {
            *slot = node.parent.map_or(-1, i64::from);
        }
        Ok(())
    })
}

/// Structural entropy of `graph` under `tree`, or under the star tree when
/// `tree` is null.
///
/// # Safety
/// `graph` must be a live handle, `tree` null or live, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cotree_entropy(graph: *const CotreeGraph, tree: *const CotreeTree, out: *mut f64) -> CotreeStatus {
    guard(|| {
        let g = borrow(graph, "graph")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let h = match tree.as_ref() {
            Some(t) => entropy_of_tree(&g.0, &t.0)?,
            None => entropy_of_tree(&g.0, &CodingTree::star(&g.0))?,
        };
        *out = h;
        Ok(())
    })
}

/// Tree text export (header `n k entropy`, one line per node). Release the
/// string with [`cotree_string_free`].
///
/// # Safety
/// `tree` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn cotree_tree_to_text(tree: *const CotreeTree, entropy: f64, out: *mut *mut c_char) -> CotreeStatus {
    guard(|| {
        let t = borrow(tree, "tree")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = CString::new(t.0.to_text(entropy)).expect("tree text has no NUL").into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cotree_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// WL-CT Gram matrix of `count` graphs, each paired with a depth-canonical
/// tree of common height. Leaves are labelled by vertex degree. Writes
/// `count * count` values row-major into `out`.
///
/// # Safety
/// `graphs` and `trees` must each point to `count` live handles and `out`
/// to `count * count` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn cotree_gram(
    graphs: *const *const CotreeGraph,
    trees: *const *const CotreeTree,
    count: usize,
    normalize: bool,
    out: *mut f64,
) -> CotreeStatus {
    guard(|| {
        if count == 0 {
            return Ok(());
        }
        if graphs.is_null() || trees.is_null() || out.is_null() {
            return Err(null("graphs, trees or out"));
        }
        let graphs = std::slice::from_raw_parts(graphs, count)
            .iter()
            .map(|&g| borrow(g, "graph").map(|g| &g.0))
            .collect::<Result<Vec<_>, _>>()?;
        let trees = std::slice::from_raw_parts(trees, count)
            .iter()
            .map(|&t| borrow(t, "tree").map(|t| t.0.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let init = NodeFeatureInit::fit(graphs.iter().copied(), FeatureMode::Degree)?;
        let labels = graphs.iter().map(|g| init.initial_labels(g)).collect::<cotree::Result<Vec<_>>>()?;
        let gram = gram(&trees, &labels, normalize)?;
        let dst = std::slice::from_raw_parts_mut(out, count * count);
        for (d, v) in dst.iter_mut().zip(gram.values().iter()) {
            *d = *v;
        }
        Ok(())
    })
}
