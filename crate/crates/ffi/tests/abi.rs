use std::ffi::{CStr, CString};
use std::ptr;

use cotree_ffi::*;

fn graph(n: usize, edges: &[u32]) -> *mut CotreeGraph {
    let mut g = ptr::null_mut();
    let status = unsafe { cotree_graph_new(n, edges.as_ptr(), edges.len() / 2, &mut g) };
    assert_eq!(status, CotreeStatus::Ok);
    g
}

fn last_error() -> String {
    let p = cotree_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn path_tree_round_trip() {
    unsafe {
        let g = graph(3, &[0, 1, 1, 2]);
        assert_eq!(cotree_graph_node_count(g), 3);
        assert_eq!(cotree_graph_edge_count(g), 2);

        let mut t = ptr::null_mut();
        assert_eq!(cotree_build_tree(g, 2, 0, &mut t), CotreeStatus::Ok);
        assert!(cotree_tree_height(t) <= 2);

        let mut h = 0.0;
        assert_eq!(cotree_entropy(g, t, &mut h), CotreeStatus::Ok);
        let mut star = 0.0;
        assert_eq!(cotree_entropy(g, ptr::null(), &mut star), CotreeStatus::Ok);
        assert!(h <= star + 1e-12);

        let len = cotree_tree_node_count(t);
        let mut parents = vec![0i64; len];
        assert_eq!(cotree_tree_parents(t, parents.as_mut_ptr(), len), CotreeStatus::Ok);
        assert_eq!(parents.iter().filter(|&&p| p == -1).count(), 1);
        assert!(parents[..3].iter().all(|&p| p >= 3));

        let mut text = ptr::null_mut();
        assert_eq!(cotree_tree_to_text(t, h, &mut text), CotreeStatus::Ok);
        let s = CStr::from_ptr(text).to_str().unwrap().to_owned();
        cotree_string_free(text);
        assert!(s.starts_with("3 "), "{s}");

        cotree_tree_free(t);
        cotree_graph_free(g);
    }
}

#[test]
fn failures_set_status_and_message() {
    unsafe {
        let mut g = ptr::null_mut();
        let loops = [0u32, 0];
        assert_eq!(cotree_graph_new(2, loops.as_ptr(), 1, &mut g), CotreeStatus::InvalidGraph);
        assert!(g.is_null());
        assert!(last_error().contains("invalid graph"));

        assert_eq!(cotree_graph_new(2, ptr::null(), 1, &mut g), CotreeStatus::NullPointer);
        assert!(last_error().contains("edges"));

        let path = CString::new("/nonexistent/edges.txt").unwrap();
        assert_eq!(cotree_graph_from_edge_list(path.as_ptr(), &mut g), CotreeStatus::Io);

        let g = graph(2, &[0, 1]);
        let mut t = ptr::null_mut();
        assert_eq!(cotree_build_tree(g, 1, 0, &mut t), CotreeStatus::InvalidArgument);
        assert_eq!(cotree_build_tree(ptr::null(), 2, 0, &mut t), CotreeStatus::NullPointer);

        assert_eq!(cotree_build_tree(g, 2, 0, &mut t), CotreeStatus::Ok);
        let mut short = [0i64; 1];
        assert_eq!(cotree_tree_parents(t, short.as_mut_ptr(), 1), CotreeStatus::InvalidArgument);
        cotree_tree_free(t);
        cotree_graph_free(g);

        // null handles are tolerated by the free and count functions
        cotree_graph_free(ptr::null_mut());
        cotree_tree_free(ptr::null_mut());
        cotree_string_free(ptr::null_mut());
        assert_eq!(cotree_tree_node_count(ptr::null()), 0);
    }
}

#[test]
fn gram_of_identical_graphs_is_all_ones() {
    unsafe {
        let edges = [0u32, 1, 1, 2, 2, 3, 3, 0];
        let gs: Vec<_> = (0..3).map(|_| graph(4, &edges)).collect();
        let ts: Vec<_> = gs
            .iter()
            .map(|&g| {
                let mut t = ptr::null_mut();
                assert_eq!(cotree_build_tree(g, 3, 1, &mut t), CotreeStatus::Ok);
                let mut c = ptr::null_mut();
                assert_eq!(cotree_tree_canonicalize(t, 3, &mut c), CotreeStatus::Ok);
                cotree_tree_free(t);
                c
            })
            .collect();
        let gp: Vec<*const CotreeGraph> = gs.iter().map(|&g| g as *const _).collect();
        let tp: Vec<*const CotreeTree> = ts.iter().map(|&t| t as *const _).collect();
        let mut out = vec![0.0; 9];
        assert_eq!(cotree_gram(gp.as_ptr(), tp.as_ptr(), 3, true, out.as_mut_ptr()), CotreeStatus::Ok, "{}", last_error());
        assert!(out.iter().all(|v| (v - 1.0).abs() < 1e-12), "{out:?}");
        ts.into_iter().for_each(|t| cotree_tree_free(t));
        gs.into_iter().for_each(|g| cotree_graph_free(g));
    }
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(cotree_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
