//! Factorial-time isomorphism oracle for small graphs. Used to certify the
//! canonical labeling; never on the exploration path.

use std::collections::HashSet;

use thiserror::Error;

use super::{GraphState, NodeId};

/// Node bound for the brute-force search.
pub const MAX_ORACLE_NODES: usize = 10;

#[derive(Error, Debug, PartialEq, Eq)]
pub enum OracleError {
    #[error("graph has {0} nodes, oracle bound is {MAX_ORACLE_NODES}")]
    TooLarge(usize),
}

/// Decides isomorphism by searching for a type/attribute/edge-preserving
/// node bijection.
pub fn isomorphic_bruteforce(g1: &GraphState, g2: &GraphState) -> Result<bool, OracleError> {
    for g in [g1, g2] {
        if g.node_count() > MAX_ORACLE_NODES {
            return Err(OracleError::TooLarge(g.node_count()));
        }
    }
    if g1.node_count() != g2.node_count() || g1.edges().len() != g2.edges().len() {
        return Ok(false);
    }
    let n = g1.node_count();
    let attrs1: Vec<Vec<u8>> = g1.nodes().iter().map(|n| n.attr_bytes()).collect();
    let attrs2: Vec<Vec<u8>> = g2.nodes().iter().map(|n| n.attr_bytes()).collect();
    {
        let mut a = attrs1.clone();
        let mut b = attrs2.clone();
        a.sort();
        b.sort();
        if a != b {
            return Ok(false);
        }
    }
    let edges2: HashSet<(NodeId, u8, NodeId)> = g2
        .edges()
        .iter()
        .map(|e| (e.src, e.label as u8, e.dst))
        .collect();
    let mut mapping: Vec<Option<NodeId>> = vec![None; n];
    let mut used = vec![false; n];
    Ok(extend(
        g1,
        &attrs1,
        &attrs2,
        &edges2,
        &mut mapping,
        &mut used,
        0,
    ))
}

fn extend(
    g1: &GraphState,
    attrs1: &[Vec<u8>],
    attrs2: &[Vec<u8>],
    edges2: &HashSet<(NodeId, u8, NodeId)>,
    mapping: &mut Vec<Option<NodeId>>,
    used: &mut Vec<bool>,
    next: NodeId,
) -> bool {
    if next == mapping.len() {
        return true;
    }
    'candidates: for cand in 0..mapping.len() {
        if used[cand] || attrs1[next] != attrs2[cand] {
            continue;
        }
        // all edges between `next` and already-mapped nodes must map to
        // edges of g2
        for e in g1.edges() {
            let (src, dst) = (e.src, e.dst);
            if src != next && dst != next {
                continue;
            }
            let msrc = if src == next {
                Some(cand)
            } else {
                mapping[src]
            };
            let mdst = if dst == next {
                Some(cand)
            } else {
                mapping[dst]
            };
            if let (Some(ms), Some(md)) = (msrc, mdst) {
                if !edges2.contains(&(ms, e.label as u8, md)) {
                    continue 'candidates;
                }
            }
        }
        mapping[next] = Some(cand);
        used[cand] = true;
        if extend(g1, attrs1, attrs2, edges2, mapping, used, next + 1) {
            return true;
        }
        mapping[next] = None;
        used[cand] = false;
    }
    false
}
