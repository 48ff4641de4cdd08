//! Canonical labeling of typed attributed graphs.
//!
//! Color refinement (initial colors from node type + attributes, iterated
//! neighborhood multisets) followed by individualization with backtracking
//! on ambiguous cells. The certificate is the lexicographically smallest
//! serialization over all discrete orderings reached, so certificate
//! equality coincides exactly with graph isomorphism.

use super::{Edge, GraphState, NodeId};

/// Canonical byte string of a graph; equal iff the graphs are isomorphic.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Certificate(pub Vec<u8>);

impl Certificate {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

/// Computes the canonical certificate of `g`.
pub fn certificate(g: &GraphState) -> Certificate {
    Certificate(canonical_form(g).0)
}

/// Certificate plus one canonical node ordering realizing it:
/// `order[i]` is the original id of the node at canonical position `i`.
pub fn canonical_order(g: &GraphState) -> Vec<NodeId> {
    canonical_form(g).1
}

struct Ctx<'a> {
    g: &'a GraphState,
    attr_colors: Vec<u32>,
    // incident edges per node as (direction, label, other endpoint)
    incident: Vec<Vec<(u8, u8, NodeId)>>,
    best: Option<(Vec<u8>, Vec<NodeId>)>,
}

fn canonical_form(g: &GraphState) -> (Vec<u8>, Vec<NodeId>) {
    let n = g.node_count();
    if n == 0 {
        return (vec![0, 0, 0, 0], Vec::new());
    }
    let mut keys: Vec<Vec<u8>> = g.nodes().iter().map(|node| node.attr_bytes()).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    sorted.dedup();
    let attr_colors: Vec<u32> = keys
        .iter_mut()
        .map(|k| sorted.binary_search(k).unwrap() as u32)
        .collect();

    let mut incident = vec![Vec::new(); n];
    for e in g.edges() {
        incident[e.src].push((0u8, e.label as u8, e.dst));
        incident[e.dst].push((1u8, e.label as u8, e.src));
    }

    let mut ctx = Ctx {
        g,
        attr_colors: attr_colors.clone(),
        incident,
        best: None,
    };
    let colors = refine(&ctx, attr_colors);
    search(&mut ctx, colors);
    ctx.best.expect("at least one discrete ordering")
}

/// Stable color refinement: a node's new color is its old color together
/// with the sorted multiset of (direction, label, neighbor color) over its
/// incident edges. Iterates until the partition stops splitting.
fn refine(ctx: &Ctx, mut colors: Vec<u32>) -> Vec<u32> {
    let n = colors.len();
    loop {
        type Sig = (u32, Vec<(u8, u8, u32)>);
        let mut sigs: Vec<Sig> = Vec::with_capacity(n);
        for v in 0..n {
            let mut nb: Vec<(u8, u8, u32)> = ctx.incident[v]
                .iter()
                .map(|&(dir, label, u)| (dir, label, colors[u]))
                .collect();
            nb.sort_unstable();
            sigs.push((colors[v], nb));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| sigs[a].cmp(&sigs[b]));
        let mut new_colors = vec![0u32; n];
        let mut next = 0u32;
        for i in 0..n {
            if i > 0 && sigs[order[i]] != sigs[order[i - 1]] {
                next += 1;
            }
            new_colors[order[i]] = next;
        }
        let old_classes = count_classes(&colors);
        let new_classes = next as usize + 1;
        colors = new_colors;
        if new_classes == old_classes {
            return colors;
        }
    }
}

fn count_classes(colors: &[u32]) -> usize {
    let mut seen: Vec<u32> = colors.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

fn search(ctx: &mut Ctx, colors: Vec<u32>) {
    let n = colors.len();
    // smallest non-singleton cell, by color value
    let mut cell: Option<(u32, Vec<NodeId>)> = None;
    let mut max_color = 0;
    for c in colors.iter().copied() {
        max_color = max_color.max(c);
    }
    for c in 0..=max_color {
        let members: Vec<NodeId> = (0..n).filter(|&v| colors[v] == c).collect();
        if members.len() > 1 {
            cell = Some((c, members));
            break;
        }
    }
    let Some((_, members)) = cell else {
        // discrete: position of node v is colors[v]
        let mut order = vec![0usize; n];
        for v in 0..n {
            order[colors[v] as usize] = v;
        }
        let bytes = serialize_ordered(ctx.g, &colors);
        if ctx.best.as_ref().is_none_or(|(b, _)| bytes < *b) {
            ctx.best = Some((bytes, order));
        }
        return;
    };
    // Individualize one representative per duplicate class: if swapping two
    // cell members is an automorphism, their branches are identical.
    let mut reps: Vec<NodeId> = Vec::new();
    'outer: for &v in &members {
        for &u in &reps {
            if are_twins(ctx, u, v) {
                continue 'outer;
            }
        }
        reps.push(v);
    }
    for &v in &reps {
        let mut split: Vec<u32> = colors.iter().map(|&c| c * 2 + 1).collect();
        split[v] -= 1;
        let refined = refine(ctx, split);
        search(ctx, refined);
    }
}

/// True iff transposing `u` and `v` is an automorphism: same attributes and
/// identical incident edge sets once the pair is identified.
fn are_twins(ctx: &Ctx, u: NodeId, v: NodeId) -> bool {
    if ctx.attr_colors[u] != ctx.attr_colors[v] {
        return false;
    }
    let view = |w: NodeId| {
        let mut edges: Vec<(u8, u8, usize)> = ctx.incident[w]
            .iter()
            .map(|&(dir, label, other)| {
                let o = if other == u || other == v {
                    if other == w {
                        usize::MAX // self loop
                    } else {
                        usize::MAX - 1 // the twin partner
                    }
                } else {
                    other
                };
                (dir, label, o)
            })
            .collect();
        edges.sort_unstable();
        edges
    };
    view(u) == view(v)
}

/// Serializes the graph with node `v` at position `pos[v]`; the positions
/// must be a permutation of `0..n`.
fn serialize_ordered(g: &GraphState, pos: &[u32]) -> Vec<u8> {
    let n = g.node_count();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by_key(|&v| pos[v]);
    let mut out = Vec::new();
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for &v in &order {
        out.extend_from_slice(&g.nodes()[v].attr_bytes());
    }
    let mut edges: Vec<Edge> = g
        .edges()
        .iter()
        .map(|e| Edge {
            src: pos[e.src] as usize,
            label: e.label,
            dst: pos[e.dst] as usize,
        })
        .collect();
    edges.sort_unstable();
    for e in &edges {
        out.extend_from_slice(&(e.src as u32).to_le_bytes());
        out.push(e.label as u8);
        out.extend_from_slice(&(e.dst as u32).to_le_bytes());
    }
    out
}
