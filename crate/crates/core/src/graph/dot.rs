//! DOT serialization of a single state graph. Nodes are emitted in
//! canonical order, so isomorphic states serialize identically.

use super::canon::canonical_order;
use super::{GraphState, Node};

fn node_label(node: &Node) -> String {
    match node {
        Node::Counters { maj, next_rnd } => match next_rnd {
            Some(nr) => format!("Counters{{maj={maj},nextRnd={nr}}}"),
            None => format!("Counters{{maj={maj}}}"),
        },
        Node::Proposer { crnd, is_prepared } => {
            let mut attrs = Vec::new();
            if let Some(c) = crnd {
                attrs.push(format!("crnd={c}"));
            }
            if *is_prepared {
                attrs.push("isPrepared".to_string());
            }
            format!("Proposer{{{}}}", attrs.join(","))
        }
        Node::Acceptor { rnd, prnd } => {
            let mut attrs = Vec::new();
            if let Some(r) = rnd {
                attrs.push(format!("rnd={r}"));
            }
            if let Some(p) = prnd {
                attrs.push(format!("prnd={p}"));
            }
            format!("Acceptor{{{}}}", attrs.join(","))
        }
        Node::Learner => "Learner{}".to_string(),
        Node::Prepare { rnd } => format!("Prepare{{rnd={rnd}}}"),
        Node::Promise { rnd, prnd } => format!("Promise{{rnd={rnd},prnd={prnd}}}"),
        Node::Accept { rnd } => format!("Accept{{rnd={rnd}}}"),
        Node::Learn { rnd } => format!("Learn{{rnd={rnd}}}"),
        Node::Value { default } => {
            if *default {
                "Value{default}".to_string()
            } else {
                "Value{}".to_string()
            }
        }
    }
}

/// Renders `g` as a DOT digraph.
pub fn to_dot(g: &GraphState) -> String {
    let order = canonical_order(g);
    let mut pos = vec![0usize; g.node_count()];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    let mut out = String::from("digraph state {\n");
    for &v in &order {
        out.push_str(&format!(
            "  n{} [label=\"{}\"];\n",
            pos[v],
            node_label(&g.nodes()[v])
        ));
    }
    let mut edges: Vec<(usize, &'static str, usize)> = g
        .edges()
        .iter()
        .map(|e| (pos[e.src], e.label.name(), pos[e.dst]))
        .collect();
    edges.sort_unstable();
    for (src, label, dst) in edges {
        out.push_str(&format!("  n{src} -> n{dst} [label=\"{label}\"];\n"));
    }
    out.push_str("}\n");
    out
}
