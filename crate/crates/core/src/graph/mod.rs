//! Graph-based state encoding: the global protocol configuration as a single
//! typed attributed graph, plus the transformation rules that drive it.
//!
//! Processes, messages and values have no identities; they are distinguished
//! only by type, attributes and incident edges. Symmetric configurations are
//! therefore isomorphic graphs and collapse under canonical labeling (see
//! [`canon`]). Messages are broadcast nodes linked to their senders; they are
//! never consumed, re-reaction is prevented by attribute guards and negative
//! application conditions.

pub mod canon;
pub mod dot;
pub mod iso;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::protocol::{ProtocolConfig, RoundId, Verdict, Violation};

pub type NodeId = usize;

/// One node of the state graph. The variant is the node type; attributes
/// live inline. `Option` attributes are unset until `initValues` runs.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Node {
    Counters {
        maj: i32,
        next_rnd: Option<i32>,
    },
    Proposer {
        crnd: Option<RoundId>,
        is_prepared: bool,
    },
    Acceptor {
        rnd: Option<RoundId>,
        prnd: Option<RoundId>,
    },
    Learner,
    Prepare {
        rnd: RoundId,
    },
    Promise {
        rnd: RoundId,
        prnd: RoundId,
    },
    Accept {
        rnd: RoundId,
    },
    Learn {
        rnd: RoundId,
    },
    Value {
        default: bool,
    },
}

impl Node {
    pub fn type_name(&self) -> &'static str {
        match self {
            Node::Counters { .. } => "Counters",
            Node::Proposer { .. } => "Proposer",
            Node::Acceptor { .. } => "Acceptor",
            Node::Learner => "Learner",
            Node::Prepare { .. } => "Prepare",
            Node::Promise { .. } => "Promise",
            Node::Accept { .. } => "Accept",
            Node::Learn { .. } => "Learn",
            Node::Value { .. } => "Value",
        }
    }

    /// Encodes the variant and all attribute values; two nodes are
    /// attribute-equal iff their byte strings are equal.
    pub(crate) fn attr_bytes(&self) -> Vec<u8> {
        fn push_i32(out: &mut Vec<u8>, v: i32) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        fn push_opt(out: &mut Vec<u8>, v: Option<i32>) {
            match v {
                None => out.push(0),
                Some(v) => {
                    out.push(1);
                    push_i32(out, v);
                }
            }
        }
        let mut out = Vec::new();
        match *self {
            Node::Counters { maj, next_rnd } => {
                out.push(0);
                push_i32(&mut out, maj);
                push_opt(&mut out, next_rnd);
            }
            Node::Proposer { crnd, is_prepared } => {
                out.push(1);
                push_opt(&mut out, crnd.map(|r| r.0));
                out.push(is_prepared as u8);
            }
            Node::Acceptor { rnd, prnd } => {
                out.push(2);
                push_opt(&mut out, rnd.map(|r| r.0));
                push_opt(&mut out, prnd.map(|r| r.0));
            }
            Node::Learner => out.push(3),
            Node::Prepare { rnd } => {
                out.push(4);
                push_i32(&mut out, rnd.0);
            }
            Node::Promise { rnd, prnd } => {
                out.push(5);
                push_i32(&mut out, rnd.0);
                push_i32(&mut out, prnd.0);
            }
            Node::Accept { rnd } => {
                out.push(6);
                push_i32(&mut out, rnd.0);
            }
            Node::Learn { rnd } => {
                out.push(7);
                push_i32(&mut out, rnd.0);
            }
            Node::Value { default } => {
                out.push(8);
                out.push(default as u8);
            }
        }
        out
    }
}

/// Edge labels of the type graph.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum EdgeLabel {
    Sender,
    Myval,
    Pval,
    Val,
    Lval,
    Aval,
    Chosen,
}

impl EdgeLabel {
    pub fn name(self) -> &'static str {
        match self {
            EdgeLabel::Sender => "sender",
            EdgeLabel::Myval => "myval",
            EdgeLabel::Pval => "pval",
            EdgeLabel::Val => "val",
            EdgeLabel::Lval => "lval",
            EdgeLabel::Aval => "aval",
            EdgeLabel::Chosen => "chosen",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Edge {
    pub src: NodeId,
    pub label: EdgeLabel,
    pub dst: NodeId,
}

/// The transformation and safety rules of the graph model.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum RuleId {
    InitValues,
    OnPropose,
    OnPromise,
    ChangeMyval,
    SendAccept,
    OnPrepare,
    OnAccept,
    OnLearn,
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleId::InitValues => "initValues",
            RuleId::OnPropose => "onPropose",
            RuleId::OnPromise => "onPromise",
            RuleId::ChangeMyval => "changeMyval",
            RuleId::SendAccept => "sendAccept",
            RuleId::OnPrepare => "onPrepare",
            RuleId::OnAccept => "onAccept",
            RuleId::OnLearn => "onLearn",
        };
        f.write_str(s)
    }
}

/// One enabled rule application with its bound nodes. The `Quorum` variant
/// is the atomic onPromise / try changeMyval / sendAccept sequence of the
/// control program, labeled by its head rule `onPromise`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum RuleMatch {
    Propose { proposer: NodeId },
    Quorum { proposer: NodeId },
    Prepare { acceptor: NodeId, prepare: NodeId },
    Accept { acceptor: NodeId, accept: NodeId },
    Learn { rnd: RoundId, value: NodeId },
}

impl RuleMatch {
    pub fn rule(&self) -> RuleId {
        match self {
            RuleMatch::Propose { .. } => RuleId::OnPropose,
            RuleMatch::Quorum { .. } => RuleId::OnPromise,
            RuleMatch::Prepare { .. } => RuleId::OnPrepare,
            RuleMatch::Accept { .. } => RuleId::OnAccept,
            RuleMatch::Learn { .. } => RuleId::OnLearn,
        }
    }
}

impl fmt::Display for RuleMatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RuleMatch::Propose { proposer } => write!(f, "onPropose[{proposer}]"),
            RuleMatch::Quorum { proposer } => write!(f, "onPromise[{proposer}]"),
            RuleMatch::Prepare { acceptor, prepare } => {
                write!(f, "onPrepare[{acceptor},{prepare}]")
            }
            RuleMatch::Accept { acceptor, accept } => write!(f, "onAccept[{acceptor},{accept}]"),
            RuleMatch::Learn { rnd, value } => write!(f, "onLearn[{rnd},{value}]"),
        }
    }
}

#[derive(Error, Debug, PartialEq, Eq)]
pub enum RuleError {
    #[error("graph is already initialized")]
    AlreadyInitialized,
    #[error("graph is not initialized")]
    NotInitialized,
    #[error("rule {0} is not enabled for the given match")]
    NotEnabled(RuleId),
    #[error("match binds node {0} of the wrong type")]
    BadMatch(NodeId),
}

/// A complete global state: typed nodes plus labeled directed edges.
/// Immutable after construction; rule application returns a new graph.
/// Edges are kept sorted so structural equality is well defined.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GraphState {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

impl GraphState {
    /// The initial configuration: process and counter nodes only, no values
    /// or messages, all mutable attributes unset.
    pub fn initial(cfg: &ProtocolConfig) -> Self {
        let mut nodes = Vec::new();
        nodes.push(Node::Counters {
            maj: cfg.maj as i32,
            next_rnd: None,
        });
        for _ in 0..cfg.num_proposers {
            nodes.push(Node::Proposer {
                crnd: None,
                is_prepared: false,
            });
        }
        for _ in 0..cfg.num_acceptors {
            nodes.push(Node::Acceptor {
                rnd: None,
                prnd: None,
            });
        }
        nodes.push(Node::Learner);
        GraphState {
            nodes,
            edges: Vec::new(),
        }
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    fn counters_id(&self) -> NodeId {
        self.nodes
            .iter()
            .position(|n| matches!(n, Node::Counters { .. }))
            .expect("exactly one Counters node")
    }

    fn learner_id(&self) -> NodeId {
        self.nodes
            .iter()
            .position(|n| matches!(n, Node::Learner))
            .expect("exactly one Learner node")
    }

    pub fn maj(&self) -> i32 {
        match self.nodes[self.counters_id()] {
            Node::Counters { maj, .. } => maj,
            _ => unreachable!(),
        }
    }

    fn next_rnd(&self) -> Option<i32> {
        match self.nodes[self.counters_id()] {
            Node::Counters { next_rnd, .. } => next_rnd,
            _ => unreachable!(),
        }
    }

    pub fn is_initialized(&self) -> bool {
        self.next_rnd().is_some()
    }

    /// Target of the unique `label` edge out of `src`, if any.
    pub fn edge_target(&self, src: NodeId, label: EdgeLabel) -> Option<NodeId> {
        self.edges
            .iter()
            .find(|e| e.src == src && e.label == label)
            .map(|e| e.dst)
    }

    fn redirect_edge(&mut self, src: NodeId, label: EdgeLabel, new_dst: NodeId) {
        let e = self
            .edges
            .iter_mut()
            .find(|e| e.src == src && e.label == label)
            .expect("edge to redirect exists");
        e.dst = new_dst;
        self.normalize();
    }

    fn add_node(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    fn add_edge(&mut self, src: NodeId, label: EdgeLabel, dst: NodeId) {
        self.edges.push(Edge { src, label, dst });
        self.normalize();
    }

    fn normalize(&mut self) {
        self.edges.sort_unstable();
        self.edges.dedup();
    }

    /// Creates the per-proposer value nodes, the shared default value, and
    /// the default attribute values; mirrors the `initValues` rule with its
    /// universally quantified proposer and acceptor sub-patterns.
    pub fn apply_init_values(&self) -> Result<Self, RuleError> {
        if self.is_initialized() {
            return Err(RuleError::AlreadyInitialized);
        }
        let mut g = self.clone();
        let counters = g.counters_id();
        if let Node::Counters { next_rnd, .. } = &mut g.nodes[counters] {
            *next_rnd = Some(0);
        }
        for id in 0..g.nodes.len() {
            match g.nodes[id] {
                Node::Proposer { .. } => {
                    g.nodes[id] = Node::Proposer {
                        crnd: Some(RoundId::UNSET),
                        is_prepared: false,
                    };
                    let v = g.add_node(Node::Value { default: false });
                    g.add_edge(id, EdgeLabel::Myval, v);
                }
                Node::Acceptor { .. } => {
                    g.nodes[id] = Node::Acceptor {
                        rnd: Some(RoundId::UNSET),
                        prnd: Some(RoundId::UNSET),
                    };
                }
                _ => {}
            }
        }
        let default = g.add_node(Node::Value { default: true });
        for id in 0..g.nodes.len() {
            if matches!(g.nodes[id], Node::Acceptor { .. }) {
                g.add_edge(id, EdgeLabel::Aval, default);
            }
        }
        Ok(g)
    }

    fn promise_count(&self, rnd: RoundId) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Promise { rnd: r, .. } if *r == rnd))
            .count()
    }

    /// All rule applications enabled under the control program's scheduling,
    /// in deterministic order (rule id, then bound nodes). Safety rules are
    /// not matched here; see [`GraphState::check_safety`].
    pub fn enabled_matches(&self) -> Vec<RuleMatch> {
        let maj = self.maj() as usize;
        let mut out = Vec::new();
        for (id, node) in self.nodes.iter().enumerate() {
            if let Node::Proposer {
                crnd: Some(crnd),
                is_prepared,
            } = node
            {
                if crnd.is_unset() {
                    out.push(RuleMatch::Propose { proposer: id });
                } else if *is_prepared && self.promise_count(*crnd) >= maj {
                    out.push(RuleMatch::Quorum { proposer: id });
                }
            }
        }
        for (aid, node) in self.nodes.iter().enumerate() {
            if let Node::Acceptor {
                rnd: Some(arnd), ..
            } = node
            {
                for (mid, msg) in self.nodes.iter().enumerate() {
                    match msg {
                        Node::Prepare { rnd } if *rnd > *arnd => {
                            out.push(RuleMatch::Prepare {
                                acceptor: aid,
                                prepare: mid,
                            });
                        }
                        Node::Accept { rnd }
                            if *rnd >= *arnd && !self.has_learn_from(aid, *rnd) =>
                        {
                            out.push(RuleMatch::Accept {
                                acceptor: aid,
                                accept: mid,
                            });
                        }
                        _ => {}
                    }
                }
            }
        }
        // Learn votes grouped by (rnd, value); a group reaching maj enables
        // onLearn for that pair.
        let mut votes: BTreeMap<(RoundId, NodeId), usize> = BTreeMap::new();
        for (id, node) in self.nodes.iter().enumerate() {
            if let Node::Learn { rnd } = node {
                let value = self
                    .edge_target(id, EdgeLabel::Lval)
                    .expect("Learn node has an lval edge");
                *votes.entry((*rnd, value)).or_insert(0) += 1;
            }
        }
        for ((rnd, value), count) in votes {
            if count >= maj {
                out.push(RuleMatch::Learn { rnd, value });
            }
        }
        out.sort_unstable();
        out
    }

    fn has_learn_from(&self, acceptor: NodeId, rnd: RoundId) -> bool {
        self.nodes.iter().enumerate().any(|(id, n)| {
            matches!(n, Node::Learn { rnd: r } if *r == rnd)
                && self.edge_target(id, EdgeLabel::Sender) == Some(acceptor)
        })
    }

    pub fn apply(&self, m: &RuleMatch) -> Result<Self, RuleError> {
        match *m {
            RuleMatch::Propose { proposer } => self.apply_on_propose(proposer),
            RuleMatch::Quorum { proposer } => self.apply_proposer_quorum(proposer),
            RuleMatch::Prepare { acceptor, prepare } => self.apply_on_prepare(acceptor, prepare),
            RuleMatch::Accept { acceptor, accept } => self.apply_on_accept(acceptor, accept),
            RuleMatch::Learn { rnd, value } => self.apply_on_learn(rnd, value),
        }
    }

    /// `onPropose`: dispense a fresh round from the counter, set the
    /// isPrepared flag and create one Prepare broadcast node.
    pub fn apply_on_propose(&self, proposer: NodeId) -> Result<Self, RuleError> {
        match self.nodes.get(proposer) {
            Some(Node::Proposer { crnd: Some(c), .. }) => {
                if !c.is_unset() {
                    return Err(RuleError::NotEnabled(RuleId::OnPropose));
                }
            }
            Some(Node::Proposer { crnd: None, .. }) => return Err(RuleError::NotInitialized),
            _ => return Err(RuleError::BadMatch(proposer)),
        }
        let rnd = self.next_rnd().ok_or(RuleError::NotInitialized)?;
        let mut g = self.clone();
        g.nodes[proposer] = Node::Proposer {
            crnd: Some(RoundId(rnd)),
            is_prepared: true,
        };
        let counters = g.counters_id();
        if let Node::Counters { next_rnd, .. } = &mut g.nodes[counters] {
            *next_rnd = Some(rnd + 1);
        }
        let prep = g.add_node(Node::Prepare { rnd: RoundId(rnd) });
        g.add_edge(prep, EdgeLabel::Sender, proposer);
        Ok(g)
    }

    /// The atomic `onPromise; try { changeMyval }; sendAccept` sequence:
    /// consume the isPrepared flag once the proposer's round has a promise
    /// quorum, adopt the highest non-default promised value if there is one,
    /// and broadcast one Accept node.
    pub fn apply_proposer_quorum(&self, proposer: NodeId) -> Result<Self, RuleError> {
        let crnd = match self.nodes.get(proposer) {
            Some(Node::Proposer {
                crnd: Some(c),
                is_prepared: true,
            }) if !c.is_unset() => *c,
            Some(Node::Proposer { .. }) => return Err(RuleError::NotEnabled(RuleId::OnPromise)),
            _ => return Err(RuleError::BadMatch(proposer)),
        };
        let promises: Vec<NodeId> = self
            .nodes
            .iter()
            .enumerate()
            .filter_map(|(id, n)| match n {
                Node::Promise { rnd, .. } if *rnd == crnd => Some(id),
                _ => None,
            })
            .collect();
        if promises.len() < self.maj() as usize {
            return Err(RuleError::NotEnabled(RuleId::OnPromise));
        }
        let mut g = self.clone();
        g.nodes[proposer] = Node::Proposer {
            crnd: Some(crnd),
            is_prepared: false,
        };
        // changeMyval: promise with the highest prnd wins, blocked if its
        // pval is the default value.
        let max_prnd = promises
            .iter()
            .map(|&id| match g.nodes[id] {
                Node::Promise { prnd, .. } => prnd,
                _ => unreachable!(),
            })
            .max()
            .expect("at least maj >= 1 promises");
        if !max_prnd.is_unset() {
            let winners: Vec<NodeId> = promises
                .iter()
                .copied()
                .filter(|&id| matches!(g.nodes[id], Node::Promise { prnd, .. } if prnd == max_prnd))
                .map(|id| {
                    self.edge_target(id, EdgeLabel::Pval)
                        .expect("Promise node has a pval edge")
                })
                .collect();
            // A round has a single Accept value, so all max-prnd promises
            // must promise the same value.
            assert!(
                winners.windows(2).all(|w| w[0] == w[1]),
                "max-prnd promises disagree on the value"
            );
            let value = winners[0];
            if !matches!(g.nodes[value], Node::Value { default: true }) {
                g.redirect_edge(proposer, EdgeLabel::Myval, value);
            }
        }
        // sendAccept
        let myval = g
            .edge_target(proposer, EdgeLabel::Myval)
            .expect("proposer has a myval edge");
        let accept = g.add_node(Node::Accept { rnd: crnd });
        g.add_edge(accept, EdgeLabel::Val, myval);
        g.add_edge(accept, EdgeLabel::Sender, proposer);
        Ok(g)
    }

    /// `onPrepare`: respond to a fresh Prepare with a Promise carrying the
    /// acceptor's last accepted round and value.
    pub fn apply_on_prepare(&self, acceptor: NodeId, prepare: NodeId) -> Result<Self, RuleError> {
        let (arnd, aprnd) = match self.nodes.get(acceptor) {
            Some(Node::Acceptor {
                rnd: Some(r),
                prnd: Some(p),
            }) => (*r, *p),
            Some(Node::Acceptor { .. }) => return Err(RuleError::NotInitialized),
            _ => return Err(RuleError::BadMatch(acceptor)),
        };
        let prnd = match self.nodes.get(prepare) {
            Some(Node::Prepare { rnd }) => *rnd,
            _ => return Err(RuleError::BadMatch(prepare)),
        };
        if prnd <= arnd {
            return Err(RuleError::NotEnabled(RuleId::OnPrepare));
        }
        let aval = self
            .edge_target(acceptor, EdgeLabel::Aval)
            .expect("acceptor has an aval edge");
        let mut g = self.clone();
        g.nodes[acceptor] = Node::Acceptor {
            rnd: Some(prnd),
            prnd: Some(aprnd),
        };
        let promise = g.add_node(Node::Promise {
            rnd: prnd,
            prnd: aprnd,
        });
        g.add_edge(promise, EdgeLabel::Pval, aval);
        g.add_edge(promise, EdgeLabel::Sender, acceptor);
        Ok(g)
    }

    /// `onAccept`: accept a non-stale Accept, record the accepted pair and
    /// forward it to the learner as a Learn node. The negative condition
    /// (an existing Learn from this acceptor for this round) keeps the rule
    /// applicable at most once per acceptor and Accept.
    pub fn apply_on_accept(&self, acceptor: NodeId, accept: NodeId) -> Result<Self, RuleError> {
        let arnd = match self.nodes.get(acceptor) {
            Some(Node::Acceptor { rnd: Some(r), .. }) => *r,
            Some(Node::Acceptor { .. }) => return Err(RuleError::NotInitialized),
            _ => return Err(RuleError::BadMatch(acceptor)),
        };
        let accrnd = match self.nodes.get(accept) {
            Some(Node::Accept { rnd }) => *rnd,
            _ => return Err(RuleError::BadMatch(accept)),
        };
        if accrnd < arnd || self.has_learn_from(acceptor, accrnd) {
            return Err(RuleError::NotEnabled(RuleId::OnAccept));
        }
        let value = self
            .edge_target(accept, EdgeLabel::Val)
            .expect("Accept node has a val edge");
        let mut g = self.clone();
        g.nodes[acceptor] = Node::Acceptor {
            rnd: Some(accrnd),
            prnd: Some(accrnd),
        };
        g.redirect_edge(acceptor, EdgeLabel::Aval, value);
        let learn = g.add_node(Node::Learn { rnd: accrnd });
        g.add_edge(learn, EdgeLabel::Lval, value);
        g.add_edge(learn, EdgeLabel::Sender, acceptor);
        Ok(g)
    }

    /// `onLearn`: choose a value once maj Learn nodes agree on its round and
    /// value. Convergent: re-application leaves the graph unchanged.
    pub fn apply_on_learn(&self, rnd: RoundId, value: NodeId) -> Result<Self, RuleError> {
        if !matches!(self.nodes.get(value), Some(Node::Value { .. })) {
            return Err(RuleError::BadMatch(value));
        }
        let count = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(id, n)| {
                matches!(n, Node::Learn { rnd: r } if *r == rnd)
                    && self.edge_target(*id, EdgeLabel::Lval) == Some(value)
            })
            .count();
        if count < self.maj() as usize {
            return Err(RuleError::NotEnabled(RuleId::OnLearn));
        }
        let learner = self.learner_id();
        let already = self
            .edges
            .iter()
            .any(|e| e.src == learner && e.label == EdgeLabel::Chosen && e.dst == value);
        if already {
            return Ok(self.clone());
        }
        let mut g = self.clone();
        g.add_edge(learner, EdgeLabel::Chosen, value);
        Ok(g)
    }

    /// The negated safety property: a learner with two distinct chosen
    /// values, or a chosen value that no proposer ever proposed (neither as
    /// a current myval nor as the payload of any Accept it sent).
    /// MultipleChosen takes precedence when both hold.
    pub fn check_safety(&self) -> Verdict {
        let learner = self.learner_id();
        let chosen: Vec<NodeId> = self
            .edges
            .iter()
            .filter(|e| e.src == learner && e.label == EdgeLabel::Chosen)
            .map(|e| e.dst)
            .collect();
        if chosen.len() >= 2 {
            return Verdict::Unsafe(Violation::MultipleChosen);
        }
        for &value in &chosen {
            let proposed = self.edges.iter().any(|e| {
                (e.label == EdgeLabel::Myval
                    && e.dst == value
                    && matches!(self.nodes[e.src], Node::Proposer { .. }))
                    || (e.label == EdgeLabel::Val
                        && e.dst == value
                        && matches!(self.nodes[e.src], Node::Accept { .. }))
            });
            if !proposed {
                return Verdict::Unsafe(Violation::NotProposed);
            }
        }
        Verdict::Safe
    }

    /// Exact (symmetry-blind) visited-set key. Node order is normalized by
    /// a stable sort on attributes so that diamond interleavings creating
    /// the same nodes in different orders collapse, but attribute-identical
    /// nodes keep their relative creation order: permuting interchangeable
    /// anonymous nodes still yields distinct keys, which is what keying
    /// without isomorphism reduction means.
    pub fn exact_fingerprint(&self) -> Vec<u8> {
        let attrs: Vec<Vec<u8>> = self.nodes.iter().map(|n| n.attr_bytes()).collect();
        let mut order: Vec<NodeId> = (0..self.nodes.len()).collect();
        order.sort_by(|&a, &b| attrs[a].cmp(&attrs[b]));
        let mut pos = vec![0u32; self.nodes.len()];
        for (p, &v) in order.iter().enumerate() {
            pos[v] = p as u32;
        }
        let mut out = Vec::new();
        out.extend_from_slice(&(self.nodes.len() as u32).to_le_bytes());
        for &v in &order {
            out.extend_from_slice(&attrs[v]);
        }
        let mut edges: Vec<(u32, u8, u32)> = self
            .edges
            .iter()
            .map(|e| (pos[e.src], e.label as u8, pos[e.dst]))
            .collect();
        edges.sort_unstable();
        for (src, label, dst) in edges {
            out.extend_from_slice(&src.to_le_bytes());
            out.push(label);
            out.extend_from_slice(&dst.to_le_bytes());
        }
        out
    }

    /// The image of this graph under a node permutation: node `i` of the
    /// result is node `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[NodeId]) -> Self {
        assert_eq!(perm.len(), self.nodes.len());
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let nodes = perm.iter().map(|&old| self.nodes[old].clone()).collect();
        let mut g = GraphState {
            nodes,
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    src: inverse[e.src],
                    label: e.label,
                    dst: inverse[e.dst],
                })
                .collect(),
        };
        g.normalize();
        g
    }

    #[cfg(test)]
    pub(crate) fn nodes_mut_for_tests(&mut self) -> &mut Vec<Node> {
        &mut self.nodes
    }

    /// Builds a graph directly from a node list and edge list.
    pub fn from_parts(nodes: Vec<Node>, edges: Vec<Edge>) -> Self {
        let mut g = GraphState { nodes, edges };
        g.normalize();
        g
    }

    /// Test/construction hooks; not used by the rules themselves.
    pub fn with_node(mut self, node: Node) -> Self {
        self.nodes.push(node);
        self
    }

    pub fn with_edge(mut self, src: NodeId, label: EdgeLabel, dst: NodeId) -> Self {
        self.edges.push(Edge { src, label, dst });
        self.normalize();
        self
    }
}
