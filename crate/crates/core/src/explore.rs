//! Encoding-agnostic state-space exploration: BFS over the full space or
//! DFS halting at the first safety violation, with pluggable visited-set
//! keys, on-the-fly safety checking, trace reconstruction and statistics.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::graph::{canon, GraphState};
use crate::protocol::{ProtocolConfig, Verdict, Violation};
use crate::vector::VectorState;

/// A state encoding explorable by the driver. Successor, key and safety
/// functions are pure, so parallel drivers may call them reentrantly.
pub trait Model: Sync {
    type State: Clone + Send + Sync;

    fn initial_state(&self) -> Self::State;
    /// Enabled transitions in deterministic (label-sorted) order.
    fn successors(&self, state: &Self::State) -> Vec<(String, Self::State)>;
    fn check(&self, state: &Self::State) -> Verdict;
    /// Visited-set key; certificate or exact fingerprint depending on the
    /// model.
    fn key(&self, state: &Self::State) -> Vec<u8>;
    fn dump(&self, state: &Self::State) -> String;

    /// Per-state invariant audit; only invoked in auditing mode.
    fn audit(&self, _state: &Self::State) -> Result<(), String> {
        Ok(())
    }
    /// Per-transition invariant audit; only invoked in auditing mode.
    fn audit_step(&self, _pre: &Self::State, _post: &Self::State) -> Result<(), String> {
        Ok(())
    }
}

/// How graph states are keyed in the visited set.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Keying {
    /// Canonical certificate: isomorphic states collapse.
    Certificate,
    /// Exact serialization: no symmetry reduction. Exists to measure what
    /// the certificate keying saves.
    Fingerprint,
}

/// The graph encoding; exploration starts from the initialized graph.
pub struct GraphModel {
    pub cfg: ProtocolConfig,
    pub keying: Keying,
}

impl GraphModel {
    pub fn new(cfg: ProtocolConfig) -> Self {
        GraphModel {
            cfg,
            keying: Keying::Certificate,
        }
    }

    pub fn with_keying(cfg: ProtocolConfig, keying: Keying) -> Self {
        GraphModel { cfg, keying }
    }
}

impl Model for GraphModel {
    type State = GraphState;

    fn initial_state(&self) -> GraphState {
        GraphState::initial(&self.cfg)
            .apply_init_values()
            .expect("fresh graph initializes")
    }

    fn successors(&self, state: &GraphState) -> Vec<(String, GraphState)> {
        state
            .enabled_matches()
            .iter()
            .map(|m| {
                let next = state.apply(m).expect("enabled match applies");
                (m.to_string(), next)
            })
            .collect()
    }

    fn check(&self, state: &GraphState) -> Verdict {
        state.check_safety()
    }

    fn key(&self, state: &GraphState) -> Vec<u8> {
        match self.keying {
            Keying::Certificate => canon::certificate(state).0,
            Keying::Fingerprint => state.exact_fingerprint(),
        }
    }

    fn dump(&self, state: &GraphState) -> String {
        crate::graph::dot::to_dot(state)
    }

    fn audit(&self, state: &GraphState) -> Result<(), String> {
        audit_graph(state)
    }

    fn audit_step(&self, pre: &GraphState, post: &GraphState) -> Result<(), String> {
        audit_graph_step(pre, post)
    }
}

/// The vector encoding; keyed by exact fingerprints, as in a conventional
/// vector-based checker.
pub struct VectorModel {
    pub cfg: ProtocolConfig,
}

impl VectorModel {
    pub fn new(cfg: ProtocolConfig) -> Self {
        VectorModel { cfg }
    }
}

impl Model for VectorModel {
    type State = VectorState;

    fn initial_state(&self) -> VectorState {
        VectorState::initial(&self.cfg)
    }

    fn successors(&self, state: &VectorState) -> Vec<(String, VectorState)> {
        state
            .successors(&self.cfg)
            .into_iter()
            .map(|(label, s)| (label.to_string(), s))
            .collect()
    }

    fn check(&self, state: &VectorState) -> Verdict {
        state.check_safety()
    }

    fn key(&self, state: &VectorState) -> Vec<u8> {
        state.fingerprint()
    }

    fn dump(&self, state: &VectorState) -> String {
        state.dump()
    }

    fn audit(&self, state: &VectorState) -> Result<(), String> {
        state.audit(&self.cfg)
    }

    fn audit_step(&self, pre: &VectorState, post: &VectorState) -> Result<(), String> {
        pre.audit_step(post)
    }
}

fn audit_graph(g: &GraphState) -> Result<(), String> {
    use crate::graph::{EdgeLabel, Node};
    let next_rnd = match g
        .nodes()
        .iter()
        .find(|n| matches!(n, Node::Counters { .. }))
    {
        Some(Node::Counters { next_rnd, .. }) => next_rnd.unwrap_or(0),
        _ => return Err("missing Counters node".into()),
    };
    let mut prepare_rounds = Vec::new();
    let mut prepare_senders = Vec::new();
    for (id, node) in g.nodes().iter().enumerate() {
        match node {
            Node::Prepare { rnd } => {
                if rnd.0 >= next_rnd {
                    return Err(format!("Prepare round {} >= nextRnd {next_rnd}", rnd.0));
                }
                prepare_rounds.push(rnd.0);
                let sender = g
                    .edge_target(id, EdgeLabel::Sender)
                    .ok_or("Prepare without sender")?;
                prepare_senders.push(sender);
            }
            Node::Proposer {
                crnd, is_prepared, ..
            } if *is_prepared && crnd.is_none_or(|c| c.is_unset()) => {
                return Err("isPrepared proposer without a round".into());
            }
            _ => {}
        }
    }
    prepare_rounds.sort_unstable();
    if prepare_rounds.windows(2).any(|w| w[0] == w[1]) {
        return Err("duplicate Prepare rounds".into());
    }
    prepare_senders.sort_unstable();
    if prepare_senders.windows(2).any(|w| w[0] == w[1]) {
        return Err("proposer sent more than one Prepare".into());
    }
    Ok(())
}

fn audit_graph_step(pre: &GraphState, post: &GraphState) -> Result<(), String> {
    use crate::graph::Node;
    // rules only append nodes, so indices of surviving nodes are stable
    for (id, (a, b)) in pre.nodes().iter().zip(post.nodes()).enumerate() {
        if let (Node::Acceptor { rnd: Some(ra), .. }, Node::Acceptor { rnd: Some(rb), .. }) = (a, b)
        {
            if rb < ra {
                return Err(format!("acceptor node {id} rnd decreased"));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Strategy {
    FullBfs,
    DfsHaltOnViolation,
}

#[derive(Clone, Copy, Debug)]
pub struct ExplorationConfig {
    pub strategy: Strategy,
    pub max_states: Option<usize>,
    pub max_depth: Option<usize>,
    /// Check model invariants on every state and transition.
    pub audit: bool,
    /// Worker threads for BFS successor expansion; 1 = sequential.
    pub workers: usize,
}

impl Default for ExplorationConfig {
    fn default() -> Self {
        ExplorationConfig {
            strategy: Strategy::FullBfs,
            max_states: None,
            max_depth: None,
            audit: false,
            workers: 1,
        }
    }
}

impl ExplorationConfig {
    pub fn bfs() -> Self {
        Self::default()
    }

    pub fn dfs() -> Self {
        ExplorationConfig {
            strategy: Strategy::DfsHaltOnViolation,
            ..Self::default()
        }
    }
}

/// Final verdict of an exploration. `Inconclusive` means a resource bound
/// truncated the search before any violation was found; it is never
/// reported as plain safe.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportVerdict {
    Safe,
    Unsafe,
    Inconclusive,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct TraceStep {
    pub label: String,
    pub state: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExplorationReport {
    pub verdict: ReportVerdict,
    pub violation: Option<Violation>,
    pub states_stored: usize,
    pub transitions: usize,
    pub max_depth_reached: usize,
    pub trace: Option<Vec<TraceStep>>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl ExplorationReport {
    /// Stable JSON rendering; deliberately excludes wall time so repeated
    /// runs of the same invocation serialize byte-identically.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Error, Debug)]
pub enum ExploreError {
    #[error("invariant audit failed: {reason}\nstate:\n{state}")]
    AuditFailed { reason: String, state: String },
    #[error("encodings disagree: graph reported {graph:?}, vector reported {vector:?}")]
    VerdictMismatch {
        graph: ReportVerdict,
        vector: ReportVerdict,
    },
}

struct Search<'a, M: Model> {
    model: &'a M,
    ecfg: &'a ExplorationConfig,
    states: Vec<M::State>,
    visited: HashMap<Vec<u8>, usize>,
    parent: Vec<Option<(usize, String)>>,
    depth: Vec<usize>,
    transitions: usize,
    truncated: bool,
    violation: Option<(usize, Violation)>,
}

impl<'a, M: Model> Search<'a, M> {
    fn new(model: &'a M, ecfg: &'a ExplorationConfig) -> Result<Self, ExploreError> {
        let initial = model.initial_state();
        let key = model.key(&initial);
        let mut search = Search {
            model,
            ecfg,
            states: Vec::new(),
            visited: HashMap::new(),
            parent: Vec::new(),
            depth: Vec::new(),
            transitions: 0,
            truncated: false,
            violation: None,
        };
        search.store(initial, key, None, 0)?;
        Ok(search)
    }

    fn store(
        &mut self,
        state: M::State,
        key: Vec<u8>,
        parent: Option<(usize, String)>,
        depth: usize,
    ) -> Result<usize, ExploreError> {
        if self.ecfg.audit {
            if let Err(reason) = self.model.audit(&state) {
                return Err(ExploreError::AuditFailed {
                    reason,
                    state: self.model.dump(&state),
                });
            }
            if let Some((pidx, _)) = &parent {
                if let Err(reason) = self.model.audit_step(&self.states[*pidx], &state) {
                    return Err(ExploreError::AuditFailed {
                        reason,
                        state: self.model.dump(&state),
                    });
                }
            }
        }
        let idx = self.states.len();
        if self.violation.is_none() {
            if let Verdict::Unsafe(v) = self.model.check(&state) {
                self.violation = Some((idx, v));
            }
        }
        self.states.push(state);
        self.visited.insert(key, idx);
        self.parent.push(parent);
        self.depth.push(depth);
        Ok(idx)
    }

    fn over_state_bound(&self) -> bool {
        self.ecfg
            .max_states
            .is_some_and(|max| self.states.len() >= max)
    }

    fn bfs(&mut self) -> Result<(), ExploreError> {
        let mut layer = vec![0usize];
        let mut depth = 0usize;
        while !layer.is_empty() {
            let expanded: Vec<Vec<Expansion<M::State>>> = if self.ecfg.workers > 1 {
                expand_parallel(self.model, &self.states, &layer, self.ecfg.workers)
            } else {
                layer
                    .iter()
                    .map(|&idx| expand_one(self.model, &self.states[idx]))
                    .collect()
            };
            depth += 1;
            let mut next = Vec::new();
            for (&src, succs) in layer.iter().zip(expanded) {
                self.transitions += succs.len();
                for (label, state, key) in succs {
                    if self.visited.contains_key(&key) {
                        continue;
                    }
                    if self.over_state_bound() || self.ecfg.max_depth.is_some_and(|max| depth > max)
                    {
                        self.truncated = true;
                        continue;
                    }
                    let idx = self.store(state, key, Some((src, label)), depth)?;
                    next.push(idx);
                }
            }
            layer = next;
        }
        Ok(())
    }

    fn dfs(&mut self) -> Result<(), ExploreError> {
        if self.violation.is_some() {
            return Ok(());
        }
        let mut stack = vec![0usize];
        while let Some(idx) = stack.pop() {
            let succs = expand_one(self.model, &self.states[idx]);
            self.transitions += succs.len();
            let depth = self.depth[idx] + 1;
            let mut pushed = Vec::new();
            for (label, state, key) in succs {
                if self.visited.contains_key(&key) {
                    continue;
                }
                if self.over_state_bound() || self.ecfg.max_depth.is_some_and(|max| depth > max) {
                    self.truncated = true;
                    continue;
                }
                let new = self.store(state, key, Some((idx, label)), depth)?;
                if self.violation.is_some() {
                    return Ok(());
                }
                pushed.push(new);
            }
            // reversed so the first successor is explored first
            stack.extend(pushed.into_iter().rev());
        }
        Ok(())
    }

    fn trace_to(&self, idx: usize) -> Vec<TraceStep> {
        let mut steps = Vec::new();
        let mut cur = idx;
        loop {
            match &self.parent[cur] {
                Some((p, label)) => {
                    steps.push(TraceStep {
                        label: label.clone(),
                        state: self.model.dump(&self.states[cur]),
                    });
                    cur = *p;
                }
                None => {
                    steps.push(TraceStep {
                        label: "init".to_string(),
                        state: self.model.dump(&self.states[cur]),
                    });
                    break;
                }
            }
        }
        steps.reverse();
        steps
    }

    fn into_report(self, wall_time: Duration) -> ExplorationReport {
        let (verdict, violation, trace) = match self.violation {
            Some((idx, v)) => (ReportVerdict::Unsafe, Some(v), Some(self.trace_to(idx))),
            None if self.truncated => (ReportVerdict::Inconclusive, None, None),
            None => (ReportVerdict::Safe, None, None),
        };
        ExplorationReport {
            verdict,
            violation,
            states_stored: self.states.len(),
            transitions: self.transitions,
            max_depth_reached: self.depth.iter().copied().max().unwrap_or(0),
            trace,
            wall_time,
        }
    }
}

/// One expanded successor: transition label, state, visited-set key.
type Expansion<S> = (String, S, Vec<u8>);

fn expand_one<M: Model>(model: &M, state: &M::State) -> Vec<Expansion<M::State>> {
    model
        .successors(state)
        .into_iter()
        .map(|(label, s)| {
            let key = model.key(&s);
            (label, s, key)
        })
        .collect()
}

fn expand_parallel<M: Model>(
    model: &M,
    states: &[M::State],
    layer: &[usize],
    workers: usize,
) -> Vec<Vec<Expansion<M::State>>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("worker pool");
    pool.install(|| {
        layer
            .par_iter()
            .map(|&idx| expand_one(model, &states[idx]))
            .collect()
    })
}

/// Explores the state space of `model` under `ecfg`.
pub fn explore<M: Model>(
    model: &M,
    ecfg: &ExplorationConfig,
) -> Result<ExplorationReport, ExploreError> {
    let start = Instant::now();
    let mut search = Search::new(model, ecfg)?;
    match ecfg.strategy {
        Strategy::FullBfs => search.bfs()?,
        Strategy::DfsHaltOnViolation => search.dfs()?,
    }
    Ok(search.into_report(start.elapsed()))
}

/// Replays a reported trace through the model's successor function:
/// the first step must be the initial state, every following step must be
/// a successor under its label with the recorded dump, and the final state
/// must fail the safety check.
pub fn verify_trace<M: Model>(model: &M, trace: &[TraceStep]) -> Result<(), String> {
    let Some((first, rest)) = trace.split_first() else {
        return Err("empty trace".into());
    };
    if first.label != "init" {
        return Err(format!("trace starts with {:?}, not init", first.label));
    }
    let mut current = model.initial_state();
    if model.dump(&current) != first.state {
        return Err("trace does not start at the initial state".into());
    }
    for (i, step) in rest.iter().enumerate() {
        let succ = model
            .successors(&current)
            .into_iter()
            .find(|(label, s)| *label == step.label && model.dump(s) == step.state);
        match succ {
            Some((_, s)) => current = s,
            None => {
                return Err(format!(
                    "step {}: no successor matches {}",
                    i + 1,
                    step.label
                ))
            }
        }
    }
    match model.check(&current) {
        Verdict::Unsafe(_) => Ok(()),
        Verdict::Safe => Err("final trace state is safe".into()),
    }
}

/// Result of exploring a configuration under both encodings.
#[derive(Debug, Serialize)]
pub struct Comparison {
    pub graph: ExplorationReport,
    pub vector: ExplorationReport,
    /// vector states / graph states: what symmetry reduction saved.
    pub state_ratio: f64,
}

impl Comparison {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("comparison serializes")
    }

    pub fn inconclusive(&self) -> bool {
        self.graph.verdict == ReportVerdict::Inconclusive
            || self.vector.verdict == ReportVerdict::Inconclusive
    }
}

/// Runs full BFS under both encodings and compares. A verdict mismatch is
/// a hard error: it indicates a model bug, never a legitimate outcome.
pub fn compare_encodings(
    cfg: &ProtocolConfig,
    ecfg: &ExplorationConfig,
) -> Result<Comparison, ExploreError> {
    let ecfg = ExplorationConfig {
        strategy: Strategy::FullBfs,
        ..*ecfg
    };
    let graph = explore(&GraphModel::new(*cfg), &ecfg)?;
    let vector = explore(&VectorModel::new(*cfg), &ecfg)?;
    let conclusive = graph.verdict != ReportVerdict::Inconclusive
        && vector.verdict != ReportVerdict::Inconclusive;
    if conclusive && (graph.verdict != vector.verdict || graph.violation != vector.violation) {
        return Err(ExploreError::VerdictMismatch {
            graph: graph.verdict,
            vector: vector.verdict,
        });
    }
    let state_ratio = vector.states_stored as f64 / graph.states_stored as f64;
    Ok(Comparison {
        graph,
        vector,
        state_ratio,
    })
}

/// A fully explored labeled transition system, for DOT export.
pub struct Lts<S> {
    pub states: Vec<S>,
    pub keys: Vec<Vec<u8>>,
    /// (source index, label, target index) in discovery order.
    pub edges: Vec<(usize, String, usize)>,
}

/// BFS enumeration of the whole LTS (states in discovery order).
pub fn build_lts<M: Model>(
    model: &M,
    max_states: Option<usize>,
) -> Result<Lts<M::State>, ExploreError> {
    let mut states = Vec::new();
    let mut keys = Vec::new();
    let mut edges = Vec::new();
    let mut visited: HashMap<Vec<u8>, usize> = HashMap::new();
    let initial = model.initial_state();
    let key = model.key(&initial);
    visited.insert(key.clone(), 0);
    states.push(initial);
    keys.push(key);
    let mut next = 0usize;
    while next < states.len() {
        for (label, state) in model.successors(&states[next]) {
            let key = model.key(&state);
            let dst = match visited.get(&key) {
                Some(&idx) => idx,
                None => {
                    if max_states.is_some_and(|max| states.len() >= max) {
                        continue;
                    }
                    let idx = states.len();
                    visited.insert(key.clone(), idx);
                    states.push(state);
                    keys.push(key);
                    idx
                }
            };
            edges.push((next, label, dst));
        }
        next += 1;
    }
    Ok(Lts {
        states,
        keys,
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: u32, a: u32, m: u32) -> ProtocolConfig {
        ProtocolConfig::new(p, a, m).unwrap()
    }

    #[test]
    fn safe_instance_both_encodings() {
        let c = cfg(2, 3, 2);
        let g = explore(&GraphModel::new(c), &ExplorationConfig::bfs()).unwrap();
        assert_eq!(g.verdict, ReportVerdict::Safe);
        let v = explore(&VectorModel::new(c), &ExplorationConfig::bfs()).unwrap();
        assert_eq!(v.verdict, ReportVerdict::Safe);
    }

    #[test]
    fn minimal_instance_is_safe_and_deterministic() {
        let c = cfg(1, 1, 1);
        let a = explore(&GraphModel::new(c), &ExplorationConfig::bfs()).unwrap();
        let b = explore(&GraphModel::new(c), &ExplorationConfig::bfs()).unwrap();
        assert_eq!(a.verdict, ReportVerdict::Safe);
        assert_eq!(a.states_stored, b.states_stored);
        assert_eq!(a.transitions, b.transitions);
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn unsafe_instance_dfs_finds_trace() {
        let c = cfg(3, 4, 2);
        let model = GraphModel::new(c);
        let report = explore(&model, &ExplorationConfig::dfs()).unwrap();
        assert_eq!(report.verdict, ReportVerdict::Unsafe);
        assert_eq!(report.violation, Some(Violation::MultipleChosen));
        let trace = report.trace.as_ref().unwrap();
        verify_trace(&model, trace).unwrap();
    }

    #[test]
    fn certificate_keying_never_increases_state_count() {
        let c = cfg(2, 3, 2);
        let with_cert = explore(
            &GraphModel::with_keying(c, Keying::Certificate),
            &ExplorationConfig::bfs(),
        )
        .unwrap();
        let with_fp = explore(
            &GraphModel::with_keying(c, Keying::Fingerprint),
            &ExplorationConfig::bfs(),
        )
        .unwrap();
        assert!(with_cert.states_stored <= with_fp.states_stored);
    }

    #[test]
    fn bounds_yield_inconclusive_not_safe() {
        let c = cfg(2, 3, 2);
        let report = explore(
            &GraphModel::new(c),
            &ExplorationConfig {
                max_states: Some(5),
                ..ExplorationConfig::bfs()
            },
        )
        .unwrap();
        assert_eq!(report.verdict, ReportVerdict::Inconclusive);
        assert_eq!(report.states_stored, 5);

        let report = explore(
            &GraphModel::new(c),
            &ExplorationConfig {
                max_depth: Some(1),
                ..ExplorationConfig::bfs()
            },
        )
        .unwrap();
        assert_eq!(report.verdict, ReportVerdict::Inconclusive);
    }

    #[test]
    fn compare_reports_reduction() {
        let c = cfg(2, 3, 2);
        let cmp = compare_encodings(&c, &ExplorationConfig::bfs()).unwrap();
        assert_eq!(cmp.graph.verdict, ReportVerdict::Safe);
        assert_eq!(cmp.vector.verdict, ReportVerdict::Safe);
        assert!(cmp.state_ratio > 1.0, "ratio {}", cmp.state_ratio);
    }

    #[test]
    fn parallel_bfs_matches_sequential() {
        let c = cfg(2, 3, 2);
        let seq = explore(&GraphModel::new(c), &ExplorationConfig::bfs()).unwrap();
        let par = explore(
            &GraphModel::new(c),
            &ExplorationConfig {
                workers: 4,
                ..ExplorationConfig::bfs()
            },
        )
        .unwrap();
        assert_eq!(seq.states_stored, par.states_stored);
        assert_eq!(seq.transitions, par.transitions);
    }

    #[test]
    fn audit_mode_passes_on_safe_instance() {
        let c = cfg(2, 3, 2);
        let ecfg = ExplorationConfig {
            audit: true,
            ..ExplorationConfig::bfs()
        };
        explore(&GraphModel::new(c), &ecfg).unwrap();
        explore(&VectorModel::new(c), &ecfg).unwrap();
    }

    #[test]
    fn lts_edges_cover_all_transitions() {
        let c = cfg(1, 1, 1);
        let model = GraphModel::new(c);
        let lts = build_lts(&model, None).unwrap();
        let report = explore(&model, &ExplorationConfig::bfs()).unwrap();
        assert_eq!(lts.states.len(), report.states_stored);
        assert_eq!(lts.edges.len(), report.transitions);
    }
}
