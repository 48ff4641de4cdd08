//! Vector-based state encoding: fixed process local variables plus four
//! message multisets kept sorted (ordered send, unordered receive), with
//! the same atomic steps as the Promela model. No symmetry reduction:
//! visited-set keys are exact fingerprints of the state vector.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::protocol::{ProtocolConfig, RoundId, Verdict, Violation};

/// Value identifiers are small integers; `-1` is the default value.
pub const DEFAULT_VALUE: i32 = -1;

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Phase {
    BeforePrepare,
    AwaitingQuorum,
    Done,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Phase::BeforePrepare => "BeforePrepare",
            Phase::AwaitingQuorum => "AwaitingQuorum",
            Phase::Done => "Done",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct ProposerLocal {
    /// Fixed at init, distinct per proposer.
    pub crnd: RoundId,
    pub myval: i32,
    pub phase: Phase,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct AcceptorLocal {
    pub rnd: RoundId,
    /// Last accepted round, or unset.
    pub vrnd: RoundId,
    /// Last accepted value, or the default.
    pub vval: i32,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct LearnerLocal {
    /// Learn-vote counters per round, capped at maj.
    pub mcount: BTreeMap<i32, u32>,
    pub chosen: BTreeSet<i32>,
}

/// Channel message tuples. All channels are multisets stored as
/// lexicographically sorted vectors.
pub type PrepareMsg = (u32, i32); // (acceptor, rnd)
pub type PromiseMsg = (i32, i32, i32); // (rnd, prnd, pval)
pub type AcceptMsg = (u32, i32, i32); // (acceptor, rnd, val)
pub type LearnMsg = (i32, i32); // (rnd, lval)

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Channels {
    pub prepare: Vec<PrepareMsg>,
    pub promise: Vec<PromiseMsg>,
    pub accept: Vec<AcceptMsg>,
    pub learn: Vec<LearnMsg>,
}

fn insert_sorted<T: Ord + Copy>(channel: &mut Vec<T>, msg: T) {
    let at = channel.partition_point(|m| *m <= msg);
    channel.insert(at, msg);
}

fn remove_one<T: Ord + Copy>(channel: &mut Vec<T>, msg: T) {
    let at = channel.partition_point(|m| *m < msg);
    debug_assert!(channel.get(at) == Some(&msg));
    channel.remove(at);
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum TransitionLabel {
    ProposerPrepare { proposer: usize },
    ProposerQuorum { proposer: usize },
    AcceptorPrepare { acceptor: usize, rnd: i32 },
    AcceptorAccept { acceptor: usize, rnd: i32, val: i32 },
    LearnerLearn { rnd: i32, val: i32 },
}

impl fmt::Display for TransitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionLabel::ProposerPrepare { proposer } => {
                write!(f, "proposerPrepare[{proposer}]")
            }
            TransitionLabel::ProposerQuorum { proposer } => write!(f, "proposerQuorum[{proposer}]"),
            TransitionLabel::AcceptorPrepare { acceptor, rnd } => {
                write!(f, "acceptorPrepare[{acceptor},{rnd}]")
            }
            TransitionLabel::AcceptorAccept { acceptor, rnd, val } => {
                write!(f, "acceptorAccept[{acceptor},{rnd},{val}]")
            }
            TransitionLabel::LearnerLearn { rnd, val } => write!(f, "learnerLearn[{rnd},{val}]"),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct VectorState {
    pub proposers: Vec<ProposerLocal>,
    pub acceptors: Vec<AcceptorLocal>,
    pub learner: LearnerLocal,
    pub channels: Channels,
}

impl VectorState {
    /// Initial state: proposer `i` runs round `i` and proposes value `i`;
    /// acceptors hold the default pair; channels empty.
    pub fn initial(cfg: &ProtocolConfig) -> Self {
        VectorState {
            proposers: (0..cfg.num_proposers)
                .map(|i| ProposerLocal {
                    crnd: RoundId(i as i32),
                    myval: i as i32,
                    phase: Phase::BeforePrepare,
                })
                .collect(),
            acceptors: (0..cfg.num_acceptors)
                .map(|_| AcceptorLocal {
                    rnd: RoundId::UNSET,
                    vrnd: RoundId::UNSET,
                    vval: DEFAULT_VALUE,
                })
                .collect(),
            learner: LearnerLocal::default(),
            channels: Channels::default(),
        }
    }

    fn promise_count(&self, rnd: i32) -> usize {
        self.channels.promise.iter().filter(|m| m.0 == rnd).count()
    }

    /// Value a quorum-reaching proposer submits: the pval of the max-prnd
    /// promise for its round, or its own myval when all prnd are unset.
    fn quorum_value(&self, proposer: usize) -> i32 {
        let crnd = self.proposers[proposer].crnd.0;
        let best = self
            .channels
            .promise
            .iter()
            .filter(|m| m.0 == crnd)
            .max_by_key(|m| m.1)
            .expect("quorum requires at least one promise");
        if best.1 < 0 {
            self.proposers[proposer].myval
        } else {
            debug_assert!(
                self.channels
                    .promise
                    .iter()
                    .filter(|m| m.0 == crnd && m.1 == best.1)
                    .all(|m| m.2 == best.2),
                "max-prnd promises disagree on the value"
            );
            best.2
        }
    }

    /// All enabled atomic transitions, in label order. Receives are
    /// unordered: any matching tuple may be taken, and equal tuples in the
    /// sorted multiset collapse into a single transition.
    pub fn successors(&self, cfg: &ProtocolConfig) -> Vec<(TransitionLabel, VectorState)> {
        let maj = cfg.maj as usize;
        let mut out = Vec::new();
        for (i, p) in self.proposers.iter().enumerate() {
            if p.phase == Phase::BeforePrepare {
                let mut s = self.clone();
                for a in 0..self.acceptors.len() as u32 {
                    insert_sorted(&mut s.channels.prepare, (a, p.crnd.0));
                }
                s.proposers[i].phase = Phase::AwaitingQuorum;
                out.push((TransitionLabel::ProposerPrepare { proposer: i }, s));
            }
        }
        for (i, p) in self.proposers.iter().enumerate() {
            if p.phase == Phase::AwaitingQuorum && self.promise_count(p.crnd.0) >= maj {
                // quorum transition: count and broadcast atomically, with
                // no change to the promise buffer
                let val = self.quorum_value(i);
                let mut s = self.clone();
                for a in 0..self.acceptors.len() as u32 {
                    insert_sorted(&mut s.channels.accept, (a, p.crnd.0, val));
                }
                s.proposers[i].phase = Phase::Done;
                out.push((TransitionLabel::ProposerQuorum { proposer: i }, s));
            }
        }
        let mut seen: Vec<PrepareMsg> = Vec::new();
        for &(a, r) in &self.channels.prepare {
            if seen.contains(&(a, r)) {
                continue;
            }
            seen.push((a, r));
            let acc = &self.acceptors[a as usize];
            if r > acc.rnd.0 {
                let mut s = self.clone();
                remove_one(&mut s.channels.prepare, (a, r));
                s.acceptors[a as usize].rnd = RoundId(r);
                insert_sorted(&mut s.channels.promise, (r, acc.vrnd.0, acc.vval));
                out.push((
                    TransitionLabel::AcceptorPrepare {
                        acceptor: a as usize,
                        rnd: r,
                    },
                    s,
                ));
            }
        }
        let mut seen: Vec<AcceptMsg> = Vec::new();
        for &(a, r, v) in &self.channels.accept {
            if seen.contains(&(a, r, v)) {
                continue;
            }
            seen.push((a, r, v));
            if r >= self.acceptors[a as usize].rnd.0 {
                let mut s = self.clone();
                remove_one(&mut s.channels.accept, (a, r, v));
                let acc = &mut s.acceptors[a as usize];
                acc.rnd = RoundId(r);
                acc.vrnd = RoundId(r);
                acc.vval = v;
                insert_sorted(&mut s.channels.learn, (r, v));
                out.push((
                    TransitionLabel::AcceptorAccept {
                        acceptor: a as usize,
                        rnd: r,
                        val: v,
                    },
                    s,
                ));
            }
        }
        let mut seen: Vec<LearnMsg> = Vec::new();
        for &(r, v) in &self.channels.learn {
            if seen.contains(&(r, v)) {
                continue;
            }
            seen.push((r, v));
            let mut s = self.clone();
            remove_one(&mut s.channels.learn, (r, v));
            let count = s.learner.mcount.entry(r).or_insert(0);
            if (*count as usize) < maj {
                *count += 1;
            }
            if *count as usize == maj {
                s.learner.chosen.insert(v);
            }
            out.push((TransitionLabel::LearnerLearn { rnd: r, val: v }, s));
        }
        out.sort_by_key(|t| t.0);
        out
    }

    /// Safety per the protocol definition: at most one chosen value, and
    /// every chosen value is some proposer's initial proposal.
    pub fn check_safety(&self) -> Verdict {
        if self.chosen_count() >= 2 {
            return Verdict::Unsafe(Violation::MultipleChosen);
        }
        for &v in &self.learner.chosen {
            if !self.proposers.iter().any(|p| p.myval == v) {
                return Verdict::Unsafe(Violation::NotProposed);
            }
        }
        Verdict::Safe
    }

    pub fn chosen_count(&self) -> usize {
        self.learner.chosen.len()
    }

    /// Injective serialization of the full state vector; two states get
    /// equal fingerprints iff they are component-wise equal.
    pub fn fingerprint(&self) -> Vec<u8> {
        fn push_i32(out: &mut Vec<u8>, v: i32) {
            out.extend_from_slice(&v.to_le_bytes());
        }
        fn push_len(out: &mut Vec<u8>, n: usize) {
            out.extend_from_slice(&(n as u32).to_le_bytes());
        }
        let mut out = Vec::new();
        push_len(&mut out, self.proposers.len());
        for p in &self.proposers {
            push_i32(&mut out, p.crnd.0);
            push_i32(&mut out, p.myval);
            out.push(p.phase as u8);
        }
        push_len(&mut out, self.acceptors.len());
        for a in &self.acceptors {
            push_i32(&mut out, a.rnd.0);
            push_i32(&mut out, a.vrnd.0);
            push_i32(&mut out, a.vval);
        }
        push_len(&mut out, self.learner.mcount.len());
        for (&r, &c) in &self.learner.mcount {
            push_i32(&mut out, r);
            push_i32(&mut out, c as i32);
        }
        push_len(&mut out, self.learner.chosen.len());
        for &v in &self.learner.chosen {
            push_i32(&mut out, v);
        }
        push_len(&mut out, self.channels.prepare.len());
        for &(a, r) in &self.channels.prepare {
            push_i32(&mut out, a as i32);
            push_i32(&mut out, r);
        }
        push_len(&mut out, self.channels.promise.len());
        for &(r, p, v) in &self.channels.promise {
            push_i32(&mut out, r);
            push_i32(&mut out, p);
            push_i32(&mut out, v);
        }
        push_len(&mut out, self.channels.accept.len());
        for &(a, r, v) in &self.channels.accept {
            push_i32(&mut out, a as i32);
            push_i32(&mut out, r);
            push_i32(&mut out, v);
        }
        push_len(&mut out, self.channels.learn.len());
        for &(r, v) in &self.channels.learn {
            push_i32(&mut out, r);
            push_i32(&mut out, v);
        }
        out
    }

    /// Textual state dump: one line per process, one per channel, in a
    /// fixed field order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.proposers.iter().enumerate() {
            out.push_str(&format!(
                "proposer {i}: crnd={} myval={} phase={}\n",
                p.crnd, p.myval, p.phase
            ));
        }
        for (i, a) in self.acceptors.iter().enumerate() {
            out.push_str(&format!(
                "acceptor {i}: rnd={} vrnd={} vval={}\n",
                a.rnd, a.vrnd, a.vval
            ));
        }
        let mcount: Vec<String> = self
            .learner
            .mcount
            .iter()
            .map(|(r, c)| format!("{r}:{c}"))
            .collect();
        let chosen: Vec<String> = self.learner.chosen.iter().map(|v| v.to_string()).collect();
        out.push_str(&format!(
            "learner: mcount={{{}}} chosen={{{}}}\n",
            mcount.join(","),
            chosen.join(",")
        ));
        out.push_str(&format!("prepare: {:?}\n", self.channels.prepare));
        out.push_str(&format!("promise: {:?}\n", self.channels.promise));
        out.push_str(&format!("accept: {:?}\n", self.channels.accept));
        out.push_str(&format!("learn: {:?}\n", self.channels.learn));
        out
    }

    /// Per-state invariants used by the auditing exploration mode.
    pub fn audit(&self, cfg: &ProtocolConfig) -> Result<(), String> {
        if !self.channels.prepare.windows(2).all(|w| w[0] <= w[1]) {
            return Err("prepare channel not sorted".into());
        }
        if !self.channels.promise.windows(2).all(|w| w[0] <= w[1]) {
            return Err("promise channel not sorted".into());
        }
        if !self.channels.accept.windows(2).all(|w| w[0] <= w[1]) {
            return Err("accept channel not sorted".into());
        }
        if !self.channels.learn.windows(2).all(|w| w[0] <= w[1]) {
            return Err("learn channel not sorted".into());
        }
        if let Some((r, c)) = self.learner.mcount.iter().find(|(_, &c)| c > cfg.maj) {
            return Err(format!("mcount[{r}] = {c} exceeds maj {}", cfg.maj));
        }
        Ok(())
    }

    /// Per-transition invariants: acceptor rounds never decrease and
    /// proposer phases only advance.
    pub fn audit_step(&self, post: &VectorState) -> Result<(), String> {
        for (i, (pre, post)) in self.acceptors.iter().zip(&post.acceptors).enumerate() {
            if post.rnd < pre.rnd {
                return Err(format!(
                    "acceptor {i} rnd decreased {} -> {}",
                    pre.rnd, post.rnd
                ));
            }
        }
        for (i, (pre, post)) in self.proposers.iter().zip(&post.proposers).enumerate() {
            if post.phase < pre.phase {
                return Err(format!("proposer {i} phase regressed"));
            }
        }
        Ok(())
    }
}
