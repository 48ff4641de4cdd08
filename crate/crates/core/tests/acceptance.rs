//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use paxos_mc_core::explore::{
    build_lts, verify_trace, ExplorationConfig, GraphModel, Keying, ReportVerdict, VectorModel,
};
use paxos_mc_core::graph::canon::certificate;
use paxos_mc_core::graph::iso::isomorphic_bruteforce;
use paxos_mc_core::graph::{EdgeLabel, GraphState, Node};
use paxos_mc_core::{
    compare_encodings, explore, majority_bound, ProtocolConfig, RoundId, Violation,
};

fn cfg(p: u32, a: u32, m: u32) -> ProtocolConfig {
    ProtocolConfig::new(p, a, m).unwrap()
}

/// 1. Every correctly configured small instance is safe under both
///    encodings.
#[test]
fn criterion_1_safety_of_correct_instances() {
    for p in 1..=2 {
        for a in 1..=3 {
            let maj = majority_bound(a);
            let c = cfg(p, a, maj);
            let g = explore(&GraphModel::new(c), &ExplorationConfig::bfs()).unwrap();
            assert_eq!(g.verdict, ReportVerdict::Safe, "graph {p}/{a}/{maj}");
            let v = explore(&VectorModel::new(c), &ExplorationConfig::bfs()).unwrap();
            assert_eq!(v.verdict, ReportVerdict::Safe, "vector {p}/{a}/{maj}");
        }
    }
    println!("ACCEPTANCE 1 PASS: all (P,A,ceil((A+1)/2)) grid instances safe under both encodings");
}

/// 2. The known-bad instance (3 proposers, 4 acceptors, maj 2) is unsafe
///    with a replay-valid trace; the reduced (2,4,2) instance is unsafe
///    under full BFS.
#[test]
fn criterion_2_violation_of_incorrect_instance() {
    let model = GraphModel::new(cfg(3, 4, 2));
    let report = explore(&model, &ExplorationConfig::dfs()).unwrap();
    assert_eq!(report.verdict, ReportVerdict::Unsafe);
    assert_eq!(report.violation, Some(Violation::MultipleChosen));
    let trace = report
        .trace
        .as_ref()
        .expect("unsafe report carries a trace");
    verify_trace(&model, trace).unwrap();

    let reduced = explore(&GraphModel::new(cfg(2, 4, 2)), &ExplorationConfig::bfs()).unwrap();
    assert_eq!(reduced.verdict, ReportVerdict::Unsafe);
    assert_eq!(reduced.violation, Some(Violation::MultipleChosen));
    println!(
        "ACCEPTANCE 2 PASS: (3,4,2) dfs unsafe with valid {}-step trace; (2,4,2) bfs unsafe \
         ({} states)",
        trace.len() - 1,
        reduced.states_stored
    );
}

/// 3. Symmetry reduction: certificate keying explores strictly fewer
///    states than fingerprint keying and than the vector encoding.
#[test]
fn criterion_3_symmetry_reduction() {
    let c = cfg(2, 3, 2);
    let bfs = ExplorationConfig::bfs();
    let with_cert = explore(&GraphModel::with_keying(c, Keying::Certificate), &bfs).unwrap();
    let with_fp = explore(&GraphModel::with_keying(c, Keying::Fingerprint), &bfs).unwrap();
    let vector = explore(&VectorModel::new(c), &bfs).unwrap();
    assert!(with_cert.states_stored < with_fp.states_stored);
    assert!(with_cert.states_stored < vector.states_stored);
    println!(
        "ACCEPTANCE 3 PASS: (2,3,2) certificate={} < fingerprint={} (ratio {:.2}) and \
         < vector={} (ratio {:.2})",
        with_cert.states_stored,
        with_fp.states_stored,
        with_fp.states_stored as f64 / with_cert.states_stored as f64,
        vector.states_stored,
        vector.states_stored as f64 / with_cert.states_stored as f64,
    );
}

// --- random graph generator for the canonicalization oracle ---

const EDGE_LABELS: [EdgeLabel; 7] = [
    EdgeLabel::Sender,
    EdgeLabel::Myval,
    EdgeLabel::Pval,
    EdgeLabel::Val,
    EdgeLabel::Lval,
    EdgeLabel::Aval,
    EdgeLabel::Chosen,
];

fn random_node(rng: &mut ChaCha8Rng) -> Node {
    let small = |rng: &mut ChaCha8Rng| rng.gen_range(-1..=2);
    let opt = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.3) {
            None
        } else {
            Some(RoundId(rng.gen_range(-1..=2)))
        }
    };
    match rng.gen_range(0..9) {
        0 => Node::Counters {
            maj: small(rng),
            next_rnd: opt(rng).map(|r| r.0),
        },
        1 => Node::Proposer {
            crnd: opt(rng),
            is_prepared: rng.gen_bool(0.5),
        },
        2 => Node::Acceptor {
            rnd: opt(rng),
            prnd: opt(rng),
        },
        3 => Node::Learner,
        4 => Node::Prepare {
            rnd: RoundId(small(rng)),
        },
        5 => Node::Promise {
            rnd: RoundId(small(rng)),
            prnd: RoundId(small(rng)),
        },
        6 => Node::Accept {
            rnd: RoundId(small(rng)),
        },
        7 => Node::Learn {
            rnd: RoundId(small(rng)),
        },
        _ => Node::Value {
            default: rng.gen_bool(0.5),
        },
    }
}

fn random_graph(rng: &mut ChaCha8Rng, cfg: &ProtocolConfig) -> GraphState {
    // start from a legal skeleton so the node-count bound stays honest,
    // then decorate with arbitrary typed nodes and edges
    let mut g = GraphState::initial(cfg);
    let extra = rng.gen_range(0..=8usize.saturating_sub(g.node_count()));
    for _ in 0..extra {
        g = g.with_node(random_node(rng));
    }
    let n = g.node_count();
    for _ in 0..rng.gen_range(0..=12) {
        let src = rng.gen_range(0..n);
        let dst = rng.gen_range(0..n);
        let label = EDGE_LABELS[rng.gen_range(0..EDGE_LABELS.len())];
        g = g.with_edge(src, label, dst);
    }
    g
}

fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    perm
}

/// Near-miss: same shape, one node replaced by an attribute-different one.
fn mutate_attribute(rng: &mut ChaCha8Rng, g: &GraphState) -> GraphState {
    let mut nodes: Vec<Node> = g.nodes().to_vec();
    let victim = rng.gen_range(0..nodes.len());
    loop {
        let cand = random_node(rng);
        if cand != nodes[victim] {
            nodes[victim] = cand;
            break;
        }
    }
    GraphState::from_parts(nodes, g.edges().to_vec())
}

/// 4. Certificate equality coincides with brute-force isomorphism on a
///    corpus of random graphs, permuted pairs and near-miss pairs.
#[test]
fn criterion_4_canonicalization_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(20260823);
    let base = ProtocolConfig::new(1, 1, 1).unwrap(); // 4-node skeleton
    let mut graphs_checked = 0usize;
    let mut pairs_checked = 0usize;
    let mut prev: Option<GraphState> = None;
    for _ in 0..400 {
        let g = random_graph(&mut rng, &base);
        assert!(g.node_count() <= 8);

        let perm = random_permutation(&mut rng, g.node_count());
        let permuted = g.permuted(&perm);
        let near_miss = mutate_attribute(&mut rng, &g);
        graphs_checked += 3;

        for other in [&permuted, &near_miss] {
            let cert_eq = certificate(&g) == certificate(other);
            let iso = isomorphic_bruteforce(&g, other).unwrap();
            assert_eq!(cert_eq, iso, "certificate/oracle disagreement");
            pairs_checked += 1;
        }
        assert_eq!(certificate(&g), certificate(&permuted));

        // unrelated pair from the previous round
        if let Some(p) = prev.take() {
            let cert_eq = certificate(&g) == certificate(&p);
            let iso = isomorphic_bruteforce(&g, &p).unwrap();
            assert_eq!(cert_eq, iso, "certificate/oracle disagreement");
            pairs_checked += 1;
        }
        prev = Some(g);
    }
    assert!(graphs_checked >= 1000);
    println!(
        "ACCEPTANCE 4 PASS: {graphs_checked} random graphs, {pairs_checked} pairs, \
         certificate equality == brute-force isomorphism throughout"
    );
}

/// 5. Both encodings agree on the verdict across the whole small grid.
#[test]
fn criterion_5_verdict_agreement() {
    let mut checked = 0;
    for p in 1..=2 {
        for a in 1..=3 {
            for maj in 1..=a {
                let c = cfg(p, a, maj);
                // compare_encodings fails hard on any verdict mismatch
                let cmp = compare_encodings(&c, &ExplorationConfig::bfs()).unwrap();
                assert!(!cmp.inconclusive());
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 12);
    println!("ACCEPTANCE 5 PASS: graph and vector verdicts agree on all 12 grid configurations");
}

/// 6. Protocol invariants hold on every reachable state of (2,3,2),
///    via the auditing exploration mode.
#[test]
fn criterion_6_protocol_invariants() {
    let c = cfg(2, 3, 2);
    let ecfg = ExplorationConfig {
        audit: true,
        ..ExplorationConfig::bfs()
    };
    let g = explore(&GraphModel::new(c), &ecfg).unwrap();
    let v = explore(&VectorModel::new(c), &ecfg).unwrap();
    println!(
        "ACCEPTANCE 6 PASS: invariants audited on all {} graph and {} vector states of (2,3,2)",
        g.states_stored, v.states_stored
    );
}

/// 7. Repeated runs produce byte-identical JSON reports.
#[test]
fn criterion_7_determinism() {
    fn graph_check() -> String {
        explore(&GraphModel::new(cfg(2, 3, 2)), &ExplorationConfig::bfs())
            .unwrap()
            .to_json()
    }
    fn vector_check() -> String {
        explore(&VectorModel::new(cfg(2, 3, 2)), &ExplorationConfig::bfs())
            .unwrap()
            .to_json()
    }
    fn dfs_trace() -> String {
        explore(&GraphModel::new(cfg(3, 4, 2)), &ExplorationConfig::dfs())
            .unwrap()
            .to_json()
    }
    fn comparison() -> String {
        compare_encodings(&cfg(2, 2, 1), &ExplorationConfig::bfs())
            .unwrap()
            .to_json()
    }
    type Run = (&'static str, fn() -> String);
    let runs: [Run; 4] = [
        ("graph check", graph_check),
        ("vector check", vector_check),
        ("dfs trace", dfs_trace),
        ("compare", comparison),
    ];
    for (name, json) in runs {
        assert_eq!(json(), json(), "{name} not byte-identical");
    }
    println!("ACCEPTANCE 7 PASS: repeated check/compare runs serialize byte-identically");
}

/// 8. Every unsafe report's trace replays through the successor function
///    to a state failing the safety check.
#[test]
fn criterion_8_trace_validity() {
    let mut replayed = 0;
    for p in 1..=2 {
        for a in 1..=3 {
            for maj in 1..=a {
                let c = cfg(p, a, maj);
                for strategy in [ExplorationConfig::bfs(), ExplorationConfig::dfs()] {
                    let model = GraphModel::new(c);
                    let r = explore(&model, &strategy).unwrap();
                    if let Some(trace) = &r.trace {
                        verify_trace(&model, trace).unwrap();
                        replayed += 1;
                    }
                    let model = VectorModel::new(c);
                    let r = explore(&model, &strategy).unwrap();
                    if let Some(trace) = &r.trace {
                        verify_trace(&model, trace).unwrap();
                        replayed += 1;
                    }
                }
            }
        }
    }
    let model = GraphModel::new(cfg(3, 4, 2));
    let r = explore(&model, &ExplorationConfig::dfs()).unwrap();
    verify_trace(&model, r.trace.as_ref().unwrap()).unwrap();
    replayed += 1;
    assert!(
        replayed >= 5,
        "expected several unsafe traces, got {replayed}"
    );
    println!("ACCEPTANCE 8 PASS: {replayed} unsafe traces replayed to a violating state");
}

/// Supporting check: the exported LTS matches the exploration statistics.
#[test]
fn lts_matches_report() {
    let model = GraphModel::new(cfg(1, 1, 1));
    let lts = build_lts(&model, None).unwrap();
    let report = explore(&model, &ExplorationConfig::bfs()).unwrap();
    assert_eq!(lts.states.len(), report.states_stored);
    assert_eq!(lts.edges.len(), report.transitions);
}
