//! Quick sizing run for the desk-scale instances.

use std::time::Instant;

use paxos_mc_core::{explore, ExplorationConfig, GraphModel, Keying, ProtocolConfig, VectorModel};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("all");

    let run = |name: &str, f: &dyn Fn() -> (usize, usize, String)| {
        let t = Instant::now();
        let (states, transitions, verdict) = f();
        println!(
            "{name}: states={states} transitions={transitions} verdict={verdict} in {:?}",
            t.elapsed()
        );
    };

    let bfs = ExplorationConfig::bfs();
    let dfs = ExplorationConfig::dfs();

    if which == "all" || which == "grid" {
        for p in 1..=2u32 {
            for a in 1..=3u32 {
                for maj in 1..=a {
                    let cfg = ProtocolConfig::new(p, a, maj).unwrap();
                    run(&format!("graph {p}/{a}/{maj}"), &|| {
                        let r = explore(&GraphModel::new(cfg), &bfs).unwrap();
                        (r.states_stored, r.transitions, format!("{:?}", r.verdict))
                    });
                    run(&format!("vector {p}/{a}/{maj}"), &|| {
                        let r = explore(&VectorModel::new(cfg), &bfs).unwrap();
                        (r.states_stored, r.transitions, format!("{:?}", r.verdict))
                    });
                }
            }
        }
    }
    if which == "all" || which == "fp232" {
        let cfg = ProtocolConfig::new(2, 3, 2).unwrap();
        run("graph-fingerprint 2/3/2", &|| {
            let r = explore(&GraphModel::with_keying(cfg, Keying::Fingerprint), &bfs).unwrap();
            (r.states_stored, r.transitions, format!("{:?}", r.verdict))
        });
    }
    if which == "all" || which == "dfs342" {
        let cfg = ProtocolConfig::new(3, 4, 2).unwrap();
        run("graph-dfs 3/4/2", &|| {
            let r = explore(&GraphModel::new(cfg), &dfs).unwrap();
            (r.states_stored, r.transitions, format!("{:?}", r.verdict))
        });
    }
    if which == "all" || which == "bfs242" {
        let cfg = ProtocolConfig::new(2, 4, 2).unwrap();
        run("graph-bfs 2/4/2", &|| {
            let r = explore(&GraphModel::new(cfg), &bfs).unwrap();
            (r.states_stored, r.transitions, format!("{:?}", r.verdict))
        });
    }
    if which == "vec242" {
        let cfg = ProtocolConfig::new(2, 4, 2).unwrap();
        run("vector-bfs 2/4/2", &|| {
            let r = explore(&VectorModel::new(cfg), &bfs).unwrap();
            (r.states_stored, r.transitions, format!("{:?}", r.verdict))
        });
    }
}
