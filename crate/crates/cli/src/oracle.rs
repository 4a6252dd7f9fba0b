//! Small-topology validation suite: independent oracles that check the
//! routing core against brute-force expectations. Runs in seconds; used by
//! the `oracle` CLI verb and the acceptance tests.

use fanetsim_core::mobility::{Bounds, Vec3};
use fanetsim_core::rng::Rng;
use fanetsim_core::sim::{Sim, SimConfig};
use fanetsim_core::workload::TrafficConfig;
use fanetsim_core::NodeId;
use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub struct OracleOutcome {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn static_config(positions: Vec<Vec3>, flows: Vec<(u16, u16)>, sim_time: f64) -> SimConfig {
    SimConfig {
        nodes: positions.len(),
        bounds: Bounds { x_max: 10_000.0, y_max: 10_000.0, z_max: 300.0 },
        sim_time,
        seed: 1,
        has_gbs: false,
        mobility_enabled: false,
        traffic: TrafficConfig {
            flow_count: flows.len(),
            rate: 1.0,
            payload_bytes: 512,
            start: 10.0,
            stop: sim_time,
            gbs_leg: false,
        },
        explicit_flows: Some(flows.into_iter().map(|(a, b)| (NodeId(a), NodeId(b))).collect()),
        explicit_positions: Some(positions),
        ..Default::default()
    }
}

fn bfs_distances(positions: &[Vec3], range: f64, src: usize) -> Vec<usize> {
    let n = positions.len();
    let mut dist = vec![usize::MAX; n];
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        for v in 0..n {
            if v != u && dist[v] == usize::MAX && positions[u].distance(&positions[v]) <= range {
                dist[v] = dist[u] + 1;
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Installed hop counts must equal BFS shortest paths on random static
/// unit-disc graphs, for every connected ordered pair.
pub fn shortest_path_oracle(graphs: u64, nodes: usize) -> OracleOutcome {
    let range = 300.0;
    let mut checked = 0u64;
    let mut failures = Vec::new();
    for graph_seed in 0..graphs {
        let mut rng = Rng::from_stream(graph_seed, "oracle-placement");
        let positions: Vec<Vec3> = (0..nodes)
            .map(|_| Vec3::new(rng.uniform_range(0.0, 1000.0), rng.uniform_range(0.0, 1000.0), 0.0))
            .collect();
        for src in 0..nodes {
            let dist = bfs_distances(&positions, range, src);
            for dst in 0..nodes {
                if src == dst || dist[dst] == usize::MAX {
                    continue;
                }
                let mut cfg =
                    static_config(positions.clone(), vec![(src as u16, dst as u16)], 6.0);
                cfg.medium.range = range;
                cfg.traffic.start = 1.0;
                cfg.traffic.stop = 1.5;
                let mut sim = match Sim::new(cfg) {
                    Ok(s) => s,
                    Err(e) => {
                        failures.push(format!("graph {graph_seed}: build error {e}"));
                        continue;
                    }
                };
                sim.run_until(5.0);
                checked += 1;
                match sim.router(NodeId(src as u16)).route(NodeId(dst as u16)) {
                    None => failures.push(format!(
                        "graph {graph_seed}: no route {src}->{dst} (bfs {})",
                        dist[dst]
                    )),
                    Some(route) if route.hop_count as usize != dist[dst] => {
                        failures.push(format!(
                            "graph {graph_seed}: {src}->{dst} installed {} hops, bfs {}",
                            route.hop_count, dist[dst]
                        ));
                    }
                    Some(_) => {}
                }
            }
        }
    }
    OracleOutcome {
        name: "shortest-path-oracle",
        pass: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{checked} connected pairs match BFS over {graphs} graphs")
        } else {
            format!("{} of {checked} pairs diverge: {}", failures.len(), failures.join("; "))
        },
    }
}

/// A static 4-node chain with one 1 pkt/s flow for 100 s delivers at least
/// 98 packets (hand count: 100 sent, only discovery latency may cost any).
pub fn static_chain_delivery() -> OracleOutcome {
    let positions = (0..4).map(|i| Vec3::new(i as f64 * 200.0, 0.0, 0.0)).collect();
    let mut cfg = static_config(positions, vec![(0, 3)], 110.5);
    cfg.medium.range = 250.0;
    cfg.traffic.stop = 110.0;
    match Sim::new(cfg) {
        Ok(sim) => {
            let out = sim.run();
            let sent = out.metrics.app_packets_sent;
            let received = out.metrics.app_packets_received;
            OracleOutcome {
                name: "static-chain-delivery",
                pass: sent == 100 && received >= 98 && out.conservation_ok,
                detail: format!("sent {sent}, delivered {received} (need >= 98)"),
            }
        }
        Err(e) => OracleOutcome {
            name: "static-chain-delivery",
            pass: false,
            detail: format!("build error: {e}"),
        },
    }
}

/// Two identical configurations give bit-identical metrics.
pub fn determinism_check() -> OracleOutcome {
    let cfg = SimConfig { sim_time: 120.0, seed: 17, ..Default::default() };
    match (Sim::new(cfg.clone()), Sim::new(cfg)) {
        (Ok(a), Ok(b)) => {
            let (ra, rb) = (a.run(), b.run());
            OracleOutcome {
                name: "determinism",
                pass: ra.metrics == rb.metrics && ra.events_dispatched == rb.events_dispatched,
                detail: format!(
                    "events {} vs {}, metrics {}",
                    ra.events_dispatched,
                    rb.events_dispatched,
                    if ra.metrics == rb.metrics { "identical" } else { "DIVERGED" }
                ),
            }
        }
        _ => OracleOutcome { name: "determinism", pass: false, detail: "build error".into() },
    }
}

/// Per-flow packet conservation balances exactly on a mobile run with every
/// attack kind.
pub fn conservation_check() -> OracleOutcome {
    use fanetsim_core::adversary::{AttackConfig, AttackKind, Placement};
    let mut detail = Vec::new();
    let mut pass = true;
    for kind in [
        AttackKind::None,
        AttackKind::Sinkhole,
        AttackKind::Dropping,
        AttackKind::Blackhole,
        AttackKind::Flooding,
    ] {
        let mut cfg = SimConfig { sim_time: 200.0, seed: 23, ..Default::default() };
        cfg.attack = AttackConfig {
            kind,
            attacker_ratio: 0.25,
            placement: Placement::OnActiveRoute,
            ..Default::default()
        };
        match Sim::new(cfg) {
            Ok(sim) => {
                let out = sim.run();
                if !out.conservation_ok {
                    pass = false;
                    detail.push(format!("{}: unbalanced", kind.as_str()));
                }
            }
            Err(e) => {
                pass = false;
                detail.push(format!("{}: build error {e}", kind.as_str()));
            }
        }
    }
    OracleOutcome {
        name: "packet-conservation",
        pass,
        detail: if pass { "balances exactly under every attack kind".into() } else { detail.join("; ") },
    }
}

/// The full small-topology suite.
pub fn run_all(quick: bool) -> Vec<OracleOutcome> {
    let graphs = if quick { 10 } else { 50 };
    vec![
        shortest_path_oracle(graphs, 15),
        static_chain_delivery(),
        determinism_check(),
        conservation_check(),
    ]
}
