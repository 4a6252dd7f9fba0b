//! Scratch probe for parameter calibration: runs one cell of the experiment
//! grid and prints per-seed and mean metrics.
//!
//! Usage: probe <nodes> <attack> <ratio> [key=value ...]
//! Keys: range, lifetime, overhead, backoff, queue, seeds, sim_time, placement

use fanetsim_core::adversary::{AttackConfig, AttackKind, Placement};
use fanetsim_core::sim::{Sim, SimConfig};
use std::time::Instant;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let nodes: usize = args.first().map(|s| s.parse().unwrap()).unwrap_or(25);
    let attack = match args.get(1).map(String::as_str).unwrap_or("none") {
        "sinkhole" => AttackKind::Sinkhole,
        "dropping" => AttackKind::Dropping,
        "blackhole" => AttackKind::Blackhole,
        "flooding" => AttackKind::Flooding,
        _ => AttackKind::None,
    };
    let ratio: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(0.0);

    let med = fanetsim_core::medium::MediumConfig::default();
    let rt = fanetsim_core::aodv::RouterConfig::default();
    let mut range = med.range;
    let mut lifetime = rt.route_lifetime;
    let mut overhead = med.frame_overhead;
    let mut backoff = med.backoff_max;
    let mut queue = med.queue_capacity;
    let mut seeds = 10u64;
    let mut sim_time = 1800.0;
    let mut placement = Placement::Random;
    let mut timeout = rt.discovery_timeout;
    let mut ring = rt.ring_ttl;
    let mut holddown_base = rt.holddown_base;
    let mut holddown_max = rt.holddown_max;
    let mut attempts = rt.discovery_attempts;
    let atk_defaults = AttackConfig::default();
    let mut fake_lifetime = atk_defaults.fake_lifetime;
    let mut boost = atk_defaults.seq_boost;
    let mut snapshot_time = atk_defaults.snapshot_time;
    for kv in args.iter().skip(3) {
        let (k, v) = kv.split_once('=').expect("key=value");
        match k {
            "range" => range = v.parse().unwrap(),
            "lifetime" => lifetime = v.parse().unwrap(),
            "overhead" => overhead = v.parse().unwrap(),
            "backoff" => backoff = v.parse().unwrap(),
            "queue" => queue = v.parse().unwrap(),
            "seeds" => seeds = v.parse().unwrap(),
            "sim_time" => sim_time = v.parse().unwrap(),
            "timeout" => timeout = v.parse().unwrap(),
            "ring" => ring = v.parse().unwrap(),
            "hb" => holddown_base = v.parse().unwrap(),
            "fakelt" => fake_lifetime = v.parse().unwrap(),
            "boost" => boost = v.parse().unwrap(),
            "snap" => snapshot_time = v.parse().unwrap(),
            "hm" => holddown_max = v.parse().unwrap(),
            "attempts" => attempts = v.parse().unwrap(),
            "placement" => {
                placement = if v == "active" { Placement::OnActiveRoute } else { Placement::Random }
            }
            other => panic!("unknown key {other}"),
        }
    }

    let mut sums = [0.0f64; 3];
    let mut n_ok = 0u32;
    for seed in 1..=seeds {
        let alpha = 0.25 + 0.05 * (seed - 1) as f64;
        let mut cfg = SimConfig { nodes, sim_time, seed, ..Default::default() };
        cfg.mobility.alpha = alpha;
        cfg.medium.range = range;
        cfg.medium.frame_overhead = overhead;
        cfg.medium.backoff_max = backoff;
        cfg.medium.queue_capacity = queue;
        cfg.router.route_lifetime = lifetime;
        cfg.router.discovery_timeout = timeout;
        cfg.router.ring_ttl = ring;
        cfg.router.holddown_base = holddown_base;
        cfg.router.holddown_max = holddown_max;
        cfg.router.discovery_attempts = attempts;
        cfg.traffic.stop = sim_time;
        cfg.attack = AttackConfig {
            kind: attack,
            attacker_ratio: ratio,
            placement,
            fake_lifetime,
            seq_boost: boost,
            snapshot_time,
            ..Default::default()
        };
        let t0 = Instant::now();
        let out = Sim::new(cfg).unwrap().run();
        let dt = t0.elapsed().as_secs_f64();
        let m = &out.metrics;
        let pdr = m.pdr().unwrap_or(0.0);
        let e2e = m.e2e_mean_s().unwrap_or(0.0);
        let ovh = m.overhead().unwrap_or(0.0);
        println!(
            "seed {seed:2} alpha {alpha:.2}: pdr {pdr:.4} e2e {e2e:.4} ovh {ovh:6.2} | sent {:6} rcvd {:6} ctl_rx {:8} (q {:8} p {:7} e {:6} | orig {:6}) data_rx {:7} | atk {:5} ovfl {:5} range {:5} ttl {:4} noroute {:5} evict {:5} pend {:3} air {:3} | ev {:9} {dt:6.2}s{}",
            m.app_packets_sent,
            m.app_packets_received,
            m.control_received,
            m.rreq_received,
            m.rrep_received,
            m.rerr_received,
            m.rreqs_originated,
            m.data_received,
            m.dropped_by_attacker,
            m.dropped_overflow,
            m.lost_range,
            m.ttl_expired,
            m.no_route_dropped,
            m.pending_evicted,
            m.pending_at_end,
            m.in_flight_at_end,
            out.events_dispatched,
            if out.conservation_ok { "" } else { "  CONSERVATION-BROKEN" },
        );
        sums[0] += pdr;
        sums[1] += e2e;
        sums[2] += ovh;
        n_ok += 1;
    }
    println!(
        "MEAN over {n_ok}: pdr {:.4} e2e {:.4} ovh {:.2}",
        sums[0] / n_ok as f64,
        sums[1] / n_ok as f64,
        sums[2] / n_ok as f64
    );
}
