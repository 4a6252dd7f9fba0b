//! Property tests for the core invariants.

use fanetsim_core::adversary;
use fanetsim_core::engine::EventQueue;
use fanetsim_core::mobility::{gmm_step, Bounds, MobilityConfig, MobilityState, Vec3};
use fanetsim_core::rng::Rng;
use fanetsim_core::NodeId;
use proptest::prelude::*;
use std::collections::BTreeSet;

proptest! {
    #[test]
    fn gmm_never_escapes_bounds(
        alpha in 0.0f64..=1.0,
        speed_sd in 0.0f64..200.0,
        direction_sd in 0.0f64..2.0,
        pitch_sd in 0.0f64..1.0,
        seed in 0u64..1000,
    ) {
        let bounds = Bounds { x_max: 2000.0, y_max: 2000.0, z_max: 300.0 };
        let cfg = MobilityConfig {
            alpha,
            mean_speed: 100.0,
            step_interval: 1.0,
            speed_sd,
            direction_sd,
            pitch_sd,
        };
        let mut rng = Rng::from_stream(seed, "prop-mobility");
        let mut state = MobilityState {
            position: Vec3::new(1000.0, 1000.0, 150.0),
            speed: 100.0,
            direction: 0.7,
            pitch: 0.0,
            mean_speed: 100.0,
            mean_direction: 0.7,
            mean_pitch: 0.0,
            alpha,
        };
        for _ in 0..500 {
            state = gmm_step(&state, &cfg, &bounds, &mut rng);
            prop_assert!(bounds.contains(&state.position), "escaped to {:?}", state.position);
            prop_assert!(state.speed >= 0.0);
        }
    }

    #[test]
    fn event_dispatch_is_sorted(times in prop::collection::vec(0.0f64..1000.0, 1..200)) {
        let mut q = EventQueue::new();
        for (i, t) in times.iter().enumerate() {
            q.schedule(*t, i).unwrap();
        }
        let mut dispatched = Vec::new();
        while let Some((t, i)) = q.pop_until(f64::INFINITY) {
            dispatched.push((t, i));
        }
        prop_assert_eq!(dispatched.len(), times.len());
        for w in dispatched.windows(2) {
            // Total order: time first, insertion sequence breaks ties.
            prop_assert!(w[0].0 < w[1].0 || (w[0].0 == w[1].0 && w[0].1 < w[1].1));
        }
    }

    #[test]
    fn attacker_prefixes_nest(
        seed in 0u64..500,
        n in 22usize..60,
        excluded_count in 0usize..21,
    ) {
        let all: Vec<NodeId> = (0..n).map(NodeId::from_index).collect();
        let excluded: BTreeSet<NodeId> = (0..excluded_count).map(NodeId::from_index).collect();
        let mut rng = Rng::from_stream(seed, "attacker-select");
        let order = adversary::eligible_order(&all, &excluded, &mut rng);
        let mut previous = BTreeSet::new();
        for ratio in [0.05, 0.10, 0.15, 0.20, 0.25] {
            let set = adversary::select_attackers(&order, n, ratio).unwrap();
            prop_assert!(previous.is_subset(&set));
            for node in &set {
                prop_assert!(!excluded.contains(node));
            }
            previous = set;
        }
    }

    #[test]
    fn stream_draws_are_reproducible(seed in any::<u64>(), label_idx in 0usize..4) {
        let labels = ["mobility", "traffic", "attacker-select", "mac-backoff"];
        let label = labels[label_idx];
        let mut a = Rng::from_stream(seed, label);
        let mut b = Rng::from_stream(seed, label);
        for _ in 0..64 {
            prop_assert_eq!(a.next_u64(), b.next_u64());
        }
    }
}
