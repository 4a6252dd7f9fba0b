//! Traffic generation and metrics accounting.
//!
//! Ten constant-bit-rate flows between randomly assigned endpoint pairs,
//! plus a relay leg: each destination, upon receiving a flow packet,
//! originates one application packet toward the ground base station.

use crate::rng::Rng;
use crate::NodeId;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flow {
    pub source: NodeId,
    pub destination: NodeId,
    /// Packets per second.
    pub rate: f64,
    pub payload_bytes: u32,
    pub start: f64,
    pub stop: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficConfig {
    pub flow_count: usize,
    pub rate: f64,
    pub payload_bytes: u32,
    pub start: f64,
    /// Defaults to the simulation end.
    pub stop: f64,
    /// Destinations relay one packet to the GBS per flow packet received.
    pub gbs_leg: bool,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        TrafficConfig {
            flow_count: 10,
            rate: 1.0,
            payload_bytes: 512,
            start: 10.0,
            stop: 1800.0,
            gbs_leg: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FlowSetupError {
    /// Needs 2 * flow_count distinct endpoints plus at least one relay.
    InsufficientNodes { have: usize, need: usize },
}

/// Randomly assigns `flow_count` source nodes and `flow_count` destination
/// nodes, all distinct, from the UAV population (the GBS takes part in
/// neither role). Remaining nodes act as relays.
pub fn setup_flows(
    uavs: &[NodeId],
    cfg: &TrafficConfig,
    rng: &mut Rng,
) -> Result<Vec<Flow>, FlowSetupError> {
    let need = 2 * cfg.flow_count + 1;
    if uavs.len() < need {
        return Err(FlowSetupError::InsufficientNodes { have: uavs.len(), need });
    }
    let mut order: Vec<NodeId> = uavs.to_vec();
    rng.shuffle(&mut order);
    let flows = (0..cfg.flow_count)
        .map(|i| Flow {
            source: order[i],
            destination: order[cfg.flow_count + i],
            rate: cfg.rate,
            payload_bytes: cfg.payload_bytes,
            start: cfg.start,
            stop: cfg.stop,
        })
        .collect();
    Ok(flows)
}

/// Raw counters accumulated over one run. All counters are monotone during
/// the run; derived metrics are computed at the end.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Metrics {
    // Application level, both legs.
    pub app_packets_sent: u64,
    pub app_packets_received: u64,
    pub delay_sum: f64,
    // Flow-leg-only view, for the restricted metrics scope.
    pub flow_leg_sent: u64,
    pub flow_leg_received: u64,
    pub flow_leg_delay_sum: f64,
    /// Every reception of RREQ/RREP/RERR at every node.
    pub control_received: u64,
    /// Breakdown of `control_received` by message type.
    pub rreq_received: u64,
    pub rrep_received: u64,
    pub rerr_received: u64,
    /// Every hop-level data frame reception.
    pub data_received: u64,
    // Terminal packet accounting (application packets, both legs).
    pub dropped_by_attacker: u64,
    pub dropped_overflow: u64,
    pub lost_range: u64,
    pub ttl_expired: u64,
    pub no_route_dropped: u64,
    pub pending_evicted: u64,
    pub pending_at_end: u64,
    pub in_flight_at_end: u64,
    // Control-frame losses (not part of the packet conservation equation).
    pub control_dropped_overflow: u64,
    pub control_lost_range: u64,
    pub rrep_no_reverse: u64,
    /// RREQ floods originated network-wide (protocol plus attack bursts).
    pub rreqs_originated: u64,
}

impl Metrics {
    /// Per-run conservation: every originated packet must be accounted for
    /// exactly once.
    pub fn conservation_balance(&self) -> i128 {
        let terminal = self.app_packets_received
            + self.dropped_by_attacker
            + self.dropped_overflow
            + self.lost_range
            + self.ttl_expired
            + self.no_route_dropped
            + self.pending_evicted
            + self.pending_at_end
            + self.in_flight_at_end;
        self.app_packets_sent as i128 - terminal as i128
    }

    pub fn pdr(&self) -> Option<f64> {
        if self.app_packets_sent == 0 {
            None
        } else {
            Some(self.app_packets_received as f64 / self.app_packets_sent as f64)
        }
    }

    pub fn e2e_mean_s(&self) -> Option<f64> {
        if self.app_packets_received == 0 {
            None
        } else {
            Some(self.delay_sum / self.app_packets_received as f64)
        }
    }

    pub fn overhead(&self) -> Option<f64> {
        if self.data_received == 0 {
            None
        } else {
            Some(self.control_received as f64 / self.data_received as f64)
        }
    }

    pub fn flow_leg_pdr(&self) -> Option<f64> {
        if self.flow_leg_sent == 0 {
            None
        } else {
            Some(self.flow_leg_received as f64 / self.flow_leg_sent as f64)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    #[test]
    fn flows_use_twenty_distinct_endpoints() {
        let uavs: Vec<NodeId> = (0..24).map(NodeId).collect();
        let cfg = TrafficConfig::default();
        let flows = setup_flows(&uavs, &cfg, &mut Rng::from_stream(3, "flow-select")).unwrap();
        assert_eq!(flows.len(), 10);
        let mut endpoints = BTreeSet::new();
        for f in &flows {
            assert_ne!(f.source, f.destination);
            endpoints.insert(f.source);
            endpoints.insert(f.destination);
        }
        assert_eq!(endpoints.len(), 20);
    }

    #[test]
    fn flow_assignment_is_deterministic() {
        let uavs: Vec<NodeId> = (0..49).map(NodeId).collect();
        let cfg = TrafficConfig::default();
        let a = setup_flows(&uavs, &cfg, &mut Rng::from_stream(3, "flow-select")).unwrap();
        let b = setup_flows(&uavs, &cfg, &mut Rng::from_stream(3, "flow-select")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn too_few_nodes_is_an_error() {
        let uavs: Vec<NodeId> = (0..20).map(NodeId).collect();
        let cfg = TrafficConfig::default();
        assert_eq!(
            setup_flows(&uavs, &cfg, &mut Rng::from_stream(1, "flow-select")),
            Err(FlowSetupError::InsufficientNodes { have: 20, need: 21 })
        );
    }

    #[test]
    fn pdr_math() {
        let m = Metrics { app_packets_sent: 1000, app_packets_received: 940, ..Default::default() };
        assert_eq!(m.pdr(), Some(0.94));
        let zero = Metrics::default();
        assert_eq!(zero.pdr(), None);
        let severed =
            Metrics { app_packets_sent: 500, app_packets_received: 0, ..Default::default() };
        assert_eq!(severed.pdr(), Some(0.0));
    }

    #[test]
    fn e2e_math() {
        let m = Metrics {
            app_packets_received: 2,
            delay_sum: 0.08 + 0.12,
            ..Default::default()
        };
        let e2e = m.e2e_mean_s().unwrap();
        assert!((e2e - 0.10).abs() < 1e-12);
        assert_eq!(Metrics::default().e2e_mean_s(), None);
    }

    #[test]
    fn overhead_math() {
        let m = Metrics { control_received: 7490, data_received: 1000, ..Default::default() };
        assert_eq!(m.overhead(), Some(7.49));
        assert_eq!(Metrics::default().overhead(), None);
    }

    #[test]
    fn conservation_balances() {
        let m = Metrics {
            app_packets_sent: 100,
            app_packets_received: 90,
            dropped_by_attacker: 3,
            lost_range: 2,
            pending_at_end: 4,
            in_flight_at_end: 1,
            ..Default::default()
        };
        assert_eq!(m.conservation_balance(), 0);
    }
}
