//! Simplified shared wireless medium.
//!
//! Unit-disc connectivity at the configured range, serialized per-node
//! transmission at the configured bitrate, neighborhood carrier-sense with
//! uniform random backoff, and finite per-node FIFO transmit queues. There
//! is no receiver-side collision or capture model; contention shows up as
//! deferral and queueing.

use crate::aodv::{Control, DataPacket};
use crate::mobility::Vec3;
use crate::NodeId;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameKind {
    Data,
    Rreq,
    Rrep,
    Rerr,
}

#[derive(Debug, Clone)]
pub enum FramePayload {
    Data(DataPacket),
    Control(Control),
}

impl FramePayload {
    pub fn kind(&self) -> FrameKind {
        match self {
            FramePayload::Data(_) => FrameKind::Data,
            FramePayload::Control(Control::Rreq(_)) => FrameKind::Rreq,
            FramePayload::Control(Control::Rrep(_)) => FrameKind::Rrep,
            FramePayload::Control(Control::Rerr(_)) => FrameKind::Rerr,
        }
    }
}

/// Link-layer frame. `link_dst = None` means broadcast.
#[derive(Debug, Clone)]
pub struct Frame {
    pub link_src: NodeId,
    pub link_dst: Option<NodeId>,
    pub size_bytes: u32,
    pub payload: FramePayload,
    pub enqueue_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumConfig {
    /// Unit-disc transmission range, meters.
    pub range: f64,
    /// Payload bitrate, bits per second.
    pub bitrate: f64,
    /// Per-node transmit queue capacity, frames.
    pub queue_capacity: usize,
    /// Upper bound of the uniform carrier-sense backoff, seconds.
    pub backoff_max: f64,
    /// Fixed per-frame channel hold beyond the payload airtime (preamble,
    /// inter-frame spacing, acknowledgment), seconds. The frame is delivered
    /// at `t + airtime`; the transmitter and the channel stay occupied until
    /// `t + airtime + frame_overhead`.
    pub frame_overhead: f64,
    /// Speed-of-light propagation delay on/off (sub-microsecond at these
    /// ranges, off by default).
    pub propagation: bool,
    /// Link-layer header added to every frame, bytes.
    pub link_header_bytes: u32,
    /// Control message body sizes, bytes.
    pub rreq_bytes: u32,
    pub rrep_bytes: u32,
    pub rerr_bytes: u32,
}

impl Default for MediumConfig {
    fn default() -> Self {
        MediumConfig {
            range: 4000.0,
            bitrate: 11.0e6,
            queue_capacity: 64,
            backoff_max: 2.0e-3,
            frame_overhead: 2.0e-3,
            propagation: false,
            link_header_bytes: 48,
            rreq_bytes: 24,
            rrep_bytes: 20,
            rerr_bytes: 12,
        }
    }
}

impl MediumConfig {
    pub fn airtime(&self, size_bytes: u32) -> f64 {
        (size_bytes as f64 * 8.0) / self.bitrate
    }

    pub fn data_frame_bytes(&self, payload_bytes: u32) -> u32 {
        payload_bytes + self.link_header_bytes
    }

    pub fn control_frame_bytes(&self, kind: FrameKind) -> u32 {
        let body = match kind {
            FrameKind::Rreq => self.rreq_bytes,
            FrameKind::Rrep => self.rrep_bytes,
            FrameKind::Rerr => self.rerr_bytes,
            FrameKind::Data => unreachable!("data frames are sized from payload"),
        };
        body + self.link_header_bytes
    }
}

/// Unit-disc neighborhood: every node within range, excluding the node
/// itself. The relation is symmetric by construction.
pub fn neighbors(node: NodeId, positions: &[Vec3], range: f64) -> Vec<NodeId> {
    let mut out = Vec::new();
    let me = &positions[node.index()];
    let range_sq = range * range;
    for (i, p) in positions.iter().enumerate() {
        if i != node.index() && me.distance_sq(p) <= range_sq {
            out.push(NodeId::from_index(i));
        }
    }
    out
}

pub fn in_range(a: &Vec3, b: &Vec3, range: f64) -> bool {
    a.distance_sq(b) <= range * range
}

/// Outcome of offering a frame to a node's transmit queue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnqueueOutcome {
    Accepted,
    DroppedOverflow,
}

/// Per-node transmitter state.
#[derive(Debug, Default)]
pub struct NodeMedium {
    pub queue: alloc::collections::VecDeque<Frame>,
    /// End of the current frame's channel occupancy (payload airtime plus
    /// the per-frame overhead); neighbors sense the channel busy until this
    /// instant, and it doubles as the node's own earliest next start.
    pub busy_until: f64,
    /// Contention window multiplier: doubles on every deferral up to a cap
    /// and resets after a transmission, like binary exponential backoff.
    pub cw_scale: f64,
    /// The frame currently on the air, with its broadcast recipient snapshot.
    pub in_flight: Option<(Frame, Vec<NodeId>)>,
    /// True while a TxTry/TxFinish chain is scheduled for this node.
    pub pump_active: bool,
    // Conservation counters, frames.
    pub enqueue_attempts: u64,
    pub dropped_overflow: u64,
    pub transmitted: u64,
    pub lost_range: u64,
    /// Cumulative airtime this node has spent transmitting, seconds.
    pub airtime_used: f64,
}

impl NodeMedium {
    pub fn offer(&mut self, frame: Frame, capacity: usize) -> EnqueueOutcome {
        self.enqueue_attempts += 1;
        if self.queue.len() >= capacity {
            self.dropped_overflow += 1;
            EnqueueOutcome::DroppedOverflow
        } else {
            self.queue.push_back(frame);
            EnqueueOutcome::Accepted
        }
    }

    pub fn transmitting(&self, now: f64) -> bool {
        now < self.busy_until
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aodv::Rreq;

    fn rreq_frame(src: NodeId) -> Frame {
        Frame {
            link_src: src,
            link_dst: None,
            size_bytes: 72,
            payload: FramePayload::Control(Control::Rreq(Rreq {
                originator: src,
                orig_seq: 1,
                rreq_id: 1,
                destination: NodeId(1),
                last_known_dest_seq: 0,
                hop_count: 0,
                ttl: 32,
                dest_only: false,
            })),
            enqueue_time: 0.0,
        }
    }

    #[test]
    fn in_range_boundary() {
        let a = Vec3::new(0.0, 0.0, 0.0);
        assert!(in_range(&a, &Vec3::new(249.9, 0.0, 0.0), 250.0));
        assert!(!in_range(&a, &Vec3::new(250.1, 0.0, 0.0), 250.0));
        // Exactly at range counts as connected.
        assert!(in_range(&a, &Vec3::new(250.0, 0.0, 0.0), 250.0));
    }

    #[test]
    fn airtime_matches_bitrate_arithmetic() {
        let cfg = MediumConfig { bitrate: 11.0e6, ..Default::default() };
        // 512-byte payload + 48-byte header = 560 B = 4480 bits.
        let t = cfg.airtime(cfg.data_frame_bytes(512));
        assert!((t - 4480.0 / 11.0e6).abs() < 1e-15);
        assert!((t - 4.073e-4).abs() < 1e-6);
    }

    #[test]
    fn queue_overflow_drops_and_counts_once() {
        let mut nm = NodeMedium::default();
        for _ in 0..64 {
            assert_eq!(nm.offer(rreq_frame(NodeId(0)), 64), EnqueueOutcome::Accepted);
        }
        assert_eq!(nm.offer(rreq_frame(NodeId(0)), 64), EnqueueOutcome::DroppedOverflow);
        assert_eq!(nm.dropped_overflow, 1);
        assert_eq!(nm.enqueue_attempts, 65);
        assert_eq!(nm.queue.len(), 64);
    }

    #[test]
    fn neighbor_sets_are_symmetric() {
        // Brute-force pairwise check over pseudo-random placements.
        let mut rng = crate::rng::Rng::from_stream(77, "placement");
        for _ in 0..1000 {
            let positions: alloc::vec::Vec<Vec3> = (0..12)
                .map(|_| {
                    Vec3::new(
                        rng.uniform_range(0.0, 1000.0),
                        rng.uniform_range(0.0, 1000.0),
                        rng.uniform_range(0.0, 300.0),
                    )
                })
                .collect();
            for i in 0..positions.len() {
                let ni = neighbors(NodeId::from_index(i), &positions, 250.0);
                assert!(!ni.contains(&NodeId::from_index(i)));
                for j in ni {
                    let nj = neighbors(j, &positions, 250.0);
                    assert!(nj.contains(&NodeId::from_index(i)), "asymmetric at {i}/{j:?}");
                }
            }
        }
    }
}
