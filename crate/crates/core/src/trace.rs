//! Optional debug instrumentation hooks. A sink opts into the event
//! families it wants; everything is off by default so the hot path stays
//! silent.

use crate::medium::FrameKind;
use crate::NodeId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceEvent {
    /// Node position after a mobility step.
    Position { t: f64, node: NodeId, x: f64, y: f64, z: f64 },
    /// Frame lifecycle: "enqueue", "drop_overflow", "tx", "rx", "lost_range".
    Frame { t: f64, node: NodeId, event: &'static str, kind: FrameKind, size_bytes: u32 },
    /// Route table row, dumped once per mobility interval.
    Route {
        t: f64,
        node: NodeId,
        dest: NodeId,
        next_hop: NodeId,
        hops: u32,
        seq: u32,
        valid: bool,
    },
}

pub trait TraceSink {
    fn record(&mut self, event: &TraceEvent);
    fn wants_positions(&self) -> bool {
        false
    }
    fn wants_frames(&self) -> bool {
        false
    }
    fn wants_routes(&self) -> bool {
        false
    }
}
