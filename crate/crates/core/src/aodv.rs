//! Reactive AODV routing: on-demand route discovery, freshness-then-shortness
//! route selection, route maintenance via RERR, hop-by-hop data forwarding.
//!
//! The router is a per-node state machine that consumes received messages and
//! emits [`RouterAction`]s; the simulation loop owns delivery, timers and the
//! medium. This keeps the protocol logic directly testable on scripted
//! message sequences.
//!
//! Subset implemented: intermediate-node RREP is enabled, gratuitous RREP,
//! expanding-ring search, local repair and HELLO beacons are not. Link breaks
//! are detected by unicast delivery failure. RERR is a local broadcast
//! filtered by receivers holding a matching route. Duplicate RREQs are
//! discarded unless they arrive with a strictly smaller hop count, in which
//! case they are reprocessed so that reverse paths and replies converge to
//! shortest paths.

use crate::NodeId;
use alloc::collections::{BTreeMap, VecDeque};
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Leg {
    Flow,
    Gbs,
}

/// Application packet riding inside data frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataPacket {
    pub id: u64,
    pub leg: Leg,
    pub flow: u16,
    pub src: NodeId,
    pub dst: NodeId,
    pub sent_at: f64,
    pub ttl: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rreq {
    pub originator: NodeId,
    pub orig_seq: u32,
    pub rreq_id: u32,
    pub destination: NodeId,
    pub last_known_dest_seq: u32,
    pub hop_count: u32,
    /// Propagation budget: the flood dies once hop_count reaches this.
    /// Ring searches use a small budget; escalations and attack bursts go
    /// network-wide.
    pub ttl: u32,
    /// Only the destination itself may answer; intermediate cached routes
    /// are skipped. Set by nodes that cannot trust caches (a sinkhole
    /// attacker resolving a real path for attracted traffic).
    pub dest_only: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rrep {
    pub destination: NodeId,
    pub dest_seq: u32,
    pub originator: NodeId,
    pub hop_count: u32,
    pub lifetime: f64,
    /// End-to-end reply: intermediate nodes relay it toward the originator
    /// like ordinary traffic, without installing routes or counting hops.
    /// Forged replies travel this way.
    pub tunneled: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rerr {
    pub unreachable: Vec<(NodeId, u32)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Control {
    Rreq(Rreq),
    Rrep(Rrep),
    Rerr(Rerr),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteEntry {
    pub next_hop: NodeId,
    pub hop_count: u32,
    pub dest_seq: u32,
    /// Absolute validity deadline: installation instant plus the granted
    /// lifetime. Entries are not extended by use; carrying traffic past the
    /// grant requires a fresh reply, so short-lived grants (forged replies
    /// advertise small lifetimes) keep forcing re-validation.
    pub expiry: f64,
    pub valid: bool,
    /// Last time this entry carried a data forward; stands in for the RFC's
    /// precursor list when deciding whether an RERR concerns anyone here.
    pub last_forward: f64,
}

impl RouteEntry {
    pub fn usable(&self, now: f64) -> bool {
        self.valid && self.expiry > now
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouterConfig {
    /// Active route timeout; refreshed every time a route carries traffic.
    pub route_lifetime: f64,
    /// How long a (originator, rreq_id) pair stays in the duplicate cache.
    pub seen_lifetime: f64,
    /// Pending-packet buffer capacity per destination.
    pub pending_cap: usize,
    /// Hop budget for data packets.
    pub ttl_max: u32,
    /// Hop budget of the first, local discovery attempt (expanding-ring
    /// stage). Zero disables the ring and every attempt floods
    /// network-wide.
    pub ring_ttl: u32,
    /// First discovery attempt timeout; doubles per retry.
    pub discovery_timeout: f64,
    /// Total discovery attempts before entering holddown.
    pub discovery_attempts: u32,
    /// Holddown after a failed discovery round; doubles up to the cap.
    pub holddown_base: f64,
    pub holddown_max: f64,
    /// An RERR is re-propagated only for routes that forwarded data this
    /// recently, seconds.
    pub precursor_window: f64,
}

impl Default for RouterConfig {
    fn default() -> Self {
        RouterConfig {
            route_lifetime: 50.0,
            seen_lifetime: 3.0,
            pending_cap: 32,
            ttl_max: 32,
            ring_ttl: 2,
            discovery_timeout: 0.1,
            discovery_attempts: 2,
            holddown_base: 0.25,
            holddown_max: 0.5,
            precursor_window: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataDropReason {
    AttackerDropped,
    TtlExpired,
    NoRouteAtRelay,
    PendingEvicted,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RouterAction {
    Broadcast(Control),
    Unicast { to: NodeId, msg: Control },
    ForwardData { next_hop: NodeId, packet: DataPacket },
    DeliverData(DataPacket),
    DropData { packet: DataPacket, reason: DataDropReason },
    /// Ask the engine for a discovery timer; the token identifies the
    /// discovery episode so stale timers are ignored.
    ScheduleTimeout { dest: NodeId, token: u32, delay: f64 },
    /// An RREP could not be forwarded because no reverse route exists.
    RrepNoReverse,
}

/// How the node treats an incoming RREQ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RreqPolicy {
    Honest,
    /// Sinkhole/blackhole: answer with a forged high-sequence one-hop RREP.
    FakeReply { seq_boost: u32, fake_lifetime: f64 },
}

/// How the node treats a data packet it would relay.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataPolicy {
    Honest,
    /// Drop the packet (dropping/grayhole/blackhole attacker).
    Drop,
    /// Forward honestly; if no route exists, buffer the packet and run a
    /// normal route discovery instead of sending an RERR (sinkhole).
    BufferOnNoRoute,
}

#[derive(Debug, Clone, Copy)]
struct SeenEntry {
    expires: f64,
    best_hops: u32,
    /// Sequence number used for this flood's reply, when this node is the
    /// requested destination; re-replies for hop improvements reuse it.
    reply_seq: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum DiscoveryPhase {
    Active { attempt: u32, token: u32 },
    Holddown { until: f64, token: u32 },
}

#[derive(Debug)]
struct PendingBucket {
    queue: VecDeque<DataPacket>,
    phase: Option<DiscoveryPhase>,
    /// Next holddown duration after a failed round.
    next_holddown: f64,
}

impl PendingBucket {
    fn new(base_holddown: f64) -> Self {
        PendingBucket { queue: VecDeque::new(), phase: None, next_holddown: base_holddown }
    }
}

/// Per-node AODV state.
pub struct Router {
    pub id: NodeId,
    cfg: RouterConfig,
    seq: u32,
    next_rreq_id: u32,
    next_token: u32,
    routes: BTreeMap<NodeId, RouteEntry>,
    seen: BTreeMap<(NodeId, u32), SeenEntry>,
    pending: BTreeMap<NodeId, PendingBucket>,
    /// Mark own discoveries destination-only.
    pub dest_only_discovery: bool,
    /// Forged sequence numbers already issued per destination, so repeated
    /// fakes stay on one plateau instead of escalating every flood.
    fake_issued: BTreeMap<NodeId, u32>,
    /// Count of RREQ floods this node originated (protocol plus attack).
    pub rreqs_originated: u64,
}

impl Router {
    pub fn new(id: NodeId, cfg: RouterConfig) -> Self {
        Router {
            id,
            cfg,
            seq: 0,
            next_rreq_id: 0,
            next_token: 0,
            routes: BTreeMap::new(),
            seen: BTreeMap::new(),
            pending: BTreeMap::new(),
            dest_only_discovery: false,
            fake_issued: BTreeMap::new(),
            rreqs_originated: 0,
        }
    }

    pub fn route(&self, dest: NodeId) -> Option<&RouteEntry> {
        self.routes.get(&dest)
    }

    pub fn routes(&self) -> impl Iterator<Item = (&NodeId, &RouteEntry)> {
        self.routes.iter()
    }

    pub fn pending_len(&self, dest: NodeId) -> usize {
        self.pending.get(&dest).map_or(0, |b| b.queue.len())
    }

    /// Drains every buffered packet; used for end-of-run accounting.
    pub fn drain_pending(&mut self) -> Vec<DataPacket> {
        let mut out = Vec::new();
        for bucket in self.pending.values_mut() {
            out.extend(bucket.queue.drain(..));
        }
        out
    }

    fn fresh_token(&mut self) -> u32 {
        self.next_token += 1;
        self.next_token
    }

    /// Reverse/forward route learned from an RREQ that physically arrived
    /// via `from`: the path is current, so next hop and hop count are taken
    /// from the message; the sequence number only ever ratchets up.
    fn install_from_rreq(&mut self, now: f64, originator: NodeId, from: NodeId, hops: u32, orig_seq: u32) {
        let lifetime = self.cfg.route_lifetime;
        let entry = self.routes.entry(originator).or_insert(RouteEntry {
            next_hop: from,
            hop_count: hops,
            dest_seq: orig_seq,
            expiry: now + lifetime,
            valid: true,
            last_forward: f64::NEG_INFINITY,
        });
        entry.next_hop = from;
        entry.hop_count = hops;
        entry.dest_seq = entry.dest_seq.max(orig_seq);
        entry.expiry = now + lifetime;
        entry.valid = true;
    }

    /// Route selection: a candidate replaces the stored route iff its
    /// sequence number is strictly larger, or equal with a smaller hop
    /// count, or the stored route is unusable at the same freshness.
    fn consider_candidate(
        &mut self,
        now: f64,
        dest: NodeId,
        next_hop: NodeId,
        hops: u32,
        seq: u32,
        lifetime: f64,
    ) -> bool {
        let grant = lifetime.min(self.cfg.route_lifetime).max(0.0);
        let expiry = now + grant;
        match self.routes.get_mut(&dest) {
            None => {
                self.routes.insert(
                    dest,
                    RouteEntry {
                        next_hop,
                        hop_count: hops,
                        dest_seq: seq,
                        expiry,
                        valid: true,
                        last_forward: f64::NEG_INFINITY,
                    },
                );
                true
            }
            Some(stored) => {
                let replace = seq > stored.dest_seq
                    || (seq == stored.dest_seq
                        && (!stored.usable(now) || hops < stored.hop_count));
                if replace {
                    *stored = RouteEntry {
                        next_hop,
                        hop_count: hops,
                        dest_seq: seq,
                        expiry,
                        valid: true,
                        // The node keeps carrying this destination's traffic.
                        last_forward: stored.last_forward,
                    };
                }
                replace
            }
        }
    }

    /// Marks the entry as carrying traffic, for RERR propagation decisions.
    fn touch_forward(&mut self, now: f64, dest: NodeId) {
        if let Some(r) = self.routes.get_mut(&dest) {
            if r.valid {
                r.last_forward = now;
            }
        }
    }

    fn usable_route(&self, now: f64, dest: NodeId) -> Option<RouteEntry> {
        self.routes.get(&dest).copied().filter(|r| r.usable(now))
    }

    // ------------------------------------------------------------------
    // Origination
    // ------------------------------------------------------------------

    /// Application-level send: forward along an existing route or buffer the
    /// packet and start discovery.
    pub fn send_data(&mut self, now: f64, packet: DataPacket, out: &mut Vec<RouterAction>) {
        if packet.dst == self.id {
            out.push(RouterAction::DeliverData(packet));
            return;
        }
        if let Some(route) = self.usable_route(now, packet.dst) {
            self.touch_forward(now, packet.dst);
            out.push(RouterAction::ForwardData { next_hop: route.next_hop, packet });
            return;
        }
        self.buffer_and_discover(now, packet, out);
    }

    fn buffer_and_discover(&mut self, now: f64, packet: DataPacket, out: &mut Vec<RouterAction>) {
        let dest = packet.dst;
        let cap = self.cfg.pending_cap;
        let base = self.cfg.holddown_base;
        let bucket = self.pending.entry(dest).or_insert_with(|| PendingBucket::new(base));
        if bucket.queue.len() >= cap {
            let oldest = bucket.queue.pop_front().unwrap();
            out.push(RouterAction::DropData { packet: oldest, reason: DataDropReason::PendingEvicted });
        }
        bucket.queue.push_back(packet);

        match bucket.phase {
            Some(DiscoveryPhase::Active { .. }) => {}
            Some(DiscoveryPhase::Holddown { until, .. }) if now < until => {
                // Wake timer for this bucket is already scheduled.
            }
            _ => self.start_discovery(now, dest, 1, out),
        }
    }

    fn start_discovery(&mut self, now: f64, dest: NodeId, attempt: u32, out: &mut Vec<RouterAction>) {
        self.seq += 1;
        self.next_rreq_id += 1;
        let rreq_id = self.next_rreq_id;
        let last_known = self.routes.get(&dest).map_or(0, |r| r.dest_seq);
        // Ring stage: the first attempt stays local; retries go network-wide.
        let ttl = if attempt == 1 && self.cfg.ring_ttl > 0 {
            self.cfg.ring_ttl
        } else {
            self.cfg.ttl_max
        };
        let rreq = Rreq {
            originator: self.id,
            orig_seq: self.seq,
            rreq_id,
            destination: dest,
            last_known_dest_seq: last_known,
            hop_count: 0,
            ttl,
            dest_only: self.dest_only_discovery,
        };
        self.seen.insert(
            (self.id, rreq_id),
            SeenEntry { expires: now + self.cfg.seen_lifetime, best_hops: 0, reply_seq: None },
        );
        self.rreqs_originated += 1;
        let token = self.fresh_token();
        let bucket = self
            .pending
            .entry(dest)
            .or_insert_with(|| PendingBucket::new(self.cfg.holddown_base));
        bucket.phase = Some(DiscoveryPhase::Active { attempt, token });
        let delay = self.cfg.discovery_timeout * (1u32 << (attempt - 1)) as f64;
        out.push(RouterAction::Broadcast(Control::Rreq(rreq)));
        out.push(RouterAction::ScheduleTimeout { dest, token, delay });
    }

    /// Discovery timer fired. Stale tokens are ignored.
    pub fn on_timeout(&mut self, now: f64, dest: NodeId, token: u32, out: &mut Vec<RouterAction>) {
        let Some(bucket) = self.pending.get_mut(&dest) else { return };
        match bucket.phase {
            Some(DiscoveryPhase::Active { attempt, token: t }) if t == token => {
                if attempt < self.cfg.discovery_attempts {
                    self.start_discovery(now, dest, attempt + 1, out);
                } else {
                    // Round failed: hold down, keep the buffered packets, and
                    // wake up to retry if anything is still waiting.
                    let holddown = bucket.next_holddown;
                    bucket.next_holddown = (bucket.next_holddown * 2.0).min(self.cfg.holddown_max);
                    let token = self.next_token + 1;
                    self.next_token = token;
                    bucket.phase = Some(DiscoveryPhase::Holddown { until: now + holddown, token });
                    if !bucket.queue.is_empty() {
                        out.push(RouterAction::ScheduleTimeout { dest, token, delay: holddown });
                    }
                }
            }
            Some(DiscoveryPhase::Holddown { token: t, .. }) if t == token => {
                bucket.phase = None;
                if !bucket.queue.is_empty() {
                    self.start_discovery(now, dest, 1, out);
                }
            }
            _ => {}
        }
    }

    /// Route established for `dest`: flush buffered packets in order.
    fn flush_pending(&mut self, now: f64, dest: NodeId, out: &mut Vec<RouterAction>) {
        let Some(bucket) = self.pending.get_mut(&dest) else { return };
        if bucket.queue.is_empty() && bucket.phase.is_none() {
            return;
        }
        let Some(route) = self.routes.get(&dest).copied().filter(|r| r.usable(now)) else {
            return;
        };
        let drained: Vec<DataPacket> = bucket.queue.drain(..).collect();
        bucket.phase = None;
        bucket.next_holddown = self.cfg.holddown_base;
        for packet in drained {
            out.push(RouterAction::ForwardData { next_hop: route.next_hop, packet });
        }
        self.touch_forward(now, dest);
    }

    // ------------------------------------------------------------------
    // Message handlers
    // ------------------------------------------------------------------

    pub fn handle_rreq(
        &mut self,
        now: f64,
        rreq: &Rreq,
        from: NodeId,
        policy: RreqPolicy,
        out: &mut Vec<RouterAction>,
    ) {
        let key = (rreq.originator, rreq.rreq_id);
        let hops_here = rreq.hop_count + 1;
        let mut reply_seq_memo = None;
        match self.seen.get_mut(&key) {
            Some(entry) if entry.expires > now => {
                if hops_here < entry.best_hops {
                    // Shorter copy of a flood we already processed: take it,
                    // so reverse paths and replies converge to min-hop.
                    entry.best_hops = hops_here;
                    entry.expires = now + self.cfg.seen_lifetime;
                    reply_seq_memo = entry.reply_seq;
                } else {
                    return; // duplicate, silently discarded
                }
            }
            _ => {
                self.seen.insert(
                    key,
                    SeenEntry {
                        expires: now + self.cfg.seen_lifetime,
                        best_hops: hops_here,
                        reply_seq: None,
                    },
                );
            }
        }

        if rreq.originator == self.id {
            return;
        }

        self.install_from_rreq(now, rreq.originator, from, hops_here, rreq.orig_seq);
        self.flush_pending(now, rreq.originator, out);

        if let RreqPolicy::FakeReply { seq_boost, fake_lifetime } = policy {
            // Forged reply: a sequence number above anything the requester
            // has seen, one hop from the destination, with a short lifetime
            // so forged entries off the traffic path evaporate. The forged
            // number stays on one plateau per destination and is raised only
            // once the requesters have absorbed the previous plateau;
            // escalating on every flood would keep the whole network one
            // sequence epoch behind and strand forwarded traffic. No route
            // toward the destination is installed; the node keeps taking
            // part in the flood like any other relay, which is what keeps
            // its own table alive for forwarding attracted traffic.
            let issued = self.fake_issued.entry(rreq.destination).or_insert(0);
            if rreq.last_known_dest_seq + seq_boost > *issued {
                *issued = rreq.last_known_dest_seq + seq_boost;
            }
            let fake = Rrep {
                destination: rreq.destination,
                dest_seq: *issued,
                originator: rreq.originator,
                hop_count: 1,
                lifetime: fake_lifetime,
                tunneled: false,
            };
            out.push(RouterAction::Unicast { to: from, msg: Control::Rrep(fake) });
            if hops_here < rreq.ttl.min(self.cfg.ttl_max) {
                let mut fwd = *rreq;
                fwd.hop_count = hops_here;
                out.push(RouterAction::Broadcast(Control::Rreq(fwd)));
            }
            return;
        }

        if rreq.destination == self.id {
            let reply_seq = match reply_seq_memo {
                Some(seq) => seq,
                None => {
                    // Destination sequence number ratchets up to what the
                    // requester already knows but is not bumped further:
                    // gratuitous increments would stale every cached route
                    // in the network and defeat intermediate replies.
                    self.seq = self.seq.max(rreq.last_known_dest_seq);
                    let seq = self.seq;
                    self.seen.get_mut(&key).unwrap().reply_seq = Some(seq);
                    seq
                }
            };
            let rrep = Rrep {
                destination: self.id,
                dest_seq: reply_seq,
                originator: rreq.originator,
                hop_count: 0,
                lifetime: self.cfg.route_lifetime,
                tunneled: false,
            };
            out.push(RouterAction::Unicast { to: from, msg: Control::Rrep(rrep) });
            return;
        }

        if !rreq.dest_only {
            if let Some(route) = self.usable_route(now, rreq.destination) {
                if route.dest_seq >= rreq.last_known_dest_seq {
                    // Intermediate node with a fresh-enough route replies and
                    // swallows the flood.
                    let rrep = Rrep {
                        destination: rreq.destination,
                        dest_seq: route.dest_seq,
                        originator: rreq.originator,
                        hop_count: route.hop_count,
                        lifetime: route.expiry - now,
                tunneled: false,
                    };
                    out.push(RouterAction::Unicast { to: from, msg: Control::Rrep(rrep) });
                    return;
                }
            }
        }

        if hops_here < rreq.ttl.min(self.cfg.ttl_max) {
            let mut fwd = *rreq;
            fwd.hop_count = hops_here;
            out.push(RouterAction::Broadcast(Control::Rreq(fwd)));
        }
    }

    pub fn handle_rrep(&mut self, now: f64, rrep: &Rrep, from: NodeId, out: &mut Vec<RouterAction>) {
        if rrep.tunneled && rrep.originator != self.id {
            // In transit: pass it along toward the originator untouched.
            match self.usable_route(now, rrep.originator) {
                Some(reverse) => {
                    out.push(RouterAction::Unicast { to: reverse.next_hop, msg: Control::Rrep(*rrep) });
                }
                None => out.push(RouterAction::RrepNoReverse),
            }
            return;
        }
        let hops_here = rrep.hop_count + 1;
        let installed = self.consider_candidate(
            now,
            rrep.destination,
            from,
            hops_here,
            rrep.dest_seq,
            rrep.lifetime,
        );
        if installed {
            self.flush_pending(now, rrep.destination, out);
        }
        if rrep.originator == self.id {
            return;
        }
        // Forward toward the originator along the reverse route.
        match self.usable_route(now, rrep.originator) {
            Some(reverse) => {
                let mut fwd = *rrep;
                fwd.hop_count = hops_here;
                out.push(RouterAction::Unicast { to: reverse.next_hop, msg: Control::Rrep(fwd) });
            }
            None => out.push(RouterAction::RrepNoReverse),
        }
    }

    pub fn handle_rerr(&mut self, now: f64, rerr: &Rerr, from: NodeId, out: &mut Vec<RouterAction>) {
        let mut invalidated = Vec::new();
        let mut propagate = Vec::new();
        for &(dest, seq) in &rerr.unreachable {
            if let Some(route) = self.routes.get_mut(&dest) {
                if route.valid && route.next_hop == from {
                    route.valid = false;
                    route.dest_seq = route.dest_seq.max(seq);
                    invalidated.push(dest);
                    // Notify further only if this node recently carried
                    // traffic for the destination; idle caches have no
                    // precursors worth telling.
                    if now - route.last_forward <= self.cfg.precursor_window {
                        propagate.push((dest, route.dest_seq));
                    }
                }
            }
        }
        // Re-run discovery for destinations we still hold traffic for.
        for &dest in &invalidated {
            if self.pending.get(&dest).is_some_and(|b| !b.queue.is_empty()) {
                self.start_discovery(now, dest, 1, out);
            }
        }
        if !propagate.is_empty() {
            out.push(RouterAction::Broadcast(Control::Rerr(Rerr { unreachable: propagate })));
        }
    }

    /// A unicast toward `broken` failed: invalidate every route through it
    /// and notify the neighborhood.
    pub fn on_link_break(&mut self, now: f64, broken: NodeId, out: &mut Vec<RouterAction>) {
        let mut unreachable = Vec::new();
        for (&dest, route) in self.routes.iter_mut() {
            if route.valid && route.next_hop == broken {
                route.valid = false;
                unreachable.push((dest, route.dest_seq));
            }
        }
        if unreachable.is_empty() {
            return;
        }
        for &(dest, _) in &unreachable {
            if self.pending.get(&dest).is_some_and(|b| !b.queue.is_empty()) {
                self.start_discovery(now, dest, 1, out);
            }
        }
        out.push(RouterAction::Broadcast(Control::Rerr(Rerr { unreachable })));
    }

    /// A data frame arrived at this node from neighbor `from`.
    pub fn handle_data(
        &mut self,
        now: f64,
        mut packet: DataPacket,
        from: NodeId,
        policy: DataPolicy,
        out: &mut Vec<RouterAction>,
    ) {
        if packet.dst == self.id {
            out.push(RouterAction::DeliverData(packet));
            return;
        }
        if policy == DataPolicy::Drop {
            out.push(RouterAction::DropData { packet, reason: DataDropReason::AttackerDropped });
            return;
        }
        if packet.ttl <= 1 {
            // A spent hop budget is evidence of a forwarding loop; tear the
            // offending entry down and let the neighborhood know, so the
            // loop state decays instead of eating the whole flow.
            if let Some(route) = self.routes.get_mut(&packet.dst) {
                if route.valid {
                    route.valid = false;
                    let seq = route.dest_seq;
                    out.push(RouterAction::DropData { packet, reason: DataDropReason::TtlExpired });
                    out.push(RouterAction::Broadcast(Control::Rerr(Rerr {
                        unreachable: alloc::vec![(packet.dst, seq)],
                    })));
                    return;
                }
            }
            out.push(RouterAction::DropData { packet, reason: DataDropReason::TtlExpired });
            return;
        }
        packet.ttl -= 1;
        let mut split_horizon = false;
        if let Some(route) = self.usable_route(now, packet.dst) {
            if route.next_hop != from {
                self.touch_forward(now, packet.dst);
                out.push(RouterAction::ForwardData { next_hop: route.next_hop, packet });
                return;
            }
            // Split horizon: the route points straight back at the sender.
            // Consistent sequence numbers cannot produce this, so the entry
            // is poisoned or stale. Tear it down, tell the neighborhood,
            // and hold the packet while a fresh discovery runs.
            self.routes.get_mut(&packet.dst).unwrap().valid = false;
            split_horizon = true;
        }
        if split_horizon {
            let seq = self.routes.get(&packet.dst).map_or(0, |r| r.dest_seq);
            out.push(RouterAction::Broadcast(Control::Rerr(Rerr {
                unreachable: alloc::vec![(packet.dst, seq)],
            })));
            self.buffer_and_discover(now, packet, out);
            return;
        }
        match policy {
            DataPolicy::BufferOnNoRoute => self.buffer_and_discover(now, packet, out),
            _ => {
                let seq = self.routes.get(&packet.dst).map_or(0, |r| r.dest_seq);
                out.push(RouterAction::DropData { packet, reason: DataDropReason::NoRouteAtRelay });
                out.push(RouterAction::Broadcast(Control::Rerr(Rerr {
                    unreachable: alloc::vec![(packet.dst, seq)],
                })));
            }
        }
    }

    /// Crafts one attack RREQ with a fresh id (flooding attack burst
    /// element). No discovery state is created.
    pub fn craft_flood_rreq(&mut self, now: f64, dest: NodeId) -> Rreq {
        self.seq += 1;
        self.next_rreq_id += 1;
        let last_known = self.routes.get(&dest).map_or(0, |r| r.dest_seq);
        self.seen.insert(
            (self.id, self.next_rreq_id),
            SeenEntry { expires: now + self.cfg.seen_lifetime, best_hops: 0, reply_seq: None },
        );
        self.rreqs_originated += 1;
        Rreq {
            originator: self.id,
            orig_seq: self.seq,
            rreq_id: self.next_rreq_id,
            destination: dest,
            last_known_dest_seq: last_known,
            hop_count: 0,
            ttl: self.cfg.ttl_max,
            dest_only: false,
        }
    }
}
