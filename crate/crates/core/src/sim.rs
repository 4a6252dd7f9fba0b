//! Composition root: wires the event engine, mobility, medium, per-node
//! routers, attack overlays and traffic into one deterministic run.

use crate::adversary::{self, AttackConfig, AttackKind, Placement};
use crate::aodv::{
    Control, DataDropReason, DataPacket, DataPolicy, Leg, Router, RouterAction, RouterConfig,
    RreqPolicy,
};
use crate::engine::EventQueue;
use crate::medium::{
    in_range, neighbors, EnqueueOutcome, Frame, FrameKind, FramePayload, MediumConfig, NodeMedium,
};
use crate::mobility::{gmm_step, place_gbs, place_nodes, Bounds, MobilityConfig, MobilityState, Vec3};
use crate::rng::Rng;
use crate::trace::{TraceEvent, TraceSink};
use crate::workload::{setup_flows, Flow, FlowSetupError, Metrics, TrafficConfig};
use crate::NodeId;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Total node count, ground base station included when `has_gbs`.
    pub nodes: usize,
    pub bounds: Bounds,
    pub sim_time: f64,
    pub seed: u64,
    pub has_gbs: bool,
    pub mobility_enabled: bool,
    pub mobility: MobilityConfig,
    pub medium: MediumConfig,
    pub router: RouterConfig,
    pub attack: AttackConfig,
    pub traffic: TrafficConfig,
    /// Scripted flow endpoints, bypassing random assignment.
    pub explicit_flows: Option<Vec<(NodeId, NodeId)>>,
    /// Scripted static positions (length must equal `nodes`).
    pub explicit_positions: Option<Vec<Vec3>>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            nodes: 25,
            bounds: Bounds { x_max: 12000.0, y_max: 12000.0, z_max: 300.0 },
            sim_time: 1800.0,
            seed: 1,
            has_gbs: true,
            mobility_enabled: true,
            mobility: MobilityConfig::default(),
            medium: MediumConfig::default(),
            router: RouterConfig::default(),
            attack: AttackConfig::default(),
            traffic: TrafficConfig::default(),
            explicit_flows: None,
            explicit_positions: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BuildError {
    TooFewNodes(&'static str),
    FlowSetup(FlowSetupError),
    BadExplicitPositions { expected: usize, got: usize },
    BadExplicitFlow(&'static str),
    NoFlowsCanStart,
    EmptyAttackPool,
}

impl core::fmt::Display for BuildError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            BuildError::TooFewNodes(m) => write!(f, "too few nodes: {m}"),
            BuildError::FlowSetup(FlowSetupError::InsufficientNodes { have, need }) => {
                write!(f, "flow setup needs {need} UAVs, have {have}")
            }
            BuildError::BadExplicitPositions { expected, got } => {
                write!(f, "explicit positions: expected {expected}, got {got}")
            }
            BuildError::BadExplicitFlow(m) => write!(f, "explicit flow: {m}"),
            BuildError::NoFlowsCanStart => {
                write!(f, "simulation ends before any flow can start")
            }
            BuildError::EmptyAttackPool => write!(f, "no eligible attacker candidates"),
        }
    }
}

#[derive(Debug, Clone)]
enum Action {
    MobilityTick,
    FlowEmit { flow: u16 },
    TxTry { node: NodeId },
    TxFinish { node: NodeId },
    DeliverFrame { to: NodeId, from: NodeId, frame: Frame },
    DiscoveryTimeout { node: NodeId, dest: NodeId, token: u32 },
    FloodTick { node: NodeId },
    RouteSnapshot,
}

/// Result of one finished run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub metrics: Metrics,
    pub events_dispatched: u64,
    pub end_clock: f64,
    /// On-active-route placement found no relays and fell back to random.
    pub fallback_random_placement: bool,
    pub conservation_ok: bool,
    pub attackers: Vec<NodeId>,
}

pub struct Sim<'s> {
    cfg: SimConfig,
    n_total: usize,
    n_uav: usize,
    gbs: Option<NodeId>,
    queue: EventQueue<Action>,
    positions: Vec<Vec3>,
    mob_states: Vec<MobilityState>,
    routers: Vec<Router>,
    media: Vec<NodeMedium>,
    flows: Vec<Flow>,
    endpoints: BTreeSet<NodeId>,
    attackers: BTreeSet<NodeId>,
    /// Dropping attack: which flows each attacker sat on at the route
    /// snapshot; only those flows' packets are dropped.
    drop_targets: alloc::collections::BTreeMap<NodeId, BTreeSet<u16>>,
    attack_active: bool,
    fallback_random_placement: bool,
    metrics: Metrics,
    next_packet_id: u64,
    rng_mobility: Rng,
    rng_backoff: Rng,
    rng_attack_drop: Rng,
    rng_attack_flood: Rng,
    rng_attacker_select: Rng,
    sink: Option<&'s mut dyn TraceSink>,
}

impl<'s> Sim<'s> {
    pub fn new(cfg: SimConfig) -> Result<Self, BuildError> {
        Self::with_sink(cfg, None)
    }

    pub fn with_sink(
        cfg: SimConfig,
        sink: Option<&'s mut dyn TraceSink>,
    ) -> Result<Self, BuildError> {
        let n_total = cfg.nodes;
        let has_gbs = cfg.has_gbs;
        if n_total == 0 || (has_gbs && n_total < 2) {
            return Err(BuildError::TooFewNodes("need at least one UAV"));
        }
        let n_uav = n_total - has_gbs as usize;
        let gbs = has_gbs.then(|| NodeId::from_index(n_uav));

        if cfg.traffic.flow_count > 0 && cfg.traffic.start >= cfg.sim_time {
            return Err(BuildError::NoFlowsCanStart);
        }

        // Placement.
        let mut rng_placement = Rng::from_stream(cfg.seed, "placement");
        let (positions, mob_states) = match &cfg.explicit_positions {
            Some(p) => {
                if p.len() != n_total {
                    return Err(BuildError::BadExplicitPositions {
                        expected: n_total,
                        got: p.len(),
                    });
                }
                let states: Vec<MobilityState> = p[..n_uav]
                    .iter()
                    .map(|pos| MobilityState {
                        position: *pos,
                        speed: cfg.mobility.mean_speed,
                        direction: 0.0,
                        pitch: 0.0,
                        mean_speed: cfg.mobility.mean_speed,
                        mean_direction: 0.0,
                        mean_pitch: 0.0,
                        alpha: cfg.mobility.alpha,
                    })
                    .collect();
                (p.clone(), states)
            }
            None => {
                let states = place_nodes(n_uav, &cfg.mobility, &cfg.bounds, &mut rng_placement)
                    .map_err(|_| BuildError::TooFewNodes("need at least one UAV"))?;
                let mut positions: Vec<Vec3> = states.iter().map(|s| s.position).collect();
                if has_gbs {
                    positions.push(place_gbs(&cfg.bounds));
                }
                (positions, states)
            }
        };

        // Flows.
        let mut rng_traffic = Rng::from_stream(cfg.seed, "traffic");
        let flows: Vec<Flow> = match &cfg.explicit_flows {
            Some(pairs) => {
                let mut flows = Vec::with_capacity(pairs.len());
                for &(s, d) in pairs {
                    if s == d {
                        return Err(BuildError::BadExplicitFlow("source equals destination"));
                    }
                    if s.index() >= n_total || d.index() >= n_total {
                        return Err(BuildError::BadExplicitFlow("endpoint out of range"));
                    }
                    flows.push(Flow {
                        source: s,
                        destination: d,
                        rate: cfg.traffic.rate,
                        payload_bytes: cfg.traffic.payload_bytes,
                        start: cfg.traffic.start,
                        stop: cfg.traffic.stop.min(cfg.sim_time),
                    });
                }
                flows
            }
            None if cfg.traffic.flow_count == 0 => Vec::new(),
            None => {
                let uavs: Vec<NodeId> = (0..n_uav).map(NodeId::from_index).collect();
                let mut tcfg = cfg.traffic;
                tcfg.stop = cfg.traffic.stop.min(cfg.sim_time);
                setup_flows(&uavs, &tcfg, &mut rng_traffic).map_err(BuildError::FlowSetup)?
            }
        };

        let mut endpoints = BTreeSet::new();
        for f in &flows {
            endpoints.insert(f.source);
            endpoints.insert(f.destination);
        }

        let routers = (0..n_total)
            .map(|i| Router::new(NodeId::from_index(i), cfg.router))
            .collect();
        let media = (0..n_total).map(|_| NodeMedium::default()).collect();

        let mut sim = Sim {
            n_total,
            n_uav,
            gbs,
            queue: EventQueue::new(),
            positions,
            mob_states,
            routers,
            media,
            flows,
            endpoints,
            attackers: BTreeSet::new(),
            drop_targets: alloc::collections::BTreeMap::new(),
            attack_active: false,
            fallback_random_placement: false,
            metrics: Metrics::default(),
            next_packet_id: 0,
            rng_mobility: Rng::from_stream(cfg.seed, "mobility"),
            rng_backoff: Rng::from_stream(cfg.seed, "mac-backoff"),
            rng_attack_drop: Rng::from_stream(cfg.seed, "attack-drop"),
            rng_attack_flood: Rng::from_stream(cfg.seed, "attack-flood"),
            rng_attacker_select: Rng::from_stream(cfg.seed, "attacker-select"),
            sink,
            cfg,
        };

        sim.select_initial_attackers()?;
        sim.schedule_initial_events();
        Ok(sim)
    }

    fn is_attack_run(&self) -> bool {
        self.cfg.attack.kind != AttackKind::None && self.cfg.attack.attacker_ratio > 0.0
    }

    fn select_initial_attackers(&mut self) -> Result<(), BuildError> {
        if !self.is_attack_run() {
            return Ok(());
        }
        match self.cfg.attack.placement {
            Placement::Random => {
                let all: Vec<NodeId> = (0..self.n_uav).map(NodeId::from_index).collect();
                let mut excluded = self.endpoints.clone();
                if let Some(g) = self.gbs {
                    excluded.insert(g);
                }
                let order =
                    adversary::eligible_order(&all, &excluded, &mut self.rng_attacker_select);
                let set = adversary::select_attackers(
                    &order,
                    self.n_total,
                    self.cfg.attack.attacker_ratio,
                )
                .map_err(|_| BuildError::EmptyAttackPool)?;
                self.attackers = set;
                self.activate_attackers(0.0);
                // Randomly placed dropping attackers are chosen before any
                // route exists, so they are assigned no victim flows: the
                // attack engages only from an on-route position.
            }
            Placement::OnActiveRoute => {
                // Selection happens mid-run, once routes exist.
                self.queue
                    .schedule(self.cfg.attack.snapshot_time, Action::RouteSnapshot)
                    .expect("snapshot time is in the future");
            }
        }
        Ok(())
    }

    fn activate_attackers(&mut self, now: f64) {
        self.attack_active = true;
        if self.cfg.attack.kind == AttackKind::Sinkhole {
            // Sinkhole attackers forward attracted traffic but cannot trust
            // caches their own forgeries poisoned, so their re-discoveries
            // are destination-only.
            for id in self.attackers.iter() {
                self.routers[id.index()].dest_only_discovery = true;
            }
        }
        if self.cfg.attack.kind == AttackKind::Flooding {
            let start = self.cfg.attack.flood_start.max(now);
            if start < self.cfg.sim_time {
                let ids: Vec<NodeId> = self.attackers.iter().copied().collect();
                for node in ids {
                    self.queue
                        .schedule(start, Action::FloodTick { node })
                        .expect("flood start is in the future");
                }
            }
        }
    }

    fn schedule_initial_events(&mut self) {
        if self.cfg.mobility_enabled && self.n_uav > 0 {
            let dt = self.cfg.mobility.step_interval;
            if dt <= self.cfg.sim_time {
                self.queue.schedule(dt, Action::MobilityTick).unwrap();
            }
        }
        for (i, f) in self.flows.iter().enumerate() {
            if f.start < f.stop {
                self.queue
                    .schedule(f.start, Action::FlowEmit { flow: i as u16 })
                    .unwrap();
            }
        }
    }

    // ------------------------------------------------------------------
    // Accessors (used by the harness and tests)
    // ------------------------------------------------------------------

    pub fn now(&self) -> f64 {
        self.queue.now()
    }

    pub fn gbs(&self) -> Option<NodeId> {
        self.gbs
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    pub fn attackers(&self) -> &BTreeSet<NodeId> {
        &self.attackers
    }

    pub fn router(&self, node: NodeId) -> &Router {
        &self.routers[node.index()]
    }

    pub fn position(&self, node: NodeId) -> Vec3 {
        self.positions[node.index()]
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    pub fn medium_state(&self, node: NodeId) -> &NodeMedium {
        &self.media[node.index()]
    }

    /// Teleports a node (test scaffolding for scripted link breaks).
    pub fn set_position(&mut self, node: NodeId, p: Vec3) {
        self.positions[node.index()] = p;
        if node.index() < self.n_uav {
            self.mob_states[node.index()].position = p;
        }
    }

    // ------------------------------------------------------------------
    // Event loop
    // ------------------------------------------------------------------

    /// Dispatches every event with fire time <= t_end; the clock lands
    /// exactly on t_end.
    pub fn run_until(&mut self, t_end: f64) -> u64 {
        let before = self.queue.dispatched();
        while let Some((_, action)) = self.queue.pop_until(t_end) {
            self.dispatch(action);
        }
        self.queue.advance_to(t_end);
        self.queue.dispatched() - before
    }

    /// Runs to the configured end and closes the books.
    pub fn run(mut self) -> RunOutput {
        let t_end = self.cfg.sim_time;
        self.run_until(t_end);
        self.finalize()
    }

    pub fn finalize(mut self) -> RunOutput {
        // Packets still waiting on discovery.
        for r in self.routers.iter_mut() {
            self.metrics.pending_at_end += r.drain_pending().len() as u64;
        }
        // Packets sitting in transmit queues or on the air.
        for m in self.media.iter_mut() {
            for f in m.queue.drain(..) {
                if matches!(f.payload, FramePayload::Data(_)) {
                    self.metrics.in_flight_at_end += 1;
                }
            }
            if let Some((f, _)) = m.in_flight.take() {
                if matches!(f.payload, FramePayload::Data(_)) {
                    self.metrics.in_flight_at_end += 1;
                }
            }
        }
        self.metrics.rreqs_originated =
            self.routers.iter().map(|r| r.rreqs_originated).sum();
        let conservation_ok = self.metrics.conservation_balance() == 0;
        debug_assert!(conservation_ok, "packet conservation violated: {:?}", self.metrics);
        RunOutput {
            metrics: self.metrics,
            events_dispatched: self.queue.dispatched(),
            end_clock: self.queue.now(),
            fallback_random_placement: self.fallback_random_placement,
            conservation_ok,
            attackers: self.attackers.iter().copied().collect(),
        }
    }

    fn dispatch(&mut self, action: Action) {
        match action {
            Action::MobilityTick => self.on_mobility_tick(),
            Action::FlowEmit { flow } => self.on_flow_emit(flow),
            Action::TxTry { node } => self.on_tx_try(node),
            Action::TxFinish { node } => self.on_tx_finish(node),
            Action::DeliverFrame { to, from, frame } => self.deliver(to, from, frame),
            Action::DiscoveryTimeout { node, dest, token } => {
                let now = self.now();
                let mut acts = Vec::new();
                self.routers[node.index()].on_timeout(now, dest, token, &mut acts);
                self.apply_actions(node, acts);
            }
            Action::FloodTick { node } => self.on_flood_tick(node),
            Action::RouteSnapshot => self.on_route_snapshot(),
        }
    }

    fn on_mobility_tick(&mut self) {
        let now = self.now();
        for i in 0..self.n_uav {
            let next = gmm_step(
                &self.mob_states[i],
                &self.cfg.mobility,
                &self.cfg.bounds,
                &mut self.rng_mobility,
            );
            self.positions[i] = next.position;
            self.mob_states[i] = next;
        }
        if let Some(sink) = self.sink.as_deref_mut() {
            if sink.wants_positions() {
                for i in 0..self.n_uav {
                    let p = self.positions[i];
                    sink.record(&TraceEvent::Position {
                        t: now,
                        node: NodeId::from_index(i),
                        x: p.x,
                        y: p.y,
                        z: p.z,
                    });
                }
            }
            if sink.wants_routes() {
                for r in &self.routers {
                    for (dest, entry) in r.routes() {
                        sink.record(&TraceEvent::Route {
                            t: now,
                            node: r.id,
                            dest: *dest,
                            next_hop: entry.next_hop,
                            hops: entry.hop_count,
                            seq: entry.dest_seq,
                            valid: entry.valid,
                        });
                    }
                }
            }
        }
        let next = now + self.cfg.mobility.step_interval;
        if next <= self.cfg.sim_time {
            self.queue.schedule(next, Action::MobilityTick).unwrap();
        }
    }

    fn on_flow_emit(&mut self, flow_idx: u16) {
        let now = self.now();
        let flow = self.flows[flow_idx as usize];
        let packet = DataPacket {
            id: self.next_packet_id,
            leg: Leg::Flow,
            flow: flow_idx,
            src: flow.source,
            dst: flow.destination,
            sent_at: now,
            ttl: self.cfg.router.ttl_max,
        };
        self.next_packet_id += 1;
        self.metrics.app_packets_sent += 1;
        self.metrics.flow_leg_sent += 1;
        let mut acts = Vec::new();
        self.routers[flow.source.index()].send_data(now, packet, &mut acts);
        self.apply_actions(flow.source, acts);

        let next = now + 1.0 / flow.rate;
        if next < flow.stop {
            self.queue.schedule(next, Action::FlowEmit { flow: flow_idx }).unwrap();
        }
    }

    fn on_flood_tick(&mut self, node: NodeId) {
        if !self.attack_active || !self.attackers.contains(&node) {
            return;
        }
        if self.n_uav < 2 {
            return;
        }
        let now = self.now();
        // One random destination per burst, then `flood_burst` RREQs for it,
        // each with a fresh id so duplicate suppression cannot absorb them.
        let dest = if self.cfg.attack.flood_unknown_targets {
            NodeId::from_index(self.n_total + 1 + self.rng_attack_flood.int_range(0, 999) as usize)
        } else {
            // Uniform over UAVs, excluding the attacker itself.
            loop {
                let cand =
                    NodeId::from_index(self.rng_attack_flood.int_range(0, self.n_uav as u64 - 1)
                        as usize);
                if cand != node {
                    break cand;
                }
            }
        };
        for _ in 0..self.cfg.attack.flood_burst {
            let rreq = self.routers[node.index()].craft_flood_rreq(now, dest);
            self.enqueue_control(node, None, Control::Rreq(rreq));
        }
        let next = now + self.cfg.attack.flood_period;
        if next < self.cfg.sim_time {
            self.queue.schedule(next, Action::FloodTick { node }).unwrap();
        }
    }

    /// Walks the installed route of one flow leg, returning the relay nodes
    /// between the endpoints.
    fn walk_chain(&self, src: NodeId, dst: NodeId) -> Vec<NodeId> {
        let now = self.now();
        let mut relays = Vec::new();
        let mut at = src;
        for _ in 0..self.cfg.router.ttl_max {
            let Some(route) = self.routers[at.index()].route(dst).filter(|r| r.usable(now))
            else {
                break;
            };
            let hop = route.next_hop;
            if hop == dst {
                break;
            }
            relays.push(hop);
            at = hop;
        }
        relays
    }

    /// Relay nodes per flow at this instant: the flow leg plus its GBS
    /// continuation.
    fn relay_chains(&self) -> Vec<(u16, Vec<NodeId>)> {
        let mut out = Vec::with_capacity(self.flows.len());
        for (i, f) in self.flows.iter().enumerate() {
            let mut relays = self.walk_chain(f.source, f.destination);
            if self.cfg.traffic.gbs_leg {
                if let Some(g) = self.gbs {
                    relays.extend(self.walk_chain(f.destination, g));
                }
            }
            out.push((i as u16, relays));
        }
        out
    }

    /// Nodes currently serving as next hop on any installed route of any
    /// active flow, excluding endpoints and the GBS.
    pub fn snapshot_active_relays(&self) -> BTreeSet<NodeId> {
        let mut relays: BTreeSet<NodeId> =
            self.relay_chains().into_iter().flat_map(|(_, c)| c).collect();
        for f in &self.flows {
            relays.remove(&f.source);
            relays.remove(&f.destination);
        }
        if let Some(g) = self.gbs {
            relays.remove(&g);
        }
        relays
    }

    fn on_route_snapshot(&mut self) {
        if self.cfg.attack.placement == Placement::OnActiveRoute && !self.attack_active {
            self.select_route_attackers();
        }
        if self.cfg.attack.kind == AttackKind::Dropping {
            // Freeze each dropping attacker's victim flows: exactly the
            // flows whose active route it sits on right now. Mobility will
            // later carry attackers off these routes; the assignment stays.
            let chains = self.relay_chains();
            for (flow, relays) in chains {
                for node in relays {
                    if self.attackers.contains(&node) {
                        self.drop_targets.entry(node).or_default().insert(flow);
                    }
                }
            }
        }
    }

    fn select_route_attackers(&mut self) {
        let now = self.now();
        let relays = self.snapshot_active_relays();
        let all: Vec<NodeId> = (0..self.n_uav).map(NodeId::from_index).collect();
        let mut excluded = self.endpoints.clone();
        if let Some(g) = self.gbs {
            excluded.insert(g);
        }
        let order = if relays.is_empty() {
            self.fallback_random_placement = true;
            adversary::eligible_order(&all, &excluded, &mut self.rng_attacker_select)
        } else {
            // Relays first (shuffled), then the rest of the eligible pool as
            // spill-over when the requested count exceeds the relay set.
            let mut head: Vec<NodeId> = relays.iter().copied().collect();
            self.rng_attacker_select.shuffle(&mut head);
            let mut tail: Vec<NodeId> = all
                .iter()
                .copied()
                .filter(|n| !excluded.contains(n) && !relays.contains(n))
                .collect();
            self.rng_attacker_select.shuffle(&mut tail);
            head.extend(tail);
            head
        };
        match adversary::select_attackers(&order, self.n_total, self.cfg.attack.attacker_ratio) {
            Ok(set) => {
                self.attackers = set;
                self.activate_attackers(now);
            }
            Err(_) => {
                // Nothing eligible at all; the run continues unattacked.
                self.fallback_random_placement = true;
            }
        }
    }

    // ------------------------------------------------------------------
    // Medium
    // ------------------------------------------------------------------

    fn trace_frame(&mut self, node: NodeId, event: &'static str, kind: FrameKind, size: u32) {
        let now = self.queue.now();
        if let Some(sink) = self.sink.as_deref_mut() {
            if sink.wants_frames() {
                sink.record(&TraceEvent::Frame { t: now, node, event, kind, size_bytes: size });
            }
        }
    }

    fn enqueue_frame(&mut self, node: NodeId, frame: Frame) {
        let kind = frame.payload.kind();
        let size = frame.size_bytes;
        let capacity = self.cfg.medium.queue_capacity;
        let payload = frame.payload.clone();
        match self.media[node.index()].offer(frame, capacity) {
            EnqueueOutcome::Accepted => {
                self.trace_frame(node, "enqueue", kind, size);
                self.kick_pump(node);
            }
            EnqueueOutcome::DroppedOverflow => {
                self.trace_frame(node, "drop_overflow", kind, size);
                match payload {
                    FramePayload::Data(_) => self.metrics.dropped_overflow += 1,
                    FramePayload::Control(_) => self.metrics.control_dropped_overflow += 1,
                }
            }
        }
    }

    fn enqueue_control(&mut self, node: NodeId, dst: Option<NodeId>, msg: Control) {
        let kind = match &msg {
            Control::Rreq(_) => FrameKind::Rreq,
            Control::Rrep(_) => FrameKind::Rrep,
            Control::Rerr(_) => FrameKind::Rerr,
        };
        let size = self.cfg.medium.control_frame_bytes(kind);
        let frame = Frame {
            link_src: node,
            link_dst: dst,
            size_bytes: size,
            payload: FramePayload::Control(msg),
            enqueue_time: self.now(),
        };
        self.enqueue_frame(node, frame);
    }

    fn enqueue_data(&mut self, node: NodeId, next_hop: NodeId, packet: DataPacket) {
        let size = self.cfg.medium.data_frame_bytes(self.cfg.traffic.payload_bytes);
        let frame = Frame {
            link_src: node,
            link_dst: Some(next_hop),
            size_bytes: size,
            payload: FramePayload::Data(packet),
            enqueue_time: self.now(),
        };
        self.enqueue_frame(node, frame);
    }

    fn kick_pump(&mut self, node: NodeId) {
        let now = self.now();
        let m = &mut self.media[node.index()];
        if m.pump_active {
            return;
        }
        m.pump_active = true;
        let at = m.busy_until.max(now);
        self.queue.schedule(at, Action::TxTry { node }).unwrap();
    }

    /// Latest busy-until instant among in-range transmitters, if any.
    fn channel_busy_until(&self, node: NodeId, now: f64) -> Option<f64> {
        let me = &self.positions[node.index()];
        let range = self.cfg.medium.range;
        let mut latest = None;
        for i in 0..self.n_total {
            if i == node.index() {
                continue;
            }
            if self.media[i].transmitting(now) && in_range(me, &self.positions[i], range) {
                let until = self.media[i].busy_until;
                if latest.is_none_or(|l| until > l) {
                    latest = Some(until);
                }
            }
        }
        latest
    }

    fn on_tx_try(&mut self, node: NodeId) {
        let now = self.now();
        if self.media[node.index()].queue.is_empty() {
            self.media[node.index()].pump_active = false;
            return;
        }
        let busy_until = self.media[node.index()].busy_until;
        if now < busy_until {
            self.queue.schedule(busy_until, Action::TxTry { node }).unwrap();
            return;
        }
        if let Some(busy_until) = self.channel_busy_until(node, now) {
            // Carrier sensed busy: wait out the current occupancy, then
            // contend with a uniform nonzero backoff.
            let backoff = self.rng_backoff.uniform_open0(self.cfg.medium.backoff_max);
            self.queue.schedule(busy_until + backoff, Action::TxTry { node }).unwrap();
            return;
        }
        let frame = self.media[node.index()].queue.pop_front().unwrap();
        let airtime = self.cfg.medium.airtime(frame.size_bytes);
        let recipients = match frame.link_dst {
            None => neighbors(node, &self.positions, self.cfg.medium.range),
            Some(_) => Vec::new(),
        };
        self.trace_frame(node, "tx", frame.payload.kind(), frame.size_bytes);
        let m = &mut self.media[node.index()];
        m.busy_until = now + airtime + self.cfg.medium.frame_overhead;
        m.airtime_used += airtime;
        m.transmitted += 1;
        m.in_flight = Some((frame, recipients));
        self.queue.schedule(now + airtime, Action::TxFinish { node }).unwrap();
    }

    fn on_tx_finish(&mut self, node: NodeId) {
        let now = self.now();
        let (frame, recipients) = self.media[node.index()]
            .in_flight
            .take()
            .expect("TxFinish without a frame on the air");
        match frame.link_dst {
            None => {
                for to in recipients {
                    if self.cfg.medium.propagation {
                        let dist = self.positions[node.index()].distance(&self.positions[to.index()]);
                        let at = now + dist / 299_792_458.0;
                        self.queue
                            .schedule(at, Action::DeliverFrame { to, from: node, frame: frame.clone() })
                            .unwrap();
                    } else {
                        self.deliver(to, node, frame.clone());
                    }
                }
            }
            Some(dst) => {
                let reachable = in_range(
                    &self.positions[node.index()],
                    &self.positions[dst.index()],
                    self.cfg.medium.range,
                );
                if reachable {
                    if self.cfg.medium.propagation {
                        let dist = self.positions[node.index()].distance(&self.positions[dst.index()]);
                        let at = now + dist / 299_792_458.0;
                        self.queue
                            .schedule(at, Action::DeliverFrame { to: dst, from: node, frame })
                            .unwrap();
                    } else {
                        self.deliver(dst, node, frame);
                    }
                } else {
                    // Unicast target drifted out of range: the frame is lost
                    // and routing learns about the broken link.
                    self.media[node.index()].lost_range += 1;
                    self.trace_frame(node, "lost_range", frame.payload.kind(), frame.size_bytes);
                    match frame.payload {
                        FramePayload::Data(_) => self.metrics.lost_range += 1,
                        FramePayload::Control(_) => self.metrics.control_lost_range += 1,
                    }
                    let mut acts = Vec::new();
                    self.routers[node.index()].on_link_break(now, dst, &mut acts);
                    self.apply_actions(node, acts);
                }
            }
        }
        // Pump the next frame once the inter-frame gap has elapsed.
        let busy_until = self.media[node.index()].busy_until;
        if self.media[node.index()].queue.is_empty() {
            self.media[node.index()].pump_active = false;
        } else {
            self.queue.schedule(busy_until.max(now), Action::TxTry { node }).unwrap();
        }
    }

    // ------------------------------------------------------------------
    // Reception
    // ------------------------------------------------------------------

    fn rreq_policy(&self, to: NodeId, rreq: &crate::aodv::Rreq) -> RreqPolicy {
        if self.attack_active
            && matches!(self.cfg.attack.kind, AttackKind::Sinkhole | AttackKind::Blackhole)
            && self.attackers.contains(&to)
            && !self.attackers.contains(&rreq.originator)
        {
            RreqPolicy::FakeReply {
                seq_boost: self.cfg.attack.seq_boost,
                fake_lifetime: self.cfg.attack.fake_lifetime,
            }
        } else {
            RreqPolicy::Honest
        }
    }

    fn data_policy(&mut self, to: NodeId, packet: &DataPacket) -> DataPolicy {
        if !self.attack_active || !self.attackers.contains(&to) || packet.dst == to {
            return DataPolicy::Honest;
        }
        match self.cfg.attack.kind {
            AttackKind::Blackhole => DataPolicy::Drop,
            AttackKind::Dropping => {
                // Drops only hit the flows this attacker was sitting on at
                // the route snapshot; off-route attackers stay harmless.
                let targeted = self
                    .drop_targets
                    .get(&to)
                    .is_some_and(|flows| flows.contains(&packet.flow));
                if targeted
                    && adversary::should_drop(
                        self.cfg.attack.drop_probability,
                        &mut self.rng_attack_drop,
                    )
                {
                    DataPolicy::Drop
                } else {
                    DataPolicy::Honest
                }
            }
            AttackKind::Sinkhole => DataPolicy::BufferOnNoRoute,
            _ => DataPolicy::Honest,
        }
    }

    fn deliver(&mut self, to: NodeId, from: NodeId, frame: Frame) {
        let now = self.now();
        self.trace_frame(to, "rx", frame.payload.kind(), frame.size_bytes);
        let mut acts = Vec::new();
        match frame.payload {
            FramePayload::Data(packet) => {
                self.metrics.data_received += 1;
                let policy = self.data_policy(to, &packet);
                self.routers[to.index()].handle_data(now, packet, from, policy, &mut acts);
            }
            FramePayload::Control(ctrl) => {
                self.metrics.control_received += 1;
                match ctrl {
                    Control::Rreq(rreq) => {
                        self.metrics.rreq_received += 1;
                        let policy = self.rreq_policy(to, &rreq);
                        self.routers[to.index()].handle_rreq(now, &rreq, from, policy, &mut acts);
                    }
                    Control::Rrep(rrep) => {
                        self.metrics.rrep_received += 1;
                        self.routers[to.index()].handle_rrep(now, &rrep, from, &mut acts);
                    }
                    Control::Rerr(rerr) => {
                        self.metrics.rerr_received += 1;
                        self.routers[to.index()].handle_rerr(now, &rerr, from, &mut acts);
                    }
                }
            }
        }
        self.apply_actions(to, acts);
    }

    fn apply_actions(&mut self, node: NodeId, actions: Vec<RouterAction>) {
        let now = self.now();
        for act in actions {
            match act {
                RouterAction::Broadcast(msg) => self.enqueue_control(node, None, msg),
                RouterAction::Unicast { to, msg } => self.enqueue_control(node, Some(to), msg),
                RouterAction::ForwardData { next_hop, packet } => {
                    self.enqueue_data(node, next_hop, packet)
                }
                RouterAction::DeliverData(packet) => self.on_app_delivery(node, packet),
                RouterAction::DropData { reason, .. } => match reason {
                    DataDropReason::AttackerDropped => self.metrics.dropped_by_attacker += 1,
                    DataDropReason::TtlExpired => self.metrics.ttl_expired += 1,
                    DataDropReason::NoRouteAtRelay => self.metrics.no_route_dropped += 1,
                    DataDropReason::PendingEvicted => self.metrics.pending_evicted += 1,
                },
                RouterAction::ScheduleTimeout { dest, token, delay } => {
                    self.queue
                        .schedule(now + delay, Action::DiscoveryTimeout { node, dest, token })
                        .unwrap();
                }
                RouterAction::RrepNoReverse => self.metrics.rrep_no_reverse += 1,
            }
        }
    }

    fn on_app_delivery(&mut self, node: NodeId, packet: DataPacket) {
        let now = self.now();
        let delay = now - packet.sent_at;
        self.metrics.app_packets_received += 1;
        self.metrics.delay_sum += delay;
        if packet.leg == Leg::Flow {
            self.metrics.flow_leg_received += 1;
            self.metrics.flow_leg_delay_sum += delay;
            // The destination aggregates and relays one packet to the GBS.
            if self.cfg.traffic.gbs_leg {
                if let Some(gbs) = self.gbs {
                    if node != gbs {
                        let relay = DataPacket {
                            id: self.next_packet_id,
                            leg: Leg::Gbs,
                            flow: packet.flow,
                            src: node,
                            dst: gbs,
                            sent_at: now,
                            ttl: self.cfg.router.ttl_max,
                        };
                        self.next_packet_id += 1;
                        self.metrics.app_packets_sent += 1;
                        let mut acts = Vec::new();
                        self.routers[node.index()].send_data(now, relay, &mut acts);
                        self.apply_actions(node, acts);
                    }
                }
            }
        }
    }
}
