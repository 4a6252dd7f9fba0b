//! Scenario configuration: a flat key = value text format that fully
//! determines one run (or, with `seeds`/`densities` lists, a sweep cell
//! family). Unknown keys and malformed values are reported with their line
//! numbers so experiment files stay diff-able and debuggable.

use fanetsim_core::adversary::{AttackConfig, AttackKind, Placement};
use fanetsim_core::aodv::RouterConfig;
use fanetsim_core::medium::MediumConfig;
use fanetsim_core::mobility::{Bounds, MobilityConfig};
use fanetsim_core::sim::SimConfig;
use fanetsim_core::workload::TrafficConfig;
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    // Topology and run length.
    pub nodes: usize,
    pub area_x: f64,
    pub area_y: f64,
    pub area_z: f64,
    pub sim_time_s: f64,
    pub seed: u64,
    pub has_gbs: bool,
    // Mobility.
    pub mobility: bool,
    pub avg_speed_mps: f64,
    pub alpha: f64,
    pub step_interval_s: f64,
    pub speed_sd: f64,
    pub direction_sd_rad: f64,
    pub pitch_sd_rad: f64,
    // Medium.
    pub range_m: f64,
    pub bitrate_bps: f64,
    pub queue_capacity: usize,
    pub backoff_max_s: f64,
    pub frame_overhead_s: f64,
    pub propagation: bool,
    pub link_header_bytes: u32,
    pub rreq_bytes: u32,
    pub rrep_bytes: u32,
    pub rerr_bytes: u32,
    // Routing.
    pub route_lifetime_s: f64,
    pub seen_lifetime_s: f64,
    pub pending_cap: usize,
    pub ttl_max: u32,
    pub ring_ttl: u32,
    pub discovery_timeout_s: f64,
    pub discovery_attempts: u32,
    pub holddown_base_s: f64,
    pub holddown_max_s: f64,
    pub precursor_window_s: f64,
    // Traffic.
    pub flows: usize,
    pub packet_rate_pps: f64,
    pub packet_bytes: u32,
    pub traffic_start_s: f64,
    pub traffic_stop_s: Option<f64>,
    pub gbs_leg: bool,
    // Attack.
    pub attack: AttackKind,
    pub attacker_ratio: f64,
    pub placement: Placement,
    pub drop_probability: f64,
    pub seq_boost: u32,
    pub fake_lifetime_s: f64,
    pub flood_burst: u32,
    pub flood_period_s: f64,
    pub flood_start_s: f64,
    pub snapshot_time_s: f64,
    pub flood_unknown_targets: bool,
    // Sweep spec (harness level).
    pub seeds: Vec<u64>,
    pub densities: Vec<usize>,
    pub alpha_start: f64,
    pub alpha_step: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let med = MediumConfig::default();
        let rt = RouterConfig::default();
        let atk = AttackConfig::default();
        ScenarioConfig {
            nodes: 25,
            area_x: 12000.0,
            area_y: 12000.0,
            area_z: 300.0,
            sim_time_s: 1800.0,
            seed: 1,
            has_gbs: true,
            mobility: true,
            avg_speed_mps: 100.0,
            alpha: 0.25,
            step_interval_s: 1.0,
            speed_sd: 20.0,
            direction_sd_rad: 0.3,
            pitch_sd_rad: 0.05,
            range_m: med.range,
            bitrate_bps: 11.0e6,
            queue_capacity: med.queue_capacity,
            backoff_max_s: med.backoff_max,
            frame_overhead_s: med.frame_overhead,
            propagation: false,
            link_header_bytes: med.link_header_bytes,
            rreq_bytes: med.rreq_bytes,
            rrep_bytes: med.rrep_bytes,
            rerr_bytes: med.rerr_bytes,
            route_lifetime_s: rt.route_lifetime,
            seen_lifetime_s: rt.seen_lifetime,
            pending_cap: rt.pending_cap,
            ttl_max: rt.ttl_max,
            ring_ttl: rt.ring_ttl,
            discovery_timeout_s: rt.discovery_timeout,
            discovery_attempts: rt.discovery_attempts,
            holddown_base_s: rt.holddown_base,
            holddown_max_s: rt.holddown_max,
            precursor_window_s: rt.precursor_window,
            flows: 10,
            packet_rate_pps: 1.0,
            packet_bytes: 512,
            traffic_start_s: 10.0,
            traffic_stop_s: None,
            gbs_leg: true,
            attack: AttackKind::None,
            attacker_ratio: 0.0,
            placement: Placement::Random,
            drop_probability: 1.0,
            seq_boost: atk.seq_boost,
            fake_lifetime_s: atk.fake_lifetime,
            flood_burst: atk.flood_burst,
            flood_period_s: atk.flood_period,
            flood_start_s: atk.flood_start,
            snapshot_time_s: atk.snapshot_time,
            flood_unknown_targets: false,
            seeds: (1..=10).collect(),
            densities: vec![25, 50],
            alpha_start: 0.25,
            alpha_step: 0.05,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError {
    pub problems: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.problems {
            writeln!(f, "{p}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "on" | "true" | "yes" | "1" => Some(true),
        "off" | "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

fn parse_attack(v: &str) -> Option<AttackKind> {
    match v {
        "none" => Some(AttackKind::None),
        "sinkhole" => Some(AttackKind::Sinkhole),
        "dropping" => Some(AttackKind::Dropping),
        "blackhole" => Some(AttackKind::Blackhole),
        "flooding" => Some(AttackKind::Flooding),
        _ => None,
    }
}

fn parse_placement(v: &str) -> Option<Placement> {
    match v {
        "random" => Some(Placement::Random),
        "on_active_route" => Some(Placement::OnActiveRoute),
        _ => None,
    }
}

fn parse_list<T: std::str::FromStr>(v: &str) -> Option<Vec<T>> {
    v.split(',').map(|s| s.trim().parse::<T>().ok()).collect()
}

impl ScenarioConfig {
    /// Parses the flat key = value format. Lines starting with `#` and blank
    /// lines are ignored. Every problem is collected with its line number.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ScenarioConfig::default();
        let mut problems = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                problems.push(format!("line {lineno}: expected `key = value`, got `{line}`"));
                continue;
            };
            let key = key.trim();
            let value = value.trim();
            if let Err(msg) = cfg.set(key, value) {
                problems.push(format!("line {lineno}: {msg}"));
            }
        }
        let semantic = cfg.validate();
        problems.extend(semantic);
        if problems.is_empty() {
            Ok(cfg)
        } else {
            Err(ConfigError { problems })
        }
    }

    /// Applies one key/value pair; used by both the parser and CLI overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        macro_rules! num {
            ($field:expr) => {
                match value.parse() {
                    Ok(v) => $field = v,
                    Err(_) => return Err(format!("invalid value `{value}` for `{key}`")),
                }
            };
        }
        macro_rules! flag {
            ($field:expr) => {
                match parse_bool(value) {
                    Some(v) => $field = v,
                    None => return Err(format!("invalid flag `{value}` for `{key}` (on/off)")),
                }
            };
        }
        match key {
            "nodes" => num!(self.nodes),
            "area_x" => num!(self.area_x),
            "area_y" => num!(self.area_y),
            "area_z" => num!(self.area_z),
            "sim_time_s" => num!(self.sim_time_s),
            "seed" => num!(self.seed),
            "has_gbs" => flag!(self.has_gbs),
            "mobility" => flag!(self.mobility),
            "avg_speed_mps" => num!(self.avg_speed_mps),
            "alpha" => num!(self.alpha),
            "step_interval_s" => num!(self.step_interval_s),
            "speed_sd" => num!(self.speed_sd),
            "direction_sd_rad" => num!(self.direction_sd_rad),
            "pitch_sd_rad" => num!(self.pitch_sd_rad),
            "range_m" => num!(self.range_m),
            "bitrate_bps" => num!(self.bitrate_bps),
            "queue_capacity" => num!(self.queue_capacity),
            "backoff_max_s" => num!(self.backoff_max_s),
            "frame_overhead_s" => num!(self.frame_overhead_s),
            "propagation" => flag!(self.propagation),
            "link_header_bytes" => num!(self.link_header_bytes),
            "rreq_bytes" => num!(self.rreq_bytes),
            "rrep_bytes" => num!(self.rrep_bytes),
            "rerr_bytes" => num!(self.rerr_bytes),
            "route_lifetime_s" => num!(self.route_lifetime_s),
            "seen_lifetime_s" => num!(self.seen_lifetime_s),
            "pending_cap" => num!(self.pending_cap),
            "ttl_max" => num!(self.ttl_max),
            "ring_ttl" => num!(self.ring_ttl),
            "discovery_timeout_s" => num!(self.discovery_timeout_s),
            "discovery_attempts" => num!(self.discovery_attempts),
            "holddown_base_s" => num!(self.holddown_base_s),
            "holddown_max_s" => num!(self.holddown_max_s),
            "precursor_window_s" => num!(self.precursor_window_s),
            "flows" => num!(self.flows),
            "packet_rate_pps" => num!(self.packet_rate_pps),
            "packet_bytes" => num!(self.packet_bytes),
            "traffic_start_s" => num!(self.traffic_start_s),
            "traffic_stop_s" => {
                if value == "sim_end" {
                    self.traffic_stop_s = None;
                } else {
                    match value.parse() {
                        Ok(v) => self.traffic_stop_s = Some(v),
                        Err(_) => return Err(format!("invalid value `{value}` for `{key}`")),
                    }
                }
            }
            "gbs_leg" => flag!(self.gbs_leg),
            "attack" => match parse_attack(value) {
                Some(a) => self.attack = a,
                None => return Err(format!("unknown attack `{value}`")),
            },
            "attacker_ratio" => num!(self.attacker_ratio),
            "placement" => match parse_placement(value) {
                Some(p) => self.placement = p,
                None => return Err(format!("unknown placement `{value}`")),
            },
            "drop_probability" => num!(self.drop_probability),
            "seq_boost" => num!(self.seq_boost),
            "fake_lifetime_s" => num!(self.fake_lifetime_s),
            "flood_burst" => num!(self.flood_burst),
            "flood_period_s" => num!(self.flood_period_s),
            "flood_start_s" => num!(self.flood_start_s),
            "snapshot_time_s" => num!(self.snapshot_time_s),
            "flood_unknown_targets" => flag!(self.flood_unknown_targets),
            "seeds" => match parse_list(value) {
                Some(v) => self.seeds = v,
                None => return Err(format!("invalid seed list `{value}`")),
            },
            "densities" => match parse_list(value) {
                Some(v) => self.densities = v,
                None => return Err(format!("invalid density list `{value}`")),
            },
            "alpha_start" => num!(self.alpha_start),
            "alpha_step" => num!(self.alpha_step),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    /// Semantic validation; returns one message per problem.
    pub fn validate(&self) -> Vec<String> {
        let mut problems = Vec::new();
        if self.nodes < 2 && self.has_gbs {
            problems.push("key `nodes`: need at least 1 UAV besides the GBS".into());
        }
        if self.flows > 0 && self.traffic_start_s >= self.sim_time_s {
            problems.push(format!(
                "key `sim_time_s`: simulation ends at {}s before any flow can start (traffic_start_s = {}s)",
                self.sim_time_s, self.traffic_start_s
            ));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            problems.push(format!("key `alpha`: {} outside [0, 1]", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.attacker_ratio) {
            problems.push(format!(
                "key `attacker_ratio`: {} outside [0, 1]",
                self.attacker_ratio
            ));
        }
        if !(0.0..=1.0).contains(&self.drop_probability) {
            problems.push(format!(
                "key `drop_probability`: {} outside [0, 1]",
                self.drop_probability
            ));
        }
        if self.range_m <= 0.0 {
            problems.push("key `range_m`: must be positive".into());
        }
        if self.bitrate_bps <= 0.0 {
            problems.push("key `bitrate_bps`: must be positive".into());
        }
        if self.queue_capacity == 0 {
            problems.push("key `queue_capacity`: must be at least 1".into());
        }
        if self.step_interval_s <= 0.0 {
            problems.push("key `step_interval_s`: must be positive".into());
        }
        if self.flood_burst == 0 {
            problems.push("key `flood_burst`: must be at least 1".into());
        }
        if self.flood_period_s <= 0.0 {
            problems.push("key `flood_period_s`: must be positive".into());
        }
        problems
    }

    /// Canonical text form; parsing it back yields the same configuration.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        s.push_str("# fanetsim scenario\n");
        let mut kv = |k: &str, v: String| {
            s.push_str(k);
            s.push_str(" = ");
            s.push_str(&v);
            s.push('\n');
        };
        kv("nodes", self.nodes.to_string());
        kv("area_x", fmt_f64(self.area_x));
        kv("area_y", fmt_f64(self.area_y));
        kv("area_z", fmt_f64(self.area_z));
        kv("sim_time_s", fmt_f64(self.sim_time_s));
        kv("seed", self.seed.to_string());
        kv("has_gbs", onoff(self.has_gbs));
        kv("mobility", onoff(self.mobility));
        kv("avg_speed_mps", fmt_f64(self.avg_speed_mps));
        kv("alpha", fmt_f64(self.alpha));
        kv("step_interval_s", fmt_f64(self.step_interval_s));
        kv("speed_sd", fmt_f64(self.speed_sd));
        kv("direction_sd_rad", fmt_f64(self.direction_sd_rad));
        kv("pitch_sd_rad", fmt_f64(self.pitch_sd_rad));
        kv("range_m", fmt_f64(self.range_m));
        kv("bitrate_bps", fmt_f64(self.bitrate_bps));
        kv("queue_capacity", self.queue_capacity.to_string());
        kv("backoff_max_s", fmt_f64(self.backoff_max_s));
        kv("frame_overhead_s", fmt_f64(self.frame_overhead_s));
        kv("propagation", onoff(self.propagation));
        kv("link_header_bytes", self.link_header_bytes.to_string());
        kv("rreq_bytes", self.rreq_bytes.to_string());
        kv("rrep_bytes", self.rrep_bytes.to_string());
        kv("rerr_bytes", self.rerr_bytes.to_string());
        kv("route_lifetime_s", fmt_f64(self.route_lifetime_s));
        kv("seen_lifetime_s", fmt_f64(self.seen_lifetime_s));
        kv("pending_cap", self.pending_cap.to_string());
        kv("ttl_max", self.ttl_max.to_string());
        kv("ring_ttl", self.ring_ttl.to_string());
        kv("discovery_timeout_s", fmt_f64(self.discovery_timeout_s));
        kv("discovery_attempts", self.discovery_attempts.to_string());
        kv("holddown_base_s", fmt_f64(self.holddown_base_s));
        kv("holddown_max_s", fmt_f64(self.holddown_max_s));
        kv("precursor_window_s", fmt_f64(self.precursor_window_s));
        kv("flows", self.flows.to_string());
        kv("packet_rate_pps", fmt_f64(self.packet_rate_pps));
        kv("packet_bytes", self.packet_bytes.to_string());
        kv("traffic_start_s", fmt_f64(self.traffic_start_s));
        kv(
            "traffic_stop_s",
            self.traffic_stop_s.map_or("sim_end".into(), fmt_f64),
        );
        kv("gbs_leg", onoff(self.gbs_leg));
        kv("attack", self.attack.as_str().to_string());
        kv("attacker_ratio", fmt_f64(self.attacker_ratio));
        kv("placement", self.placement.as_str().to_string());
        kv("drop_probability", fmt_f64(self.drop_probability));
        kv("seq_boost", self.seq_boost.to_string());
        kv("fake_lifetime_s", fmt_f64(self.fake_lifetime_s));
        kv("flood_burst", self.flood_burst.to_string());
        kv("flood_period_s", fmt_f64(self.flood_period_s));
        kv("flood_start_s", fmt_f64(self.flood_start_s));
        kv("snapshot_time_s", fmt_f64(self.snapshot_time_s));
        kv("flood_unknown_targets", onoff(self.flood_unknown_targets));
        kv(
            "seeds",
            self.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
        );
        kv(
            "densities",
            self.densities.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
        );
        kv("alpha_start", fmt_f64(self.alpha_start));
        kv("alpha_step", fmt_f64(self.alpha_step));
        s
    }

    /// Builds the core configuration for this scenario's single run.
    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            nodes: self.nodes,
            bounds: Bounds { x_max: self.area_x, y_max: self.area_y, z_max: self.area_z },
            sim_time: self.sim_time_s,
            seed: self.seed,
            has_gbs: self.has_gbs,
            mobility_enabled: self.mobility,
            mobility: MobilityConfig {
                alpha: self.alpha,
                mean_speed: self.avg_speed_mps,
                step_interval: self.step_interval_s,
                speed_sd: self.speed_sd,
                direction_sd: self.direction_sd_rad,
                pitch_sd: self.pitch_sd_rad,
            },
            medium: MediumConfig {
                range: self.range_m,
                bitrate: self.bitrate_bps,
                queue_capacity: self.queue_capacity,
                backoff_max: self.backoff_max_s,
                frame_overhead: self.frame_overhead_s,
                propagation: self.propagation,
                link_header_bytes: self.link_header_bytes,
                rreq_bytes: self.rreq_bytes,
                rrep_bytes: self.rrep_bytes,
                rerr_bytes: self.rerr_bytes,
            },
            router: RouterConfig {
                route_lifetime: self.route_lifetime_s,
                seen_lifetime: self.seen_lifetime_s,
                pending_cap: self.pending_cap,
                ttl_max: self.ttl_max,
                ring_ttl: self.ring_ttl,
                discovery_timeout: self.discovery_timeout_s,
                discovery_attempts: self.discovery_attempts,
                holddown_base: self.holddown_base_s,
                holddown_max: self.holddown_max_s,
                precursor_window: self.precursor_window_s,
            },
            attack: AttackConfig {
                kind: self.attack,
                attacker_ratio: self.attacker_ratio,
                placement: self.placement,
                drop_probability: self.drop_probability,
                seq_boost: self.seq_boost,
                fake_lifetime: self.fake_lifetime_s,
                flood_burst: self.flood_burst,
                flood_period: self.flood_period_s,
                flood_start: self.flood_start_s,
                snapshot_time: self.snapshot_time_s,
                flood_unknown_targets: self.flood_unknown_targets,
            },
            traffic: TrafficConfig {
                flow_count: self.flows,
                rate: self.packet_rate_pps,
                payload_bytes: self.packet_bytes,
                start: self.traffic_start_s,
                stop: self.traffic_stop_s.unwrap_or(self.sim_time_s),
                gbs_leg: self.gbs_leg,
            },
            explicit_flows: None,
            explicit_positions: None,
        }
    }
}

fn fmt_f64(v: f64) -> String {
    // Shortest round-trip representation keeps files diff-able.
    let s = format!("{v}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}

fn onoff(v: bool) -> String {
    if v { "on".into() } else { "off".into() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_text() {
        let cfg = ScenarioConfig::default();
        let text = cfg.serialize();
        let parsed = ScenarioConfig::parse(&text).expect("canonical form parses");
        assert_eq!(parsed, cfg);
    }

    #[test]
    fn problems_carry_line_numbers() {
        let text = "nodes = 25\nbogus_key = 3\nalpha = nan-ish\n";
        let err = ScenarioConfig::parse(text).unwrap_err();
        let all = err.to_string();
        assert!(all.contains("line 2"), "{all}");
        assert!(all.contains("bogus_key"), "{all}");
        assert!(all.contains("line 3"), "{all}");
    }

    #[test]
    fn zero_sim_time_is_rejected() {
        let err = ScenarioConfig::parse("sim_time_s = 0\n").unwrap_err();
        assert!(err.to_string().contains("before any flow can start"));
    }

    #[test]
    fn defaults_match_reference_parameters() {
        // The headline scenario parameters: 1800 s runs over a 12 km by
        // 12 km by 300 m volume, 100 m/s mean speed, 11 Mbps, 512-byte
        // packets at 1 pkt/s, ten flows, GBS at the center.
        let cfg = ScenarioConfig::default();
        assert_eq!(cfg.sim_time_s, 1800.0);
        assert_eq!((cfg.area_x, cfg.area_y, cfg.area_z), (12000.0, 12000.0, 300.0));
        assert_eq!(cfg.avg_speed_mps, 100.0);
        assert_eq!(cfg.bitrate_bps, 11.0e6);
        assert_eq!(cfg.packet_bytes, 512);
        assert_eq!(cfg.packet_rate_pps, 1.0);
        assert_eq!(cfg.flows, 10);
        assert_eq!(cfg.densities, vec![25, 50]);
        assert_eq!(cfg.seeds.len(), 10);
        assert_eq!(cfg.alpha_start, 0.25);
        assert_eq!(cfg.alpha_step, 0.05);
    }
}
