//! 3D Gauss-Markov motion for UAVs plus static placement for the ground
//! base station.
//!
//! Speed, direction and pitch each follow the memory update
//! `v' = a*v + (1-a)*v_mean + sqrt(1-a^2) * N(0, sd)`; the parameter `a`
//! blends the previous value, the long-run mean and Gaussian noise. Motion
//! is reflected at the volume boundaries.

use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn distance(&self, other: &Vec3) -> f64 {
        libm::sqrt(self.distance_sq(other))
    }

    pub fn distance_sq(&self, other: &Vec3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        dx * dx + dy * dy + dz * dz
    }
}

/// Mission volume: x in [0, x_max], y in [0, y_max], z in [0, z_max].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x_max: f64,
    pub y_max: f64,
    pub z_max: f64,
}

impl Bounds {
    pub fn contains(&self, p: &Vec3) -> bool {
        p.x >= 0.0
            && p.x <= self.x_max
            && p.y >= 0.0
            && p.y <= self.y_max
            && p.z >= 0.0
            && p.z <= self.z_max
    }

    pub fn center_ground(&self) -> Vec3 {
        Vec3::new(self.x_max / 2.0, self.y_max / 2.0, 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityConfig {
    pub alpha: f64,
    pub mean_speed: f64,
    pub step_interval: f64,
    pub speed_sd: f64,
    pub direction_sd: f64,
    pub pitch_sd: f64,
}

impl Default for MobilityConfig {
    fn default() -> Self {
        MobilityConfig {
            alpha: 0.25,
            mean_speed: 100.0,
            step_interval: 1.0,
            speed_sd: 20.0,
            direction_sd: 0.3,
            pitch_sd: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityState {
    pub position: Vec3,
    pub speed: f64,
    /// Azimuth, radians.
    pub direction: f64,
    /// Elevation, radians.
    pub pitch: f64,
    pub mean_speed: f64,
    pub mean_direction: f64,
    pub mean_pitch: f64,
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlacementError {
    ZeroNodes,
}

/// One memory-update step followed by displacement and boundary reflection.
pub fn gmm_step(state: &MobilityState, cfg: &MobilityConfig, bounds: &Bounds, rng: &mut Rng) -> MobilityState {
    let a = state.alpha;
    let noise = libm::sqrt(1.0 - a * a);

    // Always draw all three, so the stream stays aligned across alpha values.
    let n_speed = rng.gaussian(0.0, cfg.speed_sd);
    let n_dir = rng.gaussian(0.0, cfg.direction_sd);
    let n_pitch = rng.gaussian(0.0, cfg.pitch_sd);

    let mut speed = a * state.speed + (1.0 - a) * state.mean_speed + noise * n_speed;
    if speed < 0.0 {
        speed = 0.0;
    }
    let mut direction = a * state.direction + (1.0 - a) * state.mean_direction + noise * n_dir;
    let mut pitch = a * state.pitch + (1.0 - a) * state.mean_pitch + noise * n_pitch;

    let dt = cfg.step_interval;
    let horizontal = speed * libm::cos(pitch);
    let mut x = state.position.x + horizontal * libm::cos(direction) * dt;
    let mut y = state.position.y + horizontal * libm::sin(direction) * dt;
    let mut z = state.position.z + speed * libm::sin(pitch) * dt;

    let mut mean_direction = state.mean_direction;
    let mut mean_pitch = state.mean_pitch;

    // Reflect: mirror the position into bounds and flip the offending
    // velocity component. The corresponding mean is flipped too, otherwise
    // the memory term keeps steering the node back into the wall.
    loop {
        let mut reflected = false;
        if x < 0.0 || x > bounds.x_max {
            x = if x < 0.0 { -x } else { 2.0 * bounds.x_max - x };
            direction = core::f64::consts::PI - direction;
            mean_direction = core::f64::consts::PI - mean_direction;
            reflected = true;
        }
        if y < 0.0 || y > bounds.y_max {
            y = if y < 0.0 { -y } else { 2.0 * bounds.y_max - y };
            direction = -direction;
            mean_direction = -mean_direction;
            reflected = true;
        }
        if z < 0.0 || z > bounds.z_max {
            z = if z < 0.0 { -z } else { 2.0 * bounds.z_max - z };
            pitch = -pitch;
            mean_pitch = -mean_pitch;
            reflected = true;
        }
        if !reflected {
            break;
        }
    }

    MobilityState {
        position: Vec3::new(x, y, z),
        speed,
        direction,
        pitch,
        mean_speed: state.mean_speed,
        mean_direction,
        mean_pitch,
        alpha: state.alpha,
    }
}

/// Uniform initial placement: position uniform in bounds, heading uniform in
/// [0, 2pi), speed at the configured mean, level pitch.
pub fn place_nodes(
    n: usize,
    cfg: &MobilityConfig,
    bounds: &Bounds,
    rng: &mut Rng,
) -> Result<alloc::vec::Vec<MobilityState>, PlacementError> {
    if n == 0 {
        return Err(PlacementError::ZeroNodes);
    }
    let mut out = alloc::vec::Vec::with_capacity(n);
    for _ in 0..n {
        let position = Vec3::new(
            rng.uniform_range(0.0, bounds.x_max),
            rng.uniform_range(0.0, bounds.y_max),
            rng.uniform_range(0.0, bounds.z_max),
        );
        let direction = rng.uniform_range(0.0, 2.0 * core::f64::consts::PI);
        out.push(MobilityState {
            position,
            speed: cfg.mean_speed,
            direction,
            pitch: 0.0,
            mean_speed: cfg.mean_speed,
            mean_direction: direction,
            mean_pitch: 0.0,
            alpha: cfg.alpha,
        });
    }
    Ok(out)
}

/// The ground base station sits at the center of the area, on the ground,
/// and never moves.
pub fn place_gbs(bounds: &Bounds) -> Vec3 {
    bounds.center_ground()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn table_bounds() -> Bounds {
        Bounds { x_max: 12000.0, y_max: 12000.0, z_max: 300.0 }
    }

    fn start_state(alpha: f64) -> MobilityState {
        MobilityState {
            position: Vec3::new(6000.0, 6000.0, 150.0),
            speed: 100.0,
            direction: 1.0,
            pitch: 0.02,
            mean_speed: 100.0,
            mean_direction: 1.0,
            mean_pitch: 0.0,
            alpha,
        }
    }

    #[test]
    fn alpha_one_keeps_velocity() {
        let cfg = MobilityConfig { alpha: 1.0, ..Default::default() };
        let mut rng = Rng::from_stream(1, "mobility");
        let s0 = MobilityState { alpha: 1.0, ..start_state(1.0) };
        let s1 = gmm_step(&s0, &cfg, &table_bounds(), &mut rng);
        assert_eq!(s1.speed, s0.speed);
        assert_eq!(s1.direction, s0.direction);
        assert_eq!(s1.pitch, s0.pitch);
    }

    #[test]
    fn alpha_zero_speed_converges_to_mean() {
        // Memoryless limit: the long-run sample mean of speed tracks
        // mean_speed within 2%.
        let cfg = MobilityConfig { alpha: 0.0, ..Default::default() };
        let mut rng = Rng::from_stream(11, "mobility");
        let mut s = MobilityState { alpha: 0.0, ..start_state(0.0) };
        let bounds = table_bounds();
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            s = gmm_step(&s, &cfg, &bounds, &mut rng);
            sum += s.speed;
        }
        let mean = sum / n as f64;
        let rel = (mean - cfg.mean_speed).abs() / cfg.mean_speed;
        assert!(rel < 0.02, "mean speed {mean}, relative error {rel}");
    }

    #[test]
    fn ceiling_reflection() {
        let cfg = MobilityConfig::default();
        let bounds = table_bounds();
        let mut rng = Rng::from_stream(5, "mobility");
        let s0 = MobilityState {
            position: Vec3::new(6000.0, 6000.0, 299.0),
            speed: 100.0,
            direction: 0.5,
            pitch: 0.5, // heading up hard
            mean_speed: 100.0,
            mean_direction: 0.5,
            mean_pitch: 0.5,
            alpha: 0.9,
        };
        let s1 = gmm_step(&s0, &cfg, &bounds, &mut rng);
        assert!(s1.position.z <= 300.0, "z escaped: {}", s1.position.z);
        assert!(s1.pitch < 0.0, "pitch should reflect downward");
    }

    #[test]
    fn positions_stay_in_bounds() {
        let cfg = MobilityConfig { alpha: 0.25, ..Default::default() };
        let bounds = table_bounds();
        let mut rng = Rng::from_stream(99, "mobility");
        let mut states = place_nodes(10, &cfg, &bounds, &mut rng).unwrap();
        for _ in 0..10_000 {
            for s in states.iter_mut() {
                *s = gmm_step(s, &cfg, &bounds, &mut rng);
                assert!(bounds.contains(&s.position), "escaped at {:?}", s.position);
                assert!(s.speed >= 0.0);
            }
        }
    }

    #[test]
    fn memory_damps_turns() {
        // Per-step direction-change spread at alpha 0.25 must be strictly
        // smaller than in the memoryless case over 1e4 steps.
        let bounds = table_bounds();
        let spread = |alpha: f64| {
            let cfg = MobilityConfig { alpha, ..Default::default() };
            let mut rng = Rng::from_stream(1234, "mobility");
            let mut s = MobilityState { alpha, ..start_state(alpha) };
            let mut deltas = Vec::new();
            for _ in 0..10_000 {
                let next = gmm_step(&s, &cfg, &bounds, &mut rng);
                deltas.push(next.direction - s.direction);
                s = next;
            }
            let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
            let var = deltas.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>()
                / deltas.len() as f64;
            libm::sqrt(var)
        };
        assert!(spread(0.25) < spread(0.0));
    }

    #[test]
    fn placement_is_deterministic_and_bounded() {
        let cfg = MobilityConfig::default();
        let bounds = table_bounds();
        let a = place_nodes(50, &cfg, &bounds, &mut Rng::from_stream(8, "placement")).unwrap();
        let b = place_nodes(50, &cfg, &bounds, &mut Rng::from_stream(8, "placement")).unwrap();
        assert_eq!(a.len(), 50);
        assert_eq!(a, b);
        for s in &a {
            assert!(bounds.contains(&s.position));
            assert_eq!(s.speed, cfg.mean_speed);
        }
        let single = place_nodes(1, &cfg, &bounds, &mut Rng::from_stream(9, "placement")).unwrap();
        assert_eq!(single.len(), 1);
        assert!(bounds.contains(&single[0].position));
    }

    #[test]
    fn zero_nodes_is_an_error() {
        let cfg = MobilityConfig::default();
        let mut rng = Rng::from_stream(1, "placement");
        assert_eq!(
            place_nodes(0, &cfg, &table_bounds(), &mut rng),
            Err(PlacementError::ZeroNodes)
        );
    }

    #[test]
    fn gbs_is_at_the_center_on_the_ground() {
        let p = place_gbs(&table_bounds());
        assert_eq!(p, Vec3::new(6000.0, 6000.0, 0.0));
    }
}
