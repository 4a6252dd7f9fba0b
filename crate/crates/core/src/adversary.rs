//! Attack overlays that replace or wrap a node's honest routing behavior:
//! sinkhole, dropping (random or on-active-route placement, with grayhole
//! probability), blackhole, and RREQ flooding, plus attacker selection.

use crate::rng::Rng;
use crate::NodeId;
use alloc::collections::BTreeSet;
use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackKind {
    None,
    Sinkhole,
    Dropping,
    Blackhole,
    Flooding,
}

impl AttackKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            AttackKind::None => "none",
            AttackKind::Sinkhole => "sinkhole",
            AttackKind::Dropping => "dropping",
            AttackKind::Blackhole => "blackhole",
            AttackKind::Flooding => "flooding",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    Random,
    OnActiveRoute,
}

impl Placement {
    pub fn as_str(&self) -> &'static str {
        match self {
            Placement::Random => "random",
            Placement::OnActiveRoute => "on_active_route",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackConfig {
    pub kind: AttackKind,
    /// Fraction of total nodes acting maliciously.
    pub attacker_ratio: f64,
    pub placement: Placement,
    /// 1.0 drops everything (dropping/blackhole); below 1.0 is a grayhole.
    pub drop_probability: f64,
    /// Sequence-number increment applied by forged RREPs.
    pub seq_boost: u32,
    /// Lifetime advertised by forged RREPs, seconds. Short by design:
    /// forged entries that stop carrying traffic should evaporate quickly.
    pub fake_lifetime: f64,
    /// RREQs per flooding burst.
    pub flood_burst: u32,
    /// Burst repetition period, seconds.
    pub flood_period: f64,
    /// First burst instant, seconds.
    pub flood_start: f64,
    /// When to snapshot relays for on-active-route placement, seconds.
    pub snapshot_time: f64,
    /// Target nonexistent addresses instead of live nodes when flooding.
    pub flood_unknown_targets: bool,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            kind: AttackKind::None,
            attacker_ratio: 0.0,
            placement: Placement::Random,
            drop_probability: 1.0,
            seq_boost: 100,
            fake_lifetime: 3.0,
            flood_burst: 10,
            flood_period: 3.0,
            flood_start: 10.0,
            snapshot_time: 15.0,
            flood_unknown_targets: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectError {
    EmptyEligiblePool,
}

/// Number of attackers for a node count and ratio: round-half-up of
/// `total * ratio`, at least one when the ratio is nonzero.
pub fn attacker_count(total_nodes: usize, ratio: f64) -> usize {
    if ratio <= 0.0 {
        return 0;
    }
    let exact = total_nodes as f64 * ratio;
    let rounded = libm::floor(exact + 0.5) as usize;
    rounded.max(1)
}

/// A fixed shuffled ordering of the eligible pool. Attacker sets are the
/// prefixes of this ordering, so the 5% set is contained in the 10% set and
/// so on: selections stay fixed as the ratio grows.
pub fn eligible_order(
    all_nodes: &[NodeId],
    excluded: &BTreeSet<NodeId>,
    rng: &mut Rng,
) -> Vec<NodeId> {
    let mut pool: Vec<NodeId> = all_nodes.iter().copied().filter(|n| !excluded.contains(n)).collect();
    rng.shuffle(&mut pool);
    pool
}

/// Takes the attacker set for one ratio from a fixed ordering. The count is
/// clamped to the pool size: the paper-scale 25-node grid has only four
/// eligible nodes at the top ratios.
pub fn select_attackers(
    order: &[NodeId],
    total_nodes: usize,
    ratio: f64,
) -> Result<BTreeSet<NodeId>, SelectError> {
    let count = attacker_count(total_nodes, ratio);
    if count == 0 {
        return Ok(BTreeSet::new());
    }
    if order.is_empty() {
        return Err(SelectError::EmptyEligiblePool);
    }
    Ok(order.iter().copied().take(count).collect())
}

/// Grayhole coin flip.
pub fn should_drop(drop_probability: f64, rng: &mut Rng) -> bool {
    if drop_probability >= 1.0 {
        return true;
    }
    if drop_probability <= 0.0 {
        return false;
    }
    rng.uniform() < drop_probability
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(n: u16) -> Vec<NodeId> {
        (0..n).map(NodeId).collect()
    }

    #[test]
    fn count_rounds_half_up_with_minimum_one() {
        assert_eq!(attacker_count(25, 0.05), 1); // 1.25 -> 1
        assert_eq!(attacker_count(25, 0.10), 3); // 2.5 -> 3 (half up)
        assert_eq!(attacker_count(50, 0.10), 5);
        assert_eq!(attacker_count(50, 0.25), 13); // 12.5 -> 13
        assert_eq!(attacker_count(40, 0.01), 1); // 0.4 -> minimum 1
        assert_eq!(attacker_count(50, 0.0), 0);
    }

    #[test]
    fn ratio_zero_selects_nobody() {
        let order = pool(10);
        let set = select_attackers(&order, 50, 0.0).unwrap();
        assert!(set.is_empty());
    }

    #[test]
    fn sets_nest_across_ratios() {
        let mut rng = Rng::from_stream(5, "attacker-select");
        let all = pool(50);
        let excluded: BTreeSet<NodeId> = (0..21).map(NodeId).collect();
        let order = eligible_order(&all, &excluded, &mut rng);
        assert_eq!(order.len(), 29);
        let mut prev = BTreeSet::new();
        for ratio in [0.05, 0.10, 0.15, 0.20, 0.25] {
            let set = select_attackers(&order, 50, ratio).unwrap();
            assert!(prev.is_subset(&set), "sets must nest at ratio {ratio}");
            assert!(set.iter().all(|n| !excluded.contains(n)));
            prev = set;
        }
        assert_eq!(prev.len(), 13);
    }

    #[test]
    fn count_clamps_to_pool() {
        let order = pool(4);
        let set = select_attackers(&order, 25, 0.25).unwrap();
        assert_eq!(set.len(), 4); // 6 requested, 4 eligible
    }

    #[test]
    fn empty_pool_is_an_error() {
        assert_eq!(select_attackers(&[], 25, 0.25), Err(SelectError::EmptyEligiblePool));
    }

    #[test]
    fn selection_is_deterministic() {
        let all = pool(50);
        let excluded = BTreeSet::new();
        let a = eligible_order(&all, &excluded, &mut Rng::from_stream(9, "attacker-select"));
        let b = eligible_order(&all, &excluded, &mut Rng::from_stream(9, "attacker-select"));
        assert_eq!(a, b);
    }

    #[test]
    fn grayhole_drop_fraction_tracks_probability() {
        let mut rng = Rng::from_stream(13, "attack-drop");
        let n = 10_000;
        let dropped = (0..n).filter(|_| should_drop(0.5, &mut rng)).count();
        let frac = dropped as f64 / n as f64;
        assert!((frac - 0.5).abs() < 0.02, "drop fraction {frac}");
        assert!((0..100).all(|_| should_drop(1.0, &mut rng)));
        assert!((0..100).all(|_| !should_drop(0.0, &mut rng)));
    }
}
