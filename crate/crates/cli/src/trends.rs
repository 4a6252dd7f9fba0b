//! Machine-evaluable trend rules over aggregated results. The same rules run
//! against the embedded reference table (proving the rules agree with the
//! published numbers) and against simulated aggregates (the acceptance gate).

use crate::reference::{Density, MetricsView};

const RATIOS: [u32; 5] = [5, 10, 15, 20, 25];
const BOTH: [Density; 2] = [Density::Low, Density::High];

/// Overhead columns may wobble a little; the published values themselves dip
/// by up to 0.03 between adjacent ratios, so nondecreasing is checked with
/// this much slack.
const OVERHEAD_SLACK: f64 = 0.3;

#[derive(Debug, Clone)]
pub struct RuleOutcome {
    pub id: &'static str,
    pub name: &'static str,
    pub pass: bool,
    /// Worst measured margin: nonnegative means the rule holds.
    pub margin: f64,
    pub detail: Vec<String>,
    pub missing: Vec<String>,
}

impl RuleOutcome {
    fn missing_cell(mut self, what: String) -> Self {
        self.missing.push(what);
        self.pass = false;
        self
    }
}

struct Probe<'a> {
    view: &'a dyn MetricsView,
    missing: Vec<String>,
}

impl<'a> Probe<'a> {
    fn new(view: &'a dyn MetricsView) -> Self {
        Probe { view, missing: Vec::new() }
    }

    fn pdr(&mut self, series: &str, d: Density, r: u32) -> Option<f64> {
        self.get(series, d, r).map(|c| c.pdr)
    }

    fn e2e(&mut self, series: &str, d: Density, r: u32) -> Option<f64> {
        self.get(series, d, r).map(|c| c.e2e_s)
    }

    fn overhead(&mut self, series: &str, d: Density, r: u32) -> Option<f64> {
        self.get(series, d, r).map(|c| c.overhead)
    }

    fn get(&mut self, series: &str, d: Density, r: u32) -> Option<crate::reference::Cell> {
        let cell = self.view.cell(series, d, r);
        if cell.is_none() {
            self.missing.push(format!("{series}/{}/{r}%", d.as_str()));
        }
        cell
    }
}

type Rule = fn(&dyn MetricsView) -> RuleOutcome;

fn outcome(id: &'static str, name: &'static str) -> RuleOutcome {
    RuleOutcome { id, name, pass: true, margin: f64::INFINITY, detail: Vec::new(), missing: Vec::new() }
}

fn note(out: &mut RuleOutcome, margin: f64, text: String) {
    out.detail.push(text);
    if margin < out.margin {
        out.margin = margin;
    }
    if margin < 0.0 {
        out.pass = false;
    }
}

fn finish(mut out: RuleOutcome, probe: Probe<'_>) -> RuleOutcome {
    if !probe.missing.is_empty() {
        for m in probe.missing {
            out = out.missing_cell(m);
        }
    }
    out
}

/// Flooding at the top ratio guts high-density delivery by at least 20
/// points.
fn rule_flooding_pdr(view: &dyn MetricsView) -> RuleOutcome {
    let mut out = outcome("flooding-pdr-drop", "flooding @25% high density: PDR drop >= 20 points");
    let mut p = Probe::new(view);
    if let (Some(base), Some(attacked)) =
        (p.pdr("flooding", Density::High, 0), p.pdr("flooding", Density::High, 25))
    {
        let drop = base - attacked;
        note(&mut out, drop - 0.20, format!("high: drop {:.1} pts (need >= 20)", drop * 100.0));
    }
    finish(out, p)
}

/// Blackhole at the top ratio costs at least 10 points in both densities.
fn rule_blackhole_pdr(view: &dyn MetricsView) -> RuleOutcome {
    let mut out = outcome("blackhole-pdr-drop", "blackhole @25%: PDR drop >= 10 points, both densities");
    let mut p = Probe::new(view);
    for d in BOTH {
        if let (Some(base), Some(attacked)) =
            (p.pdr("blackhole", d, 0), p.pdr("blackhole", d, 25))
        {
            let drop = base - attacked;
            note(
                &mut out,
                drop - 0.10,
                format!("{}: drop {:.1} pts (need >= 10)", d.as_str(), drop * 100.0),
            );
        }
    }
    finish(out, p)
}

/// Sinkhole leaves delivery within 3 points of baseline at every ratio and
/// strictly stretches high-density delay as the ratio grows.
fn rule_sinkhole(view: &dyn MetricsView) -> RuleOutcome {
    let mut out = outcome(
        "sinkhole-pdr-band-e2e",
        "sinkhole: |PDR - baseline| <= 3 points at every ratio; high-density E2E strictly rising",
    );
    let mut p = Probe::new(view);
    for d in BOTH {
        let Some(base) = p.pdr("sinkhole", d, 0) else { continue };
        for r in RATIOS {
            if let Some(v) = p.pdr("sinkhole", d, r) {
                let dev = (v - base).abs();
                note(
                    &mut out,
                    0.03 - dev,
                    format!("{} @{r}%: |dPDR| {:.1} pts (allow <= 3)", d.as_str(), dev * 100.0),
                );
            }
        }
    }
    let mut prev = p.e2e("sinkhole", Density::High, 0);
    for r in RATIOS {
        let cur = p.e2e("sinkhole", Density::High, r);
        if let (Some(a), Some(b)) = (prev, cur) {
            note(
                &mut out,
                b - a,
                format!("high E2E @{r}%: {:.4}s vs previous {:.4}s (strictly rising)", b, a),
            );
        }
        prev = cur;
    }
    finish(out, p)
}

/// Random-placement dropping stays within 3 points; on-active-route dropping
/// costs at least 3 points and strictly more than random placement.
fn rule_dropping(view: &dyn MetricsView) -> RuleOutcome {
    let mut out = outcome(
        "dropping-placement-contrast",
        "dropping @25%: random drop <= 3 points, on-route drop >= 3 points and larger",
    );
    let mut p = Probe::new(view);
    for d in BOTH {
        let (Some(rb), Some(ra)) =
            (p.pdr("dropping_random", d, 0), p.pdr("dropping_random", d, 25))
        else {
            continue;
        };
        let (Some(ab), Some(aa)) =
            (p.pdr("dropping_active", d, 0), p.pdr("dropping_active", d, 25))
        else {
            continue;
        };
        let random_drop = rb - ra;
        let active_drop = ab - aa;
        note(
            &mut out,
            0.03 - random_drop,
            format!("{} random: drop {:.1} pts (allow <= 3)", d.as_str(), random_drop * 100.0),
        );
        note(
            &mut out,
            active_drop - 0.03,
            format!("{} on-route: drop {:.1} pts (need >= 3)", d.as_str(), active_drop * 100.0),
        );
        note(
            &mut out,
            active_drop - random_drop,
            format!(
                "{}: on-route {:.1} pts > random {:.1} pts",
                d.as_str(),
                active_drop * 100.0,
                random_drop * 100.0
            ),
        );
    }
    finish(out, p)
}

/// Blackhole is at least as damaging as sinkhole and random dropping at
/// every nonzero ratio, cell-wise, in both densities.
fn rule_blackhole_dominates(view: &dyn MetricsView) -> RuleOutcome {
    let mut out = outcome(
        "blackhole-dominates",
        "blackhole PDR <= min(sinkhole, dropping-random) at every ratio >= 5%",
    );
    let mut p = Probe::new(view);
    for d in BOTH {
        for r in RATIOS {
            if let (Some(bh), Some(sk), Some(dr)) = (
                p.pdr("blackhole", d, r),
                p.pdr("sinkhole", d, r),
                p.pdr("dropping_random", d, r),
            ) {
                let bound = sk.min(dr);
                note(
                    &mut out,
                    bound - bh,
                    format!(
                        "{} @{r}%: blackhole {:.1}% <= min(sinkhole {:.1}%, dropping {:.1}%)",
                        d.as_str(),
                        bh * 100.0,
                        sk * 100.0,
                        dr * 100.0
                    ),
                );
            }
        }
    }
    finish(out, p)
}

/// Flooding at the top ratio at least nearly doubles routing overhead.
fn rule_flooding_overhead(view: &dyn MetricsView) -> RuleOutcome {
    let mut out = outcome(
        "flooding-overhead",
        "flooding @25%: overhead >= 1.8x baseline, both densities",
    );
    let mut p = Probe::new(view);
    for d in BOTH {
        if let (Some(base), Some(attacked)) =
            (p.overhead("flooding", d, 0), p.overhead("flooding", d, 25))
        {
            let ratio = attacked / base;
            note(
                &mut out,
                ratio - 1.8,
                format!("{}: overhead x{:.2} baseline (need >= 1.8x)", d.as_str(), ratio),
            );
        }
    }
    finish(out, p)
}

/// Overhead never meaningfully decreases as attackers are added, for the
/// route-forging attacks.
fn rule_overhead_monotone(view: &dyn MetricsView) -> RuleOutcome {
    let mut out = outcome(
        "overhead-nondecreasing",
        "sinkhole/blackhole overhead nondecreasing in attacker ratio",
    );
    let mut p = Probe::new(view);
    for series in ["sinkhole", "blackhole"] {
        for d in BOTH {
            let mut prev = p.overhead(series, d, 0);
            for r in RATIOS {
                let cur = p.overhead(series, d, r);
                if let (Some(a), Some(b)) = (prev, cur) {
                    note(
                        &mut out,
                        b - a + OVERHEAD_SLACK,
                        format!("{series} {} @{r}%: {:.2} vs {:.2}", d.as_str(), b, a),
                    );
                }
                prev = cur;
            }
        }
    }
    finish(out, p)
}

pub const RULES: [Rule; 7] = [
    rule_flooding_pdr,
    rule_blackhole_pdr,
    rule_sinkhole,
    rule_dropping,
    rule_blackhole_dominates,
    rule_flooding_overhead,
    rule_overhead_monotone,
];

/// Evaluates every shipped rule; pass/fail plus measured margins.
pub fn check_trends(view: &dyn MetricsView) -> Vec<RuleOutcome> {
    RULES.iter().map(|rule| rule(view)).collect()
}

pub fn all_pass(outcomes: &[RuleOutcome]) -> bool {
    outcomes.iter().all(|o| o.pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference::ReferenceTable;

    #[test]
    fn rules_hold_on_the_reference_values() {
        // The shipped rules must agree with the published tables before any
        // simulation runs.
        let table = ReferenceTable::embedded();
        let outcomes = check_trends(&table);
        for o in &outcomes {
            assert!(o.pass, "rule {} failed on reference: margin {:.4}\n{}", o.id, o.margin, o.detail.join("\n"));
            assert!(o.missing.is_empty(), "rule {} missing cells: {:?}", o.id, o.missing);
        }
        assert_eq!(outcomes.len(), 7);
    }

    #[test]
    fn missing_cells_are_reported() {
        struct Empty;
        impl MetricsView for Empty {
            fn cell(
                &self,
                _: &str,
                _: crate::reference::Density,
                _: u32,
            ) -> Option<crate::reference::Cell> {
                None
            }
            fn label(&self) -> &str {
                "empty"
            }
        }
        let outcomes = check_trends(&Empty);
        assert!(outcomes.iter().all(|o| !o.pass));
        assert!(outcomes.iter().all(|o| !o.missing.is_empty()));
    }
}
