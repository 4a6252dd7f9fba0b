//! Experiment sweeps: the full attack grid over seeds and densities, with
//! deterministic aggregation regardless of execution order.

use crate::reference::{Cell, Density, MetricsView};
use crate::runner::{run_scenario, RunRecord, RUN_CSV_HEADER};
use crate::scenario::ScenarioConfig;
use fanetsim_core::adversary::{AttackKind, Placement};
use fanetsim_core::sim::BuildError;
use rayon::prelude::*;
use std::collections::BTreeMap;

/// The five replicated series: four attacks (dropping in both placements)
/// plus the shared baseline.
pub const SWEEP_SERIES: [(AttackKind, Placement); 5] = [
    (AttackKind::Sinkhole, Placement::Random),
    (AttackKind::Dropping, Placement::Random),
    (AttackKind::Dropping, Placement::OnActiveRoute),
    (AttackKind::Blackhole, Placement::Random),
    (AttackKind::Flooding, Placement::Random),
];

pub const SWEEP_RATIOS: [f64; 5] = [0.05, 0.10, 0.15, 0.20, 0.25];

/// Expands the grid for one density: the no-attack baseline plus every
/// (attack, ratio) cell, each over all seeds with the per-seed alpha
/// schedule.
pub fn expand_density(base: &ScenarioConfig, nodes: usize) -> Vec<ScenarioConfig> {
    let mut runs = Vec::new();
    let mut push = |attack: AttackKind, placement: Placement, ratio: f64| {
        for (i, &seed) in base.seeds.iter().enumerate() {
            let mut cfg = base.clone();
            cfg.nodes = nodes;
            cfg.seed = seed;
            cfg.alpha = base.alpha_start + base.alpha_step * i as f64;
            cfg.attack = attack;
            cfg.placement = placement;
            cfg.attacker_ratio = ratio;
            runs.push(cfg);
        }
    };
    push(AttackKind::None, Placement::Random, 0.0);
    for (attack, placement) in SWEEP_SERIES {
        for ratio in SWEEP_RATIOS {
            push(attack, placement, ratio);
        }
    }
    runs
}

pub fn expand(base: &ScenarioConfig) -> Vec<ScenarioConfig> {
    base.densities
        .iter()
        .flat_map(|&nodes| expand_density(base, nodes))
        .collect()
}

/// Executes the runs, optionally in parallel. The output order equals the
/// input order either way, so aggregates are bit-identical.
pub fn execute(runs: &[ScenarioConfig], parallel: bool) -> Result<Vec<RunRecord>, BuildError> {
    if parallel {
        runs.par_iter().map(run_scenario).collect()
    } else {
        runs.iter().map(run_scenario).collect()
    }
}

/// Mean and standard deviation per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub nodes: usize,
    pub series: String,
    pub ratio_pct: u32,
    pub runs: u32,
    pub pdr_mean: f64,
    pub pdr_sd: f64,
    pub e2e_mean: f64,
    pub e2e_sd: f64,
    pub overhead_mean: f64,
    pub overhead_sd: f64,
}

pub const AGGREGATE_CSV_HEADER: &str =
    "nodes,series,ratio_pct,runs,pdr_mean,pdr_sd,e2e_mean_s,e2e_sd,overhead_mean,overhead_sd";

impl AggregateRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            self.nodes,
            self.series,
            self.ratio_pct,
            self.runs,
            self.pdr_mean,
            self.pdr_sd,
            self.e2e_mean,
            self.e2e_sd,
            self.overhead_mean,
            self.overhead_sd
        )
    }
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Aggregates run records in deterministic (nodes, series, ratio) order.
pub fn aggregate(records: &[RunRecord]) -> Vec<AggregateRow> {
    let mut cells: BTreeMap<(usize, String, u32), Vec<&RunRecord>> = BTreeMap::new();
    for rec in records {
        let key = (rec.nodes, rec.series(), (rec.ratio * 100.0).round() as u32);
        cells.entry(key).or_default().push(rec);
    }
    cells
        .into_iter()
        .map(|((nodes, series, ratio_pct), group)| {
            let pdr: Vec<f64> = group.iter().filter_map(|r| r.metrics.pdr()).collect();
            let e2e: Vec<f64> = group.iter().filter_map(|r| r.metrics.e2e_mean_s()).collect();
            let ovh: Vec<f64> = group.iter().filter_map(|r| r.metrics.overhead()).collect();
            let (pdr_mean, pdr_sd) = mean_sd(&pdr);
            let (e2e_mean, e2e_sd) = mean_sd(&e2e);
            let (overhead_mean, overhead_sd) = mean_sd(&ovh);
            AggregateRow {
                nodes,
                series,
                ratio_pct,
                runs: group.len() as u32,
                pdr_mean,
                pdr_sd,
                e2e_mean,
                e2e_sd,
                overhead_mean,
                overhead_sd,
            }
        })
        .collect()
}

pub fn runs_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(RUN_CSV_HEADER);
    out.push('\n');
    for rec in records {
        out.push_str(&rec.csv_row());
        out.push('\n');
    }
    out
}

pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from(AGGREGATE_CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_row());
        out.push('\n');
    }
    out
}

/// Aggregated sweep output as a metrics view for the trend rules. Ratio 0
/// resolves to the shared no-attack baseline of the same density.
pub struct SweepView {
    cells: BTreeMap<(String, Density, u32), Cell>,
    label: String,
}

impl SweepView {
    pub fn new(rows: &[AggregateRow], label: impl Into<String>) -> SweepView {
        let mut cells = BTreeMap::new();
        for row in rows {
            let density = Density::from_nodes(row.nodes);
            cells.insert(
                (row.series.clone(), density, row.ratio_pct),
                Cell { pdr: row.pdr_mean, e2e_s: row.e2e_mean, overhead: row.overhead_mean },
            );
        }
        SweepView { cells, label: label.into() }
    }

    /// Parses an aggregate CSV written by `aggregate_csv`.
    pub fn from_csv(text: &str, label: impl Into<String>) -> Result<SweepView, String> {
        let mut rows = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("nodes,") {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 10 {
                return Err(format!("aggregate line {}: expected 10 fields", idx + 1));
            }
            let parse = |s: &str, what: &str| -> Result<f64, String> {
                s.parse().map_err(|_| format!("aggregate line {}: bad {what}", idx + 1))
            };
            rows.push(AggregateRow {
                nodes: f[0].parse().map_err(|_| format!("line {}: nodes", idx + 1))?,
                series: f[1].to_string(),
                ratio_pct: f[2].parse().map_err(|_| format!("line {}: ratio", idx + 1))?,
                runs: f[3].parse().map_err(|_| format!("line {}: runs", idx + 1))?,
                pdr_mean: parse(f[4], "pdr_mean")?,
                pdr_sd: parse(f[5], "pdr_sd")?,
                e2e_mean: parse(f[6], "e2e_mean")?,
                e2e_sd: parse(f[7], "e2e_sd")?,
                overhead_mean: parse(f[8], "overhead_mean")?,
                overhead_sd: parse(f[9], "overhead_sd")?,
            });
        }
        Ok(SweepView::new(&rows, label))
    }
}

impl MetricsView for SweepView {
    fn cell(&self, series: &str, density: Density, ratio_pct: u32) -> Option<Cell> {
        if ratio_pct == 0 {
            // Every series shares the single no-attack baseline.
            return self.cells.get(&("none".to_string(), density, 0)).copied();
        }
        self.cells.get(&(series.to_string(), density, ratio_pct)).copied()
    }

    fn label(&self) -> &str {
        &self.label
    }
}
