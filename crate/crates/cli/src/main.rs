use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fanetsim::charts::{render_chart, standard_charts};
use fanetsim::oracle;
use fanetsim::reference::ReferenceTable;
use fanetsim::runner::{run_scenario, RUN_CSV_HEADER};
use fanetsim::scenario::ScenarioConfig;
use fanetsim::sweep::{self, SweepView};
use fanetsim::trends::{all_pass, check_trends};
use std::fs;
use std::path::{Path, PathBuf};

/// Deterministic UAV ad hoc network simulator: AODV routing under sinkhole,
/// dropping, blackhole and flooding attacks.
#[derive(Parser)]
#[command(name = "fanetsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Scenario file (key = value lines); defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the node count.
    #[arg(long)]
    nodes: Option<usize>,
    /// Override the attack kind (none|sinkhole|dropping|blackhole|flooding).
    #[arg(long)]
    attack: Option<String>,
    /// Override the attacker ratio (fraction, e.g. 0.25).
    #[arg(long)]
    ratio: Option<f64>,
    /// Override attacker placement (random|on_active_route).
    #[arg(long)]
    placement: Option<String>,
    /// Extra `key=value` overrides, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweeps (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single scenario and print its metrics row.
    Run {
        #[command(flatten)]
        common: CommonOpts,
        /// Dump per-second node positions to CSV.
        #[arg(long)]
        dump_trajectory: Option<PathBuf>,
        /// Dump frame-level medium events to CSV.
        #[arg(long)]
        dump_frames: Option<PathBuf>,
        /// Dump per-second route tables to CSV.
        #[arg(long)]
        dump_routes: Option<PathBuf>,
    },
    /// Run the full experiment grid and write runs/aggregate CSVs.
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        /// Run serially instead of in parallel.
        #[arg(long)]
        serial: bool,
    },
    /// Evaluate the shipped trend rules against an aggregate CSV.
    Check {
        /// Aggregate CSV produced by `sweep`; when omitted the rules run
        /// against the embedded reference values (self-test).
        #[arg(long)]
        aggregate: Option<PathBuf>,
    },
    /// Render PDR / delay / overhead charts from an aggregate CSV.
    Chart {
        /// Aggregate CSV produced by `sweep`.
        #[arg(long)]
        aggregate: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the small-topology validation oracles.
    Oracle {
        /// Fewer random graphs for a fast smoke run.
        #[arg(long)]
        quick: bool,
    },
}

fn load_config(common: &CommonOpts) -> Result<ScenarioConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            match ScenarioConfig::parse(&text) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("invalid configuration {}:\n{e}", path.display());
                    std::process::exit(2);
                }
            }
        }
        None => ScenarioConfig::default(),
    };
    {
        let mut apply = |key: &str, value: String| -> Result<()> {
            cfg.set(key, &value).map_err(|e| anyhow::anyhow!("--{key}: {e}"))
        };
        if let Some(seed) = common.seed {
            apply("seed", seed.to_string())?;
        }
        if let Some(nodes) = common.nodes {
            apply("nodes", nodes.to_string())?;
        }
    }
    if let Some(attack) = &common.attack {
        cfg.set("attack", attack).map_err(|e| anyhow::anyhow!("--attack: {e}"))?;
    }
    if let Some(ratio) = common.ratio {
        cfg.set("attacker_ratio", &ratio.to_string())
            .map_err(|e| anyhow::anyhow!("--ratio: {e}"))?;
    }
    if let Some(placement) = &common.placement {
        cfg.set("placement", placement).map_err(|e| anyhow::anyhow!("--placement: {e}"))?;
    }
    for kv in &common.set {
        let Some((k, v)) = kv.split_once('=') else {
            bail!("--set expects KEY=VALUE, got `{kv}`");
        };
        cfg.set(k.trim(), v.trim()).map_err(|e| anyhow::anyhow!("--set {kv}: {e}"))?;
    }
    let problems = cfg.validate();
    if !problems.is_empty() {
        for p in &problems {
            eprintln!("invalid configuration: {p}");
        }
        std::process::exit(2);
    }
    Ok(cfg)
}

fn init_threads(jobs: usize) {
    if jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
}

struct CsvTrace {
    positions: Option<fs::File>,
    frames: Option<fs::File>,
    routes: Option<fs::File>,
}

impl fanetsim_core::trace::TraceSink for CsvTrace {
    fn record(&mut self, event: &fanetsim_core::trace::TraceEvent) {
        use fanetsim_core::trace::TraceEvent::*;
        use std::io::Write;
        match event {
            Position { t, node, x, y, z } => {
                if let Some(f) = &mut self.positions {
                    let _ = writeln!(f, "{t:.3},{node},{x:.2},{y:.2},{z:.2}");
                }
            }
            Frame { t, node, event, kind, size_bytes } => {
                if let Some(f) = &mut self.frames {
                    let _ = writeln!(f, "{t:.6},{node},{event},{kind:?},{size_bytes}");
                }
            }
            Route { t, node, dest, next_hop, hops, seq, valid } => {
                if let Some(f) = &mut self.routes {
                    let _ = writeln!(f, "{t:.3},{node},{dest},{next_hop},{hops},{seq},{valid}");
                }
            }
        }
    }
    fn wants_positions(&self) -> bool {
        self.positions.is_some()
    }
    fn wants_frames(&self) -> bool {
        self.frames.is_some()
    }
    fn wants_routes(&self) -> bool {
        self.routes.is_some()
    }
}

fn open_trace(path: &Path, header: &str) -> Result<fs::File> {
    use std::io::Write;
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut f = fs::File::create(path)?;
    writeln!(f, "{header}")?;
    Ok(f)
}

fn cmd_run(
    common: CommonOpts,
    dump_trajectory: Option<PathBuf>,
    dump_frames: Option<PathBuf>,
    dump_routes: Option<PathBuf>,
) -> Result<()> {
    let cfg = load_config(&common)?;
    let wants_trace =
        dump_trajectory.is_some() || dump_frames.is_some() || dump_routes.is_some();
    let record = if wants_trace {
        let mut sink = CsvTrace {
            positions: dump_trajectory
                .as_deref()
                .map(|p| open_trace(p, "time,node,x,y,z"))
                .transpose()?,
            frames: dump_frames
                .as_deref()
                .map(|p| open_trace(p, "time,node,event,kind,size"))
                .transpose()?,
            routes: dump_routes
                .as_deref()
                .map(|p| open_trace(p, "time,node,dest,next_hop,hops,seq,valid"))
                .transpose()?,
        };
        let sim = fanetsim_core::sim::Sim::with_sink(cfg.sim_config(), Some(&mut sink))
            .map_err(|e| anyhow::anyhow!("building simulation: {e}"))?;
        let out = sim.run();
        fanetsim::runner::RunRecord {
            seed: cfg.seed,
            alpha: cfg.alpha,
            nodes: cfg.nodes,
            attack: cfg.attack,
            placement: cfg.placement,
            ratio: cfg.attacker_ratio,
            metrics: out.metrics,
            conservation_ok: out.conservation_ok,
            fallback_random_placement: out.fallback_random_placement,
            events: out.events_dispatched,
        }
    } else {
        run_scenario(&cfg).map_err(|e| anyhow::anyhow!("building simulation: {e}"))?
    };

    fs::create_dir_all(&common.out)?;
    let path = common.out.join("run.csv");
    fs::write(&path, format!("{RUN_CSV_HEADER}\n{}\n", record.csv_row()))?;
    println!("{RUN_CSV_HEADER}");
    println!("{}", record.csv_row());
    if record.fallback_random_placement {
        eprintln!("warning: on-active-route placement found no relays; fell back to random");
    }
    if !record.conservation_ok {
        bail!("packet conservation violated");
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_sweep(common: CommonOpts, serial: bool) -> Result<()> {
    init_threads(common.jobs);
    let cfg = load_config(&common)?;
    let runs = sweep::expand(&cfg);
    eprintln!(
        "sweep: {} runs over densities {:?}, seeds {:?}",
        runs.len(),
        cfg.densities,
        cfg.seeds
    );
    let started = std::time::Instant::now();
    let records =
        sweep::execute(&runs, !serial).map_err(|e| anyhow::anyhow!("sweep run failed: {e}"))?;
    eprintln!("sweep finished in {:.1}s", started.elapsed().as_secs_f64());
    if let Some(bad) = records.iter().find(|r| !r.conservation_ok) {
        bail!("packet conservation violated in seed {} / {}", bad.seed, bad.series());
    }
    let rows = sweep::aggregate(&records);
    fs::create_dir_all(&common.out)?;
    let runs_path = common.out.join("runs.csv");
    let agg_path = common.out.join("aggregate.csv");
    fs::write(&runs_path, sweep::runs_csv(&records))?;
    fs::write(&agg_path, sweep::aggregate_csv(&rows))?;

    println!(
        "{:<6} {:<16} {:>6} {:>9} {:>10} {:>10}",
        "nodes", "series", "ratio", "pdr", "e2e_s", "overhead"
    );
    for row in &rows {
        println!(
            "{:<6} {:<16} {:>5}% {:>8.2}% {:>10.4} {:>10.2}",
            row.nodes,
            row.series,
            row.ratio_pct,
            row.pdr_mean * 100.0,
            row.e2e_mean,
            row.overhead_mean
        );
    }
    println!("wrote {} and {}", runs_path.display(), agg_path.display());
    Ok(())
}

fn print_outcomes(outcomes: &[fanetsim::trends::RuleOutcome], label: &str) {
    println!("trend rules against {label}:");
    for o in outcomes {
        println!(
            "  [{}] {} (worst margin {:+.3})",
            if o.pass { "PASS" } else { "FAIL" },
            o.name,
            o.margin
        );
        if !o.pass {
            for d in &o.detail {
                println!("      {d}");
            }
            for m in &o.missing {
                println!("      missing cell: {m}");
            }
        }
    }
}

fn cmd_check(aggregate: Option<PathBuf>) -> Result<()> {
    let outcomes = match &aggregate {
        None => {
            let table = ReferenceTable::embedded();
            let outcomes = check_trends(&table);
            print_outcomes(&outcomes, "embedded reference values");
            outcomes
        }
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let view = SweepView::from_csv(&text, path.display().to_string())
                .map_err(|e| anyhow::anyhow!(e))?;
            let outcomes = check_trends(&view);
            print_outcomes(&outcomes, &path.display().to_string());
            outcomes
        }
    };
    if !all_pass(&outcomes) {
        std::process::exit(1);
    }
    Ok(())
}

fn cmd_chart(aggregate: PathBuf, out: PathBuf) -> Result<()> {
    let text = fs::read_to_string(&aggregate)
        .with_context(|| format!("reading {}", aggregate.display()))?;
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with("nodes,") || line.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            bail!("aggregate line {}: expected 10 fields", idx + 1);
        }
        rows.push(fanetsim::sweep::AggregateRow {
            nodes: f[0].parse()?,
            series: f[1].into(),
            ratio_pct: f[2].parse()?,
            runs: f[3].parse()?,
            pdr_mean: f[4].parse()?,
            pdr_sd: f[5].parse()?,
            e2e_mean: f[6].parse()?,
            e2e_sd: f[7].parse()?,
            overhead_mean: f[8].parse()?,
            overhead_sd: f[9].parse()?,
        });
    }
    let densities: Vec<usize> = {
        let mut d: Vec<usize> = rows.iter().map(|r| r.nodes).collect();
        d.sort_unstable();
        d.dedup();
        d
    };
    fs::create_dir_all(&out)?;
    let mut written = 0;
    for nodes in densities {
        for (spec, stem) in standard_charts().iter().zip(["pdr", "e2e", "overhead"]) {
            if let Some(svg) = render_chart(&rows, nodes, spec) {
                let path = out.join(format!("{stem}_{nodes}nodes.svg"));
                fs::write(&path, svg)?;
                println!("wrote {}", path.display());
                written += 1;
            }
        }
    }
    if written == 0 {
        eprintln!("warning: no aggregate rows, no charts written");
    }
    Ok(())
}

fn cmd_oracle(quick: bool) -> Result<()> {
    let outcomes = oracle::run_all(quick);
    let mut ok = true;
    for o in &outcomes {
        println!("  [{}] {}: {}", if o.pass { "PASS" } else { "FAIL" }, o.name, o.detail);
        ok &= o.pass;
    }
    if !ok {
        std::process::exit(1);
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { common, dump_trajectory, dump_frames, dump_routes } => {
            cmd_run(common, dump_trajectory, dump_frames, dump_routes)
        }
        Command::Sweep { common, serial } => cmd_sweep(common, serial),
        Command::Check { aggregate } => cmd_check(aggregate),
        Command::Chart { aggregate, out } => cmd_chart(aggregate, out),
        Command::Oracle { quick } => cmd_oracle(quick),
    }
}
