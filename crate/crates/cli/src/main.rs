//! empuct: n-step empowerment for the block world. Simulate worlds, compute
//! exact empowerment, pick actions under a forward-call budget, and run the
//! benchmark and bridge experiments.
//!
//! Exit codes: 0 success, 1 usage error, 2 input parse/validation error,
//! 3 runtime (budget or I/O) error.

mod plot;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use empuct::bench::{
    decide, format_benchmark_csv, format_bridge_csv, run_benchmark, run_bridge, write_output,
    BenchConfig, BenchTable, BridgeConfig, BridgeRow, Decision, EmitError, Metric, RunManifest,
    Variant,
};
use empuct::blockworld::{generate_random_world, BlockAction, BlockWorld, Dims};
use empuct::empowerment::{exhaustive_empowerment, EmpowermentReport};
use empuct::scenarios;
use empuct::{ActionId, CallCounter};

const BUILD: &str = env!("GIT_DESCRIBE");

#[derive(Parser)]
#[command(
    name = "empuct",
    version,
    about = "n-step empowerment toolkit for a 3D block world"
)]
struct Cli {
    /// Worker threads for benchmark runs (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Apply a list of actions to a world file, printing world dumps.
    Simulate {
        /// World file to load.
        world: PathBuf,
        /// Action names: move-n/e/s/w (or bare n/e/s/w), act-up/down/n/e/s/w,
        /// wait, destroy.
        actions: Vec<String>,
        /// Dump the world every K actions (the final state always prints).
        #[arg(long, value_name = "K")]
        dump_every: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exact per-action empowerment of a world by exhaustive search.
    Empower {
        world: PathBuf,
        /// Empowerment horizon (steps after the first action).
        #[arg(long)]
        n: u32,
        /// Optional forward-call ceiling; exceeding it aborts with exit 3.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// One budgeted decision: print the chosen action and statistics.
    Act {
        world: PathBuf,
        #[arg(long)]
        n: u32,
        /// Forward-call budget.
        #[arg(long)]
        budget: u64,
        /// One of: basic, uct, uct-novelty, uct-branching, uct-both, ucta,
        /// ucta-novelty, ucta-branching, ucta-both.
        #[arg(long, value_parser = parse_variant)]
        variant: Variant,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
    /// Random-world benchmark over the nine variants and a fraction sweep.
    Bench {
        #[arg(long, default_value_t = 100)]
        worlds: usize,
        #[arg(long, default_value_t = 4)]
        n: u32,
        /// Comma-separated budget fractions, e.g. `1/2,1/4,0.1`.
        /// Default: 1/2 down to 1/2048.
        #[arg(long, value_parser = parse_fractions)]
        fractions: Option<Fractions>,
        #[arg(long, value_parser = parse_dims, default_value = "7x7x7")]
        dims: Dims,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (default: $EMPUCT_OUT_DIR or ./empuct-out).
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Also render the two CSVs as SVG line charts.
        #[arg(long)]
        plot: bool,
    },
    /// Bridge-scenario experiment: bridge-ward rate per variant and budget.
    Bridge {
        /// Comma-separated forward-call budgets.
        #[arg(long, value_parser = parse_budgets, default_value = "10000")]
        budgets: Budgets,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, default_value_t = 10)]
        n: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Emit a world file: seeded random world or a named scenario.
    GenWorld {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = parse_dims, default_value = "7x7x7")]
        dims: Dims,
        /// Named scenario instead of a random world (available: bridge).
        #[arg(long)]
        scenario: Option<String>,
        /// Write to a file instead of stdout.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone)]
struct Fractions(Vec<f64>);

#[derive(Clone)]
struct Budgets(Vec<u64>);

enum CliError {
    Input(String),
    Runtime(String),
}

impl From<EmitError> for CliError {
    fn from(e: EmitError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn main() {
    // die quietly when stdout is closed early (e.g. piped into `head`)
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if cli.jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global();
    }
    match run(cli.command) {
        Ok(()) => {}
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(3);
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Simulate {
            world,
            actions,
            dump_every,
            seed,
        } => cmd_simulate(&world, &actions, dump_every, seed),
        Command::Empower {
            world,
            n,
            budget,
            json,
            seed,
        } => cmd_empower(&world, n, budget, json, seed),
        Command::Act {
            world,
            n,
            budget,
            variant,
            seed,
            json,
        } => cmd_act(&world, n, budget, variant, seed, json),
        Command::Bench {
            worlds,
            n,
            fractions,
            dims,
            seed,
            out_dir,
            plot,
        } => cmd_bench(worlds, n, fractions, dims, seed, out_dir, plot),
        Command::Bridge {
            budgets,
            runs,
            n,
            seed,
            out_dir,
        } => cmd_bridge(budgets, runs, n, seed, out_dir),
        Command::GenWorld {
            seed,
            dims,
            scenario,
            out,
        } => cmd_gen_world(seed, dims, scenario, out),
    }
}

fn load_world(path: &Path) -> Result<BlockWorld, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    BlockWorld::parse(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn action_name(id: ActionId) -> &'static str {
    BlockAction::from_id(id)
        .map(BlockAction::name)
        .unwrap_or("?")
}

fn cmd_simulate(
    path: &Path,
    actions: &[String],
    dump_every: Option<usize>,
    seed: u64,
) -> Result<(), CliError> {
    let mut world = load_world(path)?;
    let actions: Vec<BlockAction> = actions
        .iter()
        .map(|name| {
            BlockAction::parse(name)
                .ok_or_else(|| CliError::Input(format!("unknown action name `{name}`")))
        })
        .collect::<Result<_, _>>()?;
    println!("seed: {seed}");
    for (i, action) in actions.iter().enumerate() {
        world = world.apply_action(*action);
        if let Some(every) = dump_every {
            if every > 0 && (i + 1) % every == 0 && i + 1 < actions.len() {
                println!("-- after {} actions ({}) --", i + 1, action.name());
                print!("{}", world.to_text());
            }
        }
    }
    println!(
        "-- final: tick {}, agent {}, {} --",
        world.tick(),
        world.agent_pos(),
        if world.alive() { "alive" } else { "dead" }
    );
    print!("{}", world.to_text());
    Ok(())
}

#[derive(Serialize)]
struct ActionValue {
    action: usize,
    name: &'static str,
    count: u64,
    bits: f64,
}

fn action_values(report: &EmpowermentReport) -> Vec<ActionValue> {
    report
        .entries()
        .iter()
        .map(|&(a, c)| ActionValue {
            action: a.0,
            name: action_name(a),
            count: c,
            bits: (c as f64).log2(),
        })
        .collect()
}

fn cmd_empower(
    path: &Path,
    n: u32,
    budget: Option<u64>,
    json: bool,
    seed: u64,
) -> Result<(), CliError> {
    let world = load_world(path)?;
    let mut counter = match budget {
        Some(b) => CallCounter::with_budget(b),
        None => CallCounter::unlimited(),
    };
    let report = exhaustive_empowerment(&world, n, &mut counter)
        .map_err(|e| CliError::Runtime(format!("{e}; partial results suppressed")))?;

    if json {
        #[derive(Serialize)]
        struct Output {
            seed: u64,
            horizon: u32,
            calls_used: u64,
            best_action: usize,
            per_action: Vec<ActionValue>,
        }
        let out = Output {
            seed,
            horizon: report.horizon(),
            calls_used: report.calls_used(),
            best_action: report.best_action().0,
            per_action: action_values(&report),
        };
        println!(
            "{}",
            serde_json::to_string_pretty(&out).expect("serializable")
        );
    } else {
        println!("seed: {seed}");
        println!("horizon: {n}");
        println!("calls used: {}", report.calls_used());
        println!("{:>3}  {:<9} {:>8}  {:>8}", "id", "action", "count", "bits");
        for v in action_values(&report) {
            println!(
                "{:>3}  {:<9} {:>8}  {:>8.3}",
                v.action, v.name, v.count, v.bits
            );
        }
        let (best, count) = report.best();
        println!(
            "best: {} ({}) with {} reachable states",
            best,
            action_name(best),
            count
        );
    }
    Ok(())
}

fn cmd_act(
    path: &Path,
    n: u32,
    budget: u64,
    variant: Variant,
    seed: u64,
    json: bool,
) -> Result<(), CliError> {
    let world = load_world(path)?;
    let Decision {
        action,
        report,
        root_children,
    } = decide(&world, variant, n, budget, seed);
    if report.degenerate() {
        eprintln!(
            "warning: budget {budget} cannot fund a single rollout at horizon {n}; \
             returning a uniform random action"
        );
    }

    if json {
        #[derive(Serialize)]
        struct Output {
            seed: u64,
            variant: &'static str,
            action: usize,
            action_name: &'static str,
            degenerate: bool,
            calls_used: u64,
            per_action: Vec<ActionValue>,
            root_children: Vec<empuct::uct::RootChildStat>,
        }
        let out = Output {
            seed,
            variant: variant.label(),
            action: action.0,
            action_name: action_name(action),
            degenerate: report.degenerate(),
            calls_used: report.calls_used(),
            per_action: action_values(&report),
            root_children,
        };
        println!(
            "{}",
            serde_json::to_string_pretty(&out).expect("serializable")
        );
    } else {
        println!("seed: {seed}");
        println!("variant: {}", variant.label());
        println!("calls used: {}", report.calls_used());
        println!("chosen action: {} ({})", action, action_name(action));
        if root_children.is_empty() {
            println!("{:>3}  {:<9} {:>8}", "id", "action", "count");
            for v in action_values(&report) {
                println!("{:>3}  {:<9} {:>8}", v.action, v.name, v.count);
            }
        } else {
            println!(
                "{:>3}  {:<9} {:>7} {:>7} {:>7}",
                "id", "action", "visits", "states", "unique"
            );
            for c in &root_children {
                println!(
                    "{:>3}  {:<9} {:>7} {:>7} {:>7}",
                    c.action.0,
                    action_name(c.action),
                    c.visits,
                    c.states,
                    c.unique
                );
            }
        }
    }
    Ok(())
}

fn out_dir_or_default(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("EMPUCT_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("empuct-out"))
}

fn manifest(
    command: &str,
    seed: u64,
    config: serde_json::Value,
    outputs: &[PathBuf],
) -> RunManifest {
    RunManifest {
        tool: format!("empuct {}", env!("CARGO_PKG_VERSION")),
        build: BUILD.to_string(),
        command: command.to_string(),
        seed,
        config,
        outputs: outputs
            .iter()
            .map(|p| {
                p.file_name()
                    .unwrap_or_default()
                    .to_string_lossy()
                    .into_owned()
            })
            .collect(),
    }
}

fn bench_series(table: &BenchTable, metric: Metric) -> Vec<plot::Series> {
    let mut fractions = table.fractions.clone();
    fractions.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Variant::ALL
        .iter()
        .map(|&v| plot::Series {
            name: v.label().to_string(),
            points: fractions
                .iter()
                .map(|&f| {
                    let y = match metric {
                        Metric::OptimalRatio => table.mean_optimal(v, f),
                        Metric::RelativePerformance => table.mean_relative(v, f),
                    };
                    (f * 100.0, y)
                })
                .collect(),
        })
        .collect()
}

fn cmd_bench(
    worlds: usize,
    n: u32,
    fractions: Option<Fractions>,
    dims: Dims,
    seed: u64,
    out_dir: Option<PathBuf>,
    with_plot: bool,
) -> Result<(), CliError> {
    let fractions = fractions
        .map(|f| f.0)
        .unwrap_or_else(|| (1..=11).map(|i| 1.0 / f64::from(1u32 << i)).collect());
    let config = BenchConfig {
        worlds,
        horizon_n: n,
        fractions,
        seed,
        dims,
    };
    println!("seed: {seed}");
    println!(
        "running {} worlds x 9 variants x {} fractions (horizon {})...",
        config.worlds,
        config.fractions.len(),
        n
    );
    let table = run_benchmark(&config);

    let dir = out_dir_or_default(out_dir);
    let mut outputs = Vec::new();
    for metric in [Metric::OptimalRatio, Metric::RelativePerformance] {
        let csv = format_benchmark_csv(&table, metric)?;
        outputs.push(write_output(&dir, metric.file_name(), &csv)?);
        if with_plot {
            let (title, y_label) = match metric {
                Metric::OptimalRatio => {
                    ("Ratio of optimal decisions", "ratio of optimal decisions")
                }
                Metric::RelativePerformance => (
                    "Average relative performance",
                    "average relative performance",
                ),
            };
            let svg = plot::line_chart(
                title,
                "forward calls in % of exhaustive search",
                y_label,
                &bench_series(&table, metric),
                true,
            );
            let name = metric.file_name().replace(".csv", ".svg");
            outputs.push(write_output(&dir, &name, &svg)?);
        }
    }
    let config_json = serde_json::to_value(&config).expect("serializable");
    manifest("bench", seed, config_json, &outputs).save(&dir)?;
    for path in &outputs {
        println!("wrote {}", path.display());
    }
    println!("wrote {}", dir.join("manifest.json").display());
    Ok(())
}

fn cmd_bridge(
    budgets: Budgets,
    runs: usize,
    n: u32,
    seed: u64,
    out_dir: Option<PathBuf>,
) -> Result<(), CliError> {
    let config = BridgeConfig {
        budgets: budgets.0,
        runs_per_budget: runs,
        horizon_n: n,
        seed,
    };
    println!("seed: {seed}");
    let rows = run_bridge(&config);

    println!("{:<16} {:>10} {:>12}", "variant", "budget", "bridge-ward");
    let mut sorted: Vec<&BridgeRow> = rows.iter().collect();
    sorted.sort_by_key(|r| (r.budget, Variant::ALL.iter().position(|v| *v == r.variant)));
    for row in sorted {
        println!(
            "{:<16} {:>10} {:>12.2}",
            row.variant.label(),
            row.budget,
            row.fraction
        );
    }

    let dir = out_dir_or_default(out_dir);
    let csv = format_bridge_csv(&rows)?;
    let path = write_output(&dir, "bridge.csv", &csv)?;
    let config_json = serde_json::to_value(&config).expect("serializable");
    manifest("bridge", seed, config_json, std::slice::from_ref(&path)).save(&dir)?;
    println!("wrote {}", path.display());
    println!("wrote {}", dir.join("manifest.json").display());
    Ok(())
}

fn cmd_gen_world(
    seed: u64,
    dims: Dims,
    scenario: Option<String>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let text = match scenario {
        Some(name) => scenarios::by_name(&name)
            .ok_or_else(|| {
                CliError::Input(format!("unknown scenario `{name}` (available: bridge)"))
            })?
            .to_string(),
        None => generate_random_world(seed, dims).to_text(),
    };
    // the seed note goes to stderr so stdout stays a valid world file
    eprintln!("seed: {seed}");
    match out {
        Some(path) => {
            fs::write(&path, text)
                .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
            println!("wrote {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    Variant::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Variant::ALL.iter().map(|v| v.cli_name()).collect();
        format!(
            "unknown variant `{s}` (expected one of: {})",
            names.join(", ")
        )
    })
}

fn parse_dims(s: &str) -> Result<Dims, String> {
    let parts: Vec<&str> = s.split('x').collect();
    if parts.len() != 3 {
        return Err(format!("expected DIMS like 7x7x7, got `{s}`"));
    }
    let mut values = [0usize; 3];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part
            .parse::<usize>()
            .ok()
            .filter(|v| (1..=u16::MAX as usize).contains(v))
            .ok_or_else(|| format!("bad dimension `{part}`"))?;
    }
    Ok(Dims::new(values[0], values[1], values[2]))
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let value = if let Some((num, den)) = s.split_once('/') {
        let num: f64 = num
            .trim()
            .parse()
            .map_err(|_| format!("bad fraction `{s}`"))?;
        let den: f64 = den
            .trim()
            .parse()
            .map_err(|_| format!("bad fraction `{s}`"))?;
        num / den
    } else {
        s.trim()
            .parse()
            .map_err(|_| format!("bad fraction `{s}`"))?
    };
    if value > 0.0 && value <= 1.0 {
        Ok(value)
    } else {
        Err(format!("fraction `{s}` must lie in (0, 1]"))
    }
}

fn parse_fractions(s: &str) -> Result<Fractions, String> {
    s.split(',')
        .map(parse_fraction)
        .collect::<Result<Vec<_>, _>>()
        .map(Fractions)
}

fn parse_budgets(s: &str) -> Result<Budgets, String> {
    s.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| format!("bad budget `{part}`"))
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Budgets)
}
