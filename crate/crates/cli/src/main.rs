//! `lpp` — last passage percolation on the complete graph.
//!
//! Subcommands cover instance generation, exact solves, DFS traces, the
//! threshold lower-bound pipeline, the closed-form bound calculators, and
//! seeded Monte Carlo campaigns. Every output embeds its full config
//! (including defaulted values); rerunning with the embedded seed
//! reproduces the artifact byte for byte at any `--jobs` setting.
//!
//! Exit codes: 0 ok, 2 configuration/usage error, 3 precondition violated,
//! 4 internal failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use lpp_core::analysis::{
    deviation_constants, estimate_deviation, estimate_time_constant, optimize_epsilon,
    sandwich_experiment, variance_upper_bound, xbar, CampaignReport, DeviationConstants,
};
use lpp_core::dfs::run_dfs;
use lpp_core::exact::exact_wn;
use lpp_core::graph::{sample_weights, threshold_subgraph, EdgeWeights, SimpleGraph};
use lpp_core::paths::{best_threshold_lower_bound, default_tau_grid, threshold_lower_bound};
use lpp_core::rng::replicate_rng;
use lpp_core::{Error, WeightDistribution};

#[derive(Parser)]
#[command(
    name = "lpp",
    version,
    about = "Last passage percolation on the complete graph K_n",
    after_help = "Distribution specs: twopoint:a=1,b=2,p0=0.05 | uniform:lo=0,hi=1 | \
                  exp:lambda=1 | pareto:alpha=2,scale=1\n\
                  All randomness flows from --seed; without it a fresh seed is drawn \
                  and printed so the run stays reproducible."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an edge-weight instance and dump it as CSV (i,j,weight rows,
    /// 17 significant digits; config echoed as # comments)
    Gen(GenArgs),
    /// Exact W_n by subset dynamic programming (n <= 22)
    Exact(ExactArgs),
    /// Run the DFS process and emit the per-step state table as CSV
    DfsTrace(DfsTraceArgs),
    /// Threshold/DFS/surgery lower bound on W_n over a threshold grid
    LowerBound(LowerBoundArgs),
    /// Closed-form bound calculators (deviation constants, f/g, xbar,
    /// variance bound)
    Bounds(BoundsArgs),
    /// Seeded Monte Carlo campaigns (time-constant, deviation, sandwich)
    Campaign(CampaignArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Distribution spec string
    #[arg(long)]
    dist: String,
    /// Vertex count (>= 2)
    #[arg(long)]
    n: usize,
    /// Master seed; drawn from entropy and printed when absent
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExactArgs {
    /// Distribution spec string (with --n/--seed; exclusive with --weights)
    #[arg(long, conflicts_with = "weights")]
    dist: Option<String>,
    #[arg(long, conflicts_with = "weights")]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Load the instance from a weights CSV instead of sampling
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DfsTraceArgs {
    /// Edge-list file ("i j" per line, # comments, optional "# n=" directive)
    #[arg(long, conflicts_with_all = ["dist", "n", "seed", "tau"])]
    graph: Option<PathBuf>,
    /// Distribution spec string: sample weights and threshold them at --tau
    #[arg(long, requires = "n", requires = "tau")]
    dist: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Keep edges with weight strictly above this threshold
    #[arg(long)]
    tau: Option<f64>,
    /// Also write the graph the DFS ran on, as an edge list
    #[arg(long)]
    graph_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LowerBoundArgs {
    #[arg(long, conflicts_with = "weights")]
    dist: Option<String>,
    #[arg(long, conflicts_with = "weights")]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    weights: Option<PathBuf>,
    /// Single threshold (exclusive with --tau-grid; default: empirical
    /// weight quantiles 0.05..0.95)
    #[arg(long, conflicts_with = "tau_grid")]
    tau: Option<f64>,
    /// Comma-separated threshold list
    #[arg(long)]
    tau_grid: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    dist: String,
    /// Deviation depth for the Theorem-3 constants (bounded laws)
    #[arg(long)]
    x: Option<f64>,
    /// Fixed epsilon; when absent and --n is given, the grid optimum is used
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// Evaluate the reference long-path length for G(n, theta/n)
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CampaignKind {
    TimeConstant,
    Deviation,
    Sandwich,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
#[command(after_help = "CSV columns: n, mode (exact|lower-bound), quantity \
(w_over_n|event_w_le_threshold|lower_bound_ratio), replicates, mean, variance, \
ci_half_width, event_count, p_hat, ln_p_hat, wilson_low, wilson_high, floor, \
insufficient, freq_upper_event, union_bound_prediction. Config rides along as \
leading # comments; empty cells mean the column does not apply to the campaign.")]
struct CampaignArgs {
    /// Which experiment to run
    #[arg(long)]
    kind: CampaignKind,
    #[arg(long)]
    dist: String,
    /// Comma-separated n values (sandwich takes exactly one)
    #[arg(long)]
    n_list: String,
    #[arg(long)]
    replicates: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Deviation depth (deviation campaign only)
    #[arg(long)]
    x: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads for replicate parallelism; never affects output bytes
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Parse(_) | Error::InvalidParameter(_) => ExitCode::from(2),
                Error::Precondition(_) => ExitCode::from(3),
                Error::Io(_) => ExitCode::from(4),
            }
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Gen(args) => cmd_gen(args),
        Command::Exact(args) => cmd_exact(args),
        Command::DfsTrace(args) => cmd_dfs_trace(args),
        Command::LowerBound(args) => cmd_lower_bound(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Campaign(args) => cmd_campaign(args),
    }
}

/// Resolves the seed, drawing one from entropy (and announcing it) when the
/// flag was absent.
fn resolve_seed(seed: Option<u64>) -> u64 {
    match seed {
        Some(s) => s,
        None => {
            let s: u64 = rand::random();
            eprintln!("seed: {s} (drawn from entropy; pass --seed {s} to reproduce)");
            s
        }
    }
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, content).map_err(Error::from),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_dist(spec: &str) -> Result<WeightDistribution, Error> {
    spec.parse()
}

fn cmd_gen(args: GenArgs) -> Result<(), Error> {
    let dist = parse_dist(&args.dist)?;
    let seed = resolve_seed(args.seed);
    let weights = sample_weights(args.n, &dist, &mut replicate_rng(seed, 0))?;
    let mut buf = Vec::new();
    use std::io::Write;
    writeln!(buf, "# schema: 1").map_err(Error::from)?;
    writeln!(buf, "# command: gen").map_err(Error::from)?;
    writeln!(buf, "# dist: {dist}").map_err(Error::from)?;
    writeln!(buf, "# n: {}", args.n).map_err(Error::from)?;
    writeln!(buf, "# seed: {seed}").map_err(Error::from)?;
    weights.write_csv(&mut buf)?;
    emit(&args.out, &String::from_utf8(buf).expect("ascii output"))
}

/// Instance source shared by `exact` and `lower-bound`: either a sampled
/// (dist, n, seed) triple or a weights CSV.
fn load_instance(
    dist: &Option<String>,
    n: Option<usize>,
    seed: Option<u64>,
    weights: &Option<PathBuf>,
) -> Result<(EdgeWeights, InstanceEcho), Error> {
    match (weights, dist) {
        (Some(path), _) => {
            let mut file = fs::File::open(path)?;
            let w = EdgeWeights::read_csv(&mut file)?;
            let echo = InstanceEcho {
                dist: None,
                n: w.n(),
                seed: None,
                weights_file: Some(path.display().to_string()),
            };
            Ok((w, echo))
        }
        (None, Some(spec)) => {
            let d = parse_dist(spec)?;
            let n = n.ok_or_else(|| Error::Parse("--n is required with --dist".into()))?;
            let seed = resolve_seed(seed);
            let w = sample_weights(n, &d, &mut replicate_rng(seed, 0))?;
            let echo = InstanceEcho {
                dist: Some(d.to_string()),
                n,
                seed: Some(seed),
                weights_file: None,
            };
            Ok((w, echo))
        }
        (None, None) => Err(Error::Parse("provide --dist/--n or --weights".into())),
    }
}

#[derive(Serialize)]
struct InstanceEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    dist: Option<String>,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    weights_file: Option<String>,
}

#[derive(Serialize)]
struct ExactOutput {
    schema: u32,
    command: &'static str,
    config: InstanceEcho,
    value: f64,
    witness: String,
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    s
}

fn cmd_exact(args: ExactArgs) -> Result<(), Error> {
    let (weights, config) = load_instance(&args.dist, args.n, args.seed, &args.weights)?;
    let result = exact_wn(&weights)?;
    let out = ExactOutput {
        schema: 1,
        command: "exact",
        config,
        value: result.value,
        witness: result.witness.to_string(),
    };
    emit(&args.out, &to_pretty_json(&out))
}

fn cmd_dfs_trace(args: DfsTraceArgs) -> Result<(), Error> {
    use std::io::Write;
    let mut buf = Vec::new();
    writeln!(buf, "# schema: 1").map_err(Error::from)?;
    writeln!(buf, "# command: dfs-trace").map_err(Error::from)?;
    let graph: SimpleGraph = match (&args.graph, &args.dist) {
        (Some(path), _) => {
            let mut file = fs::File::open(path)?;
            let g = SimpleGraph::read_edgelist(&mut file)?;
            writeln!(buf, "# graph: {}", path.display()).map_err(Error::from)?;
            writeln!(buf, "# n: {}", g.n()).map_err(Error::from)?;
            writeln!(buf, "# edges: {}", g.edge_count()).map_err(Error::from)?;
            g
        }
        (None, Some(spec)) => {
            let d = parse_dist(spec)?;
            let n = args.n.ok_or_else(|| Error::Parse("--n is required with --dist".into()))?;
            let tau =
                args.tau.ok_or_else(|| Error::Parse("--tau is required with --dist".into()))?;
            let seed = resolve_seed(args.seed);
            let w = sample_weights(n, &d, &mut replicate_rng(seed, 0))?;
            let g = threshold_subgraph(&w, tau);
            writeln!(buf, "# dist: {d}").map_err(Error::from)?;
            writeln!(buf, "# n: {n}").map_err(Error::from)?;
            writeln!(buf, "# seed: {seed}").map_err(Error::from)?;
            writeln!(buf, "# tau: {tau}").map_err(Error::from)?;
            writeln!(buf, "# edges: {}", g.edge_count()).map_err(Error::from)?;
            g
        }
        (None, None) => return Err(Error::Parse("provide --graph or --dist/--n/--tau".into())),
    };
    if let Some(path) = &args.graph_out {
        let mut file = fs::File::create(path)?;
        graph.write_edgelist(&mut file)?;
    }
    let trace = run_dfs(&graph);
    writeln!(buf, "# steps: {}", trace.step_count()).map_err(Error::from)?;
    writeln!(buf, "# epochs: {}", trace.epochs().len()).map_err(Error::from)?;
    trace.write_csv(&mut buf)?;
    emit(&args.out, &String::from_utf8(buf).expect("ascii output"))
}

#[derive(Serialize)]
struct LowerBoundOutput {
    schema: u32,
    command: &'static str,
    config: InstanceEcho,
    tau_grid: Vec<f64>,
    path: String,
    value: f64,
}

fn cmd_lower_bound(args: LowerBoundArgs) -> Result<(), Error> {
    let (weights, config) = load_instance(&args.dist, args.n, args.seed, &args.weights)?;
    let grid: Vec<f64> = if let Some(tau) = args.tau {
        vec![tau]
    } else if let Some(list) = &args.tau_grid {
        list.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad threshold {s:?} in --tau-grid")))
            })
            .collect::<Result<_, _>>()?
    } else {
        default_tau_grid(&weights)
    };
    let (path, value) = if grid.len() == 1 {
        threshold_lower_bound(&weights, grid[0])?
    } else {
        best_threshold_lower_bound(&weights, &grid)?
    };
    let out = LowerBoundOutput {
        schema: 1,
        command: "lower-bound",
        config,
        tau_grid: grid,
        path: path.to_string(),
        value,
    };
    emit(&args.out, &to_pretty_json(&out))
}

#[derive(Serialize)]
struct BoundsConfigEcho {
    dist: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    x: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<f64>,
}

#[derive(Serialize)]
struct BoundsOutput {
    schema: u32,
    command: &'static str,
    config: BoundsConfigEcho,
    essential_supremum: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    constants: Option<DeviationConstants>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    g_n: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    xbar: Option<f64>,
    /// Bound on Var(W_n / n); multiply by n^2 for Var(W_n).
    #[serde(skip_serializing_if = "Option::is_none")]
    variance_upper_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    aks_reference_length: Option<f64>,
}

fn cmd_bounds(args: BoundsArgs) -> Result<(), Error> {
    let dist = parse_dist(&args.dist)?;
    let mut out = BoundsOutput {
        schema: 1,
        command: "bounds",
        config: BoundsConfigEcho {
            dist: dist.to_string(),
            x: args.x,
            epsilon: args.epsilon,
            n: args.n,
            theta: args.theta,
        },
        essential_supremum: dist.essential_supremum().to_string(),
        constants: None,
        f_n: None,
        g_n: None,
        xbar: None,
        variance_upper_bound: None,
        aks_reference_length: None,
    };

    // explicitly requested computations error loudly; the rest are included
    // whenever their preconditions hold
    if let Some(x) = args.x {
        let epsilon = match (args.epsilon, args.n) {
            (Some(e), _) => e,
            (None, Some(n)) => optimize_epsilon(&dist, x, n)?,
            (None, None) => {
                return Err(Error::Parse(
                    "--x needs --epsilon, or --n to optimize epsilon".into(),
                ))
            }
        };
        out.constants = Some(deviation_constants(&dist, x, epsilon)?);
    }
    if let Some(theta) = args.theta {
        let n = args
            .n
            .ok_or_else(|| Error::Parse("--theta needs --n".into()))?;
        out.aks_reference_length = Some(lpp_core::analysis::aks_reference_length(theta, n)?);
    }
    if let Some(n) = args.n {
        if !dist.is_bounded() {
            out.f_n = Some(dist.f_of_n(n)?);
            if n >= 16 {
                out.g_n = Some(dist.g_of_n(n)?);
            }
        } else {
            out.variance_upper_bound = Some(variance_upper_bound(&dist, n)?);
            if dist.is_atomless_at_sup() && n >= 3 {
                out.xbar = Some(xbar(&dist, n)?);
            }
        }
    }
    emit(&args.out, &to_pretty_json(&out))
}

fn parse_n_list(list: &str) -> Result<Vec<usize>, Error> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad n value {s:?} in --n-list")))
        })
        .collect()
}

fn cmd_campaign(args: CampaignArgs) -> Result<(), Error> {
    let dist = parse_dist(&args.dist)?;
    let n_list = parse_n_list(&args.n_list)?;
    let seed = resolve_seed(args.seed);

    let run_campaign = || -> Result<CampaignReport, Error> {
        match args.kind {
            CampaignKind::TimeConstant => {
                if args.x.is_some() {
                    return Err(Error::Parse("--x only applies to the deviation campaign".into()));
                }
                estimate_time_constant(&dist, &n_list, args.replicates, seed)
            }
            CampaignKind::Deviation => {
                let x = args
                    .x
                    .ok_or_else(|| Error::Parse("deviation campaign needs --x".into()))?;
                estimate_deviation(&dist, x, &n_list, args.replicates, seed)
            }
            CampaignKind::Sandwich => {
                if args.x.is_some() {
                    return Err(Error::Parse("--x only applies to the deviation campaign".into()));
                }
                if n_list.len() != 1 {
                    return Err(Error::Parse(
                        "sandwich campaign takes exactly one n in --n-list".into(),
                    ));
                }
                sandwich_experiment(&dist, n_list[0], args.replicates, seed)
            }
        }
    };

    let report = match args.jobs {
        Some(jobs) if jobs > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::Io(e.to_string()))?;
            pool.install(run_campaign)?
        }
        _ => run_campaign()?,
    };

    let rendered = match args.format {
        Format::Json => report.to_json_string(),
        Format::Csv => report.to_csv_string(),
    };
    emit(&args.out, &rendered)
}
