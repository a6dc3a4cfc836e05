use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tourplan::bench::{
    environment_note, generate_grid_city, grid_city, run_quality_suite, run_timing_suite, GridCitySpec,
    TimingConfig,
};
use tourplan::cli::{load_with_banner, run_scripted, Choice, Session, SessionOptions};
use tourplan::{load_city_graph, ClosureOptions, Heuristic, DEFAULT_EXACT_CAP};

#[derive(Parser)]
#[command(name = "tourplan", version, about = "Shortest closed walking tour through points of a city")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct RunArgs {
    /// Vertex file: `id lat lon` per line.
    vertices: Option<PathBuf>,
    /// Edge file: `from to weight` per line.
    edges: Option<PathBuf>,
    /// Treat edges as one-way.
    #[arg(long)]
    directed: bool,
    /// A* heuristic for small terminal sets.
    #[arg(long, value_enum, default_value_t = HeuristicArg::Euclidean)]
    heuristic: HeuristicArg,
    /// Use pairwise A* up to this many points, one Dijkstra per point above.
    #[arg(long, default_value_t = 5)]
    astar_threshold: usize,
    /// Largest point count the exact option accepts.
    #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
    exact_cap: usize,
    /// Also print the street-level vertex sequence.
    #[arg(long)]
    verbose: bool,
    /// Lift the exact option's size limit.
    #[arg(long)]
    extreme: bool,
    /// Non-interactive: plan this URL and exit.
    #[arg(long, requires = "algo")]
    url: Option<String>,
    /// Menu option to run with --url.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5), requires = "url")]
    algo: Option<u8>,
}

#[derive(Clone, Copy, ValueEnum)]
enum HeuristicArg {
    Euclidean,
    Manhattan,
}

impl From<HeuristicArg> for Heuristic {
    fn from(h: HeuristicArg) -> Self {
        match h {
            HeuristicArg::Euclidean => Heuristic::Euclidean,
            HeuristicArg::Manhattan => Heuristic::Manhattan,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Time the solvers and measure approximation quality.
    Bench(BenchArgs),
    /// Write a synthetic grid city as vertex and edge files.
    GenGrid(GenGridArgs),
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, default_value_t = 100)]
    rows: usize,
    #[arg(long, default_value_t = 100)]
    cols: usize,
    /// Block length in meters.
    #[arg(long, default_value_t = 80.0)]
    spacing: f64,
    /// Jitter as a fraction of the spacing, below 0.5.
    #[arg(long, default_value_t = 0.2)]
    perturbation: f64,
    #[arg(long, default_value_t = 7)]
    grid_seed: u64,
}

#[derive(Args)]
struct GenGridArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Directory for vertices.txt and edges.txt.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

impl GridArgs {
    fn spec(&self) -> GridCitySpec {
        GridCitySpec {
            rows: self.rows,
            cols: self.cols,
            spacing_m: self.spacing,
            perturbation: self.perturbation,
            seed: self.grid_seed,
        }
    }
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark on this vertex file instead of a generated grid.
    #[arg(long, requires = "edges")]
    vertices: Option<PathBuf>,
    #[arg(long, requires = "vertices")]
    edges: Option<PathBuf>,
    #[command(flatten)]
    grid: GridArgs,
    /// Point counts to time.
    #[arg(long, value_delimiter = ',', default_values_t = [5usize, 10, 15, 20])]
    ns: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    trials: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// CSV output; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 12)]
    quality_n: usize,
    /// Set to 0 to skip the quality run.
    #[arg(long, default_value_t = 50)]
    quality_trials: usize,
    #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
    exact_cap: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Some(Command::Bench(args)) => bench(args),
        Some(Command::GenGrid(args)) => gen_grid(args),
        None => run(cli.run),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(args: RunArgs) -> Result<u8> {
    let (Some(vertices), Some(edges)) = (&args.vertices, &args.edges) else {
        bail!("usage: tourplan <VERTICES> <EDGES> (see --help)");
    };
    let options = SessionOptions {
        heuristic: args.heuristic.into(),
        astar_threshold: args.astar_threshold,
        exact_cap: args.exact_cap,
        verbose: args.verbose,
        extreme: args.extreme,
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let Some(graph) = load_with_banner(vertices, edges, args.directed, &mut out)? else {
        return Ok(1);
    };
    let code = match (args.url, args.algo) {
        (Some(url), Some(algo)) => {
            let choice = Choice::from_number(algo).expect("range checked by clap");
            run_scripted(&graph, options, &url, choice, &mut out)?
        }
        _ => Session::new(&graph, options).run(&mut io::stdin().lock(), &mut out)?,
    };
    Ok(code as u8)
}

fn gen_grid(args: GenGridArgs) -> Result<u8> {
    std::fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let (v, e) = generate_grid_city(&args.grid.spec(), &args.out_dir)?;
    println!("{}\n{}", v.display(), e.display());
    Ok(0)
}

fn bench(args: BenchArgs) -> Result<u8> {
    let graph = match (&args.vertices, &args.edges) {
        (Some(v), Some(e)) => load_city_graph(v, e, false)?.0,
        _ => grid_city(&args.grid.spec())?,
    };
    eprintln!("# {}", environment_note());
    eprintln!("# graph: {} vertices, {} edges", graph.vertex_count(), graph.edge_count());

    let closure = ClosureOptions::default();
    let config = TimingConfig {
        ns: args.ns.clone(),
        trials: args.trials,
        seed: args.seed,
        exact_cap: args.exact_cap,
        closure,
    };
    let mut report = run_timing_suite(&graph, &config)?;
    if args.quality_trials > 0 {
        let quality = run_quality_suite(
            &graph,
            args.quality_n,
            args.quality_trials,
            args.seed,
            args.exact_cap,
            &closure,
        )?;
        for s in &quality.summary {
            eprintln!(
                "# n={} {}: ratio to exact min {:.4} median {:.4} max {:.4}",
                args.quality_n, s.algorithm, s.min, s.median, s.max
            );
        }
        report.rows.extend(quality.report.rows);
    }

    match &args.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            report.write_csv(BufWriter::new(file))?;
        }
        None => {
            let mut out = io::stdout().lock();
            report.write_csv(&mut out)?;
            out.flush()?;
        }
    }
    Ok(0)
}
