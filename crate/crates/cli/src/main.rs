use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use strips_learn::encoder::EncodeOptions;
use strips_learn::fixtures::gen_fixture;
use strips_learn::graph::write_graph;
use strips_learn::hyperspace::Bounds;
use strips_learn::pipeline::{self, overall, read_report, run_learn, run_verify, RunConfig};
use strips_learn::sat::SolverConfig;

#[derive(Parser)]
#[command(name = "strips-learn", version, about = "Learn lifted STRIPS domains from labeled state graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Search parametrizations for domains that account for the graphs.
    Learn(LearnArgs),
    /// Check a saved solution against test graphs.
    Verify(VerifyArgs),
    /// Write the state graph of a benchmark model.
    Gen(GenArgs),
    /// Print the report of a finished run.
    Report(ReportArgs),
}

#[derive(Args)]
struct SolverArgs {
    /// Solver command; `{cnf}` is replaced by the formula path (appended
    /// when absent). Defaults to the bundled `dimacs-cadical`.
    #[arg(long)]
    solver: Option<String>,
    /// Wall-clock limit per SAT call, in seconds.
    #[arg(long, default_value_t = 3600.0)]
    timeout: f64,
    /// Address-space limit per SAT call, in bytes.
    #[arg(long, default_value_t = 16 << 30)]
    memory: u64,
    /// Directory for temporary formula files.
    #[arg(long)]
    workdir: Option<PathBuf>,
}

impl SolverArgs {
    fn config(&self) -> Result<SolverConfig> {
        let command = match &self.solver {
            Some(s) => s.split_whitespace().map(String::from).collect(),
            None => vec![default_solver()?],
        };
        if self.timeout.is_nan() || self.timeout <= 0.0 {
            bail!("--timeout must be positive");
        }
        let mut c = SolverConfig::new(command, Duration::from_secs_f64(self.timeout));
        c.memory_limit = Some(self.memory);
        if let Some(w) = &self.workdir {
            c.workdir = w.clone();
        }
        Ok(c)
    }
}

fn default_solver() -> Result<String> {
    let exe = std::env::current_exe().context("locating the executable")?;
    let sibling = exe.with_file_name("dimacs-cadical");
    Ok(if sibling.exists() {
        sibling.to_string_lossy().into_owned()
    } else {
        "dimacs-cadical".into()
    })
}

#[derive(Args)]
struct LearnArgs {
    /// Training graphs, one instance layer each.
    #[arg(long = "graph", required = true)]
    graphs: Vec<PathBuf>,
    /// Held-out graphs for verification.
    #[arg(long = "test-graph")]
    test_graphs: Vec<PathBuf>,
    /// `key = value` file with bounds and run options.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Single `key=value` override, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    symmetry_breaking: bool,
    /// Keep the CNF and variable map of every task.
    #[arg(long)]
    dump_theory: bool,
    /// Stop after this many verified solutions.
    #[arg(long)]
    stop_after: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// Solution file as written by `learn`.
    #[arg(long)]
    solution: PathBuf,
    #[arg(long = "test-graph")]
    test_graphs: Vec<PathBuf>,
    /// Object counts to try, `lo..hi` inclusive.
    #[arg(long, default_value = "1..7")]
    objects: String,
    #[arg(long)]
    symmetry_breaking: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct GenArgs {
    /// One of hanoi (disks pegs), gripper (rooms balls grippers),
    /// blocks3 (blocks), grid (width height labels).
    name: String,
    params: Vec<usize>,
    /// Output file; stdout when absent.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Output directory of a `learn` run.
    dir: PathBuf,
    /// Print CSV instead of the text table.
    #[arg(long)]
    csv: bool,
}

fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let (a, b) = s.split_once("..").context("expected lo..hi")?;
    let lo: usize = a.trim().parse().context("range start")?;
    let hi: usize = b.trim().trim_start_matches('=').parse().context("range end")?;
    if lo == 0 || lo > hi {
        bail!("object range {s} must satisfy 1 <= lo <= hi");
    }
    Ok(lo..=hi)
}

fn learn(a: LearnArgs) -> Result<()> {
    let mut cfg = RunConfig::new(a.graphs, a.solver.config()?, a.out);
    cfg.test_graphs = a.test_graphs;
    // bounds default to the label count of the training graphs
    let graphs = cfg
        .graphs
        .iter()
        .map(|p| pipeline::load_graph(p))
        .collect::<Result<Vec<_>, _>>()?;
    let defaults = Bounds::for_labels(strips_learn::encoder::label_universe(&graphs).len());
    if let Some(p) = &a.config {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        cfg.apply_config(&text, &defaults)
            .with_context(|| format!("in {}", p.display()))?;
    }
    cfg.apply_config(&a.sets.join("\n"), &defaults).context("in --set")?;
    if let Some(f) = a.fraction {
        cfg.fraction = f;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(w) = a.workers {
        cfg.workers = w;
    }
    if a.stop_after.is_some() {
        cfg.stop_after = a.stop_after;
    }
    cfg.symmetry_breaking |= a.symmetry_breaking;
    cfg.dump_theory |= a.dump_theory;
    let report = run_learn(&cfg)?;
    print!("{}", report.to_text());
    Ok(())
}

fn verify(a: VerifyArgs) -> Result<()> {
    let solver = a.solver.config()?;
    let opts = EncodeOptions {
        symmetry_breaking: a.symmetry_breaking,
    };
    let verdicts = run_verify(&a.solution, &a.test_graphs, parse_range(&a.objects)?, opts, &solver)?;
    for v in &verdicts {
        println!(
            "{}: sat={} ({}) oracle={} ({})",
            v.graph, v.sat.outcome, v.sat.detail, v.oracle.outcome, v.oracle.detail
        );
    }
    println!("overall: {}", overall(&verdicts));
    Ok(())
}

fn gen(a: GenArgs) -> Result<()> {
    let f = gen_fixture(&a.name, &a.params)?;
    let text = write_graph(f.graph());
    match &a.output {
        Some(p) => write_file(p, &text)?,
        None => print!("{text}"),
    }
    let s = f.graph().stats();
    eprintln!(
        "{}: {} labels, {} states, {} transitions",
        f.graph().name(),
        s.num_labels,
        s.num_states,
        s.num_transitions
    );
    Ok(())
}

fn write_file(p: &Path, text: &str) -> Result<()> {
    std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))
}

fn report(a: ReportArgs) -> Result<()> {
    let r = read_report(&a.dir)?;
    print!("{}", if a.csv { r.to_csv() } else { r.to_text() });
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().cmd {
        Cmd::Learn(a) => learn(a),
        Cmd::Verify(a) => verify(a),
        Cmd::Gen(a) => gen(a),
        Cmd::Report(a) => report(a),
    }
}
