//! The outer search: enumerate parametrizations, then encode, solve, decode
//! and verify each one as an independent task.
//!
//! Every task writes its artifacts under `<out>/tasks/<id>/`, where the id
//! hashes the parametrization, the input graphs, the encoder options and
//! the encoder version. A task whose `row.json` exists is not run again.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::decode::{decode, decode_report};
use crate::encoder::{build_theory, EncodeOptions, ENCODER_VERSION};
use crate::graph::{parse_graph, GraphError, LabeledGraph};
use crate::hyperspace::{enumerate_alphas, sample_from, Alpha, Bounds, BoundsError};
use crate::sat::{SatSolver, SatVerdict, SolverConfig};
use crate::strips::text::{parse_problem, write_problem, TextError};
use crate::verify::{
    verify_oracle, verify_oracle_search, verify_sat, DomainValuation, Outcome, Verdict,
    VerifyError,
};

/// Expansions allowed to the instance search of the oracle route when the
/// SAT route produced no witness.
pub const ORACLE_SEARCH_BUDGET: usize = 1 << 16;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Graph { path: PathBuf, source: GraphError },
    #[error("{path}: {source}")]
    Solution { path: PathBuf, source: TextError },
    #[error(transparent)]
    Bounds(#[from] BoundsError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("invalid run configuration: {0}")]
    Invalid(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub graphs: Vec<PathBuf>,
    pub test_graphs: Vec<PathBuf>,
    /// `None` picks [`Bounds::for_labels`] from the training graphs.
    pub bounds: Option<Bounds>,
    pub fraction: f64,
    pub seed: u64,
    pub solver: SolverConfig,
    pub workers: usize,
    pub out_dir: PathBuf,
    pub symmetry_breaking: bool,
    /// Keep `theory.cnf` and `theory.map` for each task.
    pub dump_theory: bool,
    /// Object counts tried on test graphs; defaults to the training bounds.
    pub verify_objects: Option<RangeInclusive<usize>>,
    /// Stop once this many solutions passed verification. Checked between
    /// batches of `workers` tasks, so the set of tasks run is deterministic.
    pub stop_after: Option<usize>,
}

impl RunConfig {
    pub fn new(graphs: Vec<PathBuf>, solver: SolverConfig, out_dir: PathBuf) -> Self {
        RunConfig {
            graphs,
            test_graphs: Vec::new(),
            bounds: None,
            fraction: 1.0,
            seed: 0,
            solver,
            workers: 1,
            out_dir,
            symmetry_breaking: false,
            dump_theory: false,
            verify_objects: None,
            stop_after: None,
        }
    }

    /// Applies `key = value` lines. Bounds keys go to the bounds (created
    /// from defaults on first use); the rest set run options.
    pub fn apply_config(&mut self, text: &str, default_bounds: &Bounds) -> Result<(), PipelineError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| PipelineError::Config { line: i + 1, msg };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad("expected key = value".into()))?;
            let (k, v) = (k.trim(), v.trim());
            let num = || v.parse::<u64>().map_err(|_| bad(format!("bad number {v:?}")));
            let flag = || match v {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                _ => Err(bad(format!("bad flag {v:?}"))),
            };
            match k {
                "fraction" => self.fraction = v.parse().map_err(|_| bad(format!("bad fraction {v:?}")))?,
                "seed" => self.seed = num()?,
                "workers" => self.workers = num()? as usize,
                "timeout" => self.solver.timeout = Duration::from_secs_f64(v.parse().map_err(|_| bad(format!("bad timeout {v:?}")))?),
                "memory" => self.solver.memory_limit = Some(num()?),
                "solver" => self.solver.command = v.split_whitespace().map(String::from).collect(),
                "symmetry_breaking" => self.symmetry_breaking = flag()?,
                "dump_theory" => self.dump_theory = flag()?,
                "stop_after" => self.stop_after = Some(num()? as usize),
                "verify_objects" => {
                    let (a, b) = v
                        .split_once("..")
                        .ok_or_else(|| bad(format!("expected lo..hi, got {v:?}")))?;
                    let p = |s: &str| s.trim().trim_start_matches('=').parse::<usize>().map_err(|_| bad(format!("bad range {v:?}")));
                    self.verify_objects = Some(p(a)?..=p(b)?);
                }
                _ => {
                    let b = self.bounds.get_or_insert_with(|| default_bounds.clone());
                    b.set(k, num()? as usize).map_err(|e| bad(e.to_string()))?;
                }
            }
        }
        if let Some(b) = &self.bounds {
            b.validate()?;
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), PipelineError> {
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(PipelineError::Invalid(format!("fraction {} not in (0, 1]", self.fraction)));
        }
        if self.workers == 0 {
            return Err(PipelineError::Invalid("workers must be at least 1".into()));
        }
        if self.graphs.is_empty() {
            return Err(PipelineError::Invalid("no training graphs".into()));
        }
        if self.solver.timeout.is_zero() {
            return Err(PipelineError::Invalid("solver timeout must be positive".into()));
        }
        Ok(())
    }
}

pub fn load_graph(path: &Path) -> Result<LabeledGraph, PipelineError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_graph(&text).map_err(|source| PipelineError::Graph {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestVerdicts {
    pub graph: String,
    pub sat: Verdict,
    pub oracle: Verdict,
}

/// Outcome of one task. Timing fields are the only nondeterministic ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRow {
    pub id: String,
    pub alpha: Alpha,
    pub verdict: SatVerdict,
    pub vars: usize,
    pub clauses: usize,
    pub encode_secs: f64,
    pub solve_secs: f64,
    pub peak_mem_bytes: u64,
    pub detail: String,
    pub train: Vec<Verdict>,
    pub tests: Vec<TestVerdicts>,
    /// Overall verification of a SAT task; `None` otherwise.
    pub verification: Option<Outcome>,
}

impl TaskRow {
    /// The row with timing columns zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> TaskRow {
        TaskRow {
            encode_secs: 0.0,
            solve_secs: 0.0,
            peak_mem_bytes: 0,
            detail: String::new(),
            tests: self
                .tests
                .iter()
                .map(|t| TestVerdicts {
                    sat: Verdict {
                        detail: if t.sat.outcome == Outcome::Indet { String::new() } else { t.sat.detail.clone() },
                        ..t.sat.clone()
                    },
                    ..t.clone()
                })
                .collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Per training graph: (#labels, #states, #transitions).
    pub graph_stats: Vec<(usize, usize, usize)>,
    /// Size of the parametrization space.
    pub total_tasks: usize,
    /// Tasks selected by sampling.
    pub sampled: usize,
    pub rows: Vec<TaskRow>,
}

/// Column totals of a report, recomputed from its rows.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Aggregates {
    pub evaluated: usize,
    pub indet: usize,
    pub unsat: usize,
    pub sat_indet: usize,
    pub sat_fail: usize,
    pub sat_pass: usize,
    pub avg_vars: Option<f64>,
    pub avg_clauses: Option<f64>,
    pub avg_secs: Option<f64>,
    pub avg_mem_bytes: Option<f64>,
}

impl RunReport {
    /// Averages are taken over the solutions that passed verification.
    pub fn aggregates(&self) -> Aggregates {
        let mut a = Aggregates {
            evaluated: self.rows.len(),
            ..Default::default()
        };
        let mut passed = Vec::new();
        for r in &self.rows {
            match (r.verdict, r.verification) {
                (SatVerdict::Indet, _) => a.indet += 1,
                (SatVerdict::Unsat, _) => a.unsat += 1,
                (SatVerdict::Sat, Some(Outcome::Pass)) => {
                    a.sat_pass += 1;
                    passed.push(r);
                }
                (SatVerdict::Sat, Some(Outcome::Fail)) => a.sat_fail += 1,
                (SatVerdict::Sat, _) => a.sat_indet += 1,
            }
        }
        if !passed.is_empty() {
            let n = passed.len() as f64;
            let avg = |f: &dyn Fn(&TaskRow) -> f64| Some(passed.iter().map(|r| f(r)).sum::<f64>() / n);
            a.avg_vars = avg(&|r| r.vars as f64);
            a.avg_clauses = avg(&|r| r.clauses as f64);
            a.avg_secs = avg(&|r| r.encode_secs + r.solve_secs);
            a.avg_mem_bytes = avg(&|r| r.peak_mem_bytes as f64);
        }
        a
    }

    fn columns(&self) -> [String; 12] {
        let a = self.aggregates();
        let join = |f: &dyn Fn(&(usize, usize, usize)) -> usize| {
            self.graph_stats.iter().map(|s| f(s).to_string()).collect::<Vec<_>>().join("|")
        };
        let opt = |x: Option<f64>, scale: f64, prec: usize| {
            x.map(|v| format!("{:.*}", prec, v / scale)).unwrap_or_else(|| "-".into())
        };
        [
            join(&|s| s.0),
            join(&|s| s.1),
            join(&|s| s.2),
            self.total_tasks.to_string(),
            self.sampled.to_string(),
            a.indet.to_string(),
            a.unsat.to_string(),
            format!("{}+{}+{}", a.sat_indet, a.sat_fail, a.sat_pass),
            opt(a.avg_vars, 1.0, 1),
            opt(a.avg_clauses, 1.0, 1),
            opt(a.avg_secs, 1.0, 2),
            opt(a.avg_mem_bytes, 1024.0 * 1024.0, 1),
        ]
    }

    pub const COLUMNS: [&'static str; 12] = [
        "#labels", "#states", "#trans", "#tasks", "sample", "INDET", "UNSAT", "SAT(x+y+z)",
        "avg #vars", "avg #clauses", "avg time (s)", "avg mem (MiB)",
    ];

    /// Aligned text table with one data line.
    pub fn to_text(&self) -> String {
        let cols = self.columns();
        let widths: Vec<usize> = Self::COLUMNS
            .iter()
            .zip(&cols)
            .map(|(h, c)| h.len().max(c.len()))
            .collect();
        let mut out = String::new();
        for cells in [Self::COLUMNS.map(String::from), cols] {
            let row: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            out.push_str(row.join("  ").trim_end());
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::COLUMNS.join(","), self.columns().join(","))
    }

    /// One line per task, in task order.
    pub fn rows_csv(&self) -> String {
        let mut out = String::from(
            "id,alpha,verdict,verification,vars,clauses,encode_secs,solve_secs,peak_mem_bytes\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},\"{}\",{},{},{},{},{:.3},{:.3},{}",
                r.id,
                r.alpha,
                r.verdict,
                r.verification.map(|o| o.to_string()).unwrap_or_default(),
                r.vars,
                r.clauses,
                r.encode_secs,
                r.solve_secs,
                r.peak_mem_bytes
            );
        }
        out
    }
}

/// Content address of a task.
pub fn task_id(alpha: &Alpha, graphs: &[LabeledGraph], tests: &[LabeledGraph], options: EncodeOptions) -> String {
    let mut h = Sha256::new();
    h.update(serde_json::to_vec(alpha).expect("alpha serializes"));
    for g in graphs {
        h.update(b"train:");
        h.update(g.digest().as_bytes());
    }
    for g in tests {
        h.update(b"test:");
        h.update(g.digest().as_bytes());
    }
    h.update(format!("sym={};v={ENCODER_VERSION}", options.symmetry_breaking).as_bytes());
    hex::encode(&h.finalize()[..12])
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

struct Job<'a> {
    graphs: &'a [LabeledGraph],
    tests: &'a [LabeledGraph],
    options: EncodeOptions,
    dump_theory: bool,
    verify_objects: RangeInclusive<usize>,
    out_dir: &'a Path,
    solver: &'a dyn SatSolver,
}

/// Combined verification outcome: every route on every graph must pass.
fn combine<'a>(verdicts: impl IntoIterator<Item = &'a Verdict>) -> Outcome {
    let mut out = Outcome::Pass;
    for v in verdicts {
        match v.outcome {
            Outcome::Fail => return Outcome::Fail,
            Outcome::Indet => out = Outcome::Indet,
            Outcome::Pass => {}
        }
    }
    out
}

/// Verifies a domain valuation on test graphs by both routes.
pub fn verify_on_tests(
    val: &DomainValuation,
    domain: &crate::strips::Domain,
    tests: &[LabeledGraph],
    objects: RangeInclusive<usize>,
    options: EncodeOptions,
    solver: &dyn SatSolver,
) -> Result<Vec<TestVerdicts>, VerifyError> {
    let mut out = Vec::new();
    for g in tests {
        let check = verify_sat(val, g, objects.clone(), options, solver)?;
        let oracle = match &check.witness {
            Some(w) => verify_oracle(w, 0, g),
            None => verify_oracle_search(domain, g, objects.clone(), ORACLE_SEARCH_BUDGET),
        };
        out.push(TestVerdicts {
            graph: g.name().to_string(),
            sat: check.verdict,
            oracle,
        });
    }
    Ok(out)
}

fn run_task(alpha: &Alpha, job: &Job) -> Result<TaskRow, PipelineError> {
    let id = task_id(alpha, job.graphs, job.tests, job.options);
    let dir = job.out_dir.join("tasks").join(&id);
    let row_path = dir.join("row.json");
    if let Ok(text) = fs::read_to_string(&row_path) {
        if let Ok(row) = serde_json::from_str::<TaskRow>(&text) {
            info!("task {id} {alpha}: resumed ({})", row.verdict);
            return Ok(row);
        }
        warn!("task {id}: unreadable row, rerunning");
    }
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut row = TaskRow {
        id: id.clone(),
        alpha: alpha.clone(),
        verdict: SatVerdict::Indet,
        vars: 0,
        clauses: 0,
        encode_secs: 0.0,
        solve_secs: 0.0,
        peak_mem_bytes: 0,
        detail: String::new(),
        train: Vec::new(),
        tests: Vec::new(),
        verification: None,
    };
    let start = Instant::now();
    let th = match build_theory(alpha, job.graphs, job.options) {
        Ok(th) => th,
        Err(e) => {
            row.detail = format!("encoding failed: {e}");
            return finish(row, &row_path);
        }
    };
    row.encode_secs = start.elapsed().as_secs_f64();
    row.vars = th.num_vars();
    row.clauses = th.num_clauses();
    if job.dump_theory {
        let p = dir.join("theory.cnf");
        let f = fs::File::create(&p).map_err(io_err(&p))?;
        let mut w = BufWriter::new(f);
        th.cnf.write_dimacs(&mut w).and_then(|_| w.flush()).map_err(io_err(&p))?;
        let p = dir.join("theory.map");
        let f = fs::File::create(&p).map_err(io_err(&p))?;
        let mut w = BufWriter::new(f);
        th.cnf.vars.write_map(&mut w).and_then(|_| w.flush()).map_err(io_err(&p))?;
    }
    let res = match job.solver.solve(&th.cnf) {
        Ok(r) => r,
        Err(e) => {
            row.detail = format!("solver failed: {e}");
            return finish(row, &row_path);
        }
    };
    row.verdict = res.verdict;
    row.solve_secs = res.wall_secs;
    row.peak_mem_bytes = res.peak_mem_bytes;
    row.detail = res.detail;
    let Some(asg) = res.assignment else {
        return finish(row, &row_path);
    };
    let sol = match decode(&th, &asg) {
        Ok(s) => s,
        Err(e) => {
            row.detail = format!("decoding failed: {e}");
            row.verification = Some(Outcome::Fail);
            return finish(row, &row_path);
        }
    };
    let instances: Vec<_> = sol.layers.iter().map(|l| l.instance.clone()).collect();
    let p = dir.join("solution.txt");
    write_atomic(&p, write_problem(&sol.domain, &instances).as_bytes())?;
    let p = dir.join("decode.json");
    write_atomic(&p, decode_report(&sol, job.graphs).as_bytes())?;
    row.train = job
        .graphs
        .iter()
        .enumerate()
        .map(|(i, g)| verify_oracle(&sol, i, g))
        .collect();
    let val = DomainValuation::from_assignment(&th, &asg);
    match verify_on_tests(&val, &sol.domain, job.tests, job.verify_objects.clone(), job.options, job.solver) {
        Ok(t) => row.tests = t,
        Err(e) => {
            row.detail = format!("verification failed: {e}");
            row.verification = Some(Outcome::Indet);
            return finish(row, &row_path);
        }
    }
    let all = row
        .train
        .iter()
        .chain(row.tests.iter().flat_map(|t| [&t.sat, &t.oracle]));
    row.verification = Some(combine(all));
    finish(row, &row_path)
}

fn finish(row: TaskRow, path: &Path) -> Result<TaskRow, PipelineError> {
    info!(
        "task {} {}: {} {}",
        row.id,
        row.alpha,
        row.verdict,
        row.verification.map(|o| o.to_string()).unwrap_or_default()
    );
    let mut json = serde_json::to_string_pretty(&row).expect("row serializes");
    json.push('\n');
    write_atomic(path, json.as_bytes())?;
    Ok(row)
}

/// Runs the outer search with the configured external solver.
pub fn run_learn(config: &RunConfig) -> Result<RunReport, PipelineError> {
    run_learn_with(config, &config.solver)
}

/// Runs the outer search with any solver.
pub fn run_learn_with(config: &RunConfig, solver: &dyn SatSolver) -> Result<RunReport, PipelineError> {
    config.validate()?;
    let graphs = config
        .graphs
        .iter()
        .map(|p| load_graph(p))
        .collect::<Result<Vec<_>, _>>()?;
    let tests = config
        .test_graphs
        .iter()
        .map(|p| load_graph(p))
        .collect::<Result<Vec<_>, _>>()?;
    let bounds = match &config.bounds {
        Some(b) => b.clone(),
        None => Bounds::for_labels(crate::encoder::label_universe(&graphs).len()),
    };
    bounds.validate()?;
    let all = enumerate_alphas(&bounds, graphs.len());
    let total = all.len();
    let tasks = sample_from(all, config.fraction, config.seed);
    info!("{} of {total} parametrizations selected", tasks.len());
    fs::create_dir_all(&config.out_dir).map_err(io_err(&config.out_dir))?;
    let options = EncodeOptions {
        symmetry_breaking: config.symmetry_breaking,
    };
    let job = Job {
        graphs: &graphs,
        tests: &tests,
        options,
        dump_theory: config.dump_theory,
        verify_objects: config
            .verify_objects
            .clone()
            .unwrap_or(bounds.min_objects.max(1)..=bounds.max_objects),
        out_dir: &config.out_dir,
        solver,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| PipelineError::Invalid(e.to_string()))?;
    let mut rows = Vec::new();
    let mut passed = 0;
    for batch in tasks.chunks(config.workers) {
        let out: Vec<Result<TaskRow, PipelineError>> =
            pool.install(|| batch.par_iter().map(|a| run_task(a, &job)).collect());
        for r in out {
            let r = r?;
            passed += (r.verification == Some(Outcome::Pass)) as usize;
            rows.push(r);
        }
        if config.stop_after.is_some_and(|k| passed >= k) {
            info!("stopping after {passed} verified solutions");
            break;
        }
    }
    let report = RunReport {
        graph_stats: graphs
            .iter()
            .map(|g| (g.labels().len(), g.num_nodes(), g.edges().len()))
            .collect(),
        total_tasks: total,
        sampled: tasks.len(),
        rows,
    };
    write_report(&report, &config.out_dir)?;
    Ok(report)
}

/// Writes `report.txt`, `report.csv`, `rows.csv` and `report.json`.
pub fn write_report(report: &RunReport, dir: &Path) -> Result<(), PipelineError> {
    write_atomic(&dir.join("report.txt"), report.to_text().as_bytes())?;
    write_atomic(&dir.join("report.csv"), report.to_csv().as_bytes())?;
    write_atomic(&dir.join("rows.csv"), report.rows_csv().as_bytes())?;
    let mut json = serde_json::to_string_pretty(report).expect("report serializes");
    json.push('\n');
    write_atomic(&dir.join("report.json"), json.as_bytes())
}

pub fn read_report(dir: &Path) -> Result<RunReport, PipelineError> {
    let p = dir.join("report.json");
    let text = fs::read_to_string(&p).map_err(io_err(&p))?;
    serde_json::from_str(&text).map_err(|e| PipelineError::Invalid(format!("{}: {e}", p.display())))
}

/// Verifies a saved solution (domain text) on test graphs by both routes.
pub fn run_verify(
    solution: &Path,
    tests: &[PathBuf],
    objects: RangeInclusive<usize>,
    options: EncodeOptions,
    solver: &dyn SatSolver,
) -> Result<Vec<TestVerdicts>, PipelineError> {
    let text = fs::read_to_string(solution).map_err(io_err(solution))?;
    let problem = parse_problem(&text).map_err(|source| PipelineError::Solution {
        path: solution.to_path_buf(),
        source,
    })?;
    let val = DomainValuation::from_domain(&problem.domain)?;
    let graphs = tests.iter().map(|p| load_graph(p)).collect::<Result<Vec<_>, _>>()?;
    Ok(verify_on_tests(&val, &problem.domain, &graphs, objects, options, solver)?)
}

/// Overall outcome of a list of test verdicts; PASS for an empty list.
pub fn overall(verdicts: &[TestVerdicts]) -> Outcome {
    combine(verdicts.iter().flat_map(|t| [&t.sat, &t.oracle]))
}
