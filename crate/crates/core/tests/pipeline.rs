mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Duration;

use common::Cadical;
use strips_learn::cnf::Cnf;
use strips_learn::fixtures::random_tiny;
use strips_learn::graph::{parse_graph, write_graph, LabeledGraph};
use strips_learn::hyperspace::{alpha_of, Alpha, Bounds};
use strips_learn::pipeline::{read_report, run_learn_with, run_verify, overall, PipelineError, RunConfig};
use strips_learn::encoder::EncodeOptions;
use strips_learn::sat::{SatError, SatSolver, SolveResult, SolverConfig};
use strips_learn::verify::Outcome;

#[derive(Default)]
struct Counting(AtomicUsize);

impl SatSolver for Counting {
    fn solve(&self, cnf: &Cnf) -> Result<SolveResult, SatError> {
        self.0.fetch_add(1, Ordering::SeqCst);
        Cadical.solve(cnf)
    }
}

fn save(dir: &Path, g: &LabeledGraph) -> PathBuf {
    let p = dir.join(format!("{}.graph", g.name()));
    fs::write(&p, write_graph(g)).unwrap();
    p
}

/// Bounds pinned to `alpha` except for one step down in atoms and objects.
fn around(alpha: &Alpha) -> Bounds {
    let m = alpha.num_atom_schemas;
    let n = alpha.objects[0];
    let arity = |v: &[usize]| (*v.iter().min().unwrap(), *v.iter().max().unwrap());
    let (smin, smax) = arity(&alpha.schema_arities);
    let (pmin, pmax) = arity(&alpha.pred_arities);
    Bounds {
        min_schemas: alpha.num_schemas(),
        max_schemas: alpha.num_schemas(),
        min_schema_arity: smin,
        max_schema_arity: smax,
        min_predicates: alpha.num_predicates(),
        max_predicates: alpha.num_predicates(),
        min_pred_arity: pmin,
        max_pred_arity: pmax,
        min_atom_schemas: m.saturating_sub(1).max(1),
        max_atom_schemas: m,
        min_static_unary: alpha.num_static_unary,
        max_static_unary: alpha.num_static_unary,
        min_static_binary: alpha.num_static_binary,
        max_static_binary: alpha.num_static_binary,
        max_statics: alpha.num_static_unary + alpha.num_static_binary,
        min_objects: n.saturating_sub(1).max(1),
        max_objects: n,
    }
}

fn config(dir: &Path, seed: u64) -> RunConfig {
    let f = random_tiny(seed);
    let alpha = alpha_of(&f.domain, std::slice::from_ref(&f.instance));
    let g = save(dir, f.graph());
    let solver = SolverConfig::new(vec!["unused".into()], Duration::from_secs(60));
    let mut c = RunConfig::new(vec![g.clone()], solver, dir.join("out"));
    c.test_graphs = vec![g];
    c.bounds = Some(around(&alpha));
    c.dump_theory = true;
    c
}

#[test]
fn finds_and_verifies_ground_truth_shape() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), 3);
    let report = run_learn_with(&cfg, &Cadical).unwrap();
    let a = report.aggregates();
    assert_eq!(a.evaluated, report.sampled);
    assert!(a.sat_pass >= 1, "{}", report.to_text());
    assert_eq!(a.indet + a.unsat + a.sat_indet + a.sat_fail + a.sat_pass, a.evaluated);
    let pass = report.rows.iter().find(|r| r.verification == Some(Outcome::Pass)).unwrap();
    let task = cfg.out_dir.join("tasks").join(&pass.id);
    for f in ["row.json", "solution.txt", "decode.json", "theory.cnf", "theory.map"] {
        assert!(task.join(f).is_file(), "{f}");
    }
    assert_eq!(read_report(&cfg.out_dir).unwrap(), report);

    // the saved solution verifies again from its text form
    let v = run_verify(
        &task.join("solution.txt"),
        &cfg.test_graphs,
        1..=4,
        EncodeOptions::default(),
        &Cadical,
    )
    .unwrap();
    assert_eq!(overall(&v), Outcome::Pass, "{v:?}");
}

#[test]
fn rerun_resumes_without_solving() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), 5);
    let first = Counting::default();
    let r1 = run_learn_with(&cfg, &first).unwrap();
    assert!(first.0.load(Ordering::SeqCst) >= r1.rows.len());
    let second = Counting::default();
    let r2 = run_learn_with(&cfg, &second).unwrap();
    assert_eq!(second.0.load(Ordering::SeqCst), 0);
    assert_eq!(r1, r2);
}

#[test]
fn stop_after_cuts_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config(dir.path(), 3);
    let all = run_learn_with(&cfg, &Cadical).unwrap();
    cfg.out_dir = dir.path().join("out2");
    cfg.stop_after = Some(1);
    let cut = run_learn_with(&cfg, &Cadical).unwrap();
    assert_eq!(cut.aggregates().sat_pass, 1);
    let first_pass = all.rows.iter().position(|r| r.verification == Some(Outcome::Pass)).unwrap();
    assert_eq!(cut.rows.len(), first_pass + 1);
}

#[test]
fn too_small_space_is_all_unsat() {
    // a directed path of 5 nodes needs at least 3 ground atoms
    let dir = tempfile::tempdir().unwrap();
    let g = parse_graph("graph path\nt 0 x 1\nt 1 x 2\nt 2 x 3\nt 3 x 4\n").unwrap();
    let p = save(dir.path(), &g);
    let solver = SolverConfig::new(vec!["unused".into()], Duration::from_secs(60));
    let mut cfg = RunConfig::new(vec![p], solver, dir.path().join("out"));
    let text = "max_predicates = 2\nmax_pred_arity = 1\nmax_atom_schemas = 2\nmax_schema_arity = 1\nmax_objects = 1\n";
    cfg.apply_config(text, &Bounds::for_labels(1)).unwrap();
    let report = run_learn_with(&cfg, &Cadical).unwrap();
    let a = report.aggregates();
    assert!(a.evaluated > 0);
    assert_eq!(a.unsat, a.evaluated);
    assert_eq!(a.avg_vars, None);
    assert!(report.to_text().lines().nth(1).unwrap().trim_end().ends_with('-'));
}

#[test]
fn config_errors_name_the_line() {
    let solver = SolverConfig::new(vec!["s".into()], Duration::from_secs(1));
    let mut cfg = RunConfig::new(vec![], solver, "out".into());
    let d = Bounds::default();
    assert!(matches!(
        cfg.apply_config("seed = 3\nbogus = 1\n", &d),
        Err(PipelineError::Config { line: 2, .. })
    ));
    assert!(matches!(
        cfg.apply_config("# c\n\nfraction = lots\n", &d),
        Err(PipelineError::Config { line: 3, .. })
    ));
    cfg.apply_config("verify_objects = 2..5\nworkers = 3\nmax_objects = 4", &d).unwrap();
    assert_eq!(cfg.verify_objects, Some(2..=5));
    assert_eq!(cfg.workers, 3);
    assert_eq!(cfg.bounds.as_ref().unwrap().max_objects, 4);
    assert!(cfg.apply_config("min_objects = 5", &d).is_err());
}
