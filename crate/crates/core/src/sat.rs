//! External DIMACS solver driver.
//!
//! The solver runs as a child process with its stdout redirected to a file.
//! The driver polls `wait4` so it can enforce a wall-clock limit and read the
//! child's peak resident set size. Memory is capped with `RLIMIT_AS` when a
//! limit is configured; a child that dies under the cap is reported as INDET.

use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnf::{self, Assignment, ClauseSet, Cnf, CnfError, SolverOutput};

/// Placeholder replaced by the CNF path in a command template.
pub const CNF_PLACEHOLDER: &str = "{cnf}";

#[derive(Debug, Error)]
pub enum SatError {
    #[error("empty solver command")]
    EmptyCommand,
    #[error("timeout must be positive")]
    ZeroTimeout,
    #[error("cannot start solver `{cmd}`: {source}")]
    Spawn { cmd: String, source: io::Error },
    #[error("solver i/o: {0}")]
    Io(#[from] io::Error),
    #[error("unreadable solver output: {0}")]
    Output(#[from] CnfError),
    #[error("solver reported SAT but its model violates the formula")]
    ModelRejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Executable followed by its arguments. Occurrences of `{cnf}` are
    /// replaced by the formula path; without one the path is appended.
    pub command: Vec<String>,
    pub timeout: Duration,
    /// Address-space cap in bytes.
    pub memory_limit: Option<u64>,
    /// Directory for formula and output files.
    pub workdir: PathBuf,
}

impl SolverConfig {
    pub fn new(command: Vec<String>, timeout: Duration) -> Self {
        SolverConfig {
            command,
            timeout,
            memory_limit: None,
            workdir: std::env::temp_dir(),
        }
    }

    fn argv(&self, cnf: &Path) -> Vec<String> {
        let path = cnf.to_string_lossy();
        let mut argv: Vec<String> = self
            .command
            .iter()
            .map(|a| a.replace(CNF_PLACEHOLDER, &path))
            .collect();
        if !self.command.iter().any(|a| a.contains(CNF_PLACEHOLDER)) {
            argv.push(path.into_owned());
        }
        argv
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SatVerdict {
    Sat,
    Unsat,
    Indet,
}

impl std::fmt::Display for SatVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SatVerdict::Sat => "SAT",
            SatVerdict::Unsat => "UNSAT",
            SatVerdict::Indet => "INDET",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub verdict: SatVerdict,
    /// Present iff the verdict is SAT; covers every formula variable.
    pub assignment: Option<Assignment>,
    pub wall_secs: f64,
    pub peak_mem_bytes: u64,
    /// Exit status or the reason for INDET.
    pub detail: String,
}

/// Anything that can decide a formula. [`SolverConfig`] runs an external
/// process; tests plug in-process solvers in here.
pub trait SatSolver: Sync {
    fn solve(&self, cnf: &Cnf) -> Result<SolveResult, SatError>;
}

impl SatSolver for SolverConfig {
    fn solve(&self, cnf: &Cnf) -> Result<SolveResult, SatError> {
        solve(cnf, self)
    }
}

pub fn check_assignment(cnf: &Cnf, asg: &Assignment) -> bool {
    asg.len() >= cnf.num_vars() && asg.satisfies(&cnf.clauses)
}

pub fn solve(cnf: &Cnf, config: &SolverConfig) -> Result<SolveResult, SatError> {
    solve_clauses(cnf.num_vars(), &cnf.clauses, config)
}

pub fn solve_clauses(
    num_vars: usize,
    clauses: &ClauseSet,
    config: &SolverConfig,
) -> Result<SolveResult, SatError> {
    if config.command.is_empty() {
        return Err(SatError::EmptyCommand);
    }
    if config.timeout.is_zero() {
        return Err(SatError::ZeroTimeout);
    }
    fs::create_dir_all(&config.workdir)?;
    let dir = tempfile::Builder::new()
        .prefix("sat-")
        .tempdir_in(&config.workdir)?;
    let cnf_path = dir.path().join("theory.cnf");
    let out_path = dir.path().join("stdout.txt");
    {
        let mut w = BufWriter::new(File::create(&cnf_path)?);
        cnf::write_dimacs(num_vars, clauses, &mut w)?;
        io::Write::flush(&mut w)?;
    }
    let run = run_limited(&config.argv(&cnf_path), &out_path, config)?;
    let stdout = fs::read_to_string(&out_path)?;
    let mut res = SolveResult {
        verdict: SatVerdict::Indet,
        assignment: None,
        wall_secs: run.wall.as_secs_f64(),
        peak_mem_bytes: run.peak_mem,
        detail: run.describe(),
    };
    if run.timed_out {
        return Ok(res);
    }
    match (run.exit_code, cnf::parse_model(&stdout, num_vars)) {
        (Some(10), Ok(SolverOutput::Sat(asg))) => {
            if !(asg.len() >= num_vars && asg.satisfies(clauses)) {
                return Err(SatError::ModelRejected);
            }
            res.verdict = SatVerdict::Sat;
            res.assignment = Some(asg);
        }
        (Some(20), _) => res.verdict = SatVerdict::Unsat,
        (Some(10), Ok(_)) => return Err(SatError::Output(CnfError::MissingStatus)),
        (Some(10), Err(e)) => return Err(e.into()),
        _ => {
            if let (Some(limit), true) = (config.memory_limit, run.exit_code.is_none()) {
                res.detail = format!("{} (memory limit {limit} bytes)", res.detail);
            }
        }
    }
    Ok(res)
}

struct RunInfo {
    wall: Duration,
    peak_mem: u64,
    exit_code: Option<i32>,
    signal: Option<i32>,
    timed_out: bool,
}

impl RunInfo {
    fn describe(&self) -> String {
        if self.timed_out {
            format!("timeout after {:.3}s", self.wall.as_secs_f64())
        } else if let Some(c) = self.exit_code {
            format!("exit {c}")
        } else {
            format!("signal {}", self.signal.unwrap_or(0))
        }
    }
}

fn run_limited(argv: &[String], stdout: &Path, config: &SolverConfig) -> Result<RunInfo, SatError> {
    let mut cmd = Command::new(&argv[0]);
    cmd.args(&argv[1..])
        .stdin(Stdio::null())
        .stdout(File::create(stdout)?)
        .stderr(Stdio::null());
    if let Some(limit) = config.memory_limit {
        // SAFETY: setrlimit is async-signal-safe and only touches the child.
        unsafe {
            cmd.pre_exec(move || {
                let rl = libc::rlimit {
                    rlim_cur: limit as libc::rlim_t,
                    rlim_max: limit as libc::rlim_t,
                };
                // best effort: ignore failure, the timeout still applies
                libc::setrlimit(libc::RLIMIT_AS, &rl);
                Ok(())
            });
        }
    }
    let start = Instant::now();
    let child = cmd.spawn().map_err(|source| SatError::Spawn {
        cmd: argv.join(" "),
        source,
    })?;
    let pid = child.id() as libc::pid_t;
    let mut status: libc::c_int = 0;
    // SAFETY: rusage is plain old data.
    let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
    let mut timed_out = false;
    let mut nap = Duration::from_millis(1);
    loop {
        // SAFETY: pid is our own unreaped child; pointers are valid locals.
        let r = unsafe { libc::wait4(pid, &mut status, libc::WNOHANG, &mut usage) };
        if r == pid {
            break;
        }
        if r < 0 {
            let err = io::Error::last_os_error();
            if err.kind() == io::ErrorKind::Interrupted {
                continue;
            }
            return Err(err.into());
        }
        if start.elapsed() >= config.timeout {
            timed_out = true;
            // SAFETY: signalling and reaping our own child.
            unsafe {
                libc::kill(pid, libc::SIGKILL);
                while libc::wait4(pid, &mut status, 0, &mut usage) < 0 {
                    if io::Error::last_os_error().kind() != io::ErrorKind::Interrupted {
                        break;
                    }
                }
            }
            break;
        }
        std::thread::sleep(nap.min(config.timeout.saturating_sub(start.elapsed())));
        nap = (nap * 2).min(Duration::from_millis(50));
    }
    let wall = start.elapsed();
    let exited = libc::WIFEXITED(status);
    Ok(RunInfo {
        wall,
        // ru_maxrss is in kilobytes on Linux
        peak_mem: (usage.ru_maxrss.max(0) as u64) * 1024,
        exit_code: exited.then(|| libc::WEXITSTATUS(status)),
        signal: libc::WIFSIGNALED(status).then(|| libc::WTERMSIG(status)),
        timed_out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shell(script: &str) -> SolverConfig {
        SolverConfig::new(
            vec!["sh".into(), "-c".into(), script.into(), "sh".into()],
            Duration::from_secs(10),
        )
    }

    fn unit(lit: i32) -> Cnf {
        let mut c = Cnf::new();
        c.vars.fresh(crate::cnf::Tag::new(crate::cnf::Family::Use1, &[0])).unwrap();
        c.add(&[lit]);
        c
    }

    #[test]
    fn exit_codes_map_to_verdicts() {
        let sat = shell("echo 's SATISFIABLE'; echo 'v 1 0'; exit 10");
        let r = solve(&unit(1), &sat).unwrap();
        assert_eq!(r.verdict, SatVerdict::Sat);
        assert!(r.assignment.unwrap().value(1));
        let unsat = shell("echo 's UNSATISFIABLE'; exit 20");
        assert_eq!(solve(&unit(1), &unsat).unwrap().verdict, SatVerdict::Unsat);
        let crash = shell("exit 3");
        let r = solve(&unit(1), &crash).unwrap();
        assert_eq!(r.verdict, SatVerdict::Indet);
        assert_eq!(r.detail, "exit 3");
    }

    #[test]
    fn wrong_model_is_rejected() {
        let liar = shell("echo 's SATISFIABLE'; echo 'v -1 0'; exit 10");
        assert!(matches!(solve(&unit(1), &liar), Err(SatError::ModelRejected)));
    }

    #[test]
    fn timeout_is_indet() {
        let mut slow = shell("sleep 5");
        slow.timeout = Duration::from_millis(1);
        let r = solve(&unit(1), &slow).unwrap();
        assert_eq!(r.verdict, SatVerdict::Indet);
        assert!(r.detail.starts_with("timeout"));
    }

    #[test]
    fn path_placeholder_and_spawn_errors() {
        let cfg = shell("grep -q 'p cnf 1 1' \"$1\" && echo 's UNSATISFIABLE' && exit 20");
        assert_eq!(solve(&unit(1), &cfg).unwrap().verdict, SatVerdict::Unsat);
        let templ = SolverConfig::new(
            vec!["sh".into(), "-c".into(), "test -s {cnf} && exit 20".into()],
            Duration::from_secs(10),
        );
        assert_eq!(solve(&unit(1), &templ).unwrap().verdict, SatVerdict::Unsat);
        let missing = SolverConfig::new(vec!["/nonexistent/solver".into()], Duration::from_secs(1));
        assert!(matches!(solve(&unit(1), &missing), Err(SatError::Spawn { .. })));
        let empty = SolverConfig::new(vec![], Duration::from_secs(1));
        assert!(matches!(solve(&unit(1), &empty), Err(SatError::EmptyCommand)));
    }

    #[test]
    fn check_assignment_flags_flipped_units() {
        let c = unit(1);
        assert!(check_assignment(&c, &Assignment::new(vec![true])));
        assert!(!check_assignment(&c, &Assignment::new(vec![false])));
        let mut two = Cnf::new();
        two.vars.fresh(crate::cnf::Tag::new(crate::cnf::Family::Use1, &[0])).unwrap();
        two.vars.fresh(crate::cnf::Tag::new(crate::cnf::Family::Use1, &[1])).unwrap();
        two.add(&[1, 2]);
        assert!(!check_assignment(&two, &Assignment::all_false(2)));
    }
}
