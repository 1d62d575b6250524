use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Context;
use plap_core::analysis::{
    study_graph, study_space, study_time, RateStudyResult, RhoSchedule, StudyOptions,
};
use plap_core::evolve::{Operator, Problem};
use plap_core::graph::{sample_with, truncate, truncation_gap};
use plap_core::mesh::project_kernel_with;
use plap_core::{Error, Mesh};

use crate::config::{ConfigError, RunConfig};
use crate::exec::RayonExecutor;
use crate::io;
use crate::properties::{self, SuiteSizes};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    StudySpace,
    StudyTime,
    StudyGraph,
    SampleGraph,
    VerifyProperties,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::StudySpace => "study-space",
            Command::StudyTime => "study-time",
            Command::StudyGraph => "study-graph",
            Command::SampleGraph => "sample-graph",
            Command::VerifyProperties => "verify-properties",
        }
    }
}

/// Whether a command met its checks. Errors are reported separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    ChecksFailed,
}

pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CHECKS_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const NO_CONVERGENCE: i32 = 3;
}

/// Exit status for a finished command.
pub fn exit_code(result: &anyhow::Result<Outcome>) -> i32 {
    match result {
        Ok(Outcome::Success) => exit::SUCCESS,
        Ok(Outcome::ChecksFailed) => exit::CHECKS_FAILED,
        Err(e) if e.downcast_ref::<ConfigError>().is_some() => exit::CONFIG,
        Err(e) if matches!(e.downcast_ref::<Error>(), Some(Error::NoConvergence { .. })) => {
            exit::NO_CONVERGENCE
        }
        Err(_) => exit::CHECKS_FAILED,
    }
}

struct Output {
    dir: PathBuf,
}

impl Output {
    fn create(dir: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
        })
    }

    fn write(&self, name: &str, contents: &str) -> anyhow::Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    }
}

fn epoch_seconds() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Runs `command`, writes its files into `out` and a short summary to stdout.
pub fn run(command: Command, cfg: &RunConfig, out: &Path) -> anyhow::Result<Outcome> {
    run_with(command, cfg, out, &mut std::io::stdout())
}

/// [`run`] with the summary sent to `console`.
pub fn run_with(
    command: Command,
    cfg: &RunConfig,
    out: &Path,
    console: &mut dyn Write,
) -> anyhow::Result<Outcome> {
    let output = Output::create(out)?;
    output.write("config.conf", &cfg.echo())?;
    let exec = RayonExecutor::new(cfg.threads)?;
    let started = epoch_seconds();
    let clock = Instant::now();
    let result = match command {
        Command::Solve => solve(cfg, &output, &exec, console),
        Command::StudySpace | Command::StudyTime | Command::StudyGraph => {
            study(command, cfg, &output, &exec, console)
        }
        Command::SampleGraph => sample_graph(cfg, &output, &exec, console),
        Command::VerifyProperties => verify(cfg, &output, &exec, console),
    };
    let status = match &result {
        Ok(o) => format!("{o:?}"),
        Err(e) => format!("error: {e:#}"),
    };
    output.write(
        "run.log",
        &format!(
            "command {}\nstarted_unix {started:.3}\nelapsed_s {:.3}\nthreads {}\nstatus {status}\n",
            command.name(),
            clock.elapsed().as_secs_f64(),
            exec.threads()
        ),
    )?;
    result
}

fn graph_rho(cfg: &RunConfig, n: usize) -> f64 {
    cfg.graph_rho
        .unwrap_or_else(|| (n as f64).powf(-cfg.rho_exponent))
}

fn solve(
    cfg: &RunConfig,
    output: &Output,
    exec: &RayonExecutor,
    console: &mut dyn Write,
) -> anyhow::Result<Outcome> {
    let sp = cfg.study_problem()?;
    let mut prob = sp.discretize(cfg.n)?;
    if let Some(rho) = cfg.graph_rho {
        let Operator::Kernelized(kd) = prob.operator() else {
            unreachable!("discretize builds a kernelized operator");
        };
        let graph = sample_with(&truncate(kd, rho)?, cfg.seed, exec);
        output.write("graph.edges", &io::edge_list(&graph))?;
        prob = Problem::new(
            Operator::Graph(Arc::new(graph)),
            prob.p(),
            prob.initial().clone(),
            prob.source().clone(),
            prob.horizon(),
        )?;
    }
    let traj = cfg.time_scheme().run(&prob)?;
    output.write("trajectory.csv", &io::trajectory_csv(&traj))?;
    output.write("trajectory.json", &io::trajectory_json(&traj, cfg.p))?;
    output.write("initial.csv", &io::grid_function_csv(prob.initial()))?;
    output.write("final.csv", &io::grid_function_csv(&traj.final_state()))?;
    writeln!(
        console,
        "{}: {} steps to T = {}, mass {} -> {}",
        traj.scheme().name(),
        traj.steps().len(),
        traj.horizon(),
        prob.initial().mass(),
        traj.final_state().mass()
    )?;
    Ok(Outcome::Success)
}

pub fn run_study(
    command: Command,
    cfg: &RunConfig,
    exec: &RayonExecutor,
) -> anyhow::Result<RateStudyResult> {
    let sp = cfg.study_problem()?;
    let opts = StudyOptions {
        time_samples: cfg.time_samples,
        check_time_stability: cfg.check_time_stability,
    };
    let scheme = cfg.time_scheme();
    Ok(match command {
        Command::StudySpace => study_space(&sp, &scheme, &cfg.n_list, cfg.n_ref, &opts, exec)?,
        Command::StudyTime => study_time(
            &sp,
            &scheme,
            cfg.n,
            &cfg.factors,
            cfg.ref_factor,
            &opts,
            exec,
        )?,
        Command::StudyGraph => {
            if cfg.p <= 1.0 {
                return Err(ConfigError {
                    origin: None,
                    key: "p".into(),
                    message: "graph studies run backward Euler and need p > 1".into(),
                }
                .into());
            }
            let schedule = match cfg.graph_rho {
                Some(rho) => RhoSchedule::Constant(rho),
                None => RhoSchedule::Power(cfg.rho_exponent),
            };
            study_graph(
                &sp,
                &cfg.n_list,
                schedule,
                &cfg.seed_list(),
                cfg.steps,
                &cfg.backward_options(),
                &opts,
                exec,
            )?
        }
        _ => unreachable!("not a study command"),
    })
}

fn study(
    command: Command,
    cfg: &RunConfig,
    output: &Output,
    exec: &RayonExecutor,
    console: &mut dyn Write,
) -> anyhow::Result<Outcome> {
    let result = run_study(command, cfg, exec)?;
    let summary = io::StudySummary::new(
        &result,
        io::Window {
            slope_min: cfg.slope_min,
            slope_max: cfg.slope_max,
            require_decreasing: cfg.require_decreasing,
        },
    );
    let stem = command.name().replace('-', "_");
    output.write(&format!("{stem}.csv"), &io::study_csv(&result))?;
    output.write(&format!("{stem}.json"), &io::to_json(&summary))?;
    output.write(&format!("{stem}.dat"), &io::study_dat(&result))?;
    write!(console, "{}", io::study_csv(&result))?;
    match summary.slope {
        Some(s) => writeln!(console, "slope {s} ({})", summary.verdict)?,
        None => writeln!(console, "no fit ({})", summary.verdict)?,
    }
    Ok(if summary.failed() {
        Outcome::ChecksFailed
    } else {
        Outcome::Success
    })
}

fn sample_graph(
    cfg: &RunConfig,
    output: &Output,
    exec: &RayonExecutor,
    console: &mut dyn Write,
) -> anyhow::Result<Outcome> {
    let mesh = Arc::new(Mesh::uniform(cfg.n)?);
    let sp = cfg.study_problem()?;
    let kd = project_kernel_with(&sp.kernel, &mesh, sp.projection)?;
    let rho = graph_rho(cfg, cfg.n);
    let w = truncate(&kd, rho)?;
    let graph = sample_with(&w, cfg.seed, exec);
    let stats = graph.stats();
    let rho_n = rho * cfg.n as f64;
    let gap = truncation_gap(&kd, &w);
    let off_diagonal: f64 = (0..cfg.n)
        .map(|i| {
            (0..cfg.n)
                .filter(|&j| j != i)
                .map(|j| w.get(i, j))
                .sum::<f64>()
        })
        .sum::<f64>()
        / (cfg.n * cfg.n) as f64;
    let json = io::GraphStatsJson {
        n: cfg.n,
        rho,
        seed: cfg.seed,
        edge_count: stats.edge_count,
        mean_degree: stats.mean_degree,
        max_degree: stats.max_degree,
        normalized_mean_degree: stats.mean_degree / rho_n,
        linf1_norm: graph.linf1_norm(),
        expected_normalized_degree: off_diagonal,
        truncation_gap: gap,
    };
    output.write("graph.edges", &io::edge_list(&graph))?;
    output.write("graph_stats.json", &io::to_json(&json))?;
    writeln!(
        console,
        "{} edges, mean degree {} ({} of rho n)",
        stats.edge_count,
        stats.mean_degree,
        stats.mean_degree / rho_n
    )?;
    Ok(Outcome::Success)
}

fn verify(
    cfg: &RunConfig,
    output: &Output,
    exec: &RayonExecutor,
    console: &mut dyn Write,
) -> anyhow::Result<Outcome> {
    let checks = properties::run_all(&SuiteSizes::from_budget(cfg.verify_samples), cfg.seed, exec)?;
    let all = checks.iter().all(|c| c.passed());
    let mut report = String::new();
    for c in &checks {
        report.push_str(&format!(
            "{} {}: {} cases, {} failures, worst {:e} ({})\n",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.cases,
            c.failures,
            c.worst_violation,
            c.detail
        ));
    }
    write!(console, "{report}")?;
    output.write("properties.txt", &report)?;
    output.write("properties.json", &io::to_json(&checks))?;
    Ok(if all {
        Outcome::Success
    } else {
        Outcome::ChecksFailed
    })
}
