//! Iterative-horizon search and the command-line front end.

mod cli;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::asp::{encode_asp, AspError, AspOptions};
use crate::exec::{oracle_plan, ExecError, Executor, Plan, Semantics};
use crate::ip::{build_state_change_model, decode_assignment, IpError, IpOptions};
use crate::milp::write_lp;
use crate::mip::{solve, SolveStatus, SolverConfig};
use crate::sas::SasTask;

pub use cli::run_cli;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Build and solve the integer program internally.
    Ip,
    /// Write one ASP file per horizon.
    AspEmit,
    /// Write one LP file per horizon.
    IpEmit,
    /// Breadth-first search.
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SemanticsChoice {
    Seq,
    Forall,
    /// Sequential steps when the task has axioms, parallel otherwise.
    Auto,
}

impl SemanticsChoice {
    pub fn resolve(self, task: &SasTask) -> Semantics {
        match self {
            SemanticsChoice::Seq => Semantics::Seq,
            SemanticsChoice::Forall => Semantics::Forall,
            SemanticsChoice::Auto if task.has_axioms() => Semantics::Seq,
            SemanticsChoice::Auto => Semantics::Forall,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub backend: Backend,
    pub semantics: SemanticsChoice,
    pub start_steps: usize,
    pub max_steps: usize,
    /// Limits for each horizon's solve.
    pub limits: SolverConfig,
    /// Cap on the whole run.
    pub wall: Option<Duration>,
    pub cost_objective: bool,
    /// Directory for the emit backends.
    pub output_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            backend: Backend::Ip,
            semantics: SemanticsChoice::Auto,
            start_steps: 0,
            max_steps: 10,
            limits: SolverConfig::default(),
            wall: None,
            cost_objective: false,
            output_dir: None,
        }
    }
}

#[derive(Debug, Error)]
pub enum DriverError {
    #[error("start horizon {start} exceeds the cap {max}")]
    BadHorizon { start: usize, max: usize },
    #[error("decoded plan fails validation: {0}")]
    ValidationFailure(ExecError),
    #[error(transparent)]
    Ip(#[from] IpError),
    #[error(transparent)]
    Asp(#[from] AspError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("solver stopped by its limits at horizon {k}")]
    Limit { k: usize },
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("backend writes files; give an output directory")]
    NoOutput,
}

/// Statistics of one horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Iteration {
    pub k: usize,
    pub variables: usize,
    pub constraints: usize,
    pub nodes: u64,
    pub propagations: u64,
    pub status: &'static str,
}

impl Iteration {
    pub fn stats_line(&self) -> String {
        format!(
            "; k={} variables={} constraints={} nodes={} propagations={} status={}",
            self.k, self.variables, self.constraints, self.nodes, self.propagations, self.status
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    pub semantics: Semantics,
    pub plan: Option<Plan>,
    /// First horizon with a plan.
    pub horizon: Option<usize>,
    pub iterations: Vec<Iteration>,
}

/// Tries horizons `start_steps..=max_steps` in order and returns the first
/// plan found, validated against the task.
pub fn iterative_solve(task: &SasTask, config: &RunConfig) -> Result<RunOutcome, DriverError> {
    if config.start_steps > config.max_steps {
        return Err(DriverError::BadHorizon { start: config.start_steps, max: config.max_steps });
    }
    let semantics = config.semantics.resolve(task);
    if semantics == Semantics::Forall && task.has_axioms() {
        return Err(IpError::ForallWithAxioms.into());
    }
    let mut out = RunOutcome { semantics, plan: None, horizon: None, iterations: Vec::new() };
    let ex = Executor::new(task);

    if config.backend == Backend::Oracle {
        let plan = oracle_plan(task, config.max_steps)?.filter(|p| p.makespan() >= config.start_steps);
        out.semantics = Semantics::Seq;
        if let Some(plan) = plan {
            ex.validate(&plan, Semantics::Seq).map_err(DriverError::ValidationFailure)?;
            out.horizon = Some(plan.makespan());
            out.plan = Some(plan);
        }
        return Ok(out);
    }
    if config.backend != Backend::Ip {
        emit_models(task, config, semantics)?;
        return Ok(out);
    }

    let deadline = config.wall.map(|w| Instant::now() + w);
    for k in config.start_steps..=config.max_steps {
        if k == 0 {
            let goal = ex.goal_holds(&ex.initial_state());
            out.iterations.push(Iteration {
                k,
                variables: 0,
                constraints: 0,
                nodes: 0,
                propagations: 0,
                status: if goal { "feasible" } else { "infeasible" },
            });
            if goal {
                out.plan = Some(Plan::empty());
                out.horizon = Some(0);
                return Ok(out);
            }
            continue;
        }
        let mut limits = config.limits;
        if let Some(d) = deadline {
            let left = d.saturating_duration_since(Instant::now());
            if left.is_zero() {
                return Err(DriverError::Limit { k });
            }
            limits.time_limit = Some(limits.time_limit.map_or(left, |t| t.min(left)));
        }
        let ip = build_state_change_model(task, k, semantics, IpOptions { cost_objective: config.cost_objective })?;
        let result = solve(&ip.milp, &limits);
        out.iterations.push(Iteration {
            k,
            variables: ip.milp.num_vars(),
            constraints: ip.milp.constraints.len(),
            nodes: result.nodes,
            propagations: result.propagations,
            status: match result.status {
                SolveStatus::Feasible => "feasible",
                SolveStatus::Infeasible => "infeasible",
                SolveStatus::Limit => "limit",
            },
        });
        match result.status {
            SolveStatus::Infeasible => continue,
            SolveStatus::Limit => return Err(DriverError::Limit { k }),
            SolveStatus::Feasible => {
                let values = result.assignment.expect("feasible result carries values");
                let plan = decode_assignment(&ip, &values)?;
                ex.validate(&plan, semantics).map_err(DriverError::ValidationFailure)?;
                out.plan = Some(plan);
                out.horizon = Some(k);
                return Ok(out);
            }
        }
    }
    Ok(out)
}

/// Writes `asp_k{k}.lp` or `ip_k{k}.lp` for every horizon of the configured
/// range.
fn emit_models(task: &SasTask, config: &RunConfig, semantics: Semantics) -> Result<Vec<PathBuf>, DriverError> {
    let dir = config.output_dir.as_deref().ok_or(DriverError::NoOutput)?;
    let mut written = Vec::new();
    for k in config.start_steps..=config.max_steps {
        let (text, stem) = match config.backend {
            Backend::AspEmit => (encode_asp(task, k, semantics, AspOptions::default())?.to_ground_text(), "asp"),
            _ => {
                let ip = build_state_change_model(task, k, semantics, IpOptions { cost_objective: config.cost_objective })?;
                (write_lp(&ip.milp), "ip")
            }
        };
        let path = dir.join(format!("{stem}_k{k}.lp"));
        write_file(&path, &text)?;
        written.push(path);
    }
    Ok(written)
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), DriverError> {
    fs::write(path, text).map_err(|source| DriverError::Io { path: path.to_path_buf(), source })
}
