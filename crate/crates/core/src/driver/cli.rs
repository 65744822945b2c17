use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use super::{iterative_solve, write_file, Backend, DriverError, RunConfig, SemanticsChoice};
use crate::asp::{encode_asp, encode_asp_template, AspOptions};
use crate::exec::{oracle_plan, parse_plan, ExecError, Executor, Plan};
use crate::ip::{build_state_change_model, IpOptions};
use crate::logic::find_stratification;
use crate::milp::write_lp;
use crate::mip::{BranchOrder, SolverConfig};
use crate::sas::{parse_sas, SasTask};

const NO_PLAN: i32 = 1;
const INPUT_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "axplan", version, about = "Bounded-horizon planning for SAS+ tasks with axioms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a plan against a task.
    Validate {
        task: PathBuf,
        plan: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        semantics: SemanticsArg,
    },
    /// Search horizons 0, 1, ... for a plan.
    Plan {
        task: PathBuf,
        #[arg(long, value_enum, default_value = "ip")]
        backend: BackendArg,
        #[arg(long, default_value_t = 10)]
        max_steps: usize,
        #[arg(long, default_value_t = 0)]
        start_steps: usize,
        #[arg(long, value_enum, default_value = "auto")]
        semantics: SemanticsArg,
        /// Search nodes per horizon.
        #[arg(long, default_value_t = 5_000_000)]
        node_limit: u64,
        /// Seconds per horizon.
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        most_constrained: bool,
        /// Minimize operator cost within each horizon.
        #[arg(long)]
        cost: bool,
        /// Print one line of model and solver statistics per horizon.
        #[arg(long)]
        stats: bool,
        /// Output directory for the emit backends.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write the model for one horizon.
    Encode {
        task: PathBuf,
        #[arg(long, value_enum)]
        backend: EncodeArg,
        #[arg(long)]
        steps: usize,
        #[arg(long, value_enum, default_value = "auto")]
        semantics: SemanticsArg,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// First-order rules over `step` and `layer` instead of ground ones.
        #[arg(long)]
        template: bool,
        /// Evaluate effect conditions at the step itself.
        #[arg(long)]
        conditions_at_step: bool,
        /// Write the id-to-name map of the ASP program here.
        #[arg(long)]
        names: Option<PathBuf>,
        #[arg(long)]
        cost: bool,
    },
    /// Breadth-first search for a shortest sequential plan.
    Oracle {
        task: PathBuf,
        #[arg(long, default_value_t = 10)]
        max_steps: usize,
    },
    /// Print task sizes.
    Stats { task: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SemanticsArg {
    Seq,
    Forall,
    Auto,
}

impl From<SemanticsArg> for SemanticsChoice {
    fn from(s: SemanticsArg) -> Self {
        match s {
            SemanticsArg::Seq => SemanticsChoice::Seq,
            SemanticsArg::Forall => SemanticsChoice::Forall,
            SemanticsArg::Auto => SemanticsChoice::Auto,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BackendArg {
    Ip,
    AspEmit,
    IpEmit,
    Oracle,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EncodeArg {
    Asp,
    Ip,
}

/// Failure with an exit status and a message for stderr.
struct Exit(i32, String);

impl Exit {
    fn input(e: impl std::fmt::Display) -> Self {
        Exit(INPUT_ERROR, e.to_string())
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// status: 0 on success, 1 when no plan was found or the plan is invalid,
/// 2 on bad input.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { INPUT_ERROR } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match run(cli.command, out) {
        Ok(()) => 0,
        Err(Exit(code, message)) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

fn load_task(path: &Path) -> Result<SasTask, Exit> {
    let text = fs::read_to_string(path).map_err(|e| Exit::input(format!("{}: {e}", path.display())))?;
    parse_sas(&text).map_err(|e| Exit::input(format!("{}: {e}", path.display())))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), Exit> {
    out.write_all(text.as_bytes()).map_err(Exit::input)
}

fn summary_line(task: &SasTask, plan: &Plan) -> String {
    format!("; makespan={} operators={} cost={}\n", plan.makespan(), plan.operator_count(), plan.cost(task))
}

fn run(command: Command, out: &mut dyn Write) -> Result<(), Exit> {
    match command {
        Command::Validate { task, plan, semantics } => {
            let task = load_task(&task)?;
            let text = fs::read_to_string(&plan).map_err(|e| Exit::input(format!("{}: {e}", plan.display())))?;
            let plan = parse_plan(&task, &text).map_err(Exit::input)?;
            let semantics = SemanticsChoice::from(semantics).resolve(&task);
            match Executor::new(&task).validate(&plan, semantics) {
                Ok(s) => emit(out, &format!("valid makespan={} operators={} cost={}\n", s.makespan, s.operators, s.cost)),
                Err(e @ ExecError::ForallWithAxioms) => Err(Exit::input(e)),
                Err(e) => Err(Exit(NO_PLAN, format!("invalid plan ({e:?}): {e}"))),
            }
        }
        Command::Plan {
            task,
            backend,
            max_steps,
            start_steps,
            semantics,
            node_limit,
            time_limit,
            most_constrained,
            cost,
            stats,
            output,
        } => {
            let task = load_task(&task)?;
            let wall = match std::env::var("AXPLAN_WALL_SECS") {
                Ok(v) => Some(seconds(&v).ok_or_else(|| Exit::input(format!("AXPLAN_WALL_SECS: bad value `{v}`")))?),
                Err(_) => None,
            };
            let time_limit = match time_limit {
                Some(t) => Some(seconds(&t.to_string()).ok_or_else(|| Exit::input("--time-limit must be positive"))?),
                None => None,
            };
            let config = RunConfig {
                backend: match backend {
                    BackendArg::Ip => Backend::Ip,
                    BackendArg::AspEmit => Backend::AspEmit,
                    BackendArg::IpEmit => Backend::IpEmit,
                    BackendArg::Oracle => Backend::Oracle,
                },
                semantics: semantics.into(),
                start_steps,
                max_steps,
                limits: SolverConfig {
                    node_limit,
                    time_limit,
                    branch_order: if most_constrained { BranchOrder::MostConstrained } else { BranchOrder::Index },
                },
                wall,
                cost_objective: cost,
                output_dir: output,
            };
            let outcome = match iterative_solve(&task, &config) {
                Ok(o) => o,
                Err(e @ DriverError::Limit { .. }) => return Err(Exit(NO_PLAN, e.to_string())),
                Err(e) => return Err(Exit::input(e)),
            };
            if stats {
                for it in &outcome.iterations {
                    emit(out, &format!("{}\n", it.stats_line()))?;
                }
            }
            if matches!(config.backend, Backend::AspEmit | Backend::IpEmit) {
                return emit(out, &format!("; wrote horizons {start_steps}..={max_steps}\n"));
            }
            match outcome.plan {
                Some(plan) => {
                    emit(out, &plan.to_text(&task))?;
                    emit(out, &summary_line(&task, &plan))?;
                    if stats {
                        emit(out, &format!("; semantics={}\n", outcome.semantics))?;
                    }
                    Ok(())
                }
                None => {
                    emit(out, "; no plan\n")?;
                    Err(Exit(NO_PLAN, format!("no plan within {max_steps} steps")))
                }
            }
        }
        Command::Encode { task, backend, steps, semantics, output, template, conditions_at_step, names, cost } => {
            let task = load_task(&task)?;
            let semantics = SemanticsChoice::from(semantics).resolve(&task);
            let options = AspOptions { conditions_at_step };
            let text = match backend {
                EncodeArg::Asp if template => encode_asp_template(&task, steps, semantics, options).map_err(Exit::input)?,
                EncodeArg::Asp => {
                    let p = encode_asp(&task, steps, semantics, options).map_err(Exit::input)?;
                    if let Some(path) = names {
                        write_file(&path, &p.name_map(&task)).map_err(Exit::input)?;
                    }
                    p.to_ground_text()
                }
                EncodeArg::Ip => {
                    let ip = build_state_change_model(&task, steps, semantics, IpOptions { cost_objective: cost })
                        .map_err(Exit::input)?;
                    write_lp(&ip.milp)
                }
            };
            match output {
                Some(path) => write_file(&path, &text).map_err(Exit::input),
                None => emit(out, &text),
            }
        }
        Command::Oracle { task, max_steps } => {
            let task = load_task(&task)?;
            match oracle_plan(&task, max_steps) {
                Ok(Some(plan)) => {
                    emit(out, &plan.to_text(&task))?;
                    emit(out, &summary_line(&task, &plan))
                }
                Ok(None) => {
                    emit(out, "; no plan\n")?;
                    Err(Exit(NO_PLAN, format!("no plan within {max_steps} steps")))
                }
                Err(e) => Err(Exit(NO_PLAN, e.to_string())),
            }
        }
        Command::Stats { task } => {
            let task = load_task(&task)?;
            let layers = find_stratification(&task.axiom_program().program).map_or(0, |s| s.max_level());
            let conditional = task.operators.iter().flat_map(|o| &o.effects).filter(|e| e.is_conditional()).count();
            let text = format!(
                "variables={}\nprimary={}\nsecondary={}\noperators={}\nconditional_effects={}\naxioms={}\naxiom_layers={}\nmutex_groups={}\ngoal={}\nsemantics={}\n",
                task.variables.len(),
                task.primary_vars().count(),
                task.secondary_vars().count(),
                task.operators.len(),
                conditional,
                task.axioms.len(),
                layers,
                task.mutex_groups.len(),
                task.goal.len(),
                SemanticsChoice::Auto.resolve(&task),
            );
            emit(out, &text)
        }
    }
}

fn seconds(text: &str) -> Option<Duration> {
    text.trim().parse::<f64>().ok().filter(|s| s.is_finite() && *s > 0.0).map(Duration::from_secs_f64)
}
