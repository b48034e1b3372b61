//! Command-line front end for the otkit solvers, checkers, constructions and
//! the stability harness.
//!
//! Exit codes: 0 success or pass; 1 a mathematically negative result
//! (violation found, infeasible order, repair failed, non-unique optimizer);
//! 2 usage or parse errors; 3 numerical failure or guard trips.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use otkit::competitors::{build_competitors, build_mart_competitors};
use otkit::cost::parse_pieces;
use otkit::measure::{format_measure, parse_measure};
use otkit::monotone::{check_subsets, format_report, MonotonicityReport};
use otkit::plan::{format_plan, parse_matrix, parse_plan};
use otkit::stability::{
    adapted_distance, format_run_csv, format_run_text, run_monotonicity_stability,
    run_plan_stability, run_value_stability, PerturbationSchedule, StabilityRun,
};
use otkit::{
    check_c_monotone, check_cyclical_monotone, check_mart_c_monotone, convex_order,
    hunt_violation_generic, solve_mot, solve_ot, solve_owt_barycentric, solve_owt_linear,
    wasserstein, CandidateSet, CostSpec, DiscreteMeasure, Error, GenericCost, PointwiseCost,
    TransportPlan,
};

#[derive(Parser)]
#[command(
    name = "otkit",
    version,
    about = "Discrete optimal transport, martingale transport and weak transport on the line"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for randomized search (generic violation hunting)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Threshold above which a monotonicity gap counts as a violation
    #[arg(long, global = true, default_value_t = otkit::tol::GAP)]
    gap_tol: f64,

    /// Feasibility tolerance used when validating computed plans
    #[arg(long, global = true, default_value_t = otkit::tol::FEASIBILITY)]
    feas_tol: f64,

    /// Write the result to this file instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CostArgs {
    /// Named pointwise cost family: `abs` or `square`
    #[arg(long, conflicts_with = "cost_table")]
    cost: Option<String>,

    /// Pointwise cost tabulated in the matrix format (y header, x column)
    #[arg(long)]
    cost_table: Option<PathBuf>,
}

impl CostArgs {
    fn resolve(&self) -> Result<PointwiseCost, Error> {
        match (&self.cost, &self.cost_table) {
            (Some(name), None) => PointwiseCost::by_name(name),
            (None, Some(path)) => {
                let (x_atoms, y_atoms, values) = parse_matrix(&read(path)?)?;
                Ok(PointwiseCost::Table(otkit::cost::CostTable {
                    x_atoms,
                    y_atoms,
                    values,
                }))
            }
            _ => Err(Error::Parse(
                "exactly one of --cost or --cost-table is required".into(),
            )),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Value,
    Plan,
    Monotone,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Solve classical optimal transport between two measures
    SolveOt {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        nu: PathBuf,
        #[command(flatten)]
        cost: CostArgs,
    },
    /// Solve martingale optimal transport (requires convex order)
    SolveMot {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        nu: PathBuf,
        #[command(flatten)]
        cost: CostArgs,
    },
    /// Solve weak optimal transport: linear costs delegate to solve-ot,
    /// `--theta` selects the barycentric problem
    SolveOwt {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        nu: PathBuf,
        #[command(flatten)]
        cost: CostArgs,
        /// Convex piecewise-linear function, one `slope,intercept` per line
        #[arg(long, conflicts_with_all = ["cost", "cost_table"])]
        theta: Option<PathBuf>,
    },
    /// Check c-cyclical monotonicity of a plan's support
    CheckCyclical {
        #[arg(long)]
        plan: PathBuf,
        #[command(flatten)]
        cost: CostArgs,
        /// Longest cycle length; defaults to the support size
        #[arg(long)]
        max_cycle: Option<usize>,
    },
    /// Check C-monotonicity of a candidate family or a plan's disintegration
    CheckMonotone {
        /// Plan file; the candidate family is its disintegration
        #[arg(long, conflicts_with = "pairs")]
        plan: Option<PathBuf>,
        /// Candidate file: `pair <x>` headers followed by measure lines
        #[arg(long)]
        pairs: Option<PathBuf>,
        #[command(flatten)]
        cost: CostArgs,
        /// Barycentric cost from a piecewise-linear file
        #[arg(long, conflicts_with_all = ["cost", "cost_table", "generic"])]
        theta: Option<PathBuf>,
        /// Also require competitors to preserve barycenters
        #[arg(long)]
        martingale: bool,
        /// Hunt with a named generic oracle (`min01` or `neg-variance`)
        /// instead of the exact LP
        #[arg(long)]
        generic: Option<String>,
        /// Search budget for the generic hunter
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        /// Check every sub-family up to this size instead of the full family
        #[arg(long)]
        subset_max: Option<usize>,
    },
    /// Build competitors of a perturbed family (Wasserstein pushforward
    /// construction; `--martingale` repairs barycenters afterwards)
    BuildCompetitors {
        /// Original family, one measure file per index
        #[arg(long, num_args = 1.., required = true)]
        p: Vec<PathBuf>,
        /// Competitor family with the same pooled measure
        #[arg(long, num_args = 1.., required = true)]
        q: Vec<PathBuf>,
        /// Perturbed family
        #[arg(long = "p-new", num_args = 1.., required = true)]
        p_new: Vec<PathBuf>,
        #[arg(long)]
        martingale: bool,
        /// Wasserstein order of the couplings
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        /// Write `competitor_<i>.csv` files here
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run a stability experiment along a geometric perturbation schedule
    Stability {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        nu: PathBuf,
        #[command(flatten)]
        cost: CostArgs,
        #[arg(long, value_enum)]
        mode: Mode,
        /// Number of schedule steps
        #[arg(long, default_value_t = 12)]
        steps: usize,
        /// Geometric ratio of the schedule
        #[arg(long, default_value_t = 0.5)]
        geom_ratio: f64,
        /// Pass/fail tolerance; defaults to 1e-5 (value), 1e-4 (plan),
        /// 1e-7 (monotone)
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Nested (adapted) distance between two plans
    AdaptedDist {
        #[arg(long)]
        plan_a: PathBuf,
        #[arg(long)]
        plan_b: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
    /// r-Wasserstein distance between two probability measures
    Wasserstein {
        #[arg(long)]
        p: PathBuf,
        #[arg(long)]
        q: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
    /// Check whether mu is smaller than nu in convex order
    ConvexOrder {
        #[arg(long)]
        mu: PathBuf,
        #[arg(long)]
        nu: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            if matches!(e, Error::InfeasibleOrder) {
                eprintln!("infeasible: convex order violated");
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::InfeasibleOrder
        | Error::RepairFailed { .. }
        | Error::NonUniqueOptimizer { .. }
        | Error::InfeasibleBarycenters { .. } => 1,
        Error::NumericalFailure(_) | Error::TooLarge(_) => 3,
        _ => 2,
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))
}

fn write_result(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| Error::Parse(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn load_measure(path: &Path) -> Result<DiscreteMeasure, Error> {
    parse_measure(&read(path)?)
}

fn load_measures(paths: &[PathBuf]) -> Result<Vec<DiscreteMeasure>, Error> {
    paths.iter().map(|p| load_measure(p)).collect()
}

/// Candidate file format: `pair <x>` starts a pair, followed by
/// `location,weight` lines; `#` comments allowed.
fn parse_pairs(text: &str) -> Result<Vec<(f64, DiscreteMeasure)>, Error> {
    let mut pairs: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find('#') {
            Some(i) => raw[..i].trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("pair") {
            let x: f64 = rest.trim().parse().map_err(|_| {
                Error::Parse(format!("line {}: bad pair header `{line}`", lineno + 1))
            })?;
            pairs.push((x, Vec::new()));
        } else {
            let current = pairs.last_mut().ok_or_else(|| {
                Error::Parse(format!(
                    "line {}: measure line before any `pair <x>` header",
                    lineno + 1
                ))
            })?;
            let mut fields = line.split(',');
            let a: f64 = fields
                .next()
                .unwrap_or_default()
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad location", lineno + 1)))?;
            let w: f64 = fields
                .next()
                .unwrap_or_default()
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: bad weight", lineno + 1)))?;
            current.1.push((a, w));
        }
    }
    pairs
        .into_iter()
        .map(|(x, pts)| Ok((x, DiscreteMeasure::from_pairs(pts)?)))
        .collect()
}

fn plan_output(plan: &TransportPlan, value: f64) -> String {
    format!("# value: {value}\n{}", format_plan(plan))
}

fn report_exit(report: &MonotonicityReport) -> ExitCode {
    if report.is_violated {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode, Error> {
    match &cli.command {
        Command::SolveOt { mu, nu, cost } => {
            let (mu, nu) = (load_measure(mu)?, load_measure(nu)?);
            let (plan, value) = solve_ot(&mu, &nu, &cost.resolve()?)?;
            plan.validate_marginals(&mu, &nu, cli.feas_tol)?;
            write_result(&cli.out, &plan_output(&plan, value))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::SolveMot { mu, nu, cost } => {
            let (mu, nu) = (load_measure(mu)?, load_measure(nu)?);
            let (plan, value) = solve_mot(&mu, &nu, &cost.resolve()?)?;
            plan.plan().validate_marginals(&mu, &nu, cli.feas_tol)?;
            write_result(&cli.out, &plan_output(plan.plan(), value))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::SolveOwt {
            mu,
            nu,
            cost,
            theta,
        } => {
            let (mu, nu) = (load_measure(mu)?, load_measure(nu)?);
            let (plan, value) = match theta {
                Some(path) => solve_owt_barycentric(&mu, &nu, &parse_pieces(&read(path)?)?)?,
                None => solve_owt_linear(&mu, &nu, &cost.resolve()?)?,
            };
            plan.validate_marginals(&mu, &nu, cli.feas_tol)?;
            write_result(&cli.out, &plan_output(&plan, value))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::CheckCyclical {
            plan,
            cost,
            max_cycle,
        } => {
            let plan = parse_plan(&read(plan)?)?;
            let max_cycle = max_cycle.unwrap_or_else(|| plan.support().len().max(2));
            let report =
                check_cyclical_monotone(&plan, &cost.resolve()?, max_cycle, cli.gap_tol)?;
            write_result(&cli.out, &format_report(&report))?;
            Ok(report_exit(&report))
        }
        Command::CheckMonotone {
            plan,
            pairs,
            cost,
            theta,
            martingale,
            generic,
            budget,
            subset_max,
        } => {
            let cand = match (plan, pairs) {
                (Some(path), None) => CandidateSet::from_plan(&parse_plan(&read(path)?)?)?,
                (None, Some(path)) => CandidateSet::new(parse_pairs(&read(path)?)?)?,
                _ => {
                    return Err(Error::Parse(
                        "exactly one of --plan or --pairs is required".into(),
                    ))
                }
            };
            let report = if let Some(name) = generic {
                hunt_violation_generic(
                    &cand,
                    &GenericCost::by_name(name)?,
                    *budget,
                    *martingale,
                    cli.seed,
                    cli.gap_tol,
                )?
            } else {
                let spec = match theta {
                    Some(path) => CostSpec::Barycentric(parse_pieces(&read(path)?)?),
                    None => CostSpec::Pointwise(cost.resolve()?),
                };
                match subset_max {
                    Some(max) => check_subsets(&cand, &spec, *martingale, *max, cli.gap_tol)?,
                    None if *martingale => check_mart_c_monotone(&cand, &spec, cli.gap_tol)?,
                    None => check_c_monotone(&cand, &spec, cli.gap_tol)?,
                }
            };
            write_result(&cli.out, &format_report(&report))?;
            Ok(report_exit(&report))
        }
        Command::BuildCompetitors {
            p,
            q,
            p_new,
            martingale,
            r,
            out_dir,
        } => {
            let p = load_measures(p)?;
            let q = load_measures(q)?;
            let p_new = load_measures(p_new)?;
            let competitors = if *martingale {
                build_mart_competitors(&p, &q, &p_new)?
            } else {
                build_competitors(&p, &q, &p_new, *r)?
            };
            let mut summary = String::new();
            for (i, c) in competitors.iter().enumerate() {
                match out_dir {
                    Some(dir) => {
                        fs::create_dir_all(dir).map_err(|e| {
                            Error::Parse(format!("cannot create {}: {e}", dir.display()))
                        })?;
                        let path = dir.join(format!("competitor_{}.csv", i + 1));
                        fs::write(&path, format_measure(c)).map_err(|e| {
                            Error::Parse(format!("cannot write {}: {e}", path.display()))
                        })?;
                        summary.push_str(&format!("competitor {} -> {}\n", i + 1, path.display()));
                    }
                    None => {
                        summary.push_str(&format!("# competitor {}\n", i + 1));
                        summary.push_str(&format_measure(c));
                    }
                }
            }
            write_result(&cli.out, &summary)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Stability {
            mu,
            nu,
            cost,
            mode,
            steps,
            geom_ratio,
            tolerance,
            format,
        } => {
            let (mu, nu) = (load_measure(mu)?, load_measure(nu)?);
            let cost = cost.resolve()?;
            let schedule = PerturbationSchedule::geometric(*steps, *geom_ratio)?;
            let run: StabilityRun = match mode {
                Mode::Value => {
                    run_value_stability(&mu, &nu, &cost, &schedule, tolerance.unwrap_or(1e-5))?
                }
                Mode::Plan => {
                    run_plan_stability(&mu, &nu, &cost, &schedule, tolerance.unwrap_or(1e-4))?
                }
                Mode::Monotone => run_monotonicity_stability(
                    &mu,
                    &nu,
                    &cost,
                    &schedule,
                    tolerance.unwrap_or(1e-7),
                )?,
            };
            let rendered = match format {
                Format::Csv => format_run_csv(&run),
                Format::Text => format_run_text(&run),
            };
            write_result(&cli.out, &rendered)?;
            Ok(if run.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::AdaptedDist { plan_a, plan_b, r } => {
            let a = parse_plan(&read(plan_a)?)?;
            let b = parse_plan(&read(plan_b)?)?;
            let d = adapted_distance(&a, &b, *r)?;
            write_result(&cli.out, &format!("{d}\n"))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Wasserstein { p, q, r } => {
            let (p, q) = (load_measure(p)?, load_measure(q)?);
            let d = wasserstein(&p, &q, *r)?;
            write_result(&cli.out, &format!("{d}\n"))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::ConvexOrder { mu, nu } => {
            let (mu, nu) = (load_measure(mu)?, load_measure(nu)?);
            let ordered = convex_order(&mu, &nu)?;
            write_result(&cli.out, &format!("{ordered}\n"))?;
            Ok(if ordered {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
