use std::path::{Path, PathBuf};
use std::process::ExitCode;

use beliefplan::io::{plan_to_csv, read_json, to_json, write_text, PlanFile, ResultSummary};
use beliefplan::logic::{extract_subformulas, parse_formula};
use beliefplan::scenario::load_scenario;
use beliefplan::synth::{check_plan_with, id_prtl, monte_carlo, Problem};
use beliefplan::{Error, Formula};
use clap::{Parser, Subcommand};

/// Log verbosity, read by env_logger (e.g. `BELIEFPLAN_LOG=info`).
const LOG_ENV: &str = "BELIEFPLAN_LOG";

#[derive(Parser)]
#[command(
    name = "beliefplan",
    version,
    about = "Temporal-logic planning in Gaussian belief space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a plan; writes plan JSON and a CSV next to it.
    Plan {
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        k_max: Option<usize>,
        /// Search iterations per lasso segment.
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long, default_value = "plan.json")]
        out: PathBuf,
    },
    /// Validate a plan against its scenario.
    Check { plan: PathBuf, scenario: PathBuf },
    /// Execute a plan on sampled trajectories.
    Montecarlo {
        plan: PathBuf,
        scenario: PathBuf,
        #[arg(long)]
        rollouts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the belief-space abstraction.
    Abstract {
        scenario: PathBuf,
        #[arg(long)]
        dump_kripke: PathBuf,
    },
    /// Pretty-print a formula.
    Parse { formula: String },
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse { .. } => "parse",
        Error::Scenario { .. } => "scenario",
        Error::Io(_) => "io",
        _ => "numeric",
    }
}

fn csv_path(out: &Path) -> PathBuf {
    out.with_extension("csv")
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Plan {
            scenario,
            seed,
            k_max,
            iters,
            out,
        } => {
            let mut sc = load_scenario::<f64>(&scenario)?;
            if let Some(s) = seed {
                sc.seed = s;
            }
            if let Some(k) = k_max {
                sc.k_max = k;
            }
            if let Some(n) = iters {
                sc.params.iterations = n.max(1);
            }
            let problem = Problem::new(&sc)?;
            log::info!(
                "abstraction: {} cells, {} pruned",
                problem.kripke.len(),
                problem.kripke.pruned
            );
            let result = id_prtl(&problem)?;
            if let Some((plan, lasso)) = result.plan() {
                let file = PlanFile::new(plan, lasso, &sc.name, Some(result.stats.clone()));
                write_text(&out, &to_json(&file)?)?;
                write_text(csv_path(&out), &plan_to_csv(plan)?)?;
            }
            print!("{}", to_json(&ResultSummary::new(&result, &sc.name))?);
            Ok(result.exit_code() as u8)
        }
        Command::Check { plan, scenario } => {
            let sc = load_scenario::<f64>(&scenario)?;
            let file: PlanFile = read_json(&plan)?;
            let problem = Problem::new(&sc)?;
            let report = check_plan_with(&file.plan()?, &file.lasso, &problem);
            if report.is_ok() {
                println!("ok: plan satisfies all constraints");
            }
            for v in &report.violations {
                println!("{v}");
            }
            Ok(if report.is_ok() { 0 } else { 1 })
        }
        Command::Montecarlo {
            plan,
            scenario,
            rollouts,
            seed,
            out,
        } => {
            let sc = load_scenario::<f64>(&scenario)?;
            let file: PlanFile = read_json(&plan)?;
            let problem = Problem::new(&sc)?;
            let report = monte_carlo(&file.plan()?, &file.lasso, &problem, rollouts, seed)?;
            let text = to_json(&report)?;
            match out {
                Some(p) => write_text(p, &text)?,
                None => print!("{text}"),
            }
            Ok(0)
        }
        Command::Abstract { scenario, dump_kripke } => {
            let sc = load_scenario::<f64>(&scenario)?;
            let problem = Problem::new(&sc)?;
            write_text(&dump_kripke, &to_json(&problem.kripke.dump())?)?;
            println!(
                "{} cells ({} pruned), {} atomic propositions",
                problem.kripke.len(),
                problem.kripke.pruned,
                problem.kripke.aps.len()
            );
            Ok(0)
        }
        Command::Parse { formula } => {
            let f: Formula = parse_formula(&formula)?;
            let abstracted = extract_subformulas(&f);
            println!("{f}");
            println!("skeleton: {}", abstracted.skeleton);
            for (i, ap) in abstracted.aps.iter().enumerate() {
                println!("  AP{}: {ap}", i + 1);
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or(LOG_ENV, "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("beliefplan: error[{}]: {msg}", error_kind(&e));
            ExitCode::from(1)
        }
    }
}
