use clap::{Args, Parser, Subcommand, ValueEnum};
use realloc::growth::{Baseline, PolicyMode};
use realloc::oracle::{ConstraintMode, PolicyClass};
use realloc::scenario::{
    run_compare, run_dynamics, run_oracle, run_solve, run_sweep, Precision, RunOutput,
    ScenarioConfig, ScenarioError, SweepSpec, SweepVariable,
};
use realloc::FormulaMode;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

const COLUMNS: &str = "\
Output columns:
  delta_l       liquidity shock that must be raised
  regime        no_shock | interior | corner_full_coercion | infeasible
  lambda_s      liquidation cutoff; firms with type below it are dropped
  lambda_l      preservation cutoff; firms at or above it stay long-term
  liquidity     1/2*x1*[(theta1_s-theta1_l)*lambda_l^2 + (2*theta1_l-theta1_s)*lambda_s^2]
  objective     1/2*x2*[theta2_s*(lambda_l^2-lambda_s^2) + theta2_l*(1-lambda_l^2)]
  gamma         (theta2_l-theta2_s)*theta1_l / ((theta1_s-theta1_l)*theta2_l); in dynamics
                evaluated on theta1_s=1, theta1_l=a, theta2_s=beta_s, theta2_l=beta_l*a
  t, a          period index and distance to frontier A/frontier at period start
  share_liq     lambda_s
  share_coerce  lambda_l - lambda_s
  share_long    1 - lambda_l
  growth, g_*   net growth g with 1+g = [(lambda_l^2-lambda_s^2)*beta_s + (1-lambda_l^2)*beta_l*a]/(2a)
  g_opt         growth of the baseline (closed-form optimum or at-least oracle)
  g_coerce      growth with lambda_s = 0, lambda_l = min(1, sqrt(2*eta/(beta*(1-a))))
  g_liq         growth with lambda_s = lambda_l (variant named in the header comment)
  loss_*        g_opt minus the counterfactual growth

Exit codes: 0 success, 1 configuration or validation error, 2 infeasible scenario.";

#[derive(Parser, Debug)]
#[command(
    name = "realloc",
    version,
    about = "Conglomerate cutoff solver, brute-force oracle, and growth simulator",
    after_help = COLUMNS
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Formula family; overrides the scenario's `mode`.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Decimal places, or `full` for round-trip precision.
    #[arg(long, default_value = "6")]
    precision: Precision,
}

#[derive(Args, Debug)]
struct Range {
    #[arg(long = "from")]
    start: f64,
    #[arg(long = "to")]
    stop: f64,
    #[arg(long)]
    steps: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the static problem for one shock (JSON record).
    Solve {
        #[command(flatten)]
        common: Common,
        #[arg(long = "delta-l")]
        delta_l: f64,
    },
    /// Sweep the shock and emit cutoffs per step (CSV).
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: Range,
    },
    /// Simulate the growth recursion under one policy (CSV).
    Dynamics {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "optimal")]
        policy: PolicyArg,
    },
    /// Compare optimal, coercion-only and liquidation-only growth across a (CSV).
    Compare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        range: Range,
        #[arg(long, value_enum, default_value = "closed-form")]
        baseline: BaselineArg,
        /// Oracle grid points per axis when the baseline is the oracle.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Compare the closed form against the brute-force oracle (JSON record).
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long = "delta-l")]
        delta_l: f64,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, value_enum)]
        constraint: Option<ConstraintArg>,
        #[arg(long, value_enum)]
        class: Option<ClassArg>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Consistent,
    PaperLiteral,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PolicyArg {
    Optimal,
    CoercionOnly,
    LiquidationOnly,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BaselineArg {
    ClosedForm,
    Oracle,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ConstraintArg {
    Equality,
    AtLeast,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ClassArg {
    Unrestricted,
    CoercionOnly,
    LiquidationOnly,
}

impl Common {
    fn load(&self) -> Result<(ScenarioConfig, FormulaMode), ScenarioError> {
        let cfg = ScenarioConfig::load(&self.config)?;
        let mode = match self.mode {
            Some(ModeArg::Consistent) => FormulaMode::Consistent,
            Some(ModeArg::PaperLiteral) => FormulaMode::PaperLiteral,
            None => cfg.mode,
        };
        Ok((cfg, mode))
    }
}

fn run(command: &Command) -> Result<(RunOutput, Option<PathBuf>), ScenarioError> {
    match command {
        Command::Solve { common, delta_l } => {
            let (cfg, mode) = common.load()?;
            Ok((
                run_solve(&cfg, *delta_l, mode, common.precision)?,
                common.out.clone(),
            ))
        }
        Command::Sweep { common, range } => {
            let (cfg, mode) = common.load()?;
            let spec = SweepSpec::new(SweepVariable::DeltaL, range.start, range.stop, range.steps)?;
            Ok((
                run_sweep(&cfg, &spec, mode, common.precision)?,
                common.out.clone(),
            ))
        }
        Command::Dynamics { common, policy } => {
            let (cfg, mode) = common.load()?;
            let policy = match policy {
                PolicyArg::Optimal => PolicyMode::Optimal,
                PolicyArg::CoercionOnly => PolicyMode::CoercionOnly,
                PolicyArg::LiquidationOnly => PolicyMode::LiquidationOnly,
            };
            Ok((
                run_dynamics(&cfg, policy, mode, common.precision)?,
                common.out.clone(),
            ))
        }
        Command::Compare {
            common,
            range,
            baseline,
            grid,
        } => {
            let (cfg, mode) = common.load()?;
            let spec = SweepSpec::new(SweepVariable::A, range.start, range.stop, range.steps)?;
            let baseline = match baseline {
                BaselineArg::ClosedForm => Baseline::ClosedForm,
                BaselineArg::Oracle => Baseline::Oracle {
                    grid_n: grid
                        .or(cfg.oracle.map(|o| o.grid_n))
                        .unwrap_or(realloc::oracle::CLI_GRID),
                },
            };
            Ok((
                run_compare(&cfg, &spec, baseline, mode, common.precision)?,
                common.out.clone(),
            ))
        }
        Command::Oracle {
            common,
            delta_l,
            grid,
            constraint,
            class,
        } => {
            let (cfg, mode) = common.load()?;
            let mut settings = cfg.oracle.unwrap_or_default();
            if let Some(g) = grid {
                settings.grid_n = *g;
            }
            if let Some(c) = constraint {
                settings.constraint = match c {
                    ConstraintArg::Equality => ConstraintMode::Equality,
                    ConstraintArg::AtLeast => ConstraintMode::AtLeast,
                };
            }
            if let Some(c) = class {
                settings.class = match c {
                    ClassArg::Unrestricted => PolicyClass::Unrestricted,
                    ClassArg::CoercionOnly => PolicyClass::CoercionOnly,
                    ClassArg::LiquidationOnly => PolicyClass::LiquidationOnly,
                };
            }
            let out = run_oracle(&cfg, *delta_l, settings, mode, common.precision)?;
            Ok((out, common.out.clone()))
        }
    }
}

fn emit(text: &str, out: Option<PathBuf>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli.command) {
        Ok((output, out)) => {
            if let Err(e) = emit(&output.text, out) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(output.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
