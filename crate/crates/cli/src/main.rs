mod commands;
mod config;
mod table;

use clap::{Parser, Subcommand};
use commands::{CmdError, Outcome};
use config::{ConfigArgs, RunConfig};
use hypoisson_core::verify::{run_suite, SuiteOptions};
use std::fs::File;
use std::io::{self, BufWriter};
use std::process::ExitCode;

const OUTPUT_HELP: &str = "\
Output is CSV preceded by two comment lines:
  # hypoisson <version> <subcommand>
  # config: <resolved configuration as JSON>
Numbers are written with 17 significant digits. Configuration precedence:
defaults, then the --config JSON file, then flags. HYPOISSON_THREADS sets the
worker count.

Exit codes: 0 all checks within tolerance, 1 tolerance or numerical failure,
2 invalid configuration.";

#[derive(Parser)]
#[command(name = "hypoisson", version = hypoisson_core::VERSION, about = "Poisson transform of differential forms on real hyperbolic space", after_help = OUTPUT_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Components of the vector-valued c-function on a line of mu.
    /// Columns: mu_re, mu_im, c_scalar_*, c_qminus_*, c_q_*, oracle_err (NaN when not computed).
    Cfun,
    /// Pointwise and L2 Fatou residuals |e^{(rho-Re mu)t} F(k a_t) - c_pq c_q(mu) f(k)|.
    /// Columns: t, sample, residual, relative.
    Fatou,
    /// Residuals of the first and second order equations satisfied by Poisson transforms.
    /// Columns: sample, t, first_order, casimir, dd_star, d_star_d.
    Eigencheck,
    /// Eisenstein integral by quadrature and in closed form.
    /// Columns: t, f_qminus_quad_*, f_q_quad_*, f_qminus_closed_*, f_q_closed_*, component_err, schur_residual, hs_deviation.
    Eisenstein,
    /// Recovers boundary values from the Poisson transform at finite t.
    /// Columns: t, sample, error, f_norm.
    Invert,
    /// Weighted L^r Hardy norms against their lower and upper bounds.
    /// Columns: form, r, lower_bound, hardy_norm, grid_max, limit, upper_bound, lower_slack, upper_slack, gamma.
    Hardy,
    /// Runs the acceptance checks and prints one line per check.
    Selftest {
        /// Comma-separated check ids (all when absent)
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Cfun => "cfun",
            Command::Fatou => "fatou",
            Command::Eigencheck => "eigencheck",
            Command::Eisenstein => "eisenstein",
            Command::Invert => "invert",
            Command::Hardy => "hardy",
            Command::Selftest { .. } => "selftest",
        }
    }

    fn defaults(&self) -> RunConfig {
        match self {
            Command::Cfun => RunConfig { mu_re: 0.5, ..RunConfig::defaults((0.0, 0.0, 1), 4) },
            Command::Fatou => RunConfig::defaults((2.0, 6.0, 3), 4),
            Command::Eigencheck => RunConfig::defaults((0.5, 2.0, 4), 4),
            Command::Eisenstein => RunConfig::defaults((0.5, 2.0, 4), 1),
            Command::Invert => RunConfig::defaults((4.0, 6.0, 2), 1),
            Command::Hardy => RunConfig::defaults((0.0, 6.0, 25), 1),
            Command::Selftest { .. } => RunConfig::defaults((0.0, 0.0, 1), 1),
        }
    }
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("HYPOISSON_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().map_err(|_| format!("HYPOISSON_THREADS must be a positive integer, got {v:?}"))?;
    if n == 0 {
        return Err("HYPOISSON_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn selftest(only: &[u32], seed: Option<u64>) -> ExitCode {
    let mut opts = SuiteOptions::default();
    if let Some(s) = seed {
        opts.seed = s;
    }
    let checks = run_suite(&opts, only);
    let failed = checks.iter().filter(|c| !c.passed).count();
    for c in &checks {
        println!("{} [{}] {}: {} ({:.1}s)", if c.passed { "PASS" } else { "FAIL" }, c.id, c.name, c.detail, c.seconds);
    }
    if failed == 0 {
        println!("all {} checks passed", checks.len());
        ExitCode::SUCCESS
    } else {
        println!("{failed} of {} checks failed", checks.len());
        ExitCode::from(1)
    }
}

fn emit(outcome: &Outcome, command: &str, cfg: &RunConfig) -> io::Result<()> {
    match &cfg.out_path {
        Some(path) => outcome.table.write(BufWriter::new(File::create(path)?), command, cfg),
        None => outcome.table.write(io::stdout().lock(), command, cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if let Command::Selftest { only } = &cli.command {
        if let Some(bad) = only.iter().find(|id| !(1..=10).contains(*id)) {
            eprintln!("error: unknown check id {bad}");
            return ExitCode::from(2);
        }
        return selftest(only, cli.config.seed);
    }
    let command = cli.command.name();
    let cfg = match cli.command.defaults().resolve(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Cfun => commands::cmd_cfun(&cfg),
        Command::Fatou => commands::cmd_fatou(&cfg),
        Command::Eigencheck => commands::cmd_eigencheck(&cfg),
        Command::Eisenstein => commands::cmd_eisenstein(&cfg),
        Command::Invert => commands::cmd_invert(&cfg),
        Command::Hardy => commands::cmd_hardy(&cfg),
        Command::Selftest { .. } => unreachable!("handled above"),
    };
    match result {
        Ok(outcome) => {
            if let Err(e) = emit(&outcome, command, &cfg) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(1);
            }
            eprintln!("{}: {}", if outcome.passed { "pass" } else { "fail" }, outcome.summary);
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CmdError::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(CmdError::Compute(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
