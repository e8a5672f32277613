use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use dickecool::analytic::{jz_curve, AnalyticParams};
use dickecool::propagate::{linear_grid, log_grid};
use dickecool::verify::{self, Level};
use dickecool::OccupationBasis;
use dickecool_cli::output::curve_csv;
use dickecool_cli::{max_dim_from_env, run, CliError, RunConfig, RunOptions};

#[derive(Parser)]
#[command(name = "dickecool", version, about = "Collective cavity cooling of qubit ensembles with local dephasing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridArg {
    Log,
    Linear,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Maximum number of sweep points propagated concurrently.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        jobs: Option<u32>,
    },
    /// Run the identity and oracle suites.
    Verify {
        #[arg(long, value_enum, default_value = "fast")]
        level: LevelArg,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print the closed-form ⟨Jz(t)⟩ relaxation curve as CSV.
    Analytic {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long, default_value_t = 0.0)]
        nbar: f64,
        #[arg(long)]
        tmax: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, value_enum, default_value = "log")]
        grid: GridArg,
        /// Initial ⟨Jz⟩ (0 is the maximally mixed state).
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        jz0: f64,
    },
    /// Print the dimension of the symmetric subspace for N qubits.
    Basis {
        #[arg(long)]
        n: usize,
    },
}

fn execute(command: Command) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    let out_err = |source| CliError::Write { path: "stdout".into(), source };
    match command {
        Command::Run { config, jobs } => {
            let cfg = RunConfig::load(&config)?;
            let opts = RunOptions { jobs: jobs.map(|j| j as usize), max_dim: max_dim_from_env()? };
            let meta = run(&cfg, &opts)?;
            for p in &meta.points {
                writeln!(stdout, "wrote {}", p.csv).map_err(out_err)?;
            }
            for w in &meta.warnings {
                eprintln!("warning: {w}");
            }
            writeln!(stdout, "metadata: {}.json ({:.2} s)", cfg.output, meta.wall_time_seconds).map_err(out_err)?;
        }
        Command::Verify { level, json } => {
            let level = match level {
                LevelArg::Fast => Level::Fast,
                LevelArg::Full => Level::Full,
            };
            let report = verify::run(level)?;
            if json {
                let text = serde_json::to_string_pretty(&report).expect("report serializes");
                writeln!(stdout, "{text}").map_err(out_err)?;
            } else {
                write!(stdout, "{}", report.to_text()).map_err(out_err)?;
            }
            let failed = report.failures().len();
            if failed > 0 {
                return Err(CliError::Verification(failed));
            }
        }
        Command::Analytic { n, gamma, nbar, tmax, samples, grid, jz0 } => {
            if !(tmax.is_finite() && tmax > 0.0) || samples < 2 {
                return Err(CliError::Usage("--tmax must be positive and --samples at least 2".into()));
            }
            let mut p = AnalyticParams::new(n, gamma, nbar);
            p.jz0 = jz0;
            let times = match grid {
                GridArg::Log => log_grid(tmax, samples),
                GridArg::Linear => linear_grid(tmax, samples),
            };
            let jz = jz_curve(&p, &times)?;
            write!(stdout, "{}", curve_csv(&times, &jz)).map_err(out_err)?;
        }
        Command::Basis { n } => {
            if n == 0 {
                return Err(CliError::Usage("--n must be positive".into()));
            }
            writeln!(stdout, "{}", OccupationBasis::count(n)).map_err(out_err)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
