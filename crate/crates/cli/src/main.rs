use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thermoporo_core::config::Model;
use thermoporo_core::driver::{self, format_number};
use thermoporo_core::{Error, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "thermoporo", version, about = "Thermo-poroelastic mixture solvers")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Configuration file; defaults are used for anything it does not set.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides output.dir).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Number of grid nodes (overrides solver.grid).
    #[arg(long, global = true, value_name = "N")]
    grid: Option<usize>,
    /// Temperature coupling of the solid displacement (overrides scenario.xi).
    #[arg(long, global = true, value_parser = ["0", "1"])]
    xi: Option<String>,
    /// Override a configuration key, e.g. --set dimensional.phi_f=0.9.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the nondimensional groups.
    Groups {
        /// Print plain key=value lines.
        #[arg(long)]
        flat: bool,
    },
    /// Run the configured model and write profiles and a summary.
    Solve,
    /// Solve once per value of one configuration key.
    Sweep {
        #[arg(long)]
        key: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
    },
    /// Grid (or time-step) refinement study.
    Converge,
    /// Run the transient radial simulation.
    Transient,
}

enum Failure {
    Usage(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::Argument(_) => Failure::Usage(e.to_string()),
            _ => Failure::Solver(e.to_string()),
        }
    }
}

fn load_config(c: &Common) -> Result<RunConfig, Failure> {
    let mut overrides = Vec::new();
    if let Some(n) = c.grid {
        overrides.push(("solver.grid".to_string(), n.to_string()));
    }
    if let Some(xi) = &c.xi {
        overrides.push(("scenario.xi".to_string(), xi.clone()));
    }
    for item in &c.set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got '{item}'")))?;
        overrides.push((k.trim().to_string(), v.trim().to_string()));
    }
    let (text, origin) = match &c.config {
        Some(path) => (
            std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?,
            path.display().to_string(),
        ),
        None => (String::new(), "<defaults>".to_string()),
    };
    let mut cfg = RunConfig::parse_with_overrides(&text, &origin, &overrides)?;
    if let Some(out) = &c.out {
        cfg.out_dir = out.clone();
    }
    for note in &cfg.notes {
        eprintln!("note: {note}");
    }
    Ok(cfg)
}

/// Writes to stdout, treating a closed pipe (e.g. `| head`) as success.
fn emit(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::Solver(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = load_config(&cli.common)?;
    let dir = cfg.out_dir.clone();
    match cli.command {
        Command::Groups { flat } => {
            let g = driver::groups(&cfg)?;
            let mut text = String::new();
            for (name, value, formula) in g.entries() {
                let v = format_number(value, cfg.precision);
                let _ = if flat {
                    writeln!(text, "{name}={v}")
                } else {
                    writeln!(text, "{name:<14} = {v:<24}  # {formula}")
                };
            }
            emit(&text)?;
        }
        Command::Solve => {
            let out = driver::cmd_solve(&cfg, &dir)?;
            emit(&driver::summary_text(&out.summary, cfg.precision))?;
        }
        Command::Transient => {
            cfg.model = Model::Transient;
            let out = driver::cmd_solve(&cfg, &dir)?;
            emit(&driver::summary_text(&out.summary, cfg.precision))?;
        }
        Command::Sweep { key, values } => {
            let threads = driver::threads_from_env()?;
            let out = driver::cmd_sweep(&cfg, &key, &values, threads, &dir)?;
            emit(&out.table.to_csv(cfg.precision))?;
        }
        Command::Converge => {
            let report = driver::cmd_converge(&cfg, &dir)?;
            emit(&report.to_table()?.to_csv(cfg.precision))?;
            match (report.expected_order, report.passed()) {
                (None, _) => emit("# closed-form model: errors are quadrature-level, no order reported\n")?,
                (Some(p), true) => emit(&format!("# observed order consistent with expected order {p}\n"))?,
                (Some(p), false) => {
                    return Err(Failure::Solver(format!(
                        "observed orders {:?} below the threshold for expected order {p}",
                        report.orders
                    )))
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("solver error: {m}");
            ExitCode::from(2)
        }
    }
}
