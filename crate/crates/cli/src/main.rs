use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use shocklens::experiment::{
    profile_rows, rates_summary, resolve_datum, run_sweep, selftest, write_profiles, Gate, SweepConfig, SweepTable,
};
use shocklens::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_GATE: u8 = 4;

#[derive(Parser)]
#[command(name = "shocklens", version, about = "Viscous Burgers near shock formation: sweeps, profiles and checks")]
struct Cli {
    /// Worker threads (default: logical cores). SHOCKLENS_THREADS takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a viscosity sweep and write errors.csv and rates.json.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the matching exponent alpha from the config.
        #[arg(long)]
        alpha: Option<f64>,
        /// Acceptance gate `path in [lo, hi]` on rates.json; repeatable.
        #[arg(long)]
        gate: Vec<String>,
    },
    /// Tabulate the configured fields as `t,x,field,value,tolerance`.
    Profiles {
        #[arg(long)]
        config: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite.
    Selftest,
    /// Refit rates from an existing errors.csv.
    Rates {
        #[arg(long)]
        errors: PathBuf,
        /// Where to write the summary; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        gate: Vec<String>,
    },
}

enum Failure {
    Lib(Error),
    Gate,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn threads_from_env(flag: Option<usize>) -> Result<Option<usize>, Error> {
    match std::env::var("SHOCKLENS_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n > 0)
            .map(Some)
            .ok_or_else(|| Error::Config(format!("SHOCKLENS_THREADS: expected a positive integer, got '{v}'"))),
        Err(_) => Ok(flag),
    }
}

fn io_error(path: &Path, e: io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path).map(BufWriter::new).map_err(|e| io_error(path, e))
}

fn write_json<W: Write>(mut w: W, v: &Value) -> Result<(), Error> {
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn apply_gates(gates: &[Gate], summary: &Value) -> Result<bool, Error> {
    let mut ok = true;
    for g in gates {
        let (value, pass) = g.check(summary)?;
        println!("gate {} = {value} in [{}, {}]: {}", g.path.join("."), g.lo, g.hi, if pass { "pass" } else { "FAIL" });
        ok &= pass;
    }
    Ok(ok)
}

fn parse_gates(gates: &[String]) -> Result<Vec<Gate>, Error> {
    gates.iter().map(|g| Gate::parse(g)).collect()
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = threads_from_env(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Sweep { config, out, alpha, gate } => {
            let gates = parse_gates(&gate)?;
            let mut cfg = SweepConfig::from_path(&config)?;
            if let Some(a) = alpha {
                cfg.alpha = a;
                cfg.validate()?;
            }
            let d = resolve_datum(&cfg.datum)?;
            let table = run_sweep(&cfg, &d)?;
            fs::create_dir_all(&out).map_err(|e| io_error(&out, e))?;
            table.write_csv(create(&out.join("errors.csv"))?)?;
            let summary = rates_summary(&table);
            write_json(create(&out.join("rates.json"))?, &summary)?;
            if !apply_gates(&gates, &summary)? {
                return Err(Failure::Gate);
            }
        }
        Command::Profiles { config, out } => {
            let cfg = SweepConfig::from_path(&config)?;
            let d = resolve_datum(&cfg.datum)?;
            let rows = profile_rows(&cfg, &d)?;
            match out {
                Some(path) => write_profiles(&rows, create(&path)?)?,
                None => write_profiles(&rows, io::stdout().lock())?,
            }
        }
        Command::Selftest => {
            let results = selftest();
            for c in &results {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if results.iter().any(|c| !c.passed) {
                return Err(Error::DegenerateInput("self-test failed".into()).into());
            }
        }
        Command::Rates { errors, out, gate } => {
            let gates = parse_gates(&gate)?;
            let file = File::open(&errors).map_err(|e| Error::Config(format!("{}: {e}", errors.display())))?;
            let table = SweepTable::read_csv(file)?;
            let summary = rates_summary(&table);
            match out {
                Some(path) => write_json(create(&path)?, &summary)?,
                None => write_json(io::stdout().lock(), &summary)?,
            }
            if !apply_gates(&gates, &summary)? {
                return Err(Failure::Gate);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Gate) => ExitCode::from(EXIT_GATE),
        Err(Failure::Lib(e)) => {
            eprintln!("shocklens: {e}");
            ExitCode::from(match e {
                Error::Config(_) => EXIT_CONFIG,
                _ => EXIT_NUMERICAL,
            })
        }
    }
}
