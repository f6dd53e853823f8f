use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use patrolsim::engine::{run_trial, EventLog};
use patrolsim::experiment::{
    read_trials_file, render_snapshot, run_batch, summarize, threads_from_env, write_pgm,
    write_summary, write_trials_file, BatchSpec, Snapshot, TrialRow,
};
use patrolsim::{Algorithm, Error, Result, TrialConfig};

#[derive(Parser)]
#[command(
    name = "patrolsim",
    version,
    about = "Distributed multi-robot patrolling simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trial and write its result row and event log.
    Run {
        /// JSON config file, or `default` for the reference setup.
        #[arg(long, default_value = "default")]
        config: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        algorithm: Option<Algorithm>,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run a sweep of trials and write per-trial and summary CSVs.
    Batch {
        /// JSON batch file; omit for the default sweep.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory, overriding `output_dir` in the batch file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Box-plot statistics of a per-trial CSV.
    Summarize {
        input: PathBuf,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw the grid's idleness at time `t` from an event log as a PGM.
    Snapshot {
        log: PathBuf,
        #[arg(long, short)]
        t: i64,
        #[arg(long)]
        out: PathBuf,
        /// Config the log was produced with, for the grid shape.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Pixels per grid cell.
        #[arg(long, default_value_t = 16)]
        scale: usize,
    },
}

fn load_config(arg: &str) -> Result<TrialConfig> {
    if arg == "default" {
        Ok(TrialConfig::default())
    } else {
        Ok(TrialConfig::load(Path::new(arg))?)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

fn cmd_run(
    config: &str,
    seed: Option<u64>,
    algorithm: Option<Algorithm>,
    out: &Path,
) -> Result<()> {
    let mut config = load_config(config)?;
    config.seed = seed.unwrap_or(config.seed);
    config.algorithm = algorithm.unwrap_or(config.algorithm);
    config.validate()?;
    let (result, log) = run_trial(config)?;

    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let csv_path = out.join(format!("{}.csv", result.trial_id));
    write_trials_file(&csv_path, &[TrialRow::from(&result)])?;
    let log_path = out.join(format!("{}.events.jsonl", result.trial_id));
    log.write_jsonl(create(&log_path)?)
        .map_err(|e| Error::io(&log_path, e))?;

    let m = &result.metrics;
    println!("trial  {}", result.trial_id);
    println!("I_G    {:.3}", m.graph_idleness);
    println!("I_W    {}", m.worst_idleness);
    println!("D_MSA  {:.3}", m.mean_sa_delay);
    println!("D_WSA  {}", m.worst_sa_delay);
    println!("wrote  {} and {}", csv_path.display(), log_path.display());
    Ok(())
}

fn cmd_batch(spec: Option<&Path>, out: Option<PathBuf>) -> Result<bool> {
    let mut spec = match spec {
        Some(p) => BatchSpec::load(p)?,
        None => BatchSpec::default(),
    };
    if let Some(out) = out {
        spec.output_dir = out;
    }
    let outcome = run_batch(&spec, threads_from_env()?)?;
    outcome.write(&spec.output_dir)?;
    println!(
        "{} trials written to {}",
        outcome.results.len(),
        spec.output_dir.display()
    );
    for f in &outcome.failures {
        eprintln!(
            "failed: algorithm={} N={} seed={}: {}",
            f.algorithm, f.robots, f.seed, f.message
        );
    }
    Ok(outcome.failures.is_empty())
}

fn cmd_summarize(input: &Path, out: Option<&Path>) -> Result<()> {
    let summary = summarize(&read_trials_file(input)?)?;
    match out {
        Some(p) => write_summary(create(p)?, &summary),
        None => write_summary(std::io::stdout().lock(), &summary),
    }
}

fn cmd_snapshot(log: &Path, t: i64, out: &Path, config: Option<&Path>, scale: usize) -> Result<()> {
    let config = match config {
        Some(p) => TrialConfig::load(p)?,
        None => TrialConfig::default(),
    };
    let file = File::open(log).map_err(|e| Error::io(log, e))?;
    let events = EventLog::read_jsonl(BufReader::new(file))?;
    let snapshot = Snapshot::from_log(&events, config.grid_cols, config.grid_rows, t)?;
    let image = render_snapshot(&snapshot, scale)?;
    write_pgm(create(out)?, &image).map_err(|e| Error::io(out, e))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run {
            config,
            seed,
            algorithm,
            out,
        } => cmd_run(&config, seed, algorithm, &out).map(|()| true),
        Command::Batch { config, out } => cmd_batch(config.as_deref(), out),
        Command::Summarize { input, out } => cmd_summarize(&input, out.as_deref()).map(|()| true),
        Command::Snapshot {
            log,
            t,
            out,
            config,
            scale,
        } => cmd_snapshot(&log, t, &out, config.as_deref(), scale).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
