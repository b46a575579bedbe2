//! `mb`: evolve, analyze and replay Markov Brains.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use markov_brain::analysis::{
    brain_stats, clamp_node, density, export_dot, knockout_gate, robustness_csv, robustness_curve,
    transition_matrix, DotMode,
};
use markov_brain::brain::{Brain, ClampMode};
use markov_brain::decoder::decode_brain;
use markov_brain::evolution::evolve;
use markov_brain::rng::mix;
use markov_brain::tasks::record_behavior;
use markov_brain::{Genome, Scalar};

use config::{Precision, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, config or input files: exit 2.
    #[error("error: {0}")]
    Usage(String),
    /// Could not write results: exit 3.
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<markov_brain::Error> for CliError {
    fn from(e: markov_brain::Error) -> Self {
        match e {
            markov_brain::Error::Io(e) => CliError::Io(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "mb", version, about = "Evolve and analyze Markov Brains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Config override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Seed; falls back to the config, then to MB_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for population evaluation.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run evolution; writes stats.csv, snapshots and the final population.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure a saved genome.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        genome: PathBuf,
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long, value_enum, default_value = "condensed")]
        mode: Mode,
        #[arg(long, default_value_t = 10)]
        max_m: usize,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Log one lifetime of a saved genome.
    Replay {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        genome: PathBuf,
        /// Behavior log file; stdout when absent. Frequency and bigram
        /// tables go next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Which {
    Stats,
    Density,
    Transitions,
    Dot,
    Knockout,
    Robustness,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Layered,
    Condensed,
}

fn load_config(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        cfg.apply_text(&text)?;
    }
    for kv in &common.overrides {
        cfg.apply_override(kv)?;
    }
    if let Some(seed) = common.seed {
        cfg.set("seed", &seed.to_string())?;
    } else if !cfg.seed_is_set() {
        if let Ok(env) = std::env::var("MB_SEED") {
            cfg.set("seed", &env)
                .map_err(|_| CliError::Usage(format!("MB_SEED `{env}` is not a seed")))?;
        }
    }
    cfg.finish()?;
    Ok(cfg)
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    if jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn load_genome(path: &Path) -> Result<Genome, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read genome {}: {e}", path.display())))?;
    Genome::from_text(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn cmd_evolve(common: &Common, out: Option<PathBuf>) -> Result<(), CliError> {
    let mut cfg = load_config(common)?;
    if out.is_some() {
        cfg.out = out;
    }
    let dir = cfg
        .out
        .clone()
        .ok_or_else(|| CliError::Usage("evolve needs --out or an `out` key".into()))?;
    fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    fs::write(dir.join("run.cfg"), cfg.to_text())
        .map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let run = |cfg: &RunConfig| match cfg.precision {
        Precision::F64 => evolve::<f64>(&cfg.evolution, Some(&dir)).map(|_| ()),
        Precision::F32 => evolve::<f32>(&cfg.evolution, Some(&dir)).map(|_| ()),
    };
    pool(common.jobs)?.install(|| run(&cfg))?;
    Ok(())
}

fn analyze<S: Scalar>(
    cfg: &RunConfig,
    genome: &Genome,
    which: Which,
    mode: Mode,
    max_m: usize,
    samples: usize,
) -> Result<String, CliError> {
    let brain: Brain<S> = decode_brain(genome, cfg.decode())?;
    let task = cfg.task()?;
    let seed = cfg.seed();
    let repeats = cfg.evolution.repeats;
    Ok(match which {
        Which::Stats => brain_stats(&brain, genome).to_csv(),
        Which::Density => format!("density\n{}\n", density(&brain)),
        Which::Dot => export_dot(
            &brain,
            match mode {
                Mode::Layered => DotMode::Layered,
                Mode::Condensed => DotMode::Condensed,
            },
        ),
        Which::Transitions => {
            let traces = (0..repeats as u64)
                .map(|r| {
                    let mut b = brain.clone();
                    let log = record_behavior(&mut b, task.as_ref(), mix(&[seed, r]))?;
                    Ok(log.recording.trace.expect("brains record traces"))
                })
                .collect::<Result<Vec<_>, markov_brain::Error>>()?;
            transition_matrix(&traces)?.to_csv()
        }
        Which::Knockout => {
            let mut s = String::from("target,index,mode,wild_type,fitness,warning\n");
            for i in 0..brain.gates().len() {
                let r = knockout_gate(&brain, i, task.as_ref(), seed, repeats)?;
                writeln!(s, "gate,{i},remove,{},{},", r.wild_type, r.knockout).unwrap();
            }
            for node in 0..brain.n_nodes() {
                for (name, mode) in [
                    ("zero", ClampMode::Zero),
                    ("one", ClampMode::One),
                    ("random", ClampMode::Random),
                ] {
                    let r = clamp_node(&brain, node, mode, task.as_ref(), seed, repeats)?;
                    if let Some(w) = &r.warning {
                        eprintln!("warning: {w}");
                    }
                    let w = if r.warning.is_some() {
                        "input_node"
                    } else {
                        ""
                    };
                    writeln!(s, "node,{node},{name},{},{},{w}", r.wild_type, r.clamped).unwrap();
                }
            }
            s
        }
        Which::Robustness => {
            if samples == 0 {
                return Err(CliError::Usage("--samples must be at least 1".into()));
            }
            if max_m > genome.len() {
                return Err(CliError::Usage(format!(
                    "--max-m exceeds genome length {}",
                    genome.len()
                )));
            }
            robustness_csv(&robustness_curve::<S>(
                genome,
                cfg.decode(),
                task.as_ref(),
                max_m,
                samples,
                seed,
                repeats,
            )?)
        }
    })
}

fn cmd_analyze(
    common: &Common,
    genome: &Path,
    which: Which,
    mode: Mode,
    max_m: usize,
    samples: usize,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let genome = load_genome(genome)?;
    let text = pool(common.jobs)?.install(|| match cfg.precision {
        Precision::F64 => analyze::<f64>(&cfg, &genome, which, mode, max_m, samples),
        Precision::F32 => analyze::<f32>(&cfg, &genome, which, mode, max_m, samples),
    })?;
    write_out(out, &text)
}

fn replay<S: Scalar>(cfg: &RunConfig, genome: &Genome) -> Result<[String; 3], CliError> {
    let mut brain: Brain<S> = decode_brain(genome, cfg.decode())?;
    let log = record_behavior(&mut brain, cfg.task()?.as_ref(), cfg.seed())?;
    Ok([log.to_csv()?, log.frequencies_csv(), log.bigrams_csv()])
}

fn cmd_replay(common: &Common, genome: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let genome = load_genome(genome)?;
    let [log, freq, bigrams] = match cfg.precision {
        Precision::F64 => replay::<f64>(&cfg, &genome)?,
        Precision::F32 => replay::<f32>(&cfg, &genome)?,
    };
    write_out(out, &log)?;
    if let Some(p) = out {
        write_out(Some(&p.with_extension("freq.csv")), &freq)?;
        write_out(Some(&p.with_extension("bigrams.csv")), &bigrams)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Evolve { common, out } => cmd_evolve(common, out.clone()),
        Command::Analyze {
            common,
            genome,
            which,
            mode,
            max_m,
            samples,
            out,
        } => cmd_analyze(
            common,
            genome,
            *which,
            *mode,
            *max_m,
            *samples,
            out.as_deref(),
        ),
        Command::Replay {
            common,
            genome,
            out,
        } => cmd_replay(common, genome, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
