use std::path::PathBuf;
use std::process::ExitCode;

use augustin_lab::{run_experiment, run_oracle_cache, ExperimentConfig, Overrides, RunError, RunOptions, Task};
use clap::{Parser, Subcommand};

/// Runs Petz-Augustin, capacity and Fisher-market experiments and writes tidy CSV.
#[derive(Parser, Debug)]
#[command(name = "augustin-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config file; flags below override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Comma-separated orders, e.g. `--alpha 0.8,1.5,3`.
    #[arg(long, global = true, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,

    #[arg(long, global = true)]
    iters: Option<usize>,

    #[arg(long, global = true)]
    n: Option<usize>,

    #[arg(long, global = true)]
    d: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, env = "AUGUSTIN_LAB_OUT")]
    out: Option<PathBuf>,

    /// Worker threads for the parallel inner loops.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,

    /// Write every wall time as 0 so repeated runs are byte-identical.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Quantum fixed-point iteration on random Ginibre states.
    Augustin,
    /// Commuting (probability-vector) iteration.
    Classical,
    /// Mirror descent for the Petz capacity.
    Capacity,
    /// Tatonnement on a random CES Fisher market.
    Fisher,
    /// The two-by-two instance where the naive map fails to contract.
    Counterexample,
    /// Three-state instance where small orders diverge, compared with mirror descent.
    DivergenceDemo,
    /// Fill the grid-search oracle cache for small classical instances.
    OracleCache,
}

impl Command {
    fn task(self) -> Task {
        match self {
            Command::Augustin | Command::OracleCache => Task::Augustin,
            Command::Classical => Task::Classical,
            Command::Capacity => Task::Capacity,
            Command::Fisher => Task::Fisher,
            Command::Counterexample => Task::Counterexample,
            Command::DivergenceDemo => Task::DivergenceDemo,
        }
    }
}

fn run(cli: &Cli) -> Result<Vec<String>, RunError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path).map_err(|e| RunError::Config(vec![e]))?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(&Overrides {
        task: Some(cli.command.task()),
        seed: cli.seed,
        alphas: cli.alpha.clone(),
        iters: cli.iters,
        out: cli.out.clone(),
        n: cli.n,
        d: cli.d,
    });
    if cli.threads == 0 {
        return Err(RunError::Config(vec!["--threads must be at least 1".into()]));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| RunError::Io(e.to_string()))?;
    let opts = RunOptions {
        with_timing: !cli.no_timing,
    };
    let outcome = match cli.command {
        Command::OracleCache => run_oracle_cache(&cfg, opts)?,
        _ => run_experiment(&cfg, opts)?,
    };
    let mut lines = outcome.report;
    lines.push(format!(
        "wrote {} files and manifest.json to {}",
        outcome.manifest.files.len(),
        outcome.out_dir.display()
    ));
    Ok(lines)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
