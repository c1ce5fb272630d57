use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ddopt_cli::config::{ExperimentConfig, KvConfig};
use ddopt_cli::recipes::{
    cmd_badd, cmd_evaluate, cmd_fig1, cmd_fig2, cmd_fig3, cmd_filter, cmd_lodd, cmd_ofdd, cmd_udd,
    CommandOutput,
};
use ddopt_cli::CliError;

/// Design and analysis of dynamical-decoupling pulse sequences for a
/// dephasing qubit under hard timing constraints.
#[derive(Parser)]
#[command(name = "ddopt", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Key-value config file (see README for the key reference).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path for the CSV (or sequence) document; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rayon thread count; 0 or omitted picks the number of cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Override the config's rng_seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SequenceArgs {
    /// Pulse count for generated sequences (overrides sequence.n).
    #[arg(long)]
    n: Option<usize>,
    /// Total duration in ps (overrides timing.T_ps).
    #[arg(long)]
    duration: Option<f64>,
    /// Read the pulse sequence from a file (overrides the generator).
    #[arg(long)]
    sequence: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Decoupling error, purity loss, filter L1 norm, and the lower bound
    /// for one sequence under the configured measure.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        seq: SequenceArgs,
    },
    /// Dense |f(omega)|^2 samples for one sequence.
    Filter {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        seq: SequenceArgs,
    },
    /// Generate a UDD sequence and check it against the timing constraint.
    Udd {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        seq: SequenceArgs,
    },
    /// Bandwidth-adapted optimization over every feasible pulse count.
    Badd {
        #[command(flatten)]
        common: Common,
        /// Cap on the scanned pulse count (overrides n_limit).
        #[arg(long)]
        n_limit: Option<usize>,
    },
    /// Duration-constrained local optimization at a fixed pulse count.
    Lodd {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        seq: SequenceArgs,
    },
    /// Flat-measure (filter-only) optimization at a fixed pulse count.
    Ofdd {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        seq: SequenceArgs,
    },
    /// Tailored-UDD error and the fast-control bound vs omega_c tau.
    Fig1 {
        #[command(flatten)]
        common: Common,
    },
    /// Method comparison (UDD/BADD/LODD) vs total duration.
    Fig2 {
        #[command(flatten)]
        common: Common,
    },
    /// Purity loss vs actual-over-presumed cutoff for adapted sequences.
    Fig3 {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Evaluate { common, .. }
            | Command::Filter { common, .. }
            | Command::Udd { common, .. }
            | Command::Badd { common, .. }
            | Command::Lodd { common, .. }
            | Command::Ofdd { common, .. }
            | Command::Fig1 { common }
            | Command::Fig2 { common }
            | Command::Fig3 { common } => common,
        }
    }

    fn apply_overrides(&self, kv: &mut KvConfig) {
        let seq = match self {
            Command::Evaluate { seq, .. }
            | Command::Filter { seq, .. }
            | Command::Udd { seq, .. }
            | Command::Lodd { seq, .. }
            | Command::Ofdd { seq, .. } => Some(seq),
            Command::Badd { n_limit, .. } => {
                if let Some(limit) = n_limit {
                    kv.set("n_limit", limit);
                }
                None
            }
            _ => None,
        };
        if let Some(seq) = seq {
            if let Some(n) = seq.n {
                kv.set("sequence.n", n);
            }
            if let Some(d) = seq.duration {
                kv.set("timing.T_ps", d);
            }
            if let Some(path) = &seq.sequence {
                kv.set("sequence.file", path.display());
            }
        }
        if let Some(seed) = self.common().seed {
            kv.set("rng_seed", seed);
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let common = cli.command.common();
    let mut kv = match &common.config {
        Some(path) => KvConfig::load(path)?,
        None => KvConfig::default(),
    };
    cli.command.apply_overrides(&mut kv);
    let cfg = ExperimentConfig::from_kv(&kv)?;

    let threads = common.threads.unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;

    let output: CommandOutput = pool.install(|| match &cli.command {
        Command::Evaluate { .. } => cmd_evaluate(&cfg),
        Command::Filter { .. } => cmd_filter(&cfg),
        Command::Udd { .. } => cmd_udd(&cfg),
        Command::Badd { .. } => cmd_badd(&cfg),
        Command::Lodd { .. } => cmd_lodd(&cfg),
        Command::Ofdd { .. } => cmd_ofdd(&cfg),
        Command::Fig1 { .. } => cmd_fig1(&cfg),
        Command::Fig2 { .. } => cmd_fig2(&cfg),
        Command::Fig3 { .. } => cmd_fig3(&cfg),
    })?;

    let out_path = common
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from));
    match out_path {
        Some(path) => {
            std::fs::write(&path, &output.body)
                .map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))?;
            println!("{}", output.summary);
            println!("wrote {}", path.display());
        }
        None => {
            print!("{}", output.body);
            eprintln!("{}", output.summary);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
