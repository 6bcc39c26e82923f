use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tempolink::pipeline::{cmd_evaluate, cmd_predict, cmd_prepare, RunConfig};
use tempolink::Result;

#[derive(Parser)]
#[command(name = "tempolink", version, about = "Temporal link and unlink prediction for dynamic networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest a timestamped edge file and write the snapshot directory.
    Prepare(Common),
    /// Train on all snapshots and rank link / unlink candidates.
    Predict(Common),
    /// Hold out the last snapshot and score every configured method.
    Evaluate(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// link, unlink or both.
    #[arg(long)]
    task: Option<String>,
    /// luls1, luls2 or luls3.
    #[arg(long)]
    variant: Option<String>,
    /// Comma-separated methods to evaluate.
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Write H_t and W_t as coordinate triples next to the outputs.
    #[arg(long)]
    dump_similarities: bool,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let overrides = [
            ("task", self.task.clone()),
            ("variant", self.variant.clone()),
            ("methods", self.method.clone()),
            ("seed", self.seed.map(|s| s.to_string())),
            ("threads", self.threads.map(|t| t.to_string())),
        ];
        for (key, value) in overrides {
            if let Some(v) = value {
                cfg.set(key, &v, 0)?;
            }
        }
        if self.dump_similarities {
            cfg.dump_similarities = true;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Prepare(c) => {
            let dir = cmd_prepare(&c.config()?)?;
            println!("snapshots written to {}", dir.display());
        }
        Command::Predict(c) => {
            let out = cmd_predict(&c.config()?)?;
            for p in [&out.links, &out.unlinks].into_iter().flatten() {
                println!("wrote {}", p.display());
            }
            println!("factors in {} ({} iterations, converged: {})", out.factors.display(), out.iters_run, out.converged);
        }
        Command::Evaluate(c) => {
            let out = cmd_evaluate(&c.config()?)?;
            print!("{}", std::fs::read_to_string(&out.table).unwrap_or_default());
            if let Some((_, _, e)) = out.failures.into_iter().next() {
                return Err(e);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
