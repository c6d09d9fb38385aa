use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dualrisk_core::cli::{
    cmd_asymptotics, cmd_curve, cmd_heatmap, cmd_simulate, cmd_solve, cmd_verify, resolve, CommandOutput,
    RunConfig, EXIT_ERROR,
};
use dualrisk_core::Error;

/// Ruin probabilities and optimal R&D / index strategies for the dual risk model.
#[derive(Parser, Debug)]
#[command(name = "dualrisk", version)]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_parser = ["csv", "json"])]
    format: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    paths: Option<usize>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Start from a built-in scenario.
    #[arg(long, global = true)]
    scenario: Option<String>,
    /// Any configuration key, as `key=value`; repeatable.
    #[arg(long = "set", short = 's', global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exponent, optimal spending and index exposure.
    Solve,
    /// Ruin probability against initial wealth.
    Curve {
        #[arg(long)]
        x_min: Option<f64>,
        #[arg(long)]
        x_max: Option<f64>,
        #[arg(long)]
        x_n: Option<usize>,
    },
    /// Optimal spending over a two-parameter grid.
    Heatmap,
    /// Compare solver values with simulation for a built-in scenario.
    Verify {
        /// Scenario name; may also come from --scenario or the config.
        name: Option<String>,
    },
    /// Computed against limiting values along a parameter sweep.
    Asymptotics {
        #[arg(long)]
        knob: Option<String>,
    },
    /// Monte Carlo ruin probability.
    Simulate {
        #[arg(long)]
        x0: Option<f64>,
    },
}

fn flag_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut c = RunConfig::default();
    for item in &cli.set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects key=value, got {item:?}")))?;
        c.set(k.trim(), v.trim())?;
    }
    let mut put = |k: &str, v: Option<String>| -> Result<(), Error> {
        match v {
            Some(v) => c.set(k, &v),
            None => Ok(()),
        }
    };
    put("scenario", cli.scenario.clone())?;
    put("out", cli.out.clone())?;
    put("format", cli.format.clone())?;
    put("seed", cli.seed.map(|v| v.to_string()))?;
    put("paths", cli.paths.map(|v| v.to_string()))?;
    put("threads", cli.threads.map(|v| v.to_string()))?;
    match &cli.command {
        Command::Curve { x_min, x_max, x_n } => {
            put("x_min", x_min.map(|v| v.to_string()))?;
            put("x_max", x_max.map(|v| v.to_string()))?;
            put("x_n", x_n.map(|v| v.to_string()))?;
        }
        Command::Verify { name } => put("scenario", name.clone())?,
        Command::Asymptotics { knob } => put("knob", knob.clone())?,
        Command::Simulate { x0 } => put("x0", x0.map(|v| v.to_string()))?,
        Command::Solve | Command::Heatmap => {}
    }
    Ok(c)
}

fn run(cli: &Cli) -> Result<CommandOutput, Error> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    cfg.overlay(&flag_config(cli)?)?;
    let cfg = resolve(&cfg)?;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot start {n} threads: {e}")))?;
    }
    let out = match cli.command {
        Command::Solve => cmd_solve(&cfg)?,
        Command::Curve { .. } => cmd_curve(&cfg)?,
        Command::Heatmap => cmd_heatmap(&cfg)?,
        Command::Verify { .. } => cmd_verify(&cfg)?,
        Command::Asymptotics { .. } => cmd_asymptotics(&cfg)?,
        Command::Simulate { .. } => cmd_simulate(&cfg)?,
    };
    match &cfg.out {
        Some(path) => {
            std::fs::write(path, &out.text).map_err(|e| Error::Config(format!("cannot write {path}: {e}")))?;
        }
        None => print!("{}", out.text),
    }
    Ok(out)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => ExitCode::from(out.code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
