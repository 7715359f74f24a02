use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ricci_cli::{parse_config, run, Command, EXIT_USAGE};

/// Normalized Ricci flow simulator and verification experiments.
#[derive(Parser, Debug)]
#[command(name = "ricci2d", version, after_help = keys_help())]
struct Cli {
    /// simulate, uniqueness, convergence, manufactured or inequalities
    /// (default: the config's `command`, else simulate)
    command: Option<Command>,
    /// Config file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key; repeatable, applied after the config file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write SVG plots.
    #[arg(long)]
    plots: bool,
}

fn keys_help() -> String {
    let mut s = String::from("Config keys:\n");
    for (k, doc) in ricci_cli::config::KEYS {
        s.push_str(&format!("  {k:<32} {doc}\n"));
    }
    s.push_str("\nRICCI_THREADS caps the worker threads.");
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("RICCI_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: RICCI_THREADS: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let cfg = match parse_config(
        cli.command,
        cli.config.as_deref(),
        &cli.overrides,
        cli.out.as_deref(),
        cli.plots,
    ) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(&cfg) {
        Ok(report) => {
            for f in &report.files {
                println!("{}", f.display());
            }
            if let Some(note) = &report.blow_up {
                eprintln!("aborted: {note}");
            }
            ExitCode::from(report.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
