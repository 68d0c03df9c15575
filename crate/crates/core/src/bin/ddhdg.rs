use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ddhdg::harness::{self, Command, RunConfig};
use ddhdg::Error;

#[derive(Parser)]
#[command(name = "ddhdg", about = "HDG drift-diffusion solver")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args, Clone)]
struct Common {
    /// `key = value` configuration file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Comma-separated refinement levels, or the mesh size `n` for `simulate`
    #[arg(long)]
    level_override: Option<String>,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Example 1 convergence study
    Convergence(Common),
    /// Time-dependent simulation with VTK snapshots
    Simulate(Common),
    /// Observed orders of the L² and HDG projections
    ProjectCheck(Common),
}

fn load(command: Command, c: &Common) -> ddhdg::Result<RunConfig> {
    let mut cfg = RunConfig::defaults(command);
    if let Some(path) = &c.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        cfg.apply(&text)?;
    }
    if let Some(out) = &c.out {
        cfg.out = out.clone();
    }
    if let Some(t) = c.threads {
        cfg.threads = t;
    }
    if let Some(k) = c.k {
        cfg.k = k;
    }
    if let Some(l) = &c.level_override {
        let key = if command == Command::Simulate {
            "n"
        } else {
            "levels"
        };
        cfg.set(key, l)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> ddhdg::Result<()> {
    match &cli.command {
        Cmd::Convergence(c) => {
            let cfg = load(Command::Convergence, c)?;
            let (table, path) = harness::run_convergence(&cfg)?;
            println!(
                "{:>5} {:>12} {:>12} {:>6} {:>12} {:>6} {:>12} {:>6} {:>12} {:>6}",
                "level", "h", "err_u", "rate", "err_phi", "rate", "err_q", "rate", "err_p", "rate"
            );
            for (r, rate) in table.rows.iter().zip(&table.rates) {
                let f = |x: Option<f64>| x.map(|v| format!("{v:.2}")).unwrap_or_default();
                println!(
                    "{:>5} {:>12.4e} {:>12.4e} {:>6} {:>12.4e} {:>6} {:>12.4e} {:>6} {:>12.4e} {:>6}",
                    r.level, r.h, r.err_u, f(rate[0]), r.err_phi, f(rate[1]), r.err_q, f(rate[2]), r.err_p, f(rate[3])
                );
            }
            println!("wrote {}", path.display());
        }
        Cmd::Simulate(c) => {
            let cfg = load(Command::Simulate, c)?;
            let out = harness::simulate(&cfg)?;
            let last = out.series.last().expect("initial row");
            println!(
                "t = {}: u in [{:.4}, {:.4}]",
                last.t, last.min_u, last.max_u
            );
            for p in &out.snapshots {
                println!("wrote {}", p.display());
            }
            println!("wrote {}", out.series_path.display());
        }
        Cmd::ProjectCheck(c) => {
            let cfg = load(Command::ProjectCheck, c)?;
            let (table, path) = harness::run_project_check(&cfg)?;
            if let Some(rates) = table.final_rates() {
                for ((name, r), want) in table.names.iter().zip(rates).zip(&table.expected) {
                    println!("{name:>10}: observed {r:.3}, expected {want}");
                }
            }
            println!("max projection residual {:.3e}", table.max_residual);
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
