use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use naosa_experiment::output::{fmt_sig, write_all};
use naosa_experiment::{aggregate, run_experiment, ExperimentConfig, Result};

/// Seeded hybrid-precoding sweeps with CSV output.
#[derive(Debug, Parser)]
#[command(name = "naosa-sim", version)]
struct Cli {
    /// Flat `key = value` config file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated algorithms: maxmin, sum, soft.
    #[arg(long)]
    algo: Option<String>,
    /// Seeds, e.g. `7`, `0..20` or `1,2,5`.
    #[arg(long)]
    seed: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `transmit` (equal P) or `total` (equal P_total).
    #[arg(long)]
    power_mode: Option<String>,
    /// Comma-separated phase shifters per RF chain.
    #[arg(long)]
    sweep_lc: Option<String>,
    /// Soft max-min scaling in (0, 1], or `auto`.
    #[arg(long)]
    delta: Option<String>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Print the sweep points and their power budgets, then exit.
    #[arg(long)]
    dry_run: bool,
}

fn build_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let flags = [
        ("algo", &cli.algo),
        ("seeds", &cli.seed),
        ("power_mode", &cli.power_mode),
        ("sweep_lc", &cli.sweep_lc),
        ("delta", &cli.delta),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    for kv in &cli.sets {
        let Some((k, v)) = kv.split_once('=') else {
            return Err(naosa_experiment::ExperimentError::Config(format!("--set expects KEY=VALUE, got '{kv}'")));
        };
        cfg.set(k.trim(), v.trim())?;
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<()> {
    let cfg = build_config(cli)?;
    let points = cfg.validate()?;
    if cli.dry_run {
        println!("point,mapping,rf_chains,phase_shifters,transmit_power_mw,total_power_mw");
        for p in &points {
            println!(
                "{},{},{},{},{},{}",
                p.label,
                p.mapping,
                p.rf_chains,
                p.phase_shifters(),
                fmt_sig(p.transmit_power_mw),
                fmt_sig(p.total_power_mw)
            );
        }
        return Ok(());
    }
    let records = run_experiment(&cfg)?;
    let summary = aggregate(&records);
    write_all(&cfg.out, &records, &summary, cfg.write_traces)?;
    for s in &summary {
        let show = |x: Option<naosa_experiment::Stats>| match x {
            Some(s) => format!("{} +- {}", fmt_sig(s.mean), fmt_sig(s.std)),
            None => "-".into(),
        };
        println!(
            "{:<18} {:<11} min {:<22} sum {:<22} {}",
            s.point.label,
            s.algorithm.name(),
            show(s.min_throughput),
            show(s.sum_throughput),
            s.warning.as_deref().unwrap_or("")
        );
    }
    for r in records.iter().filter(|r| r.outcome.is_err()) {
        eprintln!("run {} failed: {}", r.id(), r.outcome.as_ref().unwrap_err());
    }
    println!("wrote {}", cfg.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
