use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nslimit::{cmd_lemmas, cmd_norms, cmd_simulate, cmd_sweep, CliError, RunConfig};

#[derive(Parser)]
#[command(name = "nslimit", version, about = "Incompressible-limit experiments for compressible Navier-Stokes on the torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` config file; defaults are used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the compressible and/or incompressible solver.
    Simulate(Common),
    /// Compare compressible runs over `nu_list` with the incompressible run.
    Sweep(Common),
    /// Run the lemma property suite.
    Lemmas(Common),
    /// Print the band table of a snapshot file.
    Norms {
        snapshot: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        s: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
    },
}

fn load(c: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &c.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &c.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn fmt_sci(v: f64) -> String {
    format!("{v:.6e}")
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(c) => {
            let cfg = load(&c)?;
            let s = cmd_simulate(&cfg)?;
            if let Some(t) = &s.cns {
                println!("compressible: {} steps, {} snapshots", t.steps, t.times.len());
            }
            if let Some(t) = &s.ins {
                println!("incompressible: {} steps, {} snapshots", t.steps, t.times.len());
            }
            if let Some(l) = &s.ledger {
                println!("M = {}, smallness ratio = {}", fmt_sci(l.m), fmt_sci(l.smallness_ratio()));
            }
        }
        Command::Sweep(c) => {
            let cfg = load(&c)?;
            let r = cmd_sweep(&cfg)?;
            for (nu, e) in r.nu_values.iter().zip(&r.errors) {
                let [d, s, g, t] = e.blocks().map(fmt_sci);
                println!("nu={nu} density={d} sup={s} grad_l1={g} dt_l1={t}");
            }
            println!("slope = {:.4}, residual = {:.4}", r.slope, r.fit_residual);
        }
        Command::Lemmas(c) => {
            let cfg = load(&c)?;
            for r in cmd_lemmas(&cfg)? {
                let verdict = if r.passed() { "ok" } else { "FAIL" };
                println!("{verdict:4} {} {} max={}", r.lemma, r.params, fmt_sci(r.max_ratio));
            }
        }
        Command::Norms { snapshot, s, p, r } => print!("{}", cmd_norms(&snapshot, s, p, r)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
