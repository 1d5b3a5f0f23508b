//! Command implementations behind the `sftransfer` binary.
//!
//! Exit codes: 0 on success, 1 for usage or configuration errors, 2 for
//! failures while running (I/O, numerical errors).

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{RunConfig, Settings};

use crate::experiments::{analyze_counterexample, learning_rate_grid, run_repeats, summarize, sweep};
use crate::{Error, Result};

pub const OUT_DIR_ENV: &str = "SFTRANSFER_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "sftransfer", version, about = "Fitted successor features vs fitted Q-iteration on gridworld transfer tasks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a protocol and write curves.csv, losses.csv, summary.csv and manifest.txt.
    Run(RunArgs),
    /// Grid search over learning rates for one agent.
    Sweep(SweepArgs),
    /// Exact check that successor features change with the optimal policy.
    Counterexample(CounterexampleArgs),
    /// Resolve and validate a configuration, then print it as a manifest.
    ValidateConfig(ConfigArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Flat `key = value` file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// single_task, slight_shift, corner_rotation or failure_case.
    #[arg(long)]
    pub protocol: Option<String>,
    /// Comma-separated agent names (sf, fqi, sf-reset-all).
    #[arg(long)]
    pub agents: Option<String>,
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Base seed; repetition r uses seed + r.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Any other config key, e.g. `--set lr_sf=0.01`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = "results")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Agent to tune.
    #[arg(long, default_value = "sf")]
    pub agent: String,
    /// Ψ learning rates for SF agents, θ learning rates for fqi.
    #[arg(long, value_delimiter = ',', required = true)]
    pub lr: Vec<f64>,
    /// Reward-weight learning rates (SF agents only).
    #[arg(long, value_delimiter = ',')]
    pub lr_reward: Vec<f64>,
    #[arg(long, env = OUT_DIR_ENV, default_value = "results")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CounterexampleArgs {
    /// Discount factors to check.
    #[arg(long, value_delimiter = ',', default_value = "0.9")]
    pub gamma: Vec<f64>,
    #[arg(long, env = OUT_DIR_ENV, default_value = "results")]
    pub out: PathBuf,
}

impl ConfigArgs {
    pub fn settings(&self) -> Result<Settings> {
        let mut s = match &self.config {
            Some(path) => Settings::read(path)?,
            None => Settings::new(),
        };
        if let Some(p) = &self.protocol {
            s.push("protocol", p, "--protocol");
        }
        if let Some(a) = &self.agents {
            s.push("agents", a, "--agents");
        }
        if let Some(r) = self.repeats {
            s.push("repeats", &r.to_string(), "--repeats");
        }
        if let Some(seed) = self.seed {
            s.push("seed", &seed.to_string(), "--seed");
        }
        for kv in &self.set {
            s.push_assignment(kv)?;
        }
        Ok(s)
    }

    pub fn resolve(&self) -> Result<RunConfig> {
        self.settings()?.resolve()
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

pub fn cmd_run(args: &RunArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let specs = cfg.agents.iter().map(|n| cfg.protocol.agent(n)).collect::<Result<Vec<_>>>()?;
    let summary = summarize(run_repeats(&cfg.protocol, &specs, cfg.repeats, cfg.seed)?)?;

    create_dir(&args.out)?;
    output::write_curves(&args.out, &summary)?;
    output::write_losses(&args.out, &summary)?;
    output::write_summary(&args.out, &summary)?;
    std::fs::write(args.out.join("manifest.txt"), cfg.to_manifest())?;

    println!("{} x{} (seed {})", cfg.protocol.kind, cfg.repeats, cfg.seed);
    for a in &summary.agents {
        println!("  {:<13} {:>9.2} ± {:.2}", a.agent, a.mean_steps, a.std_steps);
    }
    if let Some(w) = &summary.welch {
        println!("  welch t = {:.4}, dof = {:.2}, p = {:.4e}", w.t, w.dof, w.p);
    }
    println!("wrote {}", args.out.display());
    Ok(())
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let cfg = args.config.resolve()?;
    let base = cfg.protocol.agent(&args.agent)?;
    let candidates = learning_rate_grid(&base, &args.lr, &args.lr_reward)?;
    let result = sweep(&cfg.protocol, &candidates, cfg.repeats, cfg.seed)?;

    create_dir(&args.out)?;
    output::write_sweep(&args.out, &result)?;
    std::fs::write(args.out.join("manifest.txt"), cfg.to_manifest())?;

    println!("{:>10} {:>10} {:>10} {:>10} {:>8}", "lr_sf", "lr_reward", "lr_q", "mean", "std");
    for (i, row) in result.rows.iter().enumerate() {
        let c = &row.spec.config;
        let mark = if i == result.best { "  *" } else { "" };
        println!(
            "{:>10} {:>10} {:>10} {:>10.2} {:>8.2}{mark}",
            c.lr_sf, c.lr_reward, c.lr_q, row.mean_steps, row.std_steps
        );
    }
    Ok(())
}

pub fn cmd_counterexample(args: &CounterexampleArgs) -> Result<()> {
    let reports = args.gamma.iter().map(|&g| analyze_counterexample(g)).collect::<Result<Vec<_>>>()?;
    let name = |a: usize| if a == 0 { 'a' } else { 'b' };
    for r in &reports {
        let pa: String = r.policy_a.iter().map(|&a| name(a)).collect();
        let pb: String = r.policy_b.iter().map(|&a| name(a)).collect();
        println!("gamma = {}", r.gamma);
        println!("  optimal policy, reward on (phi2, a): {pa}");
        println!("  optimal policy, reward on (phi2, b): {pb}");
        println!("  {:<8} {:>12} {:>12}", "feature", "psi_aa", "psi_ab");
        for (i, label) in output::counterexample_labels(r.psi_a.len()).iter().enumerate() {
            println!("  {:<8} {:>12.6} {:>12.6}", label, r.psi_a[i], r.psi_b[i]);
        }
        println!("  inf-norm difference = {}", r.gap);
        if r.gap <= 0.0 {
            return Err(Error::InvalidPolicy(format!("successor features coincide at gamma {}", r.gamma)));
        }
    }
    create_dir(&args.out)?;
    output::write_counterexample(&args.out, &reports)?;
    Ok(())
}

pub fn cmd_validate(args: &ConfigArgs) -> Result<()> {
    print!("{}", args.resolve()?.to_manifest());
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Counterexample(a) => cmd_counterexample(a),
        Command::ValidateConfig(a) => cmd_validate(a),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                1
            } else {
                2
            }
        }
    }
}
