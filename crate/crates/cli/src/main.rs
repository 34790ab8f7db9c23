use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use weakadapt_core::acceptance::run_all;
use weakadapt_core::env::{baselines, InstanceSpec};
use weakadapt_core::harness::sweep::git_describe;
use weakadapt_core::harness::{
    builtin_instance, execute, json_line, run_sweep, summarize, with_horizon, Algo, BuiltinParams,
    RhoChoice, RunOptions, SweepRecord, SweepSpec, BUILTIN_NAMES,
};

#[derive(Parser)]
#[command(
    name = "weakadapt",
    version,
    about = "Primal-dual bandits with long-term constraints"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Exp3six,
    Contextual,
    Lazy,
}

impl From<AlgoArg> for Algo {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Exp3six => Algo::Exp3six,
            AlgoArg::Contextual => Algo::Contextual,
            AlgoArg::Lazy => Algo::Lazy,
        }
    }
}

#[derive(clap::Args)]
struct InstanceArgs {
    /// JSON instance file or builtin name
    #[arg(long)]
    instance: String,
    /// Horizon; required for builtins, overrides the file's horizon when stretchable
    #[arg(long = "T")]
    horizon: Option<usize>,
    /// Slack parameter of the scripted builtins
    #[arg(long, default_value_t = 0.5)]
    rho: f64,
    /// Second-phase slack factor of lowerbound-b
    #[arg(long, default_value_t = 0.2)]
    delta_param: f64,
    /// Seed for generated contextual features
    #[arg(long, default_value_t = 7)]
    instance_seed: u64,
}

impl InstanceArgs {
    fn resolve(&self) -> Result<InstanceSpec> {
        let path = Path::new(&self.instance);
        if path.is_file() {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let spec = InstanceSpec::from_json(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            return Ok(match self.horizon {
                Some(t) => with_horizon(&spec, t)?,
                None => spec,
            });
        }
        if !BUILTIN_NAMES.contains(&self.instance.as_str()) {
            bail!(
                "{:?} is neither a file nor a builtin ({})",
                self.instance,
                BUILTIN_NAMES.join(", ")
            );
        }
        let Some(t) = self.horizon else {
            bail!("builtin instances need --T");
        };
        let params = BuiltinParams {
            rho: self.rho,
            delta_param: self.delta_param,
            instance_seed: self.instance_seed,
        };
        Ok(builtin_instance(&self.instance, t, &params)?)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one experiment
    Run {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, value_enum, default_value = "exp3six")]
        algo: AlgoArg,
        /// Failure probability in the dual learning rate
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Replace the dual learning rate
        #[arg(long)]
        eta_ogd: Option<f64>,
        /// Final-phase multiplier of the lazy dual (default 1/rho)
        #[arg(long)]
        lazy_m: Option<f64>,
        /// Feasibility parameter used for the multiplier bound
        #[arg(long, value_enum, default_value = "stoc")]
        rho_choice: RhoArg,
        /// JSON-lines output file
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write one record per round before the summary
        #[arg(long)]
        full_trace: bool,
    },
    /// Run a grid of experiments described by a JSON file
    Sweep {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Print the baselines of an instance as JSON
    Baselines {
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// Run the acceptance suite and print a pass/fail table
    Verify,
}

#[derive(Clone, Copy, ValueEnum)]
enum RhoArg {
    Adv,
    Stoc,
}

fn round_line(r: &weakadapt_core::RoundRecord) -> Value {
    json!({
        "type": "round",
        "t": r.t,
        "context": r.context,
        "action": r.action,
        "prob": r.prob,
        "lambda": r.lambda.as_slice(),
        "reward": r.outcome.reward,
        "costs": r.outcome.costs,
        "primal_utility": r.primal_utility,
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    instance: &InstanceArgs,
    algo: Algo,
    delta: f64,
    seed: u64,
    eta_ogd: Option<f64>,
    lazy_m: Option<f64>,
    rho_choice: RhoChoice,
    out: Option<&Path>,
    full_trace: bool,
) -> Result<()> {
    let spec = instance.resolve()?;
    let opts = RunOptions {
        delta,
        seed,
        eta_ogd_override: eta_ogd,
        rho: instance.rho,
        lazy_m,
    };
    let output = execute(&spec, algo, &opts)?;
    let record = SweepRecord {
        instance: instance.instance.clone(),
        algo,
        horizon: spec.horizon,
        seed,
        delta,
        git: git_describe(),
        error: None,
        result: Some(summarize(&spec, &output, rho_choice)),
    };
    let mut summary = serde_json::to_value(&record)?;
    summary["type"] = json!("summary");
    let line = json_line(&summary);
    if let Some(path) = out {
        let mut f = std::io::BufWriter::new(
            fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        );
        if full_trace {
            for r in output.trace.records() {
                writeln!(f, "{}", json_line(&round_line(r)))?;
            }
        }
        writeln!(f, "{line}")?;
        f.flush()?;
    }
    println!("{line}");
    Ok(())
}

fn cmd_sweep(path: &Path) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec: SweepSpec =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let out = run_sweep(&spec)?;
    let failed = out.records.iter().filter(|r| r.error.is_some()).count();
    for r in out.records.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "cell T={} seed={} failed: {}",
            r.horizon,
            r.seed,
            r.error.as_deref().unwrap_or_default()
        );
    }
    println!(
        "{} runs ({} failed) -> {}, {}",
        out.records.len(),
        failed,
        out.runs_path.display(),
        out.summary_path.display()
    );
    Ok(())
}

fn cmd_verify() -> Result<bool> {
    let results = run_all();
    for r in &results {
        println!("{}", r.line());
    }
    let failed = results.iter().filter(|r| !r.ok()).count();
    println!("{} passed, {} failed", results.len() - failed, failed);
    Ok(failed == 0)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Cmd::Run {
            instance,
            algo,
            delta,
            seed,
            eta_ogd,
            lazy_m,
            rho_choice,
            out,
            full_trace,
        } => {
            let rho_choice = match rho_choice {
                RhoArg::Adv => RhoChoice::Adv,
                RhoArg::Stoc => RhoChoice::Stoc,
            };
            cmd_run(
                &instance,
                algo.into(),
                delta,
                seed,
                eta_ogd,
                lazy_m,
                rho_choice,
                out.as_deref(),
                full_trace,
            )
        }
        Cmd::Sweep { spec } => cmd_sweep(&spec),
        Cmd::Baselines { instance } => {
            let report = baselines(&instance.resolve()?)?;
            println!("{}", json_line(&serde_json::to_value(report)?));
            Ok(())
        }
        Cmd::Verify => {
            if !cmd_verify()? {
                std::process::exit(1);
            }
            Ok(())
        }
    }
}
