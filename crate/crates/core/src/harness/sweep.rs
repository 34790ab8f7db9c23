//! Grids of runs over horizons and seeds, written as JSON lines plus a CSV summary.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dual::{audit_dual_link, drift_violations, DualState};
use crate::env::{
    baselines, make_example1, ContextSchedule, ContextualEnv, InstanceKind, InstanceSpec,
};
use crate::error::{Error, Result};
use crate::igw::IgwConfig;
use crate::regression::OracleErrorLedger;
use crate::types::{FrameworkConfig, Trace};

use super::builtin::{builtin_instance, BuiltinParams};
use super::lazy::lazy_counterexample;
use super::metrics::{compute_metrics, MetricsReport, RhoChoice};
use super::output::{fmt_f64, json_line};
use super::run::{contextual_config, default_oracles, run_contextual, run_exp3six};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    Exp3six,
    Contextual,
    Lazy,
}

impl std::str::FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp3six" => Ok(Algo::Exp3six),
            "contextual" => Ok(Algo::Contextual),
            "lazy" => Ok(Algo::Lazy),
            _ => Err(Error::invalid(format!("unknown algorithm {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSource {
    Builtin {
        builtin: String,
        #[serde(flatten)]
        params: BuiltinParams,
    },
    File {
        file: PathBuf,
    },
    Inline(InstanceSpec),
}

/// Same instance at another horizon. Scripted tables cannot be stretched.
pub fn with_horizon(spec: &InstanceSpec, horizon: usize) -> Result<InstanceSpec> {
    if spec.horizon == horizon {
        return Ok(spec.clone());
    }
    let stretchable = match &spec.kind {
        InstanceKind::AdversarialScripted { .. } => false,
        InstanceKind::Stochastic { .. } => true,
        InstanceKind::ContextualLinear { schedule, .. } => *schedule == ContextSchedule::Iid,
    };
    if !stretchable {
        return Err(Error::invalid(format!(
            "instance is scripted for T = {}, cannot run it for T = {horizon}",
            spec.horizon
        )));
    }
    let mut out = spec.clone();
    out.horizon = horizon;
    out.validate()?;
    Ok(out)
}

impl InstanceSource {
    pub fn resolve(&self, horizon: usize) -> Result<InstanceSpec> {
        match self {
            InstanceSource::Builtin { builtin, params } => {
                builtin_instance(builtin, horizon, params)
            }
            InstanceSource::File { file } => with_horizon(
                &InstanceSpec::from_json(&fs::read_to_string(file)?)?,
                horizon,
            ),
            InstanceSource::Inline(spec) => with_horizon(spec, horizon),
        }
    }

    pub fn label(&self) -> String {
        match self {
            InstanceSource::Builtin { builtin, .. } => builtin.clone(),
            InstanceSource::File { file } => file.display().to_string(),
            InstanceSource::Inline(_) => "inline".into(),
        }
    }
}

/// Per-run knobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub delta: f64,
    pub seed: u64,
    pub eta_ogd_override: Option<f64>,
    /// Slack of the three-phase instance, used by the lazy pair.
    pub rho: f64,
    /// Multiplier of the lazy dual in the last phase; `1 / rho` when absent.
    pub lazy_m: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            delta: 0.05,
            seed: 0,
            eta_ogd_override: None,
            rho: 0.5,
            lazy_m: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Trace,
    /// Oracle ledger and Lagrangian error, contextual runs only.
    pub oracle: Option<(OracleErrorLedger, f64)>,
}

pub fn execute(spec: &InstanceSpec, algo: Algo, opts: &RunOptions) -> Result<RunOutput> {
    let (t, m, k) = (spec.horizon, spec.num_constraints, spec.num_arms);
    match algo {
        Algo::Exp3six => {
            let mut cfg = FrameworkConfig::new(t, m, k, opts.delta, opts.seed);
            cfg.eta_ogd_override = opts.eta_ogd_override;
            Ok(RunOutput {
                trace: run_exp3six(spec, &cfg)?,
                oracle: None,
            })
        }
        Algo::Contextual => {
            let InstanceKind::ContextualLinear { dim, .. } = &spec.kind else {
                return Err(Error::invalid(
                    "the contextual algorithm needs a contextual instance",
                ));
            };
            let mut cfg = contextual_config(t, m, k, *dim, opts.delta, opts.seed)?;
            cfg.eta_ogd_override = opts.eta_ogd_override;
            let mut env = ContextualEnv::new(spec, opts.seed)?;
            let mut oracles = default_oracles(*dim, m)?;
            let mut dual = DualState::new(m, cfg.dual_eta()?)?;
            let out = run_contextual(
                &cfg,
                &mut env,
                &mut oracles,
                &IgwConfig::new(k, t),
                &mut dual,
            )?;
            Ok(RunOutput {
                trace: out.trace,
                oracle: Some((out.ledger, out.err_lagrangian)),
            })
        }
        Algo::Lazy => {
            if *spec != make_example1(t, opts.rho)? {
                return Err(Error::invalid(
                    "the lazy pair runs on the three-phase instance only",
                ));
            }
            let big_m = opts.lazy_m.unwrap_or(1.0 / opts.rho);
            Ok(RunOutput {
                trace: lazy_counterexample(t, opts.rho, big_m)?,
                oracle: None,
            })
        }
    }
}

/// One line of the JSON-lines output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub instance: String,
    pub algo: Algo,
    pub horizon: usize,
    pub seed: u64,
    pub delta: f64,
    pub git: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<RunResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub eta: f64,
    pub rew: f64,
    pub violations: Vec<f64>,
    pub v_max: f64,
    pub max_dual_l1: f64,
    pub utility_range: f64,
    pub dual_link_ok: bool,
    pub drift_violations: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_errors: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub err_lagrangian: Option<f64>,
}

pub fn summarize(spec: &InstanceSpec, out: &RunOutput, rho_choice: RhoChoice) -> RunResult {
    let trace = &out.trace;
    let violations = trace.cum_violations().to_vec();
    let v_max = violations.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let learning = trace.eta() > 0.0;
    RunResult {
        eta: trace.eta(),
        rew: trace.cum_reward(),
        violations,
        v_max,
        max_dual_l1: trace.max_dual_l1(),
        utility_range: trace.utility_range(),
        dual_link_ok: !learning || audit_dual_link(trace, trace.eta()).iter().all(|b| *b),
        drift_violations: if learning {
            drift_violations(trace, trace.eta())
        } else {
            0
        },
        metrics: baselines(spec)
            .ok()
            .map(|b| compute_metrics(trace, &b, spec.num_constraints, rho_choice)),
        oracle_errors: out.oracle.as_ref().map(|(l, _)| l.vs_truth.clone()),
        err_lagrangian: out.oracle.as_ref().map(|(_, e)| *e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub instance: InstanceSource,
    #[serde(default = "default_algo")]
    pub algo: Algo,
    pub horizons: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default)]
    pub eta_ogd_override: Option<f64>,
    #[serde(default)]
    pub lazy_m: Option<f64>,
    #[serde(default = "default_rho_choice")]
    pub rho_choice: RhoChoice,
    pub out_dir: PathBuf,
    #[serde(default = "default_parallel")]
    pub parallel: bool,
}

fn default_algo() -> Algo {
    Algo::Exp3six
}

fn default_delta() -> f64 {
    0.05
}

fn default_rho_choice() -> RhoChoice {
    RhoChoice::Stoc
}

fn default_parallel() -> bool {
    true
}

/// `git describe --always --dirty` of the working directory, or `"unknown"`.
pub fn git_describe() -> String {
    Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummaryRow {
    pub horizon: usize,
    pub runs: usize,
    pub failed: usize,
    pub rew_mean: f64,
    pub rew_std: f64,
    pub v_max_mean: f64,
    pub v_max_std: f64,
    pub max_dual_l1_mean: f64,
    pub max_dual_l1_std: f64,
}

/// Mean and sample standard deviation; zero spread below two samples.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = crate::sum::sum(xs.iter().copied()) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = crate::sum::sum(xs.iter().map(|x| (x - mean).powi(2))) / (n - 1.0);
    (mean, var.sqrt())
}

pub fn summary_rows(spec: &SweepSpec, records: &[SweepRecord]) -> Vec<SweepSummaryRow> {
    spec.horizons
        .iter()
        .map(|&t| {
            let cell: Vec<&SweepRecord> = records.iter().filter(|r| r.horizon == t).collect();
            let ok: Vec<&RunResult> = cell.iter().filter_map(|r| r.result.as_ref()).collect();
            let col =
                |f: fn(&RunResult) -> f64| mean_std(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (rew_mean, rew_std) = col(|r| r.rew);
            let (v_max_mean, v_max_std) = col(|r| r.v_max);
            let (max_dual_l1_mean, max_dual_l1_std) = col(|r| r.max_dual_l1);
            SweepSummaryRow {
                horizon: t,
                runs: cell.len(),
                failed: cell.len() - ok.len(),
                rew_mean,
                rew_std,
                v_max_mean,
                v_max_std,
                max_dual_l1_mean,
                max_dual_l1_std,
            }
        })
        .collect()
}

pub const SUMMARY_HEADER: &str =
    "horizon,runs,failed,rew_mean,rew_std,v_max_mean,v_max_std,max_dual_l1_mean,max_dual_l1_std";

pub fn summary_csv(rows: &[SweepSummaryRow]) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for r in rows {
        let floats = [
            r.rew_mean,
            r.rew_std,
            r.v_max_mean,
            r.v_max_std,
            r.max_dual_l1_mean,
            r.max_dual_l1_std,
        ];
        let cols: Vec<String> = floats.iter().map(|x| fmt_f64(*x)).collect();
        s.push_str(&format!(
            "{},{},{},{}\n",
            r.horizon,
            r.runs,
            r.failed,
            cols.join(",")
        ));
    }
    s
}

/// Runs one cell; failures become a record with `error` set.
fn run_cell(spec: &SweepSpec, horizon: usize, seed: u64, git: &str) -> SweepRecord {
    let opts = RunOptions {
        delta: spec.delta,
        seed,
        eta_ogd_override: spec.eta_ogd_override,
        rho: match &spec.instance {
            InstanceSource::Builtin { params, .. } => params.rho,
            _ => RunOptions::default().rho,
        },
        lazy_m: spec.lazy_m,
    };
    let outcome = spec.instance.resolve(horizon).and_then(|inst| {
        execute(&inst, spec.algo, &opts).map(|out| summarize(&inst, &out, spec.rho_choice))
    });
    let (result, error) = match outcome {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    SweepRecord {
        instance: spec.instance.label(),
        algo: spec.algo,
        horizon,
        seed,
        delta: spec.delta,
        git: git.to_string(),
        error,
        result,
    }
}

pub struct SweepOutput {
    pub records: Vec<SweepRecord>,
    pub summary: Vec<SweepSummaryRow>,
    pub runs_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Runs every `(T, seed)` cell and writes `runs.jsonl` and `summary.csv` into `out_dir`.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutput> {
    if spec.horizons.is_empty() || spec.seeds.is_empty() {
        return Err(Error::invalid(
            "a sweep needs at least one horizon and one seed",
        ));
    }
    let git = git_describe();
    let cells: Vec<(usize, u64)> = spec
        .horizons
        .iter()
        .flat_map(|t| spec.seeds.iter().map(move |s| (*t, *s)))
        .collect();
    let records: Vec<SweepRecord> = if spec.parallel {
        cells
            .par_iter()
            .map(|(t, s)| run_cell(spec, *t, *s, &git))
            .collect()
    } else {
        cells
            .iter()
            .map(|(t, s)| run_cell(spec, *t, *s, &git))
            .collect()
    };
    let summary = summary_rows(spec, &records);
    fs::create_dir_all(&spec.out_dir)?;
    let runs_path = spec.out_dir.join("runs.jsonl");
    let summary_path = spec.out_dir.join("summary.csv");
    write_records(&runs_path, &records)?;
    fs::write(&summary_path, summary_csv(&summary))?;
    Ok(SweepOutput {
        records,
        summary,
        runs_path,
        summary_path,
    })
}

fn write_records(path: &Path, records: &[SweepRecord]) -> Result<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    for r in records {
        writeln!(f, "{}", json_line(&serde_json::to_value(r)?))?;
    }
    f.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(dir: &Path, horizons: Vec<usize>, seeds: Vec<u64>) -> SweepSpec {
        SweepSpec {
            instance: InstanceSource::Builtin {
                builtin: "stoch-k3m2".into(),
                params: BuiltinParams::default(),
            },
            algo: Algo::Exp3six,
            horizons,
            seeds,
            delta: 0.05,
            eta_ogd_override: None,
            lazy_m: None,
            rho_choice: RhoChoice::Stoc,
            out_dir: dir.to_path_buf(),
            parallel: true,
        }
    }

    #[test]
    fn counts_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let s = spec(dir.path(), vec![30, 60, 90], (0..20).collect());
        let out = run_sweep(&s).unwrap();
        let lines = fs::read_to_string(&out.runs_path).unwrap();
        assert_eq!(lines.lines().count(), 60);
        let csv = fs::read_to_string(&out.summary_path).unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with(SUMMARY_HEADER));
        let again = run_sweep(&s).unwrap();
        assert_eq!(out.records, again.records);
        assert_eq!(csv, fs::read_to_string(&again.summary_path).unwrap());
    }

    #[test]
    fn single_cell_and_failures_recorded() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = spec(dir.path(), vec![10], vec![1]);
        let out = run_sweep(&s).unwrap();
        assert_eq!(out.records.len(), 1);
        assert!(out.records[0].result.is_some());

        s.instance = InstanceSource::Builtin {
            builtin: "example1".into(),
            params: BuiltinParams::default(),
        };
        s.horizons = vec![9, 10];
        let out = run_sweep(&s).unwrap();
        assert!(out
            .records
            .iter()
            .any(|r| r.horizon == 10 && r.error.is_some()));
        assert!(out
            .records
            .iter()
            .any(|r| r.horizon == 9 && r.result.is_some()));
        assert_eq!(out.summary[1].failed, 1);
    }

    #[test]
    fn spec_json_forms() {
        let json = r#"{"instance": {"builtin": "lowerbound-b", "rho": 0.5, "delta_param": 0.2},
            "horizons": [10], "seeds": [1, 2], "out_dir": "/tmp/x"}"#;
        let s: SweepSpec = serde_json::from_str(json).unwrap();
        assert_eq!(s.algo, Algo::Exp3six);
        assert!(
            matches!(s.instance, InstanceSource::Builtin { ref builtin, .. } if builtin == "lowerbound-b")
        );
        let json = r#"{"instance": {"file": "inst.json"}, "algo": "lazy", "horizons": [9], "seeds": [0],
            "out_dir": "o"}"#;
        let s: SweepSpec = serde_json::from_str(json).unwrap();
        assert_eq!(
            s.instance,
            InstanceSource::File {
                file: "inst.json".into()
            }
        );
    }

    #[test]
    fn horizon_stretching() {
        let stoch = crate::harness::builtin::stoch_k3m2(10).unwrap();
        assert_eq!(with_horizon(&stoch, 50).unwrap().horizon, 50);
        let scripted = make_example1(9, 0.5).unwrap();
        assert!(with_horizon(&scripted, 12).is_err());
    }
}
