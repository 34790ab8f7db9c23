//! Primal-dual loops, the scripted lazy pair, metrics and sweeps.

pub mod builtin;
pub mod lazy;
pub mod metrics;
pub mod output;
pub mod run;
pub mod sweep;

pub use builtin::{builtin_instance, stoch_k3m2, twophase_k4, BuiltinParams, BUILTIN_NAMES};
pub use lazy::{dual_regret, lazy_counterexample, primal_regret, ScriptedDual};
pub use metrics::{compute_metrics, MetricsReport, RhoChoice};
pub use output::{fmt_f64, json_line};
pub use run::{
    contextual_config, default_oracles, ridge_error_bound, run_contextual, run_exp3six,
    run_primal_dual, ContextualTrace,
};
pub use sweep::{
    execute, run_sweep, summarize, with_horizon, Algo, InstanceSource, RunOptions, RunOutput,
    RunResult, SweepOutput, SweepRecord, SweepSpec, SweepSummaryRow,
};
