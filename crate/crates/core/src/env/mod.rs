//! Benchmark instances, their samplers, and LP-based baselines.

pub mod baselines;
pub mod instance;
pub mod lp;
pub mod sampling;

pub use baselines::{baselines, feasibility, BaselineReport};
pub use instance::{
    contextual_linear_with_features, make_contextual_linear, make_example1, make_lowerbound,
    make_stochastic, random_theta, ContextSchedule, InstanceKind, InstanceSpec, NoiseModel, Phase,
    SCHEMA_VERSION,
};
pub use lp::{solve_lp, LinearProgram, LpSolution, Relation};
pub use sampling::{build_env, ContextualEnv, Environment, RoundTable, ScriptedEnv, StochasticEnv};
