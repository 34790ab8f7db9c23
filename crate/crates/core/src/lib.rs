//! Primal-dual learning for bandits with general long-term constraints.
//!
//! A primal bandit learner (EXP3-SIX, or inverse gap weighting over regression oracles in the
//! contextual case) plays against an online-gradient dual player on the Lagrangian
//! `f(x) - <lambda, g(x)>`. The dual learning rate is fixed in advance from `T`, `m`, `delta`
//! and the primal learner's regret bound, with no box constraint on the multipliers.
//!
//! The [`env`] module builds benchmark instances and their LP baselines, [`harness`] runs the
//! loops and sweeps, and [`acceptance`] holds the end-to-end checks.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Reference values in tests carry every digit the high-precision oracle printed.
#![cfg_attr(test, allow(clippy::excessive_precision))]

pub mod acceptance;
pub mod dual;
pub mod env;
pub mod error;
pub mod exp3six;
pub mod harness;
pub mod igw;
pub mod lagrangian;
pub mod primal;
pub mod regression;
pub mod rng;
pub mod sum;
pub mod types;

pub use dual::{audit_dual_link, drift_violations, DualLearner, DualState};
pub use env::{baselines, BaselineReport, InstanceSpec};
pub use error::{Error, Result};
pub use exp3six::Exp3SixState;
pub use harness::{compute_metrics, run_contextual, run_primal_dual, MetricsReport, RhoChoice};
pub use igw::{igw_act, igw_distribution, IgwConfig, OracleSet};
pub use lagrangian::{concentration_constant, eta_ogd, lagrangian};
pub use primal::PrimalLearner;
pub use regression::{FiniteClassOracle, OracleErrorLedger, RidgeOracle};
pub use types::{DualVector, FrameworkConfig, Outcome, RoundRecord, Trace};
