//! The interaction loops.

use crate::dual::{DualLearner, DualState};
use crate::env::{build_env, ContextualEnv, Environment, InstanceSpec};
use crate::error::{check_len, Error, Result};
use crate::exp3six::Exp3SixState;
use crate::igw::{igw_act, IgwConfig, OracleSet};
use crate::lagrangian::contextual_regret_bound;
use crate::primal::PrimalLearner;
use crate::regression::{
    ContextView, LinearLink, OracleErrorLedger, RidgeOracle, TargetRange, DEFAULT_LAMBDA_REG,
};
use crate::rng::{stream_rng, Stream};
use crate::sum::CompensatedSum;
use crate::types::{FrameworkConfig, RoundRecord, Trace};

fn check_dims(cfg: &FrameworkConfig, k: usize, m: usize, horizon: usize) -> Result<()> {
    cfg.validate()?;
    check_len("arms", cfg.num_arms, k)?;
    check_len("constraints", cfg.num_constraints, m)?;
    if horizon < cfg.horizon {
        return Err(Error::Exhausted {
            round: horizon + 1,
            horizon,
        });
    }
    Ok(())
}

/// Non-contextual loop. Each round the primal draws its arm first, then the multiplier of the
/// round is read; the primal only ever sees the multiplier through its utility.
pub fn run_primal_dual(
    cfg: &FrameworkConfig,
    env: &mut dyn Environment,
    primal: &mut dyn PrimalLearner,
    dual: &mut dyn DualLearner,
) -> Result<Trace> {
    check_dims(cfg, env.num_arms(), env.num_constraints(), env.horizon())?;
    check_len("primal arms", cfg.num_arms, primal.num_arms())?;
    check_len(
        "dual constraints",
        cfg.num_constraints,
        dual.num_constraints(),
    )?;
    let mut rng = stream_rng(cfg.seed, Stream::Primal);
    let mut trace = Trace::new(cfg.num_constraints, dual.learning_rate());
    for t in 1..=cfg.horizon {
        let (arm, prob) = primal.act(&mut rng)?;
        let lambda = dual.lambda().clone();
        let outcome = env.round(t)?.outcome(arm)?;
        let record = RoundRecord::new(t, None, arm, prob, lambda, outcome)?;
        primal.update(arm, prob, record.primal_utility)?;
        dual.step(&record.outcome.costs)?;
        trace.push(record)?;
    }
    trace.set_final_lambda(dual.lambda().clone())?;
    Ok(trace)
}

/// EXP3-SIX against OGD with the configured learning rate on a non-contextual instance.
pub fn run_exp3six(spec: &InstanceSpec, cfg: &FrameworkConfig) -> Result<Trace> {
    let mut env = build_env(spec, cfg.seed)?;
    let mut primal = Exp3SixState::new(cfg.num_arms, cfg.horizon)?;
    let mut dual = DualState::new(cfg.num_constraints, cfg.dual_eta()?)?;
    run_primal_dual(cfg, env.as_mut(), &mut primal, &mut dual)
}

/// A contextual trace plus what the oracles got wrong.
#[derive(Debug, Clone)]
pub struct ContextualTrace {
    pub trace: Trace,
    /// Reward oracle first, then one slot per constraint.
    pub ledger: OracleErrorLedger,
    /// Cumulative squared error of the estimated Lagrangian at the played pairs.
    pub err_lagrangian: f64,
}

impl ContextualTrace {
    pub fn error_bound_holds(&self) -> bool {
        crate::regression::lagrangian_error_bound_check(
            self.ledger.reward_error(),
            self.ledger.cost_errors(),
            self.trace.max_dual_l1(),
            self.err_lagrangian,
        )
    }
}

/// Contextual loop: context, then multiplier, then an inverse-gap-weighted action.
pub fn run_contextual(
    cfg: &FrameworkConfig,
    env: &mut ContextualEnv,
    oracles: &mut OracleSet,
    igw: &IgwConfig,
    dual: &mut dyn DualLearner,
) -> Result<ContextualTrace> {
    check_dims(cfg, env.num_arms(), env.num_constraints(), env.horizon())?;
    check_len(
        "oracle constraints",
        cfg.num_constraints,
        oracles.num_constraints(),
    )?;
    check_len(
        "dual constraints",
        cfg.num_constraints,
        dual.num_constraints(),
    )?;
    check_len("IGW actions", cfg.num_arms, igw.num_actions)?;
    let m = cfg.num_constraints;
    let mut rng = stream_rng(cfg.seed, Stream::Primal);
    let mut trace = Trace::new(m, dual.learning_rate());
    let mut ledger = OracleErrorLedger::new(1 + m);
    let mut err_l = CompensatedSum::new();
    for t in 1..=cfg.horizon {
        let z = env.context(t)?;
        let lambda = dual.lambda().clone();
        let features = env.features(z).to_vec();
        let view = ContextView {
            index: z,
            features: &features,
        };
        let decision = igw_act(oracles, &view, &lambda, igw, &mut rng)?;
        let a = decision.action;
        let outcome = env.round(t, z)?.outcome(a)?;

        let (f_hat, g_hat) = oracles.predict(&view, a);
        let f_bar = env.mean_reward(z, a);
        let g_bar = env.mean_costs(z, a);
        ledger.record(0, f_hat, f_bar, outcome.reward);
        for i in 0..m {
            ledger.record(1 + i, g_hat[i], g_bar[i], outcome.costs[i]);
        }
        let l_bar = f_bar - lambda.dot(g_bar);
        err_l.add((decision.lhat[a] - l_bar).powi(2));

        oracles.update(&view, a, outcome.reward, &outcome.costs)?;
        let record = RoundRecord::new(t, Some(z), a, decision.xi[a], lambda, outcome)?;
        dual.step(&record.outcome.costs)?;
        trace.push(record)?;
    }
    trace.set_final_lambda(dual.lambda().clone())?;
    Ok(ContextualTrace {
        trace,
        ledger,
        err_lagrangian: err_l.value(),
    })
}

/// Order-of-magnitude error bound of the ridge oracle, `d ln(1 + T / d)`.
pub fn ridge_error_bound(dim: usize, horizon: usize) -> f64 {
    let d = dim as f64;
    d * (1.0 + horizon as f64 / d).ln()
}

/// Ridge oracles for reward and every constraint.
pub fn default_oracles(dim: usize, num_constraints: usize) -> Result<OracleSet> {
    let reward = RidgeOracle::new(
        dim,
        DEFAULT_LAMBDA_REG,
        LinearLink::HALF_SHIFT,
        TargetRange::Reward,
    )?;
    let mut costs: Vec<Box<dyn crate::regression::RegressionOracle + Send>> =
        Vec::with_capacity(num_constraints);
    for _ in 0..num_constraints {
        costs.push(Box::new(RidgeOracle::new(
            dim,
            DEFAULT_LAMBDA_REG,
            LinearLink::IDENTITY,
            TargetRange::Cost,
        )?));
    }
    Ok(OracleSet {
        reward: Box::new(reward),
        costs,
    })
}

/// Config whose primal bound is the contextual interval-regret bound with the ridge error bound.
pub fn contextual_config(
    horizon: usize,
    num_constraints: usize,
    num_arms: usize,
    dim: usize,
    delta: f64,
    seed: u64,
) -> Result<FrameworkConfig> {
    let mut cfg = FrameworkConfig::new(horizon, num_constraints, num_arms, delta, seed);
    let err_bar = ridge_error_bound(dim, horizon);
    cfg.primal_bound_estimate = Some(contextual_regret_bound(
        num_constraints,
        num_arms,
        horizon,
        delta,
        err_bar,
    )?);
    cfg.validate()?;
    Ok(cfg)
}
