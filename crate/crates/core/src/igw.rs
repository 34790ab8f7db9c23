//! Inverse gap weighting over an estimated Lagrangian.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::regression::{ContextView, RegressionOracle};
use crate::types::DualVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IgwConfig {
    pub eta_p: f64,
    pub num_actions: usize,
    pub bisection_tol: f64,
}

const MAX_BISECTION_STEPS: usize = 200;

impl IgwConfig {
    /// `eta_P = sqrt(K T)`.
    pub fn new(num_actions: usize, horizon: usize) -> Self {
        Self {
            eta_p: ((num_actions * horizon) as f64).sqrt(),
            num_actions,
            bisection_tol: 1e-12,
        }
    }
}

/// `xi(a) = 1 / (mu + eta_p (max lhat - lhat(a)))`, with `mu` chosen so `xi` sums to one.
pub fn igw_distribution(lhat: &[f64], eta_p: f64) -> Result<(Vec<f64>, f64)> {
    igw_distribution_with_tol(lhat, eta_p, 1e-12)
}

pub fn igw_distribution_with_tol(lhat: &[f64], eta_p: f64, tol: f64) -> Result<(Vec<f64>, f64)> {
    if lhat.is_empty() {
        return Err(Error::invalid("need at least one action"));
    }
    if lhat.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(
            "estimated Lagrangian has non-finite entries",
        ));
    }
    if !(eta_p >= 0.0 && eta_p.is_finite()) {
        return Err(Error::invalid(format!(
            "eta_p {eta_p} must be finite and nonnegative"
        )));
    }
    let k = lhat.len();
    let max = lhat.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled_gaps: Vec<f64> = lhat.iter().map(|l| eta_p * (max - l)).collect();
    let mass = |mu: f64| scaled_gaps.iter().map(|g| 1.0 / (mu + g)).sum::<f64>();

    // mass(1) >= 1 because a maximiser contributes 1; mass(K) <= 1 because every term is <= 1/K
    let (mut lo, mut hi) = (1.0, k as f64);
    for _ in 0..MAX_BISECTION_STEPS {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    let mut xi: Vec<f64> = scaled_gaps.iter().map(|g| 1.0 / (mu + g)).collect();
    let residual = 1.0 - xi.iter().sum::<f64>();
    let first_max = scaled_gaps.iter().position(|g| *g == 0.0).unwrap_or(0);
    xi[first_max] += residual;
    Ok((xi, mu))
}

/// Reward oracle plus one oracle per constraint.
pub struct OracleSet {
    pub reward: Box<dyn RegressionOracle + Send>,
    pub costs: Vec<Box<dyn RegressionOracle + Send>>,
}

impl OracleSet {
    pub fn num_constraints(&self) -> usize {
        self.costs.len()
    }

    /// `(f_hat, g_hat)` at one action.
    pub fn predict(&self, ctx: &ContextView<'_>, action: usize) -> (f64, Vec<f64>) {
        (
            self.reward.predict(ctx, action),
            self.costs.iter().map(|o| o.predict(ctx, action)).collect(),
        )
    }

    pub fn update(
        &mut self,
        ctx: &ContextView<'_>,
        action: usize,
        reward: f64,
        costs: &[f64],
    ) -> Result<()> {
        check_len("oracle cost labels", self.costs.len(), costs.len())?;
        self.reward.update(ctx, action, reward)?;
        for (o, c) in self.costs.iter_mut().zip(costs) {
            o.update(ctx, action, *c)?;
        }
        Ok(())
    }
}

/// Result of one inverse-gap-weighting decision.
#[derive(Debug, Clone, PartialEq)]
pub struct IgwDecision {
    pub action: usize,
    pub xi: Vec<f64>,
    pub mu: f64,
    /// `f_hat(z, a) - <lambda, g_hat(z, a)>` for every action.
    pub lhat: Vec<f64>,
}

pub fn igw_act(
    oracles: &OracleSet,
    ctx: &ContextView<'_>,
    lambda: &DualVector,
    cfg: &IgwConfig,
    rng: &mut dyn RngCore,
) -> Result<IgwDecision> {
    check_len("multiplier", oracles.num_constraints(), lambda.len())?;
    let lhat: Vec<f64> = (0..cfg.num_actions)
        .map(|a| {
            let (f, g) = oracles.predict(ctx, a);
            f - lambda.dot(&g)
        })
        .collect();
    let (xi, mu) = igw_distribution_with_tol(&lhat, cfg.eta_p, cfg.bisection_tol)?;
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut action = xi.len() - 1;
    for (a, p) in xi.iter().enumerate() {
        acc += p;
        if u < acc {
            action = a;
            break;
        }
    }
    Ok(IgwDecision {
        action,
        xi,
        mu,
        lhat,
    })
}
