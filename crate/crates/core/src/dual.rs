//! Online gradient ascent on the nonnegative orthant.
//!
//! There is deliberately no upper box: the multipliers are expected to stay bounded on their own,
//! and the harness measures `max ||lambda_t||_1` instead of enforcing it.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::types::{DualVector, Trace};

/// A dual player in the primal-dual loop.
pub trait DualLearner {
    fn num_constraints(&self) -> usize;

    /// Multiplier for the current round.
    fn lambda(&self) -> &DualVector;

    /// Consumes the observed cost vector of the played action.
    fn step(&mut self, costs: &[f64]) -> Result<()>;

    /// Learning rate reported in traces; zero for non-learning duals.
    fn learning_rate(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    lambda: DualVector,
    eta: f64,
}

impl DualState {
    /// Starts at `lambda = 0`.
    pub fn new(m: usize, eta: f64) -> Result<Self> {
        if m < 1 {
            return Err(Error::invalid("m must be at least 1"));
        }
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::invalid(format!(
                "dual learning rate {eta} must be positive"
            )));
        }
        Ok(Self {
            lambda: DualVector::zeros(m),
            eta,
        })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `lambda_i <- max(0, lambda_i + eta g_i)`.
    pub fn step_with(&mut self, g: &[f64]) -> Result<()> {
        check_len("dual gradient", self.lambda.len(), g.len())?;
        if let Some(x) = g.iter().find(|x| !(x.abs() <= 1.0)) {
            return Err(Error::invalid(format!("cost {x} outside [-1, 1]")));
        }
        let eta = self.eta;
        for (l, gi) in self.lambda.components_mut().iter_mut().zip(g) {
            *l = (*l + eta * gi).max(0.0);
        }
        Ok(())
    }
}

impl DualLearner for DualState {
    fn num_constraints(&self) -> usize {
        self.lambda.len()
    }

    fn lambda(&self) -> &DualVector {
        &self.lambda
    }

    fn step(&mut self, costs: &[f64]) -> Result<()> {
        self.step_with(costs)
    }

    fn learning_rate(&self) -> f64 {
        self.eta
    }
}

/// Checks `sum_{tau <= t} g_{tau,i} <= lambda_{t+1,i} / eta` at every prefix of the trace.
///
/// Returns one flag per constraint. A relative slack of `1e-9` absorbs floating-point rounding in
/// the two accumulations; genuine violations are many orders of magnitude larger.
pub fn audit_dual_link(trace: &Trace, eta: f64) -> Vec<bool> {
    let m = trace.num_constraints();
    let mut ok = vec![true; m];
    if !(eta > 0.0) {
        return vec![false; m];
    }
    let mut prefix = vec![0.0; m];
    let next_lambdas = trace.lambda_path().skip(1);
    for (rec, next) in trace.records().iter().zip(next_lambdas) {
        for i in 0..m {
            prefix[i] += rec.dual_gradient[i];
            let bound = next.as_slice()[i] / eta;
            if prefix[i] > bound + 1e-9 * (1.0 + prefix[i].abs()) {
                ok[i] = false;
            }
        }
    }
    ok
}

/// Number of steps where `| ||lambda_{t+1}||_1 - ||lambda_t||_1 | > m eta`.
///
/// The comparison allows a few ulps of the norms involved, nothing more.
pub fn drift_violations(trace: &Trace, eta: f64) -> usize {
    let bound = trace.num_constraints() as f64 * eta;
    let path: Vec<f64> = trace.lambda_path().map(DualVector::l1).collect();
    path.windows(2)
        .filter(|w| {
            let rounding = 8.0 * f64::EPSILON * (w[0] + w[1] + bound);
            (w[1] - w[0]).abs() > bound + rounding
        })
        .count()
}

/// Largest one-step change of `||lambda||_1` along the trace.
pub fn max_l1_drift(trace: &Trace) -> f64 {
    let path: Vec<f64> = trace.lambda_path().map(DualVector::l1).collect();
    path.windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .fold(0.0, f64::max)
}
