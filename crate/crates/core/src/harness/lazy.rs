//! A scripted primal-dual pair on the three-phase instance: both players have no regret, yet the
//! constraint is violated linearly.

use crate::dual::DualLearner;
use crate::env::{make_example1, Environment, InstanceSpec, ScriptedEnv};
use crate::error::{check_len, Error, Result};
use crate::primal::ScriptedPrimal;
use crate::sum::CompensatedSum;
use crate::types::{DualVector, FrameworkConfig, Trace};

use super::run::run_primal_dual;

/// Replays a fixed multiplier sequence `lambda_1, ..., lambda_{T+1}`.
#[derive(Debug, Clone)]
pub struct ScriptedDual {
    values: Vec<DualVector>,
    next: usize,
}

impl ScriptedDual {
    pub fn new(values: Vec<DualVector>) -> Result<Self> {
        let m = values
            .first()
            .map(DualVector::len)
            .ok_or_else(|| Error::invalid("empty dual script"))?;
        if values.iter().any(|v| v.len() != m) {
            return Err(Error::invalid("dual script has mixed dimensions"));
        }
        Ok(Self { values, next: 0 })
    }
}

impl DualLearner for ScriptedDual {
    fn num_constraints(&self) -> usize {
        self.values[0].len()
    }

    fn lambda(&self) -> &DualVector {
        &self.values[self.next.min(self.values.len() - 1)]
    }

    fn step(&mut self, costs: &[f64]) -> Result<()> {
        check_len("costs", self.num_constraints(), costs.len())?;
        self.next += 1;
        Ok(())
    }
}

/// Primal plays `a3` for the first third and `a2` after; the dual plays `0` for two thirds and
/// `M` after.
pub fn lazy_counterexample(horizon: usize, rho: f64, big_m: f64) -> Result<Trace> {
    let spec = make_example1(horizon, rho)?;
    if !(big_m.is_finite() && big_m * rho >= 1.0 - 1e-12) {
        return Err(Error::invalid(format!("M = {big_m} is below 1/rho")));
    }
    let third = horizon / 3;
    let actions = (1..=horizon)
        .map(|t| if t <= third { 2 } else { 1 })
        .collect();
    let lambdas = (1..=horizon + 1)
        .map(|t| DualVector::new(vec![if t <= 2 * third { 0.0 } else { big_m }]))
        .collect::<Result<Vec<_>>>()?;
    let cfg = FrameworkConfig::new(horizon, 1, 3, 0.5, 0);
    let mut env = ScriptedEnv::new(spec)?;
    let mut primal = ScriptedPrimal::new(3, actions)?;
    let mut dual = ScriptedDual::new(lambdas)?;
    run_primal_dual(&cfg, &mut env, &mut primal, &mut dual)
}

/// Full-information primal regret on a scripted instance against the multipliers in `trace`:
/// `max_x sum_t [f_t(x) - <lambda_t, g_t(x)>] - sum_t [f_t(x_t) - <lambda_t, g_t(x_t)>]`.
pub fn primal_regret(spec: &InstanceSpec, trace: &Trace) -> Result<f64> {
    let mut env = ScriptedEnv::new(spec.clone())?;
    let k = env.num_arms();
    let mut per_arm: Vec<CompensatedSum> = vec![CompensatedSum::new(); k];
    let mut played = CompensatedSum::new();
    for r in trace.records() {
        let table = env.round(r.t)?;
        for (a, acc) in per_arm.iter_mut().enumerate() {
            acc.add(table.rewards[a] - r.lambda.dot(table.costs_of(a)));
        }
        played.add(r.primal_utility);
    }
    let best = per_arm
        .iter()
        .map(CompensatedSum::value)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(best - played.value())
}

/// Dual regret over the box `[0, M]^m`: `max_lambda sum_t <lambda - lambda_t, g_t(x_t)>`.
pub fn dual_regret(trace: &Trace, big_m: f64) -> f64 {
    let m = trace.num_constraints();
    let mut sums = vec![CompensatedSum::new(); m];
    let mut played = CompensatedSum::new();
    for r in trace.records() {
        for (s, g) in sums.iter_mut().zip(&r.outcome.costs) {
            s.add(*g);
        }
        played.add(r.lambda.dot(&r.outcome.costs));
    }
    let best: f64 = sums.iter().map(|s| (big_m * s.value()).max(0.0)).sum();
    best - played.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_case_by_hand() {
        let trace = lazy_counterexample(9, 0.3, 4.0).unwrap();
        assert!((trace.cum_violations()[0] - 0.9).abs() < 1e-12);
        let acts: Vec<usize> = trace.records().iter().map(|r| r.action).collect();
        assert_eq!(acts, vec![2, 2, 2, 1, 1, 1, 1, 1, 1]);
        assert_eq!(trace.records()[6].lambda.as_slice(), &[4.0]);
        assert_eq!(trace.records()[5].lambda.as_slice(), &[0.0]);
        assert!(dual_regret(&trace, 4.0).abs() < 1e-12);
    }

    #[test]
    fn primal_regret_closed_form() {
        // The arm a1 earns rho * M per final-phase round against the multiplier, the script
        // earns 1 per round in the first two thirds and loses rho * M in the last.
        for (t, rho, m) in [(9, 0.3, 1.0 / 0.3), (99, 0.1, 20.0), (9, 0.9, 2.0 / 0.9)] {
            let spec = make_example1(t, rho).unwrap();
            let trace = lazy_counterexample(t, rho, m).unwrap();
            let third = (t / 3) as f64;
            let expected = third * (2.0 * m * rho - 2.0);
            assert!((primal_regret(&spec, &trace).unwrap() - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_small_m_and_bad_horizon() {
        assert!(lazy_counterexample(9, 0.5, 1.0).is_err());
        assert!(lazy_counterexample(10, 0.5, 2.0).is_err());
    }
}
