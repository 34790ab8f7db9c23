//! Domain values shared by every learner, environment and report.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::lagrangian::{concentration_constant, eta_ogd, exp3six_regret_bound, lagrangian};
use crate::sum::CompensatedSum;

/// Reward and cost vector observed for the played action in one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub reward: f64,
    pub costs: Vec<f64>,
}

impl Outcome {
    pub fn new(reward: f64, costs: Vec<f64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&reward) {
            return Err(Error::invalid(format!("reward {reward} outside [0, 1]")));
        }
        if let Some(c) = costs.iter().find(|c| !(-1.0..=1.0).contains(*c)) {
            return Err(Error::invalid(format!("cost {c} outside [-1, 1]")));
        }
        Ok(Self { reward, costs })
    }

    pub fn num_constraints(&self) -> usize {
        self.costs.len()
    }
}

/// Nonnegative vector of Lagrange multipliers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DualVector(Vec<f64>);

impl DualVector {
    pub fn zeros(m: usize) -> Self {
        DualVector(vec![0.0; m])
    }

    pub fn new(components: Vec<f64>) -> Result<Self> {
        if let Some(x) = components.iter().find(|x| !(**x >= 0.0) || !x.is_finite()) {
            return Err(Error::invalid(format!(
                "dual component {x} is not a finite nonnegative number"
            )));
        }
        Ok(DualVector(components))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn l1(&self) -> f64 {
        // components are nonnegative
        self.0.iter().sum()
    }

    pub fn dot(&self, v: &[f64]) -> f64 {
        self.0.iter().zip(v).map(|(a, b)| a * b).sum()
    }

    /// Mutable access restricted to the crate so the sign invariant cannot be broken from outside.
    pub(crate) fn components_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Run-level configuration of the primal-dual loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameworkConfig {
    pub horizon: usize,
    pub num_constraints: usize,
    pub num_arms: usize,
    pub delta: f64,
    /// Replaces the dual learning rate when set.
    pub eta_ogd_override: Option<f64>,
    /// High-probability interval-regret bound of the primal learner. `None` selects
    /// the EXP3-SIX bound `sqrt(K T) ln(K T / delta)`.
    pub primal_bound_estimate: Option<f64>,
    pub seed: u64,
}

impl FrameworkConfig {
    pub fn new(
        horizon: usize,
        num_constraints: usize,
        num_arms: usize,
        delta: f64,
        seed: u64,
    ) -> Self {
        Self {
            horizon,
            num_constraints,
            num_arms,
            delta,
            eta_ogd_override: None,
            primal_bound_estimate: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        if self.num_constraints < 1 {
            return Err(Error::invalid("need at least one constraint"));
        }
        if self.num_arms < 2 {
            return Err(Error::invalid("need at least two arms"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::invalid(format!(
                "delta {} outside (0, 1)",
                self.delta
            )));
        }
        if let Some(eta) = self.eta_ogd_override {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::invalid(format!(
                    "eta override {eta} must be positive"
                )));
            }
        }
        if let Some(b) = self.primal_bound_estimate {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::invalid(format!("primal bound {b} must be positive")));
            }
        }
        Ok(())
    }

    pub fn primal_bound(&self) -> Result<f64> {
        match self.primal_bound_estimate {
            Some(b) => Ok(b),
            None => exp3six_regret_bound(self.num_arms, self.horizon, self.delta),
        }
    }

    /// Dual learning rate: the override if present, otherwise `eta_ogd(m, R, E_{T,delta})`.
    pub fn dual_eta(&self) -> Result<f64> {
        self.validate()?;
        if let Some(eta) = self.eta_ogd_override {
            return Ok(eta);
        }
        let e = concentration_constant(self.horizon, self.delta)?;
        eta_ogd(self.num_constraints, self.primal_bound()?, e)
    }
}

/// Everything logged about a single round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based round index.
    pub t: usize,
    /// Context index, present only for contextual runs.
    pub context: Option<usize>,
    pub action: usize,
    /// Probability with which `action` was drawn.
    pub prob: f64,
    pub lambda: DualVector,
    pub outcome: Outcome,
    pub primal_utility: f64,
    pub dual_gradient: Vec<f64>,
}

impl RoundRecord {
    pub fn new(
        t: usize,
        context: Option<usize>,
        action: usize,
        prob: f64,
        lambda: DualVector,
        outcome: Outcome,
    ) -> Result<Self> {
        let primal_utility = lagrangian(outcome.reward, &outcome.costs, &lambda)?;
        let dual_gradient = outcome.costs.clone();
        Ok(Self {
            t,
            context,
            action,
            prob,
            lambda,
            outcome,
            primal_utility,
            dual_gradient,
        })
    }
}

/// Per-round log plus running aggregates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    num_constraints: usize,
    /// Dual learning rate in force during the run (zero for scripted duals).
    eta: f64,
    records: Vec<RoundRecord>,
    /// Multiplier after the last update, i.e. lambda_{T+1}.
    final_lambda: DualVector,
    #[serde(skip)]
    reward_acc: CompensatedSum,
    #[serde(skip)]
    violation_acc: Vec<CompensatedSum>,
    cum_reward: f64,
    cum_violations: Vec<f64>,
    max_dual_l1: f64,
    utility_range: f64,
}

impl Trace {
    pub fn new(num_constraints: usize, eta: f64) -> Self {
        Self {
            num_constraints,
            eta,
            records: Vec::new(),
            final_lambda: DualVector::zeros(num_constraints),
            reward_acc: CompensatedSum::new(),
            violation_acc: vec![CompensatedSum::new(); num_constraints],
            cum_reward: 0.0,
            cum_violations: vec![0.0; num_constraints],
            max_dual_l1: 0.0,
            utility_range: 0.0,
        }
    }

    pub fn push(&mut self, record: RoundRecord) -> Result<()> {
        check_len(
            "round costs",
            self.num_constraints,
            record.outcome.costs.len(),
        )?;
        check_len(
            "round multiplier",
            self.num_constraints,
            record.lambda.len(),
        )?;
        self.reward_acc.add(record.outcome.reward);
        self.cum_reward = self.reward_acc.value();
        for ((acc, out), c) in self
            .violation_acc
            .iter_mut()
            .zip(self.cum_violations.iter_mut())
            .zip(&record.outcome.costs)
        {
            acc.add(*c);
            *out = acc.value();
        }
        self.max_dual_l1 = self.max_dual_l1.max(record.lambda.l1());
        self.utility_range = self.utility_range.max(record.primal_utility.abs());
        self.records.push(record);
        Ok(())
    }

    pub fn set_final_lambda(&mut self, lambda: DualVector) -> Result<()> {
        check_len("final multiplier", self.num_constraints, lambda.len())?;
        self.final_lambda = lambda;
        Ok(())
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    /// Mutable records, for tests that tamper with a trace on purpose.
    pub fn records_mut(&mut self) -> &mut [RoundRecord] {
        &mut self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn num_constraints(&self) -> usize {
        self.num_constraints
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn final_lambda(&self) -> &DualVector {
        &self.final_lambda
    }

    pub fn cum_reward(&self) -> f64 {
        self.cum_reward
    }

    pub fn cum_violations(&self) -> &[f64] {
        &self.cum_violations
    }

    pub fn max_dual_l1(&self) -> f64 {
        self.max_dual_l1
    }

    pub fn utility_range(&self) -> f64 {
        self.utility_range
    }

    /// Multiplier sequence lambda_1, ..., lambda_{T+1}.
    pub fn lambda_path(&self) -> impl Iterator<Item = &DualVector> {
        self.records
            .iter()
            .map(|r| &r.lambda)
            .chain(std::iter::once(&self.final_lambda))
    }

    /// Recomputes every aggregate from the records and compares with the stored values.
    pub fn aggregates_consistent(&self) -> bool {
        let rebuilt = Trace::rebuild(self.num_constraints, self.eta, self.records.clone());
        rebuilt.cum_reward == self.cum_reward
            && rebuilt.cum_violations == self.cum_violations
            && rebuilt.max_dual_l1 == self.max_dual_l1
            && rebuilt.utility_range == self.utility_range
            && self.records.iter().all(|r| {
                lagrangian(r.outcome.reward, &r.outcome.costs, &r.lambda)
                    .map(|u| u == r.primal_utility)
                    .unwrap_or(false)
            })
    }

    fn rebuild(num_constraints: usize, eta: f64, records: Vec<RoundRecord>) -> Trace {
        let mut t = Trace::new(num_constraints, eta);
        for r in records {
            // records were validated on the way in
            let _ = t.push(r);
        }
        t
    }
}
