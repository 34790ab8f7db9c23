//! Round-by-round outcome generators built from instance specs.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};
use crate::types::Outcome;

use super::instance::{ContextSchedule, InstanceKind, InstanceSpec, NoiseModel};

/// Realized rewards and costs of every arm in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundTable {
    pub num_constraints: usize,
    pub rewards: Vec<f64>,
    /// Row-major `K x m`.
    pub costs: Vec<f64>,
}

impl RoundTable {
    pub fn num_arms(&self) -> usize {
        self.rewards.len()
    }

    pub fn costs_of(&self, arm: usize) -> &[f64] {
        let m = self.num_constraints;
        &self.costs[arm * m..(arm + 1) * m]
    }

    pub fn outcome(&self, arm: usize) -> Result<Outcome> {
        if arm >= self.num_arms() {
            return Err(Error::invalid(format!("arm {arm} out of range")));
        }
        Outcome::new(self.rewards[arm], self.costs_of(arm).to_vec())
    }
}

/// A non-contextual environment. Rounds are requested in order `1..=T`.
pub trait Environment {
    fn num_arms(&self) -> usize;
    fn num_constraints(&self) -> usize;
    fn horizon(&self) -> usize;
    fn round(&mut self, t: usize) -> Result<RoundTable>;
}

fn check_round(t: usize, horizon: usize) -> Result<()> {
    if t == 0 || t > horizon {
        return Err(Error::Exhausted { round: t, horizon });
    }
    Ok(())
}

fn draw_table<R: Rng>(
    rng: &mut R,
    noise: NoiseModel,
    rewards: &[f64],
    costs: &[f64],
    m: usize,
) -> RoundTable {
    match noise {
        NoiseModel::None => RoundTable {
            num_constraints: m,
            rewards: rewards.to_vec(),
            costs: costs.to_vec(),
        },
        NoiseModel::TwoPoint => {
            let mut r = Vec::with_capacity(rewards.len());
            let mut c = Vec::with_capacity(costs.len());
            for (a, f) in rewards.iter().enumerate() {
                r.push(if rng.gen::<f64>() < *f { 1.0 } else { 0.0 });
                for g in &costs[a * m..(a + 1) * m] {
                    c.push(if rng.gen::<f64>() < 0.5 * (1.0 + g) {
                        1.0
                    } else {
                        -1.0
                    });
                }
            }
            RoundTable {
                num_constraints: m,
                rewards: r,
                costs: c,
            }
        }
    }
}

/// Deterministic phase tables.
#[derive(Debug, Clone)]
pub struct ScriptedEnv {
    spec: InstanceSpec,
}

impl ScriptedEnv {
    pub fn new(spec: InstanceSpec) -> Result<Self> {
        spec.validate()?;
        if !matches!(spec.kind, InstanceKind::AdversarialScripted { .. }) {
            return Err(Error::invalid(
                "scripted environment needs a scripted instance",
            ));
        }
        Ok(Self { spec })
    }
}

impl Environment for ScriptedEnv {
    fn num_arms(&self) -> usize {
        self.spec.num_arms
    }

    fn num_constraints(&self) -> usize {
        self.spec.num_constraints
    }

    fn horizon(&self) -> usize {
        self.spec.horizon
    }

    fn round(&mut self, t: usize) -> Result<RoundTable> {
        check_round(t, self.spec.horizon)?;
        let p = self
            .spec
            .phase_at(t)
            .ok_or_else(|| Error::Internal(format!("no phase covers round {t}")))?;
        Ok(RoundTable {
            num_constraints: self.spec.num_constraints,
            rewards: p.rewards.clone(),
            costs: p.costs.clone(),
        })
    }
}

/// I.i.d. draws around fixed means. Every round draws all `K * (1 + m)` values, so the realized
/// stream does not depend on which arm is played.
#[derive(Debug, Clone)]
pub struct StochasticEnv {
    num_constraints: usize,
    horizon: usize,
    mean_rewards: Vec<f64>,
    mean_costs: Vec<f64>,
    noise: NoiseModel,
    rng: ChaCha8Rng,
}

impl StochasticEnv {
    pub fn new(spec: &InstanceSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        match &spec.kind {
            InstanceKind::Stochastic {
                mean_rewards,
                mean_costs,
                noise,
            } => Ok(Self {
                num_constraints: spec.num_constraints,
                horizon: spec.horizon,
                mean_rewards: mean_rewards.clone(),
                mean_costs: mean_costs.clone(),
                noise: *noise,
                rng: stream_rng(seed, Stream::Environment),
            }),
            _ => Err(Error::invalid(
                "stochastic environment needs a stochastic instance",
            )),
        }
    }
}

impl Environment for StochasticEnv {
    fn num_arms(&self) -> usize {
        self.mean_rewards.len()
    }

    fn num_constraints(&self) -> usize {
        self.num_constraints
    }

    fn horizon(&self) -> usize {
        self.horizon
    }

    fn round(&mut self, t: usize) -> Result<RoundTable> {
        check_round(t, self.horizon)?;
        Ok(draw_table(
            &mut self.rng,
            self.noise,
            &self.mean_rewards,
            &self.mean_costs,
            self.num_constraints,
        ))
    }
}

/// Builds the sampler for a non-contextual instance.
pub fn build_env(spec: &InstanceSpec, seed: u64) -> Result<Box<dyn Environment + Send>> {
    match spec.kind {
        InstanceKind::AdversarialScripted { .. } => Ok(Box::new(ScriptedEnv::new(spec.clone())?)),
        InstanceKind::Stochastic { .. } => Ok(Box::new(StochasticEnv::new(spec, seed)?)),
        InstanceKind::ContextualLinear { .. } => Err(Error::invalid(
            "contextual instances need the contextual loop",
        )),
    }
}

/// Linear contextual environment.
#[derive(Debug, Clone)]
pub struct ContextualEnv {
    num_arms: usize,
    num_constraints: usize,
    horizon: usize,
    /// `[context][action]` feature vectors.
    features: Vec<Vec<Vec<f64>>>,
    /// Row-major `contexts x K`.
    mean_rewards: Vec<f64>,
    /// Row-major `contexts x K x m`.
    mean_costs: Vec<f64>,
    schedule: ContextSchedule,
    noise: NoiseModel,
    context_rng: ChaCha8Rng,
    env_rng: ChaCha8Rng,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl ContextualEnv {
    pub fn new(spec: &InstanceSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let InstanceKind::ContextualLinear {
            dim,
            num_contexts,
            features,
            theta_f,
            theta_g,
            schedule,
            noise,
        } = &spec.kind
        else {
            return Err(Error::invalid(
                "contextual environment needs a contextual instance",
            ));
        };
        let (k, m, d) = (spec.num_arms, spec.num_constraints, *dim);
        let table: Vec<Vec<Vec<f64>>> = features
            .chunks(k * d)
            .map(|ctx| ctx.chunks(d).map(<[f64]>::to_vec).collect())
            .collect();
        let mut mean_rewards = Vec::with_capacity(num_contexts * k);
        let mut mean_costs = Vec::with_capacity(num_contexts * k * m);
        for ctx in &table {
            for z in ctx {
                mean_rewards.push((0.5 * (1.0 + dot(z, theta_f))).clamp(0.0, 1.0));
                for th in theta_g.chunks(d) {
                    mean_costs.push(dot(z, th).clamp(-1.0, 1.0));
                }
            }
        }
        Ok(Self {
            num_arms: k,
            num_constraints: m,
            horizon: spec.horizon,
            features: table,
            mean_rewards,
            mean_costs,
            schedule: schedule.clone(),
            noise: *noise,
            context_rng: stream_rng(seed, Stream::Context),
            env_rng: stream_rng(seed, Stream::Environment),
        })
    }

    pub fn num_arms(&self) -> usize {
        self.num_arms
    }

    pub fn num_constraints(&self) -> usize {
        self.num_constraints
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn num_contexts(&self) -> usize {
        self.features.len()
    }

    /// Draws (or looks up) the context of round `t`.
    pub fn context(&mut self, t: usize) -> Result<usize> {
        check_round(t, self.horizon)?;
        Ok(match &self.schedule {
            ContextSchedule::Iid => self.context_rng.gen_range(0..self.features.len()),
            ContextSchedule::Scripted { contexts } => contexts[t - 1],
        })
    }

    /// Feature vectors of every action under a context.
    pub fn features(&self, context: usize) -> &[Vec<f64>] {
        &self.features[context]
    }

    pub fn mean_reward(&self, context: usize, action: usize) -> f64 {
        self.mean_rewards[context * self.num_arms + action]
    }

    pub fn mean_costs(&self, context: usize, action: usize) -> &[f64] {
        let m = self.num_constraints;
        let start = (context * self.num_arms + action) * m;
        &self.mean_costs[start..start + m]
    }

    /// Realized outcomes of round `t` under the given context.
    pub fn round(&mut self, t: usize, context: usize) -> Result<RoundTable> {
        check_round(t, self.horizon)?;
        let k = self.num_arms;
        let m = self.num_constraints;
        let rewards = &self.mean_rewards[context * k..(context + 1) * k];
        let costs = &self.mean_costs[context * k * m..(context + 1) * k * m];
        Ok(draw_table(&mut self.env_rng, self.noise, rewards, costs, m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::instance::{contextual_linear_with_features, make_example1, make_stochastic};

    #[test]
    fn degenerate_means_are_deterministic() {
        let spec = make_stochastic(vec![1.0, 0.0], vec![vec![-1.0], vec![1.0]], 50).unwrap();
        let mut env = StochasticEnv::new(&spec, 9).unwrap();
        for t in 1..=50 {
            let tab = env.round(t).unwrap();
            assert_eq!(tab.rewards, vec![1.0, 0.0]);
            assert_eq!(tab.costs, vec![-1.0, 1.0]);
        }
        assert!(matches!(
            env.round(51),
            Err(Error::Exhausted {
                round: 51,
                horizon: 50
            })
        ));
    }

    #[test]
    fn empirical_means_within_three_sigma() {
        let n = 100_000;
        let spec = make_stochastic(vec![0.3, 0.8], vec![vec![0.2], vec![-0.6]], n).unwrap();
        let mut env = StochasticEnv::new(&spec, 1).unwrap();
        let (mut r, mut c) = (0.0, 0.0);
        for t in 1..=n {
            let tab = env.round(t).unwrap();
            r += tab.rewards[0];
            c += tab.costs[1];
        }
        let nf = n as f64;
        let sd_r = (0.3f64 * 0.7 / nf).sqrt();
        assert!((r / nf - 0.3).abs() <= 3.0 * sd_r);
        // cost is 2B - 1 with B ~ Bernoulli(0.2)
        let sd_c = 2.0 * (0.2f64 * 0.8 / nf).sqrt();
        assert!((c / nf + 0.6).abs() <= 3.0 * sd_c);
    }

    #[test]
    fn same_seed_same_stream() {
        let spec = make_stochastic(vec![0.5, 0.5], vec![vec![0.0], vec![0.0]], 100).unwrap();
        let mut a = StochasticEnv::new(&spec, 4).unwrap();
        let mut b = StochasticEnv::new(&spec, 4).unwrap();
        let mut c = StochasticEnv::new(&spec, 5).unwrap();
        let ta: Vec<_> = (1..=100).map(|t| a.round(t).unwrap()).collect();
        let tb: Vec<_> = (1..=100).map(|t| b.round(t).unwrap()).collect();
        let tc: Vec<_> = (1..=100).map(|t| c.round(t).unwrap()).collect();
        assert_eq!(ta, tb);
        assert_ne!(ta, tc);
    }

    #[test]
    fn scripted_env_follows_phases() {
        let mut env = build_env(&make_example1(9, 0.5).unwrap(), 0).unwrap();
        let tab = env.round(4).unwrap();
        assert_eq!(tab.outcome(1).unwrap().reward, 1.0);
        assert_eq!(env.round(7).unwrap().outcome(1).unwrap().costs, vec![0.5]);
        assert!(env.round(10).is_err());
    }

    #[test]
    fn contextual_means_by_hand() {
        // d = 2, one context, two actions
        let features = vec![0.6, 0.8, 1.0, 0.0];
        let spec = contextual_linear_with_features(
            2,
            2,
            1,
            features,
            vec![0.6, 0.8],
            vec![vec![0.0, -0.5]],
            10,
        )
        .unwrap();
        let env = ContextualEnv::new(&spec, 0).unwrap();
        assert!((env.mean_reward(0, 0) - 1.0).abs() < 1e-15);
        assert!((env.mean_reward(0, 1) - 0.8).abs() < 1e-15);
        assert!((env.mean_costs(0, 0)[0] + 0.4).abs() < 1e-15);
        assert_eq!(env.mean_costs(0, 1)[0], 0.0);
    }

    #[test]
    fn zero_theta_gives_half() {
        let spec = crate::env::instance::make_contextual_linear(
            3,
            4,
            5,
            vec![0.0; 3],
            vec![vec![0.0; 3]],
            10,
            2,
        )
        .unwrap();
        let env = ContextualEnv::new(&spec, 0).unwrap();
        for c in 0..5 {
            for a in 0..4 {
                assert_eq!(env.mean_reward(c, a), 0.5);
            }
        }
    }

    #[test]
    fn outcomes_stay_in_range() {
        let spec = make_stochastic(
            vec![0.1, 0.9, 0.5],
            vec![vec![0.9, -0.9], vec![0.0, 0.3], vec![-1.0, 1.0]],
            500,
        )
        .unwrap();
        let mut env = StochasticEnv::new(&spec, 3).unwrap();
        for t in 1..=500 {
            let tab = env.round(t).unwrap();
            for a in 0..3 {
                tab.outcome(a).unwrap();
            }
        }
    }
}
