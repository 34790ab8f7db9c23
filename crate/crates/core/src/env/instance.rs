//! Instance descriptions and their JSON form.
//!
//! Schema (version 1). Every instance is one JSON object:
//!
//! ```text
//! { "v": 1, "kind": <kind>, "num_arms": K, "num_constraints": m, "horizon": T, ...kind fields }
//! ```
//!
//! * `"adversarial_scripted"`: `"phases": [{"start", "end", "rewards", "costs"}]`, 1-based inclusive
//!   round ranges that partition `1..=T`; `rewards` has K entries, `costs` is K x m row-major.
//! * `"stochastic"`: `"mean_rewards"` (K), `"mean_costs"` (K x m row-major), `"noise"`.
//! * `"contextual_linear"`: `"dim"`, `"num_contexts"`, `"features"` (contexts x K x d row-major),
//!   `"theta_f"` (d), `"theta_g"` (m x d row-major), `"schedule"`, `"noise"`.
//!
//! `"noise"` is `"two_point"` (Bernoulli rewards, costs in {-1, +1}) or `"none"` (means are
//! observed exactly). `"schedule"` is `{"type": "iid"}` or `{"type": "scripted", "contexts": [...]}`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::rng::{stream_rng, Stream};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    TwoPoint,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ContextSchedule {
    Iid,
    Scripted { contexts: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub start: usize,
    pub end: usize,
    pub rewards: Vec<f64>,
    pub costs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceKind {
    AdversarialScripted {
        phases: Vec<Phase>,
    },
    Stochastic {
        mean_rewards: Vec<f64>,
        mean_costs: Vec<f64>,
        noise: NoiseModel,
    },
    ContextualLinear {
        dim: usize,
        num_contexts: usize,
        features: Vec<f64>,
        theta_f: Vec<f64>,
        theta_g: Vec<f64>,
        schedule: ContextSchedule,
        noise: NoiseModel,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub v: u32,
    pub num_arms: usize,
    pub num_constraints: usize,
    pub horizon: usize,
    #[serde(flatten)]
    pub kind: InstanceKind,
}

fn in_unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

fn in_sym(x: f64) -> bool {
    (-1.0..=1.0).contains(&x)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

const NORM_SLACK: f64 = 1e-12;

impl InstanceSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        let spec: InstanceSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn is_contextual(&self) -> bool {
        matches!(self.kind, InstanceKind::ContextualLinear { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if self.v != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "unsupported schema version {}",
                self.v
            )));
        }
        let (k, m, t) = (self.num_arms, self.num_constraints, self.horizon);
        if k < 2 || m < 1 || t < 1 {
            return Err(Error::invalid("need K >= 2, m >= 1, T >= 1"));
        }
        match &self.kind {
            InstanceKind::AdversarialScripted { phases } => {
                let mut next = 1;
                for p in phases {
                    if p.start != next || p.end < p.start {
                        return Err(Error::invalid(format!(
                            "phase [{}, {}] does not continue at round {next}",
                            p.start, p.end
                        )));
                    }
                    check_len("phase rewards", k, p.rewards.len())?;
                    check_len("phase costs", k * m, p.costs.len())?;
                    if !p.rewards.iter().all(|x| in_unit(*x)) || !p.costs.iter().all(|x| in_sym(*x))
                    {
                        return Err(Error::invalid("phase values out of range"));
                    }
                    next = p.end + 1;
                }
                if next != t + 1 {
                    return Err(Error::invalid("phases do not cover the horizon"));
                }
            }
            InstanceKind::Stochastic {
                mean_rewards,
                mean_costs,
                ..
            } => {
                check_len("mean rewards", k, mean_rewards.len())?;
                check_len("mean costs", k * m, mean_costs.len())?;
                if !mean_rewards.iter().all(|x| in_unit(*x))
                    || !mean_costs.iter().all(|x| in_sym(*x))
                {
                    return Err(Error::invalid("means out of range"));
                }
            }
            InstanceKind::ContextualLinear {
                dim,
                num_contexts,
                features,
                theta_f,
                theta_g,
                schedule,
                ..
            } => {
                let d = *dim;
                if d == 0 || *num_contexts == 0 {
                    return Err(Error::invalid("need d >= 1 and at least one context"));
                }
                check_len("features", num_contexts * k * d, features.len())?;
                check_len("theta_f", d, theta_f.len())?;
                check_len("theta_g", m * d, theta_g.len())?;
                if norm(theta_f) > 1.0 + NORM_SLACK
                    || theta_g.chunks(d).any(|th| norm(th) > 1.0 + NORM_SLACK)
                {
                    return Err(Error::invalid("parameter vectors must have norm <= 1"));
                }
                if features.chunks(d).any(|z| norm(z) > 1.0 + NORM_SLACK) {
                    return Err(Error::invalid("feature vectors must have norm <= 1"));
                }
                if let ContextSchedule::Scripted { contexts } = schedule {
                    check_len("scripted contexts", t, contexts.len())?;
                    if contexts.iter().any(|c| c >= num_contexts) {
                        return Err(Error::invalid("scripted context index out of range"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Phase containing round `t` (1-based), scripted instances only.
    pub fn phase_at(&self, t: usize) -> Option<&Phase> {
        match &self.kind {
            InstanceKind::AdversarialScripted { phases } => {
                let idx = phases.partition_point(|p| p.end < t);
                phases.get(idx).filter(|p| p.start <= t)
            }
            _ => None,
        }
    }
}

fn phase(start: usize, end: usize, rewards: Vec<f64>, costs: Vec<f64>) -> Phase {
    Phase {
        start,
        end,
        rewards,
        costs,
    }
}

/// Three actions, one constraint. `a1` is always safe with zero reward; `a3` then `a2` pay 1 in
/// the first two thirds, and both cost `rho` in the last third.
pub fn make_example1(horizon: usize, rho: f64) -> Result<InstanceSpec> {
    if horizon == 0 || !horizon.is_multiple_of(3) {
        return Err(Error::invalid(format!(
            "horizon {horizon} is not a positive multiple of 3"
        )));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::invalid(format!("rho {rho} outside (0, 1]")));
    }
    let third = horizon / 3;
    let spec = InstanceSpec {
        v: SCHEMA_VERSION,
        num_arms: 3,
        num_constraints: 1,
        horizon,
        kind: InstanceKind::AdversarialScripted {
            phases: vec![
                phase(1, third, vec![0.0, 0.0, 1.0], vec![-rho, 0.0, 0.0]),
                phase(
                    third + 1,
                    2 * third,
                    vec![0.0, 1.0, 0.0],
                    vec![-rho, 0.0, 0.0],
                ),
                phase(
                    2 * third + 1,
                    horizon,
                    vec![0.0, 0.0, 0.0],
                    vec![-rho, rho, rho],
                ),
            ],
        },
    };
    spec.validate()?;
    Ok(spec)
}

/// The two instances of the competitive-ratio lower bound; identical over the first half.
pub fn make_lowerbound(
    horizon: usize,
    rho: f64,
    delta_param: f64,
) -> Result<(InstanceSpec, InstanceSpec)> {
    if horizon == 0 || !horizon.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "horizon {horizon} is not a positive even number"
        )));
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::invalid(format!("rho {rho} outside (0, 1)")));
    }
    if !(delta_param > 0.0 && delta_param * rho <= 1.0) {
        return Err(Error::invalid(format!(
            "delta parameter {delta_param} must be positive with delta*rho <= 1"
        )));
    }
    let half = horizon / 2;
    let build = |phases| InstanceSpec {
        v: SCHEMA_VERSION,
        num_arms: 2,
        num_constraints: 1,
        horizon,
        kind: InstanceKind::AdversarialScripted { phases },
    };
    let a = build(vec![
        phase(1, half, vec![1.0, 0.0], vec![1.0, -rho]),
        phase(half + 1, horizon, vec![0.0, 0.0], vec![-1.0, -rho]),
    ]);
    let b = build(vec![
        phase(1, half, vec![1.0, 0.0], vec![1.0, -rho]),
        phase(
            half + 1,
            horizon,
            vec![1.0, 0.0],
            vec![1.0, -delta_param * rho],
        ),
    ]);
    a.validate()?;
    b.validate()?;
    Ok((a, b))
}

pub fn make_stochastic(
    mean_rewards: Vec<f64>,
    mean_costs: Vec<Vec<f64>>,
    horizon: usize,
) -> Result<InstanceSpec> {
    let k = mean_rewards.len();
    check_len("mean cost rows", k, mean_costs.len())?;
    let m = mean_costs.first().map_or(0, Vec::len);
    if mean_costs.iter().any(|r| r.len() != m) {
        return Err(Error::invalid("mean cost rows have different lengths"));
    }
    let spec = InstanceSpec {
        v: SCHEMA_VERSION,
        num_arms: k,
        num_constraints: m,
        horizon,
        kind: InstanceKind::Stochastic {
            mean_rewards,
            mean_costs: mean_costs.concat(),
            noise: NoiseModel::TwoPoint,
        },
    };
    spec.validate()?;
    Ok(spec)
}

/// Uniform draw from the unit ball in `R^d`.
fn unit_ball<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if norm(&v) <= 1.0 {
            return v;
        }
    }
}

/// Linear contextual instance with `n_contexts` random feature tables drawn from `seed`.
///
/// Means are `f(z, a) = (1 + <z_a, theta_f>) / 2` and `g_i(z, a) = <z_a, theta_g_i>`.
pub fn make_contextual_linear(
    dim: usize,
    num_arms: usize,
    num_contexts: usize,
    theta_f: Vec<f64>,
    theta_g: Vec<Vec<f64>>,
    horizon: usize,
    seed: u64,
) -> Result<InstanceSpec> {
    let mut rng = stream_rng(seed, Stream::Environment);
    let features: Vec<f64> = (0..num_contexts * num_arms)
        .flat_map(|_| unit_ball(&mut rng, dim))
        .collect();
    contextual_linear_with_features(
        dim,
        num_arms,
        num_contexts,
        features,
        theta_f,
        theta_g,
        horizon,
    )
}

pub fn contextual_linear_with_features(
    dim: usize,
    num_arms: usize,
    num_contexts: usize,
    features: Vec<f64>,
    theta_f: Vec<f64>,
    theta_g: Vec<Vec<f64>>,
    horizon: usize,
) -> Result<InstanceSpec> {
    if theta_g.iter().any(|th| th.len() != dim) {
        return Err(Error::invalid("theta_g rows must have length d"));
    }
    let spec = InstanceSpec {
        v: SCHEMA_VERSION,
        num_arms,
        num_constraints: theta_g.len(),
        horizon,
        kind: InstanceKind::ContextualLinear {
            dim,
            num_contexts,
            features,
            theta_f,
            theta_g: theta_g.concat(),
            schedule: ContextSchedule::Iid,
            noise: NoiseModel::TwoPoint,
        },
    };
    spec.validate()?;
    Ok(spec)
}

/// Random parameters with norm at most one, for generated contextual instances.
pub fn random_theta(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, Stream::Context);
    unit_ball(&mut rng, dim)
}
