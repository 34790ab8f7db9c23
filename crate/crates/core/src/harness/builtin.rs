//! Named instances usable from the command line and sweep files.

use serde::{Deserialize, Serialize};

use crate::env::{
    make_contextual_linear, make_example1, make_lowerbound, make_stochastic, random_theta,
    InstanceKind, InstanceSpec, Phase, SCHEMA_VERSION,
};
use crate::error::{Error, Result};

pub const BUILTIN_NAMES: [&str; 6] = [
    "example1",
    "lowerbound-a",
    "lowerbound-b",
    "stoch-k3m2",
    "twophase-k4",
    "contextual-d4k5m2",
];

/// Knobs shared by the builtin families; each family reads the ones it needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuiltinParams {
    pub rho: f64,
    pub delta_param: f64,
    /// Seed for generated features and parameters, independent of the run seed.
    pub instance_seed: u64,
}

impl Default for BuiltinParams {
    fn default() -> Self {
        Self {
            rho: 0.5,
            delta_param: 0.2,
            instance_seed: 7,
        }
    }
}

/// Stochastic instance with `K = 3`, `m = 2`, slack exactly 1/4 and a binding constrained
/// optimum of 17/30 per round.
pub fn stoch_k3m2(horizon: usize) -> Result<InstanceSpec> {
    make_stochastic(
        vec![0.9, 0.5, 0.3],
        vec![vec![0.5, 0.5], vec![-0.5, 0.0], vec![0.0, -0.5]],
        horizon,
    )
}

/// Four arms, one dummy constraint that is always zero; the best arm changes at `T / 2`.
pub fn twophase_k4(horizon: usize) -> Result<InstanceSpec> {
    if horizon < 2 || !horizon.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "horizon {horizon} is not an even number >= 2"
        )));
    }
    let half = horizon / 2;
    let spec = InstanceSpec {
        v: SCHEMA_VERSION,
        num_arms: 4,
        num_constraints: 1,
        horizon,
        kind: InstanceKind::AdversarialScripted {
            phases: vec![
                Phase {
                    start: 1,
                    end: half,
                    rewards: vec![0.8, 0.6, 0.5, 0.4],
                    costs: vec![0.0; 4],
                },
                Phase {
                    start: half + 1,
                    end: horizon,
                    rewards: vec![0.4, 0.6, 0.5, 0.8],
                    costs: vec![0.0; 4],
                },
            ],
        },
    };
    spec.validate()?;
    Ok(spec)
}

pub fn builtin_instance(
    name: &str,
    horizon: usize,
    params: &BuiltinParams,
) -> Result<InstanceSpec> {
    match name {
        "example1" => make_example1(horizon, params.rho),
        "lowerbound-a" => Ok(make_lowerbound(horizon, params.rho, params.delta_param)?.0),
        "lowerbound-b" => Ok(make_lowerbound(horizon, params.rho, params.delta_param)?.1),
        "stoch-k3m2" => stoch_k3m2(horizon),
        "twophase-k4" => twophase_k4(horizon),
        "contextual-d4k5m2" => {
            let s = params.instance_seed;
            make_contextual_linear(
                4,
                5,
                16,
                random_theta(4, s),
                vec![
                    random_theta(4, s.wrapping_add(1)),
                    random_theta(4, s.wrapping_add(2)),
                ],
                horizon,
                s,
            )
        }
        other => Err(Error::invalid(format!(
            "unknown builtin instance {other:?}; known: {}",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_builds() {
        for name in BUILTIN_NAMES {
            let spec = builtin_instance(name, 600, &BuiltinParams::default()).unwrap();
            assert_eq!(spec.horizon, 600);
        }
        assert!(builtin_instance("nope", 600, &BuiltinParams::default()).is_err());
    }
}
