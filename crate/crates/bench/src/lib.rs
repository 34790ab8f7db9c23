//! Fixtures shared by the benchmarks.

use weakadapt_core::env::InstanceSpec;
use weakadapt_core::harness::{builtin_instance, BuiltinParams};
use weakadapt_core::FrameworkConfig;

pub fn instance(name: &str, horizon: usize) -> InstanceSpec {
    builtin_instance(name, horizon, &BuiltinParams::default()).expect("builtin instance")
}

pub fn config(spec: &InstanceSpec, seed: u64) -> FrameworkConfig {
    FrameworkConfig::new(
        spec.horizon,
        spec.num_constraints,
        spec.num_arms,
        0.05,
        seed,
    )
}

/// Cost rows of a random-looking but fixed epigraph problem with `rows` constraints over `k` arms.
pub fn lp_rows(rows: usize, k: usize) -> Vec<Vec<f64>> {
    (0..rows)
        .map(|r| {
            (0..k)
                .map(|a| (((r * 31 + a * 17) % 23) as f64 / 11.0) - 1.0)
                .collect()
        })
        .collect()
}
