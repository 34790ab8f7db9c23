//! Benchmarks a run is measured against: best fixed arm, best feasible mixture, and how strictly
//! feasible an instance is.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::instance::{ContextSchedule, InstanceKind, InstanceSpec};
use super::lp::{solve_lp, LinearProgram, Relation};
use super::sampling::ContextualEnv;

const MAX_ROWS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    /// Best cumulative reward of a fixed strategy, constraints ignored.
    pub opt_adv: f64,
    /// Best per-round expected reward among strategies feasible in expectation.
    pub opt_stoc: f64,
    pub rho_adv: f64,
    pub rho_stoc: f64,
    /// Mixture attaining `rho_adv`; for contextual instances one `K`-block per context.
    pub safe_strategy: Vec<f64>,
}

/// `max_r r.x` over cost rows, the worst expected cost of a mixture.
fn worst_cost(rows: &[Vec<f64>], x: &[f64]) -> f64 {
    rows.iter()
        .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `rho = -min_x max_r r.x` over the simplex via the epigraph LP. Returns `(rho, x)`.
///
/// Costs lie in `[-1, 1]`, so the epigraph variable is shifted by one to keep it nonnegative.
pub fn feasibility(rows: &[Vec<f64>], num_arms: usize) -> Result<(f64, Vec<f64>)> {
    let mut rows: Vec<Vec<f64>> = rows.to_vec();
    rows.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    rows.dedup();
    if rows.len() > MAX_ROWS {
        return Err(Error::invalid(format!(
            "{} distinct cost rows exceed the cap of {MAX_ROWS}",
            rows.len()
        )));
    }
    if rows.is_empty() {
        return Err(Error::invalid("no cost rows"));
    }
    let mut objective = vec![0.0; num_arms + 1];
    objective[num_arms] = -1.0;
    let mut lp = LinearProgram::new(objective);
    for r in &rows {
        let mut coeffs = r.clone();
        coeffs.push(-1.0);
        lp.add_row(coeffs, Relation::Le, -1.0)?;
    }
    let mut simplex = vec![1.0; num_arms];
    simplex.push(0.0);
    lp.add_row(simplex, Relation::Eq, 1.0)?;
    let sol = lp.solve()?;
    let mut x = sol.x[..num_arms].to_vec();
    let total: f64 = x.iter().sum();
    x.iter_mut().for_each(|v| *v /= total);
    Ok((-worst_cost(&rows, &x), x))
}

/// Best expected reward subject to every expected cost being nonpositive.
fn constrained_opt(rewards: &[f64], cost_rows: &[Vec<f64>]) -> Result<f64> {
    let b = vec![0.0; cost_rows.len()];
    Ok(solve_lp(rewards, cost_rows, &b)?.value)
}

/// Cost rows `(g_i(a))_a`, one per constraint, from a row-major `K x m` table.
fn constraint_rows(costs: &[f64], k: usize, m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|i| (0..k).map(|a| costs[a * m + i]).collect())
        .collect()
}

pub fn baselines(spec: &InstanceSpec) -> Result<BaselineReport> {
    spec.validate()?;
    let (k, m, t) = (spec.num_arms, spec.num_constraints, spec.horizon);
    let tf = t as f64;
    match &spec.kind {
        InstanceKind::AdversarialScripted { phases } => {
            let mut cum = vec![0.0; k];
            let mut avg_costs = vec![0.0; k * m];
            let mut rows = Vec::new();
            for p in phases {
                let len = (p.end - p.start + 1) as f64;
                for (c, r) in cum.iter_mut().zip(&p.rewards) {
                    *c += len * r;
                }
                for (acc, c) in avg_costs.iter_mut().zip(&p.costs) {
                    *acc += len * c / tf;
                }
                rows.extend(constraint_rows(&p.costs, k, m));
            }
            let opt_adv = cum.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let avg_rewards: Vec<f64> = cum.iter().map(|c| c / tf).collect();
            let avg_rows = constraint_rows(&avg_costs, k, m);
            let (rho_adv, safe_strategy) = feasibility(&rows, k)?;
            let (rho_stoc, _) = feasibility(&avg_rows, k)?;
            Ok(BaselineReport {
                opt_adv,
                opt_stoc: constrained_opt(&avg_rewards, &avg_rows)?,
                rho_adv,
                rho_stoc,
                safe_strategy,
            })
        }
        InstanceKind::Stochastic {
            mean_rewards,
            mean_costs,
            ..
        } => {
            let rows = constraint_rows(mean_costs, k, m);
            let (rho, safe_strategy) = feasibility(&rows, k)?;
            let best = mean_rewards
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            Ok(BaselineReport {
                opt_adv: tf * best,
                opt_stoc: constrained_opt(mean_rewards, &rows)?,
                rho_adv: rho,
                rho_stoc: rho,
                safe_strategy,
            })
        }
        InstanceKind::ContextualLinear {
            num_contexts,
            schedule,
            ..
        } => {
            let env = ContextualEnv::new(spec, 0)?;
            let n = *num_contexts;
            let weights: Vec<f64> = match schedule {
                ContextSchedule::Iid => vec![1.0 / n as f64; n],
                ContextSchedule::Scripted { contexts } => {
                    let mut w = vec![0.0; n];
                    for c in contexts {
                        w[*c] += 1.0 / tf;
                    }
                    w
                }
            };
            let mut opt_adv = 0.0;
            let mut rho_adv = f64::INFINITY;
            let mut safe_strategy = Vec::with_capacity(n * k);
            for (z, w) in weights.iter().enumerate() {
                let best = (0..k)
                    .map(|a| env.mean_reward(z, a))
                    .fold(f64::NEG_INFINITY, f64::max);
                opt_adv += tf * w * best;
                let table: Vec<f64> = (0..k).flat_map(|a| env.mean_costs(z, a).to_vec()).collect();
                let (rho_z, x) = feasibility(&constraint_rows(&table, k, m), k)?;
                if *w > 0.0 {
                    rho_adv = rho_adv.min(rho_z);
                }
                safe_strategy.extend(x);
            }
            // Policies are one mixture per context; variables are laid out context-major.
            let nv = n * k;
            let rewards: Vec<f64> = (0..nv)
                .map(|j| weights[j / k] * env.mean_reward(j / k, j % k))
                .collect();
            let rows: Vec<Vec<f64>> = (0..m)
                .map(|i| {
                    (0..nv)
                        .map(|j| weights[j / k] * env.mean_costs(j / k, j % k)[i])
                        .collect()
                })
                .collect();
            let opt_stoc = policy_lp(&rewards, &rows, n, k, &vec![0.0; m])?.1;
            let rho_stoc = policy_feasibility(&rows, n, k)?;
            Ok(BaselineReport {
                opt_adv,
                opt_stoc,
                rho_adv,
                rho_stoc,
                safe_strategy,
            })
        }
    }
}

/// `maximize c.x` over per-context mixtures subject to `rows.x <= rhs`.
fn policy_lp(
    c: &[f64],
    rows: &[Vec<f64>],
    n: usize,
    k: usize,
    rhs: &[f64],
) -> Result<(Vec<f64>, f64)> {
    let mut lp = LinearProgram::new(c.to_vec());
    for (r, b) in rows.iter().zip(rhs) {
        lp.add_row(r.clone(), Relation::Le, *b)?;
    }
    for z in 0..n {
        let mut block = vec![0.0; n * k];
        block[z * k..(z + 1) * k].iter_mut().for_each(|v| *v = 1.0);
        lp.add_row(block, Relation::Eq, 1.0)?;
    }
    let sol = lp.solve()?;
    let value = c.iter().zip(&sol.x).map(|(a, b)| a * b).sum();
    Ok((sol.x, value))
}

fn policy_feasibility(rows: &[Vec<f64>], n: usize, k: usize) -> Result<f64> {
    let nv = n * k;
    let mut objective = vec![0.0; nv + 1];
    objective[nv] = -1.0;
    let shifted: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| {
            let mut c = r.clone();
            c.push(-1.0);
            c
        })
        .collect();
    let mut lp = LinearProgram::new(objective);
    for r in &shifted {
        lp.add_row(r.clone(), Relation::Le, -1.0)?;
    }
    for z in 0..n {
        let mut block = vec![0.0; nv + 1];
        block[z * k..(z + 1) * k].iter_mut().for_each(|v| *v = 1.0);
        lp.add_row(block, Relation::Eq, 1.0)?;
    }
    let sol = lp.solve()?;
    Ok(-worst_cost(rows, &sol.x[..nv]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::instance::{
        make_contextual_linear, make_example1, make_lowerbound, make_stochastic,
    };
    use proptest::prelude::*;

    #[test]
    fn example1_exact() {
        for (t, rho) in [(9, 0.5), (99, 0.1), (9999, 0.3), (3, 1.0)] {
            let r = baselines(&make_example1(t, rho).unwrap()).unwrap();
            assert_eq!(r.opt_adv, (t / 3) as f64);
            assert_eq!(r.rho_adv, rho);
            assert_eq!(r.safe_strategy, vec![1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn stochastic_two_arm() {
        let spec = make_stochastic(vec![1.0, 0.0], vec![vec![1.0], vec![-1.0]], 10).unwrap();
        let r = baselines(&spec).unwrap();
        assert!((r.opt_stoc - 0.5).abs() < 1e-12);
        assert!((r.rho_stoc - 1.0).abs() < 1e-12);
        assert_eq!(r.opt_adv, 10.0);
    }

    #[test]
    fn acceptance_instance_has_quarter_slack() {
        let spec = make_stochastic(
            vec![0.9, 0.5, 0.3],
            vec![vec![0.5, 0.5], vec![-0.5, 0.0], vec![0.0, -0.5]],
            100,
        )
        .unwrap();
        let r = baselines(&spec).unwrap();
        assert!((r.rho_stoc - 0.25).abs() < 1e-12);
        assert!((r.opt_stoc - 17.0 / 30.0).abs() < 1e-12);
    }

    #[test]
    fn lowerbound_values() {
        let (a, b) = make_lowerbound(30, 0.5, 0.2).unwrap();
        let ra = baselines(&a).unwrap();
        let rb = baselines(&b).unwrap();
        assert_eq!(ra.opt_adv, 15.0);
        assert!((ra.rho_adv - 0.5).abs() < 1e-12);
        assert_eq!(rb.opt_adv, 30.0);
        assert!((rb.rho_adv - 0.1).abs() < 1e-12);
    }

    #[test]
    fn infeasible_instance_errors() {
        let spec = make_stochastic(vec![1.0, 0.0], vec![vec![1.0], vec![0.5]], 10).unwrap();
        assert!(matches!(baselines(&spec), Err(Error::Infeasible(_))));
        // rho itself is still defined, and negative
        let (rho, _) = feasibility(&[vec![1.0, 0.5]], 2).unwrap();
        assert!((rho + 0.5).abs() < 1e-12);
    }

    #[test]
    fn contextual_report_shapes() {
        let spec = make_contextual_linear(
            2,
            3,
            4,
            vec![0.5, 0.5],
            vec![vec![-0.7, 0.0], vec![0.0, 0.0]],
            100,
            11,
        )
        .unwrap();
        match baselines(&spec) {
            Ok(r) => {
                assert_eq!(r.safe_strategy.len(), 12);
                assert!(r.rho_stoc >= r.rho_adv - 1e-12);
                assert!(r.opt_stoc <= r.opt_adv / 100.0 + 1e-12);
            }
            Err(Error::Infeasible(_)) => {}
            Err(e) => panic!("{e}"),
        }
    }

    proptest! {
        #[test]
        fn epigraph_beats_grid(
            rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 1..6),
        ) {
            let (rho, x) = feasibility(&rows, 3).unwrap();
            prop_assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            let steps = 50;
            for i in 0..=steps {
                for j in 0..=(steps - i) {
                    let g = [i as f64 / 50.0, j as f64 / 50.0, (steps - i - j) as f64 / 50.0];
                    prop_assert!(-worst_cost(&rows, &g) <= rho + 1e-9);
                }
            }
        }
    }
}
