//! Summary statistics of a finished run against the instance baselines.

use serde::{Deserialize, Serialize};

use crate::env::BaselineReport;
use crate::types::Trace;

/// Which feasibility parameter the multiplier bound `13 m / rho` is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoChoice {
    Adv,
    Stoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rew: f64,
    pub violations: Vec<f64>,
    pub v_max: f64,
    /// `OPT_Adv` for [`RhoChoice::Adv`], `T * OPT_Stoc` for [`RhoChoice::Stoc`].
    pub opt_used: f64,
    /// `T * OPT_Stoc - Rew`.
    pub regret_stoc: f64,
    /// `rho_Adv / (1 + rho_Adv) * OPT_Adv - Rew`.
    pub competitive_gap: f64,
    pub max_dual_l1: f64,
    /// `max_t ||lambda_t||_1 <= 13 m / rho`.
    pub self_bound_ok: bool,
}

impl MetricsReport {
    fn empty(m: usize) -> Self {
        Self {
            rew: 0.0,
            violations: vec![0.0; m],
            v_max: 0.0,
            opt_used: 0.0,
            regret_stoc: 0.0,
            competitive_gap: 0.0,
            max_dual_l1: 0.0,
            self_bound_ok: true,
        }
    }
}

/// `13 m / rho`; infinite when `rho <= 0`, where no bound applies.
pub fn self_bound(m: usize, rho: f64) -> f64 {
    if rho > 0.0 {
        13.0 * m as f64 / rho
    } else {
        f64::INFINITY
    }
}

/// An empty trace yields all zeros: nothing was played, so nothing is owed.
pub fn compute_metrics(
    trace: &Trace,
    baselines: &BaselineReport,
    m: usize,
    rho_choice: RhoChoice,
) -> MetricsReport {
    if trace.is_empty() {
        return MetricsReport::empty(m);
    }
    let t = trace.len() as f64;
    let rew = trace.cum_reward();
    let violations = trace.cum_violations().to_vec();
    let v_max = violations.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let rho = match rho_choice {
        RhoChoice::Adv => baselines.rho_adv,
        RhoChoice::Stoc => baselines.rho_stoc,
    };
    let opt_used = match rho_choice {
        RhoChoice::Adv => baselines.opt_adv,
        RhoChoice::Stoc => t * baselines.opt_stoc,
    };
    let ra = baselines.rho_adv;
    let max_dual_l1 = trace.max_dual_l1();
    MetricsReport {
        rew,
        violations,
        v_max,
        opt_used,
        regret_stoc: t * baselines.opt_stoc - rew,
        competitive_gap: ra / (1.0 + ra) * baselines.opt_adv - rew,
        max_dual_l1,
        self_bound_ok: rho > 0.0 && max_dual_l1 <= self_bound(m, rho),
    }
}
