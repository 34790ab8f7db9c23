//! Online regression oracles for the contextual primal.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Where a regressed quantity lives; predictions are clipped to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TargetRange {
    /// `[0, 1]`
    Reward,
    /// `[-1, 1]`
    Cost,
}

impl TargetRange {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            TargetRange::Reward => (0.0, 1.0),
            TargetRange::Cost => (-1.0, 1.0),
        }
    }

    pub fn clip(self, y: f64) -> f64 {
        let (lo, hi) = self.bounds();
        y.clamp(lo, hi)
    }
}

/// What an oracle sees of the current context.
#[derive(Debug, Clone, Copy)]
pub struct ContextView<'a> {
    pub index: usize,
    /// One feature vector per action.
    pub features: &'a [Vec<f64>],
}

pub trait RegressionOracle {
    fn predict(&self, ctx: &ContextView<'_>, action: usize) -> f64;
    fn update(&mut self, ctx: &ContextView<'_>, action: usize, y: f64) -> Result<()>;
}

/// A regressor given as a table over (context index, action).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorTable {
    pub num_actions: usize,
    /// Row-major `n_contexts x num_actions`.
    pub values: Vec<f64>,
}

impl RegressorTable {
    pub fn new(num_actions: usize, values: Vec<f64>) -> Result<Self> {
        if num_actions == 0 || !values.len().is_multiple_of(num_actions) {
            return Err(Error::invalid(
                "table size is not a multiple of the action count",
            ));
        }
        Ok(Self {
            num_actions,
            values,
        })
    }

    pub fn constant(num_contexts: usize, num_actions: usize, value: f64) -> Self {
        Self {
            num_actions,
            values: vec![value; num_contexts * num_actions],
        }
    }

    pub fn eval(&self, context: usize, action: usize) -> f64 {
        self.values[context * self.num_actions + action]
    }
}

/// Exponentially weighted average forecaster over a finite class, square loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteClassOracle {
    functions: Vec<RegressorTable>,
    /// `-eta * cumulative loss`, shifted so the maximum is zero.
    log_weights: Vec<f64>,
    pub eta_v: f64,
    pub range: TargetRange,
}

/// Exp-concavity constant of the square loss on a unit-length range.
pub const DEFAULT_ETA_V: f64 = 0.5;

impl FiniteClassOracle {
    pub fn new(functions: Vec<RegressorTable>, range: TargetRange) -> Result<Self> {
        if functions.is_empty() {
            return Err(Error::invalid("finite class must be nonempty"));
        }
        let n = functions.len();
        Ok(Self {
            functions,
            log_weights: vec![0.0; n],
            eta_v: DEFAULT_ETA_V,
            range,
        })
    }

    pub fn with_weights(mut self, weights: &[f64]) -> Result<Self> {
        check_len("class weights", self.functions.len(), weights.len())?;
        if weights.iter().any(|w| !(*w >= 0.0)) || !(weights.iter().sum::<f64>() > 0.0) {
            return Err(Error::invalid(
                "weights must be nonnegative with positive mass",
            ));
        }
        self.log_weights = weights.iter().map(|w| w.ln()).collect();
        self.renormalise();
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn weights(&self) -> Vec<f64> {
        let w: Vec<f64> = self.log_weights.iter().map(|l| l.exp()).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    }

    fn renormalise(&mut self) {
        let max = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        self.log_weights.iter_mut().for_each(|l| *l -= max);
    }

    pub fn predict_at(&self, context: usize, action: usize) -> f64 {
        let p: f64 = self
            .weights()
            .iter()
            .zip(&self.functions)
            .map(|(w, f)| w * f.eval(context, action))
            .sum();
        self.range.clip(p)
    }

    pub fn update_at(&mut self, context: usize, action: usize, y: f64) {
        let eta = self.eta_v;
        for (l, f) in self.log_weights.iter_mut().zip(&self.functions) {
            *l -= eta * (f.eval(context, action) - y).powi(2);
        }
        self.renormalise();
    }
}

impl RegressionOracle for FiniteClassOracle {
    fn predict(&self, ctx: &ContextView<'_>, action: usize) -> f64 {
        self.predict_at(ctx.index, action)
    }

    fn update(&mut self, ctx: &ContextView<'_>, action: usize, y: f64) -> Result<()> {
        self.update_at(ctx.index, action, y);
        Ok(())
    }
}

/// Maps the linear score `<z, theta>` to the regressed quantity: `offset + scale * score`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearLink {
    pub scale: f64,
    pub offset: f64,
}

impl LinearLink {
    pub const IDENTITY: LinearLink = LinearLink {
        scale: 1.0,
        offset: 0.0,
    };
    /// `(1 + score) / 2`, the reward parameterisation of the linear environments.
    pub const HALF_SHIFT: LinearLink = LinearLink {
        scale: 0.5,
        offset: 0.5,
    };
}

/// Online ridge regression in forward (Vovk-Azoury-Warmuth) form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeOracle {
    dim: usize,
    /// Row-major `d x d`, `lambda_reg I + sum x x^T`.
    gram: Vec<f64>,
    moment: Vec<f64>,
    pub lambda_reg: f64,
    pub link: LinearLink,
    pub range: TargetRange,
}

pub const DEFAULT_LAMBDA_REG: f64 = 1.0;

impl RidgeOracle {
    pub fn new(dim: usize, lambda_reg: f64, link: LinearLink, range: TargetRange) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        if !(lambda_reg > 0.0) {
            return Err(Error::invalid("ridge regulariser must be positive"));
        }
        if link.scale == 0.0 {
            return Err(Error::invalid("link scale must be nonzero"));
        }
        let mut gram = vec![0.0; dim * dim];
        for i in 0..dim {
            gram[i * dim + i] = lambda_reg;
        }
        Ok(Self {
            dim,
            gram,
            moment: vec![0.0; dim],
            lambda_reg,
            link,
            range,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gram(&self) -> &[f64] {
        &self.gram
    }

    pub fn moment(&self) -> &[f64] {
        &self.moment
    }

    /// `x^T (G + x x^T)^{-1} b`, mapped through the link and clipped.
    pub fn predict_features(&self, x: &[f64]) -> Result<f64> {
        check_len("ridge feature", self.dim, x.len())?;
        let d = self.dim;
        let mut a = self.gram.clone();
        for i in 0..d {
            for j in 0..d {
                a[i * d + j] += x[i] * x[j];
            }
        }
        let w = cholesky_solve(&a, &self.moment, d)?;
        let score: f64 = x.iter().zip(&w).map(|(xi, wi)| xi * wi).sum();
        Ok(self.range.clip(self.link.offset + self.link.scale * score))
    }

    pub fn update_features(&mut self, x: &[f64], y: f64) -> Result<()> {
        check_len("ridge feature", self.dim, x.len())?;
        let d = self.dim;
        let target = (y - self.link.offset) / self.link.scale;
        for i in 0..d {
            for j in 0..d {
                self.gram[i * d + j] += x[i] * x[j];
            }
            self.moment[i] += target * x[i];
        }
        Ok(())
    }
}

impl RegressionOracle for RidgeOracle {
    fn predict(&self, ctx: &ContextView<'_>, action: usize) -> f64 {
        // dimensions are validated when the environment is built
        self.predict_features(&ctx.features[action])
            .expect("ridge prediction on a well-formed context")
    }

    fn update(&mut self, ctx: &ContextView<'_>, action: usize, y: f64) -> Result<()> {
        self.update_features(&ctx.features[action], y)
    }
}

/// Solves `A w = b` for symmetric positive-definite `A` (row-major, `d x d`).
fn cholesky_solve(a: &[f64], b: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * d + k] * l[j * d + k]).sum();
            if i == j {
                let v = a[i * d + i] - s;
                if !(v > 0.0) {
                    return Err(Error::Internal(
                        "gram matrix is not positive definite".into(),
                    ));
                }
                l[i * d + i] = v.sqrt();
            } else {
                l[i * d + j] = (a[i * d + j] - s) / l[j * d + j];
            }
        }
    }
    let mut y = vec![0.0; d];
    for i in 0..d {
        let s: f64 = (0..i).map(|k| l[i * d + k] * y[k]).sum();
        y[i] = (b[i] - s) / l[i * d + i];
    }
    let mut w = vec![0.0; d];
    for i in (0..d).rev() {
        let s: f64 = (i + 1..d).map(|k| l[k * d + i] * w[k]).sum();
        w[i] = (y[i] - s) / l[i * d + i];
    }
    Ok(w)
}

/// Cumulative squared errors, one slot per oracle (reward first, then each constraint).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OracleErrorLedger {
    /// Against the true mean regressor.
    pub vs_truth: Vec<f64>,
    /// Against the realised label.
    pub vs_label: Vec<f64>,
}

impl OracleErrorLedger {
    pub fn new(num_oracles: usize) -> Self {
        Self {
            vs_truth: vec![0.0; num_oracles],
            vs_label: vec![0.0; num_oracles],
        }
    }

    pub fn record(&mut self, oracle: usize, prediction: f64, truth: f64, label: f64) {
        self.vs_truth[oracle] += (prediction - truth).powi(2);
        self.vs_label[oracle] += (prediction - label).powi(2);
    }

    pub fn reward_error(&self) -> f64 {
        self.vs_truth[0]
    }

    pub fn cost_errors(&self) -> &[f64] {
        &self.vs_truth[1..]
    }
}

/// `err_L <= 2 err_f + 2 M^2 sum_i err_i`, boundary inclusive.
pub fn lagrangian_error_bound_check(
    err_f: f64,
    err_costs: &[f64],
    max_dual_l1: f64,
    err_l: f64,
) -> bool {
    let bound = 2.0 * err_f + 2.0 * max_dual_l1 * max_dual_l1 * err_costs.iter().sum::<f64>();
    err_l <= bound
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn two_point_class() -> FiniteClassOracle {
        FiniteClassOracle::new(
            vec![
                RegressorTable::constant(1, 1, 0.0),
                RegressorTable::constant(1, 1, 1.0),
            ],
            TargetRange::Reward,
        )
        .unwrap()
    }

    #[test]
    fn finite_predict_examples() {
        let o = two_point_class();
        assert_eq!(o.predict_at(0, 0), 0.5);
        let o = two_point_class().with_weights(&[0.0, 1.0]).unwrap();
        assert_eq!(o.predict_at(0, 0), 1.0);
        let o = two_point_class().with_weights(&[0.25, 0.75]).unwrap();
        assert!((o.predict_at(0, 0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn finite_predict_is_clipped() {
        let o = FiniteClassOracle::new(
            vec![RegressorTable::constant(1, 1, 2.0)],
            TargetRange::Reward,
        )
        .unwrap();
        assert_eq!(o.predict_at(0, 0), 1.0);
    }

    #[test]
    fn finite_update_examples() {
        let mut o = two_point_class();
        o.update_at(0, 0, 1.0);
        let w = o.weights();
        assert!((w[0] - 0.377540668798145435).abs() < 1e-15);
        assert!((w[1] - 0.622459331201854565).abs() < 1e-15);

        let mut o = FiniteClassOracle::new(
            vec![
                RegressorTable::constant(1, 1, 0.3),
                RegressorTable::constant(1, 1, 0.3),
            ],
            TargetRange::Reward,
        )
        .unwrap();
        o.update_at(0, 0, 0.3);
        assert_eq!(o.weights(), vec![0.5, 0.5]);
    }

    #[test]
    fn exact_function_dominates_after_fifty_rounds() {
        let n = 4;
        let funcs = (0..n)
            .map(|i| RegressorTable::constant(1, 1, if i == 2 { 1.0 } else { 0.0 }))
            .collect();
        let mut o = FiniteClassOracle::new(funcs, TargetRange::Reward).unwrap();
        for _ in 0..50 {
            o.update_at(0, 0, 1.0);
        }
        assert!(o.weights()[2] >= 1.0 - (-25f64).exp() * (n - 1) as f64);
    }

    #[test]
    fn ridge_examples() {
        let mut r = RidgeOracle::new(1, 1.0, LinearLink::IDENTITY, TargetRange::Cost).unwrap();
        assert_eq!(r.predict_features(&[1.0]).unwrap(), 0.0);
        r.update_features(&[1.0], 1.0).unwrap();
        assert_eq!((r.gram()[0], r.moment()[0]), (2.0, 1.0));
        assert!((r.predict_features(&[1.0]).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        r.update_features(&[1.0], 1.0).unwrap();
        assert_eq!((r.gram()[0], r.moment()[0]), (3.0, 2.0));
        r.update_features(&[1.0], 0.0).unwrap();
        assert_eq!(r.moment()[0], 2.0);

        let mut r = RidgeOracle::new(2, 1.0, LinearLink::IDENTITY, TargetRange::Cost).unwrap();
        r.update_features(&[1.0, 0.0], 0.8).unwrap();
        assert_eq!(r.predict_features(&[0.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn ridge_with_huge_regulariser_predicts_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut r = RidgeOracle::new(3, 1e9, LinearLink::IDENTITY, TargetRange::Cost).unwrap();
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect();
            r.update_features(&x, rng.gen_range(-1.0..1.0)).unwrap();
        }
        assert!(r.predict_features(&[0.5, 0.5, 0.5]).unwrap().abs() < 1e-6);
    }

    #[test]
    fn ridge_half_shift_link_round_trips() {
        let mut r = RidgeOracle::new(1, 1.0, LinearLink::HALF_SHIFT, TargetRange::Reward).unwrap();
        assert_eq!(r.predict_features(&[1.0]).unwrap(), 0.5);
        for _ in 0..10_000 {
            r.update_features(&[1.0], 1.0).unwrap();
        }
        assert!((r.predict_features(&[1.0]).unwrap() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn error_bound_check_examples() {
        assert!(lagrangian_error_bound_check(1.0, &[1.0], 2.0, 9.0));
        assert!(lagrangian_error_bound_check(1.0, &[1.0], 2.0, 10.0));
        assert!(!lagrangian_error_bound_check(1.0, &[1.0], 2.0, 10.5));
    }

    #[test]
    fn ledger_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut ledger = OracleErrorLedger::new(3);
        let mut prev = ledger.clone();
        for _ in 0..1000 {
            for o in 0..3 {
                ledger.record(
                    o,
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
            }
            for o in 0..3 {
                assert!(ledger.vs_truth[o] >= prev.vs_truth[o]);
                assert!(ledger.vs_label[o] >= prev.vs_label[o]);
            }
            prev = ledger.clone();
        }
    }

    proptest! {
        /// Weights stay on the simplex and match `exp(-eta L_f) / sum_g exp(-eta L_g)` computed from
        /// scratch, which in turn implies the best-in-class lower bound.
        #[test]
        fn finite_weights_match_bruteforce(seed in any::<u64>(), n in 2usize..10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (contexts, actions) = (3, 2);
            let funcs: Vec<RegressorTable> = (0..n)
                .map(|_| RegressorTable::new(actions, (0..contexts * actions).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap())
                .collect();
            let mut o = FiniteClassOracle::new(funcs.clone(), TargetRange::Reward).unwrap();
            let mut losses = vec![0.0; n];
            for _ in 0..100 {
                let (z, a, y) = (rng.gen_range(0..contexts), rng.gen_range(0..actions), rng.gen_range(0.0..1.0));
                for (l, f) in losses.iter_mut().zip(&funcs) {
                    *l += (f.eval(z, a) - y).powi(2);
                }
                o.update_at(z, a, y);
                let w = o.weights();
                prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                let min = losses.iter().copied().fold(f64::INFINITY, f64::min);
                let denom: f64 = losses.iter().map(|l| (-0.5 * (l - min)).exp()).sum();
                for (f, wf) in w.iter().enumerate() {
                    let expected = (-0.5 * (losses[f] - min)).exp() / denom;
                    prop_assert!((wf - expected).abs() < 1e-9);
                    let lower = (-0.5 * (losses[f] - min)).exp() / n as f64;
                    prop_assert!(*wf >= lower * (1.0 - 1e-9));
                }
            }
        }
    }
}
