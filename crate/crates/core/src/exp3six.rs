//! EXP3 with implicit-exploration estimates and fixed-share mixing.
//!
//! Learning rate, IX parameter and mixing rate depend on `K`, `T` only. Nothing here reads the
//! range of the utilities it is fed, which is what makes the regret scale with `L^2` rather than
//! requiring `L` up front.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primal::PrimalLearner;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exp3SixState {
    log_weights: Vec<f64>,
    pub eta_exp: f64,
    pub gamma_ix: f64,
    pub sigma_share: f64,
    /// Losses are `loss_shift - utility`; may be negative.
    pub loss_shift: f64,
}

/// Implicit-exploration estimate of the chosen arm's loss.
pub fn ix_estimate(loss: f64, prob: f64, gamma: f64) -> f64 {
    loss / (prob + gamma)
}

fn softmax(log_weights: &[f64]) -> Vec<f64> {
    let max = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_weights.iter().map(|l| (l - max).exp()).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

impl Exp3SixState {
    /// Uniform weights, `eta = sqrt(ln K / (K T))`, `gamma = eta / 2`, `sigma = 1 / T`.
    pub fn new(num_arms: usize, horizon: usize) -> Result<Self> {
        if num_arms < 2 {
            return Err(Error::invalid("EXP3-SIX needs at least two arms"));
        }
        if horizon < 1 {
            return Err(Error::invalid("horizon must be at least 1"));
        }
        let k = num_arms as f64;
        let eta = (k.ln() / (k * horizon as f64)).sqrt();
        Ok(Self {
            log_weights: vec![0.0; num_arms],
            eta_exp: eta,
            gamma_ix: eta / 2.0,
            sigma_share: 1.0 / horizon as f64,
            loss_shift: DEFAULT_LOSS_SHIFT,
        })
    }

    /// Explicit parameters, mostly for tests and ablations.
    pub fn with_params(num_arms: usize, eta: f64, gamma: f64, sigma: f64) -> Result<Self> {
        if num_arms < 2 {
            return Err(Error::invalid("EXP3-SIX needs at least two arms"));
        }
        if !(eta > 0.0) || !(gamma > 0.0) || !(0.0..1.0).contains(&sigma) {
            return Err(Error::invalid(format!(
                "need eta > 0, gamma > 0, sigma in [0, 1); got {eta}, {gamma}, {sigma}"
            )));
        }
        Ok(Self {
            log_weights: vec![0.0; num_arms],
            eta_exp: eta,
            gamma_ix: gamma,
            sigma_share: sigma,
            loss_shift: DEFAULT_LOSS_SHIFT,
        })
    }

    pub fn with_loss_shift(mut self, shift: f64) -> Self {
        self.loss_shift = shift;
        self
    }

    pub fn from_log_weights(
        log_weights: Vec<f64>,
        eta: f64,
        gamma: f64,
        sigma: f64,
    ) -> Result<Self> {
        let mut s = Self::with_params(log_weights.len(), eta, gamma, sigma)?;
        s.log_weights = log_weights;
        Ok(s)
    }

    pub fn num_arms(&self) -> usize {
        self.log_weights.len()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn probabilities(&self) -> Vec<f64> {
        softmax(&self.log_weights)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, f64) {
        let p = self.probabilities();
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (a, pa) in p.iter().enumerate() {
            acc += pa;
            if u < acc {
                return (a, *pa);
            }
        }
        // u landed in the rounding gap above the last cumulative sum
        let last = p.iter().rposition(|x| *x > 0.0).unwrap_or(p.len() - 1);
        (last, p[last])
    }

    pub fn update_with(&mut self, arm: usize, prob: f64, utility: f64) -> Result<()> {
        if arm >= self.num_arms() {
            return Err(Error::invalid(format!("arm {arm} out of range")));
        }
        if !(prob > 0.0 && prob <= 1.0) {
            return Err(Error::invalid(format!("probability {prob} outside (0, 1]")));
        }
        if !utility.is_finite() {
            return Err(Error::invalid("utility must be finite"));
        }
        let loss = self.loss_shift - utility;
        self.log_weights[arm] -= self.eta_exp * ix_estimate(loss, prob, self.gamma_ix);
        self.mix();
        Ok(())
    }

    /// Fixed share in weight space, then renormalise so the largest log-weight is zero.
    fn mix(&mut self) {
        let max = self
            .log_weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if self.sigma_share == 0.0 {
            self.log_weights.iter_mut().for_each(|l| *l -= max);
            return;
        }
        let k = self.num_arms() as f64;
        let w: Vec<f64> = self.log_weights.iter().map(|l| (l - max).exp()).collect();
        let total: f64 = w.iter().sum();
        let floor = self.sigma_share * total / k;
        for (l, wi) in self.log_weights.iter_mut().zip(&w) {
            *l = ((1.0 - self.sigma_share) * wi + floor).ln();
        }
    }
}

/// Utility that maps to zero loss. Losses are `-utility` and may be negative; no shift is
/// derived from observed utilities.
pub const DEFAULT_LOSS_SHIFT: f64 = 0.0;

impl PrimalLearner for Exp3SixState {
    fn num_arms(&self) -> usize {
        self.log_weights.len()
    }

    fn act(&mut self, rng: &mut dyn RngCore) -> Result<(usize, f64)> {
        Ok(self.sample(rng))
    }

    fn update(&mut self, arm: usize, prob: f64, utility: f64) -> Result<()> {
        self.update_with(arm, prob, utility)
    }
}
