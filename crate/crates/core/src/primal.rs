use rand::RngCore;

use crate::error::{Error, Result};

/// A bandit-feedback primal player over `K` arms.
///
/// `act` must not look at the current multiplier: it is called before the dual decision of the
/// round is revealed, and the multiplier only reaches the learner through `update`.
pub trait PrimalLearner {
    fn num_arms(&self) -> usize;

    /// Draws an arm; returns it with the probability it had.
    fn act(&mut self, rng: &mut dyn RngCore) -> Result<(usize, f64)>;

    /// Feeds back the utility of the arm played this round.
    fn update(&mut self, arm: usize, prob: f64, utility: f64) -> Result<()>;
}

/// Plays a fixed action sequence and ignores feedback.
#[derive(Debug, Clone)]
pub struct ScriptedPrimal {
    num_arms: usize,
    actions: Vec<usize>,
    next: usize,
}

impl ScriptedPrimal {
    pub fn new(num_arms: usize, actions: Vec<usize>) -> Result<Self> {
        if let Some(a) = actions.iter().find(|a| **a >= num_arms) {
            return Err(Error::invalid(format!("scripted action {a} out of range")));
        }
        Ok(Self {
            num_arms,
            actions,
            next: 0,
        })
    }
}

impl PrimalLearner for ScriptedPrimal {
    fn num_arms(&self) -> usize {
        self.num_arms
    }

    fn act(&mut self, _rng: &mut dyn RngCore) -> Result<(usize, f64)> {
        let a = *self
            .actions
            .get(self.next)
            .ok_or_else(|| Error::invalid("scripted primal ran out of actions"))?;
        self.next += 1;
        Ok((a, 1.0))
    }

    fn update(&mut self, _arm: usize, _prob: f64, _utility: f64) -> Result<()> {
        Ok(())
    }
}
