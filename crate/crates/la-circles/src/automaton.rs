//! A finite-action learning automaton as plain data plus pure transition
//! functions: uniform initialization, the linear reward/inaction update,
//! roulette action selection and best-action extraction.
//!
//! The reward/inaction rule for chosen action `r` with reinforcement `beta`
//! and learning rate `theta` is
//!
//! ```text
//! p_r' = p_r + theta * beta * (1 - p_r)
//! p_q' = p_q - theta * beta * p_q        (q != r)
//! ```
//!
//! which preserves the probability sum exactly in real arithmetic. Callers
//! own the random stream: selection takes an externally drawn uniform value,
//! so a whole detection run is reproducible from one seed.

use crate::error::{Error, Result};

/// Probability distribution over a finite action set.
///
/// Entries stay in [0, 1] and sum to 1 within 1e-9. The update never
/// renormalizes; a debug assertion guards the invariant instead of silently
/// correcting it.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    probs: Vec<f64>,
}

impl ProbabilityVector {
    /// Uniform distribution over `n` actions.
    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyActionSet);
        }
        Ok(Self {
            probs: vec![1.0 / n as f64; n],
        })
    }

    /// Wraps an explicit probability vector, validating the invariants.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyActionSet);
        }
        if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidParameter(
                "probability entries must lie in [0, 1]".into(),
            ));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "probabilities sum to {sum}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.probs[index]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    /// Linear reward/inaction transition. `beta = 0` returns the input
    /// unchanged; a positive reward moves mass toward the chosen action.
    pub fn lri_update(
        &self,
        chosen: usize,
        beta: Reinforcement,
        theta: f64,
    ) -> Result<ProbabilityVector> {
        if !(0.0 < theta && theta < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "learning rate theta must lie in (0, 1), got {theta}"
            )));
        }
        if chosen >= self.probs.len() {
            return Err(Error::IndexOutOfRange {
                index: chosen,
                len: self.probs.len(),
            });
        }
        let tb = theta * beta.value();
        let probs: Vec<f64> = self
            .probs
            .iter()
            .enumerate()
            .map(|(q, &p)| if q == chosen { p + tb * (1.0 - p) } else { p - tb * p })
            .collect();
        debug_assert!(
            (probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12,
            "reward/inaction update drifted off the simplex"
        );
        Ok(ProbabilityVector { probs })
    }

    /// Roulette selection: smallest index whose cumulative probability
    /// strictly exceeds `z`, for `z` in [0, 1).
    pub fn select_action(&self, z: f64) -> usize {
        let mut cum = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            cum += p;
            if cum > z {
                return i;
            }
        }
        // Rounding can leave the final cumulative sum a hair under z.
        self.probs.len() - 1
    }

    /// Index of the maximum entry; ties break to the lowest index.
    pub fn best_action(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate().skip(1) {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }
}

/// Environment feedback in [0, 1]; 1 is the maximum reward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reinforcement(f64);

impl Reinforcement {
    pub fn new(beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "reinforcement must lie in [0, 1], got {beta}"
            )));
        }
        Ok(Self(beta))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}
