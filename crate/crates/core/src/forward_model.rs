//! The deterministic forward-model contract shared by every estimator.
//!
//! A model is a value-semantic world state: duplicating a state and applying
//! the same action sequence to both copies must yield identical sensor
//! trajectories. "Failed" game actions return an unchanged world rather than
//! erroring, so `apply` only fails when the forward-call budget runs out.
//!
//! Forward calls are the computational currency of every experiment. Each
//! `apply` bills exactly one call against a [`CallCounter`]; state duplication,
//! sensor projection, and action enumeration are free.

use std::fmt;
use std::hash::Hash;

use serde::Serialize;
use thiserror::Error;

/// Index into a state's stable action ordering.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
#[serde(transparent)]
pub struct ActionId(pub usize);

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Raised when a transition would exceed the forward-call budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("forward-call budget of {budget} exhausted")]
pub struct BudgetExhausted {
    /// The budget that was hit.
    pub budget: u64,
}

/// Counts forward-model calls, optionally against a hard budget.
///
/// `used` increments exactly once per transition application. When a budget
/// is set, `charge` refuses the call that would exceed it, so `used` never
/// passes the budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallCounter {
    used: u64,
    budget: Option<u64>,
}

impl CallCounter {
    /// Counter with no ceiling; only accounting.
    pub fn unlimited() -> Self {
        CallCounter {
            used: 0,
            budget: None,
        }
    }

    /// Counter that refuses calls past `budget`.
    pub fn with_budget(budget: u64) -> Self {
        CallCounter {
            used: 0,
            budget: Some(budget),
        }
    }

    pub fn used(&self) -> u64 {
        self.used
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    /// Calls left before the budget, or `None` when unlimited.
    pub fn remaining(&self) -> Option<u64> {
        self.budget.map(|b| b - self.used)
    }

    /// True when `calls` more transitions fit under the budget.
    pub fn can_afford(&self, calls: u64) -> bool {
        match self.budget {
            None => true,
            Some(b) => self.used + calls <= b,
        }
    }

    /// Bill one forward call. Fails without incrementing if the budget is
    /// already spent.
    pub fn charge(&mut self) -> Result<(), BudgetExhausted> {
        if let Some(b) = self.budget {
            if self.used == b {
                return Err(BudgetExhausted { budget: b });
            }
        }
        self.used += 1;
        Ok(())
    }
}

/// A discrete deterministic forward model with a sensor projection.
///
/// Implementations are plain values: cloning is the only sharing mechanism,
/// and a clone plus an action sequence always reproduces the same successor
/// states (bit-for-bit on the sensor projection).
pub trait ForwardModel: Clone {
    /// Hashable projection of the state; two states with equal sensors
    /// contribute one element to a reachability set.
    type Sensor: Clone + Eq + Hash + Ord + fmt::Debug;

    /// All actions applicable in this state, in a stable documented order.
    /// Never empty; "impossible" actions are no-ops under `apply`.
    fn actions(&self) -> Vec<ActionId>;

    /// Apply `action`, billing one forward call. The input state is
    /// untouched; the successor is returned by value.
    fn apply(&self, action: ActionId, counter: &mut CallCounter) -> Result<Self, BudgetExhausted>;

    /// Sensor projection. Pure; consumes no forward call.
    fn sensor(&self) -> Self::Sensor;
}
