//! Deterministic n-step empowerment over a forward model.
//!
//! In a deterministic model, empowerment reduces to counting the distinct
//! sensor states reachable by action sequences of a given length; the value
//! in bits is the base-2 log of that count. Counts are the stored currency
//! everywhere (argmax-invariant, no float comparisons); the log is applied
//! only at presentation.
//!
//! Two estimators live here: the exhaustive depth-first baseline, which
//! shares prefix transitions so each tree edge is applied exactly once, and
//! the `basic` estimator, which samples whole random action sequences from
//! the root with no sharing.

use std::collections::HashSet;

use rand::Rng;

use crate::forward_model::{ActionId, BudgetExhausted, CallCounter, ForwardModel};

/// Per-first-action reachable-state counts plus forward-call accounting.
///
/// One entry per action of the root state, in the root's action order.
/// Exhaustive reports have every count >= 1 (each first action reaches at
/// least its own endpoint); sampled reports carry 0 for first actions that
/// were never drawn, and degenerate reports (budget too small for a single
/// sequence or rollout) carry all zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpowermentReport {
    per_action: Vec<(ActionId, u64)>,
    calls_used: u64,
    horizon: u32,
    degenerate: bool,
}

impl EmpowermentReport {
    pub(crate) fn new(
        per_action: Vec<(ActionId, u64)>,
        calls_used: u64,
        horizon: u32,
        degenerate: bool,
    ) -> Self {
        EmpowermentReport {
            per_action,
            calls_used,
            horizon,
            degenerate,
        }
    }

    /// `(action, reachable-state count)` pairs in root action order.
    pub fn entries(&self) -> &[(ActionId, u64)] {
        &self.per_action
    }

    pub fn count(&self, action: ActionId) -> Option<u64> {
        self.per_action
            .iter()
            .find(|(a, _)| *a == action)
            .map(|(_, c)| *c)
    }

    /// Empowerment in bits: log2 of the count. Zero counts give -inf.
    pub fn bits(&self, action: ActionId) -> Option<f64> {
        self.count(action).map(|c| (c as f64).log2())
    }

    /// The action with the largest count; ties go to the lowest action id.
    pub fn best_action(&self) -> ActionId {
        self.best().0
    }

    pub fn best(&self) -> (ActionId, u64) {
        let mut best = self.per_action[0];
        for &(a, c) in &self.per_action[1..] {
            if c > best.1 || (c == best.1 && a < best.0) {
                best = (a, c);
            }
        }
        best
    }

    pub fn calls_used(&self) -> u64 {
        self.calls_used
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    /// True when the budget could not fund a single sequence or rollout and
    /// the chosen action fell back to a uniform random draw.
    pub fn degenerate(&self) -> bool {
        self.degenerate
    }
}

/// Exact n-step empowerment per first action, by depth-first search.
///
/// For each first action `a`, counts the distinct sensors of states reached
/// from `apply(world, a)` by exactly `n` further actions. Prefixes are
/// shared: each edge of the (n+1)-level action tree is applied once, so the
/// total cost is `12 + 12^2 + ... + 12^(n+1)` in the block world. No
/// transposition pruning is applied.
pub fn exhaustive_empowerment<M: ForwardModel>(
    world: &M,
    n: u32,
    counter: &mut CallCounter,
) -> Result<EmpowermentReport, BudgetExhausted> {
    let start = counter.used();
    let mut per_action = Vec::new();
    for action in world.actions() {
        let successor = world.apply(action, counter)?;
        let mut reached = HashSet::new();
        collect_endpoints(&successor, n, counter, &mut reached)?;
        per_action.push((action, reached.len() as u64));
    }
    Ok(EmpowermentReport::new(
        per_action,
        counter.used() - start,
        n,
        false,
    ))
}

fn collect_endpoints<M: ForwardModel>(
    world: &M,
    depth_left: u32,
    counter: &mut CallCounter,
    reached: &mut HashSet<M::Sensor>,
) -> Result<(), BudgetExhausted> {
    if depth_left == 0 {
        reached.insert(world.sensor());
        return Ok(());
    }
    for action in world.actions() {
        let successor = world.apply(action, counter)?;
        collect_endpoints(&successor, depth_left - 1, counter, reached)?;
    }
    Ok(())
}

/// The plain random-sampling estimator.
///
/// Draws uniformly random (n+1)-length action sequences, applies each from
/// the root (every application billed, no prefix sharing), and credits the
/// terminal sensor to the sequence's first action. Stops when the remaining
/// budget cannot fund another full sequence. Returns the argmax action and
/// the report; with a budget below n+1 calls the report is degenerate and
/// the action is a uniform random draw.
pub fn basic_sampling_action<M: ForwardModel>(
    world: &M,
    n: u32,
    counter: &mut CallCounter,
    rng: &mut impl Rng,
) -> (ActionId, EmpowermentReport) {
    let start = counter.used();
    let actions = world.actions();
    let seq_len = n as u64 + 1;

    if !counter.can_afford(seq_len) {
        let fallback = actions[rng.random_range(0..actions.len())];
        let per_action = actions.iter().map(|&a| (a, 0)).collect();
        return (fallback, EmpowermentReport::new(per_action, 0, n, true));
    }

    let mut reached: Vec<HashSet<M::Sensor>> = actions.iter().map(|_| HashSet::new()).collect();
    while counter.can_afford(seq_len) {
        let first_idx = rng.random_range(0..actions.len());
        let mut state = world
            .apply(actions[first_idx], counter)
            .expect("budget checked before sequence");
        for _ in 0..n {
            let step = state.actions();
            let action = step[rng.random_range(0..step.len())];
            state = state
                .apply(action, counter)
                .expect("budget checked before sequence");
        }
        reached[first_idx].insert(state.sensor());
    }

    let per_action: Vec<(ActionId, u64)> = actions
        .iter()
        .zip(&reached)
        .map(|(&a, set)| (a, set.len() as u64))
        .collect();
    let report = EmpowermentReport::new(per_action, counter.used() - start, n, false);
    (report.best_action(), report)
}
