//! Test-only oracles, kept independent of the implementation paths they
//! check: no prefix sharing and no tree machinery, just raw sequence
//! enumeration over the forward model.

use std::collections::HashSet;

use empuct::{ActionId, CallCounter, ForwardModel};

/// Brute-force n-step empowerment. For each first action, enumerates every
/// suffix sequence of length `n` (an odometer over the action set) and
/// applies the full sequence from the root, counting distinct terminal
/// sensors. Assumes a state-independent action count, which holds for the
/// block world.
pub fn sequence_enumeration_counts<M: ForwardModel>(world: &M, n: u32) -> Vec<(ActionId, u64)> {
    let mut counter = CallCounter::unlimited();
    let actions = world.actions();
    let arity = actions.len();
    let mut out = Vec::new();
    for &first in &actions {
        let mut seen = HashSet::new();
        let mut digits = vec![0usize; n as usize];
        loop {
            let mut state = world.apply(first, &mut counter).expect("unlimited");
            for &d in &digits {
                let step_actions = state.actions();
                state = state
                    .apply(step_actions[d], &mut counter)
                    .expect("unlimited");
            }
            seen.insert(state.sensor());

            let mut i = 0;
            while i < digits.len() {
                digits[i] += 1;
                if digits[i] < arity {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
            if i == digits.len() {
                break;
            }
        }
        out.push((first, seen.len() as u64));
    }
    out
}
