//! Budgeted UCT tree search for the most-empowered first action.
//!
//! The tree spans `horizon_n + 1` action levels: the first level creates the
//! successor states being compared, the remaining `horizon_n` levels realise
//! the n-step reachability sets. Each rollout descends from the root,
//! expanding a random untried child where one exists and otherwise following
//! UCT selection, then terminates with the branching expansion; every sensor
//! token found propagates up the parent chain into the reachability sets.
//! The final answer is always the root child with the largest reachability
//! set, never the one with the best UCT score.
//!
//! Three toggles modify sampling:
//!
//! * **novelty**: a child is credited (in the UCT numerator) for each token
//!   its parent had not seen at insertion time;
//! * **aggregated**: every expansion also inserts the intermediate sensor
//!   token at the new child, so sequences that pass through many distinct
//!   states score better than sequences that idle;
//! * **branch_depth k**: guided descent stops `k` levels early and the last
//!   `k` levels are expanded exhaustively depth-first.
//!
//! Budgeting: every edge traversal bills one forward call, including
//! re-traversal of already-expanded edges during selection (successor states
//! are not cached by default; see [`SearchConfig::cache_successors`]). A
//! rollout starts only while the remaining budget covers its full cost, so
//! the counter never passes the budget.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::empowerment::EmpowermentReport;
use crate::forward_model::{ActionId, BudgetExhausted, CallCounter, ForwardModel};

/// Knobs for one search. `budget` is in forward calls; `seed` fixes the
/// expansion order, making runs bit-reproducible.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchConfig {
    /// Steps of empowerment; the tree is `horizon_n + 1` levels deep.
    pub horizon_n: u32,
    /// Credit children for tokens new to their parent during selection.
    pub novelty: bool,
    /// Insert intermediate sensor tokens at every expansion.
    pub aggregated: bool,
    /// Levels expanded exhaustively at the end of each rollout; 0 disables.
    pub branch_depth: u32,
    /// Exploration coefficient of the UCT term.
    pub exploration_c: f64,
    /// Forward-call budget for the whole decision.
    pub budget: u64,
    /// RNG seed for untried-child draws and the degenerate fallback.
    pub seed: u64,
    /// Cache successor states on nodes so selection re-traversal is free.
    /// Off by default: the reference accounting re-bills every edge.
    pub cache_successors: bool,
}

impl SearchConfig {
    pub fn new(horizon_n: u32, budget: u64, seed: u64) -> SearchConfig {
        SearchConfig {
            horizon_n,
            novelty: false,
            aggregated: false,
            branch_depth: 0,
            exploration_c: 0.01,
            budget,
            seed,
            cache_successors: false,
        }
    }

    pub fn with_novelty(mut self, on: bool) -> SearchConfig {
        self.novelty = on;
        self
    }

    pub fn with_aggregated(mut self, on: bool) -> SearchConfig {
        self.aggregated = on;
        self
    }

    pub fn with_branch_depth(mut self, k: u32) -> SearchConfig {
        self.branch_depth = k;
        self
    }

    /// Tree depth in action levels: `horizon_n + 1`.
    pub fn horizon(&self) -> u32 {
        self.horizon_n + 1
    }

    /// Depth of the guided descent phase: `horizon() - branch_depth`.
    pub fn guided_depth(&self) -> u32 {
        self.horizon() - self.branch_depth
    }

    fn validate(&self) {
        assert!(
            self.branch_depth < self.horizon(),
            "branch_depth must be below horizon_n + 1"
        );
        assert!(self.exploration_c > 0.0, "exploration_c must be positive");
    }

    /// Exact forward-call cost of one rollout for a model with `arity`
    /// actions per state: one call per guided descent level plus the full
    /// branching expansion (`arity + arity^2 + ... + arity^k`).
    pub fn rollout_cost(&self, arity: u64) -> u64 {
        let branch: u64 = (1..=self.branch_depth).map(|i| arity.pow(i)).sum();
        self.guided_depth() as u64 + branch
    }
}

/// Eq.-2 style selection score.
///
/// `(states + unique_if_novelty) / visits + c * sqrt(ln(root_visits) / visits)`
/// with the natural logarithm. Callers guarantee `visits >= 1`.
pub fn uct_value(
    states: u64,
    unique: u64,
    visits: u64,
    root_visits: u64,
    novelty: bool,
    exploration_c: f64,
) -> f64 {
    debug_assert!(visits >= 1 && root_visits >= 1);
    let numerator = states + if novelty { unique } else { 0 };
    numerator as f64 / visits as f64
        + exploration_c * ((root_visits as f64).ln() / visits as f64).sqrt()
}

/// Statistics of one root child, for dumps and assertions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootChildStat {
    pub action: ActionId,
    pub visits: u64,
    pub states: u64,
    pub unique: u64,
}

/// Outcome of one decision: the chosen action, the per-first-action report,
/// and the root-child statistics (sorted by action id).
#[derive(Debug, Clone)]
pub struct SearchResult {
    pub action: ActionId,
    pub report: EmpowermentReport,
    pub root_children: Vec<RootChildStat>,
}

struct Node<M: ForwardModel> {
    action: Option<ActionId>,
    parent: Option<usize>,
    children: Vec<usize>,
    visits: u64,
    states: HashSet<M::Sensor>,
    unique: u64,
    depth: u32,
    cached_state: Option<M>,
}

impl<M: ForwardModel> Node<M> {
    fn new(action: Option<ActionId>, parent: Option<usize>, depth: u32) -> Node<M> {
        Node {
            action,
            parent,
            children: Vec::new(),
            visits: 0,
            states: HashSet::new(),
            unique: 0,
            depth,
            cached_state: None,
        }
    }
}

const ROOT: usize = 0;

struct Search<'c, M: ForwardModel> {
    config: &'c SearchConfig,
    nodes: Vec<Node<M>>,
    counter: CallCounter,
    rng: ChaCha8Rng,
    rollouts: u64,
}

/// Run one budgeted decision and return the root child with the largest
/// reachability set (ties to the lowest action id).
///
/// When the budget cannot fund a single rollout the search degenerates to a
/// uniform random action with an all-zero report flagged degenerate.
pub fn best_action<M: ForwardModel>(world: &M, config: &SearchConfig) -> SearchResult {
    config.validate();
    let mut search = Search {
        config,
        nodes: vec![Node::new(None, None, 0)],
        counter: CallCounter::with_budget(config.budget),
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        rollouts: 0,
    };

    let root_actions = world.actions();
    let cost = config.rollout_cost(root_actions.len() as u64);

    if !search.counter.can_afford(cost) {
        let action = root_actions[search.rng.random_range(0..root_actions.len())];
        let per_action = root_actions.iter().map(|&a| (a, 0)).collect();
        return SearchResult {
            action,
            report: EmpowermentReport::new(per_action, 0, config.horizon_n, true),
            root_children: Vec::new(),
        };
    }

    while search.counter.can_afford(cost) {
        // a mid-rollout exhaustion (possible only for models whose action
        // count varies by state) aborts the rollout; propagated tokens stay
        if search.rollout(world).is_err() {
            break;
        }
        search.rollouts += 1;
    }

    search.debug_validate();
    search.into_result(&root_actions)
}

impl<M: ForwardModel> Search<'_, M> {
    fn rollout(&mut self, world: &M) -> Result<(), BudgetExhausted> {
        let guided = self.config.guided_depth();
        let mut node = ROOT;
        let mut state = world.clone();
        let mut depth = 0u32;
        while depth < guided {
            self.nodes[node].visits += 1;
            depth += 1;
            if self.has_unexpanded_children(node, &state) {
                let action = self.random_unexpanded_action(node, &state);
                state = state.apply(action, &mut self.counter)?;
                let child = self.alloc(Some(action), node, depth);
                self.nodes[node].children.push(child);
                if self.config.cache_successors {
                    self.nodes[child].cached_state = Some(state.clone());
                }
                if self.config.aggregated {
                    self.add_state(child, state.sensor());
                }
                node = child;
            } else {
                let child = self.best_child(node);
                let action = self.nodes[child]
                    .action
                    .expect("non-root child has an action");
                state = match self.nodes[child].cached_state.clone() {
                    Some(cached) => cached,
                    None => state.apply(action, &mut self.counter)?,
                };
                node = child;
            }
        }
        self.branch(node, &state, self.config.branch_depth)
    }

    fn alloc(&mut self, action: Option<ActionId>, parent: usize, depth: u32) -> usize {
        self.nodes.push(Node::new(action, Some(parent), depth));
        self.nodes.len() - 1
    }

    fn has_unexpanded_children(&self, node: usize, state: &M) -> bool {
        self.nodes[node].children.len() < state.actions().len()
    }

    /// Uniform draw over the actions of `state` not yet leading to a child.
    fn random_unexpanded_action(&mut self, node: usize, state: &M) -> ActionId {
        let mut candidates = state.actions();
        candidates.retain(|a| {
            !self.nodes[node]
                .children
                .iter()
                .any(|&c| self.nodes[c].action == Some(*a))
        });
        debug_assert!(!candidates.is_empty());
        candidates[self.rng.random_range(0..candidates.len())]
    }

    /// Insert `sensor` at `node` and walk it up the parent chain, stopping
    /// at the first ancestor that already holds it. With novelty on, a node
    /// whose parent lacks the token at insertion time gets a `unique` credit
    /// (never decremented; it records historical novelty).
    fn add_state(&mut self, node: usize, sensor: M::Sensor) {
        let mut current = Some(node);
        while let Some(idx) = current {
            if self.nodes[idx].states.contains(&sensor) {
                break;
            }
            self.nodes[idx].states.insert(sensor.clone());
            if self.config.novelty {
                if let Some(parent) = self.nodes[idx].parent {
                    if !self.nodes[parent].states.contains(&sensor) {
                        self.nodes[idx].unique += 1;
                    }
                }
            }
            current = self.nodes[idx].parent;
        }
    }

    /// The child maximising the UCT score, ties to the lowest action id.
    ///
    /// Children whose visit count is still zero (the semi-leaf frontier is
    /// never visit-incremented) score infinity, so the tie-break decides
    /// among them and `uct_value` is only evaluated at visits >= 1.
    fn best_child(&self, node: usize) -> usize {
        let root_visits = self.nodes[ROOT].visits;
        let mut best: Option<(usize, f64)> = None;
        for &child_idx in &self.nodes[node].children {
            let child = &self.nodes[child_idx];
            let score = if child.visits == 0 {
                f64::INFINITY
            } else {
                uct_value(
                    child.states.len() as u64,
                    child.unique,
                    child.visits,
                    root_visits,
                    self.config.novelty,
                    self.config.exploration_c,
                )
            };
            let better = match best {
                None => true,
                Some((best_idx, best_score)) => {
                    score > best_score
                        || (score == best_score && child.action < self.nodes[best_idx].action)
                }
            };
            if better {
                best = Some((child_idx, score));
            }
        }
        best.expect("best_child called on a node with children").0
    }

    /// Full `d`-level depth-first expansion from `node`, billing one call
    /// per edge and propagating every endpoint sensor upward. The expansion
    /// nodes are parent-linked for propagation but are not registered as
    /// guided children (they are never selected).
    fn branch(&mut self, node: usize, state: &M, d: u32) -> Result<(), BudgetExhausted> {
        if d == 0 {
            self.add_state(node, state.sensor());
            return Ok(());
        }
        for action in state.actions() {
            let successor = state.apply(action, &mut self.counter)?;
            let depth = self.nodes[node].depth + 1;
            let child = self.alloc(Some(action), node, depth);
            self.branch(child, &successor, d - 1)?;
        }
        Ok(())
    }

    fn into_result(self, root_actions: &[ActionId]) -> SearchResult {
        let mut stats: Vec<RootChildStat> = Vec::new();
        for &child_idx in &self.nodes[ROOT].children {
            let child = &self.nodes[child_idx];
            stats.push(RootChildStat {
                action: child.action.unwrap(),
                visits: child.visits,
                states: child.states.len() as u64,
                unique: child.unique,
            });
        }
        stats.sort_by_key(|s| s.action);

        let per_action: Vec<(ActionId, u64)> = root_actions
            .iter()
            .map(|&a| {
                let count = stats
                    .iter()
                    .find(|s| s.action == a)
                    .map(|s| s.states)
                    .unwrap_or(0);
                (a, count)
            })
            .collect();
        let report = EmpowermentReport::new(
            per_action,
            self.counter.used(),
            self.config.horizon_n,
            false,
        );
        // action selection: largest reachability set, never the UCT score
        let action = report.best_action();
        SearchResult {
            action,
            report,
            root_children: stats,
        }
    }

    /// Structural invariants, checked after every search in debug builds:
    /// parent sets contain child sets, unique counters never exceed set
    /// sizes, guided nodes have at least as many visits as children, and
    /// the root saw one visit per rollout.
    fn debug_validate(&self) {
        if !cfg!(debug_assertions) || self.nodes.len() > 200_000 {
            return;
        }
        assert_eq!(self.nodes[ROOT].visits, self.rollouts);
        for node in &self.nodes {
            assert!(node.unique as usize <= node.states.len());
            assert!(node.visits >= node.children.len() as u64);
            if let Some(parent) = node.parent {
                for sensor in &node.states {
                    assert!(
                        self.nodes[parent].states.contains(sensor),
                        "parent reachability set must contain child's"
                    );
                }
            }
        }
    }
}
