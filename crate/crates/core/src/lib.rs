//! n-step empowerment for discrete deterministic forward models.
//!
//! In a deterministic world every action sequence leads to exactly one
//! outcome, so empowerment (the channel capacity from an agent's next `n`
//! actions to its sensor afterwards) reduces to the log of the number of
//! distinct reachable sensor states. This crate computes it three ways:
//!
//! * [`empowerment::exhaustive_empowerment`]: exact depth-first baseline,
//!   sharing prefixes so each action-tree edge is applied once;
//! * [`empowerment::basic_sampling_action`]: the baseline estimator that
//!   samples whole random sequences;
//! * [`uct::best_action`]: a budgeted UCT tree search with three optional
//!   enhancements (novelty bias, aggregated empowerment, full branching)
//!   that finds the most-empowered first action with far fewer forward
//!   calls.
//!
//! All estimators are billed in forward-model calls through a shared
//! [`forward_model::CallCounter`], which is the hardware-independent budget
//! currency of the [`bench`] experiments. The [`blockworld`] module provides
//! the 3D voxel testbed (gravity, spreading lava, climbing, one-slot
//! inventory); [`scenarios`] ships the bridge bottleneck world.

pub mod bench;
pub mod blockworld;
pub mod empowerment;
pub mod forward_model;
pub mod scenarios;
pub mod uct;

pub use blockworld::{Block, BlockAction, BlockWorld, Dims, Pos};
pub use empowerment::EmpowermentReport;
pub use forward_model::{ActionId, BudgetExhausted, CallCounter, ForwardModel};
pub use uct::{SearchConfig, SearchResult};
