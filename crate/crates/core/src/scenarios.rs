//! Shipped scenario worlds.
//!
//! The bridge world is the canonical bottleneck: the agent starts on a small
//! five-cell platform separated from a large 5x7 platform by a one-cell-wide,
//! three-cell-long bridge over a lava sea two levels deep. Crossing the
//! bridge massively increases the number of reachable positions, but only
//! action sequences that start with a very specific four-step eastward
//! prefix get there, which is exactly the situation where unbiased random
//! sequence sampling fails.

use crate::blockworld::BlockWorld;
use crate::forward_model::ActionId;

/// Bridge world in world-file format. The agent stands at (1,3,3) on the
/// small five-cell western platform, directly beside the bridge entrance;
/// the bridge runs east at y=3, z=2; the large platform fills x=5..9.
/// Everything at z<=1 west of the large platform is lava, as is the z=2
/// surface ring around platform and bridge, so leaving the walkway kills.
pub const BRIDGE_WORLD_TEXT: &str = "\
dims 10 7 4
layer z=0
LLLLL#####
LLLLL#####
LLLLL#####
LLLLL#####
LLLLL#####
LLLLL#####
LLLLL#####
layer z=1
LLLLL#####
LLLLL#####
LLLLL#####
LLLLL#####
LLLLL#####
LLLLL#####
LLLLL#####
layer z=2
LLLLL#####
LLLLL#####
##LLL#####
##########
#LLLL#####
LLLLL#####
LLLLL#####
layer z=3
..........
..........
..........
.A........
..........
..........
..........
inventory none
tick 0
";

/// The parsed bridge world.
pub fn bridge_world() -> BlockWorld {
    BlockWorld::parse(BRIDGE_WORLD_TEXT).expect("embedded bridge world is valid")
}

/// The move that starts crossing the bridge: the bridge's first cell lies
/// due east of the agent, so this is move-e (action id 1).
pub fn bridge_ward_action() -> ActionId {
    ActionId(1)
}

/// Look up a shipped scenario by name.
pub fn by_name(name: &str) -> Option<&'static str> {
    match name {
        "bridge" => Some(BRIDGE_WORLD_TEXT),
        _ => None,
    }
}
