//! A Minecraft-like 3D voxel world: movement with climbing, context-sensitive
//! block manipulation, gravity, lava flow, and agent death.
//!
//! # Coordinates
//!
//! `x` grows east, `y` grows south (the first row of a printed layer is the
//! northern edge), `z` grows upward. The bottom grid boundary is solid
//! support: nothing falls out of the world.
//!
//! # One action step
//!
//! [`BlockWorld::apply_action`] advances the tick, resolves the agent's action
//! (skipped once dead), then runs the environment step: gravity, lava spread
//! on positive tick multiples of 4, death check, in that fixed order.
//!
//! Agent and lava fall until they rest above a filled cell or the floor;
//! earth never falls. Lava copies itself into empty horizontal 4-neighbours,
//! reading the pre-spread grid so sweep order cannot matter. The agent dies
//! when any of the 6 orthogonal neighbours of its cell is lava; its block is
//! then removed from the grid while the sensor stays frozen at the death
//! position, making death absorbing.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::forward_model::{ActionId, BudgetExhausted, CallCounter, ForwardModel};

/// Content of one grid cell.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Block {
    Empty,
    Earth,
    Lava,
    Agent,
}

impl Block {
    fn glyph(self) -> char {
        match self {
            Block::Empty => '.',
            Block::Earth => '#',
            Block::Lava => 'L',
            Block::Agent => 'A',
        }
    }

    fn from_glyph(c: char) -> Option<Block> {
        match c {
            '.' => Some(Block::Empty),
            '#' => Some(Block::Earth),
            'L' => Some(Block::Lava),
            'A' => Some(Block::Agent),
            _ => None,
        }
    }
}

/// Grid dimensions; every axis is at least 1 and fits in a `u16`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct Dims {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl Dims {
    pub fn new(x: usize, y: usize, z: usize) -> Dims {
        assert!(
            x >= 1 && y >= 1 && z >= 1,
            "grid dimensions must be positive"
        );
        assert!(
            x <= u16::MAX as usize && y <= u16::MAX as usize && z <= u16::MAX as usize,
            "grid dimensions must fit in u16"
        );
        Dims { x, y, z }
    }

    pub fn volume(&self) -> usize {
        self.x * self.y * self.z
    }
}

/// A cell position; doubles as the agent's sensor token.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
pub struct Pos {
    pub x: u16,
    pub y: u16,
    pub z: u16,
}

impl Pos {
    pub fn new(x: u16, y: u16, z: u16) -> Pos {
        Pos { x, y, z }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.x, self.y, self.z)
    }
}

/// Horizontal movement direction.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MoveDir {
    North,
    East,
    South,
    West,
}

impl MoveDir {
    fn delta(self) -> (i32, i32) {
        match self {
            MoveDir::North => (0, -1),
            MoveDir::East => (1, 0),
            MoveDir::South => (0, 1),
            MoveDir::West => (-1, 0),
        }
    }
}

/// Direction for the take/place action.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ActDir {
    Up,
    Down,
    North,
    East,
    South,
    West,
}

impl ActDir {
    fn delta(self) -> (i32, i32, i32) {
        match self {
            ActDir::Up => (0, 0, 1),
            ActDir::Down => (0, 0, -1),
            ActDir::North => (0, -1, 0),
            ActDir::East => (1, 0, 0),
            ActDir::South => (0, 1, 0),
            ActDir::West => (-1, 0, 0),
        }
    }
}

/// The agent's 12 actions.
///
/// The [`ActionId`] mapping is fixed: moves north/east/south/west are 0-3,
/// act up/down/north/east/south/west are 4-9, wait is 10, destroy is 11.
/// Seeded runs depend on this ordering staying put.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BlockAction {
    Move(MoveDir),
    Act(ActDir),
    Wait,
    DestroyInventory,
}

impl BlockAction {
    pub const ALL: [BlockAction; 12] = [
        BlockAction::Move(MoveDir::North),
        BlockAction::Move(MoveDir::East),
        BlockAction::Move(MoveDir::South),
        BlockAction::Move(MoveDir::West),
        BlockAction::Act(ActDir::Up),
        BlockAction::Act(ActDir::Down),
        BlockAction::Act(ActDir::North),
        BlockAction::Act(ActDir::East),
        BlockAction::Act(ActDir::South),
        BlockAction::Act(ActDir::West),
        BlockAction::Wait,
        BlockAction::DestroyInventory,
    ];

    pub fn id(self) -> ActionId {
        let idx = Self::ALL.iter().position(|a| *a == self).unwrap();
        ActionId(idx)
    }

    pub fn from_id(id: ActionId) -> Option<BlockAction> {
        Self::ALL.get(id.0).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            BlockAction::Move(MoveDir::North) => "move-n",
            BlockAction::Move(MoveDir::East) => "move-e",
            BlockAction::Move(MoveDir::South) => "move-s",
            BlockAction::Move(MoveDir::West) => "move-w",
            BlockAction::Act(ActDir::Up) => "act-up",
            BlockAction::Act(ActDir::Down) => "act-down",
            BlockAction::Act(ActDir::North) => "act-n",
            BlockAction::Act(ActDir::East) => "act-e",
            BlockAction::Act(ActDir::South) => "act-s",
            BlockAction::Act(ActDir::West) => "act-w",
            BlockAction::Wait => "wait",
            BlockAction::DestroyInventory => "destroy",
        }
    }

    /// Parse an action name as printed by [`BlockAction::name`]; bare
    /// `n`/`e`/`s`/`w` are accepted as move shorthands.
    pub fn parse(s: &str) -> Option<BlockAction> {
        match s {
            "n" => return Some(BlockAction::Move(MoveDir::North)),
            "e" => return Some(BlockAction::Move(MoveDir::East)),
            "s" => return Some(BlockAction::Move(MoveDir::South)),
            "w" => return Some(BlockAction::Move(MoveDir::West)),
            _ => {}
        }
        Self::ALL.iter().copied().find(|a| a.name() == s)
    }
}

/// The agent's one-slot inventory. Only earth can be carried.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Inventory {
    Empty,
    Earth,
}

/// Errors from parsing or validating a world file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorldFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}, column {column}: {message}")]
    BadCell {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid world: {0}")]
    Invalid(String),
}

/// Full world state: voxel grid, agent, inventory, alive flag, tick.
///
/// Plain value; cloning is the only sharing mechanism. `agent_pos` is the
/// live position while alive and the frozen death position afterwards.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BlockWorld {
    dims: Dims,
    grid: Vec<Block>,
    agent_pos: Pos,
    inventory: Inventory,
    alive: bool,
    tick: u64,
}

impl BlockWorld {
    /// All-empty world with the agent at `agent_pos`.
    pub fn empty(dims: Dims, agent_pos: Pos) -> BlockWorld {
        let mut w = BlockWorld {
            dims,
            grid: vec![Block::Empty; dims.volume()],
            agent_pos,
            inventory: Inventory::Empty,
            alive: true,
            tick: 0,
        };
        let idx = w.index(agent_pos).expect("agent position out of bounds");
        w.grid[idx] = Block::Agent;
        w
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// The agent's position; frozen at the moment of death.
    pub fn agent_pos(&self) -> Pos {
        self.agent_pos
    }

    pub fn alive(&self) -> bool {
        self.alive
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn inventory(&self) -> Inventory {
        self.inventory
    }

    pub fn block(&self, pos: Pos) -> Block {
        self.grid[self.index(pos).expect("position out of bounds")]
    }

    /// Place earth/lava or clear a cell when constructing scenarios.
    /// The agent cell cannot be overwritten and `Block::Agent` cannot be
    /// placed this way.
    pub fn set_block(&mut self, pos: Pos, block: Block) {
        assert!(
            block != Block::Agent,
            "use the constructor to place the agent"
        );
        let idx = self.index(pos).expect("position out of bounds");
        assert!(
            self.grid[idx] != Block::Agent,
            "cannot overwrite the agent cell"
        );
        self.grid[idx] = block;
    }

    /// Number of cells holding `block`, not counting the inventory.
    pub fn count_blocks(&self, block: Block) -> usize {
        self.grid.iter().filter(|b| **b == block).count()
    }

    fn index(&self, pos: Pos) -> Option<usize> {
        let (x, y, z) = (pos.x as usize, pos.y as usize, pos.z as usize);
        if x < self.dims.x && y < self.dims.y && z < self.dims.z {
            Some(x + self.dims.x * (y + self.dims.y * z))
        } else {
            None
        }
    }

    fn index_xyz(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims.x * (y + self.dims.y * z)
    }

    fn offset(&self, pos: Pos, dx: i32, dy: i32, dz: i32) -> Option<Pos> {
        let x = pos.x as i32 + dx;
        let y = pos.y as i32 + dy;
        let z = pos.z as i32 + dz;
        if x < 0 || y < 0 || z < 0 {
            return None;
        }
        let p = Pos::new(x as u16, y as u16, z as u16);
        self.index(p).map(|_| p)
    }

    /// One full action step: tick, agent action (unless dead), environment.
    pub fn apply_action(&self, action: BlockAction) -> BlockWorld {
        let mut w = self.clone();
        w.tick += 1;
        if w.alive {
            w.resolve(action);
        }
        w.step_environment_in_place();
        w
    }

    /// The between-actions simulation alone: gravity, then lava spread when
    /// the current tick is a positive multiple of 4, then the death check.
    /// Does not advance the tick.
    pub fn step_environment(&self) -> BlockWorld {
        let mut w = self.clone();
        w.step_environment_in_place();
        w
    }

    fn step_environment_in_place(&mut self) {
        self.settle_gravity();
        if self.tick > 0 && self.tick.is_multiple_of(4) {
            self.spread_lava();
        }
        self.check_death();
    }

    fn resolve(&mut self, action: BlockAction) {
        match action {
            BlockAction::Move(dir) => {
                let (dx, dy) = dir.delta();
                let Some(target) = self.offset(self.agent_pos, dx, dy, 0) else {
                    return;
                };
                if self.block(target) == Block::Empty {
                    self.relocate_agent(target);
                } else if let Some(above) = self.offset(target, 0, 0, 1) {
                    if self.block(above) == Block::Empty {
                        // climb on top of the filled target cell
                        self.relocate_agent(above);
                    }
                }
            }
            BlockAction::Act(dir) => {
                let (dx, dy, dz) = dir.delta();
                let Some(target) = self.offset(self.agent_pos, dx, dy, dz) else {
                    return;
                };
                match self.inventory {
                    Inventory::Empty => {
                        // only earth is takeable; lava stays in the world
                        if self.block(target) == Block::Earth {
                            self.set_cell(target, Block::Empty);
                            self.inventory = Inventory::Earth;
                        }
                    }
                    Inventory::Earth => {
                        if self.block(target) == Block::Empty {
                            self.set_cell(target, Block::Earth);
                            self.inventory = Inventory::Empty;
                        }
                    }
                }
            }
            BlockAction::Wait => {}
            BlockAction::DestroyInventory => {
                self.inventory = Inventory::Empty;
            }
        }
    }

    fn set_cell(&mut self, pos: Pos, block: Block) {
        let idx = self.index(pos).unwrap();
        self.grid[idx] = block;
    }

    fn relocate_agent(&mut self, to: Pos) {
        let from = self.index(self.agent_pos).unwrap();
        let dst = self.index(to).unwrap();
        self.grid[from] = Block::Empty;
        self.grid[dst] = Block::Agent;
        self.agent_pos = to;
    }

    /// Stable downward compaction per column: lava and the agent slide to the
    /// lowest open cells above earth or the floor, keeping their vertical
    /// order. Idempotent.
    fn settle_gravity(&mut self) {
        for x in 0..self.dims.x {
            for y in 0..self.dims.y {
                let mut rest = 0usize;
                for z in 0..self.dims.z {
                    let idx = self.index_xyz(x, y, z);
                    match self.grid[idx] {
                        Block::Earth => rest = z + 1,
                        Block::Empty => {}
                        faller @ (Block::Lava | Block::Agent) => {
                            if z != rest {
                                self.grid[idx] = Block::Empty;
                                let dst = self.index_xyz(x, y, rest);
                                self.grid[dst] = faller;
                                if faller == Block::Agent {
                                    self.agent_pos = Pos::new(x as u16, y as u16, rest as u16);
                                }
                            }
                            rest += 1;
                        }
                    }
                }
            }
        }
    }

    /// Copy every lava cell into its empty horizontal 4-neighbours,
    /// evaluated against the pre-spread grid.
    fn spread_lava(&mut self) {
        let mut targets = Vec::new();
        for z in 0..self.dims.z {
            for y in 0..self.dims.y {
                for x in 0..self.dims.x {
                    if self.grid[self.index_xyz(x, y, z)] != Block::Lava {
                        continue;
                    }
                    let pos = Pos::new(x as u16, y as u16, z as u16);
                    for (dx, dy) in [(0, -1), (1, 0), (0, 1), (-1, 0)] {
                        if let Some(n) = self.offset(pos, dx, dy, 0) {
                            if self.block(n) == Block::Empty {
                                targets.push(self.index(n).unwrap());
                            }
                        }
                    }
                }
            }
        }
        for idx in targets {
            self.grid[idx] = Block::Lava;
        }
    }

    /// Kill the agent when any of the 6 orthogonal neighbours is lava.
    /// The agent block leaves the grid; `agent_pos` keeps the frozen sensor.
    fn check_death(&mut self) {
        if !self.alive {
            return;
        }
        let deltas = [
            (0, -1, 0),
            (1, 0, 0),
            (0, 1, 0),
            (-1, 0, 0),
            (0, 0, 1),
            (0, 0, -1),
        ];
        for (dx, dy, dz) in deltas {
            if let Some(n) = self.offset(self.agent_pos, dx, dy, dz) {
                if self.block(n) == Block::Lava {
                    self.alive = false;
                    let idx = self.index(self.agent_pos).unwrap();
                    self.grid[idx] = Block::Empty;
                    return;
                }
            }
        }
    }

    /// Serialize to the world-file text format. `parse` inverts this exactly
    /// for any living world.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "dims {} {} {}\n",
            self.dims.x, self.dims.y, self.dims.z
        ));
        for z in 0..self.dims.z {
            out.push_str(&format!("layer z={z}\n"));
            for y in 0..self.dims.y {
                for x in 0..self.dims.x {
                    out.push(self.grid[self.index_xyz(x, y, z)].glyph());
                }
                out.push('\n');
            }
        }
        let inv = match self.inventory {
            Inventory::Empty => "none",
            Inventory::Earth => "earth",
        };
        out.push_str(&format!("inventory {inv}\n"));
        out.push_str(&format!("tick {}\n", self.tick));
        out
    }

    /// Parse the world-file text format:
    ///
    /// ```text
    /// dims X Y Z
    /// layer z=0
    /// <Y rows of X characters from . # L A>
    /// ...
    /// inventory earth|none   (optional, default none)
    /// tick N                 (optional, default 0)
    /// ```
    ///
    /// The grid must contain exactly one agent cell; the loaded world is
    /// always alive.
    pub fn parse(text: &str) -> Result<BlockWorld, WorldFileError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let syntax = |line: usize, message: &str| WorldFileError::Syntax {
            line,
            message: message.to_string(),
        };

        let (line_no, header) = lines
            .next()
            .ok_or_else(|| syntax(1, "empty file, expected `dims X Y Z`"))?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 4 || parts[0] != "dims" {
            return Err(syntax(line_no, "expected header `dims X Y Z`"));
        }
        let parse_dim = |s: &str| -> Result<usize, WorldFileError> {
            let v: usize = s
                .parse()
                .map_err(|_| syntax(line_no, &format!("bad dimension `{s}`")))?;
            if v == 0 || v > u16::MAX as usize {
                return Err(syntax(line_no, &format!("dimension `{s}` out of range")));
            }
            Ok(v)
        };
        let dims = Dims::new(
            parse_dim(parts[1])?,
            parse_dim(parts[2])?,
            parse_dim(parts[3])?,
        );

        let mut grid = vec![Block::Empty; dims.volume()];
        let mut agent: Option<Pos> = None;
        for z in 0..dims.z {
            let (line_no, marker) = lines
                .next()
                .ok_or_else(|| WorldFileError::Invalid(format!("missing layer z={z}")))?;
            let expected = format!("layer z={z}");
            if marker.trim() != expected {
                return Err(syntax(line_no, &format!("expected `{expected}`")));
            }
            for y in 0..dims.y {
                let (line_no, row) = lines.next().ok_or_else(|| {
                    WorldFileError::Invalid(format!("missing row {y} of layer z={z}"))
                })?;
                let cells: Vec<char> = row.trim_end().chars().collect();
                if cells.len() != dims.x {
                    return Err(syntax(
                        line_no,
                        &format!("row has {} cells, expected {}", cells.len(), dims.x),
                    ));
                }
                for (x, c) in cells.into_iter().enumerate() {
                    let block = Block::from_glyph(c).ok_or(WorldFileError::BadCell {
                        line: line_no,
                        column: x + 1,
                        message: format!("unknown cell character `{c}`"),
                    })?;
                    if block == Block::Agent {
                        let pos = Pos::new(x as u16, y as u16, z as u16);
                        if agent.replace(pos).is_some() {
                            return Err(WorldFileError::Invalid(
                                "more than one agent cell".to_string(),
                            ));
                        }
                    }
                    grid[x + dims.x * (y + dims.y * z)] = block;
                }
            }
        }

        let mut inventory = Inventory::Empty;
        let mut tick = 0u64;
        for (line_no, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            match words.next() {
                Some("inventory") => {
                    inventory = match words.next() {
                        Some("earth") => Inventory::Earth,
                        Some("none") => Inventory::Empty,
                        _ => return Err(syntax(line_no, "expected `inventory earth|none`")),
                    };
                }
                Some("tick") => {
                    tick = words
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| syntax(line_no, "expected `tick <n>`"))?;
                }
                _ => return Err(syntax(line_no, "unknown trailing line")),
            }
        }

        let agent_pos =
            agent.ok_or_else(|| WorldFileError::Invalid("no agent cell".to_string()))?;
        Ok(BlockWorld {
            dims,
            grid,
            agent_pos,
            inventory,
            alive: true,
            tick,
        })
    }
}

/// Seeded random world: each cell is earth with probability 0.40, lava with
/// probability 0.02, otherwise empty; the agent replaces the block at one
/// uniformly random cell. Pure function of the seed for fixed dims.
pub fn generate_random_world(seed: u64, dims: Dims) -> BlockWorld {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grid = Vec::with_capacity(dims.volume());
    for _ in 0..dims.volume() {
        let r: f64 = rng.random();
        grid.push(if r < 0.40 {
            Block::Earth
        } else if r < 0.42 {
            Block::Lava
        } else {
            Block::Empty
        });
    }
    let agent_idx = rng.random_range(0..dims.volume());
    grid[agent_idx] = Block::Agent;
    let z = agent_idx / (dims.x * dims.y);
    let y = (agent_idx / dims.x) % dims.y;
    let x = agent_idx % dims.x;
    BlockWorld {
        dims,
        grid,
        agent_pos: Pos::new(x as u16, y as u16, z as u16),
        inventory: Inventory::Empty,
        alive: true,
        tick: 0,
    }
}

impl ForwardModel for BlockWorld {
    type Sensor = Pos;

    fn actions(&self) -> Vec<ActionId> {
        (0..BlockAction::ALL.len()).map(ActionId).collect()
    }

    fn apply(&self, action: ActionId, counter: &mut CallCounter) -> Result<Self, BudgetExhausted> {
        counter.charge()?;
        let action = BlockAction::from_id(action).expect("action id out of range");
        Ok(self.apply_action(action))
    }

    fn sensor(&self) -> Pos {
        self.agent_pos
    }
}
