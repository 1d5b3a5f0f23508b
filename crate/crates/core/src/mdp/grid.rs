use std::fmt;

use super::TabularMdp;
use crate::{Error, Result};

/// Grid coordinate. Row 0 is the bottom row, so the top-right corner of a
/// `w × h` grid is `(w - 1, h - 1)` and the bottom-right is `(w - 1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cell {
    pub col: usize,
    pub row: usize,
}

impl Cell {
    pub const fn new(col: usize, row: usize) -> Self {
        Cell { col, row }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.col, self.row)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridAction {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
}

impl GridAction {
    pub const ALL: [GridAction; 4] = [GridAction::Up, GridAction::Down, GridAction::Left, GridAction::Right];

    pub fn index(self) -> usize {
        self as usize
    }

    /// The two sideways directions an agent may slip into.
    fn perpendicular(self) -> [GridAction; 2] {
        match self {
            GridAction::Up | GridAction::Down => [GridAction::Left, GridAction::Right],
            GridAction::Left | GridAction::Right => [GridAction::Up, GridAction::Down],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    pub start: Cell,
    pub goal: Cell,
    /// Total sideways probability, split evenly between the two
    /// perpendicular directions.
    pub slip_prob: f64,
    pub goal_reward: f64,
}

impl GridSpec {
    pub fn new(width: usize, height: usize, start: Cell, goal: Cell, slip_prob: f64) -> Self {
        GridSpec { width, height, start, goal, slip_prob, goal_reward: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidGrid("width and height must be positive".into()));
        }
        for (name, c) in [("start", self.start), ("goal", self.goal)] {
            if c.col >= self.width || c.row >= self.height {
                return Err(Error::InvalidGrid(format!(
                    "{name} {c} outside {}x{} grid",
                    self.width, self.height
                )));
            }
        }
        if self.start == self.goal {
            return Err(Error::InvalidGrid("start and goal coincide".into()));
        }
        if !(0.0..1.0).contains(&self.slip_prob) {
            return Err(Error::InvalidGrid(format!("slip_prob {} not in [0, 1)", self.slip_prob)));
        }
        if !self.goal_reward.is_finite() {
            return Err(Error::InvalidGrid("goal_reward must be finite".into()));
        }
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.width * self.height
    }

    pub fn state_of(&self, c: Cell) -> usize {
        c.row * self.width + c.col
    }

    pub fn cell_of(&self, s: usize) -> Cell {
        Cell::new(s % self.width, s / self.width)
    }

    /// Cell reached by moving in `dir`; off-grid moves stay put.
    pub fn step(&self, c: Cell, dir: GridAction) -> Cell {
        match dir {
            GridAction::Up if c.row + 1 < self.height => Cell::new(c.col, c.row + 1),
            GridAction::Down if c.row > 0 => Cell::new(c.col, c.row - 1),
            GridAction::Left if c.col > 0 => Cell::new(c.col - 1, c.row),
            GridAction::Right if c.col + 1 < self.width => Cell::new(c.col + 1, c.row),
            _ => c,
        }
    }
}

/// Builds the navigation gridworld: four actions, sideways slip, walls that
/// keep the agent in place, and a terminal goal paying `goal_reward` on entry.
pub fn build_gridworld(spec: &GridSpec, gamma: f64) -> Result<TabularMdp> {
    spec.validate()?;
    let ns = spec.num_states();
    let na = GridAction::ALL.len();
    let goal = spec.state_of(spec.goal);
    let mut transition = vec![0.0; ns * na * ns];
    let mut reward = vec![0.0; ns * na * ns];

    for s in 0..ns {
        for dir in GridAction::ALL {
            let base = (s * na + dir.index()) * ns;
            if s == goal {
                transition[base + s] = 1.0;
                continue;
            }
            let here = spec.cell_of(s);
            let [side_a, side_b] = dir.perpendicular();
            let half_slip = spec.slip_prob / 2.0;
            for (d, p) in [(dir, 1.0 - spec.slip_prob), (side_a, half_slip), (side_b, half_slip)] {
                if p == 0.0 {
                    continue;
                }
                let s2 = spec.state_of(spec.step(here, d));
                transition[base + s2] += p;
                if s2 == goal {
                    reward[base + s2] = spec.goal_reward;
                }
            }
        }
    }

    let mut terminal = vec![false; ns];
    terminal[goal] = true;
    TabularMdp::new(ns, na, transition, reward, gamma, terminal, vec![spec.state_of(spec.start)])
}
