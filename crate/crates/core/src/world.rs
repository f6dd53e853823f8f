//! Grid field, ground-truth idleness and robot placement.
//!
//! The field is a `cols × rows` lattice of square cells anchored at the
//! origin, which is also where the base station sits. Cells are indexed in
//! row-major order: `k = row * cols + col`, with row 0 along `y = 0`.

use std::f64::consts::TAU;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::TrialConfig;

/// A planar position in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        let (dx, dy) = (self.x - other.x, self.y - other.y);
        (dx * dx + dy * dy).sqrt()
    }

    /// Distance from the origin.
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Index of a grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GridId(pub usize);

impl fmt::Display for GridId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}", self.0)
    }
}

/// Index of a robot. Robot 0 is always the base station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RobotId(pub usize);

impl RobotId {
    pub const BASE: RobotId = RobotId(0);

    pub fn is_base(self) -> bool {
        self == Self::BASE
    }
}

impl fmt::Display for RobotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WorldError {
    #[error("position {0} lies outside the field")]
    OutOfBounds(Point),
    #[error("unknown grid {0}")]
    UnknownGrid(GridId),
    #[error("time {t} precedes last visit {last_visit} of {grid}")]
    TimeBeforeVisit {
        grid: GridId,
        t: i64,
        last_visit: i64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub index: GridId,
    pub center: Point,
    /// Ground-truth time of the most recent visit.
    pub last_visit: i64,
}

impl GridCell {
    pub fn idleness(&self, t: i64) -> i64 {
        t - self.last_visit
    }
}

#[derive(Debug, Clone)]
pub struct GridMap {
    cols: usize,
    rows: usize,
    cell_size: f64,
    origin: Point,
    visit_radius: f64,
    cells: Vec<GridCell>,
}

impl GridMap {
    /// Builds a map with every cell's last visit set to `t0`.
    pub fn new(cols: usize, rows: usize, cell_size: f64, visit_radius: f64, t0: i64) -> Self {
        assert!(cols > 0 && rows > 0, "grid must have at least one cell");
        assert!(cell_size > 0.0, "cell size must be positive");
        let origin = Point::ORIGIN;
        let cells = (0..rows)
            .flat_map(|row| (0..cols).map(move |col| (row, col)))
            .enumerate()
            .map(|(k, (row, col))| GridCell {
                index: GridId(k),
                center: Point::new(
                    origin.x + (col as f64 + 0.5) * cell_size,
                    origin.y + (row as f64 + 0.5) * cell_size,
                ),
                last_visit: t0,
            })
            .collect();
        GridMap {
            cols,
            rows,
            cell_size,
            origin,
            visit_radius,
            cells,
        }
    }

    pub fn from_config(config: &TrialConfig) -> Self {
        GridMap::new(
            config.grid_cols,
            config.grid_rows,
            config.cell_size(),
            config.visit_radius,
            config.start_time,
        )
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn width(&self) -> f64 {
        self.cols as f64 * self.cell_size
    }

    pub fn height(&self) -> f64 {
        self.rows as f64 * self.cell_size
    }

    pub fn cells(&self) -> &[GridCell] {
        &self.cells
    }

    pub fn cell(&self, k: GridId) -> Result<&GridCell, WorldError> {
        self.cells.get(k.0).ok_or(WorldError::UnknownGrid(k))
    }

    pub fn center(&self, k: GridId) -> Point {
        self.cells[k.0].center
    }

    pub fn col_row(&self, k: GridId) -> (usize, usize) {
        (k.0 % self.cols, k.0 / self.cols)
    }

    pub fn id_at(&self, col: usize, row: usize) -> GridId {
        GridId(row * self.cols + col)
    }

    pub fn contains(&self, p: Point) -> bool {
        let (dx, dy) = (p.x - self.origin.x, p.y - self.origin.y);
        (0.0..=self.width()).contains(&dx) && (0.0..=self.height()).contains(&dy)
    }

    /// Cell whose bounds contain `p`. A point on an edge shared by two cells
    /// belongs to the higher-indexed one; the outer far edges belong to the
    /// last row/column.
    pub fn locate(&self, p: Point) -> Result<GridId, WorldError> {
        if !p.x.is_finite() || !p.y.is_finite() || !self.contains(p) {
            return Err(WorldError::OutOfBounds(p));
        }
        let axis = |v: f64, n: usize| ((v / self.cell_size).floor() as usize).min(n - 1);
        let col = axis(p.x - self.origin.x, self.cols);
        let row = axis(p.y - self.origin.y, self.rows);
        Ok(self.id_at(col, row))
    }

    /// The 8-neighbourhood of `k`, in ascending index order.
    pub fn neighbors8(&self, k: GridId) -> Vec<GridId> {
        let (col, row) = self.col_row(k);
        let mut out = Vec::with_capacity(8);
        for r in row.saturating_sub(1)..=(row + 1).min(self.rows - 1) {
            for c in col.saturating_sub(1)..=(col + 1).min(self.cols - 1) {
                if (c, r) != (col, row) {
                    out.push(self.id_at(c, r));
                }
            }
        }
        out
    }

    /// Cells whose center lies within the visit radius of `p`.
    pub fn cells_in_visit_range(&self, p: Point) -> Vec<GridId> {
        let Ok(home) = self.locate(p) else {
            return Vec::new();
        };
        let mut near = self.neighbors8(home);
        near.push(home);
        near.sort_unstable();
        near.retain(|k| self.cells[k.0].center.distance(&p) <= self.visit_radius);
        near
    }

    /// Records a ground-truth visit at `t` for every cell in visit range of
    /// `p` and returns those cells.
    pub fn register_visits(&mut self, p: Point, t: i64) -> Vec<GridId> {
        let near = self.cells_in_visit_range(p);
        for k in &near {
            let cell = &mut self.cells[k.0];
            cell.last_visit = cell.last_visit.max(t);
        }
        near
    }

    pub fn idleness(&self, k: GridId, t: i64) -> Result<i64, WorldError> {
        let cell = self.cell(k)?;
        if t < cell.last_visit {
            return Err(WorldError::TimeBeforeVisit {
                grid: k,
                t,
                last_visit: cell.last_visit,
            });
        }
        Ok(cell.idleness(t))
    }

    pub fn total_idleness(&self, t: i64) -> i64 {
        self.cells.iter().map(|c| c.idleness(t)).sum()
    }

    pub fn max_idleness(&self, t: i64) -> i64 {
        self.cells.iter().map(|c| c.idleness(t)).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotState {
    pub id: RobotId,
    pub position: Point,
    /// Radians, counter-clockwise from +x.
    pub heading: f64,
    pub target: Option<GridId>,
    pub is_base: bool,
    /// Meters per second.
    pub speed: f64,
}

impl RobotState {
    pub fn base() -> Self {
        RobotState {
            id: RobotId::BASE,
            position: Point::ORIGIN,
            heading: 0.0,
            target: None,
            is_base: true,
            speed: 0.0,
        }
    }

    pub fn patroller(id: RobotId, position: Point, speed: f64) -> Self {
        RobotState {
            id,
            position,
            heading: 0.0,
            target: None,
            is_base: false,
            speed,
        }
    }
}

/// Places the base at the origin and the remaining `robots - 1` patrollers
/// uniformly over the field.
pub fn deploy<R: Rng + ?Sized>(config: &TrialConfig, rng: &mut R) -> Vec<RobotState> {
    let side_x = config.grid_cols as f64 * config.cell_size();
    let side_y = config.grid_rows as f64 * config.cell_size();
    let mut robots = Vec::with_capacity(config.robots);
    robots.push(RobotState::base());
    for n in 1..config.robots {
        let position = Point::new(rng.gen_range(0.0..side_x), rng.gen_range(0.0..side_y));
        let mut robot = RobotState::patroller(RobotId(n), position, config.speed);
        robot.heading = rng.gen_range(0.0..TAU);
        robots.push(robot);
    }
    robots
}
