//! Target-selection policies.
//!
//! [`Algorithm::Lr`] is the situation-aware local reactive rule; the
//! conscientious-reactive and random-walk rules in [`baseline`] serve as
//! comparison points. Every policy is a function of the robot's own state
//! and the snapshots in its inbox, so robots can be evaluated in any order.

mod baseline;
mod epsilon;
mod lr;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::knowledge::StaleWrite;
use crate::world::{GridId, GridMap, Point, WorldError};

pub use baseline::{cr_select, random_select};
pub use epsilon::{update_epsilon, EpsilonBranch, EpsilonState, EpsilonUpdate, NeighborReport};
pub use lr::{lr_choose, lr_select, LrOutcome, ScoredCandidate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Lr,
    Cr,
    Random,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Lr, Algorithm::Cr, Algorithm::Random];

    pub fn key(self) -> &'static str {
        match self {
            Algorithm::Lr => "lr",
            Algorithm::Cr => "cr",
            Algorithm::Random => "random",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "lr" => Ok(Algorithm::Lr),
            "cr" => Ok(Algorithm::Cr),
            "random" => Ok(Algorithm::Random),
            other => Err(format!(
                "unknown algorithm {other:?} (expected lr, cr or random)"
            )),
        }
    }
}

/// Constants of the local reactive rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyParams {
    /// Cap on the reporting need.
    pub epsilon_max: f64,
    /// Reporting need above which grids nearer the base are favoured.
    pub epsilon_switch: f64,
    /// Candidate radius in meters.
    pub delta: f64,
    /// Share of a neighbour's need absorbed per transfer.
    pub eta1: f64,
    /// Need added per neighbour on transfer.
    pub eta2: f64,
    /// A neighbour's need must exceed this to be absorbed by a robot in the
    /// middle of the base-contact ordering.
    pub epsilon_threshold: f64,
}

impl Default for PolicyParams {
    fn default() -> Self {
        PolicyParams {
            epsilon_max: 3000.0,
            epsilon_switch: 500.0,
            delta: 180.0,
            eta1: 0.5,
            eta2: 1.0,
            epsilon_threshold: 500.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetChoice {
    pub grid: GridId,
    pub utility: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PolicyError {
    #[error("no grid center within {delta} m of {position}; increase delta")]
    NoCandidates { position: Point, delta: f64 },
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    StaleWrite(#[from] StaleWrite),
}

/// Grids whose centers lie within `delta` of `position`, ascending by index.
pub fn candidate_grids(
    position: Point,
    map: &GridMap,
    delta: f64,
) -> Result<Vec<GridId>, PolicyError> {
    let found: Vec<GridId> = map
        .cells()
        .iter()
        .filter(|c| c.center.distance(&position) <= delta)
        .map(|c| c.index)
        .collect();
    if found.is_empty() {
        return Err(PolicyError::NoCandidates { position, delta });
    }
    Ok(found)
}

/// Whole seconds to cover `distance` at `speed`, never less than one step.
pub fn travel_time_estimate(distance: f64, speed: f64) -> i64 {
    debug_assert!(speed > 0.0);
    ((distance / speed).ceil() as i64).max(1)
}

/// Bias applied to a grid's utility according to the robot's reporting need.
///
/// Above the switch value `e`, grids at least as far from the base as the
/// robot are damped and nearer grids are boosted; below it the roles swap.
/// `grid_dist` and `robot_dist` are distances from the base station.
pub fn alpha(epsilon: f64, e: f64, epsilon_max: f64, grid_dist: f64, robot_dist: f64) -> f64 {
    let farther = grid_dist >= robot_dist;
    // one division keeps the result correctly rounded, so the extremes land
    // exactly on 1/6 and 11/6
    let excess = epsilon - e;
    if farther {
        (epsilon_max - excess) / epsilon_max
    } else {
        (epsilon_max + excess) / epsilon_max
    }
}

/// `alpha * (idleness + travel) / travel`.
pub fn utility(idleness: i64, travel: i64, alpha: f64) -> f64 {
    debug_assert!(travel >= 1);
    alpha * (idleness + travel) as f64 / travel as f64
}
