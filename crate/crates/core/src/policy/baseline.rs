use rand::seq::SliceRandom;
use rand::Rng;

use crate::knowledge::KnowledgeBase;
use crate::world::{GridMap, RobotState};

use super::{PolicyError, TargetChoice};

/// Conscientious reactive rule: move to the adjacent cell this robot
/// believes has been idle longest. Ties go to the smaller grid index.
/// The reported utility is that cell's assumed idleness.
pub fn cr_select(
    robot: &RobotState,
    kb: &KnowledgeBase,
    map: &GridMap,
) -> Result<TargetChoice, PolicyError> {
    let here = map.locate(robot.position)?;
    let best = map
        .neighbors8(here)
        .into_iter()
        .max_by(|a, b| kb.idleness(*a).cmp(&kb.idleness(*b)).then(b.cmp(a)))
        .expect("every cell has a neighbour");
    Ok(TargetChoice {
        grid: best,
        utility: kb.idleness(best) as f64,
    })
}

/// Uniformly random adjacent cell.
pub fn random_select<R: Rng + ?Sized>(
    robot: &RobotState,
    map: &GridMap,
    rng: &mut R,
) -> Result<TargetChoice, PolicyError> {
    let here = map.locate(robot.position)?;
    let grid = *map
        .neighbors8(here)
        .choose(rng)
        .expect("every cell has a neighbour");
    Ok(TargetChoice { grid, utility: 0.0 })
}
