use std::cmp::Ordering;

use crate::knowledge::{Adoption, KnowledgeBase};
use crate::network::Envelope;
use crate::world::{GridId, GridMap, Point, RobotState};

use super::{
    alpha, candidate_grids, travel_time_estimate, update_epsilon, utility, EpsilonState,
    EpsilonUpdate, NeighborReport, PolicyError, PolicyParams, TargetChoice,
};

/// A candidate grid as scored during selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredCandidate {
    pub grid: GridId,
    pub idleness: i64,
    pub travel: i64,
    pub alpha: f64,
    pub utility: f64,
}

/// Everything one local reactive step did.
#[derive(Debug, Clone, PartialEq)]
pub struct LrOutcome {
    pub adoptions: Vec<Adoption>,
    pub linked_to_base: bool,
    pub epsilon: EpsilonUpdate,
    /// Set when the robot completed its target and picked a new one.
    pub choice: Option<TargetChoice>,
    pub candidates: Vec<ScoredCandidate>,
}

/// Scores every grid within `params.delta` and returns the best one.
///
/// Ties on utility go to the larger assumed idleness, then the smaller grid
/// index. The base station is taken to sit at `base`.
pub fn lr_choose(
    position: Point,
    speed: f64,
    kb: &KnowledgeBase,
    epsilon: f64,
    map: &GridMap,
    params: &PolicyParams,
    base: Point,
) -> Result<(TargetChoice, Vec<ScoredCandidate>), PolicyError> {
    let robot_dist = position.distance(&base);
    let scored: Vec<ScoredCandidate> = candidate_grids(position, map, params.delta)?
        .into_iter()
        .map(|k| {
            let center = map.center(k);
            let travel = travel_time_estimate(center.distance(&position), speed);
            let a = alpha(
                epsilon,
                params.epsilon_switch,
                params.epsilon_max,
                center.distance(&base),
                robot_dist,
            );
            let idleness = kb.idleness(k);
            ScoredCandidate {
                grid: k,
                idleness,
                travel,
                alpha: a,
                utility: utility(idleness, travel, a),
            }
        })
        .collect();

    let best = scored
        .iter()
        .max_by(|a, b| {
            a.utility
                .partial_cmp(&b.utility)
                .unwrap_or(Ordering::Equal)
                .then(a.idleness.cmp(&b.idleness))
                .then(b.grid.cmp(&a.grid))
        })
        .expect("candidate set is non-empty");
    let choice = TargetChoice {
        grid: best.grid,
        utility: best.utility,
    };
    Ok((choice, scored))
}

/// One step of the local reactive rule for a patroller.
///
/// In order: merge the inbox into `kb`, age it by one step and record this
/// step's `visited` cells; reset the need on a direct base link; grow the need by one up to
/// the cap; exchange need with neighbours; and, if the current target is
/// among `visited`, choose a new target within range and claim it.
#[allow(clippy::too_many_arguments)]
pub fn lr_select(
    robot: &mut RobotState,
    kb: &mut KnowledgeBase,
    eps: &mut EpsilonState,
    inbox: &[Envelope],
    visited: &[GridId],
    map: &GridMap,
    params: &PolicyParams,
    t: i64,
) -> Result<LrOutcome, PolicyError> {
    let adoptions = kb.merge(inbox.iter().map(|e| e.knowledge.as_ref()));
    kb.advance_time();
    for &k in visited {
        kb.mark_visited(k, t)?;
    }

    let linked_to_base = inbox.iter().any(|e| e.sender.is_base());
    if linked_to_base {
        eps.epsilon = 0.0;
        eps.base_contact = t;
    }
    eps.epsilon = (eps.epsilon + 1.0).min(params.epsilon_max);

    let reports: Vec<NeighborReport> = inbox
        .iter()
        .filter(|e| !e.sender.is_base())
        .map(|e| NeighborReport {
            id: e.sender,
            epsilon: e.epsilon,
            base_contact: e.base_contact,
        })
        .collect();
    let update = update_epsilon(*eps, &reports, params);
    *eps = update.state;

    let completed = robot.target.is_some_and(|g| visited.contains(&g));
    let (choice, candidates) = if completed {
        let base = Point::ORIGIN;
        let (choice, scored) = lr_choose(
            robot.position,
            robot.speed,
            kb,
            eps.epsilon,
            map,
            params,
            base,
        )?;
        kb.mark_visited(choice.grid, t)?;
        robot.target = Some(choice.grid);
        (Some(choice), scored)
    } else {
        (None, Vec::new())
    };

    Ok(LrOutcome {
        adoptions,
        linked_to_base,
        epsilon: update,
        choice,
        candidates,
    })
}
