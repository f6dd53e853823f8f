//! Reporting-need transfer between neighbouring robots.
//!
//! A robot that has gone longest without touching the base station soaks up
//! its neighbours' reporting need; the one that saw the base most recently
//! hands its need over and drops to zero.

use crate::world::RobotId;

use super::PolicyParams;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EpsilonState {
    pub epsilon: f64,
    /// Last step at which the robot was directly linked to the base.
    pub base_contact: i64,
}

impl EpsilonState {
    pub fn new(epsilon: f64, base_contact: i64) -> Self {
        EpsilonState {
            epsilon,
            base_contact,
        }
    }
}

/// What a neighbour broadcast at the end of the previous step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborReport {
    pub id: RobotId,
    pub epsilon: f64,
    pub base_contact: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpsilonBranch {
    /// No neighbours; nothing changes.
    Isolated,
    /// Our base contact is the oldest in the neighbourhood.
    Absorb,
    /// Our base contact is the newest.
    Release,
    /// Somewhere in between.
    Relay,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonUpdate {
    pub state: EpsilonState,
    pub branch: EpsilonBranch,
    /// Neighbours whose need was added to ours.
    pub absorbed_from: Vec<RobotId>,
}

/// One round of need transfer. `reports` are processed in the order given;
/// callers pass them sorted by robot id.
///
/// Comparisons against the neighbourhood extremes are inclusive, so a robot
/// tied for the oldest contact absorbs. The result is clamped to
/// `[0, epsilon_max]`.
pub fn update_epsilon(
    own: EpsilonState,
    reports: &[NeighborReport],
    params: &PolicyParams,
) -> EpsilonUpdate {
    if reports.is_empty() {
        return EpsilonUpdate {
            state: own,
            branch: EpsilonBranch::Isolated,
            absorbed_from: Vec::new(),
        };
    }

    let degree = reports.len() as f64;
    let oldest = reports.iter().map(|r| r.base_contact).min().unwrap();
    let newest = reports.iter().map(|r| r.base_contact).max().unwrap();
    let peak = reports
        .iter()
        .map(|r| r.epsilon)
        .fold(f64::NEG_INFINITY, f64::max);

    let mut eps = own.epsilon;
    let mut absorbed_from = Vec::new();
    let branch = if own.base_contact <= oldest {
        let sum: f64 = reports.iter().map(|r| r.epsilon).sum();
        eps = eps.max(peak) + params.eta1 * sum + params.eta2 * degree;
        absorbed_from.extend(reports.iter().map(|r| r.id));
        EpsilonBranch::Absorb
    } else if own.base_contact >= newest {
        eps = 0.0;
        EpsilonBranch::Release
    } else {
        for r in reports {
            if own.base_contact < r.base_contact && r.epsilon > params.epsilon_threshold {
                eps = (eps + params.eta1 * r.epsilon).max(peak);
                absorbed_from.push(r.id);
            }
        }
        eps += params.eta2 * degree;
        if absorbed_from.is_empty() {
            eps = 0.0;
        }
        EpsilonBranch::Relay
    };

    EpsilonUpdate {
        state: EpsilonState {
            epsilon: eps.clamp(0.0, params.epsilon_max),
            base_contact: own.base_contact,
        },
        branch,
        absorbed_from,
    }
}
