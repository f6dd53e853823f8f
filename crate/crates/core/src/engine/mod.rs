//! Trial orchestration.
//!
//! Each step runs a fixed sequence of phases:
//!
//! 1. patrollers move toward their targets;
//! 2. links are recomputed from the new positions;
//! 3. ground-truth visits are registered;
//! 4. every linked robot's state as of the end of the previous step is
//!    delivered to its neighbours;
//! 5. each robot merges its inbox, ages its table by one step and runs its
//!    policy;
//! 6. metrics are accumulated.
//!
//! Events are appended as phases produce them. Phase 5 only reads the
//! snapshots built in phase 4, so the order in which robots are updated
//! does not affect the outcome.

mod config;
mod events;

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knowledge::KnowledgeBase;
use crate::metrics::{Metrics, MetricsAccumulator};
use crate::network::{ConnectivityState, Envelope};
use crate::policy::{
    cr_select, lr_choose, lr_select, random_select, Algorithm, EpsilonState, PolicyParams,
    TargetChoice,
};
use crate::world::{deploy, GridId, GridMap, Point, RobotId, RobotState};

pub use config::{ConfigError, TrialConfig};
pub use events::{Event, EventKind, EventLog};

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_id: String,
    pub algorithm: Algorithm,
    pub robots: usize,
    pub seed: u64,
    pub metrics: Metrics,
    pub config: TrialConfig,
}

impl TrialResult {
    pub fn trial_id(config: &TrialConfig) -> String {
        format!("{}-n{}-s{}", config.algorithm, config.robots, config.seed)
    }
}

/// What happened during one call to [`Simulation::step`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepReport {
    pub t: i64,
    pub visits: usize,
    pub selections: usize,
    /// Smallest and largest utility bias over every candidate the local
    /// reactive rule scored this step.
    pub alpha_range: Option<(f64, f64)>,
}

impl StepReport {
    fn note_alpha(&mut self, a: f64) {
        self.alpha_range = Some(match self.alpha_range {
            None => (a, a),
            Some((lo, hi)) => (lo.min(a), hi.max(a)),
        });
    }
}

/// Advances `robot` straight toward its target's center by at most
/// `speed * dt`, stopping on the center. The base never moves.
pub fn move_robot(robot: &mut RobotState, map: &GridMap, dt: f64) {
    if robot.is_base {
        return;
    }
    let Some(target) = robot.target else {
        return;
    };
    let goal = map.center(target);
    let (dx, dy) = (goal.x - robot.position.x, goal.y - robot.position.y);
    let remaining = dx.hypot(dy);
    if remaining == 0.0 {
        return;
    }
    let stride = robot.speed * dt;
    robot.heading = dy.atan2(dx);
    if stride >= remaining {
        robot.position = goal;
    } else {
        robot.position = Point::new(
            robot.position.x + dx / remaining * stride,
            robot.position.y + dy / remaining * stride,
        );
    }
}

const DEPLOY_STREAM: u64 = 0;

fn robot_rng(seed: u64, n: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(DEPLOY_STREAM + 1 + n as u64);
    rng
}

/// Deployment randomness depends on the seed alone, so trials that differ
/// only in algorithm start from the same placement.
pub fn deploy_for(config: &TrialConfig) -> Vec<RobotState> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(DEPLOY_STREAM);
    deploy(config, &mut rng)
}

pub struct Simulation {
    config: TrialConfig,
    params: PolicyParams,
    map: GridMap,
    robots: Vec<RobotState>,
    knowledge: Vec<KnowledgeBase>,
    epsilon: Vec<EpsilonState>,
    links: ConnectivityState,
    rngs: Vec<ChaCha8Rng>,
    metrics: MetricsAccumulator,
    events: EventLog,
    t: i64,
    reverse_updates: bool,
    motion: bool,
}

impl Simulation {
    /// Deploys robots from `config.seed` and selects initial targets.
    pub fn new(config: TrialConfig) -> Result<Self> {
        config.validate()?;
        let robots = deploy_for(&config);
        Self::build(config, robots, EventLog::new())
    }

    /// Like [`new`](Self::new) but keeps no event log.
    pub fn new_without_events(config: TrialConfig) -> Result<Self> {
        config.validate()?;
        let robots = deploy_for(&config);
        Self::build(config, robots, EventLog::disabled())
    }

    /// Starts from an explicit roster. `robots[0]` must be the base and
    /// every robot's id must equal its index. Targets already set on
    /// patrollers are replaced by the initial selection.
    pub fn with_robots(config: TrialConfig, robots: Vec<RobotState>) -> Result<Self> {
        config.validate()?;
        Self::build(config, robots, EventLog::new())
    }

    fn build(config: TrialConfig, robots: Vec<RobotState>, events: EventLog) -> Result<Self> {
        if robots.len() != config.robots {
            return Err(Error::Roster(format!(
                "config asks for {} robots, roster has {}",
                config.robots,
                robots.len()
            )));
        }
        for (i, r) in robots.iter().enumerate() {
            if r.id != RobotId(i) {
                return Err(Error::Roster(format!("robot at index {i} has id {}", r.id)));
            }
            if r.is_base != (i == 0) {
                return Err(Error::Roster("exactly robot 0 must be the base".into()));
            }
            if r.is_base && r.position != Point::ORIGIN {
                return Err(Error::Roster("the base must sit at the origin".into()));
            }
            if !r.is_base && !(r.speed.is_finite() && r.speed > 0.0) {
                return Err(Error::Roster(format!("{} has speed {}", r.id, r.speed)));
            }
        }
        let map = GridMap::from_config(&config);
        for r in &robots {
            map.locate(r.position)?;
        }
        let t0 = config.start_time;
        let n = robots.len();
        let links = ConnectivityState::new(config.d_s, config.d_c)
            .update_links(&robots.iter().map(|r| r.position).collect::<Vec<_>>());
        let mut sim = Simulation {
            params: config.policy_params(),
            knowledge: (0..n)
                .map(|i| KnowledgeBase::new(RobotId(i), map.len(), t0))
                .collect(),
            epsilon: vec![EpsilonState::new(0.0, t0); n],
            rngs: (0..n).map(|i| robot_rng(config.seed, i)).collect(),
            metrics: MetricsAccumulator::new(t0, map.len()),
            map,
            robots,
            links,
            events,
            t: t0,
            reverse_updates: false,
            motion: true,
            config,
        };
        sim.initialize()?;
        Ok(sim)
    }

    fn initialize(&mut self) -> Result<()> {
        let t0 = self.t;
        for r in &self.robots {
            let cell = self.map.locate(r.position)?;
            self.events
                .push(t0, EventKind::Deploy, r.id.0, Some(cell.0), r.heading);
        }
        for link in self.links.links() {
            let (a, b) = link.ends();
            let d = self.robots[a.0]
                .position
                .distance(&self.robots[b.0].position);
            self.events.push(t0, EventKind::LinkUp, a.0, Some(b.0), d);
        }
        self.select_initial_targets()?;
        let base = &self.knowledge[RobotId::BASE.0];
        self.metrics.accumulate(&self.map, base, t0)?;
        Ok(())
    }

    /// Treats each patroller's current cell as a just-completed target and
    /// lets its policy pick the first real one.
    fn select_initial_targets(&mut self) -> Result<()> {
        let t0 = self.t;
        for i in 1..self.robots.len() {
            let robot = &mut self.robots[i];
            let kb = &mut self.knowledge[i];
            let here = self.map.locate(robot.position)?;
            kb.mark_visited(here, t0)?;
            robot.target = Some(here);
            let choice = match self.config.algorithm {
                Algorithm::Lr => {
                    let (choice, _) = lr_choose(
                        robot.position,
                        robot.speed,
                        kb,
                        self.epsilon[i].epsilon,
                        &self.map,
                        &self.params,
                        Point::ORIGIN,
                    )?;
                    kb.mark_visited(choice.grid, t0)?;
                    choice
                }
                Algorithm::Cr => cr_select(robot, kb, &self.map)?,
                Algorithm::Random => random_select(robot, &self.map, &mut self.rngs[i])?,
            };
            robot.target = Some(choice.grid);
            self.events.push(
                t0,
                EventKind::TargetSelected,
                i,
                Some(choice.grid.0),
                choice.utility,
            );
        }
        Ok(())
    }

    /// Updates robots in descending id order during phase 5. Results must not
    /// change; exposed so tests can check that.
    pub fn set_reverse_update_order(&mut self, reverse: bool) {
        self.reverse_updates = reverse;
    }

    /// With motion off, phase 1 is skipped and every robot holds position.
    /// Used for scripted topologies.
    pub fn set_motion(&mut self, enabled: bool) {
        self.motion = enabled;
    }

    pub fn config(&self) -> &TrialConfig {
        &self.config
    }

    pub fn t(&self) -> i64 {
        self.t
    }

    pub fn is_finished(&self) -> bool {
        self.t >= self.config.duration
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn robots(&self) -> &[RobotState] {
        &self.robots
    }

    pub fn knowledge(&self, n: RobotId) -> &KnowledgeBase {
        &self.knowledge[n.0]
    }

    pub fn epsilon(&self, n: RobotId) -> EpsilonState {
        self.epsilon[n.0]
    }

    pub fn links(&self) -> &ConnectivityState {
        &self.links
    }

    pub fn events(&self) -> &EventLog {
        &self.events
    }

    pub fn metrics(&self) -> &MetricsAccumulator {
        &self.metrics
    }

    /// Runs one timestep.
    pub fn step(&mut self) -> Result<StepReport> {
        let t = self.t + 1;
        let mut report = StepReport {
            t,
            ..StepReport::default()
        };

        // 1. motion
        if self.motion {
            for robot in &mut self.robots {
                move_robot(robot, &self.map, 1.0);
            }
        }

        // 2. connectivity
        let positions: Vec<Point> = self.robots.iter().map(|r| r.position).collect();
        let links = self.links.update_links(&positions);
        let (up, down) = links.diff(&self.links);
        for (kind, changed) in [(EventKind::LinkUp, up), (EventKind::LinkDown, down)] {
            for link in changed {
                let (a, b) = link.ends();
                let d = positions[a.0].distance(&positions[b.0]);
                self.events.push(t, kind, a.0, Some(b.0), d);
            }
        }
        self.links = links;

        // 3. ground-truth visits
        let mut visited: Vec<Vec<GridId>> = vec![Vec::new(); self.robots.len()];
        for robot in self.robots.iter().filter(|r| !r.is_base) {
            for k in self.map.cells_in_visit_range(robot.position) {
                let before = self.map.cell(k)?.idleness(t);
                self.events
                    .push(t, EventKind::Visit, robot.id.0, Some(k.0), before as f64);
            }
            visited[robot.id.0] = self.map.register_visits(robot.position, t);
            report.visits += visited[robot.id.0].len();
        }

        // 4. exchange of end-of-previous-step state
        let envelopes: Vec<Option<Envelope>> = (0..self.robots.len())
            .map(|i| {
                let id = RobotId(i);
                self.links
                    .links()
                    .iter()
                    .any(|l| l.other(id).is_some())
                    .then(|| Envelope {
                        sender: id,
                        knowledge: Arc::new(self.knowledge[i].clone()),
                        epsilon: self.epsilon[i].epsilon,
                        base_contact: self.epsilon[i].base_contact,
                    })
            })
            .collect();
        let inboxes = self.links.exchange(&envelopes);

        // 5. per-robot update
        let mut order: Vec<usize> = (0..self.robots.len()).collect();
        if self.reverse_updates {
            order.reverse();
        }
        let mut robot_events: Vec<Vec<(EventKind, Option<usize>, f64)>> =
            vec![Vec::new(); self.robots.len()];
        for i in order {
            let out = &mut robot_events[i];
            let kb = &mut self.knowledge[i];
            let inbox = &inboxes[i];
            if i == RobotId::BASE.0 {
                for a in kb.merge(inbox.iter().map(|e| e.knowledge.as_ref())) {
                    if a.entry.refresh > a.previous.refresh {
                        out.push((
                            EventKind::BaseReport,
                            Some(a.grid.0),
                            a.entry.refresh as f64,
                        ));
                    }
                }
                kb.advance_time();
                continue;
            }
            let robot = &mut self.robots[i];
            let choice: Option<TargetChoice> = match self.config.algorithm {
                Algorithm::Lr => {
                    let res = lr_select(
                        robot,
                        kb,
                        &mut self.epsilon[i],
                        inbox,
                        &visited[i],
                        &self.map,
                        &self.params,
                        t,
                    )?;
                    for m in &res.epsilon.absorbed_from {
                        let peer_eps = inbox
                            .iter()
                            .find(|e| e.sender == *m)
                            .map_or(0.0, |e| e.epsilon);
                        out.push((EventKind::EpsilonTransfer, Some(m.0), peer_eps));
                    }
                    for c in &res.candidates {
                        report.note_alpha(c.alpha);
                    }
                    res.choice
                }
                Algorithm::Cr | Algorithm::Random => {
                    kb.merge(inbox.iter().map(|e| e.knowledge.as_ref()));
                    kb.advance_time();
                    for &k in &visited[i] {
                        kb.mark_visited(k, t)?;
                    }
                    let completed = robot.target.is_some_and(|g| visited[i].contains(&g));
                    if completed {
                        let choice = if self.config.algorithm == Algorithm::Cr {
                            cr_select(robot, kb, &self.map)?
                        } else {
                            random_select(robot, &self.map, &mut self.rngs[i])?
                        };
                        robot.target = Some(choice.grid);
                        Some(choice)
                    } else {
                        None
                    }
                }
            };
            if let Some(c) = choice {
                out.push((EventKind::TargetSelected, Some(c.grid.0), c.utility));
                report.selections += 1;
            }
        }
        for (i, evs) in robot_events.into_iter().enumerate() {
            for (kind, grid, value) in evs {
                self.events.push(t, kind, i, grid, value);
            }
        }

        // 6. metrics
        self.metrics
            .accumulate(&self.map, &self.knowledge[RobotId::BASE.0], t)?;
        self.t = t;
        Ok(report)
    }

    /// Steps until the configured end time and returns the result.
    pub fn run(mut self) -> Result<(TrialResult, EventLog)> {
        while !self.is_finished() {
            self.step()?;
        }
        self.finish()
    }

    /// Final metrics; the trial must have reached its end time.
    pub fn finish(self) -> Result<(TrialResult, EventLog)> {
        let metrics = self.metrics.finalize(self.config.duration)?;
        let result = TrialResult {
            trial_id: TrialResult::trial_id(&self.config),
            algorithm: self.config.algorithm,
            robots: self.config.robots,
            seed: self.config.seed,
            metrics,
            config: self.config,
        };
        Ok((result, self.events))
    }
}

/// Deploys, runs every step and finalizes one trial.
pub fn run_trial(config: TrialConfig) -> Result<(TrialResult, EventLog)> {
    Simulation::new(config)?.run()
}

/// [`run_trial`] without keeping an event log.
pub fn run_trial_metrics(config: TrialConfig) -> Result<TrialResult> {
    Ok(Simulation::new_without_events(config)?.run()?.0)
}
