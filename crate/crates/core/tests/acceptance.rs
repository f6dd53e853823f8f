//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::fs;
use std::process::Command;
use std::time::Instant;

use patrolsim::engine::{run_trial, EventKind, Simulation};
use patrolsim::experiment::{quartiles, run_batch, threads_from_env, BatchSpec};
use patrolsim::knowledge::KnowledgeBase;
use patrolsim::network::Envelope;
use patrolsim::policy::{
    alpha, lr_select, update_epsilon, utility, EpsilonState, NeighborReport, PolicyParams,
};
use patrolsim::world::{GridId, GridMap, Point, RobotId, RobotState};
use patrolsim::{Algorithm, TrialConfig, TrialResult};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

fn check(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn median(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    quartiles(&v).expect("non-empty sample").median
}

/// Ten paired seeds for every algorithm at N = 8, plus LR at N = 4 and 12.
struct Sweep {
    results: Vec<TrialResult>,
}

impl Sweep {
    fn run() -> Self {
        let threads = threads_from_env().expect("valid thread cap");
        let base = BatchSpec {
            trials: 10,
            ..BatchSpec::default()
        };
        let n8 = BatchSpec {
            robot_counts: vec![8],
            ..base.clone()
        };
        let lr = BatchSpec {
            algorithms: vec![Algorithm::Lr],
            robot_counts: vec![4, 12],
            ..base
        };
        let mut results = Vec::new();
        for spec in [n8, lr] {
            let out = run_batch(&spec, threads).expect("batch starts");
            assert!(out.failures.is_empty(), "{:?}", out.failures);
            results.extend(out.results);
        }
        Sweep { results }
    }

    fn cell(&self, alg: Algorithm, n: usize) -> Vec<&TrialResult> {
        let cell: Vec<_> = self
            .results
            .iter()
            .filter(|r| r.algorithm == alg && r.robots == n)
            .collect();
        assert_eq!(cell.len(), 10);
        cell
    }

    fn median_of(&self, alg: Algorithm, n: usize, f: impl Fn(&TrialResult) -> f64) -> f64 {
        median(self.cell(alg, n).into_iter().map(f))
    }
}

fn coverage(s: &Sweep) -> Verdict {
    let iw: Vec<i64> = s
        .cell(Algorithm::Lr, 8)
        .iter()
        .map(|r| r.metrics.worst_idleness)
        .collect();
    let ok = iw.iter().all(|&v| v < 40_000);
    check(ok, format!("LR N=8 I_W per seed {iw:?}, bound 40000"))
}

fn idleness_order(s: &Sweep) -> Verdict {
    let m = |a| s.median_of(a, 8, |r| r.metrics.graph_idleness);
    let (lr, cr, rnd) = (m(Algorithm::Lr), m(Algorithm::Cr), m(Algorithm::Random));
    check(
        lr < cr && lr < rnd,
        format!("median I_G at N=8: lr {lr:.1}, cr {cr:.1}, random {rnd:.1}"),
    )
}

fn sa_order(s: &Sweep) -> Verdict {
    let mean = |a| s.median_of(a, 8, |r| r.metrics.mean_sa_delay);
    let worst = |a| s.median_of(a, 8, |r| r.metrics.worst_sa_delay as f64);
    let (ml, mc, mr) = (
        mean(Algorithm::Lr),
        mean(Algorithm::Cr),
        mean(Algorithm::Random),
    );
    let (wl, wc, wr) = (
        worst(Algorithm::Lr),
        worst(Algorithm::Cr),
        worst(Algorithm::Random),
    );
    check(
        ml < mc && ml < mr && wl < wc && wl < wr,
        format!(
            "median D_MSA lr {ml:.1}, cr {mc:.1}, random {mr:.1}; \
             median D_WSA lr {wl}, cr {wc}, random {wr}"
        ),
    )
}

fn scaling(s: &Sweep) -> Verdict {
    let m = |n| s.median_of(Algorithm::Lr, n, |r| r.metrics.graph_idleness);
    let (a, b, c) = (m(4), m(8), m(12));
    check(
        a > b && b > c,
        format!("LR median I_G: N=4 {a:.1}, N=8 {b:.1}, N=12 {c:.1}"),
    )
}

fn oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0AC1E);
    let mut lines = Vec::new();
    let mut ok = true;
    for i in 0..5 {
        let config = TrialConfig {
            seed: rng.gen(),
            algorithm: Algorithm::ALL[i % 3],
            duration: 2000,
            ..TrialConfig::default()
        };
        let (result, log) = run_trial(config.clone()).expect("trial runs");
        let r = common::replay(&log, config.grids(), config.start_time, config.duration);
        let m = result.metrics;
        let same = m.graph_idleness == r.graph_idleness()
            && m.worst_idleness == r.worst_idleness
            && m.mean_sa_delay == r.mean_sa_delay()
            && m.worst_sa_delay == r.worst_delay;
        ok &= same;
        lines.push(format!(
            "{}{}",
            result.trial_id,
            if same { "" } else { " MISMATCH" }
        ));
    }
    check(ok, format!("replayed {}", lines.join(", ")))
}

fn equations() -> Verdict {
    let p = PolicyParams::default();
    let (e, cap) = (p.epsilon_switch, p.epsilon_max);
    let mut failed = Vec::new();
    let mut expect = |name: &str, got: f64, want: f64| {
        if got != want {
            failed.push(format!("{name}: got {got}, want {want}"));
        }
    };

    for (g, r) in [(300.0, 100.0), (100.0, 300.0), (200.0, 200.0)] {
        expect("alpha at switch", alpha(e, e, cap, g, r), 1.0);
    }
    expect(
        "alpha at cap, farther",
        alpha(cap, e, cap, 300.0, 100.0),
        1.0 / 6.0,
    );
    expect(
        "alpha at zero, nearer",
        alpha(0.0, e, cap, 100.0, 300.0),
        5.0 / 6.0,
    );

    expect("utility idle 0", utility(0, 17, 0.75), 0.75);
    expect("utility 60/30", utility(60, 30, 1.0), 3.0);
    expect("utility 30/30 half", utility(30, 30, 0.5), 1.0);

    let report = |id, epsilon, base_contact| NeighborReport {
        id: RobotId(id),
        epsilon,
        base_contact,
    };
    let own = EpsilonState::new(100.0, 5);
    expect(
        "epsilon isolated",
        update_epsilon(own, &[], &p).state.epsilon,
        100.0,
    );
    expect(
        "epsilon oldest absorbs",
        update_epsilon(own, &[report(2, 200.0, 50)], &p)
            .state
            .epsilon,
        301.0,
    );
    let fresh = EpsilonState::new(700.0, 90);
    expect(
        "epsilon newest releases",
        update_epsilon(fresh, &[report(2, 200.0, 50), report(3, 900.0, 10)], &p)
            .state
            .epsilon,
        0.0,
    );

    // direct base link at t = 500: reset, then the +1 increment
    let map = GridMap::new(20, 20, 30.0, 3.0, 0);
    let mut robot = RobotState::patroller(RobotId(1), Point::new(45.0, 45.0), 1.25);
    robot.target = Some(GridId(200));
    let mut kb = KnowledgeBase::new(RobotId(1), map.len(), 0);
    let mut eps = EpsilonState::new(1234.0, 3);
    let base_env = Envelope {
        sender: RobotId::BASE,
        knowledge: std::sync::Arc::new(KnowledgeBase::new(RobotId::BASE, map.len(), 0)),
        epsilon: 0.0,
        base_contact: 0,
    };
    lr_select(
        &mut robot,
        &mut kb,
        &mut eps,
        &[base_env],
        &[],
        &map,
        &p,
        500,
    )
    .expect("selection runs");
    expect("base link epsilon", eps.epsilon, 1.0);
    expect("base link contact", eps.base_contact as f64, 500.0);

    check(
        failed.is_empty(),
        if failed.is_empty() {
            "3 alpha cases, 3 utility traces, 3 epsilon traces, base-link trace exact".into()
        } else {
            failed.join("; ")
        },
    )
}

fn invariants() -> Verdict {
    let seeds = [0u64, 1, 2, 3, 4];
    let mut steps = 0;
    let mut scored = 0usize;
    for seed in seeds {
        let config = TrialConfig {
            robots: 12,
            seed,
            duration: 1000,
            ..TrialConfig::default()
        };
        let cap = config.epsilon_max;
        let mut sim = Simulation::new_without_events(config).expect("valid config");
        let mut refresh: Vec<Vec<i64>> = (0..12)
            .map(|i| {
                sim.knowledge(RobotId(i))
                    .entries()
                    .iter()
                    .map(|e| e.refresh)
                    .collect()
            })
            .collect();
        while !sim.is_finished() {
            let report = sim.step().expect("step runs");
            steps += 1;
            let t = report.t;
            if let Some((lo, hi)) = report.alpha_range {
                scored += 1;
                if lo < 1.0 / 6.0 || hi > 11.0 / 6.0 {
                    return Err(format!("seed {seed} t={t}: alpha range [{lo}, {hi}]"));
                }
            }
            for (i, seen) in refresh.iter_mut().enumerate() {
                let eps = sim.epsilon(RobotId(i)).epsilon;
                if !(0.0..=cap).contains(&eps) {
                    return Err(format!("seed {seed} t={t}: robot {i} epsilon {eps}"));
                }
                for (k, e) in sim.knowledge(RobotId(i)).entries().iter().enumerate() {
                    if e.refresh < seen[k] {
                        return Err(format!(
                            "seed {seed} t={t}: robot {i} grid {k} refresh {} -> {}",
                            seen[k], e.refresh
                        ));
                    }
                    seen[k] = e.refresh;
                }
            }
        }
        let (result, _) = sim.finish().expect("trial complete");
        let m = result.metrics;
        if (m.worst_idleness as f64) < m.graph_idleness {
            return Err(format!(
                "seed {seed}: I_W {} < I_G {}",
                m.worst_idleness, m.graph_idleness
            ));
        }
    }
    Ok(format!(
        "{} seeds x 1000 steps at N=12, {steps} steps checked, {scored} with scored candidates",
        seeds.len()
    ))
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec =
        r#"{"robot_counts": [4, 8], "trials": 2, "base_seed": 17, "config": {"duration": 3000}}"#;
    fs::write(dir.path().join("spec.json"), spec).map_err(|e| e.to_string())?;
    let mut files = Vec::new();
    for (out, threads) in [("a", "1"), ("b", "3")] {
        let status = Command::new(env!("CARGO_BIN_EXE_patrolsim"))
            .args(["batch", "--config", "spec.json", "--out", out])
            .current_dir(dir.path())
            .env("PATROLSIM_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(String::from_utf8_lossy(&status.stderr).into_owned());
        }
        files.push(fs::read(dir.path().join(out).join("trials.csv")).map_err(|e| e.to_string())?);
    }
    let rows = files[0].iter().filter(|&&b| b == b'\n').count() - 1;
    check(
        files[0] == files[1] && rows == 12,
        format!(
            "{rows} rows, {} bytes, runs with 1 and 3 threads identical: {}",
            files[0].len(),
            files[0] == files[1]
        ),
    )
}

fn propagation() -> Verdict {
    // base, then patrollers 75 m apart: each only reaches its neighbours
    let config = TrialConfig {
        robots: 4,
        duration: 200,
        ..TrialConfig::default()
    };
    let robots = vec![
        RobotState::base(),
        RobotState::patroller(RobotId(1), Point::new(75.0, 15.0), 1.25),
        RobotState::patroller(RobotId(2), Point::new(150.0, 15.0), 1.25),
        RobotState::patroller(RobotId(3), Point::new(225.0, 15.0), 1.25),
    ];
    let mut sim = Simulation::with_robots(config, robots).map_err(|e| e.to_string())?;
    sim.set_motion(false);
    let map = sim.map().clone();
    let hops = [
        (RobotId(1), Point::new(75.0, 15.0), 1),
        (RobotId(2), Point::new(150.0, 15.0), 2),
        (RobotId(3), Point::new(225.0, 15.0), 3),
    ];
    let (_, log) = sim.run().map_err(|e| e.to_string())?;

    let mut checked = 0;
    for (robot, position, hop) in hops {
        let cell = map.locate(position).map_err(|e| e.to_string())?;
        // robots sitting on a center visit it every step
        let visits: Vec<i64> = log
            .of_kind(EventKind::Visit)
            .filter(|e| e.robot == robot.0 && e.grid == Some(cell.0))
            .map(|e| e.t)
            .collect();
        if visits.is_empty() {
            continue;
        }
        for e in log
            .of_kind(EventKind::BaseReport)
            .filter(|e| e.grid == Some(cell.0))
        {
            let visit = e.value as i64;
            if e.t != visit + hop || !visits.contains(&visit) {
                return Err(format!(
                    "visit by {robot} to grid {} at {visit} reached the base at {} (hops {hop})",
                    cell.0, e.t
                ));
            }
            checked += 1;
        }
        let last = *visits.last().unwrap();
        let expected = visits.iter().filter(|&&v| v + hop <= 200).count();
        let arrived = log
            .of_kind(EventKind::BaseReport)
            .filter(|e| e.grid == Some(cell.0))
            .count();
        if arrived != expected {
            return Err(format!(
                "grid {}: {arrived} base reports for {expected} deliverable visits (last visit {last})",
                cell.0
            ));
        }
    }
    check(
        checked > 0,
        format!("{checked} base reports, each exactly hop-distance after its visit"),
    )
}

fn main() {
    let start = Instant::now();
    let sweep = Sweep::run();
    let sweep_time = start.elapsed();

    let criteria: Vec<(&str, Verdict)> = vec![
        ("coverage", coverage(&sweep)),
        ("idleness ordering", idleness_order(&sweep)),
        ("situation-awareness ordering", sa_order(&sweep)),
        ("scaling with N", scaling(&sweep)),
        ("oracle replay", oracle()),
        ("equation suite", equations()),
        ("invariant fuzz", invariants()),
        ("batch determinism", determinism()),
        ("propagation bound", propagation()),
    ];

    let mut failures = 0;
    for (i, (name, verdict)) in criteria.iter().enumerate() {
        match verdict {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL [{}] {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{}/{} criteria passed ({} trials in the sweep took {:.1}s, {:.1}s total)",
        criteria.len() - failures,
        criteria.len(),
        sweep.results.len(),
        sweep_time.as_secs_f64(),
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
