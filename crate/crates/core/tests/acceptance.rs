//! Acceptance suite: one test per criterion, each printing a PASS line with
//! its measured evidence (visible under `cargo test -- --nocapture`).
//!
//! Tolerances are pinned here. Physical separations are compared with the
//! crate-wide 1e-12 zero tolerance; sliding-contact equilibria measure at
//! the safety distance plus or minus machine noise, orders of magnitude
//! above the actual collision threshold.

use rayon::prelude::*;

use ringswarm::avoid::cbc::{barrier_terms, cbc_constraint, cbc_min_sensing_radius, BarrierTerms};
use ringswarm::avoid::orca::{fallback_safest, solve_velocity_lp};
use ringswarm::avoid::qp::solve_qp;
use ringswarm::avoid::field::{avoid_gyro, avoid_potential};
use ringswarm::avoid::{avoid_none, AvoidanceRequest};
use ringswarm::metrics::{metrics_step, ring_quality};
use ringswarm::output::{metrics_csv, summary_json, trajectory_csv};
use ringswarm::rng::Counter;
use ringswarm::sim::{compute_dt, detect_and_respawn, run, run_pair_encounter, SimConfig};
use ringswarm::swarm::{neighbor_set, NeighborView, SwarmState};
use ringswarm::sweep::{
    average_over_lr, flatten_best_cr, results_csv, run_sweep, AxesSpec, AxisScale, AxisSpec,
    BaseSpec, SeedsSpec, SweepSpec,
};
use ringswarm::testing;
use ringswarm::vec2::{crossz, rot90, sgnz, Vec2};
use ringswarm::{Strategy, SwarmParams};

/// Zero-comparison tolerance shared across the suite.
const ZERO_TOL: f64 = 1e-12;

fn pass(criterion: u32, name: &str, detail: String) {
    println!("acceptance criterion {criterion} ({name}): PASS - {detail}");
}

fn baseline_params() -> SwarmParams {
    SwarmParams {
        n: 20,
        alpha: 0.001,
        beta: 1.0,
        v0: 0.12,
        t_d: 2.5,
        r: 0.15,
        l_r: 1.0,
        c_r: 1.0,
        a_max: 0.6,
    }
}

#[test]
fn criterion_01_ring_baseline() {
    // strategy none, collisions off, stabilize 3000 s, measure 500 s:
    // lambda >= 0.9 in at least 45 of 50 seeds
    let lambdas: Vec<f64> = (0..50u64)
        .into_par_iter()
        .map(|seed| {
            let mut cfg = SimConfig::new(baseline_params(), Strategy::None, seed);
            cfg.t_total = 3500.0;
            cfg.t_measure = 500.0;
            cfg.collisions_enabled = false;
            run(&cfg).expect("baseline run").lambda
        })
        .collect();
    let good = lambdas.iter().filter(|&&l| l >= 0.9).count();
    assert!(
        good >= 45,
        "only {good}/50 seeds reached lambda >= 0.9: {lambdas:?}"
    );
    pass(1, "ring baseline", format!("{good}/50 seeds with lambda >= 0.9"));
}

#[test]
fn criterion_02_constants() {
    let dt = compute_dt(0.15, 0.12, 0.015);
    assert_eq!(dt, 0.015, "dt must be exactly the cap for r = 0.15");
    let params = baseline_params();
    assert_eq!(params.safety_distance(), 2.1 * 0.15, "D_s = 2.1 r exactly");
    let via_config = SimConfig::new(params, Strategy::None, 0).dt();
    assert_eq!(via_config, 0.015);
    pass(2, "constants", format!("dt = {dt}, D_s = {}", params.safety_distance()));
}

#[test]
fn criterion_03_respawn_geometry() {
    let r = 0.15;
    let mut state = SwarmState::with_capacity(4);
    state.positions = vec![
        Vec2::new(1.0, 2.0),
        Vec2::new(1.1, 2.05), // collides with agent 0
        Vec2::new(4.0, -1.0),
        Vec2::new(-2.0, 5.0),
    ];
    state.velocities = vec![Vec2::new(0.1, -0.05); 4];
    state.respawns = vec![0; 4];
    let mut events = Vec::new();
    let processed = detect_and_respawn(&mut state, r, 7.0, &mut events);
    assert_eq!(processed, 1);
    let r_safe = Vec2::new(-2.0, -1.0);
    assert_eq!(state.positions[0], r_safe - Vec2::new(4.0 * r, 4.0 * r));
    assert_eq!(state.positions[1], r_safe - Vec2::new(8.0 * r, 8.0 * r));
    assert_eq!(state.velocities[0], Vec2::ZERO);
    assert_eq!(state.velocities[1], Vec2::ZERO);
    assert_eq!(state.respawns[0], 1);
    assert_eq!(state.respawns[1], 1);
    pass(
        3,
        "respawn geometry",
        format!(
            "pair moved to {:?} and {:?} with zero velocity",
            state.positions[0], state.positions[1]
        ),
    );
}

#[test]
fn criterion_04_cbc_pairwise_safety() {
    let d_s = 0.315;
    let details: Vec<String> = [0.01, 1.0, 100.0]
        .par_iter()
        .map(|&c_r| {
            let bound = cbc_min_sensing_radius(c_r, 0.6, 0.24, d_s);
            let params = SwarmParams {
                c_r,
                l_r: bound,
                ..baseline_params()
            };
            let mut cfg = SimConfig::new(params, Strategy::Cbc, 0);
            cfg.t_total = 1000.0;
            cfg.t_measure = 100.0;
            let sep = (2.0 * bound).max(3.0);
            let min_dist = run_pair_encounter(
                &cfg,
                [Vec2::new(-sep / 2.0, 0.0), Vec2::new(sep / 2.0, 0.0)],
                [Vec2::new(0.12, 0.0), Vec2::new(-0.12, 0.0)],
            )
            .expect("cbc pair run");
            assert!(
                min_dist > d_s,
                "c_r = {c_r}: min distance {min_dist} not above D_s = {d_s}"
            );
            format!("c_r {c_r}: min {min_dist:.6}")
        })
        .collect();
    pass(4, "cbc pairwise safety", details.join("; "));
}

#[test]
fn criterion_05_orca_pairwise_safety() {
    let d_s = 0.315;
    let details: Vec<String> = [0.5, 2.0, 10.0]
        .par_iter()
        .map(|&c_r| {
            // sensing covers the reciprocal-safety requirement; the huge
            // acceleration cap keeps the clip non-binding
            let l_r = (2.0f64 * 0.12 * c_r + d_s).max(1.0) * 1.2;
            let params = SwarmParams {
                c_r,
                l_r,
                a_max: 1e6,
                ..baseline_params()
            };
            let mut cfg = SimConfig::new(params, Strategy::Orca, 0);
            cfg.t_total = 1000.0;
            cfg.t_measure = 100.0;
            let head_on = run_pair_encounter(
                &cfg,
                [Vec2::new(-2.0, 0.0), Vec2::new(2.0, 0.0)],
                [Vec2::new(0.12, 0.0), Vec2::new(-0.12, 0.0)],
            )
            .expect("orca head-on");
            let crossing = run_pair_encounter(
                &cfg,
                [Vec2::new(-2.0, 0.0), Vec2::new(0.0, -2.0)],
                [Vec2::new(0.12, 0.0), Vec2::new(0.0, 0.12)],
            )
            .expect("orca crossing");
            // the pair settles into sliding contact at exactly D_s, so the
            // measured minimum carries position-scale rounding noise; the
            // shared zero tolerance separates that from a real penetration
            for (name, dist) in [("head-on", head_on), ("crossing", crossing)] {
                assert!(
                    dist - d_s > -ZERO_TOL,
                    "c_r = {c_r} {name}: min distance {dist} below D_s = {d_s}"
                );
            }
            format!("c_r {c_r}: head-on {head_on:.6}, crossing {crossing:.6}")
        })
        .collect();
    pass(5, "orca pairwise safety", details.join("; "));
}

#[test]
fn criterion_06_solver_oracles() {
    // box QP against the dense grid-search oracle
    let box_bound = 0.6;
    let qp_worst = (0..1000u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = Counter::new(0xACCE97, k);
            let (target, constraints) =
                testing::random_feasible_qp_instance(&mut rng, box_bound, 6);
            let sol = solve_qp(target, &constraints, box_bound)
                .feasible()
                .expect("witness guarantees feasibility");
            let oracle = testing::qp_grid_oracle(target, &constraints, box_bound, 1e-3)
                .expect("oracle finds the witness region");
            let err = (sol - oracle).norm();
            assert!(err <= 2e-3, "instance {k}: {err} > 2e-3");
            err
        })
        .reduce(|| 0.0, f64::max);

    // velocity program against the disc-sampling oracle
    let cap = 0.12;
    let lp_worst = (0..1000u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = Counter::new(0x15AAC, k);
            let (v_pref, planes) = testing::random_feasible_lp_instance(&mut rng, cap, 6);
            let (v, fell_back) = solve_velocity_lp(v_pref, &planes, cap);
            assert!(!fell_back, "instance {k}: witness region reported empty");
            let oracle =
                testing::lp_disc_oracle(v_pref, &planes, cap, 1e-3).expect("oracle in disc");
            let err = (v - oracle).norm();
            assert!(err <= 2e-3, "instance {k}: {err} > 2e-3");
            err
        })
        .reduce(|| 0.0, f64::max);

    // least-violating fallback against the sampled minimax objective
    let fb_worst = (0..1000u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = Counter::new(0xFA11, k);
            let planes = testing::random_infeasible_plane_triple(&mut rng, cap);
            let (_, oracle_obj) = testing::minimax_disc_oracle(&planes, cap, 1e-3);
            assert!(oracle_obj > 1e-3, "instance {k} must be jointly infeasible");
            let v = fallback_safest(Vec2::ZERO, &planes, cap);
            assert!(v.norm() <= cap + 1e-9);
            let obj = planes
                .iter()
                .map(|pl| pl.violation(v))
                .fold(f64::NEG_INFINITY, f64::max);
            let err = (obj - oracle_obj).abs();
            assert!(err <= 2e-3, "instance {k}: objective gap {err} > 2e-3");
            err
        })
        .reduce(|| 0.0, f64::max);

    pass(
        6,
        "solver oracles",
        format!("worst errors: qp {qp_worst:.2e}, lp {lp_worst:.2e}, fallback {fb_worst:.2e}"),
    );
}

#[test]
fn criterion_07_metric_oracle() {
    // independent direct-from-definition recomputation
    fn oracle(positions: &[Vec2], velocities: &[Vec2]) -> (f64, f64) {
        let n = positions.len() as f64;
        let mut mx = 0.0;
        let mut my = 0.0;
        for p in positions {
            mx += p.x;
            my += p.y;
        }
        let mu = Vec2::new(mx / n, my / n);
        let mut r_min = f64::INFINITY;
        let mut r_max = 0.0f64;
        for p in positions {
            let d = ((p.x - mu.x).powi(2) + (p.y - mu.y).powi(2)).sqrt();
            r_min = r_min.min(d);
            r_max = r_max.max(d);
        }
        let phi = if r_max == 0.0 {
            1.0
        } else {
            1.0 - (r_min / r_max) * (r_min / r_max)
        };
        let mut tau = 0.0;
        for (p, v) in positions.iter().zip(velocities) {
            let radial = Vec2::new(p.x - mu.x, p.y - mu.y);
            let rn = radial.norm();
            let vn = v.norm();
            tau += if rn == 0.0 || vn == 0.0 {
                1.0
            } else {
                (radial.x / rn * (v.x / vn) + radial.y / rn * (v.y / vn)).abs()
            };
        }
        (phi, tau / n)
    }

    let mut worst = 0.0f64;
    for case in 0..100u64 {
        let mut rng = Counter::new(0x3E791C, case);
        let n = 1 + (rng.next_u64() % 40) as usize;
        let positions: Vec<Vec2> = (0..n)
            .map(|_| Vec2::new(rng.next_range(-10.0, 10.0), rng.next_range(-10.0, 10.0)))
            .collect();
        let velocities: Vec<Vec2> = (0..n)
            .map(|_| Vec2::new(rng.next_range(-0.3, 0.3), rng.next_range(-0.3, 0.3)))
            .collect();
        let (phi, tau, _) = metrics_step(&positions, &velocities);
        let (phi_o, tau_o) = oracle(&positions, &velocities);
        let lambda = ring_quality(phi, tau);
        let lambda_o = 1.0 - phi_o.max(tau_o);
        for (a, b) in [(phi, phi_o), (tau, tau_o), (lambda, lambda_o)] {
            let err = (a - b).abs();
            assert!(err <= 1e-12, "case {case}: {a} vs {b}");
            worst = worst.max(err);
        }
    }
    pass(7, "metric oracle", format!("100 states, worst deviation {worst:.2e}"));
}

#[test]
fn criterion_08_collision_regime() {
    // potential with zero cautiousness cannot protect the swarm
    let params = SwarmParams {
        c_r: 0.0,
        ..baseline_params()
    };
    let mut cfg = SimConfig::new(params, Strategy::Potential, 0);
    cfg.t_total = 2000.0;
    cfg.t_measure = 500.0;
    let out = run(&cfg).expect("collision regime run");
    assert!(out.collisions() > 0, "no collisions in 2000 s");
    pass(
        8,
        "collision regime",
        format!("{} collisions within 2000 s", out.collisions()),
    );
}

/// Spearman rank correlation with average ranks on ties.
fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let n = v.len();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).expect("finite"));
        let mut out = vec![0.0; n];
        let mut k = 0;
        while k < n {
            let mut j = k;
            while j + 1 < n && v[idx[j + 1]] == v[idx[k]] {
                j += 1;
            }
            let rank = (k + j) as f64 / 2.0 + 1.0;
            for &i in &idx[k..=j] {
                out[i] = rank;
            }
            k = j + 1;
        }
        out
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    let n = xs.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for i in 0..xs.len() {
        num += (rx[i] - mean) * (ry[i] - mean);
        dx += (rx[i] - mean).powi(2);
        dy += (ry[i] - mean).powi(2);
    }
    num / (dx * dy).sqrt()
}

fn degradation_spec(strategy: &str, cr_min: f64, cr_max: f64) -> SweepSpec {
    SweepSpec {
        base: BaseSpec {
            strategy: strategy.into(),
            n: 20,
            alpha: 0.001,
            beta: 1.0,
            v0: 0.12,
            t_d: 2.5,
            r: 0.15,
            l_r: 1.0,
            c_r: 1.0,
            a_max: 0.6,
            t_total: 3000.0,
            t_measure: 500.0,
            dt_cap: 0.015,
            record_stride: 10,
            collisions: true,
        },
        axes: AxesSpec {
            r: Some(AxisSpec {
                values: Some(vec![0.02, 0.08, 0.15, 0.2, 0.25]),
                min: None,
                max: None,
                count: None,
                scale: None,
            }),
            l_r: Some(AxisSpec {
                values: Some(vec![0.5, 1.0]),
                min: None,
                max: None,
                count: None,
                scale: None,
            }),
            c_r: Some(AxisSpec {
                values: None,
                min: Some(cr_min),
                max: Some(cr_max),
                count: Some(10),
                scale: Some(AxisScale::Log),
            }),
            n: None,
        },
        seeds: SeedsSpec {
            values: None,
            base: Some(1000),
            count: Some(5),
        },
    }
}

#[test]
fn criterion_09_size_degradation_trend() {
    // reduced reproduction of the size-vs-quality study: best-c_r lambda
    // averaged over l_r must decrease in r (Spearman <= -0.8) for both
    // safety-filter strategies
    let mut details = Vec::new();
    for (strategy, cr_min, cr_max) in [("orca", 0.1, 10.0), ("cbc", 1e-5, 1e5)] {
        let spec = degradation_spec(strategy, cr_min, cr_max);
        let result = run_sweep(&spec, 8, None, false).expect("sweep");
        let missing = result.records.iter().filter(|r| r.lambda.is_none()).count();
        assert_eq!(missing, 0, "{strategy}: {missing} aborted cells");
        let flat = flatten_best_cr(&result);
        let lines = average_over_lr(&flat);
        let xs: Vec<f64> = lines.iter().map(|l| l.r).collect();
        let ys: Vec<f64> = lines
            .iter()
            .map(|l| l.mean_best_lambda.expect("no missing cells"))
            .collect();
        let rho = spearman(&xs, &ys);
        assert!(
            rho <= -0.8,
            "{strategy}: Spearman {rho} > -0.8; lambda(r) = {ys:?}"
        );
        details.push(format!("{strategy}: rho {rho:.3}, lambda(r) {ys:?}"));
    }
    pass(9, "size-degradation trend", details.join("; "));
}

#[test]
fn criterion_10_determinism() {
    // single run, twice: byte-identical exports
    let mut cfg = SimConfig::new(baseline_params(), Strategy::Orca, 31);
    cfg.params.c_r = 1.0;
    cfg.t_total = 100.0;
    cfg.t_measure = 20.0;
    cfg.snapshot_times = vec![0.0, 50.0, 100.0];
    let a = run(&cfg).expect("run a");
    let b = run(&cfg).expect("run b");
    assert_eq!(a, b, "full outputs differ");
    assert_eq!(metrics_csv(&a), metrics_csv(&b));
    assert_eq!(trajectory_csv(&a), trajectory_csv(&b));
    assert_eq!(summary_json(&cfg, &a), summary_json(&cfg, &b));

    // sweep with 1 vs 8 workers: byte-identical results file
    let spec = SweepSpec {
        base: BaseSpec {
            strategy: "gyro".into(),
            n: 8,
            alpha: 0.001,
            beta: 1.0,
            v0: 0.12,
            t_d: 2.5,
            r: 0.15,
            l_r: 1.0,
            c_r: 0.5,
            a_max: 0.6,
            t_total: 30.0,
            t_measure: 10.0,
            dt_cap: 0.015,
            record_stride: 10,
            collisions: true,
        },
        axes: AxesSpec {
            r: Some(AxisSpec {
                values: Some(vec![0.1, 0.15]),
                min: None,
                max: None,
                count: None,
                scale: None,
            }),
            c_r: Some(AxisSpec {
                values: Some(vec![0.0, 0.5]),
                min: None,
                max: None,
                count: None,
                scale: None,
            }),
            l_r: None,
            n: None,
        },
        seeds: SeedsSpec {
            values: None,
            base: Some(5),
            count: Some(2),
        },
    };
    let serial = run_sweep(&spec, 1, None, false).expect("serial sweep");
    let parallel = run_sweep(&spec, 8, None, false).expect("parallel sweep");
    assert_eq!(results_csv(&serial), results_csv(&parallel));
    pass(
        10,
        "determinism",
        "runs and 1-vs-8-worker sweeps byte-identical".to_string(),
    );
}

#[test]
fn criterion_11_invariant_suite() {
    let mut notes = Vec::new();

    // input cap holds for every strategy, and metrics stay in [0, 1]
    for strategy in Strategy::ALL {
        let params = SwarmParams {
            c_r: match strategy {
                Strategy::Cbc => 100.0,
                Strategy::Orca => 5.0,
                _ => 1.0,
            },
            ..baseline_params()
        };
        let mut cfg = SimConfig::new(params, strategy, 3);
        cfg.t_total = 200.0;
        cfg.t_measure = 50.0;
        let out = run(&cfg).expect("invariant run");
        assert!(
            out.diagnostics.max_input_norm <= params.a_max + ZERO_TOL,
            "{strategy}: max input {} above cap",
            out.diagnostics.max_input_norm
        );
        for s in &out.samples {
            assert!((0.0..=1.0).contains(&s.fatness));
            assert!((0.0..=1.0).contains(&s.tangentness));
        }
        assert!((0.0..=1.0).contains(&out.lambda));
    }
    notes.push("input cap and metric bounds hold for all strategies".to_string());

    // gyro correction is orthogonal to the velocity
    let params = baseline_params();
    for k in 0..200u64 {
        let mut rng = Counter::new(0x6690, k);
        let vel = Vec2::new(rng.next_range(-0.3, 0.3), rng.next_range(-0.3, 0.3));
        if vel.norm() < 1e-6 {
            continue;
        }
        let view = NeighborView {
            entries: vec![(
                Vec2::new(rng.next_range(-1.0, 1.0), rng.next_range(-1.0, 1.0)),
                Vec2::ZERO,
            )],
        };
        let u_des = Vec2::new(rng.next_range(-0.1, 0.1), rng.next_range(-0.1, 0.1));
        let req = AvoidanceRequest {
            u_des,
            pos: Vec2::ZERO,
            vel,
            neighbors: &view,
            params: &params,
            dt: 0.015,
            self_index: 0,
        };
        let correction = avoid_gyro(&req) - u_des;
        assert!(
            correction.dot(vel).abs() <= 1e-10 * correction.norm().max(1.0) * vel.norm(),
            "case {k}: gyro correction not orthogonal"
        );
    }
    notes.push("gyro correction orthogonal to velocity (200 cases)".to_string());

    // potential with c_r = 0 is exactly the disabled wrapper: identical runs
    let params_zero = SwarmParams {
        c_r: 0.0,
        ..baseline_params()
    };
    let mut cfg_pot = SimConfig::new(params_zero, Strategy::Potential, 9);
    cfg_pot.t_total = 300.0;
    cfg_pot.t_measure = 100.0;
    let mut cfg_none = cfg_pot.clone();
    cfg_none.strategy = Strategy::None;
    let out_pot = run(&cfg_pot).expect("potential run");
    let out_none = run(&cfg_none).expect("none run");
    assert_eq!(out_pot.final_state, out_none.final_state);
    assert_eq!(metrics_csv(&out_pot), metrics_csv(&out_none));
    // and pointwise on random requests
    for k in 0..100u64 {
        let mut rng = Counter::new(0x90700, k);
        let view = NeighborView {
            entries: (0..(rng.next_u64() % 4) as usize + 1)
                .map(|_| {
                    (
                        Vec2::new(rng.next_range(-1.0, 1.0), rng.next_range(-1.0, 1.0)),
                        Vec2::new(rng.next_range(-0.2, 0.2), rng.next_range(-0.2, 0.2)),
                    )
                })
                .collect(),
        };
        let req = AvoidanceRequest {
            u_des: Vec2::new(rng.next_range(-0.3, 0.3), rng.next_range(-0.3, 0.3)),
            pos: Vec2::new(rng.next_range(-1.0, 1.0), rng.next_range(-1.0, 1.0)),
            vel: Vec2::new(rng.next_range(-0.2, 0.2), rng.next_range(-0.2, 0.2)),
            neighbors: &view,
            params: &params_zero,
            dt: 0.015,
            self_index: (k % 7) as usize,
        };
        assert_eq!(avoid_potential(&req), avoid_none(&req));
    }
    notes.push("potential at c_r = 0 identical to avoidance off".to_string());

    // neighbor-set symmetry on random states
    for k in 0..50u64 {
        let mut rng = Counter::new(0x5E7, k);
        let n = 2 + (rng.next_u64() % 12) as usize;
        let l_r = rng.next_range(0.2, 3.0);
        let positions: Vec<Vec2> = (0..n)
            .map(|_| Vec2::new(rng.next_range(-3.0, 3.0), rng.next_range(-3.0, 3.0)))
            .collect();
        let velocities = vec![Vec2::ZERO; n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let i_sees_j = (positions[i] - positions[j]).norm() <= l_r;
                let view = neighbor_set(i, &positions, &velocities, l_r);
                let listed = view.entries.iter().any(|&(p, _)| p == positions[j]);
                assert_eq!(i_sees_j, listed, "asymmetric neighbor sets");
            }
        }
    }
    notes.push("neighbor sets symmetric (50 random states)".to_string());

    // CBC linearized bound against finite differences of B along the pair
    // dynamics (neighbor input zero): relative error < 1e-4 at 1e-6 steps
    let a_max = 0.6;
    let d_s = 0.315;
    let barrier_value = |dp: Vec2, dv: Vec2| -> f64 {
        let dist = dp.norm();
        1.0 / (dp.dot(dv) / dist + (4.0 * a_max * (dist - d_s)).sqrt())
    };
    let mut checked = 0u64;
    let mut k = 0u64;
    let mut worst_rel = 0.0f64;
    while checked < 100 {
        k += 1;
        let mut rng = Counter::new(0xCBC0, k);
        let dist = rng.next_range(d_s + 0.1, 5.0);
        let dp = Vec2::from_polar(dist, rng.next_range(0.0, std::f64::consts::TAU));
        let dv = Vec2::new(rng.next_range(-0.3, 0.3), rng.next_range(-0.3, 0.3));
        let u = Vec2::new(rng.next_range(-0.6, 0.6), rng.next_range(-0.6, 0.6));
        let pair = match barrier_terms(dp, dv, Vec2::ZERO, Vec2::ZERO, a_max, d_s) {
            BarrierTerms::Pair(p) => p,
            BarrierTerms::Breached => continue,
        };
        if pair.h.abs() < 0.05 {
            continue;
        }
        let c_r = 1.0;
        let (constraint, clamped) = cbc_constraint(&pair, c_r, a_max);
        if clamped {
            continue;
        }
        // analytic dB/dt reconstructed from the published constraint pieces
        let h_dot = -constraint.a.dot(u) + (constraint.b - pair.h.powi(3) / c_r);
        let analytic = -h_dot / (pair.h * pair.h);
        let eps = 1e-6;
        let fd = (barrier_value(dp + dv * eps, dv + u * eps)
            - barrier_value(dp - dv * eps, dv - u * eps))
            / (2.0 * eps);
        if fd.abs() < 1e-8 {
            continue;
        }
        let rel = ((analytic - fd) / fd).abs();
        assert!(rel < 1e-4, "trajectory {k}: relative error {rel}");
        worst_rel = worst_rel.max(rel);
        checked += 1;
    }
    notes.push(format!(
        "cbc constraint matches finite-difference dB/dt on 100 trajectories (worst rel {worst_rel:.2e})"
    ));

    // steering conventions stay pinned
    assert_eq!(sgnz(0.0), 1.0);
    assert_eq!(rot90(Vec2::new(1.0, 0.0)), Vec2::new(0.0, 1.0));
    assert_eq!(crossz(Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)), 1.0);

    pass(11, "invariant suite", notes.join("; "));
}
