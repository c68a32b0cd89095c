mod common;

use cpm_core::checks;
use cpm_core::game::make_normal_form_spec;
use cpm_core::metrics;
use cpm_core::solver::{compute_inner_budget, inner_fixed_point, run_centralized, run_cmwu, run_decentralized};
use cpm_core::{
    CpmError, EtaChoice, GameSpec, InnerMode, JointPoint, NormalFormGame, ProximalSetup, RunTrace, SolverConfig,
    ToleranceSchedule,
};

fn setup_for(game: &NormalFormGame) -> (ProximalSetup, GameSpec) {
    let spec = make_normal_form_spec(game.clone());
    (ProximalSetup::for_spec(&spec).unwrap(), spec)
}

fn max_regret_over_horizons(trace: &RunTrace) -> f64 {
    (1..=trace.len()).map(|t| metrics::max_regret(trace, t).unwrap()).fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn matching_pennies_regret_stays_below_constant() {
    let game = NormalFormGame::matching_pennies();
    let (setup, spec) = setup_for(&game);
    let trace = run_centralized(&setup, &spec, &SolverConfig::new(100)).unwrap();
    assert_eq!(trace.len(), 100);
    assert!((trace.eta - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
    let bound = 2.0 * 2f64.sqrt() * (1.0 + 2f64.ln());
    assert!(max_regret_over_horizons(&trace) <= bound);
}

#[test]
fn three_player_regret_bound() {
    let game = NormalFormGame::random(vec![2, 2, 2], 1.0, 31).unwrap();
    let (setup, spec) = setup_for(&game);
    let trace = run_centralized(&setup, &spec, &SolverConfig::new(200)).unwrap();
    let bound = 2.0 * 3f64.sqrt() * (1.0 + 2f64.ln());
    assert!(max_regret_over_horizons(&trace) <= bound);
    let report = checks::regret_bound(&setup, &spec, &trace, 1e-6).unwrap();
    assert!(report.passed, "{report:?}");
}

#[test]
fn null_game_is_stationary() {
    let game = NormalFormGame::null_game(vec![3, 2], 1.0).unwrap();
    let (setup, spec) = setup_for(&game);
    let trace = run_centralized(&setup, &spec, &SolverConfig::new(20)).unwrap();
    let z0 = setup.center_point();
    for it in trace.iterates() {
        assert_eq!(it.w, z0);
        assert_eq!(it.z, z0);
        assert_eq!(it.residual, 0.0);
        assert_eq!(it.inner_iterations, 1);
    }
    assert_eq!(metrics::max_regret(&trace, 20).unwrap(), 0.0);
}

#[test]
fn uniform_is_exact_fixed_point_of_matching_pennies() {
    let (setup, spec) = setup_for(&NormalFormGame::matching_pennies());
    let z = setup.center_point();
    let sol = inner_fixed_point(&setup, &spec, &z, 0.3, 1e-12, 10).unwrap();
    assert_eq!(sol.iterations, 1);
    assert_eq!(sol.residual, 0.0);
    assert_eq!(sol.w, z);
}

#[test]
fn residual_decays_at_contraction_rate() {
    for seed in 0..5 {
        let game = NormalFormGame::random(vec![2, 2], 1.0, 40 + seed).unwrap();
        let (setup, spec) = setup_for(&game);
        let eta = 1.0 / (2.0 * spec.lipschitz());
        let z_prev = JointPoint::new(vec![vec![0.8, 0.2], vec![0.3, 0.7]]);
        let map = |w: &JointPoint| setup.prox(&z_prev, &spec.operator(w).unwrap(), eta).unwrap();
        let mut w = z_prev.clone();
        for k in 1..=20 {
            w = map(&w);
            let r = setup.primal_norm(&w.sub(&map(&w)));
            assert!(r <= 0.5f64.powi(k) * 2.0 * 2f64.sqrt() + 1e-15, "k={k} r={r}");
        }
    }
}

#[test]
fn solver_traces_satisfy_inner_checks() {
    for seed in 0..5 {
        let game = NormalFormGame::random(vec![3, 2], 1.0, 50 + seed).unwrap();
        let (setup, spec) = setup_for(&game);
        let trace = run_centralized(&setup, &spec, &SolverConfig::new(60)).unwrap();
        for it in trace.iterates() {
            assert!(it.residual <= it.eps);
            assert!(!it.residual_is_bound);
            assert_eq!(it.residual_history.last().copied(), Some(it.residual));
            // z is the prox output at w, as computed during the check
            let recomputed = setup.prox(trace.anchor(it.t), &spec.operator(&it.w).unwrap(), trace.eta).unwrap();
            assert_eq!(recomputed, it.z);
        }
        let mut rng = common::rng(seed);
        let per_step = checks::per_iteration_inequality(&setup, &spec, &trace, 100, 1e-7, &mut rng).unwrap();
        assert!(per_step.passed, "{per_step:?}");
        let contraction = checks::contraction(&trace, spec.lipschitz(), 1e-9);
        assert!(contraction.passed, "{contraction:?}");
        let count = checks::inner_iteration_count(&setup, &trace);
        assert!(count.passed, "{count:?}");
    }
}

#[test]
fn decentralized_matches_fixed_budget_centralized() {
    for seed in 0..5 {
        let game = NormalFormGame::random(vec![2, 3, 2], 1.0, 60 + seed).unwrap();
        let (setup, spec) = setup_for(&game);
        let cfg = SolverConfig::new(30).with_inner_mode(InnerMode::FixedBudget);
        let central = run_centralized(&setup, &spec, &cfg).unwrap();
        let decentral = run_decentralized(&setup, &spec, &cfg).unwrap();
        let cmwu = run_cmwu(&game, &cfg).unwrap();
        for ((a, b), c) in central.iterates().iter().zip(decentral.iterates()).zip(cmwu.iterates()) {
            assert!(a.z.max_abs_diff(&b.z) <= 1e-12);
            assert!(a.w.max_abs_diff(&b.w) <= 1e-12);
            assert!(a.w.max_abs_diff(&c.w) <= 1e-10);
            assert!(a.z.max_abs_diff(&c.z) <= 1e-10);
            assert_eq!(a.inner_iterations, b.inner_iterations);
        }
    }
}

#[test]
fn cmwu_matches_generic_path_on_matching_pennies() {
    let game = NormalFormGame::zero_sum(2, 2, vec![1.0, -1.0, -1.0, 1.0]).unwrap();
    let (setup, spec) = setup_for(&game);
    let start = JointPoint::new(vec![vec![0.7, 0.3], vec![0.4, 0.6]]);
    let cfg = SolverConfig::new(50).with_inner_mode(InnerMode::FixedBudget).with_initial_point(start);
    let generic = run_decentralized(&setup, &spec, &cfg).unwrap();
    let fast = run_cmwu(&game, &cfg).unwrap();
    for (a, b) in generic.iterates().iter().zip(fast.iterates()) {
        assert!(a.w.max_abs_diff(&b.w) <= 1e-10);
    }
    let ga = metrics::cce_gap(&generic, &game, 50).unwrap();
    let gb = metrics::cce_gap(&fast, &game, 50).unwrap();
    assert!((ga - gb).abs() <= 1e-9);
}

#[test]
fn cmwu_single_step_closed_form() {
    // grad u_1 = (1, 0) whatever player 2 plays
    let game = NormalFormGame::bimatrix(2, 2, vec![1.0, 1.0, 0.0, 0.0], vec![0.0; 4], 1.0).unwrap();
    let cfg = SolverConfig::new(1)
        .with_eta(EtaChoice::Fixed(2f64.ln()))
        .with_clamp_eta(false)
        .with_inner_mode(InnerMode::FixedRounds(1));
    let trace = run_cmwu(&game, &cfg).unwrap();
    let z = trace.iterate(1).z.block(0).to_vec();
    assert!((z[0] - 2.0 / 3.0).abs() < 1e-15 && (z[1] - 1.0 / 3.0).abs() < 1e-15);
}

#[test]
fn total_rounds_equal_budget_sum() {
    let game = NormalFormGame::matching_pennies();
    let (setup, spec) = setup_for(&game);
    let cfg = SolverConfig::new(100).with_inner_mode(InnerMode::FixedBudget);
    let trace = run_decentralized(&setup, &spec, &cfg).unwrap();
    let expected: usize = (1..=100).map(|t| compute_inner_budget(&setup, 1.0 / (t * t) as f64)).sum();
    assert_eq!(trace.total_inner_iterations(), expected);
    // O(T log T) rounds: N^t <= 1 + log2(2 sqrt 2) + 2 log2 t + 1
    let cap: f64 = (1..=100).map(|t| 3.5 + 2.0 * (t as f64).log2()).sum();
    assert!((expected as f64) <= cap);
}

#[test]
fn clamped_step_is_recorded() {
    let (setup, spec) = setup_for(&NormalFormGame::matching_pennies());
    let cfg = SolverConfig::new(3).with_eta(EtaChoice::Fixed(1.0));
    let trace = run_centralized(&setup, &spec, &cfg).unwrap();
    assert_eq!(trace.eta_requested, 1.0);
    assert!(trace.eta_clamped());
    assert!((trace.eta - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
}

#[test]
fn exceeding_inner_cap_is_an_error() {
    let game = NormalFormGame::random(vec![2, 2], 1.0, 3).unwrap();
    let (setup, spec) = setup_for(&game);
    let cfg = SolverConfig::new(10).with_tolerance(ToleranceSchedule::Constant(1e-12)).with_max_inner(3);
    let err = run_centralized(&setup, &spec, &cfg).unwrap_err();
    assert!(err.is_convergence_failure());
    if let CpmError::Convergence(f) = err {
        assert_eq!(f.iterations, 3);
        assert!(setup.contains(&f.best, 1e-9));
    }
}

#[test]
fn runs_are_deterministic() {
    let game = NormalFormGame::random(vec![3, 3], 2.0, 77).unwrap();
    let (setup, spec) = setup_for(&game);
    let cfg = SolverConfig::new(40);
    assert_eq!(run_centralized(&setup, &spec, &cfg).unwrap(), run_centralized(&setup, &spec, &cfg).unwrap());
    let cfg = cfg.with_inner_mode(InnerMode::FixedBudget);
    assert_eq!(run_cmwu(&game, &cfg).unwrap(), run_cmwu(&game, &cfg).unwrap());
}

#[test]
fn rejects_bad_configs() {
    let (setup, spec) = setup_for(&NormalFormGame::matching_pennies());
    assert!(run_centralized(&setup, &spec, &SolverConfig::new(1).with_eta(EtaChoice::Fixed(-1.0))).is_err());
    assert!(
        run_centralized(&setup, &spec, &SolverConfig::new(1).with_tolerance(ToleranceSchedule::Constant(0.0))).is_err()
    );
    assert!(run_centralized(&setup, &spec, &SolverConfig::new(1).with_inner_mode(InnerMode::FixedRounds(0))).is_err());
    let infeasible = JointPoint::new(vec![vec![0.9, 0.9], vec![0.5, 0.5]]);
    assert!(run_centralized(&setup, &spec, &SolverConfig::new(1).with_initial_point(infeasible)).is_err());
}
