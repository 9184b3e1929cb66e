//! Directional claims on the bundled instance.

use std::sync::OnceLock;

use tndp::bench::{compare, run_batch, thread_pool};
use tndp::problem::{LambdaSpec, ProblemSpec};
use tndp_core::centrality::edge_betweenness;
use tndp_core::design::{augment, evaluate};
use tndp_core::stats::n_fold;
use tndp_core::{solve, DesignProblem, SolverConfig, SolverKind, SolverResult, Weighting};

fn problem() -> &'static DesignProblem {
    static P: OnceLock<DesignProblem> = OnceLock::new();
    P.get_or_init(|| ProblemSpec::default().build().unwrap())
}

fn greedy() -> &'static SolverResult {
    static G: OnceLock<SolverResult> = OnceLock::new();
    G.get_or_init(|| solve(SolverKind::Greedy, problem(), &SolverConfig::default()).unwrap())
}

#[test]
fn greedy_improves_on_the_base_network() {
    let p = problem();
    let g = greedy();
    assert!(g.best_objective.total < p.baseline().travel_time);
    assert!(g.best_design.cost_km() <= 100.0);
    assert!(!g.best_design.is_empty());
}

#[test]
fn greedy_design_lowers_mean_betweenness() {
    let p = problem();
    let base = edge_betweenness(p.base(), Weighting::Hops).mean();
    let augmented = edge_betweenness(&augment(p, &greedy().best_design).unwrap(), Weighting::Hops).mean();
    assert!(n_fold(base, augmented).unwrap() > 1.0, "{base} vs {augmented}");
}

#[test]
fn penalty_only_applies_with_q() {
    let p0 = problem();
    let empty = p0.design([]).unwrap();
    let t0 = p0.baseline().travel_time;
    for lambda in [LambdaSpec::Auto, LambdaSpec::Value(0.0), LambdaSpec::Value(1e9)] {
        let p1 = ProblemSpec { q: 1, lambda, ..ProblemSpec::default() }.build().unwrap();
        assert_eq!(evaluate(&p1, &empty).unwrap().total, t0);
        let big = ProblemSpec { q: 0, lambda, ..ProblemSpec::default() }.build().unwrap();
        let y = &greedy().best_design;
        assert_eq!(evaluate(&big, y).unwrap().total, greedy().best_objective.total);
    }
}

#[test]
#[ignore = "not reproduced: unseeded SA averages 1.787e6, Gr-SA 1.872e6 over seeds 0-9"]
fn seeded_annealing_beats_unseeded_on_average() {
    let p = problem();
    let pool = thread_pool(None).unwrap();
    let cfg = SolverConfig::default();
    let sa = run_batch(p, SolverKind::Sa, 10, 0, &cfg, Weighting::Hops, None, &pool);
    let grsa = run_batch(p, SolverKind::GrSa, 10, 0, &cfg, Weighting::Hops, None, &pool);
    let report = compare(p, &[sa, grsa], Weighting::Hops, 0.05);
    let mean = |k: SolverKind| report.solvers.iter().find(|s| s.solver == k).unwrap().objective.unwrap().mean;
    assert!(
        mean(SolverKind::GrSa) < mean(SolverKind::Sa),
        "gr-sa {} vs sa {}",
        mean(SolverKind::GrSa),
        mean(SolverKind::Sa)
    );
}
