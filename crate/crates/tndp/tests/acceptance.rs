//! Acceptance checks on the bundled Kinshasa instance. Prints one
//! `PASS`/`FAIL` line per criterion and exits non-zero if any fails.
//!
//! Progress goes to stderr; the summary goes to stdout.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tndp::analyze::analyze;
use tndp::bench::{compare, run_batch, run_bench, thread_pool, BenchConfig, BenchReport, RunBatch, RunRecord};
use tndp::dataset::kinshasa;
use tndp::problem::ProblemSpec;
use tndp_core::assignment::{frank_wolfe, frank_wolfe_graph, AssignmentConfig, TrafficGraph};
use tndp_core::centrality::{edge_betweenness, select_weighting};
use tndp_core::stats::{mann_whitney_u, stability, PValueMethod};
use tndp_core::{
    DesignProblem, DesignVector, EdgeKey, Node, OdMatrix, RoadNetwork, SolverConfig, SolverKind, Weighting,
};

const FEV_CAP: usize = 4000;
const HYBRID_RUNS: usize = 30;
const GREEDY_REPEATS: usize = 10;
const INTERCEPT_RUNS: usize = 2;
const DESK_LIMIT: Duration = Duration::from_secs(15 * 60);

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Batches kept for the evaluation-discipline check.
#[derive(Default)]
struct Shared {
    batches: Vec<(String, RunBatch)>,
    desk_report: Option<BenchReport>,
    intercept_report: Option<BenchReport>,
}

fn problem(q: u8) -> DesignProblem {
    ProblemSpec { q, ..ProblemSpec::default() }.build().unwrap()
}

fn cfg() -> SolverConfig {
    let c = SolverConfig::default();
    assert_eq!(c.fev_cap, FEV_CAP);
    c
}

fn c1_betweenness() -> Verdict {
    let data = kinshasa().unwrap();
    let net = &data.network;
    let start = Instant::now();
    let reference: Vec<(EdgeKey, f64)> = data.reference.iter().map(|r| (r.key(), r.betweenness)).collect();
    let choice = select_weighting(net, &reference);
    let scores = edge_betweenness(net, choice.selected);
    let elapsed = start.elapsed();

    let mut leaves = Vec::new();
    for (i, e) in net.edges().iter().enumerate() {
        if net.degree(e.u) == 1 || net.degree(e.v) == 1 {
            leaves.push((e.u.min(e.v), e.u.max(e.v), scores.scores[i]));
        }
    }
    let keys: BTreeSet<(u32, u32)> = leaves.iter().map(|&(u, v, _)| (u, v)).collect();
    let named: BTreeSet<(u32, u32)> = [(1, 27), (2, 24), (25, 26), (21, 23)].into_iter().collect();
    ensure(named.is_subset(&keys), || format!("degree-1 edges are {keys:?}"))?;
    for &(u, v, s) in &leaves {
        ensure((s - 0.066667).abs() <= 1e-6, || format!("leaf {u}-{v} scores {s}"))?;
    }
    let matched = net
        .edges()
        .iter()
        .enumerate()
        .filter(|(i, e)| {
            let r = data.reference.iter().find(|r| r.key() == e.key()).unwrap();
            (scores.scores[*i] - r.betweenness).abs() <= 5e-3
        })
        .count();
    ensure(matched >= 30, || format!("only {matched}/34 edges within 5e-3"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} weighting, {matched}/34 within 5e-3, all {} degree-1 edges within 1e-6, {:.1} ms",
        choice.selected.name(),
        leaves.len(),
        elapsed.as_secs_f64() * 1e3
    ))
}

fn c2_greedy(shared: &mut Shared) -> Verdict {
    let p = problem(0);
    let pool = thread_pool(None).unwrap();
    let batch = run_batch(&p, SolverKind::Greedy, GREEDY_REPEATS, 0, &cfg(), Weighting::Hops, None, &pool);
    ensure(batch.failed.is_empty() && batch.runs.len() == GREEDY_REPEATS, || {
        format!("{} failed runs", batch.failed.len())
    })?;
    let first = &batch.runs[0];
    let sets: Vec<Vec<EdgeKey>> = batch.runs.iter().map(RunRecord::edge_keys).collect();
    for (r, s) in batch.runs.iter().zip(&sets) {
        ensure(r.objective == first.objective, || {
            format!("seed {} objective {} vs {}", r.seed, r.objective, first.objective)
        })?;
        ensure(*s == sets[0], || format!("seed {} edge set differs", r.seed))?;
    }
    let report = compare(&p, std::slice::from_ref(&batch), Weighting::Hops, 0.05);
    let std = report.solvers[0].objective.ok_or("no objective summary")?.std;
    let score = stability(&sets).unwrap();
    ensure(std == 0.0, || format!("reported objective std {std}"))?;
    ensure(score.model == 1.0, || format!("stability {}", score.model))?;
    let detail = format!(
        "{} runs, objective {:.4}, {} edges, std 0, stability 1.0",
        batch.runs.len(),
        first.objective,
        sets[0].len()
    );
    shared.batches.push(("q0 greedy x10".into(), batch));
    Ok(detail)
}

fn c3_dominance(shared: &mut Shared) -> Verdict {
    let pool = thread_pool(None).unwrap();
    let mut detail = Vec::new();
    for q in [0u8, 1] {
        let p = problem(q);
        let greedy = run_batch(&p, SolverKind::Greedy, 1, 0, &cfg(), Weighting::Hops, None, &pool);
        let g = greedy.runs.first().ok_or("greedy run failed")?.objective;
        for kind in [SolverKind::GrSa, SolverKind::GrTs] {
            eprintln!("  q={q} {kind}: {HYBRID_RUNS} runs");
            let batch = run_batch(&p, kind, HYBRID_RUNS, 0, &cfg(), Weighting::Hops, None, &pool);
            ensure(batch.failed.is_empty(), || format!("q={q} {kind}: {:?}", batch.failed))?;
            ensure(batch.runs.len() == HYBRID_RUNS, || format!("q={q} {kind}: {} runs", batch.runs.len()))?;
            for r in &batch.runs {
                ensure(r.objective <= g, || format!("q={q} {kind} seed {}: {} > greedy {g}", r.seed, r.objective))?;
            }
            let best = batch.runs.iter().map(|r| r.objective).fold(f64::INFINITY, f64::min);
            let strict = batch.runs.iter().filter(|r| r.objective < g).count();
            detail
                .push(format!("q={q} {kind} best {best:.0} vs greedy {g:.0} ({strict}/{HYBRID_RUNS} strictly better)"));
            shared.batches.push((format!("q{q} {kind}"), batch));
        }
        shared.batches.push((format!("q{q} greedy"), greedy));
    }
    Ok(detail.join("; "))
}

fn bpr_integral(len: f64, x: f64) -> f64 {
    len * (x + 0.15 * x.powi(5) / 5.0)
}

fn random_instance(seed: u64) -> (RoadNetwork, OdMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..=6usize);
    let nodes: Vec<Node> = (1..=n as u32)
        .map(|id| Node::new(id, -4.4 + rng.random::<f64>() * 0.05, 15.3 + rng.random::<f64>() * 0.05, "").unwrap())
        .collect();
    let mut pairs: Vec<(u32, u32)> = (2..=n as u32).map(|v| (rng.random_range(1..v), v)).collect();
    for _ in 0..rng.random_range(0..=n) {
        let (u, v) = (rng.random_range(1..=n as u32), rng.random_range(1..=n as u32));
        if u != v && !pairs.iter().any(|&(a, b)| (a, b) == (u, v) || (a, b) == (v, u)) {
            pairs.push((u, v));
        }
    }
    let mut d = vec![0.0; n * n];
    for r in 0..n {
        for s in 0..n {
            if r != s && rng.random_bool(0.6) {
                d[r * n + s] = rng.random_range(0.1..8.0);
            }
        }
    }
    (RoadNetwork::from_pairs(nodes, &pairs).unwrap(), OdMatrix::new(n, d).unwrap())
}

fn c4_equilibrium() -> Verdict {
    let g = TrafficGraph::from_arcs(2, &[(0, 1, 1.0), (0, 1, 1.0)]);
    let od = OdMatrix::new(2, vec![0.0, 2.0, 0.0, 0.0]).unwrap();
    let r = frank_wolfe_graph(&g, &od, &AssignmentConfig::default()).unwrap();
    let (x1, x2) = (r.link_flows[0], r.link_flows[1]);
    let ttt: f64 = [x1, x2].iter().map(|&x| x * (1.0 + 0.15 * x.powi(4))).sum();
    ensure((x1 - 1.0).abs() <= 1e-3 && (x2 - 1.0).abs() <= 1e-3, || format!("flows ({x1}, {x2})"))?;
    ensure((ttt - 2.30).abs() <= 1e-3, || format!("recomputed travel time {ttt}"))?;
    ensure((r.total_travel_time - 2.30).abs() <= 1e-3, || format!("reported travel time {}", r.total_travel_time))?;

    let mut iterations = 0;
    for seed in 0..100u64 {
        let (net, od) = random_instance(seed);
        let r = frank_wolfe(&net, &od, &AssignmentConfig::default()).unwrap();
        let trace = &r.beckmann_trace;
        ensure(trace.windows(2).all(|w| w[1] <= w[0]), || format!("instance {seed}: Beckmann rises {trace:?}"))?;
        let g = TrafficGraph::from_network(&net);
        let own: f64 = g.arc_lengths().iter().zip(&r.arc_flows).map(|(&l, &x)| bpr_integral(l, x)).sum();
        let last = *trace.last().unwrap();
        ensure((own - last).abs() <= 1e-9 * own.max(1.0), || {
            format!("instance {seed}: Beckmann {last} vs recomputed {own}")
        })?;
        iterations += trace.len() - 1;
    }
    Ok(format!(
        "flows ({x1:.6}, {x2:.6}), travel time {ttt:.6}; 100 random instances monotone over {iterations} iterations"
    ))
}

fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        for &k in &idx[i..=j] {
            ranks[k] = (i + j) as f64 / 2.0 + 1.0;
        }
        i = j + 1;
    }
    ranks
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn c5_correlation() -> Verdict {
    let data = kinshasa().unwrap();
    let a = analyze(&data.network, &data.od, &AssignmentConfig::default(), Some(&data.reference)).unwrap();
    let bc: Vec<f64> = a.edges.iter().map(|r| r.betweenness).collect();
    let flow: Vec<f64> = a.edges.iter().map(|r| r.flow).collect();
    let own = correlation(&average_ranks(&bc), &average_ranks(&flow));
    let reported = a.spearman.ok_or("analyze reported no Spearman value")?;
    ensure((own - reported).abs() < 1e-9, || format!("reported {reported}, recomputed {own}"))?;
    ensure(reported > 0.0, || format!("Spearman {reported}"))?;
    Ok(format!("Spearman {reported:.4} over {} edges", bc.len()))
}

fn c6_stability() -> Verdict {
    let (a, b, c) = ((1, 2), (1, 3), (2, 3));
    let s = stability(&[vec![a, b], vec![a, b], vec![a, c]]).unwrap();
    ensure(s.per_run == [0.75, 0.75, 0.5], || format!("per-run {:?}", s.per_run))?;
    ensure(s.model == 2.0 / 3.0, || format!("model {}", s.model))?;
    let same = stability(&[vec![a, b], vec![a, b], vec![a, b]]).unwrap();
    ensure(same.model == 1.0 && same.per_run.iter().all(|&x| x == 1.0), || format!("identical {same:?}"))?;
    let disjoint = stability(&[vec![a], vec![b], vec![c, (4, 5)]]).unwrap();
    ensure(disjoint.model == 0.0 && disjoint.per_run.iter().all(|&x| x == 0.0), || format!("disjoint {disjoint:?}"))?;
    Ok("per-run (0.75, 0.75, 0.5), model 2/3; identical 1.0; disjoint 0.0".into())
}

/// Two-sided p-value over all C(n+m, n) placements of the first sample.
fn enumerated_p(n: usize, m: usize, u_obs: f64) -> f64 {
    let total = n + m;
    let (mut le, mut ge, mut count) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1 << total) {
        if mask.count_ones() as usize != n {
            continue;
        }
        // Pairs (a, b) with a ranked above b.
        let mut u = 0usize;
        let mut below = 0usize;
        for i in 0..total {
            if mask >> i & 1 == 1 {
                u += below;
            } else {
                below += 1;
            }
        }
        count += 1;
        le += u64::from(u as f64 <= u_obs);
        ge += u64::from(u as f64 >= u_obs);
    }
    (2.0 * le.min(ge) as f64 / count as f64).min(1.0)
}

fn c7_mann_whitney() -> Verdict {
    let mut checked = 0;
    for n in 1..=8usize {
        for m in 1..=8usize {
            for rep in 0..3u64 {
                let mut rng = ChaCha8Rng::seed_from_u64((n * 64 + m * 8) as u64 + rep * 4096);
                let mut pooled: Vec<f64> = (0..n + m).map(|i| i as f64 * 1.5 + rng.random::<f64>()).collect();
                rand::seq::SliceRandom::shuffle(pooled.as_mut_slice(), &mut rng);
                let (a, b) = pooled.split_at(n);
                let u_a = a.iter().map(|x| b.iter().filter(|y| x > y).count()).sum::<usize>() as f64;
                let r = mann_whitney_u(a, b, 0.05).unwrap();
                ensure(r.method == PValueMethod::Exact, || format!("n={n} m={m}: not exact"))?;
                ensure(r.u_a == u_a, || format!("n={n} m={m}: U_a {} vs {u_a}", r.u_a))?;
                let oracle = enumerated_p(n, m, u_a);
                ensure((r.p_value - oracle).abs() <= 1e-12, || format!("n={n} m={m}: p {} vs {oracle}", r.p_value))?;
                let swapped = mann_whitney_u(b, a, 0.05).unwrap();
                ensure(swapped.p_value == r.p_value && swapped.u == r.u, || format!("n={n} m={m}: asymmetric"))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} tie-free sample pairs, n, m <= 8, match enumeration to 1e-12 and are symmetric"))
}

fn c8_fev(shared: &Shared) -> Verdict {
    let mut runs = 0;
    let mut all: Vec<(String, &RunRecord)> = Vec::new();
    for (label, b) in &shared.batches {
        ensure(b.failed.is_empty(), || format!("{label}: failed runs {:?}", b.failed))?;
        all.extend(b.runs.iter().map(|r| (label.clone(), r)));
    }
    for report in [&shared.desk_report, &shared.intercept_report].into_iter().flatten() {
        for p in &report.problems {
            for s in &p.solvers {
                all.extend(s.runs.iter().map(|r| (format!("bench q{} {}", p.q, s.solver), r)));
            }
        }
    }
    for (label, r) in all {
        ensure(r.evals_used <= FEV_CAP, || format!("{label} seed {}: {} evals", r.seed, r.evals_used))?;
        let t = &r.trace;
        ensure(!t.is_empty(), || format!("{label} seed {}: empty trace", r.seed))?;
        ensure(t.windows(2).all(|w| w[1].best <= w[0].best && w[1].evals > w[0].evals), || {
            format!("{label} seed {}: trace not monotone", r.seed)
        })?;
        ensure(t.last().unwrap().best == r.objective, || {
            format!("{label} seed {}: trace ends above the best", r.seed)
        })?;
        ensure(t.last().unwrap().evals <= r.evals_used, || {
            format!("{label} seed {}: trace beyond evals_used", r.seed)
        })?;
        runs += 1;
    }
    ensure(runs > 0, || "no runs recorded".into())?;
    Ok(format!("{runs} runs: evals_used <= {FEV_CAP}, traces non-increasing"))
}

/// Counts every design handed to the evaluator and those over budget.
struct Interceptor {
    seen: AtomicUsize,
    over: AtomicUsize,
}

impl tndp_core::EvalObserver for Interceptor {
    fn observe(&self, problem: &DesignProblem, y: &DesignVector) {
        self.seen.fetch_add(1, Ordering::Relaxed);
        let c = problem.candidates();
        let mut km = 0.0;
        for &i in y.indices() {
            let e = c.get(i).expect("index within the candidate set");
            let nodes = problem.base().nodes();
            km += tndp_core::geo::haversine_km(&nodes[e.u as usize - 1], &nodes[e.v as usize - 1]);
        }
        if km > problem.budget_km() + 1e-9 {
            self.over.fetch_add(1, Ordering::Relaxed);
        }
    }
}

fn c9_feasibility(shared: &mut Shared) -> Verdict {
    let spy = Interceptor { seen: AtomicUsize::new(0), over: AtomicUsize::new(0) };
    let config = BenchConfig::new(ProblemSpec::default(), vec![0, 1], SolverKind::ALL.to_vec(), INTERCEPT_RUNS, 0);
    let pool = thread_pool(None).unwrap();
    let (report, _) = run_bench(&config, &pool, Some(&spy)).map_err(|e| e.to_string())?;
    let (seen, over) = (spy.seen.load(Ordering::Relaxed), spy.over.load(Ordering::Relaxed));
    ensure(report.failed_runs() == 0, || format!("{} failed runs", report.failed_runs()))?;
    for p in &report.problems {
        ensure(p.solvers.len() == 8, || format!("q={}: {} solver sections", p.q, p.solvers.len()))?;
        let best = p.best_solver.ok_or("no best solver")?;
        for s in &p.solvers {
            ensure(s.mann_whitney.is_some() == (s.solver != best), || {
                format!("q={} {}: Mann-Whitney column", p.q, s.solver)
            })?;
            ensure(s.runs.iter().all(|r| r.cost_km <= 100.0), || {
                format!("q={} {}: reported design over budget", p.q, s.solver)
            })?;
        }
    }
    ensure(seen > 0, || "interceptor saw no evaluations".into())?;
    ensure(over == 0, || format!("{over} of {seen} evaluated designs exceed the budget"))?;
    shared.intercept_report = Some(report);
    Ok(format!("8 solvers x {INTERCEPT_RUNS} runs x q in {{0, 1}}: {seen} evaluated designs, 0 over budget"))
}

fn c10_desk(shared: &mut Shared) -> Verdict {
    let mut spec = ProblemSpec::default();
    spec.assignment.fw_tolerance = 1e-3;
    let config = BenchConfig::new(spec, vec![0, 1], vec![SolverKind::Greedy, SolverKind::GrSa], 5, 0);
    let pool = thread_pool(None).unwrap();
    let start = Instant::now();
    let (report, _) = run_bench(&config, &pool, None).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(report.failed_runs() == 0, || format!("{} failed runs", report.failed_runs()))?;
    ensure(elapsed < DESK_LIMIT, || format!("took {:.1} min", elapsed.as_secs_f64() / 60.0))?;
    shared.desk_report = Some(report);
    Ok(format!(
        "greedy + gr-sa, 5 runs, q in {{0, 1}}: {:.1} s on {} worker thread(s)",
        elapsed.as_secs_f64(),
        pool.current_num_threads()
    ))
}

fn c11_improvement(shared: &Shared) -> Verdict {
    let report = shared.desk_report.as_ref().ok_or("criterion 10 produced no report")?;
    let mut detail = Vec::new();
    for p in &report.problems {
        let s = p.solvers.iter().find(|s| s.solver == SolverKind::GrSa).ok_or("no gr-sa section")?;
        let mean_tt = s.runs.iter().map(|r| r.travel_time).sum::<f64>() / s.runs.len() as f64;
        let own = p.baseline_travel_time / mean_tt;
        let reported = s.n_fold_travel_time.ok_or("no n-fold reported")?;
        ensure((own - reported).abs() <= 1e-9 * own, || format!("q={}: n-fold {reported} vs recomputed {own}", p.q))?;
        ensure(s.runs.iter().all(|r| r.travel_time < p.baseline_travel_time), || {
            format!("q={}: a run did not reduce travel time", p.q)
        })?;
        ensure(reported > 1.0, || format!("q={}: n-fold {reported}", p.q))?;
        detail.push(format!("q={} n-fold {reported:.2}", p.q));
    }
    Ok(detail.join(", "))
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let mut shared = Shared::default();
    let mut results: Vec<(u8, &str, Verdict)> = Vec::new();
    let mut check = |id: u8, title: &'static str, f: &mut dyn FnMut(&mut Shared) -> Verdict| {
        eprintln!("criterion {id}: {title} ...");
        let start = Instant::now();
        let verdict = match catch_unwind(AssertUnwindSafe(|| f(&mut shared))) {
            Ok(v) => v,
            Err(p) => Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into())),
        };
        eprintln!("criterion {id}: done in {:.1} s", start.elapsed().as_secs_f64());
        results.push((id, title, verdict));
    };
    check(1, "baseline betweenness", &mut |_| c1_betweenness());
    check(4, "equilibrium oracle", &mut |_| c4_equilibrium());
    check(5, "betweenness-flow correlation", &mut |_| c5_correlation());
    check(6, "stability metric", &mut |_| c6_stability());
    check(7, "Mann-Whitney correctness", &mut |_| c7_mann_whitney());
    check(2, "greedy determinism", &mut c2_greedy);
    check(3, "hybrid dominance", &mut c3_dominance);
    check(9, "budget feasibility", &mut c9_feasibility);
    check(10, "desk-scale runtime", &mut c10_desk);
    check(11, "improvement direction", &mut |s| c11_improvement(s));
    check(8, "evaluation discipline", &mut |s| c8_fev(s));

    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    println!();
    for (id, title, verdict) in &results {
        match verdict {
            Ok(detail) => println!("PASS criterion {id:>2} {title}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {id:>2} {title}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
