//! Acceptance criteria, one PASS/FAIL line each. Runs sequentially (no test
//! harness) so the timing criteria are not contended by other tests.

mod common;

use std::io::Cursor;
use std::time::{Duration, Instant};

use common::{brute_force_tour, grid, random_symmetric, rel_close, AllPairs};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tourplan::bench::{run_quality_suite, sample_terminals};
use tourplan::cli::{Session, SessionOptions, DISCONNECTED_NOTICE};
use tourplan::solvers::held_karp;
use tourplan::{
    astar, build_closure, dijkstra_sssp, emit_gmaps_url, parse_gmaps_url, solve_best_of_both, solve_exact,
    solve_natural, solve_nearest_neighbor, CityGraph, ClosureOptions, GeoPoint, GraphBuilder, Heuristic,
    NaturalMode, VertexId,
};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn exact_vs_enumeration() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut bitwise, mut within_tol, mut failures) = (0, 0, 0);
    for _ in 0..200 {
        let n = rng.gen_range(3..=8);
        let m = random_symmetric(n, &mut rng);
        let got = solve_exact(&m, 24).map_err(|e| e.to_string())?.total_m().unwrap();
        let want = brute_force_tour(&m);
        if got == want {
            bitwise += 1;
        } else if rel_close(got, want, 1e-9) {
            within_tol += 1;
        } else {
            failures += 1;
        }
    }
    let elapsed = started.elapsed();
    check(
        failures == 0 && elapsed < Duration::from_secs(10),
        format!("200 instances: {bitwise} bit-identical, {within_tol} within 1e-9, {failures} wrong, {elapsed:.2?}"),
    )
}

fn dominance() -> Outcome {
    let g = grid(40, 40, 2);
    let vertices: Vec<_> = g.vertices().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut violations = 0;
    for _ in 0..100 {
        let ts = sample_terminals(&vertices, 10, &mut rng).map_err(|e| e.to_string())?;
        let (m, _) = build_closure(&g, &ts, &ClosureOptions::default()).map_err(|e| e.to_string())?;
        let length = |t: Result<tourplan::Tour, tourplan::SolveError>| t.unwrap().total_m().unwrap();
        let exact = length(solve_exact(&m, 24));
        let nn = length(solve_nearest_neighbor(&m));
        let nat = length(solve_natural(&ts, NaturalMode::Normal(&m)));
        let best = length(solve_best_of_both(&ts, &m));
        violations += usize::from(exact > nn) + usize::from(exact > nat) + usize::from(best != nn.min(nat));
    }
    check(violations == 0, format!("100 instances at n=10, {violations} violations"))
}

fn astar_agreement() -> Outcome {
    let g = grid(100, 100, 3);
    let n = g.vertex_count() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut euclid_bad, mut zero_bad, mut manhattan_suboptimal) = (0, 0, 0);
    let mut worst_manhattan = 1.0f64;
    for _ in 0..100 {
        let s = VertexId(rng.gen_range(1..=n));
        let t = VertexId(rng.gen_range(1..=n));
        let want = dijkstra_sssp(&g, s).map_err(|e| e.to_string())?.distance(t);
        let run = |h| astar(&g, s, t, h).map(|(d, _)| d).map_err(|e| e.to_string());
        euclid_bad += usize::from(run(Heuristic::Euclidean)? != want);
        zero_bad += usize::from(run(Heuristic::Zero)? != want);
        let m = run(Heuristic::Manhattan)?;
        if m != want {
            manhattan_suboptimal += 1;
            worst_manhattan = worst_manhattan.max(m / want);
        }
    }
    check(
        g.vertex_count() == 10_000 && euclid_bad == 0 && zero_bad == 0,
        format!(
            "100 pairs on 10000 vertices: euclidean {euclid_bad} mismatches, zero {zero_bad}; \
             manhattan (informational) {manhattan_suboptimal} suboptimal, worst ratio {worst_manhattan:.4}"
        ),
    )
}

fn closure_vs_floyd_warshall() -> Outcome {
    let g = grid(20, 20, 4);
    let fw = AllPairs::new(&g);
    let vertices: Vec<_> = g.vertices().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ts = sample_terminals(&vertices, 6, &mut rng).map_err(|e| e.to_string())?;
    let (m, _) = build_closure(&g, &ts, &ClosureOptions::default()).map_err(|e| e.to_string())?;
    let ids = ts.vertices();
    let (mut entry_bad, mut diag_bad, mut triangle_bad) = (0, 0, 0);
    for i in 0..6 {
        diag_bad += usize::from(m.dist(i, i) != 0.0);
        for j in 0..6 {
            entry_bad += usize::from(!rel_close(m.dist(i, j), fw.get(ids[i], ids[j]), 1e-9));
            for k in 0..6 {
                triangle_bad += usize::from(m.dist(i, j) > m.dist(i, k) + m.dist(k, j));
            }
        }
    }
    check(
        entry_bad + diag_bad + triangle_bad == 0,
        format!("6 terminals on 400 vertices: {entry_bad} entry, {diag_bad} diagonal, {triangle_bad} triangle failures"),
    )
}

fn scale(big: &CityGraph) -> Outcome {
    let vertices: Vec<_> = big.vertices().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let ts = sample_terminals(&vertices, 20, &mut rng).map_err(|e| e.to_string())?;
    let (m, closure_time) = build_closure(big, &ts, &ClosureOptions::default()).map_err(|e| e.to_string())?;
    let started = Instant::now();
    let tour = solve_exact(&m, 24).map_err(|e| e.to_string())?;
    let exact_time = started.elapsed();
    let limit = Duration::from_secs(30);
    check(
        m.is_complete() && tour.len() == 20 && closure_time < limit && exact_time < limit,
        format!(
            "{} vertices: closure of 20 terminals {closure_time:.2?}, exact n=20 {exact_time:.2?}",
            big.vertex_count()
        ),
    )
}

fn exponential_growth() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut times = Vec::new();
    let mut states_ok = true;
    for n in 14..=20 {
        let m = random_symmetric(n, &mut rng);
        let reps = if n < 18 { 5 } else { 3 };
        let mut samples = Vec::new();
        for _ in 0..reps {
            let started = Instant::now();
            let sol = held_karp(&m, 24).map_err(|e| e.to_string())?;
            samples.push(started.elapsed().as_secs_f64());
            states_ok &= sol.dp_states == n << n;
        }
        samples.sort_by(f64::total_cmp);
        times.push(samples[reps / 2]);
    }
    let ratios: Vec<f64> = times.windows(2).map(|w| w[1] / w[0]).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.2}")).collect();
    check(
        (1.5..=3.5).contains(&mean) && states_ok,
        format!("mean t(n+1)/t(n) over n=14..19 is {mean:.3} [{}], dp_states = n*2^n: {states_ok}", shown.join(" ")),
    )
}

fn volatility() -> Outcome {
    let g = grid(40, 40, 7);
    let quality = run_quality_suite(&g, 12, 60, 7, 24, &ClosureOptions::default()).map_err(|e| e.to_string())?;
    let ratios = |f: fn(&tourplan::bench::QualityTrial) -> f64| -> Vec<f64> {
        quality.trials.iter().map(|t| f(t) / t.exact).collect()
    };
    let nn = ratios(|t| t.nearest_neighbor);
    let nat = ratios(|t| t.natural_normal);
    let hits = |r: &[f64]| {
        (
            r.iter().filter(|&&x| (x - 1.0).abs() <= 1e-9).count(),
            r.iter().filter(|&&x| x > 1.02).count(),
        )
    };
    let (nn_opt, nn_worse) = hits(&nn);
    let (nat_opt, nat_worse) = hits(&nat);
    check(
        quality.trials.len() >= 50 && nn_opt > 0 && nn_worse > 0 && nat_opt > 0 && nat_worse > 0,
        format!(
            "{} trials at n=12: nearest neighbor optimal {nn_opt}, >1.02 {nn_worse}; \
             natural normal optimal {nat_opt}, >1.02 {nat_worse}",
            quality.trials.len()
        ),
    )
}

fn run_script(graph: &CityGraph, script: &str) -> (i32, String) {
    let mut out = Vec::new();
    let code = Session::new(graph, SessionOptions::default())
        .run(&mut Cursor::new(script.as_bytes().to_vec()), &mut out)
        .unwrap();
    (code, String::from_utf8_lossy(&out).into_owned())
}

fn cli_behavior() -> Outcome {
    let g = grid(10, 10, 8);
    let url = |k: usize| {
        let pts: Vec<GeoPoint> = g.vertices().step_by(4).take(k).map(|(_, p)| p).collect();
        emit_gmaps_url(&pts).unwrap()
    };
    let mut failed = Vec::new();

    let (code, text) = run_script(&g, "google.com\nx\n");
    if code != 0 || !text.contains("Invalid URL! Try again:") {
        failed.push("invalid URL re-prompt");
    }

    let (_, at20) = run_script(&g, &format!("{}\nx\n", url(20)));
    let (_, at21) = run_script(&g, &format!("{}\nx\n", url(21)));
    if !at20.contains(" 5. Exact") || at21.contains(" 5. Exact") {
        failed.push("exact option visibility");
    }

    let (_, text) = run_script(&g, &format!("{}\n2\n3\n4\n5\n4\nx\n", url(8)));
    if text.matches("Time required to build subgraph").count() != 1 {
        failed.push("closure built once");
    }

    let mut b = GraphBuilder::new(false);
    for (id, lon) in [(1, 0.0), (2, 0.001), (3, 0.01)] {
        b.add_vertex(VertexId(id), GeoPoint::new(0.0, lon).unwrap()).unwrap();
    }
    b.add_edge(VertexId(1), VertexId(2), 111.0).unwrap();
    let island = b.build().unwrap();
    let (_, text) = run_script(&island, "google.com/maps/dir/0,0/0,0.001/0,0.01/\n3\nx\n");
    if !text.contains(DISCONNECTED_NOTICE) {
        failed.push("disconnected fallback");
    }

    let (code, _) = run_script(&g, &format!("{}\n1\nx\n", url(5)));
    if code != 0 {
        failed.push("x exits");
    }
    check(
        failed.is_empty(),
        if failed.is_empty() {
            "re-prompt, exact visibility at 20/21, single closure build, fallback, clean exit".to_string()
        } else {
            format!("failed: {}", failed.join(", "))
        },
    )
}

fn url_round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut bad = 0;
    for _ in 0..1000 {
        let k = rng.gen_range(2..=25);
        let pts: Vec<GeoPoint> = (0..k)
            .map(|_| GeoPoint::new(rng.gen_range(-90.0..=90.0), rng.gen_range(-180.0..=180.0)).unwrap())
            .collect();
        let parsed = parse_gmaps_url(&emit_gmaps_url(&pts).unwrap()).map_err(|e| e.to_string())?.points;
        let six = |p: &GeoPoint| format!("{:.6},{:.6}", p.lat(), p.lon());
        if parsed.len() != pts.len() || pts.iter().zip(&parsed).any(|(a, b)| six(a) != six(b)) {
            bad += 1;
        }
    }
    check(bad == 0, format!("1000 point lists, {bad} mismatches"))
}

fn main() {
    let started = Instant::now();
    // Build the 180k-vertex city before any timing starts.
    let big = grid(425, 422, 5);
    let criteria: Vec<Criterion> = vec![
        ("exact solver vs enumeration oracle", Box::new(exact_vs_enumeration)),
        ("exact dominates heuristics", Box::new(dominance)),
        ("A* agrees with Dijkstra", Box::new(astar_agreement)),
        ("closure vs Floyd-Warshall", Box::new(closure_vs_floyd_warshall)),
        ("scale on ~180k vertices", Box::new(|| scale(&big))),
        ("exponential growth of exact solver", Box::new(exponential_growth)),
        ("heuristic volatility at n=12", Box::new(volatility)),
        ("CLI behavior", Box::new(cli_behavior)),
        ("URL codec round trip", Box::new(url_round_trip)),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed ({:.1?})",
        criteria.len() - failures,
        started.elapsed()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
