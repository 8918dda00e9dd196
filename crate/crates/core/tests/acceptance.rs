//! Acceptance suite. Runs every criterion in sequence, prints one line per
//! criterion and exits nonzero if any fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use latticeplan::bench::{run_suite, write_report, run_scenario, ScenarioSettings, SuiteManifest, SuiteReport};
use latticeplan::codec::*;
use latticeplan::gridmap::OccupancyGrid;
use latticeplan::objective::{path_length, tuple_length};
use latticeplan::optimizers::{OptimizerConfig, OptimizerKind};
use latticeplan::rng::{PinnedUniform, RandomStream};
use latticeplan::sampler::{generate_path, lower_bound_from_prefix, next_bounds, sample, SamplerConfig};
use latticeplan::stats::rank_sum_test;
use rand::seq::SliceRandom;

const CATALAN: [u128; 9] = [1, 2, 5, 14, 42, 132, 429, 1430, 4862];
const ENUMERATION_BUDGET: Duration = Duration::from_secs(5);
const GENERATIONS_PER_SIZE: usize = 100_000;
const BOUNDS_SIZES: [usize; 3] = [5, 20, 50];
const STAIRCASE_LENGTH: f64 = 69.882_250_993_908_56;
const STAIRCASE_TOL: f64 = 1e-9;
const STAIRCASE_ALPHAS: [f64; 5] = [64.0, 100.0, 1e3, 1e6, 1e9];
const TIMING_SAMPLES: usize = 1000;
const MEDIAN_LIMIT: Duration = Duration::from_millis(10);
const SANITY_RUNS: usize = 20;
const SANITY_EVALS: usize = 1000;
const SANITY_MEAN_LIMIT: f64 = 75.0;
const SANITY_BUDGET: Duration = Duration::from_secs(120);
const SUITE_BUDGET: Duration = Duration::from_secs(30 * 60);
const RANK_EXACT_MAX: usize = 10;
const RANK_EXACT_TOL: f64 = 1e-12;
const MC_SHUFFLES: usize = 100_000;
const MC_TOL: f64 = 0.02;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut checked = 0usize;
    for (n, &expected) in (2..=10).zip(CATALAN.iter()) {
        let tuples = enumerate_tuples(n).map_err(|e| e.to_string())?;
        check(tuples.len() as u128 == expected, || format!("n={n}: {} tuples, expected {expected}", tuples.len()))?;
        for t in &tuples {
            for side in [Side::Above, Side::Below] {
                let p = tuple_to_path(t, side);
                check(path_to_tuple(&p).as_ref() == Ok(t), || format!("path roundtrip failed for {t}"))?;
            }
            let tree = tuple_to_tree(t);
            check(tree_to_tuple(&tree) == *t, || format!("tree roundtrip failed for {t}"))?;
            let rebuilt = OrderedTree::from_parents(&tree.parents()).map_err(|e| e.to_string())?;
            check(rebuilt == tree, || format!("parent links roundtrip failed for {t}"))?;
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < ENUMERATION_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{checked} tuples for n=2..10 match Catalan counts and roundtrip, {elapsed:.2?}"))
}

fn criterion_2() -> Outcome {
    let mut rng = RandomStream::new(0xACCE_0002);
    let mut violations = 0usize;
    let mut first = None;
    for &n in &BOUNDS_SIZES {
        let grid = OccupancyGrid::empty(n, "empty");
        for _ in 0..GENERATIONS_PER_SIZE {
            let alpha = rng.uniform() * 10.0;
            let seed = (rng.uniform() * u64::MAX as f64) as u64;
            let Ok(out) = sample(&grid, &SamplerConfig::new(alpha).with_seed(seed)) else {
                violations += 1;
                first.get_or_insert(format!("n={n} alpha={alpha} seed={seed}: generation failed on an empty grid"));
                continue;
            };
            let t = out.tuple.entries();
            let mut bad = Vec::new();
            if t.len() != n || t.iter().any(|&v| v > n - 1) || t[n - 1] != 0 {
                bad.push("range/terminal");
            }
            if t.iter().sum::<usize>() != n - 1 {
                bad.push("sum");
            }
            let mut prefix = 0;
            for (i, &v) in t.iter().enumerate().take(n - 1) {
                prefix += v;
                if prefix < i + 1 {
                    bad.push("prefix");
                    break;
                }
            }
            let (mut prev_t, mut slack, mut upper) = (1usize, 0i64, n);
            for i in 0..n {
                let b = next_bounds(prev_t, slack, upper);
                if b.lower != lower_bound_from_prefix(&t[..i]) {
                    bad.push("recursion vs slack-free bound");
                    break;
                }
                prev_t = t[i];
                slack = b.slack;
                upper = b.upper;
            }
            if path_to_tuple(&out.path).as_ref() != Ok(&out.tuple) {
                bad.push("path");
            }
            if !bad.is_empty() {
                violations += 1;
                first.get_or_insert(format!("n={n} seed={seed}: {bad:?}"));
            }
        }
    }
    let total = GENERATIONS_PER_SIZE * BOUNDS_SIZES.len();
    match first {
        None => Ok(format!("{total} generations on n={BOUNDS_SIZES:?}, 0 violations")),
        Some(msg) => Err(format!("{violations} violations of {total}; first: {msg}")),
    }
}

fn criterion_3() -> Outcome {
    for n in [2usize, 5, 20, 50] {
        let g = OccupancyGrid::empty(n, "empty");
        let out = generate_path(&g, &SamplerConfig::new(0.0), &mut PinnedUniform(1.0)).map_err(|b| format!("{b:?}"))?;
        check(out.tuple == TreeTuple::l_shape(n), || format!("alpha=0, n={n}: got {}", out.tuple))?;
    }
    let g = OccupancyGrid::empty(50, "empty");
    let mut worst: f64 = 0.0;
    for alpha in STAIRCASE_ALPHAS {
        let out = generate_path(&g, &SamplerConfig::new(alpha), &mut PinnedUniform(1.0)).map_err(|b| format!("{b:?}"))?;
        check(out.tuple == TreeTuple::staircase(50), || format!("alpha={alpha}: got {}", out.tuple))?;
        let len = path_length(&out.path);
        worst = worst.max((len - STAIRCASE_LENGTH).abs());
        check((len - (2.0 + 48.0 * 2f64.sqrt())).abs() <= STAIRCASE_TOL, || format!("length {len}"))?;
        check((tuple_length(&out.tuple) - len).abs() <= STAIRCASE_TOL, || "tuple/path length mismatch".into())?;
    }
    check(worst <= STAIRCASE_TOL, || format!("length error {worst:e}"))?;
    Ok(format!("alpha=0 gives the L-shape; alpha>=64 gives the staircase of length {STAIRCASE_LENGTH:.4} (err {worst:.1e})"))
}

fn criterion_4() -> Outcome {
    let g = OccupancyGrid::empty(50, "empty");
    let mut times = Vec::with_capacity(TIMING_SAMPLES);
    for seed in 0..TIMING_SAMPLES as u64 {
        let cfg = SamplerConfig::new(1.0 + (seed % 7) as f64).with_seed(seed);
        let start = Instant::now();
        let out = sample(&g, &cfg);
        times.push(start.elapsed());
        check(out.is_ok(), || format!("seed {seed} failed on an empty grid"))?;
    }
    times.sort();
    let median = times[TIMING_SAMPLES / 2];
    check(median < MEDIAN_LIMIT, || format!("median {median:?}"))?;
    Ok(format!("median {median:.1?} over {TIMING_SAMPLES} samples (limit {MEDIAN_LIMIT:?})"))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let g = OccupancyGrid::empty(50, "empty");
    let settings = ScenarioSettings { runs: SANITY_RUNS, evals: SANITY_EVALS, base_seed: 1, ..Default::default() };
    let mut summary = Vec::new();
    for kind in OptimizerKind::ALL {
        let r = run_scenario(&g, &OptimizerConfig::new(kind), &settings).map_err(|e| e.to_string())?;
        let mean = r.final_fitnesses().iter().sum::<f64>() / r.runs as f64;
        check(r.success_ratio == 1.0, || format!("{kind}: success ratio {}", r.success_ratio))?;
        check(mean <= SANITY_MEAN_LIMIT, || format!("{kind}: mean best {mean:.3}"))?;
        check(r.records.iter().all(|rec| rec.evaluations == SANITY_EVALS), || format!("{kind}: budget not spent exactly"))?;
        summary.push(format!("{kind} {mean:.2}"));
    }
    let elapsed = start.elapsed();
    check(elapsed < SANITY_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("success 1.0 for all, mean best: {} ({elapsed:.1?})", summary.join(", ")))
}

fn suite_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("benchmarks")
}

fn load_suite() -> Result<SuiteManifest, String> {
    let text = fs::read_to_string(suite_dir().join("suite.json")).map_err(|e| e.to_string())?;
    SuiteManifest::from_json(&text).map_err(|e| e.to_string())
}

fn read_tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn criterion_6(report: &SuiteReport, elapsed: Duration) -> Outcome {
    let m = &report.manifest;
    check(report.scenarios.len() == m.maps.len() * m.optimizers.len(), || "missing scenarios".into())?;
    for s in &report.scenarios {
        check(s.records.len() == m.runs, || format!("{}/{}: {} runs", s.map, s.optimizer, s.records.len()))?;
        check((0.0..=1.0).contains(&s.success_ratio), || format!("{}/{}: ratio {}", s.map, s.optimizer, s.success_ratio))?;
        for r in &s.records {
            check(r.trace.len() == m.evals, || format!("{}/{} seed {}: trace length {}", s.map, s.optimizer, r.seed, r.trace.len()))?;
            check(r.trace.is_monotone(), || format!("{}/{} seed {}: trace not monotone", s.map, s.optimizer, r.seed))?;
        }
        check(s.mean_trace.windows(2).all(|w| w[1] <= w[0]), || "mean trace not monotone".into())?;
        check(s.min_trace.windows(2).all(|w| w[1] <= w[0]), || "min trace not monotone".into())?;
    }
    let pairs = m.optimizers.len() * (m.optimizers.len() - 1) / 2;
    check(report.significance.len() == m.maps.len() * pairs, || "incomplete rank-sum matrix".into())?;
    for e in &report.significance {
        check(e.p_value > 0.0 && e.p_value <= 1.0, || format!("{}: p = {}", e.map, e.p_value))?;
    }
    check(elapsed < SUITE_BUDGET, || format!("suite took {elapsed:?}"))?;

    let a = tempfile::tempdir().map_err(|e| e.to_string())?;
    let b = tempfile::tempdir().map_err(|e| e.to_string())?;
    write_report(report, a.path()).map_err(|e| e.to_string())?;
    let again = run_suite(m, &suite_dir()).map_err(|e| e.to_string())?;
    write_report(&again, b.path()).map_err(|e| e.to_string())?;
    let (ta, tb) = (read_tree(a.path()), read_tree(b.path()));
    for f in ["success_ratio.csv", "mean_convergence.csv", "min_convergence.csv", "significance.csv", "summary.json"] {
        check(ta.iter().any(|(p, _)| p == Path::new(f)), || format!("{f} not written"))?;
    }
    check(ta == tb, || "second run differs from the first".into())?;
    Ok(format!(
        "{} maps x {} optimizers x {} runs x {} evals: traces monotone, ratios in [0,1], {} p-values in (0,1], {} output files bit-identical across reruns ({elapsed:.1?})",
        m.maps.len(),
        m.optimizers.len(),
        m.runs,
        m.evals,
        report.significance.len(),
        ta.len()
    ))
}

fn criterion_7(report: &SuiteReport) -> Outcome {
    match &report.trend {
        Some(t) => Ok(format!(
            "REPORTED (soft): narrow-passage maps {:?}: sade {:.3} vs debest {:.3} -> {}",
            t.maps,
            t.sade_success,
            t.debest_success,
            if t.holds { "holds" } else { "reversed, flagged for investigation" }
        )),
        None => Err("trend check not computed".into()),
    }
}

fn midranks(pooled: &[f64]) -> Vec<f64> {
    pooled
        .iter()
        .map(|&v| {
            let less = pooled.iter().filter(|&&w| w < v).count() as f64;
            let equal = pooled.iter().filter(|&&w| w == v).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

fn enumeration_p(a: &[f64], b: &[f64]) -> f64 {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let (na, n) = (a.len(), pooled.len());
    let centre = na as f64 * (n as f64 + 1.0) / 2.0;
    let observed = (ranks[..na].iter().sum::<f64>() - centre).abs();
    let (mut extreme, mut total) = (0u64, 0u64);
    for mask in 0u32..1 << n {
        if mask.count_ones() as usize != na {
            continue;
        }
        total += 1;
        let s: f64 = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| ranks[i]).sum();
        if (s - centre).abs() >= observed - 1e-9 {
            extreme += 1;
        }
    }
    extreme as f64 / total as f64
}

fn criterion_8() -> Outcome {
    let mut rng = RandomStream::new(0xACCE_0008);
    let mut draw = |len: usize, shift: f64, ties: bool| -> Vec<f64> {
        (0..len)
            .map(|_| {
                let v = rng.uniform() * 10.0 + shift;
                if ties { v.round() } else { v }
            })
            .collect()
    };
    let mut exact_cases = 0;
    let mut worst_exact: f64 = 0.0;
    for na in 1..RANK_EXACT_MAX {
        for nb in 1..=RANK_EXACT_MAX - na {
            for k in 0..4 {
                let a = draw(na, k as f64, k % 2 == 1);
                let b = draw(nb, 0.0, k % 2 == 1);
                let r = rank_sum_test(&a, &b).map_err(|e| e.to_string())?;
                check(r.exact, || format!("{na}/{nb} did not use the exact branch"))?;
                let d = (r.p_value - enumeration_p(&a, &b)).abs();
                worst_exact = worst_exact.max(d);
                exact_cases += 1;
            }
        }
    }
    check(worst_exact <= RANK_EXACT_TOL, || format!("exact branch off by {worst_exact:e}"))?;

    let mut worst_mc: f64 = 0.0;
    for shift in [0.0, 1.0, 2.5] {
        let a = draw(20, shift, false);
        let b = draw(20, 0.0, false);
        let r = rank_sum_test(&a, &b).map_err(|e| e.to_string())?;
        check(!r.exact, || "20/20 used the exact branch".into())?;
        let pooled: Vec<f64> = a.iter().chain(&b).copied().collect();
        let mut ranks = midranks(&pooled);
        let centre = 20.0 * 41.0 / 2.0;
        let observed = (ranks[..20].iter().sum::<f64>() - centre).abs();
        let mut shuffler = RandomStream::new(shift.to_bits());
        let mut extreme = 0;
        for _ in 0..MC_SHUFFLES {
            ranks.shuffle(&mut shuffler);
            if (ranks[..20].iter().sum::<f64>() - centre).abs() >= observed - 1e-9 {
                extreme += 1;
            }
        }
        let mc = extreme as f64 / MC_SHUFFLES as f64;
        worst_mc = worst_mc.max((r.p_value - mc).abs());
    }
    check(worst_mc <= MC_TOL, || format!("normal branch off Monte-Carlo by {worst_mc:.4}"))?;
    Ok(format!(
        "{exact_cases} exact cases match enumeration (max err {worst_exact:.1e}); 20/20 within {worst_mc:.4} of {MC_SHUFFLES}-shuffle Monte-Carlo"
    ))
}

fn main() {
    // `cargo test -- <filter>` passes arguments; only run when unfiltered or asked for.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }

    let mut results: Vec<(u32, Outcome)> = Vec::new();
    let mut report_line = |id: u32, outcome: Outcome| {
        match &outcome {
            Ok(msg) => println!("criterion {id}: PASS  {msg}"),
            Err(msg) => println!("criterion {id}: FAIL  {msg}"),
        }
        results.push((id, outcome));
    };

    report_line(1, criterion_1());
    report_line(2, criterion_2());
    report_line(3, criterion_3());
    report_line(4, criterion_4());
    report_line(5, criterion_5());

    let suite = load_suite().and_then(|m| {
        let start = Instant::now();
        run_suite(&m, &suite_dir()).map(|r| (r, start.elapsed())).map_err(|e| e.to_string())
    });
    match &suite {
        Ok((report, elapsed)) => {
            report_line(6, criterion_6(report, *elapsed));
            report_line(7, criterion_7(report));
        }
        Err(e) => {
            report_line(6, Err(e.clone()));
            report_line(7, Err(e.clone()));
        }
    }
    report_line(8, criterion_8());

    let failed: Vec<u32> = results.iter().filter(|(_, o)| o.is_err()).map(|(id, _)| *id).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria passed", results.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
