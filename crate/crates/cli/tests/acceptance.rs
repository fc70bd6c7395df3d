//! Acceptance suite. Prints one `criterion N: PASS|FAIL` line per criterion
//! and exits nonzero if any fails.
//!
//! Numeric arguments select a subset, e.g.
//! `cargo test -p wfair-cli --test acceptance -- 1 5 13`. Raw UCI files are
//! read from `$WFAIR_DATA_DIR`, else from `data/uci` at the workspace root.
//! Criteria 9 to 11 train on real data and take most of the runtime.

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use tempfile::TempDir;
use wfair_cli::files::parse_trajectory;
use wfair_cli::ops::{self, Env, Splits, METHOD_PENALTY, METHOD_UNCONSTRAINED, TRAJECTORY_FILE};
use wfair_cli::results::MetricsRow;
use wfair_cli::sweep::sweep;
use wfair_cli::{Grid, Layout, RunConfig, Store};
use wfair_core::metrics::{self, GroupedBeliefs};
use wfair_core::ot::{self, EmpiricalDist};
use wfair_core::postprocess::{quantile_match, QuantileBins, QuantileMap};
use wfair_core::trainer::{self, PenalizedProblem, TrainConfig};
use wfair_core::{Dataset, FeatureMode, FeatureSchema, GroupId, ModelParams, Target};
use wfair_data::{Benchmark, DATA_DIR_ENV};
use wfair_testkit as kit;

/// `Ok` carries the details of a pass, `Err` those of a failure.
type Outcome = Result<String, String>;

fn verdict(pass: bool, details: String) -> Outcome {
    if pass {
        Ok(details)
    } else {
        Err(details)
    }
}

/// Shared output root, so the real-data criteria reuse prepared splits and
/// baselines.
struct Ctx {
    env: Env,
    store: Store,
}

fn data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/uci"))
}

fn dist(v: &[f64]) -> EmpiricalDist {
    EmpiricalDist::new(v).unwrap()
}

fn grouped(lists: &[Vec<f64>]) -> GroupedBeliefs {
    GroupedBeliefs::new(lists.iter().enumerate().map(|(a, v)| (GroupId(a as u32), v.clone())).collect()).unwrap()
}

fn transport_oracles(_: &Ctx) -> Outcome {
    let start = Instant::now();
    let mut rng = kit::rng(1001);
    let mut equal = 0.0f64;
    for _ in 0..500 {
        let n = rng.gen_range(1..=6);
        let b = kit::beliefs(&mut rng, n);
        let c = kit::beliefs(&mut rng, n);
        equal = equal.max((ot::wasserstein1(&dist(&b), &dist(&c)) - kit::permutation_w1(&b, &c)).abs());
    }
    let mut unequal = 0.0f64;
    for _ in 0..200 {
        let b = kit::sized_beliefs(&mut rng, 1, 4);
        let c = kit::sized_beliefs(&mut rng, 1, 4);
        unequal = unequal.max((ot::wasserstein1(&dist(&b), &dist(&c)) - kit::lp_w1(&b, &c)).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        equal <= 1e-12 && unequal <= 1e-10 && secs < 10.0,
        format!("permutation max diff {equal:.1e} (500), LP max diff {unequal:.1e} (200), {secs:.2} s"),
    )
}

fn three_routes(_: &Ctx) -> Outcome {
    let mut rng = kit::rng(1002);
    let mut worst = [0.0f64; 3];
    for _ in 0..1000 {
        let b = dist(&kit::sized_beliefs(&mut rng, 1, 1000));
        let c = dist(&kit::sized_beliefs(&mut rng, 1, 1000));
        let w = ot::wasserstein1(&b, &c);
        let routes =
            [ot::threshold_disparity(&b, &c), ot::expected_flip_cost(&b, &c), ot::wasserstein1_quantile_form(&b, &c)];
        for (m, r) in worst.iter_mut().zip(routes) {
            *m = m.max((w - r).abs());
        }
    }
    verdict(
        worst.iter().all(|&m| m <= 1e-10),
        format!(
            "1000 instances, max diff vs threshold {:.1e}, flip cost {:.1e}, quantile form {:.1e}",
            worst[0], worst[1], worst[2]
        ),
    )
}

fn coupling_structure(_: &Ctx) -> Outcome {
    let mut rng = kit::rng(1003);
    let (mut margin, mut dense, mut count) = (0.0f64, 0usize, 0usize);
    // Small instances with heavy ties, then large ones.
    for (instances, max) in [(2000, 6), (500, 1000)] {
        for _ in 0..instances {
            let b = dist(&kit::sized_beliefs(&mut rng, 1, max));
            let c = dist(&kit::sized_beliefs(&mut rng, 1, max));
            let t = ot::optimal_coupling(&b, &c);
            for r in t.row_sums() {
                margin = margin.max((r - 1.0 / b.len() as f64).abs());
            }
            for s in t.col_sums() {
                margin = margin.max((s - 1.0 / c.len() as f64).abs());
            }
            if t.entries.len() > b.len() + c.len() - 1 || t.entries.iter().any(|e| e.2 <= 0.0) {
                dense += 1;
            }
            count += 1;
        }
    }
    verdict(
        margin <= 1e-12 && dense == 0,
        format!("{count} instances, max marginal error {margin:.1e}, {dense} over the n_b + n_c - 1 bound"),
    )
}

fn barycenter_optimality(_: &Ctx) -> Outcome {
    let mut rng = kit::rng(1004);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let k = rng.gen_range(2..=5);
        let dists: Vec<EmpiricalDist> = (0..k).map(|_| dist(&kit::sized_beliefs(&mut rng, 1, 8))).collect();
        let w = kit::weights(&mut rng, k);
        let res = ot::common_resolution(&dists, 100_000).unwrap();
        let cost = ot::barycenter_cost(&dists, &w, &ot::barycenter(&dists, &w, res).unwrap()).unwrap();
        for d in &dists {
            worst = worst.max(cost - ot::barycenter_cost(&dists, &w, d).unwrap());
        }
        for _ in 0..1000 {
            let q = dist(&kit::sized_beliefs(&mut rng, 1, 16));
            worst = worst.max(cost - ot::barycenter_cost(&dists, &w, &q).unwrap());
        }
    }
    verdict(
        worst <= 1e-9,
        format!("100 instances x 1000 random targets and every input, max excess {worst:.2e} (negative is a margin)"),
    )
}

fn cdf_and_quantile_integrals(_: &Ctx) -> Outcome {
    let mut rng = kit::rng(1005);
    let mut worst = [0.0f64; 3];
    for _ in 0..500 {
        let b = kit::sized_beliefs(&mut rng, 1, 200);
        let c = kit::sized_beliefs(&mut rng, 1, 200);
        let cdf = kit::cdf_gap_integral(&b, &c);
        let quant = kit::quantile_gap_integral(&b, &c);
        let gaps = [
            (cdf - quant).abs(),
            (ot::threshold_disparity(&dist(&b), &dist(&c)) - cdf).abs(),
            (ot::wasserstein1_quantile_form(&dist(&b), &dist(&c)) - quant).abs(),
        ];
        for (m, g) in worst.iter_mut().zip(gaps) {
            *m = m.max(g);
        }
    }
    verdict(
        worst.iter().all(|&m| m <= 1e-10),
        format!(
            "500 pairs, max |int|F-G| - int|Finv-Ginv|| {:.1e}, library vs oracles {:.1e} / {:.1e}",
            worst[0], worst[1], worst[2]
        ),
    )
}

/// `groups` groups in one attribute column; the label depends on features
/// and group.
fn random_dataset(rng: &mut impl Rng, n: usize, d: usize, groups: u32) -> Dataset {
    let (mut x, mut a, mut y, mut g) = (vec![], vec![], vec![], vec![]);
    for i in 0..n {
        let grp = (i as u32) % groups;
        let row: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let signal = row.iter().sum::<f64>() + 0.8 * f64::from(grp) + rng.gen_range(-0.5..0.5);
        x.extend_from_slice(&row);
        a.push(grp);
        y.push(u8::from(signal > 0.4));
        g.push(GroupId(grp));
    }
    Dataset::new(FeatureSchema::new(d, 1), x, a, y, g).unwrap()
}

/// Smallest distance between a belief and a barycenter atom or between two
/// beliefs of one group; below it the objective is not smooth at step `h`.
fn min_gap(problem: &PenalizedProblem, theta: &[f64], bary: &EmpiricalDist) -> f64 {
    let mut gap = f64::INFINITY;
    for d in problem.group_dists(theta).unwrap() {
        for w in d.atoms().windows(2) {
            gap = gap.min(w[1] - w[0]);
        }
        for &s in d.atoms() {
            for &b in bary.atoms() {
                gap = gap.min((s - b).abs());
            }
        }
    }
    gap
}

fn gradient(_: &Ctx) -> Outcome {
    let mut rng = kit::rng(1006);
    let (mut checked, mut skipped, mut worst) = (0, 0, 0.0f64);
    while checked < 100 {
        let n = rng.gen_range(4..=50);
        let d = rng.gen_range(1..=5);
        let groups = rng.gen_range(2..=3);
        let ds = random_dataset(&mut rng, n, d, groups);
        let cfg = TrainConfig {
            alpha: if rng.gen() { 0.0 } else { rng.gen_range(0.0..1.0) },
            beta: rng.gen_range(0.1..10.0),
            mode: if rng.gen() { FeatureMode::Full } else { FeatureMode::Blind },
            ..TrainConfig::default()
        };
        let problem = PenalizedProblem::new(&ds, &cfg).unwrap();
        let theta: Vec<f64> = (0..problem.design().width()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let shifted: Vec<f64> = theta.iter().map(|t| t + rng.gen_range(-0.3..0.3)).collect();
        let bary = problem.barycenter(&shifted, rng.gen_range(3..=30)).unwrap();
        if min_gap(&problem, &theta, &bary) < 1e-4 {
            skipped += 1;
            continue;
        }
        let p = ModelParams::new(theta.clone(), cfg.mode, ds.schema()).unwrap();
        let grad = trainer::penalized_grad(&p, &ds, &cfg, &bary).unwrap();
        let fd = kit::finite_difference(
            |t| {
                let q = ModelParams::new(t.to_vec(), cfg.mode, ds.schema()).unwrap();
                trainer::penalized_objective(&q, &ds, &cfg, &bary).unwrap()
            },
            &theta,
            1e-6,
        );
        worst = worst.max(kit::relative_error(&grad, &fd, 1e-8));
        checked += 1;
    }
    verdict(worst <= 1e-4, format!("100 tie-free instances ({skipped} with near-ties skipped), max relative error {worst:.1e}"))
}

fn pseudo_spdd_bound(_: &Ctx) -> Outcome {
    let mut rng = kit::rng(1007);
    let (mut worst, mut min_ratio) = (f64::NEG_INFINITY, f64::INFINITY);
    for _ in 0..200 {
        let k = rng.gen_range(1..=6);
        let lists: Vec<Vec<f64>> = (0..k).map(|_| kit::sized_beliefs(&mut rng, 1, 60)).collect();
        let g = grouped(&lists);
        let bary = g.barycenter(rng.gen_range(1..=200)).unwrap();
        let (exact, bound) = (metrics::spdd_exact(&g), metrics::pseudo_spdd(&g, &bary));
        worst = worst.max(exact - bound);
        if exact > 0.0 {
            min_ratio = min_ratio.min(bound / exact);
        }
    }
    verdict(
        worst <= 1e-12,
        format!("200 fixtures, max (SPDD - pseudo-SPDD) {worst:.2e}, smallest bound/SPDD ratio {min_ratio:.3}"),
    )
}

fn barycenter_cost_trend(_: &Ctx) -> Outcome {
    let pop = kit::Population::near();
    let target = pop.barycenter_cost(200_000);
    let mut rng = kit::rng(1008);
    let sizes = [50, 100, 200, 400, 800, 1600];
    let gaps: Vec<f64> = sizes
        .iter()
        .map(|&n| {
            let mut dev: Vec<f64> = (0..20)
                .map(|_| {
                    let dists: Vec<EmpiricalDist> = (0..3).map(|a| dist(&pop.sample(&mut rng, a, n))).collect();
                    let bary = ot::barycenter(&dists, &pop.weights, n).unwrap();
                    (ot::barycenter_cost(&dists, &pop.weights, &bary).unwrap() - target).abs()
                })
                .collect();
            kit::median(&mut dev)
        })
        .collect();
    let shown: Vec<String> = sizes.iter().zip(&gaps).map(|(n, g)| format!("{n}:{g:.2e}")).collect();
    verdict(gaps.windows(2).all(|w| w[1] <= w[0]), format!("median deviation by size {}", shown.join(" ")))
}

fn penalty_rows<'a>(rows: &'a [MetricsRow], method: &str) -> Vec<&'a MetricsRow> {
    rows.iter().filter(|r| r.method == method).collect()
}

fn diagnostics(bench: Benchmark) -> String {
    match wfair_data::prepare(bench, &data_dir(), 0) {
        Ok(p) => p.manifest.diagnostics(),
        Err(e) => format!("cannot prepare {bench}: {e}"),
    }
}

fn german(ctx: &Ctx) -> Outcome {
    let start = Instant::now();
    let grid = Grid::parse(
        "alpha = 0\nbeta = 10, 30, 100\neta = 0.001, 0.01\nrefresh = none, 100\nsteps = 80000\nlog_every = 1000\n",
    )
    .map_err(|e| format!("{e:#}"))?;
    let out = sweep(&ctx.env, Benchmark::German, &grid, &ctx.store).map_err(|e| format!("{e:#}"))?;
    let secs = start.elapsed().as_secs_f64();
    let base = penalty_rows(&out.grid, METHOD_UNCONSTRAINED);
    let Some(base) = base.first() else {
        return Err(format!("no baseline row; {}", diagnostics(Benchmark::German)));
    };
    let pen = penalty_rows(&out.grid, METHOD_PENALTY);
    let feasible = pen.iter().filter(|r| r.metrics.err_05 <= 0.35).min_by(|a, b| a.metrics.sdd.total_cmp(&b.metrics.sdd));
    let lowest = pen.iter().min_by(|a, b| a.metrics.sdd.total_cmp(&b.metrics.sdd));
    let base_ok = (base.metrics.err_05 - 0.248).abs() <= 0.03;
    let pen_ok = feasible.is_some_and(|r| r.metrics.sdd <= 0.02);
    let show = |r: Option<&&MetricsRow>| {
        r.map_or("none".into(), |r| format!("SDD {:.4} Err-.5 {:.4} [{}]", r.metrics.sdd, r.metrics.err_05, r.params))
    };
    let mut details = format!(
        "{secs:.0} s, {} runs, {} failed; unconstrained Err-.5 {:.4} (target 0.248 +- 0.03); \
         lowest SDD with Err-.5 <= 0.35: {}; lowest SDD overall: {}",
        pen.len(),
        out.failures.len(),
        base.metrics.err_05,
        show(feasible),
        show(lowest)
    );
    let pass = base_ok && pen_ok && secs < 300.0;
    if !pass {
        details.push_str(&format!("; data: {}", diagnostics(Benchmark::German)));
    }
    verdict(pass, details)
}

fn adult(ctx: &Ctx) -> Outcome {
    let start = Instant::now();
    let grid = Grid::parse("alpha = 0\nbeta = 10, 30, 100\neta = 0.001, 0.01\nsteps = 80000\nlog_every = 1000\n")
        .map_err(|e| format!("{e:#}"))?;
    let out = sweep(&ctx.env, Benchmark::Adult, &grid, &ctx.store).map_err(|e| format!("{e:#}"))?;
    let secs = start.elapsed().as_secs_f64();
    let Some(base) = penalty_rows(&out.grid, METHOD_UNCONSTRAINED).first().copied() else {
        return Err(format!("no baseline row; {}", diagnostics(Benchmark::Adult)));
    };
    let post_name = ops::postprocess_method(Target::Barycenter);
    let Some(post) = penalty_rows(&out.grid, &post_name).first().copied() else {
        return Err("no post-processed row".into());
    };
    let pen = penalty_rows(&out.grid, METHOD_PENALTY);
    // SPDD gates use the unordered-pair convention; the ordered value is twice it.
    let best = pen
        .iter()
        .filter(|r| r.metrics.err_05 <= 0.25)
        .min_by(|a, b| a.metrics.spdd_unordered.total_cmp(&b.metrics.spdd_unordered));
    let m = &base.metrics;
    let base_ok = (m.err_05 - 0.142).abs() <= 0.015 && (m.spdd_unordered - 0.806).abs() <= 0.08;
    let pen_ok = best.is_some_and(|r| r.metrics.spdd_unordered <= 0.10);
    let post_ok = post.metrics.spdd_unordered <= 0.12 && post.metrics.err_05 <= 0.22;
    let show = |r: &MetricsRow| {
        format!(
            "Err-.5 {:.4} SPDD {:.4} (ordered {:.4})",
            r.metrics.err_05, r.metrics.spdd_unordered, r.metrics.spdd
        )
    };
    let mut details = format!(
        "{secs:.0} s, {} runs, {} failed; unconstrained {} vs 0.142 +- 0.015 / 0.806 +- 0.08: {}; \
         penalty best within Err-.5 0.25: {} vs SPDD 0.10: {}; post-process barycenter {} vs 0.12 / 0.22: {}",
        pen.len(),
        out.failures.len(),
        show(base),
        if base_ok { "ok" } else { "out" },
        best.map_or("none".into(), |r| format!("{} [{}]", show(r), r.params)),
        if pen_ok { "ok" } else { "out" },
        show(post),
        if post_ok { "ok" } else { "out" },
    );
    let pass = base_ok && pen_ok && post_ok && secs < 7200.0;
    if !pass {
        details.push_str(&format!("; data: {}", diagnostics(Benchmark::Adult)));
    }
    verdict(pass, details)
}

fn trajectory_of(model: &std::path::Path) -> Result<Vec<wfair_core::TrajectoryPoint>, String> {
    let path = model.parent().unwrap().join(TRAJECTORY_FILE);
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_trajectory(&text).map_err(|e| format!("{e:#}"))
}

fn adult_groups_reach_barycenter(ctx: &Ctx) -> Outcome {
    let s = Splits::load(&ctx.env, Benchmark::Adult, 0).map_err(|e| format!("{e:#}"))?;
    let cfg = RunConfig::parse("alpha = 0\nbeta = 100\neta = 0.001\nrefresh = 100\nsteps = 10000\nlog_every = 100\n")
        .map_err(|e| format!("{e:#}"))?;
    let model = ops::train(&ctx.env, &s, &cfg).map_err(|e| format!("{e:#}"))?;
    let traj = trajectory_of(&model)?;
    let (first, last) = (&traj[0], traj.last().unwrap());
    if last.step != 10_000 {
        return Err(format!("trajectory ends at step {}", last.step));
    }
    let ratios: Vec<(GroupId, f64, f64)> = first
        .group_w1
        .iter()
        .zip(&last.group_w1)
        .map(|(&(g, w0), &(_, w))| (g, w0, w))
        .collect();
    let shown: Vec<String> = ratios.iter().map(|(g, w0, w)| format!("{}: {w0:.4} -> {w:.4} ({:.0}%)", g.0, 100.0 * w / w0)).collect();
    verdict(ratios.iter().all(|(_, w0, w)| *w <= 0.1 * w0), format!("per-group W1 on test {}", shown.join(", ")))
}

/// Five groups whose beliefs start far apart under the baseline.
fn five_groups(n: usize, seed: u64) -> Dataset {
    let mut rng = kit::rng(seed);
    let (mut x, mut a, mut y, mut g) = (vec![], vec![], vec![], vec![]);
    for i in 0..n {
        let grp = (i % 5) as u32;
        let v = 0.6 * f64::from(grp) - 1.2 + rng.gen_range(-1.0..1.0);
        x.push(v);
        x.push(rng.gen_range(-1.0..1.0));
        a.push(grp);
        y.push(u8::from(v + x[x.len() - 1] * 0.5 + rng.gen_range(-0.5..0.5) > 0.0));
        g.push(GroupId(grp));
    }
    Dataset::new(FeatureSchema::new(2, 1), x, a, y, g).unwrap()
}

fn synthetic_trajectory(ctx: &Ctx) -> Outcome {
    // Raw Bank data is not available offline; a five-group stand-in replaces it.
    let s = Splits { bench: Benchmark::Bank, seed: 0, train: five_groups(1000, 12), test: five_groups(500, 13) };
    let cfg = RunConfig::parse("alpha = 0\nbeta = 10\neta = 0.01\nsteps = 3000\nlog_every = 100\n")
        .map_err(|e| format!("{e:#}"))?;
    let model = ops::train(&ctx.env, &s, &cfg).map_err(|e| format!("{e:#}"))?;
    let traj = trajectory_of(&model)?;
    let monotone = traj.windows(2).all(|w| w[1].step > w[0].step);
    let finite = traj.iter().all(|p| p.sdd.is_finite() && p.spdd.is_finite() && p.err_exp.is_finite());
    let (first, last) = (&traj[0], traj.last().unwrap());
    verdict(
        traj.len() > 1 && monotone && finite && last.spdd < first.spdd,
        format!(
            "synthetic 5-group stand-in, {} points, steps monotone {monotone}, SPDD {:.4} -> {:.4}, SDD {:.4} -> {:.4}, Err-Exp {:.4} -> {:.4}",
            traj.len(),
            first.spdd,
            last.spdd,
            first.sdd,
            last.sdd,
            first.err_exp,
            last.err_exp
        ),
    )
}

fn sorted_distinct(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn postprocessor(_: &Ctx) -> Outcome {
    let mut rng = kit::rng(1013);
    let (mut unordered, mut unstable, mut full_res, mut cost_gap) = (0, 0, 0, 0.0f64);
    for _ in 0..500 {
        let k = rng.gen_range(1..=4);
        let lists: Vec<Vec<f64>> = (0..k).map(|_| kit::sized_beliefs(&mut rng, 1, 40)).collect();
        let g = grouped(&lists);
        let t = dist(&kit::sized_beliefs(&mut rng, 1, 50));
        let bins = QuantileBins::new(rng.gen_range(1..=150)).unwrap();
        let once = quantile_match(&g, &t, bins).unwrap();
        for (before, after) in g.groups().values().zip(once.groups().values()) {
            let ok = (0..before.len())
                .all(|i| (0..before.len()).all(|j| before[i] > before[j] || after[i] <= after[j]));
            unordered += usize::from(!ok);
        }
        unstable += usize::from(quantile_match(&once, &t, bins).unwrap() != once);

        // Equal sizes with distinct beliefs and B = N: the monotone transport map.
        let n = rng.gen_range(1..=30);
        let lists: Vec<Vec<f64>> = (0..k)
            .map(|_| loop {
                let v = sorted_distinct((0..n).map(|_| rng.gen::<f64>()).collect());
                if v.len() == n {
                    break v;
                }
            })
            .collect();
        let g = grouped(&lists);
        let bins = QuantileBins::new(n).unwrap();
        let map = QuantileMap::from_dist(&t, bins);
        let resample = dist(&(1..=n).map(|i| map.quantile(i).unwrap()).collect::<Vec<_>>());
        let out = quantile_match(&g, &t, bins).unwrap();
        for (before, after) in g.groups().values().zip(out.groups().values()) {
            let moved: f64 = before.iter().zip(after).map(|(s, m)| (s - m).abs()).sum::<f64>() / n as f64;
            cost_gap = cost_gap.max((moved - ot::wasserstein1(&dist(before), &resample)).abs());
            let mut mapped = after.clone();
            mapped.sort_by(f64::total_cmp);
            full_res += usize::from(mapped.as_slice() != resample.atoms());
        }
    }
    verdict(
        unordered == 0 && unstable == 0 && full_res == 0 && cost_gap <= 1e-9,
        format!(
            "500 fixtures: {unordered} order violations, {unstable} not idempotent; B = N: {full_res} \
             mismatched profiles, max |moved - W1| {cost_gap:.1e}"
        ),
    )
}

type Criterion = (u32, &'static str, fn(&Ctx) -> Outcome);

const CRITERIA: [Criterion; 13] = [
    (1, "transport matches exhaustive oracles", transport_oracles),
    (2, "W1, threshold disparity, flip cost and quantile form agree", three_routes),
    (3, "couplings are feasible and sparse", coupling_structure),
    (4, "barycenter beats every candidate target", barycenter_optimality),
    (5, "CDF and quantile gap integrals agree", cdf_and_quantile_integrals),
    (6, "penalized gradient matches finite differences", gradient),
    (7, "pseudo-SPDD bounds exact SPDD", pseudo_spdd_bound),
    (8, "empirical barycenter cost converges", barycenter_cost_trend),
    (9, "German baseline and penalty", german),
    (10, "Adult baseline, penalty and post-processing", adult),
    (11, "Adult groups reach the barycenter", adult_groups_reach_barycenter),
    (12, "trajectory file on a five-group run", synthetic_trajectory),
    (13, "post-processor monotone, idempotent, exact at B = N", postprocessor),
];

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let tmp = TempDir::new().expect("temporary directory");
    let layout = Layout::new(tmp.path());
    let ctx = Ctx { store: Store::new(layout.results()), env: Env { layout, data_dir: data_dir() } };
    let quiet = panic::take_hook();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = vec![];
    for (id, name, run) in CRITERIA {
        if !wanted.is_empty() && !wanted.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| run(&ctx))).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {id}: PASS {name} ({secs:.1} s): {d}"),
            Err(d) => {
                println!("criterion {id}: FAIL {name} ({secs:.1} s): {d}");
                failed.push(id);
            }
        }
    }
    panic::set_hook(quiet);
    if failed.is_empty() {
        println!("acceptance: all selected criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing criteria {failed:?}");
        ExitCode::FAILURE
    }
}
