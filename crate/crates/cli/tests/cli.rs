//! End-to-end behavior of the subcommands on synthetic fixtures and the
//! German credit files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use rand::Rng;
use wfair_cli::config::{Grid, RunConfig};
use wfair_cli::files::{parse_beliefs, parse_trajectory, BeliefRow, ModelFile};
use wfair_cli::ops::{self, metrics_of, Env, PostConfig, Source, Split, Splits};
use wfair_cli::report::report;
use wfair_cli::results::{MetricsRow, Store, Tag};
use wfair_cli::sweep::sweep;
use wfair_cli::Layout;
use wfair_core::postprocess::QuantileMap;
use wfair_core::{Dataset, FeatureMode, FeatureSchema, GroupId, QuantileBins, Target};
use wfair_data::Benchmark;

fn raw_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/uci")
}

fn env_at(root: &Path) -> Env {
    Env { layout: Layout::new(root), data_dir: raw_dir() }
}

/// Two groups with features centered at `∓shift`; labels follow the feature.
fn two_groups(n: usize, shift: f64, seed: u64) -> Dataset {
    let mut rng = wfair_testkit::rng(seed);
    let (mut x, mut a, mut y, mut g) = (vec![], vec![], vec![], vec![]);
    for i in 0..n {
        let grp = (i % 2) as u32;
        let v = if grp == 1 { shift } else { -shift } + rng.gen_range(-1.0..1.0);
        x.push(v);
        x.push(rng.gen_range(-1.0..1.0));
        a.push(grp);
        y.push(u8::from(v + rng.gen_range(-0.5..0.5) > 0.0));
        g.push(GroupId(grp));
    }
    Dataset::new(FeatureSchema::new(2, 1), x, a, y, g).unwrap()
}

fn synthetic(shift: f64) -> Splits {
    Splits { bench: Benchmark::German, seed: 0, train: two_groups(400, shift, 1), test: two_groups(200, shift, 2) }
}

fn german(env: &Env, seed: u64) -> Splits {
    Splits::load(env, Benchmark::German, seed).unwrap()
}

fn short(beta: f64, steps: usize) -> RunConfig {
    RunConfig::parse(&format!("beta = {beta}\neta = 0.01\nsteps = {steps}\nlog_every = 100\n")).unwrap()
}

#[test]
fn perfect_classifier_has_zero_error() {
    let rows: Vec<BeliefRow> = (0..50)
        .map(|i| {
            let label = (i % 3 == 0) as u8;
            BeliefRow { group: GroupId(i % 2), label, belief: label as f64, adjusted: label as f64 }
        })
        .collect();
    let m = metrics_of(&rows).unwrap();
    assert_eq!(m.err_05, 0.0);
    assert_eq!(m.err_exp, 0.0);
}

#[test]
fn single_group_has_no_disparity() {
    let mut rng = wfair_testkit::rng(3);
    let rows: Vec<BeliefRow> = (0..80)
        .map(|i| {
            let s = rng.gen();
            BeliefRow { group: GroupId(4), label: (i % 2) as u8, belief: s, adjusted: s }
        })
        .collect();
    let m = metrics_of(&rows).unwrap();
    assert_eq!((m.dd_05, m.sdd, m.spdd, m.spdd_unordered, m.pseudo_spdd), (0.0, 0.0, 0.0, 0.0, 0.0));
}

#[test]
fn zero_penalty_keeps_the_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let env = env_at(dir.path());
    let s = german(&env, 0);
    let model = ops::train(&env, &s, &RunConfig::parse("beta = 0\nsteps = 300\n").unwrap()).unwrap();
    let (base_path, base) = ops::baseline(&env, &s, FeatureMode::Full).unwrap();
    assert_eq!(ModelFile::read(&model).unwrap().params, base);
    let penalized = ops::evaluate(&env, &s, &Source::Model(model), Split::Test, Tag::Single).unwrap();
    let unconstrained = ops::evaluate(&env, &s, &Source::Model(base_path), Split::Test, Tag::Single).unwrap();
    assert_eq!(penalized.method, ops::METHOD_PENALTY);
    assert_eq!(unconstrained.method, ops::METHOD_UNCONSTRAINED);
    assert_eq!(penalized.metrics, unconstrained.metrics);
}

#[test]
fn strong_penalty_flattens_german_disparity() {
    let dir = tempfile::tempdir().unwrap();
    let env = env_at(dir.path());
    let s = german(&env, 0);
    let cfg = RunConfig::parse("alpha = 0\nbeta = 30\neta = 0.01\nsteps = 80000\nrefresh = 100\nlog_every = 1000\n").unwrap();
    let model = ops::train(&env, &s, &cfg).unwrap();
    let traj = parse_trajectory(&fs::read_to_string(model.with_file_name(ops::TRAJECTORY_FILE)).unwrap()).unwrap();
    let last = traj.last().unwrap();
    assert_eq!(last.step, 80_000);
    assert!(last.sdd <= 0.02, "final SDD {}", last.sdd);
}

#[test]
fn training_twice_gives_identical_files() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = short(30.0, 400);
    let mut bytes = vec![];
    for dir in [&a, &b] {
        let env = env_at(dir.path());
        let model = ops::train(&env, &german(&env, 0), &cfg).unwrap();
        let traj = model.with_file_name(ops::TRAJECTORY_FILE);
        bytes.push((fs::read(&model).unwrap(), fs::read(traj).unwrap()));
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn evaluated_rows_are_recomputable_from_persisted_beliefs() {
    let dir = tempfile::tempdir().unwrap();
    let env = env_at(dir.path());
    let s = synthetic(1.5);
    let (model, _) = ops::baseline(&env, &s, FeatureMode::Full).unwrap();
    let row = ops::evaluate(&env, &s, &Source::Model(model), Split::Test, Tag::Single).unwrap();
    let rows = parse_beliefs(&fs::read_to_string(dir.path().join(&row.beliefs)).unwrap()).unwrap();
    assert_eq!(metrics_of(&rows).unwrap(), row.metrics);
}

#[test]
fn postprocessing_lowers_disparity_on_disjoint_groups() {
    let dir = tempfile::tempdir().unwrap();
    let env = env_at(dir.path());
    let s = synthetic(3.0);
    let (model, _) = ops::baseline(&env, &s, FeatureMode::Full).unwrap();
    let before = ops::evaluate(&env, &s, &Source::Model(model.clone()), Split::Test, Tag::Single).unwrap();
    let beliefs = ops::postprocess(&s, &model, &PostConfig::default(), Split::Test).unwrap();
    let after = ops::evaluate(&env, &s, &Source::Beliefs(beliefs), Split::Test, Tag::Single).unwrap();
    assert_eq!(after.method, "postprocess-barycenter");
    assert!(before.metrics.spdd > 0.5, "{}", before.metrics.spdd);
    assert!(after.metrics.spdd < before.metrics.spdd / 4.0, "{} vs {}", after.metrics.spdd, before.metrics.spdd);
}

#[test]
fn pooled_target_on_one_group_moves_beliefs_within_their_bin() {
    let dir = tempfile::tempdir().unwrap();
    let env = env_at(dir.path());
    let mut s = synthetic(1.0);
    for ds in [&mut s.train, &mut s.test] {
        let n = ds.len();
        let x: Vec<f64> = (0..n).flat_map(|i| ds.x_row(i).to_vec()).collect();
        *ds = Dataset::new(ds.schema(), x, vec![0; n], ds.labels().to_vec(), vec![GroupId(0); n]).unwrap();
    }
    let (model, params) = ops::baseline(&env, &s, FeatureMode::Full).unwrap();
    let pc = PostConfig { target: Target::Pooled, bins: QuantileBins::new(20).unwrap(), ..PostConfig::default() };
    let rows = parse_beliefs(&fs::read_to_string(ops::postprocess(&s, &model, &pc, Split::Train).unwrap()).unwrap())
        .unwrap();
    let map = QuantileMap::new(&wfair_core::logistic::predict(&params, &s.train).unwrap(), pc.bins).unwrap();
    for r in &rows {
        let i = map.inverse(r.belief);
        let hi = if i < 20 { map.quantile(i + 1).unwrap() } else { f64::INFINITY };
        assert_eq!(r.adjusted, map.quantile(i).unwrap());
        assert!(r.adjusted <= r.belief && r.belief < hi, "{r:?}");
    }
}

fn wfair(args: &[&str], root: &Path) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_wfair"))
        .args(args)
        .arg("--out")
        .arg(root)
        .env("WFAIR_DATA_DIR", raw_dir())
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

#[test]
fn binary_prepares_deterministically_and_defaults_to_100_bins() {
    let dir = tempfile::tempdir().unwrap();
    let first = wfair(&["prepare", "german"], dir.path()).stdout;
    let second = wfair(&["prepare", "--dataset", "german"], dir.path()).stdout;
    assert_eq!(first, second);
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("wfair-manifest v1\n"));
    assert!(text.contains("rows.total = 1000\n"));

    let model = String::from_utf8(wfair(&["train", "german", "--baseline"], dir.path()).stdout).unwrap();
    let beliefs = String::from_utf8(wfair(&["postprocess", "german", "--model", model.trim()], dir.path()).stdout).unwrap();
    let params = fs::read_to_string(Path::new(beliefs.trim()).with_file_name(ops::PARAMS_FILE)).unwrap();
    assert!(params.starts_with("target=barycenter;bins=100;"), "{params}");
    wfair(&["evaluate", "german", "--beliefs", beliefs.trim()], dir.path());
    wfair(&["evaluate", "german", "--model", model.trim()], dir.path());
    let rows = Store::new(dir.path().join("results")).read().unwrap();
    assert_eq!(rows.iter().map(|r| r.method.as_str()).collect::<Vec<_>>(), ["postprocess-barycenter", "unconstrained"]);
}

#[test]
fn one_point_grid_matches_train_and_evaluate() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = short(30.0, 300);

    let env = env_at(a.path());
    let s = german(&env, 0);
    let model = ops::train(&env, &s, &cfg).unwrap();
    let single = ops::evaluate(&env, &s, &Source::Model(model.clone()), Split::Test, Tag::Single).unwrap();

    let env_b = env_at(b.path());
    let grid = Grid::parse("beta = 30\neta = 0.01\nsteps = 300\nlog_every = 100\n").unwrap();
    let out = sweep(&env_b, Benchmark::German, &grid, &Store::new(env_b.layout.results())).unwrap();
    let swept = out.grid.iter().find(|r| r.method == ops::METHOD_PENALTY).unwrap();
    assert_eq!(MetricsRow { tag: Tag::Single, ..swept.clone() }, single);
    let swept_model = b.path().join(model.strip_prefix(a.path()).unwrap());
    assert_eq!(fs::read(&model).unwrap(), fs::read(swept_model).unwrap());
    // unconstrained, two post-processing targets, one penalized run
    assert_eq!(out.grid.len(), 4);
    assert_eq!(out.selected.len(), 4);
    assert!(out.failures.is_empty());
}

#[test]
fn seeds_change_only_the_split() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let text = "beta = 10\neta = 0.01\nsteps = 200\nseed = 0, 1\n";
    let env = env_at(a.path());
    let both = sweep(&env, Benchmark::German, &Grid::parse(text).unwrap(), &Store::new(env.layout.results())).unwrap();
    let env_b = env_at(b.path());
    let one = Grid::parse(&text.replace("0, 1", "1")).unwrap();
    let only = sweep(&env_b, Benchmark::German, &one, &Store::new(env_b.layout.results())).unwrap();
    let seed1: Vec<_> = both.grid.iter().filter(|r| r.seed == 1).cloned().collect();
    assert_eq!(seed1, only.grid);
    let (r0, r1) = (&both.grid[0], &both.grid[4]);
    assert_eq!((r0.method.as_str(), r0.seed, r1.seed), (ops::METHOD_UNCONSTRAINED, 0, 1));
    assert_eq!((&r0.config, &r0.params), (&r1.config, &r1.params));
    assert_ne!(r0.metrics, r1.metrics);
}

#[test]
fn failed_runs_are_recorded_and_the_sweep_continues() {
    let dir = tempfile::tempdir().unwrap();
    let env = Env { layout: Layout::new(dir.path()), data_dir: dir.path().join("nowhere") };
    let grid = Grid::parse("beta = 1\nsteps = 10\n").unwrap();
    let store = Store::new(env.layout.results());
    let out = sweep(&env, Benchmark::German, &grid, &store).unwrap();
    assert_eq!(out.failures.len(), 1);
    let failures = fs::read_to_string(dir.path().join("results/failures.tsv")).unwrap();
    assert!(failures.lines().nth(1).unwrap().starts_with("german\t0\tprepare\t"));
}

#[test]
fn report_tables_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let env = env_at(dir.path());
    assert!(report(&env.layout).is_err());

    let s = synthetic(2.0);
    let cfg = RunConfig::parse("beta = 1\neta = 0.01\nsteps = 80000\nlog_every = 100\n").unwrap();
    let model = ops::train(&env, &s, &cfg).unwrap();
    let row = ops::evaluate(&env, &s, &Source::Model(model), Split::Test, Tag::Single).unwrap();
    Store::new(env.layout.results()).append(&[row.clone()]).unwrap();

    let files = report(&env.layout).unwrap();
    let tsv = fs::read_to_string(dir.path().join("reports/german.tsv")).unwrap();
    let lines: Vec<&str> = tsv.lines().collect();
    assert_eq!(lines.len(), 2);
    let header: Vec<&str> = lines[0].split('\t').collect();
    assert_eq!(&header[..8], ["method", "config", "seeds", "err_05", "err_05_sd", "err_exp", "err_exp_sd", "dd_05"]);
    assert_eq!(&header[8..13], ["dd_05_sd", "sdd", "sdd_sd", "spdd", "spdd_sd"]);
    assert!(lines[1].starts_with(&format!("penalty\t{}\t1\t{}\t0\t", row.config, row.metrics.err_05)));
    let txt = fs::read_to_string(dir.path().join("reports/german.txt")).unwrap();
    let head = txt.lines().nth(1).unwrap();
    let pos: Vec<usize> = ["Err-.5", "Err-Exp", "DD-.5", "SDD", "SPDD"].iter().map(|c| head.find(c).unwrap()).collect();
    assert!(pos.windows(2).all(|w| w[0] < w[1]), "{head}");
    assert_eq!(txt.lines().count(), 3);

    assert_eq!(files.curves.len(), 1);
    let curve = fs::read_to_string(&files.curves[0]).unwrap();
    assert_eq!(curve.lines().next().unwrap(), "step\terr_exp\tsdd\tspdd");
    assert_eq!(curve.lines().count(), 802);
    let points = parse_trajectory(&fs::read_to_string(dir.path().join(&row.trajectory)).unwrap()).unwrap();
    assert_eq!(points.len(), 801);
    assert_eq!((points[0].step, points[800].step), (0, 80000));

    let snapshot: Vec<Vec<u8>> = files.tables.iter().chain(&files.curves).map(|p| fs::read(p).unwrap()).collect();
    let again = report(&env.layout).unwrap();
    assert_eq!(again, files);
    let rerun: Vec<Vec<u8>> = again.tables.iter().chain(&again.curves).map(|p| fs::read(p).unwrap()).collect();
    assert_eq!(snapshot, rerun);
}
