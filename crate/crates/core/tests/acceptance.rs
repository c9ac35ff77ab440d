//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use challenge_judge::inference::{compare, pair_p_value, percentile_interval};
use challenge_judge::metrics::display4;
use challenge_judge::{
    make_plan, p_value, paired_difference, point_estimates, reconstruct, BootstrapSet, ComparisonReport, Label,
    LabeledDataset, MetricKind, ReconstructionSpec, TeamCounts,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const B: usize = 10_000;

// Published full-dataset precision, recall and F1.
const TABLE1: [(&str, f64, f64, f64); 10] = [
    ("NLPCIC", 0.7208, 0.7100, 0.7154),
    ("CIMATMTYGTO", 0.6533, 0.7600, 0.7026),
    ("DCCDINFOTEC", 0.6966, 0.6733, 0.6847),
    ("CIMATGTO", 0.6958, 0.6633, 0.6792),
    ("UMUTeam", 0.6763, 0.6650, 0.6706),
    ("Timen", 0.6081, 0.6000, 0.6040),
    ("CICIPN", 0.6874, 0.5350, 0.6017),
    ("xjywing", 0.3419, 0.8883, 0.4937),
    ("aomar", 0.3241, 0.8750, 0.4730),
    ("CENAmrita", 0.3145, 0.9183, 0.4685),
];

// Published 95% percentile intervals, in published order.
const TABLE2_PRECISION: [(&str, f64, f64); 10] = [
    ("NLPCIC", 0.6844, 0.7572),
    ("DCCDINFOTEC", 0.6585, 0.7345),
    ("CIMATGTO", 0.6578, 0.7338),
    ("CICIPN", 0.6458, 0.7290),
    ("UMUTeam", 0.6381, 0.7143),
    ("CIMATMTYGTO", 0.6175, 0.6888),
    ("Timen", 0.5691, 0.6474),
    ("xjywing", 0.3182, 0.3656),
    ("aomar", 0.3011, 0.3470),
    ("CENAmrita", 0.2926, 0.3364),
];
const TABLE2_RECALL: [(&str, f64, f64); 10] = [
    ("CENAmrita", 0.8962, 0.9402),
    ("xjywing", 0.8632, 0.9134),
    ("aomar", 0.8485, 0.9015),
    ("CIMATMTYGTO", 0.7260, 0.7935),
    ("NLPCIC", 0.6739, 0.7458),
    ("DCCDINFOTEC", 0.6351, 0.7112),
    ("UMUTeam", 0.6269, 0.7025),
    ("CIMATGTO", 0.6255, 0.7011),
    ("Timen", 0.5608, 0.6392),
    ("CICIPN", 0.4946, 0.5751),
];
const TABLE2_F1: [(&str, f64, f64); 10] = [
    ("NLPCIC", 0.6864, 0.7438),
    ("CIMATMTYGTO", 0.6739, 0.7306),
    ("DCCDINFOTEC", 0.6536, 0.7152),
    ("CIMATGTO", 0.6481, 0.7098),
    ("UMUTeam", 0.6393, 0.7011),
    ("Timen", 0.5713, 0.6365),
    ("CICIPN", 0.5665, 0.6363),
    ("xjywing", 0.4676, 0.5196),
    ("aomar", 0.4470, 0.4987),
    ("CENAmrita", 0.4433, 0.4935),
];

fn table1_spec() -> ReconstructionSpec {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/offendmex_table1.json");
    ReconstructionSpec::read(&path).expect("bundled spec")
}

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    check(elapsed < limit, || format!("{what} took {elapsed:?}, limit {limit:?}"))
}

/// 1. Point estimates reproduce all 30 published values exactly at 4 decimals.
fn table1_reproduction() -> Outcome {
    let start = Instant::now();
    let ds = reconstruct(&table1_spec(), 7).map_err(|e| e.to_string())?;
    let pe = point_estimates(&ds);
    let elapsed = start.elapsed();
    let mut checked = 0;
    for (team, p, r, f) in TABLE1 {
        let scores = pe.get(team).ok_or_else(|| format!("missing team {team}"))?;
        for (m, want) in [(MetricKind::Precision, p), (MetricKind::Recall, r), (MetricKind::F1, f)] {
            let got = display4(scores[&m].value).parse::<f64>().unwrap();
            check((got - want).abs() <= 0.0001 + 1e-12, || {
                format!("{team} {m}: got {got}, published {want}")
            })?;
            checked += 1;
        }
    }
    within(elapsed, Duration::from_secs(1), "reconstruction + point estimates")?;
    Ok(format!("{checked}/30 values match; {elapsed:.2?}"))
}

/// 2. Percentile intervals at b=10000 within ±0.010 of the published intervals.
fn table2_reproduction() -> Outcome {
    let ds = reconstruct(&table1_spec(), 7).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let set = BootstrapSet::compute(&ds, &make_plan(ds.len(), B, 42), &MetricKind::ALL).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (m, table) in [
        (MetricKind::Precision, &TABLE2_PRECISION),
        (MetricKind::Recall, &TABLE2_RECALL),
        (MetricKind::F1, &TABLE2_F1),
    ] {
        let ordered = challenge_judge::ordered_intervals(&set, m, 0.95).map_err(|e| e.to_string())?;
        for (team, lo, hi) in table {
            let (_, ci) = ordered
                .iter()
                .find(|(t, _)| t == team)
                .ok_or_else(|| format!("missing {team}"))?;
            for (got, want) in [(ci.lower, *lo), (ci.upper, *hi)] {
                worst = worst.max((got - want).abs());
                check((got - want).abs() <= 0.010, || {
                    format!("{team} {m}: ({:.4},{:.4}) vs ({lo},{hi})", ci.lower, ci.upper)
                })?;
            }
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10), "bootstrap of 10 teams x 3 metrics")?;
    Ok(format!("60 endpoints, max deviation {worst:.4}; {elapsed:.2?}"))
}

fn f1_by_hand(tp: u32, fp: u32, fn_: u32) -> f64 {
    if tp == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    }
}

fn toy_dataset(gold: &[&str], a: &[&str], b: &[&str]) -> LabeledDataset {
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    LabeledDataset::new(
        (1..=gold.len()).map(|i| i.to_string()).collect(),
        s(gold),
        vec![("A".into(), s(a)), ("B".into(), s(b))],
        Label::new("+").unwrap(),
    )
    .unwrap()
}

/// 3. Paired quantities: clone identity, exhaustive 3^3 oracle, CI/p duality.
fn paired_properties() -> Outcome {
    // (a) A team against its own clone.
    let spec = table1_spec();
    let base = reconstruct(&spec, 7).map_err(|e| e.to_string())?;
    let mut teams: Vec<(String, Vec<String>)> = vec![("NLPCIC".into(), base.predictions("NLPCIC").unwrap().to_vec())];
    teams.push(("NLPCIC_clone".into(), teams[0].1.clone()));
    let ds = LabeledDataset::new(
        base.ids().to_vec(),
        base.gold().to_vec(),
        teams,
        base.positive().clone(),
    )
    .map_err(|e| e.to_string())?;
    let set = BootstrapSet::compute(&ds, &make_plan(ds.len(), 2000, 1), &MetricKind::ALL).map_err(|e| e.to_string())?;
    for m in MetricKind::ALL {
        let a = set.get("NLPCIC", m).unwrap();
        let b = set.get("NLPCIC_clone", m).unwrap();
        let d = compare(a, b, 0.95).map_err(|e| e.to_string())?;
        let (_, p) = pair_p_value(a, b).map_err(|e| e.to_string())?;
        check(d.ci.lower == 0.0 && d.ci.upper == 0.0 && p.p == 1.0, || {
            format!("clone {m}: {d:?} p={}", p.p)
        })?;
    }

    // (b) n=3 toy against exhaustive enumeration of all 27 resamples.
    let gold = ["+", "+", "-"];
    let pa = ["+", "+", "+"];
    let pb = ["+", "-", "-"];
    let ds = toy_dataset(&gold, &pa, &pb);
    let counts = |pred: &[&str], idx: &[usize]| {
        let (mut tp, mut fp, mut fn_) = (0, 0, 0);
        for &i in idx {
            match (gold[i] == "+", pred[i] == "+") {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                _ => {}
            }
        }
        f1_by_hand(tp, fp, fn_)
    };
    let full = [0, 1, 2];
    let delta = counts(&pa, &full) - counts(&pb, &full);
    let mut exact_diffs = Vec::with_capacity(27);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let idx = [i, j, k];
                exact_diffs.push(counts(&pa, &idx) - counts(&pb, &idx));
            }
        }
    }
    let exact_mean = exact_diffs.iter().sum::<f64>() / 27.0;
    let exact_var = exact_diffs.iter().map(|d| (d - exact_mean).powi(2)).sum::<f64>() / 27.0;
    let exact_exceed = exact_diffs.iter().filter(|&&d| d > 2.0 * delta).count() as f64 / 27.0;

    let b = 200_000;
    let set = BootstrapSet::compute(&ds, &make_plan(3, b, 2024), &[MetricKind::F1]).map_err(|e| e.to_string())?;
    let diffs = paired_difference(
        set.get("A", MetricKind::F1).unwrap(),
        set.get("B", MetricKind::F1).unwrap(),
    )
    .map_err(|e| e.to_string())?;
    let mc_mean = diffs.iter().sum::<f64>() / b as f64;
    let se_mean = (exact_var / b as f64).sqrt();
    check((mc_mean - exact_mean).abs() < 3.0 * se_mean, || {
        format!("diff mean {mc_mean} vs exact {exact_mean} (se {se_mean})")
    })?;
    let pv = p_value(&diffs, delta).map_err(|e| e.to_string())?;
    let mc_exceed = pv.b_exceed as f64 / b as f64;
    let se_exceed = (exact_exceed * (1.0 - exact_exceed) / b as f64).sqrt();
    check((mc_exceed - exact_exceed).abs() < 3.0 * se_exceed, || {
        format!("exceedance {mc_exceed} vs exact {exact_exceed} (se {se_exceed})")
    })?;

    // (c) Duality: an interval strictly above zero implies a small p-value.
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    let (level, b) = (0.95, 2000);
    let bound = (1.0 - level) / 2.0 + 1.0 / (b as f64 + 1.0);
    let mut excluded = 0;
    for trial in 0..100u64 {
        let n_pos = rng.random_range(50..400u64);
        let n_neg = rng.random_range(50..800u64);
        let mut team = |name: &str| {
            (
                name.to_string(),
                TeamCounts {
                    tp: rng.random_range(1..=n_pos),
                    fp: rng.random_range(0..=n_neg),
                },
            )
        };
        let spec = ReconstructionSpec::new(n_pos, n_neg, [team("x"), team("y")]);
        let ds = reconstruct(&spec, trial).map_err(|e| e.to_string())?;
        let set =
            BootstrapSet::compute(&ds, &make_plan(ds.len(), b, trial), &[MetricKind::F1]).map_err(|e| e.to_string())?;
        let (x, y) = (
            set.get("x", MetricKind::F1).unwrap(),
            set.get("y", MetricKind::F1).unwrap(),
        );
        let (hi, lo) = if x.point.value >= y.point.value { (x, y) } else { (y, x) };
        let diffs = paired_difference(hi, lo).map_err(|e| e.to_string())?;
        let ci = percentile_interval(&diffs, level, hi.point.value - lo.point.value).map_err(|e| e.to_string())?;
        let (_, p) = pair_p_value(hi, lo).map_err(|e| e.to_string())?;
        if ci.lower > 0.0 {
            excluded += 1;
            check(p.p < bound, || {
                format!(
                    "trial {trial}: CI ({:.4},{:.4}) excludes 0 but p={}",
                    ci.lower, ci.upper, p.p
                )
            })?;
        }
    }
    Ok(format!(
        "clone CI (0,0) p=1; toy mean {mc_mean:.4}~{exact_mean:.4}, exceed {mc_exceed:.4}~{exact_exceed:.4}; duality held on 100 pairs ({excluded} with CI > 0)"
    ))
}

/// 4. Direction of the published conclusions across reconstruction seeds.
fn directional_p_values() -> Outcome {
    let full = table1_spec();
    let keep = ["NLPCIC", "CIMATMTYGTO", "DCCDINFOTEC"];
    let spec = ReconstructionSpec {
        teams: full
            .teams
            .iter()
            .filter(|(k, _)| keep.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), *v))
            .collect(),
        ..full
    };
    let mut ps: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for seed in 0..10 {
        let ds = reconstruct(&spec, seed).map_err(|e| e.to_string())?;
        let set =
            BootstrapSet::compute(&ds, &make_plan(ds.len(), B, 42), &[MetricKind::F1]).map_err(|e| e.to_string())?;
        let best = set.get("NLPCIC", MetricKind::F1).unwrap();
        for (other, lo, hi) in [("CIMATMTYGTO", 0.05, 0.5), ("DCCDINFOTEC", 0.001, 0.1)] {
            let (_, p) = pair_p_value(best, set.get(other, MetricKind::F1).unwrap()).map_err(|e| e.to_string())?;
            check(p.p > lo && p.p < hi, || {
                format!("seed {seed}: NLPCIC vs {other} p={:.4} outside ({lo}, {hi})", p.p)
            })?;
            ps.entry(other).or_default().push(p.p);
        }
    }
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        format!("[{lo:.4}, {hi:.4}]")
    };
    Ok(format!(
        "10 seeds: vs CIMATMTYGTO p in {}, vs DCCDINFOTEC p in {}",
        range(&ps["CIMATMTYGTO"]),
        range(&ps["DCCDINFOTEC"])
    ))
}

/// 5. Coverage of the 95% percentile interval on a world with known P and R.
fn coverage_simulation() -> Outcome {
    const N: usize = 500;
    const DATASETS: u64 = 1000;
    const REPS: usize = 2000;
    let (prevalence, true_recall, false_positive_rate) = (0.3, 0.7, 0.1);
    let true_precision =
        prevalence * true_recall / (prevalence * true_recall + (1.0 - prevalence) * false_positive_rate);
    let start = Instant::now();
    let (mut cover_p, mut cover_r) = (0u32, 0u32);
    for k in 0..DATASETS {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE ^ k);
        let mut gold = Vec::with_capacity(N);
        let mut pred = Vec::with_capacity(N);
        for _ in 0..N {
            let g = rng.random_bool(prevalence);
            let p = rng.random_bool(if g { true_recall } else { false_positive_rate });
            gold.push(if g { "+" } else { "-" }.to_string());
            pred.push(if p { "+" } else { "-" }.to_string());
        }
        if !gold.iter().any(|g| g == "+") {
            continue;
        }
        let ds = LabeledDataset::new(
            (0..N).map(|i| i.to_string()).collect(),
            gold,
            vec![("sim".into(), pred)],
            Label::new("+").unwrap(),
        )
        .map_err(|e| e.to_string())?;
        let set = BootstrapSet::compute(
            &ds,
            &make_plan(N, REPS, k),
            &[MetricKind::Precision, MetricKind::Recall],
        )
        .map_err(|e| e.to_string())?;
        let ci = |m| challenge_judge::percentile_ci(set.get("sim", m).unwrap(), 0.95).unwrap();
        cover_p += ci(MetricKind::Precision).contains(true_precision) as u32;
        cover_r += ci(MetricKind::Recall).contains(true_recall) as u32;
    }
    let elapsed = start.elapsed();
    let (fp, fr) = (cover_p as f64 / DATASETS as f64, cover_r as f64 / DATASETS as f64);
    for (name, f) in [("precision", fp), ("recall", fr)] {
        check((f - 0.95).abs() <= 0.02, || {
            format!("{name} coverage {f:.3} outside 0.95 ± 0.02")
        })?;
    }
    within(elapsed, Duration::from_secs(120), "coverage simulation")?;
    Ok(format!("coverage precision {fp:.3}, recall {fr:.3}; {elapsed:.2?}"))
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_challenge-judge")
}

fn run_cli(args: &[&str]) -> Result<(), String> {
    let out = Command::new(bin()).args(args).output().map_err(|e| e.to_string())?;
    check(out.status.success(), || {
        format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr))
    })
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn reconstructed_csv(tmp: &Path) -> Result<PathBuf, String> {
    let csv = tmp.join("offendmex.csv");
    let spec = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/offendmex_table1.json");
    run_cli(&[
        "reconstruct",
        "--spec",
        spec.to_str().unwrap(),
        "--seed",
        "7",
        "--out",
        csv.to_str().unwrap(),
    ])?;
    Ok(csv)
}

/// 6. Identical output directories across repeated runs and thread counts.
fn determinism(tmp: &Path) -> Outcome {
    let csv = reconstructed_csv(tmp)?;
    let mut dirs = Vec::new();
    for (name, threads) in [("run_a", "1"), ("run_b", "1"), ("run_c", "8")] {
        let out = tmp.join(name);
        run_cli(&[
            "analyze",
            "--input",
            csv.to_str().unwrap(),
            "--positive",
            "offensive",
            "--seed",
            "42",
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ])?;
        dirs.push(dir_contents(&out));
    }
    check(dirs[0] == dirs[1], || "two runs with --threads 1 differ".into())?;
    check(dirs[0] == dirs[2], || {
        let diff: Vec<_> = dirs[0]
            .iter()
            .filter(|(k, v)| dirs[2].get(*k) != Some(v))
            .map(|(k, _)| k.clone())
            .collect();
        format!("--threads 1 vs 8 differ in {diff:?}")
    })?;
    Ok(format!(
        "{} files byte-identical across 3 runs (threads 1, 1, 8)",
        dirs[0].len()
    ))
}

/// 7. Red bars in fig2 are exactly the intervals containing zero.
fn plot_contract(tmp: &Path) -> Outcome {
    let out = tmp.join("run_a");
    let report = ComparisonReport::from_json(&std::fs::read_to_string(out.join("report.json")).unwrap())
        .map_err(|e| e.to_string())?;
    let svg = std::fs::read_to_string(out.join("fig2_differences.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).map_err(|e| e.to_string())?;
    let mut checked = 0;
    for panel in doc.descendants().filter(|n| n.attribute("class") == Some("panel")) {
        let metric: MetricKind = panel.attribute("data-metric").unwrap().parse().unwrap();
        let section = report.metric(metric).ok_or("metric missing from report")?;
        let bars: Vec<_> = panel
            .descendants()
            .filter(|n| n.attribute("class") == Some("diff"))
            .collect();
        check(bars.len() == section.differences.len(), || {
            format!("{metric}: {} bars", bars.len())
        })?;
        for bar in bars {
            let team = bar.attribute("data-team").unwrap();
            let row = section
                .differences
                .iter()
                .find(|d| d.team == team)
                .ok_or("bar without report row")?;
            let want = if row.contains_zero { "red" } else { "green" };
            check(bar.attribute("stroke") == Some(want), || {
                format!(
                    "{metric} {team}: stroke {:?}, contains_zero={}",
                    bar.attribute("stroke"),
                    row.contains_zero
                )
            })?;
            checked += 1;
        }
    }
    check(checked == 27, || format!("expected 27 bars, saw {checked}"))?;
    Ok(format!("{checked} bars colored by contains_zero"))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 table 1 point estimates", Box::new(table1_reproduction)),
        ("2 table 2 percentile intervals", Box::new(table2_reproduction)),
        ("3 paired-difference properties", Box::new(paired_properties)),
        ("4 directional p-values", Box::new(directional_p_values)),
        ("5 percentile CI coverage", Box::new(coverage_simulation)),
        (
            "6 determinism across runs and threads",
            Box::new(|| determinism(tmp.path())),
        ),
        ("7 fig2 color contract", Box::new(|| plot_contract(tmp.path()))),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
