//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs without the libtest harness so the lines are always
//! printed.

use std::collections::{BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use strokeminer::classify::{
    deserialize_model, serialize_model, train_c45, C45Params, DecisionTree, LearnerConfig, TreeNode,
};
use strokeminer::eval::{accuracy_from_confusion, kfold_cross_validate, ConfusionMatrix};
use strokeminer::kinematics::{detect_impact, trajectory_correlation};
use strokeminer::rng::{mix_seed, stream, uniform};
use strokeminer::stroke::{
    normalize_origin, parse_recording, read_metadata, serialize_recording, MarkerId, Point, RecordingMetadata,
    SkillClass, StrokeRecording, MARKER_COUNT,
};
use strokeminer::synth::{generate_cohort, CohortSpec};
use strokeminer::windowing::{
    build_dataset, export_dataset, import_dataset, make_windows, Dataset, FeatureWindow, WindowSource, WindowSpec,
};

const E: SkillClass = SkillClass::Expert;
const N: SkillClass = SkillClass::Novice;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn dataset(rows: &[(Vec<f64>, SkillClass)], classes: &[SkillClass]) -> Dataset {
    let n_attr = rows[0].0.len();
    let schema = (0..n_attr).map(|i| format!("a{i}")).collect();
    let instances = rows
        .iter()
        .enumerate()
        .map(|(i, (f, c))| FeatureWindow {
            features: f.clone(),
            label: *c,
            source: WindowSource { subject_id: format!("r{i}"), start_frame: 0 },
        })
        .collect();
    Dataset::new(schema, classes, instances).unwrap()
}

fn below(rng: &mut impl rand::RngCore, n: usize) -> usize {
    ((uniform(rng) * n as f64) as usize).min(n - 1)
}

// ---------------------------------------------------------------- criterion 1

fn table_consistency() -> Outcome {
    let cm = ConfusionMatrix::from_counts(&[E, N], vec![vec![40, 0], vec![26, 72]]);
    let acc = accuracy_from_confusion(&cm).map_err(|e| e.to_string())?;
    check((acc - 81.2).abs() <= 0.05, || format!("accuracy {acc}"))?;
    Ok(format!("accuracy {acc:.4}% ({}/{})", cm.correct(), cm.total()))
}

// ---------------------------------------------------------------- criterion 2

/// Every coordinate encodes its frame, marker and axis, so equal feature
/// slices imply equal frames.
fn coded_recording(frames: usize) -> StrokeRecording {
    let positions = (0..frames)
        .map(|t| {
            std::array::from_fn::<Point, MARKER_COUNT, _>(|m| {
                if m == 0 {
                    Point::new(0.0, 0.0)
                } else {
                    Point::new((t * 100 + m) as f64, -((t * 100 + m) as f64) - 0.5)
                }
            })
        })
        .collect();
    let rec = StrokeRecording::from_positions(&RecordingMetadata::new("coded", E), positions).unwrap();
    normalize_origin(&rec)
}

fn windowing_oracle() -> Outcome {
    let spec = WindowSpec::new(5, 3).unwrap();
    let frame_width = spec.feature_count() / spec.window_len;
    for t in 40..=120usize {
        let windows = make_windows(&coded_recording(t), &spec).map_err(|e| e.to_string())?;
        let closed_form = (t - 5) / 2 + 1;
        let enumerated: Vec<u64> = (0..t).filter(|s| s % 2 == 0 && s + 5 <= t).map(|s| s as u64).collect();
        check(windows.len() == closed_form && windows.len() == enumerated.len(), || {
            format!("T={t}: {} windows, closed form {closed_form}, enumeration {}", windows.len(), enumerated.len())
        })?;
        let starts: Vec<u64> = windows.iter().map(|w| w.source.start_frame).collect();
        check(starts == enumerated, || format!("T={t}: start frames {starts:?}"))?;
        for pair in windows.windows(2) {
            let (a, b) = (&pair[0], &pair[1]);
            let frames_a: BTreeSet<u64> = (a.source.start_frame..a.source.start_frame + 5).collect();
            let frames_b: BTreeSet<u64> = (b.source.start_frame..b.source.start_frame + 5).collect();
            check(frames_a.intersection(&frames_b).count() == 3, || format!("T={t}: overlap is not 3 frames"))?;
            check(a.features[2 * frame_width..] == b.features[..3 * frame_width], || {
                format!("T={t}: shared frames carry different values")
            })?;
            check(a.features[..frame_width] != b.features[3 * frame_width..4 * frame_width], || {
                format!("T={t}: more than 3 frames shared")
            })?;
        }
    }
    Ok("T = 40..120: counts, start indices and 3-frame overlaps agree".into())
}

// ---------------------------------------------------------------- criterion 3

fn entropy_ln(counts: &[usize]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.ln()
        })
        .sum()
}

struct Brute {
    attribute: usize,
    threshold: f64,
    gain: f64,
    ratio: f64,
}

/// Exhaustive root choice: every midpoint between adjacent distinct values
/// leaving `min_leaf` instances per side; candidates whose gain falls below
/// the mean gain are inadmissible; maximal gain ratio wins and ties go to the
/// lowest (attribute, threshold). `None` means the root stays a leaf.
fn brute_force_root(rows: &[(Vec<f64>, usize)], n_attr: usize, min_leaf: usize) -> Option<(usize, f64)> {
    const EPS: f64 = 1e-12;
    let n = rows.len();
    let mut parent = [0usize; 2];
    for (_, c) in rows {
        parent[*c] += 1;
    }
    if parent.iter().filter(|&&c| c > 0).count() <= 1 || n < 2 * min_leaf {
        return None;
    }
    let mut cands = Vec::new();
    for a in 0..n_attr {
        let values: BTreeSet<i64> = rows.iter().map(|(f, _)| f[a] as i64).collect();
        let values: Vec<i64> = values.into_iter().collect();
        for w in values.windows(2) {
            let threshold = (w[0] + w[1]) as f64 / 2.0;
            let mut left = [0usize; 2];
            let mut right = [0usize; 2];
            for (f, c) in rows {
                if f[a] <= threshold {
                    left[*c] += 1;
                } else {
                    right[*c] += 1;
                }
            }
            let (nl, nr) = (left[0] + left[1], right[0] + right[1]);
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let gain = entropy_ln(&parent)
                - (nl as f64 / n as f64) * entropy_ln(&left)
                - (nr as f64 / n as f64) * entropy_ln(&right);
            let split_info = entropy_ln(&[nl, nr]);
            cands.push(Brute { attribute: a, threshold, gain, ratio: gain / split_info });
        }
    }
    if cands.is_empty() {
        return None;
    }
    let mean = cands.iter().map(|c| c.gain).sum::<f64>() / cands.len() as f64;
    let admissible: Vec<&Brute> = cands.iter().filter(|c| c.gain + EPS >= mean).collect();
    let top = admissible.iter().map(|c| c.ratio).fold(f64::NEG_INFINITY, f64::max);
    admissible.into_iter().find(|c| c.ratio + EPS >= top).map(|c| (c.attribute, c.threshold))
}

fn root_of(tree: &DecisionTree) -> Option<(usize, f64)> {
    match &tree.root {
        TreeNode::Internal { attribute, threshold, .. } => Some((*attribute, *threshold)),
        TreeNode::Leaf { .. } => None,
    }
}

fn root_split_oracle() -> Outcome {
    let params = C45Params { prune: false, ..C45Params::default() };
    let mut splits = 0;
    for trial in 0..1000u64 {
        let mut rng = stream(mix_seed(3, trial));
        let n_attr = 1 + below(&mut rng, 3);
        let n = 1 + below(&mut rng, 12);
        let rows: Vec<(Vec<f64>, usize)> = (0..n)
            .map(|_| {
                let f = (0..n_attr).map(|_| below(&mut rng, 3) as f64).collect();
                (f, below(&mut rng, 2))
            })
            .collect();
        let labelled: Vec<(Vec<f64>, SkillClass)> =
            rows.iter().map(|(f, c)| (f.clone(), if *c == 0 { E } else { N })).collect();
        let tree = train_c45(&dataset(&labelled, &[E, N]), &params).map_err(|e| e.to_string())?;
        let expected = brute_force_root(&rows, n_attr, params.min_leaf);
        check(root_of(&tree) == expected, || {
            format!("trial {trial}: learner {:?}, brute force {expected:?}, rows {rows:?}", root_of(&tree))
        })?;
        splits += expected.is_some() as usize;
    }
    Ok(format!("1000 datasets, {splits} with a root split, all identical"))
}

// ---------------------------------------------------------------- criterion 4

fn consistency() -> Outcome {
    let params = C45Params { min_leaf: 1, prune: false, ..C45Params::default() };
    for trial in 0..100u64 {
        let mut rng = stream(mix_seed(4, trial));
        let n_attr = 1 + below(&mut rng, 6);
        let n = 5 + below(&mut rng, 200);
        let levels = 2 + below(&mut rng, 6);
        let classes: &[SkillClass] = if trial % 3 == 0 { &SkillClass::ALL } else { &[E, N] };
        let mut seen: HashMap<Vec<u64>, SkillClass> = HashMap::new();
        let mut rows = Vec::new();
        for _ in 0..n {
            let f: Vec<f64> = (0..n_attr)
                .map(|_| if trial % 2 == 0 { below(&mut rng, levels) as f64 } else { uniform(&mut rng) * 100.0 - 50.0 })
                .collect();
            let c = classes[below(&mut rng, classes.len())];
            let key: Vec<u64> = f.iter().map(|v| v.to_bits()).collect();
            // drop contradictory duplicates, keep consistent ones
            if *seen.entry(key).or_insert(c) == c {
                rows.push((f, c));
            }
        }
        let ds = dataset(&rows, classes);
        let tree = train_c45(&ds, &params).map_err(|e| e.to_string())?;
        for (f, c) in &rows {
            let p = tree.predict(f).map_err(|e| e.to_string())?;
            check(p.class == *c, || format!("trial {trial}: misclassified training row {f:?}"))?;
        }
    }
    Ok("100 datasets, 100% training accuracy".into())
}

// ---------------------------------------------------------------- criterion 5

fn rank_order_invariance() -> Outcome {
    let mut compared = 0;
    for trial in 0..50u64 {
        let mut rng = stream(mix_seed(5, trial));
        let n_attr = 1 + below(&mut rng, 4);
        let n = 10 + below(&mut rng, 80);
        let target = below(&mut rng, n_attr);
        let rows: Vec<(Vec<f64>, SkillClass)> = (0..n)
            .map(|_| {
                // shifted positive so the cube preserves order
                let f: Vec<f64> = (0..n_attr).map(|_| 0.5 + (uniform(&mut rng) * 20.0).round() / 4.0).collect();
                let c = if f[0] + 0.5 * uniform(&mut rng) > 3.0 { E } else { N };
                (f, c)
            })
            .collect();
        let cube = |f: &[f64]| -> Vec<f64> {
            f.iter().enumerate().map(|(i, &v)| if i == target { v * v * v } else { v }).collect()
        };
        let cubed: Vec<(Vec<f64>, SkillClass)> = rows.iter().map(|(f, c)| (cube(f), *c)).collect();
        // test points reuse training values per attribute, in new combinations
        let mut tests: Vec<Vec<f64>> = rows.iter().map(|(f, _)| f.clone()).collect();
        for _ in 0..50 {
            tests.push((0..n_attr).map(|a| rows[below(&mut rng, n)].0[a]).collect());
        }
        for params in [C45Params::default(), C45Params { prune: false, ..C45Params::default() }] {
            let plain = train_c45(&dataset(&rows, &[E, N]), &params).map_err(|e| e.to_string())?;
            let transformed = train_c45(&dataset(&cubed, &[E, N]), &params).map_err(|e| e.to_string())?;
            for t in &tests {
                let a = plain.predict(t).map_err(|e| e.to_string())?;
                let b = transformed.predict(&cube(t)).map_err(|e| e.to_string())?;
                check(a == b, || format!("trial {trial}: {a:?} vs {b:?} at {t:?}"))?;
                compared += 1;
            }
        }
    }
    Ok(format!("50 trials, {compared} predictions identical (pruned and unpruned)"))
}

// ---------------------------------------------------------------- criterion 6

fn random_recording(rng: &mut impl rand::RngCore, frames: usize) -> StrokeRecording {
    let mut walk = [(0.0f64, 0.0f64); MARKER_COUNT];
    let positions = (0..frames)
        .map(|_| {
            std::array::from_fn::<Point, MARKER_COUNT, _>(|m| {
                walk[m].0 += uniform(rng) * 20.0 - 10.0;
                walk[m].1 += uniform(rng) * 20.0 - 10.0;
                Point::new(walk[m].0, walk[m].1)
            })
        })
        .collect();
    StrokeRecording::from_positions(&RecordingMetadata::new("r", E), positions).unwrap()
}

/// Linear interpolation at `n` evenly spaced points of normalized time.
fn resample(series: &[f64], n: usize) -> Vec<f64> {
    let last = (series.len() - 1) as f64;
    (0..n)
        .map(|i| {
            let pos = last * i as f64 / (n - 1) as f64;
            let lo = pos.floor() as usize;
            if lo + 1 >= series.len() {
                return series[series.len() - 1];
            }
            let w = pos - lo as f64;
            series[lo] * (1.0 - w) + series[lo + 1] * w
        })
        .collect()
}

fn two_pass_pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn correlation_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for trial in 0..100u64 {
        let mut rng = stream(mix_seed(6, trial));
        let (len_a, len_b) = (10 + below(&mut rng, 111), 10 + below(&mut rng, 111));
        let a = random_recording(&mut rng, len_a);
        let b = random_recording(&mut rng, len_b);
        let marker = MarkerId::new(1 + below(&mut rng, 9) as u8).unwrap();
        let got = trajectory_correlation(&a, &b, marker, 100).map_err(|e| e.to_string())?;
        for (r, axis) in [(got.r_x, strokeminer::stroke::Axis::X), (got.r_y, strokeminer::stroke::Axis::Y)] {
            let expected =
                two_pass_pearson(&resample(&a.series(marker, axis), 100), &resample(&b.series(marker, axis), 100));
            worst = worst.max((r - expected).abs());
            check((r - expected).abs() < 1e-12, || format!("trial {trial}: {r} vs {expected}"))?;
        }
        let own = trajectory_correlation(&a, &a, marker, 100).map_err(|e| e.to_string())?;
        check((own.r_x - 1.0).abs() <= 1e-12 && (own.r_y - 1.0).abs() <= 1e-12, || {
            format!("trial {trial}: self {own:?}")
        })?;
        let flipped = a.map_coordinates(|_, v| -v);
        let neg = trajectory_correlation(&a, &flipped, marker, 100).map_err(|e| e.to_string())?;
        check((neg.r_x + 1.0).abs() <= 1e-12 && (neg.r_y + 1.0).abs() <= 1e-12, || {
            format!("trial {trial}: flip {neg:?}")
        })?;
    }
    Ok(format!("100 pairs, max |delta| {worst:.2e}; self = 1, sign flip = -1"))
}

// ---------------------------------------------------------------- criteria 7, 8

fn run_cli(args: &[&str]) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_strokeminer")).args(args).status().map_err(|e| e.to_string())?;
    check(status.code() == Some(0), || format!("strokeminer {args:?} exited with {status}"))
}

fn mean_pairwise_m9(recs: &[&StrokeRecording]) -> f64 {
    let m9 = MarkerId::new(9).unwrap();
    let mut sum = 0.0;
    let mut pairs = 0;
    for i in 0..recs.len() {
        for j in i + 1..recs.len() {
            sum += trajectory_correlation(recs[i], recs[j], m9, 100).unwrap().mean();
            pairs += 1;
        }
    }
    sum / pairs as f64
}

fn cohort_separability() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().to_str().unwrap();
    run_cli(&["pipeline", "--synth", "reference-cohort", "--seed", "42", "--learner", "c45", "--quiet", "--out", out])?;
    let bundle: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("evaluation.json")).unwrap()).unwrap();
    let cv = bundle["reports"][0]["recognition_rate_cv"].as_f64().ok_or("no cross-validation rate")?;
    let run = &bundle["run"];
    check(run["folds"] == 10 && run["classes"] == serde_json::json!(["expert", "novice"]), || format!("run {run}"))?;
    check(cv >= 90.0, || format!("C4.5 10-fold accuracy {cv}"))?;

    // the library path gives the same number
    let recs: Vec<StrokeRecording> =
        generate_cohort(&CohortSpec::reference_cohort(), 42).iter().map(normalize_origin).collect();
    let ds = build_dataset(&recs, &WindowSpec::new(5, 3).unwrap(), &[E, N]).map_err(|e| e.to_string())?;
    let direct = kfold_cross_validate(&ds, 10, &LearnerConfig::C45(C45Params::default()), 42, false)
        .map_err(|e| e.to_string())?;
    check(direct.recognition_rate_cv == Some(cv), || {
        format!("library rate {:?} vs CLI {cv}", direct.recognition_rate_cv)
    })?;

    let experts: Vec<&StrokeRecording> = recs.iter().filter(|r| r.skill == E).collect();
    let novices: Vec<&StrokeRecording> = recs.iter().filter(|r| r.skill == N).collect();
    check(experts.len() == 7 && novices.len() == 5, || "cohort shape".into())?;
    let (re, rn) = (mean_pairwise_m9(&experts), mean_pairwise_m9(&novices));
    check(re > rn, || format!("expert {re} <= novice {rn}"))?;
    Ok(format!("C4.5 CV {cv:.2}% on {} windows; M9 mean r expert {re:.3} > novice {rn:.3}", ds.len()))
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
    let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect_files(root, &p, out);
        } else {
            out.push((p.strip_prefix(root).unwrap().display().to_string(), std::fs::read(&p).unwrap()));
        }
    }
}

fn determinism() -> Outcome {
    let mut runs = Vec::new();
    for _ in 0..2 {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        run_cli(&[
            "pipeline",
            "--synth",
            "reference-cohort",
            "--seed",
            "42",
            "--quiet",
            "--out",
            dir.path().to_str().unwrap(),
        ])?;
        let mut files = Vec::new();
        collect_files(dir.path(), dir.path(), &mut files);
        runs.push(files);
    }
    let names: Vec<&str> = runs[0].iter().map(|(n, _)| n.as_str()).collect();
    for required in ["models/c45.model", "models/nbtree.model", "evaluation.json", "evaluation.txt", "dataset.csv"] {
        check(names.contains(&required), || format!("missing {required}"))?;
    }
    check(runs[0].len() == runs[1].len(), || "different file sets".into())?;
    for ((na, a), (nb, b)) in runs[0].iter().zip(&runs[1]) {
        check(na == nb && a == b, || format!("{na} differs between runs"))?;
    }
    Ok(format!("{} output files byte-identical across two runs", runs[0].len()))
}

// ---------------------------------------------------------------- criterion 9

fn impact_peak() -> Outcome {
    let mut recs = generate_cohort(&CohortSpec::single(E, 200), 9);
    recs.extend(generate_cohort(&CohortSpec::reference_cohort(), 42).into_iter().filter(|r| r.skill == E));
    for rec in &recs {
        let t = detect_impact(rec).map_err(|e| e.to_string())? as usize;
        // speed index t spans frames t -> t + 1; valid indices are 0..=T-2
        let last = rec.frame_count() - 2;
        check(t > 0 && t < last, || format!("{}: impact at {t} of 0..={last}", rec.subject_id))?;
    }
    Ok(format!("{} expert recordings, all interior", recs.len()))
}

// ---------------------------------------------------------------- criterion 10

fn fixture(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)).unwrap()
}

fn round_trips() -> Outcome {
    for stem in ["expert_a", "novice_a"] {
        let text = fixture(&format!("{stem}.csv"));
        let meta = read_metadata(&fixture(&format!("{stem}.json"))).map_err(|e| e.to_string())?;
        let once = serialize_recording(&parse_recording(&text, &meta).map_err(|e| e.to_string())?);
        let twice = serialize_recording(&parse_recording(&once, &meta).map_err(|e| e.to_string())?);
        check(once == text && twice == once, || format!("{stem}.csv changed on round trip"))?;
    }
    let text = fixture("dataset.csv");
    let once = export_dataset(&import_dataset(&text).map_err(|e| e.to_string())?);
    let twice = export_dataset(&import_dataset(&once).map_err(|e| e.to_string())?);
    check(once == text && twice == once, || "dataset.csv changed on round trip".into())?;
    for name in ["c45.model", "c45_cohort.model", "nbtree.model"] {
        let text = fixture(name);
        let once = serialize_model(&deserialize_model(&text).map_err(|e| e.to_string())?);
        let twice = serialize_model(&deserialize_model(&once).map_err(|e| e.to_string())?);
        check(once == text && twice == once, || format!("{name} changed on round trip"))?;
    }
    Ok("2 recordings, 1 dataset, 3 models byte-identical".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 confusion-table accuracy", table_consistency, Duration::from_millis(100)),
        ("2 windowing oracle", windowing_oracle, Duration::from_secs(1)),
        ("3 C4.5 root-split oracle", root_split_oracle, Duration::from_secs(30)),
        ("4 consistency property", consistency, Duration::from_secs(30)),
        ("5 rank-order invariance", rank_order_invariance, Duration::from_secs(30)),
        ("6 correlation oracle", correlation_oracle, Duration::from_secs(5)),
        ("7 synthetic-cohort separability", cohort_separability, Duration::from_secs(60)),
        ("8 pipeline determinism", determinism, Duration::from_secs(120)),
        ("9 impact-peak property", impact_peak, Duration::from_secs(5)),
        ("10 round-trips", round_trips, Duration::from_secs(5)),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed <= budget {
                Ok(detail)
            } else {
                Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}"))
            }
        });
        match result {
            Ok(detail) => println!("PASS  criterion {name}: {detail} [{elapsed:.2?}]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail} [{elapsed:.2?}]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
