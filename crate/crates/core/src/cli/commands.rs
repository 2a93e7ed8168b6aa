use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::store::{load_entry, read_manifest, read_text, write_store, write_text};
use super::{
    AnalysisOptions, AnalyzeArgs, Cli, CliError, EvaluateArgs, IngestArgs, LearnerChoice, Outcome, PipelineArgs,
    Preset, ReportArgs, SynthArgs, TrainArgs, WindowOptions, WindowsArgs,
};
use crate::classify::{serialize_model, LearnerConfig};
use crate::eval::{
    holdout_evaluate, kfold_cross_validate, render_confusion, render_rate_table, select_training_recordings,
    EvaluationReport, TrainingSplit,
};
use crate::kinematics::{extrema_report, speed_series, trajectory_correlation_aligned, DEFAULT_RESAMPLE_N};
use crate::stroke::{
    normalize_origin, validate_recording, Axis, Finding, MarkerId, SkillClass, StrokeRecording, ValidationPolicy,
};
use crate::synth::{generate_cohort, CohortSpec};
use crate::windowing::{build_dataset, export_dataset, import_dataset, Dataset, WindowSpec};

/// Machine-readable evaluation output: run settings (including every seed)
/// and one report per learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationBundle {
    pub run: serde_json::Value,
    pub reports: Vec<EvaluationReport>,
}

impl EvaluationBundle {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("bundle serializes");
        s.push('\n');
        s
    }

    /// Rate table followed by every confusion matrix the reports carry.
    pub fn to_text(&self) -> String {
        let mut out = render_rate_table(&self.reports);
        for r in &self.reports {
            let sections = [
                ("cross-validation", &r.confusion_cv),
                ("learning data", &r.confusion_train),
                ("evaluation data", &r.confusion_eval),
            ];
            for (name, cm) in sections {
                if let Some(cm) = cm {
                    out.push('\n');
                    out.push_str(&render_confusion(&format!("{} {name}", r.learner), cm));
                }
            }
        }
        out
    }

    fn has_warnings(&self) -> bool {
        self.reports.iter().any(|r| !r.warnings.is_empty())
    }
}

fn require_out<'a>(cli: &'a Cli, command: &str) -> Result<&'a Path, CliError> {
    cli.out.as_deref().ok_or_else(|| CliError::Usage(format!("{command} needs --out")))
}

fn notice(cli: &Cli, message: impl AsRef<str>) {
    if !cli.quiet {
        eprintln!("{}", message.as_ref());
    }
}

fn emit(cli: &Cli, path: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            write_text(p, contents)?;
            notice(cli, format!("wrote {}", p.display()));
            Ok(())
        }
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

/// One line per finding, except that several jumps in one recording are
/// summarized by their count and the largest one.
fn finding_lines(findings: &[Finding]) -> Vec<String> {
    let jumps: Vec<&Finding> = findings.iter().filter(|f| matches!(f, Finding::Jump { .. })).collect();
    let mut lines: Vec<String> = findings
        .iter()
        .filter(|f| !matches!(f, Finding::Jump { .. }) || jumps.len() == 1)
        .map(|f| f.to_string())
        .collect();
    if jumps.len() > 1 {
        let largest = jumps
            .iter()
            .filter_map(|f| match f {
                Finding::Jump { distance, .. } => Some((*distance, *f)),
                _ => None,
            })
            .fold(None::<(f64, &Finding)>, |best, cur| match best {
                Some(b) if b.0 >= cur.0 => Some(b),
                _ => Some(cur),
            })
            .map(|(_, f)| f.to_string())
            .unwrap_or_default();
        lines.push(format!("{} jumps, largest {largest}", jumps.len()));
    }
    lines
}

fn warn_findings(cli: &Cli, rec: &StrokeRecording, policy: &ValidationPolicy) {
    for line in finding_lines(&validate_recording(rec, policy)) {
        notice(cli, format!("warning: {}: {line}", rec.subject_id));
    }
}

/// Loads and normalizes the recordings of a manifest or store, printing
/// validation findings as warnings.
fn load_validated(cli: &Cli, input: &Path, policy: &ValidationPolicy) -> Result<Vec<StrokeRecording>, CliError> {
    let entries = read_manifest(&super::manifest_path(input))?;
    let mut recs = Vec::with_capacity(entries.len());
    for entry in &entries {
        let rec = load_entry(entry)?;
        warn_findings(cli, &rec, policy);
        recs.push(normalize_origin(&rec));
    }
    super::store::check_unique_ids(&recs)?;
    Ok(recs)
}

fn load_quietly(input: &Path) -> Result<Vec<StrokeRecording>, CliError> {
    Ok(super::load_recordings(input)?.iter().map(normalize_origin).collect())
}

pub(crate) fn ingest(cli: &Cli, args: &IngestArgs) -> Result<Outcome, CliError> {
    let out = require_out(cli, "ingest")?;
    let policy = ValidationPolicy { max_jump: args.max_jump, ..ValidationPolicy::default() };
    let recs = load_validated(cli, &args.manifest, &policy)?;
    write_store(out, &recs)?;
    notice(cli, format!("ingested {} recordings into {}", recs.len(), out.display()));
    Ok(Outcome::Clean)
}

/// File name and contents of the analytics bundle: `extrema.csv`,
/// `correlation.csv` (only with two or more recordings) and one
/// `speed/{subject_id}.csv` per recording.
pub fn analysis_files(recs: &[StrokeRecording], opts: &AnalysisOptions) -> Result<Vec<(PathBuf, String)>, CliError> {
    let analyze_err = CliError::stage("analyze");
    let mut files = Vec::new();
    let table = extrema_report(recs, &opts.markers).map_err(|e| analyze_err(&e))?;
    files.push((PathBuf::from("extrema.csv"), table.to_csv()));
    if recs.len() >= 2 {
        files.push((PathBuf::from("correlation.csv"), correlation_matrix_csv(recs, opts)?));
    }
    for rec in recs {
        files.push((PathBuf::from("speed").join(format!("{}.csv", rec.subject_id)), speed_csv(rec)?));
    }
    Ok(files)
}

/// Square CSV of mean (x, y) trajectory correlations; empty cells mark pairs
/// with a constant series.
fn correlation_matrix_csv(recs: &[StrokeRecording], opts: &AnalysisOptions) -> Result<String, CliError> {
    let mut out = String::from("subject_id");
    for r in recs {
        out.push(',');
        out.push_str(&r.subject_id);
    }
    out.push('\n');
    for a in recs {
        out.push_str(&a.subject_id);
        for b in recs {
            out.push(',');
            match trajectory_correlation_aligned(
                a,
                b,
                opts.correlation_marker,
                DEFAULT_RESAMPLE_N,
                opts.alignment.into(),
            ) {
                Ok(c) => out.push_str(&c.mean().to_string()),
                Err(crate::kinematics::KinematicsError::DegenerateSeries { .. }) => {}
                Err(e) => return Err(CliError::stage("analyze")(&e)),
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// `frame,M1_vx,M1_vy,...,M9_vy`; row `t` holds the speed from frame `t` to `t + 1`.
fn speed_csv(rec: &StrokeRecording) -> Result<String, CliError> {
    let mut columns = Vec::new();
    let mut out = String::from("frame");
    for marker in MarkerId::all() {
        for axis in Axis::BOTH {
            let s = speed_series(rec, marker, axis)
                .map_err(|e| CliError::Stage { stage: "analyze", message: format!("{}: {e}", rec.subject_id) })?;
            out.push_str(&format!(",{marker}_v{}", axis.as_str()));
            columns.push(s.values);
        }
    }
    out.push('\n');
    for t in 0..columns[0].len() {
        out.push_str(&rec.frames()[t].index.to_string());
        for c in &columns {
            out.push(',');
            out.push_str(&c[t].to_string());
        }
        out.push('\n');
    }
    Ok(out)
}

fn write_analysis(cli: &Cli, dir: &Path, recs: &[StrokeRecording], opts: &AnalysisOptions) -> Result<(), CliError> {
    if recs.len() < 2 {
        notice(cli, "notice: correlation matrix omitted, it needs at least 2 recordings");
    }
    for (name, contents) in analysis_files(recs, opts)? {
        write_text(&dir.join(name), &contents)?;
    }
    Ok(())
}

pub(crate) fn analyze(cli: &Cli, args: &AnalyzeArgs) -> Result<Outcome, CliError> {
    let recs = load_quietly(&args.input)?;
    match &cli.out {
        Some(dir) => {
            write_analysis(cli, dir, &recs, &args.analysis)?;
            notice(cli, format!("wrote analysis of {} recordings to {}", recs.len(), dir.display()));
        }
        None => {
            let files = analysis_files(&recs, &args.analysis)?;
            for (name, contents) in files.iter().filter(|(n, _)| !n.starts_with("speed")) {
                println!("# {}", name.display());
                print!("{contents}");
            }
            if recs.len() < 2 {
                notice(cli, "notice: correlation matrix omitted, it needs at least 2 recordings");
            }
        }
    }
    Ok(Outcome::Clean)
}

fn window_spec(opts: &WindowOptions) -> Result<WindowSpec, CliError> {
    let mut spec = WindowSpec::new(opts.window_len, opts.overlap).map_err(|e| CliError::stage("window")(&e))?;
    spec.differenced = opts.differenced;
    Ok(spec)
}

pub(crate) fn windows(cli: &Cli, args: &WindowsArgs) -> Result<Outcome, CliError> {
    let recs = load_quietly(&args.input)?;
    let spec = window_spec(&args.window)?;
    let ds = build_dataset(&recs, &spec, &args.classes).map_err(|e| CliError::stage("window")(&e))?;
    emit(cli, cli.out.as_deref(), &export_dataset(&ds))?;
    Ok(Outcome::Clean)
}

fn read_dataset(path: &Path) -> Result<Dataset, CliError> {
    import_dataset(&read_text(path)?)
        .map_err(|e| CliError::Stage { stage: "dataset", message: format!("{}: {e}", path.display()) })
}

pub(crate) fn train(cli: &Cli, args: &TrainArgs) -> Result<Outcome, CliError> {
    if args.learner.learner == LearnerChoice::Both {
        return Err(CliError::Usage("train needs --learner c45 or --learner nbtree".into()));
    }
    let ds = read_dataset(&args.dataset)?;
    let learner = &args.learner.configs(cli.seed)[0];
    let model = learner.train(&ds).map_err(|e| CliError::stage("train")(&e))?;
    emit(cli, cli.out.as_deref(), &serialize_model(&model))?;
    Ok(Outcome::Clean)
}

/// Hold-out report (when given) completed with the cross-validation rate.
fn evaluate_learners(
    learners: &[LearnerConfig],
    cv: Option<(&Dataset, usize, bool)>,
    holdout: Option<(&Dataset, &Dataset)>,
    seed: u64,
) -> Result<Vec<EvaluationReport>, CliError> {
    let eval_err = CliError::stage("evaluate");
    let mut reports = Vec::new();
    for learner in learners {
        let mut report = EvaluationReport::new(learner.name(), seed);
        if let Some((train, eval)) = holdout {
            report.absorb(holdout_evaluate(train, eval, learner).map_err(|e| eval_err(&e))?);
        }
        if let Some((ds, folds, group)) = cv {
            report.absorb(kfold_cross_validate(ds, folds, learner, seed, group).map_err(|e| eval_err(&e))?);
        }
        reports.push(report);
    }
    Ok(reports)
}

fn learner_settings(learners: &[LearnerConfig]) -> serde_json::Value {
    let items: Vec<serde_json::Value> = learners
        .iter()
        .map(|l| match l {
            LearnerConfig::C45(p) => json!({"learner": l.name(), "min_leaf": p.min_leaf, "prune": p.prune, "cf": p.cf}),
            LearnerConfig::NBTree(p) => json!({
                "learner": l.name(),
                "cv_folds": p.cv_folds,
                "min_split_gain": p.min_split_gain,
                "min_node": p.min_node,
                "seed": p.seed,
            }),
        })
        .collect();
    serde_json::Value::Array(items)
}

fn finish(cli: &Cli, bundle: &EvaluationBundle, dir: Option<&Path>) -> Result<Outcome, CliError> {
    let text = bundle.to_text();
    if let Some(dir) = dir {
        write_text(&dir.join("evaluation.json"), &bundle.to_json())?;
        write_text(&dir.join("evaluation.txt"), &text)?;
    }
    if !cli.quiet {
        print!("{text}");
    }
    for r in &bundle.reports {
        for w in &r.warnings {
            notice(cli, format!("warning: {}: {w}", r.learner));
        }
    }
    Ok(if bundle.has_warnings() { Outcome::Warnings } else { Outcome::Clean })
}

pub(crate) fn evaluate(cli: &Cli, args: &EvaluateArgs) -> Result<Outcome, CliError> {
    if args.dataset.is_none() && args.holdout.is_none() {
        return Err(CliError::Usage("evaluate needs a dataset, --holdout TRAIN EVAL, or both".into()));
    }
    let learners = args.learner.configs(cli.seed);
    let cv_ds = args.dataset.as_deref().map(read_dataset).transpose()?;
    let holdout = match &args.holdout {
        Some(paths) => Some((read_dataset(&paths[0])?, read_dataset(&paths[1])?)),
        None => None,
    };
    let reports = evaluate_learners(
        &learners,
        cv_ds.as_ref().map(|ds| (ds, args.folds, args.group_by_recording)),
        holdout.as_ref().map(|(t, e)| (t, e)),
        cli.seed,
    )?;
    let run = json!({
        "command": "evaluate",
        "seed": cli.seed,
        "folds": cv_ds.as_ref().map(|_| args.folds),
        "group_by_recording": args.group_by_recording,
        "dataset": args.dataset.as_ref().map(|p| p.display().to_string()),
        "holdout": args.holdout.as_ref().map(|p| p.iter().map(|x| x.display().to_string()).collect::<Vec<_>>()),
        "learners": learner_settings(&learners),
    });
    finish(cli, &EvaluationBundle { run, reports }, cli.out.as_deref())
}

fn cohort_spec(preset: Preset, count: usize) -> CohortSpec {
    match preset {
        Preset::Expert => CohortSpec::single(SkillClass::Expert, count),
        Preset::Intermediate => CohortSpec::single(SkillClass::Intermediate, count),
        Preset::Novice => CohortSpec::single(SkillClass::Novice, count),
        Preset::ReferenceCohort => CohortSpec::reference_cohort(),
    }
}

pub(crate) fn synth(cli: &Cli, args: &SynthArgs) -> Result<Outcome, CliError> {
    let out = require_out(cli, "synth")?;
    let recs = generate_cohort(&cohort_spec(args.preset, args.count), cli.seed);
    write_store(out, &recs)?;
    notice(cli, format!("wrote {} synthetic recordings to {}", recs.len(), out.display()));
    Ok(Outcome::Clean)
}

pub(crate) fn report(cli: &Cli, args: &ReportArgs) -> Result<Outcome, CliError> {
    let out = require_out(cli, "report")?;
    let recs = load_quietly(&args.store)?;
    write_analysis(cli, out, &recs, &args.analysis)?;
    let Some(path) = &args.evaluation else {
        return Ok(Outcome::Clean);
    };
    let bundle: EvaluationBundle = serde_json::from_str(&read_text(path)?)
        .map_err(|e| CliError::Stage { stage: "report", message: format!("{}: {e}", path.display()) })?;
    finish(cli, &bundle, Some(out))
}

/// Marker whose trajectories decide which recordings train the hold-out model.
const HOLDOUT_MARKER: u8 = 9;

fn holdout_split(recs: &[StrokeRecording], n: usize, classes: &[SkillClass]) -> Result<TrainingSplit, CliError> {
    let marker = MarkerId::new(HOLDOUT_MARKER).expect("valid marker");
    let mut split = TrainingSplit { train_ids: Vec::new(), eval_ids: Vec::new() };
    for &class in classes {
        let s = select_training_recordings(recs, class, n, marker).map_err(|e| CliError::stage("holdout")(&e))?;
        split.train_ids.extend(s.train_ids);
        split.eval_ids.extend(s.eval_ids);
    }
    Ok(split)
}

fn subset_by_ids(recs: &[StrokeRecording], ids: &[String]) -> Vec<StrokeRecording> {
    recs.iter().filter(|r| ids.contains(&r.subject_id)).cloned().collect()
}

pub(crate) fn pipeline(cli: &Cli, args: &PipelineArgs) -> Result<Outcome, CliError> {
    let out = require_out(cli, "pipeline")?;
    let classes = [SkillClass::Expert, SkillClass::Novice];
    let (recs, source) = match (args.synth, &args.manifest) {
        (Some(preset), _) => {
            let raw = generate_cohort(&cohort_spec(preset, 5), cli.seed);
            for rec in &raw {
                warn_findings(cli, rec, &ValidationPolicy::default());
            }
            let recs: Vec<_> = raw.iter().map(normalize_origin).collect();
            (recs, json!({"synth": preset.name(), "seed": cli.seed}))
        }
        (None, Some(manifest)) => {
            let recs = load_validated(cli, manifest, &ValidationPolicy::default())?;
            (recs, json!({"manifest": manifest.display().to_string()}))
        }
        (None, None) => return Err(CliError::Usage("pipeline needs a manifest or --synth".into())),
    };
    write_store(&out.join("store"), &recs)?;
    write_analysis(cli, &out.join("analysis"), &recs, &args.analysis)?;

    let spec = window_spec(&args.window)?;
    let window_err = CliError::stage("window");
    let ds = build_dataset(&recs, &spec, &classes).map_err(|e| window_err(&e))?;
    write_text(&out.join("dataset.csv"), &export_dataset(&ds))?;

    let learners = args.learner.configs(cli.seed);
    for learner in &learners {
        let model = learner.train(&ds).map_err(|e| CliError::stage("train")(&e))?;
        let file = match learner {
            LearnerConfig::C45(_) => "c45.model",
            LearnerConfig::NBTree(_) => "nbtree.model",
        };
        write_text(&out.join("models").join(file), &serialize_model(&model))?;
    }

    let mut holdout_info = serde_json::Value::Null;
    let holdout = match args.holdout_class_experts {
        Some(n) => {
            let split = holdout_split(&recs, n, &classes)?;
            let train =
                build_dataset(&subset_by_ids(&recs, &split.train_ids), &spec, &classes).map_err(|e| window_err(&e))?;
            let eval =
                build_dataset(&subset_by_ids(&recs, &split.eval_ids), &spec, &classes).map_err(|e| window_err(&e))?;
            write_text(&out.join("holdout").join("train.csv"), &export_dataset(&train))?;
            write_text(&out.join("holdout").join("eval.csv"), &export_dataset(&eval))?;
            holdout_info = json!({
                "per_class": n,
                "marker": format!("M{HOLDOUT_MARKER}"),
                "train_ids": split.train_ids,
                "eval_ids": split.eval_ids,
            });
            Some((train, eval))
        }
        None => None,
    };

    let reports = evaluate_learners(
        &learners,
        Some((&ds, args.folds, args.group_by_recording)),
        holdout.as_ref().map(|(t, e)| (t, e)),
        cli.seed,
    )?;
    let run = json!({
        "command": "pipeline",
        "seed": cli.seed,
        "source": source,
        "recordings": recs.len(),
        "classes": classes.iter().map(|c| c.as_str()).collect::<Vec<_>>(),
        "window": {"window_len": spec.window_len, "overlap": spec.overlap, "differenced": spec.differenced},
        "instances": ds.len(),
        "folds": args.folds,
        "group_by_recording": args.group_by_recording,
        "holdout": holdout_info,
        "learners": learner_settings(&learners),
    });
    finish(cli, &EvaluationBundle { run, reports }, Some(out))
}
