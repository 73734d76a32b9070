use crate::config::{sha256_hex, LoadedConfig};
use crate::error::{read_input, CliError, CliResult};
use crate::manifest::{write_atomic, RunManifest, MANIFEST_FILE};
use receptive_jitai::dataset::{read_csv, to_training_set, write_csv, DatasetRow};
use receptive_jitai::eval::{
    adjust_rows, compare_rates, comparison_csv, daily_series, day_range, series_csv, trend_slope,
    ComparisonRow, ResampleUnit, DEFAULT_PERMUTATIONS, DEFAULT_RESAMPLES,
};
use receptive_jitai::events::{messages, parse_jsonl, to_jsonl};
use receptive_jitai::models::{
    logo_cv, logo_cv_adaptive, train_linear_svm, BiasedRandomTrainer, ClassifierReport,
    LogisticParams, LogisticTrainer, SvmParams, SvmTrainer,
};
use receptive_jitai::rng;
use receptive_jitai::sim::{generate_dataset, run_experiment, DatasetParams, PopulationParams};
use receptive_jitai::{
    ExperimentConfig, LinearModel, MessageRecord, Metric, ModelId, PretrainedModels,
};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const STATIC_MODEL_FILE: &str = "static_model.txt";
pub const POPULATION_MODEL_FILE: &str = "population_model.txt";
pub const EXPERIMENT_FILE: &str = "experiment.json";
pub const CV_REPORT_FILE: &str = "cv_report.csv";
pub const TABLE2_FILE: &str = "table2.csv";
pub const TABLE3_FILE: &str = "table3.csv";
pub const TRENDS_FILE: &str = "trends.csv";

pub fn replicate_file(replicate: u32) -> String {
    format!("replicate_{replicate:03}.jsonl")
}

pub fn series_file(metric: Metric) -> String {
    format!("fig4_{metric}.csv")
}

/// Manifest path for commands whose output is a single file.
pub fn sidecar_manifest(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    out.with_file_name(name)
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn create_dir(dir: &Path) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn load_dataset(path: &Path, manifest: &mut RunManifest) -> CliResult<Vec<DatasetRow>> {
    let bytes = read_input(&path.to_path_buf())?;
    manifest.input(path, &bytes);
    read_csv(bytes.as_slice()).map_err(|e| CliError::dataset(path, e))
}

fn settings_hash(settings: &str) -> String {
    sha256_hex(settings.as_bytes())
}

// ---------------------------------------------------------------- train-static

/// Trains the class-weighted SVM on every row and writes its record.
pub fn train_static(dataset: &Path, out: &Path) -> CliResult<LinearModel> {
    let params = SvmParams::default();
    let mut manifest = RunManifest::new("train-static", settings_hash(&format!("{params:?}")), 0);
    let start = Instant::now();
    let rows = load_dataset(dataset, &mut manifest)?;
    let data = to_training_set(&rows);
    let model = train_linear_svm(&data, &params)?;
    manifest.stage("train", start);
    write_atomic(out, format!("{}\n", model.to_record()).as_bytes())?;
    manifest.output(file_name(out));
    manifest.write(&sidecar_manifest(out))?;
    log::info!("static model trained on {} rows", rows.len());
    Ok(model)
}

pub fn read_model(path: &Path) -> CliResult<LinearModel> {
    let bytes = read_input(&path.to_path_buf())?;
    let text = String::from_utf8_lossy(&bytes);
    let line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    LinearModel::from_record(line).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

// -------------------------------------------------------------------------- cv

/// Mean and per-fold scores of every model, in display order.
#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub groups: usize,
    pub seed: u64,
    pub entries: Vec<(String, ClassifierReport)>,
}

pub const CV_MODELS: [&str; 4] = ["random", "static-svm", "p1-lr", "adaptive"];

impl CvReport {
    pub fn f1(&self, name: &str) -> Option<f64> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, r)| r.f1)
    }

    pub fn render(&self) -> String {
        let mut s = format!("{}-fold grouped CV, seed {}\n", self.groups, self.seed);
        let _ = writeln!(
            s,
            "{:<12} {:>9} {:>9} {:>9}",
            "model", "precision", "recall", "f1"
        );
        for (name, r) in &self.entries {
            let _ = writeln!(
                s,
                "{name:<12} {:>9.3} {:>9.3} {:>9.3}",
                r.precision, r.recall, r.f1
            );
        }
        s
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("model,fold,n_test,precision,recall,f1\n");
        for (name, r) in &self.entries {
            for (k, f) in r.folds.iter().enumerate() {
                let p = &f.scores;
                let _ = writeln!(
                    s,
                    "{name},{k},{},{},{},{}",
                    f.n_test, p.precision, p.recall, p.f1
                );
            }
            let n: usize = r.folds.iter().map(|f| f.n_test).sum();
            let _ = writeln!(s, "{name},mean,{n},{},{},{}", r.precision, r.recall, r.f1);
        }
        s
    }
}

/// Runs all models on the same grouped folds.
pub fn cross_validate(rows: &[DatasetRow], groups: usize, seed: u64) -> CliResult<CvReport> {
    let data = to_training_set(rows);
    let p1 = LogisticTrainer {
        params: LogisticParams::default(),
        iht_folds: Some(5),
    };
    let defaults = ExperimentConfig::default();
    let entries = vec![
        (
            CV_MODELS[0].to_string(),
            logo_cv(&data, groups, &BiasedRandomTrainer, seed)?,
        ),
        (
            CV_MODELS[1].to_string(),
            logo_cv(&data, groups, &SvmTrainer::default(), seed)?,
        ),
        (CV_MODELS[2].to_string(), logo_cv(&data, groups, &p1, seed)?),
        (
            CV_MODELS[3].to_string(),
            logo_cv_adaptive(
                &data,
                groups,
                &p1,
                &defaults.personal_params(),
                defaults.personal_prior_strength,
                seed,
            )?,
        ),
    ];
    Ok(CvReport {
        groups,
        seed,
        entries,
    })
}

pub fn cv(dataset: &Path, groups: usize, seed: u64, out: Option<&Path>) -> CliResult<CvReport> {
    let mut manifest = RunManifest::new("cv", settings_hash(&format!("groups={groups}")), seed);
    let start = Instant::now();
    let rows = load_dataset(dataset, &mut manifest)?;
    let report = cross_validate(&rows, groups, seed)?;
    manifest.stage("cv", start);
    if let Some(dir) = out {
        create_dir(dir)?;
        write_atomic(&dir.join(CV_REPORT_FILE), report.csv().as_bytes())?;
        manifest.output(CV_REPORT_FILE);
        manifest.write(&dir.join(MANIFEST_FILE))?;
    }
    Ok(report)
}

// -------------------------------------------------------------------- simulate

pub struct SimulateArgs<'a> {
    pub config: &'a LoadedConfig,
    pub out: &'a Path,
    pub seed: Option<u64>,
    pub train_static_from: Option<&'a Path>,
}

fn resolve_models(
    args: &SimulateArgs<'_>,
    experiment: &ExperimentConfig,
    manifest: &mut RunManifest,
) -> CliResult<PretrainedModels> {
    let models = &args.config.config.models;
    if let Some(path) = args.train_static_from {
        let rows = load_dataset(path, manifest)?;
        let seed = rng::derive_seed(experiment.seed, &[rng::tag::PRIOR]);
        return Ok(PretrainedModels::train(&to_training_set(&rows), seed)?);
    }
    if let Some(path) = &models.static_model {
        let load = |p: &Path, manifest: &mut RunManifest| -> CliResult<LinearModel> {
            let p = args.config.resolve(p);
            let bytes = read_input(&p)?;
            manifest.input(&p, &bytes);
            read_model(&p)
        };
        let static_model = load(path, manifest)?;
        let p1 = match &models.population {
            Some(p) => Some(load(p, manifest)?),
            None => None,
        };
        return Ok(PretrainedModels {
            static_model: Some(static_model),
            p1,
        });
    }
    if models.prior_study {
        return Ok(PretrainedModels::from_prior_study(experiment)?);
    }
    Err(CliError::Usage(
        "no static model: set [models] static or prior_study in the config, or pass --train-static-from"
            .into(),
    ))
}

/// Runs every replicate and writes one JSONL log each.
pub fn simulate(args: &SimulateArgs<'_>) -> CliResult<RunManifest> {
    let mut experiment = args.config.config.experiment.clone();
    if let Some(seed) = args.seed {
        experiment.seed = seed;
    }
    experiment.validate()?;
    let mut manifest = RunManifest::new("simulate", args.config.hash(), experiment.seed);
    let start = Instant::now();
    let models = resolve_models(args, &experiment, &mut manifest)?;
    manifest.stage("models", start);
    let start = Instant::now();
    let logs = run_experiment(&experiment, &models)?;
    manifest.stage("simulate", start);

    create_dir(args.out)?;
    let write = |name: &str, bytes: &[u8], manifest: &mut RunManifest| -> CliResult<()> {
        write_atomic(&args.out.join(name), bytes)?;
        manifest.output(name);
        Ok(())
    };
    let experiment_json = serde_json::to_vec_pretty(&experiment)
        .map_err(|e| CliError::Internal(format!("experiment: {e}")))?;
    write(EXPERIMENT_FILE, &experiment_json, &mut manifest)?;
    if let Some(m) = &models.static_model {
        write(
            STATIC_MODEL_FILE,
            format!("{}\n", m.to_record()).as_bytes(),
            &mut manifest,
        )?;
    }
    if let Some(m) = &models.p1 {
        write(
            POPULATION_MODEL_FILE,
            format!("{}\n", m.to_record()).as_bytes(),
            &mut manifest,
        )?;
    }
    let mut n_events = 0;
    for log in &logs {
        n_events += log.events.len();
        write(
            &replicate_file(log.replicate),
            to_jsonl(&log.events).as_bytes(),
            &mut manifest,
        )?;
    }
    manifest.write(&args.out.join(MANIFEST_FILE))?;
    log::info!("{} replicates, {n_events} events", logs.len());
    Ok(manifest)
}

// -------------------------------------------------------------------- evaluate

pub struct EvaluateArgs<'a> {
    pub logs: &'a Path,
    pub out: &'a Path,
    pub seed: u64,
    pub resamples: usize,
    pub permutations: usize,
    /// Falls back to the simulated experiment's setting, then 7.
    pub warm_up_days: Option<u32>,
}

impl<'a> EvaluateArgs<'a> {
    pub fn new(logs: &'a Path, out: &'a Path, seed: u64) -> Self {
        Self {
            logs,
            out,
            seed,
            resamples: DEFAULT_RESAMPLES,
            permutations: DEFAULT_PERMUTATIONS,
            warm_up_days: None,
        }
    }
}

/// Everything `evaluate` writes, in memory.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub table2: Vec<ComparisonRow>,
    pub table3: Vec<ComparisonRow>,
    pub trends: Vec<(Metric, ModelId, Option<receptive_jitai::eval::Trend>)>,
    pub n_messages: usize,
}

/// Reads every `*.jsonl` in `dir` in name order; the position in that
/// order is the replicate index.
pub fn load_messages(dir: &Path, manifest: &mut RunManifest) -> CliResult<Vec<MessageRecord>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::input(dir, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    files.sort();
    let mut records = Vec::new();
    for (replicate, path) in files.iter().enumerate() {
        let bytes = read_input(path)?;
        manifest.input(path, &bytes);
        let text = String::from_utf8(bytes)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let events =
            parse_jsonl(&text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        let msgs = messages(&events, replicate as u32)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        records.extend(msgs);
    }
    if records.is_empty() {
        return Err(CliError::Data(format!("{}: no events", dir.display())));
    }
    Ok(records)
}

fn warm_up_days(args: &EvaluateArgs<'_>) -> u32 {
    if let Some(w) = args.warm_up_days {
        return w;
    }
    std::fs::read(args.logs.join(EXPERIMENT_FILE))
        .ok()
        .and_then(|b| serde_json::from_slice::<ExperimentConfig>(&b).ok())
        .map_or(7, |c| c.warm_up_days)
}

fn comparison_table(
    records: &[MessageRecord],
    unit: ResampleUnit,
    resamples: usize,
    seed: u64,
) -> CliResult<Vec<ComparisonRow>> {
    let mut rows = Vec::new();
    for metric in Metric::ALL {
        rows.extend(compare_rates(records, metric, unit, resamples, seed)?);
    }
    adjust_rows(&mut rows)?;
    Ok(rows)
}

pub fn analyze(
    records: &[MessageRecord],
    warm_up: u32,
    resamples: usize,
    permutations: usize,
    seed: u64,
) -> CliResult<Evaluation> {
    let table2 = comparison_table(records, ResampleUnit::Messages, resamples, seed)?;
    let post: Vec<MessageRecord> = records
        .iter()
        .filter(|r| r.delivery.day > warm_up)
        .cloned()
        .collect();
    let table3 = comparison_table(&post, ResampleUnit::Participants, resamples, seed)?;
    let mut trends = Vec::new();
    for metric in Metric::ALL {
        let series = daily_series(records, metric);
        for model in ModelId::ALL {
            let trend = series.get(&model).and_then(|pts| {
                trend_slope(&day_range(pts, warm_up + 1, u32::MAX), permutations, seed).ok()
            });
            trends.push((metric, model, trend));
        }
    }
    Ok(Evaluation {
        table2,
        table3,
        trends,
        n_messages: records.len(),
    })
}

fn trends_csv(
    trends: &[(Metric, ModelId, Option<receptive_jitai::eval::Trend>)],
    from_day: u32,
) -> String {
    let mut s = String::from("metric,model,from_day,slope,p_value,n_points\n");
    for (metric, model, t) in trends {
        match t {
            Some(t) => {
                let _ = writeln!(
                    s,
                    "{metric},{model},{from_day},{},{},{}",
                    t.slope, t.p_value, t.n_points
                );
            }
            None => {
                let _ = writeln!(s, "{metric},{model},{from_day},NA,NA,0");
            }
        }
    }
    s
}

/// Writes every report file, then fails if any comparison group was empty.
pub fn evaluate(args: &EvaluateArgs<'_>) -> CliResult<Evaluation> {
    let mut manifest = RunManifest::new(
        "evaluate",
        settings_hash(&format!(
            "resamples={} permutations={}",
            args.resamples, args.permutations
        )),
        args.seed,
    );
    let start = Instant::now();
    let records = load_messages(args.logs, &mut manifest)?;
    manifest.stage("read", start);
    let warm_up = warm_up_days(args);
    let start = Instant::now();
    let eval = analyze(
        &records,
        warm_up,
        args.resamples,
        args.permutations,
        args.seed,
    )?;
    manifest.stage("analyze", start);

    create_dir(args.out)?;
    let mut write = |name: String, body: String| -> CliResult<()> {
        write_atomic(&args.out.join(&name), body.as_bytes())?;
        manifest.output(name);
        Ok(())
    };
    write(TABLE2_FILE.into(), comparison_csv(&eval.table2))?;
    write(TABLE3_FILE.into(), comparison_csv(&eval.table3))?;
    for metric in Metric::ALL {
        write(
            series_file(metric),
            series_csv(&daily_series(&records, metric)),
        )?;
    }
    write(TRENDS_FILE.into(), trends_csv(&eval.trends, warm_up + 1))?;
    manifest.write(&args.out.join(MANIFEST_FILE))?;

    let empty: Vec<String> = eval
        .table2
        .iter()
        .chain(&eval.table3)
        .filter(|r| !r.is_defined())
        .map(|r| format!("{} {}", r.label, r.metric))
        .collect();
    if !empty.is_empty() {
        return Err(CliError::Data(format!(
            "empty comparison group: {}",
            empty.join(", ")
        )));
    }
    Ok(eval)
}

// ----------------------------------------------------------------- gen-dataset

#[derive(Debug, Clone, Copy)]
pub struct GenDatasetArgs {
    pub participants: u32,
    pub instances: u32,
    pub label_noise: f64,
    pub prevalence: Option<f64>,
    pub heterogeneity: f64,
    pub context_strength: f64,
    pub seed: u64,
}

impl GenDatasetArgs {
    pub fn params(&self) -> CliResult<DatasetParams> {
        if !(0.0..=0.5).contains(&self.label_noise) {
            return Err(CliError::Usage("label noise must be in [0, 0.5]".into()));
        }
        if self.prevalence.is_some_and(|p| !(0.0 < p && p < 1.0)) {
            return Err(CliError::Usage("prevalence must be in (0, 1)".into()));
        }
        if self.participants == 0 || self.instances == 0 {
            return Err(CliError::Usage(
                "participants and instances must be positive".into(),
            ));
        }
        let defaults = ExperimentConfig::default();
        Ok(DatasetParams {
            population: PopulationParams {
                n_participants: self.participants,
                heterogeneity: self.heterogeneity,
                context_strength: self.context_strength,
                ..defaults.population_params()
            },
            instances_per_participant: self.instances,
            study_days: defaults.study_days,
            label_noise: self.label_noise,
            target_prevalence: self.prevalence,
            seed: self.seed,
        })
    }
}

pub fn gen_dataset(args: &GenDatasetArgs, out: &Path) -> CliResult<Vec<DatasetRow>> {
    let params = args.params()?;
    let mut manifest = RunManifest::new(
        "gen-dataset",
        settings_hash(&format!("{params:?}")),
        args.seed,
    );
    let start = Instant::now();
    let rows = generate_dataset(&params);
    manifest.stage("generate", start);
    let mut buf = Vec::new();
    write_csv(&mut buf, &rows).map_err(|e| CliError::Internal(e.to_string()))?;
    write_atomic(out, &buf)?;
    manifest.output(file_name(out));
    manifest.write(&sidecar_manifest(out))?;
    Ok(rows)
}
