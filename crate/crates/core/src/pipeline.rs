//! Run configuration and the `prepare` / `predict` / `evaluate` commands.
//!
//! A config file is flat `key = value` text; `#` starts a comment and every
//! key is optional. The run metadata written by `predict` and `evaluate` is
//! itself a complete config, so any run can be repeated with
//! `--config <out>/run_meta.txt`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::info;

use crate::baselines::{AdamicAdar, DecayedCommonNeighbors, Luls, Variant};
use crate::error::{Error, Result};
use crate::evalkit::{evaluate_with, EvalOptions, MetricReport, Predictor, Task};
use crate::factor::{fit, HyperParams};
use crate::netio::{load_sequence, load_temporal_edges, save_sequence, segment_snapshots, InputFormat, SegmentPolicy};
use crate::predict::{rank_links, rank_unlinks, score_matrix, write_ranked_csv};
use crate::randwalk::{snapshot_similarities_threaded, WalkConfig};
use crate::sparsemat::Matrix;

/// Method names accepted by `evaluate`.
pub const METHODS: [&str; 5] = ["luls1", "luls2", "luls3", "aa", "dcn"];

/// Only the dimensionally consistent update rules are implemented; the
/// printed forms cannot be evaluated for `|V|×m` factors.
pub const UPDATE_RULE: &str = "corrected";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskSelection {
    Link,
    Unlink,
    Both,
}

impl TaskSelection {
    pub fn tasks(self) -> Vec<Task> {
        match self {
            TaskSelection::Link => vec![Task::Link],
            TaskSelection::Unlink => vec![Task::Unlink],
            TaskSelection::Both => vec![Task::Link, Task::Unlink],
        }
    }
}

impl std::str::FromStr for TaskSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "link" => Ok(TaskSelection::Link),
            "unlink" => Ok(TaskSelection::Unlink),
            "both" => Ok(TaskSelection::Both),
            other => Err(Error::InvalidParam(format!(
                "unknown task `{other}` (expected link, unlink or both)"
            ))),
        }
    }
}

impl std::fmt::Display for TaskSelection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TaskSelection::Link => "link",
            TaskSelection::Unlink => "unlink",
            TaskSelection::Both => "both",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Raw timestamped edge file read by `prepare`.
    pub dataset: Option<PathBuf>,
    /// `None` picks CSV for `.csv` files and whitespace triples otherwise.
    pub format: Option<InputFormat>,
    /// Name used in metric rows; defaults to the snapshot directory name.
    pub dataset_name: Option<String>,
    pub n_snapshots: usize,
    pub segmentation: SegmentPolicy,
    pub snapshot_dir: PathBuf,
    pub output_dir: PathBuf,
    pub walk: WalkConfig,
    pub hyper: HyperParams,
    pub variant: Variant,
    pub task: TaskSelection,
    pub methods: Vec<String>,
    pub trials: usize,
    pub retrain: bool,
    pub threads: usize,
    /// Keep only the best `top` pairs per ranked file; 0 keeps all.
    pub top: usize,
    pub dump_similarities: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: None,
            format: None,
            dataset_name: None,
            n_snapshots: 10,
            segmentation: SegmentPolicy::default(),
            snapshot_dir: PathBuf::from("snapshots"),
            output_dir: PathBuf::from("out"),
            walk: WalkConfig::default(),
            hyper: HyperParams::default(),
            variant: Variant::Luls1,
            task: TaskSelection::Both,
            methods: METHODS.iter().map(|s| s.to_string()).collect(),
            trials: 5,
            retrain: false,
            threads: 1,
            top: 0,
            dump_similarities: false,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| Error::Parse {
        line,
        msg: format!("bad value `{value}` for `{key}`: {e}"),
    })
}

fn parse_bool(key: &str, value: &str, line: usize) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Parse {
            line,
            msg: format!("bad boolean `{value}` for `{key}`"),
        }),
    }
}

impl RunConfig {
    /// Parses config text on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut seen = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
                line,
                msg: format!("expected `key = value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(prev) = seen.insert(key.to_string(), line) {
                return Err(Error::Parse {
                    line,
                    msg: format!("`{key}` already set on line {prev}"),
                });
            }
            cfg.set(key, value, line)?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::parse(&text)
    }

    /// Sets one key; `line` is only used in error messages.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let opt_path = |v: &str| if v.is_empty() { None } else { Some(PathBuf::from(v)) };
        match key {
            "dataset" => self.dataset = opt_path(value),
            "format" => {
                self.format = match value {
                    "" | "auto" => None,
                    v => Some(parse_value(key, v, line)?),
                }
            }
            "dataset_name" => self.dataset_name = (!value.is_empty()).then(|| value.to_string()),
            "n_snapshots" => self.n_snapshots = parse_value(key, value, line)?,
            "segmentation" => self.segmentation = parse_value(key, value, line)?,
            "snapshot_dir" => self.snapshot_dir = PathBuf::from(value),
            "output_dir" => self.output_dir = PathBuf::from(value),
            "alpha" => self.walk.alpha = parse_value(key, value, line)?,
            "beta" => self.walk.beta = parse_value(key, value, line)?,
            "k" => self.walk.k = parse_value(key, value, line)?,
            "dense_threshold" => self.walk.dense_threshold = parse_value(key, value, line)?,
            "m" => self.hyper.m = parse_value(key, value, line)?,
            "theta" => self.hyper.theta = parse_value(key, value, line)?,
            "lambda" => self.hyper.lambda = parse_value(key, value, line)?,
            "gamma" => self.hyper.gamma = parse_value(key, value, line)?,
            "max_iters" => self.hyper.max_iters = parse_value(key, value, line)?,
            "rel_tol" => self.hyper.rel_tol = parse_value(key, value, line)?,
            "seed" => self.hyper.seed = parse_value(key, value, line)?,
            "weighting_mode" => self.hyper.weighting_mode = parse_value(key, value, line)?,
            "smoothness_mode" => self.hyper.smoothness_mode = parse_value(key, value, line)?,
            "update_rule" => {
                if value != UPDATE_RULE {
                    return Err(Error::Parse {
                        line,
                        msg: format!("update_rule `{value}` is not available; only `{UPDATE_RULE}` is implemented"),
                    });
                }
            }
            "variant" => self.variant = parse_value(key, value, line)?,
            "task" => self.task = parse_value(key, value, line)?,
            "methods" => {
                self.methods = value
                    .split(',')
                    .map(|s| s.trim().to_ascii_lowercase())
                    .filter(|s| !s.is_empty())
                    .collect()
            }
            "trials" => self.trials = parse_value(key, value, line)?,
            "retrain" => self.retrain = parse_bool(key, value, line)?,
            "threads" => self.threads = parse_value(key, value, line)?,
            "top" => self.top = parse_value(key, value, line)?,
            "dump_similarities" => self.dump_similarities = parse_bool(key, value, line)?,
            other => {
                return Err(Error::Parse {
                    line,
                    msg: format!("unknown key `{other}`"),
                })
            }
        }
        Ok(())
    }

    /// Hyper-parameters after the variant override.
    pub fn effective_hyper(&self) -> HyperParams {
        self.variant.apply(&self.hyper)
    }

    pub fn validate(&self) -> Result<()> {
        self.walk.validate()?;
        self.hyper.validate()?;
        if self.threads == 0 {
            return Err(Error::InvalidParam("threads must be >= 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParam("trials must be >= 1".into()));
        }
        for m in &self.methods {
            predictor_for(m, self)?;
        }
        Ok(())
    }

    pub fn dataset_label(&self) -> String {
        self.dataset_name.clone().unwrap_or_else(|| {
            self.snapshot_dir
                .file_name()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".into())
        })
    }

    /// Every key with its effective value, in config syntax. `lambda` and
    /// `gamma` are written after the variant override.
    pub fn to_config_text(&self) -> String {
        let hp = self.effective_hyper();
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("dataset", path(&self.dataset));
        kv("format", self.format.map(|f| f.to_string()).unwrap_or_else(|| "auto".into()));
        kv("dataset_name", self.dataset_name.clone().unwrap_or_default());
        kv("n_snapshots", self.n_snapshots.to_string());
        kv("segmentation", self.segmentation.to_string());
        kv("snapshot_dir", self.snapshot_dir.display().to_string());
        kv("output_dir", self.output_dir.display().to_string());
        kv("alpha", self.walk.alpha.to_string());
        kv("beta", self.walk.beta.to_string());
        kv("k", self.walk.k.to_string());
        kv("dense_threshold", self.walk.dense_threshold.to_string());
        kv("m", hp.m.to_string());
        kv("theta", hp.theta.to_string());
        kv("lambda", hp.lambda.to_string());
        kv("gamma", hp.gamma.to_string());
        kv("max_iters", hp.max_iters.to_string());
        kv("rel_tol", hp.rel_tol.to_string());
        kv("seed", hp.seed.to_string());
        kv("weighting_mode", hp.weighting_mode.to_string());
        kv("smoothness_mode", hp.smoothness_mode.to_string());
        kv("update_rule", UPDATE_RULE.into());
        kv("variant", self.variant.to_string());
        kv("task", self.task.to_string());
        kv("methods", self.methods.join(","));
        kv("trials", self.trials.to_string());
        kv("retrain", self.retrain.to_string());
        kv("threads", self.threads.to_string());
        kv("top", self.top.to_string());
        kv("dump_similarities", self.dump_similarities.to_string());
        out
    }
}

/// Builds the predictor registered under `name`.
pub fn predictor_for(name: &str, cfg: &RunConfig) -> Result<Box<dyn Predictor>> {
    let luls = |variant| {
        let mut l = Luls::new(variant, cfg.walk, cfg.hyper);
        l.threads = cfg.threads;
        Box::new(l) as Box<dyn Predictor>
    };
    match name {
        "luls1" => Ok(luls(Variant::Luls1)),
        "luls2" => Ok(luls(Variant::Luls2)),
        "luls3" => Ok(luls(Variant::Luls3)),
        "aa" => Ok(Box::new(AdamicAdar)),
        "dcn" => Ok(Box::new(DecayedCommonNeighbors { theta: cfg.hyper.theta })),
        other => Err(Error::InvalidParam(format!(
            "unknown method `{other}`; available: {}",
            METHODS.join(", ")
        ))),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

/// Ingests the raw dataset and writes the snapshot directory.
pub fn cmd_prepare(cfg: &RunConfig) -> Result<PathBuf> {
    let dataset = cfg
        .dataset
        .as_ref()
        .ok_or_else(|| Error::InvalidParam("`dataset` is required for prepare".into()))?;
    let format = cfg.format.unwrap_or_else(|| {
        match dataset.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => InputFormat::Csv,
            _ => InputFormat::WhitespaceTriples,
        }
    });
    let edges = load_temporal_edges(dataset, format).map_err(|e| e.at_stage("ingest"))?;
    let seq = segment_snapshots(&edges, cfg.n_snapshots, cfg.segmentation).map_err(|e| e.at_stage("segment"))?;
    save_sequence(&seq, &cfg.snapshot_dir).map_err(|e| e.at_stage("prepare"))?;
    info!(
        "prepared {} snapshots over {} nodes in {}",
        seq.len(),
        seq.node_count(),
        cfg.snapshot_dir.display()
    );
    Ok(cfg.snapshot_dir.clone())
}

/// What `cmd_predict` produced.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictOutcome {
    pub links: Option<PathBuf>,
    pub unlinks: Option<PathBuf>,
    pub factors: PathBuf,
    pub metadata: PathBuf,
    pub iters_run: usize,
    pub converged: bool,
}

fn dump_matrix(path: &Path, m: &Matrix) -> Result<()> {
    let mut text = String::new();
    for (i, j, v) in m.entries() {
        let _ = writeln!(text, "{i} {j} {v:e}");
    }
    write_file(path, &text)
}

/// Trains on every prepared snapshot and ranks candidates for the next one.
pub fn cmd_predict(cfg: &RunConfig) -> Result<PredictOutcome> {
    cfg.validate()?;
    let seq = load_sequence(&cfg.snapshot_dir).map_err(|e| e.at_stage("load"))?;
    let pairs = snapshot_similarities_threaded(&seq, &cfg.walk, cfg.threads).map_err(|e| e.at_stage("randwalk"))?;
    let out = &cfg.output_dir;
    create_dir(out)?;
    if cfg.dump_similarities {
        let dir = out.join("similarities");
        create_dir(&dir)?;
        for (t, p) in pairs.iter().enumerate() {
            dump_matrix(&dir.join(format!("H_{}.txt", t + 1)), &p.h)?;
            dump_matrix(&dir.join(format!("W_{}.txt", t + 1)), &p.w)?;
        }
    }
    let hp = cfg.effective_hyper();
    let state = fit(&pairs, &hp).map_err(|e| e.at_stage("factor"))?;
    let r = score_matrix(&state).map_err(|e| e.at_stage("predict"))?;
    let top = (cfg.top > 0).then_some(cfg.top);
    let tasks = cfg.task.tasks();

    let mut links = None;
    let mut unlinks = None;
    for task in tasks {
        let (ranked, name) = match task {
            Task::Link => (rank_links(&r, seq.last(), top), "links.csv"),
            Task::Unlink => (rank_unlinks(&r, seq.last(), top), "unlinks.csv"),
        };
        let path = out.join(name);
        write_ranked_csv(&path, &ranked, seq.labels()).map_err(|e| e.at_stage("predict"))?;
        match task {
            Task::Link => links = Some(path),
            Task::Unlink => unlinks = Some(path),
        }
    }

    let factors = out.join("factors");
    state.save(&factors, &hp).map_err(|e| e.at_stage("factor"))?;

    let mut meta = cfg.to_config_text();
    let objective = state.objective_trace.last().copied().unwrap_or(f64::NAN);
    let _ = writeln!(meta, "# nodes = {}", seq.node_count());
    let _ = writeln!(meta, "# snapshots = {}", seq.len());
    let _ = writeln!(meta, "# iters_run = {}", state.iters_run);
    let _ = writeln!(meta, "# converged = {}", state.converged);
    let _ = writeln!(meta, "# final_objective = {objective:e}");
    let metadata = out.join("run_meta.txt");
    write_file(&metadata, &meta)?;
    Ok(PredictOutcome {
        links,
        unlinks,
        factors,
        metadata,
        iters_run: state.iters_run,
        converged: state.converged,
    })
}

/// What `cmd_evaluate` produced; failures are per (task, method).
#[derive(Debug)]
pub struct EvaluateOutcome {
    pub reports: Vec<MetricReport>,
    pub failures: Vec<(Task, String, Error)>,
    pub metrics_csv: PathBuf,
    pub metrics_json: PathBuf,
    pub trials_csv: PathBuf,
    pub table: PathBuf,
}

/// Methods as rows, `task AUC` / `task AP` as columns.
pub fn render_table(dataset: &str, reports: &[MetricReport], tasks: &[Task]) -> String {
    let mut methods: Vec<&str> = Vec::new();
    for r in reports {
        if !methods.contains(&r.method.as_str()) {
            methods.push(&r.method);
        }
    }
    let mut out = format!("dataset: {dataset}\n{:<8}", "method");
    for t in tasks {
        let _ = write!(out, " {:>12} {:>12}", format!("{t}_auc"), format!("{t}_ap"));
    }
    out.push('\n');
    for m in methods {
        let _ = write!(out, "{m:<8}");
        for &t in tasks {
            match reports.iter().find(|r| r.method == m && r.task == t) {
                Some(r) => {
                    let _ = write!(out, " {:>12.4} {:>12.4}", r.auc, r.ap);
                }
                None => {
                    let _ = write!(out, " {:>12} {:>12}", "-", "-");
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Evaluates every configured method on every selected task and writes
/// `metrics.csv`, `metrics.json`, `trials.csv` and `table.txt`.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<EvaluateOutcome> {
    cfg.validate()?;
    let seq = load_sequence(&cfg.snapshot_dir).map_err(|e| e.at_stage("load"))?;
    let dataset = cfg.dataset_label();
    let tasks = cfg.task.tasks();
    let opts = EvalOptions {
        trials: cfg.trials,
        base_seed: cfg.hyper.seed,
        retrain_per_trial: cfg.retrain,
    };
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for &task in &tasks {
        for name in &cfg.methods {
            let predictor = predictor_for(name, cfg)?;
            info!("evaluating {name} on {task}");
            match evaluate_with(&seq, predictor.as_ref(), task, &opts) {
                Ok(r) => reports.push(r),
                Err(e) => failures.push((task, name.clone(), e.at_stage("evaluate"))),
            }
        }
    }

    let out = &cfg.output_dir;
    create_dir(out)?;
    let mut csv = format!("{}\n", MetricReport::CSV_HEADER);
    let mut trials = String::from("dataset,task,method,trial,seed,auc,ap\n");
    for r in &reports {
        let _ = writeln!(csv, "{}", r.csv_row(&dataset));
        for (k, t) in r.per_trial.iter().enumerate() {
            let _ = writeln!(trials, "{dataset},{},{},{},{},{},{}", r.task, r.method, k + 1, t.sample_seed, t.auc, t.ap);
        }
        let _ = writeln!(trials, "{dataset},{},{},mean,{},{},{}", r.task, r.method, r.base_seed, r.auc, r.ap);
    }
    let metrics_csv = out.join("metrics.csv");
    write_file(&metrics_csv, &csv)?;
    let trials_csv = out.join("trials.csv");
    write_file(&trials_csv, &trials)?;
    let metrics_json = out.join("metrics.json");
    let json = serde_json::to_string_pretty(&reports).expect("reports serialize");
    write_file(&metrics_json, &(json + "\n"))?;
    let mut table_text = render_table(&dataset, &reports, &tasks);
    for (task, name, e) in &failures {
        let _ = writeln!(table_text, "failed: {name} on {task}: {e}");
    }
    let table = out.join("table.txt");
    write_file(&table, &table_text)?;
    write_file(&out.join("run_meta.txt"), &cfg.to_config_text())?;
    Ok(EvaluateOutcome {
        reports,
        failures,
        metrics_csv,
        metrics_json,
        trials_csv,
        table,
    })
}
