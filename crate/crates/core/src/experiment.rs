//! End-to-end experiment: load, scale, window, train the level-0 models,
//! fit the combiners on validation predictions, evaluate on the test split
//! and write the report, prediction series, comparison table and plot data.
//!
//! Every output is a pure function of the config, the data and the seeds, so
//! repeated runs produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::dataset::{self, LoadedDataset, ScalerParams, Split, SplitSpec, WindowAssignment, WindowSample};
use crate::ensemble::{self, Level0Predictions, MetaConfig};
use crate::error::{Error, Result};
use crate::metrics::{self, EvalReport, ExternalColumn};
use crate::sentiment::{self, Lexicon};
use crate::training::{self, save_model, CellKind, ModelConfig, SequenceModel, StoredModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Lstm,
    Gru,
    Averaging,
    WeightedAverage,
    Blending,
}

impl ModelName {
    pub const ALL: [ModelName; 5] = [
        ModelName::Lstm,
        ModelName::Gru,
        ModelName::Averaging,
        ModelName::WeightedAverage,
        ModelName::Blending,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::Lstm => "lstm",
            ModelName::Gru => "gru",
            ModelName::Averaging => "averaging",
            ModelName::WeightedAverage => "weighted_average",
            ModelName::Blending => "blending",
        }
    }

    /// Column heading used in the comparison table.
    pub fn display_name(self) -> &'static str {
        match self {
            ModelName::Lstm => "LSTM",
            ModelName::Gru => "GRU",
            ModelName::Averaging => "Averaging",
            ModelName::WeightedAverage => "Weighted Avg",
            ModelName::Blending => "Blending",
        }
    }

    fn is_combiner(self) -> bool {
        !matches!(self, ModelName::Lstm | ModelName::Gru)
    }
}

impl fmt::Display for ModelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelName::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| {
                let names: Vec<_> = ModelName::ALL.iter().map(|m| m.as_str()).collect();
                Error::InvalidArgument(format!("unknown model `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

/// Parses a comma-separated model list such as `lstm,blending`.
pub fn parse_model_list(s: &str) -> Result<Vec<ModelName>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataSource {
    /// A ready six-column `date,wsj,reuters,cnbc,fortune,adj_close` file.
    Dataset { path: PathBuf },
    /// Raw `date,source,title` headlines scored here and joined with a
    /// `date,adj_close` price file. Without a lexicon path the bundled one is used.
    Headlines {
        headlines: PathBuf,
        prices: PathBuf,
        #[serde(default)]
        lexicon: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalerFit {
    /// Min and max from training-range prices only, so no test information leaks.
    #[default]
    Train,
    /// Min and max over the whole series.
    Full,
}

fn default_models() -> Vec<ModelName> {
    ModelName::ALL.to_vec()
}

fn default_window() -> usize {
    dataset::DEFAULT_WINDOW
}

fn default_gru() -> ModelConfig {
    ModelConfig {
        seed: 1,
        ..ModelConfig::gru()
    }
}

fn default_meta() -> MetaConfig {
    MetaConfig {
        seed: 2,
        ..MetaConfig::default()
    }
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// A JSON experiment description. Relative paths are resolved against the
/// directory of the config file. The `lstm` and `gru` sections always build
/// their named cell kind, whatever `cell_kind` they carry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    #[serde(default)]
    pub split: SplitSpec,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub split_mode: WindowAssignment,
    #[serde(default)]
    pub scaler_fit: ScalerFit,
    #[serde(default)]
    pub lstm: ModelConfig,
    #[serde(default = "default_gru")]
    pub gru: ModelConfig,
    #[serde(default = "default_meta")]
    pub meta: MetaConfig,
    #[serde(default = "default_models")]
    pub models: Vec<ModelName>,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Extra table columns with externally reported numbers.
    #[serde(default)]
    pub external: Vec<ExternalColumn>,
    /// Also write the trained models as JSON under `models/`.
    #[serde(default)]
    pub save_models: bool,
    #[serde(skip)]
    base_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(data: DataSource) -> Self {
        ExperimentConfig {
            data,
            split: SplitSpec::default(),
            window: default_window(),
            split_mode: WindowAssignment::default(),
            scaler_fit: ScalerFit::default(),
            lstm: ModelConfig::lstm(),
            gru: default_gru(),
            meta: default_meta(),
            models: default_models(),
            output_dir: default_output(),
            external: Vec::new(),
            save_models: false,
            base_dir: None,
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Error::Data {
            path: path.display().to_string(),
            message: format!("invalid experiment config: {e}"),
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// Seeds the three trained models from one number: LSTM `s`, GRU `s + 1`,
    /// meta-learner `s + 2`.
    pub fn set_seed(&mut self, seed: u64) {
        self.lstm.seed = seed;
        self.gru.seed = seed.wrapping_add(1);
        self.meta.seed = seed.wrapping_add(2);
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(base) if p.is_relative() => base.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    fn input_paths(&self) -> Vec<PathBuf> {
        match &self.data {
            DataSource::Dataset { path } => vec![self.resolve(path)],
            DataSource::Headlines {
                headlines,
                prices,
                lexicon,
            } => {
                let mut v = vec![self.resolve(headlines), self.resolve(prices)];
                v.extend(lexicon.iter().map(|l| self.resolve(l)));
                v
            }
        }
    }

    /// Selected models, deduplicated, in canonical order.
    pub fn model_set(&self) -> Vec<ModelName> {
        let mut v = self.models.clone();
        v.sort();
        v.dedup();
        v
    }

    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::config("models", "must select at least one model"));
        }
        if self.window < 1 {
            return Err(Error::config("window", "must be at least 1"));
        }
        self.split.validate()?;
        self.lstm.validate()?;
        self.gru.validate()?;
        self.meta.validate()?;
        let out = self.output_path();
        if self.input_paths().iter().any(|p| p == &out) {
            return Err(Error::config("output_dir", "must differ from every input path"));
        }
        Ok(())
    }

    fn sub_model_config(&self, kind: CellKind) -> ModelConfig {
        let base = match kind {
            CellKind::Lstm => &self.lstm,
            CellKind::Gru => &self.gru,
        };
        ModelConfig {
            cell_kind: kind,
            ..base.clone()
        }
    }
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Clone, Debug, Default)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub models: Option<Vec<ModelName>>,
    pub output_dir: Option<PathBuf>,
    pub window: Option<usize>,
    pub split_mode: Option<WindowAssignment>,
}

impl RunOverrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            cfg.set_seed(s);
        }
        if let Some(m) = &self.models {
            cfg.models = m.clone();
        }
        if let Some(o) = &self.output_dir {
            // taken relative to the working directory, not the config file
            cfg.output_dir = std::path::absolute(o).unwrap_or_else(|_| o.clone());
        }
        if let Some(w) = self.window {
            cfg.window = w;
        }
        if let Some(m) = self.split_mode {
            cfg.split_mode = m;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub name: ModelName,
    pub metrics: EvalReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub name: ModelName,
    pub epochs: usize,
    pub first_loss: f64,
    pub final_loss: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleCounts {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

/// Test-split series: one entry per target date.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionSeries {
    pub dates: Vec<NaiveDate>,
    pub prev_actual: Vec<f64>,
    pub actual: Vec<f64>,
    pub predicted: BTreeMap<ModelName, Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub dropped_null_rows: usize,
    pub scaler: ScalerParams,
    pub samples: SampleCounts,
    pub training: Vec<TrainingSummary>,
    /// Weighted-average weights in `[lstm, gru]` order, when that model ran.
    pub weights: Option<Vec<f64>>,
    pub results: Vec<ModelResult>,
    pub series: PredictionSeries,
}

impl RunReport {
    pub fn result(&self, name: ModelName) -> Option<&EvalReport> {
        self.results.iter().find(|r| r.name == name).map(|r| &r.metrics)
    }

    pub fn table(&self) -> String {
        let mut cols: Vec<ExternalColumn> = self
            .results
            .iter()
            .map(|r| ExternalColumn::from((r.name.display_name(), &r.metrics)))
            .collect();
        cols.extend(self.config.external.iter().cloned());
        metrics::format_table(&cols)
    }
}

pub const REPORT_FILE: &str = "report.json";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const TABLE_FILE: &str = "table.txt";
pub const PLOT_SERIES_FILE: &str = "plot_series.csv";
pub const PLOT_METRICS_FILE: &str = "plot_metrics.csv";

/// Loads the configured data source into cleaned, date-sorted records.
pub fn load_data(cfg: &ExperimentConfig) -> Result<LoadedDataset> {
    match &cfg.data {
        DataSource::Dataset { path } => dataset::load_csv(cfg.resolve(path)),
        DataSource::Headlines {
            headlines,
            prices,
            lexicon,
        } => {
            let lex = match lexicon {
                Some(p) => sentiment::parse_lexicon(cfg.resolve(p))?,
                None => Lexicon::reference(),
            };
            let days = sentiment::score_headlines_csv(cfg.resolve(headlines), &lex)?;
            let prices = sentiment::load_prices(cfg.resolve(prices))?;
            let mut buf = Vec::new();
            sentiment::write_scored_csv(&days, Some(&prices), &mut buf)?;
            dataset::read_csv(buf.as_slice(), "<scored headlines>")
        }
    }
}

fn fit_scaler(cfg: &ExperimentConfig, data: &LoadedDataset) -> Result<ScalerParams> {
    let prices: Vec<f64> = data
        .records
        .iter()
        .filter(|r| cfg.scaler_fit == ScalerFit::Full || r.date <= cfg.split.train.end)
        .map(|r| r.adj_close)
        .collect();
    ScalerParams::fit(&prices)
}

fn train_level0(
    cfg: &ExperimentConfig,
    train: &[WindowSample],
    kinds: &[CellKind],
) -> Result<Vec<(SequenceModel, training::TrainTrace)>> {
    let jobs: Vec<Result<(SequenceModel, training::TrainTrace)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = kinds
            .iter()
            .map(|&kind| {
                let mc = cfg.sub_model_config(kind);
                scope.spawn(move || {
                    let model = training::build_model(&mc, dataset::FEATURE_COUNT)?;
                    training::train(model, train)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("training thread panicked"))
            .collect()
    });
    jobs.into_iter().collect()
}

struct Outputs {
    report: RunReport,
    stored: Vec<(String, StoredModel)>,
}

fn execute(cfg: &ExperimentConfig) -> Result<Outputs> {
    let stage = |s: &'static str| move |e: Error| e.in_stage(s);
    cfg.validate().map_err(stage("config"))?;
    let models = cfg.model_set();

    let data = load_data(cfg).map_err(stage("load"))?;
    let scaler = fit_scaler(cfg, &data).map_err(stage("scale"))?;
    let windows = dataset::make_windows(&data.records, cfg.window, &cfg.split, cfg.split_mode, &scaler)
        .map_err(stage("window"))?;
    for split in Split::ALL {
        if windows.get(split).is_empty() {
            return Err(Error::InvalidArgument(format!("no samples in the {split} split")).in_stage("window"));
        }
    }

    let needs_both = models.iter().any(|m| m.is_combiner());
    let kinds: Vec<CellKind> = [(ModelName::Lstm, CellKind::Lstm), (ModelName::Gru, CellKind::Gru)]
        .into_iter()
        .filter(|(n, _)| needs_both || models.contains(n))
        .map(|(_, k)| k)
        .collect();
    log::info!("training {kinds:?} on {} samples", windows.train.len());
    let trained = train_level0(cfg, &windows.train, &kinds).map_err(stage("train"))?;

    let mut stored = Vec::new();
    let mut training = Vec::new();
    let mut val_cols = Vec::new();
    let mut test_cols: BTreeMap<ModelName, Vec<f64>> = BTreeMap::new();
    for (kind, (model, trace)) in kinds.iter().zip(&trained) {
        let name = match kind {
            CellKind::Lstm => ModelName::Lstm,
            CellKind::Gru => ModelName::Gru,
        };
        training.push(TrainingSummary {
            name,
            epochs: trace.epoch_losses.len(),
            first_loss: trace.epoch_losses[0],
            final_loss: trace.final_loss(),
        });
        val_cols.push(model.predict(&windows.validation).map_err(stage("predict"))?);
        test_cols.insert(name, model.predict(&windows.test).map_err(stage("predict"))?);
        stored.push((name.as_str().to_string(), StoredModel::Sequence(model.clone())));
    }

    let mut weights = None;
    if needs_both {
        let combine = stage("combine");
        let labels = vec!["lstm".to_string(), "gru".to_string()];
        let val_targets: Vec<f64> = windows.validation.iter().map(|s| s.target).collect();
        let val_dates = windows.validation.iter().map(|s| s.target_date).collect();
        let test_dates = windows.test.iter().map(|s| s.target_date).collect();
        let l0_val = Level0Predictions::from_columns(&val_cols, labels.clone(), val_dates).map_err(&combine)?;
        let l0_test = Level0Predictions::from_columns(
            &[test_cols[&ModelName::Lstm].clone(), test_cols[&ModelName::Gru].clone()],
            labels,
            test_dates,
        )
        .map_err(&combine)?;
        if models.contains(&ModelName::Averaging) {
            test_cols.insert(ModelName::Averaging, ensemble::average_predict(&l0_test));
        }
        if models.contains(&ModelName::WeightedAverage) {
            let w = ensemble::weighted_average_fit(&l0_val, &val_targets).map_err(&combine)?;
            test_cols.insert(
                ModelName::WeightedAverage,
                ensemble::weighted_average_predict(&w, &l0_test).map_err(&combine)?,
            );
            weights = Some(w.as_slice().to_vec());
            stored.push(("weighted_average".into(), StoredModel::WeightedAverage(w)));
        }
        if models.contains(&ModelName::Blending) {
            let meta = ensemble::blend_fit(&l0_val, &val_targets, &cfg.meta).map_err(&combine)?;
            test_cols.insert(
                ModelName::Blending,
                ensemble::blend_predict(&meta, &l0_test).map_err(&combine)?,
            );
            stored.push(("blending_meta".into(), StoredModel::MetaLearner(meta)));
        }
    }

    let evaluate = stage("evaluate");
    let actual: Vec<f64> = windows.test.iter().map(|s| s.target_close).collect();
    let prev_actual: Vec<f64> = windows.test.iter().map(|s| s.prev_actual_close).collect();
    let mut predicted = BTreeMap::new();
    let mut results = Vec::new();
    for name in &models {
        let scaled = &test_cols[name];
        let prices: Vec<f64> = scaled.iter().map(|&p| scaler.unscale(p)).collect();
        if prices.iter().any(|p| !p.is_finite()) {
            return Err(evaluate(Error::InvalidArgument(format!(
                "{name} produced a non-finite prediction"
            ))));
        }
        let report = metrics::evaluate(&actual, &prices, &prev_actual).map_err(&evaluate)?;
        results.push(ModelResult {
            name: *name,
            metrics: report,
        });
        predicted.insert(*name, prices);
    }

    let (train_n, val_n, test_n) = windows.counts();
    let report = RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        dropped_null_rows: data.dropped_null,
        scaler,
        samples: SampleCounts {
            train: train_n,
            validation: val_n,
            test: test_n,
        },
        training,
        weights,
        results,
        series: PredictionSeries {
            dates: windows.test.iter().map(|s| s.target_date).collect(),
            prev_actual,
            actual,
            predicted,
        },
    };
    Ok(Outputs { report, stored })
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn predictions_csv(report: &RunReport) -> Result<Vec<u8>> {
    let s = &report.series;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["date".to_string(), "prev_actual".into(), "actual".into()];
    header.extend(s.predicted.keys().map(|m| m.to_string()));
    w.write_record(&header)?;
    for i in 0..s.dates.len() {
        let mut row = vec![
            s.dates[i].to_string(),
            s.prev_actual[i].to_string(),
            s.actual[i].to_string(),
        ];
        row.extend(s.predicted.values().map(|v| v[i].to_string()));
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| Error::io("<csv buffer>", e.into_error()))
}

/// Plot-ready CSVs: a long-format `date,series,value` line chart of actual
/// and predicted test prices, and a `metric,model,value` bar chart.
pub fn plot_data(report: &RunReport) -> Result<(Vec<u8>, Vec<u8>)> {
    let s = &report.series;
    let mut lines = csv::Writer::from_writer(Vec::new());
    lines.write_record(["date", "series", "value"])?;
    for (i, d) in s.dates.iter().enumerate() {
        let date = d.to_string();
        lines.write_record([date.as_str(), "actual", &s.actual[i].to_string()])?;
        for (name, v) in &s.predicted {
            lines.write_record([date.as_str(), name.as_str(), &v[i].to_string()])?;
        }
    }
    let mut bars = csv::Writer::from_writer(Vec::new());
    bars.write_record(["metric", "model", "value"])?;
    for (metric, get) in [
        ("mse", (|r: &EvalReport| r.mse) as fn(&EvalReport) -> f64),
        ("precision", |r| r.precision),
        ("recall", |r| r.recall),
        ("f1", |r| r.f1),
        ("mda", |r| r.mda),
    ] {
        for r in &report.results {
            bars.write_record([metric, r.name.as_str(), &get(&r.metrics).to_string()])?;
        }
    }
    let done = |w: csv::Writer<Vec<u8>>| w.into_inner().map_err(|e| Error::io("<csv buffer>", e.into_error()));
    Ok((done(lines)?, done(bars)?))
}

/// Writes the plot CSVs into `dir` and returns their paths.
pub fn emit_plot_data(report: &RunReport, dir: &Path) -> Result<Vec<PathBuf>> {
    let (lines, bars) = plot_data(report)?;
    let a = dir.join(PLOT_SERIES_FILE);
    let b = dir.join(PLOT_METRICS_FILE);
    write_atomic(&a, &lines)?;
    write_atomic(&b, &bars)?;
    Ok(vec![a, b])
}

fn write_outputs(outputs: &Outputs, save_models: bool, dir: &Path, written: &mut Vec<PathBuf>) -> Result<()> {
    let report = &outputs.report;
    let mut json = serde_json::to_vec_pretty(report)?;
    json.push(b'\n');
    let files = [
        (REPORT_FILE, json),
        (PREDICTIONS_FILE, predictions_csv(report)?),
        (TABLE_FILE, report.table().into_bytes()),
    ];
    for (name, bytes) in files {
        let p = dir.join(name);
        write_atomic(&p, &bytes)?;
        written.push(p);
    }
    written.extend(emit_plot_data(report, dir)?);
    if save_models {
        let models_dir = dir.join("models");
        fs::create_dir_all(&models_dir).map_err(|e| Error::io(&models_dir, e))?;
        for (name, model) in &outputs.stored {
            let p = models_dir.join(format!("{name}.json"));
            save_model(model, &p)?;
            written.push(p);
        }
    }
    Ok(())
}

/// Runs the whole pipeline and writes its outputs to `cfg.output_dir`.
/// On failure the error names the stage, and files written so far are removed.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    let outputs = execute(cfg)?;
    let dir = cfg.output_path();
    let existed = dir.exists();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e).in_stage("write"))?;
    let mut written = Vec::new();
    if let Err(e) = write_outputs(&outputs, cfg.save_models, &dir, &mut written) {
        for p in &written {
            let _ = fs::remove_file(p);
        }
        if cfg.save_models {
            let _ = fs::remove_dir(dir.join("models"));
        }
        if !existed {
            let _ = fs::remove_dir(&dir);
        }
        return Err(e.in_stage("write"));
    }
    Ok(outputs.report)
}

/// Runs the pipeline without writing anything.
pub fn run_in_memory(cfg: &ExperimentConfig) -> Result<RunReport> {
    execute(cfg).map(|o| o.report)
}

/// Scores a headlines CSV and writes the six-column dataset, joined by date
/// with `prices` when given.
pub fn score_command(headlines: &Path, lexicon: Option<&Path>, prices: Option<&Path>, out: &Path) -> Result<usize> {
    let lex = match lexicon {
        Some(p) => sentiment::parse_lexicon(p).map_err(|e| e.in_stage("lexicon"))?,
        None => Lexicon::reference(),
    };
    let days = sentiment::score_headlines_csv(headlines, &lex).map_err(|e| e.in_stage("score"))?;
    let prices = prices
        .map(sentiment::load_prices)
        .transpose()
        .map_err(|e| e.in_stage("prices"))?;
    let mut buf = Vec::new();
    sentiment::write_scored_csv(&days, prices.as_ref(), &mut buf).map_err(|e| e.in_stage("write"))?;
    write_atomic(out, &buf).map_err(|e| e.in_stage("write"))?;
    Ok(prices.map_or(days.len(), |p| p.len()))
}

/// Metrics recomputed from a predictions CSV (`date,prev_actual,actual,<model>...`).
pub fn evaluate_predictions_csv(path: &Path) -> Result<Vec<(String, EvalReport)>> {
    let origin = path.display().to_string();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.len() < 4 || header[..3] != ["date", "prev_actual", "actual"] {
        return Err(Error::Data {
            path: origin,
            message: "header must start with `date,prev_actual,actual` followed by model columns".into(),
        });
    }
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); header.len() - 1];
    for row in rdr.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        for (k, col) in cols.iter_mut().enumerate() {
            let raw = &row[k + 1];
            col.push(raw.trim().parse().map_err(|_| Error::Parse {
                path: origin.clone(),
                line,
                message: format!("column `{}`: not a number: `{raw}`", header[k + 1]),
            })?);
        }
    }
    let (prev, actual) = (&cols[0], &cols[1]);
    header[3..]
        .iter()
        .zip(&cols[2..])
        .map(|(name, pred)| Ok((name.clone(), metrics::evaluate(actual, pred, prev)?)))
        .collect()
}
