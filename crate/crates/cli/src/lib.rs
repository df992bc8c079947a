//! Batch commands behind the `heartq` binary.
//!
//! Every command is a plain function so tests can drive the same code path as
//! the executable. Failures carry the process exit code: 1 for usage or
//! validation problems, 2 for IO or environment problems.

use std::fmt;
use std::path::{Path, PathBuf};

use heartq::compress::compress_pipeline;
use heartq::dsp::{resample, segment_by_cycles, synthesize_pcg, MIN_CYCLE_S, SEGMENT_RATE};
use heartq::io::{self, ManifestEntry};
use heartq::qcnn::ModelDocument;
use heartq::timefreq::to_model_image;
use heartq::train::{self, Dataset, Metrics, Sample, TrainConfig};
use heartq::{Class, FeatureMethod};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub mod plot;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn with_context(e: heartq::Error, what: &str) -> Self {
        let message = format!("{what}: {e}");
        if e.is_io() {
            Self::io(message)
        } else {
            Self::usage(message)
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(what: &str, path: &Path, e: impl fmt::Display) -> CliError {
    CliError::io(format!("{what} {}: {e}", path.display()))
}

/// Feature files get a sidecar naming the front-end that produced them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub feature_method: FeatureMethod,
}

pub fn meta_path(features: &Path) -> PathBuf {
    let mut name = features.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

fn read_meta(features: &Path) -> CliResult<Option<FeatureMeta>> {
    let p = meta_path(features);
    if !p.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&p).map_err(|e| io_err("reading", &p, e))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| CliError::usage(format!("bad metadata {}: {e}", p.display())))
}

/// Method from the flag, else from the sidecar; the two must agree if both exist.
fn resolve_method(features: &Path, flag: Option<FeatureMethod>) -> CliResult<FeatureMethod> {
    match (flag, read_meta(features)?) {
        (Some(f), Some(m)) if f != m.feature_method => Err(CliError::usage(format!(
            "--method {f} contradicts {} recorded for {}",
            m.feature_method,
            features.display()
        ))),
        (Some(f), _) => Ok(f),
        (None, Some(m)) => Ok(m.feature_method),
        (None, None) => Err(CliError::usage(format!(
            "no feature method recorded for {}; pass --method",
            features.display()
        ))),
    }
}

#[derive(Clone, Debug)]
pub struct SynthOptions {
    pub out_dir: PathBuf,
    pub n_per_class: usize,
    pub cycles: usize,
    pub seed: u64,
}

/// Seed of the `index`-th file overall.
fn file_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(index as u64)
}

/// Writes synthetic S3 and murmur recordings plus `manifest.csv`.
pub fn cmd_synth(opts: &SynthOptions) -> CliResult<PathBuf> {
    if opts.n_per_class == 0 || opts.cycles < 2 {
        return Err(CliError::usage("need at least 1 file per class and 2 cycles per file"));
    }
    std::fs::create_dir_all(&opts.out_dir).map_err(|e| io_err("creating", &opts.out_dir, e))?;
    let mut entries = Vec::new();
    for i in 0..opts.n_per_class {
        for (k, class) in Class::ALL.into_iter().enumerate() {
            let syn = synthesize_pcg(class, opts.cycles, file_seed(opts.seed, 2 * i + k))
                .map_err(|e| CliError::with_context(e, "synthesis"))?;
            let name = format!("{}_{i:04}.wav", class.tag().to_lowercase());
            let path = opts.out_dir.join(&name);
            io::write_wav(&path, &syn.signal).map_err(|e| CliError::with_context(e, &format!("writing {name}")))?;
            entries.push(ManifestEntry {
                path: PathBuf::from(name),
                label: class,
            });
        }
    }
    let manifest = opts.out_dir.join("manifest.csv");
    let file = std::fs::File::create(&manifest).map_err(|e| io_err("creating", &manifest, e))?;
    io::write_manifest_to(file, &entries).map_err(|e| CliError::with_context(e, "writing manifest"))?;
    Ok(manifest)
}

/// Feature rows of one recording.
pub fn features_for_file(path: &Path, label: Class, method: FeatureMethod) -> heartq::Result<Vec<Sample>> {
    let signal = resample(&io::read_wav(path)?, SEGMENT_RATE)?;
    segment_by_cycles(&signal, MIN_CYCLE_S)?
        .iter()
        .map(|seg| {
            let img = to_model_image(seg, method)?;
            Ok(Sample {
                features: compress_pipeline(&img)?,
                label,
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct PreprocessOptions {
    pub manifest: PathBuf,
    pub method: FeatureMethod,
    pub out: PathBuf,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreprocessSummary {
    pub rows: usize,
    pub files_ok: usize,
    pub failures: Vec<(PathBuf, String)>,
}

/// Manifest → feature CSV. Unreadable files are skipped and reported.
pub fn cmd_preprocess(opts: &PreprocessOptions) -> CliResult<PreprocessSummary> {
    let entries = io::read_manifest(&opts.manifest).map_err(|e| CliError::with_context(e, "reading manifest"))?;
    if entries.is_empty() {
        return Err(CliError::usage("manifest lists no recordings"));
    }
    let work = || -> Vec<heartq::Result<Vec<Sample>>> {
        entries
            .par_iter()
            .map(|e| features_for_file(&e.path, e.label, opts.method))
            .collect()
    };
    let results = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::io(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (entry, res) in entries.iter().zip(results) {
        match res {
            Ok(r) => rows.extend(r),
            Err(e) => {
                log::warn!("skipping {}: {e}", entry.path.display());
                failures.push((entry.path.clone(), e.to_string()));
            }
        }
    }
    if failures.len() == entries.len() {
        return Err(CliError::io(format!("all {} recordings failed", entries.len())));
    }
    io::write_features(&opts.out, &rows).map_err(|e| CliError::with_context(e, "writing features"))?;
    let meta = serde_json::to_string_pretty(&FeatureMeta {
        feature_method: opts.method,
    })
    .expect("metadata serializes");
    let mp = meta_path(&opts.out);
    std::fs::write(&mp, meta + "\n").map_err(|e| io_err("writing", &mp, e))?;
    Ok(PreprocessSummary {
        rows: rows.len(),
        files_ok: entries.len() - failures.len(),
        failures,
    })
}

#[derive(Clone, Debug)]
pub struct TrainOptions {
    pub features: PathBuf,
    pub method: Option<FeatureMethod>,
    pub max_iter: usize,
    pub seed: u64,
    pub test_fraction: f64,
    pub out_model: PathBuf,
    pub out_history: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainReport {
    pub train: Metrics,
    pub test: Metrics,
}

fn load_rows(path: &Path) -> CliResult<Vec<Sample>> {
    let rows = io::read_features(path).map_err(|e| CliError::with_context(e, "reading features"))?;
    if rows.is_empty() {
        return Err(CliError::usage(format!("{} has no feature rows", path.display())));
    }
    Ok(rows)
}

/// Split, fit, and write the model and history files.
pub fn cmd_train(opts: &TrainOptions) -> CliResult<TrainReport> {
    let method = resolve_method(&opts.features, opts.method)?;
    let rows = load_rows(&opts.features)?;
    if Class::ALL.iter().any(|c| rows.iter().all(|r| r.label != *c)) {
        return Err(CliError::usage("training needs rows of both classes"));
    }
    let (train_set, test_set) = train::split_dataset(&rows, opts.test_fraction, opts.seed)
        .map_err(|e| CliError::with_context(e, "splitting"))?;
    let cfg = TrainConfig {
        max_iter: opts.max_iter,
        seed: opts.seed,
        ..TrainConfig::default()
    };
    let (params, history) = train::train(&train_set, &cfg).map_err(|e| CliError::with_context(e, "training"))?;
    let report = TrainReport {
        train: train::evaluate(&train_set, &params).map_err(|e| CliError::with_context(e, "evaluating"))?,
        test: train::evaluate(&test_set, &params).map_err(|e| CliError::with_context(e, "evaluating"))?,
    };

    let doc = ModelDocument::new(method, &params);
    let text = doc.to_json().map_err(|e| CliError::with_context(e, "encoding model"))?;
    std::fs::write(&opts.out_model, text).map_err(|e| io_err("writing", &opts.out_model, e))?;
    io::write_history(&opts.out_history, &history).map_err(|e| CliError::with_context(e, "writing history"))?;
    Ok(report)
}

#[derive(Clone, Debug)]
pub struct EvalOptions {
    pub features: PathBuf,
    pub model: PathBuf,
    pub method: Option<FeatureMethod>,
}

/// Scores a saved model on a feature file.
pub fn cmd_eval(opts: &EvalOptions) -> CliResult<Metrics> {
    let text = std::fs::read_to_string(&opts.model).map_err(|e| io_err("reading", &opts.model, e))?;
    let doc = ModelDocument::from_json(&text).map_err(|e| CliError::with_context(e, "loading model"))?;
    let method = resolve_method(&opts.features, opts.method)?;
    if method != doc.feature_method {
        return Err(CliError::usage(format!(
            "model was trained on {} features, {} holds {} features",
            doc.feature_method,
            opts.features.display(),
            method
        )));
    }
    let rows = load_rows(&opts.features)?;
    let data = Dataset::new(rows).map_err(|e| CliError::with_context(e, "dataset"))?;
    let params = doc.params().map_err(|e| CliError::with_context(e, "model parameters"))?;
    train::evaluate(&data, &params).map_err(|e| CliError::with_context(e, "evaluating"))
}

/// Renders a history CSV as a two-panel SVG.
pub fn cmd_plot(history: &Path, out: &Path) -> CliResult<()> {
    let file = std::fs::File::open(history).map_err(|e| io_err("opening", history, e))?;
    let hist = io::read_history_from(file).map_err(|e| CliError::with_context(e, "reading history"))?;
    if hist.records.is_empty() {
        return Err(CliError::usage(format!("{} has no records", history.display())));
    }
    std::fs::write(out, plot::render_history(&hist)).map_err(|e| io_err("writing", out, e))
}
