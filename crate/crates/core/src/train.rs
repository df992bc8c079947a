//! Hybrid training: statevector forward passes inside a COBYLA loop.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cobyla::{cobyla_minimize, CobylaConfig};
use crate::compress::FeatureVector;
use crate::dsp::Class;
use crate::error::{invalid, Error, Result};
use crate::qcnn::{class_from_output, Qcnn, QcnnParams, PARAM_COUNT};

/// One labelled feature vector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub features: FeatureVector,
    pub label: Class,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    rows: Vec<Sample>,
}

impl Dataset {
    pub fn new(rows: Vec<Sample>) -> Result<Self> {
        if rows.is_empty() {
            return invalid("dataset is empty");
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Sample] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn count(&self, class: Class) -> usize {
        self.rows.iter().filter(|r| r.label == class).count()
    }

    pub fn has_both_classes(&self) -> bool {
        Class::ALL.iter().all(|&c| self.count(c) > 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    /// Objective evaluations.
    pub max_iter: usize,
    pub rhobeg: f64,
    pub rhoend: f64,
    pub seed: u64,
    pub init_scale: f64,
    /// Rows per parallel work unit. Does not affect results.
    pub chunk_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            max_iter: 200,
            rhobeg: 0.01,
            rhoend: 1e-6,
            seed: 42,
            init_scale: std::f64::consts::PI,
            chunk_size: 16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub iter: usize,
    pub loss: f64,
    pub train_acc: f64,
}

/// Per-evaluation trace. Each record carries the best loss seen so far and the
/// training accuracy at that best point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainHistory {
    pub records: Vec<HistoryRecord>,
}

/// Evaluation summary; S3 is the positive class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub loss: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    pub n_rows: usize,
}

/// Readout values for every row, in row order.
fn outputs(model: &Qcnn, data: &Dataset, params: &QcnnParams, chunk: usize) -> Result<Vec<f64>> {
    let per_chunk: Vec<Result<Vec<f64>>> = data
        .rows
        .par_chunks(chunk.max(1))
        .map(|rows| rows.iter().map(|r| model.forward(&r.features, params)).collect())
        .collect();
    let mut out = Vec::with_capacity(data.len());
    for c in per_chunk {
        out.extend(c?);
    }
    Ok(out)
}

/// Sequential sums keep the result independent of thread count.
fn summarize(data: &Dataset, zs: &[f64]) -> (f64, f64) {
    let mut sq = 0.0;
    let mut hits = 0usize;
    for (row, &z) in data.rows.iter().zip(zs) {
        sq += (z - row.label.target()).powi(2);
        hits += usize::from(class_from_output(z) == row.label);
    }
    let n = data.len() as f64;
    (sq / n, hits as f64 / n)
}

/// Mean squared error between readout and ±1 labels.
pub fn loss(data: &Dataset, params: &QcnnParams) -> Result<f64> {
    let zs = outputs(&Qcnn::new(), data, params, TrainConfig::default().chunk_size)?;
    Ok(summarize(data, &zs).0)
}

pub fn evaluate(data: &Dataset, params: &QcnnParams) -> Result<Metrics> {
    let zs = outputs(&Qcnn::new(), data, params, TrainConfig::default().chunk_size)?;
    let (loss, accuracy) = summarize(data, &zs);
    let mut m = Metrics {
        accuracy,
        loss,
        tp: 0,
        fp: 0,
        fn_: 0,
        tn: 0,
        n_rows: data.len(),
    };
    for (row, &z) in data.rows.iter().zip(&zs) {
        match (row.label, class_from_output(z)) {
            (Class::S3, Class::S3) => m.tp += 1,
            (Class::Murmur, Class::S3) => m.fp += 1,
            (Class::S3, Class::Murmur) => m.fn_ += 1,
            (Class::Murmur, Class::Murmur) => m.tn += 1,
        }
    }
    Ok(m)
}

/// Seeded uniform draw in `[-scale, scale]`.
pub fn init_params(seed: u64, n: usize, scale: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| if scale == 0.0 { 0.0 } else { rng.gen_range(-scale..=scale) })
        .collect()
}

/// Fits the QCNN to `train_set`, returning the best parameters seen.
pub fn train(train_set: &Dataset, cfg: &TrainConfig) -> Result<(QcnnParams, TrainHistory)> {
    if !train_set.has_both_classes() {
        return invalid("training set needs both classes");
    }
    let model = Qcnn::new();
    let x0 = init_params(cfg.seed, PARAM_COUNT, cfg.init_scale);
    let mut history = TrainHistory::default();
    let mut best = (f64::INFINITY, 0.0);
    let mut failure: Option<Error> = None;

    let objective = |x: &[f64]| -> f64 {
        let params = match QcnnParams::new(x.to_vec()) {
            Ok(p) => p,
            Err(e) => {
                failure.get_or_insert(e);
                return f64::NAN;
            }
        };
        match outputs(&model, train_set, &params, cfg.chunk_size) {
            Ok(zs) => {
                let (l, acc) = summarize(train_set, &zs);
                if l < best.0 {
                    best = (l, acc);
                }
                history.records.push(HistoryRecord {
                    iter: history.records.len() + 1,
                    loss: best.0,
                    train_acc: best.1,
                });
                l
            }
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };
    let ocfg = CobylaConfig {
        rhobeg: cfg.rhobeg,
        rhoend: cfg.rhoend,
        max_evals: cfg.max_iter,
    };
    let result = cobyla_minimize(objective, &x0, &ocfg);
    if let Some(e) = failure {
        return Err(e);
    }
    let result = result?;
    Ok((QcnnParams::new(result.x)?, history))
}

/// Stratified, seeded split. Each class contributes `floor(n · fraction)`
/// rows (at least one, at most `n - 1`) to the test side.
pub fn split_dataset(rows: &[Sample], test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return invalid(format!("test fraction {test_fraction} outside (0, 1)"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_idx = Vec::new();
    for class in Class::ALL {
        let mut idx: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].label == class).collect();
        if idx.len() < 2 {
            return invalid(format!("class {class} has {} row(s), need at least 2", idx.len()));
        }
        idx.shuffle(&mut rng);
        let k = ((idx.len() as f64 * test_fraction).floor() as usize).clamp(1, idx.len() - 1);
        test_idx.extend_from_slice(&idx[..k]);
    }
    test_idx.sort_unstable();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        if test_idx.binary_search(&i).is_ok() {
            test.push(*row);
        } else {
            train.push(*row);
        }
    }
    Ok((Dataset::new(train)?, Dataset::new(test)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(v: f64) -> FeatureVector {
        FeatureVector::new(&[v; 8]).unwrap()
    }

    fn rows(per_class: usize) -> Vec<Sample> {
        (0..per_class)
            .flat_map(|i| {
                let f = fv(i as f64 / per_class as f64);
                [
                    Sample { features: f, label: Class::S3 },
                    Sample { features: f, label: Class::Murmur },
                ]
            })
            .collect()
    }

    #[test]
    fn empty_dataset_rejected() {
        assert!(Dataset::new(vec![]).is_err());
    }

    #[test]
    fn loss_bounds() {
        let data = Dataset::new(rows(5)).unwrap();
        let p = QcnnParams::new(init_params(3, 60, 1.0)).unwrap();
        let l = loss(&data, &p).unwrap();
        assert!((0.0..=4.0).contains(&l));
    }

    #[test]
    fn init_params_contract() {
        assert_eq!(init_params(7, 60, 1.0), init_params(7, 60, 1.0));
        assert!(init_params(7, 60, 0.0).iter().all(|&v| v == 0.0));
        assert_ne!(init_params(1, 60, 1.0), init_params(2, 60, 1.0));
        assert!(init_params(9, 60, 0.5).iter().all(|v| v.abs() <= 0.5));
    }

    #[test]
    fn split_counts() {
        let r = rows(20);
        let (train, test) = split_dataset(&r, 0.3, 5).unwrap();
        assert_eq!(test.count(Class::S3), 6);
        assert_eq!(test.count(Class::Murmur), 6);
        assert_eq!(train.len() + test.len(), 40);
        let again = split_dataset(&r, 0.3, 5).unwrap();
        assert_eq!(again.1, test);
        assert!(split_dataset(&r, 0.0, 5).is_err());
        assert!(split_dataset(&r, 1.0, 5).is_err());
        assert!(split_dataset(&rows(1), 0.5, 5).is_err());
    }

    #[test]
    fn single_class_training_rejected() {
        let only = Dataset::new(vec![Sample { features: fv(0.5), label: Class::S3 }]).unwrap();
        assert!(train(&only, &TrainConfig::default()).is_err());
    }

    #[test]
    fn one_evaluation_one_record() {
        let data = Dataset::new(rows(4)).unwrap();
        let cfg = TrainConfig {
            max_iter: 1,
            ..TrainConfig::default()
        };
        let (params, hist) = train(&data, &cfg).unwrap();
        assert_eq!(hist.records.len(), 1);
        assert_eq!(params.as_slice(), init_params(cfg.seed, 60, cfg.init_scale).as_slice());
    }
}
