//! Level-1 combiners over a `p × m` matrix of level-0 predictions:
//! a blended ReLU meta-learner, plain averaging and a grid-searched
//! weighted average.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::cells::{Activation, DenseCache, DenseParams, ParamSet};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};
use crate::training::{Optimizer, OptimizerKind};

/// Level-0 predictions: one row per target date, one column per sub-model.
#[derive(Clone, Debug, PartialEq)]
pub struct Level0Predictions {
    values: Matrix,
    labels: Vec<String>,
    dates: Vec<NaiveDate>,
}

impl Level0Predictions {
    /// `columns[j]` holds sub-model `j`'s predictions.
    pub fn from_columns(columns: &[Vec<f64>], labels: Vec<String>, dates: Vec<NaiveDate>) -> Result<Self> {
        let m = columns.len();
        let p = columns.first().map_or(0, Vec::len);
        if m < 2 {
            return Err(Error::shape(
                "Level0Predictions",
                format!("need at least 2 sub-models, got {m}"),
            ));
        }
        if p < 1 {
            return Err(Error::shape("Level0Predictions", "need at least one prediction row"));
        }
        if let Some(j) = columns.iter().position(|c| c.len() != p) {
            return Err(Error::shape(
                "Level0Predictions",
                format!("column {j} has {} rows, expected {p}", columns[j].len()),
            ));
        }
        if labels.len() != m {
            return Err(Error::shape(
                "Level0Predictions",
                format!("{} labels for {m} columns", labels.len()),
            ));
        }
        if !dates.is_empty() && dates.len() != p {
            return Err(Error::shape(
                "Level0Predictions",
                format!("{} dates for {p} rows", dates.len()),
            ));
        }
        let mut values = Matrix::zeros(p, m);
        for (j, col) in columns.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "non-finite level-0 prediction at row {i}, column `{}`",
                        labels[j]
                    )));
                }
                values.set(i, j, v);
            }
        }
        Ok(Level0Predictions { values, labels, dates })
    }

    /// Convenience constructor with generic labels and no dates.
    pub fn unlabeled(columns: &[Vec<f64>]) -> Result<Self> {
        let labels = (0..columns.len()).map(|j| format!("model_{j}")).collect();
        Self::from_columns(columns, labels, Vec::new())
    }

    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn models(&self) -> usize {
        self.values.cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn matrix(&self) -> &Matrix {
        &self.values
    }
}

fn mse(pred: &[f64], target: &[f64]) -> f64 {
    pred.iter().zip(target).map(|(p, t)| (p - t).powi(2)).sum::<f64>() / pred.len() as f64
}

/// Row-wise arithmetic mean.
pub fn average_predict(level0: &Level0Predictions) -> Vec<f64> {
    let m = level0.models() as f64;
    (0..level0.rows())
        .map(|i| level0.row(i).iter().sum::<f64>() / m)
        .collect()
}

/// Convex combination weights, one per sub-model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    weights: Vec<f64>,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() || weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "weights must be finite and non-negative: {weights:?}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("weights must sum to 1, got {sum}")));
        }
        Ok(WeightVector { weights })
    }

    pub fn equal(m: usize) -> Self {
        WeightVector {
            weights: vec![1.0 / m as f64; m],
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }
}

/// Grid resolution of the weighted-average search (weights in steps of 1/100).
pub const WEIGHT_GRID_STEPS: u32 = 100;

/// Visits every composition of `total` into `parts` non-negative integers.
fn for_each_composition(total: u32, parts: usize, f: &mut impl FnMut(&[u32])) {
    fn rec(remaining: u32, slot: usize, buf: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        if slot + 1 == buf.len() {
            buf[slot] = remaining;
            f(buf);
            return;
        }
        for k in (0..=remaining).rev() {
            buf[slot] = k;
            rec(remaining - k, slot + 1, buf, f);
        }
    }
    let mut buf = vec![0; parts];
    rec(total, 0, &mut buf, f);
}

/// Searches the 0.01-step simplex grid for the weights minimising validation
/// MSE. Near-ties (within 1e-12 relative) go to the point closest to equal weights.
pub fn weighted_average_fit(level0_val: &Level0Predictions, val_targets: &[f64]) -> Result<WeightVector> {
    if val_targets.len() != level0_val.rows() {
        return Err(Error::shape(
            "weighted_average_fit",
            format!(
                "{} targets for {} prediction rows",
                val_targets.len(),
                level0_val.rows()
            ),
        ));
    }
    let m = level0_val.models();
    let uniform = 1.0 / m as f64;
    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    let mut pred = vec![0.0; level0_val.rows()];
    for_each_composition(WEIGHT_GRID_STEPS, m, &mut |ks| {
        let w: Vec<f64> = ks.iter().map(|&k| k as f64 / WEIGHT_GRID_STEPS as f64).collect();
        for (i, p) in pred.iter_mut().enumerate() {
            *p = level0_val.row(i).iter().zip(&w).map(|(x, w)| x * w).sum();
        }
        let err = mse(&pred, val_targets);
        let dist: f64 = w.iter().map(|x| (x - uniform).powi(2)).sum();
        let better = match &best {
            None => true,
            Some((best_err, best_dist, _)) => {
                let tol = 1e-12 * best_err.abs().max(f64::MIN_POSITIVE);
                err < best_err - tol || ((err - best_err).abs() <= tol && dist < *best_dist)
            }
        };
        if better {
            best = Some((err, dist, w));
        }
    });
    let (_, _, w) = best.expect("grid is non-empty");
    WeightVector::new(w)
}

pub fn weighted_average_predict(w: &WeightVector, level0: &Level0Predictions) -> Result<Vec<f64>> {
    if w.weights.len() != level0.models() {
        return Err(Error::shape(
            "weighted_average_predict",
            format!("{} weights for {} sub-models", w.weights.len(), level0.models()),
        ));
    }
    Ok((0..level0.rows())
        .map(|i| level0.row(i).iter().zip(&w.weights).map(|(x, w)| x * w).sum())
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetaConfig {
    pub hidden1: usize,
    pub hidden2: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for MetaConfig {
    fn default() -> Self {
        MetaConfig {
            hidden1: 8,
            hidden2: 4,
            epochs: 500,
            learning_rate: 1e-2,
            seed: 0,
        }
    }
}

impl MetaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden1 < 1 {
            return Err(Error::config("meta.hidden1", "must be at least 1"));
        }
        if self.hidden2 < 1 {
            return Err(Error::config("meta.hidden2", "must be at least 1"));
        }
        if self.epochs < 1 {
            return Err(Error::config("meta.epochs", "must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("meta.learning_rate", "must be positive"));
        }
        Ok(())
    }
}

/// Three dense layers: `m → h1` (ReLU), `h1 → h2` (ReLU), `h2 → 1` (identity).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaLearner {
    pub config: MetaConfig,
    pub layers: Vec<DenseParams>,
}

impl MetaLearner {
    pub fn new(inputs: usize, config: &MetaConfig) -> Result<Self> {
        config.validate()?;
        if inputs < 1 {
            return Err(Error::config("meta.inputs", "must be at least 1"));
        }
        let mut rng = Rng::new(config.seed);
        let layers = vec![
            DenseParams::init(&mut rng, inputs, config.hidden1, Activation::Relu),
            DenseParams::init(&mut rng, config.hidden1, config.hidden2, Activation::Relu),
            DenseParams::init(&mut rng, config.hidden2, 1, Activation::Identity),
        ];
        Ok(MetaLearner {
            config: config.clone(),
            layers,
        })
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].input_size()
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.len() != 3 {
            return Err(Error::shape(
                "MetaLearner",
                format!("{} layers, expected 3", self.layers.len()),
            ));
        }
        for l in &self.layers {
            l.validate()?;
        }
        for w in self.layers.windows(2) {
            if w[0].output_size() != w[1].input_size() {
                return Err(Error::shape("MetaLearner", "layer dimensions do not chain"));
            }
        }
        if self.layers[2].output_size() != 1 {
            return Err(Error::shape("MetaLearner", "final layer must output a scalar"));
        }
        Ok(())
    }

    fn forward(&self, x: &[f64]) -> (f64, Vec<DenseCache>) {
        let mut caches = Vec::with_capacity(3);
        let mut a = x.to_vec();
        for l in &self.layers {
            let (y, c) = l.forward_unchecked(&a);
            caches.push(c);
            a = y;
        }
        (a[0], caches)
    }

    pub fn predict_row(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_size() {
            return Err(Error::shape(
                "MetaLearner",
                format!("row of width {}, expected {}", x.len(), self.input_size()),
            ));
        }
        Ok(self.forward(x).0)
    }

    fn fit(&mut self, level0: &Level0Predictions, targets: &[f64]) {
        let n = level0.rows() as f64;
        let num_params: usize = self.layers.iter().map(|l| l.num_params()).sum();
        let mut opt = Optimizer::new(OptimizerKind::Adam, self.config.learning_rate, num_params);
        let mut grads: Vec<DenseParams> = self
            .layers
            .iter()
            .map(|l| DenseParams::zeros(l.input_size(), l.output_size(), l.activation))
            .collect();
        for _ in 0..self.config.epochs {
            grads.iter_mut().for_each(ParamSet::fill_zero);
            for (i, &t) in targets.iter().enumerate() {
                let (y, caches) = self.forward(level0.row(i));
                let mut d = vec![2.0 * (y - t) / n];
                for (k, l) in self.layers.iter().enumerate().rev() {
                    let mut dx = vec![0.0; l.input_size()];
                    l.backward_acc(&caches[k], &d, &mut grads[k], &mut dx);
                    d = dx;
                }
            }
            let params = self.layers.iter_mut().flat_map(|l| l.tensors_mut());
            opt.update(params, grads.iter().flat_map(|g| g.tensors()));
        }
    }
}

/// Trains the meta-learner on validation-split level-0 predictions.
pub fn blend_fit(level0_val: &Level0Predictions, val_targets: &[f64], config: &MetaConfig) -> Result<MetaLearner> {
    if val_targets.len() != level0_val.rows() {
        return Err(Error::shape(
            "blend_fit",
            format!(
                "{} targets for {} prediction rows",
                val_targets.len(),
                level0_val.rows()
            ),
        ));
    }
    if level0_val.rows() < 2 {
        return Err(Error::InvalidArgument("blend_fit needs at least 2 rows".into()));
    }
    if val_targets.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("non-finite blend target".into()));
    }
    let mut meta = MetaLearner::new(level0_val.models(), config)?;
    meta.fit(level0_val, val_targets);
    Ok(meta)
}

pub fn blend_predict(meta: &MetaLearner, level0_test: &Level0Predictions) -> Result<Vec<f64>> {
    if level0_test.models() != meta.input_size() {
        return Err(Error::shape(
            "blend_predict",
            format!(
                "{} sub-model columns, meta-learner expects {}",
                level0_test.models(),
                meta.input_size()
            ),
        ));
    }
    Ok((0..level0_test.rows())
        .map(|i| meta.forward(level0_test.row(i)).0)
        .collect())
}
