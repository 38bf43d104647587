//! Stacked recurrent sequence models trained end to end with
//! backpropagation through time.
//!
//! A model is `layers` recurrent layers of the same cell kind followed by a
//! dense identity head reading the top layer's hidden state at the final time
//! step. Dropout (inverted, one mask per layer per sample, shared across time
//! steps) is applied to each recurrent layer's output sequence during training.

mod optim;
mod persist;

pub use optim::{clip_global_norm, Optimizer, OptimizerKind, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};
pub use persist::{load_model, save_model, ModelDocument, StoredModel, MODEL_FORMAT, MODEL_FORMAT_VERSION};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cells::{
    dropout_mask, Activation, DenseCache, DenseParams, GruCache, GruParams, LstmCache, LstmParams, LstmStateGrad,
    ParamSet,
};
use crate::dataset::WindowSample;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    #[default]
    Lstm,
    Gru,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub cell_kind: CellKind,
    pub layers: usize,
    pub hidden: usize,
    pub dropout: f64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    /// Global gradient-norm clip; `None` disables clipping.
    pub clip_norm: Option<f64>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            cell_kind: CellKind::Lstm,
            layers: 4,
            hidden: 50,
            dropout: 0.2,
            epochs: 100,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            seed: 0,
            clip_norm: Some(5.0),
        }
    }
}

impl ModelConfig {
    pub fn lstm() -> Self {
        ModelConfig::default()
    }

    pub fn gru() -> Self {
        ModelConfig {
            cell_kind: CellKind::Gru,
            ..ModelConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers < 1 {
            return Err(Error::config("layers", "must be at least 1"));
        }
        if self.hidden < 1 {
            return Err(Error::config("hidden", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::config(
                "dropout",
                format!("must lie in [0, 1), got {}", self.dropout),
            ));
        }
        if self.epochs < 1 {
            return Err(Error::config("epochs", "must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config(
                "learning_rate",
                format!("must be positive, got {}", self.learning_rate),
            ));
        }
        if let Some(c) = self.clip_norm {
            if c.is_nan() || c <= 0.0 {
                return Err(Error::config("clip_norm", format!("must be positive, got {c}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RecurrentLayer {
    Lstm(LstmParams),
    Gru(GruParams),
}

impl RecurrentLayer {
    fn init(kind: CellKind, rng: &mut Rng, input: usize, hidden: usize) -> Self {
        match kind {
            CellKind::Lstm => RecurrentLayer::Lstm(LstmParams::init(rng, input, hidden)),
            CellKind::Gru => RecurrentLayer::Gru(GruParams::init(rng, input, hidden)),
        }
    }

    fn zeros_like(&self) -> Self {
        match self {
            RecurrentLayer::Lstm(p) => RecurrentLayer::Lstm(LstmParams::zeros(p.input_size(), p.hidden_size())),
            RecurrentLayer::Gru(p) => RecurrentLayer::Gru(GruParams::zeros(p.input_size(), p.hidden_size())),
        }
    }

    pub fn input_size(&self) -> usize {
        match self {
            RecurrentLayer::Lstm(p) => p.input_size(),
            RecurrentLayer::Gru(p) => p.input_size(),
        }
    }

    pub fn hidden_size(&self) -> usize {
        match self {
            RecurrentLayer::Lstm(p) => p.hidden_size(),
            RecurrentLayer::Gru(p) => p.hidden_size(),
        }
    }

    fn cell_kind(&self) -> CellKind {
        match self {
            RecurrentLayer::Lstm(_) => CellKind::Lstm,
            RecurrentLayer::Gru(_) => CellKind::Gru,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            RecurrentLayer::Lstm(p) => p.validate(),
            RecurrentLayer::Gru(p) => p.validate(),
        }
    }

    fn as_params(&self) -> &dyn ParamSet {
        match self {
            RecurrentLayer::Lstm(p) => p,
            RecurrentLayer::Gru(p) => p,
        }
    }

    fn as_params_mut(&mut self) -> &mut dyn ParamSet {
        match self {
            RecurrentLayer::Lstm(p) => p,
            RecurrentLayer::Gru(p) => p,
        }
    }

    /// Runs the layer over a whole sequence from a zero initial state.
    fn run(&self, seq: &[Vec<f64>]) -> (Vec<Vec<f64>>, LayerCaches) {
        match self {
            RecurrentLayer::Lstm(p) => {
                let hidden = p.hidden_size();
                let (mut h, mut c) = (vec![0.0; hidden], vec![0.0; hidden]);
                let mut outs = Vec::with_capacity(seq.len());
                let mut caches = Vec::with_capacity(seq.len());
                for x in seq {
                    let (next, cache) = p.forward_unchecked(x, &h, &c);
                    h = next.h;
                    c = next.c;
                    outs.push(h.clone());
                    caches.push(cache);
                }
                (outs, LayerCaches::Lstm(caches))
            }
            RecurrentLayer::Gru(p) => {
                let mut h = vec![0.0; p.hidden_size()];
                let mut outs = Vec::with_capacity(seq.len());
                let mut caches = Vec::with_capacity(seq.len());
                for x in seq {
                    let (next, cache) = p.forward_unchecked(x, &h);
                    h = next;
                    outs.push(h.clone());
                    caches.push(cache);
                }
                (outs, LayerCaches::Gru(caches))
            }
        }
    }

    /// BPTT over one sequence. `d_out[t]` is the loss gradient w.r.t. this
    /// layer's output at step `t`; returns the gradient w.r.t. its inputs.
    fn backprop(&self, caches: &LayerCaches, d_out: &[Vec<f64>], grads: &mut RecurrentLayer) -> Vec<Vec<f64>> {
        let steps = d_out.len();
        let mut d_in = vec![Vec::new(); steps];
        match (self, caches, grads) {
            (RecurrentLayer::Lstm(p), LayerCaches::Lstm(caches), RecurrentLayer::Lstm(g)) => {
                let hidden = p.hidden_size();
                let mut carry = LstmStateGrad::zeros(hidden);
                let mut dprev = LstmStateGrad::zeros(hidden);
                let mut dh = vec![0.0; hidden];
                for t in (0..steps).rev() {
                    for k in 0..hidden {
                        dh[k] = d_out[t][k] + carry.dh[k];
                    }
                    let mut dx = vec![0.0; p.input_size()];
                    p.backward_acc(&caches[t], &dh, &carry.dc, g, &mut dx, &mut dprev);
                    std::mem::swap(&mut carry, &mut dprev);
                    d_in[t] = dx;
                }
            }
            (RecurrentLayer::Gru(p), LayerCaches::Gru(caches), RecurrentLayer::Gru(g)) => {
                let hidden = p.hidden_size();
                let mut carry = vec![0.0; hidden];
                let mut dh = vec![0.0; hidden];
                for t in (0..steps).rev() {
                    for k in 0..hidden {
                        dh[k] = d_out[t][k] + carry[k];
                    }
                    let mut dx = vec![0.0; p.input_size()];
                    p.backward_acc(&caches[t], &dh, g, &mut dx, &mut carry);
                    d_in[t] = dx;
                }
            }
            _ => unreachable!("gradient buffers mirror the model's layer kinds"),
        }
        d_in
    }
}

enum LayerCaches {
    Lstm(Vec<LstmCache>),
    Gru(Vec<GruCache>),
}

struct LayerTrace {
    caches: LayerCaches,
    mask: Option<Vec<f64>>,
}

struct SampleTrace {
    layers: Vec<LayerTrace>,
    head: DenseCache,
}

/// Gradient buffers with the same layout as a [`SequenceModel`]'s parameters.
struct Grads {
    layers: Vec<RecurrentLayer>,
    head: DenseParams,
}

impl Grads {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = self.layers.iter().flat_map(|l| l.as_params().tensors()).collect();
        out.extend(self.head.tensors());
        out
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = self
            .layers
            .iter_mut()
            .flat_map(|l| l.as_params_mut().tensors_mut())
            .collect();
        out.extend(self.head.tensors_mut());
        out
    }

    fn fill_zero(&mut self) {
        for t in self.tensors_mut() {
            t.fill(0.0);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceModel {
    pub config: ModelConfig,
    pub input_size: usize,
    pub layers: Vec<RecurrentLayer>,
    pub head: DenseParams,
}

/// Per-epoch training losses (mean squared error on scaled targets, measured
/// with dropout active) plus elapsed wall time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub epoch_losses: Vec<f64>,
    pub wall_seconds: f64,
}

impl TrainTrace {
    pub fn final_loss(&self) -> f64 {
        *self.epoch_losses.last().expect("at least one epoch")
    }
}

pub fn build_model(cfg: &ModelConfig, feature_count: usize) -> Result<SequenceModel> {
    SequenceModel::new(cfg, feature_count)
}

pub fn train(model: SequenceModel, samples: &[WindowSample]) -> Result<(SequenceModel, TrainTrace)> {
    let mut model = model;
    let trace = model.fit(samples)?;
    Ok((model, trace))
}

pub fn predict(model: &SequenceModel, samples: &[WindowSample]) -> Result<Vec<f64>> {
    model.predict(samples)
}

impl SequenceModel {
    pub fn new(cfg: &ModelConfig, feature_count: usize) -> Result<Self> {
        cfg.validate()?;
        if feature_count < 1 {
            return Err(Error::config("feature_count", "must be at least 1"));
        }
        let mut rng = Rng::new(cfg.seed);
        let layers = (0..cfg.layers)
            .map(|l| {
                let input = if l == 0 { feature_count } else { cfg.hidden };
                RecurrentLayer::init(cfg.cell_kind, &mut rng, input, cfg.hidden)
            })
            .collect();
        let head = DenseParams::init(&mut rng, cfg.hidden, 1, Activation::Identity);
        Ok(SequenceModel {
            config: cfg.clone(),
            input_size: feature_count,
            layers,
            head,
        })
    }

    /// Structural consistency check, used after deserialization.
    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.layers.len() != self.config.layers {
            return Err(Error::shape(
                "SequenceModel",
                format!(
                    "{} layers stored, config says {}",
                    self.layers.len(),
                    self.config.layers
                ),
            ));
        }
        let mut expected_input = self.input_size;
        for (i, l) in self.layers.iter().enumerate() {
            l.validate()?;
            if l.cell_kind() != self.config.cell_kind {
                return Err(Error::shape(
                    "SequenceModel",
                    format!("layer {i} has the wrong cell kind"),
                ));
            }
            if l.input_size() != expected_input || l.hidden_size() != self.config.hidden {
                return Err(Error::shape(
                    "SequenceModel",
                    format!(
                        "layer {i} maps {} -> {}, expected {expected_input} -> {}",
                        l.input_size(),
                        l.hidden_size(),
                        self.config.hidden
                    ),
                ));
            }
            expected_input = self.config.hidden;
        }
        self.head.validate()?;
        if self.head.input_size() != self.config.hidden || self.head.output_size() != 1 {
            return Err(Error::shape("SequenceModel", "head must map hidden -> 1"));
        }
        Ok(())
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.as_params().num_params()).sum::<usize>() + self.head.num_params()
    }

    /// All parameters in canonical order: layers bottom-up, then the head.
    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            for t in l.as_params().tensors() {
                out.extend_from_slice(t);
            }
        }
        for t in self.head.tensors() {
            out.extend_from_slice(t);
        }
        out
    }

    pub fn set_flat_params(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.num_params() {
            return Err(Error::shape(
                "set_flat_params",
                format!("{} values for {} parameters", flat.len(), self.num_params()),
            ));
        }
        let mut offset = 0;
        let mut tensors: Vec<&mut [f64]> = self
            .layers
            .iter_mut()
            .flat_map(|l| l.as_params_mut().tensors_mut())
            .collect();
        tensors.extend(self.head.tensors_mut());
        for t in tensors {
            let n = t.len();
            t.copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(())
    }

    fn zero_grads(&self) -> Grads {
        Grads {
            layers: self.layers.iter().map(RecurrentLayer::zeros_like).collect(),
            head: DenseParams::zeros(self.head.input_size(), 1, self.head.activation),
        }
    }

    fn check_samples(&self, samples: &[WindowSample]) -> Result<()> {
        if let Some((i, s)) = samples
            .iter()
            .enumerate()
            .find(|(_, s)| s.inputs.cols() != self.input_size || s.inputs.rows() == 0)
        {
            return Err(Error::shape(
                "SequenceModel",
                format!(
                    "sample {i} is {}x{}, model expects {} features per step",
                    s.inputs.rows(),
                    s.inputs.cols(),
                    self.input_size
                ),
            ));
        }
        Ok(())
    }

    fn forward_sample(&self, inputs: &Matrix, masks: Option<Vec<Vec<f64>>>) -> (f64, SampleTrace) {
        let mut seq: Vec<Vec<f64>> = (0..inputs.rows()).map(|t| inputs.row(t).to_vec()).collect();
        let mut masks = masks.map(|m| m.into_iter());
        let mut traces = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            let (mut outs, caches) = layer.run(&seq);
            let mask = masks.as_mut().and_then(Iterator::next);
            if let Some(m) = &mask {
                for h in outs.iter_mut() {
                    h.iter_mut().zip(m).for_each(|(v, k)| *v *= k);
                }
            }
            traces.push(LayerTrace { caches, mask });
            seq = outs;
        }
        let top = seq.last().expect("non-empty sequence");
        let (y, head) = self.head.forward_unchecked(top);
        (y[0], SampleTrace { layers: traces, head })
    }

    fn backward_sample(&self, trace: &SampleTrace, dy: f64, steps: usize, grads: &mut Grads) {
        let mut d_top = vec![0.0; self.head.input_size()];
        self.head.backward_acc(&trace.head, &[dy], &mut grads.head, &mut d_top);
        let mut d_seq = vec![vec![0.0; self.config.hidden]; steps];
        d_seq[steps - 1] = d_top;
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let lt = &trace.layers[l];
            if let Some(m) = &lt.mask {
                for d in d_seq.iter_mut() {
                    d.iter_mut().zip(m).for_each(|(v, k)| *v *= k);
                }
            }
            d_seq = layer.backprop(&lt.caches, &d_seq, &mut grads.layers[l]);
        }
    }

    /// Mean squared error over `samples` and its gradient, dropout disabled.
    pub fn loss_and_gradient(&self, samples: &[WindowSample]) -> Result<(f64, Vec<f64>)> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("no samples".into()));
        }
        self.check_samples(samples)?;
        let mut grads = self.zero_grads();
        let loss = self.accumulate(samples, &mut grads, None)?;
        let flat = grads.tensors().concat();
        Ok((loss, flat))
    }

    pub fn loss(&self, samples: &[WindowSample]) -> Result<f64> {
        let preds = self.predict(samples)?;
        if preds.is_empty() {
            return Err(Error::InvalidArgument("no samples".into()));
        }
        Ok(preds
            .iter()
            .zip(samples)
            .map(|(p, s)| (p - s.target).powi(2))
            .sum::<f64>()
            / samples.len() as f64)
    }

    fn accumulate(&self, samples: &[WindowSample], grads: &mut Grads, mut rng: Option<&mut Rng>) -> Result<f64> {
        let n = samples.len() as f64;
        let mut loss = 0.0;
        for s in samples {
            let masks = match rng.as_deref_mut() {
                Some(rng) if self.config.dropout > 0.0 => Some(
                    (0..self.layers.len())
                        .map(|_| dropout_mask(rng, self.config.hidden, self.config.dropout))
                        .collect::<Result<Vec<_>>>()?,
                ),
                _ => None,
            };
            let (y, trace) = self.forward_sample(&s.inputs, masks);
            let err = y - s.target;
            loss += err * err;
            self.backward_sample(&trace, 2.0 * err / n, s.inputs.rows(), grads);
        }
        Ok(loss / n)
    }

    /// Full-batch training for `config.epochs` epochs.
    pub fn fit(&mut self, samples: &[WindowSample]) -> Result<TrainTrace> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("cannot train on an empty sample set".into()));
        }
        self.check_samples(samples)?;
        let started = Instant::now();
        // dropout stream is independent of the initialization stream
        let mut rng = Rng::new(self.config.seed ^ 0xD1B5_4A32_D192_ED03);
        let mut opt = Optimizer::new(self.config.optimizer, self.config.learning_rate, self.num_params());
        let mut grads = self.zero_grads();
        let mut losses = Vec::with_capacity(self.config.epochs);
        for epoch in 0..self.config.epochs {
            grads.fill_zero();
            let loss = self.accumulate(samples, &mut grads, Some(&mut rng))?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch: epoch + 1 });
            }
            if let Some(max) = self.config.clip_norm {
                clip_global_norm(grads.tensors_mut(), max);
            }
            let mut params: Vec<&mut [f64]> = self
                .layers
                .iter_mut()
                .flat_map(|l| l.as_params_mut().tensors_mut())
                .collect();
            params.extend(self.head.tensors_mut());
            opt.update(params, grads.tensors());
            losses.push(loss);
            log::debug!("{:?} epoch {}: loss {loss:.6e}", self.config.cell_kind, epoch + 1);
        }
        Ok(TrainTrace {
            epoch_losses: losses,
            wall_seconds: started.elapsed().as_secs_f64(),
        })
    }

    /// One scaled prediction per sample, in order; dropout disabled.
    pub fn predict(&self, samples: &[WindowSample]) -> Result<Vec<f64>> {
        self.check_samples(samples)?;
        Ok(samples.iter().map(|s| self.forward_sample(&s.inputs, None).0).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn sample(rows: usize, cols: usize, seed: u64) -> WindowSample {
        let mut rng = Rng::new(seed);
        let data = (0..rows * cols).map(|_| rng.uniform(-1.0, 1.0)).collect();
        WindowSample {
            inputs: Matrix::new(rows, cols, data).unwrap(),
            target: rng.uniform(0.0, 1.0),
            target_date: NaiveDate::from_ymd_opt(2018, 1, 1).unwrap(),
            prev_actual_close: 1.0,
            target_close: 1.0,
        }
    }

    #[test]
    fn default_model_shape() {
        let m = build_model(&ModelConfig::default(), 5).unwrap();
        assert_eq!(m.layers.len(), 4);
        assert_eq!(m.layers[0].input_size(), 5);
        assert!(m.layers[1..]
            .iter()
            .all(|l| l.input_size() == 50 && l.hidden_size() == 50));
        assert_eq!((m.head.input_size(), m.head.output_size()), (50, 1));
        m.validate().unwrap();
    }

    #[test]
    fn construction_is_seeded() {
        let cfg = ModelConfig {
            seed: 17,
            ..ModelConfig::gru()
        };
        let a = build_model(&cfg, 5).unwrap();
        let b = build_model(&cfg, 5).unwrap();
        assert_eq!(a.flat_params(), b.flat_params());
        let c = build_model(&ModelConfig { seed: 18, ..cfg }, 5).unwrap();
        assert_ne!(a.flat_params(), c.flat_params());
    }

    #[test]
    fn invalid_config_names_field() {
        for (cfg, field) in [
            (
                ModelConfig {
                    layers: 0,
                    ..ModelConfig::default()
                },
                "layers",
            ),
            (
                ModelConfig {
                    hidden: 0,
                    ..ModelConfig::default()
                },
                "hidden",
            ),
            (
                ModelConfig {
                    dropout: 1.0,
                    ..ModelConfig::default()
                },
                "dropout",
            ),
            (
                ModelConfig {
                    epochs: 0,
                    ..ModelConfig::default()
                },
                "epochs",
            ),
            (
                ModelConfig {
                    learning_rate: 0.0,
                    ..ModelConfig::default()
                },
                "learning_rate",
            ),
        ] {
            let err = build_model(&cfg, 5).unwrap_err().to_string();
            assert!(err.contains(field), "{err}");
        }
        assert!(build_model(&ModelConfig::default(), 0).is_err());
    }

    #[test]
    fn minimal_model_runs() {
        let cfg = ModelConfig {
            layers: 1,
            hidden: 2,
            epochs: 3,
            ..ModelConfig::default()
        };
        let m = build_model(&cfg, 5).unwrap();
        let samples = vec![sample(10, 5, 1), sample(10, 5, 2)];
        let (m, trace) = train(m, &samples).unwrap();
        assert_eq!(trace.epoch_losses.len(), 3);
        assert_eq!(predict(&m, &samples).unwrap().len(), 2);
    }

    #[test]
    fn zero_head_predicts_bias() {
        let mut m = build_model(
            &ModelConfig {
                layers: 2,
                hidden: 3,
                ..ModelConfig::default()
            },
            5,
        )
        .unwrap();
        m.head.w = Matrix::zeros(1, 3);
        m.head.b = vec![0.37];
        let preds = m.predict(&[sample(10, 5, 4), sample(10, 5, 5)]).unwrap();
        assert_eq!(preds, vec![0.37, 0.37]);
    }

    #[test]
    fn rejects_empty_and_misshapen_samples() {
        let m = build_model(
            &ModelConfig {
                layers: 1,
                hidden: 2,
                ..ModelConfig::default()
            },
            5,
        )
        .unwrap();
        assert!(train(m.clone(), &[]).is_err());
        assert!(m.predict(&[sample(10, 4, 1)]).is_err());
    }

    #[test]
    fn divergence_is_reported_with_epoch() {
        let mut m = build_model(
            &ModelConfig {
                layers: 1,
                hidden: 2,
                epochs: 5,
                ..ModelConfig::default()
            },
            5,
        )
        .unwrap();
        m.head.b = vec![f64::NAN];
        let err = m.fit(&[sample(10, 5, 1)]).unwrap_err();
        assert!(matches!(err, Error::NonFiniteLoss { epoch: 1 }), "{err}");
    }

    #[test]
    fn flat_params_round_trip() {
        let mut m = build_model(
            &ModelConfig {
                layers: 2,
                hidden: 3,
                ..ModelConfig::gru()
            },
            2,
        )
        .unwrap();
        let mut flat = m.flat_params();
        flat.iter_mut().for_each(|v| *v += 1.0);
        m.set_flat_params(&flat).unwrap();
        assert_eq!(m.flat_params(), flat);
        assert!(m.set_flat_params(&flat[1..]).is_err());
    }
}
