//! Dense feed-forward binary classifier: ReLU hidden layers, sigmoid output,
//! trained with Adam on mean binary cross-entropy.
//!
//! The default architecture is input -> (input/2 + 1) -> (input/2 + 1) -> 1,
//! so 8 -> 5 -> 5 -> 1 for the 8 PCA columns. Weights start uniform in
//! [-0.05, 0.05], biases at zero. Output probabilities are clamped to
//! [1e-7, 1 - 1e-7]; the clamp has zero gradient where it saturates.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum MlpError {
    #[error("input has {found} columns, model expects {expected}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    /// Per-layer weight matrices, each out x in.
    pub weights: Vec<Array2<f64>>,
    /// Per-layer bias vectors.
    pub biases: Vec<Array1<f64>>,
}

impl MlpModel {
    /// Initialize the default two-hidden-layer architecture for `input_dim`
    /// features: hidden width is input_dim / 2 + 1. Weights are i.i.d.
    /// uniform on [-0.05, 0.05] from the seeded generator, biases zero.
    pub fn init(input_dim: usize, seed: u64) -> Self {
        let hidden = input_dim / 2 + 1;
        let sizes = [input_dim, hidden, hidden, 1];
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut weights = Vec::with_capacity(3);
        let mut biases = Vec::with_capacity(3);
        for l in 0..3 {
            let (n_in, n_out) = (sizes[l], sizes[l + 1]);
            weights.push(Array2::from_shape_fn((n_out, n_in), |_| {
                rng.random_range(-0.05..=0.05)
            }));
            biases.push(Array1::zeros(n_out));
        }
        Self { weights, biases }
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.weights[0].ncols()];
        sizes.extend(self.weights.iter().map(|w| w.nrows()));
        sizes
    }

    pub fn input_dim(&self) -> usize {
        self.weights[0].ncols()
    }

    pub fn n_params(&self) -> usize {
        self.weights.iter().map(|w| w.len()).sum::<usize>()
            + self.biases.iter().map(|b| b.len()).sum::<usize>()
    }

    fn check_input(&self, x: &ArrayView2<'_, f64>) -> Result<(), MlpError> {
        if x.ncols() != self.input_dim() {
            return Err(MlpError::ShapeMismatch {
                expected: self.input_dim(),
                found: x.ncols(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 10,
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-7,
            seed: 0,
            shuffle: true,
        }
    }
}

/// Per-epoch training loss and binary accuracy, aggregated over the epoch's
/// mini-batch outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub loss: Vec<f64>,
    pub accuracy: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn relu(z: f64) -> f64 {
    z.max(0.0)
}

struct ForwardPass {
    /// Pre-activations per layer.
    zs: Vec<Array2<f64>>,
    /// Post-activations per layer; the last holds raw sigmoid outputs.
    activations: Vec<Array2<f64>>,
    /// Clamped output probabilities, one per batch row.
    probs: Array1<f64>,
}

fn forward_full(model: &MlpModel, x: ArrayView2<'_, f64>) -> ForwardPass {
    let n_layers = model.weights.len();
    let mut zs = Vec::with_capacity(n_layers);
    let mut activations = Vec::with_capacity(n_layers);
    let mut a = x.to_owned();
    for (l, (w, b)) in model.weights.iter().zip(&model.biases).enumerate() {
        let z = a.dot(&w.t()) + b;
        let act = if l + 1 == n_layers {
            z.mapv(sigmoid)
        } else {
            z.mapv(relu)
        };
        zs.push(z);
        activations.push(act.clone());
        a = act;
    }
    let probs = activations
        .last()
        .unwrap()
        .column(0)
        .mapv(|p| p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP));
    ForwardPass {
        zs,
        activations,
        probs,
    }
}

/// Output probabilities in (0, 1) for a batch of rows.
pub fn forward(model: &MlpModel, x: ArrayView2<'_, f64>) -> Result<Array1<f64>, MlpError> {
    model.check_input(&x)?;
    Ok(forward_full(model, x).probs)
}

/// Mean binary cross-entropy with probabilities clamped away from 0 and 1.
pub fn bce_loss(probs: &Array1<f64>, labels: &[u8]) -> f64 {
    debug_assert_eq!(probs.len(), labels.len());
    let n = probs.len() as f64;
    probs
        .iter()
        .zip(labels)
        .map(|(&p, &y)| {
            let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
            if y == 1 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum::<f64>()
        / n
}

/// Gradients of mean BCE with respect to every parameter, shaped like the
/// model parameters.
#[derive(Debug, Clone)]
pub struct Gradients {
    pub weights: Vec<Array2<f64>>,
    pub biases: Vec<Array1<f64>>,
}

pub fn backward(
    model: &MlpModel,
    x: ArrayView2<'_, f64>,
    labels: &[u8],
) -> Result<(Gradients, f64, Array1<f64>), MlpError> {
    model.check_input(&x)?;
    let n = x.nrows();
    debug_assert_eq!(n, labels.len());
    let pass = forward_full(model, x);
    let loss = bce_loss(&pass.probs, labels);
    let n_layers = model.weights.len();

    // Output delta: d(mean BCE)/dz. Where the clamp saturates, the loss no
    // longer depends on z and the gradient is exactly zero.
    let raw = pass.activations[n_layers - 1].column(0);
    let mut delta = Array2::<f64>::zeros((n, 1));
    for r in 0..n {
        let p_raw = raw[r];
        if p_raw <= PROB_CLAMP || p_raw >= 1.0 - PROB_CLAMP {
            continue;
        }
        delta[[r, 0]] = (p_raw - f64::from(labels[r])) / n as f64;
    }

    let mut grad_w = vec![Array2::zeros((0, 0)); n_layers];
    let mut grad_b = vec![Array1::zeros(0); n_layers];
    for l in (0..n_layers).rev() {
        let input: ArrayView2<'_, f64> = if l == 0 {
            x
        } else {
            pass.activations[l - 1].view()
        };
        grad_w[l] = delta.t().dot(&input);
        grad_b[l] = delta.sum_axis(Axis(0));
        if l > 0 {
            // Propagate through the layer weights and the ReLU gate; the
            // subgradient at exactly zero is zero.
            let mut next = delta.dot(&model.weights[l]);
            next.zip_mut_with(&pass.zs[l - 1], |d, &z| {
                if z <= 0.0 {
                    *d = 0.0;
                }
            });
            delta = next;
        }
    }

    Ok((
        Gradients {
            weights: grad_w,
            biases: grad_b,
        },
        loss,
        pass.probs,
    ))
}

/// First/second-moment accumulators mirroring the parameter shapes.
#[derive(Debug, Clone)]
pub struct AdamState {
    m_weights: Vec<Array2<f64>>,
    v_weights: Vec<Array2<f64>>,
    m_biases: Vec<Array1<f64>>,
    v_biases: Vec<Array1<f64>>,
    t: u64,
}

impl AdamState {
    pub fn new(model: &MlpModel) -> Self {
        Self {
            m_weights: model.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            v_weights: model.weights.iter().map(|w| Array2::zeros(w.dim())).collect(),
            m_biases: model.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            v_biases: model.biases.iter().map(|b| Array1::zeros(b.len())).collect(),
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// One Adam update; `t` increments once per call (i.e. per batch).
pub fn adam_step(
    state: &mut AdamState,
    model: &mut MlpModel,
    grads: &Gradients,
    cfg: &TrainConfig,
) {
    state.t += 1;
    let t = state.t as i32;
    let bc1 = 1.0 - cfg.beta1.powi(t);
    let bc2 = 1.0 - cfg.beta2.powi(t);

    for l in 0..model.weights.len() {
        update(
            model.weights[l].iter_mut(),
            state.m_weights[l].iter_mut(),
            state.v_weights[l].iter_mut(),
            grads.weights[l].iter(),
            cfg,
            bc1,
            bc2,
        );
        update(
            model.biases[l].iter_mut(),
            state.m_biases[l].iter_mut(),
            state.v_biases[l].iter_mut(),
            grads.biases[l].iter(),
            cfg,
            bc1,
            bc2,
        );
    }
}

fn update<'a>(
    params: impl Iterator<Item = &'a mut f64>,
    ms: impl Iterator<Item = &'a mut f64>,
    vs: impl Iterator<Item = &'a mut f64>,
    grads: impl Iterator<Item = &'a f64>,
    cfg: &TrainConfig,
    bc1: f64,
    bc2: f64,
) {
    for (((theta, m), v), &g) in params.zip(ms).zip(vs).zip(grads) {
        *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
        *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
        let m_hat = *m / bc1;
        let v_hat = *v / bc2;
        *theta -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
    }
}

/// Train in place: per epoch a seeded shuffle, mini-batches of
/// `cfg.batch_size` (the last batch may be smaller) and one Adam step per
/// batch. Epoch metrics aggregate the mini-batch outputs seen during the
/// epoch, before each batch's update.
pub fn train(
    model: &mut MlpModel,
    x: ArrayView2<'_, f64>,
    labels: &[u8],
    cfg: &TrainConfig,
) -> Result<TrainHistory, MlpError> {
    model.check_input(&x)?;
    let n = x.nrows();
    if n == 0 {
        return Err(MlpError::EmptyTrainingSet);
    }
    if labels.len() != n {
        return Err(MlpError::InvalidConfig(format!(
            "{} labels for {n} rows",
            labels.len()
        )));
    }
    if cfg.epochs == 0 {
        return Err(MlpError::InvalidConfig("epochs must be >= 1".into()));
    }
    if cfg.batch_size == 0 {
        return Err(MlpError::InvalidConfig("batch_size must be >= 1".into()));
    }

    // Shuffling is the only source of randomness in training; the stream is
    // separate from the weight-init stream of the same seed.
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut state = AdamState::new(model);
    let mut history = TrainHistory {
        loss: Vec::with_capacity(cfg.epochs),
        accuracy: Vec::with_capacity(cfg.epochs),
    };

    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..cfg.epochs {
        if cfg.shuffle {
            use rand::seq::SliceRandom;
            order.shuffle(&mut rng);
        }
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for batch in order.chunks(cfg.batch_size) {
            let xb = x.select(Axis(0), batch);
            let yb: Vec<u8> = batch.iter().map(|&r| labels[r]).collect();
            let (grads, loss, probs) = backward(model, xb.view(), &yb)?;
            loss_sum += loss * batch.len() as f64;
            correct += probs
                .iter()
                .zip(&yb)
                .filter(|(&p, &y)| u8::from(p >= 0.5) == y)
                .count();
            adam_step(&mut state, model, &grads, cfg);
        }
        history.loss.push(loss_sum / n as f64);
        history.accuracy.push(correct as f64 / n as f64);
    }
    Ok(history)
}

/// Hard labels: 1 iff the clamped probability is >= threshold.
pub fn predict(
    model: &MlpModel,
    x: ArrayView2<'_, f64>,
    threshold: f64,
) -> Result<Vec<u8>, MlpError> {
    Ok(forward(model, x)?
        .iter()
        .map(|&p| u8::from(p >= threshold))
        .collect())
}
