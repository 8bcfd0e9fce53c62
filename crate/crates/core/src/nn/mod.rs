//! Dense feed-forward Q-network with exact reverse-mode gradients and Adam.
//!
//! Small enough to stay dependency-free: weights are flat row-major `Vec<f64>`
//! buffers and the forward/backward passes are straight loops. The network
//! owns its Adam moment accumulators, so one struct is a complete trainable
//! unit. A network is single-writer; clone it for concurrent read-only use.

mod io;

pub use io::{load, save, read_checkpoint, write_checkpoint};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::NnError;

/// Per-layer nonlinearity. The output layer is always `Identity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    fn derivative(self, z: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }
}

/// Shape and activation of one dense layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub input_dim: usize,
    pub output_dim: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(input_dim: usize, output_dim: usize, activation: Activation) -> Self {
        Self {
            input_dim,
            output_dim,
            activation,
        }
    }
}

/// One dense layer: `output = act(W x + b)` with `W` stored row-major
/// (`output_dim` rows of `input_dim` weights).
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub spec: LayerSpec,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn param_count(&self) -> usize {
        self.weights.len() + self.biases.len()
    }
}

/// Adam first/second moment buffers, shaped like the parameters they track.
#[derive(Debug, Clone, PartialEq, Default)]
struct AdamMoments {
    m_weights: Vec<Vec<f64>>,
    v_weights: Vec<Vec<f64>>,
    m_biases: Vec<Vec<f64>>,
    v_biases: Vec<Vec<f64>>,
    /// Update count, used for bias correction.
    t: u64,
}

/// Adam hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// The trainable Q-network: dense layers plus Adam state.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    layers: Vec<Layer>,
    adam: AdamMoments,
}

/// Per-layer pre-activations and activations retained by a forward pass for
/// the matching backward pass. Reusable across calls to avoid reallocation.
#[derive(Debug, Clone, Default)]
pub struct ForwardCache {
    /// `activations[0]` is the input; `activations[k+1]` is layer k's output.
    activations: Vec<Vec<f64>>,
    /// `pre_activations[k]` is layer k's `W x + b` before the nonlinearity.
    pre_activations: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Output of the cached forward pass.
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("cache filled by forward")
    }
}

/// Loss gradients for every weight and bias, shaped like the network.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub d_weights: Vec<Vec<f64>>,
    pub d_biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(net: &QNetwork) -> Self {
        Self {
            d_weights: net.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect(),
            d_biases: net.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect(),
        }
    }

    pub fn reset(&mut self) {
        for w in &mut self.d_weights {
            w.fill(0.0);
        }
        for b in &mut self.d_biases {
            b.fill(0.0);
        }
    }
}

impl QNetwork {
    /// Builds a network from layer specs with He-uniform weights
    /// (bound `sqrt(6 / input_dim)`) and zero biases.
    pub fn new(specs: &[LayerSpec], seed: u64) -> Result<Self, NnError> {
        validate_chain(specs)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = specs
            .iter()
            .map(|&spec| {
                let bound = (6.0 / spec.input_dim as f64).sqrt();
                let weights = (0..spec.input_dim * spec.output_dim)
                    .map(|_| rng.random_range(-bound..bound))
                    .collect();
                Layer {
                    spec,
                    weights,
                    biases: vec![0.0; spec.output_dim],
                }
            })
            .collect();
        Ok(Self {
            layers,
            adam: AdamMoments::default(),
        })
    }

    /// The conventional Q-network shape for this problem:
    /// `[input_dim, 64, 64, num_actions]` with ReLU hidden layers.
    pub fn default_q(input_dim: usize, num_actions: usize, seed: u64) -> Result<Self, NnError> {
        Self::new(
            &[
                LayerSpec::new(input_dim, 64, Activation::Relu),
                LayerSpec::new(64, 64, Activation::Relu),
                LayerSpec::new(64, num_actions, Activation::Identity),
            ],
            seed,
        )
    }

    /// Builds a network from explicit layers (used by checkpoint loading and
    /// tests that need hand-set parameters).
    pub fn from_layers(layers: Vec<Layer>) -> Result<Self, NnError> {
        let specs: Vec<LayerSpec> = layers.iter().map(|l| l.spec).collect();
        validate_chain(&specs)?;
        for (i, layer) in layers.iter().enumerate() {
            if layer.weights.len() != layer.spec.input_dim * layer.spec.output_dim
                || layer.biases.len() != layer.spec.output_dim
            {
                return Err(NnError::DimensionMismatch {
                    layer: i,
                    output: layer.weights.len(),
                    expected: layer.spec.input_dim * layer.spec.output_dim,
                });
            }
        }
        Ok(Self {
            layers,
            adam: AdamMoments::default(),
        })
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].spec.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("nonempty").spec.output_dim
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Adam update count so far.
    pub fn adam_t(&self) -> u64 {
        self.adam.t
    }

    /// Inference-only forward pass.
    pub fn predict(&self, x: &[f64]) -> Result<Vec<f64>, NnError> {
        self.check_input(x)?;
        let mut current = x.to_vec();
        let mut next = Vec::new();
        for layer in &self.layers {
            next.clear();
            next.resize(layer.spec.output_dim, 0.0);
            affine(layer, &current, &mut next);
            for z in &mut next {
                *z = layer.spec.activation.apply(*z);
            }
            std::mem::swap(&mut current, &mut next);
        }
        Ok(current)
    }

    /// Forward pass retaining intermediates for [`backward`](Self::backward).
    pub fn forward(&self, x: &[f64]) -> Result<(Vec<f64>, ForwardCache), NnError> {
        let mut cache = ForwardCache::new();
        self.forward_cached(x, &mut cache)?;
        Ok((cache.output().to_vec(), cache))
    }

    /// Forward pass into a reusable cache; read the result via
    /// [`ForwardCache::output`].
    pub fn forward_cached(&self, x: &[f64], cache: &mut ForwardCache) -> Result<(), NnError> {
        self.check_input(x)?;
        let depth = self.layers.len();
        cache.activations.resize(depth + 1, Vec::new());
        cache.pre_activations.resize(depth, Vec::new());
        cache.activations[0].clear();
        cache.activations[0].extend_from_slice(x);
        for (k, layer) in self.layers.iter().enumerate() {
            let (head, tail) = cache.activations.split_at_mut(k + 1);
            let input = &head[k];
            let z = &mut cache.pre_activations[k];
            z.clear();
            z.resize(layer.spec.output_dim, 0.0);
            affine(layer, input, z);
            let a = &mut tail[0];
            a.clear();
            a.extend(z.iter().map(|&v| layer.spec.activation.apply(v)));
        }
        Ok(())
    }

    /// Exact reverse-mode gradients of a scalar loss, given `d_loss/d_output`.
    pub fn backward(&self, cache: &ForwardCache, dq: &[f64]) -> Result<Gradients, NnError> {
        let mut grads = Gradients::zeros_like(self);
        self.backward_accumulate(cache, dq, &mut grads)?;
        Ok(grads)
    }

    /// Like [`backward`](Self::backward) but adds into `grads`, so per-sample
    /// gradients can be accumulated over a batch without reallocating.
    pub fn backward_accumulate(
        &self,
        cache: &ForwardCache,
        dq: &[f64],
        grads: &mut Gradients,
    ) -> Result<(), NnError> {
        if cache.activations.len() != self.layers.len() + 1 {
            return Err(NnError::GradShape {
                context: "cache does not match network depth",
            });
        }
        if dq.len() != self.output_dim() {
            return Err(NnError::GradShape {
                context: "output gradient length",
            });
        }
        if grads.d_weights.len() != self.layers.len() {
            return Err(NnError::GradShape {
                context: "gradient accumulator depth",
            });
        }

        // delta = d_loss/d_z for the layer being processed.
        let last = self.layers.len() - 1;
        let mut delta: Vec<f64> = dq
            .iter()
            .zip(&cache.pre_activations[last])
            .map(|(&g, &z)| g * self.layers[last].spec.activation.derivative(z))
            .collect();

        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let input = &cache.activations[k];
            if input.len() != layer.spec.input_dim || delta.len() != layer.spec.output_dim {
                return Err(NnError::GradShape {
                    context: "cached activation shape",
                });
            }
            let dw = &mut grads.d_weights[k];
            for (i, &d) in delta.iter().enumerate() {
                let row = &mut dw[i * layer.spec.input_dim..(i + 1) * layer.spec.input_dim];
                for (w, &x) in row.iter_mut().zip(input) {
                    *w += d * x;
                }
            }
            for (b, &d) in grads.d_biases[k].iter_mut().zip(&delta) {
                *b += d;
            }
            if k > 0 {
                // Propagate through W^T and the previous layer's nonlinearity.
                let prev = &self.layers[k - 1];
                let mut prev_delta = vec![0.0; layer.spec.input_dim];
                for (i, &d) in delta.iter().enumerate() {
                    let row = &layer.weights[i * layer.spec.input_dim..(i + 1) * layer.spec.input_dim];
                    for (p, &w) in prev_delta.iter_mut().zip(row) {
                        *p += d * w;
                    }
                }
                for (p, &z) in prev_delta.iter_mut().zip(&cache.pre_activations[k - 1]) {
                    *p *= prev.spec.activation.derivative(z);
                }
                delta = prev_delta;
            }
        }
        Ok(())
    }

    /// One Adam update with bias correction, incrementing the step counter.
    pub fn adam_step(&mut self, grads: &Gradients, params: &AdamParams) -> Result<(), NnError> {
        if grads.d_weights.len() != self.layers.len() {
            return Err(NnError::GradShape {
                context: "adam gradient depth",
            });
        }
        if self.adam.t == 0 {
            self.adam.m_weights = self.layers.iter().map(|l| vec![0.0; l.weights.len()]).collect();
            self.adam.v_weights = self.adam.m_weights.clone();
            self.adam.m_biases = self.layers.iter().map(|l| vec![0.0; l.biases.len()]).collect();
            self.adam.v_biases = self.adam.m_biases.clone();
        }
        self.adam.t += 1;
        let t = self.adam.t as i32;
        let bias1 = 1.0 - params.beta1.powi(t);
        let bias2 = 1.0 - params.beta2.powi(t);

        for (k, layer) in self.layers.iter_mut().enumerate() {
            if grads.d_weights[k].len() != layer.weights.len()
                || grads.d_biases[k].len() != layer.biases.len()
            {
                return Err(NnError::GradShape {
                    context: "adam gradient shape",
                });
            }
            update_tensor(
                &mut layer.weights,
                &grads.d_weights[k],
                &mut self.adam.m_weights[k],
                &mut self.adam.v_weights[k],
                params,
                bias1,
                bias2,
            );
            update_tensor(
                &mut layer.biases,
                &grads.d_biases[k],
                &mut self.adam.m_biases[k],
                &mut self.adam.v_biases[k],
                params,
                bias1,
                bias2,
            );
        }
        Ok(())
    }

    /// True when every parameter is finite.
    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(&l.biases).all(|v| v.is_finite()))
    }

    /// Bit-exact parameter equality (Adam state ignored).
    pub fn params_eq(&self, other: &QNetwork) -> bool {
        self.layers.len() == other.layers.len()
            && self
                .layers
                .iter()
                .zip(&other.layers)
                .all(|(a, b)| a.spec == b.spec && a.weights == b.weights && a.biases == b.biases)
    }

    fn check_input(&self, x: &[f64]) -> Result<(), NnError> {
        if x.len() != self.input_dim() {
            return Err(NnError::InputShape {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// `out = W x + b` for one layer.
fn affine(layer: &Layer, input: &[f64], out: &mut [f64]) {
    let n = layer.spec.input_dim;
    for (i, o) in out.iter_mut().enumerate() {
        let row = &layer.weights[i * n..(i + 1) * n];
        let mut acc = layer.biases[i];
        for (&w, &x) in row.iter().zip(input) {
            acc += w * x;
        }
        *o = acc;
    }
}

#[allow(clippy::too_many_arguments)]
fn update_tensor(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    hyper: &AdamParams,
    bias1: f64,
    bias2: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g;
        v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g * g;
        let m_hat = m[i] / bias1;
        let v_hat = v[i] / bias2;
        params[i] -= hyper.learning_rate * m_hat / (v_hat.sqrt() + hyper.epsilon);
    }
}

fn validate_chain(specs: &[LayerSpec]) -> Result<(), NnError> {
    if specs.is_empty() {
        return Err(NnError::DimensionMismatch {
            layer: 0,
            output: 0,
            expected: 1,
        });
    }
    for spec in specs {
        if spec.input_dim == 0 || spec.output_dim == 0 {
            return Err(NnError::DimensionMismatch {
                layer: 0,
                output: spec.output_dim,
                expected: 1,
            });
        }
    }
    for (k, pair) in specs.windows(2).enumerate() {
        if pair[0].output_dim != pair[1].input_dim {
            return Err(NnError::DimensionMismatch {
                layer: k,
                output: pair[0].output_dim,
                expected: pair[1].input_dim,
            });
        }
    }
    if specs.last().expect("nonempty").activation != Activation::Identity {
        return Err(NnError::GradShape {
            context: "last layer must use identity activation",
        });
    }
    Ok(())
}
