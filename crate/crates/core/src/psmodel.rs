//! Preference-conditioned Pareto set model.
//!
//! A fully-connected network `m → 256 → 256 → 256 → n` with rectifier hidden
//! layers maps a preference on the simplex to a design. The last layer is
//! squashed through a logistic function and rescaled onto the problem box,
//! so every output is feasible. Forward and backward passes are written out
//! by hand and run batched over preferences.

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::ProblemSpec;
use crate::rng::Rng;
use crate::scalarize::{tch_aug, tch_aug_gradient, IdealState, Preference};
use crate::surrogate::SurrogateBundle;

pub const HIDDEN_WIDTH: usize = 256;
pub const HIDDEN_LAYERS: usize = 3;
const FORMAT: &str = "psl-model/1";

/// Draws `count` preferences uniformly from `[0,1]^m` and normalizes them.
pub fn sample_preferences(m: usize, count: usize, rng: &mut Rng) -> Vec<Preference> {
    assert!(m >= 2, "preferences need at least two objectives");
    (0..count)
        .map(|_| loop {
            let w: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
            if w.iter().sum::<f64>() > 0.0 {
                break Preference::normalized(w).expect("positive draw normalizes");
            }
        })
        .collect()
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelFile", into = "ModelFile")]
pub struct ParetoSetModel {
    problem: String,
    /// Layer widths from input to output.
    widths: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Per layer: weights (out × in, row-major), then bias.
    params: Vec<f64>,
    /// Bumped on every parameter update; ties forward caches to a state.
    generation: u64,
}

/// Activations kept from a batched forward pass for [`ParetoSetModel::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    generation: u64,
    /// Input batch followed by each post-rectifier hidden layer.
    activations: Vec<Array2<f64>>,
    /// Logistic outputs before rescaling.
    squashed: Array2<f64>,
}

impl ForwardCache {
    pub fn batch_size(&self) -> usize {
        self.squashed.nrows()
    }
}

impl ParetoSetModel {
    /// Default architecture with fan-in scaled uniform initialization.
    pub fn new(m: usize, lower: &[f64], upper: &[f64], rng: &mut Rng) -> Self {
        let mut widths = vec![m];
        widths.extend(std::iter::repeat_n(HIDDEN_WIDTH, HIDDEN_LAYERS));
        widths.push(lower.len());
        Self::with_widths(widths, lower, upper, rng)
    }

    pub fn with_widths(widths: Vec<usize>, lower: &[f64], upper: &[f64], rng: &mut Rng) -> Self {
        assert!(widths.len() >= 2 && widths.last() == Some(&lower.len()) && lower.len() == upper.len());
        let mut params = Vec::with_capacity(param_count(&widths));
        for pair in widths.windows(2) {
            let bound = 1.0 / (pair[0] as f64).sqrt();
            for _ in 0..(pair[0] + 1) * pair[1] {
                params.push(rng.random_range(-bound..bound));
            }
        }
        Self {
            problem: String::new(),
            widths,
            lower: lower.to_vec(),
            upper: upper.to_vec(),
            params,
            generation: 0,
        }
    }

    pub fn with_problem(mut self, name: &str) -> Self {
        self.problem = name.to_string();
        self
    }

    pub fn problem(&self) -> &str {
        &self.problem
    }

    pub fn m(&self) -> usize {
        self.widths[0]
    }

    pub fn n(&self) -> usize {
        *self.widths.last().expect("non-empty widths")
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.len()
    }

    /// Replaces the parameters; invalidates existing forward caches.
    pub fn set_params(&mut self, params: Vec<f64>) -> Result<()> {
        if params.len() != self.params.len() {
            return Err(Error::ContractViolation(format!(
                "expected {} parameters, got {}",
                self.params.len(),
                params.len()
            )));
        }
        self.params = params;
        self.generation += 1;
        Ok(())
    }

    fn layers(&self) -> usize {
        self.widths.len() - 1
    }

    fn layer_offset(&self, layer: usize) -> usize {
        param_count(&self.widths[..=layer])
    }

    fn layer(&self, layer: usize) -> (ArrayView2<'_, f64>, ArrayView1<'_, f64>) {
        let (fan_in, fan_out) = (self.widths[layer], self.widths[layer + 1]);
        let start = self.layer_offset(layer);
        let w = &self.params[start..start + fan_in * fan_out];
        let b = &self.params[start + fan_in * fan_out..start + (fan_in + 1) * fan_out];
        (
            ArrayView2::from_shape((fan_out, fan_in), w).expect("layer shape"),
            ArrayView1::from(b),
        )
    }

    fn input_matrix(&self, prefs: &[Preference]) -> Result<Array2<f64>> {
        let m = self.m();
        let mut input = Array2::zeros((prefs.len(), m));
        for (mut row, p) in input.rows_mut().into_iter().zip(prefs) {
            if p.len() != m {
                return Err(Error::InvalidPreference(format!("expected {m} weights, got {}", p.len())));
            }
            row.assign(&ArrayView1::from(p.weights()));
        }
        Ok(input)
    }

    fn run(&self, input: Array2<f64>) -> ForwardCache {
        let mut activations = vec![input];
        let last = self.layers() - 1;
        for l in 0..=last {
            let (w, b) = self.layer(l);
            let prev = activations.last().expect("input present");
            let mut z = Array2::zeros((prev.nrows(), w.nrows()));
            z.rows_mut().into_iter().for_each(|mut row| row.assign(&b));
            general_mat_mul(1.0, prev, &w.t(), 1.0, &mut z);
            if l < last {
                z.mapv_inplace(|v| v.max(0.0));
                activations.push(z);
            } else {
                z.mapv_inplace(sigmoid);
                return ForwardCache {
                    generation: self.generation,
                    activations,
                    squashed: z,
                };
            }
        }
        unreachable!("network has at least one layer")
    }

    fn rescale(&self, squashed: &Array2<f64>) -> Vec<Vec<f64>> {
        squashed
            .rows()
            .into_iter()
            .map(|row| {
                row.iter()
                    .zip(self.lower.iter().zip(&self.upper))
                    .map(|(s, (lo, hi))| (lo + (hi - lo) * s).clamp(*lo, *hi))
                    .collect()
            })
            .collect()
    }

    pub fn forward(&self, pref: &Preference) -> Result<Vec<f64>> {
        Ok(self.forward_batch(std::slice::from_ref(pref))?.remove(0))
    }

    pub fn forward_batch(&self, prefs: &[Preference]) -> Result<Vec<Vec<f64>>> {
        Ok(self.forward_cached(prefs)?.0)
    }

    pub fn forward_cached(&self, prefs: &[Preference]) -> Result<(Vec<Vec<f64>>, ForwardCache)> {
        let cache = self.run(self.input_matrix(prefs)?);
        Ok((self.rescale(&cache.squashed), cache))
    }

    /// Propagates `upstream[k] = dL/dx(λ_k)` back to the output pre-activations.
    fn output_delta(&self, cache: &ForwardCache, upstream: &[Vec<f64>]) -> Result<Array2<f64>> {
        if cache.generation != self.generation || cache.activations.len() != self.layers() {
            return Err(Error::ContractViolation("forward cache does not belong to this model state".into()));
        }
        let (k, n) = cache.squashed.dim();
        if upstream.len() != k || upstream.iter().any(|u| u.len() != n) {
            return Err(Error::ContractViolation(format!("upstream gradient must be {k} × {n}")));
        }
        Ok(Array2::from_shape_fn((k, n), |(r, j)| {
            let s = cache.squashed[(r, j)];
            upstream[r][j] * (self.upper[j] - self.lower[j]) * s * (1.0 - s)
        }))
    }

    /// Gradient of `Σ_k upstream[k] · x(λ_k)` with respect to every parameter.
    pub fn backward(&self, cache: &ForwardCache, upstream: &[Vec<f64>]) -> Result<Vec<f64>> {
        let mut delta = self.output_delta(cache, upstream)?;
        let mut grad = vec![0.0; self.params.len()];
        for l in (0..self.layers()).rev() {
            let (w, _) = self.layer(l);
            let prev = &cache.activations[l];
            let start = self.layer_offset(l);
            let (fan_out, fan_in) = w.dim();
            let mut dw = Array2::zeros((fan_out, fan_in));
            general_mat_mul(1.0, &delta.t(), prev, 0.0, &mut dw);
            grad[start..start + fan_in * fan_out].copy_from_slice(dw.as_slice().expect("standard layout"));
            let db: Array1<f64> = delta.sum_axis(Axis(0));
            grad[start + fan_in * fan_out..start + (fan_in + 1) * fan_out]
                .copy_from_slice(db.as_slice().expect("standard layout"));
            if l > 0 {
                let mut next = Array2::zeros((delta.nrows(), fan_in));
                general_mat_mul(1.0, &delta, &w, 0.0, &mut next);
                next.zip_mut_with(prev, |d, &a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
                delta = next;
            }
        }
        Ok(grad)
    }

    /// Jacobian `∂x/∂λ` (one row per decision variable).
    pub fn input_jacobian(&self, pref: &Preference) -> Result<Vec<Vec<f64>>> {
        let n = self.n();
        let (_, cache) = self.forward_cached(&vec![pref.clone(); n])?;
        let upstream: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(i == j)).collect()).collect();
        let mut delta = self.output_delta(&cache, &upstream)?;
        for l in (0..self.layers()).rev() {
            let (w, _) = self.layer(l);
            let mut next = Array2::zeros((n, w.ncols()));
            general_mat_mul(1.0, &delta, &w, 0.0, &mut next);
            if l > 0 {
                next.zip_mut_with(&cache.activations[l], |d, &a| {
                    if a <= 0.0 {
                        *d = 0.0;
                    }
                });
            }
            delta = next;
        }
        Ok(delta.rows().into_iter().map(|r| r.to_vec()).collect())
    }

    pub fn to_json(&self) -> Result<Vec<u8>> {
        Ok(serde_json::to_vec(self)?)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| match e.classify() {
            serde_json::error::Category::Data => Error::IncompatibleCheckpoint(e.to_string()),
            _ => Error::Json(e),
        })
    }

    /// Checks that a loaded model fits `problem`.
    pub fn check_compatible(&self, problem: &ProblemSpec) -> Result<()> {
        if self.problem != problem.name || self.m() != problem.m || self.n() != problem.n {
            return Err(Error::IncompatibleCheckpoint(format!(
                "model for {} (m={}, n={}) used with {} (m={}, n={})",
                self.problem,
                self.m(),
                self.n(),
                problem.name,
                problem.m,
                problem.n
            )));
        }
        Ok(())
    }
}

fn param_count(widths: &[usize]) -> usize {
    widths.windows(2).map(|p| (p[0] + 1) * p[1]).sum()
}

#[derive(Serialize, Deserialize)]
struct LayerFile {
    weights: Vec<f64>,
    bias: Vec<f64>,
}

/// On-disk layout: architecture, bounds, then layers from input to output.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    problem: String,
    m: usize,
    n: usize,
    widths: Vec<usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    layers: Vec<LayerFile>,
}

impl From<ParetoSetModel> for ModelFile {
    fn from(model: ParetoSetModel) -> Self {
        let layers = (0..model.layers())
            .map(|l| {
                let (w, b) = model.layer(l);
                LayerFile {
                    weights: w.iter().copied().collect(),
                    bias: b.to_vec(),
                }
            })
            .collect();
        Self {
            format: FORMAT.into(),
            problem: model.problem.clone(),
            m: model.m(),
            n: model.n(),
            widths: model.widths.clone(),
            lower: model.lower.clone(),
            upper: model.upper.clone(),
            layers,
        }
    }
}

impl TryFrom<ModelFile> for ParetoSetModel {
    type Error = Error;

    fn try_from(file: ModelFile) -> Result<Self> {
        let bad = |msg: String| Err(Error::IncompatibleCheckpoint(msg));
        if file.format != FORMAT {
            return bad(format!("unknown model format {:?}", file.format));
        }
        if file.widths.len() < 2 || file.widths[0] != file.m || file.widths.last() != Some(&file.n) {
            return bad(format!("widths {:?} do not match m={} n={}", file.widths, file.m, file.n));
        }
        if file.lower.len() != file.n || file.upper.len() != file.n {
            return bad(format!("bounds do not have n={} entries", file.n));
        }
        if file.layers.len() != file.widths.len() - 1 {
            return bad(format!("{} layers for widths {:?}", file.layers.len(), file.widths));
        }
        let mut params = Vec::with_capacity(param_count(&file.widths));
        for (l, layer) in file.layers.into_iter().enumerate() {
            let (fan_in, fan_out) = (file.widths[l], file.widths[l + 1]);
            if layer.weights.len() != fan_in * fan_out || layer.bias.len() != fan_out {
                return bad(format!("layer {l} does not match {fan_in} → {fan_out}"));
            }
            params.extend(layer.weights);
            params.extend(layer.bias);
        }
        Ok(Self {
            problem: file.problem,
            widths: file.widths,
            lower: file.lower,
            upper: file.upper,
            params,
            generation: 0,
        })
    }
}

/// Adam with bias correction.
#[derive(Debug, Clone)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    first: Vec<f64>,
    second: Vec<f64>,
    steps: i32,
}

impl Adam {
    pub fn new(size: usize, learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            first: vec![0.0; size],
            second: vec![0.0; size],
            steps: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.steps += 1;
        let c1 = 1.0 - self.beta1.powi(self.steps);
        let c2 = 1.0 - self.beta2.powi(self.steps);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.first).zip(&mut self.second) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= self.learning_rate * (*m / c1) / ((*v / c2).sqrt() + self.epsilon);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub steps: usize,
    pub preferences_per_step: usize,
    pub learning_rate: f64,
    pub beta: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            steps: 1000,
            preferences_per_step: 10,
            learning_rate: 1e-3,
            beta: 0.5,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.preferences_per_step == 0 {
            return Err(Error::InvalidConfig("preferences per step must be at least 1".into()));
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidConfig(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidConfig(format!("LCB beta {} must be non-negative", self.beta)));
        }
        Ok(())
    }
}

/// Augmented Tchebycheff value of the LCB at `x`, and its gradient in `x`.
pub fn lcb_scalarization(
    bundle: &SurrogateBundle,
    x: &[f64],
    pref: &Preference,
    state: &IdealState,
    beta: f64,
) -> (f64, Vec<f64>) {
    let predictions = bundle.predict_with_gradient(x);
    let f: Vec<f64> = predictions.iter().map(|p| p.lcb(beta)).collect();
    let jacobian: Vec<Vec<f64>> = predictions.iter().map(|p| p.lcb_gradient(beta)).collect();
    (tch_aug(&f, pref, state), tch_aug_gradient(&f, &jacobian, pref, state))
}

/// Summed scalarized LCB over `prefs` and its gradient in the model parameters.
pub fn loss_and_gradient(
    model: &ParetoSetModel,
    bundle: &SurrogateBundle,
    state: &IdealState,
    prefs: &[Preference],
    beta: f64,
) -> Result<(f64, Vec<f64>)> {
    let (xs, cache) = model.forward_cached(prefs)?;
    let mut loss = 0.0;
    let mut upstream = Vec::with_capacity(prefs.len());
    for (x, pref) in xs.iter().zip(prefs) {
        let (value, grad) = lcb_scalarization(bundle, x, pref, state, beta);
        loss += value;
        upstream.push(grad);
    }
    Ok((loss, model.backward(&cache, &upstream)?))
}

/// Mean scalarized LCB of the model's outputs over `prefs`.
pub fn mean_scalarized(
    model: &ParetoSetModel,
    bundle: &SurrogateBundle,
    state: &IdealState,
    prefs: &[Preference],
    beta: f64,
) -> Result<f64> {
    let xs = model.forward_batch(prefs)?;
    let total: f64 = xs
        .iter()
        .zip(prefs)
        .map(|(x, pref)| {
            let (mean, std) = bundle.predict(x);
            let f: Vec<f64> = mean.iter().zip(&std).map(|(m, s)| m - beta * s).collect();
            tch_aug(&f, pref, state)
        })
        .sum();
    Ok(total / prefs.len() as f64)
}

/// Trains a freshly initialized model against the surrogates.
pub fn train_psl(
    bundle: &SurrogateBundle,
    state: &IdealState,
    config: &TrainConfig,
    rng: &mut Rng,
) -> Result<ParetoSetModel> {
    config.validate()?;
    let mut model = ParetoSetModel::new(bundle.m(), bundle.lower(), bundle.upper(), rng);
    let mut adam = Adam::new(model.param_count(), config.learning_rate);
    for step in 0..config.steps {
        let prefs = sample_preferences(bundle.m(), config.preferences_per_step, rng);
        let (loss, grad) = loss_and_gradient(&model, bundle, state, &prefs, config.beta)?;
        if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::TrainingDiverged { step });
        }
        adam.step(&mut model.params, &grad);
        model.generation += 1;
    }
    Ok(model)
}
