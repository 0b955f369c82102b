//! Gaussian process surrogates with a Matérn 5/2 ARD kernel.
//!
//! Each objective gets an independent GP. Inputs are mapped to the unit cube
//! through the problem bounds and targets are standardized before fitting;
//! predictions are reported in the original objective units. Hyperparameters
//! are fitted by multi-start Adam on the negative log marginal likelihood in
//! log space.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

pub const NOISE_FLOOR: f64 = 1e-6;
pub const MAX_JITTER: f64 = 1e-2;
/// Posterior standard deviations (standardized scale) at or below this are
/// treated as degenerate: the noise floor alone leaves about this much
/// variance at a training input.
pub const DEGENERATE_STD: f64 = 1e-3;

const SQRT5: f64 = 2.236_067_977_499_79;
const LOG_2PI: f64 = 1.837_877_066_409_345_5;

const LOG_SIGNAL_BOUNDS: (f64, f64) = (-4.605_170_185_988_091, 4.605_170_185_988_091); // 1e-2 .. 1e2
const LOG_LENGTH_BOUNDS: (f64, f64) = (-4.605_170_185_988_091, 4.605_170_185_988_091);
const LOG_NOISE_BOUNDS: (f64, f64) = (-13.815_510_557_964_274, -4.605_170_185_988_091); // 1e-6 .. 1e-2

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub signal_variance: f64,
    pub lengthscales: Vec<f64>,
    pub noise_variance: f64,
}

impl KernelParams {
    pub fn new(signal_variance: f64, lengthscales: Vec<f64>, noise_variance: f64) -> Result<Self> {
        let p = Self {
            signal_variance,
            lengthscales,
            noise_variance,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.signal_variance)
            || self.lengthscales.is_empty()
            || !self.lengthscales.iter().all(|&l| positive(l))
        {
            return Err(Error::InvalidConfig(format!("kernel parameters must be positive: {self:?}")));
        }
        if !(self.noise_variance >= NOISE_FLOOR) || !self.noise_variance.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "noise variance {} below floor {NOISE_FLOOR}",
                self.noise_variance
            )));
        }
        Ok(())
    }

    fn to_log(&self) -> Vec<f64> {
        let mut theta = Vec::with_capacity(self.lengthscales.len() + 2);
        theta.push(self.signal_variance.ln());
        theta.extend(self.lengthscales.iter().map(|l| l.ln()));
        theta.push(self.noise_variance.ln());
        theta
    }

    fn from_log(theta: &[f64]) -> Self {
        let n = theta.len() - 2;
        Self {
            signal_variance: theta[0].exp(),
            lengthscales: theta[1..=n].iter().map(|t| t.exp()).collect(),
            noise_variance: theta[n + 1].exp().max(NOISE_FLOOR),
        }
    }
}

/// Matérn 5/2 profile at scaled distance `r`, unit amplitude.
fn matern_profile(r: f64) -> f64 {
    (1.0 + SQRT5 * r + 5.0 / 3.0 * r * r) * (-SQRT5 * r).exp()
}

/// `-(1/r) d/dr` of the profile, finite at `r = 0`.
fn matern_slope(r: f64) -> f64 {
    5.0 / 3.0 * (1.0 + SQRT5 * r) * (-SQRT5 * r).exp()
}

fn scaled_sq_distance(x: &[f64], y: &[f64], lengthscales: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .zip(lengthscales)
        .map(|((a, b), l)| {
            let d = (a - b) / l;
            d * d
        })
        .sum()
}

pub fn matern52(x: &[f64], y: &[f64], params: &KernelParams) -> f64 {
    let r = scaled_sq_distance(x, y, &params.lengthscales).sqrt();
    params.signal_variance * matern_profile(r)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpConfig {
    pub restarts: usize,
    pub steps: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            restarts: 4,
            steps: 200,
            learning_rate: 0.05,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub mean: f64,
    pub variance: f64,
}

impl Prediction {
    pub fn std(&self) -> f64 {
        self.variance.max(0.0).sqrt()
    }
}

/// Posterior mean and standard deviation with their input gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionGradient {
    pub mean: f64,
    pub std: f64,
    pub dmean: Vec<f64>,
    pub dstd: Vec<f64>,
    /// Standard deviation at the degenerate floor; `dstd` is zeroed.
    pub degenerate: bool,
}

impl PredictionGradient {
    pub fn lcb(&self, beta: f64) -> f64 {
        self.mean - beta * self.std
    }

    pub fn lcb_gradient(&self, beta: f64) -> Vec<f64> {
        self.dmean.iter().zip(&self.dstd).map(|(m, s)| m - beta * s).collect()
    }
}

/// A fitted single-objective GP over unit-cube inputs.
#[derive(Debug, Clone)]
pub struct GpModel {
    kernel: KernelParams,
    inputs: Vec<Vec<f64>>,
    targets: Vec<f64>,
    /// Lower Cholesky factor of `K + (noise + jitter) I`.
    factor: DMatrix<f64>,
    alpha: DVector<f64>,
    target_mean: f64,
    target_std: f64,
    jitter: f64,
}

fn standardize(y: &[f64]) -> (Vec<f64>, f64, f64) {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let mut std = var.sqrt();
    if !(std > 1e-12 * mean.abs().max(1.0)) {
        std = 1.0;
    }
    (y.iter().map(|v| (v - mean) / std).collect(), mean, std)
}

fn check_data(x: &[Vec<f64>], y: &[f64]) -> Result<usize> {
    if x.len() < 2 {
        return Err(Error::InvalidConfig(format!("GP fit needs at least 2 points, got {}", x.len())));
    }
    if x.len() != y.len() {
        return Err(Error::InvalidConfig(format!("{} inputs but {} targets", x.len(), y.len())));
    }
    let n = x[0].len();
    for row in x {
        if row.len() != n {
            return Err(Error::InvalidConfig("ragged GP inputs".into()));
        }
        if row.iter().any(|v| !(-1e-12..=1.0 + 1e-12).contains(v)) {
            return Err(Error::Domain(format!("GP input {row:?} outside the unit cube")));
        }
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite GP target".into()));
    }
    Ok(n)
}

/// Per-dimension squared differences between all pairs of inputs.
struct PairwiseDistances {
    n_points: usize,
    /// `sq[j][a * n_points + b]`
    sq: Vec<Vec<f64>>,
}

impl PairwiseDistances {
    fn new(x: &[Vec<f64>]) -> Self {
        let n_points = x.len();
        let dim = x[0].len();
        let mut sq = vec![vec![0.0; n_points * n_points]; dim];
        for a in 0..n_points {
            for b in 0..n_points {
                for (j, s) in sq.iter_mut().enumerate() {
                    let d = x[a][j] - x[b][j];
                    s[a * n_points + b] = d * d;
                }
            }
        }
        Self { n_points, sq }
    }

    fn scaled_radius(&self, lengthscales: &[f64]) -> Vec<f64> {
        let inv: Vec<f64> = lengthscales.iter().map(|l| 1.0 / (l * l)).collect();
        (0..self.n_points * self.n_points)
            .map(|idx| self.sq.iter().zip(&inv).map(|(s, w)| s[idx] * w).sum::<f64>().sqrt())
            .collect()
    }
}

fn gram(radius: &[f64], n_points: usize, signal_variance: f64, diagonal: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n_points, n_points, |a, b| {
        let k = signal_variance * matern_profile(radius[a * n_points + b]);
        if a == b {
            k + diagonal
        } else {
            k
        }
    })
}

/// Cholesky with jitter escalation from the noise floor up to `MAX_JITTER`.
fn factorize(radius: &[f64], n_points: usize, params: &KernelParams) -> Result<(Cholesky<f64, nalgebra::Dyn>, f64)> {
    let mut jitter = 0.0;
    loop {
        let k = gram(radius, n_points, params.signal_variance, params.noise_variance + jitter);
        if let Some(chol) = Cholesky::new(k) {
            return Ok((chol, jitter));
        }
        jitter = if jitter == 0.0 { NOISE_FLOOR } else { jitter * 2.0 };
        if jitter > MAX_JITTER {
            return Err(Error::IllConditioned { jitter: MAX_JITTER });
        }
    }
}

fn nll_value(chol: &Cholesky<f64, nalgebra::Dyn>, y: &DVector<f64>) -> (f64, DVector<f64>) {
    let alpha = chol.solve(y);
    let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
    let n = y.len() as f64;
    (0.5 * y.dot(&alpha) + log_det + 0.5 * n * LOG_2PI, alpha)
}

/// Negative log marginal likelihood and its gradient in log-hyperparameter
/// space (signal, lengthscales..., noise). `None` if the Gram matrix cannot
/// be factorized.
fn nll_and_gradient(dist: &PairwiseDistances, y: &DVector<f64>, theta: &[f64]) -> Option<(f64, Vec<f64>)> {
    let params = KernelParams::from_log(theta);
    let np = dist.n_points;
    let radius = dist.scaled_radius(&params.lengthscales);
    let (chol, jitter) = factorize(&radius, np, &params).ok()?;
    let (nll, alpha) = nll_value(&chol, y);
    if !nll.is_finite() {
        return None;
    }
    // W = K^-1 - alpha alpha^T; dNLL/dθ = 1/2 tr(W dK/dθ).
    let mut w = chol.inverse();
    w.ger(-1.0, &alpha, &alpha, 1.0);
    let dim = params.lengthscales.len();
    let mut grad = vec![0.0; dim + 2];
    let inv_l2: Vec<f64> = params.lengthscales.iter().map(|l| 1.0 / (l * l)).collect();
    for b in 0..np {
        for a in 0..np {
            let idx = a * np + b;
            let wab = w[(a, b)];
            let r = radius[idx];
            grad[0] += wab * params.signal_variance * matern_profile(r);
            let slope = params.signal_variance * matern_slope(r) * wab;
            for j in 0..dim {
                grad[1 + j] += slope * dist.sq[j][idx] * inv_l2[j];
            }
        }
        grad[dim + 1] += w[(b, b)] * (params.noise_variance + jitter);
    }
    grad.iter_mut().for_each(|g| *g *= 0.5);
    Some((nll, grad))
}

fn clamp_theta(theta: &mut [f64]) {
    let last = theta.len() - 1;
    theta[0] = theta[0].clamp(LOG_SIGNAL_BOUNDS.0, LOG_SIGNAL_BOUNDS.1);
    for t in &mut theta[1..last] {
        *t = t.clamp(LOG_LENGTH_BOUNDS.0, LOG_LENGTH_BOUNDS.1);
    }
    theta[last] = theta[last].clamp(LOG_NOISE_BOUNDS.0, LOG_NOISE_BOUNDS.1);
}

/// Default starting point for hyperparameter search on `n` unit-cube inputs.
pub fn initial_params(n: usize) -> KernelParams {
    KernelParams {
        signal_variance: 1.0,
        lengthscales: vec![0.5; n],
        noise_variance: 1e-4,
    }
}

/// Negative log marginal likelihood of standardized targets under `params`.
pub fn negative_log_likelihood(x: &[Vec<f64>], y: &[f64], params: &KernelParams) -> Result<f64> {
    check_data(x, y)?;
    let (ys, _, _) = standardize(y);
    let dist = PairwiseDistances::new(x);
    let radius = dist.scaled_radius(&params.lengthscales);
    let (chol, _) = factorize(&radius, x.len(), params)?;
    Ok(nll_value(&chol, &DVector::from_vec(ys)).0)
}

impl GpModel {
    /// Fits hyperparameters by multi-start Adam and conditions on the data.
    pub fn fit(x: &[Vec<f64>], y: &[f64], config: &GpConfig) -> Result<Self> {
        let dim = check_data(x, y)?;
        let (ys, _, _) = standardize(y);
        let yv = DVector::from_vec(ys);
        let dist = PairwiseDistances::new(x);
        let mut rng = rng::seeded(config.seed);

        let mut best: Option<(f64, Vec<f64>)> = None;
        for start in 0..config.restarts.max(1) {
            let mut theta = if start == 0 {
                initial_params(dim).to_log()
            } else {
                let mut t = Vec::with_capacity(dim + 2);
                t.push(rng.random_range(-0.7..0.7));
                for _ in 0..dim {
                    t.push(rng.random_range(-2.3..0.7));
                }
                t.push(rng.random_range(-13.8..-6.9));
                t
            };
            clamp_theta(&mut theta);
            let mut first_moment = vec![0.0; theta.len()];
            let mut second_moment = vec![0.0; theta.len()];
            for step in 0..=config.steps {
                let Some((nll, grad)) = nll_and_gradient(&dist, &yv, &theta) else {
                    break;
                };
                if best.as_ref().is_none_or(|(b, _)| nll < *b) {
                    best = Some((nll, theta.clone()));
                }
                if step == config.steps || grad.iter().any(|g| !g.is_finite()) {
                    break;
                }
                let t = (step + 1) as i32;
                for i in 0..theta.len() {
                    first_moment[i] = 0.9 * first_moment[i] + 0.1 * grad[i];
                    second_moment[i] = 0.999 * second_moment[i] + 0.001 * grad[i] * grad[i];
                    let m_hat = first_moment[i] / (1.0 - 0.9f64.powi(t));
                    let v_hat = second_moment[i] / (1.0 - 0.999f64.powi(t));
                    theta[i] -= config.learning_rate * m_hat / (v_hat.sqrt() + 1e-8);
                }
                clamp_theta(&mut theta);
            }
        }
        let params = match best {
            Some((_, theta)) => KernelParams::from_log(&theta),
            None => initial_params(dim),
        };
        Self::with_params(x, y, params)
    }

    /// Conditions a GP with fixed hyperparameters on the data.
    pub fn with_params(x: &[Vec<f64>], y: &[f64], kernel: KernelParams) -> Result<Self> {
        let dim = check_data(x, y)?;
        kernel.validate()?;
        if kernel.lengthscales.len() != dim {
            return Err(Error::InvalidConfig(format!(
                "{} lengthscales for {dim}-dimensional inputs",
                kernel.lengthscales.len()
            )));
        }
        let (targets, target_mean, target_std) = standardize(y);
        let dist = PairwiseDistances::new(x);
        let radius = dist.scaled_radius(&kernel.lengthscales);
        let (chol, jitter) = factorize(&radius, x.len(), &kernel)?;
        let alpha = chol.solve(&DVector::from_column_slice(&targets));
        Ok(Self {
            factor: chol.unpack(),
            kernel,
            inputs: x.to_vec(),
            targets,
            alpha,
            target_mean,
            target_std,
            jitter,
        })
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    pub fn dim(&self) -> usize {
        self.kernel.lengthscales.len()
    }

    pub fn training_inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    /// Standardized training targets.
    pub fn training_targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn factored_gram(&self) -> &DMatrix<f64> {
        &self.factor
    }

    pub fn target_mean(&self) -> f64 {
        self.target_mean
    }

    pub fn target_std(&self) -> f64 {
        self.target_std
    }

    /// Jitter added on top of the noise variance to factorize the Gram matrix.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Negative log marginal likelihood of the standardized targets.
    pub fn negative_log_likelihood(&self) -> f64 {
        let log_det: f64 = self.factor.diagonal().iter().map(|d| d.ln()).sum();
        let y = DVector::from_column_slice(&self.targets);
        0.5 * y.dot(&self.alpha) + log_det + 0.5 * self.targets.len() as f64 * LOG_2PI
    }

    fn kernel_vector(&self, u: &[f64]) -> DVector<f64> {
        DVector::from_iterator(
            self.inputs.len(),
            self.inputs.iter().map(|xi| matern52(u, xi, &self.kernel)),
        )
    }

    /// Standardized posterior mean and variance.
    fn standardized(&self, k: &DVector<f64>) -> (f64, f64, DVector<f64>) {
        let mean = k.dot(&self.alpha);
        let w = self
            .factor
            .solve_lower_triangular(k)
            .expect("Cholesky factor has a positive diagonal");
        let variance = (self.kernel.signal_variance - w.dot(&w)).max(0.0);
        (mean, variance, w)
    }

    /// Posterior mean and variance at a unit-cube input, in objective units.
    pub fn predict(&self, u: &[f64]) -> Prediction {
        let k = self.kernel_vector(u);
        let (mean, variance, _) = self.standardized(&k);
        Prediction {
            mean: self.target_mean + self.target_std * mean,
            variance: self.target_std * self.target_std * variance,
        }
    }

    /// Posterior mean and standard deviation with gradients with respect to
    /// the unit-cube input.
    pub fn predict_gradient(&self, u: &[f64]) -> PredictionGradient {
        let dim = u.len();
        let np = self.inputs.len();
        let mut k = DVector::zeros(np);
        // dk_a/du = -slope(r) * s2 * (u - x_a) / l^2
        let mut coeff = vec![0.0; np];
        let inv_l2: Vec<f64> = self.kernel.lengthscales.iter().map(|l| 1.0 / (l * l)).collect();
        for (a, xa) in self.inputs.iter().enumerate() {
            let r = scaled_sq_distance(u, xa, &self.kernel.lengthscales).sqrt();
            k[a] = self.kernel.signal_variance * matern_profile(r);
            coeff[a] = -self.kernel.signal_variance * matern_slope(r);
        }
        let (mean_s, var_s, w) = self.standardized(&k);
        let v = self
            .factor
            .tr_solve_lower_triangular(&w)
            .expect("Cholesky factor has a positive diagonal");
        let mut dmean = vec![0.0; dim];
        let mut dvar = vec![0.0; dim];
        for (a, xa) in self.inputs.iter().enumerate() {
            let ca = coeff[a];
            let (am, av) = (self.alpha[a] * ca, -2.0 * v[a] * ca);
            for j in 0..dim {
                let dk = (u[j] - xa[j]) * inv_l2[j];
                dmean[j] += am * dk;
                dvar[j] += av * dk;
            }
        }
        let std_s = var_s.sqrt();
        let degenerate = std_s <= DEGENERATE_STD;
        let scale = self.target_std;
        PredictionGradient {
            mean: self.target_mean + scale * mean_s,
            std: scale * std_s,
            dmean: dmean.iter().map(|d| scale * d).collect(),
            dstd: if degenerate {
                vec![0.0; dim]
            } else {
                dvar.iter().map(|d| scale * d / (2.0 * std_s)).collect()
            },
            degenerate,
        }
    }

    /// Lower confidence bound `mean - beta * std` in objective units.
    pub fn lcb(&self, u: &[f64], beta: f64) -> f64 {
        let p = self.predict(u);
        p.mean - beta * p.std()
    }
}

/// Independent GPs, one per objective, over a shared box-bounded input space.
#[derive(Debug, Clone)]
pub struct SurrogateBundle {
    models: Vec<GpModel>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

fn transpose(ys: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = ys.first().map_or(0, Vec::len);
    (0..m).map(|i| ys.iter().map(|y| y[i]).collect()).collect()
}

impl SurrogateBundle {
    pub fn fit(xs: &[Vec<f64>], ys: &[Vec<f64>], lower: &[f64], upper: &[f64], config: &GpConfig) -> Result<Self> {
        let unit: Vec<Vec<f64>> = xs.iter().map(|x| to_unit(x, lower, upper)).collect();
        let models = transpose(ys)
            .iter()
            .enumerate()
            .map(|(i, y)| {
                let cfg = GpConfig {
                    seed: config.seed.wrapping_add(i as u64),
                    ..config.clone()
                };
                GpModel::fit(&unit, y, &cfg)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            models,
            lower: lower.to_vec(),
            upper: upper.to_vec(),
        })
    }

    /// Rebuilds a bundle from stored hyperparameters without refitting.
    pub fn from_params(
        xs: &[Vec<f64>],
        ys: &[Vec<f64>],
        lower: &[f64],
        upper: &[f64],
        params: &[KernelParams],
    ) -> Result<Self> {
        let unit: Vec<Vec<f64>> = xs.iter().map(|x| to_unit(x, lower, upper)).collect();
        let columns = transpose(ys);
        if columns.len() != params.len() {
            return Err(Error::IncompatibleCheckpoint(format!(
                "{} kernels for {} objectives",
                params.len(),
                columns.len()
            )));
        }
        let models = columns
            .iter()
            .zip(params)
            .map(|(y, p)| GpModel::with_params(&unit, y, p.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            models,
            lower: lower.to_vec(),
            upper: upper.to_vec(),
        })
    }

    pub fn models(&self) -> &[GpModel] {
        &self.models
    }

    pub fn kernels(&self) -> Vec<KernelParams> {
        self.models.iter().map(|m| m.kernel.clone()).collect()
    }

    pub fn m(&self) -> usize {
        self.models.len()
    }

    pub fn n(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        to_unit(x, &self.lower, &self.upper)
    }

    /// Posterior means and standard deviations per objective.
    pub fn predict(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let u = self.to_unit(x);
        self.models
            .iter()
            .map(|model| {
                let p = model.predict(&u);
                (p.mean, p.std())
            })
            .unzip()
    }

    pub fn lcb(&self, x: &[f64], beta: f64) -> Vec<f64> {
        let (mean, std) = self.predict(x);
        mean.iter().zip(&std).map(|(m, s)| m - beta * s).collect()
    }

    /// Predictions with gradients with respect to `x` in problem units.
    pub fn predict_with_gradient(&self, x: &[f64]) -> Vec<PredictionGradient> {
        let u = self.to_unit(x);
        self.models
            .iter()
            .map(|model| {
                let mut g = model.predict_gradient(&u);
                for (j, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
                    let scale = 1.0 / (hi - lo);
                    g.dmean[j] *= scale;
                    g.dstd[j] *= scale;
                }
                g
            })
            .collect()
    }
}

pub fn to_unit(x: &[f64], lower: &[f64], upper: &[f64]) -> Vec<f64> {
    x.iter()
        .zip(lower.iter().zip(upper))
        .map(|(v, (lo, hi))| ((v - lo) / (hi - lo)).clamp(0.0, 1.0))
        .collect()
}
