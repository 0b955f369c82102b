//! Preference-weighted scalarizations of objective vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Augmentation weight of the weighted-sum term.
pub const RHO: f64 = 0.001;
/// Relative distance of the utopia point below the ideal point.
pub const EPSILON_FRACTION: f64 = 0.1;
/// Utopia offset used where an ideal coordinate is exactly zero.
pub const EPSILON_FLOOR: f64 = 1e-6;

/// A point on the preference simplex: non-negative weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Preference(Vec<f64>);

impl Preference {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(Error::InvalidPreference(format!(
                "need at least two weights, got {}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidPreference(format!(
                "weights must be finite and non-negative: {weights:?}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidPreference(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self(weights))
    }

    /// Rescales non-negative weights onto the simplex.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidPreference(format!(
                "weights must be finite and non-negative: {weights:?}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(Error::InvalidPreference("weights sum to zero".into()));
        }
        Self::new(weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for Preference {
    type Error = Error;

    fn try_from(weights: Vec<f64>) -> Result<Self> {
        Self::new(weights)
    }
}

impl From<Preference> for Vec<f64> {
    fn from(p: Preference) -> Self {
        p.0
    }
}

/// Ideal point `z*`, utopia offsets `ε` and augmentation weight `ρ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdealState {
    pub ideal: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub rho: f64,
}

impl IdealState {
    /// Utopia point `z* - ε`.
    pub fn utopia(&self) -> Vec<f64> {
        self.ideal.iter().zip(&self.epsilon).map(|(z, e)| z - e).collect()
    }
}

/// Componentwise best value over the evaluated archive.
pub fn update_ideal(values: &[Vec<f64>]) -> Result<IdealState> {
    let first = values.first().ok_or(Error::NoEvaluations)?;
    let mut ideal = first.clone();
    for v in &values[1..] {
        for (z, &f) in ideal.iter_mut().zip(v) {
            *z = z.min(f);
        }
    }
    let epsilon = ideal
        .iter()
        .map(|z| (EPSILON_FRACTION * z.abs()).max(EPSILON_FLOOR))
        .collect();
    Ok(IdealState { ideal, epsilon, rho: RHO })
}

pub fn weight_sum(f: &[f64], pref: &Preference) -> f64 {
    f.iter().zip(pref.weights()).map(|(v, w)| v * w).sum()
}

/// Index and value of the largest weighted deviation from the utopia point.
/// Ties resolve to the lowest index.
fn active_term(f: &[f64], pref: &Preference, state: &IdealState) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, ((v, w), (z, e))) in f
        .iter()
        .zip(pref.weights())
        .zip(state.ideal.iter().zip(&state.epsilon))
        .enumerate()
    {
        let term = w * (v - (z - e));
        if term > best.1 {
            best = (i, term);
        }
    }
    best
}

/// Weighted Tchebycheff distance to the utopia point.
pub fn tch(f: &[f64], pref: &Preference, state: &IdealState) -> f64 {
    active_term(f, pref, state).1
}

/// Augmented Tchebycheff scalarization.
pub fn tch_aug(f: &[f64], pref: &Preference, state: &IdealState) -> f64 {
    tch(f, pref, state) + state.rho * weight_sum(f, pref)
}

/// Subgradient of [`tch_aug`] with respect to `f`.
pub fn tch_aug_weights(f: &[f64], pref: &Preference, state: &IdealState) -> Vec<f64> {
    let (active, _) = active_term(f, pref, state);
    let w = pref.weights();
    let mut g: Vec<f64> = w.iter().map(|wi| state.rho * wi).collect();
    g[active] += w[active];
    g
}

/// Chain rule through a Jacobian `df/dx` (one row per objective).
pub fn tch_aug_gradient(f: &[f64], jacobian: &[Vec<f64>], pref: &Preference, state: &IdealState) -> Vec<f64> {
    let coeffs = tch_aug_weights(f, pref, state);
    let n = jacobian.first().map_or(0, Vec::len);
    let mut grad = vec![0.0; n];
    for (c, row) in coeffs.iter().zip(jacobian) {
        for (g, d) in grad.iter_mut().zip(row) {
            *g += c * d;
        }
    }
    grad
}
