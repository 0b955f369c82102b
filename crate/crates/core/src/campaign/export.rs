//! Front quality metrics and learned-front export.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hv::{hypervolume, non_dominated, non_dominated_indices};
use crate::problems::{ProblemSpec, REFERENCE_FRONT_POINTS};
use crate::psmodel::{sample_preferences, ParetoSetModel};
use crate::rng::Rng;
use crate::surrogate::SurrogateBundle;

/// Smallest hypervolume gap reported by [`log_hv_difference`].
pub const MIN_HV_DIFFERENCE: f64 = 1e-12;

/// Hypervolume of the problem's reference front.
pub fn front_hypervolume(problem: &ProblemSpec) -> Result<f64> {
    hypervolume(&problem.true_front(REFERENCE_FRONT_POINTS)?, &problem.reference_point)
}

/// `ln(HV(front) - HV(archive))`, clamped at `ln(1e-12)`.
pub fn log_hv_gap(front_hv: f64, archive: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    let gap = front_hv - hypervolume(&non_dominated(archive), reference)?;
    Ok(gap.max(MIN_HV_DIFFERENCE).ln())
}

pub fn log_hv_difference(archive: &[Vec<f64>], problem: &ProblemSpec) -> Result<f64> {
    log_hv_gap(front_hypervolume(problem)?, archive, &problem.reference_point)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontSample {
    pub lambda: Vec<f64>,
    pub x: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub non_dominated: bool,
}

/// How the reference hypervolume of a relative difference was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrontReference {
    /// Exact Pareto-optimal points for the same preferences.
    MatchedPreferences,
    /// A dense sample or an ingested front file.
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontReport {
    pub problem: String,
    pub samples: Vec<FrontSample>,
    pub predicted_front: Vec<Vec<f64>>,
    pub hypervolume: f64,
    pub reference_hypervolume: Option<f64>,
    pub reference: Option<FrontReference>,
    pub relative_hv_difference: Option<f64>,
}

/// Images of `count` sampled preferences under the model, scored by the
/// surrogate posterior and flagged when non-dominated among the means.
pub fn sample_front(
    model: &ParetoSetModel,
    bundle: &SurrogateBundle,
    count: usize,
    rng: &mut Rng,
) -> Result<Vec<FrontSample>> {
    if count == 0 {
        return Err(Error::InvalidConfig("export needs at least one preference".into()));
    }
    let prefs = sample_preferences(model.m(), count, rng);
    let xs = model.forward_batch(&prefs)?;
    let (means, stds): (Vec<Vec<f64>>, Vec<Vec<f64>>) = xs.iter().map(|x| bundle.predict(x)).unzip();
    let mut flags = vec![false; count];
    non_dominated_indices(&means).into_iter().for_each(|i| flags[i] = true);
    Ok(prefs
        .into_iter()
        .zip(xs)
        .zip(means.into_iter().zip(stds))
        .zip(flags)
        .map(|(((p, x), (mean, std)), non_dominated)| FrontSample {
            lambda: p.weights().to_vec(),
            x,
            mean,
            std,
            non_dominated,
        })
        .collect())
}

/// Samples the learned front and compares its hypervolume with the problem's.
///
/// When the problem has an analytic front and `utopia` is given, the
/// reference is the set of exact Tchebycheff optima for the same
/// preferences, so that the relative difference measures the model rather
/// than the sampling of the front.
pub fn export_front(
    model: &ParetoSetModel,
    bundle: &SurrogateBundle,
    problem: &ProblemSpec,
    count: usize,
    utopia: Option<&[f64]>,
    rng: &mut Rng,
) -> Result<FrontReport> {
    let samples = sample_front(model, bundle, count, rng)?;
    let predicted_front: Vec<Vec<f64>> = samples
        .iter()
        .filter(|s| s.non_dominated)
        .map(|s| s.mean.clone())
        .collect();
    let hv = hypervolume(&predicted_front, &problem.reference_point)?;

    let matched: Option<Vec<Vec<f64>>> = utopia.and_then(|u| {
        samples
            .iter()
            .map(|s| problem.tchebycheff_front_point(&s.lambda, u))
            .collect()
    });
    let (reference_hv, reference) = match matched {
        Some(points) => (
            Some(hypervolume(&non_dominated(&points), &problem.reference_point)?),
            Some(FrontReference::MatchedPreferences),
        ),
        None if problem.front_available() => (Some(front_hypervolume(problem)?), Some(FrontReference::Sampled)),
        None => (None, None),
    };
    let relative = reference_hv.filter(|r| *r > 0.0).map(|r| (r - hv).abs() / r);
    Ok(FrontReport {
        problem: problem.name.clone(),
        samples,
        predicted_front,
        hypervolume: hv,
        reference_hypervolume: reference_hv,
        reference,
        relative_hv_difference: relative,
    })
}
