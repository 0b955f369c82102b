//! Structured run log.

use serde::{Deserialize, Serialize};

use super::{CampaignConfig, Strategy};
use crate::surrogate::KernelParams;

/// Wall-clock seconds per phase of one iteration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub surrogate_fit: f64,
    pub model_training: f64,
    pub selection: f64,
    pub evaluation: f64,
}

impl Timing {
    /// Model training plus selection, the per-iteration cost of the method.
    pub fn training_and_selection(&self) -> f64 {
        self.model_training + self.selection
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub problem: String,
    pub strategy: Strategy,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub reference_point: Vec<f64>,
    pub version: String,
    pub config: CampaignConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialDesign {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub archive_hv: f64,
    pub log_hv_difference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Preference that generated each selected design; absent for
    /// model-free batches.
    pub preferences: Vec<Option<Vec<f64>>>,
    pub x: Vec<Vec<f64>>,
    /// Surrogate LCB, mean and standard deviation at selection time.
    pub surrogate_lcb: Vec<Vec<f64>>,
    pub surrogate_mean: Vec<Vec<f64>>,
    pub surrogate_std: Vec<Vec<f64>>,
    /// Predicted hypervolume gain of each greedy round.
    pub predicted_gain: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub ideal: Vec<f64>,
    pub kernels: Vec<KernelParams>,
    pub archive_hv: f64,
    pub log_hv_difference: Option<f64>,
    pub duplicate_warning: bool,
    pub timing: Timing,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub iterations: usize,
    pub mean: Timing,
    pub max_training_and_selection: f64,
    pub final_model: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub evaluations: usize,
    pub final_hv: f64,
    pub log_hv_difference: Option<f64>,
    /// Relative hypervolume difference of the final learned front.
    pub relative_hv_difference: Option<f64>,
    pub timing: TimingSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub header: Header,
    pub initial: InitialDesign,
    pub iterations: Vec<IterationRecord>,
    pub summary: Option<Summary>,
}

impl RunLog {
    pub fn evaluations(&self) -> usize {
        self.initial.x.len() + self.iterations.iter().map(|r| r.x.len()).sum::<usize>()
    }

    /// Archive hypervolume after the initial design and after each iteration.
    pub fn hv_trace(&self) -> Vec<f64> {
        std::iter::once(self.initial.archive_hv)
            .chain(self.iterations.iter().map(|r| r.archive_hv))
            .collect()
    }

    pub fn timing_summary(&self, final_model: f64) -> TimingSummary {
        let k = self.iterations.len();
        let mut mean = Timing::default();
        let mut max_ts: f64 = 0.0;
        for r in &self.iterations {
            mean.surrogate_fit += r.timing.surrogate_fit;
            mean.model_training += r.timing.model_training;
            mean.selection += r.timing.selection;
            mean.evaluation += r.timing.evaluation;
            max_ts = max_ts.max(r.timing.training_and_selection());
        }
        if k > 0 {
            let d = k as f64;
            mean.surrogate_fit /= d;
            mean.model_training /= d;
            mean.selection /= d;
            mean.evaluation /= d;
        }
        TimingSummary {
            iterations: k,
            mean,
            max_training_and_selection: max_ts,
            final_model,
        }
    }

    /// Per-iteration timing in the "training + selection = total" format.
    pub fn timing_table(&self) -> String {
        let mut out = String::from("iter  fit(s)  train(s) + select(s) = total(s)\n");
        for r in &self.iterations {
            let t = r.timing;
            out.push_str(&format!(
                "{:>4}  {:>6.2}  {:>8.2} + {:>9.2} = {:>8.2}\n",
                r.iteration,
                t.surrogate_fit,
                t.model_training,
                t.selection,
                t.training_and_selection()
            ));
        }
        let s = self.timing_summary(0.0);
        out.push_str(&format!(
            "mean  {:>6.2}  {:>8.2} + {:>9.2} = {:>8.2}\n",
            s.mean.surrogate_fit,
            s.mean.model_training,
            s.mean.selection,
            s.mean.training_and_selection()
        ));
        out
    }
}

/// Removes every wall-clock field from a serialized log so two runs can be
/// compared.
pub fn strip_timing(value: &mut serde_json::Value) {
    match value {
        serde_json::Value::Object(map) => {
            map.retain(|k, _| k != "timing");
            map.values_mut().for_each(strip_timing);
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(strip_timing),
        _ => {}
    }
}
