//! The outer optimization loop.
//!
//! A campaign evaluates a Latin hypercube design, then repeatedly refits the
//! surrogates, proposes a batch of designs and evaluates it. Three proposal
//! strategies share the same budget accounting: the learned Pareto set model,
//! scalarization optimized directly in decision space (no model), and a
//! scrambled Sobol sequence.
//!
//! Every random draw comes from a stream addressed by `(seed, phase,
//! iteration)`, so a campaign restored from a checkpoint continues exactly
//! as the uninterrupted run would.

mod design;
mod export;
mod log;

use std::path::{Path, PathBuf};
use std::time::Instant;

use ::log::warn;
use rand::RngExt;
use serde::{Deserialize, Serialize};

pub use design::{lhs, sobol_points};
pub use export::{
    export_front, front_hypervolume, log_hv_difference, log_hv_gap, sample_front, FrontReference, FrontReport,
    FrontSample, MIN_HV_DIFFERENCE,
};
pub use log::{strip_timing, Header, InitialDesign, IterationRecord, RunLog, Summary, Timing, TimingSummary};

use crate::error::{Error, Result};
use crate::hv::{greedy_select, hypervolume, non_dominated, Candidate, FrontArchive};
use crate::problems::{make_problem, ProblemSpec};
use crate::psmodel::{lcb_scalarization, sample_preferences, train_psl, Adam, ParetoSetModel, TrainConfig};
use crate::rng::{self, Phase};
use crate::scalarize::{tch_aug, update_ideal, IdealState, Preference};
use crate::surrogate::{GpConfig, KernelParams, SurrogateBundle};

/// Candidates closer than this (max-norm) to an evaluated design are dropped.
pub const ARCHIVE_DUPLICATE_TOLERANCE: f64 = 1e-9;
/// Candidates closer than this to an earlier candidate are dropped.
pub const CANDIDATE_DUPLICATE_TOLERANCE: f64 = 1e-12;

const CHECKPOINT_FORMAT: &str = "psl-campaign/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Learned Pareto set model with greedy hypervolume selection.
    Psl,
    /// Augmented Tchebycheff LCB minimized per preference in decision space.
    NoModel,
    /// Scrambled Sobol batches after the shared initial design.
    Sobol,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub problem: String,
    pub n_init: usize,
    pub n_iterations: usize,
    pub batch_size: usize,
    pub candidate_count: usize,
    pub lcb_beta: f64,
    pub seed: u64,
    /// Network training; its `beta` is replaced by `lcb_beta`.
    pub train: TrainConfig,
    pub gp: GpConfig,
    /// Projected-gradient steps applied to each candidate before selection.
    pub refine_steps: usize,
    /// Preferences optimized per iteration by the no-model baseline; `None`
    /// uses `candidate_count`.
    pub baseline_preferences: Option<usize>,
    /// Restarts and steps of the no-model baseline's decision-space search.
    pub baseline_starts: usize,
    pub baseline_steps: usize,
    pub baseline_learning_rate: f64,
    pub front_file: Option<PathBuf>,
}

impl CampaignConfig {
    pub fn new(problem: &str, seed: u64) -> Self {
        Self {
            problem: problem.to_string(),
            n_init: 10,
            n_iterations: 20,
            batch_size: 5,
            candidate_count: 1000,
            lcb_beta: 0.5,
            seed,
            train: TrainConfig::default(),
            gp: GpConfig::default(),
            refine_steps: 0,
            baseline_preferences: None,
            baseline_starts: 5,
            baseline_steps: 50,
            baseline_learning_rate: 0.02,
            front_file: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_init < 2 {
            return fail(format!("n_init must be at least 2, got {}", self.n_init));
        }
        if self.batch_size == 0 {
            return fail("batch size must be at least 1".into());
        }
        if self.candidate_count < self.batch_size {
            return fail(format!(
                "candidate count {} is smaller than batch size {}",
                self.candidate_count, self.batch_size
            ));
        }
        if !(self.lcb_beta >= 0.0) || !self.lcb_beta.is_finite() {
            return fail(format!("LCB beta {} must be non-negative", self.lcb_beta));
        }
        if self.baseline_preferences.is_some_and(|p| p < self.batch_size) {
            return fail("baseline preferences must be at least the batch size".into());
        }
        if self.baseline_starts == 0 || !(self.baseline_learning_rate > 0.0) {
            return fail("baseline search needs at least one start and a positive step".into());
        }
        self.train.validate()
    }

    pub fn total_evaluations(&self) -> usize {
        self.n_init + self.n_iterations * self.batch_size
    }

    fn train_config(&self, beta: f64) -> TrainConfig {
        TrainConfig { beta, ..self.train.clone() }
    }

    fn problem_spec(&self) -> Result<ProblemSpec> {
        let problem = make_problem(&self.problem)?;
        Ok(match &self.front_file {
            Some(path) => problem.with_front_file(path),
            None => problem,
        })
    }
}

/// Evaluated archive of a campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignState {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub ideal: IdealState,
    /// Completed iterations after the initial design.
    pub iteration: usize,
}

/// Final posterior-mean model and the surrogate hyperparameters it was trained on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalModel {
    pub model: ParetoSetModel,
    pub kernels: Vec<KernelParams>,
    pub ideal: IdealState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub strategy: Strategy,
    pub config: CampaignConfig,
    pub state: CampaignState,
    pub log: RunLog,
    pub final_model: Option<FinalModel>,
}

impl Checkpoint {
    pub fn problem(&self) -> Result<ProblemSpec> {
        self.config.problem_spec()
    }

    /// Surrogates of the final model, rebuilt from stored hyperparameters.
    pub fn final_surrogates(&self) -> Result<Option<SurrogateBundle>> {
        let Some(fm) = &self.final_model else {
            return Ok(None);
        };
        let p = self.problem()?;
        SurrogateBundle::from_params(&self.state.x, &self.state.y, &p.lower_bounds, &p.upper_bounds, &fm.kernels)
            .map(Some)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path, &serde_json::to_vec(self)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        let cp: Self = serde_json::from_slice(&bytes).map_err(|e| Error::IncompatibleCheckpoint(e.to_string()))?;
        if cp.format != CHECKPOINT_FORMAT {
            return Err(Error::IncompatibleCheckpoint(format!("unknown campaign format {:?}", cp.format)));
        }
        let p = cp.problem()?;
        let consistent = cp.state.x.len() == cp.state.y.len()
            && cp.state.x.len() == cp.config.n_init + cp.state.iteration * cp.config.batch_size
            && cp.state.x.iter().all(|x| x.len() == p.n)
            && cp.state.y.iter().all(|y| y.len() == p.m)
            && cp.log.iterations.len() == cp.state.iteration;
        if !consistent {
            return Err(Error::IncompatibleCheckpoint("archive does not match the recorded configuration".into()));
        }
        if let Some(fm) = &cp.final_model {
            fm.model.check_compatible(&p)?;
        }
        Ok(cp)
    }
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Designs proposed for one iteration, with what the surrogates said about them.
struct Proposal {
    preferences: Vec<Option<Vec<f64>>>,
    x: Vec<Vec<f64>>,
    lcb: Vec<Vec<f64>>,
    mean: Vec<Vec<f64>>,
    std: Vec<Vec<f64>>,
    gain: Vec<f64>,
    kernels: Vec<KernelParams>,
    duplicate_warning: bool,
}

/// Result of a completed campaign.
#[derive(Debug, Clone)]
pub struct CampaignOutcome {
    pub log: RunLog,
    pub state: CampaignState,
    pub final_model: Option<FinalModel>,
    pub surrogates: Option<SurrogateBundle>,
    pub report: Option<FrontReport>,
}

impl CampaignOutcome {
    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            strategy: self.log.header.strategy,
            config: self.log.header.config.clone(),
            state: self.state.clone(),
            log: self.log.clone(),
            final_model: self.final_model.clone(),
        }
    }
}

pub struct Campaign {
    config: CampaignConfig,
    strategy: Strategy,
    problem: ProblemSpec,
    state: CampaignState,
    log: RunLog,
    front_hv: Option<f64>,
}

fn max_norm_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

impl Campaign {
    /// Validates the configuration and evaluates the initial design.
    pub fn new(config: CampaignConfig, strategy: Strategy) -> Result<Self> {
        config.validate()?;
        let problem = config.problem_spec()?;
        let front_hv = problem.front_available().then(|| front_hypervolume(&problem)).transpose()?;
        let x = lhs(
            &problem.lower_bounds,
            &problem.upper_bounds,
            config.n_init,
            &mut rng::stream(config.seed, Phase::Init, 0),
        );
        let y = x.iter().map(|xi| problem.evaluate(xi)).collect::<Result<Vec<_>>>()?;
        let ideal = update_ideal(&y)?;
        let archive_hv = hypervolume(&non_dominated(&y), &problem.reference_point)?;
        let log_hv = front_hv.map(|f| log_hv_gap(f, &y, &problem.reference_point)).transpose()?;
        let log = RunLog {
            header: Header {
                problem: problem.name.clone(),
                strategy,
                seed: config.seed,
                n: problem.n,
                m: problem.m,
                reference_point: problem.reference_point.clone(),
                version: env!("CARGO_PKG_VERSION").to_string(),
                config: config.clone(),
            },
            initial: InitialDesign {
                x: x.clone(),
                y: y.clone(),
                archive_hv,
                log_hv_difference: log_hv,
            },
            iterations: Vec::new(),
            summary: None,
        };
        Ok(Self {
            config,
            strategy,
            problem,
            state: CampaignState {
                x,
                y,
                ideal,
                iteration: 0,
            },
            log,
            front_hv,
        })
    }

    /// Restores a campaign; `expected_problem` guards against resuming the wrong run.
    pub fn resume(checkpoint: Checkpoint, expected_problem: Option<&str>) -> Result<Self> {
        if let Some(name) = expected_problem {
            if name != checkpoint.config.problem {
                return Err(Error::IncompatibleCheckpoint(format!(
                    "checkpoint is for {}, not {name}",
                    checkpoint.config.problem
                )));
            }
        }
        checkpoint.config.validate()?;
        let problem = checkpoint.problem()?;
        let front_hv = problem.front_available().then(|| front_hypervolume(&problem)).transpose()?;
        let mut log = checkpoint.log;
        log.summary = None;
        Ok(Self {
            config: checkpoint.config,
            strategy: checkpoint.strategy,
            problem,
            state: checkpoint.state,
            log,
            front_hv,
        })
    }

    pub fn config(&self) -> &CampaignConfig {
        &self.config
    }

    pub fn problem(&self) -> &ProblemSpec {
        &self.problem
    }

    pub fn state(&self) -> &CampaignState {
        &self.state
    }

    pub fn log(&self) -> &RunLog {
        &self.log
    }

    pub fn is_finished(&self) -> bool {
        self.state.iteration >= self.config.n_iterations
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            format: CHECKPOINT_FORMAT.into(),
            strategy: self.strategy,
            config: self.config.clone(),
            state: self.state.clone(),
            log: self.log.clone(),
            final_model: None,
        }
    }

    fn fit_surrogates(&self, iteration: usize) -> Result<SurrogateBundle> {
        let gp = GpConfig {
            seed: rng::stream(self.config.seed, Phase::SurrogateFit, iteration).random(),
            ..self.config.gp.clone()
        };
        SurrogateBundle::fit(
            &self.state.x,
            &self.state.y,
            &self.problem.lower_bounds,
            &self.problem.upper_bounds,
            &gp,
        )
    }

    fn train(&self, bundle: &SurrogateBundle, ideal: &IdealState, iteration: usize, beta: f64) -> Result<ParetoSetModel> {
        let config = self.config.train_config(beta);
        let seed = self.config.seed;
        let model = match train_psl(bundle, ideal, &config, &mut rng::stream(seed, Phase::Training, iteration)) {
            Err(Error::TrainingDiverged { step }) => {
                warn!("training diverged at step {step} in iteration {iteration}; retrying with a fresh start");
                train_psl(bundle, ideal, &config, &mut rng::stream(seed, Phase::TrainingRetry, iteration))?
            }
            other => other?,
        };
        Ok(model.with_problem(&self.problem.name))
    }

    /// Runs one iteration. On error the campaign state is left unchanged.
    pub fn step(&mut self) -> Result<()> {
        if self.is_finished() {
            return Err(Error::InvalidConfig("campaign already finished".into()));
        }
        let t = self.state.iteration;
        let mut timing = Timing::default();
        let proposal = match self.strategy {
            Strategy::Psl => self.propose_psl(t, &mut timing)?,
            Strategy::NoModel => self.propose_no_model(t, &mut timing)?,
            Strategy::Sobol => self.propose_sobol(t, &mut timing),
        };
        let clock = Instant::now();
        let y = proposal
            .x
            .iter()
            .map(|x| self.problem.evaluate(x))
            .collect::<Result<Vec<_>>>()?;
        timing.evaluation = clock.elapsed().as_secs_f64();

        self.state.x.extend(proposal.x.iter().cloned());
        self.state.y.extend(y.iter().cloned());
        self.state.ideal = update_ideal(&self.state.y)?;
        self.state.iteration += 1;
        let archive_hv = hypervolume(&non_dominated(&self.state.y), &self.problem.reference_point)?;
        let log_hv = self
            .front_hv
            .map(|f| log_hv_gap(f, &self.state.y, &self.problem.reference_point))
            .transpose()?;
        self.log.iterations.push(IterationRecord {
            iteration: t,
            preferences: proposal.preferences,
            x: proposal.x,
            surrogate_lcb: proposal.lcb,
            surrogate_mean: proposal.mean,
            surrogate_std: proposal.std,
            predicted_gain: proposal.gain,
            y,
            ideal: self.state.ideal.ideal.clone(),
            kernels: proposal.kernels,
            archive_hv,
            log_hv_difference: log_hv,
            duplicate_warning: proposal.duplicate_warning,
            timing,
        });
        Ok(())
    }

    fn propose_psl(&self, t: usize, timing: &mut Timing) -> Result<Proposal> {
        let clock = Instant::now();
        let bundle = self.fit_surrogates(t)?;
        let ideal = update_ideal(&self.state.y)?;
        timing.surrogate_fit = clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let model = self.train(&bundle, &ideal, t, self.config.lcb_beta)?;
        timing.model_training = clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let mut rng = rng::stream(self.config.seed, Phase::Candidates, t);
        let prefs = sample_preferences(self.problem.m, self.config.candidate_count, &mut rng);
        let mut xs = model.forward_batch(&prefs)?;
        if self.config.refine_steps > 0 {
            for (x, pref) in xs.iter_mut().zip(&prefs) {
                *x = self.minimize_in_box(&bundle, &ideal, pref, x.clone(), self.config.refine_steps).0;
            }
        }
        let proposal = self.select(&bundle, xs, prefs.into_iter().map(Some).collect())?;
        timing.selection = clock.elapsed().as_secs_f64();
        Ok(proposal)
    }

    fn propose_no_model(&self, t: usize, timing: &mut Timing) -> Result<Proposal> {
        let clock = Instant::now();
        let bundle = self.fit_surrogates(t)?;
        let ideal = update_ideal(&self.state.y)?;
        timing.surrogate_fit = clock.elapsed().as_secs_f64();

        let clock = Instant::now();
        let mut rng = rng::stream(self.config.seed, Phase::Baseline, t);
        let count = self.config.baseline_preferences.unwrap_or(self.config.candidate_count);
        let prefs = sample_preferences(self.problem.m, count, &mut rng);
        let (lo, hi) = (&self.problem.lower_bounds, &self.problem.upper_bounds);
        let mut xs = Vec::with_capacity(count);
        for pref in &prefs {
            let mut best: Option<(Vec<f64>, f64)> = None;
            for _ in 0..self.config.baseline_starts {
                let start: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| l + rng.random::<f64>() * (h - l)).collect();
                let found = self.minimize_in_box(&bundle, &ideal, pref, start, self.config.baseline_steps);
                if best.as_ref().is_none_or(|b| found.1 < b.1) {
                    best = Some(found);
                }
            }
            xs.push(best.expect("at least one start").0);
        }
        let proposal = self.select(&bundle, xs, prefs.into_iter().map(Some).collect())?;
        timing.selection = clock.elapsed().as_secs_f64();
        Ok(proposal)
    }

    fn propose_sobol(&self, t: usize, timing: &mut Timing) -> Proposal {
        let clock = Instant::now();
        let scramble = rng::stream(self.config.seed, Phase::Baseline, 0).random::<u32>();
        let b = self.config.batch_size;
        let x = sobol_points(&self.problem.lower_bounds, &self.problem.upper_bounds, t * b, b, scramble);
        timing.selection = clock.elapsed().as_secs_f64();
        Proposal {
            preferences: vec![None; b],
            x,
            lcb: Vec::new(),
            mean: Vec::new(),
            std: Vec::new(),
            gain: Vec::new(),
            kernels: Vec::new(),
            duplicate_warning: false,
        }
    }

    /// Projected Adam on the augmented Tchebycheff LCB, in unit-cube
    /// coordinates. Returns the final design and its scalarized value.
    fn minimize_in_box(
        &self,
        bundle: &SurrogateBundle,
        ideal: &IdealState,
        pref: &Preference,
        start: Vec<f64>,
        steps: usize,
    ) -> (Vec<f64>, f64) {
        let (lo, hi) = (&self.problem.lower_bounds, &self.problem.upper_bounds);
        let beta = self.config.lcb_beta;
        let mut u: Vec<f64> = start.iter().zip(lo.iter().zip(hi)).map(|(x, (l, h))| (x - l) / (h - l)).collect();
        let to_x = |u: &[f64]| -> Vec<f64> { u.iter().zip(lo.iter().zip(hi)).map(|(t, (l, h))| l + t * (h - l)).collect() };
        let mut adam = Adam::new(u.len(), self.config.baseline_learning_rate);
        for _ in 0..steps {
            let (_, grad_x) = lcb_scalarization(bundle, &to_x(&u), pref, ideal, beta);
            let grad_u: Vec<f64> = grad_x.iter().zip(lo.iter().zip(hi)).map(|(g, (l, h))| g * (h - l)).collect();
            adam.step(&mut u, &grad_u);
            u.iter_mut().for_each(|t| *t = t.clamp(0.0, 1.0));
        }
        let x = to_x(&u);
        let lcb = bundle.lcb(&x, beta);
        let value = tch_aug(&lcb, pref, ideal);
        (x, value)
    }

    /// Drops near-duplicate candidates, scores the rest by LCB and picks a
    /// batch greedily by predicted hypervolume improvement.
    fn select(
        &self,
        bundle: &SurrogateBundle,
        xs: Vec<Vec<f64>>,
        prefs: Vec<Option<Preference>>,
    ) -> Result<Proposal> {
        let b = self.config.batch_size;
        let mut keep: Vec<usize> = Vec::with_capacity(xs.len());
        for (i, x) in xs.iter().enumerate() {
            let near_archive = self
                .state
                .x
                .iter()
                .any(|a| max_norm_distance(a, x) <= ARCHIVE_DUPLICATE_TOLERANCE);
            let near_kept = keep
                .iter()
                .any(|&j| max_norm_distance(&xs[j], x) <= CANDIDATE_DUPLICATE_TOLERANCE);
            if !near_archive && !near_kept {
                keep.push(i);
            }
        }
        let mut duplicate_warning = false;
        if keep.len() < b {
            warn!(
                "only {} of {} candidates are new designs; selecting from all candidates",
                keep.len(),
                xs.len()
            );
            duplicate_warning = true;
            keep = (0..xs.len()).collect();
        }
        let beta = self.config.lcb_beta;
        let mut candidates = Vec::with_capacity(keep.len());
        let mut stats = Vec::with_capacity(keep.len());
        for &i in &keep {
            let (mean, std) = bundle.predict(&xs[i]);
            let lcb: Vec<f64> = mean.iter().zip(&std).map(|(m, s)| m - beta * s).collect();
            candidates.push(Candidate {
                x: xs[i].clone(),
                surrogate_objectives: lcb,
                source_preference: prefs[i]
                    .clone()
                    .unwrap_or_else(|| Preference::normalized(vec![1.0; self.problem.m]).expect("uniform weights")),
            });
            stats.push((mean, std));
        }
        let archive = FrontArchive::new(self.state.y.clone(), self.problem.reference_point.clone());
        let chosen = greedy_select(&candidates, &archive, b)?;
        for (k, a) in chosen.iter().enumerate() {
            for c in &chosen[..k] {
                if max_norm_distance(&candidates[a.index].x, &candidates[c.index].x) <= CANDIDATE_DUPLICATE_TOLERANCE {
                    warn!("selected batch contains repeated designs");
                    duplicate_warning = true;
                }
            }
        }
        let mut proposal = Proposal {
            preferences: Vec::with_capacity(b),
            x: Vec::with_capacity(b),
            lcb: Vec::with_capacity(b),
            mean: Vec::with_capacity(b),
            std: Vec::with_capacity(b),
            gain: Vec::with_capacity(b),
            kernels: bundle.kernels(),
            duplicate_warning,
        };
        for s in chosen {
            let c = &candidates[s.index];
            proposal.preferences.push(prefs[keep[s.index]].as_ref().map(|p| p.weights().to_vec()));
            proposal.x.push(c.x.clone());
            proposal.lcb.push(c.surrogate_objectives.clone());
            proposal.mean.push(stats[s.index].0.clone());
            proposal.std.push(stats[s.index].1.clone());
            proposal.gain.push(s.gain);
        }
        Ok(proposal)
    }

    /// Runs the remaining iterations, calling `after_step` after each one.
    pub fn run_with(&mut self, mut after_step: impl FnMut(&Campaign) -> Result<()>) -> Result<()> {
        while !self.is_finished() {
            self.step()?;
            after_step(self)?;
        }
        Ok(())
    }

    /// Trains the posterior-mean model on all evaluations (model-based
    /// strategies), exports its front and closes the log.
    pub fn finish(mut self) -> Result<CampaignOutcome> {
        if !self.is_finished() {
            return Err(Error::InvalidConfig("campaign has iterations left".into()));
        }
        let clock = Instant::now();
        let (final_model, surrogates, report) = if self.strategy == Strategy::Sobol {
            (None, None, None)
        } else {
            let t = self.state.iteration;
            let bundle = self.fit_surrogates(t)?;
            let ideal = update_ideal(&self.state.y)?;
            let model = self.train(&bundle, &ideal, t, 0.0)?;
            let report = export_front(
                &model,
                &bundle,
                &self.problem,
                self.config.candidate_count,
                Some(&ideal.utopia()),
                &mut rng::stream(self.config.seed, Phase::Export, t),
            )?;
            let fm = FinalModel {
                model,
                kernels: bundle.kernels(),
                ideal,
            };
            (Some(fm), Some(bundle), Some(report))
        };
        let final_seconds = clock.elapsed().as_secs_f64();
        let final_hv = hypervolume(&non_dominated(&self.state.y), &self.problem.reference_point)?;
        let log_hv = self
            .front_hv
            .map(|f| log_hv_gap(f, &self.state.y, &self.problem.reference_point))
            .transpose()?;
        self.log.summary = Some(Summary {
            evaluations: self.state.x.len(),
            final_hv,
            log_hv_difference: log_hv,
            relative_hv_difference: report.as_ref().and_then(|r| r.relative_hv_difference),
            timing: self.log.timing_summary(final_seconds),
        });
        Ok(CampaignOutcome {
            log: self.log,
            state: self.state,
            final_model,
            surrogates,
            report,
        })
    }
}

/// Runs a full campaign with the learned Pareto set model.
pub fn run_campaign(config: CampaignConfig) -> Result<CampaignOutcome> {
    run_strategy(config, Strategy::Psl)
}

pub fn run_baseline(config: CampaignConfig, strategy: Strategy) -> Result<CampaignOutcome> {
    run_strategy(config, strategy)
}

fn run_strategy(config: CampaignConfig, strategy: Strategy) -> Result<CampaignOutcome> {
    let mut campaign = Campaign::new(config, strategy)?;
    campaign.run_with(|_| Ok(()))?;
    campaign.finish()
}
