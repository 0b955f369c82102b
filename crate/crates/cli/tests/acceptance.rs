//! Acceptance suite: one PASS/FAIL line per criterion A1–A7.
//!
//! Runs the full-budget campaigns (10 initial + 20 × 5 evaluations) for five
//! seeds per problem, so it takes a while on a single core.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use psl_core::campaign::{run_baseline, run_campaign, strip_timing, CampaignConfig, CampaignOutcome, RunLog, Strategy};
use psl_core::hv::{dominates, greedy_select_values, hypervolume, hvi, non_dominated, strictly_dominates, FrontArchive};
use psl_core::problems::make_problem;
use psl_core::psmodel::{loss_and_gradient, sample_preferences, ParetoSetModel};
use psl_core::rng::{seeded, Rng};
use psl_core::scalarize::{tch, update_ideal, Preference};
use psl_core::surrogate::{GpConfig, SurrogateBundle};
use rand::RngExt;

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

// A1
const F1_RELATIVE_HV_MAX: f64 = 1e-2;
// A2
const VLMOP2_DTLZ2_RELATIVE_HV_MAX: f64 = 1e-3;
// A3
const SOBOL_WINS_REQUIRED: usize = 4;
// A4
const NO_MODEL_WINS_REQUIRED: usize = 3;
// A5
const ITERATION_SECONDS_MAX: f64 = 30.0;
// A6
const GP_GRADIENT_POINTS: usize = 100;
const GP_GRADIENT_RTOL: f64 = 1e-4;
const PSL_GRADIENT_POINTS: usize = 50;
const PSL_GRADIENT_RTOL: f64 = 1e-3;
const MC_SAMPLES: usize = 1_000_000;
const MC_INSTANCES: usize = 50;
const MC_STANDARD_ERRORS: f64 = 3.0;
const GREEDY_INSTANCES: usize = 25;
const ND_SET_SIZE: usize = 200;
const GRID_PREFERENCES: usize = 100;

struct Verdict {
    id: &'static str,
    passed: bool,
    detail: String,
}

fn verdict(id: &'static str, passed: bool, detail: String) -> Verdict {
    let v = Verdict { id, passed, detail };
    println!("{} {} — {}", v.id, if v.passed { "PASS" } else { "FAIL" }, v.detail);
    v
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    }
}

fn fmt_list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")
}

/// Full-budget campaigns, run once and shared between criteria.
#[derive(Default)]
struct Runs {
    outcomes: BTreeMap<(String, Strategy, u64), CampaignOutcome>,
}

impl Runs {
    fn get(&mut self, problem: &str, strategy: Strategy, seed: u64) -> &CampaignOutcome {
        self.outcomes
            .entry((problem.to_string(), strategy, seed))
            .or_insert_with(|| {
                let clock = Instant::now();
                let config = CampaignConfig::new(problem, seed);
                let out = match strategy {
                    Strategy::Psl => run_campaign(config),
                    other => run_baseline(config, other),
                }
                .unwrap_or_else(|e| panic!("{problem} {strategy:?} seed {seed}: {e}"));
                eprintln!("  ran {problem} {strategy:?} seed {seed} in {:.0} s", clock.elapsed().as_secs_f64());
                out
            })
    }

    fn relative_hv(&mut self, problem: &str, seed: u64) -> f64 {
        let s = self.get(problem, Strategy::Psl, seed).log.summary.clone().expect("summary");
        s.relative_hv_difference.expect("analytic front")
    }

    fn final_hv(&mut self, problem: &str, strategy: Strategy, seed: u64) -> f64 {
        self.get(problem, strategy, seed).log.summary.as_ref().expect("summary").final_hv
    }
}

fn a1(runs: &mut Runs) -> Verdict {
    let values: Vec<f64> = SEEDS.iter().map(|&s| runs.relative_hv("F1", s)).collect();
    let med = median(&values);
    verdict(
        "A1",
        med <= F1_RELATIVE_HV_MAX,
        format!("F1 median relative HV difference {med:.3e} ≤ {F1_RELATIVE_HV_MAX:e} (seeds: {})", fmt_list(&values)),
    )
}

fn a2(runs: &mut Runs) -> Verdict {
    let mut parts = Vec::new();
    let mut passed = true;
    for problem in ["VLMOP2", "DTLZ2"] {
        let values: Vec<f64> = SEEDS.iter().map(|&s| runs.relative_hv(problem, s)).collect();
        let med = median(&values);
        passed &= med <= VLMOP2_DTLZ2_RELATIVE_HV_MAX;
        parts.push(format!("{problem} median {med:.3e} (seeds: {})", fmt_list(&values)));
    }
    verdict(
        "A2",
        passed,
        format!("relative HV difference ≤ {VLMOP2_DTLZ2_RELATIVE_HV_MAX:e}: {}", parts.join("; ")),
    )
}

fn wins(runs: &mut Runs, problem: &str, other: Strategy, strict: bool) -> usize {
    SEEDS
        .iter()
        .filter(|&&s| {
            let psl = runs.final_hv(problem, Strategy::Psl, s);
            let base = runs.final_hv(problem, other, s);
            if strict {
                psl > base
            } else {
                psl >= base
            }
        })
        .count()
}

fn a3(runs: &mut Runs) -> Verdict {
    let mut parts = Vec::new();
    let mut passed = true;
    for problem in ["F1", "F2", "F3", "F4", "F5", "F6"] {
        let w = wins(runs, problem, Strategy::Sobol, true);
        passed &= w >= SOBOL_WINS_REQUIRED;
        parts.push(format!("{problem} {w}/5"));
    }
    verdict(
        "A3",
        passed,
        format!("PSL HV > Sobol HV in ≥ {SOBOL_WINS_REQUIRED}/5 seeds: {}", parts.join(", ")),
    )
}

fn a4(runs: &mut Runs) -> Verdict {
    let mut parts = Vec::new();
    let mut passed = true;
    for problem in ["F4", "F5", "F6"] {
        let w = wins(runs, problem, Strategy::NoModel, false);
        passed &= w >= NO_MODEL_WINS_REQUIRED;
        parts.push(format!("{problem} {w}/5"));
    }
    verdict(
        "A4",
        passed,
        format!("PSL HV ≥ no-model HV in ≥ {NO_MODEL_WINS_REQUIRED}/5 seeds: {}", parts.join(", ")),
    )
}

fn a5(runs: &mut Runs) -> Verdict {
    let mut worst: f64 = 0.0;
    let mut train = Vec::new();
    let mut select = Vec::new();
    for &s in &SEEDS {
        let t = runs.get("F1", Strategy::Psl, s).log.timing_summary(0.0);
        worst = worst.max(t.max_training_and_selection);
        train.push(t.mean.model_training);
        select.push(t.mean.selection);
    }
    let (tr, se) = (median(&train), median(&select));
    println!("   F1 per-iteration time, median over seeds: {tr:.2} + {se:.2} = {:.2} s", tr + se);
    verdict(
        "A5",
        worst <= ITERATION_SECONDS_MAX,
        format!("slowest F1 iteration (training + selection) {worst:.2} s ≤ {ITERATION_SECONDS_MAX} s; typical {tr:.2} + {se:.2} = {:.2} s", tr + se),
    )
}

fn relative_error(analytic: f64, fd: f64, floor: f64) -> f64 {
    (analytic - fd).abs() / fd.abs().max(analytic.abs()).max(floor)
}

fn normwise_error(analytic: &[f64], fd: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let diff: Vec<f64> = analytic.iter().zip(fd).map(|(a, b)| a - b).collect();
    norm(&diff) / norm(fd).max(norm(analytic)).max(1e-12)
}

fn random_design(problem: &psl_core::problems::ProblemSpec, r: &mut Rng) -> Vec<f64> {
    problem
        .lower_bounds
        .iter()
        .zip(&problem.upper_bounds)
        .map(|(l, h)| l + r.random::<f64>() * (h - l))
        .collect()
}

fn gp_gradient_check() -> (bool, String) {
    let problem = make_problem("F2").unwrap();
    let mut r = seeded(601);
    let xs: Vec<Vec<f64>> = (0..40).map(|_| random_design(&problem, &mut r)).collect();
    let ys: Vec<Vec<f64>> = xs.iter().map(|x| problem.evaluate(x).unwrap()).collect();
    let bundle =
        SurrogateBundle::fit(&xs, &ys, &problem.lower_bounds, &problem.upper_bounds, &GpConfig::default()).unwrap();
    // Fourth-order central differences; errors are normwise over each gradient
    // vector, since single near-zero components only measure round-off.
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    while checked < GP_GRADIENT_POINTS {
        let x = random_design(&problem, &mut r);
        let grads = bundle.predict_with_gradient(&x);
        if grads.iter().any(|g| g.degenerate) {
            continue;
        }
        let m = grads.len();
        let mut fd_mean = vec![vec![0.0; x.len()]; m];
        let mut fd_std = vec![vec![0.0; x.len()]; m];
        for j in 0..x.len() {
            let at = |d: f64| {
                let mut y = x.clone();
                y[j] += d;
                bundle.predict(&y)
            };
            let (p1, p2, m1, m2) = (at(h), at(2.0 * h), at(-h), at(-2.0 * h));
            for i in 0..m {
                fd_mean[i][j] = (8.0 * (p1.0[i] - m1.0[i]) - (p2.0[i] - m2.0[i])) / (12.0 * h);
                fd_std[i][j] = (8.0 * (p1.1[i] - m1.1[i]) - (p2.1[i] - m2.1[i])) / (12.0 * h);
            }
        }
        for (i, g) in grads.iter().enumerate() {
            worst = worst.max(normwise_error(&g.dmean, &fd_mean[i]));
            worst = worst.max(normwise_error(&g.dstd, &fd_std[i]));
        }
        checked += 1;
    }
    (worst <= GP_GRADIENT_RTOL, format!("GP ∇μ/∇σ max rel err {worst:.1e}"))
}

fn psl_gradient_check() -> (bool, String) {
    let problem = make_problem("F1").unwrap();
    let mut r = seeded(602);
    let xs: Vec<Vec<f64>> = (0..30).map(|_| random_design(&problem, &mut r)).collect();
    let ys: Vec<Vec<f64>> = xs.iter().map(|x| problem.evaluate(x).unwrap()).collect();
    let bundle =
        SurrogateBundle::fit(&xs, &ys, &problem.lower_bounds, &problem.upper_bounds, &GpConfig::default()).unwrap();
    let state = update_ideal(&ys).unwrap();
    let (beta, h) = (0.5, 1e-8);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    let mut attempt = 0;
    while checked < PSL_GRADIENT_POINTS {
        attempt += 1;
        let model = ParetoSetModel::new(2, &problem.lower_bounds, &problem.upper_bounds, &mut seeded(10_000 + attempt));
        let pref = sample_preferences(2, 1, &mut r);
        let x = model.forward(&pref[0]).unwrap();
        let preds = bundle.predict_with_gradient(&x);
        if preds.iter().any(|p| p.degenerate) {
            continue;
        }
        // Stay away from the Tchebycheff kink where both terms tie.
        let u = state.utopia();
        let terms: Vec<f64> = (0..2).map(|i| pref[0].weights()[i] * (preds[i].lcb(beta) - u[i])).collect();
        if (terms[0] - terms[1]).abs() < 1e-3 {
            continue;
        }
        let (_, grad) = loss_and_gradient(&model, &bundle, &state, &pref, beta).unwrap();
        let direction: Vec<f64> = (0..grad.len()).map(|_| r.random_range(-1.0..1.0)).collect();
        let analytic: f64 = grad.iter().zip(&direction).map(|(g, d)| g * d).sum();
        let shifted = |sign: f64| {
            let mut m = model.clone();
            m.set_params(model.params().iter().zip(&direction).map(|(p, d)| p + sign * h * d).collect())
                .unwrap();
            loss_and_gradient(&m, &bundle, &state, &pref, beta).unwrap().0
        };
        let fd = (shifted(1.0) - shifted(-1.0)) / (2.0 * h);
        worst = worst.max(relative_error(analytic, fd, 1e-6));
        checked += 1;
    }
    (worst <= PSL_GRADIENT_RTOL, format!("end-to-end PSL max rel err {worst:.1e}"))
}

fn mc_hv_check() -> (bool, String) {
    let mut r = seeded(603);
    let mut worst_z: f64 = 0.0;
    let mut failures = 0;
    for m in [2usize, 3] {
        for _ in 0..MC_INSTANCES {
            let k = r.random_range(1..=12);
            // Some points fall outside the reference box and must be clipped.
            let points: Vec<Vec<f64>> = (0..k).map(|_| (0..m).map(|_| r.random::<f64>() * 1.1).collect()).collect();
            let reference = vec![1.0; m];
            let exact = hypervolume(&points, &reference).unwrap();
            let mut hits = 0usize;
            let mut sample = vec![0.0; m];
            for _ in 0..MC_SAMPLES {
                sample.iter_mut().for_each(|s| *s = r.random::<f64>());
                if points.iter().any(|p| p.iter().zip(&sample).all(|(a, b)| a <= b)) {
                    hits += 1;
                }
            }
            let p = hits as f64 / MC_SAMPLES as f64;
            let se = (p * (1.0 - p) / MC_SAMPLES as f64).sqrt().max(1.0 / MC_SAMPLES as f64);
            let z = (exact - p).abs() / se;
            worst_z = worst_z.max(z);
            if z > MC_STANDARD_ERRORS {
                failures += 1;
            }
        }
    }
    (
        failures == 0,
        format!("HV vs MC: {failures}/{} beyond {MC_STANDARD_ERRORS} SE (max {worst_z:.2} SE)", 2 * MC_INSTANCES),
    )
}

fn greedy_check() -> (bool, String) {
    let mut r = seeded(604);
    let mut mismatches = 0;
    for instance in 0..GREEDY_INSTANCES {
        let m = 2 + instance % 2;
        let archive_points: Vec<Vec<f64>> = (0..8).map(|_| (0..m).map(|_| 0.3 + 0.7 * r.random::<f64>()).collect()).collect();
        let archive = FrontArchive::new(archive_points, vec![1.0; m]);
        let candidates: Vec<Vec<f64>> = (0..20).map(|_| (0..m).map(|_| r.random::<f64>()).collect()).collect();
        let refs: Vec<&[f64]> = candidates.iter().map(Vec::as_slice).collect();
        let fast: Vec<usize> = greedy_select_values(&refs, &archive, 5).unwrap().iter().map(|s| s.index).collect();

        // Naive oracle: full hypervolume recomputation each round.
        let mut chosen: Vec<usize> = Vec::new();
        for _ in 0..5 {
            let mut pool = archive.points.clone();
            pool.extend(chosen.iter().map(|&i| candidates[i].clone()));
            let current = FrontArchive::new(pool, archive.reference.clone());
            let mut best = (usize::MAX, f64::NEG_INFINITY);
            for (i, c) in candidates.iter().enumerate() {
                if chosen.contains(&i) {
                    continue;
                }
                let gain = hvi(std::slice::from_ref(c), &current).unwrap();
                if gain > best.1 {
                    best = (i, gain);
                }
            }
            chosen.push(best.0);
        }
        if chosen != fast {
            mismatches += 1;
        }
    }
    (mismatches == 0, format!("greedy vs naive: {mismatches}/{GREEDY_INSTANCES} mismatches"))
}

fn non_dominated_check() -> (bool, String) {
    let mut r = seeded(605);
    let mut mismatches = 0;
    let sets = 10;
    for set in 0..sets {
        let m = 2 + set % 2;
        // Coarse values force ties and duplicates.
        let points: Vec<Vec<f64>> = (0..ND_SET_SIZE)
            .map(|_| (0..m).map(|_| (r.random::<f64>() * 20.0).floor()).collect())
            .collect();
        let oracle: Vec<Vec<f64>> = points
            .iter()
            .filter(|p| !points.iter().any(|q| dominates(q, p)))
            .cloned()
            .collect();
        if non_dominated(&points) != oracle {
            mismatches += 1;
        }
    }
    (mismatches == 0, format!("non_dominated vs O(N²): {mismatches}/{sets} mismatches"))
}

fn grid_check() -> (bool, String) {
    let problem = make_problem("F1").unwrap();
    let mut grid = Vec::new();
    for i in 0..=20 {
        for j in 0..=20 {
            let (x1, x2) = (i as f64 / 20.0, j as f64 / 20.0);
            let t = (2.0 * x1 - 1.0).powi(2);
            grid.push(problem.evaluate(&[x1, x2, t, t, t, t]).unwrap());
        }
    }
    let state = update_ideal(&grid).unwrap();
    let mut r = seeded(606);
    let mut violations = 0;
    for _ in 0..GRID_PREFERENCES {
        let a = 0.05 + 0.9 * r.random::<f64>();
        let p = Preference::new(vec![a, 1.0 - a]).unwrap();
        let best = grid
            .iter()
            .min_by(|f, g| tch(f, &p, &state).total_cmp(&tch(g, &p, &state)))
            .unwrap();
        if grid.iter().any(|g| strictly_dominates(g, best)) {
            violations += 1;
        }
    }
    (violations == 0, format!("grid Tchebycheff minimizers: {violations}/{GRID_PREFERENCES} strictly dominated"))
}

fn a6() -> Verdict {
    let checks = [
        gp_gradient_check(),
        psl_gradient_check(),
        mc_hv_check(),
        greedy_check(),
        non_dominated_check(),
        grid_check(),
    ];
    let passed = checks.iter().all(|c| c.0);
    let detail = checks.iter().map(|c| c.1.clone()).collect::<Vec<_>>().join("; ");
    verdict("A6", passed, detail)
}

fn psl(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_psl")).args(args).output().expect("psl binary runs")
}

fn stripped_log(dir: &Path) -> serde_json::Value {
    let bytes = std::fs::read(dir.join("run_log.json")).expect("run log written");
    let log: RunLog = serde_json::from_slice(&bytes).expect("run log parses");
    let mut value = serde_json::to_value(&log).unwrap();
    strip_timing(&mut value);
    value
}

fn a7() -> Verdict {
    let root = tempfile::tempdir().unwrap();
    let dir = |name: &str| root.path().join(name);
    let path = |name: &str| dir(name).to_string_lossy().into_owned();
    let first = psl(&["run", "--problem", "F1", "--seed", "7", "--out", &path("a"), "--checkpoint-every", "10"]);
    let second = psl(&["run", "--problem", "F1", "--seed", "7", "--out", &path("b")]);
    let mid = dir("a").join("checkpoints").join("iter_010.json");
    let resumed = psl(&[
        "run",
        "--problem",
        "F1",
        "--seed",
        "7",
        "--out",
        &path("c"),
        "--resume",
        &mid.to_string_lossy(),
    ]);
    if !(first.status.success() && second.status.success() && resumed.status.success()) {
        return verdict(
            "A7",
            false,
            format!(
                "a run failed: {}",
                String::from_utf8_lossy(&[first.stderr, second.stderr, resumed.stderr].concat())
            ),
        );
    }
    let (a, b, c) = (stripped_log(&dir("a")), stripped_log(&dir("b")), stripped_log(&dir("c")));
    let repeat = a == b;
    let resume = c == b;
    verdict(
        "A7",
        repeat && resume,
        format!(
            "repeat run identical modulo timing: {repeat}; resume from iteration 10 identical: {resume}"
        ),
    )
}

fn main() {
    let clock = Instant::now();
    println!("acceptance suite");
    let mut verdicts = vec![a6(), a7()];
    let mut runs = Runs::default();
    verdicts.push(a1(&mut runs));
    verdicts.push(a5(&mut runs));
    verdicts.push(a2(&mut runs));
    verdicts.push(a3(&mut runs));
    verdicts.push(a4(&mut runs));
    verdicts.sort_by_key(|v| v.id);

    println!("\nsummary ({:.0} s)", clock.elapsed().as_secs_f64());
    for v in &verdicts {
        println!("{} {} — {}", v.id, if v.passed { "PASS" } else { "FAIL" }, v.detail);
    }
    let failed: Vec<&str> = verdicts.iter().filter(|v| !v.passed).map(|v| v.id).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {}", failed.join(", "));
        std::process::exit(1);
    }
}
