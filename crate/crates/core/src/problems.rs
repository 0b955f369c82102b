//! Benchmark and engineering test problems.
//!
//! All problems are box constrained and minimized. The synthetic F1-F6
//! family shares the front `f2 = 1 - sqrt(f1)` but has increasingly
//! complicated Pareto sets. The engineering (RE) problems fold constraint
//! violations into an extra objective and rely on an ingested approximate
//! front for metrics.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hv::non_dominated;

/// Number of points used for reference fronts when computing HV-based metrics.
pub const REFERENCE_FRONT_POINTS: usize = 10_000;

pub type ObjectiveVector = Vec<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProblemKind {
    F1,
    F2,
    F3,
    F4,
    F5,
    F6,
    Vlmop1,
    Vlmop2,
    Vlmop3,
    Dtlz2,
    ReTruss,
    ReVessel,
    ReBrake,
    ReGear,
    ReInjector,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 15] = [
        ProblemKind::F1,
        ProblemKind::F2,
        ProblemKind::F3,
        ProblemKind::F4,
        ProblemKind::F5,
        ProblemKind::F6,
        ProblemKind::Vlmop1,
        ProblemKind::Vlmop2,
        ProblemKind::Vlmop3,
        ProblemKind::Dtlz2,
        ProblemKind::ReTruss,
        ProblemKind::ReVessel,
        ProblemKind::ReBrake,
        ProblemKind::ReGear,
        ProblemKind::ReInjector,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::F1 => "F1",
            ProblemKind::F2 => "F2",
            ProblemKind::F3 => "F3",
            ProblemKind::F4 => "F4",
            ProblemKind::F5 => "F5",
            ProblemKind::F6 => "F6",
            ProblemKind::Vlmop1 => "VLMOP1",
            ProblemKind::Vlmop2 => "VLMOP2",
            ProblemKind::Vlmop3 => "VLMOP3",
            ProblemKind::Dtlz2 => "DTLZ2",
            ProblemKind::ReTruss => "RE-truss",
            ProblemKind::ReVessel => "RE-vessel",
            ProblemKind::ReBrake => "RE-brake",
            ProblemKind::ReGear => "RE-gear",
            ProblemKind::ReInjector => "RE-injector",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.name() == name)
            .ok_or_else(|| Error::UnregisteredProblem(name.to_string()))
    }

    pub fn is_engineering(self) -> bool {
        matches!(
            self,
            ProblemKind::ReTruss
                | ProblemKind::ReVessel
                | ProblemKind::ReBrake
                | ProblemKind::ReGear
                | ProblemKind::ReInjector
        )
    }

    pub fn description(self) -> &'static str {
        match self {
            ProblemKind::F1 => "synthetic, quadratic Pareto set",
            ProblemKind::F2 => "synthetic, power-curve Pareto set",
            ProblemKind::F3 => "synthetic, sinusoidal Pareto set",
            ProblemKind::F4 => "synthetic, spiral Pareto set",
            ProblemKind::F5 => "synthetic, mixed-frequency spiral Pareto set",
            ProblemKind::F6 => "synthetic, modulated spiral Pareto set",
            ProblemKind::Vlmop1 => "one-variable convex front",
            ProblemKind::Vlmop2 => "concave front",
            ProblemKind::Vlmop3 => "three objectives, two variables",
            ProblemKind::Dtlz2 => "spherical three-objective front",
            ProblemKind::ReTruss => "four bar truss design",
            ProblemKind::ReVessel => "pressure vessel design",
            ProblemKind::ReBrake => "disk brake design",
            ProblemKind::ReGear => "gear train design",
            ProblemKind::ReInjector => "rocket injector design",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: String,
    pub kind: ProblemKind,
    pub n: usize,
    pub m: usize,
    pub lower_bounds: Vec<f64>,
    pub upper_bounds: Vec<f64>,
    pub reference_point: Vec<f64>,
    pub has_known_front: bool,
    /// Approximate front file for problems without an analytic front.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub front_file: Option<PathBuf>,
}

pub fn make_problem(name: &str) -> Result<ProblemSpec> {
    let kind = ProblemKind::from_name(name)?;
    let sqrt2 = 2f64.sqrt();
    let (lower, upper, reference): (Vec<f64>, Vec<f64>, Vec<f64>) = match kind {
        ProblemKind::F1 | ProblemKind::F2 => (vec![0.0; 6], vec![1.0; 6], vec![1.1, 1.1]),
        ProblemKind::F3 | ProblemKind::F4 | ProblemKind::F5 | ProblemKind::F6 => {
            let mut lower = vec![-1.0; 6];
            lower[0] = 0.0;
            (lower, vec![1.0; 6], vec![1.1, 1.1])
        }
        ProblemKind::Vlmop1 => (vec![-2.0], vec![4.0], vec![4.4, 4.4]),
        ProblemKind::Vlmop2 => (vec![-2.0; 6], vec![2.0; 6], vec![1.1, 1.1]),
        ProblemKind::Vlmop3 => (vec![-3.0; 2], vec![3.0; 2], vec![11.0, 66.0, 1.1]),
        ProblemKind::Dtlz2 => (vec![0.0; 6], vec![1.0; 6], vec![1.1, 1.1, 1.1]),
        ProblemKind::ReTruss => (
            vec![1.0, sqrt2, sqrt2, 1.0],
            vec![3.0; 4],
            vec![3175.0065, 0.0400],
        ),
        ProblemKind::ReVessel => (
            vec![1.0, 1.0, 10.0, 10.0],
            vec![100.0, 100.0, 200.0, 240.0],
            vec![6437.2649, 1417536.7586],
        ),
        ProblemKind::ReBrake => (
            vec![55.0, 75.0, 1000.0, 11.0],
            vec![80.0, 110.0, 3000.0, 20.0],
            vec![5.8374, 3.4412, 27.5],
        ),
        ProblemKind::ReGear => (vec![12.0; 4], vec![60.0; 4], vec![6.5241, 61.6, 0.3913]),
        ProblemKind::ReInjector => (vec![0.0; 4], vec![1.0; 4], vec![1.0884, 1.0522, 1.0863]),
    };
    Ok(ProblemSpec {
        name: kind.name().to_string(),
        kind,
        n: lower.len(),
        m: reference.len(),
        lower_bounds: lower,
        upper_bounds: upper,
        reference_point: reference,
        has_known_front: !kind.is_engineering(),
        front_file: None,
    })
}

/// Names of every registered problem, in registry order.
pub fn problem_names() -> Vec<&'static str> {
    ProblemKind::ALL.iter().map(|k| k.name()).collect()
}

impl ProblemSpec {
    /// Registers an approximate-front CSV for metrics on problems without an
    /// analytic front.
    pub fn with_front_file(mut self, path: impl Into<PathBuf>) -> Self {
        self.front_file = Some(path.into());
        self
    }

    pub fn front_available(&self) -> bool {
        self.has_known_front || self.front_file.is_some()
    }

    pub fn check_bounds(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Domain(format!(
                "{} expects {} decision variables, got {}",
                self.name,
                self.n,
                x.len()
            )));
        }
        for (i, &v) in x.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Domain(format!("x[{i}] is not finite")));
            }
            if v < self.lower_bounds[i] || v > self.upper_bounds[i] {
                return Err(Error::Domain(format!(
                    "x[{i}] = {v} outside [{}, {}]",
                    self.lower_bounds[i], self.upper_bounds[i]
                )));
            }
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<ObjectiveVector> {
        self.check_bounds(x)?;
        let f = match self.kind {
            ProblemKind::F1
            | ProblemKind::F2
            | ProblemKind::F3
            | ProblemKind::F4
            | ProblemKind::F5
            | ProblemKind::F6 => f_family(self.kind, x),
            ProblemKind::Vlmop1 => vlmop1(x),
            ProblemKind::Vlmop2 => vlmop2(x),
            ProblemKind::Vlmop3 => vlmop3(x),
            ProblemKind::Dtlz2 => dtlz2(x, self.m),
            ProblemKind::ReTruss => re_truss(x),
            ProblemKind::ReVessel => re_vessel(x),
            ProblemKind::ReBrake => re_brake(x),
            ProblemKind::ReGear => re_gear(x),
            ProblemKind::ReInjector => re_injector(x),
        };
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!(
                "{} produced a non-finite objective at {x:?}",
                self.name
            )));
        }
        Ok(f)
    }

    /// `count` mutually non-dominated points covering the Pareto front.
    ///
    /// Analytic fronts are sampled along their parametrization. VLMOP3 has no
    /// closed form and is approximated from a dense grid. Engineering problems
    /// read the registered front file.
    pub fn true_front(&self, count: usize) -> Result<Vec<ObjectiveVector>> {
        let count = count.max(1);
        let along = |i: usize| {
            if count == 1 {
                0.0
            } else {
                i as f64 / (count - 1) as f64
            }
        };
        let front = match self.kind {
            ProblemKind::F1
            | ProblemKind::F2
            | ProblemKind::F3
            | ProblemKind::F4
            | ProblemKind::F5
            | ProblemKind::F6
            | ProblemKind::Vlmop1
            | ProblemKind::Vlmop2 => (0..count).map(|i| self.front_curve(along(i))).collect(),
            ProblemKind::Dtlz2 => (0..count as u32)
                .map(|i| {
                    let a = sobol_burley::sample(i, 0, 0x5eed) as f64 * PI / 2.0;
                    let b = sobol_burley::sample(i, 1, 0x5eed) as f64 * PI / 2.0;
                    vec![a.cos() * b.cos(), a.cos() * b.sin(), a.sin()]
                })
                .collect(),
            ProblemKind::Vlmop3 => vlmop3_grid_front(count),
            _ => {
                let path = self
                    .front_file
                    .as_ref()
                    .ok_or_else(|| Error::FrontUnavailable(self.name.clone()))?;
                let front = non_dominated(&read_front_csv(path, self.m)?);
                thin_evenly(front, count)
            }
        };
        Ok(front)
    }

    /// Points on a 2-objective analytic front, `s` in [0, 1] running from the
    /// f1-minimal end to the f2-minimal end.
    fn front_curve(&self, s: f64) -> ObjectiveVector {
        match self.kind {
            ProblemKind::Vlmop1 => {
                let x = 2.0 * s;
                vec![x * x, (x - 2.0) * (x - 2.0)]
            }
            ProblemKind::Vlmop2 => {
                let n = self.n as f64;
                let a = 1.0 / n.sqrt();
                let t = a - 2.0 * a * s;
                vec![
                    1.0 - (-n * (t - a) * (t - a)).exp(),
                    1.0 - (-n * (t + a) * (t + a)).exp(),
                ]
            }
            // F1-F6: uniform in sqrt(f1).
            _ => vec![s * s, 1.0 - s],
        }
    }

    /// The point of the true front minimizing the weighted Tchebycheff
    /// distance to `utopia` under `weights`, when the front is analytic.
    pub fn tchebycheff_front_point(&self, weights: &[f64], utopia: &[f64]) -> Option<ObjectiveVector> {
        match self.kind {
            ProblemKind::Dtlz2 => {
                let w: Vec<f64> = weights.iter().map(|&l| 1.0 / l.max(1e-12)).collect();
                let ww: f64 = w.iter().map(|v| v * v).sum();
                let uw: f64 = utopia.iter().zip(&w).map(|(u, v)| u * v).sum();
                let uu: f64 = utopia.iter().map(|u| u * u).sum();
                let disc = (uw * uw - ww * (uu - 1.0)).max(0.0);
                let t = (-uw + disc.sqrt()) / ww;
                let mut f: Vec<f64> = utopia.iter().zip(&w).map(|(u, v)| (u + t * v).max(0.0)).collect();
                let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
                f.iter_mut().for_each(|v| *v /= norm);
                Some(f)
            }
            ProblemKind::F1
            | ProblemKind::F2
            | ProblemKind::F3
            | ProblemKind::F4
            | ProblemKind::F5
            | ProblemKind::F6
            | ProblemKind::Vlmop1
            | ProblemKind::Vlmop2 => {
                // gap(s) increases monotonically along the curve.
                let gap = |s: f64| {
                    let f = self.front_curve(s);
                    weights[0] * (f[0] - utopia[0]) - weights[1] * (f[1] - utopia[1])
                };
                if gap(0.0) >= 0.0 {
                    return Some(self.front_curve(0.0));
                }
                if gap(1.0) <= 0.0 {
                    return Some(self.front_curve(1.0));
                }
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    if gap(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Some(self.front_curve(0.5 * (lo + hi)))
            }
            _ => None,
        }
    }
}

fn thin_evenly(mut front: Vec<ObjectiveVector>, count: usize) -> Vec<ObjectiveVector> {
    if front.len() <= count {
        return front;
    }
    front.sort_by(|a, b| a[0].total_cmp(&b[0]));
    (0..count)
        .map(|i| {
            let idx = if count == 1 { 0 } else { i * (front.len() - 1) / (count - 1) };
            front[idx].clone()
        })
        .collect()
}

fn vlmop3_grid_front(count: usize) -> Vec<ObjectiveVector> {
    let side = ((count as f64).sqrt().ceil() as usize * 4).clamp(16, 600);
    let mut points = Vec::with_capacity(side * side);
    for i in 0..side {
        for j in 0..side {
            let x = [
                -3.0 + 6.0 * i as f64 / (side - 1) as f64,
                -3.0 + 6.0 * j as f64 / (side - 1) as f64,
            ];
            points.push(vlmop3(&x));
        }
    }
    thin_evenly(non_dominated(&points), count)
}

fn f_family(kind: ProblemKind, x: &[f64]) -> ObjectiveVector {
    let n = x.len();
    let nf = n as f64;
    let x1 = x[0];
    let (mut s1, mut s2) = (0.0, 0.0);
    let (mut c1, mut c2) = (0usize, 0usize);
    for j in 2..=n {
        let jf = j as f64;
        let odd = j % 2 == 1;
        let target = match kind {
            ProblemKind::F1 => (2.0 * x1 - 1.0).powi(2),
            ProblemKind::F2 => x1.powf(0.5 * (1.0 + 3.0 * (jf - 2.0) / (nf - 2.0))),
            ProblemKind::F3 => (4.0 * PI * x1 + jf * PI / nf).sin(),
            ProblemKind::F4 => {
                let angle = 4.0 * PI * x1 + jf * PI / nf;
                0.8 * x1 * if odd { angle.cos() } else { angle.sin() }
            }
            ProblemKind::F5 => {
                let angle = 4.0 * PI * x1 + jf * PI / nf;
                if odd {
                    0.8 * x1 * (angle / 3.0).cos()
                } else {
                    0.8 * x1 * angle.sin()
                }
            }
            ProblemKind::F6 => {
                let radius = 0.3 * x1 * x1 * (12.0 * PI * x1 + 4.0 * jf * PI / nf).cos() + 0.6 * x1;
                let angle = 6.0 * PI * x1 + jf * PI / nf;
                radius * if odd { angle.cos() } else { angle.sin() }
            }
            _ => unreachable!("not an F-family problem"),
        };
        let d = (x[j - 1] - target).powi(2);
        if odd {
            s1 += d;
            c1 += 1;
        } else {
            s2 += d;
            c2 += 1;
        }
    }
    let g1 = 1.0 + if c1 > 0 { s1 / c1 as f64 } else { 0.0 };
    let g2 = 1.0 + if c2 > 0 { s2 / c2 as f64 } else { 0.0 };
    vec![g1 * x1, g2 * (1.0 - (x1 / g2).sqrt())]
}

fn vlmop1(x: &[f64]) -> ObjectiveVector {
    let v = x[0];
    vec![v * v, (v - 2.0) * (v - 2.0)]
}

fn vlmop2(x: &[f64]) -> ObjectiveVector {
    let a = 1.0 / (x.len() as f64).sqrt();
    let s1: f64 = x.iter().map(|v| (v - a) * (v - a)).sum();
    let s2: f64 = x.iter().map(|v| (v + a) * (v + a)).sum();
    vec![1.0 - (-s1).exp(), 1.0 - (-s2).exp()]
}

fn vlmop3(x: &[f64]) -> ObjectiveVector {
    let (a, b) = (x[0], x[1]);
    let r2 = a * a + b * b;
    vec![
        0.5 * r2 + r2.sin(),
        (3.0 * a - 2.0 * b + 4.0).powi(2) / 8.0 + (a - b + 1.0).powi(2) / 27.0 + 15.0,
        1.0 / (r2 + 1.0) - 1.1 * (-r2).exp(),
    ]
}

fn dtlz2(x: &[f64], m: usize) -> ObjectiveVector {
    let g: f64 = x[m - 1..].iter().map(|v| (v - 0.5) * (v - 0.5)).sum();
    (0..m)
        .map(|i| {
            let mut f = 1.0 + g;
            for v in &x[..m - 1 - i] {
                f *= (v * PI / 2.0).cos();
            }
            if i > 0 {
                f *= (x[m - 1 - i] * PI / 2.0).sin();
            }
            f
        })
        .collect()
}

/// Sum of violations, where a constraint is satisfied when `g >= 0`.
fn violation(constraints: &[f64]) -> f64 {
    constraints.iter().map(|&g| if g < 0.0 { -g } else { 0.0 }).sum()
}

fn re_truss(x: &[f64]) -> ObjectiveVector {
    let (force, e, length) = (10.0, 2.0e5, 200.0);
    let sqrt2 = 2f64.sqrt();
    let f1 = length * (2.0 * x[0] + sqrt2 * x[1] + x[2].sqrt() + x[3]);
    let f2 = (force * length / e)
        * (2.0 / x[0] + 2.0 * sqrt2 / x[1] - 2.0 * sqrt2 / x[2] + 2.0 / x[3]);
    vec![f1, f2]
}

fn re_vessel(x: &[f64]) -> ObjectiveVector {
    // Shell and head thickness come in multiples of 1/16 inch.
    let x1 = 0.0625 * x[0].round();
    let x2 = 0.0625 * x[1].round();
    let (x3, x4) = (x[2], x[3]);
    let cost = 0.6224 * x1 * x3 * x4
        + 1.7781 * x2 * x3 * x3
        + 3.1661 * x1 * x1 * x4
        + 19.84 * x1 * x1 * x3;
    let g = [
        x1 - 0.0193 * x3,
        x2 - 0.00954 * x3,
        PI * x3 * x3 * x4 + (4.0 / 3.0) * PI * x3 * x3 * x3 - 1_296_000.0,
    ];
    vec![cost, violation(&g)]
}

fn re_brake(x: &[f64]) -> ObjectiveVector {
    let (x1, x2, x3, x4) = (x[0], x[1], x[2], x[3]);
    let d2 = x2 * x2 - x1 * x1;
    let d3 = x2 * x2 * x2 - x1 * x1 * x1;
    let mass = 4.9e-5 * d2 * (x4 - 1.0);
    let stop_time = 9.82e6 * d2 / (x3 * x4 * d3);
    let g = [
        (x2 - x1) - 20.0,
        0.4 - x3 / (3.14 * d2),
        1.0 - 2.22e-3 * x3 * d3 / (d2 * d2),
        2.66e-2 * x3 * x4 * d3 / d2 - 900.0,
    ];
    vec![mass, stop_time, violation(&g)]
}

fn re_gear(x: &[f64]) -> ObjectiveVector {
    // Teeth counts are integers.
    let t: Vec<f64> = x.iter().map(|v| v.round()).collect();
    let ratio_error = (6.931 - (t[2] / t[0]) * (t[3] / t[1])).abs();
    let size = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let g = [0.5 - ratio_error / 6.931];
    vec![ratio_error, size, violation(&g)]
}

fn re_injector(x: &[f64]) -> ObjectiveVector {
    let (a, ha, oa, optt) = (x[0], x[1], x[2], x[3]);
    let face_temp = 0.692 + 0.477 * a - 0.687 * ha - 0.080 * oa - 0.0650 * optt
        - 0.167 * a * a
        - 0.0129 * ha * a
        + 0.0796 * ha * ha
        - 0.0634 * oa * a
        - 0.0257 * oa * ha
        + 0.0877 * oa * oa
        - 0.0521 * optt * a
        + 0.00156 * optt * ha
        + 0.00198 * optt * oa
        + 0.0184 * optt * optt;
    let distance = 0.153 - 0.322 * a + 0.396 * ha + 0.424 * oa + 0.0226 * optt
        + 0.175 * a * a
        + 0.0185 * ha * a
        - 0.0701 * ha * ha
        - 0.251 * oa * a
        + 0.179 * oa * ha
        + 0.0150 * oa * oa
        + 0.0134 * optt * a
        + 0.0296 * optt * ha
        + 0.0752 * optt * oa
        + 0.0192 * optt * optt;
    let tip_temp = 0.370 - 0.205 * a + 0.0307 * ha + 0.108 * oa + 1.019 * optt
        - 0.135 * a * a
        + 0.0141 * ha * a
        + 0.0998 * ha * ha
        + 0.208 * oa * a
        - 0.0301 * oa * ha
        - 0.226 * oa * oa
        + 0.353 * optt * a
        - 0.0497 * optt * oa
        - 0.423 * optt * optt
        + 0.202 * ha * a * a
        - 0.281 * oa * a * a
        - 0.342 * ha * ha * a
        - 0.245 * ha * ha * oa
        + 0.281 * oa * oa * ha
        - 0.184 * optt * optt * a
        - 0.281 * ha * a * oa;
    vec![face_temp, distance, tip_temp]
}

/// Reads an objective-vector CSV: `m` numeric columns per line, optional header.
pub fn read_front_csv(path: impl AsRef<Path>, m: usize) -> Result<Vec<ObjectiveVector>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut points = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(values) => {
                if values.len() != m {
                    return Err(Error::FrontFormat(format!(
                        "{}: line {} has {} columns, expected {m}",
                        path.display(),
                        line + 1,
                        values.len()
                    )));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::FrontFormat(format!(
                        "{}: line {} has a non-finite value",
                        path.display(),
                        line + 1
                    )));
                }
                points.push(values);
            }
            // Only the first line may be a header.
            Err(_) if line == 0 => continue,
            Err(e) => {
                return Err(Error::FrontFormat(format!(
                    "{}: line {}: {e}",
                    path.display(),
                    line + 1
                )))
            }
        }
    }
    if points.is_empty() {
        return Err(Error::FrontFormat(format!("{}: no objective vectors", path.display())));
    }
    Ok(points)
}

pub fn write_front_csv(path: impl AsRef<Path>, points: &[ObjectiveVector]) -> Result<()> {
    let m = points.first().map_or(0, Vec::len);
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record((1..=m).map(|i| format!("f{i}")))?;
    for p in points {
        writer.write_record(p.iter().map(|v| v.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}
