//! Space-filling designs: Latin hypercube and scrambled Sobol points.

use rand::seq::SliceRandom;
use rand::RngExt;

use crate::rng::Rng;

fn scale(u: &[f64], lower: &[f64], upper: &[f64]) -> Vec<f64> {
    u.iter()
        .zip(lower.iter().zip(upper))
        .map(|(t, (lo, hi))| (lo + t * (hi - lo)).clamp(*lo, *hi))
        .collect()
}

/// Latin hypercube design of `count` points: in every dimension each of the
/// `count` equal-width strata holds exactly one point.
pub fn lhs(lower: &[f64], upper: &[f64], count: usize, rng: &mut Rng) -> Vec<Vec<f64>> {
    let n = lower.len();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut strata: Vec<usize> = (0..count).collect();
        strata.shuffle(rng);
        columns.push(
            strata
                .into_iter()
                .map(|k| (k as f64 + rng.random::<f64>()) / count as f64)
                .collect(),
        );
    }
    (0..count)
        .map(|i| {
            let u: Vec<f64> = columns.iter().map(|c| c[i]).collect();
            scale(&u, lower, upper)
        })
        .collect()
}

/// Points `start..start + count` of an Owen-scrambled Sobol sequence.
pub fn sobol_points(lower: &[f64], upper: &[f64], start: usize, count: usize, scramble: u32) -> Vec<Vec<f64>> {
    (start..start + count)
        .map(|i| {
            let u: Vec<f64> = (0..lower.len())
                .map(|d| f64::from(sobol_burley::sample(i as u32, d as u32, scramble)))
                .collect();
            scale(&u, lower, upper)
        })
        .collect()
}
