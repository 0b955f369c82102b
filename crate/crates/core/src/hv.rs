//! Pareto dominance, non-dominated filtering and exact hypervolume for two
//! and three objectives, plus greedy hypervolume-improvement batch selection.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalarize::Preference;

/// `a` is no worse than `b` everywhere and strictly better somewhere.
pub fn dominates(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    let mut strictly_better = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly_better = true;
        }
    }
    strictly_better
}

/// `a` is strictly better than `b` in every objective.
pub fn strictly_dominates(a: &[f64], b: &[f64]) -> bool {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).all(|(x, y)| x < y)
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Indices of the points not dominated by any other point, in input order.
pub fn non_dominated_indices(points: &[Vec<f64>]) -> Vec<usize> {
    // A dominator always precedes the dominated point lexicographically, so a
    // single pass in lexicographic order against the running front suffices.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| lexicographic(&points[i], &points[j]));
    let mut front: Vec<usize> = Vec::new();
    for i in order {
        if !front.iter().any(|&j| dominates(&points[j], &points[i])) {
            front.push(i);
        }
    }
    front.sort_unstable();
    front
}

pub fn non_dominated(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    non_dominated_indices(points)
        .into_iter()
        .map(|i| points[i].clone())
        .collect()
}

/// Exact hypervolume of the region dominated by `points` and bounded by
/// `reference`. Points that do not strictly dominate the reference add nothing.
pub fn hypervolume(points: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    match reference.len() {
        2 => Ok(hv2(inside(points, reference), reference)),
        3 => Ok(hv3(inside(points, reference), reference)),
        m => Err(Error::UnsupportedDimension(m)),
    }
}

fn inside<'a>(points: &'a [Vec<f64>], reference: &[f64]) -> Vec<&'a [f64]> {
    points
        .iter()
        .filter(|p| p.len() == reference.len() && strictly_dominates(p, reference))
        .map(Vec::as_slice)
        .collect()
}

fn hv2(mut points: Vec<&[f64]>, reference: &[f64]) -> f64 {
    points.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut volume = 0.0;
    let mut ceiling = reference[1];
    for p in points {
        if p[1] < ceiling {
            volume += (reference[0] - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    volume
}

/// Sweep along the third objective, keeping the 2-D staircase of the points
/// seen so far.
fn hv3(mut points: Vec<&[f64]>, reference: &[f64]) -> f64 {
    points.sort_by(|a, b| a[2].total_cmp(&b[2]));
    let mut staircase = Staircase::default();
    let mut volume = 0.0;
    for (i, p) in points.iter().enumerate() {
        staircase.insert(p[0], p[1], reference);
        let top = points.get(i + 1).map_or(reference[2], |q| q[2]);
        volume += staircase.area * (top - p[2]);
    }
    volume
}

/// Mutually non-dominated 2-D points sorted by the first coordinate (second
/// coordinate strictly decreasing) with the dominated area up to the reference.
#[derive(Default)]
struct Staircase {
    steps: Vec<(f64, f64)>,
    area: f64,
}

impl Staircase {
    fn insert(&mut self, a: f64, b: f64, reference: &[f64]) {
        let pos = self.steps.partition_point(|&(x, _)| x < a);
        // The left neighbour dominates (a, b) if it is no higher.
        if pos > 0 && self.steps[pos - 1].1 <= b {
            return;
        }
        if self.steps.get(pos).is_some_and(|&(x, y)| x == a && y <= b) {
            return;
        }
        // Remove the run of points to the right that (a, b) covers.
        let end = pos + self.steps[pos..].iter().take_while(|&&(_, y)| y >= b).count();
        self.steps.splice(pos..end, std::iter::once((a, b)));
        let mut ceiling = reference[1];
        self.area = 0.0;
        for &(x, y) in &self.steps {
            self.area += (reference[0] - x) * (ceiling - y);
            ceiling = y;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontArchive {
    pub points: Vec<Vec<f64>>,
    pub reference: Vec<f64>,
}

impl FrontArchive {
    pub fn new(points: Vec<Vec<f64>>, reference: Vec<f64>) -> Self {
        Self { points, reference }
    }

    pub fn hypervolume(&self) -> Result<f64> {
        hypervolume(&self.points, &self.reference)
    }
}

/// Hypervolume gained by adding `batch` to the archive.
pub fn hvi(batch: &[Vec<f64>], archive: &FrontArchive) -> Result<f64> {
    let before = archive.hypervolume()?;
    let mut union = archive.points.clone();
    union.extend(batch.iter().cloned());
    let after = hypervolume(&union, &archive.reference)?;
    Ok((after - before).max(0.0))
}

/// Volume dominated by `point` alone and by no member of `front`.
fn exclusive_contribution(point: &[f64], front: &[Vec<f64>], reference: &[f64]) -> Result<f64> {
    if !strictly_dominates(point, reference) {
        return Ok(0.0);
    }
    let own: f64 = point.iter().zip(reference).map(|(p, r)| r - p).product();
    // Intersections of the point's box with each front member's box.
    let limited: Vec<Vec<f64>> = front
        .iter()
        .map(|q| q.iter().zip(point).map(|(a, b)| a.max(*b)).collect())
        .collect();
    let shadow = hypervolume(&non_dominated(&limited), reference)?;
    Ok((own - shadow).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub x: Vec<f64>,
    /// Surrogate objective values (LCB or posterior mean) used for scoring.
    pub surrogate_objectives: Vec<f64>,
    pub source_preference: Preference,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub index: usize,
    /// Marginal hypervolume improvement at the time of selection.
    pub gain: f64,
}

/// Sequential greedy batch selection by predicted hypervolume improvement.
///
/// Each round picks the remaining candidate whose surrogate objectives add the
/// most hypervolume to the archive together with the predictions already
/// selected. Ties go to the lowest candidate index.
pub fn greedy_select(candidates: &[Candidate], archive: &FrontArchive, batch: usize) -> Result<Vec<Selection>> {
    let objectives: Vec<&[f64]> = candidates.iter().map(|c| c.surrogate_objectives.as_slice()).collect();
    greedy_select_values(&objectives, archive, batch)
}

pub fn greedy_select_values(values: &[&[f64]], archive: &FrontArchive, batch: usize) -> Result<Vec<Selection>> {
    if values.len() < batch {
        return Err(Error::InsufficientCandidates {
            needed: batch,
            available: values.len(),
        });
    }
    let m = archive.reference.len();
    if m != 2 && m != 3 {
        return Err(Error::UnsupportedDimension(m));
    }
    let reference = &archive.reference;
    let mut front = non_dominated(&archive.points);
    let mut taken = vec![false; values.len()];
    let mut selected = Vec::with_capacity(batch);
    for _ in 0..batch {
        let mut best: Option<Selection> = None;
        for (index, v) in values.iter().enumerate() {
            if taken[index] {
                continue;
            }
            let gain = exclusive_contribution(v, &front, reference)?;
            if best.is_none_or(|b| gain > b.gain) {
                best = Some(Selection { index, gain });
            }
        }
        let choice = best.expect("at least one candidate remains");
        taken[choice.index] = true;
        front.push(values[choice.index].to_vec());
        front = non_dominated(&front);
        selected.push(choice);
    }
    Ok(selected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_non_dominated(points: &[Vec<f64>]) -> Vec<usize> {
        (0..points.len())
            .filter(|&i| !(0..points.len()).any(|j| j != i && dominates(&points[j], &points[i])))
            .collect()
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&[1.0, 2.0], &[2.0, 3.0]));
        assert!(strictly_dominates(&[1.0, 2.0], &[2.0, 3.0]));
        assert!(!dominates(&[1.0, 3.0], &[2.0, 2.0]));
        assert!(!strictly_dominates(&[1.0, 3.0], &[2.0, 2.0]));
        assert!(!dominates(&[1.0, 1.0], &[1.0, 1.0]));
        assert!(dominates(&[1.0, 1.0], &[1.0, 2.0]));
        assert!(!strictly_dominates(&[1.0, 1.0], &[1.0, 2.0]));
    }

    #[test]
    fn non_dominated_examples() {
        let pts = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]];
        assert_eq!(non_dominated(&pts), vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
        let same = vec![vec![0.5, 0.5]; 4];
        assert_eq!(non_dominated(&same).len(), 4);
        assert!(non_dominated(&[]).is_empty());
    }

    #[test]
    fn non_dominated_matches_pairwise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let pts: Vec<Vec<f64>> = (0..200)
                .map(|_| (0..3).map(|_| (rng.random::<f64>() * 10.0).round() / 10.0).collect())
                .collect();
            assert_eq!(non_dominated_indices(&pts), brute_non_dominated(&pts));
        }
    }

    #[test]
    fn hypervolume_examples() {
        assert_eq!(hypervolume(&[vec![0.0, 0.0]], &[1.0, 1.0]).unwrap(), 1.0);
        assert_abs_diff_eq!(
            hypervolume(&[vec![0.0, 0.5], vec![0.5, 0.0]], &[1.0, 1.0]).unwrap(),
            0.75,
            epsilon = 1e-15
        );
        assert_eq!(hypervolume(&[vec![0.0, 0.0, 0.0]], &[1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(hypervolume(&[], &[1.0, 1.0]).unwrap(), 0.0);
        // Beyond the reference in one coordinate: clipped out.
        assert_eq!(hypervolume(&[vec![0.5, 1.5]], &[1.0, 1.0]).unwrap(), 0.0);
        assert!(matches!(
            hypervolume(&[vec![0.0; 4]], &[1.0; 4]),
            Err(Error::UnsupportedDimension(4))
        ));
    }

    #[test]
    fn hypervolume_3d_inclusion_exclusion() {
        // Two boxes: 0.5*1*1 + 1*0.5*1 - 0.5*0.5*1.
        let pts = vec![vec![0.5, 0.0, 0.0], vec![0.0, 0.5, 0.0]];
        assert_abs_diff_eq!(hypervolume(&pts, &[1.0, 1.0, 1.0]).unwrap(), 0.75, epsilon = 1e-15);
        let pts = vec![vec![0.0, 0.0, 0.5], vec![0.5, 0.5, 0.0]];
        assert_abs_diff_eq!(hypervolume(&pts, &[1.0, 1.0, 1.0]).unwrap(), 0.625, epsilon = 1e-15);
    }

    #[test]
    fn hvi_examples() {
        let archive = FrontArchive::new(vec![vec![0.2, 0.2]], vec![1.0, 1.0]);
        assert_eq!(hvi(&[vec![0.5, 0.5]], &archive).unwrap(), 0.0);
        let empty = FrontArchive::new(vec![], vec![1.0, 1.0]);
        let batch = vec![vec![0.0, 0.5], vec![0.5, 0.0]];
        assert_abs_diff_eq!(hvi(&batch, &empty).unwrap(), 0.75, epsilon = 1e-15);
    }

    fn pref2() -> Preference {
        Preference::new(vec![0.5, 0.5]).unwrap()
    }

    fn candidates(values: &[[f64; 2]]) -> Vec<Candidate> {
        values
            .iter()
            .map(|v| Candidate {
                x: vec![0.0],
                surrogate_objectives: v.to_vec(),
                source_preference: pref2(),
            })
            .collect()
    }

    #[test]
    fn greedy_single_round_takes_best_individual() {
        let archive = FrontArchive::new(vec![vec![0.5, 0.5]], vec![1.0, 1.0]);
        let cands = candidates(&[[0.6, 0.6], [0.1, 0.9], [0.3, 0.3], [0.2, 0.4]]);
        let sel = greedy_select(&cands, &archive, 1).unwrap();
        assert_eq!(sel[0].index, 2);
        assert_abs_diff_eq!(sel[0].gain, 0.7 * 0.7 - 0.25, epsilon = 1e-12);
    }

    #[test]
    fn greedy_duplicate_has_zero_gain() {
        let archive = FrontArchive::new(vec![], vec![1.0, 1.0]);
        let cands = candidates(&[[0.3, 0.3], [0.3, 0.3], [0.1, 0.95]]);
        let sel = greedy_select(&cands, &archive, 2).unwrap();
        assert_eq!(sel[0].index, 0);
        assert_eq!(sel[1].index, 2);
        assert!(sel[1].gain > 0.0);
    }

    #[test]
    fn greedy_requires_enough_candidates() {
        let archive = FrontArchive::new(vec![], vec![1.0, 1.0]);
        let cands = candidates(&[[0.3, 0.3]]);
        assert!(matches!(
            greedy_select(&cands, &archive, 2),
            Err(Error::InsufficientCandidates { needed: 2, available: 1 })
        ));
    }

    fn naive_greedy(values: &[Vec<f64>], archive: &FrontArchive, batch: usize) -> Vec<usize> {
        let mut chosen: Vec<usize> = Vec::new();
        for _ in 0..batch {
            let mut base = archive.points.clone();
            base.extend(chosen.iter().map(|&i| values[i].clone()));
            let before = hypervolume(&base, &archive.reference).unwrap();
            let mut best = (usize::MAX, f64::NEG_INFINITY);
            for (i, v) in values.iter().enumerate() {
                if chosen.contains(&i) {
                    continue;
                }
                let mut with = base.clone();
                with.push(v.clone());
                let gain = hypervolume(&with, &archive.reference).unwrap() - before;
                if gain > best.1 + 1e-12 {
                    best = (i, gain);
                }
            }
            chosen.push(best.0);
        }
        chosen
    }

    #[test]
    fn greedy_matches_naive_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in [2usize, 3] {
            for _ in 0..10 {
                let archive = FrontArchive::new(
                    (0..15).map(|_| (0..m).map(|_| rng.random::<f64>()).collect()).collect(),
                    vec![1.1; m],
                );
                let values: Vec<Vec<f64>> =
                    (0..20).map(|_| (0..m).map(|_| rng.random::<f64>() * 0.9).collect()).collect();
                let refs: Vec<&[f64]> = values.iter().map(Vec::as_slice).collect();
                let fast: Vec<usize> = greedy_select_values(&refs, &archive, 5)
                    .unwrap()
                    .iter()
                    .map(|s| s.index)
                    .collect();
                assert_eq!(fast, naive_greedy(&values, &archive, 5));
            }
        }
    }

    fn point_set(m: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(0.0f64..1.2, m), 0..25)
    }

    proptest! {
        #[test]
        fn hv_is_monotone_and_dominance_invariant(pts in point_set(3), extra in prop::collection::vec(0.0f64..1.2, 3)) {
            let r = [1.1, 1.1, 1.1];
            let hv = hypervolume(&pts, &r).unwrap();
            let nd = hypervolume(&non_dominated(&pts), &r).unwrap();
            prop_assert!((hv - nd).abs() <= 1e-12);
            let mut more = pts.clone();
            more.push(extra);
            prop_assert!(hypervolume(&more, &r).unwrap() >= hv - 1e-12);
        }

        #[test]
        fn hv2_is_monotone(pts in point_set(2), extra in prop::collection::vec(0.0f64..1.2, 2)) {
            let r = [1.1, 1.1];
            let hv = hypervolume(&pts, &r).unwrap();
            prop_assert!((hv - hypervolume(&non_dominated(&pts), &r).unwrap()).abs() <= 1e-12);
            let mut more = pts.clone();
            more.push(extra);
            prop_assert!(hypervolume(&more, &r).unwrap() >= hv - 1e-12);
        }

        #[test]
        fn greedy_gains_do_not_increase(pts in point_set(2), cands in prop::collection::vec(prop::collection::vec(0.0f64..1.2, 2), 5..20)) {
            let archive = FrontArchive::new(pts, vec![1.1, 1.1]);
            let refs: Vec<&[f64]> = cands.iter().map(Vec::as_slice).collect();
            let sel = greedy_select_values(&refs, &archive, 5).unwrap();
            for w in sel.windows(2) {
                prop_assert!(w[1].gain <= w[0].gain + 1e-12);
            }
        }
    }
}
