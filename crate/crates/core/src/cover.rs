//! Sample cover estimation on a precomputed pseudometric.
//!
//! A sample cover at resolution epsilon is a subset of the sample such that
//! every point lies within epsilon of some subset member; the sample covering
//! number is the smallest such subset's size. Finding it is a set cover
//! problem, so this module offers three estimators:
//!
//! * [`scn_kmedoids`] — clusters into k medoids for each k in a schedule and
//!   counts k plus the points left farther than epsilon from their medoid,
//!   keeping the minimum over the schedule. Always an upper bound.
//! * [`scn_greedy`] — classic greedy set cover over the epsilon-balls; upper
//!   bound within a (1 + ln n) factor of the optimum.
//! * [`scn_exact`] — exact minimum by subset enumeration, for n <= 20; the
//!   oracle the heuristics are tested against.
//!
//! [`verify_cover`] checks a proposed center set exactly, and
//! [`normalized_scn`] rescales the resolution by the change in minimum
//! inter-class distance to compensate transformations that shrink the data.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::data::DistanceMatrix;
use crate::error::{Error, Result};
use crate::metric::PseudometricMatrix;
use crate::rng;

pub const EXACT_LIMIT: usize = 20;
const KMEDOIDS_MAX_ITERS: usize = 100;
const KMEDOIDS_RESTARTS: usize = 1;

/// A verified epsilon-sample cover: centers are sample indices and every
/// point is assigned to a center within epsilon.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCover {
    pub epsilon: f64,
    /// Sorted, deduplicated sample indices acting as centers.
    pub center_indices: Vec<usize>,
    /// For every sample index, the center it is assigned to.
    pub assignment: Vec<usize>,
}

/// Why a proposed center set is not a cover.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverFailure {
    pub epsilon: f64,
    pub uncovered: Vec<UncoveredPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UncoveredPoint {
    pub index: usize,
    pub nearest_center: usize,
    pub distance: f64,
}

/// Outcome of an exact cover check.
#[derive(Debug, Clone, PartialEq)]
pub enum CoverCheck {
    Valid(SampleCover),
    Invalid(CoverFailure),
}

impl CoverCheck {
    pub fn into_cover(self) -> Option<SampleCover> {
        match self {
            CoverCheck::Valid(c) => Some(c),
            CoverCheck::Invalid(_) => None,
        }
    }
}

/// Checks exactly whether `centers` forms a valid epsilon-sample cover.
///
/// On success every point is assigned to its nearest center (ties to the
/// lowest center index); on failure every uncovered index is listed with its
/// nearest-center distance.
pub fn verify_cover(
    rho: &PseudometricMatrix,
    epsilon: f64,
    centers: &[usize],
) -> Result<CoverCheck> {
    let n = rho.n();
    require_epsilon(epsilon)?;
    if centers.is_empty() {
        return Err(Error::invalid("center set is empty"));
    }
    if let Some(&c) = centers.iter().find(|&&c| c >= n) {
        return Err(Error::invalid(format!(
            "center index {c} out of range for n = {n}"
        )));
    }
    let centers: Vec<usize> = centers.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();

    let mut assignment = vec![0usize; n];
    let mut uncovered = Vec::new();
    for i in 0..n {
        let (mut best_center, mut best_dist) = (centers[0], rho.get(i, centers[0]));
        for &c in &centers[1..] {
            let d = rho.get(i, c);
            if d < best_dist {
                best_dist = d;
                best_center = c;
            }
        }
        if best_dist <= epsilon {
            assignment[i] = best_center;
        } else {
            uncovered.push(UncoveredPoint {
                index: i,
                nearest_center: best_center,
                distance: best_dist,
            });
        }
    }
    if uncovered.is_empty() {
        Ok(CoverCheck::Valid(SampleCover {
            epsilon,
            center_indices: centers,
            assignment,
        }))
    } else {
        Ok(CoverCheck::Invalid(CoverFailure { epsilon, uncovered }))
    }
}

/// An estimated covering number together with the realizing cover.
#[derive(Debug, Clone)]
pub struct ScnResult {
    pub count: usize,
    pub cover: SampleCover,
}

/// Which k values the k-medoids estimator scans.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    /// Every k from n down to 1. Faithful but O(n) clustering runs.
    FullScan,
    /// Geometric coarse pass followed by local refinement around the best k.
    CoarseToFine,
    Explicit(Vec<usize>),
}

impl Schedule {
    /// Full scan for small samples or when faithfulness is requested,
    /// coarse-to-fine otherwise.
    pub fn default_for(n: usize, faithful: bool) -> Schedule {
        if faithful || n <= 200 {
            Schedule::FullScan
        } else {
            Schedule::CoarseToFine
        }
    }
}

/// One k-medoids clustering on a distance matrix: Park-Jun initialization
/// (the k points minimizing normalized distance sums) followed by best-swap
/// improvement, ties always to the lowest index.
#[derive(Debug, Clone)]
pub struct Clustering {
    /// Sorted medoid point indices.
    pub medoids: Vec<usize>,
    /// Nearest medoid (point index) per point.
    pub nearest_medoid: Vec<usize>,
    /// Distance to the nearest medoid per point.
    pub nearest_distance: Vec<f64>,
    /// Sum of nearest distances.
    pub cost: f64,
}

fn park_jun_init(d: &DistanceMatrix, k: usize) -> Vec<usize> {
    let n = d.n();
    let row_sums: Vec<f64> = (0..n).map(|i| d.row(i).iter().sum()).collect();
    let mut scored: Vec<(f64, usize)> = (0..n)
        .map(|j| {
            let v = (0..n)
                .filter(|&i| row_sums[i] > 0.0)
                .map(|i| d.get(i, j) / row_sums[i])
                .sum::<f64>();
            (v, j)
        })
        .collect();
    scored.sort_by(|a, b| a.partial_cmp(b).expect("finite scores"));
    let mut medoids: Vec<usize> = scored.iter().take(k).map(|&(_, j)| j).collect();
    medoids.sort_unstable();
    medoids
}

/// Nearest / second-nearest medoid bookkeeping. Medoids must be sorted so
/// that the strict comparison breaks ties toward the lowest point index.
fn assign(d: &DistanceMatrix, medoids: &[usize]) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let n = d.n();
    let mut m1 = vec![0usize; n];
    let mut d1 = vec![f64::INFINITY; n];
    let mut d2 = vec![f64::INFINITY; n];
    for j in 0..n {
        for (pos, &m) in medoids.iter().enumerate() {
            let dist = d.get(j, m);
            if dist < d1[j] {
                d2[j] = d1[j];
                d1[j] = dist;
                m1[j] = pos;
            } else if dist < d2[j] {
                d2[j] = dist;
            }
        }
    }
    (m1, d1, d2)
}

pub fn cluster_kmedoids(
    d: &DistanceMatrix,
    k: usize,
    seed: u64,
    restarts: usize,
    max_iters: usize,
) -> Result<Clustering> {
    let n = d.n();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} out of range for n = {n}")));
    }
    let mut best: Option<Clustering> = None;
    for restart in 0..restarts.max(1) {
        let init = if restart == 0 {
            park_jun_init(d, k)
        } else {
            random_subset(n, k, seed, restart as u64)
        };
        let c = pam_swap(d, init, max_iters);
        if best.as_ref().map_or(true, |b| c.cost < b.cost) {
            best = Some(c);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn random_subset(n: usize, k: usize, seed: u64, restart: u64) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut r = rng::stream(&[seed, 0x6d65646f, restart]);
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut r);
    let mut medoids: Vec<usize> = indices.into_iter().take(k).collect();
    medoids.sort_unstable();
    medoids
}

/// Best-swap improvement: evaluates every (candidate, medoid) swap via a
/// shared accumulator in O(n (n - k)) per pass and applies the best strictly
/// improving one.
fn pam_swap(d: &DistanceMatrix, mut medoids: Vec<usize>, max_iters: usize) -> Clustering {
    let n = d.n();
    let k = medoids.len();
    let (mut m1, mut d1, mut d2) = assign(d, &medoids);
    let mut is_medoid = vec![false; n];
    for &m in &medoids {
        is_medoid[m] = true;
    }

    for _ in 0..max_iters {
        let mut best_delta = -1e-12;
        let mut best_swap: Option<(usize, usize)> = None;
        let mut acc = vec![0.0f64; k];
        for o in 0..n {
            if is_medoid[o] {
                continue;
            }
            acc.fill(0.0);
            let mut shared = 0.0f64;
            let row = d.row(o);
            for j in 0..n {
                let doj = row[j];
                if doj < d1[j] {
                    shared += doj - d1[j];
                } else {
                    let c = doj.min(d2[j]) - d1[j];
                    if c != 0.0 {
                        acc[m1[j]] += c;
                    }
                }
            }
            for (pos, &a) in acc.iter().enumerate() {
                let delta = shared + a;
                if delta < best_delta {
                    best_delta = delta;
                    best_swap = Some((o, pos));
                }
            }
        }
        match best_swap {
            Some((o, pos)) => {
                is_medoid[medoids[pos]] = false;
                is_medoid[o] = true;
                medoids[pos] = o;
                medoids.sort_unstable();
                let assigned = assign(d, &medoids);
                m1 = assigned.0;
                d1 = assigned.1;
                d2 = assigned.2;
            }
            None => break,
        }
    }

    let cost = d1.iter().sum();
    Clustering {
        nearest_medoid: m1.iter().map(|&pos| medoids[pos]).collect(),
        nearest_distance: d1,
        medoids,
        cost,
    }
}

/// Covering-number estimate for one clustering: k plus the points farther
/// than epsilon from their medoid.
fn evaluate_k(d: &DistanceMatrix, k: usize, epsilon: f64, seed: u64) -> Result<(usize, Vec<usize>)> {
    let c = cluster_kmedoids(d, k, seed, KMEDOIDS_RESTARTS, KMEDOIDS_MAX_ITERS)?;
    let mut centers = c.medoids.clone();
    centers.extend(
        (0..d.n()).filter(|&j| c.nearest_distance[j] > epsilon),
    );
    centers.sort_unstable();
    centers.dedup();
    Ok((centers.len(), centers))
}

fn schedule_ks(schedule: &Schedule, n: usize) -> Result<Vec<usize>> {
    match schedule {
        Schedule::FullScan => Ok((1..=n).rev().collect()),
        Schedule::CoarseToFine => {
            let mut ks = Vec::new();
            let mut k = n;
            while k > 1 {
                ks.push(k);
                k = ((k as f64) * 0.7).floor() as usize;
            }
            ks.push(1);
            Ok(ks)
        }
        Schedule::Explicit(ks) => {
            if ks.is_empty() {
                return Err(Error::EmptySchedule);
            }
            if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > n) {
                return Err(Error::invalid(format!("schedule entry {k} out of range for n = {n}")));
            }
            Ok(ks.clone())
        }
    }
}

/// Estimates the sample covering number by scanning cluster counts.
///
/// For each k in the schedule the sample is clustered into k medoids; the
/// estimate for that k is k plus the number of points farther than epsilon
/// from their medoid, and the minimum over the schedule is returned. The
/// realizing cover takes the medoids as centers and each remaining outlier
/// as its own center. The estimate never undercuts the true covering number.
pub fn scn_kmedoids(
    rho: &PseudometricMatrix,
    epsilon: f64,
    seed: u64,
    schedule: &Schedule,
) -> Result<ScnResult> {
    require_epsilon(epsilon)?;
    let d = rho.as_matrix();
    let n = d.n();
    let ks = schedule_ks(schedule, n)?;

    let mut evaluated: Vec<(usize, usize, Vec<usize>)> = run_ks(d, &ks, epsilon, seed)?;

    if matches!(schedule, Schedule::CoarseToFine) {
        // refine around the current best k with shrinking step sizes
        let mut seen: BTreeSet<usize> = ks.iter().copied().collect();
        loop {
            let (&(_, best_k, _), step) = {
                let best = best_entry(&evaluated);
                let neighbors = nearest_gap(&seen, best.1);
                (best, neighbors)
            };
            if step <= 1 {
                break;
            }
            let half = (step / 2).max(1);
            let candidates: Vec<usize> = [best_k.saturating_sub(half), best_k + half]
                .into_iter()
                .filter(|&k| (1..=n).contains(&k) && !seen.contains(&k))
                .collect();
            if candidates.is_empty() {
                break;
            }
            for &k in &candidates {
                seen.insert(k);
            }
            evaluated.extend(run_ks(d, &candidates, epsilon, seed)?);
        }
    }

    let &(count, _, ref centers) = best_entry(&evaluated);
    let cover = match verify_cover(rho, epsilon, centers)? {
        CoverCheck::Valid(c) => c,
        CoverCheck::Invalid(_) => unreachable!("medoids plus outliers always cover"),
    };
    Ok(ScnResult { count, cover })
}

fn run_ks(
    d: &DistanceMatrix,
    ks: &[usize],
    epsilon: f64,
    seed: u64,
) -> Result<Vec<(usize, usize, Vec<usize>)>> {
    ks.par_iter()
        .map(|&k| evaluate_k(d, k, epsilon, seed).map(|(count, centers)| (count, k, centers)))
        .collect()
}

fn best_entry(evaluated: &[(usize, usize, Vec<usize>)]) -> &(usize, usize, Vec<usize>) {
    evaluated
        .iter()
        .min_by_key(|&&(count, k, _)| (count, k))
        .expect("schedule is nonempty")
}

/// Largest distance from `k` to the adjacent evaluated k values.
fn nearest_gap(seen: &BTreeSet<usize>, k: usize) -> usize {
    let below = seen.range(..k).next_back().map(|&b| k - b);
    let above = seen.range(k + 1..).next().map(|&a| a - k);
    below.max(above).unwrap_or(0)
}

/// Greedy set cover over the epsilon-balls, deterministic with ties to the
/// lowest index. The count is at most (1 + ln n) times the optimum.
pub fn scn_greedy(rho: &PseudometricMatrix, epsilon: f64) -> Result<ScnResult> {
    require_epsilon(epsilon)?;
    let n = rho.n();
    let balls: Vec<BitSet> = (0..n)
        .map(|i| {
            let mut b = BitSet::empty(n);
            for j in 0..n {
                if rho.get(i, j) <= epsilon {
                    b.insert(j);
                }
            }
            b
        })
        .collect();

    // lazy greedy: cached gains only ever shrink, so a popped entry whose
    // recomputed gain still tops the heap is the true maximum
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> = (0..n)
        .map(|i| (balls[i].len(), Reverse(i)))
        .collect();
    let mut uncovered = BitSet::full(n);
    let mut centers = Vec::new();
    while !uncovered.is_empty() {
        let (cached, Reverse(i)) = heap.pop().expect("uncovered points have nonzero gain");
        let gain = balls[i].intersection_len(&uncovered);
        if gain == cached {
            centers.push(i);
            uncovered.subtract(&balls[i]);
        } else if gain > 0 {
            heap.push((gain, Reverse(i)));
        }
    }
    centers.sort_unstable();
    let count = centers.len();
    let cover = match verify_cover(rho, epsilon, &centers)? {
        CoverCheck::Valid(c) => c,
        CoverCheck::Invalid(_) => unreachable!("greedy terminates only when covered"),
    };
    Ok(ScnResult { count, cover })
}

/// Exact minimum cover by enumerating index subsets in increasing
/// cardinality (lexicographic within a cardinality). Enforced to n <= 20.
pub fn scn_exact(rho: &PseudometricMatrix, epsilon: f64) -> Result<ScnResult> {
    require_epsilon(epsilon)?;
    let n = rho.n();
    if n > EXACT_LIMIT {
        return Err(Error::ExactTooLarge {
            n,
            limit: EXACT_LIMIT,
        });
    }
    let balls: Vec<u32> = (0..n)
        .map(|i| {
            let mut mask = 0u32;
            for j in 0..n {
                if rho.get(i, j) <= epsilon {
                    mask |= 1 << j;
                }
            }
            mask
        })
        .collect();
    let full: u32 = if n == 32 { u32::MAX } else { (1 << n) - 1 };

    for size in 1..=n {
        let mut combo: Vec<usize> = (0..size).collect();
        loop {
            let union = combo.iter().fold(0u32, |acc, &i| acc | balls[i]);
            if union == full {
                let count = combo.len();
                let cover = match verify_cover(rho, epsilon, &combo)? {
                    CoverCheck::Valid(c) => c,
                    CoverCheck::Invalid(_) => unreachable!("union covers all points"),
                };
                return Ok(ScnResult { count, cover });
            }
            if !next_combination(&mut combo, n) {
                break;
            }
        }
    }
    unreachable!("the full index set always covers")
}

/// Advances `combo` to the next k-combination of 0..n in lexicographic
/// order; false when exhausted.
fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in (i + 1)..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScnAlgorithm {
    Kmedoids,
    Greedy,
    Exact,
}

impl ScnAlgorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScnAlgorithm::Kmedoids => "kmedoids",
            ScnAlgorithm::Greedy => "greedy",
            ScnAlgorithm::Exact => "exact",
        }
    }
}

impl std::str::FromStr for ScnAlgorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmedoids" => Ok(ScnAlgorithm::Kmedoids),
            "greedy" => Ok(ScnAlgorithm::Greedy),
            "exact" => Ok(ScnAlgorithm::Exact),
            other => Err(Error::invalid(format!(
                "unknown algorithm {other:?} (expected kmedoids, greedy or exact)"
            ))),
        }
    }
}

/// Runs the chosen estimator at one resolution.
pub fn estimate_scn(
    rho: &PseudometricMatrix,
    epsilon: f64,
    algorithm: ScnAlgorithm,
    seed: u64,
    schedule: Option<&Schedule>,
) -> Result<ScnResult> {
    match algorithm {
        ScnAlgorithm::Kmedoids => {
            let default = Schedule::default_for(rho.n(), false);
            scn_kmedoids(rho, epsilon, seed, schedule.unwrap_or(&default))
        }
        ScnAlgorithm::Greedy => scn_greedy(rho, epsilon),
        ScnAlgorithm::Exact => scn_exact(rho, epsilon),
    }
}

/// One point of an SCN-versus-epsilon curve.
#[derive(Debug, Clone)]
pub struct ScnRecord {
    pub epsilon: f64,
    pub count: usize,
    pub algorithm: ScnAlgorithm,
    pub seed: u64,
}

#[derive(Debug, Clone, Default)]
pub struct ScnCurve {
    pub records: Vec<ScnRecord>,
}

/// Estimates the covering number at each resolution of an ascending grid.
pub fn scn_curve(
    rho: &PseudometricMatrix,
    epsilons: &[f64],
    algorithm: ScnAlgorithm,
    seed: u64,
    schedule: Option<&Schedule>,
) -> Result<ScnCurve> {
    if epsilons.is_empty() {
        return Err(Error::invalid("epsilon grid is empty"));
    }
    if epsilons.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("epsilon grid must be ascending"));
    }
    let mut records = Vec::with_capacity(epsilons.len());
    for &epsilon in epsilons {
        let result = estimate_scn(rho, epsilon, algorithm, seed, schedule)?;
        records.push(ScnRecord {
            epsilon,
            count: result.count,
            algorithm,
            seed,
        });
    }
    Ok(ScnCurve { records })
}

/// Minimum distance over pairs of points with different labels.
pub fn min_interclass_distance(d: &DistanceMatrix, labels: &[u32]) -> Result<f64> {
    let n = d.n();
    if labels.len() != n {
        return Err(Error::invalid(format!(
            "{} labels for matrix of size {n}",
            labels.len()
        )));
    }
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            if labels[i] != labels[j] {
                best = best.min(d.get(i, j));
            }
        }
    }
    if best.is_infinite() {
        return Err(Error::SingleClass);
    }
    Ok(best)
}

/// A covering-number estimate at a rescaled resolution.
#[derive(Debug, Clone)]
pub struct NormalizedScn {
    pub count: usize,
    /// min inter-class distance after / before the transformation.
    pub ratio: f64,
    pub rescaled_epsilon: f64,
    /// False when the ratio is degenerate (zero or non-finite); the count is
    /// then evaluated at the raw epsilon and should not be trusted.
    pub reliable: bool,
}

/// Normalized covering number: the estimate evaluated at `ratio * epsilon`,
/// where the ratio is the minimum inter-class distance under the
/// transformation metric divided by the same minimum under the base
/// Euclidean distances. Transformations that uniformly shrink the data are
/// thereby judged at a proportionally finer resolution.
pub fn normalized_scn(
    rho: &PseudometricMatrix,
    d_base: &DistanceMatrix,
    labels: &[u32],
    epsilon: f64,
    algorithm: ScnAlgorithm,
    seed: u64,
    schedule: Option<&Schedule>,
) -> Result<NormalizedScn> {
    require_epsilon(epsilon)?;
    let after = min_interclass_distance(rho.as_matrix(), labels)?;
    let before = min_interclass_distance(d_base, labels)?;
    let ratio = after / before;
    let reliable = ratio.is_finite() && ratio > 0.0;
    let rescaled_epsilon = if reliable { ratio * epsilon } else { epsilon };
    let result = estimate_scn(rho, rescaled_epsilon, algorithm, seed, schedule)?;
    Ok(NormalizedScn {
        count: result.count,
        ratio,
        rescaled_epsilon,
        reliable,
    })
}

fn require_epsilon(epsilon: f64) -> Result<()> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        Err(Error::invalid(format!(
            "epsilon must be finite and >= 0, got {epsilon}"
        )))
    } else {
        Ok(())
    }
}

/// Fixed-size bit set over point indices.
#[derive(Debug, Clone)]
struct BitSet {
    words: Vec<u64>,
    len: usize,
}

impl BitSet {
    fn empty(n: usize) -> Self {
        BitSet {
            words: vec![0; n.div_ceil(64)],
            len: 0,
        }
    }

    fn full(n: usize) -> Self {
        let mut words = vec![u64::MAX; n.div_ceil(64)];
        if n % 64 != 0 {
            if let Some(last) = words.last_mut() {
                *last = (1u64 << (n % 64)) - 1;
            }
        }
        BitSet { words, len: n }
    }

    fn insert(&mut self, i: usize) {
        let w = &mut self.words[i / 64];
        let bit = 1u64 << (i % 64);
        if *w & bit == 0 {
            *w |= bit;
            self.len += 1;
        }
    }

    fn len(&self) -> usize {
        self.len
    }

    fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn intersection_len(&self, other: &BitSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    fn subtract(&mut self, other: &BitSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
        self.len = self.words.iter().map(|w| w.count_ones() as usize).sum();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// rho = absolute difference between the line points {0, 1, 10, 11}.
    fn line_instance() -> PseudometricMatrix {
        let coords = [0.0f64, 1.0, 10.0, 11.0];
        let mut m = DistanceMatrix::zeros(4);
        for i in 0..4 {
            for j in (i + 1)..4 {
                m.set_pair(i, j, (coords[i] - coords[j]).abs());
            }
        }
        PseudometricMatrix::from_matrix(m).unwrap()
    }

    #[test]
    fn verify_all_points_cover_themselves() {
        let rho = line_instance();
        let check = verify_cover(&rho, 0.0, &[0, 1, 2, 3]).unwrap();
        match check {
            CoverCheck::Valid(c) => {
                assert_eq!(c.assignment, vec![0, 1, 2, 3]);
                assert_eq!(c.center_indices, vec![0, 1, 2, 3]);
            }
            CoverCheck::Invalid(_) => panic!("self-cover must be valid"),
        }
    }

    #[test]
    fn verify_line_cover_assignments() {
        let rho = line_instance();
        match verify_cover(&rho, 1.0, &[0, 2]).unwrap() {
            CoverCheck::Valid(c) => assert_eq!(c.assignment, vec![0, 0, 2, 2]),
            CoverCheck::Invalid(_) => panic!("centers {{0,10}} cover at eps=1"),
        }
    }

    #[test]
    fn verify_reports_uncovered_points() {
        let rho = line_instance();
        match verify_cover(&rho, 1.0, &[0]).unwrap() {
            CoverCheck::Valid(_) => panic!("single center cannot cover"),
            CoverCheck::Invalid(f) => {
                let indices: Vec<usize> = f.uncovered.iter().map(|u| u.index).collect();
                assert_eq!(indices, vec![2, 3]);
                assert_eq!(f.uncovered[0].distance, 10.0);
                assert_eq!(f.uncovered[1].distance, 11.0);
            }
        }
    }

    #[test]
    fn verify_rejects_bad_centers() {
        let rho = line_instance();
        assert!(verify_cover(&rho, 1.0, &[]).is_err());
        assert!(verify_cover(&rho, 1.0, &[9]).is_err());
    }

    #[test]
    fn line_instance_counts_by_all_algorithms() {
        let rho = line_instance();
        let schedule = Schedule::FullScan;
        for (eps, expected) in [(0.0, 4usize), (1.0, 2), (10.0, 1)] {
            let exact = scn_exact(&rho, eps).unwrap();
            let greedy = scn_greedy(&rho, eps).unwrap();
            let kmed = scn_kmedoids(&rho, eps, 0, &schedule).unwrap();
            assert_eq!(exact.count, expected, "exact at eps={eps}");
            assert_eq!(greedy.count, expected, "greedy at eps={eps}");
            assert_eq!(kmed.count, expected, "kmedoids at eps={eps}");
        }
    }

    #[test]
    fn one_center_when_epsilon_exceeds_diameter() {
        let rho = line_instance();
        let eps = 100.0;
        assert_eq!(scn_exact(&rho, eps).unwrap().count, 1);
        assert_eq!(scn_greedy(&rho, eps).unwrap().count, 1);
        assert_eq!(
            scn_kmedoids(&rho, eps, 0, &Schedule::FullScan).unwrap().count,
            1
        );
    }

    #[test]
    fn epsilon_zero_distinct_points_need_n_centers() {
        let rho = line_instance();
        assert_eq!(scn_exact(&rho, 0.0).unwrap().count, 4);
        assert_eq!(
            scn_kmedoids(&rho, 0.0, 0, &Schedule::FullScan).unwrap().count,
            4
        );
    }

    #[test]
    fn greedy_ball_choice_at_epsilon_ten() {
        // center 1 covers 0 and 10 within 10 and 11 at exactly 10
        let rho = line_instance();
        let result = scn_greedy(&rho, 10.0).unwrap();
        assert_eq!(result.count, 1);
        assert_eq!(result.cover.center_indices, vec![1]);
    }

    #[test]
    fn exact_single_point() {
        let m = DistanceMatrix::zeros(1);
        let rho = PseudometricMatrix::from_matrix(m).unwrap();
        assert_eq!(scn_exact(&rho, 0.0).unwrap().count, 1);
    }

    #[test]
    fn exact_rejects_large_n() {
        let m = DistanceMatrix::zeros(21);
        let rho = PseudometricMatrix::from_matrix(m).unwrap();
        assert!(matches!(
            scn_exact(&rho, 0.0).unwrap_err(),
            Error::ExactTooLarge { n: 21, .. }
        ));
    }

    #[test]
    fn explicit_empty_schedule_is_an_error() {
        let rho = line_instance();
        assert!(matches!(
            scn_kmedoids(&rho, 1.0, 0, &Schedule::Explicit(vec![])).unwrap_err(),
            Error::EmptySchedule
        ));
    }

    #[test]
    fn curves_are_non_increasing_for_exact() {
        let rho = line_instance();
        let curve = scn_curve(&rho, &[0.0, 1.0, 2.0, 10.0, 12.0], ScnAlgorithm::Exact, 0, None)
            .unwrap();
        let counts: Vec<usize> = curve.records.iter().map(|r| r.count).collect();
        assert_eq!(counts, vec![4, 2, 2, 1, 1]);
    }

    #[test]
    fn curve_rejects_unsorted_or_empty_grid() {
        let rho = line_instance();
        assert!(scn_curve(&rho, &[], ScnAlgorithm::Exact, 0, None).is_err());
        assert!(scn_curve(&rho, &[2.0, 1.0], ScnAlgorithm::Exact, 0, None).is_err());
    }

    #[test]
    fn min_interclass_two_clusters() {
        let mut m = DistanceMatrix::zeros(4);
        m.set_pair(0, 1, 1.0);
        m.set_pair(2, 3, 1.0);
        for (i, j) in [(0, 2), (0, 3), (1, 2), (1, 3)] {
            m.set_pair(i, j, 5.0);
        }
        assert_eq!(min_interclass_distance(&m, &[0, 0, 1, 1]).unwrap(), 5.0);
        assert!(matches!(
            min_interclass_distance(&m, &[2, 2, 2, 2]).unwrap_err(),
            Error::SingleClass
        ));
    }

    #[test]
    fn normalization_identity_ratio_is_one() {
        let rho = line_instance();
        let base = rho.as_matrix().clone();
        let norm = normalized_scn(
            &rho,
            &base,
            &[0, 0, 1, 1],
            1.0,
            ScnAlgorithm::Exact,
            0,
            None,
        )
        .unwrap();
        assert_eq!(norm.ratio, 1.0);
        assert!(norm.reliable);
        assert_eq!(norm.count, scn_exact(&rho, 1.0).unwrap().count);
    }

    #[test]
    fn normalization_homothety_rescales_epsilon() {
        // transform scales all points by 0.5: rho entries halve, ratio 0.5,
        // and the normalized count at eps equals the raw count at eps/2
        let rho = line_instance();
        let mut half = DistanceMatrix::zeros(4);
        for i in 0..4 {
            for j in (i + 1)..4 {
                half.set_pair(i, j, rho.get(i, j) * 0.5);
            }
        }
        let rho_half = PseudometricMatrix::from_matrix(half).unwrap();
        let norm = normalized_scn(
            &rho_half,
            rho.as_matrix(),
            &[0, 0, 1, 1],
            2.0,
            ScnAlgorithm::Exact,
            0,
            None,
        )
        .unwrap();
        assert_eq!(norm.ratio, 0.5);
        assert_eq!(norm.rescaled_epsilon, 1.0);
        assert_eq!(norm.count, scn_exact(&rho_half, 1.0).unwrap().count);
    }

    #[test]
    fn degenerate_ratio_flagged_unreliable() {
        let rho_zero = PseudometricMatrix::from_matrix(DistanceMatrix::zeros(4)).unwrap();
        let base = line_instance();
        let norm = normalized_scn(
            &rho_zero,
            base.as_matrix(),
            &[0, 0, 1, 1],
            1.0,
            ScnAlgorithm::Exact,
            0,
            None,
        )
        .unwrap();
        assert!(!norm.reliable);
        assert_eq!(norm.ratio, 0.0);
    }

    #[test]
    fn kmedoids_covers_pass_verification_on_random_instances() {
        use rand::Rng;
        for trial in 0..10u64 {
            let mut r = rng::stream(&[77, trial]);
            let n = r.random_range(3..15usize);
            let mut m = DistanceMatrix::zeros(n);
            for i in 0..n {
                for j in (i + 1)..n {
                    m.set_pair(i, j, r.random::<f64>() * 3.0);
                }
            }
            let rho = PseudometricMatrix::from_matrix(m).unwrap();
            let eps = r.random::<f64>();
            for result in [
                scn_kmedoids(&rho, eps, trial, &Schedule::FullScan).unwrap(),
                scn_greedy(&rho, eps).unwrap(),
                scn_exact(&rho, eps).unwrap(),
            ] {
                assert_eq!(result.count, result.cover.center_indices.len());
                assert!(matches!(
                    verify_cover(&rho, eps, &result.cover.center_indices).unwrap(),
                    CoverCheck::Valid(_)
                ));
            }
        }
    }
}
