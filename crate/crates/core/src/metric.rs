//! Orbit distances and the induced pseudometric.
//!
//! The direct orbit distance between two examples is the minimum Euclidean
//! distance over the Cartesian product of their finite orbits. Travelling
//! inside an orbit is free, so the induced pseudometric is the shortest-path
//! closure of the direct distances on the complete graph over the sample.

use rayon::prelude::*;

use crate::data::{DistanceMatrix, Sample};
use crate::error::{Error, Result};
use crate::transforms::{materialize_orbits, Orbit, TransformSpec};

/// Edges shorter than this are treated as exact orbit coincidences and
/// clamped to zero before the path search.
pub const ZERO_DISTANCE_CLAMP: f64 = 1e-12;

/// Pairwise direct orbit distances d(i, j).
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitDistanceMatrix(DistanceMatrix);

/// Shortest-path closure of the direct orbit distances.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudometricMatrix(DistanceMatrix);

impl OrbitDistanceMatrix {
    /// Wraps a matrix already known to hold direct orbit distances (e.g.
    /// loaded from disk). Validates the shared matrix invariants.
    pub fn from_matrix(m: DistanceMatrix) -> Result<Self> {
        m.validate()?;
        Ok(OrbitDistanceMatrix(m))
    }

    pub fn as_matrix(&self) -> &DistanceMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> DistanceMatrix {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }
}

impl PseudometricMatrix {
    /// Wraps a matrix already known to be a shortest-path closure. Validates
    /// symmetry, zero diagonal and nonnegativity (the cheap axioms).
    pub fn from_matrix(m: DistanceMatrix) -> Result<Self> {
        m.validate()?;
        Ok(PseudometricMatrix(m))
    }

    pub fn as_matrix(&self) -> &DistanceMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> DistanceMatrix {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }
}

/// Squared Euclidean distance with early exit: accumulation stops as soon as
/// the partial sum exceeds `bound`. Returns the full sum otherwise.
fn squared_distance_bounded(a: &[f32], b: &[f32], bound: f64) -> f64 {
    let mut sum = 0.0f64;
    for (ca, cb) in a.chunks(64).zip(b.chunks(64)) {
        for (x, y) in ca.iter().zip(cb) {
            let d = f64::from(*x) - f64::from(*y);
            sum += d * d;
        }
        if sum > bound {
            return sum;
        }
    }
    sum
}

/// Minimum Euclidean distance over all member pairs of two orbits.
///
/// Exact for the finite members given; an upper bound of the continuous
/// infimum when the orbits are sampled approximations. Because both orbits
/// contain their untransformed points, the result never exceeds the plain
/// Euclidean distance between the two examples.
pub fn min_orbit_distance(a: &Orbit, b: &Orbit) -> Result<f64> {
    if a.members()[0].shape() != b.members()[0].shape() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "orbit shapes {:?} vs {:?}",
                a.members()[0].shape(),
                b.members()[0].shape()
            ),
        });
    }
    // seed the running minimum with the identity pair, usually a tight bound
    let mut best = a.members()[0]
        .values()
        .iter()
        .zip(b.members()[0].values())
        .map(|(x, y)| {
            let d = f64::from(*x) - f64::from(*y);
            d * d
        })
        .sum::<f64>();
    for (i, u) in a.members().iter().enumerate() {
        for (j, v) in b.members().iter().enumerate() {
            if i == 0 && j == 0 {
                continue;
            }
            let s = squared_distance_bounded(u.values(), v.values(), best);
            if s < best {
                best = s;
            }
        }
    }
    Ok(best.sqrt())
}

/// Computes the matrix of direct orbit distances for a sample, materializing
/// one orbit per point under the given spec.
///
/// `indices`, when given, supplies each point's index for orbit seeding and
/// precomputed-orbit lookup; see [`materialize_orbits`].
pub fn direct_orbit_distances_indexed(
    sample: &Sample,
    spec: &TransformSpec,
    seed: u64,
    indices: Option<&[usize]>,
) -> Result<OrbitDistanceMatrix> {
    let orbits = materialize_orbits(sample, spec, seed, indices)?;
    orbit_distance_matrix(&orbits)
}

/// [`direct_orbit_distances_indexed`] with positions 0..n as indices.
pub fn direct_orbit_distances(
    sample: &Sample,
    spec: &TransformSpec,
    seed: u64,
) -> Result<OrbitDistanceMatrix> {
    direct_orbit_distances_indexed(sample, spec, seed, None)
}

/// Pairwise minimum distances between the given orbits. Rows are computed in
/// parallel and merged by index, so the result does not depend on scheduling.
pub fn orbit_distance_matrix(orbits: &[Orbit]) -> Result<OrbitDistanceMatrix> {
    let n = orbits.len();
    if n == 0 {
        return Err(Error::invalid("no orbits given"));
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0f64; n];
            for j in (i + 1)..n {
                row[j] = min_orbit_distance(&orbits[i], &orbits[j])?;
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut m = DistanceMatrix::zeros(n);
    for (i, row) in rows.iter().enumerate() {
        for j in (i + 1)..n {
            m.set_pair(i, j, row[j]);
        }
    }
    Ok(OrbitDistanceMatrix(m))
}

/// Shortest-path closure of the direct orbit distances: entry (s, t) is the
/// cost of the cheapest path from s to t in the complete graph whose edge
/// costs are the direct distances.
///
/// Runs one dense single-source search per node (O(n^3) total), in parallel
/// over sources. Edges below [`ZERO_DISTANCE_CLAMP`] are treated as zero so
/// exact orbit coincidences travel for free.
pub fn shortest_path_metric(d: &OrbitDistanceMatrix) -> PseudometricMatrix {
    let n = d.n();
    let mut edges = d.0.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            if edges.get(i, j) < ZERO_DISTANCE_CLAMP {
                edges.set_pair(i, j, 0.0);
            }
        }
    }

    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|s| single_source_dense(&edges, s))
        .collect();

    // Floating sums along a path depend on summation order, so enforce exact
    // symmetry by keeping the cheaper direction.
    let mut m = DistanceMatrix::zeros(n);
    for i in 0..n {
        for j in (i + 1)..n {
            m.set_pair(i, j, rows[i][j].min(rows[j][i]));
        }
    }
    PseudometricMatrix(m)
}

/// Dijkstra on a dense complete graph without a heap: O(n^2).
fn single_source_dense(edges: &DistanceMatrix, source: usize) -> Vec<f64> {
    let n = edges.n();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[source] = 0.0;
    for _ in 0..n {
        let mut u = usize::MAX;
        let mut best = f64::INFINITY;
        for v in 0..n {
            if !done[v] && dist[v] < best {
                best = dist[v];
                u = v;
            }
        }
        if u == usize::MAX {
            break;
        }
        done[u] = true;
        let row = edges.row(u);
        for v in 0..n {
            if !done[v] {
                let cand = dist[u] + row[v];
                if cand < dist[v] {
                    dist[v] = cand;
                }
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{DataPoint, TensorShape};
    use approx::assert_relative_eq;

    fn vector_point(values: &[f32]) -> DataPoint {
        DataPoint::new(
            values.to_vec(),
            TensorShape::new(1, values.len(), 1).unwrap(),
        )
        .unwrap()
    }

    fn matrix(n: usize, upper: &[(usize, usize, f64)]) -> DistanceMatrix {
        let mut m = DistanceMatrix::zeros(n);
        for &(i, j, v) in upper {
            m.set_pair(i, j, v);
        }
        m
    }

    #[test]
    fn identity_spec_gives_plain_euclidean() {
        let points = vec![
            vector_point(&[0.0, 0.0]),
            vector_point(&[3.0, 4.0]),
            vector_point(&[1.0, 1.0]),
        ];
        let sample = Sample::new(points, vec![0, 0, 0]).unwrap();
        let d = direct_orbit_distances(&sample, &TransformSpec::Identity, 0).unwrap();
        assert_relative_eq!(d.get(0, 1), 5.0, max_relative = 1e-12);
        assert_relative_eq!(d.get(0, 2), 2f64.sqrt(), max_relative = 1e-12);
        assert_eq!(d.get(0, 0), 0.0);
    }

    // Hand-built orbits for G = {identity, negate-first-coordinate}: the four
    // member pairs give sqrt(20), sqrt(32), sqrt(32), sqrt(20).
    #[test]
    fn min_orbit_distance_enumerates_member_pairs() {
        let orbit_a = Orbit::new(vec![vector_point(&[1.0, 0.0]), vector_point(&[-1.0, 0.0])], 0)
            .unwrap();
        let orbit_b = Orbit::new(vec![vector_point(&[3.0, 4.0]), vector_point(&[-3.0, 4.0])], 1)
            .unwrap();
        let d = min_orbit_distance(&orbit_a, &orbit_b).unwrap();
        assert_relative_eq!(d, 20f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn min_orbit_distance_rejects_shape_mismatch() {
        let a = Orbit::new(vec![vector_point(&[1.0, 0.0])], 0).unwrap();
        let b = Orbit::new(vec![vector_point(&[1.0, 0.0, 0.0])], 1).unwrap();
        assert!(min_orbit_distance(&a, &b).is_err());
    }

    #[test]
    fn diagonal_is_zero_for_any_spec() {
        let sample = Sample::new(
            vec![vector_point(&[0.25, 0.5]), vector_point(&[0.5, 0.25])],
            vec![0, 1],
        )
        .unwrap();
        for spec in [
            TransformSpec::Identity,
            TransformSpec::FlipHorizontal,
            TransformSpec::Crop {
                padding: 1,
                sample_budget: 5,
            },
        ] {
            let d = direct_orbit_distances(&sample, &spec, 3).unwrap();
            assert_eq!(d.get(0, 0), 0.0);
            assert_eq!(d.get(1, 1), 0.0);
        }
    }

    #[test]
    fn two_nodes_copy_the_single_edge() {
        let d = OrbitDistanceMatrix::from_matrix(matrix(2, &[(0, 1, 2.5)])).unwrap();
        let rho = shortest_path_metric(&d);
        assert_eq!(rho.get(0, 1), 2.5);
    }

    // The two candidate paths from 0 to 2 cost 3 (direct) and 1 + 1 (via 1).
    #[test]
    fn shortcut_through_middle_node() {
        let d = OrbitDistanceMatrix::from_matrix(matrix(
            3,
            &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)],
        ))
        .unwrap();
        let rho = shortest_path_metric(&d);
        assert_eq!(rho.get(0, 2), 2.0);
        assert_eq!(rho.get(0, 1), 1.0);
        assert_eq!(rho.get(1, 2), 1.0);
    }

    #[test]
    fn triangle_satisfying_input_is_unchanged() {
        let d = OrbitDistanceMatrix::from_matrix(matrix(
            3,
            &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.5)],
        ))
        .unwrap();
        let rho = shortest_path_metric(&d);
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(rho.get(i, j), d.get(i, j));
            }
        }
    }

    #[test]
    fn tiny_edges_are_clamped_to_zero() {
        let d = OrbitDistanceMatrix::from_matrix(matrix(
            3,
            &[(0, 1, 1e-13), (1, 2, 1e-13), (0, 2, 4.0)],
        ))
        .unwrap();
        let rho = shortest_path_metric(&d);
        assert_eq!(rho.get(0, 1), 0.0);
        assert_eq!(rho.get(0, 2), 0.0);
    }

    // Brute-force oracle: enumerate all simple paths (n is tiny).
    fn brute_force_shortest(edges: &DistanceMatrix, s: usize, t: usize) -> f64 {
        fn explore(
            edges: &DistanceMatrix,
            node: usize,
            t: usize,
            visited: &mut Vec<bool>,
            cost: f64,
            best: &mut f64,
        ) {
            if node == t {
                *best = best.min(cost);
                return;
            }
            for next in 0..edges.n() {
                if !visited[next] {
                    visited[next] = true;
                    explore(edges, next, t, visited, cost + edges.get(node, next), best);
                    visited[next] = false;
                }
            }
        }
        let mut visited = vec![false; edges.n()];
        visited[s] = true;
        let mut best = f64::INFINITY;
        explore(edges, s, t, &mut visited, 0.0, &mut best);
        best
    }

    #[test]
    fn matches_brute_force_on_random_instances() {
        use rand::Rng;
        for trial in 0..20 {
            let mut r = crate::rng::stream(&[41, trial]);
            let n = r.random_range(2..7usize);
            let mut m = DistanceMatrix::zeros(n);
            for i in 0..n {
                for j in (i + 1)..n {
                    m.set_pair(i, j, r.random::<f64>() * 2.0);
                }
            }
            let d = OrbitDistanceMatrix::from_matrix(m.clone()).unwrap();
            let rho = shortest_path_metric(&d);
            for s in 0..n {
                for t in 0..n {
                    if s != t {
                        let expect = brute_force_shortest(&m, s, t);
                        assert_relative_eq!(rho.get(s, t), expect, max_relative = 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn orbit_distances_bounded_by_euclidean_and_monotone_in_budget() {
        let shape = TensorShape::new(6, 6, 1).unwrap();
        let mut points = Vec::new();
        for k in 0..4 {
            let values = (0..36)
                .map(|i| ((i * 7 + k * 13) % 29) as f32 / 29.0)
                .collect();
            points.push(DataPoint::new(values, shape).unwrap());
        }
        let sample = Sample::new(points, vec![0, 0, 1, 1]).unwrap();
        let euclid = direct_orbit_distances(&sample, &TransformSpec::Identity, 5).unwrap();
        let small = direct_orbit_distances(
            &sample,
            &TransformSpec::Crop {
                padding: 2,
                sample_budget: 4,
            },
            5,
        )
        .unwrap();
        let large = direct_orbit_distances(
            &sample,
            &TransformSpec::Crop {
                padding: 2,
                sample_budget: 12,
            },
            5,
        )
        .unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert!(small.get(i, j) <= euclid.get(i, j) + 1e-12);
                // the first 4 draws of the budget-12 orbit are the same draws
                assert!(large.get(i, j) <= small.get(i, j) + 1e-12);
            }
        }
    }
}
