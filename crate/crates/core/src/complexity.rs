//! Rademacher complexity of norm-bounded linear classes and their invariant
//! subclasses.
//!
//! For the class {x -> <w, x> : ||w||_p <= W} the complexity is
//! (W/n) E_sigma ||u_sigma||_q with u_sigma = sum_i sigma_i x_i and q the
//! dual exponent. Restricting to weights invariant under a linear map A
//! (w = A^T w) turns the supremum into an infimum over corrections:
//! (W/n) E_sigma inf_eta ||u_sigma + (A - I) eta||_q. At p = q = 2 the
//! infimum has the closed form ||P u_sigma||_2 where P projects onto the
//! null space of (A - I)^T; for general q in (1, inf) it is solved here by
//! first-order descent. Expectations are Monte-Carlo estimates over seeded
//! sign draws shared across the estimators, so paired comparisons see the
//! same sigma stream draw for draw.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::data::Sample;
use crate::error::{Error, Result};
use crate::rng;

const SIGMA_STREAM_TAG: u64 = 0x7369676d;
const GAUSS_STREAM_TAG: u64 = 0x67617573;

/// Matrix representation of a linear data transformation.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearTransform {
    matrix: DMatrix<f64>,
}

impl LinearTransform {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                context: format!("transform matrix is {}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "transform matrix entry".to_string(),
            });
        }
        Ok(LinearTransform { matrix })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                context: "transform rows have unequal lengths".to_string(),
            });
        }
        LinearTransform::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    /// Coordinate reversal (x_1, ..., x_d) -> (x_d, ..., x_1).
    pub fn reversal(d: usize) -> Self {
        LinearTransform {
            matrix: DMatrix::from_fn(d, d, |i, j| if j == d - 1 - i { 1.0 } else { 0.0 }),
        }
    }

    /// Circular shift by one coordinate.
    pub fn cyclic_shift(d: usize) -> Self {
        LinearTransform {
            matrix: DMatrix::from_fn(d, d, |i, j| if (j + 1) % d == i { 1.0 } else { 0.0 }),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

/// Orthogonal projector onto the invariant weight set {w : A^T w = w}.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    matrix: DMatrix<f64>,
}

impl Projector {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }

    /// Rank of the projector, read off the trace (eigenvalues are 0/1).
    pub fn rank(&self) -> usize {
        self.matrix.trace().round() as usize
    }
}

/// P = I - (A - I)(A - I)^+, the orthogonal projector onto the null space of
/// (A - I)^T. Singular values below dim * machine-epsilon * sigma_max are
/// treated as zero when forming the pseudoinverse.
pub fn invariance_projector(a: &LinearTransform) -> Result<Projector> {
    let d = a.dim();
    let identity = DMatrix::<f64>::identity(d, d);
    let m = a.matrix() - &identity;
    let svd = m.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0f64, f64::max);
    let cutoff = d as f64 * f64::EPSILON * sigma_max;
    let pinv = svd
        .pseudo_inverse(cutoff)
        .map_err(|e| Error::invalid(format!("pseudoinverse failed: {e}")))?;
    let p = identity - &m * pinv;

    // sanity: symmetric idempotent, and (A^T - I) P = 0
    let sym_err = (&p - p.transpose()).abs().max();
    let idem_err = (&p * &p - &p).abs().max();
    let ann_err = (m.transpose() * &p).abs().max();
    if sym_err > 1e-8 || idem_err > 1e-8 || ann_err > 1e-8 {
        return Err(Error::NonFinite {
            context: format!(
                "projector algebra out of tolerance (sym {sym_err:.2e}, idem {idem_err:.2e}, ann {ann_err:.2e})"
            ),
        });
    }
    Ok(Projector { matrix: p })
}

/// A Monte-Carlo scalar with its standard error and draw count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityEstimate {
    pub value: f64,
    pub std_error: f64,
    pub draws: usize,
}

impl ComplexityEstimate {
    /// Mean and standard error of per-draw values. Uses pairwise summation,
    /// so the reduction is independent of evaluation order.
    pub fn from_draws(values: &[f64]) -> Self {
        let draws = values.len();
        let mean = pairwise_sum(values) / draws as f64;
        let std_error = if draws > 1 {
            let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
            (pairwise_sum(&sq) / (draws - 1) as f64).sqrt() / (draws as f64).sqrt()
        } else {
            0.0
        };
        ComplexityEstimate {
            value: mean,
            std_error,
            draws,
        }
    }
}

fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// The sign vector of draw `t` under `seed`: shared by every estimator so
/// paired comparisons are per-draw.
fn sigma_vector(n: usize, seed: u64, draw: usize) -> Vec<f64> {
    let mut r = rng::stream(&[seed, SIGMA_STREAM_TAG, draw as u64]);
    (0..n).map(|_| if r.random::<bool>() { 1.0 } else { -1.0 }).collect()
}

fn signed_sum(points: &[DVector<f64>], sigma: &[f64]) -> DVector<f64> {
    let d = points[0].len();
    let mut u = DVector::zeros(d);
    for (x, &s) in points.iter().zip(sigma) {
        u.axpy(s, x, 1.0);
    }
    u
}

/// l_q norm for q in [1, inf]; `f64::INFINITY` selects the max norm.
pub fn lq_norm(v: &DVector<f64>, q: f64) -> f64 {
    if q.is_infinite() {
        v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
    } else if q == 2.0 {
        v.norm()
    } else if q == 1.0 {
        v.iter().map(|x| x.abs()).sum()
    } else {
        let sum: f64 = v.iter().map(|x| x.abs().powf(q)).sum();
        sum.powf(1.0 / q)
    }
}

fn check_points(points: &[DVector<f64>]) -> Result<usize> {
    if points.is_empty() {
        return Err(Error::invalid("sample is empty"));
    }
    let d = points[0].len();
    if points.iter().any(|p| p.len() != d) {
        return Err(Error::DimensionMismatch {
            context: "sample points have unequal dimensions".to_string(),
        });
    }
    Ok(d)
}

fn check_q(q: f64) -> Result<()> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::invalid(format!("q must be in [1, inf], got {q}")));
    }
    Ok(())
}

/// Per-draw values of (W/n) ||u_sigma||_q for the unconstrained class.
pub fn rademacher_general_draws(
    points: &[DVector<f64>],
    w: f64,
    q: f64,
    draws: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let _ = check_points(points)?;
    check_q(q)?;
    require_draws(draws)?;
    let n = points.len();
    Ok((0..draws)
        .into_par_iter()
        .map(|t| {
            let u = signed_sum(points, &sigma_vector(n, seed, t));
            w / n as f64 * lq_norm(&u, q)
        })
        .collect())
}

/// Monte-Carlo estimate of (W/n) E ||u_sigma||_q.
pub fn rademacher_general(
    points: &[DVector<f64>],
    w: f64,
    q: f64,
    draws: usize,
    seed: u64,
) -> Result<ComplexityEstimate> {
    Ok(ComplexityEstimate::from_draws(&rademacher_general_draws(
        points, w, q, draws, seed,
    )?))
}

/// Per-draw values of (W/n) ||P u_sigma||_2 for the A-invariant class.
pub fn rademacher_invariant_l2_draws(
    points: &[DVector<f64>],
    a: &LinearTransform,
    w: f64,
    draws: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let d = check_points(points)?;
    require_draws(draws)?;
    if a.dim() != d {
        return Err(Error::DimensionMismatch {
            context: format!("transform is {}x{} but data dimension is {d}", a.dim(), a.dim()),
        });
    }
    let p = invariance_projector(a)?;
    let n = points.len();
    Ok((0..draws)
        .into_par_iter()
        .map(|t| {
            let u = signed_sum(points, &sigma_vector(n, seed, t));
            w / n as f64 * p.apply(&u).norm()
        })
        .collect())
}

/// Closed-form invariant complexity at p = q = 2.
pub fn rademacher_invariant_l2(
    points: &[DVector<f64>],
    a: &LinearTransform,
    w: f64,
    draws: usize,
    seed: u64,
) -> Result<ComplexityEstimate> {
    Ok(ComplexityEstimate::from_draws(
        &rademacher_invariant_l2_draws(points, a, w, draws, seed)?,
    ))
}

/// Stopping parameters for the per-draw minimization.
#[derive(Debug, Clone, Copy)]
pub struct DescentOptions {
    /// Convergence when the gradient 2-norm falls to or below this.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for DescentOptions {
    fn default() -> Self {
        DescentOptions {
            tol: 1e-9,
            max_iters: 200_000,
        }
    }
}

/// Gradient of the descent objective eta -> ||u + M eta||_q at `eta`.
/// Exposed so the analytic gradient can be validated against finite
/// differences.
pub fn residual_norm_gradient(
    u: &DVector<f64>,
    m: &DMatrix<f64>,
    eta: &DVector<f64>,
    q: f64,
) -> DVector<f64> {
    let v = u + m * eta;
    let norm = lq_norm(&v, q);
    q_norm_gradient(m, &v, q, norm)
}

/// Gradient of eta -> ||u + M eta||_q at the residual `v`, for q in (1, inf):
/// M^T g where g_i = sign(v_i) (|v_i| / ||v||_q)^(q-1).
fn q_norm_gradient(m: &DMatrix<f64>, v: &DVector<f64>, q: f64, norm: f64) -> DVector<f64> {
    let g = DVector::from_fn(v.len(), |i, _| {
        let vi = v[i];
        if vi == 0.0 || norm == 0.0 {
            0.0
        } else {
            vi.signum() * (vi.abs() / norm).powf(q - 1.0)
        }
    });
    m.transpose() * g
}

/// Minimizes ||u + M eta||_q over eta by first-order descent with
/// Barzilai-Borwein steps and a backtracking safeguard. Returns the minimum
/// and the iterations used; fails if the gradient norm has not reached
/// `tol` at the iteration cap.
pub fn minimize_q_norm(
    u: &DVector<f64>,
    m: &DMatrix<f64>,
    q: f64,
    opts: DescentOptions,
) -> Result<(f64, usize)> {
    if !(q > 1.0) || q.is_infinite() {
        return Err(Error::invalid(format!("q must be in (1, inf), got {q}")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::invalid("tol must be > 0"));
    }
    let zero_floor = 1e-14 * (1.0 + lq_norm(u, q));
    if m.amax() == 0.0 {
        // eta is irrelevant; the minimum is ||u||_q
        return Ok((lq_norm(u, q), 0));
    }

    let mut eta = DVector::<f64>::zeros(m.ncols());
    let mut v = u.clone();
    let mut f = lq_norm(&v, q);
    let mut grad = q_norm_gradient(m, &v, q, f);
    let mut step = 1.0 / (1.0 + m.amax());
    let mut prev: Option<(DVector<f64>, DVector<f64>)> = None; // (eta, grad)

    for iter in 0..opts.max_iters {
        if f <= zero_floor {
            return Ok((0.0, iter));
        }
        let gnorm = grad.norm();
        if gnorm <= opts.tol {
            return Ok((f, iter));
        }
        if let Some((ref eta_prev, ref grad_prev)) = prev {
            let s = &eta - eta_prev;
            let y = &grad - grad_prev;
            let sy = s.dot(&y);
            if sy > 0.0 {
                step = s.dot(&s) / sy;
            }
        }
        // backtracking line search along -grad
        let mut t = step.clamp(1e-18, 1e18);
        let mut accepted = false;
        for _ in 0..60 {
            let eta_new = &eta - t * &grad;
            let v_new = u + m * &eta_new;
            let f_new = lq_norm(&v_new, q);
            if f_new <= f - 1e-4 * t * gnorm * gnorm || f_new < zero_floor {
                prev = Some((eta.clone(), grad.clone()));
                eta = eta_new;
                v = v_new;
                f = f_new;
                grad = q_norm_gradient(m, &v, q, f);
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            // the step underflowed; accept only if already at tolerance
            let gnorm = grad.norm();
            if gnorm <= opts.tol || f <= zero_floor {
                return Ok((if f <= zero_floor { 0.0 } else { f }, iter));
            }
            return Err(Error::NoConvergence {
                draw: 0,
                grad_norm: gnorm,
                iters: iter,
            });
        }
    }
    let gnorm = grad.norm();
    if gnorm <= opts.tol {
        return Ok((f, opts.max_iters));
    }
    if f <= zero_floor {
        return Ok((0.0, opts.max_iters));
    }
    Err(Error::NoConvergence {
        draw: 0,
        grad_norm: gnorm,
        iters: opts.max_iters,
    })
}

/// Per-draw values of (W/n) inf_eta ||u_sigma + (A - I) eta||_q, q in
/// (1, inf), each infimum solved numerically.
pub fn rademacher_invariant_inf_draws(
    points: &[DVector<f64>],
    a: &LinearTransform,
    w: f64,
    q: f64,
    draws: usize,
    seed: u64,
    opts: DescentOptions,
) -> Result<Vec<f64>> {
    let d = check_points(points)?;
    require_draws(draws)?;
    if a.dim() != d {
        return Err(Error::DimensionMismatch {
            context: format!("transform is {}x{} but data dimension is {d}", a.dim(), a.dim()),
        });
    }
    let n = points.len();
    let identity = DMatrix::<f64>::identity(d, d);
    let m = a.matrix() - identity;
    (0..draws)
        .into_par_iter()
        .map(|t| {
            let u = signed_sum(points, &sigma_vector(n, seed, t));
            match minimize_q_norm(&u, &m, q, opts) {
                Ok((min, _)) => Ok(w / n as f64 * min),
                Err(Error::NoConvergence { grad_norm, iters, .. }) => Err(Error::NoConvergence {
                    draw: t,
                    grad_norm,
                    iters,
                }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Numeric-infimum invariant complexity for general dual exponents.
pub fn rademacher_invariant_inf(
    points: &[DVector<f64>],
    a: &LinearTransform,
    w: f64,
    q: f64,
    draws: usize,
    seed: u64,
    opts: DescentOptions,
) -> Result<ComplexityEstimate> {
    Ok(ComplexityEstimate::from_draws(
        &rademacher_invariant_inf_draws(points, a, w, q, draws, seed, opts)?,
    ))
}

fn require_draws(draws: usize) -> Result<()> {
    if draws == 0 {
        Err(Error::invalid("draws must be >= 1"))
    } else {
        Ok(())
    }
}

/// Flattens a sample's tensors into f64 vectors.
pub fn sample_to_vectors(sample: &Sample) -> Vec<DVector<f64>> {
    sample
        .points()
        .iter()
        .map(|p| DVector::from_iterator(p.values().len(), p.values().iter().map(|&v| f64::from(v))))
        .collect()
}

/// n seeded draws from N(0, sigma^2 I_d).
pub fn gaussian_sample(d: usize, n: usize, sigma: f64, seed: u64) -> Vec<DVector<f64>> {
    (0..n)
        .map(|i| {
            let mut r = rng::stream(&[seed, GAUSS_STREAM_TAG, i as u64]);
            DVector::from_fn(d, |_, _| sigma * r.sample::<f64, _>(StandardNormal))
        })
        .collect()
}

/// Monte-Carlo complexity of the general, reversal-invariant and
/// shift-invariant linear classes on one Gaussian sample, printed beside the
/// closed-form reference bounds for that model. The references are reported,
/// not asserted: they come from a different derivation and need not match
/// the estimates' constants.
#[derive(Debug, Clone)]
pub struct GaussianComparisonReport {
    pub d: usize,
    pub n: usize,
    pub sigma: f64,
    pub w: f64,
    pub general: ComplexityEstimate,
    pub reversal_invariant: ComplexityEstimate,
    pub shift_invariant: ComplexityEstimate,
    /// sqrt(d) W sigma / sqrt(n)
    pub general_reference: f64,
    /// sqrt(ceil(d/2)) W sigma / (2 sqrt(n))
    pub reversal_reference: f64,
    /// W sigma / n
    pub shift_reference: f64,
}

pub fn gaussian_comparison_report(
    d: usize,
    n: usize,
    sigma: f64,
    w: f64,
    draws: usize,
    seed: u64,
) -> Result<GaussianComparisonReport> {
    if d < 2 {
        return Err(Error::invalid("comparison report requires d >= 2"));
    }
    if n == 0 {
        return Err(Error::invalid("comparison report requires n >= 1"));
    }
    let data = gaussian_sample(d, n, sigma, seed);
    let general = rademacher_general(&data, w, 2.0, draws, seed)?;
    let reversal = rademacher_invariant_l2(&data, &LinearTransform::reversal(d), w, draws, seed)?;
    let shift = rademacher_invariant_l2(&data, &LinearTransform::cyclic_shift(d), w, draws, seed)?;
    let nf = n as f64;
    Ok(GaussianComparisonReport {
        d,
        n,
        sigma,
        w,
        general,
        reversal_invariant: reversal,
        shift_invariant: shift,
        general_reference: (d as f64).sqrt() * w * sigma / nf.sqrt(),
        reversal_reference: ((d as f64 / 2.0).ceil()).sqrt() * w * sigma / (2.0 * nf.sqrt()),
        shift_reference: w * sigma / nf,
    })
}
