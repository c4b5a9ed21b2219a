//! Closed-form bound evaluators.
//!
//! Pure formula evaluators for the complexity and generalization bounds: the
//! caller supplies the cover size from the cover module and the Rademacher
//! value from the complexity module; nothing here recomputes them.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::transforms::{compose, TransformSpec};

/// Complexity bound for an output-bounded invariant class from a sample
/// cover of size m at resolution zero: 24 B sqrt(m / n).
pub fn covering_complexity_bound(b: f64, m: usize, n: usize) -> Result<f64> {
    check_nonneg("B", b)?;
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    if m > n {
        return Err(Error::invalid(format!("cover size {m} exceeds sample size {n}")));
    }
    Ok(24.0 * b * (m as f64).sqrt() / (n as f64).sqrt())
}

/// Refined entropy-integral bound for kappa-Lipschitz invariant classes
/// evaluated on an epsilon-cover of size m:
///
/// 4 kappa epsilon sqrt(1 - m/n) + 4 alpha
///   + 12 * integral_alpha^B sqrt(m log(2B / tau) / n) dtau,
///
/// using the covering model N(tau) <= (2B/tau)^m for tau < B and 1 beyond,
/// so the integrand vanishes above B. The integral is adaptive Simpson
/// quadrature with relative tolerance 1e-6.
pub fn refined_dudley_bound(
    b: f64,
    kappa: f64,
    epsilon: f64,
    m: usize,
    n: usize,
    alpha: f64,
) -> Result<f64> {
    check_nonneg("B", b)?;
    check_nonneg("kappa", kappa)?;
    check_nonneg("epsilon", epsilon)?;
    check_nonneg("alpha", alpha)?;
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    if m > n {
        return Err(Error::invalid(format!("cover size {m} exceeds sample size {n}")));
    }
    if alpha > b {
        return Err(Error::invalid(format!("alpha = {alpha} exceeds B = {b}")));
    }

    let mn = m as f64 / n as f64;
    let term_cover = 4.0 * kappa * epsilon * (1.0 - mn).sqrt();
    let term_alpha = 4.0 * alpha;

    let integral = if m == 0 || b == 0.0 {
        0.0
    } else {
        let integrand = |tau: f64| (mn * (2.0 * b / tau).ln()).sqrt();
        // the integrand is singular at 0; start a hair above and add an
        // upper bound for the missed mass, far below the 1e-6 tolerance
        let lo = if alpha > 0.0 { alpha } else { b * 1e-12 };
        let tail = if alpha > 0.0 {
            0.0
        } else {
            // integral_0^lo sqrt(mn * ln(2b/tau)) dtau
            //   <= sqrt(mn) * lo * (sqrt(ln(2b/lo)) + sqrt(pi)/2)
            mn.sqrt() * lo * ((2.0 * b / lo).ln().sqrt() + std::f64::consts::PI.sqrt() / 2.0)
        };
        adaptive_simpson(&integrand, lo, b, 1e-6) + tail
    };

    Ok(term_cover + term_alpha + 12.0 * integral)
}

/// Adaptive Simpson quadrature with a relative tolerance against the coarse
/// whole-interval estimate.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let abs_tol = (rel_tol * whole.abs()).max(f64::MIN_POSITIVE);
    simpson_recurse(f, a, b, fa, fm, fb, whole, abs_tol, 60)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        return left + right + err / 15.0;
    }
    simpson_recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Per-example, per-orbit-member loss values in [0, 1]: n rows, K columns.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitLossTable {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl OrbitLossTable {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::invalid("loss table must be nonempty"));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("loss table rows have unequal lengths"));
        }
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("loss value {v} outside [0, 1]")));
        }
        Ok(OrbitLossTable {
            rows: values.len() / cols,
            cols,
            values,
        })
    }

    /// Parses a headerless numeric CSV with one row per example.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|cell| {
                    cell.trim().parse::<f64>().map_err(|_| {
                        Error::invalid(format!(
                            "{}:{}: not a number: {cell:?}",
                            path.display(),
                            lineno + 1
                        ))
                    })
                })
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        OrbitLossTable::new(rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }
}

/// Worst-case loss over each example's orbit and the mean of those maxima.
#[derive(Debug, Clone, PartialEq)]
pub struct AdversarialLoss {
    pub per_example_max: Vec<f64>,
    pub mean: f64,
}

pub fn adversarial_loss(table: &OrbitLossTable) -> AdversarialLoss {
    let per_example_max: Vec<f64> = (0..table.rows())
        .map(|i| table.row(i).iter().copied().fold(0.0f64, f64::max))
        .collect();
    let mean = per_example_max.iter().sum::<f64>() / per_example_max.len() as f64;
    AdversarialLoss {
        per_example_max,
        mean,
    }
}

/// Generalization bound under transform-set selection:
/// adv_mean + 4 * rademacher + sqrt(log k / n) + 3 sqrt(log(4 / delta) / 2n).
pub fn model_selection_bound(
    empirical_adv_mean: f64,
    rademacher_value: f64,
    k: usize,
    n: usize,
    delta: f64,
) -> Result<f64> {
    if k == 0 || n == 0 {
        return Err(Error::invalid("k and n must be >= 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must lie in (0, 1), got {delta}")));
    }
    check_nonneg("adversarial mean", empirical_adv_mean)?;
    check_nonneg("rademacher value", rademacher_value)?;
    let nf = n as f64;
    Ok(empirical_adv_mean
        + 4.0 * rademacher_value
        + ((k as f64).ln() / nf).sqrt()
        + 3.0 * ((4.0 / delta).ln() / (2.0 * nf)).sqrt())
}

/// All 2^L combinations of the base transform sets as composite specs, in
/// binary-coded subset order: bit i of the index selects base spec i, the
/// empty set is the identity, and larger subsets become direct products.
pub fn transform_powerset(base: &[TransformSpec]) -> Result<Vec<TransformSpec>> {
    let l = base.len();
    if l > 16 {
        return Err(Error::invalid(format!("powerset limited to 16 base sets, got {l}")));
    }
    for spec in base {
        spec.validate()?;
    }
    let mut out = Vec::with_capacity(1 << l);
    for mask in 0u32..(1 << l) {
        let selected: Vec<TransformSpec> = (0..l)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| base[i].clone())
            .collect();
        out.push(match selected.len() {
            0 => TransformSpec::Identity,
            1 => selected.into_iter().next().expect("one element"),
            _ => compose(&selected)?,
        });
    }
    Ok(out)
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")))
    } else {
        Ok(())
    }
}
