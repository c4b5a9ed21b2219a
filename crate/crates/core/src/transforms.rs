//! Transformation sets and finite orbit materialization.
//!
//! A [`TransformSpec`] describes a set of data transformations; for each data
//! point it induces an orbit, the set of images of the point under the set.
//! Finite kinds (identity, horizontal flip) are enumerated exactly; continuous
//! kinds (rotation, crop, cutout, color jitter) are approximated by a grid or
//! by seeded random sampling; precomputed kinds are read from an orbit
//! manifest. The untransformed point is always a member, so downstream orbit
//! distances never exceed the plain Euclidean distance.
//!
//! Random draws are keyed by (master seed, point index, factor tag, draw
//! index), so orbits are fixed before any pairwise computation and identical
//! under any parallel schedule.

use std::path::PathBuf;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{DataPoint, OrbitManifest, Sample, TensorShape};
use crate::error::{Error, Result};
use crate::rng;

pub const DEFAULT_SAMPLE_BUDGET: usize = 50;
pub const DEFAULT_PRODUCT_BUDGET: usize = 2048;

fn default_budget() -> usize {
    DEFAULT_SAMPLE_BUDGET
}

fn default_product_budget() -> usize {
    DEFAULT_PRODUCT_BUDGET
}

fn default_rotate_range() -> (f64, f64) {
    (-30.0, 30.0)
}

fn default_rotate_step() -> f64 {
    1.0
}

fn default_crop_padding() -> usize {
    4
}

fn default_cutout_fill() -> f32 {
    0.5
}

fn default_cutout_area() -> f64 {
    0.05
}

fn default_cutout_ratio() -> f64 {
    1.0
}

fn default_jitter_range() -> (f64, f64) {
    (0.75, 1.25)
}

/// Description of a transformation set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TransformSpec {
    Identity,
    FlipHorizontal,
    /// Rotations about the image center on a degree grid.
    Rotate {
        #[serde(default = "default_rotate_range")]
        degrees: (f64, f64),
        #[serde(default = "default_rotate_step")]
        step_degrees: f64,
    },
    /// Replicate-pad by `padding` on each side, then cut a random window of
    /// the original size.
    Crop {
        #[serde(default = "default_crop_padding")]
        padding: usize,
        #[serde(default = "default_budget")]
        sample_budget: usize,
    },
    /// Paint a constant rectangle at a random fully-inside position.
    Cutout {
        #[serde(default = "default_cutout_fill")]
        fill: f32,
        #[serde(default = "default_cutout_area")]
        area_fraction: f64,
        #[serde(default = "default_cutout_ratio")]
        aspect_ratio: f64,
        #[serde(default = "default_budget")]
        sample_budget: usize,
    },
    /// Brightness, contrast and saturation factors drawn independently and
    /// uniformly from the given ranges, applied in that order.
    ColorJitter {
        #[serde(default = "default_jitter_range")]
        brightness: (f64, f64),
        #[serde(default = "default_jitter_range")]
        contrast: (f64, f64),
        #[serde(default = "default_jitter_range")]
        saturation: (f64, f64),
        #[serde(default = "default_budget")]
        sample_budget: usize,
    },
    /// Orbits supplied on disk (e.g. pre-rendered 3D views), keyed by sample
    /// index in an orbit manifest.
    PrecomputedOrbit { manifest: PathBuf },
    /// Direct product: sequential application of the factors, first factor
    /// applied first, enumerated as a Cartesian product truncated to
    /// `sample_budget` members.
    Product {
        factors: Vec<TransformSpec>,
        #[serde(default = "default_product_budget")]
        sample_budget: usize,
    },
}

impl TransformSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            TransformSpec::Identity | TransformSpec::FlipHorizontal => Ok(()),
            TransformSpec::Rotate {
                degrees: (lo, hi),
                step_degrees,
            } => {
                if lo > hi {
                    return Err(Error::invalid(format!("empty rotation range [{lo},{hi}]")));
                }
                if !(*step_degrees > 0.0) {
                    return Err(Error::invalid(format!("rotation step must be > 0, got {step_degrees}")));
                }
                Ok(())
            }
            TransformSpec::Crop { sample_budget, .. } => require_budget(*sample_budget),
            TransformSpec::Cutout {
                fill,
                area_fraction,
                aspect_ratio,
                sample_budget,
            } => {
                if !(*area_fraction > 0.0 && *area_fraction <= 1.0) {
                    return Err(Error::invalid(format!("cutout area fraction {area_fraction} not in (0,1]")));
                }
                if !(*aspect_ratio > 0.0) {
                    return Err(Error::invalid(format!("cutout aspect ratio must be > 0, got {aspect_ratio}")));
                }
                if !(0.0..=1.0).contains(fill) {
                    return Err(Error::invalid(format!("cutout fill {fill} not in [0,1]")));
                }
                require_budget(*sample_budget)
            }
            TransformSpec::ColorJitter {
                brightness,
                contrast,
                saturation,
                sample_budget,
            } => {
                for (name, (lo, hi)) in [
                    ("brightness", brightness),
                    ("contrast", contrast),
                    ("saturation", saturation),
                ] {
                    if lo > hi || *lo < 0.0 {
                        return Err(Error::invalid(format!("invalid {name} range [{lo},{hi}]")));
                    }
                }
                require_budget(*sample_budget)
            }
            TransformSpec::PrecomputedOrbit { .. } => Ok(()),
            TransformSpec::Product {
                factors,
                sample_budget,
            } => {
                if factors.len() < 2 {
                    return Err(Error::invalid("product requires at least 2 factors"));
                }
                require_budget(*sample_budget)?;
                for f in factors {
                    f.validate()?;
                    if matches!(f, TransformSpec::PrecomputedOrbit { .. }) {
                        return Err(Error::invalid(
                            "precomputed orbits cannot be a product factor: they are point-indexed image sets, not functions",
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    /// Short name used in CSV output and provenance records.
    pub fn kind_name(&self) -> &'static str {
        match self {
            TransformSpec::Identity => "identity",
            TransformSpec::FlipHorizontal => "flip-horizontal",
            TransformSpec::Rotate { .. } => "rotate",
            TransformSpec::Crop { .. } => "crop",
            TransformSpec::Cutout { .. } => "cutout",
            TransformSpec::ColorJitter { .. } => "color-jitter",
            TransformSpec::PrecomputedOrbit { .. } => "precomputed-orbit",
            TransformSpec::Product { .. } => "product",
        }
    }

    /// Named presets with the standard augmentation parameters baked in.
    pub fn preset(name: &str) -> Option<TransformSpec> {
        match name {
            "base" => Some(TransformSpec::Identity),
            "flip" => Some(TransformSpec::FlipHorizontal),
            "rotate" => Some(TransformSpec::Rotate {
                degrees: default_rotate_range(),
                step_degrees: default_rotate_step(),
            }),
            "crop" => Some(TransformSpec::Crop {
                padding: default_crop_padding(),
                sample_budget: default_budget(),
            }),
            "cutout" => Some(TransformSpec::Cutout {
                fill: default_cutout_fill(),
                area_fraction: default_cutout_area(),
                aspect_ratio: default_cutout_ratio(),
                sample_budget: default_budget(),
            }),
            "colorjitter" => Some(TransformSpec::ColorJitter {
                brightness: default_jitter_range(),
                contrast: default_jitter_range(),
                saturation: default_jitter_range(),
                sample_budget: default_budget(),
            }),
            _ => None,
        }
    }
}

fn require_budget(budget: usize) -> Result<()> {
    if budget == 0 {
        Err(Error::invalid("sample_budget must be >= 1"))
    } else {
        Ok(())
    }
}

/// Finite approximation of a point's orbit. The untransformed point is
/// always `members[0]`.
#[derive(Debug, Clone)]
pub struct Orbit {
    members: Vec<DataPoint>,
    source_index: usize,
}

impl Orbit {
    pub fn new(members: Vec<DataPoint>, source_index: usize) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid("orbit must be nonempty"));
        }
        let shape = members[0].shape();
        if members.iter().any(|m| m.shape() != shape) {
            return Err(Error::invalid("orbit members disagree on shape"));
        }
        Ok(Orbit {
            members,
            source_index,
        })
    }

    pub fn members(&self) -> &[DataPoint] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn source_index(&self) -> usize {
        self.source_index
    }
}

/// One concrete transformation with fixed parameters.
#[derive(Debug, Clone, PartialEq)]
enum Transform {
    Identity,
    FlipHorizontal,
    Rotate { degrees: f64 },
    Crop { dy: usize, dx: usize, padding: usize },
    Cutout { top: usize, left: usize, rows: usize, cols: usize, fill: f32 },
    ColorJitter { brightness: f32, contrast: f32, saturation: f32 },
}

impl Transform {
    fn apply(&self, x: &DataPoint) -> DataPoint {
        match self {
            Transform::Identity => x.clone(),
            Transform::FlipHorizontal => flip_horizontal(x),
            Transform::Rotate { degrees } => rotate_bilinear(x, *degrees),
            Transform::Crop { dy, dx, padding } => crop_window(x, *dy, *dx, *padding),
            Transform::Cutout {
                top,
                left,
                rows,
                cols,
                fill,
            } => cutout(x, *top, *left, *rows, *cols, *fill),
            Transform::ColorJitter {
                brightness,
                contrast,
                saturation,
            } => color_jitter(x, *brightness, *contrast, *saturation),
        }
    }
}

fn flip_horizontal(x: &DataPoint) -> DataPoint {
    let shape = x.shape();
    let mut values = vec![0.0f32; shape.element_count()];
    for row in 0..shape.height {
        for col in 0..shape.width {
            for ch in 0..shape.channels {
                values[shape.index(row, col, ch)] = x.get(row, shape.width - 1 - col, ch);
            }
        }
    }
    DataPoint::new(values, shape).expect("flip preserves shape")
}

/// Inverse-mapped bilinear rotation about the image center; reads outside the
/// frame fill with 0.
fn rotate_bilinear(x: &DataPoint, degrees: f64) -> DataPoint {
    if degrees == 0.0 {
        return x.clone();
    }
    let shape = x.shape();
    let (h, w, c) = (shape.height, shape.width, shape.channels);
    let theta = degrees.to_radians();
    let (sin, cos) = theta.sin_cos();
    let cy = (h as f64 - 1.0) / 2.0;
    let cx = (w as f64 - 1.0) / 2.0;
    let mut values = vec![0.0f32; shape.element_count()];
    for row in 0..h {
        let dy = row as f64 - cy;
        for col in 0..w {
            let dx = col as f64 - cx;
            // rotate the destination offset back into the source frame
            let sx = cx + cos * dx + sin * dy;
            let sy = cy - sin * dx + cos * dy;
            let x0 = sx.floor();
            let y0 = sy.floor();
            let fx = sx - x0;
            let fy = sy - y0;
            let read = |r: f64, cc: f64, ch: usize| -> f64 {
                if r < 0.0 || cc < 0.0 || r > (h - 1) as f64 || cc > (w - 1) as f64 {
                    0.0
                } else {
                    f64::from(x.get(r as usize, cc as usize, ch))
                }
            };
            for ch in 0..c {
                let v00 = read(y0, x0, ch);
                let v01 = read(y0, x0 + 1.0, ch);
                let v10 = read(y0 + 1.0, x0, ch);
                let v11 = read(y0 + 1.0, x0 + 1.0, ch);
                let top = v00 * (1.0 - fx) + v01 * fx;
                let bottom = v10 * (1.0 - fx) + v11 * fx;
                values[shape.index(row, col, ch)] = (top * (1.0 - fy) + bottom * fy) as f32;
            }
        }
    }
    DataPoint::new(values, shape).expect("rotation preserves shape")
}

/// Window of the original size at offset (dy, dx) into the replicate-padded
/// image; (padding, padding) reproduces the input exactly.
fn crop_window(x: &DataPoint, dy: usize, dx: usize, padding: usize) -> DataPoint {
    let shape = x.shape();
    let (h, w) = (shape.height, shape.width);
    let mut values = vec![0.0f32; shape.element_count()];
    for row in 0..h {
        let src_row = (row + dy).saturating_sub(padding).min(h - 1);
        for col in 0..w {
            let src_col = (col + dx).saturating_sub(padding).min(w - 1);
            for ch in 0..shape.channels {
                values[shape.index(row, col, ch)] = x.get(src_row, src_col, ch);
            }
        }
    }
    DataPoint::new(values, shape).expect("crop preserves shape")
}

fn cutout(x: &DataPoint, top: usize, left: usize, rows: usize, cols: usize, fill: f32) -> DataPoint {
    let shape = x.shape();
    let mut values = x.values().to_vec();
    for row in top..(top + rows).min(shape.height) {
        for col in left..(left + cols).min(shape.width) {
            for ch in 0..shape.channels {
                values[shape.index(row, col, ch)] = fill;
            }
        }
    }
    DataPoint::new(values, shape).expect("cutout preserves shape")
}

const LUMA_WEIGHTS: [f32; 3] = [0.299, 0.587, 0.114];

fn luminance(values: &[f32], shape: TensorShape, pixel: usize) -> f32 {
    let c = shape.channels;
    if c == 3 {
        (0..3).map(|ch| values[pixel * 3 + ch] * LUMA_WEIGHTS[ch]).sum()
    } else {
        values[pixel * c..(pixel + 1) * c].iter().sum::<f32>() / c as f32
    }
}

/// Brightness, then contrast about the mean luminance, then saturation toward
/// the per-pixel luminance. Each step clamps back into [0, 1].
fn color_jitter(x: &DataPoint, brightness: f32, contrast: f32, saturation: f32) -> DataPoint {
    let shape = x.shape();
    let pixels = shape.height * shape.width;
    let mut values: Vec<f32> = x.values().iter().map(|v| (v * brightness).clamp(0.0, 1.0)).collect();

    let mean: f32 = (0..pixels).map(|p| luminance(&values, shape, p)).sum::<f32>() / pixels as f32;
    for v in values.iter_mut() {
        *v = (mean + contrast * (*v - mean)).clamp(0.0, 1.0);
    }

    for p in 0..pixels {
        let gray = luminance(&values, shape, p);
        for ch in 0..shape.channels {
            let v = &mut values[p * shape.channels + ch];
            *v = (gray + saturation * (*v - gray)).clamp(0.0, 1.0);
        }
    }
    DataPoint::new(values, shape).expect("jitter preserves shape")
}

/// Concrete transformations sampled for one function-backed spec. The
/// identity is always element 0; `stream_tag` separates the random streams of
/// product factors.
fn sampled_transforms(
    spec: &TransformSpec,
    shape: TensorShape,
    seed: u64,
    point_index: u64,
    stream_tag: u64,
) -> Result<Vec<Transform>> {
    let draw = |i: usize| rng::stream(&[seed, point_index, stream_tag, i as u64]);
    match spec {
        TransformSpec::Identity => Ok(vec![Transform::Identity]),
        TransformSpec::FlipHorizontal => Ok(vec![Transform::Identity, Transform::FlipHorizontal]),
        TransformSpec::Rotate {
            degrees: (lo, hi),
            step_degrees,
        } => {
            let steps = ((hi - lo) / step_degrees + 1e-9).floor() as usize;
            let mut out = vec![Transform::Identity];
            for i in 0..=steps {
                let angle = lo + i as f64 * step_degrees;
                if angle != 0.0 {
                    out.push(Transform::Rotate { degrees: angle });
                }
            }
            Ok(out)
        }
        TransformSpec::Crop {
            padding,
            sample_budget,
        } => {
            let mut out = vec![Transform::Identity];
            for i in 0..*sample_budget {
                let mut r = draw(i + 1);
                out.push(Transform::Crop {
                    dy: r.random_range(0..=2 * padding),
                    dx: r.random_range(0..=2 * padding),
                    padding: *padding,
                });
            }
            Ok(out)
        }
        TransformSpec::Cutout {
            fill,
            area_fraction,
            aspect_ratio,
            sample_budget,
        } => {
            let area = area_fraction * (shape.height * shape.width) as f64;
            let rows = ((area / aspect_ratio).sqrt().floor() as usize).clamp(1, shape.height);
            let cols = (((area / aspect_ratio).sqrt() * aspect_ratio).floor() as usize)
                .clamp(1, shape.width);
            let mut out = vec![Transform::Identity];
            for i in 0..*sample_budget {
                let mut r = draw(i + 1);
                out.push(Transform::Cutout {
                    top: r.random_range(0..=shape.height - rows),
                    left: r.random_range(0..=shape.width - cols),
                    rows,
                    cols,
                    fill: *fill,
                });
            }
            Ok(out)
        }
        TransformSpec::ColorJitter {
            brightness,
            contrast,
            saturation,
            sample_budget,
        } => {
            let uniform = |r: &mut rand_chacha::ChaCha8Rng, (lo, hi): (f64, f64)| {
                (lo + (hi - lo) * r.random::<f64>()) as f32
            };
            let mut out = vec![Transform::Identity];
            for i in 0..*sample_budget {
                let mut r = draw(i + 1);
                out.push(Transform::ColorJitter {
                    brightness: uniform(&mut r, *brightness),
                    contrast: uniform(&mut r, *contrast),
                    saturation: uniform(&mut r, *saturation),
                });
            }
            Ok(out)
        }
        TransformSpec::PrecomputedOrbit { .. } | TransformSpec::Product { .. } => Err(
            Error::invalid("spec kind is not backed by parameterized transforms"),
        ),
    }
}

/// Collects the atomic factors of a (possibly nested) product, first-applied
/// first.
fn flatten_factors<'a>(spec: &'a TransformSpec, out: &mut Vec<&'a TransformSpec>) {
    match spec {
        TransformSpec::Product { factors, .. } => {
            for f in factors {
                flatten_factors(f, out);
            }
        }
        other => out.push(other),
    }
}

/// Materializes the finite orbit of `x` under `spec`.
///
/// Member counts: 1 for identity, 2 for flip, one per grid angle for rotation
/// (the 0-degree member is the untransformed point), `sample_budget + 1` for
/// the sampled kinds, and the listed images for precomputed orbits. The
/// untransformed point is always included. Bit-exactly reproducible for a
/// fixed `(seed, point_index)`.
pub fn materialize_orbit(
    x: &DataPoint,
    spec: &TransformSpec,
    seed: u64,
    point_index: usize,
) -> Result<Orbit> {
    spec.validate()?;
    match spec {
        TransformSpec::PrecomputedOrbit { manifest } => {
            let manifest = OrbitManifest::load(manifest)?;
            precomputed_orbit(x, &manifest, point_index)
        }
        TransformSpec::Product { sample_budget, .. } => {
            product_orbit(x, spec, seed, point_index, *sample_budget)
        }
        _ => {
            let transforms = sampled_transforms(spec, x.shape(), seed, point_index as u64, 0)?;
            let members = transforms.iter().map(|t| t.apply(x)).collect();
            Orbit::new(members, point_index)
        }
    }
}

fn precomputed_orbit(x: &DataPoint, manifest: &OrbitManifest, point_index: usize) -> Result<Orbit> {
    let listed = manifest.orbit_points(point_index, x.shape())?;
    let mut members = vec![x.clone()];
    members.extend(listed.into_iter().filter(|p| p.values() != x.values()));
    Orbit::new(members, point_index)
}

fn product_orbit(
    x: &DataPoint,
    spec: &TransformSpec,
    seed: u64,
    point_index: usize,
    budget: usize,
) -> Result<Orbit> {
    let mut factors = Vec::new();
    flatten_factors(spec, &mut factors);
    let lists: Vec<Vec<Transform>> = factors
        .iter()
        .enumerate()
        .map(|(tag, f)| sampled_transforms(f, x.shape(), seed, point_index as u64, tag as u64))
        .collect::<Result<_>>()?;

    let total: usize = lists.iter().map(Vec::len).try_fold(1usize, |acc, len| {
        acc.checked_mul(len)
    }).unwrap_or(usize::MAX);
    let count = total.min(budget).max(1);

    // mixed-radix enumeration, last factor fastest; index 0 is all-identity
    let mut members = Vec::with_capacity(count);
    let mut digits = vec![0usize; lists.len()];
    for _ in 0..count {
        let mut point = x.clone();
        for (factor, &digit) in lists.iter().zip(&digits) {
            // digit 0 is the identity
            if digit != 0 {
                point = factor[digit].apply(&point);
            }
        }
        members.push(point);
        for pos in (0..digits.len()).rev() {
            digits[pos] += 1;
            if digits[pos] < lists[pos].len() {
                break;
            }
            digits[pos] = 0;
        }
    }
    Orbit::new(members, point_index)
}

/// Materializes orbits for every point of a sample, in parallel.
///
/// `indices`, when given, supplies each point's index for seeding and for
/// precomputed-orbit lookup (used when the sample is a subset of a larger
/// dataset); otherwise positions 0..n are used.
pub fn materialize_orbits(
    sample: &Sample,
    spec: &TransformSpec,
    seed: u64,
    indices: Option<&[usize]>,
) -> Result<Vec<Orbit>> {
    spec.validate()?;
    if let Some(indices) = indices {
        if indices.len() != sample.len() {
            return Err(Error::invalid(format!(
                "{} indices for {} points",
                indices.len(),
                sample.len()
            )));
        }
    }
    let index_of = |i: usize| indices.map_or(i, |ix| ix[i]);

    // load a shared manifest once for precomputed orbits
    let manifest = match spec {
        TransformSpec::PrecomputedOrbit { manifest } => Some(OrbitManifest::load(manifest)?),
        _ => None,
    };

    (0..sample.len())
        .into_par_iter()
        .map(|i| match &manifest {
            Some(m) => precomputed_orbit(sample.point(i), m, index_of(i)),
            None => materialize_orbit(sample.point(i), spec, seed, index_of(i)),
        })
        .collect()
}

/// Builds the direct product of the given specs: the set of sequential
/// applications of one transformation from each factor, first spec applied
/// first.
pub fn compose(specs: &[TransformSpec]) -> Result<TransformSpec> {
    if specs.len() < 2 {
        return Err(Error::invalid("compose requires at least 2 specs"));
    }
    let spec = TransformSpec::Product {
        factors: specs.to_vec(),
        sample_budget: DEFAULT_PRODUCT_BUDGET,
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::TensorShape;

    fn point(values: Vec<f32>, h: usize, w: usize, c: usize) -> DataPoint {
        DataPoint::new(values, TensorShape::new(h, w, c).unwrap()).unwrap()
    }

    fn test_image() -> DataPoint {
        let shape = TensorShape::new(8, 8, 3).unwrap();
        let values = (0..shape.element_count())
            .map(|i| (i as f32 * 37.0 % 97.0) / 97.0)
            .collect();
        DataPoint::new(values, shape).unwrap()
    }

    #[test]
    fn identity_orbit_is_singleton() {
        let x = test_image();
        let orbit = materialize_orbit(&x, &TransformSpec::Identity, 7, 0).unwrap();
        assert_eq!(orbit.len(), 1);
        assert_eq!(orbit.members()[0], x);
    }

    #[test]
    fn flip_reverses_two_pixel_row() {
        let x = point(vec![0.2, 0.8], 1, 2, 1);
        let orbit = materialize_orbit(&x, &TransformSpec::FlipHorizontal, 7, 0).unwrap();
        assert_eq!(orbit.len(), 2);
        assert_eq!(orbit.members()[0].values(), &[0.2, 0.8]);
        assert_eq!(orbit.members()[1].values(), &[0.8, 0.2]);
    }

    #[test]
    fn flip_twice_is_identity() {
        let x = test_image();
        let once = flip_horizontal(&x);
        let twice = flip_horizontal(&once);
        assert_eq!(twice.values(), x.values());
    }

    #[test]
    fn rotate_grid_has_61_members_and_contains_x() {
        let x = test_image();
        let spec = TransformSpec::preset("rotate").unwrap();
        let orbit = materialize_orbit(&x, &spec, 7, 3).unwrap();
        assert_eq!(orbit.len(), 61);
        assert_eq!(orbit.members()[0], x);
    }

    #[test]
    fn rotation_by_quarter_turn_permutes_square() {
        // 2x2 single-channel image: 90-degree rotation maps corners exactly
        // (centers of rotation and pixel grid coincide, so bilinear weights
        // are 0/1).
        let x = point(vec![1.0, 2.0, 3.0, 4.0], 2, 2, 1);
        let rotated = rotate_bilinear(&x, 90.0);
        // quarter turn: 1 moves to the top-right corner
        assert_eq!(rotated.values(), &[3.0, 1.0, 4.0, 2.0]);
    }

    #[test]
    fn crop_orbit_is_budget_plus_identity_and_deterministic() {
        let x = test_image();
        let spec = TransformSpec::Crop {
            padding: 2,
            sample_budget: 50,
        };
        let a = materialize_orbit(&x, &spec, 11, 5).unwrap();
        let b = materialize_orbit(&x, &spec, 11, 5).unwrap();
        assert_eq!(a.len(), 51);
        for (u, v) in a.members().iter().zip(b.members()) {
            assert_eq!(u.values(), v.values());
        }
        // a different point index draws different windows
        let c = materialize_orbit(&x, &spec, 11, 6).unwrap();
        assert!(a.members()[1..].iter().zip(&c.members()[1..]).any(|(u, v)| u != v));
    }

    #[test]
    fn crop_center_window_reproduces_input() {
        let x = test_image();
        let out = crop_window(&x, 2, 2, 2);
        assert_eq!(out.values(), x.values());
    }

    #[test]
    fn crop_replicates_edges() {
        let x = point(vec![1.0, 2.0, 3.0, 4.0], 2, 2, 1);
        // window shifted one row up: the missing row is the replicated top edge
        let out = crop_window(&x, 0, 1, 1);
        assert_eq!(out.values(), &[1.0, 2.0, 1.0, 2.0]);
    }

    #[test]
    fn cutout_paints_expected_square() {
        let shape = TensorShape::new(10, 10, 1).unwrap();
        let x = DataPoint::new(vec![1.0; 100], shape).unwrap();
        // area 0.05 * 100 = 5, side floor(sqrt(5)) = 2
        let spec = TransformSpec::Cutout {
            fill: 0.5,
            area_fraction: 0.05,
            aspect_ratio: 1.0,
            sample_budget: 20,
        };
        let orbit = materialize_orbit(&x, &spec, 3, 0).unwrap();
        assert_eq!(orbit.len(), 21);
        for m in &orbit.members()[1..] {
            let painted = m.values().iter().filter(|&&v| v == 0.5).count();
            assert_eq!(painted, 4);
        }
    }

    #[test]
    fn jitter_members_stay_in_unit_range() {
        let x = test_image();
        let spec = TransformSpec::preset("colorjitter").unwrap();
        let orbit = materialize_orbit(&x, &spec, 9, 2).unwrap();
        assert_eq!(orbit.len(), 51);
        for m in orbit.members() {
            assert!(m.values().iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn jitter_identity_factors_are_noop() {
        let x = test_image();
        let out = color_jitter(&x, 1.0, 1.0, 1.0);
        for (a, b) in out.values().iter().zip(x.values()) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn compose_identity_identity_is_singleton_value() {
        let x = test_image();
        let spec = compose(&[TransformSpec::Identity, TransformSpec::Identity]).unwrap();
        let orbit = materialize_orbit(&x, &spec, 7, 0).unwrap();
        assert_eq!(orbit.len(), 1);
        assert_eq!(orbit.members()[0], x);
    }

    #[test]
    fn compose_flip_flip_contains_x_with_two_distinct_values() {
        let x = test_image();
        let spec = compose(&[TransformSpec::FlipHorizontal, TransformSpec::FlipHorizontal]).unwrap();
        let orbit = materialize_orbit(&x, &spec, 7, 0).unwrap();
        assert!(orbit.len() <= 4);
        assert_eq!(orbit.members()[0], x);
        let mut distinct: Vec<&[f32]> = orbit.members().iter().map(|m| m.values()).collect();
        distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
        distinct.dedup();
        assert_eq!(distinct.len(), 2);
    }

    #[test]
    fn compose_flip_rotate_enumerates_product_grid() {
        let x = test_image();
        let spec = compose(&[
            TransformSpec::FlipHorizontal,
            TransformSpec::preset("rotate").unwrap(),
        ])
        .unwrap();
        let orbit = materialize_orbit(&x, &spec, 7, 0).unwrap();
        assert_eq!(orbit.len(), 2 * 61);
        assert_eq!(orbit.members()[0], x);
    }

    #[test]
    fn product_budget_truncates() {
        let x = test_image();
        let spec = TransformSpec::Product {
            factors: vec![
                TransformSpec::preset("crop").unwrap(),
                TransformSpec::preset("crop").unwrap(),
            ],
            sample_budget: 100,
        };
        let orbit = materialize_orbit(&x, &spec, 7, 0).unwrap();
        assert_eq!(orbit.len(), 100);
        assert_eq!(orbit.members()[0], x);
    }

    #[test]
    fn compose_rejects_single_spec_and_precomputed_factors() {
        assert!(compose(&[TransformSpec::Identity]).is_err());
        assert!(compose(&[
            TransformSpec::Identity,
            TransformSpec::PrecomputedOrbit {
                manifest: "orbits.json".into()
            },
        ])
        .is_err());
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = TransformSpec::Product {
            factors: vec![
                TransformSpec::FlipHorizontal,
                TransformSpec::Rotate {
                    degrees: (-30.0, 30.0),
                    step_degrees: 1.0,
                },
            ],
            sample_budget: 64,
        };
        let json = serde_json::to_string(&spec).unwrap();
        let back: TransformSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn spec_json_defaults_fill_in() {
        let spec: TransformSpec = serde_json::from_str(r#"{"kind": "crop"}"#).unwrap();
        assert_eq!(
            spec,
            TransformSpec::Crop {
                padding: 4,
                sample_budget: 50
            }
        );
        let spec: TransformSpec = serde_json::from_str(r#"{"kind": "rotate"}"#).unwrap();
        assert_eq!(
            spec,
            TransformSpec::Rotate {
                degrees: (-30.0, 30.0),
                step_degrees: 1.0
            }
        );
    }
}
