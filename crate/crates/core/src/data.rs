//! Data model: samples of fixed-shape tensors with class labels, pairwise
//! distance matrices, and the on-disk formats they travel in (raw tensor
//! records, CIFAR-10 binary batches, orbit manifests, distance matrix files).
//!
//! Pixels are stored as `f32` in `[0, 1]`; all distance accumulation happens
//! in `f64`.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Height x width x channels of a data point, channel-last row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorShape {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl TensorShape {
    pub fn new(height: usize, width: usize, channels: usize) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::invalid(format!(
                "tensor dimensions must be >= 1, got {height}x{width}x{channels}"
            )));
        }
        Ok(TensorShape {
            height,
            width,
            channels,
        })
    }

    pub fn element_count(&self) -> usize {
        self.height * self.width * self.channels
    }

    /// Flat index of `(row, col, channel)` in channel-last row-major order.
    #[inline]
    pub fn index(&self, row: usize, col: usize, channel: usize) -> usize {
        (row * self.width + col) * self.channels + channel
    }
}

/// One example: a flat tensor of normalized intensities plus its shape.
#[derive(Debug, Clone, PartialEq)]
pub struct DataPoint {
    values: Vec<f32>,
    shape: TensorShape,
}

impl DataPoint {
    pub fn new(values: Vec<f32>, shape: TensorShape) -> Result<Self> {
        if values.len() != shape.element_count() {
            return Err(Error::invalid(format!(
                "value count {} does not match shape {}x{}x{}",
                values.len(),
                shape.height,
                shape.width,
                shape.channels
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("data point value {v}"),
            });
        }
        Ok(DataPoint { values, shape })
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn shape(&self) -> TensorShape {
        self.shape
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, channel: usize) -> f32 {
        self.values[self.shape.index(row, col, channel)]
    }

    /// Euclidean distance to another point, accumulated in f64.
    pub fn euclidean_distance(&self, other: &DataPoint) -> f64 {
        debug_assert_eq!(self.shape, other.shape);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                let d = f64::from(*a) - f64::from(*b);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// An ordered collection of same-shape points with class labels.
#[derive(Debug, Clone)]
pub struct Sample {
    points: Vec<DataPoint>,
    labels: Vec<u32>,
}

impl Sample {
    pub fn new(points: Vec<DataPoint>, labels: Vec<u32>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("sample must be nonempty"));
        }
        if points.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} labels for {} points",
                labels.len(),
                points.len()
            )));
        }
        let shape = points[0].shape();
        if let Some((i, p)) = points.iter().enumerate().find(|(_, p)| p.shape() != shape) {
            return Err(Error::invalid(format!(
                "point {i} has shape {:?}, expected {:?}",
                p.shape(),
                shape
            )));
        }
        Ok(Sample { points, labels })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn shape(&self) -> TensorShape {
        self.points[0].shape()
    }

    pub fn point(&self, i: usize) -> &DataPoint {
        &self.points[i]
    }

    pub fn points(&self) -> &[DataPoint] {
        &self.points
    }

    pub fn label(&self, i: usize) -> u32 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// New sample holding the given indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Sample> {
        if let Some(&i) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::invalid(format!(
                "subset index {i} out of range for sample of size {}",
                self.len()
            )));
        }
        Sample::new(
            indices.iter().map(|&i| self.points[i].clone()).collect(),
            indices.iter().map(|&i| self.labels[i]).collect(),
        )
    }
}

/// Symmetric nonnegative matrix with zero diagonal, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl DistanceMatrix {
    /// Validates symmetry, zero diagonal, nonnegativity and finiteness.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("distance matrix must have n >= 1"));
        }
        if entries.len() != n * n {
            return Err(Error::invalid(format!(
                "distance matrix expects {} entries, got {}",
                n * n,
                entries.len()
            )));
        }
        let m = DistanceMatrix { n, entries };
        m.validate()?;
        Ok(m)
    }

    pub fn zeros(n: usize) -> Self {
        DistanceMatrix {
            n,
            entries: vec![0.0; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`, keeping the matrix symmetric.
    #[inline]
    pub fn set_pair(&mut self, i: usize, j: usize, value: f64) {
        self.entries[i * self.n + j] = value;
        self.entries[j * self.n + i] = value;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.iter().copied().fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        for i in 0..self.n {
            let d = self.get(i, i);
            if d != 0.0 {
                return Err(Error::invalid(format!("nonzero diagonal at ({i},{i}): {d}")));
            }
            for j in (i + 1)..self.n {
                let a = self.get(i, j);
                let b = self.get(j, i);
                if a != b {
                    return Err(Error::NotSymmetric { i, j, a, b });
                }
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::invalid(format!(
                        "invalid distance at ({i},{j}): {a}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Writes the binary format: 8-byte little-endian n, then n^2
    /// little-endian f64 entries row-major. Round-trips bit-exactly.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        self.validate()?;
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(&(self.n as u64).to_le_bytes())
            .map_err(|e| Error::io(path, e))?;
        for v in &self.entries {
            w.write_all(&v.to_le_bytes()).map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        if bytes.len() < 8 {
            return Err(Error::Truncated {
                path: path.to_path_buf(),
                expected: 8,
                actual: bytes.len() as u64,
            });
        }
        let n = u64::from_le_bytes(bytes[0..8].try_into().unwrap()) as usize;
        let expected = 8 + n * n * 8;
        if bytes.len() != expected {
            return Err(Error::Truncated {
                path: path.to_path_buf(),
                expected: expected as u64,
                actual: bytes.len() as u64,
            });
        }
        let entries = bytes[8..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        DistanceMatrix::new(n, entries)
    }
}

/// Element type of a raw tensor records file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    U8,
    F32,
}

#[derive(Debug, Deserialize)]
struct ManifestFile {
    shape: [usize; 3],
    dtype: Dtype,
    records: PathBuf,
    labels: PathBuf,
}

/// Loads a dataset from a JSON manifest:
/// `{ "shape": [H,W,C], "dtype": "u8"|"f32", "records": <path>, "labels": <path> }`.
///
/// The records file holds contiguous channel-last row-major tensors; the
/// labels file holds one little-endian u16 per record. Relative paths are
/// resolved against the manifest's directory. 8-bit sources are scaled to
/// `[0, 1]` by dividing by 255.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Sample> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let manifest: ManifestFile = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    let shape = TensorShape::new(manifest.shape[0], manifest.shape[1], manifest.shape[2])?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let records_path = base.join(&manifest.records);
    let labels_path = base.join(&manifest.labels);

    let record_bytes = fs::read(&records_path).map_err(|e| Error::io(&records_path, e))?;
    let elem = shape.element_count();
    let elem_bytes = match manifest.dtype {
        Dtype::U8 => elem,
        Dtype::F32 => elem * 4,
    };
    if elem_bytes == 0 || record_bytes.len() % elem_bytes != 0 {
        return Err(Error::ShapeMismatch {
            path: records_path,
            record: record_bytes.len() / elem_bytes.max(1),
            expected: elem_bytes,
            actual: record_bytes.len() % elem_bytes.max(1),
        });
    }
    let n_records = record_bytes.len() / elem_bytes;

    let label_bytes = fs::read(&labels_path).map_err(|e| Error::io(&labels_path, e))?;
    if label_bytes.len() != n_records * 2 {
        return Err(Error::LabelCountMismatch {
            path: labels_path,
            labels: label_bytes.len() / 2,
            records: n_records,
        });
    }

    let mut points = Vec::with_capacity(n_records);
    for r in 0..n_records {
        let chunk = &record_bytes[r * elem_bytes..(r + 1) * elem_bytes];
        let values = decode_values(chunk, manifest.dtype);
        points.push(DataPoint::new(values, shape).map_err(|_| Error::ShapeMismatch {
            path: records_path.clone(),
            record: r,
            expected: elem,
            actual: chunk.len(),
        })?);
    }
    let labels = label_bytes
        .chunks_exact(2)
        .map(|c| u32::from(u16::from_le_bytes([c[0], c[1]])))
        .collect();
    Sample::new(points, labels)
}

fn decode_values(bytes: &[u8], dtype: Dtype) -> Vec<f32> {
    match dtype {
        Dtype::U8 => bytes.iter().map(|&b| f32::from(b) / 255.0).collect(),
        Dtype::F32 => bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    }
}

pub const CIFAR_SHAPE: TensorShape = TensorShape {
    height: 32,
    width: 32,
    channels: 3,
};

const CIFAR_RECORD_BYTES: usize = 1 + 3 * 1024;

/// Loads a CIFAR-10 binary batch: 3073-byte records of 1 label byte followed
/// by 1024 red, 1024 green, 1024 blue bytes (row-major within each channel).
/// Intensities are scaled to `[0, 1]`; output tensors are channel-last.
pub fn load_cifar10_batch(path: impl AsRef<Path>) -> Result<Sample> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.is_empty() || bytes.len() % CIFAR_RECORD_BYTES != 0 {
        return Err(Error::Truncated {
            path: path.to_path_buf(),
            expected: ((bytes.len() / CIFAR_RECORD_BYTES + 1) * CIFAR_RECORD_BYTES) as u64,
            actual: bytes.len() as u64,
        });
    }
    let n = bytes.len() / CIFAR_RECORD_BYTES;
    let mut points = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for r in 0..n {
        let record = &bytes[r * CIFAR_RECORD_BYTES..(r + 1) * CIFAR_RECORD_BYTES];
        labels.push(u32::from(record[0]));
        let pixels = &record[1..];
        let mut values = vec![0.0f32; CIFAR_SHAPE.element_count()];
        for c in 0..3 {
            for row in 0..32 {
                for col in 0..32 {
                    values[CIFAR_SHAPE.index(row, col, c)] =
                        f32::from(pixels[c * 1024 + row * 32 + col]) / 255.0;
                }
            }
        }
        points.push(DataPoint::new(values, CIFAR_SHAPE)?);
    }
    Sample::new(points, labels)
}

/// Loads and concatenates several CIFAR-10 batches in the given order.
pub fn load_cifar10_batches<P: AsRef<Path>>(paths: &[P]) -> Result<Sample> {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    for p in paths {
        let batch = load_cifar10_batch(p)?;
        labels.extend_from_slice(batch.labels());
        points.extend(batch.points().iter().cloned());
    }
    Sample::new(points, labels)
}

/// Precomputed orbits on disk: a JSON object mapping each sample index to a
/// list of tensor file paths, each file holding one tensor of the sample's
/// shape. File element type is inferred from size: `count` bytes means u8,
/// `4 * count` means little-endian f32.
#[derive(Debug, Clone)]
pub struct OrbitManifest {
    base_dir: PathBuf,
    orbits: BTreeMap<usize, Vec<PathBuf>>,
}

impl OrbitManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: BTreeMap<String, Vec<PathBuf>> =
            serde_json::from_str(&text).map_err(|e| Error::Json {
                path: path.to_path_buf(),
                source: e,
            })?;
        let mut orbits = BTreeMap::new();
        for (k, v) in raw {
            let idx: usize = k.parse().map_err(|_| {
                Error::invalid(format!("orbit manifest key {k:?} is not a sample index"))
            })?;
            if v.is_empty() {
                return Err(Error::invalid(format!(
                    "orbit manifest entry {idx} lists no files"
                )));
            }
            orbits.insert(idx, v);
        }
        Ok(OrbitManifest {
            base_dir: path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf(),
            orbits,
        })
    }

    pub fn len(&self) -> usize {
        self.orbits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbits.is_empty()
    }

    /// Reads the orbit members listed for `index`.
    pub fn orbit_points(&self, index: usize, shape: TensorShape) -> Result<Vec<DataPoint>> {
        let paths = self.orbits.get(&index).ok_or_else(|| {
            Error::invalid(format!("orbit manifest has no entry for sample index {index}"))
        })?;
        let count = shape.element_count();
        let mut points = Vec::with_capacity(paths.len());
        for rel in paths {
            let path = self.base_dir.join(rel);
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let values = if bytes.len() == count {
                decode_values(&bytes, Dtype::U8)
            } else if bytes.len() == count * 4 {
                decode_values(&bytes, Dtype::F32)
            } else {
                return Err(Error::ShapeMismatch {
                    path,
                    record: index,
                    expected: count,
                    actual: bytes.len(),
                });
            };
            points.push(DataPoint::new(values, shape)?);
        }
        Ok(points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn write(path: &Path, bytes: &[u8]) {
        fs::write(path, bytes).unwrap();
    }

    #[test]
    fn manifest_scales_u8_records() {
        let dir = tempdir().unwrap();
        write(&dir.path().join("records.bin"), &[0, 255, 128, 64, 255, 0, 32, 16]);
        // two records, labels 3 and 7
        write(&dir.path().join("labels.bin"), &[3, 0, 7, 0]);
        let manifest = dir.path().join("data.json");
        write(
            &manifest,
            br#"{"shape": [2, 2, 1], "dtype": "u8", "records": "records.bin", "labels": "labels.bin"}"#,
        );
        let sample = load_manifest(&manifest).unwrap();
        assert_eq!(sample.len(), 2);
        assert_eq!(sample.labels(), &[3, 7]);
        assert_eq!(sample.point(0).values()[0], 0.0);
        assert_eq!(sample.point(0).values()[1], 1.0);
        assert_eq!(sample.point(0).values()[2], 128.0 / 255.0);
    }

    #[test]
    fn manifest_label_count_mismatch() {
        let dir = tempdir().unwrap();
        write(&dir.path().join("records.bin"), &[0; 8]);
        write(&dir.path().join("labels.bin"), &[0, 0]); // 1 label, 2 records
        let manifest = dir.path().join("data.json");
        write(
            &manifest,
            br#"{"shape": [2, 2, 1], "dtype": "u8", "records": "records.bin", "labels": "labels.bin"}"#,
        );
        let err = load_manifest(&manifest).unwrap_err();
        assert!(matches!(err, Error::LabelCountMismatch { labels: 1, records: 2, .. }));
    }

    #[test]
    fn manifest_missing_records_file() {
        let dir = tempdir().unwrap();
        let manifest = dir.path().join("data.json");
        write(
            &manifest,
            br#"{"shape": [2, 2, 1], "dtype": "u8", "records": "nope.bin", "labels": "labels.bin"}"#,
        );
        assert!(matches!(load_manifest(&manifest).unwrap_err(), Error::Io { .. }));
    }

    #[test]
    fn manifest_f32_records_pass_through() {
        let dir = tempdir().unwrap();
        let values: Vec<f32> = vec![0.25, 0.5, 0.75, 1.0];
        let mut bytes = Vec::new();
        for v in &values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        write(&dir.path().join("records.bin"), &bytes);
        write(&dir.path().join("labels.bin"), &[0, 0]);
        let manifest = dir.path().join("data.json");
        write(
            &manifest,
            br#"{"shape": [2, 2, 1], "dtype": "f32", "records": "records.bin", "labels": "labels.bin"}"#,
        );
        let sample = load_manifest(&manifest).unwrap();
        assert_eq!(sample.point(0).values(), values.as_slice());
    }

    // Independent byte-level check of the documented 3073-byte record layout:
    // the expected tensor is assembled here by direct index arithmetic.
    #[test]
    fn cifar_record_layout() {
        let dir = tempdir().unwrap();
        let mut record = vec![0u8; 3073];
        record[0] = 9; // label
        for i in 0..3072 {
            record[1 + i] = (i % 251) as u8;
        }
        let path = dir.path().join("batch.bin");
        write(&path, &record);
        let sample = load_cifar10_batch(&path).unwrap();
        assert_eq!(sample.len(), 1);
        assert_eq!(sample.label(0), 9);
        let point = sample.point(0);
        assert_eq!(point.shape(), CIFAR_SHAPE);
        for row in [0usize, 13, 31] {
            for col in [0usize, 7, 31] {
                for c in [0usize, 1, 2] {
                    let byte = record[1 + c * 1024 + row * 32 + col];
                    assert_eq!(point.get(row, col, c), f32::from(byte) / 255.0);
                }
            }
        }
    }

    #[test]
    fn cifar_rejects_truncated_batch() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("batch.bin");
        write(&path, &vec![0u8; 3072]);
        assert!(matches!(
            load_cifar10_batch(&path).unwrap_err(),
            Error::Truncated { .. }
        ));
    }

    #[test]
    fn distance_matrix_roundtrip_is_exact() {
        let dir = tempdir().unwrap();
        let mut m = DistanceMatrix::zeros(3);
        m.set_pair(0, 1, 1.25);
        m.set_pair(0, 2, std::f64::consts::PI);
        m.set_pair(1, 2, 1e-300);
        let path = dir.path().join("d.bin");
        m.save(&path).unwrap();
        let loaded = DistanceMatrix::load(&path).unwrap();
        assert_eq!(m, loaded);
    }

    #[test]
    fn distance_matrix_load_rejects_bad_length() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("d.bin");
        let mut bytes = 4u64.to_le_bytes().to_vec();
        bytes.extend(std::iter::repeat(0u8).take(15 * 8)); // 15 values, need 16
        write(&path, &bytes);
        assert!(matches!(
            DistanceMatrix::load(&path).unwrap_err(),
            Error::Truncated { .. }
        ));
    }

    #[test]
    fn distance_matrix_save_rejects_asymmetry() {
        let dir = tempdir().unwrap();
        let mut m = DistanceMatrix::zeros(2);
        m.entries[1] = 1.0; // (0,1) only
        assert!(matches!(
            m.save(dir.path().join("d.bin")).unwrap_err(),
            Error::NotSymmetric { .. }
        ));
    }

    #[test]
    fn degenerate_one_by_one_matrix() {
        let dir = tempdir().unwrap();
        let m = DistanceMatrix::new(1, vec![0.0]).unwrap();
        let path = dir.path().join("d.bin");
        m.save(&path).unwrap();
        assert_eq!(DistanceMatrix::load(&path).unwrap().n(), 1);
    }

    #[test]
    fn orbit_manifest_reads_points_by_index() {
        let dir = tempdir().unwrap();
        let shape = TensorShape::new(1, 2, 1).unwrap();
        write(&dir.path().join("a.bin"), &[0, 255]);
        let mut f32s = Vec::new();
        for v in [0.5f32, 0.25] {
            f32s.extend_from_slice(&v.to_le_bytes());
        }
        write(&dir.path().join("b.bin"), &f32s);
        let manifest = dir.path().join("orbits.json");
        write(&manifest, br#"{"0": ["a.bin", "b.bin"]}"#);
        let om = OrbitManifest::load(&manifest).unwrap();
        let points = om.orbit_points(0, shape).unwrap();
        assert_eq!(points.len(), 2);
        assert_eq!(points[0].values(), &[0.0, 1.0]);
        assert_eq!(points[1].values(), &[0.5, 0.25]);
        assert!(om.orbit_points(1, shape).is_err());
    }

    #[test]
    fn loads_are_deterministic() {
        let dir = tempdir().unwrap();
        let mut record = vec![0u8; 3073 * 2];
        for (i, b) in record.iter_mut().enumerate() {
            *b = (i * 31 % 256) as u8;
        }
        let path = dir.path().join("batch.bin");
        write(&path, &record);
        let a = load_cifar10_batch(&path).unwrap();
        let b = load_cifar10_batch(&path).unwrap();
        for i in 0..a.len() {
            assert_eq!(a.point(i).values(), b.point(i).values());
        }
        assert_eq!(a.labels(), b.labels());
    }
}
