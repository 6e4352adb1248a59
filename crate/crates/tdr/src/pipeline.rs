//! Dataset I/O, synthetic data, embedding flattening, KNN classification,
//! stratified cross-validation, and the experiment harness behind the CLI.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::RMat;
use crate::methods::{self, MethodError, ReductionConfig};
use crate::tensor::{Tensor3, TensorError};

const MAGIC: &[u8; 4] = b"T3F1";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("bad magic bytes (expected \"T3F1\")")]
    BadMagic,
    #[error("truncated file: expected {expected} bytes, found {found}")]
    TruncatedFile { expected: usize, found: usize },
    #[error("trailing data: {extra} bytes past the end of the tensor")]
    TrailingData { extra: usize },
    #[error("bad header: dimensions {m}x{n}x{p} are invalid")]
    BadHeader { m: u64, n: u64, p: u64 },
    #[error("label count {labels} does not match sample count {samples}")]
    LabelCountMismatch { labels: usize, samples: usize },
    #[error("labels line {line}: not an integer")]
    LabelParse { line: usize },
    #[error("class {class} has {size} samples, fewer than {folds} folds")]
    ClassTooSmall {
        class: i64,
        size: usize,
        folds: usize,
    },
    #[error("need at least 2 folds, got {folds}")]
    BadFoldCount { folds: usize },
    #[error("evaluation needs at least 2 classes")]
    TooFewClasses,
    #[error("empty training set")]
    EmptyTrainSet,
    #[error("knn k = {k} exceeds training-set size {train}")]
    KnnKOutOfRange { k: usize, train: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Method(#[from] MethodError),
}

/// A data tensor plus one integer class label per lateral slice.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub x: Tensor3,
    pub labels: Vec<i64>,
    pub name: String,
}

impl LabeledDataset {
    pub fn class_count(&self) -> usize {
        let mut ids: Vec<i64> = self.labels.clone();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }
}

/// Cross-validation report: per-fold accuracies and wall times.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CVReport {
    pub dataset: String,
    pub samples: usize,
    pub classes: usize,
    pub config: ReductionConfig,
    pub folds: usize,
    pub knn_k: usize,
    pub seed: u64,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub reduce_seconds: f64,
    pub classify_seconds: f64,
}

/// Write a tensor in the T3F1 format: magic, m/n/p as u64 LE, then the values
/// as f64 LE in storage order.
pub fn save_tensor(t: &Tensor3, path: &Path) -> Result<(), PipelineError> {
    let (m, n, p) = t.dims();
    let mut buf = Vec::with_capacity(32 + 8 * m * n * p);
    buf.extend_from_slice(MAGIC);
    for dim in [m, n, p] {
        buf.extend_from_slice(&(dim as u64).to_le_bytes());
    }
    for v in t.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

pub fn load_tensor(path: &Path) -> Result<Tensor3, PipelineError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(PipelineError::BadMagic);
    }
    if bytes.len() < 28 {
        return Err(PipelineError::TruncatedFile {
            expected: 28,
            found: bytes.len(),
        });
    }
    let mut dims = [0u64; 3];
    for (i, d) in dims.iter_mut().enumerate() {
        let off = 4 + 8 * i;
        *d = u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap());
    }
    let [m, n, p] = dims;
    let count = m
        .checked_mul(n)
        .and_then(|v| v.checked_mul(p))
        .filter(|&v| m > 0 && n > 0 && p > 0 && v <= (usize::MAX / 8) as u64)
        .ok_or(PipelineError::BadHeader { m, n, p })?;
    let expected = 28 + 8 * count as usize;
    if bytes.len() < expected {
        return Err(PipelineError::TruncatedFile {
            expected,
            found: bytes.len(),
        });
    }
    if bytes.len() > expected {
        return Err(PipelineError::TrailingData {
            extra: bytes.len() - expected,
        });
    }
    let values: Vec<f64> = bytes[28..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Tensor3::from_vec(
        m as usize, n as usize, p as usize, values,
    )?)
}

/// Labels file: UTF-8 text, one base-10 integer per line.
pub fn save_labels(labels: &[i64], path: &Path) -> Result<(), PipelineError> {
    let mut out = String::new();
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn load_labels(path: &Path) -> Result<Vec<i64>, PipelineError> {
    let text = std::fs::read_to_string(path)?;
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        labels.push(
            line.parse::<i64>()
                .map_err(|_| PipelineError::LabelParse { line: i + 1 })?,
        );
    }
    Ok(labels)
}

pub fn load_dataset(
    tensor_path: &Path,
    labels_path: &Path,
) -> Result<LabeledDataset, PipelineError> {
    let x = load_tensor(tensor_path)?;
    let labels = load_labels(labels_path)?;
    if labels.len() != x.n() {
        return Err(PipelineError::LabelCountMismatch {
            labels: labels.len(),
            samples: x.n(),
        });
    }
    let name = tensor_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(LabeledDataset { x, labels, name })
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller.
    loop {
        let u1: f64 = rng.random();
        if u1 > 1e-300 {
            let u2: f64 = rng.random();
            return (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
        }
    }
}

/// Gaussian class clusters around random centers. Deterministic in the seed;
/// `spread` is the within-class standard deviation per entry.
pub fn synth_blobs(
    classes: usize,
    per_class: usize,
    m: usize,
    p: usize,
    spread: f64,
    seed: u64,
) -> LabeledDataset {
    assert!(classes >= 1 && per_class >= 1 && m >= 1 && p >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..classes)
        .map(|_| (0..m * p).map(|_| normal(&mut rng)).collect())
        .collect();
    let n = classes * per_class;
    let mut x = Tensor3::zeros(m, n, p);
    let mut labels = Vec::with_capacity(n);
    for cls in 0..classes {
        for s in 0..per_class {
            let j = cls * per_class + s;
            for k in 0..p {
                for i in 0..m {
                    let v = centers[cls][k * m + i] + spread * normal(&mut rng);
                    x.set(i, j, k, v);
                }
            }
            labels.push(cls as i64);
        }
    }
    LabeledDataset {
        x,
        labels,
        name: format!("blobs-c{classes}-n{per_class}-m{m}-p{p}"),
    }
}

/// Nominal ring radii of [`synth_rings`].
pub const RING_RADII: [f64; 2] = [0.3, 3.0];
/// Amplitude of the harmonic nuisance coordinates in the ring lift.
pub const RING_NUISANCE_AMP: f64 = 2.5;
/// Angular frequency of the harmonic nuisance coordinates.
pub const RING_NUISANCE_FREQ: f64 = 2.0;

/// Two concentric rings lifted into a 4 × n × p tensor. Rows 0-1 carry the
/// ring coordinates (radii [`RING_RADII`], coordinate noise `noise`); rows
/// 2-3 carry a class-independent second harmonic of the same angle whose
/// per-coordinate variance exceeds the rings' own, so variance-maximizing
/// linear projections land on the nuisance plane and lose the class structure
/// while pairwise distances still resolve the rings. Frontal slices past the
/// first repeat the tube with fresh noise.
pub fn synth_rings(n_per_ring: usize, noise: f64, p: usize, seed: u64) -> LabeledDataset {
    assert!(n_per_ring >= 1 && p >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = 4;
    let n = 2 * n_per_ring;
    let mut x = Tensor3::zeros(m, n, p);
    let mut labels = Vec::with_capacity(n);
    for ring in 0..2 {
        let radius = RING_RADII[ring];
        for s in 0..n_per_ring {
            let j = ring * n_per_ring + s;
            let theta =
                2.0 * std::f64::consts::PI * (s as f64 + rng.random::<f64>()) / n_per_ring as f64;
            let base = [
                radius * theta.cos() + noise * normal(&mut rng),
                radius * theta.sin() + noise * normal(&mut rng),
                RING_NUISANCE_AMP * (RING_NUISANCE_FREQ * theta).cos(),
                RING_NUISANCE_AMP * (RING_NUISANCE_FREQ * theta).sin(),
            ];
            for i in 0..m {
                x.set(i, j, 0, base[i]);
            }
            for k in 1..p {
                for i in 0..m {
                    x.set(i, j, k, base[i] + noise * normal(&mut rng));
                }
            }
            labels.push(ring as i64);
        }
    }
    LabeledDataset {
        x,
        labels,
        name: format!("rings-n{n_per_ring}-p{p}"),
    }
}

/// Row j is sample j: the embedding columns concatenated frontal slice by
/// frontal slice (k-major), a real n × (d·p) matrix.
pub fn flatten_embedding(y: &Tensor3) -> RMat {
    let (d, n, p) = y.dims();
    RMat::from_fn(n, d * p, |j, c| {
        let k = c / d;
        let r = c % d;
        y.get(r, j, k)
    })
}

/// Majority-vote KNN with Euclidean distances. Vote ties go to the class with
/// the smallest mean distance among the k neighbors, then to the lowest class
/// id; distance ties prefer the lower training index.
pub fn knn_classify(
    train: &RMat,
    train_labels: &[i64],
    test: &RMat,
    k: usize,
) -> Result<Vec<i64>, PipelineError> {
    let nt = train.rows();
    if nt == 0 {
        return Err(PipelineError::EmptyTrainSet);
    }
    if k < 1 || k > nt {
        return Err(PipelineError::KnnKOutOfRange { k, train: nt });
    }
    assert_eq!(train_labels.len(), nt);
    assert_eq!(train.cols(), test.cols());
    let dims = train.cols();
    let mut out = Vec::with_capacity(test.rows());
    for t in 0..test.rows() {
        let mut dist: Vec<(f64, usize)> = (0..nt)
            .map(|r| {
                let mut s = 0.0;
                for c in 0..dims {
                    let d = train.get(r, c) - test.get(t, c);
                    s += d * d;
                }
                (s, r)
            })
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut tally: std::collections::BTreeMap<i64, (usize, f64)> = Default::default();
        for &(d2, r) in dist.iter().take(k) {
            let e = tally.entry(train_labels[r]).or_insert((0, 0.0));
            e.0 += 1;
            e.1 += d2.sqrt();
        }
        let mut best: Option<(i64, usize, f64)> = None;
        for (&cls, &(count, dsum)) in &tally {
            let better = match best {
                None => true,
                // Equal count and distance keeps the earlier (lower) id.
                Some((_, bc, bd)) => count > bc || (count == bc && dsum < bd - 1e-300),
            };
            if better {
                best = Some((cls, count, dsum));
            }
        }
        out.push(best.unwrap().0);
    }
    Ok(out)
}

/// Stratified k-fold split: within each class the (seeded) shuffled indices
/// are dealt round-robin, so every fold's class counts differ from the ideal
/// proportion by at most one sample.
pub fn stratified_kfold(
    labels: &[i64],
    folds: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, PipelineError> {
    if folds < 2 {
        return Err(PipelineError::BadFoldCount { folds });
    }
    let mut classes: Vec<i64> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); folds];
    for cls in classes {
        let mut members: Vec<usize> = labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == cls)
            .map(|(i, _)| i)
            .collect();
        if members.len() < folds {
            return Err(PipelineError::ClassTooSmall {
                class: cls,
                size: members.len(),
                folds,
            });
        }
        members.shuffle(&mut rng);
        for (t, idx) in members.into_iter().enumerate() {
            out[t % folds].push(idx);
        }
    }
    for fold in &mut out {
        fold.sort_unstable();
    }
    Ok(out)
}

/// Reduce the full tensor once (the embeddings are transductive), flatten,
/// and cross-validate a KNN classifier over the flattened rows.
pub fn run_experiment(
    ds: &LabeledDataset,
    cfg: &ReductionConfig,
    folds: usize,
    knn_k: usize,
    seed: u64,
) -> Result<CVReport, PipelineError> {
    if ds.class_count() < 2 {
        return Err(PipelineError::TooFewClasses);
    }
    assert_eq!(
        ds.labels.len(),
        ds.x.n(),
        "label count must match sample count"
    );
    let out = methods::reduce(&ds.x, cfg)?;
    let flat = flatten_embedding(&out.y);
    let fold_sets = stratified_kfold(&ds.labels, folds, seed)?;
    let n = ds.x.n();
    let classify_start = std::time::Instant::now();
    let mut fold_accuracies = Vec::with_capacity(folds);
    for fold in &fold_sets {
        let in_fold: std::collections::HashSet<usize> = fold.iter().copied().collect();
        let train_idx: Vec<usize> = (0..n).filter(|i| !in_fold.contains(i)).collect();
        let train = RMat::from_fn(train_idx.len(), flat.cols(), |r, c| {
            flat.get(train_idx[r], c)
        });
        let train_labels: Vec<i64> = train_idx.iter().map(|&i| ds.labels[i]).collect();
        let test = RMat::from_fn(fold.len(), flat.cols(), |r, c| flat.get(fold[r], c));
        let pred = knn_classify(&train, &train_labels, &test, knn_k)?;
        let correct = pred
            .iter()
            .zip(fold.iter())
            .filter(|(p, &i)| **p == ds.labels[i])
            .count();
        fold_accuracies.push(100.0 * correct as f64 / fold.len() as f64);
    }
    let classify_seconds = classify_start.elapsed().as_secs_f64();
    let mean_accuracy = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
    Ok(CVReport {
        dataset: ds.name.clone(),
        samples: n,
        classes: ds.class_count(),
        config: cfg.clone(),
        folds,
        knn_k,
        seed,
        fold_accuracies,
        mean_accuracy,
        reduce_seconds: out.diagnostics.reduce_seconds,
        classify_seconds,
    })
}
