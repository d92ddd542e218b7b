//! Sparse binary-classification datasets and the LIBSVM text format.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::GzDecoder;
use thiserror::Error;

use crate::sampling::RngStream;
use crate::vectorspace::Vector;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("dataset must contain at least one example")]
    Empty,
    #[error("feature index {index} exceeds declared dimension {dim}")]
    IndexOutOfBounds { index: usize, dim: usize },
    #[error("label must be one of +1, 1, -1, 2, 0; example {example} has {label}")]
    BadLabel { example: usize, label: f64 },
}

/// One sparse feature vector: strictly increasing 0-based indices with
/// their values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseExample {
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl SparseExample {
    pub fn new(indices: Vec<u32>, values: Vec<f64>) -> Self {
        debug_assert_eq!(indices.len(), values.len());
        debug_assert!(indices.windows(2).all(|w| w[0] < w[1]));
        Self { indices, values }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices
            .iter()
            .zip(&self.values)
            .map(|(&i, &v)| (i as usize, v))
    }

    /// a' x against a dense vector.
    pub fn dot(&self, x: &Vector) -> f64 {
        let xs = x.as_slice();
        self.iter().map(|(i, v)| v * xs[i]).sum()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Binary classification data: n sparse examples with labels in {+1, -1}.
#[derive(Debug, Clone)]
pub struct SparseDataset {
    dim: usize,
    examples: Vec<SparseExample>,
    labels: Vec<i8>,
}

impl SparseDataset {
    pub fn new(
        dim: usize,
        examples: Vec<SparseExample>,
        labels: Vec<i8>,
    ) -> Result<Self, DatasetError> {
        if examples.is_empty() || examples.len() != labels.len() {
            return Err(DatasetError::Empty);
        }
        for (example, ex) in examples.iter().enumerate() {
            if let Some(&max) = ex.indices.last() {
                if max as usize >= dim {
                    return Err(DatasetError::IndexOutOfBounds {
                        index: max as usize,
                        dim,
                    });
                }
            }
            let label = labels[example];
            if label != 1 && label != -1 {
                return Err(DatasetError::BadLabel {
                    example,
                    label: label as f64,
                });
            }
        }
        Ok(Self {
            dim,
            examples,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn example(&self, i: usize) -> (&SparseExample, f64) {
        (&self.examples[i], self.labels[i] as f64)
    }

    /// max_i ||a_i||, the hinge-subgradient norm bound.
    pub fn max_feature_norm(&self) -> f64 {
        self.examples
            .iter()
            .map(SparseExample::norm)
            .fold(0.0, f64::max)
    }
}

/// Expected feature dimension for the named benchmark datasets. Trailing
/// all-zero features would otherwise silently shrink d relative to the
/// published figures.
pub fn known_dataset_dim(name: &str) -> Option<usize> {
    match name {
        "mushrooms" => Some(112),
        "a9a" => Some(123),
        "w8a" => Some(300),
        _ => None,
    }
}

fn map_label(raw: f64, example: usize) -> Result<i8, DatasetError> {
    // +1/1 -> +1; -1 -> -1; {1,2} files map 2 -> -1; {0,1} files map 0 -> -1.
    if raw == 1.0 {
        Ok(1)
    } else if raw == -1.0 || raw == 2.0 || raw == 0.0 {
        Ok(-1)
    } else {
        Err(DatasetError::BadLabel { example, label: raw })
    }
}

/// Parses LIBSVM text: `<label> <index>:<value> ...` with 1-based strictly
/// ascending indices. The dimension is the max index seen unless
/// `dim_override` supplies a larger declared dimension.
pub fn parse_libsvm<R: BufRead>(
    reader: R,
    dim_override: Option<usize>,
) -> Result<SparseDataset, DatasetError> {
    let mut examples = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let label_tok = tokens.next().expect("nonempty line has a first token");
        let raw_label: f64 = label_tok.parse().map_err(|_| DatasetError::Malformed {
            line: lineno,
            reason: format!("non-numeric label `{label_tok}`"),
        })?;
        let label = map_label(raw_label, examples.len()).map_err(|_| DatasetError::Malformed {
            line: lineno,
            reason: format!("unsupported label value {raw_label}"),
        })?;

        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut prev_index = 0usize;
        for tok in tokens {
            let (idx_s, val_s) = tok.split_once(':').ok_or_else(|| DatasetError::Malformed {
                line: lineno,
                reason: format!("expected `index:value`, got `{tok}`"),
            })?;
            let idx: usize = idx_s.parse().map_err(|_| DatasetError::Malformed {
                line: lineno,
                reason: format!("non-numeric index `{idx_s}`"),
            })?;
            let val: f64 = val_s.parse().map_err(|_| DatasetError::Malformed {
                line: lineno,
                reason: format!("non-numeric value `{val_s}`"),
            })?;
            if idx == 0 {
                return Err(DatasetError::Malformed {
                    line: lineno,
                    reason: "indices are 1-based; found index 0".into(),
                });
            }
            if idx <= prev_index {
                return Err(DatasetError::Malformed {
                    line: lineno,
                    reason: format!("indices must be strictly ascending; {idx} after {prev_index}"),
                });
            }
            prev_index = idx;
            indices.push((idx - 1) as u32);
            values.push(val);
        }
        max_index = max_index.max(prev_index);
        examples.push(SparseExample::new(indices, values));
        labels.push(label);
    }

    let dim = match dim_override {
        Some(d) => {
            if max_index > d {
                return Err(DatasetError::IndexOutOfBounds {
                    index: max_index - 1,
                    dim: d,
                });
            }
            d
        }
        None => max_index,
    };
    SparseDataset::new(dim, examples, labels)
}

/// Loads a LIBSVM file from disk. `.gz` files are decompressed on the fly,
/// and files named after a known benchmark dataset get that dataset's
/// declared dimension.
pub fn load_dataset(path: &Path) -> Result<SparseDataset, DatasetError> {
    let file = File::open(path)?;
    let gzipped = path.extension().is_some_and(|e| e == "gz");
    let stem = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let stem = stem
        .trim_end_matches(".gz")
        .trim_end_matches(".txt")
        .to_string();
    let dim_override = known_dataset_dim(&stem);

    let reader: Box<dyn Read> = if gzipped {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    parse_libsvm(BufReader::new(reader), dim_override)
}

/// Deterministic generated stand-in for a binary classification dataset:
/// one-hot style sparse rows with labels from a random hyperplane plus a
/// small flip rate, so the ball-constrained hinge optimum stays strictly
/// positive. Useful for benchmarking when the published files are not on
/// disk.
pub fn synthetic_classification(
    n: usize,
    dim: usize,
    nnz: usize,
    seed: u64,
) -> SparseDataset {
    assert!(n > 0 && dim > 0 && nnz > 0 && nnz <= dim);
    let mut rng = RngStream::new(seed);
    let truth = rng.sample_unit_sphere(dim).expect("dim > 0");
    let truth = truth.as_slice();
    let mut examples = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let mut picked = Vec::with_capacity(nnz);
        while picked.len() < nnz {
            let idx = rng.sample_uniform_index(dim).expect("dim > 0") as u32;
            if !picked.contains(&idx) {
                picked.push(idx);
            }
        }
        picked.sort_unstable();
        let values = vec![1.0; nnz];
        let score: f64 = picked.iter().map(|&i| truth[i as usize]).sum();
        let mut label: i8 = if score >= 0.0 { 1 } else { -1 };
        if rng.sample_bernoulli(0.05) {
            label = -label;
        }
        examples.push(SparseExample::new(picked, values));
        labels.push(label);
    }
    SparseDataset::new(dim, examples, labels).expect("generated data is well formed")
}
