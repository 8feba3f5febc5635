//! Sparse datasets with binary labels.
//!
//! Examples are sparse feature vectors; labels are +1/-1. A [`Dataset`]
//! keeps the index sets of positive and negative examples because every
//! risk in this crate is a function of that partition. Datasets are
//! immutable after construction and safe to share across threads.

use thiserror::Error;

/// A sparse feature vector: strictly increasing 0-based indices paired
/// with finite, nonzero values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

/// Validation errors for vectors and datasets.
#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    #[error("feature indices must be strictly increasing")]
    NonIncreasingIndex,
    #[error("feature values must be finite and nonzero")]
    BadValue,
    #[error("label at position {0} is not +1 or -1")]
    BadLabel(usize),
    #[error("examples and labels have different lengths")]
    LengthMismatch,
    #[error("dataset is empty")]
    Empty,
    #[error("dataset has no {0} examples")]
    EmptyClass(&'static str),
}

/// Errors produced while reading the svmlight text format.
#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("line {line}: malformed token `{token}`")]
    Malformed { line: usize, token: String },
    #[error("line {line}: label must be +1 or -1, got `{found}`")]
    BadLabel { line: usize, found: String },
    #[error("line {line}: feature value must be finite and nonzero")]
    BadValue { line: usize },
    #[error("line {line}: feature indices must be 1-based and strictly increasing")]
    BadIndex { line: usize },
}

impl SparseVector {
    /// Builds a vector from `(index, value)` pairs, validating the invariants.
    pub fn new(entries: Vec<(usize, f64)>) -> Result<Self, DataError> {
        for (k, &(idx, val)) in entries.iter().enumerate() {
            if k > 0 && idx <= entries[k - 1].0 {
                return Err(DataError::NonIncreasingIndex);
            }
            if !val.is_finite() || val == 0.0 {
                return Err(DataError::BadValue);
            }
        }
        Ok(Self { entries })
    }

    /// A vector with no nonzero entries.
    pub fn empty() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Largest index present, or `None` for an empty vector.
    pub fn max_index(&self) -> Option<usize> {
        self.entries.last().map(|&(i, _)| i)
    }

    pub fn norm_squared(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }
}

/// A labelled collection of sparse examples, partitioned by label sign.
#[derive(Debug, Clone)]
pub struct Dataset {
    examples: Vec<SparseVector>,
    labels: Vec<i8>,
    num_features: usize,
    pos_idx: Vec<usize>,
    neg_idx: Vec<usize>,
}

impl Dataset {
    /// Assembles a dataset, checking labels are +1/-1 and computing the
    /// feature count and the P/N partition.
    pub fn new(examples: Vec<SparseVector>, labels: Vec<i8>) -> Result<Self, DataError> {
        if examples.len() != labels.len() {
            return Err(DataError::LengthMismatch);
        }
        let mut pos_idx = Vec::new();
        let mut neg_idx = Vec::new();
        for (i, &y) in labels.iter().enumerate() {
            match y {
                1 => pos_idx.push(i),
                -1 => neg_idx.push(i),
                _ => return Err(DataError::BadLabel(i)),
            }
        }
        let num_features = examples
            .iter()
            .filter_map(SparseVector::max_index)
            .max()
            .map_or(0, |m| m + 1);
        Ok(Self { examples, labels, num_features, pos_idx, neg_idx })
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    /// Feature count implied by the largest index seen.
    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn example(&self, i: usize) -> &SparseVector {
        &self.examples[i]
    }

    pub fn label(&self, i: usize) -> i8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    /// Indices of examples with label +1, in dataset order.
    pub fn pos_indices(&self) -> &[usize] {
        &self.pos_idx
    }

    /// Indices of examples with label -1, in dataset order.
    pub fn neg_indices(&self) -> &[usize] {
        &self.neg_idx
    }

    pub fn n_pos(&self) -> usize {
        self.pos_idx.len()
    }

    pub fn n_neg(&self) -> usize {
        self.neg_idx.len()
    }

    /// Number of positive-negative pairs.
    pub fn num_pairs(&self) -> usize {
        self.n_pos() * self.n_neg()
    }

    /// Errors unless both classes are present.
    pub fn require_both_classes(&self) -> Result<(), DataError> {
        if self.is_empty() {
            return Err(DataError::Empty);
        }
        if self.n_pos() == 0 {
            return Err(DataError::EmptyClass("positive"));
        }
        if self.n_neg() == 0 {
            return Err(DataError::EmptyClass("negative"));
        }
        Ok(())
    }
}

/// Dot product of a dense weight vector with a sparse example.
///
/// Panics if the example refers to an index outside `w`.
pub fn dot(w: &[f64], x: &SparseVector) -> f64 {
    let mut acc = 0.0;
    for (idx, val) in x.iter() {
        assert!(idx < w.len(), "feature index {idx} out of range for {} weights", w.len());
        acc += w[idx] * val;
    }
    acc
}

/// Dot product that treats weight entries beyond `w.len()` as zero.
///
/// Used when scoring data whose feature space is wider than the model's
/// (unseen test features contribute nothing).
pub fn dot_zero_extended(w: &[f64], x: &SparseVector) -> f64 {
    x.iter().filter(|&(idx, _)| idx < w.len()).map(|(idx, val)| w[idx] * val).sum()
}

/// Per-example scores `<w, x_i>` in dataset order. Cost is O(total nonzeros).
pub fn scores(w: &[f64], d: &Dataset) -> Vec<f64> {
    (0..d.len()).map(|i| dot(w, d.example(i))).collect()
}

/// Per-example scores ignoring features outside the model's range.
pub fn scores_zero_extended(w: &[f64], d: &Dataset) -> Vec<f64> {
    (0..d.len()).map(|i| dot_zero_extended(w, d.example(i))).collect()
}

/// Largest Euclidean norm over all examples.
///
/// Panics on an empty dataset.
pub fn radius(d: &Dataset) -> f64 {
    assert!(!d.is_empty(), "radius of an empty dataset");
    (0..d.len()).map(|i| d.example(i).norm_squared()).fold(0.0_f64, f64::max).sqrt()
}

/// Parses the svmlight/libsvm text format.
///
/// Accepted grammar: one example per nonempty line, `<label> <idx>:<val> ...`
/// with 1-based strictly increasing indices; lines starting with `#` are
/// comments. Labels `+1`/`1` map to +1 and `-1` maps to -1; anything else
/// (including `0` and qid fields) is rejected.
pub fn parse_svmlight(text: &str) -> Result<Dataset, ParseError> {
    let mut examples = Vec::new();
    let mut labels = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let label_tok = tokens.next().expect("nonempty line has a first token");
        let label = match label_tok {
            "+1" | "1" => 1i8,
            "-1" => -1i8,
            other => {
                return Err(ParseError::BadLabel { line, found: other.to_string() });
            }
        };
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for tok in tokens {
            let (idx_s, val_s) = tok
                .split_once(':')
                .ok_or_else(|| ParseError::Malformed { line, token: tok.to_string() })?;
            let idx_1b: usize = idx_s
                .parse()
                .map_err(|_| ParseError::Malformed { line, token: tok.to_string() })?;
            if idx_1b == 0 {
                return Err(ParseError::BadIndex { line });
            }
            let idx = idx_1b - 1;
            if let Some(&(prev, _)) = entries.last() {
                if idx <= prev {
                    return Err(ParseError::BadIndex { line });
                }
            }
            let val: f64 = val_s
                .parse()
                .map_err(|_| ParseError::Malformed { line, token: tok.to_string() })?;
            if !val.is_finite() || val == 0.0 {
                return Err(ParseError::BadValue { line });
            }
            entries.push((idx, val));
        }
        examples.push(SparseVector { entries });
        labels.push(label);
    }
    Ok(Dataset::new(examples, labels).expect("parser output satisfies dataset invariants"))
}

/// Serializes a dataset back to svmlight text. Values are printed with 17
/// significant digits so `parse_svmlight` round-trips them bit-exactly.
pub fn to_svmlight(d: &Dataset) -> String {
    let mut out = String::new();
    for i in 0..d.len() {
        out.push_str(if d.label(i) > 0 { "+1" } else { "-1" });
        for (idx, val) in d.example(i).iter() {
            out.push_str(&format!(" {}:{:.16e}", idx + 1, val));
        }
        out.push('\n');
    }
    out
}
