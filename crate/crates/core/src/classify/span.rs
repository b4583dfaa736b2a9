//! Linear span of a set of 2x2 matrices, compared against the four
//! conjugation-invariant subspaces `0`, `K`, `sl_2`, `M_2`.

use std::fmt;

use serde::Serialize;

use crate::field::FieldSpec;
use crate::linalg::SpanBasis;
use crate::matalg::Mat2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpanTag {
    Zero,
    Scalars,
    Sl2,
    Full,
}

impl fmt::Display for SpanTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpanTag::Zero => "zero",
            SpanTag::Scalars => "scalars",
            SpanTag::Sl2 => "sl2",
            SpanTag::Full => "full",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpanInfo {
    pub dimension: usize,
    /// The first independent inputs, in the order given.
    pub basis: Vec<Mat2>,
    #[serde(skip)]
    pub basis_indices: Vec<usize>,
    pub tag: SpanTag,
}

/// A span that is none of the four invariant subspaces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonCanonicalSpan {
    pub dimension: usize,
    pub basis: Vec<Mat2>,
}

impl fmt::Display for NonCanonicalSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b: Vec<String> = self.basis.iter().map(|m| format!("[{m}]")).collect();
        write!(f, "span of dimension {} is not 0, K, sl2 or M2: basis {}", self.dimension, b.join(" "))
    }
}

pub fn span_dimension(field: FieldSpec, evals: &[Mat2]) -> Result<SpanInfo, NonCanonicalSpan> {
    let mut span = SpanBasis::new(4);
    let mut basis = Vec::new();
    let mut basis_indices = Vec::new();
    for (k, v) in evals.iter().enumerate() {
        if span.insert(v.entries()) {
            basis.push(v.clone());
            basis_indices.push(k);
            if span.rank() == 4 {
                break;
            }
        }
    }
    let dimension = span.rank();
    let tag = match dimension {
        0 => Some(SpanTag::Zero),
        1 if span.contains(Mat2::identity(field).entries()) => Some(SpanTag::Scalars),
        3 if basis.iter().all(|m| m.trace().is_zero()) => Some(SpanTag::Sl2),
        4 => Some(SpanTag::Full),
        _ => None,
    };
    match tag {
        Some(tag) => Ok(SpanInfo { dimension, basis, basis_indices, tag }),
        None => Err(NonCanonicalSpan { dimension, basis }),
    }
}
