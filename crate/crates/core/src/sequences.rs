//! Deterministic real sequences `k ↦ x_k`, indexed from 1.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lambda::{read_column, LambdaSeq, LambdaSpec};
use crate::partial_metric::PartialMetricSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SequenceKind {
    /// 1 at perfect squares, 0 elsewhere.
    SquareIndicator,
    /// `x_k = k` (or `−k` when `negate`) on the tail blocks
    /// `[n_j − √λ_{n_j} + 1, n_j]` anchored at `n_j = 2^j`, 0 elsewhere.
    LambdaTailBlock {
        lambda: LambdaSpec,
        #[serde(default)]
        negate: bool,
    },
    Constant {
        value: f64,
    },
    /// `head` before index `from`, `value` from `from` on.
    EventuallyConstant {
        value: f64,
        from: usize,
        #[serde(default)]
        head: f64,
    },
    /// `value` at exactly `⌊n^γ⌋` of the first n indices, the candidate
    /// limit elsewhere.
    PolynomialExceptions {
        exponent: f64,
        value: f64,
    },
    Table {
        values: Vec<f64>,
    },
}

/// A sequence together with the candidate limit its deviations are
/// measured against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub kind: SequenceKind,
    pub limit: f64,
}

impl SequenceSpec {
    pub fn new(kind: SequenceKind, limit: f64) -> Self {
        SequenceSpec { kind, limit }
    }

    pub fn square_indicator() -> Self {
        Self::new(SequenceKind::SquareIndicator, 0.0)
    }

    pub fn constant(value: f64) -> Self {
        Self::new(SequenceKind::Constant { value }, value)
    }

    pub fn polynomial_exceptions(exponent: f64, value: f64) -> Self {
        Self::new(SequenceKind::PolynomialExceptions { exponent, value }, 0.0)
    }

    pub fn tail_block(lambda: LambdaSpec, negate: bool) -> Self {
        Self::new(SequenceKind::LambdaTailBlock { lambda, negate }, 0.0)
    }

    /// Loads a one-column CSV with header `x` into a table sequence.
    pub fn table_from_csv(path: impl AsRef<Path>, limit: f64) -> Result<Self> {
        let values = read_column(path.as_ref(), "x")?;
        Ok(Self::new(SequenceKind::Table { values }, limit))
    }

    /// Checks parameters that do not depend on the index.
    pub fn validate(&self) -> Result<()> {
        if !self.limit.is_finite() {
            return Err(Error::InvalidParameter(
                "candidate limit must be finite".into(),
            ));
        }
        match &self.kind {
            SequenceKind::PolynomialExceptions { exponent, value } => {
                if !(*exponent > 0.0 && *exponent < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "exception exponent must lie in (0, 1), got {exponent}"
                    )));
                }
                if !value.is_finite() {
                    return Err(Error::InvalidParameter(
                        "exception value must be finite".into(),
                    ));
                }
            }
            SequenceKind::EventuallyConstant { from, .. } if *from == 0 => {
                return Err(Error::InvalidParameter("`from` is a 1-based index".into()));
            }
            _ => {}
        }
        Ok(())
    }

    /// `x_k` for `k ≥ 1`.
    pub fn term(&self, k: usize) -> Result<f64> {
        if k == 0 {
            return Err(Error::InvalidParameter(
                "sequences are indexed from 1".into(),
            ));
        }
        self.validate()?;
        match &self.kind {
            SequenceKind::LambdaTailBlock { lambda, negate } => {
                let anchor = k.next_power_of_two();
                let seq = LambdaSeq::new(lambda, anchor)?;
                Ok(tail_block_term(&seq, k, *negate))
            }
            SequenceKind::Table { values } => values.get(k - 1).copied().ok_or(Error::Index {
                index: k,
                len: values.len(),
            }),
            kind => Ok(closed_form(kind, self.limit, k)),
        }
    }

    /// `x_1, …, x_n`.
    pub fn terms(&self, n: usize) -> Result<Vec<f64>> {
        self.validate()?;
        match &self.kind {
            SequenceKind::LambdaTailBlock { lambda, negate } => {
                let seq = LambdaSeq::new(lambda, n.max(1).next_power_of_two())?;
                Ok((1..=n).map(|k| tail_block_term(&seq, k, *negate)).collect())
            }
            SequenceKind::Table { values } => {
                if values.len() < n {
                    return Err(Error::Index {
                        index: values.len() + 1,
                        len: values.len(),
                    });
                }
                Ok(values[..n].to_vec())
            }
            kind => Ok((1..=n).map(|k| closed_form(kind, self.limit, k)).collect()),
        }
    }

    /// `|{k ≤ n : |ρ(x_k, x) − ρ(x, x)| ≥ ε}|` by direct enumeration.
    pub fn exception_count(&self, metric: &PartialMetricSpec, eps: f64, n: usize) -> Result<u64> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive, got {eps}"
            )));
        }
        let mut count = 0;
        for xk in self.terms(n)? {
            if metric.deviation(xk, self.limit)? >= eps {
                count += 1;
            }
        }
        Ok(count)
    }
}

pub fn is_square(k: usize) -> bool {
    let r = k.isqrt();
    r * r == k
}

fn floor_pow(k: usize, exponent: f64) -> f64 {
    (k as f64).powf(exponent).floor()
}

// Exceptions sit where ⌊k^γ⌋ jumps, i.e. at k = ⌈j^{1/γ}⌉, so the count up
// to n telescopes to ⌊n^γ⌋.
fn is_polynomial_exception(k: usize, exponent: f64) -> bool {
    floor_pow(k, exponent) > floor_pow(k - 1, exponent)
}

fn closed_form(kind: &SequenceKind, limit: f64, k: usize) -> f64 {
    match kind {
        SequenceKind::SquareIndicator => {
            if is_square(k) {
                1.0
            } else {
                0.0
            }
        }
        SequenceKind::Constant { value } => *value,
        SequenceKind::EventuallyConstant { value, from, head } => {
            if k >= *from {
                *value
            } else {
                *head
            }
        }
        SequenceKind::PolynomialExceptions { exponent, value } => {
            if is_polynomial_exception(k, *exponent) {
                *value
            } else {
                limit
            }
        }
        SequenceKind::LambdaTailBlock { .. } | SequenceKind::Table { .. } => {
            unreachable!("handled by the caller")
        }
    }
}

fn tail_block_term(seq: &LambdaSeq, k: usize, negate: bool) -> f64 {
    let anchor = k.next_power_of_two();
    let lambda = seq.values()[anchor - 1];
    if k as f64 >= anchor as f64 - lambda.sqrt() + 1.0 {
        if negate {
            -(k as f64)
        } else {
            k as f64
        }
    } else {
        0.0
    }
}
