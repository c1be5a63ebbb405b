//! Λ-class weight sequences and de la Vallée-Poussin windows.
//!
//! A sequence λ belongs to Λ when `λ_1 = 1`, it is non-decreasing, it grows
//! by at most one per step, and it tends to infinity. The window of index n
//! is `I_n = {k ∈ ℕ : n − λ_n + 1 ≤ k ≤ n}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack on the monotonicity, step and `λ_1 = 1` clauses.
pub const CLAUSE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaSpec {
    /// `λ_n = n`; windows become `[1, n]`.
    Identity,
    /// `λ_n = max(1, ⌈a·n⌉)`, clamped into `[λ_{n−1}, λ_{n−1} + 1]`.
    Affine { slope: f64 },
    /// `λ_n = H_n`, the n-th harmonic number.
    Logarithmic,
    /// Explicit values `λ_1, λ_2, …`.
    Table {
        values: Vec<f64>,
        /// Caller asserts the sequence tends to infinity beyond the table.
        #[serde(default)]
        assume_unbounded: bool,
    },
}

impl LambdaSpec {
    pub fn table(values: Vec<f64>) -> Self {
        LambdaSpec::Table {
            values,
            assume_unbounded: false,
        }
    }

    /// Loads a one-column CSV with header `lambda`.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let values = read_column(path, "lambda")?;
        Ok(LambdaSpec::table(values))
    }

    pub fn label(&self) -> String {
        match self {
            LambdaSpec::Identity => "identity".into(),
            LambdaSpec::Affine { slope } => format!("affine:{slope}"),
            LambdaSpec::Logarithmic => "log".into(),
            LambdaSpec::Table { values, .. } => format!("table[{}]", values.len()),
        }
    }

    /// Raw values `λ_1..=λ_{n_max}` without validation.
    pub fn values(&self, n_max: usize) -> Result<Vec<f64>> {
        match self {
            LambdaSpec::Identity => Ok((1..=n_max).map(|n| n as f64).collect()),
            LambdaSpec::Affine { slope } => {
                let a = *slope;
                if !(a.is_finite() && a > 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "affine slope must be positive, got {a}"
                    )));
                }
                let mut out = Vec::with_capacity(n_max);
                let mut prev = 0.0_f64;
                for n in 1..=n_max {
                    let raw = (a * n as f64).ceil().max(1.0);
                    let v = if n == 1 {
                        1.0
                    } else {
                        raw.clamp(prev, prev + 1.0)
                    };
                    out.push(v);
                    prev = v;
                }
                Ok(out)
            }
            LambdaSpec::Logarithmic => {
                let mut out = Vec::with_capacity(n_max);
                let mut h = 0.0;
                for n in 1..=n_max {
                    h += 1.0 / n as f64;
                    out.push(h);
                }
                Ok(out)
            }
            LambdaSpec::Table { values, .. } => {
                if values.len() < n_max {
                    return Err(Error::Index {
                        index: n_max,
                        len: values.len(),
                    });
                }
                Ok(values[..n_max].to_vec())
            }
        }
    }

    /// `I_n` for this spec, validating the clauses up to `n`.
    pub fn window(&self, n: usize) -> Result<WindowStat> {
        LambdaSeq::new(self, n)?.window(n)
    }

    /// `λ_n^α`, validating the clauses up to `n`.
    pub fn power(&self, n: usize, alpha: f64) -> Result<f64> {
        LambdaSeq::new(self, n)?.power(n, alpha)
    }
}

pub(crate) fn read_column(path: &Path, header: &str) -> Result<Vec<f64>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::Load(format!("{}: {e}", path.display())))?;
    let headers = reader.headers().map_err(|e| Error::Load(e.to_string()))?;
    if headers.len() != 1 || headers.get(0).map(str::trim) != Some(header) {
        return Err(Error::Load(format!(
            "{}: expected single column `{header}`",
            path.display()
        )));
    }
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Load(e.to_string()))?;
        let v = record
            .get(0)
            .unwrap_or("")
            .trim()
            .parse::<f64>()
            .map_err(|e| Error::Load(format!("{}: row {}: {e}", path.display(), i + 2)))?;
        out.push(v);
    }
    Ok(out)
}

/// `base^α`, exact for `α = 1`.
pub(crate) fn pow_alpha(base: f64, alpha: f64) -> f64 {
    if alpha == 1.0 {
        base
    } else {
        base.powf(alpha)
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )))
    }
}

/// Result of checking the Λ-class clauses on `n ≤ n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaReport {
    pub lambda: String,
    pub n_max: usize,
    pub valid: bool,
    pub starts_at_one: bool,
    /// First n with `λ_n < λ_{n−1}`.
    pub first_decrease: Option<usize>,
    /// First n with `λ_n > λ_{n−1} + 1`.
    pub first_step_violation: Option<usize>,
    /// `λ_{n_max} ≥ ln(n_max)`; advisory only.
    pub unbounded_heuristic: bool,
    pub unbounded_asserted: bool,
    /// Set when the values could not be produced at all.
    pub problem: Option<String>,
}

impl LambdaReport {
    fn first_failure(&self) -> Option<(usize, String)> {
        if let Some(p) = &self.problem {
            return Some((self.n_max, p.clone()));
        }
        if !self.starts_at_one {
            return Some((1, "lambda_1 must equal 1".into()));
        }
        match (self.first_decrease, self.first_step_violation) {
            (Some(a), Some(b)) if b < a => Some((b, "step exceeds 1".into())),
            (Some(a), _) => Some((a, "sequence decreases".into())),
            (None, Some(b)) => Some((b, "step exceeds 1".into())),
            (None, None) => None,
        }
    }
}

/// Checks `λ_1 = 1`, monotonicity and the step bound for all `n ≤ n_max`.
///
/// Unboundedness cannot be decided from finitely many terms, so it is
/// reported as a heuristic flag and never affects `valid`.
pub fn validate_lambda(spec: &LambdaSpec, n_max: usize) -> LambdaReport {
    let asserted = match spec {
        LambdaSpec::Table {
            assume_unbounded, ..
        } => *assume_unbounded,
        _ => true,
    };
    let mut report = LambdaReport {
        lambda: spec.label(),
        n_max,
        valid: false,
        starts_at_one: false,
        first_decrease: None,
        first_step_violation: None,
        unbounded_heuristic: false,
        unbounded_asserted: asserted,
        problem: None,
    };
    let values = match spec.values(n_max) {
        Ok(v) if !v.is_empty() => v,
        Ok(_) => {
            report.problem = Some("n_max must be at least 1".into());
            return report;
        }
        Err(e) => {
            report.problem = Some(e.to_string());
            return report;
        }
    };
    if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
        report.problem = Some(format!("non-finite value at n={}", bad + 1));
        return report;
    }
    report.starts_at_one = (values[0] - 1.0).abs() <= CLAUSE_TOLERANCE;
    for (i, w) in values.windows(2).enumerate() {
        let n = i + 2;
        if report.first_decrease.is_none() && w[1] < w[0] - CLAUSE_TOLERANCE {
            report.first_decrease = Some(n);
        }
        if report.first_step_violation.is_none() && w[1] > w[0] + 1.0 + CLAUSE_TOLERANCE {
            report.first_step_violation = Some(n);
        }
    }
    report.unbounded_heuristic = values[n_max - 1] >= (n_max as f64).ln();
    report.valid = report.first_failure().is_none();
    report
}

/// `I_n` as an integer index range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowStat {
    pub n: usize,
    pub lo: usize,
    pub hi: usize,
    pub count: usize,
}

/// A validated, materialized λ on `1..=n_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSeq {
    spec: LambdaSpec,
    values: Vec<f64>,
}

impl LambdaSeq {
    pub fn new(spec: &LambdaSpec, n_max: usize) -> Result<Self> {
        let report = validate_lambda(spec, n_max.max(1));
        if let Some((n, reason)) = report.first_failure() {
            return Err(Error::Validation { n, reason });
        }
        Ok(LambdaSeq {
            spec: spec.clone(),
            values: spec.values(n_max.max(1))?,
        })
    }

    pub fn spec(&self) -> &LambdaSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.values.len() {
            return Err(Error::Validation {
                n,
                reason: format!("lambda validated only on 1..={}", self.values.len()),
            });
        }
        Ok(())
    }

    pub fn value(&self, n: usize) -> Result<f64> {
        self.check_n(n)?;
        Ok(self.values[n - 1])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn window(&self, n: usize) -> Result<WindowStat> {
        let lambda = self.value(n)?;
        let lo = ((n as f64 - lambda + 1.0).ceil().max(1.0) as usize).min(n);
        Ok(WindowStat {
            n,
            lo,
            hi: n,
            count: n - lo + 1,
        })
    }

    pub fn power(&self, n: usize, alpha: f64) -> Result<f64> {
        check_alpha(alpha)?;
        Ok(pow_alpha(self.value(n)?, alpha))
    }
}
