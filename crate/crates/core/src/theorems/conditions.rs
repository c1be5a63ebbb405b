//! Grid estimates of the growth conditions relating λ, μ and the orders.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::check_case_grid;
use crate::analysis::{least_squares, TREND_MARGIN};
use crate::error::Result;
use crate::lambda::{check_alpha, pow_alpha, LambdaSeq, LambdaSpec};

/// A `liminf` condition holds only if the tail minimum stays above this.
pub const LIMINF_MARGIN: f64 = 1e-3;

/// A limit condition holds when the last two values are this close to 1.
pub const LIMIT_TOL: f64 = 1e-2;

/// Log-log slope above which a `liminf` ratio counts as not decaying.
const FLAT_SLOPE: f64 = -5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConditionId {
    /// `liminf λ_n^α / n^α > 0`.
    #[serde(rename = "C3.1")]
    C3_1,
    /// `liminf λ_n^α / μ_n^β > 0`.
    #[serde(rename = "C3.2")]
    C3_2,
    /// `λ_n^α / μ_n^β → 1`.
    #[serde(rename = "C3.3a")]
    C3_3a,
    /// `μ_n / μ_n^β → 1`.
    #[serde(rename = "C3.3b")]
    C3_3b,
}

impl ConditionId {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConditionId::C3_1 => "C3.1",
            ConditionId::C3_2 => "C3.2",
            ConditionId::C3_3a => "C3.3a",
            ConditionId::C3_3b => "C3.3b",
        }
    }

    fn is_liminf(&self) -> bool {
        matches!(self, ConditionId::C3_1 | ConditionId::C3_2)
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Tri {
    Holds,
    Fails,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionEstimate {
    pub id: ConditionId,
    /// `(n, ratio)` on the grid.
    pub values: Vec<(usize, f64)>,
    /// Tail minimum for `liminf` conditions, last value otherwise.
    pub statistic: f64,
    /// Log-log slope of the ratio over the last half of the grid.
    pub trend_slope: Option<f64>,
    pub status: Tri,
}

/// Evaluates the condition's ratio on the grid and classifies it.
///
/// `liminf` conditions hold when the ratio over the last half stays
/// `≥ LIMINF_MARGIN` with a log-log slope `≥ −0.005`, and fail when the
/// slope is `≤ −0.05` or the ratio drops below the margin while falling.
/// Limit conditions hold when the last two values are within `LIMIT_TOL`
/// of 1 and fail when both are farther away without approaching.
pub fn estimate_condition(
    id: ConditionId,
    lambda: &LambdaSpec,
    mu: &LambdaSpec,
    alpha: f64,
    beta: f64,
    grid: &[usize],
) -> Result<ConditionEstimate> {
    let n_max = check_case_grid(grid)?;
    check_alpha(alpha)?;
    check_alpha(beta)?;
    let lam = LambdaSeq::new(lambda, n_max)?;
    let mu_seq = match id {
        ConditionId::C3_1 => None,
        _ => Some(LambdaSeq::new(mu, n_max)?),
    };
    let mut values = Vec::with_capacity(grid.len());
    for &n in grid {
        let ratio = match id {
            ConditionId::C3_1 => lam.power(n, alpha)? / pow_alpha(n as f64, alpha),
            ConditionId::C3_2 | ConditionId::C3_3a => {
                lam.power(n, alpha)? / mu_seq.as_ref().unwrap().power(n, beta)?
            }
            ConditionId::C3_3b => {
                let m = mu_seq.as_ref().unwrap();
                m.value(n)? / m.power(n, beta)?
            }
        };
        values.push((n, ratio));
    }

    let tail = &values[values.len() / 2..];
    let trend_slope = if tail.len() >= 2 {
        let xs: Vec<f64> = tail.iter().map(|&(n, _)| (n as f64).ln()).collect();
        let ys: Vec<f64> = tail.iter().map(|&(_, r)| r.ln()).collect();
        least_squares(&xs, &ys).map(|f| f.slope)
    } else {
        None
    };

    let (statistic, status) = if id.is_liminf() {
        let min = tail.iter().map(|&(_, r)| r).fold(f64::INFINITY, f64::min);
        let status = match trend_slope {
            Some(s) if min >= LIMINF_MARGIN && s >= FLAT_SLOPE => Tri::Holds,
            Some(s) if s <= -TREND_MARGIN || (min < LIMINF_MARGIN && s < 0.0) => Tri::Fails,
            _ => Tri::Undetermined,
        };
        (min, status)
    } else {
        let last = values[values.len() - 1].1;
        let status = if values.len() < 2 {
            Tri::Undetermined
        } else {
            let prev = values[values.len() - 2].1;
            let (dl, dp) = ((last - 1.0).abs(), (prev - 1.0).abs());
            if dl <= LIMIT_TOL && dp <= LIMIT_TOL {
                Tri::Holds
            } else if dl > LIMIT_TOL && dp > LIMIT_TOL && dl >= dp {
                Tri::Fails
            } else {
                Tri::Undetermined
            }
        };
        (last, status)
    };

    Ok(ConditionEstimate {
        id,
        values,
        statistic,
        trend_slope,
        status,
    })
}
