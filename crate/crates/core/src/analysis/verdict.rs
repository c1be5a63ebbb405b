//! Finite-grid surrogates for `lim defect(n) = 0`.
//!
//! A trace is declared convergent on one of two grounds: the final value is
//! under the tolerance with a non-increasing tail, or the values follow a
//! clean power law with a negative exponent. Growth is declared on the
//! mirror-image grounds. Everything else is inconclusive.

use serde::{Deserialize, Serialize};

use super::fit::least_squares;
use super::{check_eps, check_grid, DefectTrace, Deviations};
use crate::error::{Error, Result};
use crate::partial_metric::PartialMetricSpec;
use crate::sequences::SequenceSpec;

pub const DEFAULT_TOL: f64 = 1e-2;

/// Minimum |log-log slope| for a power-law trend to count.
pub const TREND_MARGIN: f64 = 0.05;

/// Minimum R² for a log-log fit to count.
pub const MIN_R2: f64 = 0.9;

/// Growth factor over the first value that signals divergence.
const GROWTH_FACTOR: f64 = 10.0;

const MIN_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    ConvergesToZero,
    Diverges,
    Inconclusive,
}

/// Which rule produced the decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictBasis {
    /// Final value below tolerance and non-increasing tail.
    Threshold,
    PowerLawDecay,
    PowerLawGrowth,
    /// Tail exceeds ten times the first value while rising.
    Growth,
    /// Counting function vanishes on the whole grid.
    ZeroCount,
    /// Fitted critical order compared against α = 1.
    CriticalOrder,
    /// Contradictory or missing evidence.
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub decision: Decision,
    pub basis: VerdictBasis,
    /// Fitted growth exponent of the counting function (order estimates only).
    pub gamma_hat: Option<f64>,
    /// Log-log slope of the defect values (trace verdicts only).
    pub trend_slope: Option<f64>,
    pub fit_r2: Option<f64>,
    pub n_range: (usize, usize),
    pub final_value: Option<f64>,
}

/// Decision for a trace at tolerance `tol`.
///
/// * `ConvergesToZero` when the last value is `< tol` and the value-vs-`ln n`
///   slope over the last half is `≤ 0`, or when a log-log fit over the
///   trailing positive values (at least three, covering the last half) has
///   slope `≤ −0.05` and `R² ≥ 0.9`.
/// * `Diverges` when that fit has slope `≥ 0.05` and `R² ≥ 0.9`, or when the
///   last half exceeds ten times the first value with a positive slope.
/// * `Inconclusive` otherwise, including when both sides fire.
pub fn verdict(trace: &DefectTrace, tol: f64) -> Result<Verdict> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive, got {tol}"
        )));
    }
    let pts = &trace.points;
    if pts.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "verdict needs at least {MIN_POINTS} grid points, got {}",
            pts.len()
        )));
    }
    let half = pts.len() / 2;
    let tail = &pts[half..];
    let ln_n: Vec<f64> = pts.iter().map(|p| (p.n as f64).ln()).collect();
    let values: Vec<f64> = pts.iter().map(|p| p.value).collect();
    let final_value = *values.last().unwrap();

    let tail_slope = least_squares(&ln_n[half..], &values[half..])
        .map(|f| f.slope)
        .unwrap_or(0.0);

    let positive_from = values
        .iter()
        .rposition(|&v| v.is_nan() || v <= 0.0)
        .map_or(0, |i| i + 1);
    let power_fit = if positive_from <= half && pts.len() - positive_from >= 3 {
        let logs: Vec<f64> = values[positive_from..].iter().map(|v| v.ln()).collect();
        least_squares(&ln_n[positive_from..], &logs)
    } else {
        None
    };
    let clean = |r2: f64| r2 >= MIN_R2;

    let threshold = final_value < tol && tail_slope <= 0.0;
    let decay = power_fit.is_some_and(|f| f.slope <= -TREND_MARGIN && clean(f.r2));
    let growth_law = power_fit.is_some_and(|f| f.slope >= TREND_MARGIN && clean(f.r2));
    let tail_max = tail
        .iter()
        .map(|p| p.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let blowup = tail_max > GROWTH_FACTOR * values[0] && tail_slope > 0.0;

    let converges = threshold || decay;
    let diverges = growth_law || blowup;
    let (decision, basis) = match (converges, diverges) {
        (true, false) if threshold => (Decision::ConvergesToZero, VerdictBasis::Threshold),
        (true, false) => (Decision::ConvergesToZero, VerdictBasis::PowerLawDecay),
        (false, true) if growth_law => (Decision::Diverges, VerdictBasis::PowerLawGrowth),
        (false, true) => (Decision::Diverges, VerdictBasis::Growth),
        _ => (Decision::Inconclusive, VerdictBasis::Undecided),
    };
    Ok(Verdict {
        decision,
        basis,
        gamma_hat: None,
        trend_slope: power_fit.map(|f| f.slope),
        fit_r2: power_fit.map(|f| f.r2),
        n_range: (pts[0].n, pts[pts.len() - 1].n),
        final_value: Some(final_value),
    })
}

/// Membership of the order-α class given a critical order `gamma`.
///
/// The order-α defect behaves like `n^{γ − α}`, so it vanishes for
/// `α > γ` and does not for `α < γ`. A band of ±0.05 around `γ` is left
/// undecided.
pub fn classify_order(gamma: f64, alpha: f64) -> Decision {
    if alpha > gamma + TREND_MARGIN {
        Decision::ConvergesToZero
    } else if alpha < gamma - TREND_MARGIN {
        Decision::Diverges
    } else {
        Decision::Inconclusive
    }
}

/// Fits `log C(n, ε) ≈ γ̂ log n + c` over the grid.
///
/// The grid needs at least four points spanning two decades. The
/// returned decision is [`classify_order`] at α = 1, i.e. ordinary
/// statistical convergence; use `gamma_hat` with [`classify_order`] for
/// other orders. A counting function that vanishes at the largest n gives
/// `γ̂ = 0` and `ConvergesToZero`.
pub fn estimate_critical_order(
    seq: &SequenceSpec,
    metric: &PartialMetricSpec,
    eps: f64,
    grid: &[usize],
) -> Result<Verdict> {
    check_eps(eps)?;
    check_grid(grid)?;
    if grid.len() < MIN_POINTS {
        return Err(Error::InsufficientData(format!(
            "order estimate needs at least {MIN_POINTS} grid points, got {}",
            grid.len()
        )));
    }
    let (lo, hi) = (grid[0], *grid.last().unwrap());
    if (hi as f64) < 100.0 * lo as f64 {
        return Err(Error::InsufficientData(format!(
            "grid {lo}..{hi} spans less than two decades"
        )));
    }
    let devs = Deviations::new(seq, metric, hi)?;
    let prefix = devs.exceedance_prefix(eps);
    let counts: Vec<u64> = grid.iter().map(|&n| prefix[n]).collect();
    let base = Verdict {
        decision: Decision::Inconclusive,
        basis: VerdictBasis::Undecided,
        gamma_hat: None,
        trend_slope: None,
        fit_r2: None,
        n_range: (lo, hi),
        final_value: Some(*counts.last().unwrap() as f64),
    };
    if *counts.last().unwrap() == 0 {
        return Ok(Verdict {
            decision: Decision::ConvergesToZero,
            basis: VerdictBasis::ZeroCount,
            gamma_hat: Some(0.0),
            ..base
        });
    }
    // prefix counts are non-decreasing, so the positive points form a suffix
    let first = counts.iter().position(|&c| c > 0).unwrap();
    let xs: Vec<f64> = grid[first..].iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = counts[first..].iter().map(|&c| (c as f64).ln()).collect();
    let Some(fit) = least_squares(&xs, &ys) else {
        return Ok(base);
    };
    Ok(Verdict {
        decision: classify_order(fit.slope, 1.0),
        basis: VerdictBasis::CriticalOrder,
        gamma_hat: Some(fit.slope),
        fit_r2: Some(fit.r2),
        ..base
    })
}

#[cfg(test)]
mod tests {
    use super::super::{default_grid, trace, Functional, TracePoint};
    use super::*;

    fn stat_trace(seq: &SequenceSpec, alpha: f64) -> DefectTrace {
        trace(
            &Functional::StatOrderAlpha { alpha, eps: 0.5 },
            seq,
            &PartialMetricSpec::Max,
            &default_grid(),
        )
        .unwrap()
    }

    #[test]
    fn square_indicator_order_one_converges() {
        let v = verdict(&stat_trace(&SequenceSpec::square_indicator(), 1.0), 1e-2).unwrap();
        assert_eq!(v.decision, Decision::ConvergesToZero);
        assert_eq!(v.basis, VerdictBasis::Threshold);
    }

    #[test]
    fn square_indicator_low_order_diverges() {
        let v = verdict(&stat_trace(&SequenceSpec::square_indicator(), 0.4), 1e-2).unwrap();
        assert_eq!(v.decision, Decision::Diverges);
        let slope = v.trend_slope.unwrap();
        assert!((slope - 0.1).abs() < 0.01, "{slope}");
    }

    #[test]
    fn square_indicator_critical_order_is_undecided() {
        let v = verdict(&stat_trace(&SequenceSpec::square_indicator(), 0.5), 1e-2).unwrap();
        assert_eq!(v.decision, Decision::Inconclusive);
    }

    #[test]
    fn constant_zero_converges() {
        let v = verdict(&stat_trace(&SequenceSpec::constant(0.0), 0.3), 1e-2).unwrap();
        assert_eq!(v.decision, Decision::ConvergesToZero);
        assert!(v.trend_slope.is_none());
    }

    #[test]
    fn too_few_points() {
        let t = trace(
            &Functional::StatOrderAlpha {
                alpha: 1.0,
                eps: 0.5,
            },
            &SequenceSpec::square_indicator(),
            &PartialMetricSpec::Max,
            &[10, 100, 1000],
        )
        .unwrap();
        assert!(matches!(verdict(&t, 1e-2), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn blowup_without_power_law() {
        let mut t = stat_trace(&SequenceSpec::square_indicator(), 1.0);
        let vals = [0.0, 0.0, 0.0, 0.5, 3.0];
        for (p, v) in t.points.iter_mut().zip(vals) {
            *p = TracePoint { value: v, ..*p };
        }
        let v = verdict(&t, 1e-2).unwrap();
        assert_eq!(v.decision, Decision::Diverges);
        assert_eq!(v.basis, VerdictBasis::Growth);
    }

    #[test]
    fn critical_order_examples() {
        let grid = default_grid();
        let v = estimate_critical_order(
            &SequenceSpec::square_indicator(),
            &PartialMetricSpec::Max,
            0.5,
            &grid,
        )
        .unwrap();
        assert!((v.gamma_hat.unwrap() - 0.5).abs() <= 0.02);
        assert_eq!(v.decision, Decision::ConvergesToZero);

        let v = estimate_critical_order(
            &SequenceSpec::constant(0.0),
            &PartialMetricSpec::Max,
            0.5,
            &grid,
        )
        .unwrap();
        assert_eq!(v.gamma_hat, Some(0.0));
        assert_eq!(v.decision, Decision::ConvergesToZero);

        let v = estimate_critical_order(
            &SequenceSpec::polynomial_exceptions(0.7, 1.0),
            &PartialMetricSpec::Max,
            0.5,
            &grid,
        )
        .unwrap();
        assert!((v.gamma_hat.unwrap() - 0.7).abs() <= 0.02);
    }

    #[test]
    fn critical_order_grid_requirements() {
        let seq = SequenceSpec::square_indicator();
        let m = PartialMetricSpec::Max;
        assert!(matches!(
            estimate_critical_order(&seq, &m, 0.5, &[100, 1000, 10_000]),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            estimate_critical_order(&seq, &m, 0.5, &[100, 200, 400, 800]),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn classify_bands() {
        assert_eq!(classify_order(0.5, 0.75), Decision::ConvergesToZero);
        assert_eq!(classify_order(0.5, 0.25), Decision::Diverges);
        assert_eq!(classify_order(0.5, 0.52), Decision::Inconclusive);
    }
}
