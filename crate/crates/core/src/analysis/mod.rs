//! Defect functionals, grid traces and verdicts.
//!
//! Each convergence notion is `lim_{n→∞} defect(n) = 0` for one of four
//! defects:
//!
//! | functional            | defect at n                                   |
//! |-----------------------|-----------------------------------------------|
//! | `StatOrderAlpha`      | `|{k ≤ n : dev_k ≥ ε}| / n^α`                 |
//! | `LambdaStatOrderAlpha`| `|{k ∈ I_n : dev_k ≥ ε}| / λ_n^α`             |
//! | `CesaroOrderAlpha`    | `Σ_{k ≤ n} dev_k^q / n^α`                     |
//! | `VLambdaOrderAlpha`   | `Σ_{k ∈ I_n} dev_k / λ_n^α`                   |
//!
//! where `dev_k = |ρ(x_k, x) − ρ(x, x)|`. Counts are exact integers; the
//! division by `n^α` or `λ_n^α` is the only rounding step for counting
//! defects. Sums use compensated summation.

mod fit;
mod sum;
mod verdict;

use std::io::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lambda::{check_alpha, pow_alpha, LambdaSeq, LambdaSpec};
use crate::partial_metric::PartialMetricSpec;
use crate::sequences::SequenceSpec;

pub use fit::{least_squares, LinearFit};
pub use sum::CompensatedSum;
pub use verdict::{
    classify_order, estimate_critical_order, verdict, Decision, Verdict, VerdictBasis, DEFAULT_TOL,
    MIN_R2, TREND_MARGIN,
};

/// Largest admissible Cesàro exponent.
pub const MAX_Q: f64 = 32.0;

/// `{10², 10³, 10⁴, 10⁵, 10⁶}`.
pub fn default_grid() -> Vec<usize> {
    vec![100, 1_000, 10_000, 100_000, 1_000_000]
}

/// `2^lo, 2^{lo+1}, …, 2^hi`.
pub fn power_of_two_grid(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|j| 1usize << j).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "functional", rename_all = "snake_case")]
pub enum Functional {
    StatOrderAlpha {
        alpha: f64,
        eps: f64,
    },
    LambdaStatOrderAlpha {
        lambda: LambdaSpec,
        alpha: f64,
        eps: f64,
    },
    CesaroOrderAlpha {
        alpha: f64,
        q: f64,
    },
    VLambdaOrderAlpha {
        lambda: LambdaSpec,
        alpha: f64,
    },
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "eps must be positive, got {eps}"
        )))
    }
}

pub(crate) fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q <= MAX_Q {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "q must lie in (0, {MAX_Q}], got {q}"
        )))
    }
}

impl Functional {
    pub fn alpha(&self) -> f64 {
        match self {
            Functional::StatOrderAlpha { alpha, .. }
            | Functional::LambdaStatOrderAlpha { alpha, .. }
            | Functional::CesaroOrderAlpha { alpha, .. }
            | Functional::VLambdaOrderAlpha { alpha, .. } => *alpha,
        }
    }

    pub fn lambda(&self) -> Option<&LambdaSpec> {
        match self {
            Functional::LambdaStatOrderAlpha { lambda, .. }
            | Functional::VLambdaOrderAlpha { lambda, .. } => Some(lambda),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha())?;
        match self {
            Functional::StatOrderAlpha { eps, .. }
            | Functional::LambdaStatOrderAlpha { eps, .. } => check_eps(*eps),
            Functional::CesaroOrderAlpha { q, .. } => check_q(*q),
            Functional::VLambdaOrderAlpha { .. } => Ok(()),
        }
    }

    /// Short stable name, usable in file names.
    pub fn label(&self) -> String {
        match self {
            Functional::StatOrderAlpha { alpha, eps } => format!("stat_a{alpha}_e{eps}"),
            Functional::LambdaStatOrderAlpha { alpha, eps, .. } => {
                format!("lambda_stat_a{alpha}_e{eps}")
            }
            Functional::CesaroOrderAlpha { alpha, q } => format!("cesaro_a{alpha}_q{q}"),
            Functional::VLambdaOrderAlpha { alpha, .. } => format!("v_lambda_a{alpha}"),
        }
    }
}

/// Deviations `dev_k` for `k = 1..=n_max`, computed once and shared by
/// every functional evaluated on the same sequence.
#[derive(Debug, Clone)]
pub struct Deviations {
    values: Vec<f64>,
    source: String,
}

impl Deviations {
    pub fn new(seq: &SequenceSpec, metric: &PartialMetricSpec, n_max: usize) -> Result<Self> {
        let values = seq
            .terms(n_max)?
            .into_iter()
            .map(|xk| metric.deviation(xk, seq.limit))
            .collect::<Result<Vec<_>>>()?;
        let source = serde_json::to_string(&(seq, metric)).expect("specs serialize");
        Ok(Deviations { values, source })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `dev_k`, 1-based.
    pub fn get(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// `prefix[n] = |{k ≤ n : dev_k ≥ ε}|`, with `prefix[0] = 0`.
    pub fn exceedance_prefix(&self, eps: f64) -> Vec<u64> {
        let mut prefix = Vec::with_capacity(self.values.len() + 1);
        let mut count = 0u64;
        prefix.push(0);
        for &d in &self.values {
            if d >= eps {
                count += 1;
            }
            prefix.push(count);
        }
        prefix
    }

    /// `Σ_{k=lo}^{hi} dev_k^q`.
    pub fn power_sum(&self, lo: usize, hi: usize, q: f64) -> f64 {
        self.values[lo - 1..hi]
            .iter()
            .map(|&d| pow_q(d, q))
            .collect::<CompensatedSum>()
            .value()
    }

    /// `Σ_{k=lo}^{hi} dev_k^q` restricted to `dev_k ≥ ε`.
    pub fn power_sum_exceeding(&self, lo: usize, hi: usize, q: f64, eps: f64) -> f64 {
        self.values[lo - 1..hi]
            .iter()
            .filter(|&&d| d >= eps)
            .map(|&d| pow_q(d, q))
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn max(&self, lo: usize, hi: usize) -> f64 {
        self.values[lo - 1..hi].iter().copied().fold(0.0, f64::max)
    }

    fn config_hash(&self, functional: &Functional) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.source.as_bytes());
        hasher.update(serde_json::to_string(functional).expect("functional serializes"));
        hex::encode(&hasher.finalize()[..8])
    }
}

pub(crate) fn pow_q(d: f64, q: f64) -> f64 {
    if q == 1.0 {
        d
    } else {
        d.powf(q)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub n: usize,
    /// Exceedance count or deviation sum before scaling.
    pub numerator: f64,
    /// `n^α` or `λ_n^α`.
    pub scale: f64,
    pub value: f64,
}

/// Defect values of one functional on an index grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectTrace {
    pub functional: Functional,
    pub points: Vec<TracePoint>,
    pub config_hash: String,
}

impl DefectTrace {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.value).collect()
    }

    /// CSV with header `n,value`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,value")?;
        for p in &self.points {
            writeln!(w, "{},{}", p.n, p.value)?;
        }
        Ok(())
    }

    /// CSV with header `log_n,log_value`; zero values are omitted.
    pub fn write_log_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "log_n,log_value")?;
        for p in self.points.iter().filter(|p| p.value > 0.0) {
            writeln!(w, "{},{}", (p.n as f64).ln(), p.value.ln())?;
        }
        Ok(())
    }
}

fn check_grid(grid: &[usize]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("n_grid is empty".into()));
    }
    if grid[0] == 0 {
        return Err(Error::InvalidParameter(
            "n_grid entries must be at least 1".into(),
        ));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "n_grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Evaluates `functional` at every grid index in one forward pass.
pub fn trace(
    functional: &Functional,
    seq: &SequenceSpec,
    metric: &PartialMetricSpec,
    grid: &[usize],
) -> Result<DefectTrace> {
    functional.validate()?;
    check_grid(grid)?;
    let devs = Deviations::new(seq, metric, *grid.last().unwrap())?;
    trace_with(&devs, functional, grid)
}

/// As [`trace`], over precomputed deviations.
pub fn trace_with(
    devs: &Deviations,
    functional: &Functional,
    grid: &[usize],
) -> Result<DefectTrace> {
    functional.validate()?;
    check_grid(grid)?;
    let n_max = *grid.last().unwrap();
    if n_max > devs.len() {
        return Err(Error::InvalidParameter(format!(
            "grid reaches n={n_max} but only {} deviations are available",
            devs.len()
        )));
    }
    let mut points = Vec::with_capacity(grid.len());
    let mut push = |n: usize, numerator: f64, scale: f64| {
        points.push(TracePoint {
            n,
            numerator,
            scale,
            value: numerator / scale,
        })
    };
    match functional {
        Functional::StatOrderAlpha { alpha, eps } => {
            let prefix = devs.exceedance_prefix(*eps);
            for &n in grid {
                push(n, prefix[n] as f64, pow_alpha(n as f64, *alpha));
            }
        }
        Functional::CesaroOrderAlpha { alpha, q } => {
            let mut acc = CompensatedSum::new();
            let mut k = 0;
            for &n in grid {
                while k < n {
                    acc.add(pow_q(devs.values[k], *q));
                    k += 1;
                }
                push(n, acc.value(), pow_alpha(n as f64, *alpha));
            }
        }
        Functional::LambdaStatOrderAlpha { lambda, alpha, eps } => {
            let lam = LambdaSeq::new(lambda, n_max)?;
            let prefix = devs.exceedance_prefix(*eps);
            for &n in grid {
                let w = lam.window(n)?;
                let count = prefix[n] - prefix[w.lo - 1];
                push(n, count as f64, lam.power(n, *alpha)?);
            }
        }
        Functional::VLambdaOrderAlpha { lambda, alpha } => {
            let lam = LambdaSeq::new(lambda, n_max)?;
            for &n in grid {
                let w = lam.window(n)?;
                push(n, devs.power_sum(w.lo, n, 1.0), lam.power(n, *alpha)?);
            }
        }
    }
    Ok(DefectTrace {
        config_hash: devs.config_hash(functional),
        functional: functional.clone(),
        points,
    })
}

fn single(
    functional: Functional,
    seq: &SequenceSpec,
    metric: &PartialMetricSpec,
    n: usize,
) -> Result<f64> {
    Ok(trace(&functional, seq, metric, &[n])?.points[0].value)
}

/// `|{k ≤ n : dev_k ≥ ε}| / n^α`.
pub fn stat_defect(
    seq: &SequenceSpec,
    metric: &PartialMetricSpec,
    alpha: f64,
    eps: f64,
    n: usize,
) -> Result<f64> {
    single(Functional::StatOrderAlpha { alpha, eps }, seq, metric, n)
}

/// `|{k ∈ I_n : dev_k ≥ ε}| / λ_n^α`.
pub fn lambda_stat_defect(
    seq: &SequenceSpec,
    metric: &PartialMetricSpec,
    lambda: &LambdaSpec,
    alpha: f64,
    eps: f64,
    n: usize,
) -> Result<f64> {
    single(
        Functional::LambdaStatOrderAlpha {
            lambda: lambda.clone(),
            alpha,
            eps,
        },
        seq,
        metric,
        n,
    )
}

/// `Σ_{k ≤ n} dev_k^q / n^α`.
pub fn cesaro_defect(
    seq: &SequenceSpec,
    metric: &PartialMetricSpec,
    alpha: f64,
    q: f64,
    n: usize,
) -> Result<f64> {
    single(Functional::CesaroOrderAlpha { alpha, q }, seq, metric, n)
}

/// `Σ_{k ∈ I_n} dev_k / λ_n^α`.
pub fn v_lambda_defect(
    seq: &SequenceSpec,
    metric: &PartialMetricSpec,
    lambda: &LambdaSpec,
    alpha: f64,
    n: usize,
) -> Result<f64> {
    single(
        Functional::VLambdaOrderAlpha {
            lambda: lambda.clone(),
            alpha,
        },
        seq,
        metric,
        n,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq() -> SequenceSpec {
        SequenceSpec::square_indicator()
    }

    const MAX: PartialMetricSpec = PartialMetricSpec::Max;

    #[test]
    fn stat_defect_examples() {
        assert_eq!(stat_defect(&sq(), &MAX, 0.5, 0.5, 100).unwrap(), 1.0);
        assert_eq!(stat_defect(&sq(), &MAX, 1.0, 0.5, 100).unwrap(), 0.1);
        let zero = SequenceSpec::constant(0.0);
        assert_eq!(stat_defect(&zero, &MAX, 0.3, 0.01, 1000).unwrap(), 0.0);
        assert_eq!(
            stat_defect(&zero, &PartialMetricSpec::Usual, 0.9, 2.0, 10).unwrap(),
            0.0
        );
    }

    #[test]
    fn lambda_stat_examples() {
        let id = LambdaSpec::Identity;
        assert_eq!(
            lambda_stat_defect(&sq(), &MAX, &id, 1.0, 0.5, 100).unwrap(),
            0.1
        );
        let table = LambdaSpec::table(vec![1.0, 2.0, 3.0, 3.0, 3.0]);
        // window {3, 4, 5} holds the square 4; λ_5 = 3
        assert_eq!(
            lambda_stat_defect(&sq(), &MAX, &table, 1.0, 0.5, 5).unwrap(),
            1.0 / 3.0
        );
        let zero = SequenceSpec::constant(0.0);
        assert_eq!(
            lambda_stat_defect(&zero, &MAX, &LambdaSpec::Logarithmic, 0.4, 0.1, 500).unwrap(),
            0.0
        );
    }

    #[test]
    fn cesaro_examples() {
        assert_eq!(cesaro_defect(&sq(), &MAX, 1.0, 1.0, 100).unwrap(), 0.1);
        assert_eq!(cesaro_defect(&sq(), &MAX, 1.0, 2.0, 100).unwrap(), 0.1);
        assert_eq!(
            cesaro_defect(&SequenceSpec::constant(0.0), &MAX, 0.5, 3.0, 100).unwrap(),
            0.0
        );
    }

    #[test]
    fn v_lambda_examples() {
        assert_eq!(
            v_lambda_defect(&sq(), &MAX, &LambdaSpec::Identity, 1.0, 100).unwrap(),
            0.1
        );
        let table = LambdaSpec::table(vec![1.0, 2.0, 3.0, 3.0, 3.0]);
        assert_eq!(
            v_lambda_defect(&sq(), &MAX, &table, 1.0, 5).unwrap(),
            1.0 / 3.0
        );
        assert_eq!(
            v_lambda_defect(&SequenceSpec::constant(0.0), &MAX, &table, 0.5, 5).unwrap(),
            0.0
        );
    }

    #[test]
    fn trace_examples() {
        let t = trace(
            &Functional::StatOrderAlpha {
                alpha: 1.0,
                eps: 0.5,
            },
            &sq(),
            &MAX,
            &[100, 10_000, 1_000_000],
        )
        .unwrap();
        assert_eq!(t.values(), vec![0.1, 0.01, 0.001]);

        let t = trace(
            &Functional::CesaroOrderAlpha { alpha: 1.0, q: 1.0 },
            &SequenceSpec::constant(0.0),
            &MAX,
            &[3, 30, 300],
        )
        .unwrap();
        assert!(t.values().iter().all(|&v| v == 0.0));

        let t = trace(
            &Functional::LambdaStatOrderAlpha {
                lambda: LambdaSpec::Identity,
                alpha: 0.5,
                eps: 0.5,
            },
            &sq(),
            &MAX,
            &[100, 10_000],
        )
        .unwrap();
        assert_eq!(t.values(), vec![1.0, 1.0]);
    }

    #[test]
    fn grid_and_parameter_errors() {
        let f = Functional::StatOrderAlpha {
            alpha: 1.0,
            eps: 0.5,
        };
        assert!(trace(&f, &sq(), &MAX, &[10, 10]).is_err());
        assert!(trace(&f, &sq(), &MAX, &[]).is_err());
        assert!(trace(&f, &sq(), &MAX, &[0, 4]).is_err());
        let bad_eps = Functional::StatOrderAlpha {
            alpha: 1.0,
            eps: 0.0,
        };
        assert!(matches!(
            trace(&bad_eps, &sq(), &MAX, &[10]),
            Err(Error::InvalidParameter(_))
        ));
        let bad_q = Functional::CesaroOrderAlpha {
            alpha: 1.0,
            q: 33.0,
        };
        assert!(trace(&bad_q, &sq(), &MAX, &[10]).is_err());
        let bad_alpha = Functional::CesaroOrderAlpha { alpha: 0.0, q: 1.0 };
        assert!(trace(&bad_alpha, &sq(), &MAX, &[10]).is_err());
    }

    #[test]
    fn domain_errors_propagate() {
        let neg = SequenceSpec::constant(-1.0);
        let f = Functional::StatOrderAlpha {
            alpha: 1.0,
            eps: 0.5,
        };
        assert!(matches!(
            trace(&f, &neg, &MAX, &[10]),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn invalid_lambda_is_a_validation_error() {
        let f = Functional::VLambdaOrderAlpha {
            lambda: LambdaSpec::table(vec![1.0, 2.5, 3.0]),
            alpha: 1.0,
        };
        assert!(matches!(
            trace(&f, &sq(), &MAX, &[3]),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn config_hash_distinguishes_functionals() {
        let a = trace(
            &Functional::StatOrderAlpha {
                alpha: 1.0,
                eps: 0.5,
            },
            &sq(),
            &MAX,
            &[10],
        )
        .unwrap();
        let b = trace(
            &Functional::StatOrderAlpha {
                alpha: 0.5,
                eps: 0.5,
            },
            &sq(),
            &MAX,
            &[10],
        )
        .unwrap();
        assert_ne!(a.config_hash, b.config_hash);
        assert_eq!(a.config_hash.len(), 16);
    }

    #[test]
    fn csv_emission() {
        let t = trace(
            &Functional::StatOrderAlpha {
                alpha: 1.0,
                eps: 0.5,
            },
            &sq(),
            &MAX,
            &[10, 100],
        )
        .unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "n,value\n10,0.3\n100,0.1\n"
        );
        let mut buf = Vec::new();
        t.write_log_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .starts_with("log_n,log_value\n"));
    }
}
