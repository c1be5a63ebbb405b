//! Executable checks for the inclusion results between the sequence classes.
//!
//! Every result is checked two ways. [`check_exact_inequality`] evaluates,
//! at each grid index, the finite-n inequalities that the limit argument is
//! built from; these must hold up to rounding. [`check_implication`]
//! compares verdicts: if the premise defect is judged to vanish, the
//! conclusion defect must be judged to vanish too. Inconclusive verdicts
//! leave a case undetermined, never failed.

mod conditions;
mod exact;
mod implication;
mod search;
mod suite;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{check_eps, check_q, default_grid};
use crate::error::{Error, Result};
use crate::lambda::{check_alpha, LambdaSeq, LambdaSpec};
use crate::partial_metric::PartialMetricSpec;
use crate::sequences::SequenceSpec;

pub use conditions::{
    estimate_condition, ConditionEstimate, ConditionId, Tri, LIMINF_MARGIN, LIMIT_TOL,
};
pub use exact::{check_exact_inequality, ExactReport, LinkResult, VIOLATION_LIMIT};
pub use implication::{check_implication, Direction, ImplicationReport, Outcome};
pub use search::{random_case, run_trial, Finding, TrialOutcome};
pub use search::{search_counterexamples, SearchReport, SearchScope};
pub use suite::{
    example_suite, run_suite, ExampleEntry, ExampleSuiteReport, SuiteReport, SPLIT_AT, SPLIT_ORDERS,
};

/// Identifiers of the checked results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TheoremId {
    T2_2,
    C2_4,
    C2_5,
    T2_7,
    C2_8,
    T3_2,
    C3_4,
    T3_5,
    T3_6i,
    T3_6ii,
    C3_7,
    C3_8,
    T3_10i,
    T3_10ii,
    C3_11,
    C3_12,
    T3_13i,
    T3_13ii,
    C3_14,
    C3_15,
}

/// Which inequality chain a result reduces to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Family {
    /// `stat(β) ≤ stat(α)`.
    Order,
    /// Cesàro sum bounds ε^q times the exceedance count.
    Chebyshev,
    /// `λstat(β) ≤ λstat(α)`.
    LambdaOrder,
    /// Window count bounded by prefix count.
    PrefixWindow,
    /// `I_n ⊂ J_n` for counts.
    WindowInclusion,
    /// Count over `J_n` split into `J_n \ I_n` and `I_n`.
    WindowSplit,
    /// `I_n ⊂ J_n` for deviation sums.
    SumInclusion,
    /// Deviation sum over `J_n` split into `J_n \ I_n` and `I_n`.
    SumSplit,
    /// Deviation sum over `J_n` bounds ε times the window count.
    SumOverCount,
    /// Deviation sum over `J_n` bounded through the window count.
    CountOverSum,
}

impl TheoremId {
    pub const ALL: [TheoremId; 20] = [
        TheoremId::T2_2,
        TheoremId::C2_4,
        TheoremId::C2_5,
        TheoremId::T2_7,
        TheoremId::C2_8,
        TheoremId::T3_2,
        TheoremId::C3_4,
        TheoremId::T3_5,
        TheoremId::T3_6i,
        TheoremId::T3_6ii,
        TheoremId::C3_7,
        TheoremId::C3_8,
        TheoremId::T3_10i,
        TheoremId::T3_10ii,
        TheoremId::C3_11,
        TheoremId::C3_12,
        TheoremId::T3_13i,
        TheoremId::T3_13ii,
        TheoremId::C3_14,
        TheoremId::C3_15,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::T2_2 => "T2.2",
            TheoremId::C2_4 => "C2.4",
            TheoremId::C2_5 => "C2.5",
            TheoremId::T2_7 => "T2.7",
            TheoremId::C2_8 => "C2.8",
            TheoremId::T3_2 => "T3.2",
            TheoremId::C3_4 => "C3.4",
            TheoremId::T3_5 => "T3.5",
            TheoremId::T3_6i => "T3.6i",
            TheoremId::T3_6ii => "T3.6ii",
            TheoremId::C3_7 => "C3.7",
            TheoremId::C3_8 => "C3.8",
            TheoremId::T3_10i => "T3.10i",
            TheoremId::T3_10ii => "T3.10ii",
            TheoremId::C3_11 => "C3.11",
            TheoremId::C3_12 => "C3.12",
            TheoremId::T3_13i => "T3.13i",
            TheoremId::T3_13ii => "T3.13ii",
            TheoremId::C3_14 => "C3.14",
            TheoremId::C3_15 => "C3.15",
        }
    }

    pub(crate) fn family(&self) -> Family {
        use TheoremId::*;
        match self {
            T2_2 | C2_4 | C2_5 => Family::Order,
            T2_7 | C2_8 => Family::Chebyshev,
            T3_2 | C3_4 => Family::LambdaOrder,
            T3_5 => Family::PrefixWindow,
            T3_6i | C3_7 => Family::WindowInclusion,
            T3_6ii | C3_8 => Family::WindowSplit,
            T3_10i | C3_11 => Family::SumInclusion,
            T3_10ii | C3_12 => Family::SumSplit,
            T3_13i | C3_14 => Family::SumOverCount,
            T3_13ii | C3_15 => Family::CountOverSum,
        }
    }

    /// The `(α, β)` a case is actually checked with: corollaries pin `β`.
    pub fn orders(&self, alpha: f64, beta: f64) -> (f64, f64) {
        use TheoremId::*;
        match self {
            C2_4 => (alpha, 1.0),
            C2_8 | C3_7 | C3_8 | C3_11 | C3_12 | C3_14 | C3_15 => (alpha, alpha),
            _ => (alpha, beta),
        }
    }

    pub fn uses_lambda(&self) -> bool {
        !matches!(self.family(), Family::Order | Family::Chebyshev)
    }

    pub fn uses_mu(&self) -> bool {
        !matches!(
            self.family(),
            Family::Order | Family::Chebyshev | Family::LambdaOrder | Family::PrefixWindow
        )
    }

    /// Conditions the result assumes on λ, μ, α, β.
    pub fn required_conditions(&self) -> &'static [ConditionId] {
        match self.family() {
            Family::PrefixWindow => &[ConditionId::C3_1],
            Family::WindowInclusion | Family::SumInclusion | Family::SumOverCount => {
                &[ConditionId::C3_2]
            }
            Family::WindowSplit | Family::SumSplit | Family::CountOverSum => {
                &[ConditionId::C3_3a, ConditionId::C3_3b]
            }
            _ => &[],
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParameter(format!("unknown theorem id `{s}`")))
    }
}

impl Serialize for TheoremId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for TheoremId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    ExactInequality,
    VerdictImplication,
}

/// One result bound to concrete parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCase {
    pub id: TheoremId,
    pub sequence: SequenceSpec,
    pub metric: PartialMetricSpec,
    pub lambda: LambdaSpec,
    pub mu: LambdaSpec,
    pub alpha: f64,
    /// Second order (`θ` for the Cesàro result).
    pub beta: f64,
    pub eps: f64,
    pub q: f64,
    /// Hypotheses and inequalities are required from this index on.
    pub n0: usize,
    pub mode: CheckMode,
}

impl TheoremCase {
    /// Square indicator under the max metric, λ = μ = identity,
    /// α = β = 1, ε = 1/2, q = 1.
    pub fn with_defaults(id: TheoremId, mode: CheckMode) -> Self {
        TheoremCase {
            id,
            sequence: SequenceSpec::square_indicator(),
            metric: PartialMetricSpec::Max,
            lambda: LambdaSpec::Identity,
            mu: LambdaSpec::Identity,
            alpha: 1.0,
            beta: 1.0,
            eps: 0.5,
            q: 1.0,
            n0: 1,
            mode,
        }
    }

    /// `(α, β)` after corollary specialization.
    pub fn orders(&self) -> (f64, f64) {
        self.id.orders(self.alpha, self.beta)
    }
}

/// Materialized λ and μ for a case, after hypothesis checks.
pub(crate) struct Weights {
    pub lambda: Option<LambdaSeq>,
    pub mu: Option<LambdaSeq>,
}

/// Checks the hypotheses of `case` on `1..=n_max`.
///
/// Returns the hypotheses that were checked, in words, together with the
/// materialized weights. Fails before any claim is evaluated.
pub(crate) fn check_hypotheses(case: &TheoremCase, n_max: usize) -> Result<(Vec<String>, Weights)> {
    let (alpha, beta) = case.orders();
    let mut checked = Vec::new();
    check_alpha(alpha)?;
    check_alpha(beta)?;
    if alpha > beta {
        return Err(Error::Hypothesis(format!(
            "orders must satisfy alpha <= beta, got alpha={alpha}, beta={beta}"
        )));
    }
    checked.push(format!("0 < alpha={alpha} <= beta={beta} <= 1"));
    check_eps(case.eps)?;
    check_q(case.q)?;
    if case.n0 == 0 {
        return Err(Error::InvalidParameter("n0 is a 1-based index".into()));
    }
    case.sequence.validate()?;

    let mut weights = Weights {
        lambda: None,
        mu: None,
    };
    if case.id.uses_lambda() {
        weights.lambda = Some(LambdaSeq::new(&case.lambda, n_max)?);
        checked.push(format!(
            "lambda={} in the class on 1..={n_max}",
            case.lambda.label()
        ));
    }
    if case.id.uses_mu() {
        let mu = LambdaSeq::new(&case.mu, n_max)?;
        let lam = weights.lambda.as_ref().expect("mu results also use lambda");
        for n in case.n0..=n_max {
            let (l, m) = (lam.values()[n - 1], mu.values()[n - 1]);
            if l > m {
                return Err(Error::Hypothesis(format!(
                    "lambda_n={l} exceeds mu_n={m} at n={n} (n0={})",
                    case.n0
                )));
            }
        }
        checked.push(format!(
            "mu={} in the class on 1..={n_max}",
            case.mu.label()
        ));
        checked.push(format!("lambda_n <= mu_n for {}..={n_max}", case.n0));
        weights.mu = Some(mu);
    }
    Ok((checked, weights))
}

pub(crate) fn check_case_grid(grid: &[usize]) -> Result<usize> {
    if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "n_grid must be non-empty, positive and strictly increasing".into(),
        ));
    }
    Ok(*grid.last().unwrap())
}

/// Grid used when none is supplied.
pub fn theorem_grid() -> Vec<usize> {
    default_grid()
}
