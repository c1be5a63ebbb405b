//! The two worked separations and a combined report.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    check_exact_inequality, check_implication, search_counterexamples, CheckMode, ExactReport,
    ImplicationReport, Outcome, SearchReport, SearchScope, TheoremCase,
};
use crate::analysis::{
    classify_order, default_grid, estimate_critical_order, power_of_two_grid, trace, verdict,
    Decision, Functional, Verdict,
};
use crate::error::Result;
use crate::lambda::LambdaSpec;
use crate::partial_metric::PartialMetricSpec;
use crate::sequences::SequenceSpec;

/// Orders at which both examples are classified.
pub const SPLIT_ORDERS: [f64; 5] = [0.25, 0.4, 0.6, 0.75, 1.0];

/// Both examples switch from divergent to vanishing defects at this order.
pub const SPLIT_AT: f64 = 0.5;

const EPS: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleEntry {
    pub example: String,
    pub metric: String,
    pub lambda: Option<String>,
    pub alpha: f64,
    pub expected: Decision,
    pub verdict: Verdict,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleSuiteReport {
    /// Fitted growth exponent of the square-indicator counting function.
    pub square_gamma_hat: f64,
    pub entries: Vec<ExampleEntry>,
    /// The nonnegative and nonpositive tail-block realizations got the same
    /// decision at every order and window.
    pub tail_block_agreement: bool,
    pub all_match: bool,
}

fn expected(alpha: f64) -> Decision {
    if alpha > SPLIT_AT {
        Decision::ConvergesToZero
    } else {
        Decision::Diverges
    }
}

/// Classifies the square indicator (statistical defect, default grid) and
/// the tail-block sequence (window defect on block ends `2^7..2^20`, for
/// identity and half-length windows, under both metrics) at every order
/// in [`SPLIT_ORDERS`].
pub fn example_suite(tol: f64) -> Result<ExampleSuiteReport> {
    let mut entries = Vec::new();
    let square = SequenceSpec::square_indicator();
    let grid = default_grid();
    let order = estimate_critical_order(&square, &PartialMetricSpec::Max, EPS, &grid)?;
    let gamma = order.gamma_hat.unwrap_or(f64::NAN);
    for alpha in SPLIT_ORDERS {
        let t = trace(
            &Functional::StatOrderAlpha { alpha, eps: EPS },
            &square,
            &PartialMetricSpec::Max,
            &grid,
        )?;
        let v = verdict(&t, tol)?;
        let exp = expected(alpha);
        entries.push(ExampleEntry {
            example: "square-indicator split".into(),
            metric: "max".into(),
            lambda: None,
            alpha,
            expected: exp,
            matches: v.decision == exp && classify_order(gamma, alpha) == exp,
            verdict: v,
        });
    }

    let blocks = power_of_two_grid(7, 20);
    let mut agreement = true;
    for lambda in [LambdaSpec::Identity, LambdaSpec::Affine { slope: 0.5 }] {
        for alpha in SPLIT_ORDERS {
            let functional = Functional::LambdaStatOrderAlpha {
                lambda: lambda.clone(),
                alpha,
                eps: EPS,
            };
            let mut decisions = Vec::new();
            for (metric, negate) in [
                (PartialMetricSpec::NegMin, true),
                (PartialMetricSpec::Max, false),
            ] {
                let seq = SequenceSpec::tail_block(lambda.clone(), negate);
                let v = verdict(&trace(&functional, &seq, &metric, &blocks)?, tol)?;
                let exp = expected(alpha);
                decisions.push(v.decision);
                entries.push(ExampleEntry {
                    example: "tail-block split".into(),
                    metric: metric.name().into(),
                    lambda: Some(lambda.label()),
                    alpha,
                    expected: exp,
                    matches: v.decision == exp,
                    verdict: v,
                });
            }
            agreement &= decisions[0] == decisions[1];
        }
    }

    let gamma_ok = (gamma - SPLIT_AT).abs() <= 0.02;
    Ok(ExampleSuiteReport {
        square_gamma_hat: gamma,
        all_match: gamma_ok && agreement && entries.iter().all(|e| e.matches),
        entries,
        tail_block_agreement: agreement,
    })
}

/// Everything the `theorems` command produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub examples: Option<ExampleSuiteReport>,
    pub exact: Vec<ExactReport>,
    pub implications: Vec<ImplicationReport>,
    pub search: Option<SearchReport>,
}

impl SuiteReport {
    /// No exact violation, no failed implication, a clean search and
    /// matching examples.
    pub fn passed(&self) -> bool {
        self.exact.iter().all(|r| r.holds)
            && self
                .implications
                .iter()
                .all(|r| r.outcome != Outcome::Fails)
            && self.search.as_ref().is_none_or(|s| s.clean())
            && self.examples.as_ref().is_none_or(|e| e.all_match)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if !self.exact.is_empty() {
            let _ = writeln!(
                out,
                "{:<8} {:<10} {:>6} {:>12}  status",
                "id", "mode", "points", "violation"
            );
            for r in &self.exact {
                let _ = writeln!(
                    out,
                    "{:<8} {:<10} {:>6} {:>12.3e}  {}",
                    r.id.as_str(),
                    "exact",
                    r.points_checked,
                    r.max_violation,
                    if r.holds { "holds" } else { "VIOLATED" }
                );
            }
        }
        for r in &self.implications {
            let conds: Vec<String> = r
                .conditions
                .iter()
                .map(|c| format!("{}={:?}", c.id, c.status))
                .collect();
            let _ = writeln!(
                out,
                "{:<8} {:<10} {:?}{}{}",
                r.id.as_str(),
                "verdict",
                r.outcome,
                if conds.is_empty() {
                    String::new()
                } else {
                    format!(" [{}]", conds.join(", "))
                },
                if r.separated { " separated" } else { "" }
            );
        }
        if let Some(s) = &self.search {
            let _ = writeln!(
                out,
                "search seed={} trials={} exact={} verdict={} rejected={} undetermined={} max_violation={:.3e} violations={} failures={}",
                s.seed,
                s.trials,
                s.exact_cases,
                s.implication_cases,
                s.rejected,
                s.undetermined,
                s.max_violation,
                s.violations.len(),
                s.implication_failures.len()
            );
        }
        if let Some(e) = &self.examples {
            let _ = writeln!(out, "square-indicator gamma_hat={:.4}", e.square_gamma_hat);
            for entry in &e.entries {
                let _ = writeln!(
                    out,
                    "{:<24} {:<8} {:<12} alpha={:<5} {:?} (expected {:?}){}",
                    entry.example,
                    entry.metric,
                    entry.lambda.as_deref().unwrap_or("-"),
                    entry.alpha,
                    entry.verdict.decision,
                    entry.expected,
                    if entry.matches { "" } else { "  MISMATCH" }
                );
            }
            let _ = writeln!(
                out,
                "tail-block realizations agree: {}",
                e.tail_block_agreement
            );
        }
        let _ = writeln!(out, "{}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

/// Runs each case in its own mode, then the optional search and examples.
pub fn run_suite(
    cases: &[TheoremCase],
    grid: &[usize],
    tol: f64,
    search: Option<(u64, usize, SearchScope)>,
    examples: bool,
) -> Result<SuiteReport> {
    let mut report = SuiteReport {
        examples: None,
        exact: Vec::new(),
        implications: Vec::new(),
        search: None,
    };
    for case in cases {
        match case.mode {
            CheckMode::ExactInequality => report.exact.push(check_exact_inequality(case, grid)?),
            CheckMode::VerdictImplication => report
                .implications
                .push(check_implication(case, grid, tol)?),
        }
    }
    if let Some((seed, trials, scope)) = search {
        report.search = Some(search_counterexamples(seed, trials, &scope)?);
    }
    if examples {
        report.examples = Some(example_suite(tol)?);
    }
    Ok(report)
}
