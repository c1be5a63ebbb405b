//! Seeded random search for counterexamples.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    check_exact_inequality, check_implication, CheckMode, Outcome, TheoremCase, TheoremId,
    VIOLATION_LIMIT,
};
use crate::analysis::DEFAULT_TOL;
use crate::error::{Error, Result};
use crate::lambda::LambdaSpec;
use crate::partial_metric::PartialMetricSpec;
use crate::sequences::{SequenceKind, SequenceSpec};

/// Which results and modes a search covers. Trials cycle through `ids`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchScope {
    pub ids: Vec<TheoremId>,
    pub modes: Vec<CheckMode>,
}

impl SearchScope {
    pub fn exact(ids: &[TheoremId]) -> Self {
        SearchScope {
            ids: ids.to_vec(),
            modes: vec![CheckMode::ExactInequality],
        }
    }

    pub fn all() -> Self {
        SearchScope {
            ids: TheoremId::ALL.to_vec(),
            modes: vec![CheckMode::ExactInequality, CheckMode::VerdictImplication],
        }
    }

    pub fn theorem(id: TheoremId) -> Self {
        SearchScope {
            ids: vec![id],
            modes: vec![CheckMode::ExactInequality, CheckMode::VerdictImplication],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub trial: usize,
    pub id: TheoremId,
    pub mode: CheckMode,
    pub description: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub seed: u64,
    pub trials: usize,
    pub exact_cases: usize,
    pub implication_cases: usize,
    /// Cases whose hypotheses were rejected before any claim was checked.
    pub rejected: usize,
    pub max_violation: f64,
    pub violations: Vec<Finding>,
    pub implication_failures: Vec<Finding>,
    pub undetermined: usize,
    pub cases_per_id: BTreeMap<String, usize>,
}

impl SearchReport {
    pub fn clean(&self) -> bool {
        self.violations.is_empty() && self.implication_failures.is_empty()
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

fn log_grid(rng: &mut ChaCha8Rng, lo: usize, hi: usize, points: usize) -> Vec<usize> {
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut grid: Vec<usize> = (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp().round() as usize)
        .collect();
    for _ in 0..3 {
        grid.push(rng.gen_range(lo..=hi));
    }
    grid.push(hi);
    grid.sort_unstable();
    grid.dedup();
    grid
}

fn random_weights(rng: &mut ChaCha8Rng, n_max: usize) -> (LambdaSpec, LambdaSpec) {
    if rng.gen_bool(0.3) {
        let a = rng.gen_range(0.05..=1.0);
        let b = rng.gen_range(a..=1.0);
        return match rng.gen_range(0..5) {
            0 => (LambdaSpec::Logarithmic, LambdaSpec::Identity),
            1 => (LambdaSpec::Affine { slope: a }, LambdaSpec::Identity),
            2 => (
                LambdaSpec::Affine { slope: a },
                LambdaSpec::Affine { slope: b },
            ),
            // H_n ≤ ⌈bn⌉ needs b ≥ 3/4 at n = 2
            3 => (
                LambdaSpec::Logarithmic,
                LambdaSpec::Affine { slope: b.max(0.75) },
            ),
            _ => (LambdaSpec::Identity, LambdaSpec::Identity),
        };
    }
    let p_mu = rng.gen_range(0.05..=1.0);
    let p_lam = rng.gen_range(0.0..=1.0);
    let fractional = rng.gen_bool(0.5);
    let step = |rng: &mut ChaCha8Rng, p: f64| -> f64 {
        if rng.gen_bool(p) {
            1.0
        } else if fractional {
            rng.gen_range(0.0..1.0)
        } else {
            0.0
        }
    };
    let (mut mu, mut lam) = (vec![1.0], vec![1.0]);
    for i in 1..n_max {
        let m = mu[i - 1] + step(rng, p_mu);
        let l = (lam[i - 1] + step(rng, p_lam)).min(m);
        mu.push(m);
        lam.push(l);
    }
    (LambdaSpec::table(lam), LambdaSpec::table(mu))
}

fn random_sequence(rng: &mut ChaCha8Rng, n_max: usize) -> (SequenceSpec, PartialMetricSpec) {
    let metric = match rng.gen_range(0..3) {
        0 => PartialMetricSpec::Max,
        1 => PartialMetricSpec::NegMin,
        _ => PartialMetricSpec::Usual,
    };
    let limit = match metric {
        PartialMetricSpec::Usual => rng.gen_range(-3.0..3.0),
        _ => 0.0,
    };
    let point = |rng: &mut ChaCha8Rng, magnitude: f64| match metric {
        PartialMetricSpec::Max => magnitude,
        PartialMetricSpec::NegMin => -magnitude,
        _ => {
            if rng.gen_bool(0.5) {
                limit + magnitude
            } else {
                limit - magnitude
            }
        }
    };
    let kind = match rng.gen_range(0..5) {
        0 | 1 => {
            let exponent = rng.gen_range(0.1..0.95);
            let magnitude = log_uniform(rng, 0.05, 5.0);
            SequenceKind::PolynomialExceptions {
                exponent,
                value: point(rng, magnitude),
            }
        }
        2 => {
            let density = log_uniform(rng, 1e-4, 0.5);
            let values = (0..n_max)
                .map(|_| {
                    if rng.gen_bool(density) {
                        let m = rng.gen_range(0.0..3.0);
                        point(rng, m)
                    } else {
                        limit
                    }
                })
                .collect();
            SequenceKind::Table { values }
        }
        3 => {
            let from = rng.gen_range(1..=n_max / 2 + 1);
            let magnitude = rng.gen_range(0.0..4.0);
            SequenceKind::EventuallyConstant {
                value: limit,
                from,
                head: point(rng, magnitude),
            }
        }
        _ if matches!(metric, PartialMetricSpec::NegMin) => SequenceKind::Constant { value: limit },
        _ => SequenceKind::SquareIndicator,
    };
    let limit = if matches!(kind, SequenceKind::SquareIndicator) {
        0.0
    } else {
        limit
    };
    (SequenceSpec::new(kind, limit), metric)
}

/// The random case and grid drawn for `trial` of a search with `seed`.
///
/// Generated cases satisfy the hypotheses by construction: `α ≤ β`,
/// `λ_n ≤ μ_n` and both weights in the class.
pub fn random_case(
    seed: u64,
    trial: usize,
    id: TheoremId,
    mode: CheckMode,
) -> (TheoremCase, Vec<usize>) {
    let mut rng = trial_rng(seed, trial);
    let (n_max, grid) = match mode {
        CheckMode::ExactInequality => {
            let n_max = log_uniform(&mut rng, 100.0, 1e5) as usize;
            (n_max, log_grid(&mut rng, 1, n_max, 12))
        }
        CheckMode::VerdictImplication => {
            let n_max = log_uniform(&mut rng, 1e4, 1e5) as usize;
            (n_max, log_grid(&mut rng, 10, n_max, 8))
        }
    };
    let (sequence, metric) = random_sequence(&mut rng, n_max);
    let (lambda, mu) = random_weights(&mut rng, n_max);
    let alpha = rng.gen_range(0.05..=1.0);
    let beta = rng.gen_range(alpha..=1.0);
    let case = TheoremCase {
        id,
        sequence,
        metric,
        lambda,
        mu,
        alpha,
        beta,
        eps: log_uniform(&mut rng, 0.05, 2.0),
        q: rng.gen_range(0.25..=4.0),
        n0: 1,
        mode,
    };
    (case, grid)
}

fn describe(case: &TheoremCase, grid: &[usize]) -> String {
    let seq = match &case.sequence.kind {
        SequenceKind::Table { values } => format!("table[{}]", values.len()),
        kind => serde_json::to_string(kind).expect("sequence kinds serialize"),
    };
    format!(
        "seq={seq} limit={} metric={} lambda={} mu={} alpha={} beta={} eps={} q={} n_max={}",
        case.sequence.limit,
        case.metric.name(),
        case.lambda.label(),
        case.mu.label(),
        case.alpha,
        case.beta,
        case.eps,
        case.q,
        grid.last().copied().unwrap_or(0),
    )
}

/// What one trial contributed to a search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub id: TheoremId,
    pub exact_cases: usize,
    pub implication_cases: usize,
    pub rejected: usize,
    pub max_violation: f64,
    pub violations: Vec<Finding>,
    pub implication_failures: Vec<Finding>,
    pub undetermined: usize,
}

/// Runs trial `trial` of a search: one random case per mode, for the
/// result the trial index selects from the scope.
pub fn run_trial(seed: u64, trial: usize, scope: &SearchScope) -> Result<TrialOutcome> {
    if scope.ids.is_empty() || scope.modes.is_empty() {
        return Err(Error::InvalidParameter("search scope is empty".into()));
    }
    let id = scope.ids[trial % scope.ids.len()];
    let mut out = TrialOutcome {
        id,
        exact_cases: 0,
        implication_cases: 0,
        rejected: 0,
        max_violation: 0.0,
        violations: Vec::new(),
        implication_failures: Vec::new(),
        undetermined: 0,
    };
    for &mode in &scope.modes {
        let (case, grid) = random_case(seed, trial, id, mode);
        let finding = |detail: String| Finding {
            trial,
            id,
            mode,
            description: describe(&case, &grid),
            detail,
        };
        match mode {
            CheckMode::ExactInequality => match check_exact_inequality(&case, &grid) {
                Ok(r) => {
                    out.exact_cases += 1;
                    out.max_violation = out.max_violation.max(r.max_violation);
                    if r.max_violation > VIOLATION_LIMIT {
                        let worst = r
                            .links
                            .iter()
                            .max_by(|a, b| a.max_violation.total_cmp(&b.max_violation))
                            .unwrap();
                        out.violations.push(finding(format!(
                            "{}: {:e} at n={:?}",
                            worst.name, worst.max_violation, worst.worst_n
                        )));
                    }
                }
                Err(Error::Hypothesis(_)) | Err(Error::Validation { .. }) => out.rejected += 1,
                Err(e) => return Err(e),
            },
            CheckMode::VerdictImplication => match check_implication(&case, &grid, DEFAULT_TOL) {
                Ok(r) => {
                    out.implication_cases += 1;
                    match r.outcome {
                        Outcome::Fails => {
                            let dirs: Vec<String> = r
                                .directions
                                .iter()
                                .map(|d| {
                                    format!(
                                        "{} {:?} => {} {:?}",
                                        d.premise.label(),
                                        d.premise_verdict.decision,
                                        d.conclusion.label(),
                                        d.conclusion_verdict.decision
                                    )
                                })
                                .collect();
                            out.implication_failures.push(finding(dirs.join("; ")))
                        }
                        Outcome::Undetermined => out.undetermined += 1,
                        Outcome::Holds | Outcome::Vacuous => {}
                    }
                }
                Err(Error::Hypothesis(_)) | Err(Error::Validation { .. }) => out.rejected += 1,
                Err(e) => return Err(e),
            },
        }
    }
    Ok(out)
}

impl SearchReport {
    /// Merges trial outcomes in the order given.
    pub fn collect(seed: u64, outcomes: impl IntoIterator<Item = TrialOutcome>) -> Self {
        let mut report = SearchReport {
            seed,
            trials: 0,
            exact_cases: 0,
            implication_cases: 0,
            rejected: 0,
            max_violation: 0.0,
            violations: Vec::new(),
            implication_failures: Vec::new(),
            undetermined: 0,
            cases_per_id: BTreeMap::new(),
        };
        for o in outcomes {
            report.trials += 1;
            *report.cases_per_id.entry(o.id.to_string()).or_default() += 1;
            report.exact_cases += o.exact_cases;
            report.implication_cases += o.implication_cases;
            report.rejected += o.rejected;
            report.max_violation = report.max_violation.max(o.max_violation);
            report.violations.extend(o.violations);
            report.implication_failures.extend(o.implication_failures);
            report.undetermined += o.undetermined;
        }
        report
    }
}

/// Draws `trials` random cases per mode, cycling through the scope's
/// results, and records every exact violation above
/// [`VIOLATION_LIMIT`] and every failed implication.
pub fn search_counterexamples(
    seed: u64,
    trials: usize,
    scope: &SearchScope,
) -> Result<SearchReport> {
    if scope.ids.is_empty() || scope.modes.is_empty() {
        return Err(Error::InvalidParameter("search scope is empty".into()));
    }
    let outcomes = (0..trials)
        .map(|t| run_trial(seed, t, scope))
        .collect::<Result<Vec<_>>>()?;
    Ok(SearchReport::collect(seed, outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_search_finds_nothing() {
        let r = search_counterexamples(1, 100, &SearchScope::exact(&TheoremId::ALL)).unwrap();
        assert!(r.clean(), "{:?}", r.violations);
        assert_eq!(r.exact_cases + r.rejected, 100);
        assert_eq!(r.rejected, 0);
        assert!(r.max_violation <= VIOLATION_LIMIT);
    }

    #[test]
    fn single_result_scope() {
        let r = search_counterexamples(2, 60, &SearchScope::exact(&[TheoremId::T3_13i])).unwrap();
        assert!(r.clean());
        assert_eq!(r.cases_per_id["T3.13i"], 60);
    }

    #[test]
    fn cases_are_reproducible() {
        let a = random_case(9, 4, TheoremId::T3_6ii, CheckMode::ExactInequality);
        let b = random_case(9, 4, TheoremId::T3_6ii, CheckMode::ExactInequality);
        assert_eq!(a, b);
        let c = random_case(9, 5, TheoremId::T3_6ii, CheckMode::ExactInequality);
        assert_ne!(a, c);
    }

    #[test]
    fn empty_scope_is_rejected() {
        let scope = SearchScope {
            ids: vec![],
            modes: vec![],
        };
        assert!(search_counterexamples(1, 1, &scope).is_err());
    }
}
