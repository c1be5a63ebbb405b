//! Verdict-level checks of the class inclusions.

use serde::{Deserialize, Serialize};

use super::{
    check_case_grid, check_hypotheses, estimate_condition, ConditionEstimate, Family, TheoremCase,
    TheoremId, Tri,
};
use crate::analysis::{trace_with, verdict, Decision, Deviations, Functional, Verdict};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    /// Premise and conclusion both judged to vanish.
    Holds,
    /// Premise judged not to vanish, so there is nothing to check.
    Vacuous,
    /// Premise vanishes, conclusion does not.
    Fails,
    Undetermined,
}

/// One inclusion `premise class ⊆ conclusion class`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub premise: Functional,
    pub conclusion: Functional,
    pub premise_verdict: Verdict,
    pub conclusion_verdict: Verdict,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImplicationReport {
    pub id: TheoremId,
    pub hypotheses: Vec<String>,
    pub conditions: Vec<ConditionEstimate>,
    pub directions: Vec<Direction>,
    /// Some direction has a divergent premise and a vanishing conclusion,
    /// i.e. the two classes are told apart on this sequence.
    pub separated: bool,
    pub outcome: Outcome,
}

fn directions(case: &TheoremCase) -> Vec<(Functional, Functional)> {
    let (alpha, beta) = case.orders();
    let eps = case.eps;
    let stat = |a: f64| Functional::StatOrderAlpha { alpha: a, eps };
    let lstat = |l: &crate::lambda::LambdaSpec, a: f64| Functional::LambdaStatOrderAlpha {
        lambda: l.clone(),
        alpha: a,
        eps,
    };
    let v = |l: &crate::lambda::LambdaSpec, a: f64| Functional::VLambdaOrderAlpha {
        lambda: l.clone(),
        alpha: a,
    };
    let (lam, mu) = (&case.lambda, &case.mu);
    match case.id.family() {
        Family::Order => vec![(stat(alpha), stat(beta))],
        Family::Chebyshev => vec![(
            Functional::CesaroOrderAlpha { alpha, q: case.q },
            stat(beta),
        )],
        Family::LambdaOrder => vec![(lstat(lam, alpha), lstat(lam, beta))],
        Family::PrefixWindow => vec![(stat(alpha), lstat(lam, alpha))],
        Family::WindowInclusion => vec![(lstat(mu, beta), lstat(lam, alpha))],
        Family::WindowSplit => vec![
            (lstat(lam, alpha), lstat(mu, beta)),
            (lstat(mu, beta), lstat(lam, alpha)),
        ],
        Family::SumInclusion => vec![(v(mu, beta), v(lam, alpha))],
        Family::SumSplit => vec![(v(lam, alpha), v(mu, beta)), (v(mu, beta), v(lam, alpha))],
        Family::SumOverCount => vec![(v(mu, beta), lstat(lam, alpha))],
        Family::CountOverSum => vec![(lstat(lam, alpha), v(mu, beta))],
    }
}

fn direction_outcome(premise: Decision, conclusion: Decision) -> Outcome {
    match (premise, conclusion) {
        (Decision::Diverges, _) => Outcome::Vacuous,
        (Decision::ConvergesToZero, Decision::ConvergesToZero) => Outcome::Holds,
        (Decision::ConvergesToZero, Decision::Diverges) => Outcome::Fails,
        _ => Outcome::Undetermined,
    }
}

/// Compares verdicts of the premise and conclusion defects on the grid.
///
/// Only grid points `n ≥ n0` are used, and at least four must remain.
/// When a growth condition the result assumes is not estimated to hold,
/// the outcome is `Undetermined` whatever the verdicts say.
pub fn check_implication(
    case: &TheoremCase,
    grid: &[usize],
    tol: f64,
) -> Result<ImplicationReport> {
    let n_max = check_case_grid(grid)?;
    let (hypotheses, _) = check_hypotheses(case, n_max)?;
    let grid: Vec<usize> = grid.iter().copied().filter(|&n| n >= case.n0).collect();
    if grid.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "verdicts need at least 4 grid points at or after n0={}",
            case.n0
        )));
    }
    let (alpha, beta) = case.orders();
    let conditions = case
        .id
        .required_conditions()
        .iter()
        .map(|&c| estimate_condition(c, &case.lambda, &case.mu, alpha, beta, &grid))
        .collect::<Result<Vec<_>>>()?;

    let devs = Deviations::new(&case.sequence, &case.metric, n_max)?;
    let mut dirs = Vec::new();
    for (premise, conclusion) in directions(case) {
        let pv = verdict(&trace_with(&devs, &premise, &grid)?, tol)?;
        let cv = verdict(&trace_with(&devs, &conclusion, &grid)?, tol)?;
        dirs.push(Direction {
            outcome: direction_outcome(pv.decision, cv.decision),
            premise,
            conclusion,
            premise_verdict: pv,
            conclusion_verdict: cv,
        });
    }

    let separated = dirs.iter().any(|d| {
        d.premise_verdict.decision == Decision::Diverges
            && d.conclusion_verdict.decision == Decision::ConvergesToZero
    });
    let outcome = if conditions.iter().any(|c| c.status != Tri::Holds) {
        Outcome::Undetermined
    } else if dirs.iter().any(|d| d.outcome == Outcome::Fails) {
        Outcome::Fails
    } else if dirs.iter().any(|d| d.outcome == Outcome::Undetermined) {
        Outcome::Undetermined
    } else if dirs.iter().all(|d| d.outcome == Outcome::Vacuous) {
        Outcome::Vacuous
    } else {
        Outcome::Holds
    };

    Ok(ImplicationReport {
        id: case.id,
        hypotheses,
        conditions,
        directions: dirs,
        separated,
        outcome,
    })
}

#[cfg(test)]
mod tests {
    use super::super::CheckMode;
    use super::*;
    use crate::analysis::{default_grid, DEFAULT_TOL};
    use crate::lambda::LambdaSpec;

    fn case(id: TheoremId) -> TheoremCase {
        TheoremCase::with_defaults(id, CheckMode::VerdictImplication)
    }

    #[test]
    fn order_inclusion_on_square_indicator() {
        let mut c = case(TheoremId::T2_2);
        c.alpha = 0.6;
        c.beta = 0.9;
        let r = check_implication(&c, &default_grid(), DEFAULT_TOL).unwrap();
        assert_eq!(r.outcome, Outcome::Holds);
    }

    #[test]
    fn strict_inclusion_is_separated() {
        let mut c = case(TheoremId::C2_5);
        c.alpha = 0.4;
        c.beta = 0.6;
        let r = check_implication(&c, &default_grid(), DEFAULT_TOL).unwrap();
        assert_eq!(r.outcome, Outcome::Vacuous);
        assert!(r.separated);
    }

    #[test]
    fn window_inclusion_with_half_window() {
        let mut c = case(TheoremId::T3_6i);
        c.lambda = LambdaSpec::Affine { slope: 0.5 };
        let r = check_implication(&c, &default_grid(), DEFAULT_TOL).unwrap();
        assert_eq!(r.conditions[0].status, Tri::Holds);
        assert_eq!(r.outcome, Outcome::Holds);
    }

    #[test]
    fn failed_condition_leaves_case_undetermined() {
        let mut c = case(TheoremId::T3_5);
        c.lambda = LambdaSpec::Logarithmic;
        c.alpha = 0.5;
        let r = check_implication(&c, &default_grid(), DEFAULT_TOL).unwrap();
        assert_eq!(r.conditions[0].status, Tri::Fails);
        assert_eq!(r.outcome, Outcome::Undetermined);
    }

    #[test]
    fn equality_results_check_both_directions() {
        let r = check_implication(&case(TheoremId::T3_10ii), &default_grid(), DEFAULT_TOL).unwrap();
        assert_eq!(r.directions.len(), 2);
        assert_eq!(r.outcome, Outcome::Holds);
    }

    #[test]
    fn outcome_table() {
        use Decision::*;
        assert_eq!(direction_outcome(ConvergesToZero, Diverges), Outcome::Fails);
        assert_eq!(direction_outcome(Diverges, Diverges), Outcome::Vacuous);
        assert_eq!(
            direction_outcome(Inconclusive, ConvergesToZero),
            Outcome::Undetermined
        );
        assert_eq!(
            direction_outcome(ConvergesToZero, Inconclusive),
            Outcome::Undetermined
        );
    }
}
