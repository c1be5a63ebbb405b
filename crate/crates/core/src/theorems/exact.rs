//! Finite-n inequality chains.

use serde::{Deserialize, Serialize};

use super::{check_case_grid, check_hypotheses, Family, TheoremCase, TheoremId};
use crate::analysis::{CompensatedSum, Deviations};
use crate::error::Result;
use crate::lambda::pow_alpha;

/// Largest relative violation accepted as rounding.
pub const VIOLATION_LIMIT: f64 = 1e-12;

/// Worst observation of one `lhs ≤ rhs` link over the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkResult {
    pub name: String,
    /// `max(0, lhs − rhs) / max(1, |lhs|, |rhs|)`, maximized over the grid.
    pub max_violation: f64,
    pub worst_n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactReport {
    pub id: TheoremId,
    pub alpha: f64,
    pub beta: f64,
    pub hypotheses: Vec<String>,
    pub links: Vec<LinkResult>,
    pub points_checked: usize,
    pub max_violation: f64,
    pub holds: bool,
}

struct Links(Vec<LinkResult>);

impl Links {
    fn new() -> Self {
        Links(Vec::new())
    }

    fn le(&mut self, name: &str, n: usize, lhs: f64, rhs: f64) {
        let scale = 1f64.max(lhs.abs()).max(rhs.abs());
        let v = ((lhs - rhs) / scale).max(0.0);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        match self.0.iter_mut().find(|l| l.name == name) {
            Some(link) => {
                if v > link.max_violation {
                    link.max_violation = v;
                    link.worst_n = Some(n);
                }
            }
            None => self.0.push(LinkResult {
                name: name.to_string(),
                max_violation: v,
                worst_n: if v > 0.0 { Some(n) } else { None },
            }),
        }
    }
}

fn window_sum(devs: &Deviations, lo: usize, hi: usize, eps: Option<f64>) -> f64 {
    devs.as_slice()[lo - 1..hi]
        .iter()
        .filter(|&&d| eps.is_none_or(|e| d >= e))
        .copied()
        .collect::<CompensatedSum>()
        .value()
}

/// Evaluates every link of the result's inequality chain at each grid
/// index `n ≥ n0`.
///
/// Hypotheses are checked first on `1..=max(grid)`; a violated hypothesis
/// is an error, not a failed claim.
pub fn check_exact_inequality(case: &TheoremCase, grid: &[usize]) -> Result<ExactReport> {
    let n_max = check_case_grid(grid)?;
    let (hypotheses, weights) = check_hypotheses(case, n_max)?;
    let (alpha, beta) = case.orders();
    let devs = Deviations::new(&case.sequence, &case.metric, n_max)?;
    let prefix = devs.exceedance_prefix(case.eps);
    let eps = case.eps;
    let mut links = Links::new();
    let mut points = 0;

    let mut cesaro = CompensatedSum::new();
    let mut cesaro_exceeding = CompensatedSum::new();
    let mut k = 0;

    for &n in grid.iter().filter(|&&n| n >= case.n0) {
        points += 1;
        let nf = n as f64;
        let (na, nb) = (pow_alpha(nf, alpha), pow_alpha(nf, beta));
        let c = prefix[n] as f64;
        match case.id.family() {
            Family::Order => {
                links.le("0 <= stat(beta)", n, 0.0, c / nb);
                links.le("stat(beta) <= stat(alpha)", n, c / nb, c / na);
            }
            Family::Chebyshev => {
                while k < n {
                    let d = devs.as_slice()[k];
                    let p = if case.q == 1.0 { d } else { d.powf(case.q) };
                    cesaro.add(p);
                    if d >= eps {
                        cesaro_exceeding.add(p);
                    }
                    k += 1;
                }
                let eq = if case.q == 1.0 { eps } else { eps.powf(case.q) };
                let (all, big) = (cesaro.value(), cesaro_exceeding.value());
                links.le("exceeding part <= cesaro", n, big / na, all / na);
                links.le(
                    "eps^q stat(alpha) <= exceeding part",
                    n,
                    eq * c / na,
                    big / na,
                );
                links.le(
                    "eps^q stat(theta) <= eps^q stat(alpha)",
                    n,
                    eq * c / nb,
                    eq * c / na,
                );
            }
            Family::LambdaOrder => {
                let lam = weights.lambda.as_ref().unwrap();
                let w = lam.window(n)?;
                let ci = (prefix[n] - prefix[w.lo - 1]) as f64;
                let (la, lb) = (lam.power(n, alpha)?, lam.power(n, beta)?);
                links.le("0 <= lstat(beta)", n, 0.0, ci / lb);
                links.le("lstat(beta) <= lstat(alpha)", n, ci / lb, ci / la);
            }
            Family::PrefixWindow => {
                let lam = weights.lambda.as_ref().unwrap();
                let w = lam.window(n)?;
                let ci = (prefix[n] - prefix[w.lo - 1]) as f64;
                let la = lam.power(n, alpha)?;
                links.le("window count <= prefix count", n, ci, c);
                links.le(
                    "(lambda^a/n^a) lstat(alpha) <= stat(alpha)",
                    n,
                    (la / na) * (ci / la),
                    c / na,
                );
            }
            family => {
                let lam = weights.lambda.as_ref().unwrap();
                let mu = weights.mu.as_ref().unwrap();
                let wi = lam.window(n)?;
                let wj = mu.window(n)?;
                let la = lam.power(n, alpha)?;
                let mb = mu.power(n, beta)?;
                let ratio = la / mb;
                let ci = (prefix[n] - prefix[wi.lo - 1]) as f64;
                let cj = (prefix[n] - prefix[wj.lo - 1]) as f64;
                // |J_n \ I_n| = ⌊μ_n⌋ − ⌊λ_n⌋
                let outside = (wj.count - wi.count) as f64;
                match family {
                    Family::WindowInclusion => {
                        links.le("I count <= J count", n, ci, cj);
                        links.le(
                            "(lambda^a/mu^b) lstat(alpha) <= J stat(beta)",
                            n,
                            ratio * (ci / la),
                            cj / mb,
                        );
                    }
                    Family::WindowSplit => {
                        links.le("J count <= |J\\I| + I count", n, cj, outside + ci);
                        links.le(
                            "J stat(beta) <= |J\\I|/mu^b + lstat(alpha)",
                            n,
                            cj / mb,
                            outside / mb + ci / la,
                        );
                    }
                    Family::SumInclusion => {
                        let si = window_sum(&devs, wi.lo, n, None);
                        let sj = window_sum(&devs, wj.lo, n, None);
                        links.le("I sum <= J sum", n, si, sj);
                        links.le(
                            "(lambda^a/mu^b) V(alpha) <= J V(beta)",
                            n,
                            ratio * (si / la),
                            sj / mb,
                        );
                    }
                    Family::SumSplit => {
                        let si = window_sum(&devs, wi.lo, n, None);
                        let sj = window_sum(&devs, wj.lo, n, None);
                        let m = devs.max(wj.lo, n);
                        links.le("J sum <= M |J\\I| + I sum", n, sj, m * outside + si);
                        links.le(
                            "J V(beta) <= M |J\\I|/mu^b + V(alpha)",
                            n,
                            sj / mb,
                            m * outside / mb + si / la,
                        );
                    }
                    Family::SumOverCount => {
                        let big = window_sum(&devs, wi.lo, n, Some(eps));
                        let sj = window_sum(&devs, wj.lo, n, None);
                        links.le("eps I count <= exceeding I sum", n, eps * ci, big);
                        links.le("exceeding I sum <= J sum", n, big, sj);
                        links.le(
                            "(lambda^a/mu^b) eps lstat(alpha) <= J V(beta)",
                            n,
                            ratio * eps * (ci / la),
                            sj / mb,
                        );
                    }
                    Family::CountOverSum => {
                        let si = window_sum(&devs, wi.lo, n, None);
                        let big = window_sum(&devs, wi.lo, n, Some(eps));
                        let sj = window_sum(&devs, wj.lo, n, None);
                        let m = devs.max(wj.lo, n);
                        let lambda_n = lam.value(n)?;
                        links.le("exceeding I sum <= M I count", n, big, m * ci);
                        links.le("small I sum <= eps lambda", n, si - big, eps * lambda_n);
                        links.le(
                            "J V(beta) <= M |J\\I|/mu^b + M lstat(alpha) + eps lambda/mu^b",
                            n,
                            sj / mb,
                            m * outside / mb + m * ci / la + eps * lambda_n / mb,
                        );
                    }
                    _ => unreachable!(),
                }
            }
        }
    }

    let max_violation = links.0.iter().map(|l| l.max_violation).fold(0.0, f64::max);
    Ok(ExactReport {
        id: case.id,
        alpha,
        beta,
        hypotheses,
        links: links.0,
        points_checked: points,
        max_violation,
        holds: max_violation <= VIOLATION_LIMIT,
    })
}
