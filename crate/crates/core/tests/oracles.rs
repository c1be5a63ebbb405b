//! Defects recomputed from their definitions, without the library's
//! prefix counts, windows or compensated sums.

use pmstat::analysis::{trace, Functional};
use pmstat::lambda::LambdaSpec;
use pmstat::partial_metric::PartialMetricSpec;
use pmstat::sequences::{SequenceKind, SequenceSpec};

fn deviations(seq: &SequenceSpec, metric: &PartialMetricSpec, n: usize) -> Vec<f64> {
    let x = seq.limit;
    (1..=n)
        .map(|k| {
            let xk = seq.term(k).unwrap();
            (metric.evaluate(xk, x).unwrap() - metric.evaluate(x, x).unwrap()).abs()
        })
        .collect()
}

// Harmonic numbers by direct summation, in reverse to limit rounding.
fn harmonic(n: usize) -> f64 {
    (1..=n).rev().map(|k| 1.0 / k as f64).sum()
}

fn lambda_value(spec: &LambdaSpec, n: usize) -> f64 {
    match spec {
        LambdaSpec::Identity => n as f64,
        LambdaSpec::Logarithmic => harmonic(n),
        LambdaSpec::Affine { slope } => (slope * n as f64).ceil().max(1.0),
        LambdaSpec::Table { values, .. } => values[n - 1],
    }
}

fn in_window(k: usize, n: usize, lambda: f64) -> bool {
    k as f64 >= n as f64 - lambda + 1.0 && k <= n
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0)
}

fn sequences() -> Vec<(SequenceSpec, PartialMetricSpec)> {
    vec![
        (SequenceSpec::square_indicator(), PartialMetricSpec::Max),
        (
            SequenceSpec::polynomial_exceptions(0.6, -1.7),
            PartialMetricSpec::Usual,
        ),
        (
            SequenceSpec::polynomial_exceptions(0.35, -4.0),
            PartialMetricSpec::NegMin,
        ),
        (
            SequenceSpec::tail_block(LambdaSpec::Logarithmic, false),
            PartialMetricSpec::Max,
        ),
        (
            SequenceSpec::new(
                SequenceKind::Table {
                    values: (1..=2_000)
                        .map(|k| ((k * 7919) % 13) as f64 / 4.0)
                        .collect(),
                },
                1.0,
            ),
            PartialMetricSpec::Usual,
        ),
    ]
}

const GRID: [usize; 6] = [1, 3, 17, 250, 999, 2_000];

#[test]
fn counting_defects_match_definitions() {
    for (seq, metric) in sequences() {
        let dev = deviations(&seq, &metric, 2_000);
        for lambda in [
            LambdaSpec::Identity,
            LambdaSpec::Logarithmic,
            LambdaSpec::Affine { slope: 0.3 },
        ] {
            for (alpha, eps) in [(1.0, 0.5), (0.55, 0.1), (0.2, 2.0)] {
                let stat = trace(
                    &Functional::StatOrderAlpha { alpha, eps },
                    &seq,
                    &metric,
                    &GRID,
                )
                .unwrap();
                let lstat = trace(
                    &Functional::LambdaStatOrderAlpha {
                        lambda: lambda.clone(),
                        alpha,
                        eps,
                    },
                    &seq,
                    &metric,
                    &GRID,
                )
                .unwrap();
                for (i, &n) in GRID.iter().enumerate() {
                    let c = dev[..n].iter().filter(|&&d| d >= eps).count();
                    assert_eq!(stat.points[i].numerator, c as f64);
                    assert!(close(
                        stat.points[i].value,
                        c as f64 / (n as f64).powf(alpha)
                    ));

                    let l = lambda_value(&lambda, n);
                    let ci = (1..=n)
                        .filter(|&k| in_window(k, n, l) && dev[k - 1] >= eps)
                        .count();
                    assert_eq!(lstat.points[i].numerator, ci as f64, "{lambda:?} n={n}");
                    assert!(close(lstat.points[i].value, ci as f64 / l.powf(alpha)));
                }
            }
        }
    }
}

#[test]
fn summation_defects_match_definitions() {
    for (seq, metric) in sequences() {
        let dev = deviations(&seq, &metric, 2_000);
        for alpha in [1.0, 0.45] {
            for q in [1.0, 0.5, 3.0] {
                let t = trace(
                    &Functional::CesaroOrderAlpha { alpha, q },
                    &seq,
                    &metric,
                    &GRID,
                )
                .unwrap();
                for (i, &n) in GRID.iter().enumerate() {
                    let s: f64 = dev[..n].iter().map(|d| d.powf(q)).sum();
                    assert!(close(t.points[i].value, s / (n as f64).powf(alpha)));
                }
            }
            let lambda = LambdaSpec::Affine { slope: 0.3 };
            let t = trace(
                &Functional::VLambdaOrderAlpha {
                    lambda: lambda.clone(),
                    alpha,
                },
                &seq,
                &metric,
                &GRID,
            )
            .unwrap();
            for (i, &n) in GRID.iter().enumerate() {
                let l = lambda_value(&lambda, n);
                let s: f64 = (1..=n)
                    .filter(|&k| in_window(k, n, l))
                    .map(|k| dev[k - 1])
                    .sum();
                assert!(close(t.points[i].value, s / l.powf(alpha)));
            }
        }
    }
}

#[test]
fn square_indicator_counts_are_integer_roots() {
    let seq = SequenceSpec::square_indicator();
    let grid: Vec<usize> = (1..=60).map(|i| i * i * 17).collect();
    let t = trace(
        &Functional::StatOrderAlpha {
            alpha: 1.0,
            eps: 0.5,
        },
        &seq,
        &PartialMetricSpec::Max,
        &grid,
    )
    .unwrap();
    for p in &t.points {
        assert_eq!(p.numerator, (p.n as f64).sqrt().floor());
    }
}
