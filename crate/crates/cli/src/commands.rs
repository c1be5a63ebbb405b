use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use pmstat::analysis::{
    classify_order, estimate_critical_order, trace_with, verdict, Decision, Deviations, Functional,
};
use pmstat::partial_metric::{verify_axioms, verify_table};
use pmstat::theorems::{
    check_exact_inequality, check_implication, example_suite, run_trial, CheckMode, SearchReport,
    SearchScope, SuiteReport, TheoremCase, TheoremId,
};
use pmstat::{LambdaSeq, PartialMetricSpec, SequenceSpec};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{self, ExperimentConfig};
use crate::{AnalyzeArgs, AxiomsArgs, Common, EstimateArgs, Inputs, TheoremsArgs};

/// Prefixes library errors with their kind so diagnostics name the class
/// of failure.
pub fn core_err(context: &str, e: pmstat::Error) -> anyhow::Error {
    let kind = match e {
        pmstat::Error::Domain { .. } => "DomainError",
        pmstat::Error::Index { .. } => "IndexError",
        pmstat::Error::InvalidParameter(_) => "InvalidParameter",
        pmstat::Error::Validation { .. } => "ValidationError",
        pmstat::Error::InsufficientData(_) => "InsufficientData",
        pmstat::Error::Hypothesis(_) => "HypothesisError",
        pmstat::Error::Load(_) => "LoadError",
    };
    anyhow!("{kind}: {context}: {e}")
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load_or_default(common.config.as_deref())?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(tol) = common.tol {
        cfg.tol = tol;
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

struct Resolved {
    sequence: SequenceSpec,
    metric: PartialMetricSpec,
    grid: Vec<usize>,
    tol: f64,
}

fn resolve(cfg: &mut ExperimentConfig, inputs: &Inputs) -> Result<Resolved> {
    if let Some(g) = &inputs.grid {
        cfg.n_grid = g.clone();
    }
    let sequence = match &inputs.sequence {
        Some(s) => config::parse_sequence(s).context("--sequence")?,
        None => cfg.sequence_spec()?,
    };
    let metric = match &inputs.metric {
        Some(m) => config::parse_metric(m)?,
        None => cfg.metric_spec()?,
    };
    Ok(Resolved {
        sequence,
        metric,
        grid: cfg.grid()?,
        tol: cfg.check_tol()?,
    })
}

fn lambda_overrides(
    cfg: &ExperimentConfig,
    inputs: &Inputs,
) -> Result<(pmstat::LambdaSpec, pmstat::LambdaSpec)> {
    let lambda = match &inputs.lambda {
        Some(l) => config::parse_lambda(l).context("--lambda")?,
        None => cfg.lambda_spec()?,
    };
    let mu = match &inputs.mu {
        Some(m) => config::parse_lambda(m).context("--mu")?,
        None => cfg.mu_spec()?,
    };
    Ok((lambda, mu))
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .context("cannot start worker pool")
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s.into_bytes()
}

fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"))
}

#[derive(Serialize)]
struct TraceSummary {
    label: String,
    functional: Functional,
    config_hash: String,
    csv: String,
    verdict: pmstat::Verdict,
}

/// Orders at which one functional family switches from divergent to
/// vanishing defects.
#[derive(Serialize)]
struct Split {
    family: String,
    diverges_through: Option<f64>,
    converges_from: Option<f64>,
}

#[derive(Serialize)]
struct AnalyzeSummary<'a> {
    sequence: &'a SequenceSpec,
    metric: &'a str,
    n_grid: &'a [usize],
    tol: f64,
    traces: Vec<TraceSummary>,
    splits: Vec<Split>,
}

fn splits(traces: &[TraceSummary]) -> Vec<Split> {
    let mut groups: BTreeMap<String, Vec<(f64, Decision)>> = BTreeMap::new();
    for t in traces {
        let alpha = t.functional.alpha();
        let family = t.label.replacen(&format!("_a{alpha}"), "", 1);
        groups
            .entry(family)
            .or_default()
            .push((alpha, t.verdict.decision));
    }
    groups
        .into_iter()
        .map(|(family, rows)| Split {
            family,
            diverges_through: rows
                .iter()
                .filter(|r| r.1 == Decision::Diverges)
                .map(|r| r.0)
                .reduce(f64::max),
            converges_from: rows
                .iter()
                .filter(|r| r.1 == Decision::ConvergesToZero)
                .map(|r| r.0)
                .reduce(f64::min),
        })
        .collect()
}

pub fn analyze(args: &AnalyzeArgs) -> Result<ExitCode> {
    let mut cfg = load(&args.common)?;
    let a = &mut cfg.analysis;
    if !args.functional.is_empty() {
        a.functionals = args.functional.clone();
    }
    if !args.alpha.is_empty() {
        a.alpha = args.alpha.clone();
    }
    if !args.eps.is_empty() {
        a.eps = args.eps.clone();
    }
    if !args.q.is_empty() {
        a.q = args.q.clone();
    }
    let r = resolve(&mut cfg, &args.inputs)?;
    let (lambda, _) = lambda_overrides(&cfg, &args.inputs)?;
    cfg.lambda = config::LambdaSection::default();
    let functionals: Vec<Functional> = cfg
        .functionals()?
        .into_iter()
        .map(|f| match f {
            Functional::LambdaStatOrderAlpha { alpha, eps, .. } => {
                Functional::LambdaStatOrderAlpha {
                    lambda: lambda.clone(),
                    alpha,
                    eps,
                }
            }
            Functional::VLambdaOrderAlpha { alpha, .. } => Functional::VLambdaOrderAlpha {
                lambda: lambda.clone(),
                alpha,
            },
            f => f,
        })
        .collect();

    let n_max = *r.grid.last().unwrap();
    if functionals.iter().any(|f| f.lambda().is_some()) {
        LambdaSeq::new(&lambda, n_max).map_err(|e| core_err("lambda", e))?;
    }
    let devs =
        Deviations::new(&r.sequence, &r.metric, n_max).map_err(|e| core_err("sequence", e))?;

    let results = pool(args.common.jobs)?.install(|| {
        functionals
            .par_iter()
            .map(|f| {
                let t = trace_with(&devs, f, &r.grid)?;
                let v = verdict(&t, r.tol)?;
                Ok((t, v))
            })
            .collect::<pmstat::Result<Vec<_>>>()
    });
    let results = results.map_err(|e| core_err("analysis", e))?;

    let out = out_dir(&cfg);
    let mut summaries = Vec::new();
    println!(
        "{:<28} {:>14} {:<16} basis",
        "functional", "final", "decision"
    );
    for (t, v) in results {
        let label = t.functional.label();
        let mut csv = Vec::new();
        t.write_csv(&mut csv)?;
        write_file(&out.join("traces").join(format!("{label}.csv")), &csv)?;
        let mut log_csv = Vec::new();
        t.write_log_csv(&mut log_csv)?;
        write_file(
            &out.join("traces").join(format!("{label}.log.csv")),
            &log_csv,
        )?;
        println!(
            "{:<28} {:>14.6e} {:<16} {:?}",
            label,
            t.points.last().unwrap().value,
            format!("{:?}", v.decision),
            v.basis
        );
        summaries.push(TraceSummary {
            csv: format!("traces/{label}.csv"),
            label,
            functional: t.functional,
            config_hash: t.config_hash,
            verdict: v,
        });
    }
    let splits = splits(&summaries);
    for s in &splits {
        println!(
            "split {}: diverges through alpha={}, converges from alpha={}",
            s.family,
            s.diverges_through.map_or("-".into(), |a| a.to_string()),
            s.converges_from.map_or("-".into(), |a| a.to_string())
        );
    }
    let summary = AnalyzeSummary {
        sequence: &r.sequence,
        metric: r.metric.name(),
        n_grid: &r.grid,
        tol: r.tol,
        traces: summaries,
        splits,
    };
    write_file(&out.join("verdicts.json"), &to_json(&summary))?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct OrderReport<'a> {
    sequence: &'a SequenceSpec,
    metric: &'a str,
    eps: f64,
    n_grid: &'a [usize],
    verdict: pmstat::Verdict,
    memberships: Vec<(f64, Decision)>,
}

pub fn estimate_order(args: &EstimateArgs) -> Result<ExitCode> {
    let mut cfg = load(&args.common)?;
    let r = resolve(&mut cfg, &args.inputs)?;
    let eps = match args.eps {
        Some(e) => e,
        None => *cfg
            .analysis
            .eps
            .first()
            .ok_or_else(|| anyhow!("analysis.eps: must not be empty"))?,
    };
    config::check_eps(eps).context("eps")?;
    let alphas = if args.alpha.is_empty() {
        cfg.analysis.alpha.clone()
    } else {
        args.alpha.clone()
    };
    for &a in &alphas {
        config::check_alpha(a)?;
    }
    let v = estimate_critical_order(&r.sequence, &r.metric, eps, &r.grid)
        .map_err(|e| core_err("order estimate", e))?;
    let gamma = v.gamma_hat;
    let memberships = alphas
        .iter()
        .map(|&a| {
            (
                a,
                gamma.map_or(Decision::Inconclusive, |g| classify_order(g, a)),
            )
        })
        .collect();
    let report = OrderReport {
        sequence: &r.sequence,
        metric: r.metric.name(),
        eps,
        n_grid: &r.grid,
        verdict: v,
        memberships,
    };
    let json = to_json(&report);
    print!("{}", String::from_utf8_lossy(&json));
    if let Some(out) = &cfg.out {
        write_file(&out.join("order.json"), &json)?;
    }
    Ok(ExitCode::SUCCESS)
}

pub fn theorems(args: &TheoremsArgs) -> Result<ExitCode> {
    let mut cfg = load(&args.common)?;
    let r = resolve(&mut cfg, &args.inputs)?;
    let (lambda, mu) = lambda_overrides(&cfg, &args.inputs)?;
    let t = &cfg.theorems;

    let names: Vec<String> = if args.all {
        vec!["all".into()]
    } else if !args.case.is_empty() {
        args.case.clone()
    } else {
        t.cases.clone()
    };
    let mut ids = Vec::new();
    for name in &names {
        if name.eq_ignore_ascii_case("all") {
            ids.extend(TheoremId::ALL);
        } else {
            ids.push(
                name.parse::<TheoremId>()
                    .map_err(|e| anyhow!("case: {e}"))?,
            );
        }
    }
    ids.sort();
    ids.dedup();
    let mode = args.mode.clone().unwrap_or_else(|| t.mode.clone());
    let modes = match mode.as_str() {
        "exact" => vec![CheckMode::ExactInequality],
        "verdict" => vec![CheckMode::VerdictImplication],
        "both" => vec![CheckMode::ExactInequality, CheckMode::VerdictImplication],
        other => bail!("theorems.mode: unknown mode `{other}` (expected exact, verdict or both)"),
    };
    let trials = args.trials.unwrap_or(t.trials);
    let examples = args.all || args.examples || t.examples;
    if ids.is_empty() && trials == 0 && !examples {
        bail!("case: name at least one theorem id, `all`, --trials or --examples");
    }

    let alpha = args.alpha.unwrap_or(t.alpha);
    let beta = args.beta.unwrap_or(t.beta);
    let eps = args.eps.unwrap_or(t.eps);
    let q = args.q.unwrap_or(t.q);
    config::check_alpha(alpha).context("alpha")?;
    config::check_alpha(beta).context("beta")?;
    config::check_eps(eps).context("eps")?;
    config::check_q(q).context("q")?;

    let mut cases = Vec::new();
    for &id in &ids {
        for &mode in &modes {
            cases.push(TheoremCase {
                id,
                sequence: r.sequence.clone(),
                metric: r.metric.clone(),
                lambda: lambda.clone(),
                mu: mu.clone(),
                alpha,
                beta,
                eps,
                q,
                n0: args.n0.unwrap_or(t.n0),
                mode,
            });
        }
    }

    let pool = pool(args.common.jobs)?;
    let checked = pool.install(|| {
        cases
            .par_iter()
            .map(|c| match c.mode {
                CheckMode::ExactInequality => {
                    check_exact_inequality(c, &r.grid).map(|x| (Some(x), None))
                }
                CheckMode::VerdictImplication => {
                    check_implication(c, &r.grid, r.tol).map(|x| (None, Some(x)))
                }
            })
            .collect::<pmstat::Result<Vec<_>>>()
    });
    let checked = checked.map_err(|e| core_err("theorem case", e))?;
    let mut report = SuiteReport {
        examples: None,
        exact: Vec::new(),
        implications: Vec::new(),
        search: None,
    };
    for (exact, implication) in checked {
        report.exact.extend(exact);
        report.implications.extend(implication);
    }

    if trials > 0 {
        let scope = SearchScope {
            ids: if ids.is_empty() {
                TheoremId::ALL.to_vec()
            } else {
                ids.clone()
            },
            modes: modes.clone(),
        };
        let seed = cfg.seed;
        let outcomes = pool
            .install(|| {
                (0..trials)
                    .into_par_iter()
                    .map(|i| run_trial(seed, i, &scope))
                    .collect::<pmstat::Result<Vec<_>>>()
            })
            .map_err(|e| core_err("search", e))?;
        report.search = Some(SearchReport::collect(seed, outcomes));
    }
    if examples {
        report.examples = Some(example_suite(r.tol).map_err(|e| core_err("examples", e))?);
    }

    print!("{}", report.render());
    if let Some(out) = &cfg.out {
        write_file(&out.join("theorems.json"), &to_json(&report))?;
    }
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

pub fn axioms(args: &AxiomsArgs) -> Result<ExitCode> {
    let metric = config::parse_metric(&args.metric)?;
    let report = match &metric {
        PartialMetricSpec::Custom { table } => verify_table(table),
        m => verify_axioms(m, &m.sample_points(args.samples, args.seed), args.seed),
    };
    let json = to_json(&report);
    print!("{}", String::from_utf8_lossy(&json));
    if let Some(out) = &args.out {
        write_file(&out.join("axioms.json"), &json)?;
    }
    for s in report.statuses.iter().filter(|s| !s.passed) {
        let w = s.witness.expect("failed axioms carry a witness");
        eprintln!(
            "axiom {:?} fails at x={}, y={}{}",
            s.axiom,
            w.x,
            w.y,
            w.z.map_or(String::new(), |z| format!(", z={z}"))
        );
    }
    Ok(if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
