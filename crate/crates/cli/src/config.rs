//! Experiment configuration: TOML sections plus spec strings for flags.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use pmstat::analysis::{default_grid, Functional, DEFAULT_TOL, MAX_Q};
use pmstat::partial_metric::CustomTable;
use pmstat::{LambdaSpec, PartialMetricSpec, SequenceKind, SequenceSpec};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub tol: f64,
    pub n_grid: Vec<usize>,
    pub out: Option<PathBuf>,
    pub sequence: SequenceSection,
    pub metric: MetricSection,
    pub lambda: LambdaSection,
    pub mu: LambdaSection,
    pub analysis: AnalysisSection,
    pub theorems: TheoremsSection,
    /// Directory relative table paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            tol: DEFAULT_TOL,
            n_grid: default_grid(),
            out: None,
            sequence: SequenceSection::default(),
            metric: MetricSection::default(),
            lambda: LambdaSection::default(),
            mu: LambdaSection::default(),
            analysis: AnalysisSection::default(),
            theorems: TheoremsSection::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SequenceSection {
    pub kind: String,
    pub limit: Option<f64>,
    pub value: Option<f64>,
    pub from: Option<usize>,
    pub head: Option<f64>,
    pub exponent: Option<f64>,
    pub lambda: Option<LambdaSection>,
    pub negate: bool,
    pub path: Option<PathBuf>,
}

impl Default for SequenceSection {
    fn default() -> Self {
        SequenceSection {
            kind: "square_indicator".into(),
            limit: None,
            value: None,
            from: None,
            head: None,
            exponent: None,
            lambda: None,
            negate: false,
            path: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricSection {
    pub kind: String,
    pub path: Option<PathBuf>,
}

impl Default for MetricSection {
    fn default() -> Self {
        MetricSection {
            kind: "max".into(),
            path: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LambdaSection {
    pub kind: String,
    pub slope: Option<f64>,
    pub values: Option<Vec<f64>>,
    pub path: Option<PathBuf>,
    pub assume_unbounded: bool,
}

impl Default for LambdaSection {
    fn default() -> Self {
        LambdaSection {
            kind: "identity".into(),
            slope: None,
            values: None,
            path: None,
            assume_unbounded: false,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub functionals: Vec<String>,
    pub alpha: Vec<f64>,
    pub eps: Vec<f64>,
    pub q: Vec<f64>,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            functionals: vec!["stat".into()],
            alpha: vec![1.0],
            eps: vec![0.5],
            q: vec![1.0],
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TheoremsSection {
    pub cases: Vec<String>,
    pub mode: String,
    pub alpha: f64,
    pub beta: f64,
    pub eps: f64,
    pub q: f64,
    pub n0: usize,
    pub trials: usize,
    pub examples: bool,
}

impl Default for TheoremsSection {
    fn default() -> Self {
        TheoremsSection {
            cases: Vec::new(),
            mode: "both".into(),
            alpha: 1.0,
            beta: 1.0,
            eps: 0.5,
            q: 1.0,
            n0: 1,
            trials: 0,
            examples: false,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| anyhow!("{}: {e}", path.display()))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::load(p),
            None => Ok(Self::default()),
        }
    }

    fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    pub fn sequence_spec(&self) -> Result<SequenceSpec> {
        let s = &self.sequence;
        let need = |v: Option<f64>, field: &str| {
            v.ok_or_else(|| anyhow!("sequence.{field}: required for kind `{}`", s.kind))
        };
        let kind = match s.kind.as_str() {
            "square_indicator" => SequenceKind::SquareIndicator,
            "constant" => SequenceKind::Constant {
                value: need(s.value, "value")?,
            },
            "eventually_constant" => SequenceKind::EventuallyConstant {
                value: need(s.value, "value")?,
                from: s.from.ok_or_else(|| {
                    anyhow!("sequence.from: required for kind `eventually_constant`")
                })?,
                head: s.head.unwrap_or(0.0),
            },
            "polynomial_exceptions" => SequenceKind::PolynomialExceptions {
                exponent: need(s.exponent, "exponent")?,
                value: s.value.unwrap_or(1.0),
            },
            "lambda_tail_block" => SequenceKind::LambdaTailBlock {
                lambda: match &s.lambda {
                    Some(l) => self.lambda_from(l, "sequence.lambda")?,
                    None => LambdaSpec::Identity,
                },
                negate: s.negate,
            },
            "table" => {
                let path = s
                    .path
                    .as_ref()
                    .ok_or_else(|| anyhow!("sequence.path: required for kind `table`"))?;
                let spec = SequenceSpec::table_from_csv(self.resolve(path), 0.0)
                    .map_err(|e| anyhow!("sequence.path: {e}"))?;
                spec.kind
            }
            other => bail!(
                "sequence.kind: unknown kind `{other}` (expected square_indicator, constant, \
                 eventually_constant, polynomial_exceptions, lambda_tail_block or table)"
            ),
        };
        let limit = match (&kind, s.limit) {
            (_, Some(l)) => l,
            (SequenceKind::Constant { value }, None) => *value,
            (SequenceKind::EventuallyConstant { value, .. }, None) => *value,
            _ => 0.0,
        };
        let spec = SequenceSpec::new(kind, limit);
        spec.validate().map_err(|e| anyhow!("sequence: {e}"))?;
        Ok(spec)
    }

    pub fn metric_spec(&self) -> Result<PartialMetricSpec> {
        let m = &self.metric;
        match m.kind.as_str() {
            "custom" => {
                let path = m
                    .path
                    .as_ref()
                    .ok_or_else(|| anyhow!("metric.path: required for kind `custom`"))?;
                let table = CustomTable::from_csv_path(self.resolve(path))
                    .map_err(|e| anyhow!("metric.path: {e}"))?;
                Ok(PartialMetricSpec::Custom { table })
            }
            other => builtin_metric(other).map_err(|e| anyhow!("metric.kind: {e}")),
        }
    }

    fn lambda_from(&self, l: &LambdaSection, field: &str) -> Result<LambdaSpec> {
        Ok(match l.kind.as_str() {
            "identity" => LambdaSpec::Identity,
            "log" | "logarithmic" => LambdaSpec::Logarithmic,
            "affine" => {
                let slope = l
                    .slope
                    .ok_or_else(|| anyhow!("{field}.slope: required for kind `affine`"))?;
                if !(slope > 0.0 && slope <= 1.0) {
                    bail!("{field}.slope: must lie in (0, 1], got {slope}");
                }
                LambdaSpec::Affine { slope }
            }
            "table" => {
                let values = match (&l.values, &l.path) {
                    (Some(v), _) => v.clone(),
                    (None, Some(p)) => match LambdaSpec::from_csv_path(self.resolve(p))
                        .map_err(|e| anyhow!("{field}.path: {e}"))?
                    {
                        LambdaSpec::Table { values, .. } => values,
                        _ => unreachable!(),
                    },
                    (None, None) => bail!("{field}: kind `table` needs `values` or `path`"),
                };
                LambdaSpec::Table {
                    values,
                    assume_unbounded: l.assume_unbounded,
                }
            }
            other => bail!(
                "{field}.kind: unknown kind `{other}` (expected identity, affine, log or table)"
            ),
        })
    }

    pub fn lambda_spec(&self) -> Result<LambdaSpec> {
        self.lambda_from(&self.lambda, "lambda")
    }

    pub fn mu_spec(&self) -> Result<LambdaSpec> {
        self.lambda_from(&self.mu, "mu")
    }

    pub fn grid(&self) -> Result<Vec<usize>> {
        let g = &self.n_grid;
        if g.is_empty() {
            bail!("n_grid: must not be empty");
        }
        if g[0] == 0 {
            bail!("n_grid: entries must be at least 1");
        }
        if let Some(w) = g.windows(2).find(|w| w[1] <= w[0]) {
            bail!(
                "n_grid: must be strictly increasing ({} then {})",
                w[0],
                w[1]
            );
        }
        Ok(g.clone())
    }

    pub fn check_tol(&self) -> Result<f64> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            bail!("tol: must be positive, got {}", self.tol);
        }
        Ok(self.tol)
    }

    /// Every `(functional, α, ε, q)` combination of the analysis section.
    pub fn functionals(&self) -> Result<Vec<Functional>> {
        let a = &self.analysis;
        for (i, &alpha) in a.alpha.iter().enumerate() {
            check_alpha(alpha).map_err(|e| anyhow!("analysis.alpha[{i}]: {e}"))?;
        }
        for (i, &eps) in a.eps.iter().enumerate() {
            check_eps(eps).map_err(|e| anyhow!("analysis.eps[{i}]: {e}"))?;
        }
        for (i, &q) in a.q.iter().enumerate() {
            check_q(q).map_err(|e| anyhow!("analysis.q[{i}]: {e}"))?;
        }
        if a.functionals.is_empty() {
            bail!("analysis.functionals: must not be empty");
        }
        let lambda = self.lambda_spec()?;
        let mut out = Vec::new();
        for name in &a.functionals {
            for &alpha in &a.alpha {
                match name.as_str() {
                    "stat" => out.extend(
                        a.eps
                            .iter()
                            .map(|&eps| Functional::StatOrderAlpha { alpha, eps }),
                    ),
                    "lambda_stat" => {
                        out.extend(a.eps.iter().map(|&eps| Functional::LambdaStatOrderAlpha {
                            lambda: lambda.clone(),
                            alpha,
                            eps,
                        }))
                    }
                    "cesaro" => out.extend(
                        a.q.iter()
                            .map(|&q| Functional::CesaroOrderAlpha { alpha, q }),
                    ),
                    "v_lambda" => out.push(Functional::VLambdaOrderAlpha {
                        lambda: lambda.clone(),
                        alpha,
                    }),
                    other => bail!(
                        "analysis.functionals: unknown functional `{other}` \
                         (expected stat, lambda_stat, cesaro or v_lambda)"
                    ),
                }
            }
        }
        let mut seen = std::collections::HashSet::new();
        out.retain(|f| seen.insert(f.label()));
        Ok(out)
    }
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        bail!("alpha must lie in (0, 1], got {alpha}");
    }
    Ok(())
}

pub fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        bail!("eps must be positive, got {eps}");
    }
    Ok(())
}

pub fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q <= MAX_Q) {
        bail!("q must lie in (0, {MAX_Q}], got {q}");
    }
    Ok(())
}

fn builtin_metric(name: &str) -> Result<PartialMetricSpec> {
    Ok(match name {
        "max" => PartialMetricSpec::Max,
        "neg_min" | "negmin" => PartialMetricSpec::NegMin,
        "usual" => PartialMetricSpec::Usual,
        other => bail!("unknown metric `{other}` (expected max, neg_min, usual or custom:PATH)"),
    })
}

/// `max`, `neg_min`, `usual` or `custom:PATH`.
pub fn parse_metric(spec: &str) -> Result<PartialMetricSpec> {
    match spec.split_once(':') {
        Some(("custom", path)) => Ok(PartialMetricSpec::Custom {
            table: CustomTable::from_csv_path(path).map_err(|e| anyhow!("--metric: {e}"))?,
        }),
        _ => builtin_metric(spec).map_err(|e| anyhow!("--metric: {e}")),
    }
}

/// `identity`, `affine:A`, `log` or `table:PATH`.
pub fn parse_lambda(spec: &str) -> Result<LambdaSpec> {
    let (kind, arg) = match spec.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (spec, None),
    };
    Ok(match (kind, arg) {
        ("identity", None) => LambdaSpec::Identity,
        ("log" | "logarithmic", None) => LambdaSpec::Logarithmic,
        ("affine", Some(a)) => {
            let slope: f64 = a.parse().map_err(|_| anyhow!("bad affine slope `{a}`"))?;
            if !(slope > 0.0 && slope <= 1.0) {
                bail!("affine slope must lie in (0, 1], got {slope}");
            }
            LambdaSpec::Affine { slope }
        }
        ("table", Some(path)) => LambdaSpec::from_csv_path(path)?,
        _ => bail!("bad lambda spec `{spec}` (expected identity, affine:A, log or table:PATH)"),
    })
}

/// `square`, `constant:V`, `eventually:V:FROM[:HEAD]`, `poly:GAMMA[:V]`,
/// `tail:LAMBDA[:neg]` or `table:PATH`.
pub fn parse_sequence(spec: &str) -> Result<SequenceSpec> {
    let num = |s: &str| -> Result<f64> {
        s.parse()
            .map_err(|_| anyhow!("bad number `{s}` in `{spec}`"))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let seq = match parts.as_slice() {
        ["square"] => SequenceSpec::square_indicator(),
        ["constant", v] => SequenceSpec::constant(num(v)?),
        ["eventually", v, from, rest @ ..] if rest.len() <= 1 => {
            let value = num(v)?;
            SequenceSpec::new(
                SequenceKind::EventuallyConstant {
                    value,
                    from: from.parse().map_err(|_| anyhow!("bad index `{from}`"))?,
                    head: rest.first().map(|h| num(h)).transpose()?.unwrap_or(0.0),
                },
                value,
            )
        }
        ["poly", g] => SequenceSpec::polynomial_exceptions(num(g)?, 1.0),
        ["poly", g, v] => SequenceSpec::polynomial_exceptions(num(g)?, num(v)?),
        ["tail", ..] => {
            let rest = &spec["tail:".len()..];
            let (lambda, negate) = match rest.strip_suffix(":neg") {
                Some(l) => (l, true),
                None => (rest, false),
            };
            SequenceSpec::tail_block(parse_lambda(lambda)?, negate)
        }
        ["table", ..] => SequenceSpec::table_from_csv(&spec["table:".len()..], 0.0)?,
        _ => bail!("bad sequence spec `{spec}`"),
    };
    seq.validate()?;
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_strings() {
        assert_eq!(
            parse_lambda("affine:0.5").unwrap(),
            LambdaSpec::Affine { slope: 0.5 }
        );
        assert_eq!(parse_lambda("log").unwrap(), LambdaSpec::Logarithmic);
        assert!(parse_lambda("affine:2").is_err());
        assert_eq!(parse_metric("negmin").unwrap(), PartialMetricSpec::NegMin);
        assert_eq!(
            parse_sequence("tail:affine:0.5:neg").unwrap(),
            SequenceSpec::tail_block(LambdaSpec::Affine { slope: 0.5 }, true)
        );
        assert_eq!(
            parse_sequence("poly:0.7").unwrap(),
            SequenceSpec::polynomial_exceptions(0.7, 1.0)
        );
        assert!(parse_sequence("poly:1.5").is_err());
    }

    #[test]
    fn field_diagnostics() {
        let mut cfg: ExperimentConfig = toml::from_str("[analysis]\neps = [0.5, 0.0]").unwrap();
        let err = cfg.functionals().unwrap_err().to_string();
        assert_eq!(err, "analysis.eps[1]: eps must be positive, got 0");
        cfg.analysis.eps = vec![0.5];
        cfg.analysis.functionals = vec!["stat".into(), "cesaro".into()];
        cfg.analysis.alpha = vec![0.5, 1.0];
        cfg.analysis.q = vec![1.0, 2.0];
        assert_eq!(cfg.functionals().unwrap().len(), 2 + 4);
        assert!(toml::from_str::<ExperimentConfig>("[analysis]\nalhpa = [1.0]").is_err());
    }
}
