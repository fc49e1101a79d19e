//! The TOML run manifest and its resolution into an evaluation plan.

use std::path::Path;

use projein::connection::{builtin, ChartSpec, ConnectionField, ConnectionSource, MetricSource, OneFormField, DEFAULT_COUNT, DEFAULT_SEED};
use projein::einstein::{LeftInverseStrategy, NaturalQSpec};
use projein::expr::Expr;
use projein::{Rational, Scalar};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// A rational literal: a TOML integer or a string such as `"-3/4"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Int(i64),
    Text(String),
}

impl Literal {
    pub fn to_rational(&self) -> Result<Rational, CliError> {
        match self {
            Literal::Int(v) => Ok(Rational::integer(*v)),
            Literal::Text(s) => s.parse().map_err(|_| CliError::Manifest(format!("`{s}` is not a rational literal"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(default)]
    pub chart: ChartSection,
    pub connection: ConnectionSection,
    #[serde(default)]
    pub analyses: Analyses,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    /// One `[lo, hi]` pair per coordinate.
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<[Literal; 2]>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Vec<Literal>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConnectionKind {
    Christoffel,
    Metric,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConnectionSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<ConnectionKind>,
    /// `n³` expressions, entry `i·n² + j·n + k` is `Γ^i_{jk}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub christoffel: Option<Vec<String>>,
    /// `n²` expressions `g_{ij}`, row-major.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Vec<String>>,
    /// A 1-form `Υ_i` moving the connection within its projective class.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<Vec<String>>,
    /// Einstein constant `λ` with `P = λg`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Literal>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TractorCheck {
    /// Tractor curvature only; works for any connection.
    Curvature,
    /// Also the parallel Einstein sub-metric; needs a metric.
    Einstein,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyName {
    PseudoInverse,
    NaturalQ,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Analyses {
    #[serde(default)]
    pub invariants: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub chern: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tractor_verify: Option<TractorCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub einstein_check: Option<StrategyName>,
    #[serde(default)]
    pub conformal_bridge: bool,
    #[serde(default)]
    pub wedge_obstruction: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub float: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Ring {
    Exact,
    Float,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ring: Option<Ring>,
}

impl Manifest {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Manifest(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Manifest(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

/// Command-line overrides applied on top of the manifest.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub ring: Option<Ring>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

/// A validated manifest, ready to evaluate.
#[derive(Clone, Debug)]
pub struct Plan {
    pub manifest: Manifest,
    pub field: ConnectionField,
    pub chart: ChartSpec,
    pub points: Vec<Vec<Rational>>,
    pub ring: Ring,
    pub tol: f64,
    pub lambda: Option<Rational>,
    pub strategy: Option<LeftInverseStrategy>,
}

impl Plan {
    pub fn n(&self) -> usize {
        self.field.dim()
    }

    pub fn metric(&self) -> Option<&MetricSource> {
        self.field.metric()
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Manifest(msg.into())
}

fn parse_exprs(what: &str, entries: &[String], n: usize) -> Result<Vec<Expr>, CliError> {
    entries
        .iter()
        .enumerate()
        .map(|(i, s)| Expr::parse(s, n).map_err(|e| bad(format!("{what}[{i}] `{s}`: {e}"))))
        .collect()
}

pub fn resolve(manifest: Manifest, ov: &Overrides) -> Result<Plan, CliError> {
    let c = &manifest.connection;
    let dim = manifest.chart.dimension;
    let (source, default_bounds, builtin_lambda, prefers_float) = match (&c.builtin, c.kind) {
        (Some(name), None) => {
            if c.christoffel.is_some() || c.metric.is_some() {
                return Err(bad("`builtin` excludes `christoffel` and `metric`"));
            }
            let b = builtin(name, dim).map_err(|e| bad(e.to_string()))?;
            (b.source, Some(b.bounds), b.einstein_lambda, b.prefers_float)
        }
        (Some(_), Some(_)) => return Err(bad("give either `builtin` or `kind`, not both")),
        (None, None) => return Err(bad("[connection] needs `builtin` or `kind`")),
        (None, Some(kind)) => {
            let n = dim.ok_or_else(|| bad("[chart] dimension is required for explicit connections"))?;
            if !(2..=6).contains(&n) {
                return Err(bad(format!("chart dimension {n} outside 2..=6")));
            }
            let src = match (kind, &c.christoffel, &c.metric) {
                (ConnectionKind::Christoffel, Some(g), None) => {
                    if g.len() != n * n * n {
                        return Err(bad(format!("{} Christoffel entries, expected {}", g.len(), n * n * n)));
                    }
                    ConnectionSource::christoffel(n, parse_exprs("christoffel", g, n)?).map_err(|e| bad(e.to_string()))?
                }
                (ConnectionKind::Metric, None, Some(g)) => {
                    if g.len() != n * n {
                        return Err(bad(format!("{} metric entries, expected {}", g.len(), n * n)));
                    }
                    let m = MetricSource::new(n, parse_exprs("metric", g, n)?).map_err(|e| bad(e.to_string()))?;
                    ConnectionSource::Metric(m)
                }
                (ConnectionKind::Christoffel, _, _) => return Err(bad("kind = \"christoffel\" needs exactly `christoffel`")),
                (ConnectionKind::Metric, _, _) => return Err(bad("kind = \"metric\" needs exactly `metric`")),
            };
            (src, None, None, false)
        }
    };
    let n = source.dim();
    let field = match &c.shift {
        None => ConnectionField::new(source),
        Some(s) => {
            if s.len() != n {
                return Err(bad(format!("{} shift components for n = {n}", s.len())));
            }
            let exprs = parse_exprs("shift", s, n)?;
            ConnectionField::shifted(source, OneFormField { components: exprs }).map_err(|e| bad(e.to_string()))?
        }
    };

    let bounds = match &manifest.chart.bounds {
        Some(b) => b
            .iter()
            .map(|[lo, hi]| Ok((lo.to_rational()?, hi.to_rational()?)))
            .collect::<Result<Vec<_>, CliError>>()?,
        None => default_bounds.unwrap_or_else(|| vec![(Rational::integer(-1), Rational::one()); n]),
    };
    if bounds.len() != n {
        return Err(bad(format!("box has {} intervals for n = {n}", bounds.len())));
    }
    let mut chart = ChartSpec::new(bounds);
    chart.points = manifest
        .chart
        .points
        .iter()
        .map(|p| p.iter().map(Literal::to_rational).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()?;
    chart.count = manifest.chart.count.unwrap_or(DEFAULT_COUNT);
    chart.seed = ov.seed.or(manifest.chart.seed).unwrap_or(DEFAULT_SEED);
    chart.validate().map_err(|e| bad(e.to_string()))?;
    let points = chart.sample_points();
    if points.is_empty() {
        return Err(bad("no sample points (count = 0 and no explicit points)"));
    }

    let a = &manifest.analyses;
    let has_metric = field.metric().is_some();
    if a.conformal_bridge && !has_metric {
        return Err(bad("conformal_bridge needs a metric, but the connection is given by Christoffel symbols"));
    }
    if a.tractor_verify == Some(TractorCheck::Einstein) && !has_metric {
        return Err(bad("tractor_verify = \"einstein\" needs a metric, but the connection is given by Christoffel symbols"));
    }
    if a.conformal_bridge && n < 3 {
        return Err(bad("conformal_bridge needs n >= 3"));
    }
    for &k in &a.chern {
        if k == 0 || 2 * k > n {
            return Err(bad(format!("chern degree k = {k} needs 1 <= 2k <= n = {n}")));
        }
    }
    let strategy = a.einstein_check.map(|s| match s {
        StrategyName::PseudoInverse => LeftInverseStrategy::PseudoInverse,
        StrategyName::NaturalQ => LeftInverseStrategy::NaturalQ(NaturalQSpec::standard(n)),
    });

    let lambda = match &c.lambda {
        Some(l) => Some(l.to_rational()?),
        None => builtin_lambda,
    };
    if a.tractor_verify == Some(TractorCheck::Einstein) && n == 2 && lambda.is_none() {
        return Err(bad("tractor_verify = \"einstein\" in n = 2 needs a declared `lambda`"));
    }
    let ring = ov.ring.or(manifest.output.ring).unwrap_or(if prefers_float { Ring::Float } else { Ring::Exact });
    let tol = ov.tol.or(manifest.tolerances.float).unwrap_or(DEFAULT_TOLERANCE);
    if !(tol.is_finite() && tol > 0.0) {
        return Err(bad(format!("tolerance {tol} must be positive")));
    }
    Ok(Plan { manifest, field, chart, points, ring, tol, lambda, strategy })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_manifest_resolves_with_defaults() {
        let m = Manifest::parse("[connection]\nbuiltin = \"s2xs2\"\n[analyses]\neinstein_check = \"pseudo-inverse\"\n").unwrap();
        let plan = resolve(m, &Overrides::default()).unwrap();
        assert_eq!(plan.n(), 4);
        assert_eq!(plan.points.len(), DEFAULT_COUNT);
        assert_eq!(plan.ring, Ring::Exact);
        assert_eq!(plan.lambda, Some(Rational::new(1, 3)));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(Manifest::parse("[connection]\nbuiltin = \"flat\"\ncolour = 1\n"), Err(CliError::Manifest(_))));
    }

    #[test]
    fn metric_analyses_need_a_metric() {
        let m = Manifest::parse(
            "[chart]\ndimension = 2\n[connection]\nkind = \"christoffel\"\nchristoffel = [\"0\",\"0\",\"0\",\"0\",\"0\",\"0\",\"0\",\"0\"]\n[analyses]\nconformal_bridge = true\n",
        )
        .unwrap();
        let err = resolve(m, &Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("needs a metric"));
    }

    #[test]
    fn literals_accept_integers_and_fractions() {
        let m = Manifest::parse(
            "[chart]\ndimension = 2\nbox = [[-1, 1], [\"-1/2\", \"1/2\"]]\npoints = [[0, \"1/4\"]]\ncount = 0\n[connection]\nkind = \"metric\"\nmetric = [\"1\", \"0\", \"0\", \"1 + x1^2\"]\n",
        )
        .unwrap();
        let plan = resolve(m, &Overrides::default()).unwrap();
        assert_eq!(plan.points, vec![vec![Rational::zero(), Rational::new(1, 4)]]);
    }
}
