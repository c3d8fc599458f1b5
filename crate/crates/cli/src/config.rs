//! JSON experiment configurations.
//!
//! A configuration is one JSON object whose `"kind"` field selects the
//! schema; unknown fields are rejected everywhere.

use std::path::Path;
use std::sync::Arc;

use cflimits::limitset::{geometric_tail, normalize_elliptic, EllipticCFSpec, Polynomial};
use cflimits::matprod::{max_norm, Matrix, Side};
use cflimits::Complex64;
use serde::Deserialize;
use serde_json::Value;

use crate::angle::parse_angle;
use crate::error::{CliError, CliResult};

/// Default convergence tolerance.
pub const DEFAULT_TOL: f64 = 1e-13;
/// Default term budget.
pub const DEFAULT_MAX_N: usize = 100_000;

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// A complex number: a JSON number, a pair `[re, im]`, or a string holding a
/// decimal or a fraction such as `"4/3"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ComplexInput {
    Real(f64),
    Pair([f64; 2]),
    Text(String),
}

impl ComplexInput {
    pub fn value(&self) -> CliResult<Complex64> {
        let z = match self {
            ComplexInput::Real(x) => Complex64::new(*x, 0.0),
            ComplexInput::Pair([re, im]) => Complex64::new(*re, *im),
            ComplexInput::Text(t) => {
                let t = t.trim();
                let x = match t.split_once('/') {
                    Some((n, d)) => {
                        let n: f64 = n.trim().parse().map_err(|_| config_err(format!("bad number {t:?}")))?;
                        let d: f64 = d.trim().parse().map_err(|_| config_err(format!("bad number {t:?}")))?;
                        n / d
                    }
                    None => t.parse().map_err(|_| config_err(format!("bad number {t:?}")))?,
                };
                Complex64::new(x, 0.0)
            }
        };
        if z.re.is_finite() && z.im.is_finite() {
            Ok(z)
        } else {
            Err(config_err(format!("number {self:?} is not finite")))
        }
    }
}

fn matrix_from(rows: &[Vec<ComplexInput>]) -> CliResult<Matrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(config_err("matrices must be square and nonempty"));
    }
    let mut m = Matrix::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            m[(i, j)] = x.value()?;
        }
    }
    Ok(m)
}

/// A sequence `n ↦ x_n`, `n ≥ 1`, with a summable tail.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum SeqDesc {
    /// `x_n = 0`.
    Zero,
    /// `x_n = scale · ratio^n` with `|ratio| < 1`.
    Geometric { ratio: ComplexInput, scale: Option<ComplexInput> },
    /// `x_n = Σ_k c_k q^{nk}` with `coefficients = [c_1, c_2, …]` and `|q| < 1`.
    Polynomial { q: ComplexInput, coefficients: Vec<ComplexInput> },
}

/// A resolved sequence with a bound on `Σ_{k>n} |x_k|`.
#[derive(Clone)]
pub struct Sequence {
    pub term: Arc<dyn Fn(usize) -> Complex64 + Send + Sync>,
    pub tail: Arc<dyn Fn(usize) -> f64 + Send + Sync>,
}

impl SeqDesc {
    pub fn resolve(&self) -> CliResult<Sequence> {
        match self {
            SeqDesc::Zero => Ok(Sequence { term: Arc::new(|_| Complex64::new(0.0, 0.0)), tail: Arc::new(|_| 0.0) }),
            SeqDesc::Geometric { ratio, scale } => {
                let r = ratio.value()?;
                let s = scale.as_ref().map(ComplexInput::value).transpose()?.unwrap_or(Complex64::new(1.0, 0.0));
                if r.norm() >= 1.0 {
                    return Err(config_err("geometric ratio must have modulus < 1"));
                }
                let (rn, sn) = (r.norm(), s.norm());
                Ok(Sequence {
                    term: Arc::new(move |n| s * r.powu(n as u32)),
                    tail: Arc::new(move |n| sn * geometric_tail(rn, n)),
                })
            }
            SeqDesc::Polynomial { q, coefficients } => {
                let q = q.value()?;
                if q.norm() >= 1.0 {
                    return Err(config_err("polynomial base q must have modulus < 1"));
                }
                let mut coeffs = vec![Complex64::new(0.0, 0.0)];
                for c in coefficients {
                    coeffs.push(c.value()?);
                }
                let poly = Polynomial::new(coeffs)?;
                let p2 = poly.clone();
                let r = q.norm();
                Ok(Sequence {
                    term: Arc::new(move |n| poly.eval(q.powu(n as u32))),
                    tail: Arc::new(move |n| p2.tail_bound(r, n)),
                })
            }
        }
    }
}

/// An elliptic limit-periodic continued fraction, either in normalized form
/// `K (q_n − αβ)/(α + β + p_n)` (`alpha`, `beta`, `p`, `q`) or as
/// `K (a + a_tail_n)/(b + b_tail_n)` (`a`, `b`, `a_tail`, `b_tail`).
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CfSource {
    pub alpha: Option<String>,
    pub beta: Option<String>,
    pub p: Option<SeqDesc>,
    pub q: Option<SeqDesc>,
    pub a: Option<ComplexInput>,
    pub b: Option<ComplexInput>,
    pub a_tail: Option<SeqDesc>,
    pub b_tail: Option<SeqDesc>,
}

/// A continued fraction ready for analysis: values of the configured
/// continued fraction are `scale` times values of `spec`'s.
#[derive(Clone, Debug)]
pub struct ResolvedCf {
    pub spec: EllipticCFSpec,
    pub scale: f64,
}

impl CfSource {
    pub fn normalized(alpha: &str, beta: &str, p: SeqDesc, q: SeqDesc) -> Self {
        CfSource {
            alpha: Some(alpha.into()),
            beta: Some(beta.into()),
            p: Some(p),
            q: Some(q),
            a: None,
            b: None,
            a_tail: None,
            b_tail: None,
        }
    }

    pub fn raw(a: ComplexInput, b: ComplexInput, a_tail: SeqDesc, b_tail: SeqDesc) -> Self {
        CfSource {
            alpha: None,
            beta: None,
            p: None,
            q: None,
            a: Some(a),
            b: Some(b),
            a_tail: Some(a_tail),
            b_tail: Some(b_tail),
        }
    }

    pub fn resolve(&self) -> CliResult<ResolvedCf> {
        let normalized = self.alpha.is_some() || self.beta.is_some() || self.p.is_some() || self.q.is_some();
        let raw = self.a.is_some() || self.b.is_some() || self.a_tail.is_some() || self.b_tail.is_some();
        match (normalized, raw) {
            (true, false) => {
                let alpha =
                    parse_angle(self.alpha.as_deref().ok_or_else(|| config_err("missing alpha"))?)?.to_unit()?;
                let beta = parse_angle(self.beta.as_deref().ok_or_else(|| config_err("missing beta"))?)?.to_unit()?;
                let p = self.p.clone().unwrap_or(SeqDesc::Zero).resolve()?;
                let q = self.q.clone().unwrap_or(SeqDesc::Zero).resolve()?;
                let (pt, qt) = (p.tail.clone(), q.tail.clone());
                let (pf, qf) = (p.term.clone(), q.term.clone());
                let spec = EllipticCFSpec::new(alpha, beta, move |n| pf(n), move |n| qf(n))?
                    .with_tail_bound(move |n| pt(n) + qt(n));
                Ok(ResolvedCf { spec, scale: 1.0 })
            }
            (false, true) => {
                let a = self.a.as_ref().ok_or_else(|| config_err("missing a"))?.value()?;
                let b = self.b.as_ref().ok_or_else(|| config_err("missing b"))?.value()?;
                let at = self.a_tail.clone().unwrap_or(SeqDesc::Zero).resolve()?;
                let bt = self.b_tail.clone().unwrap_or(SeqDesc::Zero).resolve()?;
                let (af, bf) = (at.term.clone(), bt.term.clone());
                let (d, spec) = normalize_elliptic(move |n| a + af(n), move |n| b + bf(n), a, b)?;
                let (atl, btl) = (at.tail.clone(), bt.tail.clone());
                let spec = spec.with_tail_bound(move |n| btl(n) / d + atl(n) / (d * d));
                Ok(ResolvedCf { spec, scale: d })
            }
            (true, true) => Err(config_err("give either alpha/beta/p/q or a/b/a_tail/b_tail, not both")),
            (false, false) => Err(config_err("continued fraction needs alpha and beta, or a and b")),
        }
    }
}

/// `"kind": "elliptic-cf"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EllipticConfig {
    pub cf: CfSource,
    pub tol: Option<f64>,
    pub max_n: Option<usize>,
}

/// `D_i = M + E·ratio^i`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub matrix: Vec<Vec<ComplexInput>>,
    pub ratio: f64,
}

impl Perturbation {
    /// `(E, ratio, ‖E‖)`.
    fn resolve(&self) -> CliResult<(Matrix, f64)> {
        if !(0.0..1.0).contains(&self.ratio) {
            return Err(config_err("perturbation ratio must lie in [0, 1)"));
        }
        Ok((matrix_from(&self.matrix)?, self.ratio))
    }
}

/// A perturbed constant matrix sequence `D_i = M + E·r^i` with its tail bound.
#[derive(Clone, Debug)]
pub struct PerturbedMatrices {
    pub limit: Matrix,
    pub perturbation: Matrix,
    pub ratio: f64,
}

impl PerturbedMatrices {
    fn new(limit: &[Vec<ComplexInput>], perturbation: Option<&Perturbation>) -> CliResult<Self> {
        let limit = matrix_from(limit)?;
        let (perturbation, ratio) = match perturbation {
            Some(p) => p.resolve()?,
            None => (Matrix::zeros(limit.nrows(), limit.ncols()), 0.0),
        };
        if perturbation.nrows() != limit.nrows() {
            return Err(config_err("perturbation and limit matrices differ in size"));
        }
        Ok(PerturbedMatrices { limit, perturbation, ratio })
    }

    pub fn term(&self) -> impl Fn(usize) -> Matrix + Send + Sync + Clone + 'static {
        let (m, e, r) = (self.limit.clone(), self.perturbation.clone(), self.ratio);
        move |i| &m + &e * Complex64::new(r.powi(i as i32), 0.0)
    }

    pub fn tail(&self) -> impl Fn(usize) -> f64 + Send + Sync + Clone + 'static {
        let (e, r) = (max_norm(&self.perturbation), self.ratio);
        move |n| e * geometric_tail(r, n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SideInput {
    #[default]
    Left,
    Right,
}

impl From<SideInput> for Side {
    fn from(s: SideInput) -> Side {
        match s {
            SideInput::Left => Side::Left,
            SideInput::Right => Side::Right,
        }
    }
}

/// `"kind": "matrix-product"`: `F = lim ∏D_i (∏M)^{−1}` for `D_i = M + E·r^i`,
/// with residue limits when `order` (the order of `M`) is given.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixProductConfig {
    pub m: Vec<Vec<ComplexInput>>,
    pub perturbation: Option<Perturbation>,
    #[serde(default)]
    pub side: SideInput,
    pub order: Option<usize>,
    pub tol: Option<f64>,
    pub max_n: Option<usize>,
}

impl MatrixProductConfig {
    pub fn matrices(&self) -> CliResult<PerturbedMatrices> {
        PerturbedMatrices::new(&self.m, self.perturbation.as_ref())
    }
}

/// Coefficient perturbation `a_{n,r} = limit_r + coefficients_r · ratio^n`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientPerturbation {
    pub coefficients: Vec<ComplexInput>,
    pub ratio: f64,
}

/// `"kind": "recurrence"`: `x_{n+p} = Σ a_{n,r} x_{n+r}`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecurrenceConfig {
    pub limits: Vec<ComplexInput>,
    pub perturbation: Option<CoefficientPerturbation>,
    pub initial: Vec<ComplexInput>,
    pub perron_n: Option<usize>,
    pub tol: Option<f64>,
    pub max_n: Option<usize>,
}

/// `"kind": "rs-cf"`: `(r,s)`-matrix continued fraction with `θ_k = θ + E·ratio^k`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RsConfig {
    pub r: usize,
    pub s: usize,
    pub theta: Vec<Vec<ComplexInput>>,
    pub perturbation: Option<Perturbation>,
    pub count: Option<usize>,
    pub order: Option<usize>,
    pub tol: Option<f64>,
    pub max_n: Option<usize>,
}

impl RsConfig {
    pub fn matrices(&self) -> CliResult<PerturbedMatrices> {
        PerturbedMatrices::new(&self.theta, self.perturbation.as_ref())
    }
}

/// Identity checks run by `verify`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    #[serde(rename = "ramanujan-3lim")]
    Ramanujan3lim,
    Rbm,
    SternStolz,
    BauerMuir,
    RogersRamanujan,
}

impl Suite {
    pub const ALL: [Suite; 5] =
        [Suite::Ramanujan3lim, Suite::Rbm, Suite::SternStolz, Suite::BauerMuir, Suite::RogersRamanujan];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Ramanujan3lim => "ramanujan-3lim",
            Suite::Rbm => "rbm",
            Suite::SternStolz => "stern-stolz",
            Suite::BauerMuir => "bauer-muir",
            Suite::RogersRamanujan => "rogers-ramanujan",
        }
    }

    pub fn parse(name: &str) -> CliResult<Suite> {
        Suite::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| config_err(format!("unknown suite {name:?}; expected one of {}", suite_names())))
    }
}

fn suite_names() -> String {
    Suite::ALL.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ")
}

/// `"kind": "q-identity"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub suites: Option<Vec<Suite>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FigureKind {
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Custom,
}

impl FigureKind {
    pub fn parse(name: &str) -> CliResult<FigureKind> {
        serde_json::from_value(Value::String(name.into()))
            .map_err(|_| config_err(format!("unknown figure {name:?}; expected fig3, fig4, fig5, fig6 or custom")))
    }

    pub fn name(self) -> &'static str {
        match self {
            FigureKind::Fig3 => "fig3",
            FigureKind::Fig4 => "fig4",
            FigureKind::Fig5 => "fig5",
            FigureKind::Fig6 => "fig6",
            FigureKind::Custom => "custom",
        }
    }
}

/// `"kind": "figure"`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureConfig {
    pub which: FigureKind,
    pub cf: Option<CfSource>,
    /// Number of approximants.
    pub count: Option<usize>,
    /// Drop approximants with modulus above this value.
    pub trim: Option<f64>,
    /// Histogram bins (real-valued continued fractions).
    pub bins: Option<usize>,
    /// Draw the predicted curve and concentration points.
    pub overlay: Option<bool>,
    pub tol: Option<f64>,
    pub max_n: Option<usize>,
}

/// Any configuration document.
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentConfig {
    EllipticCf(EllipticConfig),
    MatrixProduct(MatrixProductConfig),
    Recurrence(RecurrenceConfig),
    RsCf(RsConfig),
    QIdentity(VerifyConfig),
    Figure(FigureConfig),
}

impl ExperimentConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentConfig::EllipticCf(_) => "elliptic-cf",
            ExperimentConfig::MatrixProduct(_) => "matrix-product",
            ExperimentConfig::Recurrence(_) => "recurrence",
            ExperimentConfig::RsCf(_) => "rs-cf",
            ExperimentConfig::QIdentity(_) => "q-identity",
            ExperimentConfig::Figure(_) => "figure",
        }
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let mut v: Value = serde_json::from_str(text).map_err(config_err)?;
        let obj = v.as_object_mut().ok_or_else(|| config_err("configuration must be a JSON object"))?;
        let kind = match obj.remove("kind") {
            Some(Value::String(k)) => k,
            _ => return Err(config_err("configuration needs a string field \"kind\"")),
        };
        fn body<T: serde::de::DeserializeOwned>(v: Value) -> CliResult<T> {
            serde_json::from_value(v).map_err(config_err)
        }
        Ok(match kind.as_str() {
            "elliptic-cf" => ExperimentConfig::EllipticCf(body(v)?),
            "matrix-product" => ExperimentConfig::MatrixProduct(body(v)?),
            "recurrence" => ExperimentConfig::Recurrence(body(v)?),
            "rs-cf" => ExperimentConfig::RsCf(body(v)?),
            "q-identity" => ExperimentConfig::QIdentity(body(v)?),
            "figure" => ExperimentConfig::Figure(body(v)?),
            other => return Err(config_err(format!("unknown kind {other:?}"))),
        })
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }
}

/// Resolves tolerance and budget: command-line flags override the config.
pub fn settings(
    tol: Option<f64>,
    max_n: Option<usize>,
    flag_tol: Option<f64>,
    flag_max_n: Option<usize>,
) -> CliResult<(f64, usize)> {
    let tol = flag_tol.or(tol).unwrap_or(DEFAULT_TOL);
    let max_n = flag_max_n.or(max_n).unwrap_or(DEFAULT_MAX_N);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(config_err(format!("tolerance must be positive, got {tol}")));
    }
    if max_n == 0 {
        return Err(config_err("max_n must be positive"));
    }
    Ok((tol, max_n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_elliptic() {
        let c = ExperimentConfig::parse(
            r#"{"kind": "elliptic-cf", "cf": {"alpha": "sqrt(11)", "beta": "sqrt(13)",
                "p": {"geometric": {"ratio": 0.3}}, "q": {"geometric": {"ratio": 0.2}}}, "tol": 1e-12}"#,
        )
        .unwrap();
        let ExperimentConfig::EllipticCf(e) = c else { panic!() };
        assert_eq!(e.tol, Some(1e-12));
        let r = e.cf.resolve().unwrap();
        assert_eq!(r.scale, 1.0);
        assert!((r.spec.p(2) - 0.09).norm() < 1e-15);
    }

    #[test]
    fn parses_raw_form() {
        let c = ExperimentConfig::parse(
            r#"{"kind": "elliptic-cf", "cf": {"a": -1, "b": "4/3", "a_tail": "zero", "b_tail": "zero"}}"#,
        )
        .unwrap();
        let ExperimentConfig::EllipticCf(e) = c else { panic!() };
        let r = e.cf.resolve().unwrap();
        assert!((r.scale - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_unknown_fields_and_kinds() {
        for bad in [
            r#"{"kind": "elliptic-cf", "cf": {"alpha": "1", "beta": "2"}, "extra": 1}"#,
            r#"{"kind": "elliptic-cf", "cf": {"alpha": "1", "beta": "2", "gamma": "3"}}"#,
            r#"{"kind": "elliptic-cf", "cf": {"alpha": "1", "beta": "2", "p": {"geometric": {"ratio": 0.1, "x": 1}}}}"#,
            r#"{"kind": "nope"}"#,
            r#"{"cf": {}}"#,
            r#"[1, 2]"#,
        ] {
            assert!(matches!(ExperimentConfig::parse(bad), Err(CliError::Config(_))), "{bad}");
        }
        let mixed = CfSource {
            a: Some(ComplexInput::Real(1.0)),
            ..CfSource::normalized("1", "2", SeqDesc::Zero, SeqDesc::Zero)
        };
        assert!(matches!(mixed.resolve(), Err(CliError::Config(_))));
    }

    #[test]
    fn sequences() {
        let s = SeqDesc::Polynomial {
            q: ComplexInput::Real(0.5),
            coefficients: vec![ComplexInput::Real(1.0), ComplexInput::Real(2.0)],
        }
        .resolve()
        .unwrap();
        assert!(((s.term)(1) - 1.0).norm() < 1e-15);
        let direct: f64 = (3..200).map(|n| ((s.term)(n)).norm()).sum();
        assert!((s.tail)(2) >= direct);
        assert!(SeqDesc::Geometric { ratio: ComplexInput::Real(1.5), scale: None }.resolve().is_err());
    }
}
