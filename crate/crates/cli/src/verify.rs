//! `verify`: identity checks with pinned tolerances.

use std::fmt::Write;

use cflimits::bauermuir::{bm_at_infinity, bm_at_lambda_power, bm_at_zero, rbm_identity};
use cflimits::limitset::{compute_h_direct, geometric_tail, residue_limits, EllipticCFSpec};
use cflimits::qseries::{rogers_ramanujan_two_limits, verify_ramanujan_claim, QParams};
use cflimits::{c64, chordal_distance, Complex64, ExtendedComplex, UnitModulusNumber};

use crate::config::{settings, ExperimentConfig, Suite};
use crate::error::{CliError, CliResult};
use crate::output::fmt_num;
use crate::Artifacts;

/// One row of the table.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    /// The residual, or the error that prevented computing it.
    pub residual: Result<f64, String>,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        matches!(self.residual, Ok(r) if r < self.tolerance)
    }
}

fn check(suite: Suite, name: String, tolerance: f64, residual: cflimits::Result<f64>) -> Check {
    Check { suite, name, residual: residual.map_err(|e| e.to_string()), tolerance }
}

fn numeric(angle: f64) -> UnitModulusNumber {
    UnitModulusNumber::numeric(angle).expect("finite angle")
}

/// `α = 1`, `β = −1`: partial numerators `1 + q_n`, denominators `p_n`.
fn stern_stolz_spec(p_ratio: f64, q_ratio: f64) -> cflimits::Result<EllipticCFSpec> {
    let one = UnitModulusNumber::exact_root(0, 1)?;
    let minus = UnitModulusNumber::exact_root(1, 2)?;
    Ok(EllipticCFSpec::geometric(one, minus, c64(p_ratio, 0.0), c64(q_ratio, 0.0))?
        .with_tail_bound(move |n| geometric_tail(p_ratio, n) + geometric_tail(q_ratio, n)))
}

fn ramanujan(tol: f64, max_n: usize) -> Vec<Check> {
    let mut out = Vec::new();
    for q in [0.1, 0.3] {
        for a in [0.0, 0.05] {
            for j in 0..3 {
                let r = QParams::new(c64(q, 0.0), tol, max_n)
                    .and_then(|p| verify_ramanujan_claim(&p, c64(a, 0.0), j, max_n));
                let label = format!("q={q} a={a} j={j}");
                out.push(check(
                    Suite::Ramanujan3lim,
                    format!("{label} lhs-rhs"),
                    1e-8,
                    r.clone().map(|c| c.check.residual),
                ));
                out.push(check(
                    Suite::Ramanujan3lim,
                    format!("{label} rhs n+3 shift"),
                    1e-12,
                    r.map(|c| c.shift_residual),
                ));
            }
        }
    }
    out
}

fn rbm(tol: f64, max_n: usize) -> Vec<Check> {
    let cases = [(0.3, "sqrt(2)", 2f64.sqrt(), "1", 1.0), (0.5, "sqrt(3)", 3f64.sqrt(), "sqrt(5)", 5f64.sqrt())];
    cases
        .iter()
        .map(|&(q, an, a, bn, b)| {
            let r = QParams::new(c64(q, 0.0), tol, max_n).and_then(|p| rbm_identity(&p, numeric(a), numeric(b), max_n));
            check(Suite::Rbm, format!("q={q} alpha=e^(i {an}) beta=e^(i {bn})"), 1e-10, r.map(|c| c.residual))
        })
        .collect()
}

/// `A_1B_0 − A_0B_1` of the residue limits, compared with `expected`.
fn parity_determinant(spec: &EllipticCFSpec, expected: Complex64, tol: f64, max_n: usize) -> cflimits::Result<f64> {
    let r = residue_limits(spec, tol, max_n)?;
    let det = r.numerators[1] * r.denominators[0] - r.numerators[0] * r.denominators[1];
    Ok((det - expected).norm())
}

fn stern_stolz(tol: f64, max_n: usize) -> Vec<Check> {
    let plain = stern_stolz_spec(1.0 / 3.0, 0.0).and_then(|s| parity_determinant(&s, c64(1.0, 0.0), tol, max_n));
    let product: f64 = (1..=200).map(|n| 1.0 + 0.25f64.powi(n)).product();
    let general = stern_stolz_spec(1.0 / 3.0, 0.25).and_then(|s| parity_determinant(&s, c64(product, 0.0), tol, max_n));
    let parities = stern_stolz_spec(1.0 / 3.0, 0.0).and_then(|s| {
        let r = residue_limits(&s, tol, max_n)?;
        // Distinct parity limits are the divergence the determinant certifies.
        Ok(1.0 / chordal_distance(r.values[0], r.values[1]))
    });
    vec![
        check(Suite::SternStolz, "K 1/3^-n: A1B0-A0B1 = 1".into(), 1e-10, plain),
        check(Suite::SternStolz, "K 1/3^-n: 1/chordal(even, odd)".into(), 1e3, parities),
        check(Suite::SternStolz, "K (1+4^-n)/3^-n: A1B0-A0B1 = prod(1+4^-n)".into(), 1e-10, general),
    ]
}

fn rogers_ramanujan(tol: f64, max_n: usize) -> Vec<Check> {
    [2.0, 3.0]
        .iter()
        .flat_map(|&q| {
            let r = rogers_ramanujan_two_limits(c64(q, 0.0), tol, max_n);
            vec![
                check(
                    Suite::RogersRamanujan,
                    format!("q={q}: A1B0-A0B1 = 1"),
                    1e-10,
                    r.clone().map(|t| (t.determinant - 1.0).norm()),
                ),
                check(
                    Suite::RogersRamanujan,
                    format!("q={q}: 1/chordal(even, odd)"),
                    1e3,
                    r.map(|t| 1.0 / chordal_distance(t.even, t.odd)),
                ),
            ]
        })
        .collect()
}

fn bauer_muir(tol: f64, max_n: usize) -> Vec<Check> {
    let spec =
        match EllipticCFSpec::geometric(numeric(11f64.sqrt()), numeric(13f64.sqrt()), c64(0.3, 0.0), c64(0.2, 0.0)) {
            Ok(s) => s.with_tail_bound(|n| geometric_tail(0.3, n) + geometric_tail(0.2, n)),
            Err(e) => return vec![check(Suite::BauerMuir, "example".into(), 1e-5, Err(e))],
        };
    let h = match compute_h_direct(&spec, tol, max_n) {
        Ok(d) => d.h,
        Err(e) => return vec![check(Suite::BauerMuir, "h".into(), 1e-5, Err(e))],
    };
    let lambda = spec.lambda();
    let mut targets = vec![
        ("h(inf)".to_string(), Ok(bm_at_infinity(&spec)), ExtendedComplex::Infinity),
        ("h(0)".to_string(), Ok(bm_at_zero(&spec)), ExtendedComplex::ZERO),
    ];
    for k in [-1i64, 0, 2] {
        targets.push((
            format!("h(lambda^{})", k + 1),
            bm_at_lambda_power(&spec, k),
            ExtendedComplex::Finite(lambda.pow(k + 1).to_complex()),
        ));
    }
    targets
        .into_iter()
        .map(|(name, bm, z)| {
            let r = bm.and_then(|t| t.evaluate(tol, max_n)).map(|v| chordal_distance(v, h.apply(z)));
            check(Suite::BauerMuir, format!("G(0.3,0.2,e^(i sqrt 11),e^(i sqrt 13)) {name}"), 1e-5, r)
        })
        .collect()
}

pub fn run_suite(suite: Suite, tol: f64, max_n: usize) -> Vec<Check> {
    match suite {
        Suite::Ramanujan3lim => ramanujan(tol, max_n),
        Suite::Rbm => rbm(tol, max_n),
        Suite::SternStolz => stern_stolz(tol, max_n),
        Suite::BauerMuir => bauer_muir(tol, max_n),
        Suite::RogersRamanujan => rogers_ramanujan(tol, max_n),
    }
}

pub fn table(checks: &[Check]) -> String {
    let name_width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0).max(5);
    let mut s = String::new();
    let row = |s: &mut String, a: &str, b: &str, c: &str, d: &str, e: &str| {
        writeln!(s, "{a:<17} {b:<name_width$} {c:>16} {d:>9} {e}").expect("string write");
    };
    row(&mut s, "suite", "check", "residual", "tolerance", "status");
    for c in checks {
        let residual = match &c.residual {
            Ok(r) => fmt_num(*r),
            Err(_) => "error".into(),
        };
        row(
            &mut s,
            c.suite.name(),
            &c.name,
            &residual,
            &fmt_num(c.tolerance),
            if c.passed() { "PASS" } else { "FAIL" },
        );
        if let Err(e) = &c.residual {
            writeln!(s, "  error: {e}").expect("string write");
        }
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    writeln!(s, "{} checks, {} passed, {} failed", checks.len(), checks.len() - failed, failed).expect("string write");
    s
}

/// Runs the selected suites; the second component is the failure to report
/// after the table has been emitted.
pub fn command(
    cfg: Option<ExperimentConfig>,
    names: &[String],
    flag_tol: Option<f64>,
    flag_max_n: Option<usize>,
) -> CliResult<(Artifacts, Option<CliError>)> {
    let configured = match cfg {
        None => None,
        Some(ExperimentConfig::QIdentity(v)) => v.suites,
        Some(other) => {
            return Err(CliError::Config(format!("verify cannot use a configuration of kind {:?}", other.kind())))
        }
    };
    let mut suites: Vec<Suite> = if names.is_empty() {
        configured.unwrap_or_else(|| Suite::ALL.to_vec())
    } else {
        names.iter().map(|n| Suite::parse(n)).collect::<CliResult<_>>()?
    };
    suites.sort();
    suites.dedup();
    let (tol, max_n) = settings(None, None, flag_tol, flag_max_n)?;
    let checks: Vec<Check> = suites.iter().flat_map(|&s| run_suite(s, tol, max_n)).collect();
    let text = table(&checks);
    let failed = checks.iter().filter(|c| !c.passed()).count();
    let failure = (failed > 0).then(|| CliError::Verification(format!("{failed} of {} checks failed", checks.len())));
    Ok((Artifacts { stdout: text.clone(), files: vec![("verify.txt".into(), text)] }, failure))
}
