//! `limit-set`: the limit set of an elliptic continued fraction.

use cflimits::limitset::{analyze, concentration_points, count_distinct, LimitSetReport, DISTINCT_TOL};
use cflimits::{chordal_distance, Complex64, ExtendedComplex, MobiusMap};
use serde_json::{json, Value};

use crate::config::{settings, EllipticConfig, ResolvedCf};
use crate::error::CliResult;
use crate::output::{self, complex, extended, num};
use crate::Artifacts;

/// `x ↦ scale·x` applied to a point of the sphere.
pub fn scale_point(z: ExtendedComplex, scale: f64) -> ExtendedComplex {
    match z {
        ExtendedComplex::Finite(w) => ExtendedComplex::Finite(w * scale),
        ExtendedComplex::Infinity => ExtendedComplex::Infinity,
    }
}

/// Chordal distance from `∞` below which a value of `h` is reported as `∞`.
/// `h` is canonical (largest coefficient of modulus one), so larger finite
/// values only arise from cancellation in the denominator.
pub const INFINITY_SNAP: f64 = 1e-12;

/// `h(z)`, with values within [`INFINITY_SNAP`] of `∞` replaced by `∞`.
pub fn h_value(h: &MobiusMap, z: ExtendedComplex) -> ExtendedComplex {
    let v = h.apply(z);
    if chordal_distance(v, ExtendedComplex::Infinity) < INFINITY_SNAP {
        ExtendedComplex::Infinity
    } else {
        v
    }
}

/// `scale·h`, in canonical normalization.
pub fn scale_map(h: &MobiusMap, scale: f64) -> CliResult<MobiusMap> {
    let [a, b, c, d] = h.coefficients();
    Ok(MobiusMap::new(a * scale, b * scale, c, d)?.canonical())
}

/// The analysis of a continued fraction expressed in its original scale.
pub struct ScaledReport {
    pub report: LimitSetReport,
    pub h: MobiusMap,
    pub scale: f64,
}

pub fn analyze_scaled(cf: &ResolvedCf, tol: f64, max_n: usize) -> CliResult<ScaledReport> {
    let report = analyze(&cf.spec, tol, max_n)?;
    let h = scale_map(&report.h, cf.scale)?;
    Ok(ScaledReport { report, h, scale: cf.scale })
}

pub fn report_json(s: &ScaledReport) -> Value {
    let r = &s.report;
    let h = &s.h;
    let points: Vec<ExtendedComplex> = r.limit_points.iter().map(|&z| scale_point(z, s.scale)).collect();
    let residues = r.residue_limits.as_ref().map(|l| {
        json!({
            "m": l.m,
            "rank": l.rank,
            "numerators": l.numerators.iter().map(|&z| complex(z)).collect::<Vec<_>>(),
            "denominators": l.denominators.iter().map(|&z| complex(z)).collect::<Vec<_>>(),
            "product": complex(l.product),
            "closed_form_residual": num(l.closed_form_residual),
            "determinant_residual": num(l.determinant_residual),
            "periodicity_residual": num(l.periodicity_residual),
        })
    });
    json!({
        "h": output::mobius(h),
        "normalization_scale": num(s.scale),
        "lambda_order": output::order(r.m),
        "rank": output::order(r.rank),
        "geometry": output::geometry(&h.image_of_unit_circle()),
        "concentration": output::concentration(&concentration_points(h, r.m)),
        "det_product": complex(r.det_product * Complex64::new(s.scale, 0.0)),
        "h_values": {
            "at_infinity": extended(h_value(h, ExtendedComplex::Infinity)),
            "at_zero": extended(h_value(h, ExtendedComplex::ZERO)),
            "at_one": extended(h_value(h, ExtendedComplex::ONE)),
        },
        "residue_limits": residues,
        "limit_points": points.iter().map(|&z| extended(z)).collect::<Vec<_>>(),
        "distinct_limit_points": (!points.is_empty()).then(|| count_distinct(&points, DISTINCT_TOL)),
    })
}

pub fn command(cfg: &EllipticConfig, flag_tol: Option<f64>, flag_max_n: Option<usize>) -> CliResult<Artifacts> {
    let (tol, max_n) = settings(cfg.tol, cfg.max_n, flag_tol, flag_max_n)?;
    let cf = cfg.cf.resolve()?;
    let report = analyze_scaled(&cf, tol, max_n)?;
    let text = output::to_json_text(&report_json(&report));
    Ok(Artifacts { stdout: text.clone(), files: vec![("report.json".into(), text)] })
}
