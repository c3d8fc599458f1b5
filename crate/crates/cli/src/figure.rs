//! `figure`: approximant scatter plots and histograms.

use cflimits::limitset::{build_cf, concentration_points, Concentration};
use cflimits::{chordal_distance, Complex64, ExtendedComplex, Order};
use serde_json::{json, Value};

use crate::config::{settings, CfSource, ComplexInput, ExperimentConfig, FigureConfig, FigureKind, SeqDesc};
use crate::error::{CliError, CliResult};
use crate::limit::{analyze_scaled, scale_point, ScaledReport};
use crate::output::{self, extended, histogram_svg, num, points_csv, Marker, ScatterPlot};
use crate::Artifacts;

/// Command-line overrides for a figure.
#[derive(Debug, Clone, Default)]
pub struct Request {
    pub which: Option<String>,
    pub count: Option<usize>,
    pub trim: Option<f64>,
}

/// Approximants with index above this are compared with the predicted curve.
pub const SETTLED_INDEX: usize = 100;
/// Chordal distance within which an approximant counts as on the curve.
pub const CURVE_BAND: f64 = 0.05;
const DEFAULT_BINS: usize = 40;
const DEFAULT_FIG6_TRIM: f64 = 10.0;

fn geometric(ratio: f64) -> SeqDesc {
    SeqDesc::Geometric { ratio: ComplexInput::Real(ratio), scale: None }
}

/// `K (q_n − αβ)/(α + β + p_n)` with `α = e^{i√11}`, `β = e^{i√13}`, `p_n = 0.3^n`, `q_n = 0.2^n`.
pub fn fig3_source() -> CfSource {
    CfSource::normalized("sqrt(11)", "sqrt(13)", geometric(0.3), geometric(0.2))
}

/// As [`fig3_source`] with `β = e^{i(√11 + 2π/17)}`, so that `α/β` has order 17.
pub fn fig4_source() -> CfSource {
    CfSource::normalized("sqrt(11)", "sqrt(11)+2pi*1/17", geometric(0.3), geometric(0.2))
}

/// `K (−1)/(4/3)`.
pub fn fig6_source() -> CfSource {
    CfSource::raw(ComplexInput::Real(-1.0), ComplexInput::Text("4/3".into()), SeqDesc::Zero, SeqDesc::Zero)
}

fn default_count(kind: FigureKind) -> usize {
    match kind {
        FigureKind::Fig3 | FigureKind::Fig4 => 3000,
        FigureKind::Fig5 => 17,
        FigureKind::Fig6 => 1200,
        FigureKind::Custom => 1000,
    }
}

/// Merges the positional figure name, the configuration and the flags.
fn resolve_spec(cfg: Option<ExperimentConfig>, req: &Request) -> CliResult<FigureConfig> {
    let named = req.which.as_deref().map(FigureKind::parse).transpose()?;
    let mut fc = match cfg {
        None => FigureConfig {
            which: named.ok_or_else(|| CliError::Config("figure needs a name or --config".into()))?,
            cf: None,
            count: None,
            trim: None,
            bins: None,
            overlay: None,
            tol: None,
            max_n: None,
        },
        Some(ExperimentConfig::Figure(fc)) => {
            if let Some(n) = named.filter(|&n| n != fc.which) {
                return Err(CliError::Config(format!(
                    "figure {} requested but the configuration describes {}",
                    n.name(),
                    fc.which.name()
                )));
            }
            fc
        }
        Some(ExperimentConfig::EllipticCf(e)) => FigureConfig {
            which: named.unwrap_or(FigureKind::Custom),
            cf: Some(e.cf),
            count: None,
            trim: None,
            bins: None,
            overlay: None,
            tol: e.tol,
            max_n: e.max_n,
        },
        Some(other) => {
            return Err(CliError::Config(format!("figure cannot use a configuration of kind {:?}", other.kind())))
        }
    };
    if req.count.is_some() {
        fc.count = req.count;
    }
    if req.trim.is_some() {
        fc.trim = req.trim;
    }
    if fc.cf.is_none() {
        fc.cf = Some(match fc.which {
            FigureKind::Fig3 => fig3_source(),
            FigureKind::Fig4 | FigureKind::Fig5 => fig4_source(),
            FigureKind::Fig6 => fig6_source(),
            FigureKind::Custom => {
                return Err(CliError::Config("custom figures need a continued fraction in the configuration".into()))
            }
        });
    }
    if fc.which == FigureKind::Fig6 && fc.trim.is_none() {
        fc.trim = Some(DEFAULT_FIG6_TRIM);
    }
    if fc.trim.is_some_and(|t| t.is_nan() || t <= 0.0) {
        return Err(CliError::Config("trim must be positive".into()));
    }
    Ok(fc)
}

pub fn command(
    cfg: Option<ExperimentConfig>,
    req: &Request,
    flag_tol: Option<f64>,
    flag_max_n: Option<usize>,
) -> CliResult<Artifacts> {
    let fc = resolve_spec(cfg, req)?;
    let (tol, max_n) = settings(fc.tol, fc.max_n, flag_tol, flag_max_n)?;
    let count = fc.count.unwrap_or_else(|| default_count(fc.which));
    if count == 0 {
        return Err(CliError::Config("count must be positive".into()));
    }
    let cf = fc.cf.as_ref().expect("source filled in by resolve_spec").resolve()?;
    let report = analyze_scaled(&cf, tol, max_n)?;
    let points: Vec<(usize, ExtendedComplex)> = if fc.which == FigureKind::Fig5 {
        let lambda = cf.spec.lambda();
        (0..count).map(|k| (k, report.h.apply_finite(lambda.pow(k as i64).to_complex()))).collect()
    } else {
        let values = build_cf(&cf.spec).approximants(count)?;
        values.into_iter().enumerate().map(|(i, z)| (i + 1, scale_point(z, cf.scale))).collect()
    };
    let name = fc.which.name();
    let csv = points_csv(&points);
    let (svg, mut summary) = if fc.which == FigureKind::Fig6 {
        histogram(&fc, &report, &points)?
    } else {
        scatter(&fc, &report, &points, &cf.spec.lambda())
    };
    summary["figure"] = json!(name);
    summary["count"] = json!(count);
    summary["h"] = output::mobius(&report.h);
    summary["lambda_order"] = output::order(report.report.m);
    let text = output::to_json_text(&summary);
    Ok(Artifacts {
        stdout: text.clone(),
        files: vec![(format!("{name}.csv"), csv), (format!("{name}.svg"), svg), (format!("{name}.json"), text)],
    })
}

fn kept(points: &[(usize, ExtendedComplex)], trim: Option<f64>) -> Vec<(usize, Complex64)> {
    points
        .iter()
        .filter_map(|&(n, z)| z.as_finite().map(|w| (n, w)))
        .filter(|(_, w)| trim.is_none_or(|t| w.norm() <= t))
        .collect()
}

fn scatter(
    fc: &FigureConfig,
    report: &ScaledReport,
    points: &[(usize, ExtendedComplex)],
    lambda: &cflimits::UnitModulusNumber,
) -> (String, Value) {
    let h = &report.h;
    let curve = h.image_of_unit_circle();
    let plotted = kept(points, fc.trim);
    let concentration = concentration_points(h, report.report.m);
    let overlay = fc.overlay.unwrap_or(true);
    let mut markers = Vec::new();
    if overlay {
        if let Concentration::Points { highest, lowest } = concentration {
            for (z, color) in [(highest, "#d62728"), (lowest, "#2ca02c")] {
                if let Some(w) = z.as_finite() {
                    markers.push(Marker { at: w, radius: 4.0, color });
                }
            }
        }
    }
    let settled: Vec<ExtendedComplex> =
        points.iter().filter(|(n, _)| *n > SETTLED_INDEX || fc.which == FigureKind::Fig5).map(|p| p.1).collect();
    let near = settled.iter().filter(|&&z| curve.chordal_distance_to(z) < CURVE_BAND).count();
    let fraction = if settled.is_empty() { 1.0 } else { near as f64 / settled.len() as f64 };
    let mut summary = json!({
        "plotted": plotted.len(),
        "dropped": points.len() - plotted.len(),
        "geometry": output::geometry(&curve),
        "concentration": output::concentration(&concentration),
        "settled_points": settled.len(),
        "near_curve_fraction": num(fraction),
    });
    if let (Order::Finite(m), true) = (report.report.m, fc.which != FigureKind::Fig5) {
        summary["clusters"] = clusters(report, points, lambda, m as usize);
    }
    let title = format!("{}: {} approximants", fc.which.name(), points.len());
    let plot =
        ScatterPlot { title, points: plotted.iter().map(|p| p.1).collect(), curve: overlay.then_some(curve), markers };
    (plot.render(), summary)
}

/// Groups settled approximants by their nearest predicted limit `h(λ^j)` and
/// compares each group's centroid with that limit.
fn clusters(
    report: &ScaledReport,
    points: &[(usize, ExtendedComplex)],
    lambda: &cflimits::UnitModulusNumber,
    m: usize,
) -> Value {
    let targets: Vec<ExtendedComplex> =
        (0..m).map(|j| report.h.apply_finite(lambda.pow(j as i64).to_complex())).collect();
    let mut sums = vec![(Complex64::new(0.0, 0.0), 0usize); m];
    for &(_, z) in points.iter().filter(|(n, _)| *n > SETTLED_INDEX) {
        let Some(w) = z.as_finite() else { continue };
        let nearest = (0..m)
            .min_by(|&a, &b| chordal_distance(z, targets[a]).total_cmp(&chordal_distance(z, targets[b])))
            .expect("m is positive");
        sums[nearest].0 += w;
        sums[nearest].1 += 1;
    }
    let mut max_error = 0.0f64;
    let mut centroids = Vec::new();
    for (j, &(sum, k)) in sums.iter().enumerate() {
        if k == 0 {
            centroids.push(Value::Null);
            continue;
        }
        let centroid = sum / k as f64;
        if let Some(t) = targets[j].as_finite() {
            max_error = max_error.max((centroid - t).norm());
        } else {
            max_error = f64::INFINITY;
        }
        centroids.push(output::complex(centroid));
    }
    json!({
        "m": m,
        "nonempty": sums.iter().filter(|s| s.1 > 0).count(),
        "predicted": targets.iter().map(|&z| extended(z)).collect::<Vec<_>>(),
        "centroids": centroids,
        "max_centroid_error": num(max_error),
    })
}

fn histogram(
    fc: &FigureConfig,
    report: &ScaledReport,
    points: &[(usize, ExtendedComplex)],
) -> CliResult<(String, Value)> {
    let trim = fc.trim.unwrap_or(DEFAULT_FIG6_TRIM);
    let bins = fc.bins.unwrap_or(DEFAULT_BINS);
    if bins == 0 {
        return Err(CliError::Config("bins must be positive".into()));
    }
    let values = kept(points, Some(trim));
    if let Some((n, w)) = values.iter().find(|(_, w)| w.im.abs() > 1e-9 * w.norm().max(1.0)) {
        return Err(CliError::Config(format!("histograms need real approximants; f_{n} = {w}")));
    }
    let (lo, hi) = (-trim, trim);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for (_, w) in &values {
        let i = (((w.re - lo) / width).floor() as usize).min(bins - 1);
        counts[i] += 1;
    }
    let peak = (0..bins).max_by_key(|&i| (counts[i], std::cmp::Reverse(i))).expect("bins is positive");
    let (peak_lo, peak_hi) = (lo + peak as f64 * width, lo + (peak + 1) as f64 * width);
    let concentration = concentration_points(&report.h, report.report.m);
    let highest = match concentration {
        Concentration::Points { highest: ExtendedComplex::Finite(w), .. } => Some(w.re),
        _ => None,
    };
    let summary = json!({
        "plotted": values.len(),
        "dropped": points.len() - values.len(),
        "trim": num(trim),
        "geometry": output::geometry(&report.h.image_of_unit_circle()),
        "concentration": output::concentration(&concentration),
        "bins": counts.iter().enumerate().map(|(i, &c)| json!({
            "lo": num(lo + i as f64 * width),
            "hi": num(lo + (i + 1) as f64 * width),
            "count": c,
        })).collect::<Vec<_>>(),
        "peak_bin": [num(peak_lo), num(peak_hi)],
        "peak_contains_highest_concentration": highest.map(|x| (peak_lo..peak_hi).contains(&x)),
    });
    let title = format!(
        "{}: {} of {} approximants, |x| <= {}",
        fc.which.name(),
        values.len(),
        points.len(),
        output::fmt_num(trim)
    );
    let marker = if fc.overlay.unwrap_or(true) { highest } else { None };
    Ok((histogram_svg(&title, lo, hi, &counts, marker), summary))
}
