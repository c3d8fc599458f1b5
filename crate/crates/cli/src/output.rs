//! Deterministic text outputs: fixed-precision numbers, JSON values, CSV and SVG.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cflimits::limitset::Concentration;
use cflimits::{CircleOrLine, Complex64, ExtendedComplex, MobiusMap, Order};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

/// Significant digits of every number written to CSV or SVG.
pub const SIGNIFICANT_DIGITS: usize = 9;

/// `x` with [`SIGNIFICANT_DIGITS`] significant digits, trailing zeros
/// removed, positional notation for moderate magnitudes and scientific
/// notation otherwise.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..15).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    // Re-place the decimal point in the rounded mantissa digits.
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    let (int, frac) = if exp >= 0 {
        let e = exp as usize + 1;
        if e >= digits.len() {
            (format!("{digits}{}", "0".repeat(e - digits.len())), String::new())
        } else {
            (digits[..e].to_string(), digits[e..].to_string())
        }
    } else {
        ("0".to_string(), format!("{}{digits}", "0".repeat((-exp - 1) as usize)))
    };
    let sign = if x < 0.0 { "-" } else { "" };
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        format!("{sign}{int}")
    } else {
        format!("{sign}{int}.{frac}")
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// A JSON number rounded to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::String(fmt_num(x));
    }
    let rounded: f64 = fmt_num(x).parse().expect("formatted number parses");
    json!(rounded)
}

pub fn complex(z: Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

/// `[re, im]`, or the string `"infinity"`.
pub fn extended(z: ExtendedComplex) -> Value {
    match z {
        ExtendedComplex::Finite(w) => complex(w),
        ExtendedComplex::Infinity => Value::String("infinity".into()),
    }
}

pub fn order(o: Order) -> Value {
    match o {
        Order::Finite(m) => json!(m),
        Order::Infinite => Value::String("infinite".into()),
    }
}

pub fn mobius(h: &MobiusMap) -> Value {
    let [a, b, c, d] = h.coefficients();
    json!({ "a": complex(a), "b": complex(b), "c": complex(c), "d": complex(d) })
}

pub fn geometry(g: &CircleOrLine) -> Value {
    match g {
        CircleOrLine::Circle { center, radius } => {
            json!({ "type": "circle", "center": complex(*center), "radius": num(*radius) })
        }
        CircleOrLine::Line { point, direction } => {
            json!({ "type": "line", "point": complex(*point), "direction": complex(*direction) })
        }
    }
}

pub fn concentration(c: &Concentration) -> Value {
    match c {
        Concentration::Uniform => json!({ "type": "uniform" }),
        Concentration::NotApplicable => json!({ "type": "not-applicable" }),
        Concentration::Points { highest, lowest } => {
            json!({ "type": "points", "highest": extended(*highest), "lowest": extended(*lowest) })
        }
    }
}

pub fn matrix(m: &cflimits::matprod::Matrix) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex(m[(i, j)])).collect())).collect())
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

/// CSV with header `n,re,im`; infinite values are written as `inf,inf`.
pub fn points_csv(points: &[(usize, ExtendedComplex)]) -> String {
    let mut s = String::from("n,re,im\n");
    for (n, z) in points {
        match z {
            ExtendedComplex::Finite(w) => writeln!(s, "{n},{},{}", fmt_num(w.re), fmt_num(w.im)),
            ExtendedComplex::Infinity => writeln!(s, "{n},inf,inf"),
        }
        .expect("writing to a String cannot fail");
    }
    s
}

/// Writes `contents` to `path` via a temporary sibling file and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}

/// A point marker in an SVG plot.
#[derive(Debug, Clone, Copy)]
pub struct Marker {
    pub at: Complex64,
    pub radius: f64,
    pub color: &'static str,
}

/// An SVG 1.1 scatter plot in the complex plane.
#[derive(Debug, Clone, Default)]
pub struct ScatterPlot {
    pub title: String,
    pub points: Vec<Complex64>,
    pub curve: Option<CircleOrLine>,
    pub markers: Vec<Marker>,
}

const SIZE: f64 = 600.0;
const MARGIN: f64 = 40.0;

impl ScatterPlot {
    /// Axis-aligned bounds covering points and markers, padded by 5%, with
    /// equal scales on both axes.
    fn bounds(&self) -> (f64, f64, f64) {
        let all: Vec<Complex64> = self.points.iter().copied().chain(self.markers.iter().map(|m| m.at)).collect();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for z in &all {
            x0 = x0.min(z.re);
            x1 = x1.max(z.re);
            y0 = y0.min(z.im);
            y1 = y1.max(z.im);
        }
        if all.is_empty() {
            (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
        }
        let span = (x1 - x0).max(y1 - y0).max(1e-9) * 1.1;
        ((x0 + x1 - span) / 2.0, (y0 + y1 + span) / 2.0, span)
    }

    pub fn render(&self) -> String {
        let (left, top, span) = self.bounds();
        let scale = (SIZE - 2.0 * MARGIN) / span;
        let px = |z: Complex64| (MARGIN + (z.re - left) * scale, MARGIN + (top - z.im) * scale);
        let mut s = svg_header(&self.title);
        let (ax, ay) = px(Complex64::new(0.0, 0.0));
        if (MARGIN..=SIZE - MARGIN).contains(&ay) {
            line(&mut s, MARGIN, ay, SIZE - MARGIN, ay, "#bbbbbb");
        }
        if (MARGIN..=SIZE - MARGIN).contains(&ax) {
            line(&mut s, ax, MARGIN, ax, SIZE - MARGIN, "#bbbbbb");
        }
        match self.curve {
            Some(CircleOrLine::Circle { center, radius }) => {
                let (cx, cy) = px(center);
                writeln!(
                    s,
                    r##"<circle cx="{}" cy="{}" r="{}" fill="none" stroke="#1f77b4" stroke-width="1"/>"##,
                    fmt_num(cx),
                    fmt_num(cy),
                    fmt_num(radius * scale)
                )
                .expect("string write");
            }
            Some(CircleOrLine::Line { point, direction }) => {
                let (a, b) = (point - direction * span * 2.0, point + direction * span * 2.0);
                let ((x1, y1), (x2, y2)) = (px(a), px(b));
                line(&mut s, x1, y1, x2, y2, "#1f77b4");
            }
            None => {}
        }
        for &z in &self.points {
            let (x, y) = px(z);
            writeln!(s, r##"<circle cx="{}" cy="{}" r="1.2" fill="#333333"/>"##, fmt_num(x), fmt_num(y))
                .expect("string write");
        }
        for m in &self.markers {
            let (x, y) = px(m.at);
            writeln!(
                s,
                r#"<circle cx="{}" cy="{}" r="{}" fill="{}"/>"#,
                fmt_num(x),
                fmt_num(y),
                fmt_num(m.radius),
                m.color
            )
            .expect("string write");
        }
        s.push_str("</svg>\n");
        s
    }
}

/// An SVG 1.1 bar chart of histogram counts over `[lo, hi)`.
pub fn histogram_svg(title: &str, lo: f64, hi: f64, counts: &[usize], marker: Option<f64>) -> String {
    let mut s = svg_header(title);
    let max = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let width = (SIZE - 2.0 * MARGIN) / counts.len().max(1) as f64;
    let height = SIZE - 2.0 * MARGIN;
    for (i, &c) in counts.iter().enumerate() {
        let h = c as f64 / max * height;
        writeln!(
            s,
            r##"<rect x="{}" y="{}" width="{}" height="{}" fill="#1f77b4" stroke="#ffffff" stroke-width="0.5"/>"##,
            fmt_num(MARGIN + i as f64 * width),
            fmt_num(SIZE - MARGIN - h),
            fmt_num(width),
            fmt_num(h)
        )
        .expect("string write");
    }
    line(&mut s, MARGIN, SIZE - MARGIN, SIZE - MARGIN, SIZE - MARGIN, "#333333");
    if let Some(x) = marker.filter(|x| (lo..hi).contains(x)) {
        let px = MARGIN + (x - lo) / (hi - lo) * (SIZE - 2.0 * MARGIN);
        line(&mut s, px, MARGIN, px, SIZE - MARGIN, "#d62728");
    }
    for (x, anchor) in [(lo, "start"), (hi, "end")] {
        let px = MARGIN + (x - lo) / (hi - lo) * (SIZE - 2.0 * MARGIN);
        writeln!(
            s,
            r#"<text x="{}" y="{}" font-size="12" text-anchor="{anchor}">{}</text>"#,
            fmt_num(px),
            fmt_num(SIZE - MARGIN + 16.0),
            fmt_num(x)
        )
        .expect("string write");
    }
    s.push_str("</svg>\n");
    s
}

fn svg_header(title: &str) -> String {
    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#).expect("string write");
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    )
    .expect("string write");
    writeln!(s, "<title>{}</title>", escape(title)).expect("string write");
    writeln!(s, r##"<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="#ffffff"/>"##).expect("string write");
    s
}

fn line(s: &mut String, x1: f64, y1: f64, x2: f64, y2: f64, color: &str) {
    writeln!(
        s,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{color}" stroke-width="1"/>"#,
        fmt_num(x1),
        fmt_num(y1),
        fmt_num(x2),
        fmt_num(y2)
    )
    .expect("string write");
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
