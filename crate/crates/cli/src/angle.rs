//! Angle expressions for points on the unit circle.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr   := ['+' | '-'] term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := decimal | integer '/' integer | 'sqrt(' integer ')' | 'pi' | '2pi'
//! ```
//!
//! A term made of exactly one `pi`/`2pi` factor and otherwise integer or
//! rational factors is an exact rational multiple of `2π`; every other term is
//! numeric. `"sqrt(11)+2pi*1/17"` is therefore `√11` shifted by the exact
//! rotation `2π/17`, and `"2pi*3/8"` is the exact root of unity `e^{2πi·3/8}`.

use cflimits::UnitModulusNumber;
use num_integer::Integer;

use crate::error::CliError;

/// A parsed angle `numeric + 2π·num/den`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Angle {
    pub numeric: f64,
    /// Exact part as a fraction of a full turn, in lowest terms with `den > 0`.
    pub turns: (i64, i64),
    /// Whether any numeric term was present.
    pub has_numeric: bool,
}

impl Angle {
    pub fn to_unit(self) -> Result<UnitModulusNumber, CliError> {
        let (num, den) = self.turns;
        let u = if !self.has_numeric {
            UnitModulusNumber::exact_root(num, den)
        } else if num == 0 {
            UnitModulusNumber::numeric(self.numeric)
        } else {
            UnitModulusNumber::shifted(self.numeric, num, den)
        };
        u.map_err(|e| CliError::Config(format!("angle: {e}")))
    }
}

/// Parses an angle expression.
pub fn parse_angle(text: &str) -> Result<Angle, CliError> {
    let err = |msg: &str| CliError::Config(format!("invalid angle {text:?}: {msg}"));
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(err("empty expression"));
    }
    let mut angle = Angle { numeric: 0.0, turns: (0, 1), has_numeric: false };
    let mut rest = s.as_str();
    let mut first = true;
    while !rest.is_empty() {
        let mut sign = 1i64;
        if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        } else if let Some(r) = rest.strip_prefix('-') {
            sign = -1;
            rest = r;
        } else if !first {
            return Err(err("expected '+' or '-'"));
        }
        first = false;
        let end = term_end(rest);
        let term = parse_term(&rest[..end]).map_err(|m| err(&m))?;
        rest = &rest[end..];
        match term {
            Term::Turns(n, d) => {
                angle.turns = add_fraction(angle.turns, (sign * n, d)).ok_or_else(|| err("overflow"))?
            }
            Term::Numeric(x) => {
                angle.numeric += sign as f64 * x;
                angle.has_numeric = true;
            }
        }
    }
    if !angle.numeric.is_finite() {
        return Err(err("not finite"));
    }
    Ok(angle)
}

fn term_end(s: &str) -> usize {
    // A sign ends the term unless it follows an exponent marker.
    let b = s.as_bytes();
    (1..b.len()).find(|&i| (b[i] == b'+' || b[i] == b'-') && !matches!(b[i - 1], b'e' | b'E')).unwrap_or(b.len())
}

enum Term {
    Turns(i64, i64),
    Numeric(f64),
}

enum Factor {
    Rational(i64, i64),
    Real(f64),
    /// Multiple of π as a fraction of a full turn: `pi` is 1/2, `2pi` is 1/1.
    Pi(i64, i64),
}

fn parse_term(t: &str) -> Result<Term, String> {
    if t.is_empty() {
        return Err("empty term".into());
    }
    let mut rational = (1i64, 1i64);
    let mut real = 1.0f64;
    let mut pis = Vec::new();
    let mut any_real = false;
    for f in t.split('*') {
        match parse_factor(f)? {
            Factor::Rational(n, d) => rational = mul_fraction(rational, (n, d)).ok_or("overflow")?,
            Factor::Real(x) => {
                real *= x;
                any_real = true;
            }
            Factor::Pi(n, d) => pis.push((n, d)),
        }
    }
    match (pis.len(), any_real) {
        (0, _) => Ok(Term::Numeric(real * rational.0 as f64 / rational.1 as f64)),
        (1, false) => {
            let (n, d) = mul_fraction(rational, pis[0]).ok_or("overflow")?;
            Ok(Term::Turns(n, d))
        }
        _ => {
            let turns: f64 = pis.iter().map(|&(n, d)| n as f64 / d as f64).product();
            let pi_power = std::f64::consts::TAU.powi(pis.len() as i32);
            Ok(Term::Numeric(real * rational.0 as f64 / rational.1 as f64 * turns * pi_power))
        }
    }
}

fn parse_factor(f: &str) -> Result<Factor, String> {
    match f {
        "" => return Err("empty factor".into()),
        "pi" => return Ok(Factor::Pi(1, 2)),
        "2pi" => return Ok(Factor::Pi(1, 1)),
        _ if f.starts_with(['+', '-']) => return Err(format!("unexpected sign in {f:?}")),
        _ => {}
    }
    if let Some(inner) = f.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
        let n: u64 = inner.parse().map_err(|_| format!("sqrt needs a nonnegative integer, got {inner:?}"))?;
        return Ok(Factor::Real((n as f64).sqrt()));
    }
    if let Some((n, d)) = f.split_once('/') {
        let n: i64 = n.parse().map_err(|_| format!("bad numerator {n:?}"))?;
        let d: i64 = d.parse().map_err(|_| format!("bad denominator {d:?}"))?;
        if d == 0 {
            return Err("zero denominator".into());
        }
        return Ok(Factor::Rational(n, d));
    }
    if let Ok(n) = f.parse::<i64>() {
        return Ok(Factor::Rational(n, 1));
    }
    f.parse::<f64>().map(Factor::Real).map_err(|_| format!("unrecognized factor {f:?}"))
}

fn reduce((n, d): (i64, i64)) -> (i64, i64) {
    let g = n.gcd(&d).max(1);
    let (n, d) = (n / g, d / g);
    if d < 0 {
        (-n, -d)
    } else {
        (n, d)
    }
}

fn mul_fraction(a: (i64, i64), b: (i64, i64)) -> Option<(i64, i64)> {
    Some(reduce((a.0.checked_mul(b.0)?, a.1.checked_mul(b.1)?)))
}

fn add_fraction(a: (i64, i64), b: (i64, i64)) -> Option<(i64, i64)> {
    let l = a.1.lcm(&b.1);
    let n = a.0.checked_mul(l / a.1)?.checked_add(b.0.checked_mul(l / b.1)?)?;
    Some(reduce((n, l)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        let a = parse_angle("sqrt(11)").unwrap();
        assert_eq!((a.numeric, a.turns, a.has_numeric), (11f64.sqrt(), (0, 1), true));
        let a = parse_angle("sqrt(11) + 2pi*1/17").unwrap();
        assert_eq!((a.numeric, a.turns), (11f64.sqrt(), (1, 17)));
        let a = parse_angle("2pi*3/8").unwrap();
        assert_eq!((a.turns, a.has_numeric), ((3, 8), false));
        let a = parse_angle("-pi*2/3").unwrap();
        assert_eq!(a.turns, (-1, 3));
        let a = parse_angle("0.5 - 1.5e-1").unwrap();
        assert!((a.numeric - 0.35).abs() < 1e-15);
        let a = parse_angle("3*sqrt(2)").unwrap();
        assert!((a.numeric - 3.0 * 2f64.sqrt()).abs() < 1e-15);
        for bad in ["", "sqrt(-1)", "2pi*1/0", "foo", "1++2", "sqrt(11)2pi"] {
            assert!(parse_angle(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn unit_numbers() {
        assert!(parse_angle("2pi*1/4").unwrap().to_unit().unwrap().is_exact());
        assert!(!parse_angle("sqrt(13)").unwrap().to_unit().unwrap().is_exact());
        let s = parse_angle("sqrt(11)+2pi*1/17").unwrap().to_unit().unwrap();
        let a = parse_angle("sqrt(11)").unwrap().to_unit().unwrap();
        assert_eq!(a.div(&s).order(), cflimits::Order::Finite(17));
    }
}
