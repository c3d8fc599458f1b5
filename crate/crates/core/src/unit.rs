//! Points of the unit circle with an exact rational-angle part.
//!
//! A [`UnitModulusNumber`] is `e^{iθ} · e^{2πi·num/den}`. Keeping the rational
//! part exact lets the order of `α/β` be decided without floating-point
//! guesswork whenever both share the same irrational angle.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{Error, Result};

/// Largest denominator tried when recognizing rational angles.
pub const MAX_RECOGNIZED_DENOMINATOR: i64 = 1000;

/// Angle tolerance (radians) for recognizing rational angles.
pub const RATIONAL_ANGLE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnitModulusNumber {
    /// `e^{2πi·num/den}`, reduced with `0 ≤ num < den`.
    ExactRoot { num: i64, den: i64 },
    /// `e^{iθ}`.
    Numeric { angle: f64 },
    /// `e^{iθ} · e^{2πi·num/den}`.
    Shifted { angle: f64, num: i64, den: i64 },
}

/// Order of an element of the circle group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Order {
    Finite(u64),
    Infinite,
}

impl Order {
    pub fn finite(&self) -> Option<u64> {
        match *self {
            Order::Finite(m) => Some(m),
            Order::Infinite => None,
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(m) => write!(f, "{m}"),
            Order::Infinite => write!(f, "infinite"),
        }
    }
}

fn reduce(num: i64, den: i64) -> (i64, i64) {
    assert!(den > 0, "denominator must be positive");
    let num = num.rem_euclid(den);
    let g = num.gcd(&den).max(1);
    (num / g, den / g)
}

fn cis_fraction(num: i64, den: i64) -> Complex64 {
    // Exact values at the quarter turns keep e.g. α = 1, −1, ±i free of rounding.
    let (num, den) = reduce(num, den);
    match (num, den) {
        (0, _) => Complex64::new(1.0, 0.0),
        (1, 2) => Complex64::new(-1.0, 0.0),
        (1, 4) => Complex64::new(0.0, 1.0),
        (3, 4) => Complex64::new(0.0, -1.0),
        _ => {
            let t = TAU * num as f64 / den as f64;
            Complex64::new(t.cos(), t.sin())
        }
    }
}

impl UnitModulusNumber {
    pub fn exact_root(num: i64, den: i64) -> Result<Self> {
        if den <= 0 {
            return Err(Error::InvalidArgument(format!("root of unity denominator {den}")));
        }
        let (num, den) = reduce(num, den);
        Ok(UnitModulusNumber::ExactRoot { num, den })
    }

    pub fn numeric(angle: f64) -> Result<Self> {
        if !angle.is_finite() {
            return Err(Error::NonFinite);
        }
        Ok(UnitModulusNumber::Numeric { angle })
    }

    pub fn shifted(angle: f64, num: i64, den: i64) -> Result<Self> {
        if !angle.is_finite() {
            return Err(Error::NonFinite);
        }
        if den <= 0 {
            return Err(Error::InvalidArgument(format!("root of unity denominator {den}")));
        }
        let (num, den) = reduce(num, den);
        Ok(Self::from_parts(angle, num, den))
    }

    fn from_parts(angle: f64, num: i64, den: i64) -> Self {
        let (num, den) = reduce(num, den);
        if angle == 0.0 {
            UnitModulusNumber::ExactRoot { num, den }
        } else if num == 0 {
            UnitModulusNumber::Numeric { angle }
        } else {
            UnitModulusNumber::Shifted { angle, num, den }
        }
    }

    /// `(θ, num, den)` with `self = e^{iθ} e^{2πi num/den}`.
    pub fn parts(&self) -> (f64, i64, i64) {
        match *self {
            UnitModulusNumber::ExactRoot { num, den } => (0.0, num, den),
            UnitModulusNumber::Numeric { angle } => (angle, 0, 1),
            UnitModulusNumber::Shifted { angle, num, den } => (angle, num, den),
        }
    }

    /// Recognizes `z/|z|` as an exact root of unity when its angle is within
    /// [`RATIONAL_ANGLE_TOL`] of `2π·k/n` with `n ≤` [`MAX_RECOGNIZED_DENOMINATOR`].
    pub fn from_complex(z: Complex64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) || z.norm() == 0.0 {
            return Err(Error::NonFinite);
        }
        let angle = z.im.atan2(z.re);
        match nearest_rational_angle(angle) {
            Some((num, den)) => Self::exact_root(num, den),
            None => Self::numeric(angle),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, UnitModulusNumber::ExactRoot { .. })
    }

    pub fn to_complex(&self) -> Complex64 {
        let (angle, num, den) = self.parts();
        let base = if angle == 0.0 { Complex64::new(1.0, 0.0) } else { Complex64::new(angle.cos(), angle.sin()) };
        base * cis_fraction(num, den)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a1, n1, d1) = self.parts();
        let (a2, n2, d2) = other.parts();
        let den = d1.lcm(&d2);
        Self::from_parts(a1 + a2, n1 * (den / d1) + n2 * (den / d2), den)
    }

    pub fn inv(&self) -> Self {
        let (a, n, d) = self.parts();
        Self::from_parts(-a, -n, d)
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }

    /// `self^k`, exact in the rational part.
    pub fn pow(&self, k: i64) -> Self {
        let (a, n, d) = self.parts();
        let angle = if a == 0.0 { 0.0 } else { (a * k as f64).rem_euclid(TAU) };
        let angle = if a != 0.0 && angle == 0.0 { f64::MIN_POSITIVE } else { angle };
        Self::from_parts(angle, ((n as i128 * k as i128).rem_euclid(d as i128)) as i64, d)
    }

    /// Whether `self` is exactly 1 (only decidable for exact roots).
    pub fn is_exactly_one(&self) -> bool {
        matches!(*self, UnitModulusNumber::ExactRoot { num: 0, .. })
    }

    /// Order in the circle group: finite only for exact roots.
    pub fn order(&self) -> Order {
        match *self {
            UnitModulusNumber::ExactRoot { den, .. } => Order::Finite(den as u64),
            _ => Order::Infinite,
        }
    }

    /// Same numeric point of the circle.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self.to_complex() - other.to_complex()).norm() <= tol
    }
}

impl fmt::Display for UnitModulusNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnitModulusNumber::ExactRoot { num, den } => write!(f, "exp(2πi·{num}/{den})"),
            UnitModulusNumber::Numeric { angle } => write!(f, "exp(i·{angle})"),
            UnitModulusNumber::Shifted { angle, num, den } => {
                write!(f, "exp(i·{angle})·exp(2πi·{num}/{den})")
            }
        }
    }
}

/// `(num, den)` in lowest terms with `|angle − 2π·num/den| < RATIONAL_ANGLE_TOL`
/// (mod 2π) and the smallest such `den ≤ MAX_RECOGNIZED_DENOMINATOR`.
pub fn nearest_rational_angle(angle: f64) -> Option<(i64, i64)> {
    let t = angle.rem_euclid(TAU) / TAU;
    for den in 1..=MAX_RECOGNIZED_DENOMINATOR {
        let num = (t * den as f64).round() as i64;
        let err = TAU * (t - num as f64 / den as f64);
        if err.abs() < RATIONAL_ANGLE_TOL {
            let (num, den) = reduce(num, den);
            return Some((num, den));
        }
    }
    None
}

/// Order of `λ = α/β`, with a flag raised when a non-exact λ sits within
/// [`RATIONAL_ANGLE_TOL`] of a root of unity of small order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaOrder {
    pub order: Order,
    pub near_rational: Option<(i64, i64)>,
}

pub fn order_of_lambda(alpha: &UnitModulusNumber, beta: &UnitModulusNumber) -> Result<LambdaOrder> {
    if alpha == beta || alpha.approx_eq(beta, 1e-15) {
        return Err(Error::EqualAlphaBeta);
    }
    let lambda = alpha.div(beta);
    let order = lambda.order();
    let near_rational = match lambda {
        UnitModulusNumber::ExactRoot { .. } => None,
        _ => {
            let z = lambda.to_complex();
            nearest_rational_angle(z.im.atan2(z.re))
        }
    };
    Ok(LambdaOrder { order, near_rational })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_roots_reduce() {
        assert_eq!(UnitModulusNumber::exact_root(4, 6).unwrap(), UnitModulusNumber::ExactRoot { num: 2, den: 3 });
        assert_eq!(UnitModulusNumber::exact_root(-1, 4).unwrap(), UnitModulusNumber::ExactRoot { num: 3, den: 4 });
        assert!(UnitModulusNumber::exact_root(1, 0).is_err());
    }

    #[test]
    fn lambda_order_sixth_roots() {
        let a = UnitModulusNumber::exact_root(1, 6).unwrap();
        let b = UnitModulusNumber::exact_root(5, 6).unwrap();
        let o = order_of_lambda(&a, &b).unwrap();
        assert_eq!(o.order, Order::Finite(3));
        // Direct powering: λ^3 = 1 and λ, λ^2 ≠ 1.
        let l = a.to_complex() / b.to_complex();
        assert!((l.powi(3) - 1.0).norm() < 1e-14);
        assert!((l - 1.0).norm() > 0.1 && (l.powi(2) - 1.0).norm() > 0.1);
    }

    #[test]
    fn lambda_order_numeric_is_infinite() {
        let a = UnitModulusNumber::numeric(11f64.sqrt()).unwrap();
        let b = UnitModulusNumber::numeric(13f64.sqrt()).unwrap();
        let o = order_of_lambda(&a, &b).unwrap();
        assert_eq!(o.order, Order::Infinite);
        assert_eq!(o.near_rational, None);
    }

    #[test]
    fn lambda_order_minus_one() {
        let a = UnitModulusNumber::exact_root(1, 2).unwrap();
        let b = UnitModulusNumber::exact_root(0, 1).unwrap();
        assert_eq!(order_of_lambda(&a, &b).unwrap().order, Order::Finite(2));
        assert_eq!(order_of_lambda(&b, &b), Err(Error::EqualAlphaBeta));
    }

    #[test]
    fn shifted_pair_has_exact_quotient() {
        let a = UnitModulusNumber::numeric(11f64.sqrt()).unwrap();
        let b = UnitModulusNumber::shifted(11f64.sqrt(), 1, 17).unwrap();
        let o = order_of_lambda(&a, &b).unwrap();
        assert_eq!(o.order, Order::Finite(17));
    }

    #[test]
    fn near_rational_numeric_flagged() {
        let a = UnitModulusNumber::numeric(TAU / 5.0).unwrap();
        let b = UnitModulusNumber::numeric(0.0 + 1e-300).unwrap();
        let o = order_of_lambda(&a, &b).unwrap();
        assert_eq!(o.order, Order::Infinite);
        assert_eq!(o.near_rational, Some((1, 5)));
    }

    #[test]
    fn pow_and_values() {
        let w = UnitModulusNumber::exact_root(1, 3).unwrap();
        assert!(w.pow(3).is_exactly_one());
        assert_eq!(w.pow(-1), UnitModulusNumber::ExactRoot { num: 2, den: 3 });
        let z = UnitModulusNumber::numeric(1.0).unwrap();
        assert!((z.pow(5).to_complex() - Complex64::new(5f64.cos(), 5f64.sin())).norm() < 1e-14);
        assert_eq!(UnitModulusNumber::exact_root(1, 2).unwrap().to_complex(), Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn recognizes_rational_angles() {
        let z = Complex64::new(0.5, 3f64.sqrt() / 2.0);
        assert_eq!(UnitModulusNumber::from_complex(z).unwrap(), UnitModulusNumber::ExactRoot { num: 1, den: 6 });
        let z = Complex64::new((2.0f64).cos(), (2.0f64).sin());
        assert!(matches!(UnitModulusNumber::from_complex(z).unwrap(), UnitModulusNumber::Numeric { .. }));
    }
}
