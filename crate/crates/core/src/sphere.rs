//! The extended complex plane and Möbius maps acting on it.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative determinant threshold below which a coefficient array is rejected.
pub const DEGENERACY_TOL: f64 = 1e-13;

/// Relative tolerance for deciding that `|c| = |d|` (image of the circle is a line).
pub const LINE_TOL: f64 = 1e-10;

/// A point of the Riemann sphere.
///
/// There is a single point at infinity; finite values never carry NaN or
/// infinite components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedComplex {
    Finite(Complex64),
    Infinity,
}

impl ExtendedComplex {
    pub const ZERO: ExtendedComplex = ExtendedComplex::Finite(Complex64::new(0.0, 0.0));
    pub const ONE: ExtendedComplex = ExtendedComplex::Finite(Complex64::new(1.0, 0.0));

    pub fn finite(z: Complex64) -> Result<Self> {
        if z.re.is_finite() && z.im.is_finite() {
            Ok(ExtendedComplex::Finite(z))
        } else {
            Err(Error::NonFinite)
        }
    }

    /// The projective point `[p : q]`, i.e. `p / q` with `q = 0` mapping to ∞.
    pub fn from_ratio(p: Complex64, q: Complex64) -> Result<Self> {
        if !(p.re.is_finite() && p.im.is_finite() && q.re.is_finite() && q.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        if q == Complex64::new(0.0, 0.0) {
            if p == Complex64::new(0.0, 0.0) {
                return Err(Error::Indeterminate);
            }
            return Ok(ExtendedComplex::Infinity);
        }
        // Scale by a power of two first so that the quotient neither
        // overflows nor picks up rounding from the scaling itself.
        let m = p.re.abs().max(p.im.abs()).max(q.re.abs()).max(q.im.abs());
        let s = crate::cf::pow2(-(m.log2().floor() as i64));
        let z = (p * s) / (q * s);
        if z.re.is_finite() && z.im.is_finite() {
            Ok(ExtendedComplex::Finite(z))
        } else {
            Ok(ExtendedComplex::Infinity)
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtendedComplex::Infinity)
    }

    pub fn as_finite(&self) -> Option<Complex64> {
        match *self {
            ExtendedComplex::Finite(z) => Some(z),
            ExtendedComplex::Infinity => None,
        }
    }

    /// A projective representative `(p, q)` with `self = p / q`.
    pub fn to_pair(&self) -> (Complex64, Complex64) {
        match *self {
            ExtendedComplex::Finite(z) => (z, Complex64::new(1.0, 0.0)),
            ExtendedComplex::Infinity => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
        }
    }
}

impl From<f64> for ExtendedComplex {
    fn from(x: f64) -> Self {
        if x.is_finite() {
            ExtendedComplex::Finite(Complex64::new(x, 0.0))
        } else {
            ExtendedComplex::Infinity
        }
    }
}

impl fmt::Display for ExtendedComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedComplex::Finite(z) => write!(f, "{z}"),
            ExtendedComplex::Infinity => write!(f, "inf"),
        }
    }
}

/// Chordal distance on the Riemann sphere, with values in `[0, 2]`.
pub fn chordal_distance(x: ExtendedComplex, y: ExtendedComplex) -> f64 {
    match (x, y) {
        (ExtendedComplex::Infinity, ExtendedComplex::Infinity) => 0.0,
        (ExtendedComplex::Finite(z), ExtendedComplex::Infinity)
        | (ExtendedComplex::Infinity, ExtendedComplex::Finite(z)) => 2.0 / 1f64.hypot(z.norm()),
        (ExtendedComplex::Finite(z), ExtendedComplex::Finite(w)) => {
            let d = 2.0 * (z - w).norm() / (1f64.hypot(z.norm()) * 1f64.hypot(w.norm()));
            d.min(2.0)
        }
    }
}

/// A linear fractional transformation `z ↦ (az + b)/(cz + d)` with `ad − bc ≠ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMap {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    d: Complex64,
}

impl MobiusMap {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        for z in [a, b, c, d] {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        let scale = a.norm().max(b.norm()).max(c.norm()).max(d.norm());
        if scale == 0.0 {
            return Err(Error::DegenerateMap);
        }
        let det = a * d - b * c;
        if det.norm() / (scale * scale) < DEGENERACY_TOL {
            return Err(Error::DegenerateMap);
        }
        Ok(MobiusMap { a, b, c, d })
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        MobiusMap { a: one, b: zero, c: zero, d: one }
    }

    /// The map sending `∞ ↦ at_inf`, `0 ↦ at_zero` and `1 ↦ at_one`.
    pub fn from_three_points(
        at_inf: ExtendedComplex,
        at_zero: ExtendedComplex,
        at_one: ExtendedComplex,
    ) -> Result<Self> {
        use ExtendedComplex::*;
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        match (at_inf, at_zero, at_one) {
            (Finite(a), Finite(b), Finite(c)) => MobiusMap::new(a * (c - b), b * (a - c), c - b, a - c),
            (Infinity, Finite(b), Finite(c)) => MobiusMap::new(c - b, b, zero, one),
            (Finite(a), Infinity, Finite(c)) => MobiusMap::new(a, c - a, one, zero),
            (Finite(a), Finite(b), Infinity) => MobiusMap::new(a, -b, one, -one),
            _ => Err(Error::DegenerateMap),
        }
    }

    pub fn coefficients(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }
    pub fn b(&self) -> Complex64 {
        self.b
    }
    pub fn c(&self) -> Complex64 {
        self.c
    }
    pub fn d(&self) -> Complex64 {
        self.d
    }

    pub fn det(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, z: ExtendedComplex) -> ExtendedComplex {
        let r = match z {
            ExtendedComplex::Infinity => ExtendedComplex::from_ratio(self.a, self.c),
            ExtendedComplex::Finite(z) => ExtendedComplex::from_ratio(self.a * z + self.b, self.c * z + self.d),
        };
        // (0, 0) cannot occur for a nondegenerate map; overflow maps to ∞.
        r.unwrap_or(ExtendedComplex::Infinity)
    }

    pub fn apply_finite(&self, z: Complex64) -> ExtendedComplex {
        self.apply(ExtendedComplex::Finite(z))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MobiusMap) -> Result<MobiusMap> {
        let (g, h) = (self, other);
        MobiusMap::new(g.a * h.a + g.b * h.c, g.a * h.b + g.b * h.d, g.c * h.a + g.d * h.c, g.c * h.b + g.d * h.d)
    }

    pub fn inverse(&self) -> MobiusMap {
        MobiusMap { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn scaled(&self, t: Complex64) -> Result<MobiusMap> {
        MobiusMap::new(self.a * t, self.b * t, self.c * t, self.d * t)
    }

    /// Representative with the first nonzero coefficient real positive and
    /// the largest coefficient of modulus one.
    pub fn canonical(&self) -> MobiusMap {
        let coeffs = self.coefficients();
        let first = coeffs.iter().copied().find(|z| z.norm() > 0.0).unwrap_or(Complex64::new(1.0, 0.0));
        let phase = first / first.norm();
        let max = coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let t = phase.inv() / max;
        MobiusMap { a: self.a * t, b: self.b * t, c: self.c * t, d: self.d * t }
    }

    /// Image of the unit circle.
    pub fn image_of_unit_circle(&self) -> CircleOrLine {
        let (nc, nd) = (self.c.norm(), self.d.norm());
        if (nc - nd).abs() < LINE_TOL * (nc + nd) {
            // The pole -d/c lies on the circle; two other circle points fix the line.
            let pole = -self.d / self.c;
            let pole = pole / pole.norm();
            let p0 = self.apply_finite(-pole).as_finite().unwrap_or_default();
            let p1 = self.apply_finite(pole * Complex64::new(0.0, 1.0)).as_finite().unwrap_or_default();
            let dir = p1 - p0;
            let dir = if dir.norm() > 0.0 { dir / dir.norm() } else { Complex64::new(1.0, 0.0) };
            CircleOrLine::Line { point: p0, direction: dir }
        } else {
            // The center is the image of the reflection of the pole in the circle.
            let center = (self.b * self.d.conj() - self.a * self.c.conj()) / (nd * nd - nc * nc);
            let radius = self.det().norm() / (nc * nc - nd * nd).abs();
            CircleOrLine::Circle { center, radius }
        }
    }
}

impl fmt::Display for MobiusMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} z + {}) / ({} z + {})", self.a, self.b, self.c, self.d)
    }
}

/// A generalized circle in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CircleOrLine {
    Circle {
        center: Complex64,
        radius: f64,
    },
    /// Line through `point` with unit `direction`.
    Line {
        point: Complex64,
        direction: Complex64,
    },
}

impl CircleOrLine {
    pub fn is_line(&self) -> bool {
        matches!(self, CircleOrLine::Line { .. })
    }

    /// Euclidean nearest point of the curve to `z`.
    pub fn nearest_point(&self, z: Complex64) -> Complex64 {
        match *self {
            CircleOrLine::Circle { center, radius } => {
                let v = z - center;
                if v.norm() == 0.0 {
                    center + radius
                } else {
                    center + v * (radius / v.norm())
                }
            }
            CircleOrLine::Line { point, direction } => {
                let v = z - point;
                let t = (v * direction.conj()).re;
                point + direction * t
            }
        }
    }

    pub fn euclidean_distance(&self, z: Complex64) -> f64 {
        (z - self.nearest_point(z)).norm()
    }

    /// Chordal distance from `z` to the Euclidean nearest point of the curve;
    /// an upper bound on the chordal distance to the curve. A line contains ∞.
    pub fn chordal_distance_to(&self, z: ExtendedComplex) -> f64 {
        match z {
            ExtendedComplex::Infinity => match self {
                CircleOrLine::Line { .. } => 0.0,
                CircleOrLine::Circle { center, radius } => {
                    let far = *center + *radius + center.norm();
                    chordal_distance(z, ExtendedComplex::Finite(far))
                }
            },
            ExtendedComplex::Finite(w) => chordal_distance(z, ExtendedComplex::Finite(self.nearest_point(w))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn fin(re: f64, im: f64) -> ExtendedComplex {
        ExtendedComplex::Finite(c64(re, im))
    }

    #[test]
    fn chordal_examples() {
        assert!((chordal_distance(fin(0.0, 0.0), ExtendedComplex::Infinity) - 2.0).abs() < 1e-15);
        assert_eq!(chordal_distance(fin(3.0, -1.0), fin(3.0, -1.0)), 0.0);
        assert!((chordal_distance(fin(1.0, 0.0), fin(0.0, 1.0)) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(chordal_distance(ExtendedComplex::Infinity, ExtendedComplex::Infinity), 0.0);
    }

    #[test]
    fn chordal_handles_huge_values() {
        let big = fin(1e200, 0.0);
        let d = chordal_distance(big, ExtendedComplex::Infinity);
        assert!(d < 1e-199 && d > 0.0);
    }

    #[test]
    fn from_ratio_conventions() {
        assert_eq!(ExtendedComplex::from_ratio(c64(3.0, 0.0), c64(0.0, 0.0)).unwrap(), ExtendedComplex::Infinity);
        assert_eq!(ExtendedComplex::from_ratio(c64(6.0, 0.0), c64(3.0, 0.0)).unwrap(), fin(2.0, 0.0));
        assert_eq!(ExtendedComplex::from_ratio(c64(0.0, 0.0), c64(0.0, 0.0)), Err(Error::Indeterminate));
        let tiny = ExtendedComplex::from_ratio(c64(6e-300, 0.0), c64(3e-300, 0.0)).unwrap();
        assert!((tiny.as_finite().unwrap() - 2.0).norm() < 1e-15);
    }

    #[test]
    fn finite_rejects_nan() {
        assert_eq!(ExtendedComplex::finite(c64(f64::NAN, 0.0)), Err(Error::NonFinite));
    }

    #[test]
    fn apply_identity_and_pole() {
        let id = MobiusMap::identity();
        assert_eq!(id.apply(fin(7.0, 2.0)), fin(7.0, 2.0));
        let h = MobiusMap::new(c64(1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0), c64(-1.0, 0.0)).unwrap();
        assert_eq!(h.apply(fin(1.0, 0.0)), ExtendedComplex::Infinity);
        assert_eq!(h.apply(ExtendedComplex::Infinity), fin(1.0, 0.0));
    }

    #[test]
    fn apply_printed_example_map() {
        let h = MobiusMap::new(
            c64(0.581867, 0.408182),
            c64(-0.670885, -0.294104),
            c64(0.518727, 0.00637067),
            c64(-0.565036, -0.228462),
        )
        .unwrap();
        let z = h.apply(ExtendedComplex::ONE).as_finite().unwrap();
        assert!((z - c64(-0.412160, -0.486753)).norm() < 5e-5, "{z}");
    }

    #[test]
    fn degenerate_rejected() {
        let one = c64(1.0, 0.0);
        assert_eq!(MobiusMap::new(one, one, one, one), Err(Error::DegenerateMap));
        assert_eq!(MobiusMap::new(one * 1e10, one, one * 1e10, one * (1.0 + 1e-14)), Err(Error::DegenerateMap));
    }

    #[test]
    fn compose_identity_and_inverse() {
        let h = MobiusMap::new(c64(1.0, 2.0), c64(0.5, 0.0), c64(-1.0, 0.3), c64(2.0, 1.0)).unwrap();
        assert_eq!(MobiusMap::identity().compose(&h).unwrap(), h);
        let k = h.compose(&h.inverse()).unwrap();
        let [a, b, c, d] = k.coefficients();
        assert!(b.norm() < 1e-15 && c.norm() < 1e-15);
        assert!((a - d).norm() < 1e-15 && a.norm() > 0.0);
    }

    #[test]
    fn unit_circle_identity() {
        match MobiusMap::identity().image_of_unit_circle() {
            CircleOrLine::Circle { center, radius } => {
                assert!(center.norm() < 1e-15);
                assert!((radius - 1.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unit_circle_to_real_axis() {
        let s5 = 5f64.sqrt() / 3.0;
        let h = MobiusMap::new(c64(-2.0 / 3.0, s5), c64(2.0 / 3.0, s5), c64(1.0, 0.0), c64(-1.0, 0.0)).unwrap();
        let g = h.image_of_unit_circle();
        match g {
            CircleOrLine::Line { point, direction } => {
                assert!(point.im.abs() < 1e-14);
                assert!(direction.im.abs() < 1e-14);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unit_circle_circumcircle_oracle() {
        let h = MobiusMap::new(
            c64(0.581867, 0.408182),
            c64(-0.670885, -0.294104),
            c64(0.518727, 0.00637067),
            c64(-0.565036, -0.228462),
        )
        .unwrap();
        let pts: Vec<Complex64> = [c64(1.0, 0.0), c64(-1.0, 0.0), c64(0.0, 1.0)]
            .iter()
            .map(|&z| h.apply_finite(z).as_finite().unwrap())
            .collect();
        // Circumcenter of three points, independent of the reflection formula.
        let (a, b, c) = (pts[0], pts[1], pts[2]);
        let d = 2.0 * (a.re * (b.im - c.im) + b.re * (c.im - a.im) + c.re * (a.im - b.im));
        let ux = (a.norm_sqr() * (b.im - c.im) + b.norm_sqr() * (c.im - a.im) + c.norm_sqr() * (a.im - b.im)) / d;
        let uy = (a.norm_sqr() * (c.re - b.re) + b.norm_sqr() * (a.re - c.re) + c.norm_sqr() * (b.re - a.re)) / d;
        let cc = c64(ux, uy);
        match h.image_of_unit_circle() {
            CircleOrLine::Circle { center, radius } => {
                assert!((center - cc).norm() < 1e-9);
                assert!((radius - (a - cc).norm()).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn three_points_with_infinity() {
        let h = MobiusMap::from_three_points(fin(1.0, 0.0), fin(2.0, 0.0), ExtendedComplex::Infinity).unwrap();
        assert!(chordal_distance(h.apply(ExtendedComplex::Infinity), fin(1.0, 0.0)) < 1e-15);
        assert!(chordal_distance(h.apply(ExtendedComplex::ZERO), fin(2.0, 0.0)) < 1e-15);
        assert!(h.apply(ExtendedComplex::ONE).is_infinite());
        let g = MobiusMap::from_three_points(ExtendedComplex::Infinity, fin(2.0, 0.0), fin(5.0, 1.0)).unwrap();
        assert!(g.apply(ExtendedComplex::Infinity).is_infinite());
        assert!(chordal_distance(g.apply(ExtendedComplex::ONE), fin(5.0, 1.0)) < 1e-15);
    }

    #[test]
    fn canonical_is_scale_free() {
        let h = MobiusMap::new(c64(1.0, 2.0), c64(0.5, 0.0), c64(-1.0, 0.3), c64(2.0, 1.0)).unwrap();
        let g = h.scaled(c64(-3.0, 0.7)).unwrap();
        let (ch, cg) = (h.canonical(), g.canonical());
        for (x, y) in ch.coefficients().iter().zip(cg.coefficients().iter()) {
            assert!((x - y).norm() < 1e-14);
        }
        assert!(ch.a().im.abs() < 1e-15 && ch.a().re > 0.0);
    }
}
