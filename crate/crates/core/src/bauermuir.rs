//! Convergent continued fractions, obtained by Bauer–Muir transformations,
//! whose values are the points `h(∞)`, `h(0)` and `h(λ^{k+1})` of the limit
//! set of an elliptic continued fraction.

use num_complex::Complex64;

use crate::cf::{self, ContinuedFraction};
use crate::error::{Error, Result};
use crate::limitset::{tail_omega, EllipticCFSpec};
use crate::qseries::{pxy, IdentityCheck, QParams};
use crate::sphere::{chordal_distance, ExtendedComplex};
use crate::unit::UnitModulusNumber;

/// Which point of the limit set a transformed continued fraction converges to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BMTarget {
    AtInfinity,
    AtZero,
    /// `h(λ^{k+1})`.
    AtLambdaPower(i64),
}

#[derive(Debug, Clone)]
pub struct BMTransformResult {
    pub cf: ContinuedFraction,
    pub target: BMTarget,
}

impl BMTransformResult {
    pub fn evaluate(&self, tol: f64, max_n: usize) -> Result<ExtendedComplex> {
        cf::evaluate(&self.cf, tol, max_n)?.into_value(max_n)
    }
}

/// Continued fraction converging to `h(∞)`.
///
/// With `λ_n = q_n + βp_n`: `b_0 = −β`, first term `λ_1/(α + p_1)`, second
/// `(q_1 − αβ)λ_2 / ((α + p_2)λ_1 + βλ_2)`, and for `n ≥ 3`
/// `(q_{n−1} − αβ)λ_nλ_{n−2} / ((α + p_n)λ_{n−1} + βλ_n)`.
/// A vanishing `λ_n` ends the continued fraction.
pub fn bm_at_infinity(spec: &EllipticCFSpec) -> BMTransformResult {
    BMTransformResult { cf: bm_cf(spec, spec.alpha(), spec.beta()), target: BMTarget::AtInfinity }
}

/// Continued fraction converging to `h(0)`: [`bm_at_infinity`] with `α` and `β` exchanged.
pub fn bm_at_zero(spec: &EllipticCFSpec) -> BMTransformResult {
    BMTransformResult { cf: bm_cf(spec, spec.beta(), spec.alpha()), target: BMTarget::AtZero }
}

fn bm_cf(spec: &EllipticCFSpec, alpha: UnitModulusNumber, beta: UnitModulusNumber) -> ContinuedFraction {
    let s = spec.clone();
    let (a, b) = (alpha.to_complex(), beta.to_complex());
    let ab = a * b;
    let lam = move |n: usize| -> Result<Complex64> { Ok(s.q(n)? + b * s.p(n)) };
    let s = spec.clone();
    ContinuedFraction::try_new(move |n| match n {
        1 => Ok((lam(1)?, a + s.p(1))),
        2 => {
            let (l1, l2) = (lam(1)?, lam(2)?);
            Ok(((s.q(1)? - ab) * l2, (a + s.p(2)) * l1 + b * l2))
        }
        _ => {
            let (l0, l1, l2) = (lam(n - 2)?, lam(n - 1)?, lam(n)?);
            Ok(((s.q(n - 1)? - ab) * l2 * l0, (a + s.p(n)) * l1 + b * l2))
        }
    })
    .with_b0(-b)
    .terminating()
}

/// Continued fraction converging to `h(λ^{k+1})` when `λ` is not a root of unity.
///
/// Keeps the original terms through depth `k' − 1` (`k' = max(3, k + 3)`),
/// adds `ω_{k'}` to the denominator at depth `k'`, and continues with terms
/// built from `λ_n = −αβ + q_n − ω_{n−1}(α + β + p_n + ω_n)`, evaluated as the
/// equal expression `q_n − ω_{n−1}p_n`.
pub fn bm_at_lambda_power(spec: &EllipticCFSpec, k: i64) -> Result<BMTransformResult> {
    if spec.lambda().is_exact() {
        return Err(Error::RootOfUnityLambda);
    }
    let kp = 3.max(k + 3) as usize;
    let (alpha, beta) = (spec.alpha(), spec.beta());
    let (a, b) = (alpha.to_complex(), beta.to_complex());
    let (ab, apb) = (a * b, a + b);
    let omega = move |n: usize| -> Result<Complex64> {
        tail_omega(&alpha, &beta, n as i64 - k).as_finite().ok_or(Error::DegenerateTerm(n))
    };
    let s = spec.clone();
    let lam = move |n: usize| -> Result<Complex64> { Ok(s.q(n)? - omega(n - 1)? * s.p(n)) };
    let s = spec.clone();
    let cf = ContinuedFraction::try_new(move |n| {
        let (an, bn) = (s.q(n)? - ab, apb + s.p(n));
        if n < kp {
            Ok((an, bn))
        } else if n == kp {
            Ok((an, bn + omega(n)?))
        } else if n == kp + 1 {
            Ok((lam(n)?, bn + omega(n)?))
        } else {
            let prev = lam(n - 1)?;
            if prev == Complex64::new(0.0, 0.0) {
                return Err(Error::DegenerateTerm(n));
            }
            let x = lam(n)? / prev;
            Ok(((s.q(n - 1)? - ab) * x, bn + omega(n)? - omega(n - 2)? * x))
        }
    })
    .terminating();
    Ok(BMTransformResult { cf, target: BMTarget::AtLambdaPower(k) })
}

/// Both sides of
/// `−β + βq/(α + q) + K_{n≥2} (−αβq)/(q^n + α + βq) = −β·P(q/α, β/α)/P(1/α, β/α)`.
pub fn rbm_identity(
    params: &QParams,
    alpha: UnitModulusNumber,
    beta: UnitModulusNumber,
    max_n: usize,
) -> Result<IdentityCheck> {
    if alpha.div(&beta).is_exact() {
        return Err(Error::RootOfUnityLambda);
    }
    let q = params.q();
    let (a, b) = (alpha.to_complex(), beta.to_complex());
    let cf = ContinuedFraction::new(
        move |n| {
            if n == 1 {
                (b * q, a + q)
            } else {
                (-a * b * q, q.powu(n as u32) + a + b * q)
            }
        },
    )
    .with_b0(-b)
    .terminating();
    let lhs =
        cf::evaluate(&cf, params.tol(), max_n)?.into_value(max_n).map_err(|_| Error::SeriesNotConverged(max_n))?;
    let ai = alpha.inv().to_complex();
    let y = beta.div(&alpha).to_complex();
    let rhs = ExtendedComplex::from_ratio(-b * pxy(q * ai, y, params)?, pxy(ai, y, params)?)?;
    Ok(IdentityCheck { lhs, rhs, residual: chordal_distance(lhs, rhs) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::limitset::{compute_h_direct, h_at_infinity, h_at_zero};

    fn g_example() -> EllipticCFSpec {
        EllipticCFSpec::geometric(
            UnitModulusNumber::numeric(11f64.sqrt()).unwrap(),
            UnitModulusNumber::numeric(13f64.sqrt()).unwrap(),
            c64(0.3, 0.0),
            c64(0.2, 0.0),
        )
        .unwrap()
    }

    fn close(z: ExtendedComplex, re: f64, im: f64, tol: f64) -> bool {
        let z = z.as_finite().unwrap();
        (z.re - re).abs() < tol && (z.im - im).abs() < tol
    }

    #[test]
    fn printed_values() {
        let spec = g_example();
        assert!(close(bm_at_infinity(&spec).evaluate(1e-14, 1000).unwrap(), 1.13121, 0.772998, 5e-6));
        assert!(close(bm_at_zero(&spec).evaluate(1e-14, 1000).unwrap(), 1.20138, 0.0347473, 5e-6));
        let c = bm_at_lambda_power(&spec, -1).unwrap().evaluate(1e-14, 1000).unwrap();
        assert!(close(c, -0.412160, -0.486753, 5e-6));
    }

    #[test]
    fn agrees_with_modified_limits() {
        let spec = g_example();
        let a = h_at_infinity(&spec, 1e-14, 1000).unwrap();
        let b = h_at_zero(&spec, 1e-14, 1000).unwrap();
        assert!(chordal_distance(a, bm_at_infinity(&spec).evaluate(1e-14, 1000).unwrap()) < 1e-10);
        assert!(chordal_distance(b, bm_at_zero(&spec).evaluate(1e-14, 1000).unwrap()) < 1e-10);
    }

    #[test]
    fn lambda_powers_match_h() {
        let spec = g_example();
        let h = compute_h_direct(&spec, 1e-13, 1000).unwrap().h;
        for k in [-1, 0, 1, 2, 5] {
            let v = bm_at_lambda_power(&spec, k).unwrap().evaluate(1e-14, 1000).unwrap();
            let z = spec.lambda().pow(k + 1).to_complex();
            assert!(chordal_distance(v, h.apply_finite(z)) < 1e-9, "k={k}");
        }
    }

    #[test]
    fn constant_case_terminates() {
        let alpha = UnitModulusNumber::numeric(1.0).unwrap();
        let beta = UnitModulusNumber::numeric(2.0).unwrap();
        let spec = EllipticCFSpec::constant(alpha, beta).unwrap();
        let h = compute_h_direct(&spec, 1e-13, 1000).unwrap().h;
        let v = bm_at_infinity(&spec).evaluate(1e-14, 100).unwrap();
        assert!(chordal_distance(v, ExtendedComplex::Finite(-beta.to_complex())) < 1e-15);
        assert!(chordal_distance(v, h.apply(ExtendedComplex::Infinity)) < 1e-12);
        let w = bm_at_zero(&spec).evaluate(1e-14, 100).unwrap();
        assert!(chordal_distance(w, h.apply(ExtendedComplex::ZERO)) < 1e-12);
    }

    #[test]
    fn zero_is_swapped_infinity() {
        let spec = g_example();
        let z = bm_at_zero(&spec).cf;
        let i = bm_at_infinity(&spec.swapped()).cf;
        assert_eq!(z.b0(), i.b0());
        for n in 1..30 {
            assert_eq!(z.term(n).unwrap(), i.term(n).unwrap());
        }
    }

    #[test]
    fn lambda_power_requires_irrational_lambda() {
        let a = UnitModulusNumber::exact_root(1, 6).unwrap();
        let b = UnitModulusNumber::exact_root(5, 6).unwrap();
        let spec = EllipticCFSpec::geometric(a, b, c64(0.3, 0.0), c64(0.2, 0.0)).unwrap();
        assert!(matches!(bm_at_lambda_power(&spec, 0), Err(Error::RootOfUnityLambda)));
    }

    #[test]
    fn rbm() {
        for (q, x, y, tol) in [(0.3, 2f64.sqrt(), 1.0, 1e-10), (0.5, 3f64.sqrt(), 5f64.sqrt(), 1e-9)] {
            let p = QParams::with_q(c64(q, 0.0)).unwrap();
            let alpha = UnitModulusNumber::numeric(x).unwrap();
            let beta = UnitModulusNumber::numeric(y).unwrap();
            let r = rbm_identity(&p, alpha, beta, 10_000).unwrap();
            assert!(r.residual < tol, "{r:?}");
        }
        let p = QParams::with_q(c64(0.0, 0.0)).unwrap();
        let beta = UnitModulusNumber::numeric(1.0).unwrap();
        let r = rbm_identity(&p, UnitModulusNumber::numeric(2.0).unwrap(), beta, 100).unwrap();
        assert_eq!(r.lhs, ExtendedComplex::Finite(-beta.to_complex()));
        assert!(r.residual < 1e-15);
    }
}
