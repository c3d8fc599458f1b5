//! q-Pochhammer symbols, the series `P(x, y)` and the q-continued fractions
//! built from them.

use num_complex::Complex64;

use crate::cf::{self, ContinuedFraction, STABILITY_WINDOW};
use crate::error::{Error, Result};
use crate::limitset::{build_cf, EllipticCFSpec};
use crate::sphere::{chordal_distance, ExtendedComplex, MobiusMap};
use crate::unit::UnitModulusNumber;

/// Default number of terms allowed for series and products.
pub const DEFAULT_MAX_TERMS: usize = 100_000;

/// A base `q` with `|q| < 1` and a truncation policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QParams {
    q: Complex64,
    tol: f64,
    max_terms: usize,
}

impl QParams {
    pub fn new(q: Complex64, tol: f64, max_terms: usize) -> Result<Self> {
        if q.norm() >= 1.0 || q.norm().is_nan() {
            return Err(Error::InvalidArgument(format!("|q| must be < 1, got {}", q.norm())));
        }
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        Ok(QParams { q, tol, max_terms })
    }

    /// `q` with tolerance `1e-15` and [`DEFAULT_MAX_TERMS`].
    pub fn with_q(q: Complex64) -> Result<Self> {
        Self::new(q, 1e-15, DEFAULT_MAX_TERMS)
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }
}

/// `(a; q)_n = ∏_{k<n} (1 − a q^k)` for any `q`.
pub fn qpochhammer(a: Complex64, q: Complex64, n: usize) -> Complex64 {
    let mut prod = Complex64::new(1.0, 0.0);
    let mut t = a;
    for _ in 0..n {
        prod *= 1.0 - t;
        t *= q;
    }
    prod
}

/// `(a; q)_∞`, truncated once the remaining factors provably change the
/// product by less than `tol/10`: `|∏_{j≥k}(1 − aq^j) − 1| ≤ exp(|a||q|^k/(1 − |q|)) − 1`.
pub fn qpochhammer_infinite(a: Complex64, params: &QParams) -> Result<Complex64> {
    let r = params.q.norm();
    let mut prod = Complex64::new(1.0, 0.0);
    let mut t = a;
    for _ in 0..params.max_terms {
        let tail = (t.norm() / (1.0 - r)).exp_m1();
        if tail * prod.norm().max(1.0) < params.tol / 10.0 {
            return Ok(prod);
        }
        prod *= 1.0 - t;
        t *= params.q;
    }
    Err(Error::SeriesNotConverged(params.max_terms))
}

/// `P(x, y) = Σ_{n≥0} x^n q^{n(n+1)/2} / ((q)_n (yq)_n)`.
///
/// Terms are generated by their ratio `x q^{n+1} / ((1 − q^{n+1})(1 − y q^{n+1}))`.
/// Summation stops when a geometric bound on the remaining terms falls below `tol/10`.
pub fn pxy(x: Complex64, y: Complex64, params: &QParams) -> Result<Complex64> {
    let q = params.q;
    let r = q.norm();
    let (nx, ny) = (x.norm(), y.norm());
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut qn = Complex64::new(1.0, 0.0);
    let mut rn = 1.0f64;
    for n in 0..params.max_terms {
        qn *= q;
        rn *= r;
        let den = (1.0 - qn) * (1.0 - y * qn);
        if den.norm() < 1e-300 || (1.0 - y * qn).norm() < 1e-15 {
            return Err(Error::PoleInDenominator(n + 1));
        }
        term *= x * qn / den;
        sum += term;
        // For k > n+1 the ratio modulus is at most rho (monotone once |y| r^k < 1).
        let rk = rn * r;
        if ny * rk < 1.0 {
            let rho = nx * rk / ((1.0 - rk) * (1.0 - ny * rk));
            if rho < 1.0 {
                let tail = term.norm() * rho / (1.0 - rho);
                if tail < params.tol / 10.0 * sum.norm().max(1.0) {
                    return Ok(sum);
                }
            }
        }
    }
    Err(Error::SeriesNotConverged(params.max_terms))
}

/// The continued fraction `−αβ/(α + β + q) − αβ/(α + β + q²) − ...`.
pub fn ramanujan_cf(q: Complex64, alpha: UnitModulusNumber, beta: UnitModulusNumber) -> Result<ContinuedFraction> {
    let spec = EllipticCFSpec::geometric(alpha, beta, q, Complex64::new(0.0, 0.0))?;
    Ok(build_cf(&spec))
}

/// The map `h` with `f_n ~ h(λ^{n+1})` for [`ramanujan_cf`]:
/// `a = −βP(q/α, β/α)`, `b = αP(q/β, α/β)`, `c = P(1/α, β/α)`, `d = −P(1/β, α/β)`.
pub fn ramanujan_limit_map(params: &QParams, alpha: UnitModulusNumber, beta: UnitModulusNumber) -> Result<MobiusMap> {
    if alpha == beta {
        return Err(Error::EqualAlphaBeta);
    }
    let q = params.q;
    let (a, b) = (alpha.to_complex(), beta.to_complex());
    let (ai, bi) = (alpha.inv().to_complex(), beta.inv().to_complex());
    let lam = alpha.div(&beta).to_complex();
    let lam_inv = beta.div(&alpha).to_complex();
    MobiusMap::new(
        -b * pxy(q * ai, lam_inv, params)?,
        a * pxy(q * bi, lam, params)?,
        pxy(ai, lam_inv, params)?,
        -pxy(bi, lam, params)?,
    )
}

/// The two sides of an identity and their chordal distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityCheck {
    pub lhs: ExtendedComplex,
    pub rhs: ExtendedComplex,
    pub residual: f64,
}

/// Ramanujan's three-limit evaluation, checked along one residue class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamanujanCheck {
    pub check: IdentityCheck,
    /// The index `n` (smallest `≥ 3` in the class) at which the right side is evaluated.
    pub n: usize,
    /// Chordal distance between the right side at `n` and at `n + 3`.
    pub shift_residual: f64,
}

/// The continued fraction `1/1 − 1/(1+q) − 1/(1+q²) − ...`; its `(n+1)`-th
/// approximant with `a` added to the last denominator is the `n`-th term of
/// Ramanujan's sequence.
pub fn ramanujan_three_limit_cf(q: Complex64) -> ContinuedFraction {
    let one = Complex64::new(1.0, 0.0);
    ContinuedFraction::new(move |i| if i == 1 { (one, one) } else { (-one, one + q.powu(i as u32 - 1)) })
}

/// The closed form `−ω²(Ω − ω^{n+1})/(Ω − ω^{n−1}) · (q²;q³)_∞/(q;q³)_∞` with
/// `ω = e^{2πi/3}` and `Ω = ((1 − aω²)/(1 − aω)) (ω²q;q)_∞/(ωq;q)_∞`.
pub fn ramanujan_three_limit_rhs(params: &QParams, a: Complex64, n: usize) -> Result<ExtendedComplex> {
    let q = params.q;
    let w = UnitModulusNumber::exact_root(1, 3)?;
    let (w1, w2) = (w.to_complex(), w.pow(2).to_complex());
    let q3 = QParams { q: q * q * q, ..*params };
    let ratio = qpochhammer_infinite(q * q, &q3)? / qpochhammer_infinite(q, &q3)?;
    let omega_num = (1.0 - a * w2) * qpochhammer_infinite(w2 * q, params)?;
    let omega_den = (1.0 - a * w1) * qpochhammer_infinite(w1 * q, params)?;
    let up = w.pow(n as i64 + 1).to_complex();
    let down = w.pow(n as i64 - 1).to_complex();
    // Ω − ω^k computed projectively as (Ω_num − ω^k Ω_den)/Ω_den.
    let num = -w2 * (omega_num - up * omega_den) * ratio;
    let den = omega_num - down * omega_den;
    ExtendedComplex::from_ratio(num, den)
}

/// Compares the limit of Ramanujan's sequence along `n ≡ j (mod 3)` with the
/// closed form.
pub fn verify_ramanujan_claim(params: &QParams, a: Complex64, j: usize, max_n: usize) -> Result<RamanujanCheck> {
    if j > 2 {
        return Err(Error::InvalidArgument(format!("residue must be 0, 1 or 2, got {j}")));
    }
    let cf = ramanujan_three_limit_cf(params.q);
    let mut stream = cf.convergents();
    let mut run = 0usize;
    let mut last: Option<ExtendedComplex> = None;
    let mut lhs = None;
    let mut last_delta = f64::INFINITY;
    while stream.index() < max_n {
        stream.advance()?;
        // Depth N = n + 1 carries the sequence's n-th term.
        let n = stream.index() - 1;
        if n < 3 || n % 3 != j {
            continue;
        }
        let v = stream.modified_value(ExtendedComplex::Finite(a))?;
        if let Some(prev) = last {
            last_delta = chordal_distance(prev, v);
            run = if last_delta < params.tol { run + 1 } else { 0 };
        }
        last = Some(v);
        if run >= STABILITY_WINDOW {
            lhs = Some(v);
            break;
        }
    }
    let lhs = lhs.ok_or(Error::NoConvergenceWithinBudget { budget: max_n, last_delta })?;
    let n = 3 + j;
    let rhs = ramanujan_three_limit_rhs(params, a, n)?;
    let shifted = ramanujan_three_limit_rhs(params, a, n + 3)?;
    Ok(RamanujanCheck {
        check: IdentityCheck { lhs, rhs, residual: chordal_distance(lhs, rhs) },
        n,
        shift_residual: chordal_distance(rhs, shifted),
    })
}

/// `1 + q/1 + q²/1 + q³/1 + ...`.
pub fn rogers_ramanujan_cf(q: Complex64) -> ContinuedFraction {
    let one = Complex64::new(1.0, 0.0);
    ContinuedFraction::new(move |n| (q.powu(n as u32), one)).with_b0(one)
}

/// The equivalent form `1 + 1/q^{−1} + 1/q^{−1} + 1/q^{−2} + 1/q^{−2} + ...`
/// obtained with scale factors `q^{−⌈n/2⌉}`; its approximants coincide with
/// those of [`rogers_ramanujan_cf`] and its convergents stay bounded for `|q| > 1`.
pub fn rogers_ramanujan_transformed(q: Complex64) -> ContinuedFraction {
    let one = Complex64::new(1.0, 0.0);
    let qi = q.inv();
    ContinuedFraction::new(move |n| (one, qi.powu(n.div_ceil(2) as u32))).with_b0(one)
}

/// Even and odd limits of the Rogers–Ramanujan continued fraction for `|q| > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLimits {
    pub even: ExtendedComplex,
    pub odd: ExtendedComplex,
    /// `A_1B_0 − A_0B_1` for the convergent limits of the transformed fraction.
    pub determinant: Complex64,
}

pub fn rogers_ramanujan_two_limits(q: Complex64, tol: f64, max_n: usize) -> Result<TwoLimits> {
    if q.norm() <= 1.0 || q.norm().is_nan() {
        return Err(Error::InvalidArgument(format!("|q| must be > 1, got {}", q.norm())));
    }
    let cf = rogers_ramanujan_transformed(q);
    let pairs = cf::residue_convergents(&cf, 2, tol, max_n).map_err(|e| match e {
        Error::NoConvergenceWithinBudget { budget, .. } => Error::SeriesNotConverged(budget),
        other => other,
    })?;
    let (a0, b0) = pairs[0];
    let (a1, b1) = pairs[1];
    Ok(TwoLimits {
        even: ExtendedComplex::from_ratio(a0, b0)?,
        odd: ExtendedComplex::from_ratio(a1, b1)?,
        determinant: a1 * b0 - a0 * b1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::limitset::compute_h_direct;

    fn params(q: f64) -> QParams {
        QParams::with_q(c64(q, 0.0)).unwrap()
    }

    #[test]
    fn pochhammer_basics() {
        let p = params(0.2);
        assert_eq!(qpochhammer(c64(0.7, 0.1), c64(0.2, 0.0), 0), c64(1.0, 0.0));
        assert_eq!(qpochhammer_infinite(c64(0.0, 0.0), &p).unwrap(), c64(1.0, 0.0));
        let brute = qpochhammer(c64(0.2, 0.0), c64(0.2, 0.0), 200);
        assert!((qpochhammer_infinite(c64(0.2, 0.0), &p).unwrap() - brute).norm() < 1e-15);
        assert!(QParams::with_q(c64(1.0, 0.0)).is_err());
    }

    #[test]
    fn pochhammer_multiplicative() {
        let (a, q) = (c64(0.3, -0.4), c64(0.5, 0.2));
        for (m, n) in [(3, 4), (0, 5), (7, 0), (10, 12)] {
            let lhs = qpochhammer(a, q, m + n);
            let rhs = qpochhammer(a, q, m) * qpochhammer(a * q.powu(m as u32), q, n);
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }

    #[test]
    fn pxy_trivial_cases() {
        let p0 = QParams::with_q(c64(0.0, 0.0)).unwrap();
        assert_eq!(pxy(c64(5.0, 2.0), c64(0.3, 0.0), &p0).unwrap(), c64(1.0, 0.0));
        assert_eq!(pxy(c64(0.0, 0.0), c64(0.3, 0.0), &params(0.4)).unwrap(), c64(1.0, 0.0));
    }

    #[test]
    fn pxy_brute_force() {
        let p = params(0.1);
        let q = c64(0.1, 0.0);
        let mut brute = c64(0.0, 0.0);
        for n in 0..50u32 {
            let num = q.powu(n * (n + 1) / 2);
            brute += num / (qpochhammer(q, q, n as usize) * qpochhammer(q, q, n as usize));
        }
        assert!((pxy(c64(1.0, 0.0), c64(1.0, 0.0), &p).unwrap() - brute).norm() < 1e-15);
    }

    #[test]
    fn pxy_pole() {
        // y q = 1 makes (yq)_1 vanish.
        assert_eq!(pxy(c64(1.0, 0.0), c64(2.0, 0.0), &params(0.5)), Err(Error::PoleInDenominator(1)));
    }

    #[test]
    fn limit_map_matches_direct() {
        let alpha = UnitModulusNumber::numeric(11f64.sqrt()).unwrap();
        let beta = UnitModulusNumber::numeric(13f64.sqrt()).unwrap();
        let p = params(0.2);
        let h = ramanujan_limit_map(&p, alpha, beta).unwrap();
        let spec = EllipticCFSpec::geometric(alpha, beta, c64(0.2, 0.0), c64(0.0, 0.0)).unwrap();
        let d = compute_h_direct(&spec, 1e-13, 10_000).unwrap().h;
        for k in 0..20 {
            let z = ExtendedComplex::Finite(c64(0.5 * k as f64 - 4.0, 0.2 * k as f64 - 1.0));
            assert!(chordal_distance(h.apply(z), d.apply(z)) < 1e-10);
        }
    }

    #[test]
    fn limit_map_at_zero_q() {
        let alpha = UnitModulusNumber::numeric(1.0).unwrap();
        let beta = UnitModulusNumber::numeric(2.5).unwrap();
        let h = ramanujan_limit_map(&QParams::with_q(c64(0.0, 0.0)).unwrap(), alpha, beta).unwrap();
        let (a, b) = (alpha.to_complex(), beta.to_complex());
        let expect = MobiusMap::new(-b, a, c64(1.0, 0.0), c64(-1.0, 0.0)).unwrap();
        for k in 0..10 {
            let z = ExtendedComplex::Finite(c64(k as f64 * 0.7 - 3.0, 0.4));
            assert!(chordal_distance(h.apply(z), expect.apply(z)) < 1e-14);
        }
    }

    #[test]
    fn three_limit_claim() {
        for q in [0.1, 0.3] {
            for a in [0.0, 0.05] {
                for j in 0..3 {
                    let r = verify_ramanujan_claim(&params(q), c64(a, 0.0), j, 10_000).unwrap();
                    assert!(r.check.residual < 1e-10, "q={q} a={a} j={j}: {r:?}");
                    assert!(r.shift_residual < 1e-12);
                }
            }
        }
    }

    #[test]
    fn three_limit_at_zero_q() {
        let p = QParams::with_q(c64(0.0, 0.0)).unwrap();
        let mut seen = Vec::new();
        for j in 0..3 {
            let r = verify_ramanujan_claim(&p, c64(0.0, 0.0), j, 1000).unwrap();
            assert!(r.check.residual < 1e-14);
            seen.push(r.check.lhs);
        }
        assert!(seen.contains(&ExtendedComplex::Infinity));
        assert!(seen.contains(&ExtendedComplex::ZERO));
        assert!(seen.contains(&ExtendedComplex::ONE));
    }

    #[test]
    fn rogers_ramanujan_forms_agree() {
        let q = c64(2.0, 0.0);
        let a = rogers_ramanujan_cf(q).approximants(40).unwrap();
        let b = rogers_ramanujan_transformed(q).approximants(40).unwrap();
        for (x, y) in a.iter().zip(b) {
            assert!(chordal_distance(*x, y) < 1e-12);
        }
    }

    #[test]
    fn rogers_ramanujan_limits() {
        for q in [2.0, 1.5] {
            let t = rogers_ramanujan_two_limits(c64(q, 0.0), 1e-15, 10_000).unwrap();
            assert!(chordal_distance(t.even, t.odd) > 1e-3);
            assert!((t.determinant - 1.0).norm() < 1e-12);
        }
        assert!(rogers_ramanujan_two_limits(c64(0.5, 0.0), 1e-12, 100).is_err());
    }
}
