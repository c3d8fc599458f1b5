//! Limit sets of limit-periodic continued fractions of elliptic type,
//!
//! ```text
//! (−αβ + q_1)/(α + β + p_1) + (−αβ + q_2)/(α + β + p_2) + ...
//! ```
//!
//! with `|α| = |β| = 1`, `α ≠ β` and summable `p_n`, `q_n`. The approximants
//! satisfy `f_n ~ h(λ^{n+1})` for a Möbius map `h` and `λ = α/β`, so the limit
//! set is the image under `h` of the closed subgroup generated by `λ`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::cf::{self, ContinuedFraction, STABILITY_WINDOW};
use crate::error::{Error, Result};
use crate::sphere::{chordal_distance, CircleOrLine, ExtendedComplex, MobiusMap, LINE_TOL};
use crate::unit::{order_of_lambda, Order, UnitModulusNumber};

/// A complex sequence indexed from 1.
pub type Seq = Arc<dyn Fn(usize) -> Complex64 + Send + Sync>;

/// `N ↦` an upper bound on a tail sum over indices `> N`.
pub type TailBound = Arc<dyn Fn(usize) -> f64 + Send + Sync>;

/// Values closer than this (chordally) are treated as one limit point.
pub const DISTINCT_TOL: f64 = 1e-6;

/// The data `(α, β, p_n, q_n)` of an elliptic limit-periodic continued fraction.
#[derive(Clone)]
pub struct EllipticCFSpec {
    alpha: UnitModulusNumber,
    beta: UnitModulusNumber,
    p: Seq,
    q: Seq,
    tail_bound: Option<TailBound>,
}

impl fmt::Debug for EllipticCFSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EllipticCFSpec")
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("tail_bound", &self.tail_bound.is_some())
            .finish_non_exhaustive()
    }
}

impl EllipticCFSpec {
    pub fn new<P, Q>(alpha: UnitModulusNumber, beta: UnitModulusNumber, p: P, q: Q) -> Result<Self>
    where
        P: Fn(usize) -> Complex64 + Send + Sync + 'static,
        Q: Fn(usize) -> Complex64 + Send + Sync + 'static,
    {
        order_of_lambda(&alpha, &beta)?;
        Ok(EllipticCFSpec { alpha, beta, p: Arc::new(p), q: Arc::new(q), tail_bound: None })
    }

    /// `p_n = q_n = 0`: the periodic continued fraction.
    pub fn constant(alpha: UnitModulusNumber, beta: UnitModulusNumber) -> Result<Self> {
        let zero = Complex64::new(0.0, 0.0);
        Ok(Self::new(alpha, beta, move |_| zero, move |_| zero)?.with_tail_bound(|_| 0.0))
    }

    /// `p_n = p_ratio^n`, `q_n = q_ratio^n` with the geometric tail bound.
    pub fn geometric(
        alpha: UnitModulusNumber,
        beta: UnitModulusNumber,
        p_ratio: Complex64,
        q_ratio: Complex64,
    ) -> Result<Self> {
        let (rp, rq) = (p_ratio.norm(), q_ratio.norm());
        if rp >= 1.0 || rq >= 1.0 {
            return Err(Error::InvalidArgument("geometric ratios must have modulus < 1".into()));
        }
        let spec = Self::new(alpha, beta, move |n| p_ratio.powu(n as u32), move |n| q_ratio.powu(n as u32))?;
        Ok(spec.with_tail_bound(move |n| geometric_tail(rp, n) + geometric_tail(rq, n)))
    }

    pub fn with_tail_bound<T>(mut self, tail: T) -> Self
    where
        T: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        self.tail_bound = Some(Arc::new(tail));
        self
    }

    pub fn alpha(&self) -> UnitModulusNumber {
        self.alpha
    }

    pub fn beta(&self) -> UnitModulusNumber {
        self.beta
    }

    pub fn lambda(&self) -> UnitModulusNumber {
        self.alpha.div(&self.beta)
    }

    pub fn lambda_order(&self) -> Order {
        self.lambda().order()
    }

    pub fn p(&self, n: usize) -> Complex64 {
        (self.p)(n)
    }

    /// `q_n`, rejecting the excluded value `αβ`.
    pub fn q(&self, n: usize) -> Result<Complex64> {
        let q = (self.q)(n);
        let ab = self.alpha.mul(&self.beta).to_complex();
        if (q - ab).norm() <= 1e-14 {
            return Err(Error::QEqualsAlphaBeta(n));
        }
        Ok(q)
    }

    pub fn tail_bound(&self, n: usize) -> Option<f64> {
        self.tail_bound.as_ref().map(|t| t(n))
    }

    /// The same spec with `α` and `β` exchanged (the continued fraction is
    /// unchanged; `h` is composed with `z ↦ 1/z`).
    pub fn swapped(&self) -> Self {
        EllipticCFSpec { alpha: self.beta, beta: self.alpha, ..self.clone() }
    }
}

/// `Σ_{n>N} r^n` for `0 ≤ r < 1`.
pub fn geometric_tail(r: f64, n: usize) -> f64 {
    if r == 0.0 {
        0.0
    } else {
        r.powf(n as f64 + 1.0) / (1.0 - r)
    }
}

pub fn build_cf(spec: &EllipticCFSpec) -> ContinuedFraction {
    let s = spec.clone();
    let ab = spec.alpha.mul(&spec.beta).to_complex();
    let apb = spec.alpha.to_complex() + spec.beta.to_complex();
    ContinuedFraction::try_new(move |n| Ok((s.q(n)? - ab, apb + s.p(n))))
}

/// `ω_n = −(α^n − β^n)/(α^{n−1} − β^{n−1})`, equal to `∞` when `λ^{n−1} = 1`.
pub fn tail_omega(alpha: &UnitModulusNumber, beta: &UnitModulusNumber, n: i64) -> ExtendedComplex {
    let lambda = alpha.div(beta);
    let prev = lambda.pow(n - 1);
    if prev.is_exactly_one() {
        return ExtendedComplex::Infinity;
    }
    let num = lambda.pow(n).to_complex() - 1.0;
    let den = prev.to_complex() - 1.0;
    ExtendedComplex::from_ratio(-beta.to_complex() * num, den).unwrap_or(ExtendedComplex::Infinity)
}

/// Limits defining `h` together with the determinant product.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectH {
    /// `h` with the un-normalized limits `(a, b, c, d)` as coefficients.
    pub h: MobiusMap,
    /// `(β − α)·∏(1 − q_n/αβ)`, truncated at `terms`.
    pub det_product: Complex64,
    pub terms: usize,
}

/// `a = lim α^{−n}(P_n − βP_{n−1})`, `b = −lim β^{−n}(P_n − αP_{n−1})` and the
/// same with `Q` for `c`, `d`.
///
/// Stops once all four sequences are stable over the window and, when the
/// spec carries a tail bound, `tail_bound(n)` times their running maximum
/// modulus is below `tol`.
pub fn compute_h_direct(spec: &EllipticCFSpec, tol: f64, max_n: usize) -> Result<DirectH> {
    check_tol(tol)?;
    let (alpha, beta) = (spec.alpha, spec.beta);
    let (ac, bc) = (alpha.to_complex(), beta.to_complex());
    let ab = alpha.mul(&beta).to_complex();
    let mut stream = build_cf(spec).convergents();
    let mut prod = bc - ac;
    let mut last: Option<[Complex64; 4]> = None;
    let mut run = 0usize;
    let mut bound = 0.0f64;
    let mut last_delta = f64::INFINITY;
    while stream.index() < max_n {
        stream.advance()?;
        let n = stream.index();
        prod *= 1.0 - spec.q(n)? / ab;
        let (p, q) = stream.true_current();
        let (p1, q1) = stream.true_previous();
        let ai = alpha.pow(-(n as i64)).to_complex();
        let bi = beta.pow(-(n as i64)).to_complex();
        let cur = [ai * (p - bc * p1), -bi * (p - ac * p1), ai * (q - bc * q1), -bi * (q - ac * q1)];
        if cur.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        bound = cur.iter().map(|z| z.norm()).fold(bound, f64::max);
        if let Some(prev) = last {
            let delta =
                cur.iter().zip(prev.iter()).map(|(x, y)| (x - y).norm() / x.norm().max(1.0)).fold(0.0, f64::max);
            last_delta = delta;
            run = if delta <= tol { run + 1 } else { 0 };
        }
        last = Some(cur);
        let tail_ok = spec.tail_bound(n).is_none_or(|t| t * bound.max(1.0) < tol);
        if run >= STABILITY_WINDOW && tail_ok {
            let h = MobiusMap::new(cur[0], cur[1], cur[2], cur[3])?;
            return Ok(DirectH { h, det_product: prod, terms: n });
        }
    }
    Err(Error::NoConvergenceWithinBudget { budget: max_n, last_delta })
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")))
    }
}

fn modified_limit<W>(spec: &EllipticCFSpec, w: W, tol: f64, max_n: usize) -> Result<ExtendedComplex>
where
    W: Fn(usize) -> ExtendedComplex,
{
    cf::modified_value(&build_cf(spec), w, tol, max_n)?.into_value(max_n)
}

/// `h(∞)`: the limit of approximants whose last denominator is `α + p_n`.
pub fn h_at_infinity(spec: &EllipticCFSpec, tol: f64, max_n: usize) -> Result<ExtendedComplex> {
    let w = ExtendedComplex::Finite(-spec.beta.to_complex());
    modified_limit(spec, |_| w, tol, max_n)
}

/// `h(0)`: the limit of approximants whose last denominator is `β + p_n`.
pub fn h_at_zero(spec: &EllipticCFSpec, tol: f64, max_n: usize) -> Result<ExtendedComplex> {
    let w = ExtendedComplex::Finite(-spec.alpha.to_complex());
    modified_limit(spec, |_| w, tol, max_n)
}

/// `h(λ^{k+1})`: the modified limit with `ω_{n−k}` added to the denominator
/// at depth `n`.
pub fn h_at_lambda_power(spec: &EllipticCFSpec, k: i64, tol: f64, max_n: usize) -> Result<ExtendedComplex> {
    let (alpha, beta) = (spec.alpha, spec.beta);
    modified_limit(spec, move |n| tail_omega(&alpha, &beta, n as i64 - k), tol, max_n)
}

/// `h` assembled from three of its values.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedH {
    pub h: MobiusMap,
    pub at_infinity: ExtendedComplex,
    pub at_zero: ExtendedComplex,
    pub at_one: ExtendedComplex,
    /// The factor `s` applied so that `det(h)` equals the requested product.
    pub scale: Option<Complex64>,
}

/// Builds `h` from `h(∞)`, `h(0)` and `h(1)`, each a modified limit.
///
/// With `det_product` given, the coefficients are multiplied by
/// `s = ±√(det_product / det)`, choosing the root with nonnegative real part
/// (nonnegative imaginary part on ties); both roots define the same map.
pub fn compute_h_via_modifications(
    spec: &EllipticCFSpec,
    det_product: Option<Complex64>,
    tol: f64,
    max_n: usize,
) -> Result<ModifiedH> {
    let a = snap_infinity(h_at_infinity(spec, tol, max_n)?);
    let b = snap_infinity(h_at_zero(spec, tol, max_n)?);
    let c = snap_infinity(h_at_lambda_power(spec, -1, tol, max_n)?);
    h_from_values(a, b, c, det_product)
}

/// Assembles `h` with `h(∞) = a`, `h(0) = b`, `h(1) = c`.
pub fn h_from_values(
    a: ExtendedComplex,
    b: ExtendedComplex,
    c: ExtendedComplex,
    det_product: Option<Complex64>,
) -> Result<ModifiedH> {
    let sep = 1e-10;
    if chordal_distance(a, b) < sep || chordal_distance(b, c) < sep || chordal_distance(a, c) < sep {
        return Err(Error::DegenerateTriple);
    }
    let h = MobiusMap::from_three_points(a, b, c).map_err(|_| Error::DegenerateTriple)?;
    let (h, scale) = match det_product {
        None => (h, None),
        Some(target) => {
            let s = principal_sqrt(target / h.det());
            (h.scaled(s)?, Some(s))
        }
    };
    Ok(ModifiedH { h, at_infinity: a, at_zero: b, at_one: c, scale })
}

fn principal_sqrt(z: Complex64) -> Complex64 {
    let s = z.sqrt();
    if s.re < 0.0 || (s.re == 0.0 && s.im < 0.0) {
        -s
    } else {
        s
    }
}

/// Treats values beyond double-precision resolution of `∞` as `∞`.
fn snap_infinity(z: ExtendedComplex) -> ExtendedComplex {
    match z {
        ExtendedComplex::Finite(w) if w.norm() > 1e15 => ExtendedComplex::Infinity,
        other => other,
    }
}

/// `h(λ^{n+1})`, the asymptotic surrogate of the `n`-th approximant.
pub fn asymptotic_predictor(spec: &EllipticCFSpec, h: &MobiusMap, n: usize) -> ExtendedComplex {
    let z = spec.lambda().pow(n as i64 + 1).to_complex();
    h.apply_finite(z)
}

/// Points of highest and lowest density of the approximants on the limit set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Concentration {
    /// Every point of the limit set is equally dense.
    Uniform,
    /// Finite limit sets: see the residue limits instead.
    NotApplicable,
    Points {
        highest: ExtendedComplex,
        lowest: ExtendedComplex,
    },
}

pub fn concentration_points(h: &MobiusMap, m: Order) -> Concentration {
    if m != Order::Infinite {
        return Concentration::NotApplicable;
    }
    let [a, b, c, d] = h.canonical().coefficients();
    let (nc, nd) = (c.norm(), d.norm());
    if nc < 1e-13 || nd < 1e-13 {
        return Concentration::Uniform;
    }
    let (u, v) = (a / c, b / d);
    if (nc - nd).abs() < LINE_TOL * (nc + nd) {
        return Concentration::Points {
            highest: ExtendedComplex::Finite((u + v) / 2.0),
            lowest: ExtendedComplex::Infinity,
        };
    }
    let highest = (u * nc + v * nd) / (nc + nd);
    let lowest = (-u * nc + v * nd) / (nd - nc);
    Concentration::Points { highest: ExtendedComplex::Finite(highest), lowest: ExtendedComplex::Finite(lowest) }
}

/// Limits of numerator and denominator convergents along residue classes
/// when `α` and `β` are both roots of unity.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidueLimits {
    /// Least `m` with `α^m = β^m = 1`.
    pub m: usize,
    /// Number of distinct limits, `m / gcd(b − a, m)`.
    pub rank: usize,
    /// `A_i = lim_k P_{mk+i}`, `i = 0..m`.
    pub numerators: Vec<Complex64>,
    /// `B_i = lim_k Q_{mk+i}`.
    pub denominators: Vec<Complex64>,
    /// `A_i / B_i`, `i = 0..m`.
    pub values: Vec<ExtendedComplex>,
    /// `A_j / B_j`, `j = 1..=rank`.
    pub distinct: Vec<ExtendedComplex>,
    /// `∏(1 − q_n/αβ)`.
    pub product: Complex64,
    /// Largest deviation of `A_i`, `B_i` from their two-term closed forms.
    pub closed_form_residual: f64,
    /// Largest deviation from the determinant identity for `A_iB_j − A_jB_i`.
    pub determinant_residual: f64,
    /// Largest chordal distance between `A_i/B_i` and `A_{i+rank}/B_{i+rank}`.
    pub periodicity_residual: f64,
}

/// `(m, rank)` from the exponents `α = e^{2πia/m}`, `β = e^{2πib/m}`.
pub fn exponent_rank(alpha: &UnitModulusNumber, beta: &UnitModulusNumber) -> Result<(usize, usize)> {
    use num_integer::Integer;
    match (*alpha, *beta) {
        (UnitModulusNumber::ExactRoot { num: na, den: da }, UnitModulusNumber::ExactRoot { num: nb, den: db }) => {
            if na * db == nb * da {
                return Err(Error::EqualAlphaBeta);
            }
            let m = da.lcm(&db);
            let (a, b) = (na * (m / da), nb * (m / db));
            let r = m / (b - a).abs().gcd(&m);
            Ok((m as usize, r as usize))
        }
        _ => Err(Error::NotExactRoots),
    }
}

pub fn residue_limits(spec: &EllipticCFSpec, tol: f64, max_n: usize) -> Result<ResidueLimits> {
    let (m, rank) = exponent_rank(&spec.alpha, &spec.beta)?;
    let pairs = cf::residue_convergents(&build_cf(spec), m, tol, max_n)?;
    let numerators: Vec<Complex64> = pairs.iter().map(|p| p.0).collect();
    let denominators: Vec<Complex64> = pairs.iter().map(|p| p.1).collect();
    let values = pairs.iter().map(|&(a, b)| ExtendedComplex::from_ratio(a, b)).collect::<Result<Vec<_>>>()?;
    let product = infinite_product(spec, tol, max_n)?;

    let (ac, bc) = (spec.alpha.to_complex(), spec.beta.to_complex());
    let at = |v: &[Complex64], i: i64| v[i.rem_euclid(m as i64) as usize];
    let pw = |u: &UnitModulusNumber, i: i64| u.pow(i).to_complex();

    let closed = |v: &[Complex64], i: i64| {
        let (v0, v1) = (v[0], at(v, 1));
        (v1 - bc * v0) / (ac - bc) * pw(&spec.alpha, i) + (ac * v0 - v1) / (ac - bc) * pw(&spec.beta, i)
    };
    let mut closed_form_residual = 0.0f64;
    for i in 0..m as i64 {
        for v in [&numerators, &denominators] {
            let e = (closed(v, i) - at(v, i)).norm() / at(v, i).norm().max(1.0);
            closed_form_residual = closed_form_residual.max(e);
        }
    }

    let ab = spec.alpha.mul(&spec.beta);
    let mut determinant_residual = 0.0f64;
    for i in 0..m as i64 {
        for j in 0..m as i64 {
            let lhs = at(&numerators, i) * at(&denominators, j) - at(&numerators, j) * at(&denominators, i);
            let rhs =
                -ab.pow(j + 1).to_complex() * (pw(&spec.alpha, i - j) - pw(&spec.beta, i - j)) / (ac - bc) * product;
            determinant_residual = determinant_residual.max((lhs - rhs).norm());
        }
    }

    let mut periodicity_residual = 0.0f64;
    for i in 0..m {
        periodicity_residual = periodicity_residual.max(chordal_distance(values[i], values[(i + rank) % m]));
    }
    let distinct = (1..=rank).map(|j| values[j % m]).collect();
    Ok(ResidueLimits {
        m,
        rank,
        numerators,
        denominators,
        values,
        distinct,
        product,
        closed_form_residual,
        determinant_residual,
        periodicity_residual,
    })
}

/// `∏_{n≥1}(1 − q_n/αβ)`, stopped by the tail bound when available and
/// otherwise once `STABILITY_WINDOW` consecutive factors are within `tol` of 1.
pub fn infinite_product(spec: &EllipticCFSpec, tol: f64, max_n: usize) -> Result<Complex64> {
    check_tol(tol)?;
    let ab = spec.alpha.mul(&spec.beta).to_complex();
    let mut prod = Complex64::new(1.0, 0.0);
    let mut run = 0usize;
    for n in 1..=max_n {
        let x = spec.q(n)? / ab;
        prod *= 1.0 - x;
        let done = match spec.tail_bound(n) {
            Some(t) => t.exp_m1() * prod.norm() < tol,
            None => {
                run = if x.norm() < tol { run + 1 } else { 0 };
                run >= STABILITY_WINDOW
            }
        };
        if done {
            return Ok(prod);
        }
    }
    Err(Error::NoConvergenceWithinBudget { budget: max_n, last_delta: f64::NAN })
}

/// Limits of the approximants `f_{mk+i}`, `i = 0..m`, where `m` is the order
/// of `λ`. Unlike [`residue_limits`] this only needs `λ` (not `α`, `β`) to be
/// a root of unity.
pub fn residue_values(spec: &EllipticCFSpec, tol: f64, max_n: usize) -> Result<Vec<ExtendedComplex>> {
    let m = spec.lambda_order().finite().ok_or(Error::InfiniteOrder)?;
    cf::residue_values(&build_cf(spec), m as usize, tol, max_n)
}

/// Number of clusters among `values` at chordal separation `tol`.
pub fn count_distinct(values: &[ExtendedComplex], tol: f64) -> usize {
    let mut reps: Vec<ExtendedComplex> = Vec::new();
    for &v in values {
        if reps.iter().all(|&r| chordal_distance(r, v) >= tol) {
            reps.push(v);
        }
    }
    reps.len()
}

/// Rewrites `K(a_n / b_n)` with `a_n → a`, `b_n → b` in the normalized form.
///
/// Returns `d` and a spec whose continued fraction, multiplied by `d`, has
/// the same approximants as the original: `d = |b + √(b² + 4a)|/2`,
/// `α, β = (b ± √(b² + 4a))/(2d)`, `p_n = (b_n − b)/d`, `q_n = (a_n − a)/d²`.
/// `α` and `β` are recognized as exact roots of unity when their angles are
/// rational multiples of `2π` to within rounding.
pub fn normalize_elliptic<A, B>(a_n: A, b_n: B, a: Complex64, b: Complex64) -> Result<(f64, EllipticCFSpec)>
where
    A: Fn(usize) -> Complex64 + Send + Sync + 'static,
    B: Fn(usize) -> Complex64 + Send + Sync + 'static,
{
    let root = (b * b + 4.0 * a).sqrt();
    let (r1, r2) = ((b + root).norm(), (b - root).norm());
    if r1 == 0.0 || !r1.is_finite() || (r1 - r2).abs() > 1e-12 * r1.max(r2) {
        return Err(Error::NotElliptic(r1, r2));
    }
    let d = r1 / 2.0;
    let alpha = UnitModulusNumber::from_complex((b + root) / (2.0 * d))?;
    let beta = UnitModulusNumber::from_complex((b - root) / (2.0 * d))?;
    let spec = EllipticCFSpec::new(alpha, beta, move |n| (b_n(n) - b) / d, move |n| (a_n(n) - a) / (d * d))?;
    Ok((d, spec))
}

/// A polynomial `Σ c_k x^k` with complex coefficients, `c_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    /// `coeffs[k]` is the coefficient of `x^k`; the constant term must vanish.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.first().is_some_and(|c| *c != Complex64::new(0.0, 0.0)) {
            return Err(Error::InvalidArgument("polynomial must have zero constant term".into()));
        }
        Ok(Polynomial { coeffs })
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    /// The monomial `c·x^k`, `k ≥ 1`.
    pub fn monomial(c: Complex64, k: usize) -> Result<Self> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c)
    }

    /// Upper bound on `Σ_{n>N} |P(q^n)|` for `|q| = r < 1`.
    pub fn tail_bound(&self, r: f64, n: usize) -> f64 {
        self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c.norm() * geometric_tail(r.powi(k as i32), n)).sum()
    }
}

/// Residue limits of the q-continued fraction `K (a + g(q^n)) / (b + f(q^n))`
/// after normalization; the rank is the number of distinct limits.
pub fn q_cf_rank(
    a: Complex64,
    b: Complex64,
    f: &Polynomial,
    g: &Polynomial,
    q: Complex64,
    tol: f64,
    max_n: usize,
) -> Result<ResidueLimits> {
    let r = q.norm();
    if r >= 1.0 {
        return Err(Error::InvalidArgument("q-continued fractions need |q| < 1".into()));
    }
    let (fa, ga) = (f.clone(), g.clone());
    let (d, spec) =
        normalize_elliptic(move |n| a + ga.eval(q.powu(n as u32)), move |n| b + fa.eval(q.powu(n as u32)), a, b)?;
    let (ft, gt) = (f.clone(), g.clone());
    let spec = spec.with_tail_bound(move |n| ft.tail_bound(r, n) / d + gt.tail_bound(r, n) / (d * d));
    residue_limits(&spec, tol, max_n)
}

/// Summary of the limit set of an elliptic continued fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitSetReport {
    /// `h` in canonical normalization.
    pub h: MobiusMap,
    /// Order of `λ`.
    pub m: Order,
    /// Number of distinct limits.
    pub rank: Order,
    pub geometry: CircleOrLine,
    pub concentration: Concentration,
    pub det_product: Complex64,
    pub residue_limits: Option<ResidueLimits>,
    /// The limit points `f_{mk+i}` for finite `m`, in residue order.
    pub limit_points: Vec<ExtendedComplex>,
}

pub fn analyze(spec: &EllipticCFSpec, tol: f64, max_n: usize) -> Result<LimitSetReport> {
    let direct = compute_h_direct(spec, tol, max_n)?;
    let m = spec.lambda_order();
    let (residue, limit_points) = match m {
        Order::Infinite => (None, Vec::new()),
        Order::Finite(_) if spec.alpha.is_exact() && spec.beta.is_exact() => {
            let r = residue_limits(spec, tol, max_n)?;
            let points = r.values.clone();
            (Some(r), points)
        }
        Order::Finite(_) => (None, residue_values(spec, tol, max_n)?),
    };
    Ok(LimitSetReport {
        h: direct.h.canonical(),
        m,
        rank: m,
        geometry: direct.h.image_of_unit_circle(),
        concentration: concentration_points(&direct.h, m),
        det_product: direct.det_product,
        residue_limits: residue,
        limit_points,
    })
}
