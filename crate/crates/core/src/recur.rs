//! Linear recurrences `x_{n+p} = Σ_{r<p} a_{n,r} x_{n+r}` whose coefficients
//! converge summably to limits `a_r` with distinct unit-modulus
//! characteristic roots. Then `x_n ~ Σ c_i α_i^n`.
//!
//! States are row vectors `s_n = (x_n, …, x_{n+p−1})` advanced by
//! `s_{n+1} = s_n C_n` with the companion matrix `C_n`, so that
//! `s_n = s_0 C_0 C_1 ⋯ C_{n−1}` is a left-oriented product.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::cf::STABILITY_WINDOW;
use crate::error::{Error, Result};
use crate::limitset::TailBound;
use crate::matprod::{cocycle_limit, Matrix, MatrixSequencePair};
use crate::unit::UnitModulusNumber;

/// `n ↦ (a_{n,0}, …, a_{n,p−1})`, `n ≥ 0`.
pub type CoefficientSeq = Arc<dyn Fn(usize) -> Vec<Complex64> + Send + Sync>;

/// Tolerance on `||α| − 1|` for characteristic roots.
pub const UNIT_MODULUS_TOL: f64 = 1e-8;

/// Roots of `t^p − a_{p−1}t^{p−1} − ⋯ − a_0` (eigenvalues of the companion
/// matrix, refined by Newton steps on the polynomial).
pub fn characteristic_roots(a: &[Complex64]) -> Result<Vec<Complex64>> {
    let p = a.len();
    if p == 0 {
        return Err(Error::InvalidArgument("recurrence order must be positive".into()));
    }
    if p == 1 {
        return Ok(vec![a[0]]);
    }
    let c = companion(a);
    let schur = nalgebra::Schur::try_new(c, 1e-15, 10_000)
        .ok_or_else(|| Error::InvalidArgument("eigenvalue iteration did not converge".into()))?;
    let eig =
        schur.eigenvalues().ok_or_else(|| Error::InvalidArgument("eigenvalue iteration did not converge".into()))?;
    Ok(eig.iter().map(|&z| newton_polish(a, z)).collect())
}

fn char_poly(a: &[Complex64], t: Complex64) -> (Complex64, Complex64) {
    // Horner on t^p − Σ a_r t^r, with derivative.
    let p = a.len();
    let mut v = Complex64::new(1.0, 0.0);
    let mut dv = Complex64::new(0.0, 0.0);
    for r in (0..p).rev() {
        dv = dv * t + v;
        v = v * t - a[r];
    }
    (v, dv)
}

fn newton_polish(a: &[Complex64], mut z: Complex64) -> Complex64 {
    for _ in 0..3 {
        let (v, dv) = char_poly(a, z);
        if dv.norm() == 0.0 {
            break;
        }
        let step = v / dv;
        let next = z - step;
        if char_poly(a, next).0.norm() >= v.norm() {
            break;
        }
        z = next;
    }
    z
}

/// Row-vector companion matrix: `(x_n, …, x_{n+p−1})·C = (x_{n+1}, …, x_{n+p})`.
pub fn companion(a: &[Complex64]) -> Matrix {
    let p = a.len();
    let mut c = DMatrix::zeros(p, p);
    for j in 0..p.saturating_sub(1) {
        c[(j + 1, j)] = Complex64::new(1.0, 0.0);
    }
    for (r, &ar) in a.iter().enumerate() {
        c[(r, p - 1)] = ar;
    }
    c
}

/// A recurrence with summably convergent coefficients and distinct
/// unit-modulus characteristic roots.
#[derive(Clone)]
pub struct PoincareRecurrence {
    coeffs: CoefficientSeq,
    limits: Vec<Complex64>,
    roots: Vec<UnitModulusNumber>,
    tail_bound: Option<TailBound>,
}

impl fmt::Debug for PoincareRecurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PoincareRecurrence")
            .field("limits", &self.limits)
            .field("roots", &self.roots)
            .finish_non_exhaustive()
    }
}

impl PoincareRecurrence {
    /// Solves for the characteristic roots of `limits` and validates them.
    pub fn new<C>(coeffs: C, limits: Vec<Complex64>) -> Result<Self>
    where
        C: Fn(usize) -> Vec<Complex64> + Send + Sync + 'static,
    {
        let roots = characteristic_roots(&limits)?;
        let roots = validate_roots(&roots)?;
        Self::build(coeffs, limits, roots)
    }

    /// Uses supplied roots, which must satisfy the characteristic equation to 1e−10.
    pub fn with_roots<C>(coeffs: C, limits: Vec<Complex64>, roots: Vec<UnitModulusNumber>) -> Result<Self>
    where
        C: Fn(usize) -> Vec<Complex64> + Send + Sync + 'static,
    {
        if roots.len() != limits.len() {
            return Err(Error::Dimension(format!("{} roots for order {}", roots.len(), limits.len())));
        }
        for r in &roots {
            let res = char_poly(&limits, r.to_complex()).0.norm();
            if res > 1e-10 {
                return Err(Error::InvalidArgument(format!("{r} is not a characteristic root (residual {res:e})")));
            }
        }
        let complex: Vec<Complex64> = roots.iter().map(|r| r.to_complex()).collect();
        validate_roots(&complex)?;
        Self::build(coeffs, limits, roots)
    }

    /// Constant coefficients `a_{n,r} = a_r`.
    pub fn constant(limits: Vec<Complex64>) -> Result<Self> {
        let l = limits.clone();
        Ok(Self::new(move |_| l.clone(), limits)?.with_tail_bound(|_| 0.0))
    }

    fn build<C>(coeffs: C, limits: Vec<Complex64>, roots: Vec<UnitModulusNumber>) -> Result<Self>
    where
        C: Fn(usize) -> Vec<Complex64> + Send + Sync + 'static,
    {
        if limits[0] == Complex64::new(0.0, 0.0) {
            return Err(Error::InvalidArgument("a_0 = 0 makes the limiting companion matrix singular".into()));
        }
        Ok(PoincareRecurrence { coeffs: Arc::new(coeffs), limits, roots, tail_bound: None })
    }

    pub fn with_tail_bound<T>(mut self, tail: T) -> Self
    where
        T: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        self.tail_bound = Some(Arc::new(tail));
        self
    }

    pub fn order(&self) -> usize {
        self.limits.len()
    }

    pub fn roots(&self) -> &[UnitModulusNumber] {
        &self.roots
    }

    pub fn limits(&self) -> &[Complex64] {
        &self.limits
    }

    pub fn coefficients(&self, n: usize) -> Result<Vec<Complex64>> {
        let c = (self.coeffs)(n);
        if c.len() != self.order() {
            return Err(Error::Dimension(format!("coefficient row {n} has length {}", c.len())));
        }
        Ok(c)
    }

    /// `x_0, …, x_{count−1}` from the initial values.
    pub fn iterate(&self, x0: &[Complex64], count: usize) -> Result<Vec<Complex64>> {
        let p = self.order();
        if x0.len() != p {
            return Err(Error::Dimension(format!("{} initial values for order {p}", x0.len())));
        }
        let mut xs: Vec<Complex64> = x0.to_vec();
        let mut n = 0;
        while xs.len() < count {
            let a = self.coefficients(n)?;
            let next = (0..p).map(|r| a[r] * xs[n + r]).sum();
            xs.push(next);
            n += 1;
        }
        xs.truncate(count);
        Ok(xs)
    }

    /// The pair `(D_i, M)` with `D_i = C_{i−1}` and `M` the limiting companion.
    fn matrix_pair(&self) -> Result<MatrixSequencePair> {
        let me = self.clone();
        let pair =
            MatrixSequencePair::with_constant_m(move |i| companion(&(me.coeffs)(i - 1)), companion(&self.limits))?;
        Ok(match &self.tail_bound {
            Some(t) => {
                let t = t.clone();
                pair.with_tail_bound(move |n| t(n.saturating_sub(1)))
            }
            None => pair,
        })
    }
}

/// Converts roots to unit-modulus numbers, requiring modulus 1 and distinctness.
pub fn validate_roots(roots: &[Complex64]) -> Result<Vec<UnitModulusNumber>> {
    for r in roots {
        let dev = (r.norm() - 1.0).abs();
        if dev > UNIT_MODULUS_TOL {
            return Err(Error::RootsNotUnitModulus(dev));
        }
    }
    for i in 0..roots.len() {
        for j in i + 1..roots.len() {
            if (roots[i] - roots[j]).norm() < UNIT_MODULUS_TOL {
                return Err(Error::RootsNotDistinct);
            }
        }
    }
    roots.iter().map(|&r| UnitModulusNumber::from_complex(r)).collect()
}

/// Coefficients `c_i` with `x_n − Σ c_i α_i^n → 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticFit {
    pub c: Vec<Complex64>,
    /// The cocycle limit `F` of the companion products.
    pub f: Matrix,
    pub terms: usize,
    /// `sup_{n∈[N,2N]} |x_n − Σc_iα_i^n|` with `N = terms`.
    pub residual: f64,
}

/// `c = s_0 F V^{−1}` where `V` has rows `(1, α_i, …, α_i^{p−1})`, so that
/// `s_n ≈ s_0 F C^n = Σ c_i α_i^n (1, α_i, …)`.
pub fn asymptotic_coefficients(
    rec: &PoincareRecurrence,
    x0: &[Complex64],
    tol: f64,
    max_n: usize,
) -> Result<AsymptoticFit> {
    let p = rec.order();
    if x0.len() != p {
        return Err(Error::Dimension(format!("{} initial values for order {p}", x0.len())));
    }
    let limit = cocycle_limit(&rec.matrix_pair()?, tol, max_n)?;
    let v = vandermonde(&rec.roots);
    let s0 = DMatrix::from_row_slice(1, p, x0);
    let sf = s0 * &limit.f;
    // c V = s_0 F  ⇔  V^T c^T = (s_0 F)^T.
    let c = v
        .transpose()
        .lu()
        .solve(&sf.transpose())
        .ok_or_else(|| Error::InvalidArgument("Vandermonde matrix is singular".into()))?;
    let c: Vec<Complex64> = c.iter().copied().collect();
    let n = limit.terms.max(1);
    let residual = fit_residual(rec, x0, &c, n, 2 * n)?;
    Ok(AsymptoticFit { c, f: limit.f, terms: limit.terms, residual })
}

fn vandermonde(roots: &[UnitModulusNumber]) -> Matrix {
    let p = roots.len();
    DMatrix::from_fn(p, p, |i, j| roots[i].pow(j as i64).to_complex())
}

/// `Σ c_i α_i^n`.
pub fn asymptotic_value(roots: &[UnitModulusNumber], c: &[Complex64], n: usize) -> Complex64 {
    roots.iter().zip(c).map(|(r, c)| c * r.pow(n as i64).to_complex()).sum()
}

/// `sup_{from ≤ n ≤ to} |x_n − Σ c_i α_i^n|`.
pub fn fit_residual(
    rec: &PoincareRecurrence,
    x0: &[Complex64],
    c: &[Complex64],
    from: usize,
    to: usize,
) -> Result<f64> {
    let xs = rec.iterate(x0, to + 1)?;
    Ok((from..=to).map(|n| (xs[n] - asymptotic_value(&rec.roots, c, n)).norm()).fold(0.0, f64::max))
}

/// Residue limits of a recurrence whose roots are all roots of unity.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceResidues {
    /// Least common order of the roots.
    pub m: usize,
    /// `l_j = lim_k x_{km+j}`, `j = 0..m`.
    pub limits: Vec<Complex64>,
    pub c: Vec<Complex64>,
    /// Largest `|l_{n+p} − Σ a_r l_{n+r}|` over one period.
    pub recurrence_residual: f64,
    /// Largest `|l_n − Σ c_i α_i^n|` over one period.
    pub closed_form_residual: f64,
}

pub fn residue_limits_recurrence(
    rec: &PoincareRecurrence,
    x0: &[Complex64],
    tol: f64,
    max_n: usize,
) -> Result<RecurrenceResidues> {
    use num_integer::Integer;
    let mut m = 1usize;
    for r in &rec.roots {
        match r {
            UnitModulusNumber::ExactRoot { den, .. } => m = m.lcm(&(*den as usize)),
            _ => return Err(Error::NotExactRoots),
        }
    }
    let p = rec.order();
    // Iterate period by period until every residue class is stable.
    let mut state: Vec<Complex64> = x0.to_vec();
    let mut n = 0usize;
    let mut prev: Option<Vec<Complex64>> = None;
    let mut run = 0usize;
    let mut last_delta = f64::INFINITY;
    let mut limits = None;
    while n < max_n {
        let mut period = Vec::with_capacity(m);
        for _ in 0..m {
            period.push(state[0]);
            let a = rec.coefficients(n)?;
            let next = (0..p).map(|r| a[r] * state[r]).sum();
            state.rotate_left(1);
            state[p - 1] = next;
            n += 1;
        }
        if let Some(pv) = &prev {
            last_delta = period.iter().zip(pv).map(|(x, y)| (x - y).norm() / x.norm().max(1.0)).fold(0.0, f64::max);
            run = if last_delta <= tol { run + 1 } else { 0 };
            if run >= STABILITY_WINDOW {
                limits = Some(period);
                break;
            }
        }
        prev = Some(period);
    }
    let limits = limits.ok_or(Error::NoConvergenceWithinBudget { budget: max_n, last_delta })?;
    let fit = asymptotic_coefficients(rec, x0, tol, max_n)?;
    let l = |i: usize| limits[i % m];
    let recurrence_residual = (0..m)
        .map(|i| (l(i + p) - (0..p).map(|r| rec.limits[r] * l(i + r)).sum::<Complex64>()).norm())
        .fold(0.0, f64::max);
    let closed_form_residual =
        (0..m).map(|i| (l(i) - asymptotic_value(&rec.roots, &fit.c, i)).norm()).fold(0.0, f64::max);
    Ok(RecurrenceResidues { m, limits, c: fit.c, recurrence_residual, closed_form_residual })
}

/// `sup_{N/2 ≤ n ≤ N} |x_n|^{1/n}` for the recurrence with coefficient rows
/// `coeffs(n)`; magnitudes are tracked through a separate logarithmic scale,
/// so the estimate survives exponential growth or decay.
pub fn perron_limsup_diagnostic<C>(coeffs: C, x0: &[Complex64], big_n: usize) -> Result<f64>
where
    C: Fn(usize) -> Vec<Complex64>,
{
    let p = x0.len();
    if p == 0 {
        return Err(Error::Dimension("no initial values".into()));
    }
    let mut state = DVector::from_column_slice(x0);
    let mut log_scale = 0.0f64;
    let mut best = f64::NEG_INFINITY;
    for n in 0..=big_n {
        if n >= big_n.div_ceil(2) && n > 0 && state[0].norm() > 0.0 {
            best = best.max((state[0].norm().ln() + log_scale) / n as f64);
        }
        let a = coeffs(n);
        if a.len() != p {
            return Err(Error::Dimension(format!("coefficient row {n} has length {}", a.len())));
        }
        let next: Complex64 = (0..p).map(|r| a[r] * state[r]).sum();
        for r in 0..p - 1 {
            state[r] = state[r + 1];
        }
        state[p - 1] = next;
        let mag = state.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if !mag.is_finite() {
            return Err(Error::NonFinite);
        }
        if mag > 1e100 || (mag > 0.0 && mag < 1e-100) {
            state /= Complex64::new(mag, 0.0);
            log_scale += mag.ln();
        }
    }
    Ok(if best == f64::NEG_INFINITY { 0.0 } else { best.exp() })
}

impl PoincareRecurrence {
    pub fn perron_diagnostic(&self, x0: &[Complex64], big_n: usize) -> Result<f64> {
        let c = self.coeffs.clone();
        perron_limsup_diagnostic(move |n| c(n), x0, big_n)
    }
}
