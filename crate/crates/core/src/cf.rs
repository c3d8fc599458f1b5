//! Continued fractions `b0 + K(a_n / b_n)` evaluated through their
//! numerator and denominator convergents.
//!
//! Convergents are kept as projective pairs and rescaled by powers of two
//! whenever they leave `[1/threshold, threshold]`; the accumulated exponent is
//! stored so that true values can be recovered exactly.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sphere::{chordal_distance, ExtendedComplex};

/// Rescaling threshold for convergent pairs.
pub const RENORM_THRESHOLD: f64 = 1e150;

/// Consecutive small steps required before a sequence counts as converged.
pub const STABILITY_WINDOW: usize = 16;

pub type TermFn = Arc<dyn Fn(usize) -> Result<(Complex64, Complex64)> + Send + Sync>;

/// `b0 + a_1/(b_1 + a_2/(b_2 + ...))` with terms generated on demand.
#[derive(Clone)]
pub struct ContinuedFraction {
    b0: Complex64,
    terms: TermFn,
    terminates_on_zero: bool,
}

impl std::fmt::Debug for ContinuedFraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ContinuedFraction")
            .field("b0", &self.b0)
            .field("terminates_on_zero", &self.terminates_on_zero)
            .finish_non_exhaustive()
    }
}

impl ContinuedFraction {
    /// `K(a_n / b_n)` from an infallible generator `n ↦ (a_n, b_n)`, `n ≥ 1`.
    pub fn new<F>(terms: F) -> Self
    where
        F: Fn(usize) -> (Complex64, Complex64) + Send + Sync + 'static,
    {
        Self::try_new(move |n| Ok(terms(n)))
    }

    /// Generator that may reject a term (validated lazily on access).
    pub fn try_new<F>(terms: F) -> Self
    where
        F: Fn(usize) -> Result<(Complex64, Complex64)> + Send + Sync + 'static,
    {
        ContinuedFraction { b0: Complex64::new(0.0, 0.0), terms: Arc::new(terms), terminates_on_zero: false }
    }

    pub fn with_b0(mut self, b0: Complex64) -> Self {
        self.b0 = b0;
        self
    }

    /// Treat a zero partial numerator as the end of a finite continued
    /// fraction instead of an error.
    pub fn terminating(mut self) -> Self {
        self.terminates_on_zero = true;
        self
    }

    pub fn b0(&self) -> Complex64 {
        self.b0
    }

    pub fn term(&self, n: usize) -> Result<(Complex64, Complex64)> {
        (self.terms)(n)
    }

    pub fn convergents(&self) -> ConvergentStream {
        ConvergentStream::new(self.clone())
    }

    /// `n`-th approximant `f_n`.
    pub fn approximant(&self, n: usize) -> Result<ExtendedComplex> {
        let mut s = self.convergents();
        s.advance_to(n)?;
        s.value()
    }

    /// Approximants `f_1, ..., f_count`.
    pub fn approximants(&self, count: usize) -> Result<Vec<ExtendedComplex>> {
        let mut s = self.convergents();
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            s.advance()?;
            out.push(s.value()?);
        }
        Ok(out)
    }
}

/// Convergent pairs `(P_n, Q_n)` and `(P_{n-1}, Q_{n-1})` of a continued fraction.
///
/// True convergents equal the stored pairs times `2^exponent`.
#[derive(Clone, Debug)]
pub struct ConvergentStream {
    cf: ContinuedFraction,
    n: usize,
    prev: (Complex64, Complex64),
    cur: (Complex64, Complex64),
    exponent: i64,
    threshold: f64,
    terminated: bool,
}

impl ConvergentStream {
    pub fn new(cf: ContinuedFraction) -> Self {
        Self::with_threshold(cf, RENORM_THRESHOLD)
    }

    pub fn with_threshold(cf: ContinuedFraction, threshold: f64) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let b0 = cf.b0;
        ConvergentStream {
            cf,
            n: 0,
            prev: (one, zero),
            cur: (b0, one),
            exponent: 0,
            threshold: threshold.max(4.0),
            terminated: false,
        }
    }

    pub fn index(&self) -> usize {
        self.n
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    /// Stored (rescaled) `(P_n, Q_n)`.
    pub fn current(&self) -> (Complex64, Complex64) {
        self.cur
    }

    /// Stored (rescaled) `(P_{n-1}, Q_{n-1})`.
    pub fn previous(&self) -> (Complex64, Complex64) {
        self.prev
    }

    /// `2^exponent`, the factor separating stored from true convergents.
    pub fn scale(&self) -> f64 {
        pow2(self.exponent)
    }

    /// True `(P_n, Q_n)`; may overflow when convergents grow without bound.
    pub fn true_current(&self) -> (Complex64, Complex64) {
        let s = self.scale();
        (self.cur.0 * s, self.cur.1 * s)
    }

    pub fn true_previous(&self) -> (Complex64, Complex64) {
        let s = self.scale();
        (self.prev.0 * s, self.prev.1 * s)
    }

    pub fn is_terminated(&self) -> bool {
        self.terminated
    }

    /// Stored determinant `P_n Q_{n-1} − P_{n-1} Q_n`; the true one is this
    /// times `4^exponent`.
    pub fn determinant(&self) -> Complex64 {
        self.cur.0 * self.prev.1 - self.prev.0 * self.cur.1
    }

    pub fn advance(&mut self) -> Result<()> {
        let n = self.n + 1;
        if self.terminated {
            self.n = n;
            return Ok(());
        }
        let (a, b) = self.cf.term(n)?;
        if a == Complex64::new(0.0, 0.0) {
            if self.cf.terminates_on_zero {
                self.terminated = true;
                self.n = n;
                return Ok(());
            }
            return Err(Error::ZeroPartialNumerator(n));
        }
        let p = b * self.cur.0 + a * self.prev.0;
        let q = b * self.cur.1 + a * self.prev.1;
        self.prev = self.cur;
        self.cur = (p, q);
        self.n = n;
        self.renormalize()
    }

    pub fn advance_to(&mut self, n: usize) -> Result<()> {
        while self.n < n {
            self.advance()?;
        }
        Ok(())
    }

    fn renormalize(&mut self) -> Result<()> {
        let m = [self.cur.0, self.cur.1, self.prev.0, self.prev.1]
            .iter()
            .map(|z| z.re.abs().max(z.im.abs()))
            .fold(0.0, f64::max);
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        if m > self.threshold || (m > 0.0 && m < 1.0 / self.threshold) {
            let e = m.log2().round() as i64;
            let s = pow2(-e);
            self.cur = (self.cur.0 * s, self.cur.1 * s);
            self.prev = (self.prev.0 * s, self.prev.1 * s);
            self.exponent += e;
        }
        Ok(())
    }

    /// `P_n / Q_n`.
    pub fn value(&self) -> Result<ExtendedComplex> {
        ExtendedComplex::from_ratio(self.cur.0, self.cur.1)
    }

    /// `(P_n + w P_{n-1}) / (Q_n + w Q_{n-1})`: the approximant with `b_n`
    /// replaced by `b_n + w`. `w = ∞` gives `P_{n-1}/Q_{n-1}`.
    pub fn modified_value(&self, w: ExtendedComplex) -> Result<ExtendedComplex> {
        match w {
            ExtendedComplex::Infinity => ExtendedComplex::from_ratio(self.prev.0, self.prev.1),
            ExtendedComplex::Finite(w) => {
                ExtendedComplex::from_ratio(self.cur.0 + w * self.prev.0, self.cur.1 + w * self.prev.1)
            }
        }
    }
}

pub(crate) fn pow2(e: i64) -> f64 {
    let e = e.clamp(-1074, 1023) as i32;
    if e >= -1022 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else {
        f64::from_bits(1u64 << (e + 1074))
    }
}

/// Outcome of a convergence test.
#[derive(Debug, Clone, PartialEq)]
pub enum Evaluation {
    Converged {
        value: ExtendedComplex,
        terms: usize,
    },
    /// The final window of values seen before the budget ran out.
    NotConverged {
        last: Vec<ExtendedComplex>,
    },
}

impl Evaluation {
    pub fn value(&self) -> Option<ExtendedComplex> {
        match self {
            Evaluation::Converged { value, .. } => Some(*value),
            Evaluation::NotConverged { .. } => None,
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, Evaluation::Converged { .. })
    }

    /// The converged value, or `NoConvergenceWithinBudget`.
    pub fn into_value(self, budget: usize) -> Result<ExtendedComplex> {
        match self {
            Evaluation::Converged { value, .. } => Ok(value),
            Evaluation::NotConverged { last } => {
                let last_delta = last.windows(2).last().map(|w| chordal_distance(w[0], w[1])).unwrap_or(f64::NAN);
                Err(Error::NoConvergenceWithinBudget { budget, last_delta })
            }
        }
    }
}

/// Tracks a stream of points on the sphere until `STABILITY_WINDOW`
/// consecutive chordal steps fall below `tol`.
#[derive(Debug, Clone)]
pub(crate) struct ChordalWindow {
    tol: f64,
    run: usize,
    last: Option<ExtendedComplex>,
    history: std::collections::VecDeque<ExtendedComplex>,
}

impl ChordalWindow {
    pub(crate) fn new(tol: f64) -> Self {
        ChordalWindow { tol, run: 0, last: None, history: Default::default() }
    }

    /// Feeds a value; returns true once the window is satisfied.
    pub(crate) fn push(&mut self, v: ExtendedComplex) -> bool {
        if let Some(prev) = self.last {
            if chordal_distance(prev, v) < self.tol {
                self.run += 1;
            } else {
                self.run = 0;
            }
        }
        self.last = Some(v);
        self.history.push_back(v);
        if self.history.len() > STABILITY_WINDOW {
            self.history.pop_front();
        }
        self.run >= STABILITY_WINDOW
    }

    pub(crate) fn history(&self) -> Vec<ExtendedComplex> {
        self.history.iter().copied().collect()
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")))
    }
}

/// Evaluates `cf` until successive approximants agree to `tol` (chordal) over
/// a stability window. The criterion is heuristic.
pub fn evaluate(cf: &ContinuedFraction, tol: f64, max_n: usize) -> Result<Evaluation> {
    modified_value(cf, |_| ExtendedComplex::ZERO, tol, max_n)
}

/// Modified limit of `cf` with respect to `w`: the `n`-th value uses
/// `b_n + w(n)` in the last partial denominator.
pub fn modified_value<W>(cf: &ContinuedFraction, w: W, tol: f64, max_n: usize) -> Result<Evaluation>
where
    W: Fn(usize) -> ExtendedComplex,
{
    check_tol(tol)?;
    let mut s = cf.convergents();
    let mut window = ChordalWindow::new(tol);
    while s.index() < max_n {
        s.advance()?;
        let v = s.modified_value(w(s.index()))?;
        if window.push(v) {
            return Ok(Evaluation::Converged { value: v, terms: s.index() });
        }
    }
    Ok(Evaluation::NotConverged { last: window.history() })
}

/// Limits of the approximants along each residue class `n ≡ i (mod m)`,
/// `i = 0..m`.
pub fn residue_values(cf: &ContinuedFraction, m: usize, tol: f64, max_n: usize) -> Result<Vec<ExtendedComplex>> {
    check_tol(tol)?;
    if m == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    let mut s = cf.convergents();
    let mut windows: Vec<ChordalWindow> = (0..m).map(|_| ChordalWindow::new(tol)).collect();
    let mut done = vec![false; m];
    let mut values = vec![ExtendedComplex::ZERO; m];
    while s.index() < max_n {
        s.advance()?;
        let i = s.index() % m;
        let v = s.value()?;
        values[i] = v;
        done[i] = windows[i].push(v);
        if done.iter().all(|&d| d) {
            return Ok(values);
        }
    }
    let last_delta = windows
        .iter()
        .filter_map(|w| {
            let h = w.history();
            h.windows(2).last().map(|p| chordal_distance(p[0], p[1]))
        })
        .fold(0.0, f64::max);
    Err(Error::NoConvergenceWithinBudget { budget: max_n, last_delta })
}

/// Limits `(A_i, B_i) = lim_k (P_{mk+i}, Q_{mk+i})` of the true convergents,
/// `i = 0..m`.
///
/// Converged when every one of the `2m` sequences moves by at most
/// `tol · max(1, |value|)` per period over a stability window of periods.
pub fn residue_convergents(
    cf: &ContinuedFraction,
    m: usize,
    tol: f64,
    max_n: usize,
) -> Result<Vec<(Complex64, Complex64)>> {
    check_tol(tol)?;
    if m == 0 {
        return Err(Error::InvalidArgument("modulus must be positive".into()));
    }
    let mut s = cf.convergents();
    let mut current = vec![(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)); m];
    let mut previous: Option<Vec<(Complex64, Complex64)>> = None;
    let mut run = 0usize;
    let mut last_delta = f64::INFINITY;
    while s.index() < max_n {
        s.advance()?;
        let i = s.index() % m;
        let (p, q) = s.true_current();
        if !(p.re.is_finite() && p.im.is_finite() && q.re.is_finite() && q.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        current[i] = (p, q);
        if i == m - 1 {
            if let Some(prev) = &previous {
                let delta = current
                    .iter()
                    .zip(prev.iter())
                    .map(|(c, p)| {
                        let dp = (c.0 - p.0).norm() / c.0.norm().max(1.0);
                        let dq = (c.1 - p.1).norm() / c.1.norm().max(1.0);
                        dp.max(dq)
                    })
                    .fold(0.0, f64::max);
                last_delta = delta;
                run = if delta <= tol { run + 1 } else { 0 };
                if run >= STABILITY_WINDOW {
                    return Ok(current);
                }
            }
            previous = Some(current.clone());
        }
    }
    Err(Error::NoConvergenceWithinBudget { budget: max_n, last_delta })
}

/// Equivalence transformation with scale factors `c_n` (`c_0 = 1`):
/// `a_n ↦ c_n c_{n-1} a_n`, `b_n ↦ c_n b_n`. Every approximant is unchanged.
pub fn equivalence_transform<S>(cf: &ContinuedFraction, scale: S) -> ContinuedFraction
where
    S: Fn(usize) -> Complex64 + Send + Sync + 'static,
{
    let inner = cf.clone();
    let scale = Arc::new(scale);
    let out = ContinuedFraction::try_new(move |n| {
        let cn = scale(n);
        if cn == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroScale(n));
        }
        let cp = if n <= 1 { Complex64::new(1.0, 0.0) } else { scale(n - 1) };
        if cp == Complex64::new(0.0, 0.0) {
            return Err(Error::ZeroScale(n - 1));
        }
        let (a, b) = inner.term(n)?;
        Ok((cn * cp * a, cn * b))
    })
    .with_b0(cf.b0);
    if cf.terminates_on_zero {
        out.terminating()
    } else {
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    fn golden() -> ContinuedFraction {
        ContinuedFraction::new(|_| (c64(1.0, 0.0), c64(1.0, 0.0))).with_b0(c64(1.0, 0.0))
    }

    fn four_thirds() -> ContinuedFraction {
        ContinuedFraction::new(|_| (c64(-1.0, 0.0), c64(4.0 / 3.0, 0.0))).with_b0(c64(4.0 / 3.0, 0.0))
    }

    #[test]
    fn fibonacci_convergents() {
        let vals = golden().approximants(4).unwrap();
        let expected = [2.0, 1.5, 5.0 / 3.0, 1.6];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v.as_finite().unwrap().re - e).abs() < 1e-15);
        }
        let mut s = golden().convergents();
        assert_eq!(s.value().unwrap(), ExtendedComplex::ONE);
        s.advance().unwrap();
        assert_eq!(s.current(), (c64(2.0, 0.0), c64(1.0, 0.0)));
    }

    #[test]
    fn four_thirds_matches_iteration() {
        let vals = four_thirds().approximants(200).unwrap();
        let mut x = ExtendedComplex::from(4.0 / 3.0);
        for v in vals {
            // x_{n+1} = 4/3 − 1/x_n on the sphere.
            x = match x {
                ExtendedComplex::Infinity => ExtendedComplex::from(4.0 / 3.0),
                ExtendedComplex::Finite(z) if z == c64(0.0, 0.0) => ExtendedComplex::Infinity,
                ExtendedComplex::Finite(z) => ExtendedComplex::Finite(c64(4.0 / 3.0, 0.0) - z.inv()),
            };
            assert!(chordal_distance(x, v) < 1e-8, "{x} vs {v}");
        }
    }

    #[test]
    fn evaluate_golden_ratio() {
        let e = evaluate(&golden(), 1e-12, 1000).unwrap();
        let v = e.value().unwrap().as_finite().unwrap();
        assert!((v.re - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-10);
    }

    #[test]
    fn evaluate_four_thirds_diverges() {
        let e = evaluate(&four_thirds(), 1e-8, 5000).unwrap();
        assert!(!e.is_converged());
    }

    #[test]
    fn stern_stolz_parities() {
        let cf = ContinuedFraction::new(|n| (c64(1.0, 0.0), c64(2f64.powi(-(n as i32)), 0.0)));
        assert!(!evaluate(&cf, 1e-10, 2000).unwrap().is_converged());
        let v = residue_values(&cf, 2, 1e-12, 2000).unwrap();
        assert!(chordal_distance(v[0], v[1]) > 1e-3);
    }

    #[test]
    fn value_conventions() {
        let mut s = ContinuedFraction::new(|_| (c64(1.0, 0.0), c64(1.0, 0.0))).convergents();
        s.cur = (c64(3.0, 0.0), c64(0.0, 0.0));
        assert_eq!(s.value().unwrap(), ExtendedComplex::Infinity);
        s.cur = (c64(6.0, 0.0), c64(3.0, 0.0));
        assert_eq!(s.value().unwrap(), ExtendedComplex::from(2.0));
        s.cur = (c64(6e-300, 0.0), c64(3e-300, 0.0));
        assert_eq!(s.value().unwrap(), ExtendedComplex::from(2.0));
        s.cur = (c64(0.0, 0.0), c64(0.0, 0.0));
        assert_eq!(s.value(), Err(Error::Indeterminate));
    }

    #[test]
    fn zero_numerator_rejected_or_terminates() {
        let cf = ContinuedFraction::new(|n| (c64(if n == 3 { 0.0 } else { 1.0 }, 0.0), c64(2.0, 0.0)));
        assert_eq!(cf.approximants(5), Err(Error::ZeroPartialNumerator(3)));
        let t = cf.clone().terminating();
        let v = t.approximants(6).unwrap();
        assert_eq!(v[1], v[5]);
        assert!(evaluate(&t, 1e-12, 100).unwrap().is_converged());
    }

    #[test]
    fn modified_with_zero_is_evaluate() {
        let cf = golden();
        assert_eq!(
            modified_value(&cf, |_| ExtendedComplex::ZERO, 1e-12, 500).unwrap(),
            evaluate(&cf, 1e-12, 500).unwrap()
        );
    }

    #[test]
    fn modified_with_infinity_drops_last_term() {
        let cf = golden();
        let mut s = cf.convergents();
        s.advance_to(5).unwrap();
        let prev = cf.approximant(4).unwrap();
        assert_eq!(s.modified_value(ExtendedComplex::Infinity).unwrap(), prev);
    }

    #[test]
    fn equivalence_identity_scale() {
        let cf = four_thirds();
        let t = equivalence_transform(&cf, |_| c64(1.0, 0.0));
        for n in 1..20 {
            assert_eq!(cf.term(n).unwrap(), t.term(n).unwrap());
        }
    }

    #[test]
    fn equivalence_zero_scale() {
        let t = equivalence_transform(&golden(), |n| c64(if n == 2 { 0.0 } else { 1.0 }, 0.0));
        assert_eq!(t.approximants(3), Err(Error::ZeroScale(2)));
    }

    #[test]
    fn rogers_ramanujan_transformed_terms() {
        let q = 2.0f64;
        let rr = ContinuedFraction::new(move |n| (c64(q.powi(n as i32), 0.0), c64(1.0, 0.0))).with_b0(c64(1.0, 0.0));
        let t = equivalence_transform(&rr, move |n| c64(q.powi(-(n.div_ceil(2) as i32)), 0.0));
        for n in 1..12 {
            let (a, b) = t.term(n).unwrap();
            assert!((a - 1.0).norm() < 1e-15);
            assert!((b.re - q.powi(-(n.div_ceil(2) as i32))).abs() < 1e-15);
        }
    }

    #[test]
    fn renormalization_threshold_invariance() {
        let cf = ContinuedFraction::new(|n| (c64(3.0, 1.0), c64(5.0 + n as f64, -2.0)));
        let mut lo = ConvergentStream::with_threshold(cf.clone(), 1e10);
        let mut hi = ConvergentStream::with_threshold(cf, 1e300);
        for _ in 0..200 {
            lo.advance().unwrap();
            hi.advance().unwrap();
            assert!(chordal_distance(lo.value().unwrap(), hi.value().unwrap()) < 1e-14);
        }
        assert!(lo.exponent() > 0);
    }

    #[test]
    fn pow2_exact() {
        assert_eq!(pow2(0), 1.0);
        assert_eq!(pow2(10), 1024.0);
        assert_eq!(pow2(-3), 0.125);
        assert_eq!(pow2(-1074), f64::from_bits(1));
    }
}
