//! `(r,s)`-matrix continued fractions.
//!
//! For `n = r + s` and `n×n` matrices `θ_k`, the approximants are
//! `s_k = f(θ_kθ_{k−1}⋯θ_1)` where `f(D) = B^{−1}A`, `B` is the trailing
//! `s×s` block of `D` and `A` the first `r` columns of its last `s` rows.
//! When `θ_k → θ` summably with `θ` diagonalizable and of unit-modulus
//! spectrum, `s_k ~ f(θ^kF)` with `F = lim θ^{−k}θ_k⋯θ_1`.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cf::{ContinuedFraction, RENORM_THRESHOLD};
use crate::error::{Error, Result};
use crate::limitset::TailBound;
use crate::matprod::{cocycle_limit, max_norm, MatSeq, Matrix, MatrixSequencePair, Side};

/// Tolerance for the unit-modulus and diagonalizability checks on `θ`.
pub const SPECTRUM_TOL: f64 = 1e-8;

/// `f(D) = B^{−1}A` for the `(r,s)` split of `D`.
pub fn f_projection(d: &Matrix, r: usize, s: usize) -> Result<Matrix> {
    let n = r + s;
    if r == 0 || s == 0 || d.nrows() != n || d.ncols() != n {
        return Err(Error::Dimension(format!("{}×{} matrix with (r,s) = ({r},{s})", d.nrows(), d.ncols())));
    }
    let b = d.view((r, r), (s, s)).into_owned();
    let a = d.view((r, 0), (s, r)).into_owned();
    let scale = max_norm(&b);
    if scale == 0.0 || b.determinant().norm() <= 1e-14 * scale.powi(s as i32) {
        return Err(Error::SingularB(None));
    }
    let x = b.lu().solve(&a).ok_or(Error::SingularB(None))?;
    if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(x)
    } else {
        Err(Error::SingularB(None))
    }
}

/// An `(r,s)`-matrix continued fraction given by its matrices `θ_k`, `k ≥ 1`.
#[derive(Clone)]
pub struct RSSystem {
    r: usize,
    s: usize,
    theta: MatSeq,
    theta_limit: Option<Matrix>,
    tail_bound: Option<TailBound>,
}

impl fmt::Debug for RSSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RSSystem")
            .field("r", &self.r)
            .field("s", &self.s)
            .field("theta_limit", &self.theta_limit)
            .finish_non_exhaustive()
    }
}

impl RSSystem {
    pub fn new<T>(r: usize, s: usize, theta: T) -> Result<Self>
    where
        T: Fn(usize) -> Matrix + Send + Sync + 'static,
    {
        if r == 0 || s == 0 {
            return Err(Error::Dimension("r and s must be positive".into()));
        }
        Ok(RSSystem { r, s, theta: Arc::new(theta), theta_limit: None, tail_bound: None })
    }

    /// Attaches `θ = lim θ_k`, which must be diagonalizable with unit-modulus eigenvalues.
    pub fn with_limit(mut self, theta: Matrix) -> Result<Self> {
        let n = self.n();
        if theta.nrows() != n || theta.ncols() != n {
            return Err(Error::Dimension(format!("limit matrix must be {n}×{n}")));
        }
        validate_limit(&theta)?;
        self.theta_limit = Some(theta);
        Ok(self)
    }

    /// Bound on `Σ_{k>N} ‖θ_k − θ‖`.
    pub fn with_tail_bound<T>(mut self, tail: T) -> Self
    where
        T: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        self.tail_bound = Some(Arc::new(tail));
        self
    }

    /// The `(1,1)` system whose approximants are those of `cf`:
    /// `θ_k = [[0, 1], [a_k, b_k]]`, with `θ_1` right-multiplied by
    /// `[[1, 0], [b_0, 1]]`, so that `θ_k⋯θ_1 = [[P_{k−1}, Q_{k−1}], [P_k, Q_k]]`.
    pub fn from_continued_fraction(cf: &ContinuedFraction) -> Result<Self> {
        let cf = cf.clone();
        // Validate the first term eagerly so that generator failures surface here.
        cf.term(1)?;
        Self::new(1, 1, move |k| {
            let (a, b) = cf.term(k).unwrap_or((Complex64::new(f64::NAN, 0.0), Complex64::new(f64::NAN, 0.0)));
            let t = cf_theta(a, b);
            if k == 1 {
                t * DMatrix::from_row_slice(2, 2, &[1.0.into(), 0.0.into(), cf.b0(), 1.0.into()])
            } else {
                t
            }
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn n(&self) -> usize {
        self.r + self.s
    }

    pub fn theta_limit(&self) -> Option<&Matrix> {
        self.theta_limit.as_ref()
    }

    pub fn theta(&self, k: usize) -> Result<Matrix> {
        let t = (self.theta)(k);
        let n = self.n();
        if t.nrows() != n || t.ncols() != n {
            return Err(Error::Dimension(format!("θ_{k} is {}×{}, expected {n}×{n}", t.nrows(), t.ncols())));
        }
        if t.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(t)
    }

    /// `θ_k⋯θ_1` computed from scratch, without renormalization.
    pub fn product(&self, k: usize) -> Result<Matrix> {
        let n = self.n();
        let mut p = Matrix::identity(n, n);
        for i in 1..=k {
            p = self.theta(i)? * p;
        }
        Ok(p)
    }

    pub fn approximants(&self) -> RSApproximants<'_> {
        let n = self.n();
        RSApproximants { sys: self, k: 0, product: Matrix::identity(n, n) }
    }
}

/// `[[0, 1], [a, b]]`.
pub fn cf_theta(a: Complex64, b: Complex64) -> Matrix {
    DMatrix::from_row_slice(2, 2, &[0.0.into(), 1.0.into(), a, b])
}

fn validate_limit(theta: &Matrix) -> Result<()> {
    let n = theta.nrows();
    let eig = nalgebra::Schur::try_new(theta.clone(), 1e-15, 10_000)
        .and_then(|s| s.eigenvalues())
        .ok_or_else(|| Error::BadLimitMatrix("eigenvalue iteration did not converge".into()))?;
    for z in eig.iter() {
        if (z.norm() - 1.0).abs() > SPECTRUM_TOL {
            return Err(Error::BadLimitMatrix(format!("eigenvalue {z} is not of modulus 1")));
        }
    }
    // Diagonalizable: for every eigenvalue, geometric multiplicity equals
    // the number of eigenvalues clustered with it.
    let scale = max_norm(theta).max(1.0);
    for z in eig.iter() {
        let mult = eig.iter().filter(|w| (*w - z).norm() < 1e-6).count();
        let shifted = theta - Matrix::identity(n, n) * *z;
        let sv = shifted.singular_values();
        let nullity = sv.iter().filter(|&&x| x < 1e-6 * scale).count();
        if nullity < mult {
            return Err(Error::BadLimitMatrix(format!("θ is not diagonalizable at eigenvalue {z}")));
        }
    }
    Ok(())
}

/// Iterator over `(k, s_k)`, `k = 1, 2, …`. An undefined approximant yields
/// `Err(SingularB(Some(k)))` and iteration continues.
pub struct RSApproximants<'a> {
    sys: &'a RSSystem,
    k: usize,
    product: Matrix,
}

impl RSApproximants<'_> {
    /// The accumulated product `θ_k⋯θ_1`, up to a positive scale factor.
    pub fn product(&self) -> &Matrix {
        &self.product
    }
}

impl Iterator for RSApproximants<'_> {
    type Item = (usize, Result<Matrix>);

    fn next(&mut self) -> Option<Self::Item> {
        self.k += 1;
        let k = self.k;
        let t = match self.sys.theta(k) {
            Ok(t) => t,
            Err(e) => return Some((k, Err(e))),
        };
        self.product = t * &self.product;
        // f is invariant under scaling, so the product is kept near unit size.
        let m = max_norm(&self.product);
        if m > RENORM_THRESHOLD || (m > 0.0 && m < 1.0 / RENORM_THRESHOLD) {
            self.product /= Complex64::new(m, 0.0);
        }
        let s = f_projection(&self.product, self.sys.r, self.sys.s).map_err(|e| match e {
            Error::SingularB(_) => Error::SingularB(Some(k)),
            e => e,
        });
        Some((k, s))
    }
}

/// The approximant `s_k`.
pub fn rs_approximant(sys: &RSSystem, k: usize) -> Result<Matrix> {
    if k == 0 {
        return Err(Error::InvalidArgument("approximants are indexed from 1".into()));
    }
    sys.approximants().nth(k - 1).map(|(_, s)| s).unwrap_or(Err(Error::SingularB(Some(k))))
}

/// `F = lim θ^{−k}θ_k⋯θ_1` together with the predictor `k ↦ f(θ^kF)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RSAsymptotics {
    pub f: Matrix,
    pub theta: Matrix,
    pub r: usize,
    pub s: usize,
    pub terms: usize,
}

impl RSAsymptotics {
    /// `θ^k F`.
    pub fn predicted_product(&self, k: usize) -> Matrix {
        matrix_power(&self.theta, k) * &self.f
    }

    /// `f(θ^kF)`.
    pub fn predictor(&self, k: usize) -> Result<Matrix> {
        f_projection(&self.predicted_product(k), self.r, self.s).map_err(|e| match e {
            Error::SingularB(_) => Error::SingularB(Some(k)),
            e => e,
        })
    }

    /// `f(θ^jF)` for `j < m`: the residue limits `lim s_{km+j}` when `θ^m = I`.
    pub fn residue_limits(&self, m: usize) -> Result<Vec<Matrix>> {
        if m == 0 {
            return Err(Error::InvalidArgument("period must be positive".into()));
        }
        let n = self.theta.nrows();
        let dev = max_norm(&(matrix_power(&self.theta, m) - Matrix::identity(n, n)));
        if dev > 1e-12 {
            return Err(Error::MNotFiniteOrder(dev));
        }
        (0..m).map(|j| self.predictor(j)).collect()
    }
}

/// `θ^k` by repeated squaring.
pub fn matrix_power(theta: &Matrix, mut k: usize) -> Matrix {
    let n = theta.nrows();
    let mut result = Matrix::identity(n, n);
    let mut base = theta.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &result * &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Smallest `m ≤ max_m` with `‖θ^m − I‖ ≤ 1e−12`.
pub fn theta_order(theta: &Matrix, max_m: usize) -> Option<usize> {
    let n = theta.nrows();
    let id = Matrix::identity(n, n);
    let mut p = id.clone();
    for m in 1..=max_m {
        p = &p * theta;
        if max_norm(&(&p - &id)) <= 1e-12 {
            return Some(m);
        }
    }
    None
}

pub fn rs_asymptotics(sys: &RSSystem, tol: f64, max_n: usize) -> Result<RSAsymptotics> {
    let theta = sys.theta_limit.clone().ok_or_else(|| Error::BadLimitMatrix("no limit matrix attached".into()))?;
    let s = sys.clone();
    let pair = MatrixSequencePair::with_constant_m(move |k| (s.theta)(k), theta.clone())?.with_side(Side::Right);
    let pair = match &sys.tail_bound {
        Some(t) => {
            let t = t.clone();
            pair.with_tail_bound(move |n| t(n))
        }
        None => pair,
    };
    let limit = cocycle_limit(&pair, tol, max_n)?;
    Ok(RSAsymptotics { f: limit.f, theta, r: sys.r, s: sys.s, terms: limit.terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::cf::ConvergentStream;
    use crate::matprod::max_norm;

    fn m(rows: usize, v: &[Complex64]) -> Matrix {
        DMatrix::from_row_slice(rows, v.len() / rows, v)
    }

    #[test]
    fn projection_basics() {
        let d = m(2, &[c64(1.0, 0.0), c64(2.0, 0.0), c64(3.0, 1.0), c64(0.0, 2.0)]);
        let f = f_projection(&d, 1, 1).unwrap();
        assert!((f[(0, 0)] - c64(3.0, 1.0) / c64(0.0, 2.0)).norm() < 1e-15);
        let f = f_projection(&Matrix::identity(3, 3), 1, 2).unwrap();
        assert_eq!(f, Matrix::zeros(2, 1));
        let z = m(2, &[c64(1.0, 0.0), c64(2.0, 0.0), c64(3.0, 0.0), c64(0.0, 0.0)]);
        assert!(matches!(f_projection(&z, 1, 1), Err(Error::SingularB(None))));
    }

    #[test]
    fn projection_two_by_two_blocks() {
        let v: Vec<Complex64> = (0..16).map(|i| c64((i as f64 * 0.7).sin(), (i as f64 * 1.3).cos())).collect();
        let d = m(4, &v);
        let f = f_projection(&d, 2, 2).unwrap();
        let (b00, b01, b10, b11) = (d[(2, 2)], d[(2, 3)], d[(3, 2)], d[(3, 3)]);
        let det = b00 * b11 - b01 * b10;
        for j in 0..2 {
            let (a0, a1) = (d[(2, j)], d[(3, j)]);
            assert!((f[(0, j)] - (b11 * a0 - b01 * a1) / det).norm() < 1e-13);
            assert!((f[(1, j)] - (-b10 * a0 + b00 * a1) / det).norm() < 1e-13);
        }
    }

    #[test]
    fn classical_embedding() {
        let terms: Vec<(Complex64, Complex64)> = (0..31)
            .map(|i| (c64((i as f64).sin() + 1.5, (i as f64 * 0.3).cos()), c64(2.0 + (i as f64).cos(), 0.4)))
            .collect();
        let t = terms.clone();
        let cf = ContinuedFraction::new(move |n| t[n]).with_b0(c64(0.25, -0.5));
        let sys = RSSystem::from_continued_fraction(&cf).unwrap();
        let mut stream = ConvergentStream::new(cf.clone());
        for (k, s) in sys.approximants().take(30) {
            stream.advance().unwrap();
            assert_eq!(stream.index(), k);
            let v = stream.value().unwrap().as_finite().unwrap();
            assert!((s.unwrap()[(0, 0)] - v).norm() <= 1e-13 * v.norm().max(1.0), "k={k}");
        }
    }

    #[test]
    fn incremental_matches_scratch() {
        let sys = RSSystem::new(1, 2, |k| {
            let x = k as f64;
            m(
                3,
                &[
                    c64(x.sin(), 0.1),
                    c64(1.0, 0.0),
                    c64(0.0, 0.3),
                    c64(0.2, x.cos()),
                    c64(1.1, 0.0),
                    c64(0.5, 0.0),
                    c64(0.0, 1.0),
                    c64(0.3, 0.3),
                    c64(0.9, -0.2),
                ],
            )
        })
        .unwrap();
        for (k, s) in sys.approximants().take(50) {
            let scratch = f_projection(&sys.product(k).unwrap(), 1, 2);
            match (s, scratch) {
                (Ok(a), Ok(b)) => assert!(max_norm(&(a - &b)) <= 1e-9 * max_norm(&b).max(1.0), "k={k}"),
                (Err(_), Err(_)) => {}
                _ => panic!("definedness differs at k={k}"),
            }
        }
    }

    #[test]
    fn constant_theta_is_periodic() {
        let theta = cf_theta(c64(-1.0, 0.0), c64(-1.0, 0.0));
        assert_eq!(theta_order(&theta, 10), Some(3));
        let th = theta.clone();
        let sys = RSSystem::new(1, 1, move |_| th.clone()).unwrap().with_limit(theta).unwrap();
        let s: Vec<_> = sys.approximants().take(12).map(|(_, s)| s).collect();
        for k in 5..12 {
            match (&s[k], &s[k - 3]) {
                (Ok(a), Ok(b)) => assert!(max_norm(&(a - b)) < 1e-12),
                (Err(_), Err(_)) => {}
                _ => panic!("definedness not periodic"),
            }
        }
        let asym = rs_asymptotics(&sys, 1e-14, 1000).unwrap();
        assert!(max_norm(&(&asym.f - Matrix::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn order_three_residues() {
        let theta = cf_theta(c64(-1.0, 0.0), c64(-1.0, 0.0));
        let sys = RSSystem::new(1, 1, |k| cf_theta(c64(-1.0 + 0.5f64.powi(k as i32), 0.0), c64(-1.0, 0.0)))
            .unwrap()
            .with_limit(theta)
            .unwrap()
            .with_tail_bound(|n| 0.5f64.powi(n as i32));
        let asym = rs_asymptotics(&sys, 1e-13, 10_000).unwrap();
        let limits = asym.residue_limits(3).unwrap();
        let s: Vec<_> = sys.approximants().take(603).map(|(_, s)| s).collect();
        for j in 0..3 {
            let sk = s[600 + j - 1].as_ref().unwrap();
            assert!(max_norm(&(sk - &limits[(600 + j) % 3])) < 1e-8);
        }
    }

    #[test]
    fn elliptic_predictor() {
        let (alpha, beta) = (Complex64::from_polar(1.0, 2f64.sqrt()), Complex64::from_polar(1.0, 3f64.sqrt()));
        let (a, b) = (-alpha * beta, alpha + beta);
        let sys = RSSystem::new(1, 1, move |k| cf_theta(a + 0.5f64.powi(k as i32), b))
            .unwrap()
            .with_limit(cf_theta(a, b))
            .unwrap()
            .with_tail_bound(|n| 0.5f64.powi(n as i32));
        let asym = rs_asymptotics(&sys, 1e-14, 10_000).unwrap();
        let mut worst = 0.0f64;
        for (k, s) in sys.approximants().take(1000).skip(499) {
            let p = asym.predictor(k).unwrap();
            worst = worst.max(max_norm(&(s.unwrap() - p)));
        }
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn rejects_bad_limits() {
        let sys = || RSSystem::new(1, 1, |_| Matrix::identity(2, 2)).unwrap();
        let jordan = m(2, &[c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]);
        assert!(matches!(sys().with_limit(jordan), Err(Error::BadLimitMatrix(_))));
        let big = Matrix::identity(2, 2) * c64(2.0, 0.0);
        assert!(matches!(sys().with_limit(big), Err(Error::BadLimitMatrix(_))));
        assert!(sys().with_limit(Matrix::identity(2, 2)).is_ok());
    }
}
