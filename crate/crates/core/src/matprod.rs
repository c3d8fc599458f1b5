//! Infinite products of square complex matrices: absolutely convergent
//! products `∏(I + A_i)`, residue limits when the limit matrix has finite
//! order, and the cocycle limit `F = lim (∏D_i)(∏M_i)^{−1}` for bounded
//! `∏M_i^{±1}`.
//!
//! Norms are max-absolute-entry norms.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::cf::STABILITY_WINDOW;
use crate::error::{Error, Result};
use crate::limitset::TailBound;

pub type Matrix = DMatrix<Complex64>;

/// `i ↦` a square matrix, indexed from 1.
pub type MatSeq = Arc<dyn Fn(usize) -> Matrix + Send + Sync>;

/// Default ceiling on `‖∏M‖` and `‖(∏M)^{−1}‖`.
pub const DEFAULT_CEILING: f64 = 1e6;

/// Orientation of partial products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Side {
    /// `X_1 X_2 ⋯ X_n`.
    #[default]
    Left,
    /// `X_n ⋯ X_2 X_1`.
    Right,
}

pub fn max_norm(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")))
    }
}

fn checked(m: Matrix, dim: usize, index: usize) -> Result<Matrix> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::Dimension(format!("matrix {index} is {}x{}, expected {dim}x{dim}", m.nrows(), m.ncols())));
    }
    if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonFinite);
    }
    Ok(m)
}

/// `X·Y` for [`Side::Left`], `Y·X` for [`Side::Right`]: appends `Y` to a product.
fn extend(side: Side, x: &Matrix, y: &Matrix) -> Matrix {
    match side {
        Side::Left => x * y,
        Side::Right => y * x,
    }
}

/// Result of [`wedderburn_product`].
#[derive(Debug, Clone, PartialEq)]
pub struct WedderburnProduct {
    pub product: Matrix,
    pub terms: usize,
    /// Bound on the distance to the infinite product at `terms`.
    pub error_bound: f64,
}

/// `∏_{i≥1}(I + A_i)` (left to right).
///
/// With `C` the running maximum of `‖∏_{i≤n}(I + A_i)‖` the remaining
/// factors move the product by at most `d·C·(exp(d·tail(N)) − 1)`; stops once
/// this is below `tol`.
pub fn wedderburn_product<A, T>(dim: usize, a: A, tail_bound: T, tol: f64, max_n: usize) -> Result<WedderburnProduct>
where
    A: Fn(usize) -> Matrix,
    T: Fn(usize) -> f64,
{
    check_tol(tol)?;
    let id = Matrix::identity(dim, dim);
    let mut prod = id.clone();
    let mut c = 1.0f64;
    let d = dim as f64;
    let mut bound = f64::INFINITY;
    for n in 1..=max_n {
        let an = checked(a(n), dim, n)?;
        prod = &prod * (&id + an);
        c = c.max(max_norm(&prod));
        bound = d * c * (d * tail_bound(n)).exp_m1();
        if bound < tol {
            return Ok(WedderburnProduct { product: prod, terms: n, error_bound: bound });
        }
    }
    Err(Error::NoConvergenceWithinBudget { budget: max_n, last_delta: bound })
}

/// Sequences `D_i`, `M_i` with `Σ‖D_i − M_i‖ < ∞` and bounded `∏M_i^{±1}`.
#[derive(Clone)]
pub struct MatrixSequencePair {
    dim: usize,
    d: MatSeq,
    m: MatSeq,
    tail_bound: Option<TailBound>,
    side: Side,
    ceiling: f64,
}

impl fmt::Debug for MatrixSequencePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixSequencePair")
            .field("dim", &self.dim)
            .field("side", &self.side)
            .field("ceiling", &self.ceiling)
            .finish_non_exhaustive()
    }
}

impl MatrixSequencePair {
    pub fn new<D, M>(dim: usize, d: D, m: M) -> Result<Self>
    where
        D: Fn(usize) -> Matrix + Send + Sync + 'static,
        M: Fn(usize) -> Matrix + Send + Sync + 'static,
    {
        if dim == 0 {
            return Err(Error::Dimension("dimension must be positive".into()));
        }
        Ok(MatrixSequencePair {
            dim,
            d: Arc::new(d),
            m: Arc::new(m),
            tail_bound: None,
            side: Side::Left,
            ceiling: DEFAULT_CEILING,
        })
    }

    /// `M_i ≡ m`.
    pub fn with_constant_m<D>(d: D, m: Matrix) -> Result<Self>
    where
        D: Fn(usize) -> Matrix + Send + Sync + 'static,
    {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension("limit matrix must be square".into()));
        }
        let dim = m.nrows();
        Self::new(dim, d, move |_| m.clone())
    }

    pub fn with_tail_bound<T>(mut self, tail: T) -> Self
    where
        T: Fn(usize) -> f64 + Send + Sync + 'static,
    {
        self.tail_bound = Some(Arc::new(tail));
        self
    }

    pub fn with_side(mut self, side: Side) -> Self {
        self.side = side;
        self
    }

    pub fn with_ceiling(mut self, ceiling: f64) -> Self {
        self.ceiling = ceiling;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn d(&self, i: usize) -> Result<Matrix> {
        checked((self.d)(i), self.dim, i)
    }

    pub fn m(&self, i: usize) -> Result<Matrix> {
        checked((self.m)(i), self.dim, i)
    }

    /// `∏_{i≤n} M_i` in the pair's orientation.
    pub fn m_product(&self, n: usize) -> Result<Matrix> {
        let mut p = Matrix::identity(self.dim, self.dim);
        for i in 1..=n {
            p = extend(self.side, &p, &self.m(i)?);
        }
        Ok(p)
    }

    /// `∏_{i≤n} D_i` in the pair's orientation.
    pub fn d_product(&self, n: usize) -> Result<Matrix> {
        let mut p = Matrix::identity(self.dim, self.dim);
        for i in 1..=n {
            p = extend(self.side, &p, &self.d(i)?);
        }
        Ok(p)
    }
}

/// Result of [`cocycle_limit`].
#[derive(Debug, Clone, PartialEq)]
pub struct CocycleLimit {
    pub f: Matrix,
    pub det: Complex64,
    /// Whether every generated `D_i` was nonsingular; `det F ≠ 0` exactly when
    /// all `D_i` are.
    pub all_d_nonsingular: bool,
    pub terms: usize,
    /// Largest `‖(∏M)(∏M)^{−1} − I‖` seen.
    pub inverse_residual: f64,
}

/// `F = lim (D_1⋯D_n)(M_1⋯M_n)^{−1}` ([`Side::Left`]) or
/// `F = lim (M_n⋯M_1)^{−1}(D_n⋯D_1)` ([`Side::Right`]).
///
/// The inverse product is updated by one linear solve per step. Converged
/// when `F` is stable over the window and, when a tail bound is present,
/// `d²·C_D·C_{M⁻¹}·tail(n) < tol` with running norm maxima `C`.
pub fn cocycle_limit(pair: &MatrixSequencePair, tol: f64, max_n: usize) -> Result<CocycleLimit> {
    check_tol(tol)?;
    let dim = pair.dim;
    let id = Matrix::identity(dim, dim);
    let mut pd = id.clone();
    let mut pm = id.clone();
    let mut pm_inv = id.clone();
    let mut f_prev = id.clone();
    let mut all_nonsingular = true;
    let (mut c_d, mut c_minv) = (1.0f64, 1.0f64);
    let mut run = 0usize;
    let mut inverse_residual = 0.0f64;
    let mut last_delta = f64::INFINITY;
    for n in 1..=max_n {
        let dn = pair.d(n)?;
        let mn = pair.m(n)?;
        if is_singular(&dn) {
            all_nonsingular = false;
        }
        let lu = mn.clone().lu();
        pm_inv = match pair.side {
            // (M_1⋯M_n)^{−1} = M_n^{−1}(M_1⋯M_{n−1})^{−1}
            Side::Left => lu.solve(&pm_inv),
            // (M_n⋯M_1)^{−1} = (M_{n−1}⋯M_1)^{−1}M_n^{−1}
            Side::Right => mn.transpose().lu().solve(&pm_inv.transpose()).map(|x| x.transpose()),
        }
        .ok_or(Error::UnboundedMProducts { index: n, norm: f64::INFINITY })?;
        pd = extend(pair.side, &pd, &dn);
        pm = extend(pair.side, &pm, &mn);
        let (npm, npmi) = (max_norm(&pm), max_norm(&pm_inv));
        if !(npm <= pair.ceiling && npmi <= pair.ceiling) {
            return Err(Error::UnboundedMProducts { index: n, norm: npm.max(npmi) });
        }
        inverse_residual = inverse_residual.max(max_norm(&(&pm * &pm_inv - &id)));
        c_d = c_d.max(max_norm(&pd));
        c_minv = c_minv.max(npmi);
        let f = match pair.side {
            Side::Left => &pd * &pm_inv,
            Side::Right => &pm_inv * &pd,
        };
        let delta = max_norm(&(&f - &f_prev)) / max_norm(&f).max(1.0);
        last_delta = delta;
        run = if delta <= tol { run + 1 } else { 0 };
        f_prev = f;
        let tail_ok = pair.tail_bound.as_ref().is_none_or(|t| (dim * dim) as f64 * c_d * c_minv * t(n) < tol);
        if run >= STABILITY_WINDOW && tail_ok {
            let det = f_prev.determinant();
            return Ok(CocycleLimit { f: f_prev, det, all_d_nonsingular: all_nonsingular, terms: n, inverse_residual });
        }
    }
    Err(Error::NoConvergenceWithinBudget { budget: max_n, last_delta })
}

fn is_singular(m: &Matrix) -> bool {
    let scale = max_norm(m);
    scale == 0.0 || m.determinant().norm() <= 1e-14 * scale.powi(m.nrows() as i32)
}

/// `F·M_1⋯M_n` ([`Side::Left`]) or `M_n⋯M_1·F` ([`Side::Right`]): the
/// asymptotic surrogate of `∏_{i≤n} D_i`.
pub fn product_predictor(pair: &MatrixSequencePair, f: &Matrix, n: usize) -> Result<Matrix> {
    let pm = pair.m_product(n)?;
    Ok(match pair.side {
        Side::Left => f * pm,
        Side::Right => pm * f,
    })
}

/// Result of [`residue_matrix_limits`].
#[derive(Debug, Clone, PartialEq)]
pub struct ResidueMatrixLimits {
    /// `F = lim_k ∏_{n≤km} D_n`.
    pub f: Matrix,
    /// Limits of `∏_{n≤km+j} D_n`, `j = 0..m`: `F·M^j` (left) or `M^j·F` (right).
    pub residues: Vec<Matrix>,
}

/// Residue limits of `∏D_n` when `D_n → M` summably and `M^m = I`.
pub fn residue_matrix_limits<D>(
    d: D,
    m_const: Matrix,
    m: usize,
    side: Side,
    tol: f64,
    max_n: usize,
) -> Result<ResidueMatrixLimits>
where
    D: Fn(usize) -> Matrix + Send + Sync + 'static,
{
    if m == 0 {
        return Err(Error::InvalidArgument("order must be positive".into()));
    }
    let dim = m_const.nrows();
    let id = Matrix::identity(dim, dim);
    let mut power = id.clone();
    for _ in 0..m {
        power = &power * &m_const;
    }
    let err = max_norm(&(&power - &id));
    if err > 1e-12 {
        return Err(Error::MNotFiniteOrder(err));
    }
    let pair = MatrixSequencePair::with_constant_m(d, m_const.clone())?.with_side(side);
    let f = cocycle_limit(&pair, tol, max_n)?.f;
    let mut residues = Vec::with_capacity(m);
    let mut mj = id;
    for _ in 0..m {
        residues.push(match side {
            Side::Left => &f * &mj,
            Side::Right => &mj * &f,
        });
        mj = &mj * &m_const;
    }
    Ok(ResidueMatrixLimits { f, residues })
}
