use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite value where a finite complex number is required")]
    NonFinite,
    #[error("degenerate Möbius map (ad - bc vanishes relative to the coefficients)")]
    DegenerateMap,
    #[error("zero partial numerator at n = {0}")]
    ZeroPartialNumerator(usize),
    #[error("indeterminate projective pair (0, 0)")]
    Indeterminate,
    #[error("zero scale factor at n = {0}")]
    ZeroScale(usize),
    #[error("alpha and beta must be distinct")]
    EqualAlphaBeta,
    #[error("q_{0} equals alpha * beta")]
    QEqualsAlphaBeta(usize),
    #[error("no convergence within {budget} terms (last delta {last_delta:e})")]
    NoConvergenceWithinBudget { budget: usize, last_delta: f64 },
    #[error("modified values h(inf), h(0), h(1) are not pairwise distinct")]
    DegenerateTriple,
    #[error("limit coefficients are not of elliptic type (moduli {0} and {1})")]
    NotElliptic(f64, f64),
    #[error("vanishing inner denominator in the transformed term at n = {0}")]
    DegenerateTerm(usize),
    #[error("alpha / beta is a root of unity")]
    RootOfUnityLambda,
    #[error("operation needs alpha / beta of finite order")]
    InfiniteOrder,
    #[error("operation needs alpha and beta given as exact roots of unity")]
    NotExactRoots,
    #[error("q-series did not converge within {0} terms")]
    SeriesNotConverged(usize),
    #[error("pole in a q-series denominator at n = {0}")]
    PoleInDenominator(usize),
    #[error("M^m differs from the identity by {0:e}")]
    MNotFiniteOrder(f64),
    #[error("partial products of M left the bounded region at i = {index} (norm {norm:e})")]
    UnboundedMProducts { index: usize, norm: f64 },
    #[error("characteristic roots are not distinct")]
    RootsNotDistinct,
    #[error("characteristic root of modulus {0} is off the unit circle")]
    RootsNotUnitModulus(f64),
    #[error("singular trailing block{}", .0.map(|k| format!(" at k = {k}")).unwrap_or_default())]
    SingularB(Option<usize>),
    #[error("limit matrix is not diagonalizable with unit-modulus spectrum: {0}")]
    BadLimitMatrix(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
