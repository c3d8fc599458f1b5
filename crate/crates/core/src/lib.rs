//! Asymptotics and limit sets of divergent continued fractions, infinite
//! matrix products, Poincaré-type recurrences and (r,s)-matrix continued
//! fractions whose characteristic data lies on the unit circle.
//!
//! The central object is the *limit set* of a sequence: the set of limits of
//! all its convergent subsequences. For the continued fractions handled here
//! that set is the image of the roots of unity of some order `m` (or of the
//! whole unit circle) under an explicitly computable Möbius map `h`, and the
//! approximants satisfy `f_n ~ h(λ^{n+1})`.
//!
//! Modules:
//! - [`sphere`]: the Riemann sphere, its chordal metric and Möbius maps.
//! - [`cf`]: projective convergent recurrences, modified limits, equivalence
//!   transformations.
//! - [`limitset`]: the Möbius map `h`, concentration points, residue limits
//!   and ranks for elliptic limit-periodic continued fractions.
//! - [`bauermuir`]: convergent continued fractions for `h(∞)`, `h(0)` and
//!   `h(λ^{k+1})`.
//! - [`matprod`]: Wedderburn products, residue limits of products and
//!   cocycle limits.
//! - [`recur`]: Poincaré-type recurrences with unit-circle spectra.
//! - [`rsmatrix`]: (r,s)-matrix continued fractions.
//! - [`qseries`]: q-Pochhammer symbols and the q-series identities.

pub mod bauermuir;
pub mod cf;
pub mod error;
pub mod limitset;
pub mod matprod;
pub mod qseries;
pub mod recur;
pub mod rsmatrix;
pub mod sphere;
pub mod unit;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use sphere::{chordal_distance, CircleOrLine, ExtendedComplex, MobiusMap};
pub use unit::{Order, UnitModulusNumber};

/// Shorthand for building a [`Complex64`].
#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
