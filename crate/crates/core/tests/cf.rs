use cflimits::cf::{self, equivalence_transform, ContinuedFraction, ConvergentStream};
use cflimits::{c64, chordal_distance, Complex64, ExtendedComplex};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_terms(seed: u64, count: usize, a_range: (f64, f64), b_range: (f64, f64)) -> Vec<(Complex64, Complex64)> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..=count)
        .map(|_| {
            let a = Complex64::from_polar(rng.random_range(a_range.0..a_range.1), rng.random_range(0.0..6.3));
            let b = Complex64::from_polar(rng.random_range(b_range.0..b_range.1), rng.random_range(0.0..6.3));
            (a, b)
        })
        .collect()
}

fn from_terms(terms: Vec<(Complex64, Complex64)>) -> ContinuedFraction {
    ContinuedFraction::new(move |n| terms[n])
}

#[test]
fn renormalization_threshold_does_not_change_values() {
    let cf = from_terms(random_terms(3, 500, (0.5, 2.0), (2.0, 3.0))).with_b0(c64(0.1, 0.2));
    let mut low = ConvergentStream::with_threshold(cf.clone(), 1e10);
    let mut high = ConvergentStream::with_threshold(cf, 1e300);
    for _ in 0..500 {
        low.advance().unwrap();
        high.advance().unwrap();
        assert_eq!(low.value().unwrap(), high.value().unwrap(), "n = {}", low.index());
    }
    assert!(low.exponent() > 0);
}

#[test]
fn determinant_identity_over_many_steps() {
    // Bounded coefficients drifting summably towards an elliptic limit, so that
    // P_n, Q_n and the determinant stay of comparable size.
    let (alpha, beta) = (Complex64::from_polar(1.0, 0.4), Complex64::from_polar(1.0, 2.1));
    let mut rng = StdRng::seed_from_u64(5);
    let terms: Vec<(Complex64, Complex64)> = (0..=10_000)
        .map(|n| {
            let w = 1.0 / (1.0 + n as f64).powi(2);
            let da = c64(rng.random_range(-w..w), rng.random_range(-w..w));
            let db = c64(rng.random_range(-w..w), rng.random_range(-w..w));
            (-alpha * beta + da, alpha + beta + db)
        })
        .collect();
    let t = terms.clone();
    let mut s = ConvergentStream::with_threshold(from_terms(t), 1e10);
    // ∏a_k kept as mantissa and power-of-two exponent.
    let (mut prod, mut prod_exp) = (c64(1.0, 0.0), 0i64);
    for (n, term) in terms.iter().enumerate().take(10_001).skip(1) {
        s.advance().unwrap();
        prod *= term.0;
        let e = prod.norm().log2().round() as i64;
        prod /= 2f64.powi(e as i32);
        prod_exp += e;
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let expected = prod * sign * 2f64.powi((prod_exp - 2 * s.exponent()) as i32);
        let rel = (s.determinant() - expected).norm() / expected.norm();
        assert!(rel < 1e-10, "n = {n}: {rel:e}");
    }
}

#[test]
fn modified_value_with_zero_is_evaluate() {
    let cf = ContinuedFraction::new(|n| (c64(1.0, 0.0), c64(2.0 + 1.0 / n as f64, 0.5)));
    let a = cf::evaluate(&cf, 1e-14, 1000).unwrap();
    let b = cf::modified_value(&cf, |_| ExtendedComplex::ZERO, 1e-14, 1000).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #[test]
    fn equivalence_transform_preserves_every_approximant(seed in any::<u64>(), scales in prop::collection::vec((0.2..3.0f64, 0.0..6.3f64), 41)) {
        let cf = from_terms(random_terms(seed, 40, (0.3, 2.0), (0.5, 2.5))).with_b0(c64(-0.3, 0.7));
        let c: Vec<Complex64> = scales.iter().map(|&(r, t)| Complex64::from_polar(r, t)).collect();
        let eq = equivalence_transform(&cf, move |n| c[n]);
        let (x, y) = (cf.approximants(40).unwrap(), eq.approximants(40).unwrap());
        for (u, v) in x.iter().zip(&y) {
            prop_assert!(chordal_distance(*u, *v) < 1e-10);
        }
    }
}
