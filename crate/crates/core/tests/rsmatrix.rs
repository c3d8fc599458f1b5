use cflimits::matprod::{max_norm, Matrix};
use cflimits::rsmatrix::{f_projection, RSSystem};
use cflimits::{c64, Error};
use proptest::prelude::*;

fn entries() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 16)
}

proptest! {
    #[test]
    fn projection_is_continuous(d in entries(), e in entries()) {
        let d = Matrix::from_row_slice(4, 4, &d.iter().map(|&(a, b)| c64(a, b)).collect::<Vec<_>>());
        let e = Matrix::from_row_slice(4, 4, &e.iter().map(|&(a, b)| c64(a, b) * 1e-10).collect::<Vec<_>>());
        let b = d.view((2, 2), (2, 2)).into_owned();
        let smallest = b.singular_values().min();
        prop_assume!(smallest > 1e-2);
        let (f, g) = (f_projection(&d, 2, 2).unwrap(), f_projection(&(&d + e), 2, 2).unwrap());
        prop_assert!(max_norm(&(f - g)) < 1e-8 * (1.0 / smallest).powi(2).max(1.0));
    }
}

#[test]
fn four_thirds_approximants_spread() {
    let sys = RSSystem::new(1, 1, |_| {
        Matrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(1.0, 0.0), c64(-1.0, 0.0), c64(4.0 / 3.0, 0.0)])
    })
    .unwrap();
    let mut spread = Vec::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (k, s) in sys.approximants().take(4000) {
        match s {
            Ok(s) => {
                assert!(s[(0, 0)].im.abs() < 1e-12);
                lo = lo.min(s[(0, 0)].re);
                hi = hi.max(s[(0, 0)].re);
            }
            Err(Error::SingularB(Some(i))) => assert_eq!(i, k),
            Err(e) => panic!("{e}"),
        }
        if [100, 1000, 4000].contains(&k) {
            spread.push(hi - lo);
        }
    }
    assert!(spread[0] < spread[1] && spread[1] < spread[2], "{spread:?}");
}
