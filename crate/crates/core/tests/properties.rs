//! Randomized invariants of the geometric primitives.

use num_complex::Complex64;
use proptest::prelude::*;
use renormlab_core::*;

proptest! {
    #[test]
    fn affine_normalization_round_trips(
        lo in -3.0f64..3.0,
        len in 0.01f64..4.0,
        reversed: bool,
        x in -1.0f64..1.0,
    ) {
        let orientation = if reversed { Orientation::Reversed } else { Orientation::Forward };
        let j = OrientedInterval::new(lo, lo + len, orientation).unwrap();
        let a = interval::affine_to(&j);
        prop_assert!((a.apply(j.first_endpoint()) + 1.0).abs() < 1e-12);
        let back = a.apply(a.inverse().apply(x));
        prop_assert!((back - x).abs() < 1e-10);
    }

    #[test]
    fn zoom_on_the_full_interval_is_the_identity_operation(a in -0.3f64..0.3) {
        let phi = PolyDiffeo::new(
            ChebPoly::fit(&|x: f64| x + a * (x * x * x - x), 24).unwrap(),
        ).unwrap();
        let full = OrientedInterval::new(-1.0, 1.0, Orientation::Forward).unwrap();
        let z = zoom(&phi, &full, 24).unwrap();
        prop_assert!((z.image.lo + 1.0).abs() < 1e-12 && (z.image.hi - 1.0).abs() < 1e-12);
        prop_assert!(z.fit_residual < 1e-10);
        prop_assert!(sup_dist(&z.map, &phi) < 1e-10);
    }

    #[test]
    fn composed_pair_maps_are_even(
        t in 0.55f64..0.95,
        a in -0.2f64..0.2,
        x in 0.0f64..1.0,
    ) {
        let phi = PolyDiffeo::new(
            ChebPoly::fit(&|x: f64| x + a * (x * x * x - x), 16).unwrap(),
        ).unwrap();
        let pair = Pair::new(phi, t, 2.0).unwrap();
        prop_assert_eq!(pair.eval(x), pair.eval(-x));
        prop_assert!((pair.deriv(x) + pair.deriv(-x)).abs() < 1e-12);
    }

    #[test]
    fn fold_branches_agree_for_polynomial_exponents(
        re in -0.7f64..0.7,
        im in -0.7f64..0.7,
        t in 0.55f64..0.95,
        quartic: bool,
    ) {
        let alpha = if quartic { 4.0 } else { 2.0 };
        let q = QtParams::new(t, alpha).unwrap();
        let z = Complex64::new(re, im);
        let plus = q.eval_complex(z, Branch::Plus).unwrap();
        let minus = q.eval_complex(z, Branch::Minus).unwrap();
        prop_assert_eq!(plus, minus);
        // and on the real line the complex extension matches the fold
        let on_axis = q.eval_complex(Complex64::new(re, 0.0), Branch::Plus).unwrap();
        prop_assert!((on_axis.re - q.eval(re)).abs() < 1e-13);
        prop_assert!(on_axis.im.abs() < 1e-13);
    }

    #[test]
    fn fractional_folds_invert_on_the_positive_axis(
        t in 0.55f64..0.95,
        alpha in 1.2f64..2.8,
        x in 0.01f64..0.99,
    ) {
        let q = QtParams::new(t, alpha).unwrap();
        let back = q.preimage_nonneg(q.eval(x)).unwrap();
        prop_assert!((back - x).abs() < 1e-10);
    }
}
