use proptest::prelude::*;
use pssmp::numerics::{digamma, find_root, ln_gamma, maximize_concave, Bracket};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn log_gamma_recurrence(x in 0.5f64..100.0) {
        let gap = ln_gamma(x + 1.0).unwrap() - ln_gamma(x).unwrap() - x.ln();
        prop_assert!(gap.abs() <= 1e-11, "{gap}");
    }

    #[test]
    fn digamma_is_derivative_of_log_gamma(x in 0.1f64..50.0) {
        let h = 1e-5;
        let fd = (ln_gamma(x + h).unwrap() - ln_gamma(x - h).unwrap()) / (2.0 * h);
        prop_assert!((digamma(x).unwrap() - fd).abs() <= 1e-6);
    }

    #[test]
    fn digamma_recurrence_on_negative_axis(x in -50.0f64..50.0) {
        prop_assume!((x - x.round()).abs() > 1e-3 && (x + 1.0 - (x + 1.0).round()).abs() > 1e-3);
        let gap = digamma(x + 1.0).unwrap() - digamma(x).unwrap() - 1.0 / x;
        prop_assert!(gap.abs() <= 1e-10 * (1.0 + (1.0 / x).abs()));
    }

    #[test]
    fn root_bracket_width_within_tol(c in -1.9f64..1.9, tol_exp in 4i32..12) {
        let tol = 10f64.powi(-tol_exp);
        let f = |x: f64| x * x * x - c;
        let r = find_root(f, Bracket::new(-2.0, 2.0).unwrap(), tol).unwrap();
        prop_assert!((r - c.cbrt()).abs() <= tol);
    }

    #[test]
    fn concave_quadratic_vertex(a in 0.1f64..10.0, v in -9.0f64..9.0) {
        let tol = 1e-8;
        let m = maximize_concave(|x| -a * (x - v) * (x - v), Bracket::new(-10.0, 10.0).unwrap(), tol).unwrap();
        prop_assert!((m.argmax - v).abs() <= tol);
    }
}
