use approx::assert_relative_eq;
use proptest::prelude::*;
use pssmp::moments::*;
use pssmp::numerics::special::ln_gamma;
use pssmp::sim::SimConfig;
use pssmp::{Error, LevyModel};

fn brownian() -> LevyModel {
    LevyModel::brownian(1.0).unwrap()
}

#[test]
fn brownian_recursion_matches_gamma_law() {
    for nu in [0.5, 1.0, 2.5] {
        let m = LevyModel::brownian(nu).unwrap();
        let ledger = negative_moments(&m, 10).unwrap();
        assert_eq!(ledger.rows.len(), 11);
        for row in &ledger.rows {
            let r = -row.s;
            let exact = (r * 2f64.ln() + ln_gamma(nu + r).unwrap() - ln_gamma(nu).unwrap()).exp();
            assert_relative_eq!(row.value, exact, max_relative = 1e-12);
            assert_relative_eq!(
                exact_moment(&m, row.s).unwrap(),
                exact,
                max_relative = 1e-12
            );
        }
    }
}

#[test]
fn recursion_ratio_for_unit_drift() {
    let l = negative_moments(&brownian(), 6).unwrap();
    for w in l.rows.windows(2) {
        let r = -w[0].s;
        assert_relative_eq!(
            w[1].value / w[0].value,
            2.0 * (r + 1.0),
            max_relative = 1e-13
        );
    }
}

#[test]
fn mc_negative_first_moment_is_drift() {
    let r = mc_exp_functional(&brownian(), -1.0, &SimConfig::new(31, 10_000)).unwrap();
    assert!(r.covers(2.0, 3.0), "{r}");
    let r2 = mc_exp_functional(&brownian(), -2.0, &SimConfig::new(32, 10_000)).unwrap();
    assert!(r2.covers(8.0, 3.0), "{r2}");
}

#[test]
fn mc_f_value_matches_gamma_formula() {
    let tilted = brownian().esscher(0.5).unwrap();
    let exact = exact_moment(&tilted, -0.5).unwrap();
    let r = mc_exp_functional(&tilted, -0.5, &SimConfig::new(33, 10_000)).unwrap();
    assert!(r.covers(exact, 3.0), "{r} vs {exact}");
}

#[test]
fn f_of_m_by_monte_carlo_for_jump_families() {
    let m = LevyModel::sawtooth(1.0, 3.0).unwrap();
    let f = F_of_m(&m, 0.0, &SimConfig::new(34, 2000)).unwrap();
    assert_eq!(f.method, MomentMethod::MonteCarlo);
    // At m = 0 the order is −1 and E I^{−1} = ψ'(0).
    assert!(f.mc.unwrap().covers(m.mean(), 3.0), "{f}");
}

#[test]
fn recursion_consistency_across_grid_families() {
    let models = [
        brownian(),
        LevyModel::cp_plus(1.0, 2.0, 3.0).unwrap(),
        LevyModel::cp_minus(4.0, 2.0).unwrap(),
        LevyModel::sawtooth(1.0, 3.0).unwrap(),
    ];
    for m in models {
        let cfg = SimConfig::new(35, 10_000);
        let one = mc_exp_functional(&m, -1.0, &cfg).unwrap();
        let two = mc_exp_functional(&m, -2.0, &cfg).unwrap();
        let phi1 = m.psi(1.0).unwrap();
        let lhs = one.estimate * phi1;
        let se = ((phi1 * one.stderr).powi(2) + two.stderr.powi(2)).sqrt();
        let slack = phi1 * one.bias_bound + two.bias_bound;
        assert!(
            (lhs - two.estimate).abs() <= 3.0 * se + slack,
            "{m}: {lhs} vs {}",
            two.estimate
        );
    }
}

#[test]
fn unknown_finiteness_is_refused() {
    let m = LevyModel::cp_minus(2.0, 1.0).unwrap();
    let r = mc_exp_functional(&m, -2.5, &SimConfig::new(1, 10));
    assert!(matches!(r, Err(Error::FinitenessUnknown { .. })));
    let r = mc_exp_functional(&brownian(), 1.0, &SimConfig::new(1, 10));
    assert!(matches!(r, Err(Error::Domain(_))));
}

#[test]
fn ledger_rows_respect_invariants() {
    let l = moment_ledger(
        &brownian(),
        &[-3.0, -1.0, -0.5, 0.5, 1.0, 2.0],
        &SimConfig::new(2, 10),
    )
    .unwrap();
    for r in &l.rows {
        if !r.finite {
            assert_eq!(r.value, f64::INFINITY);
            assert_ne!(r.method, MomentMethod::MonteCarlo);
        }
    }
    let saw = LevyModel::sawtooth(1.0, 3.0).unwrap();
    let l = moment_ledger(&saw, &[-2.0, -0.5], &SimConfig::new(2, 200)).unwrap();
    assert_eq!(l.rows[0].method, MomentMethod::Recursion);
    assert_eq!(l.rows[1].method, MomentMethod::MonteCarlo);
    assert!(l.rows[1].stderr.is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn positive_finiteness_region_is_an_interval(idx in 0usize..4, s in 0.01f64..6.0, u in 0.0f64..1.0) {
        let m = [brownian(), LevyModel::cp_plus(1.0, 2.0, 3.0).unwrap(),
            LevyModel::cp_minus(4.0, 2.0).unwrap(), LevyModel::sawtooth(1.0, 3.0).unwrap()][idx];
        if moment_finite(&m, s).unwrap().is_finite() {
            let s2 = s * u.max(1e-3);
            prop_assert!(moment_finite(&m, s2).unwrap().is_finite());
        }
    }

    #[test]
    fn brownian_finiteness_matches_gamma_law(nu in 0.1f64..4.0, s in 0.01f64..5.0) {
        let m = LevyModel::brownian(nu).unwrap();
        prop_assert_eq!(moment_finite(&m, s).unwrap().is_finite(), s < nu);
    }
}
