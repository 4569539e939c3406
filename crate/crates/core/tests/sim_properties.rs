use approx::assert_abs_diff_eq;
use proptest::prelude::*;
use pssmp::exec::Exec;
use pssmp::sim::*;
use pssmp::{Error, LevyModel};

fn brownian() -> LevyModel {
    LevyModel::brownian(1.0).unwrap()
}

#[test]
fn brownian_clock_mean_matches_exact_finite_t_value() {
    let target = SimTarget::Levy(brownian());
    let cfg = SimConfig::new(21, 4000);
    let t = 6f64.exp();
    let rec = estimate_lln(&target, &cfg, &[t]).unwrap();
    let exact = exact_clock_mean(&target, &cfg, t).unwrap() / t.ln();
    let z = (rec.rows[0].estimate - exact) / rec.rows[0].stderr;
    assert!(z.abs() <= 3.0, "z = {z}");
}

#[test]
fn cauchy_clock_mean_matches_exact_finite_t_value() {
    let target = SimTarget::CauchyModulus { dim: 3 };
    let cfg = SimConfig::new(22, 3000);
    let t = 6f64.exp();
    let rec = estimate_lln(&target, &cfg, &[t]).unwrap();
    let exact = exact_clock_mean(&target, &cfg, t).unwrap() / t.ln();
    let z = (rec.rows[0].estimate - exact) / rec.rows[0].stderr;
    assert!(z.abs() <= 3.0, "z = {z}");
}

#[test]
fn clock_mean_scales_with_start() {
    let target = SimTarget::Levy(brownian());
    let t = 200.0;
    let a = SimConfig::new(23, 3000).with_start(4.0);
    let rec = estimate_lln(&target, &a, &[t]).unwrap();
    let exact = exact_clock_mean(&target, &a, t).unwrap() / t.ln();
    assert!(((rec.rows[0].estimate - exact) / rec.rows[0].stderr).abs() <= 3.0);
}

#[test]
fn pathwise_support_bounds() {
    let cp = LevyModel::cp_plus(1.0, 2.0, 1.0).unwrap();
    let saw = LevyModel::sawtooth(1.0, 3.0).unwrap();
    let t = 1e4f64;
    let cfg = SimConfig::new(5, 1);
    for id in 0..5000u64 {
        let c = clock_samples(&cp, &cfg, id, &[t]).unwrap()[0].tau;
        assert!(
            c <= (1.0 + t).ln() * (1.0 + 1e-12),
            "cp-plus path {id}: {c}"
        );
        let s = clock_samples(&saw, &cfg, id, &[t]).unwrap()[0].tau;
        assert!(s >= t.ln() * (1.0 - 1e-12), "sawtooth path {id}: {s}");
    }
}

#[test]
fn log_a_rate_matches_drift() {
    let rec = estimate_logA_rate(&brownian(), &SimConfig::new(8, 2000), 50.0).unwrap();
    let z = rec.z_scores()[0];
    assert!(z.abs() <= 3.0, "{rec}");
}

#[test]
fn first_passage_matches_inverse_exponent() {
    for model in [brownian(), LevyModel::sawtooth(1.0, 3.0).unwrap()] {
        for theta in [-0.25, -1.0] {
            let r = first_passage_check(&model, &SimConfig::new(9, 4000), theta, 1e3).unwrap();
            let z = (r.rhs - r.analytic_l) / r.rhs_stderr;
            assert!(z.abs() <= 3.0, "{model} theta={theta}: {r}");
        }
    }
}

#[test]
fn tilted_identity_for_sawtooth() {
    let m = LevyModel::sawtooth(1.0, 3.0).unwrap();
    let r = tilted_identity_check(&m, 0.5, 2.0, 1.0, &SimConfig::new(10, 20000)).unwrap();
    assert!(r.z.abs() <= 3.0, "{r}");
}

#[test]
fn tilted_identity_rejects_m_outside_window() {
    let r = tilted_identity_check(&brownian(), -0.7, 2.0, 1.0, &SimConfig::new(10, 10));
    assert!(matches!(r, Err(Error::Domain(_))));
}

#[test]
fn self_similarity_two_sample() {
    let grid = scaling_check(
        &SimTarget::Levy(brownian()),
        &SimConfig::new(11, 2000),
        3.0,
        50.0,
    )
    .unwrap();
    assert!(grid.p_value > 1e-3, "{grid:?}");
    let cauchy = scaling_check(
        &SimTarget::CauchyModulus { dim: 3 },
        &SimConfig::new(12, 2000),
        2.0,
        5.0,
    )
    .unwrap();
    assert!(cauchy.p_value > 1e-3, "{cauchy:?}");
}

#[test]
fn clt_report_for_brownian() {
    let r = estimate_clt(&SimTarget::Levy(brownian()), &SimConfig::new(13, 1000), 1e4).unwrap();
    assert_eq!(r.target_variance, 0.5);
    assert!(r.ks > 0.0 && r.ks < 1.0);
    assert!(r.to_string().contains("ks_p_value"));
}

#[test]
fn ldp_slope_is_positive_away_from_the_mean() {
    let ts: Vec<f64> = [4.0f64, 6.0, 8.0].iter().map(|v| v.exp()).collect();
    let r = estimate_ldp_slope(
        &SimTarget::Levy(brownian()),
        &SimConfig::new(14, 4000),
        1.0,
        None,
        &ts,
    )
    .unwrap();
    assert!(r.slope > 0.0, "{r}");
    assert_eq!(r.reference, 0.125);
}

#[test]
fn ldp_at_the_mean_needs_explicit_window() {
    let ts = [10.0, 100.0, 1000.0];
    let t = SimTarget::Levy(brownian());
    assert!(matches!(
        estimate_ldp_slope(&t, &SimConfig::new(1, 10), 0.5, None, &ts),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        estimate_ldp_slope(&t, &SimConfig::new(1, 10), 1.0, None, &ts[..2]),
        Err(Error::Domain(_))
    ));
}

#[test]
fn horizon_exhaustion_is_reported() {
    let slow = LevyModel::brownian(0.05).unwrap();
    let mut cfg = SimConfig::new(15, 200);
    cfg.max_doublings = 0;
    let r = estimate_lln(&SimTarget::Levy(slow), &cfg, &[1e3]);
    assert!(matches!(r, Err(Error::HorizonExceeded { .. })), "{r:?}");
}

#[test]
fn unsupported_family_is_a_capability_error() {
    let m = LevyModel::stable_conditioned(1.5, 1.0).unwrap();
    let r = estimate_lln(&SimTarget::Levy(m), &SimConfig::new(1, 2), &[10.0]);
    assert!(matches!(r, Err(Error::Capability(_))));
}

#[test]
fn records_do_not_depend_on_scheduling() {
    let targets = [
        SimTarget::Levy(brownian()),
        SimTarget::CauchyModulus { dim: 3 },
    ];
    for t in targets {
        let seq = SimConfig::new(16, 300).with_exec(Exec::Sequential);
        let par = seq.with_exec(Exec::Parallel);
        let a = estimate_lln(&t, &seq, &[100.0, 1e4]).unwrap();
        let b = estimate_lln(&t, &par, &[100.0, 1e4]).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(
            estimate_clt(&t, &seq, 1e3).unwrap().ks,
            estimate_clt(&t, &par, 1e3).unwrap().ks
        );
    }
}

#[test]
fn deterministic_drift_clock_is_exact() {
    let m = LevyModel::cp_plus(2.0, 0.0, 1.0).unwrap();
    let s = clock_samples(&m, &SimConfig::new(0, 1), 0, &[10.0, 1e5]).unwrap();
    for c in s {
        assert_abs_diff_eq!(c.tau, (1.0 + 2.0 * c.t).ln() / 2.0, epsilon = 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lamperti_clock_inverts_exponential_functional(
        idx in 0usize..4, seed in 0u64..1000, a in 0.2f64..5.0, t in 0.5f64..200.0
    ) {
        let model = [brownian(), LevyModel::cp_plus(1.0, 2.0, 1.0).unwrap(),
            LevyModel::cp_minus(4.0, 2.0).unwrap(), LevyModel::sawtooth(1.0, 3.0).unwrap()][idx];
        let cfg = SimConfig::new(seed, 1).with_start(a);
        let c = clock_samples(&model, &cfg, 3, &[t]).unwrap()[0];
        prop_assert!((c.tau - c.t_clock).abs() <= 1e-9 * (1.0 + c.tau), "{:?}", c);
        let grid = sample_levy_path(&model, &cfg.with_horizon(c.tau + 1.0), 3).unwrap();
        let a_at_tau = exp_functional(&grid, 1.0).unwrap().value(c.tau);
        prop_assert!((a_at_tau - t).abs() <= 1e-9 * t);
    }

    #[test]
    fn same_seed_same_path(seed in 0u64..10_000, id in 0u64..10_000) {
        let cfg = SimConfig::new(seed, 1);
        let m = LevyModel::cp_minus(4.0, 2.0).unwrap();
        prop_assert_eq!(sample_levy_path(&m, &cfg, id).unwrap(), sample_levy_path(&m, &cfg, id).unwrap());
    }
}
