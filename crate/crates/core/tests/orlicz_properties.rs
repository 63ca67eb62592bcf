use orlicz_lab::orlicz::{
    check_closeness, check_ratio, closeness, cordes_threshold, find_transfer_radius, growth_rate, make_family, mollify,
    ratio, LogGridSpec,
};
use orlicz_lab::quadrature::log_grid;
use orlicz_lab::{FamilySpec, OrliczFunction, Profile};
use proptest::prelude::*;

fn base_spec() -> impl Strategy<Value = FamilySpec> {
    prop_oneof![
        (1.2f64..6.0).prop_map(|p| FamilySpec::Power { p }),
        (1.2f64..4.0, 0.0f64..2.5, 0.1f64..3.0).prop_map(|(p, dq, a)| FamilySpec::SumPowers { p, q: p + dq, a }),
        (1.5f64..5.0, -0.4f64..0.4, 1.5f64..4.0).prop_map(|(p, alpha, c)| FamilySpec::PowerLog { p, alpha, c }),
        Just(FamilySpec::Quadratic),
    ]
}

fn any_spec() -> impl Strategy<Value = FamilySpec> {
    prop_oneof![
        3 => base_spec(),
        1 => base_spec().prop_map(|b| FamilySpec::DerivedSqrt { base: Box::new(b) }),
    ]
}

fn standard_grid() -> Vec<f64> {
    log_grid(1e-6, 1e6, 256)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn growth_stays_in_envelope(spec in any_spec()) {
        let f = make_family(&spec).unwrap();
        let env = f.envelope();
        for t in standard_grid() {
            let nu = growth_rate(&f, t).unwrap();
            prop_assert!(nu >= env.p() - 1.0 - 1e-9 && nu <= env.q() - 1.0 + 1e-9, "{spec}: nu({t}) = {nu}");
        }
    }

    #[test]
    fn closeness_within_envelope_bounds(a in any_spec(), b in any_spec()) {
        let phi = make_family(&a).unwrap();
        let psi = make_family(&b).unwrap();
        let (ep, eq) = (phi.envelope(), psi.envelope());
        let lo = (ep.p() - 1.0) / (eq.q() - 1.0);
        let hi = (ep.q() - 1.0) / (eq.p() - 1.0);
        for t in standard_grid() {
            let th = closeness(&phi, &psi, t).unwrap();
            prop_assert!(th >= lo * (1.0 - 1e-9) && th <= hi * (1.0 + 1e-9), "theta({t}) = {th} not in [{lo}, {hi}]");
        }
        let rep = check_closeness(&phi, &psi, 2, &LogGridSpec::standard()).unwrap();
        prop_assert!(rep.s_theta <= hi * (1.0 + 1e-9));
    }

    #[test]
    fn ratio_is_comparable_to_value_quotient(a in any_spec(), b in any_spec()) {
        let phi = make_family(&a).unwrap();
        let psi = make_family(&b).unwrap();
        let (ep, eq) = (phi.envelope(), psi.envelope());
        let lo = eq.p() / ep.q();
        let hi = eq.q() / ep.p();
        for t in log_grid(1e-3, 1e3, 64) {
            let q = ratio(&phi, &psi, t).unwrap() / (psi.value(t) / phi.value(t));
            prop_assert!(q >= lo * (1.0 - 1e-8) && q <= hi * (1.0 + 1e-8), "{a} / {b}: {q} at t = {t}");
        }
    }

    #[test]
    fn bounded_ratio_controls_derivative_quotient(a in any_spec(), b in any_spec()) {
        let phi = make_family(&a).unwrap();
        let psi = make_family(&b).unwrap();
        let rep = check_ratio(&phi, &psi).unwrap();
        prop_assume!(rep.finite);
        let c = rep.s_rho.max(1.0 / phi.deriv(1.0));
        for t in log_grid(1e-6, 1e6, 128) {
            let lhs = psi.deriv(t) / phi.deriv(t);
            prop_assert!(lhs <= c * (1.0 + psi.deriv(t)) * (1.0 + 1e-9), "{lhs} at t = {t}");
        }
    }
}

#[test]
fn growth_transfers_to_mollified_pair() {
    let phi = OrliczFunction::power(3.0).unwrap();
    let psi = OrliczFunction::derived_sqrt(phi.spec()).unwrap();
    let rep = check_closeness(&phi, &psi, 3, &LogGridSpec::standard()).unwrap();
    assert!(rep.satisfied);
    let (eps, m) = (1e-4, 5.0);
    let tc = find_transfer_radius(&phi, &psi, rep.s_theta, 3, eps, m, 32).unwrap();
    let cap = 0.5 * (rep.s_theta + cordes_threshold(3));
    for kappa in [tc.kappa0, 0.5 * tc.kappa0, 0.1 * tc.kappa0] {
        let pk = mollify(&phi, kappa, 32).unwrap();
        let qk = mollify(&psi, kappa, 32).unwrap();
        for t in log_grid(eps.sqrt(), m, 64) {
            let nu = pk.growth(t);
            assert!((1.0..=3.0).contains(&nu), "nu_k({t}) = {nu}");
            assert!(nu / qk.growth(t) <= cap + 1e-12);
        }
    }
}

#[test]
fn mollification_error_shrinks_along_ladder() {
    let phi = OrliczFunction::sum_powers(2.5, 3.5, 0.5).unwrap();
    let eps: f64 = 0.04;
    let ts = log_grid(eps.sqrt(), 10.0, 64);
    let mut prev = [f64::INFINITY; 3];
    for k in 0..5 {
        let kappa = 0.1 * 2f64.powi(-k) * eps.sqrt();
        let pk = mollify(&phi, kappa, 64).unwrap();
        let mut err = [0.0f64; 3];
        for &t in &ts {
            err[0] = err[0].max((pk.value(t) - phi.value(t)).abs());
            err[1] = err[1].max((pk.deriv(t) - phi.deriv(t)).abs());
            err[2] = err[2].max((pk.deriv2(t) - phi.deriv2(t)).abs());
        }
        for i in 0..3 {
            assert!(err[i] < prev[i], "k = {k}, component {i}: {} !< {}", err[i], prev[i]);
        }
        prev = err;
    }
}
