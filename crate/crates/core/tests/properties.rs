use dualhahn::bivariate::Eigenbasis;
use dualhahn::dynamics::{SpectralPropagator, Time};
use dualhahn::transfer::{check_phase_condition, family_membership, family_params, PstFamily, PstFamilySpec};
use dualhahn::{ModelParams, Rational};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = PstFamily> {
    prop_oneof![Just(PstFamily::OddPeriod), Just(PstFamily::EvenPeriod)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn family_member_satisfies_phase_condition(f in family(), k in 1u32..=2, p in 1u32..=60, q in 1u32..=60, n in 1u32..=6) {
        let fp = family_params(PstFamilySpec::new(f, k, p, q), n).unwrap();
        prop_assume!(fp.is_admissible());
        prop_assert!(check_phase_condition(&fp.params, &fp.spec.period()));
        prop_assert_eq!(fp.params.b, fp.params.c * 2 + Rational::from_integer(2 * i64::from(n) - 1));
        let found = family_membership(&fp.params).unwrap();
        prop_assert_eq!(family_params(found, n).unwrap().params, fp.params);
        prop_assert!(found.k <= k);
    }

    #[test]
    fn propagator_is_unitary_and_reversible(num in -400i64..400, den in 1i64..12, real in -50.0f64..50.0) {
        let basis = Eigenbasis::new(&ModelParams::figure2()).unwrap();
        for t in [Time::pi(num, den), Time::Real(real)] {
            let u = SpectralPropagator::new(&basis, t).matrix();
            let v = SpectralPropagator::new(&basis, -t).matrix();
            let n = basis.dimension();
            for s in 0..n {
                let total: f64 = (0..n).map(|d| u[s * n + d].norm_sqr()).sum();
                prop_assert!((total - 1.0).abs() < 1e-10);
                for d in 0..n {
                    prop_assert!((u[s * n + d] - u[d * n + s]).norm() < 1e-12);
                    prop_assert!((u[s * n + d].conj() - v[s * n + d]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn time_display_round_trips(num in -1000i64..1000, den in 1i64..50, real in proptest::num::f64::NORMAL) {
        for t in [Time::pi(num, den), Time::Real(real)] {
            prop_assert_eq!(t.to_string().parse::<Time>().unwrap(), t);
        }
    }

    #[test]
    fn symbolic_and_real_times_agree(num in -60i64..60, den in 1i64..8) {
        let basis = Eigenbasis::new(&ModelParams::figure1()).unwrap();
        let sym = Time::pi(num, den);
        let u = SpectralPropagator::new(&basis, sym).matrix();
        let v = SpectralPropagator::new(&basis, Time::Real(sym.value())).matrix();
        for (a, b) in u.iter().zip(&v) {
            prop_assert!((a - b).norm() < 1e-9);
        }
    }
}

#[test]
fn phase_condition_fails_off_period() {
    let p = ModelParams::figure1();
    for t in [Time::pi(1, 1), Time::pi(3, 2), Time::pi(2, 1), Time::Real(1.0)] {
        assert!(!check_phase_condition(&p, &t), "{t}");
    }
    assert!(!check_phase_condition(&p, &Time::pi(6, 1)));
    assert!(check_phase_condition(&p, &Time::pi(-3, 1)));
}
