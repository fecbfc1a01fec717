use proptest::prelude::*;
use squeeze_core::fock::{density_matrix, photon_distribution};
use squeeze_core::{
    apply_loss, infer_loss, mean_photon_number, purity, GaussianState, LossChannel,
    VarianceConvention,
};

fn convention() -> impl Strategy<Value = VarianceConvention> {
    prop_oneof![
        Just(VarianceConvention::Quarter),
        Just(VarianceConvention::Half),
        Just(VarianceConvention::Unity),
    ]
}

/// Pure squeezed state with `v1` from about -20 dB to vacuum.
fn pure_state() -> impl Strategy<Value = GaussianState> {
    (0.01f64..1.0).prop_map(|v1| GaussianState::pure(v1).unwrap())
}

proptest! {
    #[test]
    fn convention_round_trip(v1 in 0.05f64..1.0, excess in 1.0f64..10.0, a in convention(), b in convention()) {
        let s = GaussianState::new(v1, excess / v1, VarianceConvention::Unity).unwrap().to_convention(a);
        let back = s.to_convention(b).to_convention(a);
        prop_assert_eq!(back, s);
    }

    #[test]
    fn loss_keeps_states_physical(s in pure_state(), eta in 0.01f64..=1.0) {
        let lossy = apply_loss(&s, LossChannel::new(eta).unwrap()).unwrap();
        prop_assert!(lossy.v1() >= s.v1() - 1e-15 && lossy.v1() <= 1.0 + 1e-15);
        prop_assert!(lossy.v2() <= s.v2() + 1e-12 && lossy.v2() >= 1.0 - 1e-15);
        prop_assert!(lossy.v1() * lossy.v2() >= 1.0 - 1e-12);
        let p = purity(&lossy);
        prop_assert!(p > 0.0 && p <= 1.0 + 1e-12);
    }

    #[test]
    fn loss_channels_compose(s in pure_state(), a in 0.05f64..=1.0, b in 0.05f64..=1.0) {
        let twice = apply_loss(&apply_loss(&s, LossChannel::new(a).unwrap()).unwrap(), LossChannel::new(b).unwrap()).unwrap();
        let once = apply_loss(&s, LossChannel::new(a * b).unwrap()).unwrap();
        prop_assert!((twice.v1() - once.v1()).abs() < 1e-12 * once.v2());
        prop_assert!((twice.v2() - once.v2()).abs() < 1e-12 * once.v2());
    }

    #[test]
    fn infer_inverts_apply(v1s in prop::collection::vec(0.05f64..0.9, 1..4), eta in 0.5f64..0.99) {
        let channel = LossChannel::new(eta).unwrap();
        let measured: Vec<GaussianState> = v1s
            .iter()
            .map(|&v| apply_loss(&GaussianState::pure(v).unwrap(), channel).unwrap())
            .collect();
        let est = infer_loss(&measured).unwrap();
        prop_assert!((est.loss.eta_gamma() - eta).abs() < 1e-10, "{} vs {}", est.loss.eta_gamma(), eta);
        for (pure, &v) in est.pure_states.iter().zip(&v1s) {
            prop_assert!((pure.v1() - v).abs() < 1e-9);
        }
    }

    #[test]
    fn photon_distribution_is_a_distribution(s in pure_state(), eta in 0.3f64..=1.0) {
        let lossy = apply_loss(&s, LossChannel::new(eta).unwrap()).unwrap();
        let n = 120;
        let rho = density_matrix(&lossy, n);
        let pd = photon_distribution(&rho);
        prop_assert!(pd.probabilities().iter().all(|&p| p >= -1e-15));
        prop_assert!(pd.total() <= 1.0 + 1e-10);
        if rho.trace_deficit() < 1e-9 {
            prop_assert!((pd.mean() - mean_photon_number(&lossy)).abs() < 1e-6 * (1.0 + pd.mean()));
        }
        for m in 0..8 {
            for k in 0..8 {
                prop_assert!((rho.get(m, k) - rho.get(k, m)).abs() == 0.0);
            }
        }
    }
}
