use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use squeeze_core::presets;
use squeeze_core::spectrum::{
    fit_spectrum, model_variances, spectral_photon_rate, FitTraces, SpectrumData, SpectrumModel,
};
use squeeze_core::{apply_loss, GaussianState, LossChannel, VarianceConvention};

/// Seed of the noisy-fit calibration run.
const NOISE_SEED: u64 = 20_240_611;

fn grid() -> Vec<f64> {
    (0..20).map(|i| 5e6 + 5e6 * i as f64).collect()
}

fn noisy_data(truth: &SpectrumModel, rng: &mut ChaCha20Rng) -> SpectrumData {
    let f = grid();
    let mut jitter = |v: f64| v * 10f64.powf(0.2 * rng.sample::<f64, _>(StandardNormal) / 10.0);
    let (v1, v2): (Vec<f64>, Vec<f64>) = f
        .iter()
        .map(|&f| {
            let (a, b) = truth.variances(f);
            (jitter(a), jitter(b))
        })
        .unzip();
    SpectrumData::new(f, v1, v2, 1e6).unwrap()
}

#[test]
fn noisy_joint_fit_recovers_pump_ratio() {
    let truth = presets::spectrum_model();
    let init = SpectrumModel::new(0.4, 0.9, 0.8e9).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(NOISE_SEED);
    let mut worst = 0f64;
    for _ in 0..20 {
        let data = noisy_data(&truth, &mut rng);
        let fit = fit_spectrum(&data, &init, FitTraces::Joint).unwrap();
        assert!(fit.residual <= fit.initial_residual);
        let err = (fit.model.pump_ratio() / truth.pump_ratio() - 1.0).abs();
        worst = worst.max(err);
    }
    println!("worst relative pump error over 20 noisy spectra: {worst:.4}");
    assert!(worst < 0.05, "{worst}");
}

#[test]
fn dc_limit_matches_loss_model() {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    for _ in 0..10 {
        let p: f64 = rng.random_range(0.01..0.95);
        let eta: f64 = rng.random_range(0.05..1.0);
        let kappa: f64 = rng.random_range(1e8..1e10);
        let model = SpectrumModel::new(p, eta, kappa).unwrap();
        let (v1, v2) = model_variances(&model, 0.0).unwrap();
        let s = p.sqrt();
        let pure = GaussianState::new(
            (1.0 - s).powi(2) / (1.0 + s).powi(2),
            (1.0 + s).powi(2) / (1.0 - s).powi(2),
            VarianceConvention::Unity,
        )
        .unwrap();
        let lossy = apply_loss(&pure, LossChannel::new(eta).unwrap()).unwrap();
        assert!((v1 - lossy.v1()).abs() <= 1e-12 * v1.max(1.0));
        assert!((v2 - lossy.v2()).abs() <= 1e-12 * v2.max(1.0));
    }
}

#[test]
fn variances_are_monotone_in_frequency() {
    let model = presets::spectrum_model();
    let (mut last1, mut last2) = model.variances(0.0);
    for k in 1..2000 {
        let (v1, v2) = model.variances(k as f64 * 2.5e6);
        assert!(v1 > last1 && v1 < 1.0);
        assert!(v2 < last2 && v2 > 1.0);
        (last1, last2) = (v1, v2);
    }
}

#[test]
fn rate_converges_under_bin_refinement() {
    let model = presets::spectrum_model();
    let coarse = spectral_photon_rate(&model, presets::HALF_FSR, presets::BIN_WIDTH, 170).unwrap();
    let fine =
        spectral_photon_rate(&model, presets::HALF_FSR, presets::BIN_WIDTH / 2.0, 170).unwrap();
    let change = (fine.rate / coarse.rate - 1.0).abs();
    assert!(change < 1e-3, "{change}");
    assert_eq!(fine.bins, 2 * coarse.bins);
}
