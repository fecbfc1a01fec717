use squeeze_core::fock::{density_matrix, oracle_density_matrix, photon_distribution};
use squeeze_core::{mean_photon_number, purity, GaussianState};

const MATRIX_STATES: [(f64, f64); 3] = [(-2.84, 2.94), (-6.2, 6.7), (-11.5, 16.0)];

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn oracle_agrees_with_closed_form_on_measured_states() {
    for (a, b) in MATRIX_STATES {
        let s = GaussianState::from_db(a, b).unwrap();
        let closed = density_matrix(&s, 10);
        let oracle = oracle_density_matrix(&s, 10).unwrap();
        let diff = max_abs_diff(closed.entries(), oracle.matrix.entries());
        assert!(
            diff < 1e-6,
            "{a} dB: {diff} (workspace {})",
            oracle.workspace_dim
        );
    }
}

#[test]
fn strong_pure_squeezing_oracle() {
    let s = GaussianState::from_db(-16.0, 16.0).unwrap();
    let closed = density_matrix(&s, 10);
    let oracle = oracle_density_matrix(&s, 10).unwrap();
    assert!(max_abs_diff(closed.entries(), oracle.matrix.entries()) < 1e-6);
}

#[test]
fn trace_convergence_at_170() {
    let deficits: Vec<f64> = MATRIX_STATES
        .iter()
        .map(|&(a, b)| density_matrix(&GaussianState::from_db(a, b).unwrap(), 170).trace_deficit())
        .collect();
    assert!(deficits[0].abs() < 1e-6);
    assert!(deficits[1].abs() < 1e-6);
    // the 16 dB anti-squeezed state still holds 3.4e-5 of its weight above n = 170
    assert!((deficits[2] - 3.39e-5).abs() < 1e-6, "{}", deficits[2]);
    let deeper = density_matrix(&GaussianState::from_db(-11.5, 16.0).unwrap(), 400);
    assert!(deeper.trace_deficit() < 1e-6);
}

#[test]
fn purity_and_mean_cross_checks() {
    for (a, b) in MATRIX_STATES {
        let s = GaussianState::from_db(a, b).unwrap();
        let dm = density_matrix(&s, 400);
        assert!((dm.purity() - purity(&s)).abs() < 1e-3, "{a}");
        let mean = photon_distribution(&dm).mean();
        let analytic = mean_photon_number(&s);
        assert!(
            (mean - analytic).abs() < 1e-3 * analytic,
            "{a}: {mean} vs {analytic}"
        );
    }
}
