mod common;

use milac::channel_model::{build_channel_model, SystemConfig};
use milac::harness::PointSetup;
use milac::linalg::{gaussian_matrix, max_abs_diff, rng_from_seed};
use milac::mmse_estimation::{
    allocate_training_power, theoretical_mmse, MmseEstimatorDiagonal, PowerAllocation,
};

#[test]
fn closed_form_mmse_matches_dense_trace() {
    for (n, snr_db) in [(2, 0.0), (3, 10.0), (4, -5.0), (4, 25.0)] {
        let setup = PointSetup::new(n, n, snr_db, 0.8, 0.6, 1.0, 1).unwrap();
        let x_v = setup.model.u_tx.adjoint() * &setup.mmse_x;
        let dense = common::dense_mmse_trace(&x_v, &setup.model.r_v, setup.config.noise_power, n);
        let closed = theoretical_mmse(
            &setup.model.r_v,
            &setup.allocation,
            setup.config.noise_power,
        )
        .unwrap();
        assert!(
            (dense - closed).abs() <= 1e-9 * closed,
            "n={n} snr={snr_db}: {dense} vs {closed}"
        );
    }
}

#[test]
fn diagonal_estimator_matches_dense_for_any_allocation() {
    let mut rng = rng_from_seed(11);
    let sys = SystemConfig::with_snr_db(3, 2, 5.0).unwrap();
    let model = build_channel_model(&sys, 0.7, 0.4).unwrap();
    let alloc = PowerAllocation::uniform(3, 1.0);
    let est = MmseEstimatorDiagonal::new(&model.r_v, &alloc, sys.noise_power, 2).unwrap();
    let x_v = milac::linalg::real_diag(&alloc.p.iter().map(|p| p.sqrt()).collect::<Vec<_>>());
    for _ in 0..20 {
        let y_v = gaussian_matrix(&mut rng, 2, 3, 1.0);
        let dense = common::dense_mmse_estimate(&y_v, &x_v, &model.r_v, sys.noise_power);
        let mut diag = y_v.clone();
        for t in 0..3 {
            diag.set_column(t, &(est.block(t) * y_v.column(t)));
        }
        assert!(max_abs_diff(&diag, &dense) < 1e-12);
    }
}

#[test]
fn two_direction_reference_instance() {
    let r_v = [1.8, 0.2];
    let alloc = allocate_training_power(&r_v, 1.0, 1.0, 2, 1).unwrap();
    let brute = common::brute_force_two_directions(&r_v, 1.0, 1.0, 1);
    assert!((alloc.objective - brute).abs() <= 1e-8);
    assert!((alloc.p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
}

#[test]
fn kronecker_helper_is_consistent_with_vectorization() {
    let mut rng = rng_from_seed(3);
    let a = gaussian_matrix(&mut rng, 2, 3, 1.0);
    let x = gaussian_matrix(&mut rng, 3, 4, 1.0);
    // vec(A X) = (X^T ⊗ I) vec(A)
    let lhs = common::vectorize(&(&a * &x));
    let rhs = common::kron(&x.transpose(), &milac::linalg::CMatrix::identity(2, 2))
        * common::vectorize(&a);
    assert!(max_abs_diff(&lhs, &rhs) < 1e-12);
}
