//! MiLAC MMSE estimation with optimized training power, compared with the
//! closed-form error and the digital estimator.

use milac::channel_model::sample_channel;
use milac::harness::{simulate_point, thread_pool, PointSetup};
use milac::linalg::{max_abs_diff, rng_from_seed};
use milac::ls_estimation::draw_noise;
use milac::metrics::Scheme;
use milac::mmse_estimation::{digital_mmse_baseline, run_milac_mmse, theoretical_mmse};

fn main() -> milac::Result<()> {
    let setup = PointSetup::new(8, 8, 5.0, 0.8, 0.8, 1.0, 1)?;

    let h = sample_channel(&setup.model, 1);
    let noise = draw_noise(&mut rng_from_seed(2), &setup.config);
    let analog = run_milac_mmse(&h, &setup.model, &setup.mmse_schedule, &noise)?;
    let y = &h.h * &setup.mmse_x + &noise;
    let digital = digital_mmse_baseline(&y, &setup.model, &setup.allocation, &setup.config)?;
    println!(
        "analog vs digital    {:.2e}",
        max_abs_diff(&analog.h_v_hat, &digital.h_hat)
    );

    let pool = thread_pool(4)?;
    let acc = simulate_point(
        &setup,
        &[Scheme::MilacMmse, Scheme::MilacLs],
        5_000,
        3,
        &pool,
    )?;
    let theory = theoretical_mmse(
        &setup.model.r_v,
        &setup.allocation,
        setup.config.noise_power,
    )?;
    println!(
        "MSE (Monte Carlo)    {:.4}",
        acc[&Scheme::MilacMmse].mean_error()
    );
    println!("MSE (closed form)    {theory:.4}");
    println!(
        "NMSE MMSE / LS       {:.4} / {:.4}",
        acc[&Scheme::MilacMmse].nmse()?,
        acc[&Scheme::MilacLs].nmse()?
    );
    Ok(())
}
