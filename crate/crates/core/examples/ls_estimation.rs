//! One MiLAC LS estimate next to its digital counterpart.

use milac::channel_model::{build_channel_model, sample_channel, SystemConfig};
use milac::linalg::{max_abs_diff, rng_from_seed};
use milac::ls_estimation::{
    design_ls_training, digital_ls_baseline, draw_noise, run_milac_ls, TrainingBatch,
};
use milac::metrics::nmse;

fn main() -> milac::Result<()> {
    let config = SystemConfig::with_snr_db(8, 8, 10.0)?;
    let model = build_channel_model(&config, 0.8, 0.8)?;
    let schedule = design_ls_training(&config)?;

    let h = sample_channel(&model, 42);
    let noise = draw_noise(&mut rng_from_seed(7), &config);

    let analog = run_milac_ls(&h, &schedule, &noise)?;
    let batch = TrainingBatch::collect(&h, &schedule, &noise)?;
    let digital = digital_ls_baseline(&batch.y, &batch.x)?;

    println!("analog NMSE          {:.4}", nmse(&h.h, &analog.h_hat)?);
    println!("digital NMSE         {:.4}", nmse(&h.h, &digital.h_hat)?);
    println!(
        "max |difference|     {:.2e}",
        max_abs_diff(&analog.h_hat, &digital.h_hat)
    );
    println!(
        "analog online ops    {}",
        analog.ops.online().exact_real_ops()
    );
    println!(
        "digital online ops   {}",
        digital.ops.online().exact_real_ops()
    );
    Ok(())
}
