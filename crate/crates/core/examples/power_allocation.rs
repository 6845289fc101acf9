//! Water-filling training power across SNR: power concentrates on the strong
//! eigendirections at low SNR and spreads out as SNR grows.

use milac::channel_model::{build_channel_model, SystemConfig};
use milac::mmse_estimation::{allocate_training_power, kkt_certificate};

fn main() -> milac::Result<()> {
    for snr_db in [-10.0, 0.0, 10.0, 30.0] {
        let config = SystemConfig::with_snr_db(4, 4, snr_db)?;
        let model = build_channel_model(&config, 0.8, 0.8)?;
        let alloc = allocate_training_power(
            &model.r_v,
            config.noise_power,
            config.p_tx,
            config.tau,
            config.n_rx,
        )?;
        let kkt = kkt_certificate(
            &alloc,
            &model.r_v,
            config.noise_power,
            config.p_tx,
            config.n_rx,
        )?;
        let p: Vec<String> = alloc.p.iter().map(|v| format!("{v:.3}")).collect();
        println!(
            "{snr_db:>5} dB  p = [{}]  KKT ok: {}",
            p.join(", "),
            kkt.passed()
        );
    }
    Ok(())
}
