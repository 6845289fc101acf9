//! Online real operations of each scheme as the receive array grows.

use milac::channel_model::SystemConfig;
use milac::metrics::{complexity_report, Scheme};

fn main() -> milac::Result<()> {
    println!(
        "{:>6} {:>6} {:>16} {:>16} {:>6}",
        "N_T", "N_R", "digital-ls", "digital-mmse", "milac"
    );
    for n_tx in [16, 64] {
        for n_rx in (256..=2048).step_by(256) {
            let config = SystemConfig::new(n_tx, n_rx, 1, 1.0, 1.0)?;
            println!(
                "{n_tx:>6} {n_rx:>6} {:>16} {:>16} {:>6}",
                complexity_report(&config, Scheme::DigitalLs),
                complexity_report(&config, Scheme::DigitalMmse),
                complexity_report(&config, Scheme::MilacMmse),
            );
        }
    }
    Ok(())
}
