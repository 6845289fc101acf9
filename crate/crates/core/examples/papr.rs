//! Per-chain PAPR of what each scheme actually transmits.

use milac::harness::{papr_reports, PointSetup};
use milac::metrics::Scheme;

fn main() -> milac::Result<()> {
    let setup = PointSetup::new(16, 16, 10.0, 0.8, 0.8, 1.0, 1)?;
    for report in papr_reports(&setup, &Scheme::ALL) {
        println!(
            "{:<34} max {:>7.3}  mean {:>7.3}",
            report.label,
            report.max().unwrap_or(f64::NAN),
            report.mean().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
