//! Small NMSE-versus-SNR sweep written as CSV and SVG into `results/`.

use milac::harness::{emit_results, run_nmse_sweep, ExperimentConfig, SweepKind};

fn main() -> milac::Result<()> {
    let mut cfg = ExperimentConfig::defaults(SweepKind::NmseVsSnr);
    cfg.sizes = vec![(8, 8)];
    cfg.trials = 2_000;
    let table = run_nmse_sweep(&cfg)?;
    for row in &table.rows {
        println!(
            "{:<13} {:>5.1} dB  {:.4e}",
            row.scheme,
            row.snr_db.unwrap_or(f64::NAN),
            row.value
        );
    }
    for path in emit_results(&table, &cfg.out_dir, "nmse_sweep", cfg.format)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
