//! Synthesizes a MiLAC admittance matrix for a precoder, writes it as CSV and
//! checks that the network realizes the requested map.

use milac::channel_model::SystemConfig;
use milac::linalg::{gaussian_matrix, max_abs_diff, rng_from_seed};
use milac::milac_network::{
    admittance_for_precoder, precoder_from_admittance, read_admittance_csv, write_admittance_csv,
    LinearMap,
};

fn main() -> milac::Result<()> {
    let config = SystemConfig::new(4, 4, 2, 1.0, 0.1)?;
    let f = gaussian_matrix(&mut rng_from_seed(5), 4, 2, 1.0);
    let net = admittance_for_precoder(&LinearMap::precoder(f.clone()), config.ref_admittance)?;

    let mut csv = Vec::new();
    write_admittance_csv(&net, &mut csv)?;
    print!("{}", String::from_utf8_lossy(&csv));

    let reread = read_admittance_csv(csv.as_slice())?;
    println!(
        "csv round trip       {:.2e}",
        max_abs_diff(&reread, &net.admittance)
    );
    let realized = precoder_from_admittance(&net, &config)?;
    println!(
        "realized vs target   {:.2e}",
        max_abs_diff(&realized.matrix, &f)
    );
    Ok(())
}
