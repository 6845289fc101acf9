//! Small-size invariant checker behind the `verify` subcommand.

use std::fmt;

use rand::Rng;

use super::config::{ExperimentConfig, Fault};
use super::{simulate_point, thread_pool, PointSetup};
use crate::channel_model::{
    build_channel_model, build_exponential_correlation, eigendecompose_correlation, sample_channel,
    SystemConfig,
};
use crate::error::Result;
use crate::linalg::{
    gaussian_matrix, max_abs_diff, max_abs_from_scaled_identity, mix_seed, real_diag,
    rng_from_seed, CMatrix, C64,
};
use crate::ls_estimation::{
    design_ls_training, dft_training_matrix, digital_ls_baseline, draw_noise, run_milac_ls,
    TrainingBatch,
};
use crate::metrics::{complexity_report, papr, Scheme};
use crate::milac_network::{
    admittance_for_combiner, admittance_for_precoder, combiner_from_admittance,
    precoder_from_admittance, unit_lower_block, LinearMap,
};
use crate::mmse_estimation::{
    allocate_training_power, digital_mmse_baseline, kkt_certificate, run_milac_mmse,
    theoretical_mmse,
};

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyCheck {
    pub name: &'static str,
    pub passed: bool,
    pub observed: f64,
    /// Threshold the observed value is compared against.
    pub expected: String,
}

impl fmt::Display for VerifyCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<34} observed={:.6e} expected {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.observed,
            self.expected
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct VerifyReport {
    pub checks: Vec<VerifyCheck>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerifyCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn at_most(&mut self, name: &'static str, observed: f64, bound: f64) {
        self.checks.push(VerifyCheck {
            name,
            passed: observed <= bound,
            observed,
            expected: format!("<= {bound:.1e}"),
        });
    }

    fn equals(&mut self, name: &'static str, observed: f64, target: f64) {
        self.checks.push(VerifyCheck {
            name,
            passed: observed == target,
            observed,
            expected: format!("== {target}"),
        });
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

/// Runs the invariant suite at `N <= 16`. `cfg.fault` injects a deliberate error.
pub fn run_verify(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    let mut rng = rng_from_seed(mix_seed(cfg.seed, 0xFEED));

    // eigen-structure
    let r = build_exponential_correlation(16, 0.8)?;
    let eig = eigendecompose_correlation(&r)?;
    let rec = &eig.vectors * real_diag(&eig.values) * eig.vectors.adjoint();
    report.at_most("eigen reconstruction (n=16)", max_abs_diff(&rec, &r), 1e-10);
    report.at_most(
        "eigenvectors unitary (n=16)",
        max_abs_from_scaled_identity(&(eig.vectors.adjoint() * &eig.vectors), 1.0),
        1e-10,
    );

    // admittance synthesis
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n_tx = rng.random_range(1..=16usize);
        let l_tx = rng.random_range(1..=n_tx);
        let n_rx = rng.random_range(1..=16usize);
        let sys = SystemConfig::new(n_tx, n_rx, l_tx, 1.0, 1.0)?;
        let f = gaussian_matrix(&mut rng, n_tx, l_tx, 1.0);
        let mut net = admittance_for_precoder(&LinearMap::precoder(f.clone()), sys.ref_admittance)?;
        if cfg.fault == Fault::Admittance && i == 0 {
            net.admittance[(l_tx, 0)] += C64::new(1e-3 * sys.ref_admittance, 0.0);
        }
        worst = worst.max(max_abs_diff(
            &precoder_from_admittance(&net, &sys)?.matrix,
            &f,
        ));
        let g = gaussian_matrix(&mut rng, n_rx, n_rx, 1.0);
        let net = admittance_for_combiner(&LinearMap::combiner(g.clone()), sys.ref_admittance)?;
        worst = worst.max(max_abs_diff(
            &combiner_from_admittance(&net, &sys)?.matrix,
            &g,
        ));
    }
    report.at_most("admittance round trip", worst, 1e-10);
    let q = unit_lower_block(&gaussian_matrix(&mut rng, 12, 5, 1.0));
    let n = q.nrows();
    let inv = CMatrix::identity(n, n).scale(2.0) - &q;
    report.at_most(
        "block inverse 2I - Q",
        max_abs_from_scaled_identity(&(&q * inv), 1.0),
        1e-12,
    );

    // LS training
    let sys = SystemConfig::with_snr_db(8, 8, 10.0)?;
    let ls = design_ls_training(&sys)?;
    let x = ls.training_matrix();
    let target = sys.p_tx / sys.n_tx as f64;
    report.at_most(
        "LS optimality, identity training",
        max_abs_from_scaled_identity(&(&x * x.adjoint()), target),
        1e-10,
    );
    let dft = dft_training_matrix(&sys)?;
    report.at_most(
        "LS optimality, DFT training",
        max_abs_from_scaled_identity(&(&dft * dft.adjoint()), target),
        1e-10,
    );
    report.at_most(
        "LS precoder energy",
        (ls.precoder_energy() - 1.0).abs(),
        1e-12,
    );

    let model = build_channel_model(&sys, 0.8, 0.8)?;
    let mut worst = 0.0f64;
    for i in 0..20 {
        let h = sample_channel(&model, mix_seed(cfg.seed, i));
        let noise = draw_noise(&mut rng, &sys);
        let batch = TrainingBatch::collect(&h, &ls, &noise)?;
        let analog = run_milac_ls(&h, &ls, &noise)?;
        let digital = digital_ls_baseline(&batch.y, &batch.x)?;
        worst = worst.max(max_abs_diff(&analog.h_hat, &digital.h_hat));
    }
    report.at_most("LS pathwise equivalence", worst, 1e-12);

    // MMSE training
    let setup = PointSetup::new(8, 8, 10.0, 0.8, 0.8, 1.0, 1)?;
    let mut worst = 0.0f64;
    let mut online = 0u64;
    for i in 0..20 {
        let h = sample_channel(&setup.model, mix_seed(cfg.seed, 100 + i));
        let noise = draw_noise(&mut rng, &setup.config);
        let y = &h.h * &setup.mmse_x + &noise;
        let analog = run_milac_mmse(&h, &setup.model, &setup.mmse_schedule, &noise)?;
        let digital = digital_mmse_baseline(&y, &setup.model, &setup.allocation, &setup.config)?;
        worst = worst.max(max_abs_diff(&analog.h_v_hat, &digital.h_hat));
        online += analog.ops.online().exact_real_ops();
    }
    report.at_most("MMSE pathwise equivalence", worst, 1e-12);
    report.equals("MiLAC online operations (audit)", online as f64, 0.0);

    let mut stationarity = 0.0f64;
    let mut complementarity = f64::NEG_INFINITY;
    for i in 0..25 {
        let tau = rng.random_range(1..=8usize);
        let n_rx = rng.random_range(1..=8usize);
        let r_v: Vec<f64> = (0..tau * n_rx)
            .map(|_| rng.random_range(0.01..5.0))
            .collect();
        let sigma2 = 10f64.powf(-rng.random_range(-10.0..30.0) / 10.0);
        let mut alloc = allocate_training_power(&r_v, sigma2, 1.0, tau, n_rx)?;
        if cfg.fault == Fault::Multiplier && i == 0 {
            alloc.multiplier *= 1.01;
        }
        let kkt = kkt_certificate(&alloc, &r_v, sigma2, 1.0, n_rx)?;
        stationarity = stationarity.max(kkt.stationarity);
        complementarity = complementarity.max(kkt.complementarity);
    }
    report.at_most("KKT stationarity (relative)", stationarity, 1e-6);
    report.at_most(
        "KKT complementarity (relative)",
        complementarity.max(0.0),
        1e-6,
    );

    // closed forms, Monte Carlo
    let pool = thread_pool(cfg.workers)?;
    let acc = simulate_point(
        &setup,
        &[Scheme::MilacLs, Scheme::MilacMmse],
        4_000,
        cfg.seed,
        &pool,
    )?;
    let ls_nmse = acc[&Scheme::MilacLs].nmse()?;
    let closed = sys.n_tx as f64 / sys.snr();
    report.at_most(
        "LS NMSE vs N_T/SNR (relative)",
        (ls_nmse / closed - 1.0).abs(),
        0.03,
    );
    let mmse = &acc[&Scheme::MilacMmse];
    let theory = theoretical_mmse(
        &setup.model.r_v,
        &setup.allocation,
        setup.config.noise_power,
    )?;
    report.at_most(
        "MMSE MSE vs theory (relative)",
        (mmse.mean_error() / theory - 1.0).abs(),
        0.02,
    );
    report.at_most("MMSE NMSE - LS NMSE", mmse.nmse()? - ls_nmse, 0.0);

    // complexity and PAPR
    let big = SystemConfig::new(64, 2048, 1, 1.0, 1.0)?;
    report.equals(
        "digital MMSE ops at 2048x64",
        complexity_report(&big, Scheme::DigitalMmse) as f64,
        2_147_483_648.0,
    );
    report.equals(
        "MiLAC online ops at 2048x64",
        complexity_report(&big, Scheme::MilacMmse) as f64,
        0.0,
    );
    let src = setup.mmse_schedule.source_matrix();
    let worst_papr = (0..src.nrows())
        .filter_map(|i| papr(&src.row(i).iter().copied().collect::<Vec<_>>()))
        .fold(0.0, f64::max);
    report.equals("MiLAC source PAPR", worst_papr, 1.0);

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::SweepKind;

    fn cfg(fault: Fault) -> ExperimentConfig {
        let mut c = ExperimentConfig::defaults(SweepKind::Verify);
        c.fault = fault;
        c.workers = 2;
        c
    }

    #[test]
    fn clean_build_passes() {
        let r = run_verify(&cfg(Fault::None)).unwrap();
        assert!(r.all_passed(), "{r}");
    }

    #[test]
    fn admittance_fault_is_caught() {
        let r = run_verify(&cfg(Fault::Admittance)).unwrap();
        let failed: Vec<_> = r.failures().map(|c| c.name).collect();
        assert_eq!(failed, vec!["admittance round trip"]);
    }

    #[test]
    fn multiplier_fault_is_caught() {
        let r = run_verify(&cfg(Fault::Multiplier)).unwrap();
        assert!(r.failures().any(|c| c.name.starts_with("KKT")));
        assert!(r.failures().all(|c| c.name.starts_with("KKT")));
    }
}
