//! Monte Carlo orchestration for the NMSE, complexity and PAPR experiments.
//!
//! Trial `i` draws its channel and noise from `mix_seed(base, i)` only, so
//! every scheme and every SNR point of a sweep sees the same random numbers.
//! Trials run on a rayon pool and are folded back in trial order, which keeps
//! results byte-identical for any worker count.

pub mod config;
pub mod output;
pub mod verify;

use std::collections::BTreeMap;

use rayon::prelude::*;

pub use config::{ExperimentConfig, Fault, OutputFormat, SweepKind};
pub use output::{emit_results, render_svg, write_csv};
pub use verify::{run_verify, VerifyCheck, VerifyReport};

use crate::channel_model::{build_channel_model, sample_channel, ChannelModel, SystemConfig};
use crate::error::{Error, Result};
use crate::linalg::{frobenius_sq, gaussian_matrix, mix_seed, rng_from_seed, CMatrix};
use crate::ls_estimation::{
    design_ls_training, dft_training_matrix, digital_ls_baseline, run_milac_ls, TrainingSchedule,
};
use crate::metrics::{
    complexity_report, complexity_report_exact, NmseAccumulator, PaprReport, Scheme,
};
use crate::mmse_estimation::{
    allocate_training_power, design_mmse_training, digital_mmse_baseline, mmse_training_matrix,
    run_milac_mmse, PowerAllocation,
};

/// One line of a result table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scheme: String,
    pub n_tx: usize,
    pub n_rx: usize,
    pub snr_db: Option<f64>,
    pub metric: String,
    pub value: f64,
    pub trials: u64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn find(
        &self,
        scheme: &str,
        n_tx: usize,
        snr_db: Option<f64>,
        metric: &str,
    ) -> Option<&ResultRow> {
        self.rows.iter().find(|r| {
            r.scheme == scheme && r.n_tx == n_tx && r.snr_db == snr_db && r.metric == metric
        })
    }
}

/// Everything fixed before the first trial of a `(size, SNR)` point.
pub struct PointSetup {
    pub config: SystemConfig,
    pub model: ChannelModel,
    pub ls_schedule: TrainingSchedule,
    pub dft: CMatrix,
    pub allocation: PowerAllocation,
    pub mmse_schedule: TrainingSchedule,
    pub mmse_x: CMatrix,
}

impl PointSetup {
    pub fn new(
        n_tx: usize,
        n_rx: usize,
        snr_db: f64,
        eps_tx: f64,
        eps_rx: f64,
        p_tx: f64,
        l_tx: usize,
    ) -> Result<Self> {
        let noise_power = p_tx * 10f64.powf(-snr_db / 10.0);
        let config = SystemConfig::new(n_tx, n_rx, l_tx, p_tx, noise_power)?;
        let model = build_channel_model(&config, eps_tx, eps_rx)?;
        let allocation = allocate_training_power(&model.r_v, noise_power, p_tx, config.tau, n_rx)?;
        Ok(Self {
            ls_schedule: design_ls_training(&config)?,
            dft: dft_training_matrix(&config)?,
            mmse_schedule: design_mmse_training(&model, &allocation, &config)?,
            mmse_x: mmse_training_matrix(&model, &allocation),
            allocation,
            model,
            config,
        })
    }
}

/// Squared estimation errors of one trial, plus `||H||_F^2`.
#[derive(Debug, Clone, Copy)]
pub struct TrialOutcome {
    pub reference: f64,
    pub errors: [Option<f64>; 4],
}

fn scheme_slot(s: Scheme) -> usize {
    Scheme::ALL
        .iter()
        .position(|&x| x == s)
        .expect("scheme listed in ALL")
}

/// Runs one trial for every scheme in `schemes` on common random numbers.
///
/// LS errors are measured on `H`, MMSE errors on the virtual channel `H_v`
/// (the two norms coincide under the unitary rotation).
pub fn run_trial(
    setup: &PointSetup,
    schemes: &[Scheme],
    base_seed: u64,
    trial: u64,
) -> Result<TrialOutcome> {
    let trial_seed = mix_seed(base_seed, trial);
    let h = sample_channel(&setup.model, mix_seed(trial_seed, 0));
    let mut rng = rng_from_seed(mix_seed(trial_seed, 1));
    let cfg = &setup.config;
    let noise = gaussian_matrix(&mut rng, cfg.n_rx, cfg.tau, 1.0).scale(cfg.noise_power.sqrt());

    let mut errors = [None; 4];
    for &scheme in schemes {
        let err = match scheme {
            Scheme::MilacLs => {
                frobenius_sq(&(&h.h - run_milac_ls(&h, &setup.ls_schedule, &noise)?.h_hat))
            }
            Scheme::DigitalLs => {
                let y = &h.h * &setup.dft + &noise;
                frobenius_sq(&(&h.h - digital_ls_baseline(&y, &setup.dft)?.h_hat))
            }
            Scheme::MilacMmse => {
                let est = run_milac_mmse(&h, &setup.model, &setup.mmse_schedule, &noise)?;
                frobenius_sq(&(&h.h_v - est.h_v_hat))
            }
            Scheme::DigitalMmse => {
                let y = &h.h * &setup.mmse_x + &noise;
                let est = digital_mmse_baseline(&y, &setup.model, &setup.allocation, cfg)?;
                frobenius_sq(&(&h.h_v - est.h_hat))
            }
        };
        errors[scheme_slot(scheme)] = Some(err);
    }
    Ok(TrialOutcome {
        reference: frobenius_sq(&h.h),
        errors,
    })
}

/// Accumulated NMSE for each requested scheme at one `(size, SNR)` point.
pub fn simulate_point(
    setup: &PointSetup,
    schemes: &[Scheme],
    trials: u64,
    base_seed: u64,
    pool: &rayon::ThreadPool,
) -> Result<BTreeMap<Scheme, NmseAccumulator>> {
    let outcomes: Vec<TrialOutcome> = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|i| run_trial(setup, schemes, base_seed, i))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut acc: BTreeMap<Scheme, NmseAccumulator> = schemes
        .iter()
        .map(|&s| (s, NmseAccumulator::default()))
        .collect();
    for o in &outcomes {
        for (&s, a) in acc.iter_mut() {
            if let Some(e) = o.errors[scheme_slot(s)] {
                a.push_values(e, o.reference);
            }
        }
    }
    Ok(acc)
}

pub fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| config::config_err("workers", e.to_string()))
}

/// NMSE versus SNR for every configured size and scheme.
pub fn run_nmse_sweep(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let pool = thread_pool(cfg.workers)?;
    let mut table = ResultTable::default();
    for &(n_tx, n_rx) in &cfg.sizes {
        for &snr_db in &cfg.snr_db {
            let setup = PointSetup::new(
                n_tx, n_rx, snr_db, cfg.eps_tx, cfg.eps_rx, cfg.p_tx, cfg.l_tx,
            )?;
            let acc = simulate_point(&setup, &cfg.schemes, cfg.trials, cfg.seed, &pool)?;
            for &scheme in &cfg.schemes {
                let a = &acc[&scheme];
                table.rows.push(ResultRow {
                    scheme: scheme.label().into(),
                    n_tx,
                    n_rx,
                    snr_db: Some(snr_db),
                    metric: "nmse".into(),
                    value: a.nmse()?,
                    trials: a.count(),
                    stderr: a.std_error(),
                });
            }
        }
    }
    Ok(table)
}

/// Online real-operation counts over the size grid; no simulation involved.
pub fn run_complexity_sweep(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let mut table = ResultTable::default();
    for &(n_tx, n_rx) in &cfg.sizes {
        let sys = SystemConfig::new(n_tx, n_rx, cfg.l_tx, cfg.p_tx, 1.0)?;
        for &scheme in &cfg.schemes {
            for (metric, value) in [
                ("online_real_ops", complexity_report(&sys, scheme)),
                (
                    "online_real_ops_exact",
                    complexity_report_exact(&sys, scheme),
                ),
            ] {
                table.rows.push(ResultRow {
                    scheme: scheme.label().into(),
                    n_tx,
                    n_rx,
                    snr_db: None,
                    metric: metric.into(),
                    value: value as f64,
                    trials: 0,
                    stderr: 0.0,
                });
            }
        }
    }
    Ok(table)
}

/// Label of the identity-trained digital LS row, which is supplementary output only.
pub const DIGITAL_IDENTITY_LABEL: &str = "digital-identity-ls-supplementary";

/// Per-chain PAPR reports at one `(size, SNR)` point.
///
/// MiLAC schemes report their source signals `c_t`; digital schemes report
/// the per-antenna rows of their training matrix.
pub fn papr_reports(setup: &PointSetup, schemes: &[Scheme]) -> Vec<PaprReport> {
    let mut out = Vec::new();
    for &scheme in schemes {
        let signals = match scheme {
            Scheme::MilacLs => setup.ls_schedule.source_matrix(),
            Scheme::MilacMmse => setup.mmse_schedule.source_matrix(),
            Scheme::DigitalLs => setup.dft.clone(),
            Scheme::DigitalMmse => setup.mmse_x.clone(),
        };
        out.push(PaprReport::from_rows(scheme.label(), &signals));
    }
    out.push(PaprReport::from_rows(
        DIGITAL_IDENTITY_LABEL,
        &setup.ls_schedule.training_matrix(),
    ));
    out
}

pub fn run_papr_report(cfg: &ExperimentConfig) -> Result<ResultTable> {
    cfg.validate()?;
    let mut table = ResultTable::default();
    for &(n_tx, n_rx) in &cfg.sizes {
        for &snr_db in &cfg.snr_db {
            let setup = PointSetup::new(
                n_tx, n_rx, snr_db, cfg.eps_tx, cfg.eps_rx, cfg.p_tx, cfg.l_tx,
            )?;
            for rep in papr_reports(&setup, &cfg.schemes) {
                let mut push = |metric: &str, value: f64| {
                    table.rows.push(ResultRow {
                        scheme: rep.label.clone(),
                        n_tx,
                        n_rx,
                        snr_db: Some(snr_db),
                        metric: metric.into(),
                        value,
                        trials: 0,
                        stderr: 0.0,
                    })
                };
                if let (Some(max), Some(mean)) = (rep.max(), rep.mean()) {
                    push("papr_max", max);
                    push("papr_mean", mean);
                }
                push("papr_zero_chains", rep.zero_chains() as f64);
            }
        }
    }
    Ok(table)
}

/// Dispatches on [`ExperimentConfig::kind`] (verify excluded: see [`run_verify`]).
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<ResultTable> {
    match cfg.kind {
        SweepKind::NmseVsSnr => run_nmse_sweep(cfg),
        SweepKind::ComplexityVsNrx => run_complexity_sweep(cfg),
        SweepKind::Papr => run_papr_report(cfg),
        SweepKind::Verify => Err(Error::Config {
            field: "kind".into(),
            reason: "verify produces a report, not a table".into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: SweepKind) -> ExperimentConfig {
        let mut c = ExperimentConfig::defaults(kind);
        c.sizes = vec![(4, 4)];
        c.snr_db = vec![0.0, 10.0];
        c.trials = 200;
        c.workers = 2;
        c
    }

    #[test]
    fn nmse_sweep_is_deterministic_across_worker_counts() {
        let mut c = small(SweepKind::NmseVsSnr);
        let a = run_nmse_sweep(&c).unwrap();
        c.workers = 1;
        let b = run_nmse_sweep(&c).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 2 * 4);
        assert!(a
            .rows
            .iter()
            .all(|r| r.value.is_finite() && r.stderr >= 0.0 && r.trials == 200));
    }

    #[test]
    fn schemes_share_random_numbers() {
        let setup = PointSetup::new(4, 3, 5.0, 0.8, 0.8, 1.0, 1).unwrap();
        let all = run_trial(&setup, &Scheme::ALL, 9, 3).unwrap();
        let one = run_trial(&setup, &[Scheme::MilacMmse], 9, 3).unwrap();
        assert_eq!(all.reference, one.reference);
        assert_eq!(all.errors[2], one.errors[2]);
        assert!(one.errors[0].is_none());
        // analog and digital paths coincide pathwise
        let d = (all.errors[2].unwrap() - all.errors[3].unwrap()).abs();
        assert!(d < 1e-10);
    }

    #[test]
    fn complexity_rows() {
        let c = ExperimentConfig::defaults(SweepKind::ComplexityVsNrx);
        let t = run_complexity_sweep(&c).unwrap();
        let r = t
            .rows
            .iter()
            .find(|r| {
                r.scheme == "digital-mmse"
                    && r.n_tx == 64
                    && r.n_rx == 2048
                    && r.metric == "online_real_ops"
            })
            .unwrap();
        assert_eq!(r.value, 2_147_483_648.0);
    }

    #[test]
    fn papr_rows() {
        let c = small(SweepKind::Papr);
        let t = run_papr_report(&c).unwrap();
        let get = |s: &str| t.find(s, 4, Some(0.0), "papr_max").unwrap().value;
        assert_eq!(get("milac-ls"), 1.0);
        assert_eq!(get("milac-mmse"), 1.0);
        assert!((get("digital-ls") - 1.0).abs() < 1e-12);
        assert!(get("digital-mmse") > 1.0);
        assert_eq!(get(DIGITAL_IDENTITY_LABEL), 4.0);
    }

    #[test]
    fn verify_kind_is_not_a_sweep() {
        assert!(run_sweep(&ExperimentConfig::defaults(SweepKind::Verify)).is_err());
    }
}
