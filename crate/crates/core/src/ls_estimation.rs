//! Least-squares training with MiLACs, and the DFT-trained digital baseline.
//!
//! With `x_t = sqrt(P_T / N_T) e_t` and `G_t = sqrt(N_T / P_T) I`, the signal
//! at the receive RF chains in slot `t` is already column `t` of the LS
//! estimate, so the analog path needs no digital post-processing.

use std::f64::consts::PI;

use rand::Rng;

use crate::channel_model::{ChannelRealization, SystemConfig};
use crate::error::{invalid, shape_mismatch, Error, Result};
use crate::linalg::{gaussian_matrix, reciprocal_condition, CMatrix, CVector, C64};
use crate::metrics::{OpCounter, Phase};
use crate::milac_network::{
    admittance_for_combiner, admittance_for_precoder, LinearMap, MilacNetwork,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeTag {
    Ls,
    Mmse,
}

/// Precoder, combiner and source signal for one training slot.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSlot {
    /// `F_t`, `N_T x L_T`.
    pub precoder: CMatrix,
    /// `G_t`, `L_R x N_R`.
    pub combiner: CMatrix,
    /// `c_t`, length `L_T`.
    pub source: CVector,
}

impl TrainingSlot {
    /// `x_t = F_t c_t`.
    pub fn training_vector(&self) -> CVector {
        &self.precoder * &self.source
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSchedule {
    pub slots: Vec<TrainingSlot>,
    pub scheme: SchemeTag,
}

impl TrainingSchedule {
    pub fn tau(&self) -> usize {
        self.slots.len()
    }

    /// `X = [x_1, ..., x_tau]`.
    pub fn training_matrix(&self) -> CMatrix {
        let n_tx = self.slots.first().map_or(0, |s| s.precoder.nrows());
        let mut x = CMatrix::zeros(n_tx, self.tau());
        for (t, slot) in self.slots.iter().enumerate() {
            x.set_column(t, &slot.training_vector());
        }
        x
    }

    /// `sum_t ||F_t||_F^2`.
    pub fn precoder_energy(&self) -> f64 {
        self.slots.iter().map(|s| s.precoder.norm_squared()).sum()
    }

    /// Source signals stacked as `L_T x tau` (one row per transmit RF chain).
    pub fn source_matrix(&self) -> CMatrix {
        let l_tx = self.slots.first().map_or(0, |s| s.source.len());
        let mut c = CMatrix::zeros(l_tx, self.tau());
        for (t, slot) in self.slots.iter().enumerate() {
            c.set_column(t, &slot.source);
        }
        c
    }

    /// Admittance matrices `(Y_F,t, Y_G,t)` realizing every slot.
    pub fn realize(&self, y0: f64) -> Result<Vec<(MilacNetwork, MilacNetwork)>> {
        self.slots
            .iter()
            .map(|s| {
                Ok((
                    admittance_for_precoder(&LinearMap::precoder(s.precoder.clone()), y0)?,
                    admittance_for_combiner(&LinearMap::combiner(s.combiner.clone()), y0)?,
                ))
            })
            .collect()
    }
}

/// `c_t = sqrt(P_T / L_T) 1`.
pub fn source_signal(config: &SystemConfig) -> CVector {
    let amp = (config.p_tx / config.l_tx as f64).sqrt();
    CVector::from_element(config.l_tx, C64::new(amp, 0.0))
}

/// Training matrix, received matrix and noise for one coherence block.
#[derive(Debug, Clone)]
pub struct TrainingBatch {
    pub x: CMatrix,
    pub y: CMatrix,
    pub n: CMatrix,
    /// Per-slot receive RF chain outputs `z_t`, stacked as columns.
    pub z_columns: CMatrix,
}

impl TrainingBatch {
    /// Runs every slot of `schedule` over the channel; `y = H x + n`.
    pub fn collect(
        h: &ChannelRealization,
        schedule: &TrainingSchedule,
        noise: &CMatrix,
    ) -> Result<Self> {
        let z_columns = stack_slot_outputs(h, schedule, noise)?;
        let x = schedule.training_matrix();
        let y = &h.h * &x + noise;
        Ok(Self {
            x,
            y,
            n: noise.clone(),
            z_columns,
        })
    }
}

/// Noise matrix `N_R x tau` with i.i.d. CN(0, sigma^2) entries.
pub fn draw_noise<R: Rng + ?Sized>(rng: &mut R, config: &SystemConfig) -> CMatrix {
    gaussian_matrix(rng, config.n_rx, config.tau, config.noise_power)
}

/// `F_t = sqrt(1/(L_T N_T)) e_t 1^T`, `G_t = sqrt(N_T / P_T) I`.
pub fn design_ls_training(config: &SystemConfig) -> Result<TrainingSchedule> {
    config.validate()?;
    let (n_tx, l_tx) = (config.n_tx, config.l_tx);
    let f_amp = (1.0 / (l_tx * n_tx) as f64).sqrt();
    let g_amp = (n_tx as f64 / config.p_tx).sqrt();
    let combiner = CMatrix::identity(config.l_rx, config.n_rx).scale(g_amp);
    let source = source_signal(config);
    let slots = (0..config.tau)
        .map(|t| {
            let mut precoder = CMatrix::zeros(n_tx, l_tx);
            precoder.row_mut(t).fill(C64::new(f_amp, 0.0));
            TrainingSlot {
                precoder,
                combiner: combiner.clone(),
                source: source.clone(),
            }
        })
        .collect();
    Ok(TrainingSchedule {
        slots,
        scheme: SchemeTag::Ls,
    })
}

/// `z_t = G_t (H F_t c_t + n_t)`, using only this slot's quantities.
pub fn simulate_training_slot(
    h: &ChannelRealization,
    slot: &TrainingSlot,
    noise_t: &CVector,
) -> Result<CVector> {
    let (n_rx, n_tx) = h.h.shape();
    if slot.precoder.nrows() != n_tx || slot.precoder.ncols() != slot.source.len() {
        return Err(shape_mismatch(
            "simulate_training_slot: precoder",
            (n_tx, slot.source.len()),
            slot.precoder.shape(),
        ));
    }
    if slot.combiner.ncols() != n_rx {
        return Err(shape_mismatch(
            "simulate_training_slot: combiner",
            (slot.combiner.nrows(), n_rx),
            slot.combiner.shape(),
        ));
    }
    if noise_t.len() != n_rx {
        return Err(shape_mismatch(
            "simulate_training_slot: noise",
            (n_rx, 1),
            (noise_t.len(), 1),
        ));
    }
    let y_t = &h.h * slot.training_vector() + noise_t;
    Ok(&slot.combiner * y_t)
}

fn stack_slot_outputs(
    h: &ChannelRealization,
    schedule: &TrainingSchedule,
    noise: &CMatrix,
) -> Result<CMatrix> {
    if noise.shape() != (h.h.nrows(), schedule.tau()) {
        return Err(shape_mismatch(
            "noise matrix",
            (h.h.nrows(), schedule.tau()),
            noise.shape(),
        ));
    }
    let l_rx = schedule.slots.first().map_or(0, |s| s.combiner.nrows());
    let mut z = CMatrix::zeros(l_rx, schedule.tau());
    for (t, slot) in schedule.slots.iter().enumerate() {
        let z_t = simulate_training_slot(h, slot, &noise.column(t).into_owned())?;
        z.set_column(t, &z_t);
    }
    Ok(z)
}

/// Estimate read straight off the receive RF chains.
///
/// `ops` stays empty: the columns are stored as they arrive, with no digital
/// arithmetic applied to them.
#[derive(Debug, Clone)]
pub struct AnalogEstimate {
    pub h_hat: CMatrix,
    pub ops: OpCounter,
}

/// Estimate computed digitally from the received matrix.
#[derive(Debug, Clone)]
pub struct DigitalEstimate {
    pub h_hat: CMatrix,
    pub ops: OpCounter,
}

/// MiLAC LS: column `t` of the estimate is `z_t`.
pub fn run_milac_ls(
    h: &ChannelRealization,
    schedule: &TrainingSchedule,
    noise: &CMatrix,
) -> Result<AnalogEstimate> {
    if schedule.scheme != SchemeTag::Ls {
        return Err(invalid("schedule", "expected an LS training schedule"));
    }
    analog_estimate(h, schedule, noise)
}

pub(crate) fn analog_estimate(
    h: &ChannelRealization,
    schedule: &TrainingSchedule,
    noise: &CMatrix,
) -> Result<AnalogEstimate> {
    Ok(AnalogEstimate {
        h_hat: stack_slot_outputs(h, schedule, noise)?,
        ops: OpCounter::new(Phase::Online),
    })
}

/// `X = sqrt(P_T) / N_T * DFT_{N_T}`, so that `X X^H = (P_T / N_T) I`.
pub fn dft_training_matrix(config: &SystemConfig) -> Result<CMatrix> {
    config.validate()?;
    let n = config.n_tx;
    let amp = config.p_tx.sqrt() / n as f64;
    Ok(CMatrix::from_fn(n, config.tau, |i, j| {
        let k = (i * j) % n;
        C64::from_polar(amp, -2.0 * PI * k as f64 / n as f64)
    }))
}

/// `H_hat = Y X^H (X X^H)^{-1}`.
///
/// The estimator `X^H (X X^H)^{-1}` is formed offline; the single online
/// product `Y * estimator` is what `ops.online()` reports.
pub fn digital_ls_baseline(y: &CMatrix, x: &CMatrix) -> Result<DigitalEstimate> {
    if y.ncols() != x.ncols() {
        return Err(shape_mismatch(
            "digital_ls_baseline",
            (y.nrows(), x.ncols()),
            y.shape(),
        ));
    }
    let gram = x * x.adjoint();
    let rcond = reciprocal_condition(&gram);
    if rcond.is_nan() || rcond < 1e-12 {
        return Err(Error::Singular { rcond });
    }
    let gram_inv = gram.try_inverse().ok_or(Error::Singular { rcond })?;

    let mut ops = OpCounter::new(Phase::Offline);
    let estimator = ops.matmul(&x.adjoint(), &gram_inv)?;
    ops.set_phase(Phase::Online);
    let h_hat = ops.matmul(y, &estimator)?;
    Ok(DigitalEstimate { h_hat, ops })
}
