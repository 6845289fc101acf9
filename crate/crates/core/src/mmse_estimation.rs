//! MMSE training in the eigen domain of the channel correlation.
//!
//! With a diagonal virtual training matrix `X_v = diag(sqrt(p))` the MMSE
//! estimator of the virtual channel is diagonal:
//!
//! ```text
//! a_k = sqrt(p_t) r_k / (sigma^2 + p_t r_k),   k = t * N_R + j
//! ```
//!
//! Sending `x_t = sqrt(p_t) u_t` and combining with `G_t = A_t U_R^H` puts
//! column `t` of the virtual-channel estimate on the receive RF chains. The
//! powers `p_t` come from a KKT-based two-layer water-filling: bisection on
//! the multiplier outside, a monotone root-find per direction inside.

use crate::channel_model::{to_physical, ChannelModel, ChannelRealization, SystemConfig};
use crate::error::{invalid, shape_mismatch, Error, Result};
use crate::linalg::{real_diag, CMatrix};
use crate::ls_estimation::{
    analog_estimate, source_signal, AnalogEstimate, DigitalEstimate, SchemeTag, TrainingSchedule,
    TrainingSlot,
};
use crate::metrics::{OpCounter, Phase};

pub const MAX_ITERATIONS: usize = 200;
/// Outer stop: `|sum p - P_T| < POWER_TOL * P_T`.
pub const POWER_TOL: f64 = 1e-9;
/// Inner stop: absolute bracket width in `p_t`.
pub const INNER_TOL: f64 = 1e-12;
/// Relative tolerance of the KKT certificate.
pub const KKT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    /// Power on each transmit eigen-direction, watts.
    pub p: Vec<f64>,
    /// KKT multiplier of the sum-power constraint.
    pub multiplier: f64,
    pub active_set: Vec<usize>,
    /// Objective value `sum_k sigma^2 r_k / (sigma^2 + p_t r_k)`.
    pub objective: f64,
}

impl PowerAllocation {
    /// Equal power `P_T / tau` on every direction.
    pub fn uniform(tau: usize, p_total: f64) -> Self {
        Self {
            p: vec![p_total / tau as f64; tau],
            multiplier: f64::NAN,
            active_set: (0..tau).collect(),
            objective: f64::NAN,
        }
    }
}

fn check_inputs(r_v: &[f64], sigma2: f64, tau: usize, n_rx: usize) -> Result<()> {
    if tau == 0 || n_rx == 0 {
        return Err(invalid("tau", "tau and n_rx must be positive"));
    }
    if r_v.len() != tau * n_rx {
        return Err(shape_mismatch("r_v", (tau * n_rx, 1), (r_v.len(), 1)));
    }
    if let Some(v) = r_v.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(invalid(
            "r_v",
            format!("entries must be positive, found {v}"),
        ));
    }
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(invalid("sigma2", "noise power must be positive"));
    }
    Ok(())
}

/// `sum_j sigma^2 r_k^2 / (sigma^2 + p r_k)^2`: the marginal objective decrease
/// of direction `t`, strictly decreasing in `p`.
fn marginal_gain(r_slot: &[f64], sigma2: f64, p: f64) -> f64 {
    r_slot
        .iter()
        .map(|&r| {
            let d = sigma2 + p * r;
            sigma2 * r * r / (d * d)
        })
        .sum()
}

fn power_for_multiplier(r_slot: &[f64], sigma2: f64, mu: f64) -> Result<f64> {
    if marginal_gain(r_slot, sigma2, 0.0) <= mu {
        return Ok(0.0);
    }
    // marginal_gain(p) < n sigma^2 / p^2, so the root lies below this bound
    let mut hi = (r_slot.len() as f64 * sigma2 / mu).sqrt();
    let mut lo = 0.0;
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= INNER_TOL || mid <= lo || mid >= hi {
            return Ok(0.5 * (lo + hi));
        }
        if marginal_gain(r_slot, sigma2, mid) > mu {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if hi - lo <= INNER_TOL {
        Ok(0.5 * (lo + hi))
    } else {
        Err(Error::NoConvergence {
            solver: "per-direction power solve",
            iterations: MAX_ITERATIONS,
            residual: hi - lo,
        })
    }
}

fn powers_for_multiplier(r_v: &[f64], sigma2: f64, n_rx: usize, mu: f64) -> Result<Vec<f64>> {
    r_v.chunks(n_rx)
        .map(|slot| power_for_multiplier(slot, sigma2, mu))
        .collect()
}

/// Minimizes `sum_t sum_j sigma^2 r_k / (sigma^2 + p_t r_k)` subject to
/// `sum_t p_t <= P_T`, `p_t >= 0`.
pub fn allocate_training_power(
    r_v: &[f64],
    sigma2: f64,
    p_total: f64,
    tau: usize,
    n_rx: usize,
) -> Result<PowerAllocation> {
    check_inputs(r_v, sigma2, tau, n_rx)?;
    if !(p_total.is_finite() && p_total > 0.0) {
        return Err(invalid("p_total", "total power must be positive"));
    }

    // total power is decreasing in mu: zero at mu_hi, at least tau * P_T at mu_lo
    let slots: Vec<&[f64]> = r_v.chunks(n_rx).collect();
    let mut mu_hi = slots
        .iter()
        .map(|s| marginal_gain(s, sigma2, 0.0))
        .fold(0.0, f64::max);
    let mut mu_lo = slots
        .iter()
        .map(|s| marginal_gain(s, sigma2, p_total))
        .fold(f64::INFINITY, f64::min);

    let mut best: Option<(f64, Vec<f64>, f64)> = None;
    for _ in 0..MAX_ITERATIONS {
        let mu = (mu_lo * mu_hi).sqrt();
        let p = powers_for_multiplier(r_v, sigma2, n_rx, mu)?;
        let total: f64 = p.iter().sum();
        let residual = (total - p_total).abs();
        if residual < POWER_TOL * p_total {
            best = Some((mu, p, residual));
            break;
        }
        if total > p_total {
            mu_lo = mu;
        } else {
            mu_hi = mu;
        }
        if best.as_ref().is_none_or(|b| residual < b.2) {
            best = Some((mu, p, residual));
        }
    }

    let (multiplier, mut p, residual) = best.expect("at least one iteration ran");
    if residual >= POWER_TOL * p_total {
        return Err(Error::NoConvergence {
            solver: "power-allocation multiplier bisection",
            iterations: MAX_ITERATIONS,
            residual,
        });
    }
    // the objective is strictly decreasing in every p_t, so the budget is tight
    let total: f64 = p.iter().sum();
    let s = p_total / total;
    p.iter_mut().for_each(|v| *v *= s);
    let objective = mmse_objective(r_v, &p, sigma2, n_rx);
    let active_set = p
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > 0.0)
        .map(|(t, _)| t)
        .collect();
    Ok(PowerAllocation {
        p,
        multiplier,
        active_set,
        objective,
    })
}

fn mmse_objective(r_v: &[f64], p: &[f64], sigma2: f64, n_rx: usize) -> f64 {
    r_v.chunks(n_rx)
        .zip(p)
        .map(|(slot, &pt)| {
            slot.iter()
                .map(|&r| sigma2 * r / (sigma2 + pt * r))
                .sum::<f64>()
        })
        .sum()
}

/// Outcome of checking an allocation against the KKT conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    /// Largest `|g_t(p_t) - mu| / mu` over active directions.
    pub stationarity: f64,
    /// Largest `(g_t(0) - mu) / mu` over inactive directions (should be <= 0).
    pub complementarity: f64,
    /// `sum p - P_T` (should be <= 1e-9).
    pub power_excess: f64,
    pub min_power: f64,
}

impl KktReport {
    pub fn passed(&self) -> bool {
        self.stationarity <= KKT_TOL
            && self.complementarity <= KKT_TOL
            && self.power_excess <= 1e-9
            && self.min_power >= 0.0
    }
}

pub fn kkt_certificate(
    alloc: &PowerAllocation,
    r_v: &[f64],
    sigma2: f64,
    p_total: f64,
    n_rx: usize,
) -> Result<KktReport> {
    check_inputs(r_v, sigma2, alloc.p.len(), n_rx)?;
    let mu = alloc.multiplier;
    let mut stationarity = 0.0f64;
    let mut complementarity = f64::NEG_INFINITY;
    for (slot, &pt) in r_v.chunks(n_rx).zip(&alloc.p) {
        if pt > 0.0 {
            stationarity = stationarity.max((marginal_gain(slot, sigma2, pt) - mu).abs() / mu);
        } else {
            complementarity = complementarity.max((marginal_gain(slot, sigma2, 0.0) - mu) / mu);
        }
    }
    if !mu.is_finite() || mu < 0.0 {
        stationarity = f64::INFINITY;
    }
    Ok(KktReport {
        stationarity,
        complementarity,
        power_excess: alloc.p.iter().sum::<f64>() - p_total,
        min_power: alloc.p.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

/// `sum_k sigma^2 r_k / (sigma^2 + p_t r_k)`: the trace of the MMSE error
/// covariance for a diagonal virtual training matrix.
pub fn theoretical_mmse(r_v: &[f64], alloc: &PowerAllocation, sigma2: f64) -> Result<f64> {
    let tau = alloc.p.len();
    if tau == 0 || !r_v.len().is_multiple_of(tau) {
        return Err(shape_mismatch("theoretical_mmse", (tau, 1), (r_v.len(), 1)));
    }
    let n_rx = r_v.len() / tau;
    check_inputs(r_v, sigma2, tau, n_rx)?;
    Ok(mmse_objective(r_v, &alloc.p, sigma2, n_rx))
}

/// Diagonal MMSE estimator of the virtual channel.
#[derive(Debug, Clone, PartialEq)]
pub struct MmseEstimatorDiagonal {
    /// Column-major weights, `a_diag[t * n_rx + j]`.
    pub a_diag: Vec<f64>,
    pub n_rx: usize,
}

impl MmseEstimatorDiagonal {
    pub fn new(r_v: &[f64], alloc: &PowerAllocation, sigma2: f64, n_rx: usize) -> Result<Self> {
        check_inputs(r_v, sigma2, alloc.p.len(), n_rx)?;
        let mut a_diag = Vec::with_capacity(r_v.len());
        for (slot, &pt) in r_v.chunks(n_rx).zip(&alloc.p) {
            if pt < 0.0 {
                return Err(invalid("p", "allocated powers must be nonnegative"));
            }
            let amp = pt.sqrt();
            a_diag.extend(slot.iter().map(|&r| amp * r / (sigma2 + pt * r)));
        }
        Ok(Self { a_diag, n_rx })
    }

    /// `A_t`, the diagonal block for slot `t`.
    pub fn block(&self, t: usize) -> CMatrix {
        real_diag(&self.a_diag[t * self.n_rx..(t + 1) * self.n_rx])
    }
}

/// `F_t = sqrt(p_t / (L_T P_T)) u_t 1^T`, `G_t = A_t U_R^H`.
pub fn design_mmse_training(
    model: &ChannelModel,
    alloc: &PowerAllocation,
    config: &SystemConfig,
) -> Result<TrainingSchedule> {
    config.validate()?;
    if model.n_tx() != config.n_tx || model.n_rx() != config.n_rx {
        return Err(shape_mismatch(
            "design_mmse_training: model",
            (config.n_rx, config.n_tx),
            (model.n_rx(), model.n_tx()),
        ));
    }
    if alloc.p.len() != config.tau {
        return Err(shape_mismatch(
            "design_mmse_training: allocation",
            (config.tau, 1),
            (alloc.p.len(), 1),
        ));
    }
    let estimator = MmseEstimatorDiagonal::new(&model.r_v, alloc, config.noise_power, config.n_rx)?;
    let source = source_signal(config);
    let u_rx_h = model.u_rx.adjoint();
    let slots = (0..config.tau)
        .map(|t| {
            let amp = (alloc.p[t] / (config.l_tx as f64 * config.p_tx)).sqrt();
            let u_t = model.u_tx.column(t);
            let mut precoder = CMatrix::zeros(config.n_tx, config.l_tx);
            for c in 0..config.l_tx {
                precoder.set_column(c, &u_t.scale(amp));
            }
            TrainingSlot {
                precoder,
                combiner: estimator.block(t) * &u_rx_h,
                source: source.clone(),
            }
        })
        .collect();
    Ok(TrainingSchedule {
        slots,
        scheme: SchemeTag::Mmse,
    })
}

/// Virtual-domain estimate from the analog path, plus its physical-domain rotation.
#[derive(Debug, Clone)]
pub struct MmseEstimate {
    /// Column `t` is `z_t`.
    pub h_v_hat: CMatrix,
    /// `U_R H_v_hat U_T^H`; an offline post-step, not part of the online path.
    pub h_hat: CMatrix,
    pub ops: OpCounter,
}

/// MiLAC MMSE: column `t` of the virtual-channel estimate is read from `z_t`.
pub fn run_milac_mmse(
    h: &ChannelRealization,
    model: &ChannelModel,
    schedule: &TrainingSchedule,
    noise: &CMatrix,
) -> Result<MmseEstimate> {
    if schedule.scheme != SchemeTag::Mmse {
        return Err(invalid("schedule", "expected an MMSE training schedule"));
    }
    let AnalogEstimate {
        h_hat: h_v_hat,
        ops,
    } = analog_estimate(h, schedule, noise)?;
    Ok(MmseEstimate {
        h_hat: to_physical(model, &h_v_hat),
        h_v_hat,
        ops,
    })
}

/// Digital MMSE from the received matrix: `Y_v = U_R^H Y`, then the diagonal
/// weights entrywise. Returns the virtual-channel estimate.
pub fn digital_mmse_baseline(
    y: &CMatrix,
    model: &ChannelModel,
    alloc: &PowerAllocation,
    config: &SystemConfig,
) -> Result<DigitalEstimate> {
    if y.shape() != (config.n_rx, config.tau) {
        return Err(shape_mismatch(
            "digital_mmse_baseline",
            (config.n_rx, config.tau),
            y.shape(),
        ));
    }
    let estimator = MmseEstimatorDiagonal::new(&model.r_v, alloc, config.noise_power, config.n_rx)?;
    let mut ops = OpCounter::new(Phase::Online);
    let y_v = ops.matmul(&model.u_rx.adjoint(), y)?;
    let h_hat = ops.weight_entries(&estimator.a_diag, &y_v)?;
    Ok(DigitalEstimate { h_hat, ops })
}

/// Digital MMSE training matrix `X = U_T diag(sqrt(p))`.
pub fn mmse_training_matrix(model: &ChannelModel, alloc: &PowerAllocation) -> CMatrix {
    let amps: Vec<f64> = alloc.p.iter().map(|p| p.sqrt()).collect();
    &model.u_tx * real_diag(&amps)
}
